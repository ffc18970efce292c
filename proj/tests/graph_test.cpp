#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "fgbp/graph.hpp"
#include "fgbp/rng.hpp"

using namespace fgbp;

namespace {

FactorGraph fig2_graph() {
  std::vector<VariableNode> vars;
  for (int i = 0; i < 5; ++i) vars.push_back({i, 2});
  std::vector<FactorNode> factors;
  factors.push_back(
      {0, {0, 1, 2}, DenseLogPotential{DenseTensor({2, 2, 2})}});
  factors.push_back(
      {1, {0, 3, 4}, DenseLogPotential{DenseTensor({2, 2, 2})}});
  return build_graph(vars, factors);
}

}  // namespace

TEST_CASE("build_graph adjacency mirrors scopes") {
  auto g = fig2_graph();
  CHECK(g.factors_of(0) == std::vector<int>{0, 1});
  CHECK(g.factors_of(1) == std::vector<int>{0});
  CHECK(g.factors_of(4) == std::vector<int>{1});
  CHECK(g.num_edges() == 6);

  std::size_t degree_total = 0;
  for (const auto& v : g.variables()) degree_total += g.factors_of(v.id).size();
  CHECK(degree_total == g.num_edges());
}

TEST_CASE("single variable, single unary factor") {
  std::vector<VariableNode> vars{{0, 2}};
  std::vector<FactorNode> factors{
      {0, {0}, DenseLogPotential{DenseTensor({2}, {0.0, 1.0})}}};
  auto g = build_graph(vars, factors);
  CHECK(g.num_edges() == 1);
}

TEST_CASE("invalid graphs rejected") {
  std::vector<VariableNode> vars{{0, 2}, {1, 2}, {2, 2}};
  // Unsorted scope.
  std::vector<FactorNode> bad{
      {0, {2, 1}, DenseLogPotential{DenseTensor({2, 2})}}};
  CHECK_THROWS(build_graph(vars, bad));
  // Cardinality mismatch against the table shape.
  std::vector<FactorNode> mismatch{
      {0, {0, 1}, DenseLogPotential{DenseTensor({2, 3})}}};
  CHECK_THROWS(build_graph(vars, mismatch));
  // Budget on a non-binary variable.
  std::vector<VariableNode> vars3{{0, 3}};
  std::vector<FactorNode> budget{{0, {0}, BudgetPotential{1}}};
  CHECK_THROWS(build_graph(vars3, budget));
}

TEST_CASE("materialize budget log table") {
  std::vector<VariableNode> vars{{0, 2}, {1, 2}};
  std::vector<FactorNode> factors{{0, {0, 1}, BudgetPotential{1}}};
  auto g = build_graph(vars, factors);
  auto t = materialize_log_table(g, g.factors()[0]);
  CHECK(t[0] == 0.0);
  CHECK(t[1] == 0.0);
  CHECK(t[2] == 0.0);
  CHECK(t[3] == kNegInf);
}

TEST_CASE("budget with k == scope size is vacuous") {
  std::vector<VariableNode> vars{{0, 2}, {1, 2}, {2, 2}};
  std::vector<FactorNode> factors{{0, {0, 1, 2}, BudgetPotential{3}}};
  auto g = build_graph(vars, factors);
  auto t = materialize_log_table(g, g.factors()[0]);
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(t[i] == 0.0);
}

TEST_CASE("materialize parity log table") {
  std::vector<VariableNode> vars{{0, 2}, {1, 2}, {2, 2}};
  std::vector<FactorNode> factors{{0, {0, 1, 2}, ParityPotential{}}};
  auto g = build_graph(vars, factors);
  auto t = materialize_log_table(g, g.factors()[0]);
  for (const auto& a : enumerate_assignments(std::vector<int>{2, 2, 2})) {
    const int ones = a[0] + a[1] + a[2];
    CHECK(t.at(a) == (ones % 2 == 0 ? 0.0 : kNegInf));
  }
}

TEST_CASE("materialize CP log table matches log of densify") {
  Rng rng(13);
  const int rank = 2;
  std::vector<std::vector<double>> mats(2);
  for (auto& m : mats) {
    m.resize(2 * rank);
    for (double& v : m) v = rng.uniform(0.1, 1.0);
  }
  CPTensor cp({2, 2}, rank, mats);
  std::vector<VariableNode> vars{{0, 2}, {1, 2}};
  std::vector<FactorNode> factors{{0, {0, 1}, CpPotential{cp}}};
  auto g = build_graph(vars, factors);
  auto t = materialize_log_table(g, g.factors()[0]);
  auto dense = densify(cp);
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(t[i] == doctest::Approx(std::log(dense[i])).epsilon(1e-12));
  }
}

TEST_CASE("CP with non-positive densified entry rejected") {
  CPTensor cp({2}, 1, {{1.0, -1.0}});
  std::vector<VariableNode> vars{{0, 2}};
  std::vector<FactorNode> factors{{0, {0}, CpPotential{cp}}};
  auto g = build_graph(vars, factors);
  CHECK_THROWS_AS(materialize_log_table(g, g.factors()[0]), std::domain_error);
}

TEST_CASE("json round trip of the example graph") {
  auto g = fig2_graph();
  auto text = graph_to_json(g);
  auto g2 = graph_from_json(text);
  CHECK(graph_to_json(g2) == text);
  CHECK(g2.num_variables() == 5);
  CHECK(g2.factors()[1].scope == std::vector<int>{0, 3, 4});
}

TEST_CASE("json rejects empty variables and bad schema") {
  CHECK_THROWS(graph_from_json(R"({"variables":[],"factors":[]})"));
  CHECK_THROWS(graph_from_json("not json"));
  CHECK_THROWS(graph_from_json(
      R"({"variables":[{"id":0,"cardinality":2}],"factors":[{"id":0,"scope":[0],"potential":{"kind":"mystery"}}]})"));
}

TEST_CASE("100 seeded random graphs round trip byte-identically") {
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const int nv = 1 + rng.uniform_int(6);
    std::vector<VariableNode> vars;
    for (int i = 0; i < nv; ++i) vars.push_back({i, 2 + rng.uniform_int(2)});
    std::vector<FactorNode> factors;
    const int nf = rng.uniform_int(5);
    for (int fi = 0; fi < nf; ++fi) {
      // Random non-empty ascending scope.
      std::vector<int> scope;
      for (int v = 0; v < nv; ++v) {
        if (rng.bernoulli(0.4)) scope.push_back(v);
      }
      if (scope.empty()) scope.push_back(rng.uniform_int(nv));
      std::vector<int> shape;
      bool all_binary = true;
      for (int v : scope) {
        shape.push_back(vars[v].cardinality);
        all_binary = all_binary && vars[v].cardinality == 2;
      }
      FactorNode f;
      f.id = fi;
      f.scope = scope;
      const int kind = rng.uniform_int(all_binary ? 4 : 2);
      if (kind == 0) {
        std::vector<double> vals(state_space_size(shape));
        for (double& v : vals) v = rng.gaussian();
        if (!vals.empty()) vals[0] = kNegInf;  // exercise the -inf encoding
        f.potential = DenseLogPotential{DenseTensor(shape, vals)};
      } else if (kind == 1) {
        const int rank = 1 + rng.uniform_int(3);
        std::vector<std::vector<double>> mats;
        for (int d : shape) {
          std::vector<double> m(d * rank);
          for (double& v : m) v = rng.uniform(0.1, 2.0);
          mats.push_back(m);
        }
        f.potential = CpPotential{CPTensor(shape, rank, mats)};
      } else if (kind == 2) {
        f.potential = BudgetPotential{rng.uniform_int(1 + (int)scope.size())};
      } else {
        f.potential = ParityPotential{};
      }
      factors.push_back(std::move(f));
    }
    auto g = build_graph(vars, factors);
    auto text = graph_to_json(g);
    CHECK(graph_to_json(graph_from_json(text)) == text);
  }
}
