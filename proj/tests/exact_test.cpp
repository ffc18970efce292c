#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "fgbp/exact.hpp"
#include "fgbp/rng.hpp"
#include "test_util.hpp"

using namespace fgbp;
using namespace fgbp::testutil;

TEST_CASE("marginals of a single pairwise factor") {
  // Potential values [[1,2],[3,4]], no unaries: p(x_0) = [0.3, 0.7].
  std::vector<VariableNode> vars{{0, 2}, {1, 2}};
  std::vector<FactorNode> factors{
      {0, {0, 1}, DenseLogPotential{log_of({2, 2}, {1, 2, 3, 4})}}};
  auto g = build_graph(vars, factors);
  auto m = exact_marginals(g);
  CHECK(m[0][0] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(m[0][1] == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(m[1][0] == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("uniform unary gives uniform marginal") {
  std::vector<VariableNode> vars{{0, 2}};
  std::vector<FactorNode> factors{
      {0, {0}, DenseLogPotential{DenseTensor({2}, {0.0, 0.0})}}};
  auto g = build_graph(vars, factors);
  auto m = exact_marginals(g);
  CHECK(m[0][0] == doctest::Approx(0.5));
  CHECK(m[0][1] == doctest::Approx(0.5));
  CHECK(log_partition_function(g) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("log-domain path agrees with linear-domain enumeration") {
  Rng rng(17);
  auto g = random_loopy(rng, 8, 4);
  auto m = exact_marginals(g);

  // Independent linear-domain enumeration.
  std::vector<int> shape(8, 2);
  std::vector<std::vector<double>> acc(8, std::vector<double>(2, 0.0));
  double z = 0.0;
  for (const auto& a : enumerate_assignments(shape)) {
    const double w = std::exp(assignment_log_score(g, a));
    z += w;
    for (int i = 0; i < 8; ++i) acc[i][a[i]] += w;
  }
  for (int i = 0; i < 8; ++i) {
    for (int k = 0; k < 2; ++k) {
      CHECK(m[i][k] == doctest::Approx(acc[i][k] / z).epsilon(1e-10));
    }
  }
  double total = 0.0;
  for (int i = 0; i < 8; ++i) {
    total = m[i][0] + m[i][1];
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("MAP on the fixed pairwise potential") {
  // Potential values (0, 0.1, 0.2, 1), uniform unaries: argmax (1,1).
  std::vector<VariableNode> vars{{0, 2}, {1, 2}};
  std::vector<FactorNode> factors{
      {0, {0, 1}, DenseLogPotential{log_of({2, 2}, {0, 0.1, 0.2, 1})}},
      {1, {0}, DenseLogPotential{DenseTensor({2}, {0.0, 0.0})}},
      {2, {1}, DenseLogPotential{DenseTensor({2}, {0.0, 0.0})}}};
  auto g = build_graph(vars, factors);
  auto r = exact_map(g);
  CHECK(r.assignment == Assignment{1, 1});
  CHECK(r.log_score == doctest::Approx(std::log(1.0)).epsilon(1e-12));
}

TEST_CASE("budget k=0 forces all-zero even against unaries") {
  std::vector<VariableNode> vars{{0, 2}, {1, 2}, {2, 2}};
  std::vector<FactorNode> factors{{0, {0, 1, 2}, BudgetPotential{0}}};
  for (int i = 0; i < 3; ++i) {
    factors.push_back({1 + i, {i},
                       DenseLogPotential{DenseTensor({2}, {0.0, 5.0})}});
  }
  auto g = build_graph(vars, factors);
  auto r = exact_map(g);
  CHECK(r.assignment == Assignment{0, 0, 0});
}

TEST_CASE("MAP beats random assignments") {
  Rng rng(23);
  auto g = random_loopy(rng, 10, 5);
  auto r = exact_map(g);
  CHECK(r.log_score ==
        doctest::Approx(assignment_log_score(g, r.assignment)).epsilon(1e-12));
  for (int t = 0; t < 1000; ++t) {
    Assignment a(10);
    for (int i = 0; i < 10; ++i) a[i] = rng.uniform_int(2);
    CHECK(assignment_log_score(g, a) <= r.log_score + 1e-12);
  }
}

TEST_CASE("log Z of the pairwise example and additivity over components") {
  std::vector<VariableNode> vars{{0, 2}, {1, 2}};
  std::vector<FactorNode> factors{
      {0, {0, 1}, DenseLogPotential{log_of({2, 2}, {1, 2, 3, 4})}}};
  auto g = build_graph(vars, factors);
  CHECK(log_partition_function(g) == doctest::Approx(std::log(10.0)).epsilon(1e-12));

  // Two disconnected copies: log Z adds.
  std::vector<VariableNode> vars2{{0, 2}, {1, 2}, {2, 2}, {3, 2}};
  std::vector<FactorNode> factors2{
      {0, {0, 1}, DenseLogPotential{log_of({2, 2}, {1, 2, 3, 4})}},
      {1, {2, 3}, DenseLogPotential{log_of({2, 2}, {2, 1, 1, 2})}}};
  auto g2 = build_graph(vars2, factors2);
  CHECK(log_partition_function(g2) ==
        doctest::Approx(std::log(10.0) + std::log(6.0)).epsilon(1e-12));
}

TEST_CASE("MAP score shifts by exactly a factor constant") {
  Rng rng(31);
  auto g = random_loopy(rng, 6, 2);
  auto base = exact_map(g);

  auto factors = g.factors();
  auto& dl = std::get<DenseLogPotential>(factors[2].potential);
  std::vector<double> shifted = dl.log_values.data();
  for (double& v : shifted) v += 3.25;
  factors[2].potential =
      DenseLogPotential{DenseTensor(dl.log_values.shape(), shifted)};
  auto g2 = build_graph(g.variables(), factors);
  auto moved = exact_map(g2);
  CHECK(moved.assignment == base.assignment);
  CHECK(moved.log_score == doctest::Approx(base.log_score + 3.25).epsilon(1e-10));
}

TEST_CASE("degenerate and oversized models rejected") {
  std::vector<VariableNode> vars{{0, 2}};
  std::vector<FactorNode> factors{
      {0, {0}, DenseLogPotential{DenseTensor({2}, {kNegInf, kNegInf})}}};
  auto g = build_graph(vars, factors);
  CHECK_THROWS(exact_marginals(g));
  CHECK_THROWS(exact_map(g));

  Rng rng(1);
  auto big = random_loopy(rng, 30, 0);
  ExactOptions opts;
  opts.state_space_cap = 1 << 20;
  CHECK_THROWS(exact_map(big, opts));
}
