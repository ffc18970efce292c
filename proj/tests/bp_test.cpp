#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "fgbp/bp.hpp"
#include "fgbp/exact.hpp"
#include "fgbp/rng.hpp"
#include "test_util.hpp"

using namespace fgbp;
using namespace fgbp::testutil;

TEST_CASE("factor_to_var_update oracle on a single pairwise factor") {
  std::vector<VariableNode> vars{{0, 2}, {1, 2}};
  std::vector<FactorNode> factors{
      {0, {0, 1}, DenseLogPotential{log_of({2, 2}, {1, 2, 3, 4})}}};
  auto g = build_graph(vars, factors);

  auto state = init_messages(g, BpMode::kSumProduct);
  // Uniform incoming: message to x0 is normalize([1.5, 3.5]) = [0.3, 0.7].
  auto m0 = factor_to_var_update(state, g, 0, 0, BpMode::kSumProduct);
  CHECK(m0[0] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(m0[1] == doctest::Approx(0.7).epsilon(1e-12));
  auto m1 = factor_to_var_update(state, g, 0, 1, BpMode::kSumProduct);
  CHECK(m1[0] == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(m1[1] == doctest::Approx(0.6).epsilon(1e-12));

  auto mstate = init_messages(g, BpMode::kMaxSum);
  // Zero incoming: max over the other axis, shifted so the max is 0.
  auto mm0 = factor_to_var_update(mstate, g, 0, 0, BpMode::kMaxSum);
  CHECK(mm0[0] == doctest::Approx(std::log(2.0) - std::log(4.0)).epsilon(1e-12));
  CHECK(mm0[1] == doctest::Approx(0.0));
}

TEST_CASE("var_to_factor_update multiplies the other factor messages") {
  std::vector<VariableNode> vars{{0, 2}};
  std::vector<FactorNode> factors{
      {0, {0}, DenseLogPotential{DenseTensor({2}, {0.0, 0.0})}},
      {1, {0}, DenseLogPotential{DenseTensor({2}, {0.0, 0.0})}}};
  auto g = build_graph(vars, factors);
  auto state = init_messages(g, BpMode::kSumProduct);
  state.factor_to_var[1][0] = {0.2, 0.8};
  auto m = var_to_factor_update(state, g, 0, 0, BpMode::kSumProduct);
  CHECK(m[0] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(m[1] == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("sum-product on trees equals exact marginals") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL}) {
    Rng rng(seed);
    auto g = random_tree(rng, 12);
    BpConfig cfg;
    auto r = run_bp(g, cfg);
    REQUIRE(r.converged);
    auto exact = exact_marginals(g);
    for (int i = 0; i < 12; ++i) {
      for (int k = 0; k < 2; ++k) {
        CHECK(r.beliefs[i][k] == doctest::Approx(exact[i][k]).epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("max-sum on trees decodes the exact MAP") {
  for (std::uint64_t seed : {11ULL, 12ULL, 13ULL, 14ULL, 15ULL}) {
    Rng rng(seed);
    auto g = random_tree(rng, 12);
    BpConfig cfg;
    cfg.mode = BpMode::kMaxSum;
    auto r = run_bp(g, cfg);
    REQUIRE(r.converged);
    CHECK(decode_map_from_beliefs(r.beliefs) == exact_map(g).assignment);
  }
}

TEST_CASE("repeated runs are byte-identical") {
  Rng rng(77);
  auto g = random_loopy(rng, 10, 4);
  BpConfig cfg;
  auto a = run_bp(g, cfg);
  auto b = run_bp(g, cfg);
  CHECK(a.converged == b.converged);
  CHECK(a.iterations == b.iterations);
  CHECK(a.beliefs == b.beliefs);
}

TEST_CASE("damping converges to the same fixed point on a tree") {
  Rng rng(5);
  auto g = random_tree(rng, 10);
  BpConfig plain;
  BpConfig damped;
  damped.damping = 0.5;
  damped.max_iterations = 400;
  auto a = run_bp(g, plain);
  auto b = run_bp(g, damped);
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  for (int i = 0; i < 10; ++i) {
    for (int k = 0; k < 2; ++k) {
      CHECK(a.beliefs[i][k] == doctest::Approx(b.beliefs[i][k]).epsilon(1e-6));
    }
  }
}

TEST_CASE("sum-product beliefs are normalized distributions") {
  Rng rng(8);
  auto g = random_loopy(rng, 12, 6);
  auto r = run_bp(g, BpConfig{});
  for (const auto& b : r.beliefs) {
    double total = 0.0;
    for (double v : b) {
      CHECK(v >= 0.0);
      CHECK(std::isfinite(v));
      total += v;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("hard constraints survive both modes without NaN") {
  std::vector<VariableNode> vars{{0, 2}, {1, 2}, {2, 2}};
  std::vector<FactorNode> factors{{0, {0, 1, 2}, BudgetPotential{1}}};
  for (int i = 0; i < 3; ++i) {
    factors.push_back({1 + i, {i},
                       DenseLogPotential{DenseTensor({2}, {0.0, 2.0 + i})}});
  }
  auto g = build_graph(vars, factors);

  BpConfig sum_cfg;
  sum_cfg.damping = 0.3;
  sum_cfg.max_iterations = 300;
  auto rs = run_bp(g, sum_cfg);
  for (const auto& b : rs.beliefs) {
    for (double v : b) CHECK_FALSE(std::isnan(v));
  }

  BpConfig max_cfg;
  max_cfg.mode = BpMode::kMaxSum;
  auto rm = run_bp(g, max_cfg);
  for (const auto& b : rm.beliefs) {
    for (double v : b) CHECK_FALSE(std::isnan(v));
  }
  // The strongest unary wins the single allowed one.
  CHECK(decode_map_from_beliefs(rm.beliefs) == Assignment{0, 0, 1});
  CHECK(decode_map_from_beliefs(rm.beliefs) == exact_map(g).assignment);
}

TEST_CASE("parity fast path equals the generic factor update") {
  Rng rng(123);
  for (int arity : {2, 3, 4, 5}) {
    std::vector<VariableNode> vars;
    std::vector<int> scope;
    for (int i = 0; i < arity; ++i) {
      vars.push_back({i, 2});
      scope.push_back(i);
    }
    std::vector<FactorNode> factors{{0, scope, ParityPotential{}}};
    auto g = build_graph(vars, factors);
    auto state = init_messages(g, BpMode::kSumProduct);
    for (int pos = 0; pos < arity; ++pos) {
      const double p = rng.uniform(0.05, 0.95);
      state.var_to_factor[0][pos] = {p, 1.0 - p};
    }
    for (int target = 0; target < arity; ++target) {
      auto fast = parity_factor_message_fast(state.var_to_factor[0], target);
      auto generic =
          factor_to_var_update(state, g, 0, target, BpMode::kSumProduct);
      CHECK(fast[0] == doctest::Approx(generic[0]).epsilon(1e-10));
      CHECK(fast[1] == doctest::Approx(generic[1]).epsilon(1e-10));
    }
  }
}

TEST_CASE("parity factor in a full run stays consistent with exact") {
  std::vector<VariableNode> vars{{0, 2}, {1, 2}, {2, 2}};
  std::vector<FactorNode> factors{{0, {0, 1, 2}, ParityPotential{}}};
  Rng rng(4);
  for (int i = 0; i < 3; ++i) {
    factors.push_back({1 + i, {i},
                       DenseLogPotential{DenseTensor(
                           {2}, {rng.gaussian(), rng.gaussian()})}});
  }
  auto g = build_graph(vars, factors);
  auto r = run_bp(g, BpConfig{});
  REQUIRE(r.converged);
  auto exact = exact_marginals(g);
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 2; ++k) {
      CHECK(r.beliefs[i][k] == doctest::Approx(exact[i][k]).epsilon(1e-8));
    }
  }
}

TEST_CASE("decode ties go to the lowest state") {
  std::vector<std::vector<double>> beliefs{{0.5, 0.5}, {0.2, 0.8}, {0.7, 0.7}};
  CHECK(decode_map_from_beliefs(beliefs) == Assignment{0, 1, 0});
}

TEST_CASE("max-sum scope-1 factors act as unaries, not messengers") {
  // A variable with only unary factors: beliefs are the summed unaries.
  std::vector<VariableNode> vars{{0, 2}};
  std::vector<FactorNode> factors{
      {0, {0}, DenseLogPotential{DenseTensor({2}, {0.5, -0.25})}},
      {1, {0}, DenseLogPotential{DenseTensor({2}, {0.25, 0.5})}}};
  auto g = build_graph(vars, factors);
  BpConfig cfg;
  cfg.mode = BpMode::kMaxSum;
  auto r = run_bp(g, cfg);
  CHECK(r.converged);
  // Summed unaries [0.75, 0.25], shifted so the max is 0.
  CHECK(r.beliefs[0][0] == doctest::Approx(0.0));
  CHECK(r.beliefs[0][1] == doctest::Approx(-0.5));
}
