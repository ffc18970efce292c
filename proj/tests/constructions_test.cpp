#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "fgbp/constructions.hpp"
#include "fgbp/max_decomp.hpp"
#include "fgbp/rng.hpp"

using namespace fgbp;

TEST_CASE("pairwise max identity") {
  auto net = build_matrix_max_net(2);
  CHECK(mlp_eval(net, {3.0, 5.0})[0] == 5.0);
  CHECK(mlp_eval(net, {5.0, 3.0})[0] == 5.0);
  CHECK(mlp_eval(net, {-2.0, -7.0})[0] == -2.0);
  CHECK(net.layers.size() == 2);
}

TEST_CASE("l=1 max net is the identity") {
  auto net = build_matrix_max_net(1);
  CHECK(mlp_eval(net, {-4.25})[0] == -4.25);
}

TEST_CASE("max net depth is 2 ceil(log2 l)") {
  CHECK(build_matrix_max_net(2).layers.size() == 2);
  CHECK(build_matrix_max_net(3).layers.size() == 4);
  CHECK(build_matrix_max_net(4).layers.size() == 4);
  CHECK(build_matrix_max_net(5).layers.size() == 6);
  CHECK(build_matrix_max_net(8).layers.size() == 6);
}

TEST_CASE("max net equals the max exactly on random real inputs") {
  Rng rng(42);
  for (int l : {1, 2, 3, 4, 5, 7, 8}) {
    auto net = build_matrix_max_net(l);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> x(l);
      for (double& v : x) v = rng.gaussian() * 4.0;
      const double want = *std::max_element(x.begin(), x.end());
      CHECK(mlp_eval(net, x)[0] == doctest::Approx(want).epsilon(1e-12));
    }
  }
}

TEST_CASE("lossless aggregation recovers the concatenation") {
  auto mats = build_lossless_agg_matrices(2, 1);
  // f_1 = [3], f_2 = [5]: max(Q_1 f_1, Q_2 f_2) = [3, 5].
  std::vector<std::vector<double>> f{{3.0}, {5.0}};
  std::vector<double> agg(2, 0.0);
  for (int i = 0; i < 2; ++i) {
    for (int row = 0; row < 2; ++row) {
      agg[row] = std::max(agg[row], mats[i][row] * f[i][0]);
    }
  }
  CHECK(agg == std::vector<double>{3.0, 5.0});

  Rng rng(5);
  const int l = 4, k = 3;
  auto big = build_lossless_agg_matrices(l, k);
  std::vector<std::vector<double>> feats(l, std::vector<double>(k));
  for (auto& v : feats) {
    for (double& x : v) x = rng.uniform(0.0, 2.0);
  }
  feats[2][1] = 0.0;
  std::vector<double> got(static_cast<std::size_t>(l) * k, 0.0);
  for (int i = 0; i < l; ++i) {
    for (int row = 0; row < l * k; ++row) {
      double acc = 0.0;
      for (int c = 0; c < k; ++c) acc += big[i][row * k + c] * feats[i][c];
      got[row] = std::max(got[row], acc);
    }
  }
  for (int i = 0; i < l; ++i) {
    for (int c = 0; c < k; ++c) {
      CHECK(got[i * k + c] == feats[i][c]);
    }
  }
}

TEST_CASE("feature-sum pipeline computes column sums") {
  auto t = build_feature_sum_tensors(2, 2);
  CHECK(column_sums_via_tensors(t, {1.0, 2.0, 3.0, 4.0}) ==
        std::vector<double>{4.0, 6.0});
  CHECK(column_sums_via_tensors(t, {0.0, 0.0, 0.0, 0.0}) ==
        std::vector<double>{0.0, 0.0});

  Rng rng(17);
  auto big = build_feature_sum_tensors(4, 5);
  std::vector<double> x(20);
  for (double& v : x) v = rng.uniform(0.0, 3.0);
  auto got = column_sums_via_tensors(big, x);
  for (int j = 0; j < 5; ++j) {
    double want = 0.0;
    for (int i = 0; i < 4; ++i) want += x[i * 5 + j];
    CHECK(got[j] == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("one simulated iteration equals one decomposed step") {
  Rng rng(3);
  std::vector<VariableNode> vars{{0, 2}, {1, 2}};
  std::vector<double> vals{rng.gaussian(), rng.gaussian(), rng.gaussian(),
                           rng.gaussian()};
  std::vector<FactorNode> factors{
      {0, {0}, DenseLogPotential{DenseTensor({2}, {0.4, -0.3})}},
      {1, {1}, DenseLogPotential{DenseTensor({2}, {-0.1, 0.6})}},
      {2, {0, 1},
       MaxDecompPotential{decompose_max(DenseTensor({2, 2}, vals))}}};
  auto g = build_graph(vars, factors);

  DecomposedMessageState ref = init_decomposed_state(g);
  decomposed_mp_step(g, ref);

  bool called = false;
  simulate_maxproduct_via_fgnn_traced(
      g, 1, [&](const DecomposedMessageState& s) {
        called = true;
        for (int i = 0; i < 2; ++i) {
          for (int x = 0; x < 2; ++x) {
            CHECK(s.beliefs[i][x] ==
                  doctest::Approx(ref.beliefs[i][x]).epsilon(1e-9));
          }
        }
        for (std::size_t p = 0; p < 2; ++p) {
          for (int x = 0; x < 2; ++x) {
            CHECK(s.msg[2][p][x] ==
                  doctest::Approx(ref.msg[2][p][x]).epsilon(1e-9));
          }
        }
      });
  CHECK(called);
}

TEST_CASE("constant potentials give flat beliefs on both paths") {
  std::vector<VariableNode> vars{{0, 2}, {1, 2}, {2, 2}};
  std::vector<FactorNode> factors;
  for (int pair = 0; pair + 1 < 3; ++pair) {
    factors.push_back(
        {pair, {pair, pair + 1},
         MaxDecompPotential{decompose_max(
             DenseTensor({2, 2}, std::vector<double>(4, 0.7)))}});
  }
  auto g = build_graph(vars, factors);
  auto sim = simulate_maxproduct_via_fgnn(g, 3);
  BpConfig cfg;
  cfg.mode = BpMode::kMaxSum;
  cfg.max_iterations = 3;
  auto ref = run_decomposed_max_product(g, cfg);
  for (int i = 0; i < 3; ++i) {
    CHECK(sim.beliefs[i][0] == doctest::Approx(sim.beliefs[i][1]));
    CHECK(sim.beliefs[i][0] == doctest::Approx(ref.beliefs[i][0]));
  }
  CHECK(sim.decode == Assignment{0, 0, 0});
}

TEST_CASE("simulation rejects non-decomposed factors") {
  std::vector<VariableNode> vars{{0, 2}, {1, 2}};
  std::vector<FactorNode> factors{
      {0, {0, 1}, DenseLogPotential{DenseTensor({2, 2})}}};
  auto g = build_graph(vars, factors);
  CHECK_THROWS(simulate_maxproduct_via_fgnn(g, 1));
}

TEST_CASE("certifiers pass on a clean build") {
  for (const auto& report : run_construction_certifiers(2026)) {
    CAPTURE(report.name);
    CAPTURE(report.max_err);
    CHECK(report.pass);
  }
}
