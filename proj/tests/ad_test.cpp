#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>

#include "fgbp/ad.hpp"
#include "fgbp/rng.hpp"

using namespace fgbp;
using ad::AggMode;
using ad::Tape;

TEST_CASE("elementwise op values") {
  Tape tape;
  auto x = tape.input({-1.0, 2.0});
  CHECK(tape.value(tape.relu(x)) == std::vector<double>{0.0, 2.0});

  auto a = tape.input({1.0, 2.0});
  auto b = tape.input({3.0, 5.0});
  CHECK(tape.value(tape.add(a, b)) == std::vector<double>{4.0, 7.0});
  CHECK(tape.value(tape.mul(a, b)) == std::vector<double>{3.0, 10.0});
  CHECK(tape.value(tape.scale(a, -2.0)) == std::vector<double>{-2.0, -4.0});
  CHECK(tape.value(tape.concat({a, b})) ==
        std::vector<double>{1.0, 2.0, 3.0, 5.0});
}

TEST_CASE("linear with identity weight and zero bias is the input") {
  Tape tape;
  auto w = tape.input({1.0, 0.0, 0.0, 1.0});
  auto b = tape.input({0.0, 0.0});
  auto x = tape.input({3.5, -2.0});
  CHECK(tape.value(tape.linear(w, x, b, 2, 2)) ==
        std::vector<double>{3.5, -2.0});
  CHECK_THROWS(tape.linear(w, x, b, 3, 2));
}

TEST_CASE("aggregate values") {
  Tape tape;
  auto a = tape.input({1.0, 5.0});
  auto b = tape.input({3.0, 2.0});
  CHECK(tape.value(tape.aggregate({a, b}, AggMode::kMax, 2)) ==
        std::vector<double>{3.0, 5.0});
  CHECK(tape.value(tape.aggregate({a, a, a}, AggMode::kSum, 2)) ==
        std::vector<double>{3.0, 15.0});
  auto c = tape.input({2.0, 3.0});
  auto d = tape.input({4.0, 5.0});
  CHECK(tape.value(tape.aggregate({c, d}, AggMode::kProd, 2)) ==
        std::vector<double>{8.0, 15.0});
  CHECK(tape.value(tape.aggregate({}, AggMode::kSum, 3)) ==
        std::vector<double>{0.0, 0.0, 0.0});
  CHECK(tape.value(tape.aggregate({}, AggMode::kProd, 2)) ==
        std::vector<double>{1.0, 1.0});
  auto short_vec = tape.input({1.0});
  CHECK_THROWS(tape.aggregate({a, short_vec}, AggMode::kSum, 2));
}

TEST_CASE("cross-entropy shrinks as the true-logit margin grows") {
  double prev = 1e300;
  for (double margin : {0.0, 1.0, 2.0, 4.0}) {
    Tape tape;
    auto z = tape.input({margin, 0.0});
    const double loss = tape.value(tape.softmax_cross_entropy(z, 0))[0];
    CHECK(loss < prev);
    prev = loss;
  }
  // Exact value for logits [0, 0]: log 2.
  Tape tape;
  auto z = tape.input({0.0, 0.0});
  CHECK(tape.value(tape.softmax_cross_entropy(z, 1))[0] ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("softmax-CE gradient matches the closed form for a linear model") {
  Rng rng(3);
  const int rows = 3, cols = 4;
  std::vector<double> wv(rows * cols), bv(rows), xv(cols);
  for (double& v : wv) v = rng.gaussian();
  for (double& v : bv) v = rng.gaussian();
  for (double& v : xv) v = rng.gaussian();
  const int label = 1;

  Tape tape;
  auto w = tape.input(wv);
  auto b = tape.input(bv);
  auto x = tape.input(xv);
  auto z = tape.linear(w, x, b, rows, cols);
  auto loss = tape.softmax_cross_entropy(z, label);
  tape.backward(loss);

  const auto& zv = tape.value(z);
  double hi = zv[0];
  for (double v : zv) hi = std::max(hi, v);
  double total = 0.0;
  for (double v : zv) total += std::exp(v - hi);
  for (int r = 0; r < rows; ++r) {
    double p = std::exp(zv[r] - hi) / total;
    if (r == label) p -= 1.0;
    CHECK(tape.grad(b)[r] == doctest::Approx(p).epsilon(1e-12));
    for (int c = 0; c < cols; ++c) {
      CHECK(tape.grad(w)[r * cols + c] ==
            doctest::Approx(p * xv[c]).epsilon(1e-12));
    }
  }
}

TEST_CASE("unused parameter gets a zero gradient") {
  Tape tape;
  auto used = tape.input({1.0, -2.0});
  auto unused = tape.input({5.0, 6.0});
  auto loss = tape.softmax_cross_entropy(used, 0);
  tape.backward(loss);
  CHECK(tape.grad(unused) == std::vector<double>{0.0, 0.0});
}

TEST_CASE("max aggregator routes tied gradients to the lowest index") {
  Tape tape;
  auto a = tape.input({2.0, 1.0});
  auto b = tape.input({2.0, 3.0});
  auto m = tape.aggregate({a, b}, AggMode::kMax, 2);
  auto loss = tape.softmax_cross_entropy(m, 0);
  tape.backward(loss);
  // Coordinate 0 ties at 2.0: gradient goes to `a` only.
  CHECK(tape.grad(a)[0] != 0.0);
  CHECK(tape.grad(b)[0] == 0.0);
  // Coordinate 1: b wins outright.
  CHECK(tape.grad(a)[1] == 0.0);
  CHECK(tape.grad(b)[1] != 0.0);
}

TEST_CASE("composite graph passes a central-difference check") {
  // loss(params) built from every op family; compare backward with numeric
  // derivatives coordinate by coordinate.
  Rng rng(11);
  std::vector<double> params(26);
  for (double& v : params) v = rng.gaussian();

  auto eval = [](const std::vector<double>& p, Tape* out_tape,
                 Tape::NodeId* out_param) {
    Tape tape;
    auto all = tape.input(p);
    // Slice via matvec against constant selector matrices.
    auto slice = [&](int offset, int len, int total) {
      std::vector<double> sel(static_cast<std::size_t>(len) * total, 0.0);
      for (int i = 0; i < len; ++i) sel[i * total + offset + i] = 1.0;
      return tape.matvec(tape.input(sel), all, len, total);
    };
    const int n = static_cast<int>(p.size());
    auto w = slice(0, 8, n);        // 2x4 matrix
    auto b = slice(8, 2, n);
    auto x = slice(10, 4, n);
    auto y = slice(14, 4, n);
    auto w2 = slice(18, 4, n);      // 2x2 matrix
    auto u = slice(22, 2, n);
    auto v = slice(24, 2, n);

    auto h = tape.relu(tape.linear(w, tape.mul(x, y), b, 2, 4));
    auto h2 = tape.matvec(w2, h, 2, 2);
    auto agg = tape.aggregate({h2, tape.mul(u, v), tape.scale(h, 0.5)},
                              AggMode::kProd, 2);
    auto cat = tape.concat({agg, tape.aggregate({h, h2}, AggMode::kMax, 2)});
    std::vector<double> reduce(4, 1.0);
    auto z = tape.matvec(tape.input({1, 1, 0, 0, 0, 0, 1, 1}), cat, 2, 4);
    (void)reduce;
    auto loss = tape.softmax_cross_entropy(z, 0);
    if (out_tape) {
      *out_tape = std::move(tape);
      *out_param = all;
      return 0.0;
    }
    return tape.value(loss)[0];
  };

  Tape tape;
  Tape::NodeId pnode = 0;
  eval(params, &tape, &pnode);
  // Re-run the recorded graph's loss node: it is the last node on the tape.
  auto loss_id = tape.size() - 1;
  tape.backward(loss_id);

  const double eps = 1e-6;
  for (std::size_t c = 0; c < params.size(); ++c) {
    auto up = params, down = params;
    up[c] += eps;
    down[c] -= eps;
    const double numeric =
        (eval(up, nullptr, nullptr) - eval(down, nullptr, nullptr)) /
        (2.0 * eps);
    const double analytic = tape.grad(pnode)[c];
    CHECK(analytic ==
          doctest::Approx(numeric).epsilon(1e-5).scale(
              std::max(1.0, std::abs(numeric))));
  }
}
