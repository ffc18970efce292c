#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fgbp/decomposed_mp.hpp"
#include "fgbp/fgnn.hpp"
#include "fgbp/graph.hpp"

namespace fgbp {

// ReLU network of depth 2*ceil(log2 l) computing max(x_1..x_l) exactly via
// pairwise max(x1,x2) = Relu(x1-x2) + Relu(x2) - Relu(-x2); inputs shorter
// than the next power of two are padded with copies of the last element.
MlpParams build_matrix_max_net(int l);

// l block matrices Q_i of shape (l*k) x k (row-major). For non-negative
// feature vectors f_i, elementwise-max of {Q_i f_i} is the concatenation
// [f_1, ..., f_l].
std::vector<std::vector<double>> build_lossless_agg_matrices(int l, int k);

// Constant tensors W (k x l x kl, flat index ((i*l)+j)*k*l + r) and
// Q (l x kl, row-major): for non-negative X (k x l row-major),
// y_ir = sum_j W[i,j,r] x_ij, yhat_r = max_i y_ir, column_sums = Q yhat.
struct FeatureSumTensors {
  int k = 0;
  int l = 0;
  std::vector<double> w;
  std::vector<double> q;
};

FeatureSumTensors build_feature_sum_tensors(int k, int l);

// The Prop.-3 pipeline applied to a non-negative k x l row-major matrix.
std::vector<double> column_sums_via_tensors(const FeatureSumTensors& t,
                                            const std::vector<double>& x);

// Fixed-weight FGNN evaluation of the decomposed Max-Product iteration; all
// maxima run through build_matrix_max_net and all set sums through the
// lossless-aggregation + feature-sum pipeline (shifted by a per-call offset
// to meet their non-negativity precondition, with the exact correction
// subtracted). Every non-unary factor must be MaxDecomp-typed with finite
// unary potentials.
struct SimulateResult {
  std::vector<std::vector<double>> beliefs;
  Assignment decode;
};

SimulateResult simulate_maxproduct_via_fgnn(const FactorGraph& g,
                                            int iterations);

// As above, invoking `observer` with the message state after each iteration.
SimulateResult simulate_maxproduct_via_fgnn_traced(
    const FactorGraph& g, int iterations,
    const std::function<void(const DecomposedMessageState&)>& observer);

// Seeded certifiers for the fixed-weight constructions; used by the CLI.
struct CertifierReport {
  std::string name;
  bool pass = false;
  double max_err = 0.0;
};

std::vector<CertifierReport> run_construction_certifiers(std::uint64_t seed);

}  // namespace fgbp
