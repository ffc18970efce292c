#pragma once

#include <string>
#include <vector>

#include "fgbp/ad.hpp"
#include "fgbp/graph.hpp"
#include "fgbp/rng.hpp"

namespace fgbp {

struct MlpLayer {
  int rows = 0;  // output dim
  int cols = 0;  // input dim
  std::vector<double> weight;  // row-major rows x cols
  std::vector<double> bias;    // length rows
  bool relu = false;
};

struct MlpParams {
  std::vector<MlpLayer> layers;

  int in_dim() const { return layers.empty() ? 0 : layers.front().cols; }
  int out_dim() const { return layers.empty() ? 0 : layers.back().rows; }
};

// An MLP whose output is reshaped to a rows x cols matrix.
struct QNetParams {
  MlpParams net;
  int rows = 0;
  int cols = 0;
};

enum class Aggregator { kMax, kSum, kProd };

struct FgnnLayerParams {
  QNetParams q_vf;  // edge feature -> (l x m_vf.out) matrix
  MlpParams m_vf;   // [g_c, f_i] -> message
  QNetParams q_fv;  // edge feature -> (k x m_fv.out) matrix
  MlpParams m_fv;
  Aggregator agg = Aggregator::kSum;
  bool residual = false;
};

struct FgnnModel {
  int k = 0;  // variable feature width
  int l = 0;  // factor feature width
  int num_states = 2;
  int max_arity = 8;
  MlpParams var_embed;  // raw variable feature -> k
  MlpParams fac_embed;  // raw factor feature -> l
  std::vector<FgnnLayerParams> layers;
  MlpParams classifier;  // k -> num_states logits
};

// Raw features. Edge features are one per (factor, scope position).
struct GraphFeatures {
  std::vector<std::vector<double>> var_raw;
  std::vector<std::vector<double>> fac_raw;
  std::vector<std::vector<std::vector<double>>> edge;
};

// Feature layout for synthetic-style graphs: variable feature = unary
// log-potential sums; factor feature = kind one-hot + zero-padded dense table
// (pairwise or smaller) + normalized budget; edge feature = scope-position
// one-hot (max_arity wide) + the factor kind one-hot.
GraphFeatures default_features(const FactorGraph& g, int max_arity);
int default_var_feature_dim(int num_states);
int default_fac_feature_dim(int num_states);
int default_edge_feature_dim(int max_arity);

struct ModelConfig {
  int k = 8;
  int l = 8;
  int hidden = 8;
  int num_layers = 3;
  int num_states = 2;
  int max_arity = 8;
  Aggregator agg = Aggregator::kSum;
  bool residual = true;
};

FgnnModel init_model(const ModelConfig& cfg, Rng& rng);

// Plain forward pass of one MLP on raw values (no tape).
std::vector<double> mlp_eval(const MlpParams& mlp, std::vector<double> x);

// Forward pass recorded on a tape; param_nodes line up with flatten_params.
struct ForwardTrace {
  ad::Tape tape;
  std::vector<ad::Tape::NodeId> logits;       // one per variable
  std::vector<ad::Tape::NodeId> param_nodes;  // one per parameter tensor
};

ForwardTrace fgnn_forward(const FgnnModel& model, const FactorGraph& g,
                          const GraphFeatures& features);

// Plain value-only forward.
std::vector<std::vector<double>> fgnn_logits(const FgnnModel& model,
                                             const FactorGraph& g,
                                             const GraphFeatures& features);

// Parameter tensors in a fixed traversal order.
std::vector<double> flatten_params(const FgnnModel& model);
void unflatten_params(FgnnModel& model, const std::vector<double>& flat);

// Gradient of mean per-variable cross-entropy against `labels`, flattened in
// flatten_params order. Returns the loss.
double loss_and_gradient(const FgnnModel& model, const FactorGraph& g,
                         const GraphFeatures& features,
                         const Assignment& labels, std::vector<double>* grad);

// Central-difference check of loss_and_gradient on >= min(coords, 200)
// seeded coordinates; returns the max relative error.
double grad_check(const FgnnModel& model, const FactorGraph& g,
                  const Assignment& labels, double epsilon = 1e-5,
                  int max_coords = 200, std::uint64_t seed = 0);

struct AdamConfig {
  double lr = 3e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long long t = 0;
};

void adam_step(std::vector<double>& params, const std::vector<double>& grads,
               AdamState& state, const AdamConfig& cfg);

std::string model_to_json(const FgnnModel& model);
FgnnModel model_from_json(const std::string& text);

}  // namespace fgbp
