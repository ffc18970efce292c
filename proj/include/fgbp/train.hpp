#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fgbp/fgnn.hpp"
#include "fgbp/synthetic.hpp"

namespace fgbp {

struct TrainConfig {
  int epochs = 100;
  AdamConfig adam;
  ModelConfig model;
  std::uint64_t seed = 0;
};

struct EpochMetric {
  int epoch = 0;
  double train_loss = 0.0;
  double eval_accuracy = 0.0;
};

struct TrainResult {
  FgnnModel model;
  std::vector<EpochMetric> metrics;
};

// Minimizes mean per-variable cross-entropy against the MAP labels with one
// Adam step per instance, in a fixed deterministic order.
TrainResult train_map_model(const std::vector<LabeledInstance>& train,
                            const std::vector<LabeledInstance>& eval,
                            const TrainConfig& cfg);

// Fraction of variables whose argmax logit matches the MAP label.
double evaluate_model(const FgnnModel& model,
                      const std::vector<LabeledInstance>& data);

// Same metric for the Max-Sum engine decode, as a baseline.
double evaluate_maxsum(const std::vector<LabeledInstance>& data);

std::string metrics_to_json(const std::vector<EpochMetric>& metrics);

}  // namespace fgbp
