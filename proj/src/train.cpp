#include "fgbp/train.hpp"

#include <utility>

#include "json.hpp"

#include "fgbp/bp.hpp"

namespace fgbp {

TrainResult train_map_model(const std::vector<LabeledInstance>& train,
                            const std::vector<LabeledInstance>& eval,
                            const TrainConfig& cfg) {
  Rng rng(cfg.seed);
  FgnnModel model = init_model(cfg.model, rng);

  std::vector<GraphFeatures> train_feats;
  train_feats.reserve(train.size());
  for (const auto& inst : train) {
    train_feats.push_back(default_features(inst.graph, cfg.model.max_arity));
  }

  std::vector<double> params = flatten_params(model);
  AdamState adam;
  adam.m.assign(params.size(), 0.0);
  adam.v.assign(params.size(), 0.0);

  TrainResult result{std::move(model), {}};
  std::vector<double> grad;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double loss_sum = 0.0;
    for (std::size_t i = 0; i < train.size(); ++i) {
      loss_sum += loss_and_gradient(result.model, train[i].graph,
                                    train_feats[i], train[i].labels, &grad);
      adam_step(params, grad, adam, cfg.adam);
      unflatten_params(result.model, params);
    }
    EpochMetric metric;
    metric.epoch = epoch;
    metric.train_loss = train.empty() ? 0.0 : loss_sum / train.size();
    metric.eval_accuracy = evaluate_model(result.model, eval);
    result.metrics.push_back(metric);
  }
  return result;
}

double evaluate_model(const FgnnModel& model,
                      const std::vector<LabeledInstance>& data) {
  long long hits = 0, total = 0;
  for (const auto& inst : data) {
    const auto feats = default_features(inst.graph, model.max_arity);
    const auto logits = fgnn_logits(model, inst.graph, feats);
    const Assignment decode = decode_map_from_beliefs(logits);
    for (std::size_t i = 0; i < decode.size(); ++i) {
      hits += decode[i] == inst.labels[i];
      ++total;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(hits) / total;
}

double evaluate_maxsum(const std::vector<LabeledInstance>& data) {
  BpConfig cfg;
  cfg.mode = BpMode::kMaxSum;
  long long hits = 0, total = 0;
  for (const auto& inst : data) {
    const auto result = run_bp(inst.graph, cfg);
    const Assignment decode = decode_map_from_beliefs(result.beliefs);
    for (std::size_t i = 0; i < decode.size(); ++i) {
      hits += decode[i] == inst.labels[i];
      ++total;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(hits) / total;
}

std::string metrics_to_json(const std::vector<EpochMetric>& metrics) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& m : metrics) {
    doc.push_back({{"epoch", m.epoch},
                   {"train_loss", m.train_loss},
                   {"eval_accuracy", m.eval_accuracy}});
  }
  return doc.dump(2) + "\n";
}

}  // namespace fgbp
