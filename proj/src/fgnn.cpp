#include "fgbp/fgnn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fgbp/bp.hpp"
#include "json.hpp"

namespace fgbp {

namespace {

constexpr int kNumKinds = 5;  // dense, cp, maxdecomp, budget, parity

int kind_index(const Potential& p) {
  if (std::holds_alternative<DenseLogPotential>(p)) return 0;
  if (std::holds_alternative<CpPotential>(p)) return 1;
  if (std::holds_alternative<MaxDecompPotential>(p)) return 2;
  if (std::holds_alternative<BudgetPotential>(p)) return 3;
  return 4;
}

double squash(double v) { return std::clamp(v, -10.0, 10.0); }

template <typename ModelT, typename Fn>
void visit_mlps(ModelT& model, Fn fn) {
  fn(model.var_embed);
  fn(model.fac_embed);
  for (auto& layer : model.layers) {
    fn(layer.q_vf.net);
    fn(layer.m_vf);
    fn(layer.q_fv.net);
    fn(layer.m_fv);
  }
  fn(model.classifier);
}

MlpParams make_mlp(const std::vector<int>& dims, bool relu_hidden, Rng& rng) {
  MlpParams mlp;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    MlpLayer layer;
    layer.cols = dims[i];
    layer.rows = dims[i + 1];
    layer.relu = relu_hidden && i + 2 < dims.size();
    const double bound = std::sqrt(6.0 / (layer.cols + layer.rows));
    layer.weight.resize(static_cast<std::size_t>(layer.rows) * layer.cols);
    for (double& w : layer.weight) w = rng.uniform(-bound, bound);
    layer.bias.assign(layer.rows, 0.0);
    mlp.layers.push_back(std::move(layer));
  }
  return mlp;
}

// Per-MLP tape handles, one (weight, bias) node pair per layer.
struct TapeMlp {
  const MlpParams* p = nullptr;
  std::vector<std::pair<ad::Tape::NodeId, ad::Tape::NodeId>> wb;
};

TapeMlp register_mlp(ad::Tape& tape, const MlpParams& mlp,
                     std::vector<ad::Tape::NodeId>* param_nodes) {
  TapeMlp out;
  out.p = &mlp;
  for (const auto& layer : mlp.layers) {
    const auto w = tape.input(layer.weight);
    const auto b = tape.input(layer.bias);
    out.wb.push_back({w, b});
    if (param_nodes) {
      param_nodes->push_back(w);
      param_nodes->push_back(b);
    }
  }
  return out;
}

ad::Tape::NodeId mlp_apply(ad::Tape& tape, const TapeMlp& mlp,
                           ad::Tape::NodeId x) {
  for (std::size_t i = 0; i < mlp.p->layers.size(); ++i) {
    const auto& layer = mlp.p->layers[i];
    x = tape.linear(mlp.wb[i].first, x, mlp.wb[i].second, layer.rows,
                    layer.cols);
    if (layer.relu) x = tape.relu(x);
  }
  return x;
}

ad::AggMode to_ad(Aggregator a) {
  switch (a) {
    case Aggregator::kMax:
      return ad::AggMode::kMax;
    case Aggregator::kProd:
      return ad::AggMode::kProd;
    default:
      return ad::AggMode::kSum;
  }
}

struct TapeModel {
  TapeMlp var_embed, fac_embed, classifier;
  struct Layer {
    TapeMlp q_vf, m_vf, q_fv, m_fv;
  };
  std::vector<Layer> layers;
};

TapeModel register_model(ad::Tape& tape, const FgnnModel& model,
                         std::vector<ad::Tape::NodeId>* param_nodes) {
  TapeModel tm;
  tm.var_embed = register_mlp(tape, model.var_embed, param_nodes);
  tm.fac_embed = register_mlp(tape, model.fac_embed, param_nodes);
  for (const auto& layer : model.layers) {
    TapeModel::Layer tl;
    tl.q_vf = register_mlp(tape, layer.q_vf.net, param_nodes);
    tl.m_vf = register_mlp(tape, layer.m_vf, param_nodes);
    tl.q_fv = register_mlp(tape, layer.q_fv.net, param_nodes);
    tl.m_fv = register_mlp(tape, layer.m_fv, param_nodes);
    tm.layers.push_back(std::move(tl));
  }
  tm.classifier = register_mlp(tape, model.classifier, param_nodes);
  return tm;
}

void check_features(const FgnnModel& model, const FactorGraph& g,
                    const GraphFeatures& features) {
  if (static_cast<int>(features.var_raw.size()) != g.num_variables() ||
      static_cast<int>(features.fac_raw.size()) != g.num_factors() ||
      static_cast<int>(features.edge.size()) != g.num_factors()) {
    throw std::invalid_argument("fgnn_forward: feature/graph size mismatch");
  }
  if (model.var_embed.out_dim() != model.k ||
      model.fac_embed.out_dim() != model.l ||
      model.classifier.in_dim() != model.k) {
    throw std::invalid_argument("fgnn_forward: model dimension chain broken");
  }
}

}  // namespace

int default_var_feature_dim(int num_states) { return num_states; }

int default_fac_feature_dim(int num_states) {
  return kNumKinds + num_states * num_states + 1;
}

int default_edge_feature_dim(int max_arity) { return max_arity + kNumKinds; }

GraphFeatures default_features(const FactorGraph& g, int max_arity) {
  GraphFeatures out;
  const int d = g.num_variables() > 0 ? g.cardinality(0) : 2;
  out.var_raw.assign(g.num_variables(), std::vector<double>(d, 0.0));
  for (int i = 0; i < g.num_variables(); ++i) {
    if (g.cardinality(i) != d) {
      throw std::invalid_argument(
          "default_features: mixed cardinalities unsupported");
    }
  }
  const auto unary = detail::unary_log_potentials(g);
  for (int i = 0; i < g.num_variables(); ++i) {
    for (int k = 0; k < d; ++k) out.var_raw[i][k] = squash(unary[i][k]);
  }

  const int slots = d * d;
  for (const auto& f : g.factors()) {
    if (static_cast<int>(f.scope.size()) > max_arity) {
      throw std::invalid_argument("default_features: factor arity over limit");
    }
    std::vector<double> raw(kNumKinds + slots + 1, 0.0);
    raw[kind_index(f.potential)] = 1.0;
    if (const auto* budget = std::get_if<BudgetPotential>(&f.potential)) {
      raw[kNumKinds + slots] =
          static_cast<double>(budget->k) / f.scope.size();
    } else if (!std::holds_alternative<ParityPotential>(f.potential) &&
               f.scope.size() <= 2) {
      const DenseTensor t = materialize_log_table(g, f);
      for (std::size_t k = 0; k < t.size() && k < std::size_t(slots); ++k) {
        raw[kNumKinds + k] = squash(t[k]);
      }
    }
    out.fac_raw.push_back(std::move(raw));

    std::vector<std::vector<double>> edges;
    for (std::size_t p = 0; p < f.scope.size(); ++p) {
      std::vector<double> e(max_arity + kNumKinds, 0.0);
      e[p] = 1.0;
      e[max_arity + kind_index(f.potential)] = 1.0;
      edges.push_back(std::move(e));
    }
    out.edge.push_back(std::move(edges));
  }
  return out;
}

FgnnModel init_model(const ModelConfig& cfg, Rng& rng) {
  FgnnModel model;
  model.k = cfg.k;
  model.l = cfg.l;
  model.num_states = cfg.num_states;
  model.max_arity = cfg.max_arity;
  const int var_dim = default_var_feature_dim(cfg.num_states);
  const int fac_dim = default_fac_feature_dim(cfg.num_states);
  const int edge_dim = default_edge_feature_dim(cfg.max_arity);
  model.var_embed = make_mlp({var_dim, cfg.hidden, cfg.k}, true, rng);
  model.fac_embed = make_mlp({fac_dim, cfg.hidden, cfg.l}, true, rng);
  for (int t = 0; t < cfg.num_layers; ++t) {
    FgnnLayerParams layer;
    layer.agg = cfg.agg;
    layer.residual = cfg.residual;
    layer.m_vf = make_mlp({cfg.l + cfg.k, cfg.hidden, cfg.hidden}, true, rng);
    layer.q_vf.rows = cfg.l;
    layer.q_vf.cols = cfg.hidden;
    layer.q_vf.net = make_mlp({edge_dim, cfg.l * cfg.hidden}, true, rng);
    layer.m_fv = make_mlp({cfg.l + cfg.k, cfg.hidden, cfg.hidden}, true, rng);
    layer.q_fv.rows = cfg.k;
    layer.q_fv.cols = cfg.hidden;
    layer.q_fv.net = make_mlp({edge_dim, cfg.k * cfg.hidden}, true, rng);
    model.layers.push_back(std::move(layer));
  }
  model.classifier = make_mlp({cfg.k, cfg.hidden, cfg.num_states}, true, rng);
  return model;
}

std::vector<double> mlp_eval(const MlpParams& mlp, std::vector<double> x) {
  for (const auto& layer : mlp.layers) {
    if (static_cast<int>(x.size()) != layer.cols) {
      throw std::invalid_argument("mlp_eval: input size mismatch");
    }
    std::vector<double> y(layer.rows);
    for (int r = 0; r < layer.rows; ++r) {
      double acc = layer.bias[r];
      for (int c = 0; c < layer.cols; ++c) {
        acc += layer.weight[static_cast<std::size_t>(r) * layer.cols + c] * x[c];
      }
      y[r] = layer.relu ? std::max(acc, 0.0) : acc;
    }
    x = std::move(y);
  }
  return x;
}

ForwardTrace fgnn_forward(const FgnnModel& model, const FactorGraph& g,
                          const GraphFeatures& features) {
  check_features(model, g, features);
  ForwardTrace out;
  ad::Tape& tape = out.tape;
  TapeModel tm = register_model(tape, model, &out.param_nodes);

  std::vector<ad::Tape::NodeId> f(g.num_variables());
  std::vector<ad::Tape::NodeId> gc(g.num_factors());
  for (int i = 0; i < g.num_variables(); ++i) {
    f[i] = mlp_apply(tape, tm.var_embed, tape.input(features.var_raw[i]));
  }
  for (int c = 0; c < g.num_factors(); ++c) {
    gc[c] = mlp_apply(tape, tm.fac_embed, tape.input(features.fac_raw[c]));
  }

  std::vector<std::vector<ad::Tape::NodeId>> edge_nodes(g.num_factors());
  for (int c = 0; c < g.num_factors(); ++c) {
    for (const auto& e : features.edge[c]) edge_nodes[c].push_back(tape.input(e));
  }

  for (std::size_t t = 0; t < model.layers.size(); ++t) {
    const auto& lp = model.layers[t];
    const auto& tl = tm.layers[t];
    const auto agg = to_ad(lp.agg);

    // VF: factor features from incident variables.
    std::vector<ad::Tape::NodeId> gc_next(g.num_factors());
    for (int c = 0; c < g.num_factors(); ++c) {
      const auto& scope = g.factors()[c].scope;
      std::vector<ad::Tape::NodeId> terms;
      for (std::size_t p = 0; p < scope.size(); ++p) {
        auto m = mlp_apply(tape, tl.m_vf, tape.concat({gc[c], f[scope[p]]}));
        auto q = mlp_apply(tape, tl.q_vf, edge_nodes[c][p]);
        terms.push_back(tape.matvec(q, m, lp.q_vf.rows, lp.q_vf.cols));
      }
      auto agg_out = tape.aggregate(terms, agg, model.l);
      gc_next[c] = lp.residual ? tape.add(agg_out, gc[c]) : agg_out;
    }

    // FV: variable features from incident factors (fresh factor features).
    std::vector<ad::Tape::NodeId> f_next(g.num_variables());
    for (int i = 0; i < g.num_variables(); ++i) {
      std::vector<ad::Tape::NodeId> terms;
      for (int c : g.factors_of(i)) {
        const auto& scope = g.factors()[c].scope;
        for (std::size_t p = 0; p < scope.size(); ++p) {
          if (scope[p] != i) continue;
          auto m = mlp_apply(tape, tl.m_fv, tape.concat({gc_next[c], f[i]}));
          auto q = mlp_apply(tape, tl.q_fv, edge_nodes[c][p]);
          terms.push_back(tape.matvec(q, m, lp.q_fv.rows, lp.q_fv.cols));
        }
      }
      auto agg_out = tape.aggregate(terms, agg, model.k);
      f_next[i] = lp.residual ? tape.add(agg_out, f[i]) : agg_out;
    }
    gc = std::move(gc_next);
    f = std::move(f_next);
  }

  out.logits.resize(g.num_variables());
  for (int i = 0; i < g.num_variables(); ++i) {
    out.logits[i] = mlp_apply(tape, tm.classifier, f[i]);
  }
  return out;
}

std::vector<std::vector<double>> fgnn_logits(const FgnnModel& model,
                                             const FactorGraph& g,
                                             const GraphFeatures& features) {
  auto trace = fgnn_forward(model, g, features);
  std::vector<std::vector<double>> out;
  out.reserve(trace.logits.size());
  for (auto id : trace.logits) out.push_back(trace.tape.value(id));
  return out;
}

std::vector<double> flatten_params(const FgnnModel& model) {
  std::vector<double> flat;
  visit_mlps(model, [&](const MlpParams& mlp) {
    for (const auto& layer : mlp.layers) {
      flat.insert(flat.end(), layer.weight.begin(), layer.weight.end());
      flat.insert(flat.end(), layer.bias.begin(), layer.bias.end());
    }
  });
  return flat;
}

void unflatten_params(FgnnModel& model, const std::vector<double>& flat) {
  std::size_t pos = 0;
  visit_mlps(model, [&](MlpParams& mlp) {
    for (auto& layer : mlp.layers) {
      for (double& w : layer.weight) w = flat.at(pos++);
      for (double& b : layer.bias) b = flat.at(pos++);
    }
  });
  if (pos != flat.size()) {
    throw std::invalid_argument("unflatten_params: size mismatch");
  }
}

double loss_and_gradient(const FgnnModel& model, const FactorGraph& g,
                         const GraphFeatures& features,
                         const Assignment& labels, std::vector<double>* grad) {
  if (static_cast<int>(labels.size()) != g.num_variables()) {
    throw std::invalid_argument("loss_and_gradient: label count mismatch");
  }
  auto trace = fgnn_forward(model, g, features);
  ad::Tape& tape = trace.tape;
  std::vector<ad::Tape::NodeId> losses;
  for (int i = 0; i < g.num_variables(); ++i) {
    losses.push_back(tape.softmax_cross_entropy(trace.logits[i], labels[i]));
  }
  auto total = tape.aggregate(losses, ad::AggMode::kSum, 1);
  auto mean = tape.scale(total, 1.0 / g.num_variables());
  const double loss = tape.value(mean)[0];
  if (grad) {
    tape.backward(mean);
    grad->clear();
    for (auto id : trace.param_nodes) {
      const auto& gvec = tape.grad(id);
      grad->insert(grad->end(), gvec.begin(), gvec.end());
    }
  }
  return loss;
}

double grad_check(const FgnnModel& model, const FactorGraph& g,
                  const Assignment& labels, double epsilon, int max_coords,
                  std::uint64_t seed) {
  const auto features = default_features(g, model.max_arity);
  std::vector<double> analytic;
  loss_and_gradient(model, g, features, labels, &analytic);

  std::vector<double> flat = flatten_params(model);
  const int total = static_cast<int>(flat.size());
  std::vector<int> coords;
  if (total <= max_coords) {
    for (int i = 0; i < total; ++i) coords.push_back(i);
  } else {
    Rng rng(seed);
    for (int i = 0; i < max_coords; ++i) coords.push_back(rng.uniform_int(total));
  }

  FgnnModel probe = model;
  double worst = 0.0;
  for (int c : coords) {
    const double keep = flat[c];
    flat[c] = keep + epsilon;
    unflatten_params(probe, flat);
    const double up = loss_and_gradient(probe, g, features, labels, nullptr);
    flat[c] = keep - epsilon;
    unflatten_params(probe, flat);
    const double down = loss_and_gradient(probe, g, features, labels, nullptr);
    flat[c] = keep;
    const double numeric = (up - down) / (2.0 * epsilon);
    const double rel = std::abs(analytic[c] - numeric) /
                       std::max(1e-8, std::abs(analytic[c]) + std::abs(numeric));
    worst = std::max(worst, rel);
  }
  return worst;
}

void adam_step(std::vector<double>& params, const std::vector<double>& grads,
               AdamState& state, const AdamConfig& cfg) {
  if (params.size() != grads.size()) {
    throw std::invalid_argument("adam_step: size mismatch");
  }
  if (state.m.size() != params.size()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
    state.t = 0;
  }
  ++state.t;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grads[i];
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    params[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
  }
}

namespace {

using nlohmann::json;

json mlp_to_json(const MlpParams& mlp) {
  json layers = json::array();
  for (const auto& layer : mlp.layers) {
    layers.push_back({{"rows", layer.rows},
                      {"cols", layer.cols},
                      {"weight", layer.weight},
                      {"bias", layer.bias},
                      {"relu", layer.relu}});
  }
  return {{"layers", layers}};
}

MlpParams mlp_from_json(const json& j) {
  MlpParams mlp;
  for (const auto& lj : j.at("layers")) {
    MlpLayer layer;
    layer.rows = lj.at("rows").get<int>();
    layer.cols = lj.at("cols").get<int>();
    layer.weight = lj.at("weight").get<std::vector<double>>();
    layer.bias = lj.at("bias").get<std::vector<double>>();
    layer.relu = lj.at("relu").get<bool>();
    if (layer.weight.size() !=
            static_cast<std::size_t>(layer.rows) * layer.cols ||
        layer.bias.size() != static_cast<std::size_t>(layer.rows)) {
      throw std::invalid_argument("model json: layer shape mismatch");
    }
    mlp.layers.push_back(std::move(layer));
  }
  return mlp;
}

std::string agg_name(Aggregator a) {
  switch (a) {
    case Aggregator::kMax:
      return "max";
    case Aggregator::kProd:
      return "prod";
    default:
      return "sum";
  }
}

Aggregator agg_from_name(const std::string& s) {
  if (s == "max") return Aggregator::kMax;
  if (s == "prod") return Aggregator::kProd;
  if (s == "sum") return Aggregator::kSum;
  throw std::invalid_argument("model json: unknown aggregator " + s);
}

}  // namespace

std::string model_to_json(const FgnnModel& model) {
  json layers = json::array();
  for (const auto& layer : model.layers) {
    layers.push_back({{"q_vf",
                       {{"rows", layer.q_vf.rows},
                        {"cols", layer.q_vf.cols},
                        {"net", mlp_to_json(layer.q_vf.net)}}},
                      {"m_vf", mlp_to_json(layer.m_vf)},
                      {"q_fv",
                       {{"rows", layer.q_fv.rows},
                        {"cols", layer.q_fv.cols},
                        {"net", mlp_to_json(layer.q_fv.net)}}},
                      {"m_fv", mlp_to_json(layer.m_fv)},
                      {"agg", agg_name(layer.agg)},
                      {"residual", layer.residual}});
  }
  json doc{{"schema", "fgnn-checkpoint-v1"},
           {"k", model.k},
           {"l", model.l},
           {"num_states", model.num_states},
           {"max_arity", model.max_arity},
           {"var_embed", mlp_to_json(model.var_embed)},
           {"fac_embed", mlp_to_json(model.fac_embed)},
           {"layers", layers},
           {"classifier", mlp_to_json(model.classifier)}};
  return doc.dump();
}

FgnnModel model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("model json: ") + e.what());
  }
  if (doc.value("schema", "") != "fgnn-checkpoint-v1") {
    throw std::invalid_argument("model json: unknown schema");
  }
  FgnnModel model;
  model.k = doc.at("k").get<int>();
  model.l = doc.at("l").get<int>();
  model.num_states = doc.at("num_states").get<int>();
  model.max_arity = doc.at("max_arity").get<int>();
  model.var_embed = mlp_from_json(doc.at("var_embed"));
  model.fac_embed = mlp_from_json(doc.at("fac_embed"));
  for (const auto& lj : doc.at("layers")) {
    FgnnLayerParams layer;
    layer.q_vf.rows = lj.at("q_vf").at("rows").get<int>();
    layer.q_vf.cols = lj.at("q_vf").at("cols").get<int>();
    layer.q_vf.net = mlp_from_json(lj.at("q_vf").at("net"));
    layer.m_vf = mlp_from_json(lj.at("m_vf"));
    layer.q_fv.rows = lj.at("q_fv").at("rows").get<int>();
    layer.q_fv.cols = lj.at("q_fv").at("cols").get<int>();
    layer.q_fv.net = mlp_from_json(lj.at("q_fv").at("net"));
    layer.m_fv = mlp_from_json(lj.at("m_fv"));
    layer.agg = agg_from_name(lj.at("agg").get<std::string>());
    layer.residual = lj.at("residual").get<bool>();
    model.layers.push_back(std::move(layer));
  }
  model.classifier = mlp_from_json(doc.at("classifier"));
  return model;
}

}  // namespace fgbp
