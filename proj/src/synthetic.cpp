#include "fgbp/synthetic.hpp"

#include <stdexcept>
#include <utility>

#include "json.hpp"

#include "fgbp/exact.hpp"
#include "fgbp/rng.hpp"

namespace fgbp {
namespace {

using nlohmann::json;

DenseTensor pairwise_table(SyntheticKind kind, Rng& rng) {
  switch (kind) {
    case SyntheticKind::kD1:
      return DenseTensor({2, 2}, {0.0, 0.1, 0.2, 1.0});
    case SyntheticKind::kD2: {
      std::vector<double> vals(4);
      for (double& v : vals) v = rng.uniform();
      return DenseTensor({2, 2}, std::move(vals));
    }
    case SyntheticKind::kD3:
      return DenseTensor({2, 2}, {0.0, 0.0, 0.0, rng.uniform(0.0, 2.0)});
  }
  throw std::logic_error("unknown synthetic kind");
}

}  // namespace

LabeledInstance gen_synthetic_instance(const SyntheticSpec& spec) {
  if (spec.window > spec.n) {
    throw std::invalid_argument("synthetic: window exceeds chain length");
  }
  Rng rng(spec.seed);

  std::vector<VariableNode> vars;
  vars.reserve(spec.n);
  for (int i = 0; i < spec.n; ++i) vars.push_back({i, 2});

  std::vector<FactorNode> factors;
  int next_id = 0;
  for (int i = 0; i < spec.n; ++i) {
    DenseTensor t({2}, {rng.uniform(), rng.uniform()});
    factors.push_back({next_id++, {i}, DenseLogPotential{std::move(t)}});
  }
  for (int i = 0; i + 1 < spec.n; ++i) {
    factors.push_back({next_id++, {i, i + 1},
                       DenseLogPotential{pairwise_table(spec.kind, rng)}});
  }
  int k = spec.budget;
  if (spec.kind == SyntheticKind::kD3) {
    k = 1 + rng.uniform_int(spec.window);
  }
  for (int i = 0; i + spec.window <= spec.n; ++i) {
    std::vector<int> scope(spec.window);
    for (int j = 0; j < spec.window; ++j) scope[j] = i + j;
    factors.push_back({next_id++, std::move(scope), BudgetPotential{k}});
  }

  LabeledInstance inst{build_graph(std::move(vars), std::move(factors)), {}};
  inst.labels = exact_map(inst.graph).assignment;
  return inst;
}

LabeledInstance gen_tree_instance(int min_depth, int max_depth,
                                  std::uint64_t seed) {
  if (min_depth < 1 || max_depth < min_depth) {
    throw std::invalid_argument("tree: bad depth range");
  }
  Rng rng(seed);
  const int depth = min_depth + rng.uniform_int(max_depth - min_depth + 1);
  // Keeps exact labeling cheap (2^21 joint states at most).
  const int max_nodes = 21;

  std::vector<std::pair<int, int>> edges;  // (parent, child)
  std::vector<int> level{0};
  int num_nodes = 1;
  for (int d = 2; d <= depth && num_nodes < max_nodes; ++d) {
    std::vector<int> next;
    for (std::size_t idx = 0; idx < level.size(); ++idx) {
      int children = rng.uniform_int(3);
      // The first node of each level always branches so the target depth is
      // actually reached.
      if (idx == 0 && children == 0) children = 1;
      for (int c = 0; c < children && num_nodes < max_nodes; ++c) {
        edges.emplace_back(level[idx], num_nodes);
        next.push_back(num_nodes);
        ++num_nodes;
      }
    }
    level = std::move(next);
  }

  std::vector<VariableNode> vars;
  vars.reserve(num_nodes);
  for (int i = 0; i < num_nodes; ++i) vars.push_back({i, 2});

  std::vector<FactorNode> factors;
  int next_id = 0;
  for (int i = 0; i < num_nodes; ++i) {
    DenseTensor t({2}, {rng.gaussian(), rng.gaussian()});
    factors.push_back({next_id++, {i}, DenseLogPotential{std::move(t)}});
  }
  for (const auto& [parent, child] : edges) {
    std::vector<double> vals(4);
    for (double& v : vals) v = rng.gaussian();
    factors.push_back({next_id++, {parent, child},
                       DenseLogPotential{DenseTensor({2, 2}, std::move(vals))}});
  }

  LabeledInstance inst{build_graph(std::move(vars), std::move(factors)), {}};
  inst.labels = exact_map(inst.graph).assignment;
  return inst;
}

std::vector<LabeledInstance> gen_dataset(const SyntheticSpec& spec, int count) {
  Rng root(spec.seed);
  std::vector<LabeledInstance> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    SyntheticSpec child = spec;
    child.seed = root.child(static_cast<std::uint64_t>(i)).next_u64();
    out.push_back(gen_synthetic_instance(child));
  }
  return out;
}

std::string dataset_to_json(const std::vector<LabeledInstance>& data) {
  json doc;
  doc["schema"] = "fgbp-dataset-v1";
  doc["instances"] = json::array();
  for (const auto& inst : data) {
    json entry;
    entry["graph"] = json::parse(graph_to_json(inst.graph));
    entry["labels"] = inst.labels;
    doc["instances"].push_back(std::move(entry));
  }
  return doc.dump(2) + "\n";
}

std::vector<LabeledInstance> dataset_from_json(const std::string& text) {
  const json doc = json::parse(text);
  if (doc.value("schema", "") != "fgbp-dataset-v1") {
    throw std::runtime_error("dataset json: unknown schema");
  }
  std::vector<LabeledInstance> out;
  for (const auto& entry : doc.at("instances")) {
    LabeledInstance inst{graph_from_json(entry.at("graph").dump()),
                         entry.at("labels").get<Assignment>()};
    out.push_back(std::move(inst));
  }
  return out;
}

SyntheticKind kind_from_name(const std::string& name) {
  if (name == "D1" || name == "d1") return SyntheticKind::kD1;
  if (name == "D2" || name == "d2") return SyntheticKind::kD2;
  if (name == "D3" || name == "d3") return SyntheticKind::kD3;
  throw std::invalid_argument("unknown dataset kind: " + name);
}

std::string kind_name(SyntheticKind kind) {
  switch (kind) {
    case SyntheticKind::kD1: return "D1";
    case SyntheticKind::kD2: return "D2";
    case SyntheticKind::kD3: return "D3";
  }
  throw std::logic_error("unknown synthetic kind");
}

}  // namespace fgbp
