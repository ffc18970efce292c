#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fgbp/graph.hpp"

namespace fgbp {

enum class SyntheticKind { kD1, kD2, kD3 };

struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::kD1;
  int n = 14;      // chain length
  int window = 8;  // budget window size
  int budget = 5;  // D1/D2 budget; D3 redraws per instance
  std::uint64_t seed = 0;
};

struct LabeledInstance {
  FactorGraph graph;
  Assignment labels;  // exact MAP
};

// Chain of n binary variables: per-variable unary, pairwise on consecutive
// pairs, one budget factor per full window [i, i+w-1]. Labels from the exact
// oracle. Pure function of the spec (including seed).
LabeledInstance gen_synthetic_instance(const SyntheticSpec& spec);

// Random binary tree of depth within [min_depth, max_depth] (levels), node
// count capped so exact labeling stays cheap; N(0,1) log-potentials.
LabeledInstance gen_tree_instance(int min_depth, int max_depth,
                                  std::uint64_t seed);

// `count` instances from child seeds of spec.seed.
std::vector<LabeledInstance> gen_dataset(const SyntheticSpec& spec, int count);

std::string dataset_to_json(const std::vector<LabeledInstance>& data);
std::vector<LabeledInstance> dataset_from_json(const std::string& text);

SyntheticKind kind_from_name(const std::string& name);
std::string kind_name(SyntheticKind kind);

}  // namespace fgbp
