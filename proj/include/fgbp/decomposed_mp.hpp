#pragma once

#include <functional>
#include <vector>

#include "fgbp/bp.hpp"
#include "fgbp/graph.hpp"
#include "fgbp/max_decomp.hpp"

namespace fgbp {

// State of the decomposed Max-Product iteration. Indexed like MessageState:
// outer index factor id, inner index scope position. Unary (scope-1) factors
// stay explicit theta_i terms and carry no entries.
struct DecomposedMessageState {
  std::vector<std::vector<std::vector<double>>> b_to_z;  // length Z_c each
  std::vector<std::vector<std::vector<double>>> msg;     // length d each
  std::vector<std::vector<double>> beliefs;              // per variable
  int iteration = 0;
};

// Every non-unary factor must be MaxDecomp-typed.
DecomposedMessageState init_decomposed_state(const FactorGraph& g);

// One full synchronous application of the three decomposed updates; messages
// are max-normalized as in the dense engine. Returns the L-infinity change
// of the factor-to-variable messages.
double decomposed_mp_step(const FactorGraph& g, DecomposedMessageState& state,
                          double damping = 0.0);

struct DecomposedMpResult {
  std::vector<std::vector<double>> beliefs;
  Assignment decode;
  bool converged = false;
  int iterations = 0;
};

DecomposedMpResult run_decomposed_max_product(const FactorGraph& g,
                                              const BpConfig& config);

// As above with an observer called after each full step.
DecomposedMpResult run_decomposed_max_product_traced(
    const FactorGraph& g, const BpConfig& config,
    const std::function<void(const DecomposedMessageState&)>& observer);

}  // namespace fgbp
