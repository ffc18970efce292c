#pragma once

#include <functional>
#include <vector>

#include "fgbp/graph.hpp"

namespace fgbp {

enum class BpMode { kSumProduct, kMaxSum };

struct BpConfig {
  BpMode mode = BpMode::kSumProduct;
  int max_iterations = 100;
  double convergence_tol = 1e-9;  // L-infinity on message change
  double damping = 0.0;           // new = (1-damping)*new + damping*old
};

// Messages indexed by (factor id, scope position). Sum-product messages are
// non-negative and sum to 1; max-sum messages are shifted so their max is 0.
struct MessageState {
  std::vector<std::vector<std::vector<double>>> var_to_factor;
  std::vector<std::vector<std::vector<double>>> factor_to_var;
  int iteration = 0;
};

struct BpResult {
  std::vector<std::vector<double>> beliefs;  // per variable, length d_i
  bool converged = false;
  int iterations = 0;
};

MessageState init_messages(const FactorGraph& g, BpMode mode);

// Product (sum-product) or unary-plus-sum (max-sum) of incoming factor
// messages excluding `factor`, normalized. In max-sum mode scope-1 factors
// act as explicit unary terms rather than message-passing neighbours.
std::vector<double> var_to_factor_update(const MessageState& state,
                                         const FactorGraph& g, int var,
                                         int factor, BpMode mode);

// Hadamard of the factor table with the outer product of incoming messages
// (ones at the target slot), reduced over every axis but the target's.
std::vector<double> factor_to_var_update(const MessageState& state,
                                         const FactorGraph& g, int factor,
                                         int var, BpMode mode);

BpResult run_bp(const FactorGraph& g, const BpConfig& config);

// Per-variable argmax; ties go to the lowest state index.
Assignment decode_map_from_beliefs(const std::vector<std::vector<double>>& beliefs);

// Tanh-rule specialization of the sum-product factor-to-variable update for
// an all-binary parity factor. `incoming` holds one message per scope
// position; the target's own slot is ignored.
std::vector<double> parity_factor_message_fast(
    const std::vector<std::vector<double>>& incoming, int target);

namespace detail {

// Sum of scope-1 factor log tables per variable (zero when none).
std::vector<std::vector<double>> unary_log_potentials(const FactorGraph& g);

// Custom factor-to-variable message for non-unary factors in sum mode;
// arguments are (factor id, incoming var-to-factor messages, target slot).
using FactorUpdateFn = std::function<std::vector<double>(
    int, const std::vector<std::vector<double>>&, int)>;

// Observer invoked after every full round with the fresh state.
using RoundObserver = std::function<void(const MessageState&)>;

BpResult run_engine(const FactorGraph& g, const BpConfig& config,
                    const FactorUpdateFn& custom_update,
                    const RoundObserver& observer);

}  // namespace detail

}  // namespace fgbp
