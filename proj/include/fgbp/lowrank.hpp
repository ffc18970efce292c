#pragma once

#include <vector>

#include "fgbp/bp.hpp"
#include "fgbp/graph.hpp"
#include "fgbp/tensor.hpp"

namespace fgbp {

// Factor-to-variable sum-product message straight from the CP matrices:
// m = W_target * (hadamard over j != target of W_j^T m_j), normalized to sum
// 1, in O(arity * rank * d) without materializing the dense table.
// Final entries below -1e-9 raise a decomposition-validity error; magnitudes
// under 1e-12 are clamped to 0.
std::vector<double> lr_factor_to_var(
    const CPTensor& cp, const std::vector<std::vector<double>>& incoming,
    int target);

// Identical semantics to the dense sum-mode variable-to-factor update.
std::vector<double> lr_var_to_factor(const MessageState& state,
                                     const FactorGraph& g, int var,
                                     int factor);

// Sum-product loop with lr_factor_to_var replacing the dense update. Every
// non-unary factor must be CP-typed.
BpResult run_lowrank_bp(const FactorGraph& g, const BpConfig& config);

// As run_lowrank_bp but invokes `observer` after each full round.
BpResult run_lowrank_bp_traced(const FactorGraph& g, const BpConfig& config,
                               const detail::RoundObserver& observer);

}  // namespace fgbp
