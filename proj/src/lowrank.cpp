#include "fgbp/lowrank.hpp"

#include <cmath>
#include <stdexcept>

namespace fgbp {

namespace {

void normalize_sum(std::vector<double>& m) {
  double total = 0.0;
  for (double v : m) total += v;
  if (total > 0.0 && std::isfinite(total)) {
    for (double& v : m) v /= total;
  } else {
    std::fill(m.begin(), m.end(), 1.0 / m.size());
  }
}

}  // namespace

std::vector<double> lr_factor_to_var(
    const CPTensor& cp, const std::vector<std::vector<double>>& incoming,
    int target) {
  const int rank = cp.rank();
  const int arity = cp.arity();
  if (static_cast<int>(incoming.size()) != arity) {
    throw std::invalid_argument("lr_factor_to_var: one message per variable");
  }
  if (target < 0 || target >= arity) {
    throw std::invalid_argument("lr_factor_to_var: target out of range");
  }

  // gamma = hadamard over j != target of (W_j^T m_j).
  std::vector<double> gamma(rank, 1.0);
  std::vector<double> projected(rank);
  for (int j = 0; j < arity; ++j) {
    if (j == target) continue;
    if (static_cast<int>(incoming[j].size()) != cp.dims()[j]) {
      throw std::invalid_argument("lr_factor_to_var: message length mismatch");
    }
    std::fill(projected.begin(), projected.end(), 0.0);
    for (int x = 0; x < cp.dims()[j]; ++x) {
      const double m = incoming[j][x];
      for (int r = 0; r < rank; ++r) {
        projected[r] += cp.matrix_entry(j, x, r) * m;
      }
    }
    for (int r = 0; r < rank; ++r) gamma[r] *= projected[r];
  }

  const int d = cp.dims()[target];
  std::vector<double> out(d, 0.0);
  for (int x = 0; x < d; ++x) {
    for (int r = 0; r < rank; ++r) {
      out[x] += cp.matrix_entry(target, x, r) * gamma[r];
    }
  }
  for (double& v : out) {
    if (v < -1e-9) {
      throw std::domain_error(
          "lr_factor_to_var: CP decomposition produced a negative message "
          "entry");
    }
    if (std::abs(v) < 1e-12) v = 0.0;
  }
  normalize_sum(out);
  return out;
}

std::vector<double> lr_var_to_factor(const MessageState& state,
                                     const FactorGraph& g, int var,
                                     int factor) {
  return var_to_factor_update(state, g, var, factor, BpMode::kSumProduct);
}

BpResult run_lowrank_bp_traced(const FactorGraph& g, const BpConfig& config,
                               const detail::RoundObserver& observer) {
  if (config.mode != BpMode::kSumProduct) {
    throw std::invalid_argument("low-rank BP runs in sum-product mode only");
  }
  detail::FactorUpdateFn update =
      [&g](int fi, const std::vector<std::vector<double>>& incoming,
           int target) {
        const auto& f = g.factors()[fi];
        const auto* cp = std::get_if<CpPotential>(&f.potential);
        if (!cp) {
          throw std::runtime_error(
              "low-rank BP requires every non-unary factor to be CP-typed");
        }
        return lr_factor_to_var(cp->values, incoming, target);
      };
  return detail::run_engine(g, config, update, observer);
}

BpResult run_lowrank_bp(const FactorGraph& g, const BpConfig& config) {
  return run_lowrank_bp_traced(g, config, nullptr);
}

}  // namespace fgbp
