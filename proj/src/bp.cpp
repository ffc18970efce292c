#include "fgbp/bp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fgbp {

namespace {

bool is_unary(const FactorNode& f) { return f.scope.size() == 1; }

// Scope position of variable `var` within factor f.
int slot_of(const FactorNode& f, int var) {
  for (std::size_t p = 0; p < f.scope.size(); ++p) {
    if (f.scope[p] == var) return static_cast<int>(p);
  }
  throw std::invalid_argument("variable not in factor scope");
}

void normalize_sum(std::vector<double>& m) {
  double total = 0.0;
  for (double v : m) total += v;
  if (total > 0.0 && std::isfinite(total)) {
    for (double& v : m) v /= total;
  } else {
    std::fill(m.begin(), m.end(), 1.0 / m.size());
  }
}

void normalize_max(std::vector<double>& m) {
  double hi = kNegInf;
  for (double v : m) hi = std::max(hi, v);
  if (std::isfinite(hi)) {
    for (double& v : m) v -= hi;
  } else {
    std::fill(m.begin(), m.end(), 0.0);
  }
}

double message_delta(const std::vector<double>& a,
                     const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] == b[k]) continue;  // covers matching -inf pairs
    if (!std::isfinite(a[k]) || !std::isfinite(b[k])) {
      return std::numeric_limits<double>::infinity();
    }
    d = std::max(d, std::abs(a[k] - b[k]));
  }
  return d;
}

void damp(std::vector<double>& fresh, const std::vector<double>& old,
          double lambda) {
  if (lambda <= 0.0) return;
  for (std::size_t k = 0; k < fresh.size(); ++k) {
    // Keep -inf entries exact instead of producing 0 * inf = NaN.
    if (fresh[k] == old[k]) continue;
    fresh[k] = (1.0 - lambda) * fresh[k] + lambda * old[k];
  }
}

// Generic factor-to-variable message on a cached table. `table` is in the
// linear domain for sum mode and the log domain for max-sum.
std::vector<double> generic_factor_message(
    const DenseTensor& table, const std::vector<std::vector<double>>& incoming,
    int target, BpMode mode) {
  const auto& shape = table.shape();
  const int d = shape[target];
  std::vector<double> out(d, mode == BpMode::kSumProduct ? 0.0 : kNegInf);
  Assignment a(shape.size(), 0);
  std::size_t flat = 0;
  do {
    if (mode == BpMode::kSumProduct) {
      double v = table[flat];
      for (std::size_t j = 0; j < shape.size(); ++j) {
        if (static_cast<int>(j) != target) v *= incoming[j][a[j]];
      }
      out[a[target]] += v;
    } else {
      double v = table[flat];
      if (v != kNegInf) {
        for (std::size_t j = 0; j < shape.size(); ++j) {
          if (static_cast<int>(j) != target) v += incoming[j][a[j]];
        }
      }
      out[a[target]] = std::max(out[a[target]], v);
    }
    ++flat;
  } while (next_assignment(shape, a));
  if (mode == BpMode::kSumProduct) {
    normalize_sum(out);
  } else {
    normalize_max(out);
  }
  return out;
}

struct Engine {
  const FactorGraph& g;
  BpMode mode;
  // Cached tables: linear domain (sum) or log domain (max-sum). Empty slot
  // when the factor takes a special path (parity fast path, custom update).
  std::vector<DenseTensor> tables;
  std::vector<bool> has_table;
  std::vector<bool> parity_fast;
  std::vector<bool> messaging;  // factor participates in message passing
  std::vector<std::vector<double>> unary;  // max mode theta_i, else empty
  const detail::FactorUpdateFn* custom = nullptr;

  Engine(const FactorGraph& graph, BpMode m, const detail::FactorUpdateFn* cu)
      : g(graph), mode(m), custom(cu) {
    const int nf = g.num_factors();
    tables.reserve(nf);
    has_table.assign(nf, false);
    parity_fast.assign(nf, false);
    messaging.assign(nf, true);
    for (int fi = 0; fi < nf; ++fi) {
      const auto& f = g.factors()[fi];
      if (mode == BpMode::kMaxSum && is_unary(f)) messaging[fi] = false;
      bool need_table = messaging[fi];
      if (need_table && mode == BpMode::kSumProduct && !is_unary(f) &&
          std::holds_alternative<ParityPotential>(f.potential)) {
        parity_fast[fi] = true;
        need_table = false;
      }
      if (need_table && custom && *custom && !is_unary(f)) {
        if (!std::holds_alternative<CpPotential>(f.potential)) {
          throw std::runtime_error(
              "low-rank BP requires every non-unary factor to be CP-typed");
        }
        need_table = false;
      }
      if (need_table) {
        DenseTensor t = materialize_log_table(g, f);
        if (mode == BpMode::kSumProduct) {
          for (std::size_t i = 0; i < t.size(); ++i) t[i] = std::exp(t[i]);
        }
        tables.push_back(std::move(t));
        has_table[fi] = true;
      } else {
        tables.emplace_back(std::vector<int>{1});
      }
    }
    if (mode == BpMode::kMaxSum) unary = detail::unary_log_potentials(g);
  }

  std::vector<double> var_message(const MessageState& state, int var,
                                  int factor) const {
    const int d = g.cardinality(var);
    std::vector<double> m;
    if (mode == BpMode::kSumProduct) {
      m.assign(d, 1.0);
    } else {
      m = unary[var];
    }
    for (int fi : g.factors_of(var)) {
      if (fi == factor || !messaging[fi]) continue;
      const int p = slot_of(g.factors()[fi], var);
      const auto& in = state.factor_to_var[fi][p];
      for (int k = 0; k < d; ++k) {
        if (mode == BpMode::kSumProduct) {
          m[k] *= in[k];
        } else if (m[k] != kNegInf) {
          m[k] = (in[k] == kNegInf) ? kNegInf : m[k] + in[k];
        }
      }
    }
    if (mode == BpMode::kSumProduct) {
      normalize_sum(m);
    } else {
      normalize_max(m);
    }
    return m;
  }

  std::vector<double> factor_message(const MessageState& state, int fi,
                                     int slot) const {
    const auto& f = g.factors()[fi];
    const auto& incoming = state.var_to_factor[fi];
    if (parity_fast[fi]) return parity_factor_message_fast(incoming, slot);
    if (custom && *custom && !is_unary(f)) return (*custom)(fi, incoming, slot);
    return generic_factor_message(tables[fi], incoming, slot, mode);
  }

  std::vector<std::vector<double>> beliefs(const MessageState& state) const {
    std::vector<std::vector<double>> out(g.num_variables());
    for (int i = 0; i < g.num_variables(); ++i) {
      const int d = g.cardinality(i);
      auto& b = out[i];
      if (mode == BpMode::kSumProduct) {
        b.assign(d, 1.0);
      } else {
        b = unary[i];
      }
      for (int fi : g.factors_of(i)) {
        if (!messaging[fi]) continue;
        const int p = slot_of(g.factors()[fi], i);
        const auto& in = state.factor_to_var[fi][p];
        for (int k = 0; k < d; ++k) {
          if (mode == BpMode::kSumProduct) {
            b[k] *= in[k];
          } else if (b[k] != kNegInf) {
            b[k] = (in[k] == kNegInf) ? kNegInf : b[k] + in[k];
          }
        }
      }
      if (mode == BpMode::kSumProduct) {
        normalize_sum(b);
      } else {
        normalize_max(b);
      }
    }
    return out;
  }
};

}  // namespace

MessageState init_messages(const FactorGraph& g, BpMode mode) {
  MessageState state;
  state.var_to_factor.resize(g.num_factors());
  state.factor_to_var.resize(g.num_factors());
  for (int fi = 0; fi < g.num_factors(); ++fi) {
    const auto& f = g.factors()[fi];
    state.var_to_factor[fi].resize(f.scope.size());
    state.factor_to_var[fi].resize(f.scope.size());
    for (std::size_t p = 0; p < f.scope.size(); ++p) {
      const int d = g.cardinality(f.scope[p]);
      const double fill = mode == BpMode::kSumProduct ? 1.0 / d : 0.0;
      state.var_to_factor[fi][p].assign(d, fill);
      state.factor_to_var[fi][p].assign(d, fill);
    }
  }
  state.iteration = 0;
  return state;
}

std::vector<double> var_to_factor_update(const MessageState& state,
                                         const FactorGraph& g, int var,
                                         int factor, BpMode mode) {
  Engine engine(g, mode, nullptr);
  return engine.var_message(state, var, factor);
}

std::vector<double> factor_to_var_update(const MessageState& state,
                                         const FactorGraph& g, int factor,
                                         int var, BpMode mode) {
  const auto& f = g.factors()[factor];
  DenseTensor table = materialize_log_table(g, f);
  if (mode == BpMode::kSumProduct) {
    for (std::size_t i = 0; i < table.size(); ++i) {
      table[i] = std::exp(table[i]);
    }
  }
  return generic_factor_message(table, state.var_to_factor[factor],
                                slot_of(f, var), mode);
}

Assignment decode_map_from_beliefs(
    const std::vector<std::vector<double>>& beliefs) {
  Assignment x(beliefs.size(), 0);
  for (std::size_t i = 0; i < beliefs.size(); ++i) {
    int best = 0;
    for (std::size_t k = 1; k < beliefs[i].size(); ++k) {
      if (beliefs[i][k] > beliefs[i][best]) best = static_cast<int>(k);
    }
    x[i] = best;
  }
  return x;
}

std::vector<double> parity_factor_message_fast(
    const std::vector<std::vector<double>>& incoming, int target) {
  double delta = 1.0;
  for (std::size_t j = 0; j < incoming.size(); ++j) {
    if (static_cast<int>(j) == target) continue;
    const auto& m = incoming[j];
    if (m.size() != 2) {
      throw std::invalid_argument("parity fast path requires binary messages");
    }
    const double total = m[0] + m[1];
    delta *= total > 0.0 ? (m[0] - m[1]) / total : 0.0;
  }
  std::vector<double> out{(1.0 + delta) / 2.0, (1.0 - delta) / 2.0};
  normalize_sum(out);
  return out;
}

namespace detail {

std::vector<std::vector<double>> unary_log_potentials(const FactorGraph& g) {
  std::vector<std::vector<double>> unary(g.num_variables());
  for (int i = 0; i < g.num_variables(); ++i) {
    unary[i].assign(g.cardinality(i), 0.0);
  }
  for (const auto& f : g.factors()) {
    if (!is_unary(f)) continue;
    DenseTensor t = materialize_log_table(g, f);
    auto& u = unary[f.scope[0]];
    for (std::size_t k = 0; k < u.size(); ++k) {
      u[k] = (u[k] == kNegInf || t[k] == kNegInf) ? kNegInf : u[k] + t[k];
    }
  }
  return unary;
}

BpResult run_engine(const FactorGraph& g, const BpConfig& config,
                    const FactorUpdateFn& custom_update,
                    const RoundObserver& observer) {
  if (config.convergence_tol <= 0.0 || config.max_iterations < 1) {
    throw std::invalid_argument("invalid BP config");
  }
  Engine engine(g, config.mode, &custom_update);
  MessageState state = init_messages(g, config.mode);

  BpResult result;
  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    double delta = 0.0;
    // Half-round 1: variable-to-factor from the previous factor-to-variable.
    for (int fi = 0; fi < g.num_factors(); ++fi) {
      if (!engine.messaging[fi]) continue;
      const auto& f = g.factors()[fi];
      for (std::size_t p = 0; p < f.scope.size(); ++p) {
        auto fresh = engine.var_message(state, f.scope[p], fi);
        damp(fresh, state.var_to_factor[fi][p], config.damping);
        delta = std::max(delta, message_delta(fresh, state.var_to_factor[fi][p]));
        state.var_to_factor[fi][p] = std::move(fresh);
      }
    }
    // Half-round 2: factor-to-variable from the fresh variable-to-factor.
    for (int fi = 0; fi < g.num_factors(); ++fi) {
      if (!engine.messaging[fi]) continue;
      const auto& f = g.factors()[fi];
      for (std::size_t p = 0; p < f.scope.size(); ++p) {
        auto fresh = engine.factor_message(state, fi, static_cast<int>(p));
        damp(fresh, state.factor_to_var[fi][p], config.damping);
        delta = std::max(delta, message_delta(fresh, state.factor_to_var[fi][p]));
        state.factor_to_var[fi][p] = std::move(fresh);
      }
    }
    state.iteration = iter;
    result.iterations = iter;
    if (observer) observer(state);
    if (delta < config.convergence_tol) {
      result.converged = true;
      break;
    }
  }
  result.beliefs = engine.beliefs(state);
  return result;
}

}  // namespace detail

BpResult run_bp(const FactorGraph& g, const BpConfig& config) {
  return detail::run_engine(g, config, nullptr, nullptr);
}

}  // namespace fgbp
