#include "fgbp/decomposed_mp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fgbp {

namespace {

bool is_unary(const FactorNode& f) { return f.scope.size() == 1; }

const MaxDecompFactor& decomp_of(const FactorNode& f) {
  const auto* md = std::get_if<MaxDecompPotential>(&f.potential);
  if (!md) {
    throw std::runtime_error(
        "decomposed max-product requires every non-unary factor to be "
        "MaxDecomp-typed");
  }
  return md->decomp;
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

}  // namespace

DecomposedMessageState init_decomposed_state(const FactorGraph& g) {
  DecomposedMessageState state;
  state.b_to_z.resize(g.num_factors());
  state.msg.resize(g.num_factors());
  for (int fi = 0; fi < g.num_factors(); ++fi) {
    const auto& f = g.factors()[fi];
    if (is_unary(f)) continue;
    const auto& md = decomp_of(f);
    state.b_to_z[fi].assign(f.scope.size(),
                            std::vector<double>(md.z_count, 0.0));
    state.msg[fi].resize(f.scope.size());
    for (std::size_t p = 0; p < f.scope.size(); ++p) {
      state.msg[fi][p].assign(g.cardinality(f.scope[p]), 0.0);
    }
  }
  state.beliefs = detail::unary_log_potentials(g);
  state.iteration = 0;
  return state;
}

double decomposed_mp_step(const FactorGraph& g, DecomposedMessageState& state,
                          double damping) {
  const auto theta = detail::unary_log_potentials(g);

  // Step 1: b_{c->i}(z) from the previous messages and beliefs.
  for (int fi = 0; fi < g.num_factors(); ++fi) {
    const auto& f = g.factors()[fi];
    if (is_unary(f)) continue;
    const auto& md = decomp_of(f);
    const int zc = md.z_count;

    // u[j][z] = max_x [phi_jc(x, z) - m_{c->j}(x) + b_j(x)]
    std::vector<std::vector<double>> u(f.scope.size(),
                                       std::vector<double>(zc, kNegInf));
    for (std::size_t j = 0; j < f.scope.size(); ++j) {
      const int d = g.cardinality(f.scope[j]);
      const auto& tab = md.tables[j];
      for (int z = 0; z < zc; ++z) {
        double best = kNegInf;
        for (int x = 0; x < d; ++x) {
          const double b = state.beliefs[f.scope[j]][x];
          if (b == kNegInf) continue;
          const double v = tab[static_cast<std::size_t>(x) * zc + z] -
                           state.msg[fi][j][x] + b;
          best = std::max(best, v);
        }
        u[j][z] = best;
      }
    }
    for (std::size_t i = 0; i < f.scope.size(); ++i) {
      auto& b = state.b_to_z[fi][i];
      for (int z = 0; z < zc; ++z) {
        double total = 0.0;
        for (std::size_t j = 0; j < f.scope.size(); ++j) {
          if (j == i) continue;
          total = (total == kNegInf || u[j][z] == kNegInf) ? kNegInf
                                                           : total + u[j][z];
        }
        b[z] = total;
      }
    }
  }

  // Step 2: messages m_{c->i}(x) = max_z [b_{c->i}(z) + phi_ic(x, z)].
  double delta = 0.0;
  for (int fi = 0; fi < g.num_factors(); ++fi) {
    const auto& f = g.factors()[fi];
    if (is_unary(f)) continue;
    const auto& md = decomp_of(f);
    const int zc = md.z_count;
    for (std::size_t i = 0; i < f.scope.size(); ++i) {
      const int d = g.cardinality(f.scope[i]);
      std::vector<double> fresh(d, kNegInf);
      for (int x = 0; x < d; ++x) {
        for (int z = 0; z < zc; ++z) {
          const double bz = state.b_to_z[fi][i][z];
          if (bz == kNegInf) continue;
          fresh[x] = std::max(
              fresh[x], bz + md.tables[i][static_cast<std::size_t>(x) * zc + z]);
        }
      }
      normalize_max(fresh);
      if (damping > 0.0) {
        for (int x = 0; x < d; ++x) {
          if (fresh[x] == state.msg[fi][i][x]) continue;
          fresh[x] =
              (1.0 - damping) * fresh[x] + damping * state.msg[fi][i][x];
        }
      }
      for (int x = 0; x < d; ++x) {
        const double old = state.msg[fi][i][x];
        if (fresh[x] == old) continue;
        delta = (!std::isfinite(fresh[x]) || !std::isfinite(old))
                    ? std::numeric_limits<double>::infinity()
                    : std::max(delta, std::abs(fresh[x] - old));
      }
      state.msg[fi][i] = std::move(fresh);
    }
  }

  // Step 3: beliefs b_i(x) = theta_i(x) + sum over incident factors.
  for (int i = 0; i < g.num_variables(); ++i) {
    auto b = theta[i];
    for (int fi : g.factors_of(i)) {
      const auto& f = g.factors()[fi];
      if (is_unary(f)) continue;
      for (std::size_t p = 0; p < f.scope.size(); ++p) {
        if (f.scope[p] != i) continue;
        for (std::size_t x = 0; x < b.size(); ++x) {
          const double m = state.msg[fi][p][x];
          b[x] = (b[x] == kNegInf || m == kNegInf) ? kNegInf : b[x] + m;
        }
      }
    }
    state.beliefs[i] = std::move(b);
  }
  ++state.iteration;
  return delta;
}

DecomposedMpResult run_decomposed_max_product_traced(
    const FactorGraph& g, const BpConfig& config,
    const std::function<void(const DecomposedMessageState&)>& observer) {
  if (config.convergence_tol <= 0.0 || config.max_iterations < 1) {
    throw std::invalid_argument("invalid config");
  }
  DecomposedMessageState state = init_decomposed_state(g);
  DecomposedMpResult result;
  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    const double delta = decomposed_mp_step(g, state, config.damping);
    result.iterations = iter;
    if (observer) observer(state);
    if (delta < config.convergence_tol) {
      result.converged = true;
      break;
    }
  }
  result.beliefs = state.beliefs;
  for (auto& b : result.beliefs) normalize_max(b);
  result.decode = decode_map_from_beliefs(result.beliefs);
  return result;
}

DecomposedMpResult run_decomposed_max_product(const FactorGraph& g,
                                              const BpConfig& config) {
  return run_decomposed_max_product_traced(g, config, nullptr);
}

}  // namespace fgbp
