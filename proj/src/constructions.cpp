#include "fgbp/constructions.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "fgbp/bp.hpp"
#include "fgbp/max_decomp.hpp"
#include "fgbp/rng.hpp"

namespace fgbp {

namespace {

int next_pow2(int n) {
  int p = 1;
  while (p < n) p *= 2;
  return p;
}

// layer_a(pad fused): per pair p emits [x_{2p}-x_{2p+1}, x_{2p+1}, -x_{2p+1}].
MlpLayer pair_split_layer(int width) {
  MlpLayer layer;
  layer.cols = width;
  layer.rows = 3 * (width / 2);
  layer.relu = true;
  layer.weight.assign(static_cast<std::size_t>(layer.rows) * layer.cols, 0.0);
  layer.bias.assign(layer.rows, 0.0);
  for (int p = 0; p < width / 2; ++p) {
    layer.weight[static_cast<std::size_t>(3 * p) * width + 2 * p] = 1.0;
    layer.weight[static_cast<std::size_t>(3 * p) * width + 2 * p + 1] = -1.0;
    layer.weight[static_cast<std::size_t>(3 * p + 1) * width + 2 * p + 1] = 1.0;
    layer.weight[static_cast<std::size_t>(3 * p + 2) * width + 2 * p + 1] = -1.0;
  }
  return layer;
}

MlpLayer pair_combine_layer(int width) {
  MlpLayer layer;
  layer.cols = 3 * (width / 2);
  layer.rows = width / 2;
  layer.relu = false;
  layer.weight.assign(static_cast<std::size_t>(layer.rows) * layer.cols, 0.0);
  layer.bias.assign(layer.rows, 0.0);
  for (int p = 0; p < width / 2; ++p) {
    layer.weight[static_cast<std::size_t>(p) * layer.cols + 3 * p] = 1.0;
    layer.weight[static_cast<std::size_t>(p) * layer.cols + 3 * p + 1] = 1.0;
    layer.weight[static_cast<std::size_t>(p) * layer.cols + 3 * p + 2] = -1.0;
  }
  return layer;
}

}  // namespace

MlpParams build_matrix_max_net(int l) {
  if (l < 1) throw std::invalid_argument("build_matrix_max_net: l must be >= 1");
  MlpParams net;
  if (l == 1) {
    MlpLayer identity;
    identity.rows = 1;
    identity.cols = 1;
    identity.weight = {1.0};
    identity.bias = {0.0};
    net.layers.push_back(std::move(identity));
    return net;
  }
  const int padded = next_pow2(l);
  int width = padded;
  bool first = true;
  while (width > 1) {
    MlpLayer a = pair_split_layer(width);
    if (first) {
      // Fuse the pad (copies of the last element) into the first stage.
      MlpLayer fused = a;
      fused.cols = l;
      fused.weight.assign(static_cast<std::size_t>(a.rows) * l, 0.0);
      for (int r = 0; r < a.rows; ++r) {
        for (int c = 0; c < padded; ++c) {
          const int src = std::min(c, l - 1);
          fused.weight[static_cast<std::size_t>(r) * l + src] +=
              a.weight[static_cast<std::size_t>(r) * padded + c];
        }
      }
      net.layers.push_back(std::move(fused));
      first = false;
    } else {
      net.layers.push_back(std::move(a));
    }
    net.layers.push_back(pair_combine_layer(width));
    width /= 2;
  }
  return net;
}

std::vector<std::vector<double>> build_lossless_agg_matrices(int l, int k) {
  if (l < 1 || k < 1) {
    throw std::invalid_argument("build_lossless_agg_matrices: bad shape");
  }
  std::vector<std::vector<double>> out;
  for (int i = 0; i < l; ++i) {
    std::vector<double> q(static_cast<std::size_t>(l) * k * k, 0.0);
    for (int r = 0; r < k; ++r) {
      q[static_cast<std::size_t>(i * k + r) * k + r] = 1.0;
    }
    out.push_back(std::move(q));
  }
  return out;
}

FeatureSumTensors build_feature_sum_tensors(int k, int l) {
  if (k < 1 || l < 1) {
    throw std::invalid_argument("build_feature_sum_tensors: bad shape");
  }
  FeatureSumTensors t;
  t.k = k;
  t.l = l;
  const int kl = k * l;
  t.w.assign(static_cast<std::size_t>(k) * l * kl, 0.0);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < l; ++j) {
      t.w[(static_cast<std::size_t>(i) * l + j) * kl + (i * l + j)] = 1.0;
    }
  }
  t.q.assign(static_cast<std::size_t>(l) * kl, 0.0);
  for (int j = 0; j < l; ++j) {
    for (int r = 0; r < kl; ++r) {
      if (r % l == j) t.q[static_cast<std::size_t>(j) * kl + r] = 1.0;
    }
  }
  return t;
}

std::vector<double> column_sums_via_tensors(const FeatureSumTensors& t,
                                            const std::vector<double>& x) {
  const int kl = t.k * t.l;
  if (static_cast<int>(x.size()) != kl) {
    throw std::invalid_argument("column_sums_via_tensors: input size mismatch");
  }
  // y_ir = sum_j W[i,j,r] x_ij
  std::vector<double> y(static_cast<std::size_t>(t.k) * kl, 0.0);
  for (int i = 0; i < t.k; ++i) {
    for (int j = 0; j < t.l; ++j) {
      const double v = x[static_cast<std::size_t>(i) * t.l + j];
      for (int r = 0; r < kl; ++r) {
        y[static_cast<std::size_t>(i) * kl + r] +=
            t.w[(static_cast<std::size_t>(i) * t.l + j) * kl + r] * v;
      }
    }
  }
  // yhat_r = max_i y_ir, through the Prop.-2 net.
  const MlpParams max_net = build_matrix_max_net(t.k);
  std::vector<double> yhat(kl);
  std::vector<double> column(t.k);
  for (int r = 0; r < kl; ++r) {
    for (int i = 0; i < t.k; ++i) {
      column[i] = y[static_cast<std::size_t>(i) * kl + r];
    }
    yhat[r] = mlp_eval(max_net, column)[0];
  }
  std::vector<double> out(t.l, 0.0);
  for (int j = 0; j < t.l; ++j) {
    for (int r = 0; r < kl; ++r) {
      out[j] += t.q[static_cast<std::size_t>(j) * kl + r] * yhat[r];
    }
  }
  return out;
}

namespace {

bool is_unary(const FactorNode& f) { return f.scope.size() == 1; }

// Caches for the fixed-weight building blocks, keyed by width / set shape.
struct BlockCache {
  std::map<int, MlpParams> max_nets;
  std::map<std::pair<int, int>, FeatureSumTensors> sum_tensors;
  std::map<std::pair<int, int>, std::vector<std::vector<double>>> agg_mats;

  const MlpParams& max_net(int width) {
    auto it = max_nets.find(width);
    if (it == max_nets.end()) {
      it = max_nets.emplace(width, build_matrix_max_net(width)).first;
    }
    return it->second;
  }
  const FeatureSumTensors& sum_tensor(int k, int l) {
    auto key = std::make_pair(k, l);
    auto it = sum_tensors.find(key);
    if (it == sum_tensors.end()) {
      it = sum_tensors.emplace(key, build_feature_sum_tensors(k, l)).first;
    }
    return it->second;
  }
  const std::vector<std::vector<double>>& agg(int l, int k) {
    auto key = std::make_pair(l, k);
    auto it = agg_mats.find(key);
    if (it == agg_mats.end()) {
      it = agg_mats.emplace(key, build_lossless_agg_matrices(l, k)).first;
    }
    return it->second;
  }
};

double net_max(BlockCache& cache, const std::vector<double>& xs) {
  return mlp_eval(cache.max_net(static_cast<int>(xs.size())), xs)[0];
}

// Elementwise sum of a multiset of equal-length vectors, routed through the
// lossless-aggregation concat and the Prop.-3 column-sum pipeline. A shared
// offset makes every entry non-negative; the exact correction is removed.
std::vector<double> net_set_sum(BlockCache& cache,
                                const std::vector<std::vector<double>>& vecs) {
  if (vecs.empty()) return {};
  const int m = static_cast<int>(vecs.size());
  const int len = static_cast<int>(vecs[0].size());
  if (m == 1) return vecs[0];

  double lo = 0.0;
  for (const auto& v : vecs) {
    for (double x : v) lo = std::min(lo, x);
  }
  const double offset = -lo + 1.0;

  // concat = elementwise max of Q_i (v_i + offset).
  const auto& mats = cache.agg(m, len);
  std::vector<double> concat(static_cast<std::size_t>(m) * len, 0.0);
  for (int i = 0; i < m; ++i) {
    for (int row = 0; row < m * len; ++row) {
      double acc = 0.0;
      for (int c = 0; c < len; ++c) {
        acc += mats[i][static_cast<std::size_t>(row) * len + c] *
               (vecs[i][c] + offset);
      }
      concat[row] = std::max(concat[row], acc);
    }
  }

  auto sums = column_sums_via_tensors(cache.sum_tensor(m, len), concat);
  for (double& v : sums) v -= m * offset;
  return sums;
}

}  // namespace

SimulateResult simulate_maxproduct_via_fgnn_traced(
    const FactorGraph& g, int iterations,
    const std::function<void(const DecomposedMessageState&)>& observer) {
  if (iterations < 0) {
    throw std::invalid_argument("simulate: negative iteration count");
  }
  BlockCache cache;
  DecomposedMessageState state = init_decomposed_state(g);
  const auto theta = detail::unary_log_potentials(g);
  for (const auto& row : theta) {
    for (double v : row) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument(
            "simulate: unary potentials must be finite");
      }
    }
  }

  for (int iter = 0; iter < iterations; ++iter) {
    // Step 1: b_{c->i}(z) with the inner max through the Prop.-2 net and the
    // j-sum through the aggregation pipeline.
    for (int fi = 0; fi < g.num_factors(); ++fi) {
      const auto& f = g.factors()[fi];
      if (is_unary(f)) continue;
      const auto* mdp = std::get_if<MaxDecompPotential>(&f.potential);
      if (!mdp) {
        throw std::runtime_error(
            "simulate: every non-unary factor must be MaxDecomp-typed");
      }
      const auto& md = mdp->decomp;
      const int zc = md.z_count;
      const int n = static_cast<int>(f.scope.size());

      std::vector<std::vector<double>> u(n, std::vector<double>(zc));
      for (int j = 0; j < n; ++j) {
        const int d = g.cardinality(f.scope[j]);
        std::vector<double> column(d);
        for (int z = 0; z < zc; ++z) {
          for (int x = 0; x < d; ++x) {
            column[x] = md.tables[j][static_cast<std::size_t>(x) * zc + z] -
                        state.msg[fi][j][x] + state.beliefs[f.scope[j]][x];
          }
          u[j][z] = net_max(cache, column);
        }
      }
      for (int i = 0; i < n; ++i) {
        std::vector<std::vector<double>> others;
        for (int j = 0; j < n; ++j) {
          if (j != i) others.push_back(u[j]);
        }
        state.b_to_z[fi][i] = net_set_sum(cache, others);
      }
    }

    // Step 2: m_{c->i}(x) = max_z [b + phi], max-normalized via the net.
    for (int fi = 0; fi < g.num_factors(); ++fi) {
      const auto& f = g.factors()[fi];
      if (is_unary(f)) continue;
      const auto& md = std::get<MaxDecompPotential>(f.potential).decomp;
      const int zc = md.z_count;
      for (std::size_t i = 0; i < f.scope.size(); ++i) {
        const int d = g.cardinality(f.scope[i]);
        std::vector<double> fresh(d);
        std::vector<double> row(zc);
        for (int x = 0; x < d; ++x) {
          for (int z = 0; z < zc; ++z) {
            row[z] = state.b_to_z[fi][i][z] +
                     md.tables[i][static_cast<std::size_t>(x) * zc + z];
          }
          fresh[x] = net_max(cache, row);
        }
        const double hi = net_max(cache, fresh);
        for (double& v : fresh) v -= hi;
        state.msg[fi][i] = std::move(fresh);
      }
    }

    // Step 3: beliefs as the set sum of theta and the incoming messages.
    for (int i = 0; i < g.num_variables(); ++i) {
      std::vector<std::vector<double>> parts{theta[i]};
      for (int fi : g.factors_of(i)) {
        const auto& f = g.factors()[fi];
        if (is_unary(f)) continue;
        for (std::size_t p = 0; p < f.scope.size(); ++p) {
          if (f.scope[p] == i) parts.push_back(state.msg[fi][p]);
        }
      }
      state.beliefs[i] = net_set_sum(cache, parts);
    }
    ++state.iteration;
    if (observer) observer(state);
  }

  SimulateResult out;
  out.beliefs = state.beliefs;
  for (auto& b : out.beliefs) {
    const double hi = net_max(cache, b);
    for (double& v : b) v -= hi;
  }
  out.decode = decode_map_from_beliefs(out.beliefs);
  return out;
}

SimulateResult simulate_maxproduct_via_fgnn(const FactorGraph& g,
                                            int iterations) {
  return simulate_maxproduct_via_fgnn_traced(g, iterations, nullptr);
}

std::vector<CertifierReport> run_construction_certifiers(std::uint64_t seed) {
  std::vector<CertifierReport> reports;
  Rng rng(seed);

  {
    CertifierReport r;
    r.name = "matrix_max_net";
    r.pass = true;
    for (int l : {1, 2, 4, 8}) {
      const auto net = build_matrix_max_net(l);
      for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> x(l);
        for (double& v : x) v = rng.gaussian() * 3.0;
        const double want = *std::max_element(x.begin(), x.end());
        const double got = mlp_eval(net, x)[0];
        r.max_err = std::max(r.max_err, std::abs(got - want));
      }
    }
    r.pass = r.max_err <= 1e-12;
    reports.push_back(r);
  }

  {
    CertifierReport r;
    r.name = "lossless_agg";
    for (int trial = 0; trial < 100; ++trial) {
      const int l = 1 + rng.uniform_int(4);
      const int k = 1 + rng.uniform_int(4);
      const auto mats = build_lossless_agg_matrices(l, k);
      std::vector<std::vector<double>> f(l, std::vector<double>(k));
      for (auto& v : f) {
        for (double& x : v) x = rng.uniform(0.0, 5.0);
      }
      if (trial % 3 == 0) f[0][0] = 0.0;  // zeros stay recoverable
      std::vector<double> agg(static_cast<std::size_t>(l) * k, 0.0);
      for (int i = 0; i < l; ++i) {
        for (int row = 0; row < l * k; ++row) {
          double acc = 0.0;
          for (int c = 0; c < k; ++c) {
            acc += mats[i][static_cast<std::size_t>(row) * k + c] * f[i][c];
          }
          agg[row] = std::max(agg[row], acc);
        }
      }
      for (int i = 0; i < l; ++i) {
        for (int c = 0; c < k; ++c) {
          r.max_err = std::max(r.max_err, std::abs(agg[i * k + c] - f[i][c]));
        }
      }
    }
    r.pass = r.max_err <= 1e-12;
    reports.push_back(r);
  }

  {
    CertifierReport r;
    r.name = "feature_sum";
    for (int trial = 0; trial < 100; ++trial) {
      const int k = 1 + rng.uniform_int(4);
      const int l = 1 + rng.uniform_int(5);
      const auto t = build_feature_sum_tensors(k, l);
      std::vector<double> x(static_cast<std::size_t>(k) * l);
      for (double& v : x) v = rng.uniform(0.0, 4.0);
      auto got = column_sums_via_tensors(t, x);
      for (int j = 0; j < l; ++j) {
        double want = 0.0;
        for (int i = 0; i < k; ++i) want += x[static_cast<std::size_t>(i) * l + j];
        r.max_err = std::max(r.max_err, std::abs(got[j] - want));
      }
    }
    r.pass = r.max_err <= 1e-12;
    reports.push_back(r);
  }

  {
    CertifierReport r;
    r.name = "simulate_maxproduct";
    for (int trial = 0; trial < 20; ++trial) {
      Rng inst = rng.child(trial);
      const int n = 4 + inst.uniform_int(3);
      std::vector<VariableNode> vars;
      for (int i = 0; i < n; ++i) vars.push_back({i, 2});
      std::vector<FactorNode> factors;
      int fid = 0;
      for (int i = 0; i < n; ++i) {
        factors.push_back({fid++, {i},
                           DenseLogPotential{DenseTensor(
                               {2}, {inst.gaussian(), inst.gaussian()})}});
      }
      auto add_edge = [&](int a, int b) {
        if (a == b) return;
        std::vector<double> vals{inst.gaussian(), inst.gaussian(),
                                 inst.gaussian(), inst.gaussian()};
        factors.push_back(
            {fid++, {std::min(a, b), std::max(a, b)},
             MaxDecompPotential{decompose_max(DenseTensor({2, 2}, vals))}});
      };
      for (int i = 1; i < n; ++i) add_edge(inst.uniform_int(i), i);
      add_edge(0, n - 1);
      auto g = build_graph(vars, factors);

      std::vector<DecomposedMessageState> want_trace;
      DecomposedMessageState ref_state = init_decomposed_state(g);
      for (int it = 0; it < 3; ++it) {
        decomposed_mp_step(g, ref_state);
        want_trace.push_back(ref_state);
      }
      int step = 0;
      simulate_maxproduct_via_fgnn_traced(
          g, 3, [&](const DecomposedMessageState& s) {
            const auto& want = want_trace[step++];
            for (int i = 0; i < n; ++i) {
              for (int x = 0; x < 2; ++x) {
                r.max_err = std::max(
                    r.max_err,
                    std::abs(s.beliefs[i][x] - want.beliefs[i][x]));
              }
            }
            for (std::size_t fi = 0; fi < s.msg.size(); ++fi) {
              for (std::size_t p = 0; p < s.msg[fi].size(); ++p) {
                for (std::size_t x = 0; x < s.msg[fi][p].size(); ++x) {
                  r.max_err = std::max(
                      r.max_err,
                      std::abs(s.msg[fi][p][x] - want.msg[fi][p][x]));
                }
              }
            }
          });
    }
    r.pass = r.max_err <= 1e-6;
    reports.push_back(r);
  }

  return reports;
}

}  // namespace fgbp
