#include "fgbp/ad.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fgbp::ad {

Tape::NodeId Tape::push(std::vector<double> value,
                        std::function<void(Tape&)> backprop) {
  Node n;
  n.value = std::move(value);
  n.grad.assign(n.value.size(), 0.0);
  n.backprop = std::move(backprop);
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size()) - 1;
}

Tape::NodeId Tape::input(std::vector<double> value) {
  return push(std::move(value), nullptr);
}

Tape::NodeId Tape::linear(NodeId w, NodeId x, NodeId b, int rows, int cols) {
  const auto& wv = nodes_[w].value;
  const auto& xv = nodes_[x].value;
  const auto& bv = nodes_[b].value;
  if (static_cast<int>(wv.size()) != rows * cols ||
      static_cast<int>(xv.size()) != cols ||
      static_cast<int>(bv.size()) != rows) {
    throw std::invalid_argument("linear: shape mismatch");
  }
  std::vector<double> out(rows);
  for (int r = 0; r < rows; ++r) {
    double acc = bv[r];
    for (int c = 0; c < cols; ++c) acc += wv[r * cols + c] * xv[c];
    out[r] = acc;
  }
  const NodeId id = static_cast<NodeId>(nodes_.size());
  return push(std::move(out), [id, w, x, b, rows, cols](Tape& t) {
    const auto& g = t.nodes_[id].grad;
    const auto& wv = t.nodes_[w].value;
    const auto& xv = t.nodes_[x].value;
    for (int r = 0; r < rows; ++r) {
      t.nodes_[b].grad[r] += g[r];
      for (int c = 0; c < cols; ++c) {
        t.nodes_[w].grad[r * cols + c] += g[r] * xv[c];
        t.nodes_[x].grad[c] += g[r] * wv[r * cols + c];
      }
    }
  });
}

Tape::NodeId Tape::matvec(NodeId w, NodeId x, int rows, int cols) {
  const auto& wv = nodes_[w].value;
  const auto& xv = nodes_[x].value;
  if (static_cast<int>(wv.size()) != rows * cols ||
      static_cast<int>(xv.size()) != cols) {
    throw std::invalid_argument("matvec: shape mismatch");
  }
  std::vector<double> out(rows, 0.0);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) out[r] += wv[r * cols + c] * xv[c];
  }
  const NodeId id = static_cast<NodeId>(nodes_.size());
  return push(std::move(out), [id, w, x, rows, cols](Tape& t) {
    const auto& g = t.nodes_[id].grad;
    const auto& wv = t.nodes_[w].value;
    const auto& xv = t.nodes_[x].value;
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        t.nodes_[w].grad[r * cols + c] += g[r] * xv[c];
        t.nodes_[x].grad[c] += g[r] * wv[r * cols + c];
      }
    }
  });
}

Tape::NodeId Tape::relu(NodeId x) {
  std::vector<double> out = nodes_[x].value;
  for (double& v : out) v = std::max(v, 0.0);
  const NodeId id = static_cast<NodeId>(nodes_.size());
  return push(std::move(out), [id, x](Tape& t) {
    const auto& g = t.nodes_[id].grad;
    const auto& xv = t.nodes_[x].value;
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (xv[k] > 0.0) t.nodes_[x].grad[k] += g[k];
    }
  });
}

Tape::NodeId Tape::add(NodeId a, NodeId b) {
  const auto& av = nodes_[a].value;
  const auto& bv = nodes_[b].value;
  if (av.size() != bv.size()) throw std::invalid_argument("add: size mismatch");
  std::vector<double> out(av.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = av[k] + bv[k];
  const NodeId id = static_cast<NodeId>(nodes_.size());
  return push(std::move(out), [id, a, b](Tape& t) {
    const auto& g = t.nodes_[id].grad;
    for (std::size_t k = 0; k < g.size(); ++k) {
      t.nodes_[a].grad[k] += g[k];
      t.nodes_[b].grad[k] += g[k];
    }
  });
}

Tape::NodeId Tape::mul(NodeId a, NodeId b) {
  const auto& av = nodes_[a].value;
  const auto& bv = nodes_[b].value;
  if (av.size() != bv.size()) throw std::invalid_argument("mul: size mismatch");
  std::vector<double> out(av.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = av[k] * bv[k];
  const NodeId id = static_cast<NodeId>(nodes_.size());
  return push(std::move(out), [id, a, b](Tape& t) {
    const auto& g = t.nodes_[id].grad;
    const auto& av = t.nodes_[a].value;
    const auto& bv = t.nodes_[b].value;
    for (std::size_t k = 0; k < g.size(); ++k) {
      t.nodes_[a].grad[k] += g[k] * bv[k];
      t.nodes_[b].grad[k] += g[k] * av[k];
    }
  });
}

Tape::NodeId Tape::scale(NodeId a, double c) {
  std::vector<double> out = nodes_[a].value;
  for (double& v : out) v *= c;
  const NodeId id = static_cast<NodeId>(nodes_.size());
  return push(std::move(out), [id, a, c](Tape& t) {
    const auto& g = t.nodes_[id].grad;
    for (std::size_t k = 0; k < g.size(); ++k) t.nodes_[a].grad[k] += c * g[k];
  });
}

Tape::NodeId Tape::concat(const std::vector<NodeId>& xs) {
  std::vector<double> out;
  for (NodeId x : xs) {
    const auto& v = nodes_[x].value;
    out.insert(out.end(), v.begin(), v.end());
  }
  const NodeId id = static_cast<NodeId>(nodes_.size());
  return push(std::move(out), [id, parents = xs](Tape& t) {
    const auto& g = t.nodes_[id].grad;
    std::size_t offset = 0;
    for (NodeId x : parents) {
      auto& xg = t.nodes_[x].grad;
      for (std::size_t k = 0; k < xg.size(); ++k) xg[k] += g[offset + k];
      offset += xg.size();
    }
  });
}

Tape::NodeId Tape::aggregate(const std::vector<NodeId>& xs, AggMode mode,
                             int dim) {
  for (NodeId x : xs) {
    if (static_cast<int>(nodes_[x].value.size()) != dim) {
      throw std::invalid_argument("aggregate: length mismatch");
    }
  }
  if (xs.empty()) {
    return input(std::vector<double>(dim, mode == AggMode::kProd ? 1.0 : 0.0));
  }

  std::vector<double> out(dim);
  std::vector<int> argmax(mode == AggMode::kMax ? dim : 0, 0);
  for (int k = 0; k < dim; ++k) {
    if (mode == AggMode::kSum) {
      double acc = 0.0;
      for (NodeId x : xs) acc += nodes_[x].value[k];
      out[k] = acc;
    } else if (mode == AggMode::kProd) {
      double acc = 1.0;
      for (NodeId x : xs) acc *= nodes_[x].value[k];
      out[k] = acc;
    } else {
      double best = nodes_[xs[0]].value[k];
      int who = 0;
      for (std::size_t j = 1; j < xs.size(); ++j) {
        const double v = nodes_[xs[j]].value[k];
        if (v > best) {
          best = v;
          who = static_cast<int>(j);
        }
      }
      out[k] = best;
      argmax[k] = who;
    }
  }
  const NodeId id = static_cast<NodeId>(nodes_.size());
  return push(std::move(out), [id, parents = xs, mode, dim,
                               argmax = std::move(argmax)](Tape& t) {
    const auto& g = t.nodes_[id].grad;
    if (mode == AggMode::kSum) {
      for (NodeId x : parents) {
        for (int k = 0; k < dim; ++k) t.nodes_[x].grad[k] += g[k];
      }
    } else if (mode == AggMode::kMax) {
      for (int k = 0; k < dim; ++k) {
        t.nodes_[parents[argmax[k]]].grad[k] += g[k];
      }
    } else {
      // d/dx_j prod = product of the others, recomputed per coordinate.
      for (std::size_t j = 0; j < parents.size(); ++j) {
        for (int k = 0; k < dim; ++k) {
          double others = 1.0;
          for (std::size_t o = 0; o < parents.size(); ++o) {
            if (o != j) others *= t.nodes_[parents[o]].value[k];
          }
          t.nodes_[parents[j]].grad[k] += g[k] * others;
        }
      }
    }
  });
}

Tape::NodeId Tape::softmax_cross_entropy(NodeId logits, int label) {
  const auto& z = nodes_[logits].value;
  if (label < 0 || label >= static_cast<int>(z.size())) {
    throw std::invalid_argument("softmax_cross_entropy: label out of range");
  }
  double hi = z[0];
  for (double v : z) hi = std::max(hi, v);
  double total = 0.0;
  for (double v : z) total += std::exp(v - hi);
  const double lse = hi + std::log(total);
  const NodeId id = static_cast<NodeId>(nodes_.size());
  return push({lse - z[label]}, [id, logits, label, lse](Tape& t) {
    const double g = t.nodes_[id].grad[0];
    const auto& z = t.nodes_[logits].value;
    for (std::size_t k = 0; k < z.size(); ++k) {
      double p = std::exp(z[k] - lse);
      if (static_cast<int>(k) == label) p -= 1.0;
      t.nodes_[logits].grad[k] += g * p;
    }
  });
}

void Tape::backward(NodeId root) {
  if (nodes_[root].value.size() != 1) {
    throw std::invalid_argument("backward: root must be scalar");
  }
  for (auto& n : nodes_) std::fill(n.grad.begin(), n.grad.end(), 0.0);
  nodes_[root].grad[0] = 1.0;
  for (NodeId n = root; n >= 0; --n) {
    if (nodes_[n].backprop) nodes_[n].backprop(*this);
  }
}

}  // namespace fgbp::ad
