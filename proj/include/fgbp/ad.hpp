#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace fgbp::ad {

enum class AggMode { kMax, kSum, kProd };

// Tape-based reverse-mode differentiation over vector-valued nodes. Every
// operation records a closure that scatters the output gradient back to its
// parents; backward() replays them in reverse creation order.
class Tape {
 public:
  using NodeId = int;

  NodeId input(std::vector<double> value);

  const std::vector<double>& value(NodeId n) const { return nodes_[n].value; }
  const std::vector<double>& grad(NodeId n) const { return nodes_[n].grad; }
  int size() const { return static_cast<int>(nodes_.size()); }

  // y = W x + b with W row-major (rows x cols), b length rows.
  NodeId linear(NodeId w, NodeId x, NodeId b, int rows, int cols);
  // y = W x, W row-major (rows x cols).
  NodeId matvec(NodeId w, NodeId x, int rows, int cols);
  NodeId relu(NodeId x);
  NodeId add(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);  // elementwise
  NodeId scale(NodeId a, double c);
  NodeId concat(const std::vector<NodeId>& xs);
  // Elementwise reduction over a multiset of equal-length vectors. An empty
  // set yields zeros (max/sum) or ones (prod) of length `dim`. The max
  // aggregator routes each coordinate's gradient to the lowest argmax index.
  NodeId aggregate(const std::vector<NodeId>& xs, AggMode mode, int dim);
  // Scalar node: logsumexp(logits) - logits[label].
  NodeId softmax_cross_entropy(NodeId logits, int label);

  // Accumulates gradients of `root` (a length-1 node) into every node.
  void backward(NodeId root);

 private:
  // Closures take the owning tape explicitly so a Tape stays movable.
  struct Node {
    std::vector<double> value;
    std::vector<double> grad;
    std::function<void(Tape&)> backprop;  // empty for leaves
  };

  NodeId push(std::vector<double> value, std::function<void(Tape&)> backprop);

  std::vector<Node> nodes_;
};

}  // namespace fgbp::ad
