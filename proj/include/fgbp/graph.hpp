#pragma once

#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "fgbp/max_decomp.hpp"
#include "fgbp/tensor.hpp"

namespace fgbp {

// Sentinel for hard constraints; behaves as IEEE -infinity (sum with it
// stays NEG_INF, exp(NEG_INF) == 0).
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct VariableNode {
  int id = 0;
  int cardinality = 2;
};

// Dense table of log-potential values; shape matches the scope cardinalities.
struct DenseLogPotential {
  DenseTensor log_values;
};

// CP-decomposed potential in the positive domain.
struct CpPotential {
  CPTensor values;
};

// Max-of-rank-1 decomposed log-potential.
struct MaxDecompPotential {
  MaxDecompFactor decomp;
};

// At most k of the (all-binary) scope variables may take state 1.
struct BudgetPotential {
  int k = 0;
};

// Even number of 1s over an all-binary scope (LDPC check node).
struct ParityPotential {};

using Potential = std::variant<DenseLogPotential, CpPotential,
                               MaxDecompPotential, BudgetPotential,
                               ParityPotential>;

struct FactorNode {
  int id = 0;
  std::vector<int> scope;  // strictly ascending variable ids
  Potential potential = ParityPotential{};
};

class FactorGraph {
 public:
  FactorGraph(std::vector<VariableNode> variables,
              std::vector<FactorNode> factors);

  const std::vector<VariableNode>& variables() const { return variables_; }
  const std::vector<FactorNode>& factors() const { return factors_; }
  int num_variables() const { return static_cast<int>(variables_.size()); }
  int num_factors() const { return static_cast<int>(factors_.size()); }

  int cardinality(int var_id) const { return variables_[var_id].cardinality; }
  const std::vector<int>& factors_of(int var_id) const {
    return var_adjacency_[var_id];
  }
  std::vector<int> variable_shape(const FactorNode& f) const;

  std::size_t num_edges() const;

 private:
  std::vector<VariableNode> variables_;
  std::vector<FactorNode> factors_;
  std::vector<std::vector<int>> var_adjacency_;  // variable id -> factor ids
};

FactorGraph build_graph(std::vector<VariableNode> variables,
                        std::vector<FactorNode> factors);

// Dense log-domain table of any potential kind. CP entries must densify to
// values > 0; budget/parity expand to 0 / NEG_INF indicators.
DenseTensor materialize_log_table(const FactorGraph& g, const FactorNode& f);

std::string graph_to_json(const FactorGraph& g);
FactorGraph graph_from_json(const std::string& text);

}  // namespace fgbp
