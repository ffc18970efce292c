#pragma once

#include <cstddef>
#include <vector>

#include "fgbp/graph.hpp"

namespace fgbp {

// Per-variable probability vectors; each sums to 1.
using MarginalTable = std::vector<std::vector<double>>;

struct MapResult {
  Assignment assignment;
  double log_score = 0.0;  // sum of factor log-potentials at `assignment`
};

struct ExactOptions {
  std::size_t state_space_cap = std::size_t{1} << 24;
};

// Brute-force enumeration with a log-sum-exp accumulator. Throws if the
// joint state space exceeds the cap or the model is degenerate (Z == 0).
MarginalTable exact_marginals(const FactorGraph& g,
                              const ExactOptions& opts = {});

// Global argmax; ties broken by the lexicographically smallest assignment.
MapResult exact_map(const FactorGraph& g, const ExactOptions& opts = {});

double log_partition_function(const FactorGraph& g,
                              const ExactOptions& opts = {});

// Sum of materialized factor log-potentials at one full assignment.
double assignment_log_score(const FactorGraph& g, const Assignment& x);

}  // namespace fgbp
