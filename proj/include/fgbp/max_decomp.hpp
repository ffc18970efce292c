#pragma once

#include <vector>

#include "fgbp/tensor.hpp"

namespace fgbp {

// Max-of-rank-1 form of a log-potential: after adding `shift`, the table
// satisfies  shifted(x) = max_z sum_i tables[i](x_i, z)  exactly, with one z
// state per assignment of the original table.
struct MaxDecompFactor {
  std::vector<int> dims;             // per scope-variable cardinality
  int z_count = 0;                   // number of auxiliary z states
  std::vector<DenseTensor> tables;   // one d_i x z_count table per variable
  double shift = 0.0;                // added to the source table pre-decomposition

  int arity() const { return static_cast<int>(dims.size()); }
};

// Entries at or below this floor in the source log-table are treated as
// "-infinity" and clamped to (min finite entry - floor_width) first.
struct MaxDecompOptions {
  double floor_width = 50.0;
};

MaxDecompFactor decompose_max(const DenseTensor& log_table,
                              const MaxDecompOptions& opts = {});

// Returns the shifted log-table; subtract md.shift to recover the original.
DenseTensor reconstruct_max(const MaxDecompFactor& md);

}  // namespace fgbp
