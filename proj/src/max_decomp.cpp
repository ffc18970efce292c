#include "fgbp/max_decomp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fgbp {

MaxDecompFactor decompose_max(const DenseTensor& log_table,
                              const MaxDecompOptions& opts) {
  const auto& shape = log_table.shape();
  const int arity = log_table.arity();

  double min_finite = std::numeric_limits<double>::infinity();
  bool any_finite = false;
  for (std::size_t i = 0; i < log_table.size(); ++i) {
    if (std::isfinite(log_table[i])) {
      min_finite = std::min(min_finite, log_table[i]);
      any_finite = true;
    }
  }
  if (!any_finite) {
    throw std::invalid_argument("decompose_max: table has no finite entry");
  }
  const double floor_value = min_finite - opts.floor_width;

  // Shift so the smallest entry becomes exactly 1.
  std::vector<double> shifted(log_table.size());
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < log_table.size(); ++i) {
    shifted[i] = std::isfinite(log_table[i]) ? log_table[i] : floor_value;
    lo = std::min(lo, shifted[i]);
  }
  const double shift = 1.0 - lo;
  double hi = -std::numeric_limits<double>::infinity();
  for (double& v : shifted) {
    v += shift;
    hi = std::max(hi, v);
  }
  const double off_value = -(hi + 1.0);

  MaxDecompFactor md;
  md.dims = shape;
  md.z_count = static_cast<int>(log_table.size());
  md.shift = shift;
  md.tables.reserve(arity);
  for (int i = 0; i < arity; ++i) {
    md.tables.emplace_back(std::vector<int>{shape[i], md.z_count});
  }
  Assignment a(arity, 0);
  std::size_t z = 0;
  do {
    for (int i = 0; i < arity; ++i) {
      auto& tab = md.tables[i];
      for (int x = 0; x < shape[i]; ++x) {
        tab[static_cast<std::size_t>(x) * md.z_count + z] =
            (x == a[i]) ? shifted[z] / arity : off_value;
      }
    }
    ++z;
  } while (next_assignment(shape, a));
  return md;
}

DenseTensor reconstruct_max(const MaxDecompFactor& md) {
  DenseTensor out(md.dims);
  Assignment a(md.arity(), 0);
  std::size_t flat = 0;
  do {
    double best = -std::numeric_limits<double>::infinity();
    for (int z = 0; z < md.z_count; ++z) {
      double total = 0.0;
      for (int i = 0; i < md.arity(); ++i) {
        total += md.tables[i][static_cast<std::size_t>(a[i]) * md.z_count + z];
      }
      best = std::max(best, total);
    }
    out[flat++] = best;
  } while (next_assignment(md.dims, a));
  return out;
}

}  // namespace fgbp
