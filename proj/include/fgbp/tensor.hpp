#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fgbp {

// One state index per axis, each in [0, cardinality).
using Assignment = std::vector<int>;

// Row-major multidimensional array of doubles (last axis fastest).
class DenseTensor {
 public:
  DenseTensor(std::vector<int> shape, std::vector<double> data);
  explicit DenseTensor(std::vector<int> shape);  // zero-filled

  const std::vector<int>& shape() const { return shape_; }
  int arity() const { return static_cast<int>(shape_.size()); }
  std::size_t size() const { return data_.size(); }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  std::size_t flat_index(std::span<const int> idx) const;
  double at(std::span<const int> idx) const { return data_[flat_index(idx)]; }
  double& at(std::span<const int> idx) { return data_[flat_index(idx)]; }

  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }

 private:
  std::vector<int> shape_;
  std::vector<double> data_;
};

// Rank-R CP form: one d_j x R matrix per axis, entry(i_1..i_m) =
// sum_r prod_j matrices[j](i_j, r).
class CPTensor {
 public:
  // matrices[j] is row-major d_j x R.
  CPTensor(std::vector<int> dims, int rank,
           std::vector<std::vector<double>> matrices);

  int arity() const { return static_cast<int>(dims_.size()); }
  int rank() const { return rank_; }
  const std::vector<int>& dims() const { return dims_; }
  const std::vector<std::vector<double>>& matrices() const {
    return matrices_;
  }
  double matrix_entry(int axis, int state, int r) const {
    return matrices_[axis][static_cast<std::size_t>(state) * rank_ + r];
  }

 private:
  std::vector<int> dims_;
  int rank_;
  std::vector<std::vector<double>> matrices_;
};

DenseTensor densify(const CPTensor& cp);

DenseTensor outer_product(const std::vector<std::vector<double>>& vectors);

DenseTensor hadamard(const DenseTensor& a, const DenseTensor& b);

enum class ReduceMode { kSum, kMax };

// Reduce every axis except `axis`; result has length shape[axis].
std::vector<double> reduce_except(const DenseTensor& t, int axis,
                                  ReduceMode mode);

std::size_t state_space_size(std::span<const int> shape);

// Row-major (last axis fastest) enumeration of the product domain.
// Returns false once all assignments have been visited.
bool next_assignment(std::span<const int> shape, Assignment& a);

std::vector<Assignment> enumerate_assignments(std::span<const int> shape);

Assignment assignment_from_flat(std::span<const int> shape, std::size_t flat);

}  // namespace fgbp
