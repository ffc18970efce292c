#include "fgbp/tensor.hpp"

#include <stdexcept>
#include <string>

namespace fgbp {

namespace {

void check_shape(const std::vector<int>& shape) {
  if (shape.empty()) throw std::invalid_argument("tensor shape is empty");
  for (int d : shape) {
    if (d < 1) throw std::invalid_argument("tensor axis cardinality < 1");
  }
}

}  // namespace

DenseTensor::DenseTensor(std::vector<int> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  check_shape(shape_);
  if (data_.size() != state_space_size(shape_)) {
    throw std::invalid_argument("tensor data length does not match shape");
  }
}

DenseTensor::DenseTensor(std::vector<int> shape) : shape_(std::move(shape)) {
  check_shape(shape_);
  data_.assign(state_space_size(shape_), 0.0);
}

std::size_t DenseTensor::flat_index(std::span<const int> idx) const {
  if (idx.size() != shape_.size()) {
    throw std::invalid_argument("index arity does not match tensor arity");
  }
  std::size_t flat = 0;
  for (std::size_t j = 0; j < shape_.size(); ++j) {
    if (idx[j] < 0 || idx[j] >= shape_[j]) {
      throw std::out_of_range("tensor index out of range");
    }
    flat = flat * shape_[j] + idx[j];
  }
  return flat;
}

CPTensor::CPTensor(std::vector<int> dims, int rank,
                   std::vector<std::vector<double>> matrices)
    : dims_(std::move(dims)), rank_(rank), matrices_(std::move(matrices)) {
  check_shape(dims_);
  if (rank_ < 1) throw std::invalid_argument("CP rank must be >= 1");
  if (matrices_.size() != dims_.size()) {
    throw std::invalid_argument("CP matrix count does not match arity");
  }
  for (std::size_t j = 0; j < dims_.size(); ++j) {
    if (matrices_[j].size() != static_cast<std::size_t>(dims_[j]) * rank_) {
      throw std::invalid_argument("CP matrix " + std::to_string(j) +
                                  " has wrong size");
    }
  }
}

DenseTensor densify(const CPTensor& cp) {
  DenseTensor out(cp.dims());
  Assignment a(cp.arity(), 0);
  std::size_t flat = 0;
  do {
    double sum = 0.0;
    for (int r = 0; r < cp.rank(); ++r) {
      double term = 1.0;
      for (int j = 0; j < cp.arity(); ++j) {
        term *= cp.matrix_entry(j, a[j], r);
      }
      sum += term;
    }
    out[flat++] = sum;
  } while (next_assignment(cp.dims(), a));
  return out;
}

DenseTensor outer_product(const std::vector<std::vector<double>>& vectors) {
  if (vectors.empty()) throw std::invalid_argument("outer_product: no vectors");
  std::vector<int> shape;
  for (const auto& v : vectors) {
    if (v.empty()) throw std::invalid_argument("outer_product: empty vector");
    shape.push_back(static_cast<int>(v.size()));
  }
  DenseTensor out(shape);
  Assignment a(shape.size(), 0);
  std::size_t flat = 0;
  do {
    double prod = 1.0;
    for (std::size_t j = 0; j < vectors.size(); ++j) prod *= vectors[j][a[j]];
    out[flat++] = prod;
  } while (next_assignment(shape, a));
  return out;
}

DenseTensor hadamard(const DenseTensor& a, const DenseTensor& b) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument("hadamard: shape mismatch");
  }
  DenseTensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

std::vector<double> reduce_except(const DenseTensor& t, int axis,
                                  ReduceMode mode) {
  if (axis < 0 || axis >= t.arity()) {
    throw std::out_of_range("reduce_except: axis out of range");
  }
  const auto& shape = t.shape();
  // Stride of `axis` in the row-major layout.
  std::size_t stride = 1;
  for (int j = axis + 1; j < t.arity(); ++j) stride *= shape[j];
  const int d = shape[axis];

  std::vector<double> out;
  std::vector<bool> seen;
  if (mode == ReduceMode::kSum) {
    out.assign(d, 0.0);
  } else {
    out.assign(d, 0.0);
    seen.assign(d, false);
  }
  for (std::size_t flat = 0; flat < t.size(); ++flat) {
    int k = static_cast<int>((flat / stride) % d);
    if (mode == ReduceMode::kSum) {
      out[k] += t[flat];
    } else if (!seen[k] || t[flat] > out[k]) {
      out[k] = t[flat];
      seen[k] = true;
    }
  }
  return out;
}

std::size_t state_space_size(std::span<const int> shape) {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  return n;
}

bool next_assignment(std::span<const int> shape, Assignment& a) {
  for (int j = static_cast<int>(shape.size()) - 1; j >= 0; --j) {
    if (++a[j] < shape[j]) return true;
    a[j] = 0;
  }
  return false;
}

std::vector<Assignment> enumerate_assignments(std::span<const int> shape) {
  std::vector<Assignment> all;
  all.reserve(state_space_size(shape));
  Assignment a(shape.size(), 0);
  do {
    all.push_back(a);
  } while (next_assignment(shape, a));
  return all;
}

Assignment assignment_from_flat(std::span<const int> shape, std::size_t flat) {
  Assignment a(shape.size(), 0);
  for (int j = static_cast<int>(shape.size()) - 1; j >= 0; --j) {
    a[j] = static_cast<int>(flat % shape[j]);
    flat /= shape[j];
  }
  return a;
}

}  // namespace fgbp
