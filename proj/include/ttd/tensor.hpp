#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "ttd/errors.hpp"
#include "ttd/rng.hpp"

namespace ttd {

/// Dense real tensor, row-major flat storage (last index fastest).
/// An empty shape denotes a scalar holding a single entry.
class DenseTensor {
public:
  DenseTensor() : data_(1, 0.0) {}
  explicit DenseTensor(std::vector<std::size_t> shape);
  DenseTensor(std::vector<std::size_t> shape, std::vector<double> data);

  std::size_t order() const { return shape_.size(); }
  std::size_t dim(std::size_t mode) const { return shape_[mode]; }
  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  const std::vector<double>& values() const { return data_; }

  double& operator[](std::size_t flat) { return data_[flat]; }
  double operator[](std::size_t flat) const { return data_[flat]; }

  double& at(std::span<const std::size_t> indices) { return data_[flat_index(indices)]; }
  double at(std::span<const std::size_t> indices) const { return data_[flat_index(indices)]; }

  std::size_t flat_index(std::span<const std::size_t> indices) const;
  std::vector<std::size_t> strides() const;

  double frobenius_norm() const;
  bool all_finite() const;

  DenseTensor& operator+=(const DenseTensor& other);
  DenseTensor& operator*=(double factor);

  bool operator==(const DenseTensor& other) const {
    return shape_ == other.shape_ && data_ == other.data_;
  }

private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

/// Per-mode contraction operand: monostate leaves the mode free, a matrix
/// (rows x dim) replaces the mode dimension by its row count, a vector
/// (length dim) removes the mode.
using ModeOp = std::variant<std::monostate, Eigen::MatrixXd, Eigen::VectorXd>;

/// Contracts each mode of T with its operand. Implements T(W, ..., W),
/// T(u, ..., v) and the whitening transform.
DenseTensor multilinear_contract(const DenseTensor& T, std::span<const ModeOp> per_mode);

/// Full contraction with one vector per mode; returns the resulting scalar.
double contract_to_scalar(const DenseTensor& T, std::span<const Eigen::VectorXd> vectors);

/// Sum of weighted slices: the two free modes stay, all other modes are summed
/// against the weight tensor (whose shape matches the summed modes in order).
Eigen::MatrixXd weighted_slice_sum(const DenseTensor& T,
                                   std::pair<std::size_t, std::size_t> free_modes,
                                   const DenseTensor& weights);

/// Convenience overload for 4-way tensors where the weights form a matrix.
Eigen::MatrixXd weighted_slice_sum(const DenseTensor& T,
                                   std::pair<std::size_t, std::size_t> free_modes,
                                   const Eigen::MatrixXd& weights);

/// Generic weights drawn iid standard normal from the supplied stream.
Eigen::MatrixXd weighted_slice_sum(const DenseTensor& T,
                                   std::pair<std::size_t, std::size_t> free_modes, Rng& rng);

/// ||A - B||_F / ||B||_F.
double relative_error(const DenseTensor& A, const DenseTensor& B);

}  // namespace ttd
