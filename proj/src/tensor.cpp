#include "ttd/tensor.hpp"

#include <cmath>
#include <numeric>

#include "ttd/simd/kernels.hpp"

namespace ttd {

namespace {

std::size_t checked_product(const std::vector<std::size_t>& shape) {
  std::size_t total = 1;
  for (std::size_t d : shape) {
    if (d == 0) throw Error(ErrorCode::DimensionError, "tensor modes must have dimension >= 1");
    total *= d;
  }
  return total;
}

}  // namespace

DenseTensor::DenseTensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(checked_product(shape_), 0.0) {}

DenseTensor::DenseTensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (checked_product(shape_) != data_.size())
    throw Error(ErrorCode::DimensionError, "data length does not match shape product");
}

std::size_t DenseTensor::flat_index(std::span<const std::size_t> indices) const {
  std::size_t flat = 0;
  for (std::size_t k = 0; k < shape_.size(); ++k) flat = flat * shape_[k] + indices[k];
  return flat;
}

std::vector<std::size_t> DenseTensor::strides() const {
  std::vector<std::size_t> s(shape_.size(), 1);
  for (std::size_t k = shape_.size(); k-- > 1;) s[k - 1] = s[k] * shape_[k];
  return s;
}

double DenseTensor::frobenius_norm() const {
  return std::sqrt(simd::sumsq(data_.data(), data_.size()));
}

bool DenseTensor::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

DenseTensor& DenseTensor::operator+=(const DenseTensor& other) {
  if (shape_ != other.shape_) throw Error(ErrorCode::DimensionError, "shape mismatch in +=");
  simd::axpy(1.0, other.data_.data(), data_.data(), data_.size());
  return *this;
}

DenseTensor& DenseTensor::operator*=(double factor) {
  simd::scale(data_.data(), factor, data_.size());
  return *this;
}

namespace {

// Contract a single mode: view the tensor as [outer][mid][inner] and apply
// the operand along mid. Matrix keeps the mode (resized), vector removes it.
DenseTensor contract_mode_matrix(const DenseTensor& T, std::size_t mode, const Eigen::MatrixXd& W) {
  const std::size_t mid = T.dim(mode);
  if (static_cast<std::size_t>(W.cols()) != mid)
    throw Error(ErrorCode::DimensionError, "matrix columns do not match mode dimension");
  const std::size_t rows = static_cast<std::size_t>(W.rows());
  if (rows == 0) throw Error(ErrorCode::DimensionError, "matrix operand must have >= 1 row");

  std::size_t outer = 1, inner = 1;
  for (std::size_t k = 0; k < mode; ++k) outer *= T.dim(k);
  for (std::size_t k = mode + 1; k < T.order(); ++k) inner *= T.dim(k);

  std::vector<std::size_t> out_shape = T.shape();
  out_shape[mode] = rows;
  DenseTensor out(out_shape);

  // Row-major copy of W so kernel calls see contiguous rows.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> Wr = W;
  const double* src = T.data();
  double* dst = out.data();
  if (inner == 1) {
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t a = 0; a < rows; ++a)
        dst[o * rows + a] = simd::dot(Wr.data() + a * mid, src + o * mid, mid);
  } else {
    for (std::size_t o = 0; o < outer; ++o) {
      const double* in_block = src + o * mid * inner;
      double* out_block = dst + o * rows * inner;
      for (std::size_t a = 0; a < rows; ++a)
        for (std::size_t j = 0; j < mid; ++j)
          simd::axpy(Wr(a, j), in_block + j * inner, out_block + a * inner, inner);
    }
  }
  return out;
}

DenseTensor contract_mode_vector(const DenseTensor& T, std::size_t mode, const Eigen::VectorXd& v) {
  const std::size_t mid = T.dim(mode);
  if (static_cast<std::size_t>(v.size()) != mid)
    throw Error(ErrorCode::DimensionError, "vector length does not match mode dimension");

  std::size_t outer = 1, inner = 1;
  for (std::size_t k = 0; k < mode; ++k) outer *= T.dim(k);
  for (std::size_t k = mode + 1; k < T.order(); ++k) inner *= T.dim(k);

  std::vector<std::size_t> out_shape;
  out_shape.reserve(T.order() - 1);
  for (std::size_t k = 0; k < T.order(); ++k)
    if (k != mode) out_shape.push_back(T.dim(k));
  DenseTensor out(std::move(out_shape));

  const double* src = T.data();
  double* dst = out.data();
  if (inner == 1) {
    for (std::size_t o = 0; o < outer; ++o) dst[o] = simd::dot(v.data(), src + o * mid, mid);
  } else {
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t j = 0; j < mid; ++j)
        simd::axpy(v[j], src + (o * mid + j) * inner, dst + o * inner, inner);
  }
  return out;
}

}  // namespace

DenseTensor multilinear_contract(const DenseTensor& T, std::span<const ModeOp> per_mode) {
  if (per_mode.size() != T.order())
    throw Error(ErrorCode::DimensionError, "one operand required per mode");

  DenseTensor current = T;
  // Matrices first (mode indices stay valid), then vectors from the last mode
  // down so removals do not shift pending indices.
  for (std::size_t k = 0; k < per_mode.size(); ++k)
    if (const auto* W = std::get_if<Eigen::MatrixXd>(&per_mode[k]))
      current = contract_mode_matrix(current, k, *W);
  for (std::size_t k = per_mode.size(); k-- > 0;)
    if (const auto* v = std::get_if<Eigen::VectorXd>(&per_mode[k]))
      current = contract_mode_vector(current, k, *v);
  return current;
}

double contract_to_scalar(const DenseTensor& T, std::span<const Eigen::VectorXd> vectors) {
  if (vectors.size() != T.order())
    throw Error(ErrorCode::DimensionError, "one vector required per mode");
  DenseTensor current = T;
  for (std::size_t k = vectors.size(); k-- > 0;)
    current = contract_mode_vector(current, k, vectors[k]);
  return current[0];
}

namespace {

Eigen::MatrixXd weighted_slice_sum_impl(const DenseTensor& T,
                                        std::pair<std::size_t, std::size_t> free_modes,
                                        const DenseTensor& weights) {
  const std::size_t order = T.order();
  const auto [f1, f2] = free_modes;
  if (order < 3) throw Error(ErrorCode::DimensionError, "weighted_slice_sum needs >= 3 modes");
  if (f1 >= order || f2 >= order || f1 == f2)
    throw Error(ErrorCode::DimensionError, "free modes out of range or equal");

  std::vector<std::size_t> summed;
  for (std::size_t k = 0; k < order; ++k)
    if (k != f1 && k != f2) summed.push_back(k);
  if (weights.order() != summed.size())
    throw Error(ErrorCode::DimensionError, "weight order does not match summed modes");
  for (std::size_t k = 0; k < summed.size(); ++k)
    if (weights.dim(k) != T.dim(summed[k]))
      throw Error(ErrorCode::DimensionError, "weight shape does not match summed modes");

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(T.dim(f1), T.dim(f2));

  // Fast paths for the 4-way slice sums used by the length-2 solvers.
  if (order == 4 && f1 == 0 && f2 == 1) {
    const std::size_t slab = T.dim(2) * T.dim(3);
    for (std::size_t a = 0; a < T.dim(0); ++a)
      for (std::size_t b = 0; b < T.dim(1); ++b)
        out(a, b) = simd::dot(weights.data(), T.data() + (a * T.dim(1) + b) * slab, slab);
    return out;
  }
  if (order == 4 && f1 == 2 && f2 == 3) {
    const std::size_t slab = T.dim(2) * T.dim(3);
    std::vector<double> acc(slab, 0.0);
    for (std::size_t a = 0; a < T.dim(0); ++a)
      for (std::size_t b = 0; b < T.dim(1); ++b)
        simd::axpy(weights[a * T.dim(1) + b], T.data() + (a * T.dim(1) + b) * slab, acc.data(), slab);
    for (std::size_t c = 0; c < T.dim(2); ++c)
      for (std::size_t d = 0; d < T.dim(3); ++d) out(c, d) = acc[c * T.dim(3) + d];
    return out;
  }

  // General odometer walk.
  std::vector<std::size_t> idx(order, 0);
  const std::size_t total = T.size();
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t widx = 0;
    for (std::size_t s : summed) widx = widx * T.dim(s) + idx[s];
    out(idx[f1], idx[f2]) += weights[widx] * T[flat];
    for (std::size_t k = order; k-- > 0;) {
      if (++idx[k] < T.dim(k)) break;
      idx[k] = 0;
    }
  }
  return out;
}

}  // namespace

Eigen::MatrixXd weighted_slice_sum(const DenseTensor& T,
                                   std::pair<std::size_t, std::size_t> free_modes,
                                   const DenseTensor& weights) {
  return weighted_slice_sum_impl(T, free_modes, weights);
}

Eigen::MatrixXd weighted_slice_sum(const DenseTensor& T,
                                   std::pair<std::size_t, std::size_t> free_modes,
                                   const Eigen::MatrixXd& weights) {
  std::vector<double> flat(static_cast<std::size_t>(weights.size()));
  for (Eigen::Index i = 0; i < weights.rows(); ++i)
    for (Eigen::Index j = 0; j < weights.cols(); ++j)
      flat[static_cast<std::size_t>(i * weights.cols() + j)] = weights(i, j);
  return weighted_slice_sum_impl(
      T, free_modes,
      DenseTensor({static_cast<std::size_t>(weights.rows()), static_cast<std::size_t>(weights.cols())},
                  std::move(flat)));
}

Eigen::MatrixXd weighted_slice_sum(const DenseTensor& T,
                                   std::pair<std::size_t, std::size_t> free_modes, Rng& rng) {
  std::vector<std::size_t> wshape;
  for (std::size_t k = 0; k < T.order(); ++k)
    if (k != free_modes.first && k != free_modes.second) wshape.push_back(T.dim(k));
  DenseTensor weights(wshape);
  for (std::size_t i = 0; i < weights.size(); ++i) weights[i] = rng.normal();
  return weighted_slice_sum_impl(T, free_modes, weights);
}

double relative_error(const DenseTensor& A, const DenseTensor& B) {
  if (A.shape() != B.shape()) throw Error(ErrorCode::DimensionError, "shape mismatch");
  const double denom = B.frobenius_norm();
  if (denom == 0.0) throw Error(ErrorCode::DivisionByZero, "reference tensor has zero norm");
  double diff_sq = 0.0;
  const double* a = A.data();
  const double* b = B.data();
  for (std::size_t i = 0; i < A.size(); ++i) {
    const double d = a[i] - b[i];
    diff_sq += d * d;
  }
  return std::sqrt(diff_sq) / denom;
}

}  // namespace ttd
