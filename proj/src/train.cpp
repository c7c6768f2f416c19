#include "ttd/train.hpp"

#include <algorithm>
#include <cmath>

#include "ttd/errors.hpp"
#include "ttd/simd/kernels.hpp"

namespace ttd {

namespace {

constexpr double kUnitTol = 1e-10;

void check_columns_unit(const Eigen::MatrixXd& M, const char* what) {
  for (Eigen::Index j = 0; j < M.cols(); ++j)
    if (std::abs(M.col(j).norm() - 1.0) > kUnitTol)
      throw Error(ErrorCode::InvalidTrain, std::string(what) + ": column is not unit norm");
}

void check_columns_orthogonal(const Eigen::MatrixXd& M, const char* what) {
  for (Eigen::Index i = 0; i < M.cols(); ++i)
    for (Eigen::Index j = i + 1; j < M.cols(); ++j)
      if (std::abs(M.col(i).dot(M.col(j))) > kUnitTol)
        throw Error(ErrorCode::InvalidTrain, std::string(what) + ": columns are not orthogonal");
}

}  // namespace

void SymmetricCarriage::validate() const {
  if (coefficients.size() != vectors.cols())
    throw Error(ErrorCode::InvalidTrain, "coefficient count does not match vector count");
  for (Eigen::Index i = 0; i < coefficients.size(); ++i)
    if (coefficients[i] == 0.0)
      throw Error(ErrorCode::InvalidTrain, "symmetric carriage has a zero coefficient");
  check_columns_unit(vectors, "symmetric carriage");
  if (orthonormal) check_columns_orthogonal(vectors, "symmetric carriage");
}

void OdecoCarriage::validate() const {
  const Eigen::Index r = coefficients.size();
  if (vectors_a.cols() != r || vectors_b.cols() != r || vectors_c.cols() != r)
    throw Error(ErrorCode::InvalidTrain, "odeco carriage vector sets disagree on rank");
  for (const auto* M : {&vectors_a, &vectors_b, &vectors_c}) {
    check_columns_unit(*M, "odeco carriage");
    check_columns_orthogonal(*M, "odeco carriage");
  }
}

void TrainDecomposition::validate() const {
  if (length() < 2) throw Error(ErrorCode::InvalidTrain, "train length must be >= 2");
  if (!contracted_edges.empty() && contracted_edges.size() != length() - 1)
    throw Error(ErrorCode::InvalidTrain, "need one edge count per junction");
  for (int p : contracted_edges)
    if (p < 1) throw Error(ErrorCode::InvalidTrain, "edge counts must be >= 1");

  const bool all_symmetric =
      std::all_of(carriages.begin(), carriages.end(),
                  [](const Carriage& c) { return std::holds_alternative<SymmetricCarriage>(c); });
  const bool all_odeco =
      std::all_of(carriages.begin(), carriages.end(),
                  [](const Carriage& c) { return std::holds_alternative<OdecoCarriage>(c); });
  if (!all_symmetric && !all_odeco)
    throw Error(ErrorCode::InvalidTrain, "mixed carriage kinds are not supported");
  if (all_odeco && length() != 2)
    throw Error(ErrorCode::InvalidTrain, "odeco carriages are supported for length-2 trains only");

  if (all_symmetric) {
    const std::size_t n = std::get<SymmetricCarriage>(carriages.front()).dim();
    for (const Carriage& c : carriages) {
      const auto& sym = std::get<SymmetricCarriage>(c);
      sym.validate();
      if (sym.dim() != n)
        throw Error(ErrorCode::InvalidTrain, "adjacent carriages disagree on bond dimension");
    }
  } else {
    const auto& left = std::get<OdecoCarriage>(carriages[0]);
    const auto& right = std::get<OdecoCarriage>(carriages[1]);
    left.validate();
    right.validate();
    if (left.bond_dim() != right.bond_dim())
      throw Error(ErrorCode::InvalidTrain, "adjacent carriages disagree on bond dimension");
  }
}

namespace {

// Accumulates weight * outer(vecs[0], ..., vecs.back()) into flat storage.
void accumulate_outer(double* dst, double weight, const std::vector<const Eigen::VectorXd*>& vecs,
                      std::size_t depth, std::size_t stride) {
  const Eigen::VectorXd& v = *vecs[depth];
  if (depth + 1 == vecs.size()) {
    simd::axpy(weight, v.data(), dst, static_cast<std::size_t>(v.size()));
    return;
  }
  const std::size_t next_stride = stride / static_cast<std::size_t>(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    accumulate_outer(dst + static_cast<std::size_t>(i) * next_stride, weight * v[i], vecs,
                     depth + 1, next_stride);
}

double int_pow(double base, int exponent) {
  double out = 1.0;
  for (int i = 0; i < exponent; ++i) out *= base;
  return out;
}

DenseTensor assemble_symmetric(const TrainDecomposition& decomp) {
  const std::size_t L = decomp.length();
  std::vector<const SymmetricCarriage*> cars;
  cars.reserve(L);
  for (const Carriage& c : decomp.carriages) cars.push_back(&std::get<SymmetricCarriage>(c));

  const std::size_t n = cars.front()->dim();
  std::vector<std::size_t> shape(L + 2, n);
  DenseTensor out(shape);

  std::vector<Eigen::Index> tuple(L, 0);
  std::vector<const Eigen::VectorXd*> vecs(L + 2, nullptr);
  std::vector<Eigen::VectorXd> cols(L);

  // Odometer over rank tuples; rank-0 carriages yield the zero tensor.
  for (const auto* c : cars)
    if (c->rank() == 0) return out;

  for (;;) {
    for (std::size_t j = 0; j < L; ++j) cols[j] = cars[j]->vectors.col(tuple[j]);
    double weight = 1.0;
    for (std::size_t j = 0; j < L; ++j) weight *= cars[j]->coefficients[tuple[j]];
    for (std::size_t j = 0; j + 1 < L; ++j)
      weight *= int_pow(cols[j].dot(cols[j + 1]), decomp.edges_at(j));
    if (weight != 0.0) {
      vecs[0] = &cols[0];
      vecs[1] = &cols[0];
      for (std::size_t j = 1; j + 1 < L; ++j) vecs[j + 1] = &cols[j];
      vecs[L] = &cols[L - 1];
      vecs[L + 1] = &cols[L - 1];
      accumulate_outer(out.data(), weight, vecs, 0, out.size());
    }
    std::size_t k = L;
    while (k-- > 0) {
      if (++tuple[k] < static_cast<Eigen::Index>(cars[k]->rank())) break;
      tuple[k] = 0;
      if (k == 0) return out;
    }
  }
}

DenseTensor assemble_odeco(const TrainDecomposition& decomp) {
  const auto& left = std::get<OdecoCarriage>(decomp.carriages[0]);
  const auto& right = std::get<OdecoCarriage>(decomp.carriages[1]);
  const int p = decomp.edges_at(0);

  std::vector<std::size_t> shape{static_cast<std::size_t>(left.vectors_a.rows()),
                                 static_cast<std::size_t>(left.vectors_b.rows()),
                                 static_cast<std::size_t>(right.vectors_a.rows()),
                                 static_cast<std::size_t>(right.vectors_b.rows())};
  DenseTensor out(shape);

  std::vector<const Eigen::VectorXd*> vecs(4, nullptr);
  for (std::size_t i = 0; i < left.rank(); ++i) {
    const Eigen::VectorXd ai = left.vectors_a.col(i);
    const Eigen::VectorXd bi = left.vectors_b.col(i);
    const Eigen::VectorXd ci = left.vectors_c.col(i);
    for (std::size_t j = 0; j < right.rank(); ++j) {
      const Eigen::VectorXd dj = right.vectors_a.col(j);
      const Eigen::VectorXd ej = right.vectors_b.col(j);
      const double junction = int_pow(ci.dot(right.vectors_c.col(j)), p);
      const double weight = left.coefficients[i] * right.coefficients[j] * junction;
      if (weight == 0.0) continue;
      vecs[0] = &ai;
      vecs[1] = &bi;
      vecs[2] = &dj;
      vecs[3] = &ej;
      accumulate_outer(out.data(), weight, vecs, 0, out.size());
    }
  }
  return out;
}

}  // namespace

DenseTensor assemble_train(const TrainDecomposition& decomp) {
  decomp.validate();
  if (std::holds_alternative<OdecoCarriage>(decomp.carriages.front()))
    return assemble_odeco(decomp);
  return assemble_symmetric(decomp);
}

}  // namespace ttd
