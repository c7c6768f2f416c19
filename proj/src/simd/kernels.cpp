#include "ttd/simd/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace ttd::simd {

namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale_scalar(double* x, double a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

double sum_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double sumsq_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

constexpr Ops kScalarOps{dot_scalar, axpy_scalar, scale_scalar, sum_scalar, sumsq_scalar, "scalar"};

const Ops* select_ops() {
  if (const char* forced = std::getenv("TTD_SIMD")) {
    if (std::strcmp(forced, "scalar") == 0) return &kScalarOps;
    if (std::strcmp(forced, "avx2") == 0 && detail::avx2_ops()) return detail::avx2_ops();
    if (std::strcmp(forced, "neon") == 0 && detail::neon_ops()) return detail::neon_ops();
    return &kScalarOps;
  }
  if (const Ops* ops = detail::avx2_ops()) return ops;
  if (const Ops* ops = detail::neon_ops()) return ops;
  return &kScalarOps;
}

}  // namespace

const Ops& scalar_ops() { return kScalarOps; }

const Ops& active_ops() {
  static const Ops* ops = select_ops();
  return *ops;
}

}  // namespace ttd::simd
