#pragma once

#include <cstddef>

namespace ttd::simd {

/// Vector kernels backing the dense inner loops (contraction, assembly,
/// balancing, norms). Scalar reference implementations always exist; AVX2 and
/// NEON variants are selected at runtime and equivalence-tested against the
/// reference.
struct Ops {
  double (*dot)(const double* x, const double* y, std::size_t n);
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  void (*scale)(double* x, double a, std::size_t n);
  double (*sum)(const double* x, std::size_t n);
  double (*sumsq)(const double* x, std::size_t n);
  const char* name;
};

const Ops& scalar_ops();

/// Best instruction set supported by the running CPU. The TTD_SIMD environment
/// variable ("scalar", "avx2", "neon") overrides detection when set.
const Ops& active_ops();

inline double dot(const double* x, const double* y, std::size_t n) { return active_ops().dot(x, y, n); }
inline void axpy(double a, const double* x, double* y, std::size_t n) { active_ops().axpy(a, x, y, n); }
inline void scale(double* x, double a, std::size_t n) { active_ops().scale(x, a, n); }
inline double sum(const double* x, std::size_t n) { return active_ops().sum(x, n); }
inline double sumsq(const double* x, std::size_t n) { return active_ops().sumsq(x, n); }

namespace detail {
bool avx2_available();
const Ops* avx2_ops();  // nullptr when unavailable on this build/CPU
bool neon_available();
const Ops* neon_ops();
}  // namespace detail

}  // namespace ttd::simd
