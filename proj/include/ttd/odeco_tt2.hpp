#pragma once

#include <cstdint>
#include <string>

#include "ttd/dodd.hpp"
#include "ttd/tensor.hpp"
#include "ttd/train.hpp"

namespace ttd::odeco {

enum class Method { Auto, Sinkhorn, Procrustes, General };

struct Options {
  double rank_tol = 1e-8;
  std::uint64_t seed = 0;
  std::size_t d = 0;  // 0 -> max of the two carriage ranks
  Method method = Method::Auto;
  dodd::SquareOptions square{};
  dodd::GeneralOptions general{};
};

struct Info {
  std::size_t rank_left = 0;
  std::size_t rank_right = 0;
  std::size_t d = 0;
  Method method = Method::Auto;
  int dodd_iterations = 0;
  double dodd_orthogonality_error = 0.0;
};

/// Decomposes a length-2 train of (possibly non-symmetric) odeco carriages:
/// the outer orthonormal sets come from eigendecompositions of slice-sum Gram
/// matrices, the bond structure from a DODD of the coupling matrix.
TrainDecomposition decompose(const DenseTensor& T, const Options& opts = {}, Info* info = nullptr);

Method method_from_string(const std::string& name);
const char* method_name(Method method);

}  // namespace ttd::odeco
