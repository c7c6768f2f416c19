#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "ttd/tensor.hpp"

namespace ttd {

/// Symmetric 3-way carriage: sum_i coefficients[i] * vectors.col(i)^{x3}.
struct SymmetricCarriage {
  Eigen::VectorXd coefficients;  // nonzero reals
  Eigen::MatrixXd vectors;       // n x rank, unit columns
  bool orthonormal = true;       // columns pairwise orthogonal when set

  std::size_t dim() const { return static_cast<std::size_t>(vectors.rows()); }
  std::size_t rank() const { return static_cast<std::size_t>(vectors.cols()); }
  void validate() const;
};

/// Orthogonally decomposable 3-way carriage with distinct vector sets per
/// mode; vectors_c carries the bond mode.
struct OdecoCarriage {
  Eigen::VectorXd coefficients;
  Eigen::MatrixXd vectors_a;  // n_a x rank
  Eigen::MatrixXd vectors_b;  // n_b x rank
  Eigen::MatrixXd vectors_c;  // bond_dim x rank

  std::size_t rank() const { return static_cast<std::size_t>(vectors_a.cols()); }
  std::size_t bond_dim() const { return static_cast<std::size_t>(vectors_c.rows()); }
  void validate() const;
};

using Carriage = std::variant<SymmetricCarriage, OdecoCarriage>;

/// An ordered sequence of carriages contracted along bond edges. Odeco
/// carriages are supported for length-2 trains; symmetric carriages for any
/// length. contracted_edges[j] is the number of contracted edges (the power on
/// the junction inner product) between carriages j and j+1.
struct TrainDecomposition {
  std::vector<Carriage> carriages;
  std::vector<int> contracted_edges;  // empty means one edge per junction

  std::size_t length() const { return carriages.size(); }
  int edges_at(std::size_t junction) const {
    return contracted_edges.empty() ? 1 : contracted_edges[junction];
  }
  void validate() const;
};

/// Evaluates the train into a dense tensor: the sum over all rank tuples of
/// coefficient products, outer products of the free-mode vectors, and junction
/// inner products raised to their edge counts.
DenseTensor assemble_train(const TrainDecomposition& decomp);

}  // namespace ttd
