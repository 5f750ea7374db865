#pragma once

/** @file assembly.hpp
    @brief Q1 finite element assembly of the stiffness, mass, auxiliary
           weighted-mass and coupling forms on full or restricted node sets.
*/

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "cemrich/mesh.hpp"
#include "cemrich/model.hpp"

namespace cemrich {

using SpMat = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

/// Nodal pressure per continuum on the full node set; boundary entries are
/// zero after any solve.
struct State {
  std::vector<Vector> p;
  double time = 0.0;

  static State zero(const StructuredGrid& grid, int n_continua);
  int n_continua() const { return static_cast<int>(p.size()); }
};

/// Maps full node ids to local matrix indices (-1 excluded).
class DofMap {
 public:
  static DofMap interior(const StructuredGrid& grid);
  static DofMap all_nodes(const StructuredGrid& grid);
  static DofMap from_nodes(const StructuredGrid& grid, const std::vector<int>& nodes);

  int local(int node) const { return map_[node]; }
  int size() const { return size_; }
  const std::vector<int>& nodes() const { return nodes_; }

 private:
  std::vector<int> map_;
  std::vector<int> nodes_;
  int size_ = 0;
};

/// Inclusive fine-cell rectangle; the assembly domain.
struct CellRect {
  int cx0 = 0, cx1 = -1, cy0 = 0, cy1 = -1;

  static CellRect all(const StructuredGrid& grid) { return {0, grid.n - 1, 0, grid.n - 1}; }
  static CellRect block(const CoarsePartition& partition, int j);
  static CellRect region(const OversampledRegion& r, const CoarsePartition& partition);
};

/// int_D kappa(x) mu(u) grad p . grad v with the coefficient evaluated at
/// tensor Gauss points (pressure interpolated there first).
SpMat assemble_stiffness(const StructuredGrid& grid, const DofMap& map, const CellRect& cells,
                         const CoefficientField& field, const Nonlinearity& nl,
                         const Vector& u_full, int quad = 2);

/// Consistent Q1 mass matrix int_D p v.
SpMat assemble_mass(const StructuredGrid& grid, const DofMap& map, const CellRect& cells,
                    int quad = 2);

/// int_D kappa(x) mu(u) (sum_k |grad chi_k|^2) p v — the auxiliary mass form.
SpMat assemble_weighted_mass(const StructuredGrid& grid, const DofMap& map, const CellRect& cells,
                             const CoarsePartition& partition, const CoefficientField& field,
                             const Nonlinearity& nl, const Vector& u_full, int quad = 2);

/// Load vector (f(t, .), v).
Vector assemble_load(const StructuredGrid& grid, const DofMap& map, const SourceFn& f, double t,
                     int quad = 2);

/// N x N block operator of the exchange terms: block (i,i) adds the
/// Q_il-weighted mass over l != i, block (i,l) subtracts it. Dimensions
/// N * map.size().
SpMat assemble_coupling(const StructuredGrid& grid, const DofMap& map, const CellRect& cells,
                        const TransferTable& transfer, const State& u, int quad = 2);

/// Principal submatrix / subvector on a node subset.
SpMat restrict_sparse(const SpMat& op, const std::vector<int>& rows, const std::vector<int>& cols);
Vector restrict_vector(const Vector& v, const std::vector<int>& idx);

/// Stacks per-continuum interior vectors of a state into one DOF vector.
Vector stack_interior(const StructuredGrid& grid, const State& s);
State unstack_interior(const StructuredGrid& grid, const Vector& dofs, int n_continua,
                       double time = 0.0);

} // namespace cemrich
