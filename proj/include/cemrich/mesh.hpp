#pragma once

/** @file mesh.hpp
    @brief Structured fine/coarse grids on the unit square, oversampled regions,
           and the coarse bilinear partition of unity.
*/

#include <stdexcept>
#include <vector>

namespace cemrich {

/// Uniform n x n grid of square Q1 cells on [0,1]^2.
/// Nodes and cells are numbered row-major from the lower-left corner.
struct StructuredGrid {
  int n = 0;      ///< cells per side (source of truth)
  double h = 0.0; ///< fine cell width, 1/n

  int nodes_per_side() const { return n + 1; }
  int node_count() const { return (n + 1) * (n + 1); }
  int cell_count() const { return n * n; }
  int interior_count() const { return (n - 1) * (n - 1); }
  int boundary_count() const { return 4 * n; }

  int node_id(int ix, int iy) const { return iy * (n + 1) + ix; }
  int cell_id(int cx, int cy) const { return cy * n + cx; }
  int node_x(int node) const { return node % (n + 1); }
  int node_y(int node) const { return node / (n + 1); }

  bool is_boundary(int node) const {
    const int ix = node_x(node), iy = node_y(node);
    return ix == 0 || iy == 0 || ix == n || iy == n;
  }

  /// Index of a node within the (n-1)^2 interior lattice, -1 on the boundary.
  int interior_index(int node) const {
    if (is_boundary(node)) return -1;
    return (node_y(node) - 1) * (n - 1) + (node_x(node) - 1);
  }
  int interior_node(int k) const {
    return node_id(k % (n - 1) + 1, k / (n - 1) + 1);
  }
};

/// Grid constructor; rejects n < 2 (no interior otherwise).
StructuredGrid build_fine_grid(int n);

/// Partition of the fine grid into Hdiv x Hdiv coarse blocks, with the
/// bilinear hat partition of unity on the coarse nodes.
struct CoarsePartition {
  StructuredGrid grid;
  int Hdiv = 0;        ///< coarse cells per side
  double H = 0.0;      ///< coarse cell width
  int block_cells = 0; ///< fine cells per coarse-block side, n / Hdiv

  int block_count() const { return Hdiv * Hdiv; }
  int coarse_node_count() const { return (Hdiv + 1) * (Hdiv + 1); }
  int block_id(int bx, int by) const { return by * Hdiv + bx; }
  int block_x(int j) const { return j % Hdiv; }
  int block_y(int j) const { return j / Hdiv; }

  /// Fine cells of block j: [cx0, cx1] x [cy0, cy1], inclusive.
  void block_cell_range(int j, int& cx0, int& cx1, int& cy0, int& cy1) const;
  /// Fine nodes of closure(K_j): [ix0, ix1] x [iy0, iy1], inclusive.
  void block_node_range(int j, int& ix0, int& ix1, int& iy0, int& iy1) const;

  std::vector<int> block_cells_of(int j) const;
  /// Closure nodes of block j, optionally dropping the ones on the domain boundary.
  std::vector<int> block_nodes_of(int j, bool drop_domain_boundary) const;

  /// Hat value chi_k at a point of the domain; k is a coarse node id.
  double chi_value(int k, double x, double y) const;
  /// Gradient of chi_k at a point strictly inside a coarse cell.
  void chi_gradient(int k, double x, double y, double& gx, double& gy) const;
  /// sum_k |grad chi_k|^2 at a point; weight of the auxiliary mass form.
  double pou_gradient_weight(double x, double y) const;
};

/// Rejects Hdiv < 2 and Hdiv not dividing grid.n.
CoarsePartition build_coarse_partition(const StructuredGrid& grid, int Hdiv);

/// Coarse block K_j grown by m coarse layers (Chebyshev box), clipped to the domain.
struct OversampledRegion {
  int block = 0;
  int layers = 0;
  int bx0 = 0, bx1 = 0, by0 = 0, by1 = 0; ///< coarse-block rect, inclusive
  int nx0 = 0, nx1 = 0, ny0 = 0, ny1 = 0; ///< fine-node rect of the closure, inclusive

  std::vector<int> member_blocks; ///< Z_j, ascending block ids

  /// Fine nodes strictly inside the region and inside the domain:
  /// [ix, iy] with nx0 < ix < nx1, ny0 < iy < ny1 intersected with the
  /// interior of the unit square (the intersection is the same rect since
  /// clipped sides coincide with the domain boundary).
  void interior_node_range(int& ix0, int& ix1, int& iy0, int& iy1) const;
  std::vector<int> node_set(const StructuredGrid& grid) const;
  std::vector<int> interior_node_set(const StructuredGrid& grid) const;
  bool contains_block(int bx, int by) const {
    return bx >= bx0 && bx <= bx1 && by >= by0 && by <= by1;
  }
};

OversampledRegion oversample(const CoarsePartition& partition, int j, int m);

/// Oversampling layer count m = round(10 log(Hdiv) / log 64), ties rounded up.
int default_layers(int Hdiv);

} // namespace cemrich
