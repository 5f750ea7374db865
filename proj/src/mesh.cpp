#include "cemrich/mesh.hpp"

#include <algorithm>
#include <cmath>

namespace cemrich {

StructuredGrid build_fine_grid(int n) {
  if (n < 2) throw std::invalid_argument("fine grid needs n >= 2, got " + std::to_string(n));
  StructuredGrid g;
  g.n = n;
  g.h = 1.0 / n;
  return g;
}

void CoarsePartition::block_cell_range(int j, int& cx0, int& cx1, int& cy0, int& cy1) const {
  cx0 = block_x(j) * block_cells;
  cx1 = cx0 + block_cells - 1;
  cy0 = block_y(j) * block_cells;
  cy1 = cy0 + block_cells - 1;
}

void CoarsePartition::block_node_range(int j, int& ix0, int& ix1, int& iy0, int& iy1) const {
  int cx0, cx1, cy0, cy1;
  block_cell_range(j, cx0, cx1, cy0, cy1);
  ix0 = cx0;
  ix1 = cx1 + 1;
  iy0 = cy0;
  iy1 = cy1 + 1;
}

std::vector<int> CoarsePartition::block_cells_of(int j) const {
  int cx0, cx1, cy0, cy1;
  block_cell_range(j, cx0, cx1, cy0, cy1);
  std::vector<int> cells;
  cells.reserve((cx1 - cx0 + 1) * (cy1 - cy0 + 1));
  for (int cy = cy0; cy <= cy1; ++cy)
    for (int cx = cx0; cx <= cx1; ++cx) cells.push_back(grid.cell_id(cx, cy));
  return cells;
}

std::vector<int> CoarsePartition::block_nodes_of(int j, bool drop_domain_boundary) const {
  int ix0, ix1, iy0, iy1;
  block_node_range(j, ix0, ix1, iy0, iy1);
  std::vector<int> nodes;
  nodes.reserve((ix1 - ix0 + 1) * (iy1 - iy0 + 1));
  for (int iy = iy0; iy <= iy1; ++iy)
    for (int ix = ix0; ix <= ix1; ++ix) {
      const int node = grid.node_id(ix, iy);
      if (drop_domain_boundary && grid.is_boundary(node)) continue;
      nodes.push_back(node);
    }
  return nodes;
}

double CoarsePartition::chi_value(int k, double x, double y) const {
  const int kx = k % (Hdiv + 1), ky = k / (Hdiv + 1);
  const double tx = 1.0 - std::abs(x - kx * H) / H;
  const double ty = 1.0 - std::abs(y - ky * H) / H;
  return std::max(0.0, tx) * std::max(0.0, ty);
}

void CoarsePartition::chi_gradient(int k, double x, double y, double& gx, double& gy) const {
  const int kx = k % (Hdiv + 1), ky = k / (Hdiv + 1);
  const double dx = (x - kx * H) / H, dy = (y - ky * H) / H;
  const double tx = 1.0 - std::abs(dx), ty = 1.0 - std::abs(dy);
  if (tx <= 0.0 || ty <= 0.0) {
    gx = gy = 0.0;
    return;
  }
  gx = (dx > 0 ? -1.0 : 1.0) / H * ty;
  gy = (dy > 0 ? -1.0 : 1.0) / H * tx;
}

double CoarsePartition::pou_gradient_weight(double x, double y) const {
  // Only the four hats of the containing coarse cell are supported there;
  // with local coordinates (xi, eta) their squared gradients sum to
  // (2/H^2) ((1-xi)^2 + xi^2 + (1-eta)^2 + eta^2).
  double cxf = std::floor(x / H), cyf = std::floor(y / H);
  cxf = std::clamp(cxf, 0.0, static_cast<double>(Hdiv - 1));
  cyf = std::clamp(cyf, 0.0, static_cast<double>(Hdiv - 1));
  const double xi = x / H - cxf, eta = y / H - cyf;
  return 2.0 / (H * H) *
         ((1 - xi) * (1 - xi) + xi * xi + (1 - eta) * (1 - eta) + eta * eta);
}

CoarsePartition build_coarse_partition(const StructuredGrid& grid, int Hdiv) {
  if (Hdiv < 2) throw std::invalid_argument("coarse partition needs Hdiv >= 2");
  if (grid.n % Hdiv != 0)
    throw std::invalid_argument("Hdiv = " + std::to_string(Hdiv) + " does not divide n = " +
                                std::to_string(grid.n));
  CoarsePartition p;
  p.grid = grid;
  p.Hdiv = Hdiv;
  p.H = 1.0 / Hdiv;
  p.block_cells = grid.n / Hdiv;
  return p;
}

void OversampledRegion::interior_node_range(int& ix0, int& ix1, int& iy0, int& iy1) const {
  ix0 = nx0 + 1;
  ix1 = nx1 - 1;
  iy0 = ny0 + 1;
  iy1 = ny1 - 1;
}

std::vector<int> OversampledRegion::node_set(const StructuredGrid& grid) const {
  std::vector<int> nodes;
  nodes.reserve((nx1 - nx0 + 1) * (ny1 - ny0 + 1));
  for (int iy = ny0; iy <= ny1; ++iy)
    for (int ix = nx0; ix <= nx1; ++ix) nodes.push_back(grid.node_id(ix, iy));
  return nodes;
}

std::vector<int> OversampledRegion::interior_node_set(const StructuredGrid& grid) const {
  int ix0, ix1, iy0, iy1;
  interior_node_range(ix0, ix1, iy0, iy1);
  std::vector<int> nodes;
  nodes.reserve(std::max(0, (ix1 - ix0 + 1)) * std::max(0, (iy1 - iy0 + 1)));
  for (int iy = iy0; iy <= iy1; ++iy)
    for (int ix = ix0; ix <= ix1; ++ix) nodes.push_back(grid.node_id(ix, iy));
  return nodes;
}

OversampledRegion oversample(const CoarsePartition& partition, int j, int m) {
  if (m < 0 || m > partition.Hdiv)
    throw std::invalid_argument("oversampling layers must satisfy 0 <= m <= Hdiv");
  OversampledRegion r;
  r.block = j;
  r.layers = m;
  r.bx0 = std::max(0, partition.block_x(j) - m);
  r.bx1 = std::min(partition.Hdiv - 1, partition.block_x(j) + m);
  r.by0 = std::max(0, partition.block_y(j) - m);
  r.by1 = std::min(partition.Hdiv - 1, partition.block_y(j) + m);
  const int bs = partition.block_cells;
  r.nx0 = r.bx0 * bs;
  r.nx1 = (r.bx1 + 1) * bs;
  r.ny0 = r.by0 * bs;
  r.ny1 = (r.by1 + 1) * bs;
  for (int by = r.by0; by <= r.by1; ++by)
    for (int bx = r.bx0; bx <= r.bx1; ++bx) r.member_blocks.push_back(partition.block_id(bx, by));
  return r;
}

int default_layers(int Hdiv) {
  if (Hdiv < 2) throw std::invalid_argument("default_layers needs Hdiv >= 2");
  const double x = 10.0 * std::log(static_cast<double>(Hdiv)) / std::log(64.0);
  return static_cast<int>(std::floor(x + 0.5));
}

} // namespace cemrich
