#include "cemrich/assembly.hpp"

#include <array>
#include <cmath>

namespace cemrich {

State State::zero(const StructuredGrid& grid, int n_continua) {
  State s;
  s.p.assign(n_continua, Vector::Zero(grid.node_count()));
  return s;
}

DofMap DofMap::interior(const StructuredGrid& grid) {
  DofMap m;
  m.map_.assign(grid.node_count(), -1);
  m.nodes_.reserve(grid.interior_count());
  for (int node = 0; node < grid.node_count(); ++node) {
    const int k = grid.interior_index(node);
    if (k >= 0) {
      m.map_[node] = k;
      m.nodes_.push_back(node);
    }
  }
  m.size_ = grid.interior_count();
  return m;
}

DofMap DofMap::all_nodes(const StructuredGrid& grid) {
  DofMap m;
  m.map_.resize(grid.node_count());
  m.nodes_.resize(grid.node_count());
  for (int node = 0; node < grid.node_count(); ++node) {
    m.map_[node] = node;
    m.nodes_[node] = node;
  }
  m.size_ = grid.node_count();
  return m;
}

DofMap DofMap::from_nodes(const StructuredGrid& grid, const std::vector<int>& nodes) {
  DofMap m;
  m.map_.assign(grid.node_count(), -1);
  m.nodes_ = nodes;
  for (size_t k = 0; k < nodes.size(); ++k) m.map_[nodes[k]] = static_cast<int>(k);
  m.size_ = static_cast<int>(nodes.size());
  return m;
}

CellRect CellRect::block(const CoarsePartition& partition, int j) {
  CellRect r;
  partition.block_cell_range(j, r.cx0, r.cx1, r.cy0, r.cy1);
  return r;
}

CellRect CellRect::region(const OversampledRegion& reg, const CoarsePartition& partition) {
  const int bs = partition.block_cells;
  return {reg.bx0 * bs, (reg.bx1 + 1) * bs - 1, reg.by0 * bs, (reg.by1 + 1) * bs - 1};
}

namespace {

struct Quadrature {
  int count;
  std::array<double, 3> points;  // on [0,1]
  std::array<double, 3> weights; // sum to 1
};

Quadrature gauss(int order) {
  if (order == 2) {
    const double d = 0.5 / std::sqrt(3.0);
    return {2, {0.5 - d, 0.5 + d, 0.0}, {0.5, 0.5, 0.0}};
  }
  if (order == 3) {
    const double d = 0.5 * std::sqrt(3.0 / 5.0);
    return {3, {0.5 - d, 0.5, 0.5 + d}, {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0}};
  }
  throw std::invalid_argument("quadrature order must be 2 or 3");
}

inline void shape_values(double xi, double eta, double N[4]) {
  N[0] = (1 - xi) * (1 - eta);
  N[1] = xi * (1 - eta);
  N[2] = (1 - xi) * eta;
  N[3] = xi * eta;
}

// gradients on an h x h cell, tensor local ordering (00,10,01,11)
inline void shape_gradients(double xi, double eta, double h, double Gx[4], double Gy[4]) {
  Gx[0] = -(1 - eta) / h; Gy[0] = -(1 - xi) / h;
  Gx[1] = (1 - eta) / h;  Gy[1] = -xi / h;
  Gx[2] = -eta / h;       Gy[2] = (1 - xi) / h;
  Gx[3] = eta / h;        Gy[3] = xi / h;
}

inline void cell_nodes(const StructuredGrid& grid, int cx, int cy, int nd[4]) {
  nd[0] = grid.node_id(cx, cy);
  nd[1] = grid.node_id(cx + 1, cy);
  nd[2] = grid.node_id(cx, cy + 1);
  nd[3] = grid.node_id(cx + 1, cy + 1);
}

using Triplets = std::vector<Eigen::Triplet<double>>;

void scatter(const DofMap& map, const int nd[4], const double ke[4][4], int row_offset,
             int col_offset, Triplets& out) {
  for (int a = 0; a < 4; ++a) {
    const int ra = map.local(nd[a]);
    if (ra < 0) continue;
    for (int b = 0; b < 4; ++b) {
      const int cb = map.local(nd[b]);
      if (cb < 0) continue;
      out.emplace_back(row_offset + ra, col_offset + cb, ke[a][b]);
    }
  }
}

size_t rect_cells(const CellRect& r) {
  return static_cast<size_t>(std::max(0, r.cx1 - r.cx0 + 1)) * std::max(0, r.cy1 - r.cy0 + 1);
}

} // namespace

SpMat assemble_stiffness(const StructuredGrid& grid, const DofMap& map, const CellRect& cells,
                         const CoefficientField& field, const Nonlinearity& nl,
                         const Vector& u_full, int quad) {
  const Quadrature q = gauss(quad);
  const double h = grid.h;
  Triplets trip;
  trip.reserve(rect_cells(cells) * 16);
  for (int cy = cells.cy0; cy <= cells.cy1; ++cy)
    for (int cx = cells.cx0; cx <= cells.cx1; ++cx) {
      int nd[4];
      cell_nodes(grid, cx, cy, nd);
      const double kappa = field.at(grid.cell_id(cx, cy));
      double ke[4][4] = {};
      for (int a = 0; a < q.count; ++a)
        for (int b = 0; b < q.count; ++b) {
          const double xi = q.points[a], eta = q.points[b];
          const double w = q.weights[a] * q.weights[b] * h * h;
          double N[4], Gx[4], Gy[4];
          shape_values(xi, eta, N);
          shape_gradients(xi, eta, h, Gx, Gy);
          double uq = 0.0;
          for (int s = 0; s < 4; ++s) uq += N[s] * u_full[nd[s]];
          const double c = eval_conductivity(nl, kappa, uq);
          if (!std::isfinite(c))
            throw std::runtime_error("non-finite conductivity in stiffness assembly");
          for (int s = 0; s < 4; ++s)
            for (int t = 0; t < 4; ++t) ke[s][t] += w * c * (Gx[s] * Gx[t] + Gy[s] * Gy[t]);
        }
      scatter(map, nd, ke, 0, 0, trip);
    }
  SpMat A(map.size(), map.size());
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

SpMat assemble_mass(const StructuredGrid& grid, const DofMap& map, const CellRect& cells,
                    int quad) {
  const Quadrature q = gauss(quad);
  const double h = grid.h;
  Triplets trip;
  trip.reserve(rect_cells(cells) * 16);
  double ke[4][4] = {};
  for (int a = 0; a < q.count; ++a)
    for (int b = 0; b < q.count; ++b) {
      const double w = q.weights[a] * q.weights[b] * h * h;
      double N[4];
      shape_values(q.points[a], q.points[b], N);
      for (int s = 0; s < 4; ++s)
        for (int t = 0; t < 4; ++t) ke[s][t] += w * N[s] * N[t];
    }
  for (int cy = cells.cy0; cy <= cells.cy1; ++cy)
    for (int cx = cells.cx0; cx <= cells.cx1; ++cx) {
      int nd[4];
      cell_nodes(grid, cx, cy, nd);
      scatter(map, nd, ke, 0, 0, trip);
    }
  SpMat M(map.size(), map.size());
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

SpMat assemble_weighted_mass(const StructuredGrid& grid, const DofMap& map, const CellRect& cells,
                             const CoarsePartition& partition, const CoefficientField& field,
                             const Nonlinearity& nl, const Vector& u_full, int quad) {
  const Quadrature q = gauss(quad);
  const double h = grid.h;
  Triplets trip;
  trip.reserve(rect_cells(cells) * 16);
  for (int cy = cells.cy0; cy <= cells.cy1; ++cy)
    for (int cx = cells.cx0; cx <= cells.cx1; ++cx) {
      int nd[4];
      cell_nodes(grid, cx, cy, nd);
      const double kappa = field.at(grid.cell_id(cx, cy));
      double ke[4][4] = {};
      for (int a = 0; a < q.count; ++a)
        for (int b = 0; b < q.count; ++b) {
          const double xi = q.points[a], eta = q.points[b];
          const double w = q.weights[a] * q.weights[b] * h * h;
          const double x = (cx + xi) * h, y = (cy + eta) * h;
          double N[4];
          shape_values(xi, eta, N);
          double uq = 0.0;
          for (int s = 0; s < 4; ++s) uq += N[s] * u_full[nd[s]];
          const double c =
              eval_conductivity(nl, kappa, uq) * partition.pou_gradient_weight(x, y);
          for (int s = 0; s < 4; ++s)
            for (int t = 0; t < 4; ++t) ke[s][t] += w * c * N[s] * N[t];
        }
      scatter(map, nd, ke, 0, 0, trip);
    }
  SpMat R(map.size(), map.size());
  R.setFromTriplets(trip.begin(), trip.end());
  return R;
}

Vector assemble_load(const StructuredGrid& grid, const DofMap& map, const SourceFn& f, double t,
                     int quad) {
  const Quadrature q = gauss(quad);
  const double h = grid.h;
  Vector b = Vector::Zero(map.size());
  for (int cy = 0; cy < grid.n; ++cy)
    for (int cx = 0; cx < grid.n; ++cx) {
      int nd[4];
      cell_nodes(grid, cx, cy, nd);
      double fe[4] = {};
      for (int a = 0; a < q.count; ++a)
        for (int b2 = 0; b2 < q.count; ++b2) {
          const double xi = q.points[a], eta = q.points[b2];
          const double w = q.weights[a] * q.weights[b2] * h * h;
          const double x = (cx + xi) * h, y = (cy + eta) * h;
          double N[4];
          shape_values(xi, eta, N);
          const double fv = f(t, x, y);
          for (int s = 0; s < 4; ++s) fe[s] += w * fv * N[s];
        }
      for (int s = 0; s < 4; ++s) {
        const int r = map.local(nd[s]);
        if (r >= 0) b[r] += fe[s];
      }
    }
  return b;
}

SpMat assemble_coupling(const StructuredGrid& grid, const DofMap& map, const CellRect& cells,
                        const TransferTable& transfer, const State& u, int quad) {
  const int N = transfer.n_continua;
  const int loc = map.size();
  const Quadrature q = gauss(quad);
  const double h = grid.h;
  Triplets trip;
  for (int i = 0; i < N; ++i)
    for (int l = 0; l < N; ++l) {
      if (l == i) continue;
      const TransferLaw& law = transfer.at(i, l);
      if (law.tag == TransferTag::Zero) continue;
      for (int cy = cells.cy0; cy <= cells.cy1; ++cy)
        for (int cx = cells.cx0; cx <= cells.cx1; ++cx) {
          int nd[4];
          cell_nodes(grid, cx, cy, nd);
          double ke[4][4] = {};
          for (int a = 0; a < q.count; ++a)
            for (int b = 0; b < q.count; ++b) {
              const double xi = q.points[a], eta = q.points[b];
              const double w = q.weights[a] * q.weights[b] * h * h;
              double Nv[4];
              shape_values(xi, eta, Nv);
              double ui = 0.0, ul = 0.0;
              for (int s = 0; s < 4; ++s) {
                ui += Nv[s] * u.p[i][nd[s]];
                ul += Nv[s] * u.p[l][nd[s]];
              }
              const double c = eval_transfer(law, ui, ul);
              for (int s = 0; s < 4; ++s)
                for (int t = 0; t < 4; ++t) ke[s][t] += w * c * Nv[s] * Nv[t];
            }
          scatter(map, nd, ke, i * loc, i * loc, trip);
          double ke_neg[4][4];
          for (int s = 0; s < 4; ++s)
            for (int t = 0; t < 4; ++t) ke_neg[s][t] = -ke[s][t];
          scatter(map, nd, ke_neg, i * loc, l * loc, trip);
        }
    }
  SpMat Q(N * loc, N * loc);
  Q.setFromTriplets(trip.begin(), trip.end());
  return Q;
}

SpMat restrict_sparse(const SpMat& op, const std::vector<int>& rows,
                      const std::vector<int>& cols) {
  if (rows.empty() || cols.empty()) throw std::invalid_argument("restriction to empty node set");
  std::vector<int> rmap(op.rows(), -1), cmap(op.cols(), -1);
  for (size_t k = 0; k < rows.size(); ++k) rmap[rows[k]] = static_cast<int>(k);
  for (size_t k = 0; k < cols.size(); ++k) cmap[cols[k]] = static_cast<int>(k);
  Triplets trip;
  for (int c = 0; c < op.outerSize(); ++c) {
    const int cc = cmap[c];
    if (cc < 0) continue;
    for (SpMat::InnerIterator it(op, c); it; ++it) {
      const int rr = rmap[it.row()];
      if (rr >= 0) trip.emplace_back(rr, cc, it.value());
    }
  }
  SpMat out(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

Vector restrict_vector(const Vector& v, const std::vector<int>& idx) {
  Vector out(idx.size());
  for (size_t k = 0; k < idx.size(); ++k) out[k] = v[idx[k]];
  return out;
}

Vector stack_interior(const StructuredGrid& grid, const State& s) {
  const int ni = grid.interior_count();
  Vector out(static_cast<Eigen::Index>(s.n_continua()) * ni);
  for (int c = 0; c < s.n_continua(); ++c)
    for (int k = 0; k < ni; ++k) out[c * ni + k] = s.p[c][grid.interior_node(k)];
  return out;
}

State unstack_interior(const StructuredGrid& grid, const Vector& dofs, int n_continua,
                       double time) {
  const int ni = grid.interior_count();
  State s = State::zero(grid, n_continua);
  s.time = time;
  for (int c = 0; c < n_continua; ++c)
    for (int k = 0; k < ni; ++k) s.p[c][grid.interior_node(k)] = dofs[c * ni + k];
  return s;
}

} // namespace cemrich
