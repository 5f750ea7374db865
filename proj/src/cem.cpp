#include "cemrich/cem.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>

#include "cemrich/parallel.hpp"

namespace cemrich {

SampleSet sample_source_steady(const State& reference) {
  SampleSet s;
  s.samples.push_back({reference, 1.0});
  return s;
}

SampleSet sample_source_transient(const std::vector<State>& trajectory) {
  if (trajectory.size() < 2)
    throw std::invalid_argument("trajectory source needs at least two time levels");
  SampleSet s;
  const size_t B = trajectory.size();
  for (size_t b = 0; b < B; ++b) {
    const double w = (b == 0 || b == B - 1) ? 0.5 : 1.0;
    s.samples.push_back({trajectory[b], w});
  }
  return s;
}

namespace {

std::vector<int> owned_nodes(const CoarsePartition& partition, int j) {
  const StructuredGrid& g = partition.grid;
  const int bs = partition.block_cells;
  const int bx = partition.block_x(j), by = partition.block_y(j);
  std::vector<int> nodes;
  for (int iy = 1; iy < g.n; ++iy) {
    if (iy / bs != by) continue;
    for (int ix = 1; ix < g.n; ++ix)
      if (ix / bs == bx) nodes.push_back(g.node_id(ix, iy));
  }
  return nodes;
}

SpMat symmetrized(const SpMat& A) {
  SpMat At = A.transpose();
  return 0.5 * (A + At);
}

// A-part (stiffness blocks + exchange) of the sampled form over one cell rect,
// indexed by map; not symmetrized.
SpMat sampled_energy_on(const StructuredGrid& grid, const ProblemSpec& spec,
                        const SampleSet& samples, const DofMap& map, const CellRect& cells) {
  const int N = spec.n_continua;
  const int loc = map.size();
  SpMat A(N * loc, N * loc);
  for (const auto& s : samples.samples) {
    std::vector<Eigen::Triplet<double>> trip;
    for (int i = 0; i < N; ++i) {
      SpMat Ai = assemble_stiffness(grid, map, cells, spec.fields[i], spec.nonlinearities[i],
                                    s.state.p[i]);
      for (int c = 0; c < Ai.outerSize(); ++c)
        for (SpMat::InnerIterator it(Ai, c); it; ++it)
          trip.emplace_back(i * loc + static_cast<int>(it.row()), i * loc + c,
                            s.weight * it.value());
    }
    SpMat term(N * loc, N * loc);
    term.setFromTriplets(trip.begin(), trip.end());
    if (!spec.transfer.all_zero())
      term += s.weight * assemble_coupling(grid, map, cells, spec.transfer, s.state);
    A += term;
  }
  return A;
}

SpMat sampled_aux_mass_on(const StructuredGrid& grid, const CoarsePartition& partition,
                          const ProblemSpec& spec, const SampleSet& samples, const DofMap& map,
                          const CellRect& cells) {
  const int N = spec.n_continua;
  const int loc = map.size();
  std::vector<Eigen::Triplet<double>> trip;
  for (const auto& s : samples.samples)
    for (int i = 0; i < N; ++i) {
      SpMat Ri = assemble_weighted_mass(grid, map, cells, partition, spec.fields[i],
                                        spec.nonlinearities[i], s.state.p[i]);
      for (int c = 0; c < Ri.outerSize(); ++c)
        for (SpMat::InnerIterator it(Ri, c); it; ++it)
          trip.emplace_back(i * loc + static_cast<int>(it.row()), i * loc + c,
                            s.weight * it.value());
    }
  SpMat R(N * loc, N * loc);
  R.setFromTriplets(trip.begin(), trip.end());
  return R;
}

} // namespace

BlockForms sampled_block_forms(const StructuredGrid& grid, const CoarsePartition& partition,
                               const ProblemSpec& spec, const SampleSet& samples, int j,
                               bool owned_nodes_only) {
  if (samples.size() == 0) throw std::invalid_argument("sampled forms need a nonempty sample set");
  BlockForms f;
  f.nodes = owned_nodes_only ? owned_nodes(partition, j) : partition.block_nodes_of(j, true);
  const DofMap map = DofMap::from_nodes(grid, f.nodes);
  const CellRect cells = CellRect::block(partition, j);
  f.A = symmetrized(sampled_energy_on(grid, spec, samples, map, cells));
  f.R = sampled_aux_mass_on(grid, partition, spec, samples, map, cells);
  return f;
}

SpMat sampled_global_energy(const StructuredGrid& grid, const ProblemSpec& spec,
                            const SampleSet& samples) {
  const DofMap map = DofMap::interior(grid);
  return symmetrized(sampled_energy_on(grid, spec, samples, map, CellRect::all(grid)));
}

int AuxiliarySpace::total_count() const {
  int t = 0;
  for (const auto& b : blocks) t += static_cast<int>(b.phi.cols());
  return t;
}

namespace {

AuxiliarySpace solve_auxiliary_impl(const StructuredGrid& grid, const CoarsePartition& partition,
                                    const ProblemSpec& spec, const SampleSet& samples, int L,
                                    bool full_local, int threads) {
  AuxiliarySpace aux;
  aux.n_continua = spec.n_continua;
  aux.Hdiv = partition.Hdiv;
  aux.full_local = full_local;
  aux.blocks.resize(partition.block_count());
  parallel_for(0, partition.block_count(), threads, [&](int j) {
    BlockForms f = sampled_block_forms(grid, partition, spec, samples, j, full_local);
    const int dim = static_cast<int>(f.A.rows());
    const int Lj = full_local ? dim : L;
    if (Lj > dim)
      throw std::invalid_argument("basis count " + std::to_string(Lj) +
                                  " exceeds local dimension " + std::to_string(dim) +
                                  " on block " + std::to_string(j));
    EigPairs pairs = generalized_symmetric_eig(f.A, f.R, Lj);
    auto& blk = aux.blocks[j];
    blk.nodes = std::move(f.nodes);
    blk.eigenvalues = std::move(pairs.values);
    blk.phi = std::move(pairs.vectors);
    blk.R = std::move(f.R);
  });
  return aux;
}

} // namespace

AuxiliarySpace solve_auxiliary(const StructuredGrid& grid, const CoarsePartition& partition,
                               const ProblemSpec& spec, const SampleSet& samples, int L,
                               int threads) {
  if (L < 1) throw std::invalid_argument("basis count must be >= 1");
  return solve_auxiliary_impl(grid, partition, spec, samples, L, false, threads);
}

AuxiliarySpace solve_auxiliary_full(const StructuredGrid& grid, const CoarsePartition& partition,
                                    const ProblemSpec& spec, const SampleSet& samples,
                                    int threads) {
  return solve_auxiliary_impl(grid, partition, spec, samples, 0, true, threads);
}

namespace {

struct LatticePoint {
  int x, y;
  bool valid;
};

inline LatticePoint to_lattice(const StructuredGrid& grid, int node) {
  const int ix = node % (grid.n + 1), iy = node / (grid.n + 1);
  if (ix < 1 || ix > grid.n - 1 || iy < 1 || iy > grid.n - 1) return {0, 0, false};
  return {ix - 1, iy - 1, true};
}

NodeRect region_interior_rect(const OversampledRegion& r) {
  // node range [nx0+1, nx1-1] in node coords -> lattice coords shift by 1
  NodeRect rect;
  rect.x0 = r.nx0; // (nx0 + 1) - 1
  rect.y0 = r.ny0;
  rect.nx = r.nx1 - r.nx0 - 1;
  rect.ny = r.ny1 - r.ny0 - 1;
  return rect;
}

std::vector<int> rect_dofs(const NodeRect& rect, int n, int n_continua) {
  const int ni = (n - 1) * (n - 1);
  std::vector<int> dofs;
  dofs.reserve(static_cast<size_t>(n_continua) * rect.ny * rect.nx);
  for (int c = 0; c < n_continua; ++c)
    for (int y = 0; y < rect.ny; ++y)
      for (int x = 0; x < rect.nx; ++x)
        dofs.push_back(c * ni + (rect.y0 + y) * (n - 1) + (rect.x0 + x));
  return dofs;
}

} // namespace

Vector MultiscaleSpace::prolong(const Vector& coeffs) const {
  const int ni = (n - 1) * (n - 1);
  Vector out = Vector::Zero(static_cast<Eigen::Index>(n_continua) * ni);
  for (size_t j = 0; j < blocks.size(); ++j) {
    const auto& b = blocks[j];
    const int Lj = static_cast<int>(b.psi.cols());
    Vector local = b.psi * coeffs.segment(col_offset[j], Lj);
    int r = 0;
    for (int c = 0; c < n_continua; ++c)
      for (int y = 0; y < b.rect.ny; ++y) {
        const int base = c * ni + (b.rect.y0 + y) * (n - 1) + b.rect.x0;
        for (int x = 0; x < b.rect.nx; ++x) out[base + x] += local[r++];
      }
  }
  return out;
}

Vector MultiscaleSpace::restrict_transpose(const Vector& v) const {
  const int ni = (n - 1) * (n - 1);
  Vector out(dim());
  for (size_t j = 0; j < blocks.size(); ++j) {
    const auto& b = blocks[j];
    Vector local(b.psi.rows());
    int r = 0;
    for (int c = 0; c < n_continua; ++c)
      for (int y = 0; y < b.rect.ny; ++y) {
        const int base = c * ni + (b.rect.y0 + y) * (n - 1) + b.rect.x0;
        for (int x = 0; x < b.rect.nx; ++x) local[r++] = v[base + x];
      }
    out.segment(col_offset[j], b.psi.cols()).noalias() = b.psi.transpose() * local;
  }
  return out;
}

SpMat MultiscaleSpace::to_sparse() const {
  const int ni = (n - 1) * (n - 1);
  std::vector<Eigen::Triplet<double>> trip;
  for (size_t j = 0; j < blocks.size(); ++j) {
    const auto& b = blocks[j];
    for (int k = 0; k < b.psi.cols(); ++k) {
      int r = 0;
      for (int c = 0; c < n_continua; ++c)
        for (int y = 0; y < b.rect.ny; ++y)
          for (int x = 0; x < b.rect.nx; ++x, ++r)
            trip.emplace_back(c * ni + (b.rect.y0 + y) * (n - 1) + b.rect.x0 + x,
                              col_offset[j] + k, b.psi(r, k));
    }
  }
  SpMat G(static_cast<Eigen::Index>(n_continua) * ni, dim());
  G.setFromTriplets(trip.begin(), trip.end());
  return G;
}

Matrix MultiscaleSpace::reduce(const SpMat& A, bool symmetric, int threads) const {
  const int nb = static_cast<int>(blocks.size());
  const int ni = (n - 1) * (n - 1);
  const int lat = n - 1;

  // W_j = A * G_j on the basis rectangle grown by one lattice ring
  std::vector<NodeRect> wrect(nb);
  std::vector<Matrix> W(nb);
  parallel_for(0, nb, threads, [&](int j) {
    const auto& b = blocks[j];
    NodeRect w;
    w.x0 = std::max(0, b.rect.x0 - 1);
    w.y0 = std::max(0, b.rect.y0 - 1);
    w.nx = std::min(lat, b.rect.x0 + b.rect.nx + 1) - w.x0;
    w.ny = std::min(lat, b.rect.y0 + b.rect.ny + 1) - w.y0;
    wrect[j] = w;
    const int Lj = static_cast<int>(b.psi.cols());
    Matrix Wj = Matrix::Zero(static_cast<Eigen::Index>(n_continua) * w.ny * w.nx, Lj);
    int r = 0;
    for (int c = 0; c < n_continua; ++c)
      for (int y = 0; y < b.rect.ny; ++y)
        for (int x = 0; x < b.rect.nx; ++x, ++r) {
          const int dof = c * ni + (b.rect.y0 + y) * lat + (b.rect.x0 + x);
          for (SpMat::InnerIterator it(A, dof); it; ++it) {
            const int rd = static_cast<int>(it.row());
            const int rc = rd / ni;
            const int rx = (rd % ni) % lat, ry = (rd % ni) / lat;
            const int wr = (rc * w.ny + (ry - w.y0)) * w.nx + (rx - w.x0);
            for (int k = 0; k < Lj; ++k) Wj(wr, k) += it.value() * b.psi(r, k);
          }
        }
    W[j] = std::move(Wj);
  });

  Matrix S = Matrix::Zero(dim(), dim());
  // interleaved rows for load balance; blocks are written disjointly
  std::vector<std::thread> pool;
  const int nthreads = std::clamp(threads, 1, nb);
  auto row_task = [&](int jp0) {
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic> acc;
    for (int jp = jp0; jp < nb; jp += nthreads) {
      const auto& bp = blocks[jp];
      const int Lp = static_cast<int>(bp.psi.cols());
      const int prows = static_cast<int>(bp.psi.rows());
      for (int j = symmetric ? jp : 0; j < nb; ++j) {
        const NodeRect& wr = wrect[j];
        const int xlo = std::max(bp.rect.x0, wr.x0);
        const int xhi = std::min(bp.rect.x0 + bp.rect.nx, wr.x0 + wr.nx) - 1;
        const int ylo = std::max(bp.rect.y0, wr.y0);
        const int yhi = std::min(bp.rect.y0 + bp.rect.ny, wr.y0 + wr.ny) - 1;
        if (xlo > xhi || ylo > yhi) continue;
        const int len = xhi - xlo + 1;
        const int Lj = static_cast<int>(blocks[j].psi.cols());
        const int wrows = static_cast<int>(W[j].rows());
        acc.setZero(Lp, Lj);
        const double* P = bp.psi.data();
        const double* Q = W[j].data();
        for (int c = 0; c < n_continua; ++c)
          for (int y = ylo; y <= yhi; ++y) {
            const int pbase = (c * bp.rect.ny + (y - bp.rect.y0)) * bp.rect.nx + (xlo - bp.rect.x0);
            const int wbase = (c * wr.ny + (y - wr.y0)) * wr.nx + (xlo - wr.x0);
            for (int kp = 0; kp < Lp; ++kp) {
              const double* a = P + pbase + static_cast<std::ptrdiff_t>(kp) * prows;
              for (int k = 0; k < Lj; ++k) {
                const double* bq = Q + wbase + static_cast<std::ptrdiff_t>(k) * wrows;
                double s = 0.0;
                for (int x = 0; x < len; ++x) s += a[x] * bq[x];
                acc(kp, k) += s;
              }
            }
          }
        S.block(col_offset[jp], col_offset[j], Lp, Lj) = acc;
        if (symmetric && j != jp)
          S.block(col_offset[j], col_offset[jp], Lj, Lp) = acc.transpose();
      }
    }
  };
  if (nthreads == 1) {
    row_task(0);
  } else {
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(row_task, t);
    for (auto& th : pool) th.join();
  }
  return S;
}

MultiscaleSpace build_basis(const StructuredGrid& grid, const CoarsePartition& partition,
                            const AuxiliarySpace& aux, int m, const ProblemSpec& spec,
                            const SampleSet& samples, int threads) {
  if (m < 1) throw std::invalid_argument("basis construction needs m >= 1");
  const int N = spec.n_continua;
  const int nb = partition.block_count();
  const int lat = grid.n - 1;
  const int ni = lat * lat;

  MultiscaleSpace space;
  space.n = grid.n;
  space.n_continua = N;
  space.Hdiv = partition.Hdiv;
  space.m = m;
  space.L = aux.full_local ? 0 : aux.count(0);
  space.blocks.resize(nb);
  space.col_offset.assign(nb + 1, 0);
  for (int j = 0; j < nb; ++j) space.col_offset[j + 1] = space.col_offset[j] + aux.count(j);

  const SpMat A_glob = sampled_global_energy(grid, spec, samples);

  // regions sharing a rectangle share the entire KKT system; only the
  // right-hand side differs per (block, eigenfunction)
  std::map<std::array<int, 4>, std::vector<int>> groups;
  std::vector<OversampledRegion> regions(nb);
  for (int j = 0; j < nb; ++j) {
    regions[j] = oversample(partition, j, std::min(m, partition.Hdiv));
    groups[{regions[j].bx0, regions[j].bx1, regions[j].by0, regions[j].by1}].push_back(j);
  }
  std::vector<const std::vector<int>*> group_list;
  for (const auto& [rect, members] : groups) group_list.push_back(&members);

  parallel_for(0, static_cast<int>(group_list.size()), threads, [&](int gi) {
    const std::vector<int>& members = *group_list[gi];
    const OversampledRegion& reg = regions[members.front()];
    const NodeRect rect = region_interior_rect(reg);
    const std::vector<int> dofs = rect_dofs(rect, grid.n, N);
    const SpMat A_r = restrict_sparse(A_glob, dofs, dofs);

    // constraint rows: R^(z)-moments against every auxiliary function of the region
    std::vector<int> dof_local(static_cast<size_t>(N) * ni, -1);
    for (size_t k = 0; k < dofs.size(); ++k) dof_local[dofs[k]] = static_cast<int>(k);
    std::vector<Eigen::Triplet<double>> ctrip;
    std::vector<std::pair<int, int>> row_key; // (block z, eigenfunction k')
    for (int z : reg.member_blocks) {
      const auto& blk = aux.blocks[z];
      const int nl = static_cast<int>(blk.nodes.size());
      const Matrix RPhi = blk.R * blk.phi;
      for (int kp = 0; kp < blk.phi.cols(); ++kp) {
        const int row = static_cast<int>(row_key.size());
        row_key.emplace_back(z, kp);
        for (int c = 0; c < N; ++c)
          for (int t = 0; t < nl; ++t) {
            const LatticePoint lp = to_lattice(grid, blk.nodes[t]);
            if (!lp.valid) continue;
            const int dl = dof_local[c * ni + lp.y * lat + lp.x];
            if (dl < 0) continue; // node on the region boundary: test functions vanish there
            const double v = RPhi(c * nl + t, kp);
            if (v != 0.0) ctrip.emplace_back(row, dl, v);
          }
      }
    }
    SpMat C(static_cast<int>(row_key.size()), static_cast<int>(dofs.size()));
    C.setFromTriplets(ctrip.begin(), ctrip.end());

    SaddleSolver kkt(A_r, C);
    for (int j : members) {
      const int Lj = aux.count(j);
      auto& out = space.blocks[j];
      out.rect = rect;
      out.psi.resize(dofs.size(), Lj);
      for (int k = 0; k < Lj; ++k) {
        Vector g = Vector::Zero(C.rows());
        for (size_t r = 0; r < row_key.size(); ++r)
          if (row_key[r].first == j && row_key[r].second == k) g[r] = 1.0;
        out.psi.col(k) = kkt.solve(g).x;
      }
    }
  });
  return space;
}

std::vector<double> decay_profile(const StructuredGrid& grid, const CoarsePartition& partition,
                                  const AuxiliarySpace& aux, const ProblemSpec& spec,
                                  const SampleSet& samples, int j, int k, int threads) {
  // globally-supported reference column
  AuxiliarySpace one = aux; // shared blocks; cheap enough at diagnostic scale
  MultiscaleSpace global = build_basis(grid, partition, one, partition.Hdiv, spec, samples, threads);
  const int col = global.column_of(j, k);
  Vector coeffs = Vector::Zero(global.dim());
  coeffs[col] = 1.0;
  const Vector psi = global.prolong(coeffs);

  // per-cell energies of the sampled form, accumulated by quadrature
  const int N = spec.n_continua;
  State s = unstack_interior(grid, psi, N);
  std::vector<double> cell_energy(grid.cell_count(), 0.0);
  for (int cy = 0; cy < grid.n; ++cy)
    for (int cx = 0; cx < grid.n; ++cx) {
      const int nd[4] = {grid.node_id(cx, cy), grid.node_id(cx + 1, cy),
                         grid.node_id(cx, cy + 1), grid.node_id(cx + 1, cy + 1)};
      double e = 0.0;
      for (const auto& smp : samples.samples) {
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) {
            static const double gp[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
            const double xi = gp[a], eta = gp[b];
            const double w = 0.25 * grid.h * grid.h;
            const double Nv[4] = {(1 - xi) * (1 - eta), xi * (1 - eta), (1 - xi) * eta, xi * eta};
            const double Gx[4] = {-(1 - eta) / grid.h, (1 - eta) / grid.h, -eta / grid.h,
                                  eta / grid.h};
            const double Gy[4] = {-(1 - xi) / grid.h, -xi / grid.h, (1 - xi) / grid.h,
                                  xi / grid.h};
            for (int i = 0; i < N; ++i) {
              double uq = 0.0, px = 0.0, py = 0.0, pv = 0.0;
              for (int t = 0; t < 4; ++t) {
                uq += Nv[t] * smp.state.p[i][nd[t]];
                px += Gx[t] * s.p[i][nd[t]];
                py += Gy[t] * s.p[i][nd[t]];
                pv += Nv[t] * s.p[i][nd[t]];
              }
              const double c = eval_conductivity(spec.nonlinearities[i],
                                                 spec.fields[i].at(grid.cell_id(cx, cy)), uq);
              e += smp.weight * w * c * (px * px + py * py);
              for (int l = 0; l < N; ++l) {
                if (l == i || spec.transfer.at(i, l).tag == TransferTag::Zero) continue;
                double ul = 0.0, plv = 0.0;
                for (int t = 0; t < 4; ++t) {
                  ul += Nv[t] * smp.state.p[l][nd[t]];
                  plv += Nv[t] * s.p[l][nd[t]];
                }
                const double q = eval_transfer(spec.transfer.at(i, l), uq, ul);
                e += smp.weight * w * q * (pv - plv) * pv;
              }
            }
          }
      }
      cell_energy[grid.cell_id(cx, cy)] = e;
    }

  double total = 0.0;
  for (double e : cell_energy) total += e;
  std::vector<double> fractions(partition.Hdiv + 1, 0.0);
  for (int layer = 0; layer <= partition.Hdiv; ++layer) {
    const OversampledRegion r = oversample(partition, j, layer);
    const int bs = partition.block_cells;
    double outside = 0.0;
    for (int cy = 0; cy < grid.n; ++cy)
      for (int cx = 0; cx < grid.n; ++cx) {
        const int bx = cx / bs, by = cy / bs;
        if (!r.contains_block(bx, by)) outside += cell_energy[grid.cell_id(cx, cy)];
      }
    fractions[layer] = total > 0.0 ? outside / total : 0.0;
  }
  return fractions;
}

Vector project_initial(const State& fine_state, const MultiscaleSpace& space,
                       const StructuredGrid& grid, const ProblemSpec& spec, int threads) {
  const Vector p0 = stack_interior(grid, fine_state);
  if (p0.lpNorm<Eigen::Infinity>() == 0.0) return Vector::Zero(space.dim());

  const int N = spec.n_continua;
  const DofMap interior = DofMap::interior(grid);
  const int ni = interior.size();
  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 0; i < N; ++i) {
    SpMat Ai = assemble_stiffness(grid, interior, CellRect::all(grid), spec.fields[i],
                                  spec.nonlinearities[i], fine_state.p[i]);
    for (int c = 0; c < Ai.outerSize(); ++c)
      for (SpMat::InnerIterator it(Ai, c); it; ++it)
        trip.emplace_back(i * ni + static_cast<int>(it.row()), i * ni + c, it.value());
  }
  SpMat A(static_cast<Eigen::Index>(N) * ni, static_cast<Eigen::Index>(N) * ni);
  A.setFromTriplets(trip.begin(), trip.end());
  if (!spec.transfer.all_zero())
    A += assemble_coupling(grid, interior, CellRect::all(grid), spec.transfer, fine_state);

  const Matrix S = space.reduce(A, false, threads);
  const Vector rhs = space.restrict_transpose(A * p0);
  return DenseSolver(S, false).solve(rhs);
}

namespace {

uint64_t fnv1a(const void* data, size_t len, uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

} // namespace

std::string content_hash(const std::string& config_text,
                         const std::vector<std::string>& raster_paths) {
  uint64_t h = 14695981039346656037ull;
  h = fnv1a(config_text.data(), config_text.size(), h);
  for (const auto& path : raster_paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("content_hash: cannot open " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    h = fnv1a(bytes.data(), bytes.size(), h);
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void save_basis(const MultiscaleSpace& space, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write basis cache: " + path);
  out << "cemrich-basis 1 " << space.n << ' ' << space.n_continua << ' ' << space.Hdiv << ' '
      << space.m << ' ' << space.L << ' ' << space.blocks.size() << '\n';
  for (const auto& b : space.blocks) {
    out << b.rect.x0 << ' ' << b.rect.y0 << ' ' << b.rect.nx << ' ' << b.rect.ny << ' '
        << b.psi.cols() << '\n';
    out.write(reinterpret_cast<const char*>(b.psi.data()),
              static_cast<std::streamsize>(sizeof(double)) * b.psi.size());
    out << '\n';
  }
}

std::optional<MultiscaleSpace> load_basis(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::string magic;
  int version = 0;
  size_t nblocks = 0;
  MultiscaleSpace space;
  in >> magic >> version >> space.n >> space.n_continua >> space.Hdiv >> space.m >> space.L >>
      nblocks;
  if (magic != "cemrich-basis" || version != 1 || !in) return std::nullopt;
  in.get(); // newline
  space.blocks.resize(nblocks);
  space.col_offset.assign(nblocks + 1, 0);
  for (size_t j = 0; j < nblocks; ++j) {
    auto& b = space.blocks[j];
    Eigen::Index cols = 0;
    in >> b.rect.x0 >> b.rect.y0 >> b.rect.nx >> b.rect.ny >> cols;
    if (!in) return std::nullopt;
    in.get();
    b.psi.resize(static_cast<Eigen::Index>(space.n_continua) * b.rect.ny * b.rect.nx, cols);
    in.read(reinterpret_cast<char*>(b.psi.data()),
            static_cast<std::streamsize>(sizeof(double)) * b.psi.size());
    if (!in) return std::nullopt;
    in.get();
    space.col_offset[j + 1] = space.col_offset[j] + static_cast<int>(cols);
  }
  return space;
}

} // namespace cemrich
