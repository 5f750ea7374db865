#include "cemrich/stepping.hpp"

#include <cmath>

namespace cemrich {

namespace {

struct WorkSpace {
  DofMap interior;
  SpMat mass; ///< per-continuum interior mass
  explicit WorkSpace(const StructuredGrid& grid)
      : interior(DofMap::interior(grid)),
        mass(assemble_mass(grid, interior, CellRect::all(grid))) {}
};

double l2_norm(const SpMat& M, const Vector& v) { return std::sqrt(v.dot(M * v)); }

// Linearized operator and right-hand side at coefficient state u.
void assemble_system(const StructuredGrid& grid, const ProblemSpec& spec, const WorkSpace& ws,
                     const State& u, double tau, const State& p_prev, double t, SpMat& A,
                     Vector& b, bool& symmetric) {
  const int N = spec.n_continua;
  const int ni = ws.interior.size();
  std::vector<Eigen::Triplet<double>> trip;
  b.resize(static_cast<Eigen::Index>(N) * ni);
  for (int i = 0; i < N; ++i) {
    SpMat Ai = assemble_stiffness(grid, ws.interior, CellRect::all(grid), spec.fields[i],
                                  spec.nonlinearities[i], u.p[i]);
    if (tau > 0.0) Ai += (1.0 / tau) * ws.mass;
    for (int c = 0; c < Ai.outerSize(); ++c)
      for (SpMat::InnerIterator it(Ai, c); it; ++it)
        trip.emplace_back(i * ni + static_cast<int>(it.row()), i * ni + c, it.value());
    Vector bi = assemble_load(grid, ws.interior, spec.sources[i], t);
    if (tau > 0.0) {
      Vector prev(ni);
      for (int k = 0; k < ni; ++k) prev[k] = p_prev.p[i][grid.interior_node(k)];
      bi += (1.0 / tau) * (ws.mass * prev);
    }
    b.segment(static_cast<Eigen::Index>(i) * ni, ni) = bi;
  }
  A.resize(static_cast<Eigen::Index>(N) * ni, static_cast<Eigen::Index>(N) * ni);
  A.setFromTriplets(trip.begin(), trip.end());
  if (!spec.transfer.all_zero())
    A += assemble_coupling(grid, ws.interior, CellRect::all(grid), spec.transfer, u);
  symmetric = (N == 1) || spec.transfer.symmetric();
}

} // namespace

std::pair<State, PicardReport> picard_step(const StructuredGrid& grid, const ProblemSpec& spec,
                                           const SpaceHandle& space, const State& p_prev,
                                           const State& guess, double tau, double t,
                                           const PicardOptions& opts) {
  if (opts.delta0 <= 0.0) throw std::invalid_argument("picard tolerance must be positive");
  if (opts.max_iter < 1) throw std::invalid_argument("picard needs max_iter >= 1");
  const int N = spec.n_continua;
  const WorkSpace ws(grid);
  const int ni = ws.interior.size();

  PicardReport report;
  State u = guess;
  std::vector<Vector> history; // stacked interior iterates, incl. the guess
  history.push_back(stack_interior(grid, u));

  SpMat A;
  Vector b;
  bool symmetric = false;
  for (int it = 0; it < opts.max_iter; ++it) {
    assemble_system(grid, spec, ws, u, tau, p_prev, t, A, b, symmetric);
    Vector x;
    if (space.is_fine()) {
      x = SparseSolver(A).solve(b);
    } else {
      const MultiscaleSpace& ms = *space.space();
      Matrix S = ms.reduce(A, symmetric, opts.threads);
      Vector r = ms.restrict_transpose(b);
      x = ms.prolong(DenseSolver(std::move(S), symmetric).solve(r));
    }
    State next = unstack_interior(grid, x, N, t);
    report.iterations = it + 1;

    std::vector<double> diffs(N);
    bool done = true;
    for (int i = 0; i < N; ++i) {
      Vector du(ni), uo(ni);
      for (int k = 0; k < ni; ++k) {
        const int node = grid.interior_node(k);
        du[k] = next.p[i][node] - u.p[i][node];
        uo[k] = u.p[i][node];
      }
      const double dn = l2_norm(ws.mass, du);
      const double un = l2_norm(ws.mass, uo);
      // zero previous iterate: fall back to the absolute difference
      diffs[i] = un > 0.0 ? dn / un : dn;
      if (!(diffs[i] <= opts.delta0)) done = false;
    }
    report.rel_diffs.push_back(diffs);
    u = std::move(next);
    history.push_back(stack_interior(grid, u));
    if (done) {
      report.converged = true;
      break;
    }
  }

  // distances to the last iterate (proxy for the fixed point)
  const Vector& last = history.back();
  const int nall = static_cast<int>(history.size());
  report.dist_to_final.resize(nall);
  for (int k = 0; k < nall; ++k) {
    double acc = 0.0;
    for (int i = 0; i < N; ++i) {
      Vector d = (history[k] - last).segment(static_cast<Eigen::Index>(i) * ni, ni);
      acc += d.dot(ws.mass * d);
    }
    report.dist_to_final[k] = std::sqrt(acc);
  }
  if (nall >= 3) report.lambda_hat = contraction_estimate(report);
  return {std::move(u), std::move(report)};
}

std::pair<State, PicardReport> steady_solve(const StructuredGrid& grid, const ProblemSpec& spec,
                                            const SpaceHandle& space, const State& guess,
                                            const PicardOptions& opts) {
  if (spec.transient) throw std::invalid_argument("steady_solve expects a steady problem");
  return picard_step(grid, spec, space, guess, guess, 0.0, 0.0, opts);
}

Trajectory march(const StructuredGrid& grid, const ProblemSpec& spec, const SpaceHandle& space,
                 const State& initial, const PicardOptions& opts) {
  if (!spec.transient) throw std::invalid_argument("march expects a transient problem");
  const double tau = spec.tau();
  Trajectory out;
  out.states.reserve(spec.steps + 1);
  out.states.push_back(initial);
  out.states.front().time = 0.0;
  for (int s = 0; s < spec.steps; ++s) {
    const double t = (s + 1) * tau;
    auto [next, report] = picard_step(grid, spec, space, out.states.back(), out.states.back(),
                                      tau, t, opts);
    next.time = t;
    out.states.push_back(std::move(next));
    out.reports.push_back(std::move(report));
  }
  return out;
}

double contraction_estimate(const PicardReport& report) {
  const auto& d = report.dist_to_final;
  if (d.size() < 3)
    throw std::invalid_argument("contraction estimate needs at least 3 recorded iterates");
  // ratios d_{n+1}/d_n for n = 0..alpha-2 (the last distance is zero by
  // construction and is excluded)
  double log_sum = 0.0;
  int count = 0;
  for (size_t k = 0; k + 2 < d.size(); ++k) {
    if (d[k] <= 0.0) return 0.0;
    const double r = d[k + 1] / d[k];
    if (r <= 0.0) return 0.0;
    log_sum += std::log(r);
    ++count;
  }
  return count > 0 ? std::exp(log_sum / count) : 0.0;
}

} // namespace cemrich
