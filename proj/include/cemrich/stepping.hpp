#pragma once

/** @file stepping.hpp
    @brief Backward-Euler marching with Picard linearization, generic over the
           trial space (fine or multiscale), plus the contraction diagnostic.
*/

#include "cemrich/cem.hpp"

namespace cemrich {

struct PicardOptions {
  double delta0 = 1e-5;
  int max_iter = 50;
  int threads = 1;
};

struct PicardReport {
  int iterations = 0; ///< linear solves performed
  bool converged = false;
  /// per iteration, per continuum: ||p^{n+1}-p^n|| / ||p^n|| in L2
  std::vector<std::vector<double>> rel_diffs;
  /// ||p^n - p^alpha|| (stacked continua) for n = 0..alpha
  std::vector<double> dist_to_final;
  double lambda_hat = 0.0; ///< 0 when fewer than 3 iterates were recorded
};

/// Trial space of the linearized solves: the full fine space or a multiscale
/// space; the same iteration runs on either.
class SpaceHandle {
 public:
  static SpaceHandle fine() { return SpaceHandle(nullptr); }
  static SpaceHandle coarse(const MultiscaleSpace* space) { return SpaceHandle(space); }

  bool is_fine() const { return space_ == nullptr; }
  const MultiscaleSpace* space() const { return space_; }

 private:
  explicit SpaceHandle(const MultiscaleSpace* space) : space_(space) {}
  const MultiscaleSpace* space_;
};

/// One backward-Euler step solved by Picard iteration: coefficients at the
/// previous iterate, unknowns fully implicit, stopped by the relative
/// successive-difference rule per continuum. tau <= 0 drops the mass term
/// (steady problem).
std::pair<State, PicardReport> picard_step(const StructuredGrid& grid, const ProblemSpec& spec,
                                           const SpaceHandle& space, const State& p_prev,
                                           const State& guess, double tau, double t,
                                           const PicardOptions& opts);

std::pair<State, PicardReport> steady_solve(const StructuredGrid& grid, const ProblemSpec& spec,
                                            const SpaceHandle& space, const State& guess,
                                            const PicardOptions& opts);

struct Trajectory {
  std::vector<State> states; ///< S+1 levels including t = 0
  std::vector<PicardReport> reports;
};

/// Backward-Euler march over spec.steps steps; each step's initial guess is
/// the previous time level.
Trajectory march(const StructuredGrid& grid, const ProblemSpec& spec, const SpaceHandle& space,
                 const State& initial, const PicardOptions& opts);

/// Geometric mean of successive-distance ratios to the final iterate; needs at
/// least 3 recorded iterates.
double contraction_estimate(const PicardReport& report);

} // namespace cemrich
