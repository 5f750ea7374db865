#pragma once

/** @file cem.hpp
    @brief Sampled bilinear forms, per-block auxiliary spectral spaces, and the
           localized constraint-energy-minimizing multiscale basis.
*/

#include <optional>
#include <string>

#include "cemrich/assembly.hpp"
#include "cemrich/linalg.hpp"

namespace cemrich {

/// Pressure states freezing the nonlinear coefficients of the offline forms.
struct SampleSet {
  struct Sample {
    State state;
    double weight = 1.0;
  };
  std::vector<Sample> samples;

  int size() const { return static_cast<int>(samples.size()); }
};

/// Single-realization source: B = 1, w_1 = 1.
SampleSet sample_source_steady(const State& reference);

/// Trajectory source: B = S+1 with trapezoidal weights (1/2, 1, ..., 1, 1/2).
SampleSet sample_source_transient(const std::vector<State>& trajectory);

/// Sample-weighted sum of the local forms on one coarse block, restricted to
/// V(K_j) (closure nodes minus the domain boundary). A is symmetrized.
struct BlockForms {
  std::vector<int> nodes; ///< full node ids, scan order
  SpMat A;                ///< stiffness + exchange, N*nodes square
  SpMat R;                ///< kappa-weighted auxiliary mass, block-diagonal over continua
};

BlockForms sampled_block_forms(const StructuredGrid& grid, const CoarsePartition& partition,
                               const ProblemSpec& spec, const SampleSet& samples, int j,
                               bool owned_nodes_only = false);

/// Sample-weighted global stiffness + exchange operator on stacked interior
/// DOFs, symmetrized (used for the energy of the minimization problems).
SpMat sampled_global_energy(const StructuredGrid& grid, const ProblemSpec& spec,
                            const SampleSet& samples);

/// Per-block eigenpairs of A_Q^(j) phi = lambda R^(j) phi, R-orthonormal,
/// eigenvalues ascending.
struct AuxiliarySpace {
  int n_continua = 1;
  int Hdiv = 0;
  bool full_local = false; ///< disjoint-ownership mode with the complete eigenbasis per block

  struct Block {
    std::vector<int> nodes;
    Vector eigenvalues;
    Matrix phi; ///< (N * nodes.size()) x L_j, R-orthonormal columns
    SpMat R;    ///< kept for the orthogonality constraints
  };
  std::vector<Block> blocks;

  int count(int j) const { return static_cast<int>(blocks[j].phi.cols()); }
  int total_count() const;
};

/// Lowest-L eigenpairs per block (uniform L).
AuxiliarySpace solve_auxiliary(const StructuredGrid& grid, const CoarsePartition& partition,
                               const ProblemSpec& spec, const SampleSet& samples, int L,
                               int threads = 1);

/// Complete eigenbasis per block on disjointly-owned interior nodes; together
/// the owned sets tile the interior, so the basis built from this space spans
/// the whole fine space when the regions cover the domain.
AuxiliarySpace solve_auxiliary_full(const StructuredGrid& grid, const CoarsePartition& partition,
                                    const ProblemSpec& spec, const SampleSet& samples,
                                    int threads = 1);

/// Node rectangle in interior-lattice coordinates (x, y in [0, n-2]).
struct NodeRect {
  int x0 = 0, y0 = 0, nx = 0, ny = 0;
};

/// Localized multiscale basis. Column (j, k) is supported on the interior of
/// the oversampled region of block j and stored as a dense block on its
/// rectangle; row layout (continuum, y, x), column-major over columns.
struct MultiscaleSpace {
  int n = 0; ///< fine cells per side
  int n_continua = 1;
  int Hdiv = 0, m = 0, L = 0;

  struct BlockBasis {
    NodeRect rect;
    Matrix psi; ///< (N * rect.ny * rect.nx) x L_j
  };
  std::vector<BlockBasis> blocks;
  std::vector<int> col_offset; ///< size blocks+1

  int dim() const { return col_offset.empty() ? 0 : col_offset.back(); }
  int column_of(int j, int k) const { return col_offset[j] + k; }

  /// Prolongation G c onto stacked interior DOFs.
  Vector prolong(const Vector& coeffs) const;
  /// G^T v for a stacked interior vector.
  Vector restrict_transpose(const Vector& v) const;
  /// Reduced operator G^T A G (A on stacked interior DOFs).
  Matrix reduce(const SpMat& A, bool symmetric, int threads) const;
  /// Explicit sparse basis matrix (tests, caching).
  SpMat to_sparse() const;
};

/// Solves the constrained energy minimization per (block, eigenfunction) on
/// the oversampled regions; one KKT factorization per distinct region
/// rectangle, shared across its blocks.
MultiscaleSpace build_basis(const StructuredGrid& grid, const CoarsePartition& partition,
                            const AuxiliarySpace& aux, int m, const ProblemSpec& spec,
                            const SampleSet& samples, int threads = 1);

/// Energy fraction of the globally-supported basis function of (j, k) outside
/// K_{j,l}, for l = 0..Hdiv. Nonincreasing; 0 at l = Hdiv.
std::vector<double> decay_profile(const StructuredGrid& grid, const CoarsePartition& partition,
                                  const AuxiliarySpace& aux, const ProblemSpec& spec,
                                  const SampleSet& samples, int j, int k, int threads = 1);

/// Galerkin projection of a fine state onto the multiscale space in the
/// stiffness + exchange form evaluated at that state.
Vector project_initial(const State& fine_state, const MultiscaleSpace& space,
                       const StructuredGrid& grid, const ProblemSpec& spec, int threads = 1);

/// Basis cache: text header + little-endian payload; keyed by a content hash.
void save_basis(const MultiscaleSpace& space, const std::string& path);
std::optional<MultiscaleSpace> load_basis(const std::string& path);
std::string content_hash(const std::string& config_text,
                         const std::vector<std::string>& raster_paths);

} // namespace cemrich
