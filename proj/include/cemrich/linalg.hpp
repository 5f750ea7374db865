#pragma once

/** @file linalg.hpp
    @brief Linear-algebra contracts: sparse direct solve, dense generalized
           symmetric eigensolve, saddle-point (KKT) solve, dense factorizations.
*/

#include <memory>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace cemrich {

using SpMat = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// One-shot sparse direct solve (LU with partial pivoting).
Vector solve_sparse(const SpMat& A, const Vector& b);

/// Reusable sparse LU factorization.
class SparseSolver {
 public:
  explicit SparseSolver(const SpMat& A);
  ~SparseSolver();
  SparseSolver(SparseSolver&&) noexcept;
  SparseSolver& operator=(SparseSolver&&) noexcept;

  Vector solve(const Vector& b) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct EigPairs {
  Vector values;  ///< ascending
  Matrix vectors; ///< columns, B-orthonormal
};

/// Lowest-L eigenpairs of A x = lambda B x with A symmetric and B symmetric
/// positive definite. Vectors are B-orthonormal; the entry of largest
/// magnitude of each vector is made positive (deterministic sign).
EigPairs generalized_symmetric_eig(const Matrix& A, const Matrix& B, int L);
EigPairs generalized_symmetric_eig(const SpMat& A, const SpMat& B, int L);

struct SaddleSolution {
  Vector x;
  Vector multipliers;
};

/// Factorizes [[A, C^T], [C, 0]] once; solves for right-hand sides (0, g).
/// A must be symmetric PSD (and PD on ker C), C full row rank.
class SaddleSolver {
 public:
  SaddleSolver(const SpMat& A, const SpMat& C);
  ~SaddleSolver();
  SaddleSolver(SaddleSolver&&) noexcept;
  SaddleSolver& operator=(SaddleSolver&&) noexcept;

  SaddleSolution solve(const Vector& g) const;
  int primal_dim() const { return n_; }
  int constraint_count() const { return m_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int n_ = 0, m_ = 0;
};

SaddleSolution solve_saddle(const SpMat& A, const SpMat& C, const Vector& g);

/// Dense factorization for the reduced coarse systems; Cholesky when the
/// matrix is symmetric positive definite, LU otherwise.
class DenseSolver {
 public:
  DenseSolver(Matrix A, bool symmetric_pd);

  Vector solve(const Vector& b) const;

 private:
  Matrix f_;
  std::vector<int> piv_;
  bool chol_ = false;
};

/// Caps the number of threads used by the BLAS/LAPACK backend.
void set_blas_threads(int threads);

} // namespace cemrich
