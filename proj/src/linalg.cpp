#include "cemrich/linalg.hpp"

#include <cmath>
#include <stdexcept>

#include <lapacke.h>

extern "C" void openblas_set_num_threads(int);

namespace cemrich {

void set_blas_threads(int threads) { openblas_set_num_threads(threads > 0 ? threads : 1); }

struct SparseSolver::Impl {
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
};

SparseSolver::SparseSolver(const SpMat& A) : impl_(std::make_unique<Impl>()) {
  if (A.rows() != A.cols()) throw std::invalid_argument("sparse solve needs a square matrix");
  SpMat Ac = A;
  Ac.makeCompressed();
  impl_->lu.compute(Ac);
  if (impl_->lu.info() != Eigen::Success)
    throw std::runtime_error("sparse LU factorization failed (singular to tolerance?)");
}

SparseSolver::~SparseSolver() = default;
SparseSolver::SparseSolver(SparseSolver&&) noexcept = default;
SparseSolver& SparseSolver::operator=(SparseSolver&&) noexcept = default;

Vector SparseSolver::solve(const Vector& b) const { return impl_->lu.solve(b); }

Vector solve_sparse(const SpMat& A, const Vector& b) { return SparseSolver(A).solve(b); }

namespace {

void fix_signs(Matrix& vecs) {
  for (Eigen::Index k = 0; k < vecs.cols(); ++k) {
    Eigen::Index imax = 0;
    double vmax = 0.0;
    for (Eigen::Index r = 0; r < vecs.rows(); ++r) {
      const double a = std::abs(vecs(r, k));
      if (a > vmax) {
        vmax = a;
        imax = r;
      }
    }
    if (vecs(imax, k) < 0.0) vecs.col(k) = -vecs.col(k);
  }
}

} // namespace

EigPairs generalized_symmetric_eig(const Matrix& A, const Matrix& B, int L) {
  const lapack_int n = static_cast<lapack_int>(A.rows());
  if (A.rows() != A.cols() || B.rows() != B.cols() || A.rows() != B.rows())
    throw std::invalid_argument("generalized eigensolve needs square matrices of equal size");
  if (L < 1 || L > n)
    throw std::invalid_argument("eigenpair count exceeds pencil dimension");

  Matrix Aw = 0.5 * (A + A.transpose());
  Matrix Bw = 0.5 * (B + B.transpose());
  Vector w(n);
  // itype=1: A x = lambda B x; vectors come out B-orthonormal.
  lapack_int info = LAPACKE_dsygv(LAPACK_COL_MAJOR, 1, 'V', 'L', n, Aw.data(), n, Bw.data(), n,
                                  w.data());
  if (info > n) throw std::runtime_error("generalized eigensolve: B is not positive definite");
  if (info != 0) throw std::runtime_error("generalized eigensolve failed to converge");

  EigPairs out;
  out.values = w.head(L);
  out.vectors = Aw.leftCols(L);
  fix_signs(out.vectors);
  return out;
}

EigPairs generalized_symmetric_eig(const SpMat& A, const SpMat& B, int L) {
  return generalized_symmetric_eig(Matrix(A), Matrix(B), L);
}

struct SaddleSolver::Impl {
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
};

SaddleSolver::SaddleSolver(const SpMat& A, const SpMat& C)
    : impl_(std::make_unique<Impl>()),
      n_(static_cast<int>(A.rows())),
      m_(static_cast<int>(C.rows())) {
  if (A.rows() != A.cols()) throw std::invalid_argument("saddle solve: A must be square");
  if (C.cols() != A.cols()) throw std::invalid_argument("saddle solve: C column mismatch");
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(A.nonZeros() + 2 * C.nonZeros());
  for (int c = 0; c < A.outerSize(); ++c)
    for (SpMat::InnerIterator it(A, c); it; ++it)
      trip.emplace_back(static_cast<int>(it.row()), c, it.value());
  for (int c = 0; c < C.outerSize(); ++c)
    for (SpMat::InnerIterator it(C, c); it; ++it) {
      trip.emplace_back(n_ + static_cast<int>(it.row()), c, it.value());
      trip.emplace_back(c, n_ + static_cast<int>(it.row()), it.value());
    }
  SpMat K(n_ + m_, n_ + m_);
  K.setFromTriplets(trip.begin(), trip.end());
  K.makeCompressed();
  impl_->lu.compute(K);
  if (impl_->lu.info() != Eigen::Success) {
    // pinpoint the offending constraint by triangularizing C row by row
    Matrix Cd(C);
    Eigen::Index lead = 0;
    for (Eigen::Index r = 0; r < Cd.rows(); ++r) {
      Eigen::Index p;
      const double piv = Cd.row(r).tail(Cd.cols() - lead).cwiseAbs().maxCoeff(&p);
      if (piv < 1e-12 * (1.0 + Cd.cwiseAbs().maxCoeff()))
        throw std::runtime_error("saddle solve: constraint row " + std::to_string(r) +
                                 " is linearly dependent");
      (void)p;
      lead = std::min<Eigen::Index>(lead + 1, Cd.cols() - 1);
      for (Eigen::Index r2 = r + 1; r2 < Cd.rows(); ++r2)
        Cd.row(r2) -= Cd.row(r) * (Cd.row(r2).dot(Cd.row(r)) / Cd.row(r).squaredNorm());
    }
    throw std::runtime_error("saddle-point factorization failed");
  }
}

SaddleSolver::~SaddleSolver() = default;
SaddleSolver::SaddleSolver(SaddleSolver&&) noexcept = default;
SaddleSolver& SaddleSolver::operator=(SaddleSolver&&) noexcept = default;

SaddleSolution SaddleSolver::solve(const Vector& g) const {
  if (g.size() != m_) throw std::invalid_argument("saddle solve: rhs size mismatch");
  Vector rhs = Vector::Zero(n_ + m_);
  rhs.tail(m_) = g;
  Vector sol = impl_->lu.solve(rhs);
  return {sol.head(n_), sol.tail(m_)};
}

SaddleSolution solve_saddle(const SpMat& A, const SpMat& C, const Vector& g) {
  return SaddleSolver(A, C).solve(g);
}

DenseSolver::DenseSolver(Matrix A, bool symmetric_pd) {
  const lapack_int n = static_cast<lapack_int>(A.rows());
  if (symmetric_pd) {
    f_ = A;
    lapack_int info = LAPACKE_dpotrf(LAPACK_COL_MAJOR, 'L', n, f_.data(), n);
    if (info == 0) {
      chol_ = true;
      return;
    }
    // not numerically PD after all; redo as LU on the original values
  }
  f_ = std::move(A);
  piv_.resize(n);
  lapack_int info = LAPACKE_dgetrf(LAPACK_COL_MAJOR, n, n, f_.data(), n, piv_.data());
  if (info != 0) throw std::runtime_error("dense LU factorization failed (singular matrix)");
}

Vector DenseSolver::solve(const Vector& b) const {
  const lapack_int n = static_cast<lapack_int>(f_.rows());
  Vector x = b;
  lapack_int info;
  if (chol_)
    info = LAPACKE_dpotrs(LAPACK_COL_MAJOR, 'L', n, 1, f_.data(), n, x.data(), n);
  else
    info = LAPACKE_dgetrs(LAPACK_COL_MAJOR, 'N', n, 1, f_.data(), n, piv_.data(), x.data(), n);
  if (info != 0) throw std::runtime_error("dense triangular solve failed");
  return x;
}

} // namespace cemrich
