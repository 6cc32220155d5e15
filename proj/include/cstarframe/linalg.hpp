#pragma once

// Dense complex kernels shared by every module. All algebra and operator
// questions end up here as Hermitian eigenproblems or SVDs of small blocks.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

namespace cstarframe {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

/// Singular values below `kDefaultRankTol * sigma_max` count as zero.
inline constexpr double kDefaultRankTol = 1e-10;

namespace linalg {

inline Matrix hermitian_part(const Matrix& m) { return (m + m.adjoint()) / 2.0; }

/// Eigenvalues of the Hermitian part, ascending.
inline RealVector hermitian_eigenvalues(const Matrix& m) {
  if (m.size() == 0) return RealVector{};
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

struct HermitianEigen {
  RealVector values;  // ascending
  Matrix vectors;     // columns
};

inline HermitianEigen hermitian_eigen(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(m));
  return {es.eigenvalues(), es.eigenvectors()};
}

inline RealVector singular_values(const Matrix& m) {
  if (m.size() == 0) return RealVector{};
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues();
}

inline double spectral_norm(const Matrix& m) {
  const RealVector s = singular_values(m);
  return s.size() == 0 ? 0.0 : s(0);
}

inline double max_spectral_norm(const std::vector<Matrix>& blocks) {
  double out = 0.0;
  for (const auto& b : blocks) out = std::max(out, spectral_norm(b));
  return out;
}

inline double min_eigenvalue(const std::vector<Matrix>& blocks) {
  double out = std::numeric_limits<double>::infinity();
  for (const auto& b : blocks) {
    const RealVector ev = hermitian_eigenvalues(b);
    if (ev.size() > 0) out = std::min(out, ev(0));
  }
  return out;
}

inline double max_eigenvalue(const std::vector<Matrix>& blocks) {
  double out = -std::numeric_limits<double>::infinity();
  for (const auto& b : blocks) {
    const RealVector ev = hermitian_eigenvalues(b);
    if (ev.size() > 0) out = std::max(out, ev(ev.size() - 1));
  }
  return out;
}

/// Relative Hermitian-PSD test on a family of blocks: with s = max(1, max_b ||m_b||),
/// every block must satisfy ||m - m*|| <= tol*s and lambda_min(herm(m)) >= -tol*s.
inline bool blocks_psd(const std::vector<Matrix>& blocks, double tol) {
  const double scale = std::max(1.0, max_spectral_norm(blocks));
  for (const auto& b : blocks) {
    if (b.rows() != b.cols()) return false;
    if (spectral_norm(b - b.adjoint()) > tol * scale) return false;
    const RealVector ev = hermitian_eigenvalues(b);
    if (ev.size() > 0 && ev(0) < -tol * scale) return false;
  }
  return true;
}

/// Number of singular values strictly above `cutoff`.
inline long rank_above(const Matrix& m, double cutoff) {
  const RealVector s = singular_values(m);
  return static_cast<long>((s.array() > cutoff).count());
}

/// Moore-Penrose pseudo-inverse with an absolute singular-value cutoff.
inline Matrix pseudo_inverse(const Matrix& m, double cutoff) {
  Matrix out = Matrix::Zero(m.cols(), m.rows());
  if (m.size() == 0) return out;
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVector& s = svd.singularValues();
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) <= cutoff) break;
    out += (svd.matrixV().col(i) / s(i)) * svd.matrixU().col(i).adjoint();
  }
  return out;
}

/// Orthonormal basis of the column space, singular values above `cutoff`.
inline Matrix range_basis(const Matrix& m, double cutoff) {
  if (m.size() == 0) return Matrix(m.rows(), 0);
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU);
  const RealVector& s = svd.singularValues();
  const auto r = static_cast<Eigen::Index>((s.array() > cutoff).count());
  return svd.matrixU().leftCols(r);
}

/// Hermitian matrix function f applied to eigenvalues.
template <typename F>
Matrix hermitian_apply(const Matrix& m, F&& f) {
  if (m.size() == 0) return m;
  const HermitianEigen e = hermitian_eigen(m);
  RealVector fv(e.values.size());
  for (Eigen::Index i = 0; i < fv.size(); ++i) fv(i) = f(e.values(i));
  return e.vectors * fv.cast<Complex>().asDiagonal() * e.vectors.adjoint();
}

}  // namespace linalg
}  // namespace cstarframe
