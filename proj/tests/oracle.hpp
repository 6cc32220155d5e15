#pragma once

// Test-only reference computations, deliberately independent of Eigen's
// solvers and of the library's realization code: a cyclic Jacobi eigensolver
// on the real symmetric embedding of a Hermitian matrix, Gauss-Jordan
// inversion, and bisection for pencil bounds.

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;
using CMat = std::vector<std::vector<cplx>>;
using RMat = std::vector<std::vector<double>>;

inline CMat zeros(std::size_t r, std::size_t c) { return CMat(r, std::vector<cplx>(c, 0.0)); }

inline CMat identity(std::size_t n) {
  CMat m = zeros(n, n);
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0;
  return m;
}

inline CMat mul(const CMat& a, const CMat& b) {
  CMat out = zeros(a.size(), b.front().size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k)
      for (std::size_t j = 0; j < b.front().size(); ++j) out[i][j] += a[i][k] * b[k][j];
  return out;
}

inline CMat adjoint(const CMat& a) {
  CMat out = zeros(a.front().size(), a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.front().size(); ++j) out[j][i] = std::conj(a[i][j]);
  return out;
}

inline CMat sub(const CMat& a, const CMat& b) {
  CMat out = a;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) out[i][j] -= b[i][j];
  return out;
}

inline CMat scale(const CMat& a, double s) {
  CMat out = a;
  for (auto& row : out)
    for (auto& v : row) v *= s;
  return out;
}

/// Cyclic Jacobi on a real symmetric matrix; returns ascending eigenvalues.
inline std::vector<double> jacobi_eigenvalues(RMat a) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-300) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p];
          const double akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k];
          const double aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a[i][i];
  std::sort(ev.begin(), ev.end());
  return ev;
}

/// Eigenvalues of a Hermitian matrix via the embedding [[Re, -Im], [Im, Re]],
/// whose spectrum is that of h with every eigenvalue doubled.
inline std::vector<double> hermitian_eigenvalues(const CMat& h) {
  const std::size_t n = h.size();
  RMat r(2 * n, std::vector<double>(2 * n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const cplx v = 0.5 * (h[i][j] + std::conj(h[j][i]));
      r[i][j] = v.real();
      r[i + n][j + n] = v.real();
      r[i][j + n] = -v.imag();
      r[i + n][j] = v.imag();
    }
  }
  const std::vector<double> doubled = jacobi_eigenvalues(std::move(r));
  std::vector<double> out;
  for (std::size_t i = 0; i < doubled.size(); i += 2) out.push_back(0.5 * (doubled[i] + doubled[i + 1]));
  return out;
}

inline double largest_singular_value(const CMat& a) {
  const std::vector<double> ev = hermitian_eigenvalues(mul(adjoint(a), a));
  return std::sqrt(std::max(0.0, ev.back()));
}

/// Gauss-Jordan inverse with partial pivoting.
inline CMat inverse(CMat a) {
  const std::size_t n = a.size();
  CMat inv = identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    std::swap(a[col], a[piv]);
    std::swap(inv[col], inv[piv]);
    const cplx p = a[col][col];
    for (std::size_t j = 0; j < n; ++j) {
      a[col][j] /= p;
      inv[col][j] /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const cplx f = a[r][col];
      for (std::size_t j = 0; j < n; ++j) {
        a[r][j] -= f * a[col][j];
        inv[r][j] -= f * inv[col][j];
      }
    }
  }
  return inv;
}

/// sup{c : g - c q is PSD} by bisection on lambda_min, for invertible g.
inline double pencil_sup(const CMat& g, const CMat& q, double hi) {
  double lo = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const std::vector<double> ev = hermitian_eigenvalues(sub(g, scale(q, mid)));
    (ev.front() >= 0.0 ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace oracle
