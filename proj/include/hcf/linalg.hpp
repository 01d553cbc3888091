#pragma once

// Dense complex linear algebra over g^{1,0} ~ C^n and its exterior square.
// Lambda^2 C^n carries the lexicographic basis Z_i ^ Z_j (i < j), and the
// Hermitian inner products on C^n and Lambda^2 C^n are the standard ones,
// so adjoints are plain conjugate transposes throughout.

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

namespace hcf {

using cxd = std::complex<double>;
using cmat = Eigen::MatrixXcd;
using cvec = Eigen::VectorXcd;
using rmat = Eigen::MatrixXd;
using rvec = Eigen::VectorXd;

inline constexpr double kRankRelTol = 1e-10;

/// Dimension of Lambda^2 C^n.
inline int wedge_dim(int n) { return n * (n - 1) / 2; }

/// Index of Z_i ^ Z_j (0-based, i < j) in the lexicographic basis.
inline int wedge_index(int n, int i, int j) {
  if (i < 0 || j <= i || j >= n)
    throw std::invalid_argument("wedge_index: need 0 <= i < j < n");
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

/// Inverse of wedge_index.
inline std::pair<int, int> wedge_pair(int n, int k) {
  for (int i = 0; i < n - 1; ++i) {
    const int row = n - 1 - i;
    if (k < row) return {i, i + 1 + k};
    k -= row;
  }
  throw std::invalid_argument("wedge_pair: index out of range");
}

/// Coordinates of v ^ w in the lexicographic basis: (v_i w_j - v_j w_i).
inline cvec wedge_coords(const cvec& v, const cvec& w) {
  const int n = static_cast<int>(v.size());
  cvec c(wedge_dim(n));
  int k = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) c(k++) = v(i) * w(j) - v(j) * w(i);
  return c;
}

/// Endomorphism A ^ B of Lambda^2 C^n: (A^B)(v^w) = Av^Bw + Bv^Aw.
inline cmat wedge_endo(const cmat& A, const cmat& B) {
  const int n = static_cast<int>(A.rows());
  if (A.cols() != n || B.rows() != n || B.cols() != n)
    throw std::invalid_argument("wedge_endo: square matrices of equal size required");
  const int N = wedge_dim(n);
  cmat W(N, N);
  int col = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      W.col(col++) = wedge_coords(A.col(i), B.col(j)) + wedge_coords(B.col(i), A.col(j));
  return W;
}

/// id ^ A, the derivative of the functorial Lambda^2 action at the identity.
inline cmat id_wedge(const cmat& A) {
  return wedge_endo(cmat::Identity(A.rows(), A.rows()), A);
}

/// Lambda^2 h = (1/2) h ^ h, the functorial action: (Lambda^2 h)(v^w) = hv ^ hw.
inline cmat lambda2(const cmat& h) { return 0.5 * wedge_endo(h, h); }

/// Orthonormal basis of ker M, columns of the result. Singular values below
/// rel_tol times the largest one count as zero; the zero map yields the full
/// space.
inline cmat kernel_basis(const cmat& M, double rel_tol = kRankRelTol) {
  Eigen::JacobiSVD<cmat> svd(M, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_tol * smax) ++rank;
  return svd.matrixV().rightCols(M.cols() - rank);
}

/// kernel_basis against an external scale: singular values below
/// rel_tol * scale count as zero. Used where M itself may be uniformly tiny
/// relative to the object it was derived from.
inline cmat kernel_basis_scaled(const cmat& M, double rel_tol, double scale) {
  Eigen::JacobiSVD<cmat> svd(M, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_tol * scale) ++rank;
  return svd.matrixV().rightCols(M.cols() - rank);
}

/// Orthonormal basis of the column space of M (rank decided as in kernel_basis).
inline cmat column_space(const cmat& M, double rel_tol = kRankRelTol) {
  Eigen::JacobiSVD<cmat> svd(M, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_tol * smax) ++rank;
  return svd.matrixU().leftCols(rank);
}

/// column_space against an external scale (see kernel_basis_scaled).
inline cmat column_space_scaled(const cmat& M, double rel_tol, double scale) {
  Eigen::JacobiSVD<cmat> svd(M, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_tol * scale) ++rank;
  return svd.matrixU().leftCols(rank);
}

inline double hermitian_defect(const cmat& A) { return (A - A.adjoint()).norm(); }

/// Largest principal angle (radians) between the column spans of two
/// orthonormal bases; 0 for two empty bases, pi/2 on dimension mismatch.
/// Small angles use the sine formulation: acos of a cosine near 1 cannot
/// resolve below ~sqrt(eps), while the projection residual can.
inline double subspace_angle(const cmat& U, const cmat& V) {
  if (U.cols() != V.cols()) return M_PI / 2;
  if (U.cols() == 0) return 0.0;
  Eigen::JacobiSVD<cmat> svd(U.adjoint() * V);
  const double c = std::min(svd.singularValues().minCoeff(), 1.0);
  if (c < 0.7) return std::acos(c);
  const cmat R = V - U * (U.adjoint() * V);
  Eigen::JacobiSVD<cmat> res(R);
  const double s = std::min(res.singularValues().maxCoeff(), 1.0);
  return std::asin(s);
}

}  // namespace hcf
