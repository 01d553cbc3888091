#pragma once

// Points of the variety of complex Lie brackets. A bracket mu is stored as
// the n x n(n-1)/2 matrix of the linear map Lambda^2 C^n -> C^n in the
// lexicographic wedge basis; the Jacobi identity is a property, not an
// invariant of the representation, so the residual is exposed for gating.

#include <hcf/linalg.hpp>

#include <optional>
#include <string>

namespace hcf {

class Bracket {
 public:
  Bracket() : n_(0) {}
  explicit Bracket(int n) : n_(n), m_(cmat::Zero(n, wedge_dim(n))) {
    if (n < 1) throw std::invalid_argument("Bracket: dimension must be positive");
  }
  Bracket(int n, cmat m) : n_(n), m_(std::move(m)) {
    if (m_.rows() != n_ || m_.cols() != wedge_dim(n_))
      throw std::invalid_argument("Bracket: coefficient matrix has wrong shape");
  }

  int dim() const { return n_; }
  int pair_dim() const { return wedge_dim(n_); }
  const cmat& coeffs() const { return m_; }
  cmat& coeffs() { return m_; }

  /// Structure constant c^k_{ij} with 0-based i < j.
  cxd entry(int i, int j, int k) const { return m_(k, wedge_index(n_, i, j)); }
  void set_entry(int i, int j, int k, cxd v) { m_(k, wedge_index(n_, i, j)) = v; }

  /// mu(Z_i ^ Z_j) for arbitrary i != j (antisymmetric in i, j).
  cvec pair_image(int i, int j) const {
    if (i == j) return cvec::Zero(n_);
    return i < j ? cvec(m_.col(wedge_index(n_, i, j)))
                 : cvec(-m_.col(wedge_index(n_, j, i)));
  }

  cvec apply(const cvec& v, const cvec& w) const { return m_ * wedge_coords(v, w); }

  double norm() const { return m_.norm(); }
  double norm_sq() const { return m_.squaredNorm(); }

 private:
  int n_;
  cmat m_;
};

/// Frobenius inner product <a, b> = sum a_ij conj(b_ij) on bracket coefficients.
inline cxd bracket_ip(const Bracket& a, const Bracket& b) {
  return (a.coeffs().cwiseProduct(b.coeffs().conjugate())).sum();
}

inline cxd coeff_ip(const cmat& a, const cmat& b) {
  return (a.cwiseProduct(b.conjugate())).sum();
}

/// Norm of the Jacobi cyclic sum over all basis triples i < j < k.
inline double jacobi_residual(const Bracket& mu) {
  const int n = mu.dim();
  double acc = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        cvec J = mu.apply(mu.pair_image(i, j), cvec::Unit(n, k)) +
                 mu.apply(mu.pair_image(j, k), cvec::Unit(n, i)) +
                 mu.apply(mu.pair_image(k, i), cvec::Unit(n, j));
        acc += J.squaredNorm();
      }
  return std::sqrt(acc);
}

/// GL(n,C) change-of-basis action (h.mu)(v, w) = h mu(h^-1 v, h^-1 w).
inline Bracket act_gl(const cmat& h, const Bracket& mu) {
  const int n = mu.dim();
  if (h.rows() != n || h.cols() != n)
    throw std::invalid_argument("act_gl: h must be n x n");
  Eigen::FullPivLU<cmat> lu(h);
  if (!lu.isInvertible()) throw std::invalid_argument("act_gl: h is singular");
  return Bracket(n, h * mu.coeffs() * lambda2(lu.inverse()));
}

/// Infinitesimal action pi(A)mu = A mu - mu(A ^ id + id ^ A).
inline cmat pi_coeffs(const cmat& A, const cmat& m) { return A * m - m * id_wedge(A); }

inline Bracket pi_action(const cmat& A, const Bracket& mu) {
  return Bracket(mu.dim(), pi_coeffs(A, mu.coeffs()));
}

/// Orthonormal basis of the centre {v : mu(v ^ .) = 0}, as columns.
inline cmat centre(const Bracket& mu, double rel_tol = kRankRelTol) {
  const int n = mu.dim();
  cmat K(n * n, n);
  for (int a = 0; a < n; ++a) {
    cvec col(n * n);
    for (int b = 0; b < n; ++b) col.segment(b * n, n) = mu.pair_image(a, b);
    K.col(a) = col;
  }
  return kernel_basis(K, rel_tol);
}

/// Degree of nilpotency via the lower central series C^1 = [g,g],
/// C^{j+1} = [g, C^j]: the first j with C^j = 0. nullopt if the series
/// stalls at a nonzero term (not nilpotent).
inline std::optional<int> nilpotency_degree(const Bracket& mu,
                                            double rel_tol = kRankRelTol) {
  const int n = mu.dim();
  const double scale = std::max(mu.norm(), 1e-300);  // rank decisions at |mu|
  cmat C = column_space_scaled(mu.coeffs(), rel_tol, scale);  // C^1
  int j = 1;
  while (true) {
    if (C.cols() == 0) return j;
    if (j > n) return std::nullopt;
    cmat gen(n, n * C.cols());
    for (int a = 0; a < n; ++a)
      for (int c = 0; c < C.cols(); ++c)
        gen.col(a * C.cols() + c) = mu.apply(cvec::Unit(n, a), C.col(c));
    cmat next = column_space_scaled(gen, rel_tol, scale);
    if (next.cols() >= C.cols()) return std::nullopt;
    C = std::move(next);
    ++j;
  }
}

struct CentreSplit {
  cmat centre_basis;   // orthonormal columns spanning the centre
  Bracket mu0;         // component into the centre
  Bracket mu1;         // component into the orthogonal complement
  bool trivial_centre = false;
};

/// Orthogonal decomposition mu = mu0 + mu1 along the centre. A trivial
/// centre is legal (both components returned; mu0 = 0) but flagged.
inline CentreSplit centre_split(const Bracket& mu, double rel_tol = kRankRelTol) {
  CentreSplit out;
  out.centre_basis = centre(mu, rel_tol);
  const cmat pz = out.centre_basis * out.centre_basis.adjoint();
  out.trivial_centre = out.centre_basis.cols() == 0;
  cmat m0 = out.trivial_centre ? cmat::Zero(mu.dim(), mu.pair_dim())
                               : cmat(pz * mu.coeffs());
  out.mu0 = Bracket(mu.dim(), m0);
  out.mu1 = Bracket(mu.dim(), mu.coeffs() - m0);
  return out;
}

/// Orthonormal basis (Frobenius) of the derivation algebra
/// Der(mu) = {D : pi(D)mu = 0}.
inline std::vector<cmat> derivation_space(const Bracket& mu,
                                          double rel_tol = kRankRelTol) {
  const int n = mu.dim();
  const int N = mu.pair_dim();
  cmat T(n * N, n * n);
  for (int b = 0; b < n; ++b)
    for (int a = 0; a < n; ++a) {
      cmat E = cmat::Zero(n, n);
      E(a, b) = 1.0;
      cmat img = pi_coeffs(E, mu.coeffs());
      T.col(b * n + a) = Eigen::Map<cvec>(img.data(), n * N);
    }
  cmat K = kernel_basis(T, rel_tol);
  std::vector<cmat> basis;
  basis.reserve(K.cols());
  for (int c = 0; c < K.cols(); ++c) {
    cvec v = K.col(c);
    basis.push_back(Eigen::Map<cmat>(v.data(), n, n));
  }
  return basis;
}

/// Almost-abelian bracket on C Z_0 + C^n: mu(Z_0 ^ v) = A v on the abelian
/// ideal spanned by Z_1..Z_n.
inline Bracket make_almost_abelian(const cmat& A) {
  const int m = static_cast<int>(A.rows());
  if (A.cols() != m) throw std::invalid_argument("make_almost_abelian: A must be square");
  const int n = m + 1;
  Bracket mu(n);
  for (int i = 1; i < n; ++i)
    for (int k = 1; k < n; ++k) mu.set_entry(0, i, k, A(k - 1, i - 1));
  return mu;
}

}  // namespace hcf
