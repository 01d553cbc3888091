#pragma once

// Curvature-side algebra: the endomorphism P_mu = mu mu^* (the bracket-level
// form of the positive Hermitian curvature operator), its moment-map partner
// Q_mu, and the soliton fits used for fixed-point diagnostics.

#include <hcf/bracket.hpp>

namespace hcf {

/// P_mu = mu mu^*; Hermitian PSD with tr P_mu = |mu|^2.
inline cmat p_endo(const Bracket& mu) { return mu.coeffs() * mu.coeffs().adjoint(); }

/// Q_mu, defined by <Q_mu v, w> = sum_i <mu(v ^ Z_i), mu(w ^ Z_i)>.
inline cmat q_endo(const Bracket& mu) {
  const int n = mu.dim();
  std::vector<cmat> R(n, cmat::Zero(n, n));
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < n; ++i)
      if (i != a) R[a].col(i) = mu.pair_image(a, i);
  cmat Q(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) Q(a, b) = (R[a].adjoint() * R[b]).trace();
  return Q;
}

/// Matrix of the Hermitian form Theta(v, w) in the unitary basis; coincides
/// with P_mu and scales quadratically in mu.
inline cmat theta_form(const Bracket& mu) { return p_endo(mu); }

/// | tr((P_mu - Q_mu) E) - <pi(E)mu, mu> | for an arbitrary endomorphism E.
inline double moment_identity_residual(const Bracket& mu, const cmat& E) {
  const cxd lhs = ((p_endo(mu) - q_endo(mu)) * E).trace();
  const cxd rhs = coeff_ip(pi_coeffs(E, mu.coeffs()), mu.coeffs());
  return std::abs(lhs - rhs);
}

/// | |pi(D^*)mu|^2 + tr(Q_mu [D, D^*]) |, zero when (mu, D) is a
/// semi-algebraic soliton pair.
inline double git_soliton_identity_residual(const Bracket& mu, const cmat& D) {
  const double a = pi_coeffs(D.adjoint(), mu.coeffs()).squaredNorm();
  const cxd b = (q_endo(mu) * (D * D.adjoint() - D.adjoint() * D)).trace();
  return std::abs(a + b.real()) + std::abs(b.imag());
}

struct StaticFit {
  double lambda = 0.0;
  double residual = 0.0;  // |P_mu - lambda id|
};

/// Best static-metric fit: P_mu ~ lambda id in least squares.
inline StaticFit static_fit(const Bracket& mu) {
  const cmat P = p_endo(mu);
  StaticFit f;
  f.lambda = P.trace().real() / mu.dim();
  f.residual = (P - f.lambda * cmat::Identity(mu.dim(), mu.dim())).norm();
  return f;
}

struct AlgebraicFit {
  double lambda = 0.0;
  double residual = 0.0;    // |pi(P_mu)mu + lambda mu|
  double imag_part = 0.0;   // |Im <pi(P)mu, mu>| / |mu|^2
  bool imag_anomaly = false;
};

/// Algebraic-soliton fit: lambda is the real part of the Rayleigh quotient
/// -<pi(P_mu)mu, mu> / |mu|^2; a non-real quotient beyond 1e-10 is flagged.
inline AlgebraicFit algebraic_soliton_fit(const Bracket& mu) {
  AlgebraicFit f;
  const double ns = mu.norm_sq();
  if (ns == 0.0) return f;
  const cmat piP = pi_coeffs(p_endo(mu), mu.coeffs());
  const cxd q = coeff_ip(piP, mu.coeffs()) / ns;
  f.lambda = -q.real();
  f.imag_part = std::abs(q.imag());
  f.imag_anomaly = f.imag_part > 1e-10;
  f.residual = (piP + f.lambda * mu.coeffs()).norm();
  return f;
}

struct SemiAlgebraicFit {
  double lambda = 0.0;
  cmat D;                      // derivation, not necessarily Hermitian
  double residual = 0.0;       // |P_mu - lambda id - (D + D^*)/2|
  double derivation_residual = 0.0;  // |pi(D)mu|, ~0 by construction
  double adjoint_residual = 0.0;     // |pi(D^*)mu|, 0 iff the fit is algebraic
};

/// Semi-algebraic soliton fit: real least squares for
/// P_mu = lambda id + (D + D^*)/2 over lambda in R and D in Der(mu),
/// minimum-norm solution on ties.
inline SemiAlgebraicFit semialgebraic_soliton_fit(const Bracket& mu,
                                                  double rel_tol = kRankRelTol) {
  const int n = mu.dim();
  const auto ders = derivation_space(mu, rel_tol);
  const int d = static_cast<int>(ders.size());
  const auto vec_real = [n](const cmat& M) {
    rvec v(2 * n * n);
    Eigen::Map<const cvec> flat(M.data(), n * n);
    v.head(n * n) = flat.real();
    v.tail(n * n) = flat.imag();
    return v;
  };
  rmat A(2 * n * n, 1 + 2 * d);
  A.col(0) = vec_real(cmat::Identity(n, n));
  for (int j = 0; j < d; ++j) {
    const cmat H = 0.5 * (ders[j] + ders[j].adjoint());
    const cmat Hi = 0.5 * (cxd(0, 1) * ders[j] + (cxd(0, 1) * ders[j]).adjoint());
    A.col(1 + j) = vec_real(H);
    A.col(1 + d + j) = vec_real(Hi);
  }
  const cmat P = p_endo(mu);
  rvec u = A.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(vec_real(P));

  SemiAlgebraicFit f;
  f.lambda = u(0);
  f.D = cmat::Zero(n, n);
  for (int j = 0; j < d; ++j) f.D += cxd(u(1 + j), u(1 + d + j)) * ders[j];
  f.residual =
      (P - f.lambda * cmat::Identity(n, n) - 0.5 * (f.D + f.D.adjoint())).norm();
  f.derivation_residual = pi_coeffs(f.D, mu.coeffs()).norm();
  f.adjoint_residual = pi_coeffs(f.D.adjoint(), mu.coeffs()).norm();
  return f;
}

}  // namespace hcf
