#include <catch2/catch_amalgamated.hpp>

#include <hcf/curvature.hpp>
#include <hcf/examples.hpp>

using namespace hcf;

TEST_CASE("P and Q endomorphisms", "[curvature]") {
  CHECK(p_endo(Bracket(3)).norm() == 0.0);
  CHECK(q_endo(Bracket(3)).norm() == 0.0);

  // heisenberg: mu* Z3 = Z1^Z2, so P = diag(0,0,1); Q counts usage, diag(1,1,0)
  cmat P = p_endo(heisenberg3());
  cmat Q = q_endo(heisenberg3());
  cmat Pe = cmat::Zero(3, 3);
  Pe(2, 2) = 1.0;
  cmat Qe = cmat::Identity(3, 3);
  Qe(2, 2) = 0.0;
  CHECK((P - Pe).norm() == 0.0);
  CHECK((Q - Qe).norm() < 1e-15);

  // mu_A, A = diag(1,2): <Q Z0, Z0> = |A|^2 = 5, Q on the ideal = A*A
  cmat A = cmat::Zero(2, 2);
  A(0, 0) = 1.0;
  A(1, 1) = 2.0;
  cmat Qa = q_endo(make_almost_abelian(A));
  cmat Qae = cmat::Zero(3, 3);
  Qae(0, 0) = 5.0;
  Qae(1, 1) = 1.0;
  Qae(2, 2) = 4.0;
  CHECK((Qa - Qae).norm() < 1e-14);
  cmat Pa = p_endo(make_almost_abelian(A));
  cmat Pae = cmat::Zero(3, 3);
  Pae(1, 1) = 1.0;
  Pae(2, 2) = 4.0;
  CHECK((Pa - Pae).norm() < 1e-14);

  // both are Hermitian PSD
  rng_t rng(13);
  const Bracket mu = random_nilpotent_bracket(5, rng);
  CHECK(hermitian_defect(p_endo(mu)) < 1e-14);
  CHECK(hermitian_defect(q_endo(mu)) < 1e-14);
  CHECK(Eigen::SelfAdjointEigenSolver<cmat>(p_endo(mu)).eigenvalues().minCoeff() >
        -1e-14);
}

TEST_CASE("theta form", "[curvature]") {
  CHECK(theta_form(Bracket(2)).norm() == 0.0);

  cmat th = theta_form(heisenberg3());
  CHECK(std::abs(th(2, 2) - 1.0) == 0.0);
  CHECK(th.norm() == 1.0);

  // quadratic in mu
  Bracket scaled = heisenberg3();
  scaled.coeffs() *= cxd(0.0, 2.0);
  CHECK((theta_form(scaled) - 4.0 * th).norm() < 1e-14);
}

TEST_CASE("moment-map identity", "[curvature]") {
  cmat E = cmat::Zero(3, 3);
  E(0, 0) = 1.0;
  // both sides equal -1 for heisenberg with E = diag(1,0,0)
  CHECK(moment_identity_residual(heisenberg3(), E) < 1e-15);
  const cmat PQ = p_endo(heisenberg3()) - q_endo(heisenberg3());
  CHECK((PQ * E).trace().real() == Catch::Approx(-1.0));

  CHECK(moment_identity_residual(Bracket(3), E) == 0.0);

  rng_t rng(17);
  for (int s = 0; s < 20; ++s) {
    const int n = 3 + s % 3;
    const Bracket mu = random_nilpotent_bracket(n, rng);
    const cmat R = random_matrix(n, rng, false);
    CHECK(moment_identity_residual(mu, R) <
          1e-10 * (1.0 + mu.norm_sq()) * (1.0 + R.norm()));
  }
}

TEST_CASE("GIT soliton identity", "[curvature]") {
  // heisenberg soliton data: Hermitian derivation D = diag(1,1,2)
  cmat D = cmat::Identity(3, 3);
  D(2, 2) = 2.0;
  CHECK(git_soliton_identity_residual(heisenberg3(), D) < 1e-15);

  // generic D carries no claim; just record that the quantity is finite
  rng_t rng(19);
  const cmat R = random_matrix(3, rng);
  CHECK(std::isfinite(git_soliton_identity_residual(heisenberg3(), R)));
}

TEST_CASE("static fit", "[curvature]") {
  const StaticFit z = static_fit(Bracket(3));
  CHECK(z.lambda == 0.0);
  CHECK(z.residual == 0.0);

  // P = diag(0,0,1): lambda = 1/3, residual = |diag(-1/3,-1/3,2/3)| = sqrt(6)/3
  const StaticFit h = static_fit(heisenberg3());
  CHECK(h.lambda == Catch::Approx(1.0 / 3.0));
  CHECK(h.residual == Catch::Approx(std::sqrt(6.0) / 3.0));

  // filiform: P = diag(0,0,1,1), lambda = 1/2, residual = 1
  const StaticFit f = static_fit(filiform4());
  CHECK(f.lambda == Catch::Approx(0.5));
  CHECK(f.residual == Catch::Approx(1.0));
}

TEST_CASE("algebraic soliton fit", "[curvature]") {
  // pi(P)mu = mu for heisenberg at unit norm
  const AlgebraicFit h = algebraic_soliton_fit(heisenberg3());
  CHECK(h.lambda == Catch::Approx(-1.0));
  CHECK(h.residual < 1e-15);
  CHECK_FALSE(h.imag_anomaly);

  // normal A: the flow field vanishes, steady algebraic soliton
  cmat A = cmat::Zero(2, 2);
  A(0, 0) = 1.0;
  A(1, 1) = 2.0;
  const AlgebraicFit s = algebraic_soliton_fit(make_almost_abelian(A));
  CHECK(std::abs(s.lambda) < 1e-14);
  CHECK(s.residual < 1e-14);

  const AlgebraicFit f = algebraic_soliton_fit(filiform4());
  CHECK(f.lambda == Catch::Approx(-0.5));
  CHECK(f.residual == Catch::Approx(std::sqrt(0.5)));
}

TEST_CASE("semi-algebraic soliton fit", "[curvature]") {
  // heisenberg solves P = lambda id + Herm(D) with lambda = -1, Herm(D) = diag(1,1,2)
  const SemiAlgebraicFit h = semialgebraic_soliton_fit(heisenberg3());
  CHECK(h.lambda == Catch::Approx(-1.0));
  CHECK(h.residual < 1e-12);
  CHECK(h.derivation_residual < 1e-12);
  const cmat herm = 0.5 * (h.D + h.D.adjoint());
  cmat He = cmat::Identity(3, 3);
  He(2, 2) = 2.0;
  CHECK((herm - He).norm() < 1e-10);
  // the fitted derivation closes the GIT identity
  CHECK(git_soliton_identity_residual(heisenberg3(), h.D) < 1e-10);

  const SemiAlgebraicFit z = semialgebraic_soliton_fit(Bracket(3));
  CHECK(std::abs(z.lambda) < 1e-14);
  CHECK(z.residual < 1e-14);

  // steady: A normal
  cmat A = cmat::Zero(2, 2);
  A(0, 0) = 1.0;
  A(1, 1) = 2.0;
  const SemiAlgebraicFit s = semialgebraic_soliton_fit(make_almost_abelian(A));
  CHECK(std::abs(s.lambda) < 1e-12);
  CHECK(s.residual < 1e-12);

  // expanding: A nilpotent
  const SemiAlgebraicFit e = semialgebraic_soliton_fit(make_almost_abelian(matrix_e12()));
  CHECK(e.lambda == Catch::Approx(-1.0));
  CHECK(e.residual < 1e-12);
  CHECK(e.adjoint_residual < 1e-12);

  // jordan block admits no soliton: residual stays bounded away from zero
  const SemiAlgebraicFit j = semialgebraic_soliton_fit(make_almost_abelian(matrix_jordan2()));
  CHECK(j.residual > 0.5);
}
