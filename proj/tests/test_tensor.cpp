#include <catch2/catch_amalgamated.hpp>

#include <hcf/examples.hpp>
#include <hcf/linalg.hpp>

using namespace hcf;

namespace {

cvec unit(int n, int i) {
  cvec v = cvec::Zero(n);
  v(i) = 1.0;
  return v;
}

}  // namespace

TEST_CASE("wedge index bookkeeping", "[tensor]") {
  CHECK(wedge_dim(2) == 1);
  CHECK(wedge_dim(3) == 3);
  CHECK(wedge_dim(5) == 10);

  // lexicographic order for n = 4: 01 02 03 12 13 23
  CHECK(wedge_index(4, 0, 1) == 0);
  CHECK(wedge_index(4, 1, 3) == 4);
  CHECK(wedge_index(4, 2, 3) == 5);

  for (int n : {2, 3, 4, 5, 7}) {
    for (int k = 0; k < wedge_dim(n); ++k) {
      auto [i, j] = wedge_pair(n, k);
      CHECK(i < j);
      CHECK(wedge_index(n, i, j) == k);
    }
  }
}

TEST_CASE("wedge coordinates of decomposables", "[tensor]") {
  const int n = 4;
  cvec c = wedge_coords(unit(n, 1), unit(n, 3));
  CHECK(c(wedge_index(n, 1, 3)) == cxd(1.0));
  CHECK(c.norm() == 1.0);

  rng_t rng(1);
  cvec v(n), w(n);
  for (int i = 0; i < n; ++i) {
    v(i) = gaussian(rng);
    w(i) = gaussian(rng);
  }
  CHECK((wedge_coords(v, w) + wedge_coords(w, v)).norm() == 0.0);
  CHECK(wedge_coords(v, v).norm() == 0.0);
}

TEST_CASE("wedge endomorphism on decomposables", "[tensor]") {
  const int n = 4;
  rng_t rng(2);
  const cmat A = random_matrix(n, rng, false);
  const cmat B = random_matrix(n, rng, false);
  cvec v(n), w(n);
  for (int i = 0; i < n; ++i) {
    v(i) = gaussian(rng);
    w(i) = gaussian(rng);
  }
  // (A^B)(v^w) = Av^Bw + Bv^Aw
  const cvec lhs = wedge_endo(A, B) * wedge_coords(v, w);
  const cvec rhs = wedge_coords(A * v, B * w) + wedge_coords(B * v, A * w);
  CHECK((lhs - rhs).norm() < 1e-13);

  CHECK((wedge_endo(cmat::Zero(n, n), cmat::Zero(n, n))).norm() == 0.0);
}

TEST_CASE("id wedge values", "[tensor]") {
  // id^id = 2 id on Lambda^2
  const cmat two = id_wedge(cmat::Identity(2, 2));
  CHECK((two - 2.0 * cmat::Identity(1, 1)).norm() == 0.0);

  // id^diag(1,2,3) = diag(3,4,5) in the order 12, 13, 23
  cmat D = cmat::Zero(3, 3);
  D(0, 0) = 1.0;
  D(1, 1) = 2.0;
  D(2, 2) = 3.0;
  cmat expect = cmat::Zero(3, 3);
  expect(0, 0) = 3.0;
  expect(1, 1) = 4.0;
  expect(2, 2) = 5.0;
  CHECK((id_wedge(D) - expect).norm() == 0.0);
}

TEST_CASE("lambda2 is functorial", "[tensor]") {
  const int n = 4;
  rng_t rng(3);
  const cmat g = random_matrix(n, rng, false);
  const cmat h = random_matrix(n, rng, false);
  CHECK((lambda2(cmat(g * h)) - lambda2(g) * lambda2(h)).norm() < 1e-12);
  CHECK((lambda2(cmat::Identity(n, n)) - cmat::Identity(wedge_dim(n), wedge_dim(n)))
            .norm() == 0.0);

  // unitary h induces a unitary on Lambda^2
  const cmat u = lambda2(random_unitary(n, rng));
  CHECK((u.adjoint() * u - cmat::Identity(u.cols(), u.cols())).norm() < 1e-13);
}

TEST_CASE("adjoints distribute over the wedge", "[tensor]") {
  const int n = 4;
  rng_t rng(4);
  const cmat A = random_matrix(n, rng, false);
  const cmat B = random_matrix(n, rng, false);
  CHECK((wedge_endo(A, B).adjoint() -
         wedge_endo(cmat(A.adjoint()), cmat(B.adjoint())))
            .norm() < 1e-13);

  const cmat G = random_matrix(n, rng, false);
  const cmat H = 0.5 * (G + G.adjoint());
  CHECK(hermitian_defect(H) < 1e-15);
  // [[0,1],[0,0]]: A - A* = [[0,1],[-1,0]]
  cmat N = cmat::Zero(2, 2);
  N(0, 1) = 1.0;
  CHECK(hermitian_defect(N) == Catch::Approx(std::sqrt(2.0)));
}

TEST_CASE("kernel and column space", "[tensor]") {
  CHECK(kernel_basis(cmat::Identity(3, 3)).cols() == 0);

  const cmat K0 = kernel_basis(cmat::Zero(3, 3));
  CHECK(K0.cols() == 3);
  CHECK((K0.adjoint() * K0 - cmat::Identity(3, 3)).norm() < 1e-14);

  // singular values 1 and 1e-14: one kernel direction at rel_tol 1e-10
  cmat D = cmat::Zero(2, 2);
  D(0, 0) = 1.0;
  D(1, 1) = 1e-14;
  CHECK(kernel_basis(D, 1e-10).cols() == 1);

  // rank-1 map: kernel dim 2, orthonormal, annihilated
  cmat R = cmat::Zero(3, 3);
  R(0, 0) = 1.0;
  R(0, 1) = 2.0;
  R(0, 2) = cxd(0.0, 1.0);
  const cmat K = kernel_basis(R);
  REQUIRE(K.cols() == 2);
  CHECK((R * K).norm() < 1e-14);
  CHECK((K.adjoint() * K - cmat::Identity(2, 2)).norm() < 1e-14);
  CHECK(column_space(R).cols() == 1);

  // external-scale variant treats numerically zero blocks as zero
  cmat tiny = 1e-16 * R;
  CHECK(kernel_basis_scaled(tiny, kRankRelTol, 1.0).cols() == 3);
  CHECK(column_space_scaled(tiny, kRankRelTol, 1.0).cols() == 0);
}

TEST_CASE("subspace angle", "[tensor]") {
  const int n = 3;
  cmat U(n, 1), V(n, 1);
  U.col(0) = unit(n, 0);
  V.col(0) = (unit(n, 0) + unit(n, 1)) / std::sqrt(2.0);
  CHECK(subspace_angle(U, V) == Catch::Approx(std::acos(1.0 / std::sqrt(2.0))));
  CHECK(subspace_angle(U, U) < 1e-8);

  // invariant under unitary change of basis within the subspaces
  rng_t rng(5);
  cmat W(n, 2);
  W.col(0) = unit(n, 0);
  W.col(1) = unit(n, 1);
  const cmat q = random_unitary(2, rng);
  CHECK(subspace_angle(W, cmat(W * q)) < 1e-8);
}
