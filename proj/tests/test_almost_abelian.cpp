#include <catch2/catch_amalgamated.hpp>

#include <hcf/almost_abelian.hpp>
#include <hcf/examples.hpp>

using namespace hcf;

namespace {

cmat conjugated(const cmat& B, unsigned seed) {
  rng_t rng(seed);
  const cmat U = random_unitary(static_cast<int>(B.rows()), rng);
  return U * B * U.adjoint();
}

}  // namespace

TEST_CASE("matrix flow vector field", "[aa]") {
  CHECK((matrix_flow_rhs(matrix_e12()) + matrix_e12()).norm() == 0.0);
  // normal matrices commute with their adjoint: exact fixed points
  cmat D = cmat::Zero(2, 2);
  D(0, 0) = cxd(0, 1);
  D(1, 1) = 3.0;
  CHECK(matrix_flow_rhs(D).norm() == 0.0);
  CHECK(normality_defect(D) == 0.0);
  CHECK(normality_defect(matrix_e12()) == Catch::Approx(std::sqrt(2.0)));
  CHECK(normality_defect(matrix_jordan2()) == Catch::Approx(std::sqrt(2.0)));
}

TEST_CASE("trace powers", "[aa]") {
  const auto p = trace_powers(matrix_diag12());
  REQUIRE(p.size() == 2);
  CHECK(p[0] == cxd(3, 0));
  CHECK(p[1] == cxd(5, 0));
  CHECK(trace_power_drift(matrix_diag12(), p) == 0.0);
}

TEST_CASE("matrix flow on e12: closed form", "[aa]") {
  // rank-one nilpotent reduces to c' = -c^3: A(t) = E12 / sqrt(1+2t)
  FlowConfig cfg;
  cfg.t_end = 4.5;
  cfg.record_stride = 0.25;
  cfg.stop_at_fixed_point = false;
  const auto r = integrate_matrix_flow(matrix_e12(), cfg);
  REQUIRE(r.trace.completed);
  for (std::size_t i = 0; i < r.trace.samples.size(); ++i) {
    const auto& s = r.trace.samples[i];
    const cmat exact = matrix_e12() / std::sqrt(1.0 + 2.0 * s.t);
    CHECK((r.trace.states[i] - exact).norm() < 1e-8);
  }
  CHECK(r.trace.samples.back().norm_sq == Catch::Approx(0.1).margin(1e-9));

  CHECK_THROWS_AS(integrate_matrix_flow(cmat::Zero(2, 3), cfg),
                  std::invalid_argument);
}

TEST_CASE("matrix flow conservation and monotonicity", "[aa]") {
  FlowConfig cfg;
  cfg.t_end = 50.0;
  cfg.record_stride = 1.0;
  cfg.tol = 1e-12;
  cfg.stop_at_fixed_point = false;
  rng_t rng(7);
  cmat A0 = random_matrix(4, rng);
  for (const cmat& start : {matrix_jordan2(), A0}) {
    const auto r = integrate_matrix_flow(start, cfg);
    REQUIRE(r.trace.completed);
    double prev = r.trace.samples.front().norm_sq;
    for (const auto& s : r.trace.samples) {
      CHECK(s.trace_power_drift < 1e-10);
      CHECK(s.norm_sq <= prev + 1e-12);
      prev = s.norm_sq;
    }
  }

  // normal starting point: the field vanishes identically
  cmat D = cmat::Zero(3, 3);
  D(0, 0) = 1.0;
  D(1, 1) = cxd(0, -2);
  D(2, 2) = 0.5;
  cfg.t_end = 2.0;
  const auto rn = integrate_matrix_flow(D, cfg);
  for (std::size_t i = 0; i < rn.trace.samples.size(); ++i) {
    CHECK(rn.trace.samples[i].field_norm == 0.0);
    CHECK((rn.trace.states[i] - D).norm() == 0.0);
  }
}

TEST_CASE("matrix flow omega limit of jordan2", "[aa]") {
  // |A_t - id| decays like (2t)^(-1/2); the normality defect one power
  // faster. Past t ~ 1e8 the conserved-trace error (~1e-9) floors the
  // distance at ~sqrt(drift), so the law is checked where it is clean.
  FlowConfig cfg;
  cfg.stop_at_fixed_point = false;
  cfg.t_end = 1e4;
  cfg.record_stride = 500.0;
  const auto r = integrate_matrix_flow(matrix_jordan2(), cfg);
  REQUIRE(r.trace.completed);
  const cmat id = cmat::Identity(2, 2);
  CHECK((r.final - id).norm() == Catch::Approx(7.07e-3).epsilon(0.01));
  CHECK(r.trace.samples.back().normality_defect < 1e-4);

  cfg.t_end = 1e6;
  cfg.record_stride = 1e5;
  const auto rl = integrate_matrix_flow(matrix_jordan2(), cfg);
  REQUIRE(rl.trace.completed);
  const double dev = (rl.final - id).norm();
  CHECK(dev < 1e-3);
  CHECK(dev * std::sqrt(2.0 * 1e6) == Catch::Approx(1.0).margin(0.01));
  CHECK(rl.trace.samples.back().trace_power_drift < 1e-8);
}

TEST_CASE("matrix classification", "[aa]") {
  CHECK(classify_matrix(cmat::Zero(3, 3)).kind == MatrixKind::Zero);
  CHECK(classify_matrix(cmat(1e-12 * matrix_e12())).kind == MatrixKind::Zero);
  CHECK(classify_matrix(matrix_e12()).kind == MatrixKind::Nilpotent);
  CHECK(classify_matrix(cmat(10.0 * matrix_e12())).kind == MatrixKind::Nilpotent);
  CHECK(classify_matrix(matrix_diag12()).kind == MatrixKind::Semisimple);
  CHECK(classify_matrix(cmat(2.0 * cmat::Identity(2, 2))).kind ==
        MatrixKind::Semisimple);

  const auto j = classify_matrix(matrix_jordan2());
  CHECK(j.kind == MatrixKind::Neither);
  CHECK_FALSE(j.conditioning_warning);

  // diagonal with a gap below the cluster radius is still semisimple
  cmat close = cmat::Zero(2, 2);
  close(0, 0) = 1.0;
  close(1, 1) = 1.0 + 3e-9;
  const auto c = classify_matrix(close);
  CHECK(c.kind == MatrixKind::Semisimple);
  CHECK_FALSE(c.conditioning_warning);

  // hidden defective structure: eigenvalues split ~eps^(1/3) past the cluster
  // radius, caught by the eigenvector conditioning net
  cmat nj = cmat::Identity(3, 3);
  nj(0, 1) = 1.0;
  nj(1, 2) = 1.0;
  for (unsigned seed : {1u, 2u, 3u}) {
    const auto h = classify_matrix(conjugated(nj, seed));
    CHECK(h.kind == MatrixKind::Neither);
    CHECK(h.conditioning_warning);
  }
  for (unsigned seed : {4u, 5u, 6u}) {
    rng_t rng(seed);
    CHECK(classify_matrix(random_normal_matrix(4, rng)).kind ==
          MatrixKind::Semisimple);
  }
}

TEST_CASE("jordan type", "[aa]") {
  CHECK(jordan_type_of_nilpotent(cmat::Zero(2, 2)) == std::vector<int>{2});
  CHECK(jordan_type_of_nilpotent(matrix_e12()) == std::vector<int>({1, 1}));
  cmat chain = cmat::Zero(3, 3);
  chain(0, 1) = std::sqrt(2.0);
  chain(1, 2) = 1.0;
  CHECK(jordan_type_of_nilpotent(chain) == std::vector<int>({1, 1, 1}));
  CHECK_THROWS_AS(jordan_type_of_nilpotent(matrix_diag12()),
                  std::invalid_argument);

  const std::vector<int> jt{3, 2, 2, 1};
  CHECK(jordan_type_of_nilpotent(nilpotent_soliton_canonical(jt)) == jt);
}

TEST_CASE("canonical nilpotent soliton", "[aa]") {
  CHECK((nilpotent_soliton_canonical({1, 1}) - matrix_e12()).norm() == 0.0);
  const cmat b3 = nilpotent_soliton_canonical({1, 1, 1});
  CHECK(b3(0, 1) == cxd(std::sqrt(2.0), 0));
  CHECK(b3(1, 2) == cxd(1, 0));
  const cmat b21 = nilpotent_soliton_canonical({2, 1});
  CHECK(b21(0, 2) == cxd(1, 0));
  CHECK(b21.squaredNorm() == 1.0);
  CHECK_THROWS_AS(nilpotent_soliton_canonical({1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(nilpotent_soliton_canonical({}), std::invalid_argument);

  CHECK(verify_nilpotent_soliton(matrix_e12()).flow_residual == 0.0);
  const auto big = verify_nilpotent_soliton(nilpotent_soliton_canonical({3, 2, 2, 1}));
  CHECK(big.flow_residual < 1e-12);
  CHECK(big.chain_residual < 1e-12);
  CHECK(big.cross_residual < 1e-12);
  CHECK(big.jordan_type == std::vector<int>({3, 2, 2, 1}));

  // wrong scale: B [B, B^*] = -8 E12 instead of -B
  const auto off = verify_nilpotent_soliton(cmat(2.0 * matrix_e12()));
  CHECK(off.flow_residual == Catch::Approx(6.0));
}

TEST_CASE("soliton decision", "[aa]") {
  const auto sd = soliton_decision(matrix_diag12());
  CHECK(sd.exists);
  CHECK(sd.type == SolitonType::Steady);
  CHECK(sd.lambda == 0.0);
  CHECK((sd.representative - matrix_diag12()).norm() < 1e-13);
  CHECK(sd.residual == 0.0);

  // rotation: steady representative is the sorted diagonal of the spectrum
  cmat rot = cmat::Zero(2, 2);
  rot(0, 1) = 1.0;
  rot(1, 0) = -1.0;
  const auto sr = soliton_decision(rot);
  CHECK(sr.exists);
  CHECK(sr.type == SolitonType::Steady);
  CHECK(std::abs(sr.representative(0, 0) - cxd(0, -1)) < 1e-12);
  CHECK(std::abs(sr.representative(1, 1) - cxd(0, 1)) < 1e-12);
  CHECK(sr.residual < 1e-14);

  const auto se = soliton_decision(matrix_e12());
  CHECK(se.exists);
  CHECK(se.type == SolitonType::Expanding);
  CHECK(se.lambda == -1.0);
  CHECK(se.jordan_type == std::vector<int>({1, 1}));
  CHECK((se.representative - matrix_e12()).norm() == 0.0);
  CHECK(se.residual == 0.0);

  const auto sj = soliton_decision(matrix_jordan2());
  CHECK_FALSE(sj.exists);
  CHECK(sj.type == SolitonType::None);
  CHECK(sj.kind == MatrixKind::Neither);

  const auto sz = soliton_decision(cmat::Zero(2, 2));
  CHECK(sz.exists);
  CHECK(sz.type == SolitonType::Steady);
  CHECK(sz.representative.norm() == 0.0);
}

TEST_CASE("canonical compare", "[aa]") {
  const cmat b21 = nilpotent_soliton_canonical({2, 1});
  const cmat b111 = nilpotent_soliton_canonical({1, 1, 1});
  CHECK(canonical_compare(b21, conjugated(b21, 11)));
  CHECK(canonical_compare(b111, conjugated(b111, 12)));
  CHECK_FALSE(canonical_compare(b21, b111));
  CHECK_FALSE(canonical_compare(conjugated(b21, 13), b111));
  CHECK_THROWS_AS(canonical_compare(cmat(2.0 * b21), b21), std::invalid_argument);
}
