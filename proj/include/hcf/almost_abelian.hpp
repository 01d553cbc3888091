#pragma once

// Almost-abelian reduction: on C Z_0 + C^n the bracket flow collapses to the
// double-bracket matrix flow A' = A [A, A^*], and solitons are classified by
// the matrix A alone (semisimple -> steady, nilpotent -> expanding with an
// explicit canonical form, otherwise none).

#include <hcf/flow.hpp>

#include <algorithm>
#include <limits>
#include <numeric>

namespace hcf {

inline cmat matrix_flow_rhs(const cmat& A) {
  return cmat(A * (A * A.adjoint() - A.adjoint() * A));
}

inline double normality_defect(const cmat& A) {
  return (A * A.adjoint() - A.adjoint() * A).norm();
}

/// tr A^m for m = 1..n; conserved along the matrix flow.
inline std::vector<cxd> trace_powers(const cmat& A) {
  const int n = static_cast<int>(A.rows());
  std::vector<cxd> out(n);
  cmat P = A;
  for (int m = 1; m <= n; ++m) {
    out[m - 1] = P.trace();
    if (m < n) P *= A;
  }
  return out;
}

inline double trace_power_drift(const cmat& A, const std::vector<cxd>& ref) {
  const auto now = trace_powers(A);
  double d = 0;
  for (std::size_t m = 0; m < ref.size(); ++m)
    d = std::max(d, std::abs(now[m] - ref[m]));
  return d;
}

struct MatrixSample {
  double t = 0;
  double norm_sq = 0;
  double field_norm = 0;
  double normality_defect = 0;
  double trace_power_drift = 0;
};

struct MatrixTrace {
  std::vector<MatrixSample> samples;
  std::vector<cmat> states;
  bool completed = false;
  bool aborted = false;
  std::string abort_reason;
  std::optional<double> fixed_point_time;
  double final_t = 0;
};

struct MatrixFlowResult {
  MatrixTrace trace;
  cmat final;
};

/// Double-bracket matrix flow A' = A [A, A^*].
inline MatrixFlowResult integrate_matrix_flow(const cmat& A0,
                                              const FlowConfig& cfg) {
  if (A0.rows() != A0.cols())
    throw std::invalid_argument("integrate_matrix_flow: A0 must be square");
  const auto ref = trace_powers(A0);
  MatrixFlowResult out;
  MatrixTrace& tr = out.trace;
  auto cr = detail::integrate_core(
      A0, cfg, [](const cmat& A) { return matrix_flow_rhs(A); }, [](cmat&) {},
      [&](double t, const cmat& A, double field) {
        MatrixSample s;
        s.t = t;
        s.norm_sq = A.squaredNorm();
        s.field_norm = field;
        s.normality_defect = normality_defect(A);
        s.trace_power_drift = trace_power_drift(A, ref);
        tr.samples.push_back(s);
        tr.states.push_back(A);
      });
  tr.completed = cr.completed;
  tr.aborted = cr.aborted;
  tr.abort_reason = cr.abort_reason;
  tr.fixed_point_time = cr.fixed_point_time;
  tr.final_t = cr.final_t;
  out.final = cr.final_state.size() ? cr.final_state : A0;
  return out;
}

enum class MatrixKind { Zero, Nilpotent, Semisimple, Neither };

struct MatrixClass {
  MatrixKind kind = MatrixKind::Neither;
  bool conditioning_warning = false;  // eigenvalue clusters too tight to resolve
};

/// Classifies A as zero / nilpotent / semisimple / neither. Semisimplicity is
/// decided from eigenvalue clusters (radius 1e-8 |A|): each cluster must have
/// matching geometric multiplicity. Clusters of distinct but unresolvable
/// eigenvalues trigger the conservative verdict with a warning.
inline MatrixClass classify_matrix(const cmat& A, double rel_tol = kRankRelTol) {
  MatrixClass out;
  const int n = static_cast<int>(A.rows());
  const double scale = A.norm();
  if (scale <= rel_tol) {
    out.kind = MatrixKind::Zero;
    return out;
  }
  // nilpotency: A^n ~ 0 at the scale |A|_2^n
  const double op = A.operatorNorm();
  cmat An = A;
  for (int m = 1; m < n; ++m) An = An * A;
  if (An.norm() <= rel_tol * std::pow(op, n) * n) {
    out.kind = MatrixKind::Nilpotent;
    return out;
  }
  Eigen::ComplexEigenSolver<cmat> es(A, true);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const cxd x = es.eigenvalues()(a), y = es.eigenvalues()(b);
    return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
  });
  std::vector<cxd> ev(n);
  for (int q = 0; q < n; ++q) ev[q] = es.eigenvalues()(order[q]);
  // Clusters of radius 1e-8 |A| are treated as one eigenvalue. A defective
  // eigenvalue is typically computed as a cluster split by ~sqrt(eps)|A|,
  // which may straddle that radius, so clusters closer than the ambiguity
  // radius are merged for the multiplicity comparison and flagged.
  const double cluster_tol = 1e-8 * scale;
  const double ambiguity_tol = 1e-7 * scale;
  bool semisimple = true;
  std::vector<int> singleton_cols;
  std::size_t i = 0;
  while (i < ev.size()) {
    std::size_t j = i + 1;
    bool ambiguous = false;
    while (j < ev.size()) {
      const double gap = std::abs(ev[j] - ev[j - 1]);
      if (gap > ambiguity_tol) break;
      if (gap > cluster_tol) ambiguous = true;
      ++j;
    }
    const int alg = static_cast<int>(j - i);
    if (alg == 1) {
      singleton_cols.push_back(order[i]);
    } else {
      cxd mean = 0;
      for (std::size_t q = i; q < j; ++q) mean += ev[q];
      mean /= static_cast<double>(alg);
      double radius = 0;
      for (std::size_t q = i; q < j; ++q)
        radius = std::max(radius, std::abs(ev[q] - mean));
      // Kernel cutoff must sit above the cluster radius: a semisimple matrix
      // with eigenvalues split across the cluster leaves singular values of
      // exactly that size, while a defective one leaves ~radius^2.
      const double kcut = std::max(rel_tol * scale, 4.0 * radius);
      const cmat shifted = A - mean * cmat::Identity(n, n);
      const int geo =
          static_cast<int>(kernel_basis_scaled(shifted, kcut, 1.0).cols());
      if (geo < alg) {
        semisimple = false;
        // structure below the split radius decided the verdict
        if (radius > 64 * std::numeric_limits<double>::epsilon() * scale)
          out.conditioning_warning = true;
      }
      if (ambiguous) out.conditioning_warning = true;
    }
    i = j;
  }
  if (semisimple && singleton_cols.size() > 1) {
    // A defective eigenvalue computed as several well-separated simple ones
    // (split ~eps^(1/m)) slips past the clustering, but its eigenvectors are
    // nearly parallel: the unit-column eigenvector matrix over the simple
    // eigenvalues has smallest singular value ~eps^((m-1)/m) <= 1.5e-8.
    // Eigenvectors of multiple eigenvalues are excluded; the triangular solve
    // behind them degenerates even for semisimple input.
    cmat vs(n, singleton_cols.size());
    for (std::size_t c = 0; c < singleton_cols.size(); ++c) {
      const cvec v = es.eigenvectors().col(singleton_cols[c]);
      vs.col(c) = v / v.norm();
    }
    const double smin =
        Eigen::JacobiSVD<cmat>(vs).singularValues().minCoeff();
    if (smin < 1e-7) {
      semisimple = false;
      out.conditioning_warning = true;
    }
  }
  // conservative verdict: never certify semisimplicity from an ambiguous cluster
  out.kind = (semisimple && !out.conditioning_warning) ? MatrixKind::Semisimple
                                                       : MatrixKind::Neither;
  return out;
}

/// Kernel-filtration dimensions d_i = dim ker A^{i+1} - dim ker A^i of a
/// nilpotent matrix; weakly decreasing, summing to n. Throws on non-nilpotent
/// input.
inline std::vector<int> jordan_type_of_nilpotent(const cmat& A,
                                                 double rel_tol = kRankRelTol) {
  const int n = static_cast<int>(A.rows());
  if (classify_matrix(A, rel_tol).kind == MatrixKind::Zero)
    return std::vector<int>{n};
  if (classify_matrix(A, rel_tol).kind != MatrixKind::Nilpotent)
    throw std::invalid_argument("jordan_type_of_nilpotent: matrix is not nilpotent");
  const double op = A.operatorNorm();
  std::vector<int> kdims{0};
  cmat P = cmat::Identity(n, n);
  for (int i = 1; i <= n; ++i) {
    P = P * A;
    const int kd = static_cast<int>(
        kernel_basis_scaled(P, rel_tol, std::pow(op, i)).cols());
    kdims.push_back(kd);
    if (kd == n) break;
  }
  std::vector<int> jt;
  for (std::size_t i = 1; i < kdims.size(); ++i) jt.push_back(kdims[i] - kdims[i - 1]);
  return jt;
}

/// Canonical nilpotent soliton with the given kernel-filtration dimensions
/// (d_0 >= d_1 >= ... >= 1): block superdiagonal with entries
/// sigma_ij = sqrt(s_ij), where s along each chain decrements by exactly 1
/// down to 1 at the chain end. Satisfies B [B, B^*] = -B.
inline cmat nilpotent_soliton_canonical(const std::vector<int>& jt) {
  const int k = static_cast<int>(jt.size());
  if (k == 0) throw std::invalid_argument("nilpotent_soliton_canonical: empty type");
  for (int i = 0; i < k; ++i) {
    if (jt[i] < 1 || (i > 0 && jt[i] > jt[i - 1]))
      throw std::invalid_argument(
          "nilpotent_soliton_canonical: dimensions must be positive and weakly "
          "decreasing");
  }
  const int n = std::accumulate(jt.begin(), jt.end(), 0);
  std::vector<int> off(k + 1, 0);
  for (int i = 0; i < k; ++i) off[i + 1] = off[i] + jt[i];
  // sigma^2 is integer-valued; carry it exactly and take one square root
  std::vector<std::vector<double>> s2(k);
  for (int i = k - 1; i >= 1; --i) {
    s2[i].assign(jt[i], 1.0);
    if (i + 1 < k)
      for (int j = 0; j < jt[i + 1]; ++j) s2[i][j] = 1.0 + s2[i + 1][j];
  }
  cmat B = cmat::Zero(n, n);
  for (int i = 1; i < k; ++i)
    for (int j = 0; j < jt[i]; ++j)
      B(off[i - 1] + j, off[i] + j) = std::sqrt(s2[i][j]);
  return B;
}

struct NilpotentSolitonCheck {
  double flow_residual = 0;   // |B [B, B^*] + B|
  double chain_residual = 0;  // max_i |E_i^* E_i - E_{i+1} E_{i+1}^* - id|
  double cross_residual = 0;  // |B1 B2^*| and the init-decomposition relation
  std::vector<int> jordan_type;
};

/// Verifies the defining relations of a nilpotent soliton in matrix form:
/// the expanding fixed-point equation, the chain relations of the kernel
/// filtration blocks, and the kernel/complement decomposition identities.
inline NilpotentSolitonCheck verify_nilpotent_soliton(const cmat& B,
                                                      double rel_tol = kRankRelTol) {
  const int n = static_cast<int>(B.rows());
  NilpotentSolitonCheck out;
  out.flow_residual = (B * (B * B.adjoint() - B.adjoint() * B) + B).norm();
  out.jordan_type = jordan_type_of_nilpotent(B, rel_tol);
  const int k = static_cast<int>(out.jordan_type.size());

  // orthonormal bases of V_i = ker B^{i+1} (-) ker B^i
  const double op = B.operatorNorm();
  std::vector<cmat> V(k);
  cmat prev(n, 0);
  cmat P = cmat::Identity(n, n);
  for (int i = 0; i < k; ++i) {
    P = P * B;
    cmat ker = kernel_basis_scaled(P, rel_tol, std::pow(op, i + 1));
    cmat proj = ker - prev * (prev.adjoint() * ker);
    V[i] = column_space(proj, rel_tol);
    prev = column_space(ker, rel_tol);
  }
  for (int i = 1; i < k; ++i) {
    const cmat Ei = V[i - 1].adjoint() * B * V[i];
    cmat rhsn = cmat::Identity(out.jordan_type[i], out.jordan_type[i]);
    cmat lhs = Ei.adjoint() * Ei;
    if (i + 1 < k) {
      const cmat En = V[i].adjoint() * B * V[i + 1];
      lhs -= En * En.adjoint();
    }
    out.chain_residual = std::max(out.chain_residual, (lhs - rhsn).norm());
  }
  // decomposition against V = ker B: B1 = P_V B, B2 = (1 - P_V) B
  const cmat Pv = V.empty() ? cmat::Zero(n, n) : cmat(V[0] * V[0].adjoint());
  const cmat Ic = cmat::Identity(n, n) - Pv;
  const cmat B1 = Pv * B;
  const cmat B2 = Ic * B;
  const double c1 = (B1 * B2.adjoint()).norm();
  const double c2 =
      (B1.adjoint() * B1 - (B2 * B2.adjoint() - B2.adjoint() * B2) - Ic).norm();
  out.cross_residual = std::max(c1, c2);
  return out;
}

enum class SolitonType { None, Steady, Expanding };

struct SolitonReport {
  MatrixKind kind = MatrixKind::Neither;
  bool exists = false;
  SolitonType type = SolitonType::None;
  double lambda = 0;
  double residual = 0;  // |R [R, R^*] - lambda R| of the representative
  cmat representative;
  std::vector<int> jordan_type;  // nonempty only in the nilpotent case
  bool conditioning_warning = false;
};

/// Soliton existence and construction for the almost-abelian bracket mu_A:
/// a soliton exists iff A is semisimple (steady, normal representative with
/// the same spectrum) or nilpotent (expanding, canonical form at lambda = -1).
inline SolitonReport soliton_decision(const cmat& A, double rel_tol = kRankRelTol) {
  const int n = static_cast<int>(A.rows());
  SolitonReport rep;
  const MatrixClass cls = classify_matrix(A, rel_tol);
  rep.kind = cls.kind;
  rep.conditioning_warning = cls.conditioning_warning;
  switch (cls.kind) {
    case MatrixKind::Zero:
      rep.exists = true;
      rep.type = SolitonType::Steady;
      rep.lambda = 0;
      rep.representative = cmat::Zero(n, n);
      rep.residual = 0;
      break;
    case MatrixKind::Semisimple: {
      rep.exists = true;
      rep.type = SolitonType::Steady;
      rep.lambda = 0;
      Eigen::ComplexEigenSolver<cmat> es(A, false);
      std::vector<cxd> ev(es.eigenvalues().data(), es.eigenvalues().data() + n);
      std::sort(ev.begin(), ev.end(), [](cxd a, cxd b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
      });
      rep.representative = cmat::Zero(n, n);
      for (int i = 0; i < n; ++i) rep.representative(i, i) = ev[i];
      rep.residual = matrix_flow_rhs(rep.representative).norm();
      break;
    }
    case MatrixKind::Nilpotent: {
      rep.exists = true;
      rep.type = SolitonType::Expanding;
      rep.lambda = -1;
      rep.jordan_type = jordan_type_of_nilpotent(A, rel_tol);
      rep.representative = nilpotent_soliton_canonical(rep.jordan_type);
      rep.residual = (rep.representative *
                          (rep.representative * rep.representative.adjoint() -
                           rep.representative.adjoint() * rep.representative) +
                      rep.representative)
                         .norm();
      break;
    }
    case MatrixKind::Neither:
      rep.exists = false;
      rep.type = SolitonType::None;
      break;
  }
  return rep;
}

/// True iff two verified nilpotent solitons are unitarily equivalent, which
/// for canonical-form solitons reduces to equal Jordan types. Throws if either
/// input fails the soliton equation at the acceptance threshold.
inline bool canonical_compare(const cmat& B1, const cmat& B2,
                              double rel_tol = kRankRelTol) {
  const auto check = [rel_tol](const cmat& B, const char* which) {
    const double scale = std::max(B.norm(), std::pow(B.norm(), 3));
    const auto v = verify_nilpotent_soliton(B, rel_tol);
    if (v.flow_residual > 1e-9 * std::max(scale, 1e-30))
      throw std::invalid_argument(std::string("canonical_compare: ") + which +
                                  " input does not satisfy the soliton equation");
    return v.jordan_type;
  };
  return check(B1, "first") == check(B2, "second");
}

}  // namespace hcf
