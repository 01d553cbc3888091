#pragma once

// Built-in example library plus seeded random generators. Random structure
// constants are complex Gaussian under a two-range nilpotent-triangular mask
// (all of Lambda^2 of the first range maps into the second), which makes the
// Jacobi identity hold identically; the mandated residual gate stays as a
// belt-and-braces check. A random unitary change of basis densifies the
// constants without leaving the variety.

#include <hcf/io.hpp>

#include <random>

namespace hcf {

inline Bracket heisenberg3() {
  Bracket mu(3);
  mu.set_entry(0, 1, 2, 1.0);
  return mu;
}

inline Bracket filiform4() {
  Bracket mu(4);
  mu.set_entry(0, 1, 2, 1.0);
  mu.set_entry(0, 2, 3, 1.0);
  return mu;
}

inline Bracket sl2c() {
  // [h,e] = 2e, [h,f] = -2f, [e,f] = h in the order (h, e, f); semisimple,
  // the bracket flow blows up in finite time
  Bracket mu(3);
  mu.set_entry(0, 1, 1, 2.0);
  mu.set_entry(0, 2, 2, -2.0);
  mu.set_entry(1, 2, 0, 1.0);
  return mu;
}

inline cmat matrix_diag12() {
  cmat A = cmat::Zero(2, 2);
  A(0, 0) = 1.0;
  A(1, 1) = 2.0;
  return A;
}

inline cmat matrix_jordan2() {
  cmat A = cmat::Zero(2, 2);
  A(0, 0) = 1.0;
  A(0, 1) = 1.0;
  A(1, 1) = 1.0;
  return A;
}

inline cmat matrix_e12() {
  cmat A = cmat::Zero(2, 2);
  A(0, 1) = 1.0;
  return A;
}

inline std::vector<int> parse_jordan_type(const std::string& s) {
  std::vector<int> jt;
  std::istringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      const int d = std::stoi(tok, &used);
      if (used != tok.size() || d < 1) throw std::invalid_argument("");
      jt.push_back(d);
    } catch (const std::exception&) {
      throw IoError("malformed Jordan type component '" + tok + "'");
    }
  }
  if (jt.empty()) throw IoError("empty Jordan type");
  return jt;
}

/// Named matrix examples: diag12, jordan2, e12, zero2, canonical-d0,d1,...
inline cmat example_matrix(const std::string& name) {
  if (name == "diag12") return matrix_diag12();
  if (name == "jordan2") return matrix_jordan2();
  if (name == "e12") return matrix_e12();
  if (name == "zero2") return cmat::Zero(2, 2);
  if (name.rfind("canonical-", 0) == 0)
    return nilpotent_soliton_canonical(parse_jordan_type(name.substr(10)));
  throw IoError("unknown matrix example '" + name +
                "' (try diag12, jordan2, e12, zero2, canonical-d0,d1,...)");
}

/// Named bracket examples: abelianN, heisenberg3, filiform4, sl2c, aa-diag,
/// aa-jordan, aa-e12, aa-canonical-d0,d1,...
inline Bracket example_bracket(const std::string& name) {
  if (name == "heisenberg3") return heisenberg3();
  if (name == "filiform4") return filiform4();
  if (name == "sl2c") return sl2c();
  if (name.rfind("abelian", 0) == 0) {
    const std::string tail = name.substr(7);
    try {
      std::size_t used = 0;
      const int n = std::stoi(tail, &used);
      if (used != tail.size() || n < 2) throw std::invalid_argument("");
      return Bracket(n);
    } catch (const std::exception&) {
      throw IoError("malformed abelian example '" + name + "' (use e.g. abelian3)");
    }
  }
  if (name.rfind("aa-", 0) == 0)
    return make_almost_abelian(example_matrix(name.substr(3)));
  throw IoError("unknown bracket example '" + name +
                "' (try abelianN, heisenberg3, filiform4, sl2c, aa-diag12, "
                "aa-jordan2, aa-e12, aa-canonical-d0,d1,...)");
}

using rng_t = std::mt19937_64;

inline cxd gaussian(rng_t& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  const double re = d(rng);
  const double im = d(rng);
  return {re, im};
}

inline cmat random_matrix(int n, rng_t& rng, bool unit_norm = true) {
  cmat A(n, n);
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r) A(r, c) = gaussian(rng);
  if (unit_norm) A /= A.norm();
  return A;
}

inline cmat random_unitary(int n, rng_t& rng) {
  cmat G(n, n);
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r) G(r, c) = gaussian(rng);
  Eigen::HouseholderQR<cmat> qr(G);
  cmat Q = qr.householderQ();
  const cmat R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int c = 0; c < n; ++c) {
    const cxd d = R(c, c);
    Q.col(c) *= (std::abs(d) > 0 ? d / std::abs(d) : cxd(1, 0));
  }
  return Q;
}

inline cmat random_normal_matrix(int n, rng_t& rng, bool unit_norm = true) {
  const cmat U = random_unitary(n, rng);
  cmat D = cmat::Zero(n, n);
  for (int i = 0; i < n; ++i) D(i, i) = gaussian(rng);
  cmat A = U * D * U.adjoint();
  if (unit_norm) A /= A.norm();
  return A;
}

/// Random two-step nilpotent bracket, |mu| = 1, Jacobi exact. Needs n >= 3.
inline Bracket random_nilpotent_bracket(int n, rng_t& rng,
                                        double jacobi_gate = 1e-8) {
  if (n < 3)
    throw std::invalid_argument("random_nilpotent_bracket: need n >= 3");
  std::uniform_int_distribution<int> split(2, n - 1);
  for (int attempt = 0; attempt < 64; ++attempt) {
    const int n1 = split(rng);
    Bracket mu(n);
    for (int i = 0; i < n1; ++i)
      for (int j = i + 1; j < n1; ++j)
        for (int k = n1; k < n; ++k) mu.set_entry(i, j, k, gaussian(rng));
    const double nm = mu.norm();
    if (nm < 1e-8) continue;
    mu.coeffs() /= nm;
    mu = act_gl(random_unitary(n, rng), mu);
    if (jacobi_residual(mu) <= jacobi_gate * mu.norm_sq()) return mu;
  }
  throw std::runtime_error("random_nilpotent_bracket: sampling failed");
}

}  // namespace hcf
