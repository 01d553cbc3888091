#pragma once

// Text formats. Floats are printed with 17 significant digits so that every
// write/read round trip is bit exact.
//
//   bracket file:  "dim n" header, then one line "i j k re im" per nonzero
//                  structure constant, 1-based indices with i < j.
//   matrix file:   "dim n" header, then n rows of n "re,im" pairs.
//   trace CSV:     t,norm_sq,field_norm,lambda_hat,soliton_residual,phi,
//                  centre_dim,jacobi_residual  (phi empty when inapplicable)
//   report:        flat key=value lines; a trailing "representative=" key is
//                  followed by the representative in matrix format.

#include <hcf/almost_abelian.hpp>

#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>

namespace hcf {

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? what + " (line " + std::to_string(line) + ")"
                                    : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_ = 0;
};

inline std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline void write_bracket(std::ostream& os, const Bracket& mu) {
  const int n = mu.dim();
  os << "dim " << n << "\n";
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const cxd c = mu.entry(i, j, k);
        if (c != cxd(0, 0))
          os << i + 1 << ' ' << j + 1 << ' ' << k + 1 << ' ' << fmt17(c.real())
             << ' ' << fmt17(c.imag()) << "\n";
      }
}

inline Bracket read_bracket(std::istream& is) {
  std::string line;
  int lineno = 0;
  int n = -1;
  Bracket mu;
  std::set<std::tuple<int, int, int>> seen;
  while (std::getline(is, line)) {
    ++lineno;
    std::istringstream probe(line);
    std::string head;
    if (!(probe >> head) || head[0] == '#') continue;
    if (n < 0) {
      if (head != "dim") throw IoError("expected 'dim n' header", lineno);
      if (!(probe >> n) || n < 1) throw IoError("invalid dimension", lineno);
      std::string extra;
      if (probe >> extra) throw IoError("trailing tokens after header", lineno);
      mu = Bracket(n);
      continue;
    }
    std::istringstream es(line);
    int i, j, k;
    double re, im;
    if (!(es >> i >> j >> k >> re >> im))
      throw IoError("expected 'i j k re im'", lineno);
    std::string extra;
    if (es >> extra) throw IoError("trailing tokens after 'i j k re im'", lineno);
    if (i < 1 || j < 1 || k < 1 || i >= j || j > n || k > n)
      throw IoError("indices must satisfy 1 <= i < j <= n, 1 <= k <= n", lineno);
    if (!seen.insert({i, j, k}).second)
      throw IoError("duplicate structure constant", lineno);
    mu.set_entry(i - 1, j - 1, k - 1, cxd(re, im));
  }
  if (n < 0) throw IoError("missing 'dim n' header");
  return mu;
}

inline void write_matrix(std::ostream& os, const cmat& A) {
  const int n = static_cast<int>(A.rows());
  os << "dim " << n << "\n";
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      if (c) os << ' ';
      os << fmt17(A(r, c).real()) << ',' << fmt17(A(r, c).imag());
    }
    os << "\n";
  }
}

inline cmat read_matrix(std::istream& is) {
  std::string line;
  int lineno = 0;
  int n = -1, row = 0;
  cmat A;
  while (std::getline(is, line)) {
    ++lineno;
    std::istringstream probe(line);
    std::string head;
    if (!(probe >> head) || head[0] == '#') continue;
    if (n < 0) {
      if (head != "dim") throw IoError("expected 'dim n' header", lineno);
      if (!(probe >> n) || n < 1) throw IoError("invalid dimension", lineno);
      A = cmat::Zero(n, n);
      continue;
    }
    if (row >= n) throw IoError("more rows than the declared dimension", lineno);
    std::istringstream es(line);
    for (int c = 0; c < n; ++c) {
      std::string tok;
      if (!(es >> tok)) throw IoError("row has fewer entries than dim", lineno);
      const auto comma = tok.find(',');
      if (comma == std::string::npos)
        throw IoError("matrix entries must be 're,im' pairs", lineno);
      try {
        std::size_t used = 0;
        const double re = std::stod(tok.substr(0, comma), &used);
        if (used != comma) throw std::invalid_argument("");
        const std::string ims = tok.substr(comma + 1);
        const double im = std::stod(ims, &used);
        if (used != ims.size()) throw std::invalid_argument("");
        A(row, c) = cxd(re, im);
      } catch (const std::exception&) {
        throw IoError("malformed numeric entry '" + tok + "'", lineno);
      }
    }
    std::string extra;
    if (es >> extra) throw IoError("row has more entries than dim", lineno);
    ++row;
  }
  if (n < 0) throw IoError("missing 'dim n' header");
  if (row != n) throw IoError("fewer rows than the declared dimension", lineno);
  return A;
}

inline Bracket read_bracket_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open bracket file '" + path + "'");
  return read_bracket(f);
}

inline cmat read_matrix_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open matrix file '" + path + "'");
  return read_matrix(f);
}

inline const char* kTraceHeader =
    "t,norm_sq,field_norm,lambda_hat,soliton_residual,phi,centre_dim,"
    "jacobi_residual";

inline void write_trace_csv(std::ostream& os, const FlowTrace& tr) {
  os << kTraceHeader << "\n";
  for (const auto& s : tr.samples) {
    os << fmt17(s.t) << ',' << fmt17(s.norm_sq) << ',' << fmt17(s.field_norm)
       << ',' << fmt17(s.lambda_hat) << ',' << fmt17(s.soliton_residual) << ',';
    if (s.phi) os << fmt17(*s.phi);
    os << ',' << s.centre_dim << ',' << fmt17(s.jacobi_residual) << "\n";
  }
}

inline const char* kMatrixTraceHeader =
    "t,norm_sq,field_norm,normality_defect,trace_power_drift";

inline void write_matrix_trace_csv(std::ostream& os, const MatrixTrace& tr) {
  os << kMatrixTraceHeader << "\n";
  for (const auto& s : tr.samples)
    os << fmt17(s.t) << ',' << fmt17(s.norm_sq) << ',' << fmt17(s.field_norm)
       << ',' << fmt17(s.normality_defect) << ',' << fmt17(s.trace_power_drift)
       << "\n";
}

/// Flat key=value record; insertion order preserved.
class Report {
 public:
  void add(const std::string& key, const std::string& value) {
    rows_.emplace_back(key, value);
  }
  void add(const std::string& key, double value) { add(key, fmt17(value)); }
  void add(const std::string& key, int value) { add(key, std::to_string(value)); }
  void add(const std::string& key, bool value) {
    add(key, std::string(value ? "true" : "false"));
  }
  void add_representative(const cmat& R) { representative_ = R; }

  void write(std::ostream& os) const {
    for (const auto& [k, v] : rows_) os << k << '=' << v << "\n";
    if (representative_.size()) {
      os << "representative=\n";
      write_matrix(os, representative_);
    }
  }

 private:
  std::vector<std::pair<std::string, std::string>> rows_;
  cmat representative_;
};

inline const char* soliton_type_name(SolitonType t) {
  switch (t) {
    case SolitonType::Steady: return "steady";
    case SolitonType::Expanding: return "expanding";
    default: return "none";
  }
}

inline const char* matrix_kind_name(MatrixKind k) {
  switch (k) {
    case MatrixKind::Zero: return "zero";
    case MatrixKind::Nilpotent: return "nilpotent";
    case MatrixKind::Semisimple: return "semisimple";
    default: return "neither";
  }
}

inline Report soliton_report(const SolitonReport& r) {
  Report rep;
  rep.add("class", std::string(matrix_kind_name(r.kind)));
  rep.add("exists", r.exists);
  rep.add("type", std::string(soliton_type_name(r.type)));
  rep.add("lambda", r.lambda);
  rep.add("residual", r.residual);
  if (!r.jordan_type.empty()) {
    std::string jt;
    for (std::size_t i = 0; i < r.jordan_type.size(); ++i)
      jt += (i ? "," : "") + std::to_string(r.jordan_type[i]);
    rep.add("jordan_type", jt);
  }
  if (r.conditioning_warning) rep.add("conditioning_warning", true);
  rep.add("homothety", std::string("scaling the representative by a rescales "
                                   "lambda by |a|^2"));
  if (r.representative.size()) rep.add_representative(r.representative);
  return rep;
}

}  // namespace hcf
