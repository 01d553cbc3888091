// hcf: bracket flows on complex Lie algebras and the almost-abelian matrix
// reduction. Exit codes: 0 ok, 1 verified property violated, 2 usage or input
// error, 3 integration aborted (partial outputs are still written).

#include <CLI11.hpp>
#include <hcf/hcf.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace hcf;

namespace {

struct FlowOpts {
  std::string bracket_file, example, integrator = "dopri45", out = ".";
  double t_end = 10.0, stride = 0.1, tol = 1e-10, step = 1e-2;
  double eps_fix = 1e-8, dwell = 1.0;
  std::uint64_t max_steps = 100'000'000;
  bool normalized = false, gauged = false, split = false, no_early_stop = false;
};

struct AaOpts {
  std::string matrix_file, example, jordan_type, integrator = "dopri45", out = ".";
  double t_end = 10.0, stride = 0.1, tol = 1e-10, step = 1e-2;
  std::uint64_t max_steps = 100'000'000;
  bool classify = false, flow = false, construct = false, no_early_stop = false;
};

struct VerifyOpts {
  std::string suite, example, out;
  std::uint64_t seed = 1;
  int trials = 20;
};

IntegratorKind parse_integrator(const std::string& name) {
  if (name == "dopri45") return IntegratorKind::Dopri45;
  if (name == "rk4") return IntegratorKind::Rk4Fixed;
  throw IoError("unknown integrator '" + name + "' (use dopri45 or rk4)");
}

void write_file(const fs::path& p,
                const std::function<void(std::ostream&)>& body) {
  std::ofstream f(p);
  if (!f) throw IoError("cannot write '" + p.string() + "'");
  body(f);
}

void ensure_out_dir(const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory '" + out + "': " + ec.message());
}

Bracket load_bracket(const FlowOpts& o) {
  if (o.bracket_file.empty() == o.example.empty())
    throw IoError("need exactly one of --bracket FILE or --example NAME");
  const Bracket mu = o.bracket_file.empty() ? example_bracket(o.example)
                                            : read_bracket_file(o.bracket_file);
  const double res = jacobi_residual(mu);
  if (res > 1e-8 * std::max(mu.norm_sq(), 1e-30))
    throw IoError("input violates the Jacobi identity (residual " + fmt17(res) +
                  "), not a Lie bracket");
  return mu;
}

int run_flow(const FlowOpts& o) {
  const Bracket mu = load_bracket(o);
  FlowConfig cfg;
  cfg.integrator = parse_integrator(o.integrator);
  cfg.step = o.step;
  cfg.tol = o.tol;
  cfg.t_end = o.t_end;
  cfg.record_stride = o.stride;
  cfg.eps_fix = o.eps_fix;
  cfg.dwell = o.dwell;
  cfg.stop_at_fixed_point = !o.no_early_stop;
  cfg.max_steps = o.max_steps;

  const std::string mode = o.split ? "split"
                           : o.gauged ? "gauged"
                           : o.normalized ? "normalized"
                                          : "plain";
  FlowTrace trace;
  Bracket fin(mu.dim());
  if (o.split) {
    auto r = integrate_split_normalized_flow(mu, cfg);
    fin = Bracket(mu.dim(), cmat(r.eta0_final.coeffs() + r.eta1_final.coeffs()));
    trace = std::move(r.trace);
  } else if (o.gauged) {
    auto r = integrate_gauged_flow(mu, cfg);
    fin = r.final;
    trace = std::move(r.trace);
  } else if (o.normalized) {
    auto r = integrate_normalized_flow(mu, cfg);
    fin = r.final;
    trace = std::move(r.trace);
  } else {
    auto r = integrate_bracket_flow(mu, cfg);
    fin = r.final;
    trace = std::move(r.trace);
  }

  ensure_out_dir(o.out);
  write_file(fs::path(o.out) / "trace.csv",
             [&](std::ostream& os) { write_trace_csv(os, trace); });

  Report rep;
  rep.add("mode", mode);
  rep.add("dim", mu.dim());
  rep.add("integrator", o.integrator);
  rep.add("completed", trace.completed);
  rep.add("aborted", trace.aborted);
  if (!trace.abort_reason.empty()) rep.add("abort_reason", trace.abort_reason);
  rep.add("final_t", trace.final_t);
  rep.add("samples", static_cast<int>(trace.samples.size()));
  if (trace.fixed_point_time) rep.add("fixed_point_time", *trace.fixed_point_time);
  if (!trace.samples.empty()) {
    const auto& s = trace.samples.back();
    rep.add("final_norm_sq", s.norm_sq);
    rep.add("final_field_norm", s.field_norm);
    rep.add("final_lambda_hat", s.lambda_hat);
    rep.add("final_soliton_residual", s.soliton_residual);
    if (s.phi) rep.add("final_phi", *s.phi);
    rep.add("final_centre_dim", s.centre_dim);
  }
  if (o.gauged) rep.add("max_split_mismatch", trace.max_split_mismatch);
  if (o.normalized || o.split) rep.add("max_norm_drift", trace.max_norm_drift);
  if (o.normalized) {
    const auto fit = semialgebraic_soliton_fit(fin);
    rep.add("semialgebraic_lambda", fit.lambda);
    rep.add("semialgebraic_residual", fit.residual);
    rep.add("derivation_residual", fit.derivation_residual);
  }
  for (const auto& w : trace.warnings) rep.add("warning", w);
  write_file(fs::path(o.out) / "report.txt",
             [&](std::ostream& os) { rep.write(os); });
  return trace.aborted ? 3 : 0;
}

int run_aa(const AaOpts& o) {
  const int sources = static_cast<int>(!o.matrix_file.empty()) +
                      static_cast<int>(!o.example.empty()) +
                      static_cast<int>(!o.jordan_type.empty());
  if (sources != 1)
    throw IoError("need exactly one of --matrix FILE, --example NAME or "
                  "--jordan-type d0,d1,...");
  cmat A;
  if (!o.jordan_type.empty())
    A = nilpotent_soliton_canonical(parse_jordan_type(o.jordan_type));
  else if (!o.example.empty())
    A = example_matrix(o.example);
  else
    A = read_matrix_file(o.matrix_file);

  ensure_out_dir(o.out);
  if (o.flow) {
    FlowConfig cfg;
    cfg.integrator = parse_integrator(o.integrator);
    cfg.step = o.step;
    cfg.tol = o.tol;
    cfg.t_end = o.t_end;
    cfg.record_stride = o.stride;
    cfg.stop_at_fixed_point = !o.no_early_stop;
    cfg.max_steps = o.max_steps;
    const auto r = integrate_matrix_flow(A, cfg);
    write_file(fs::path(o.out) / "trace.csv",
               [&](std::ostream& os) { write_matrix_trace_csv(os, r.trace); });
    Report rep;
    rep.add("dim", static_cast<int>(A.rows()));
    rep.add("integrator", o.integrator);
    rep.add("completed", r.trace.completed);
    rep.add("aborted", r.trace.aborted);
    if (!r.trace.abort_reason.empty()) rep.add("abort_reason", r.trace.abort_reason);
    rep.add("final_t", r.trace.final_t);
    rep.add("samples", static_cast<int>(r.trace.samples.size()));
    if (!r.trace.samples.empty()) {
      const auto& s = r.trace.samples.back();
      rep.add("final_norm_sq", s.norm_sq);
      rep.add("final_field_norm", s.field_norm);
      rep.add("final_normality_defect", s.normality_defect);
      rep.add("final_trace_power_drift", s.trace_power_drift);
    }
    rep.add("final_class",
            std::string(matrix_kind_name(classify_matrix(r.final).kind)));
    rep.add_representative(r.final);
    write_file(fs::path(o.out) / "report.txt",
               [&](std::ostream& os) { rep.write(os); });
    return r.trace.aborted ? 3 : 0;
  }

  // --classify (the default) and --construct both decide existence; construct
  // additionally certifies the canonical representative
  const SolitonReport sd = soliton_decision(A);
  Report rep = soliton_report(sd);
  if (o.construct && sd.kind == MatrixKind::Nilpotent) {
    const auto v = verify_nilpotent_soliton(sd.representative);
    rep.add("flow_residual", v.flow_residual);
    rep.add("chain_residual", v.chain_residual);
    rep.add("cross_residual", v.cross_residual);
  }
  write_file(fs::path(o.out) / "report.txt",
             [&](std::ostream& os) { rep.write(os); });
  return 0;
}

int run_verify(const VerifyOpts& o) {
  rng_t rng(o.seed);
  Report rep;
  rep.add("suite", o.suite);
  bool pass = false;

  if (o.suite == "moment-map") {
    double worst = 0;
    for (int t = 0; t < o.trials; ++t) {
      const int n = 3 + t % 3;
      const Bracket mu = random_nilpotent_bracket(n, rng);
      const cmat E = random_matrix(n, rng, false);
      const double res = moment_identity_residual(mu, E) /
                         ((1.0 + mu.norm_sq()) * (1.0 + E.norm()));
      worst = std::max(worst, res);
    }
    pass = worst < 1e-10;
    rep.add("trials", o.trials);
    rep.add("max_scaled_residual", worst);
  } else if (o.suite == "gauge-equivalence") {
    const Bracket mu =
        example_bracket(o.example.empty() ? "filiform4" : o.example);
    FlowConfig cfg;
    cfg.t_end = 5.0;
    cfg.record_stride = 0.05;
    cfg.stop_at_fixed_point = false;
    const auto ge = verify_gauge_equivalence(mu, cfg);
    pass = ge.max_state_mismatch < 1e-6 && ge.max_unitarity_defect < 1e-8;
    rep.add("max_state_mismatch", ge.max_state_mismatch);
    rep.add("max_unitarity_defect", ge.max_unitarity_defect);
  } else if (o.suite == "phi-monotone") {
    const Bracket mu =
        example_bracket(o.example.empty() ? "filiform4" : o.example);
    FlowConfig cfg;
    cfg.t_end = 30.0;
    cfg.record_stride = 0.25;
    cfg.stop_at_fixed_point = false;
    const auto r = integrate_split_normalized_flow(mu, cfg);
    double worst_rise = 0;
    double prev = *r.trace.samples.front().phi;
    for (const auto& s : r.trace.samples) {
      worst_rise = std::max(worst_rise, *s.phi - prev);
      prev = *s.phi;
    }
    pass = r.trace.completed && worst_rise <= 1e-10;
    rep.add("phi_initial", *r.trace.samples.front().phi);
    rep.add("phi_final", *r.trace.samples.back().phi);
    rep.add("max_phi_rise", worst_rise);
  } else if (o.suite == "isospectrality") {
    FlowConfig cfg;
    cfg.t_end = 100.0;
    cfg.record_stride = 10.0;
    cfg.tol = 1e-12;
    cfg.stop_at_fixed_point = false;
    double worst = 0;
    for (int t = 0; t < o.trials; ++t) {
      const int n = 2 + t % 5;
      const auto r = integrate_matrix_flow(random_matrix(n, rng), cfg);
      for (const auto& s : r.trace.samples)
        worst = std::max(worst, s.trace_power_drift);
    }
    pass = worst < 1e-8;
    rep.add("trials", o.trials);
    rep.add("max_trace_power_drift", worst);
  } else if (o.suite == "envelope") {
    FlowConfig cfg;
    cfg.t_end = 1e12;
    cfg.record_stride = 5e8;
    cfg.stop_at_fixed_point = false;
    const std::vector<std::string> names =
        o.example.empty()
            ? std::vector<std::string>{"heisenberg3", "filiform4"}
            : std::vector<std::string>{o.example};
    pass = true;
    for (const auto& nm : names) {
      const auto r = integrate_bracket_flow(example_bracket(nm), cfg);
      const auto ec = growth_envelope_check(r.trace);
      pass = pass && ec.lower_pass && ec.trailing_increase <= 1e-10;
      rep.add(nm + "_sup_t_norm_sq", ec.sup_t_norm_sq);
      rep.add(nm + "_trailing_increase", ec.trailing_increase);
      rep.add(nm + "_chat", ec.chat);
    }
  } else {
    throw IoError("unknown verify suite '" + o.suite +
                  "' (moment-map, gauge-equivalence, phi-monotone, "
                  "isospectrality, envelope)");
  }

  rep.add("pass", pass);
  rep.write(std::cout);
  if (!o.out.empty()) {
    ensure_out_dir(o.out);
    write_file(fs::path(o.out) / "report.txt",
               [&](std::ostream& os) { rep.write(os); });
  }
  return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bracket flows on complex Lie algebras and almost-abelian "
               "soliton classification"};
  app.require_subcommand(1);

  FlowOpts fo;
  AaOpts ao;
  VerifyOpts vo;

  auto* flow = app.add_subcommand(
      "flow", "integrate the bracket flow or a gauged/normalized/split variant");
  flow->add_option("--bracket", fo.bracket_file, "bracket file to integrate");
  flow->add_option("--example", fo.example, "named example bracket");
  flow->add_option("--t-end", fo.t_end, "integration horizon");
  flow->add_option("--record-stride", fo.stride, "sampling stride");
  flow->add_option("--tol", fo.tol, "adaptive error tolerance");
  flow->add_option("--step", fo.step, "fixed step size (rk4)");
  flow->add_option("--integrator", fo.integrator, "dopri45 or rk4");
  flow->add_option("--eps-fix", fo.eps_fix, "fixed-point field threshold");
  flow->add_option("--dwell", fo.dwell, "fixed-point dwell time");
  flow->add_option("--max-steps", fo.max_steps, "step budget before aborting");
  flow->add_option("--out", fo.out, "output directory");
  auto* fn = flow->add_flag("--normalized", fo.normalized,
                            "norm-normalized flow on the unit sphere");
  auto* fg = flow->add_flag("--gauged", fo.gauged,
                            "gauged flow (centre-adapted frame)");
  auto* fsp = flow->add_flag("--split", fo.split,
                             "split normalized eta-system along the centre");
  fn->excludes(fg);
  fn->excludes(fsp);
  fg->excludes(fsp);
  flow->add_flag("--no-early-stop", fo.no_early_stop,
                 "keep integrating past a detected fixed point");

  auto* aa = app.add_subcommand(
      "aa", "almost-abelian matrix flow and soliton classification");
  aa->add_option("--matrix", ao.matrix_file, "matrix file (re,im pairs)");
  aa->add_option("--example", ao.example, "named example matrix");
  aa->add_option("--jordan-type", ao.jordan_type,
                 "kernel filtration dimensions d0,d1,... of a canonical soliton");
  auto* ac = aa->add_flag("--classify", ao.classify,
                          "decide soliton existence and type (default)");
  auto* af = aa->add_flag("--flow", ao.flow, "integrate the matrix flow");
  auto* ab = aa->add_flag("--construct", ao.construct,
                          "construct and certify the canonical representative");
  ac->excludes(af);
  ac->excludes(ab);
  af->excludes(ab);
  aa->add_option("--t-end", ao.t_end, "integration horizon");
  aa->add_option("--record-stride", ao.stride, "sampling stride");
  aa->add_option("--tol", ao.tol, "adaptive error tolerance");
  aa->add_option("--step", ao.step, "fixed step size (rk4)");
  aa->add_option("--integrator", ao.integrator, "dopri45 or rk4");
  aa->add_option("--max-steps", ao.max_steps, "step budget before aborting");
  aa->add_flag("--no-early-stop", ao.no_early_stop,
               "keep integrating past a detected fixed point");
  aa->add_option("--out", ao.out, "output directory");

  auto* verify = app.add_subcommand("verify", "run a named property suite");
  verify
      ->add_option("suite", vo.suite,
                   "moment-map | gauge-equivalence | phi-monotone | "
                   "isospectrality | envelope")
      ->required();
  verify->add_option("--seed", vo.seed, "random seed");
  verify->add_option("--trials", vo.trials, "number of random trials");
  verify->add_option("--example", vo.example, "named example input");
  verify->add_option("--out", vo.out, "optional output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (flow->parsed()) return run_flow(fo);
    if (aa->parsed()) return run_aa(ao);
    return run_verify(vo);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
