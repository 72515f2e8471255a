#include "l1reg/cli/commands.hpp"

#include <cmath>
#include <fstream>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "l1reg/cli/presets.hpp"
#include "l1reg/csv.hpp"
#include "l1reg/parameter_choice.hpp"
#include "l1reg/rates.hpp"
#include "l1reg/solver.hpp"
#include "l1reg/source_conditions.hpp"

namespace l1reg::cli {

namespace fs = std::filesystem;
using csv::cell;

namespace {

template <class... Args>
void say(std::ostream* out, fmt::format_string<Args...> f, Args&&... args) {
  if (out) fmt::print(*out, "{}\n", fmt::format(f, std::forward<Args>(args)...));
}

template <class F>
int guarded(const RunOptions& options, F&& body) {
  try {
    return body();
  } catch (const InvalidArgument& e) {
    say(options.err, "error: {}", e.what());
    return kExitValidation;
  } catch (const NonConvergence& e) {
    say(options.err, "error: {}", e.what());
    return kExitNonConvergence;
  } catch (const DiscrepancyUnreachable& e) {
    say(options.err, "error: {}", e.what());
    return kExitSdpFailure;
  } catch (const json::exception& e) {
    say(options.err, "error: config: {}", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    say(options.err, "error: {}", e.what());
    return kExitFailure;
  }
}

std::ofstream open_output(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot write {}", (dir / name).string()));
  return out;
}

void write_echo(const fs::path& dir, const json& echo) {
  auto out = open_output(dir, "config.json");
  out << echo.dump(2) << '\n';
}

/// Places the --seed override where each command keeps its seed.
json with_seed(json config, const std::vector<std::string>& path, const RunOptions& options) {
  if (!options.seed) return config;
  json* node = &config;
  for (const auto& key : path) {
    if (!node->is_object() || !node->contains(key)) return config;
    node = &(*node)[key];
  }
  if (node->is_object()) (*node)["seed"] = *options.seed;
  return config;
}

}  // namespace

int cmd_solve(const json& config, const RunOptions& options) {
  return guarded(options, [&] {
    json echo;
    const SolveRun run = parse_solve(with_seed(config, {"solve", "data"}, options), echo);
    write_echo(options.out_dir, echo);

    const OperatorTruncation op = assemble(run.op.spec, run.op.n, run.op.image_norm);
    const TruncatedSequence y(Vector(Eigen::Map<const Vector>(run.data.data(), static_cast<Eigen::Index>(run.data.size()))));
    const TikhonovProblem problem(op, y, run.p, run.alpha, run.elastic_eta);
    SolveOptions solve_options;
    solve_options.tol = run.tol;
    solve_options.max_iter = run.max_iter;
    const SolveResult result = solve_tikhonov(problem, solve_options);
    const auto& d = result.diagnostics;
    const double violation = optimality_violation(problem, result.x.values());
    const double disc = discrepancy(problem, result.x.values());

    {
      auto out = open_output(options.out_dir, "solution.csv");
      csv::Writer w(out, {"k", "x"});
      for (std::size_t k = 1; k <= result.x.size(); ++k) w.row({cell(std::uint64_t{k}), cell(result.x.coord(k))});
    }
    {
      auto out = open_output(options.out_dir, "diagnostics.csv");
      csv::Writer w(out, {"iterations", "objective", "residual", "converged", "restarts", "backtracks",
                          "optimality_violation", "discrepancy", "l1_norm", "support_size"});
      w.row({cell(std::uint64_t{d.iterations}), cell(d.objective), cell(d.residual), cell(d.converged),
             cell(std::uint64_t{d.restarts}), cell(std::uint64_t{d.backtracks}), cell(violation), cell(disc),
             cell(norm(result.x, NormKind::L1)), cell(std::uint64_t{support_size(result.x.values())})});
    }
    {
      auto out = open_output(options.out_dir, "objective_trace.csv");
      csv::Writer w(out, {"iteration", "objective"});
      const std::size_t every = solve_options.checkpoint_every;
      for (std::size_t i = 0; i < d.checkpoints.size(); ++i)
        w.row({cell(std::uint64_t{(i + 1) * every}), cell(d.checkpoints[i])});
    }

    say(options.out, "objective {:.17g}  iterations {}  residual {:.3g}  violation {:.3g}  discrepancy {:.6g}",
        d.objective, d.iterations, d.residual, violation, disc);
    if (!d.converged) {
      say(options.err, "error: solver did not converge within max_iter = {} (residual {:.3g}); partial diagnostics "
                       "written",
          run.max_iter, d.residual);
      return static_cast<int>(kExitNonConvergence);
    }
    return static_cast<int>(kExitOk);
  });
}

int cmd_rates(const json& config, const RunOptions& options) {
  return guarded(options, [&] {
    json patched = config;
    if (options.seed && patched.is_object() && patched.contains("rates") && patched["rates"].is_object())
      patched["rates"]["seed"] = *options.seed;
    json echo;
    RateStudyConfig study_config = parse_rates(patched, echo);
    if (options.jobs) study_config.jobs = std::max<std::size_t>(*options.jobs, 1);
    write_echo(options.out_dir, echo);

    const RateStudy study = run_rate_study(study_config);
    {
      auto out = open_output(options.out_dir, "records.csv");
      write_records_csv(out, study);
    }
    {
      auto out = open_output(options.out_dir, "summary.csv");
      write_summary_csv(out, study);
    }
    {
      auto out = open_output(options.out_dir, "loglog.dat");
      write_loglog_data(out, study, study_config.deltas);
    }
    if (study_config.gamma) {
      const SmoothnessProfile profile =
          SmoothnessProfile::from_model(study_config.model, *study_config.gamma, study_config.n);
      auto out = open_output(options.out_dir, "predicted.dat");
      out << "# delta phi\n";
      for (double delta : study_config.deltas)
        out << csv::format_double(delta) << ' ' << csv::format_double(phi_eval(profile, delta).value) << '\n';
    }

    const std::size_t total = study.records.size();
    say(options.out, "slope {:.4f}  stderr {:.4f}  predicted {}  failed {}/{}", study.slope, study.slope_stderr,
        study.predicted_exponent ? fmt::format("{:.4f}", *study.predicted_exponent) : std::string("n/a"),
        study.n_failed, total);
    say(options.out, "truncation tail {:.3g} ({})", study.truncation_tail,
        study.truncation_ok ? "ok" : "exceeds 0.01 * min delta");
    if (study.valid) return static_cast<int>(kExitOk);

    std::size_t sdp = 0, nonconv = 0;
    for (const auto& r : study.records) {
      if (r.failure_kind == FailureKind::DiscrepancyUnreachable) ++sdp;
      if (r.failure_kind == FailureKind::NonConvergence) ++nonconv;
    }
    for (const auto& r : study.records)
      if (r.failed) {
        say(options.err, "error: first failure at delta {:.3g} rep {}: {}", r.delta, r.rep, r.failure);
        break;
      }
    say(options.err, "error: rate study invalid ({} of {} records failed)", study.n_failed, total);
    if (sdp > 0 && sdp >= nonconv) return static_cast<int>(kExitSdpFailure);
    if (nonconv > 0) return static_cast<int>(kExitNonConvergence);
    return static_cast<int>(kExitFailure);
  });
}

namespace {

int analyze_phi(const json& config, const RunOptions& options) {
  json echo;
  const PhiRun run = parse_phi(config, echo);
  write_echo(options.out_dir, echo);
  const SmoothnessProfile profile = SmoothnessProfile::from_model(run.model, run.gamma, run.n_max);
  const IndexFunction phi = as_index_function(profile);
  const std::vector<double> grid = log_grid(run.t_min, run.t_max, run.points);

  std::vector<std::pair<double, double>> pairs;
  {
    auto out = open_output(options.out_dir, "phi.csv");
    auto detail_out = open_output(options.out_dir, "phi_detail.csv");
    csv::Writer w(out, {"t", "phi"});
    csv::Writer detail(detail_out, {"t", "phi", "argmin_n"});
    for (double t : grid) {
      const PhiValue v = phi_eval(profile, t);
      w.row({cell(t), cell(v.value)});
      detail.row({cell(t), cell(v.value), cell(std::uint64_t{v.argmin_n})});
      pairs.emplace_back(t, v.value);
    }
  }
  const SlopeFit fit = fit_loglog_slope(pairs);
  const ShapeCheck shape = check_shape(phi, grid);
  const double at_zero = phi(0.0);
  {
    auto out = open_output(options.out_dir, "phi_summary.csv");
    csv::Writer w(out, {"loglog_slope", "increasing", "midpoint_concave", "phi_at_zero"});
    w.row({cell(fit.slope), cell(shape.increasing), cell(shape.midpoint_concave), cell(at_zero)});
  }
  say(options.out, "log-log slope {:.4f}  increasing {}  concave {}  phi(0) {:.3g}", fit.slope, shape.increasing,
      shape.midpoint_concave, at_zero);
  return static_cast<int>(kExitOk);
}

int analyze_witness(const json& config, const RunOptions& options) {
  json echo;
  const WitnessRun run = parse_witness(config, echo);
  write_echo(options.out_dir, echo);
  Property1Witness witness = [&] {
    if (std::holds_alternative<BidiagonalSumOp>(run.spec.kind()))
      return property1_witness_bidiagonal(run.xi, run.mu, run.tail, run.truncation);
    require(run.mu == 0.0, "witness: mu > 0 applies to the bidiagonal sum only");
    return property1_witness_closed_form(run.spec, run.xi, run.truncation);
  }();
  const OperatorTruncation op = assemble(run.spec, run.truncation);
  const WitnessCertificate cert = certify_witness(op, witness);
  const TruncatedSequence adjoint = apply_adjoint(op, witness.eta);
  {
    auto out = open_output(options.out_dir, "witness.csv");
    csv::Writer w(out, {"k", "eta", "adjoint_eta"});
    for (std::size_t k = 1; k <= witness.eta.size(); ++k)
      w.row({cell(std::uint64_t{k}), cell(witness.eta.coord(k)), cell(adjoint.coord(k))});
  }
  {
    auto out = open_output(options.out_dir, "witness_certificate.csv");
    csv::Writer w(out, {"n", "mu", "gamma_bound", "head_error", "tail_max", "eta_sup", "head_ok", "tail_ok",
                        "norm_ok"});
    w.row({cell(std::uint64_t{witness.n}), cell(witness.mu), cell(witness.gamma_bound), cell(cert.head_error),
           cell(cert.tail_max), cell(cert.eta_sup), cell(cert.head_ok), cell(cert.tail_ok), cell(cert.norm_ok)});
  }
  say(options.out, "head {}  tail {}  norm {}  (head error {:.3g}, tail max {:.3g}, sup {:.6g} vs bound {:.6g})",
      cert.head_ok, cert.tail_ok, cert.norm_ok, cert.head_error, cert.tail_max, cert.eta_sup, witness.gamma_bound);
  return static_cast<int>(kExitOk);
}

int analyze_conditioning(const json& config, const RunOptions& options) {
  json echo;
  const ConditioningRun run = parse_conditioning(config, echo);
  write_echo(options.out_dir, echo);
  const ConditioningReport report = conditioning_scan(run.spec, run.grid);
  {
    auto out = open_output(options.out_dir, "conditioning.csv");
    csv::Writer w(out, {"n", "sigma_min", "inverse_sigma_min"});
    for (std::size_t i = 0; i < report.n.size(); ++i)
      w.row({cell(std::uint64_t{report.n[i]}), cell(report.sigma_min[i]), cell(1.0 / report.sigma_min[i])});
  }
  const double ratio = report.sigma_min.front() / report.sigma_min.back();
  {
    auto out = open_output(options.out_dir, "conditioning_summary.csv");
    csv::Writer w(out, {"n_first", "n_last", "growth_ratio", "growth_exponent", "verdict"});
    w.row({cell(std::uint64_t{report.n.front()}), cell(std::uint64_t{report.n.back()}), cell(ratio),
           cell(report.growth_exponent), cell(to_string(report.verdict))});
  }
  say(options.out, "1/sigma_min grows by {:.4g} from N = {} to N = {} (exponent {:.4f}): {}", ratio,
      report.n.front(), report.n.back(), report.growth_exponent, to_string(report.verdict));
  return static_cast<int>(kExitOk);
}

int analyze_weakstar(const json& config, const RunOptions& options) {
  json echo;
  const WeakStarRun run = parse_weakstar(config, echo);
  write_echo(options.out_dir, echo);
  const std::vector<double> values = weak_star_diagnostic(run.spec, run.k, run.probe);
  {
    auto out = open_output(options.out_dir, "weakstar.csv");
    csv::Writer w(out, {"k", "pairing"});
    for (std::size_t k = 0; k < values.size(); ++k) w.row({cell(std::uint64_t{k + 1}), cell(values[k])});
  }
  double largest = 0.0;
  for (double v : values) largest = std::max(largest, std::abs(v));
  say(options.out, "{} pairings, largest magnitude {:.6g}, last {:.6g}", values.size(), largest, values.back());
  return static_cast<int>(kExitOk);
}

int analyze_vsc(const json& config, const RunOptions& options) {
  json echo;
  const VscRun run = parse_vsc(with_seed(config, {"analyze", "vsc"}, options), echo);
  write_echo(options.out_dir, echo);
  const OperatorTruncation op = assemble(run.op.spec, run.op.n, run.op.image_norm);
  const TruncatedSequence x_true = materialize(run.model, run.op.n);
  const SmoothnessProfile profile = run.analytic_tail
                                        ? SmoothnessProfile::from_model(run.model, run.gamma, run.op.n)
                                        : SmoothnessProfile::from_truncation(x_true, run.gamma);
  const VscReport report = vsc_check(op, x_true, profile, run.beta, run.samples, run.seed);
  {
    auto out = open_output(options.out_dir, "vsc.csv");
    csv::Writer w(out, {"samples", "violations", "worst_margin", "beta", "n", "image_norm"});
    w.row({cell(std::uint64_t{report.samples}), cell(std::uint64_t{report.violations}), cell(report.worst_margin),
           cell(run.beta), cell(std::uint64_t{run.op.n}), cell(to_string(run.op.image_norm))});
  }
  say(options.out, "{} violations in {} samples, worst margin {:.3g}", report.violations, report.samples,
      report.worst_margin);
  return static_cast<int>(kExitOk);
}

int analyze_gamma(const json& config, const RunOptions& options) {
  json echo;
  const GammaRun run = parse_gamma(config, echo);
  write_echo(options.out_dir, echo);
  const std::vector<TruncatedSequence> sources = canonical_sources(run.spec, run.n_max, run.dim);
  auto out = open_output(options.out_dir, "gamma.csv");
  csv::Writer w(out, {"n", "gamma_sum", "gamma_signed_sup"});
  for (std::size_t n = 1; n <= run.n_max; ++n) {
    const double sum = gamma_from_sources(sources, n, GammaMode::Sum, run.dual_norm);
    const double sup = gamma_from_sources(sources, n, GammaMode::SignedSup, run.dual_norm);
    w.row({cell(std::uint64_t{n}), cell(sum), cell(sup)});
    if (n == run.n_max) say(options.out, "gamma_{}: sum {:.17g}  signed-sup {:.17g}", n, sum, sup);
  }
  return static_cast<int>(kExitOk);
}

}  // namespace

int cmd_analyze(const std::string& analysis, const json& config, const RunOptions& options) {
  return guarded(options, [&] {
    if (analysis == "phi") return analyze_phi(config, options);
    if (analysis == "witness") return analyze_witness(config, options);
    if (analysis == "conditioning") return analyze_conditioning(config, options);
    if (analysis == "weakstar") return analyze_weakstar(config, options);
    if (analysis == "vsc") return analyze_vsc(config, options);
    if (analysis == "gamma") return analyze_gamma(config, options);
    throw InvalidArgument(fmt::format("unknown analysis '{}'", analysis));
  });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"l1-regularized Tikhonov solver and convergence-rate harness", "l1reg"};
  app.require_subcommand(1);

  std::string config_path, preset_name, analysis;
  std::string out_dir = ".";
  std::size_t jobs = 1;
  std::uint64_t seed = 0;

  const auto add_common = [&](CLI::App* sub, bool with_jobs) {
    auto* config_opt = sub->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    auto* preset_opt = sub->add_option("--preset", preset_name, "bundled configuration name");
    config_opt->excludes(preset_opt);
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "override the config seed");
    if (with_jobs) sub->add_option("--jobs", jobs, "worker threads for rate studies")->check(CLI::PositiveNumber);
  };

  auto* solve = app.add_subcommand("solve", "minimize the functional for one penalty weight");
  add_common(solve, false);
  auto* rates = app.add_subcommand("rates", "run a convergence-rate study");
  add_common(rates, true);
  auto* analyze = app.add_subcommand("analyze", "smoothness and conditioning analyses");
  analyze->add_option("analysis", analysis, "phi | witness | conditioning | weakstar | vsc | gamma")
      ->check(CLI::IsMember(analysis_names()));
  add_common(analyze, false);
  auto* presets = app.add_subcommand("presets", "list bundled presets, or print one");
  std::string dump_name;
  presets->add_option("name", dump_name, "preset to print as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitValidation;
  }

  if (presets->parsed()) {
    if (dump_name.empty()) {
      for (const auto& p : bundled_presets()) fmt::print(out, "{:<28} {:<8} {}\n", p.name, p.command(), p.description);
      return kExitOk;
    }
    try {
      out << find_preset(dump_name).config.dump(2) << '\n';
      return kExitOk;
    } catch (const Error& e) {
      fmt::print(err, "error: {}\n", e.what());
      return kExitValidation;
    }
  }

  CLI::App* sub = solve->parsed() ? solve : rates->parsed() ? rates : analyze;
  RunOptions options;
  options.out_dir = out_dir;
  options.out = &out;
  options.err = &err;
  if (sub->count("--seed")) options.seed = seed;
  if (sub == rates && sub->count("--jobs")) options.jobs = jobs;

  json config;
  try {
    if (!preset_name.empty()) {
      const Preset& preset = find_preset(preset_name);
      config = preset.config;
      if (sub == analyze && analysis.empty()) analysis = preset.analysis();
    } else if (!config_path.empty()) {
      config = load_config_file(config_path);
    } else {
      throw InvalidArgument("one of --config or --preset is required");
    }
    if (sub == analyze && analysis.empty()) {
      if (config.contains("analyze") && config["analyze"].is_object() && config["analyze"].size() == 1)
        analysis = config["analyze"].begin().key();
      else
        throw InvalidArgument("analyze: name the analysis (phi, witness, conditioning, weakstar, vsc or gamma)");
    }
  } catch (const Error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitValidation;
  }

  if (sub == solve) return cmd_solve(config, options);
  if (sub == rates) return cmd_rates(config, options);
  return cmd_analyze(analysis, config, options);
}

}  // namespace l1reg::cli
