#include "l1reg/rates.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "l1reg/csv.hpp"
#include "l1reg/errors.hpp"

namespace l1reg {

TruncatedSequence generate_noisy_data(const TruncatedSequence& y, double delta, NormKind image_norm,
                                      std::uint64_t seed) {
  require(std::isfinite(delta) && delta > 0.0, "generate_noisy_data: delta must be positive");
  const auto n = static_cast<Eigen::Index>(y.size());
  for (std::uint64_t s = seed;; ++s) {
    std::mt19937_64 rng(s);
    std::normal_distribution<double> normal;
    Vector e(n);
    for (Eigen::Index i = 0; i < n; ++i) e(i) = normal(rng);
    const double e_norm = norm(e, image_norm);
    if (e_norm > 0.0) return TruncatedSequence(y.values() + (delta / e_norm) * e);
  }
}

std::uint64_t derive_seed(std::uint64_t master, std::size_t delta_index, std::size_t rep) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (1 + (static_cast<std::uint64_t>(delta_index) << 20) +
                                                      static_cast<std::uint64_t>(rep));
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<double> RateStudyConfig::default_delta_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 6; ++i) grid.push_back(std::pow(10.0, -1.0 - 0.5 * i));
  return grid;
}

void RateStudyConfig::validate() const {
  op_spec.validate();
  require(n >= 1, "rate study: truncation level must be >= 1");
  require(!deltas.empty(), "rate study: delta grid is empty");
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    require(std::isfinite(deltas[i]) && deltas[i] > 0.0, "rate study: deltas must be positive");
    require(i == 0 || deltas[i] < deltas[i - 1], "rate study: delta grid must be strictly decreasing");
  }
  require(repetitions >= 1, "rate study: repetitions must be >= 1");
  require(tol > 0.0 && max_iter >= 1, "rate study: invalid solver tolerance or iteration cap");
  require(jobs >= 1, "rate study: jobs must be >= 1");
  if (const auto* sdp = std::get_if<SDPRule>(&rule)) sdp->validate();
}

std::vector<double> RateStudy::median_errors(std::size_t n_deltas) const {
  std::vector<double> out(n_deltas, std::nan(""));
  for (std::size_t d = 0; d < n_deltas; ++d) {
    std::vector<double> errs;
    for (const auto& r : records)
      if (r.delta_index == d && !r.failed) errs.push_back(r.error_l1);
    if (errs.empty()) continue;
    std::sort(errs.begin(), errs.end());
    const std::size_t m = errs.size();
    out[d] = m % 2 ? errs[m / 2] : 0.5 * (errs[m / 2 - 1] + errs[m / 2]);
  }
  return out;
}

namespace {

RateRecord run_record(const RateStudyConfig& config, const OperatorTruncation& op, const TruncatedSequence& x_true,
                      const TruncatedSequence& y, std::size_t delta_index, std::size_t rep) {
  RateRecord rec;
  rec.delta_index = delta_index;
  rec.rep = rep;
  rec.delta = config.deltas[delta_index];
  rec.seed = derive_seed(config.master_seed, delta_index, rep);

  SolveOptions options;
  options.tol = config.tol;
  options.max_iter = config.max_iter;

  try {
    const TruncatedSequence y_delta = generate_noisy_data(y, rec.delta, op.image_norm(), rec.seed);
    const TikhonovProblem base(op, y_delta, config.p, 1.0, config.elastic_eta);
    Vector x;
    if (const auto* sdp = std::get_if<SDPRule>(&config.rule)) {
      SDPResult result = alpha_sdp(*sdp, base, rec.delta, options);
      rec.alpha = result.alpha;
      rec.sdp_flag = result.flag;
      rec.converged = true;
      for (const auto& step : result.trace) rec.max_violation = std::max(rec.max_violation, step.optimality_violation);
      rec.solves = result.trace.size();
      x = result.solution.x.values();
    } else {
      rec.alpha = alpha_a_priori(std::get<APrioriRule>(config.rule), rec.delta);
      const TikhonovProblem problem = base.with_alpha(rec.alpha);
      SolveResult result = solve_tikhonov(problem, options);
      rec.converged = result.diagnostics.converged;
      rec.max_violation = optimality_violation(problem, result.x.values());
      rec.solves = 1;
      x = result.x.values();
      if (!rec.converged) {
        rec.failed = true;
        rec.failure_kind = FailureKind::NonConvergence;
        rec.failure = "solver did not converge";
      }
    }
    rec.discrepancy = norm(op.apply(x) - y_delta.values(), op.image_norm());
    rec.error_l1 = (x - x_true.values()).lpNorm<1>();
  } catch (const DiscrepancyUnreachable& e) {
    rec.failed = true;
    rec.failure_kind = FailureKind::DiscrepancyUnreachable;
    rec.failure = e.what();
  } catch (const NonConvergence& e) {
    rec.failed = true;
    rec.failure_kind = FailureKind::NonConvergence;
    rec.failure = e.what();
  } catch (const Error& e) {
    rec.failed = true;
    rec.failure_kind = FailureKind::Other;
    rec.failure = e.what();
  }
  return rec;
}

}  // namespace

RateStudy run_rate_study(const RateStudyConfig& config) {
  config.validate();
  RateStudy study;
  study.truncation_tail = tail_sum(config.model, config.n);
  study.truncation_ok = study.truncation_tail <= 0.01 * config.deltas.back();
  if (config.strict_truncation && !study.truncation_ok)
    throw InvalidArgument(fmt::format("rate study: tail beyond N = {} is {:.3g}, above 0.01 * min delta", config.n,
                                      study.truncation_tail));

  const OperatorTruncation op = assemble(config.op_spec, config.n, config.image_norm);
  const TruncatedSequence x_true = materialize(config.model, config.n);
  const TruncatedSequence y = apply(op, x_true);

  const std::size_t total = config.deltas.size() * config.repetitions;
  study.records.resize(total);
  const auto work = [&](std::size_t i) {
    study.records[i] = run_record(config, op, x_true, y, i / config.repetitions, i % config.repetitions);
  };
  if (config.jobs <= 1) {
    for (std::size_t i = 0; i < total; ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < std::min(config.jobs, total); ++w)
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < total; i = next++) work(i);
      });
    for (auto& t : workers) t.join();
  }

  std::vector<std::pair<double, double>> pairs;
  for (const auto& r : study.records) {
    if (r.failed) {
      ++study.n_failed;
      continue;
    }
    if (r.error_l1 > 0.0) pairs.emplace_back(r.delta, r.error_l1);
  }
  study.slope = std::nan("");
  study.slope_stderr = std::nan("");
  bool fitted = false;
  try {
    const SlopeFit fit = fit_loglog_slope(pairs);
    study.slope = fit.slope;
    study.slope_stderr = fit.stderr_;
    fitted = true;
  } catch (const InvalidArgument&) {
  }
  study.valid = fitted && 5 * study.n_failed <= total;

  if (config.gamma && config.deltas.size() >= 4 && config.deltas.front() < 1.0) {
    const SmoothnessProfile profile = SmoothnessProfile::from_model(config.model, *config.gamma, config.n);
    study.predicted_exponent = predicted_exponent(profile, config.deltas);
  }
  return study;
}

SlopeFit fit_loglog_slope(const std::vector<std::pair<double, double>>& pairs) {
  require(pairs.size() >= 3, "fit_loglog_slope: need at least 3 pairs");
  const auto m = static_cast<double>(pairs.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [d, e] : pairs) {
    require(d > 0.0 && e > 0.0 && std::isfinite(d) && std::isfinite(e), "fit_loglog_slope: pairs must be positive");
    mx += std::log(d);
    my += std::log(e);
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [d, e] : pairs) {
    sxx += (std::log(d) - mx) * (std::log(d) - mx);
    sxy += (std::log(d) - mx) * (std::log(e) - my);
  }
  require(sxx > 0.0, "fit_loglog_slope: all deltas are equal");
  const double slope = sxy / sxx;
  double ssr = 0.0;
  for (const auto& [d, e] : pairs) {
    const double r = std::log(e) - my - slope * (std::log(d) - mx);
    ssr += r * r;
  }
  return SlopeFit{slope, std::sqrt(ssr / (m - 2.0) / sxx)};
}

double predicted_exponent(const SmoothnessProfile& profile, const std::vector<double>& t_grid) {
  require(t_grid.size() >= 4, "predicted_exponent: need at least 4 grid points");
  std::vector<std::pair<double, double>> pairs;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const double t = t_grid[i];
    require(t > 0.0 && t < 1.0, "predicted_exponent: grid must lie in (0, 1)");
    require(i == 0 || t < t_grid[i - 1], "predicted_exponent: grid must be decreasing");
    const double phi = phi_eval(profile, t).value;
    require(phi > 0.0, "predicted_exponent: phi vanishes on the grid (degenerate profile)");
    pairs.emplace_back(t, phi);
  }
  return fit_loglog_slope(pairs).slope;
}

void write_records_csv(std::ostream& out, const RateStudy& study) {
  csv::Writer w(out, {"delta", "rep", "seed", "alpha", "discrepancy", "error_l1", "converged", "sdp_flag"});
  for (const auto& r : study.records) {
    const std::string flag = r.failed ? std::string("failed") : to_string(r.sdp_flag);
    w.row({csv::cell(r.delta), csv::cell(static_cast<std::uint64_t>(r.rep)), csv::cell(r.seed), csv::cell(r.alpha),
           csv::cell(r.discrepancy), csv::cell(r.error_l1), csv::cell(r.converged), flag});
  }
}

void write_summary_csv(std::ostream& out, const RateStudy& study) {
  csv::Writer w(out, {"slope", "stderr", "predicted_exponent", "n_failed"});
  w.row({csv::cell(study.slope), csv::cell(study.slope_stderr),
         study.predicted_exponent ? csv::cell(*study.predicted_exponent) : std::string("nan"),
         csv::cell(static_cast<std::uint64_t>(study.n_failed))});
}

void write_loglog_data(std::ostream& out, const RateStudy& study, const std::vector<double>& deltas) {
  const auto medians = study.median_errors(deltas.size());
  out << "# delta median_error_l1\n";
  for (std::size_t i = 0; i < deltas.size(); ++i)
    out << csv::format_double(deltas[i]) << ' ' << csv::format_double(medians[i]) << '\n';
}

}  // namespace l1reg
