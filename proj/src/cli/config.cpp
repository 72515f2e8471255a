#include "l1reg/cli/config.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>

namespace l1reg::cli {

Section::Section(const json& in, json& echo, std::string path) : in_(in), echo_(echo), path_(std::move(path)) {
  if (!in_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  if (!echo_.is_object()) echo_ = json::object();
}

bool Section::has(const std::string& key) const { return in_.contains(key); }

const json& Section::lookup(const std::string& key, bool& found) {
  consumed_.insert(key);
  found = in_.contains(key);
  static const json null_value;
  return found ? in_.at(key) : null_value;
}

void Section::fail(const std::string& key, const std::string& message) const { throw ConfigError(field(key), message); }

double Section::number(const std::string& key, std::optional<double> fallback) {
  bool found = false;
  const json& v = lookup(key, found);
  double out = 0.0;
  if (!found) {
    if (!fallback) fail(key, "required number is missing");
    out = *fallback;
  } else {
    if (!v.is_number()) fail(key, "expected a number");
    out = v.get<double>();
    if (!std::isfinite(out)) fail(key, "expected a finite number");
  }
  echo_[key] = out;
  return out;
}

std::size_t Section::count(const std::string& key, std::optional<std::size_t> fallback) {
  bool found = false;
  const json& v = lookup(key, found);
  std::size_t out = 0;
  if (!found) {
    if (!fallback) fail(key, "required integer is missing");
    out = *fallback;
  } else {
    if (!v.is_number_integer() || v.get<long long>() < 0) fail(key, "expected a nonnegative integer");
    out = v.get<std::size_t>();
  }
  echo_[key] = out;
  return out;
}

std::uint64_t Section::u64(const std::string& key, std::optional<std::uint64_t> fallback) {
  bool found = false;
  const json& v = lookup(key, found);
  std::uint64_t out = 0;
  if (!found) {
    if (!fallback) fail(key, "required integer is missing");
    out = *fallback;
  } else {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      fail(key, "expected an unsigned integer");
    out = v.get<std::uint64_t>();
  }
  echo_[key] = out;
  return out;
}

bool Section::flag(const std::string& key, std::optional<bool> fallback) {
  bool found = false;
  const json& v = lookup(key, found);
  bool out = false;
  if (!found) {
    if (!fallback) fail(key, "required boolean is missing");
    out = *fallback;
  } else {
    if (!v.is_boolean()) fail(key, "expected true or false");
    out = v.get<bool>();
  }
  echo_[key] = out;
  return out;
}

std::string Section::text(const std::string& key, std::optional<std::string> fallback) {
  bool found = false;
  const json& v = lookup(key, found);
  std::string out;
  if (!found) {
    if (!fallback) fail(key, "required string is missing");
    out = *fallback;
  } else {
    if (!v.is_string()) fail(key, "expected a string");
    out = v.get<std::string>();
  }
  echo_[key] = out;
  return out;
}

std::vector<double> Section::numbers(const std::string& key, std::optional<std::vector<double>> fallback) {
  bool found = false;
  const json& v = lookup(key, found);
  std::vector<double> out;
  if (!found) {
    if (!fallback) fail(key, "required list of numbers is missing");
    out = *fallback;
  } else {
    if (!v.is_array()) fail(key, "expected a list of numbers");
    for (const auto& e : v) {
      if (!e.is_number() || !std::isfinite(e.get<double>())) fail(key, "expected a list of finite numbers");
      out.push_back(e.get<double>());
    }
  }
  echo_[key] = out;
  return out;
}

std::vector<std::size_t> Section::counts(const std::string& key, std::optional<std::vector<std::size_t>> fallback) {
  bool found = false;
  const json& v = lookup(key, found);
  std::vector<std::size_t> out;
  if (!found) {
    if (!fallback) fail(key, "required list of integers is missing");
    out = *fallback;
  } else {
    if (!v.is_array()) fail(key, "expected a list of nonnegative integers");
    for (const auto& e : v) {
      if (!e.is_number_integer() || e.get<long long>() < 0) fail(key, "expected a list of nonnegative integers");
      out.push_back(e.get<std::size_t>());
    }
  }
  echo_[key] = out;
  return out;
}

Section Section::child(const std::string& key) {
  bool found = false;
  const json& v = lookup(key, found);
  if (!found) fail(key, "required section is missing");
  if (!v.is_object()) fail(key, "expected an object");
  return Section(v, echo_[key], field(key));
}

const json& Section::raw(const std::string& key) {
  bool found = false;
  const json& v = lookup(key, found);
  if (!found) fail(key, "required field is missing");
  return v;
}

void Section::echo_raw(const std::string& key, const json& value) { echo_[key] = value; }

void Section::finish() const {
  for (const auto& [key, value] : in_.items())
    if (!consumed_.count(key)) fail(key, "unknown field");
}

json load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open config file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string(), std::string("malformed JSON: ") + e.what());
  }
}

namespace {

template <class F>
auto guarded(Section& s, const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    s.fail(key, e.what());
  }
}

OperatorSpec read_operator_spec(Section& s) {
  const std::string kind = s.text("kind");
  return guarded(s, "kind", [&]() -> OperatorSpec {
    if (kind == "identity") return OperatorSpec::identity();
    if (kind == "embedding") return OperatorSpec::embedding(s.number("q", 2.0));
    if (kind == "bidiagonal_sum") return OperatorSpec::bidiagonal_sum();
    if (kind == "first_row_summation") return OperatorSpec::first_row_summation();
    if (kind == "diagonal") {
      if (s.has("sigma_values")) return OperatorSpec::diagonal_values(s.numbers("sigma_values"));
      const double scale = s.number("sigma_scale", 1.0);
      const double exponent = s.number("sigma_exponent", 0.5);
      return OperatorSpec::diagonal_power(scale, exponent);
    }
    s.fail("kind", fmt::format("unknown operator kind '{}' (expected identity, embedding, bidiagonal_sum, "
                               "first_row_summation or diagonal)",
                               kind));
  });
}

NormKind read_norm(Section& s, const std::string& key, const std::string& fallback) {
  const std::string name = s.text(key, fallback);
  return guarded(s, key, [&] { return parse_norm_kind(name); });
}

OperatorSpec read_spec_only(Section s) {
  OperatorSpec spec = read_operator_spec(s);
  s.finish();
  return spec;
}

}  // namespace

OperatorConfig read_operator(Section s) {
  OperatorConfig out;
  out.spec = read_operator_spec(s);
  out.n = s.count("n");
  if (out.n < 1) s.fail("n", "truncation level must be >= 1");
  out.image_norm = read_norm(s, "image_norm", "l2");
  s.finish();
  return out;
}

SequenceModel read_model(Section s) {
  const std::string kind = s.text("kind");
  SequenceModel model = guarded(s, "kind", [&]() -> SequenceModel {
    if (kind == "sparse") return SequenceModel::sparse(s.counts("support"), s.numbers("values"));
    if (kind == "power_decay") return SequenceModel::power_decay(s.number("exponent"), s.number("scale", 1.0));
    if (kind == "exponential_decay")
      return SequenceModel::exponential_decay(s.number("rate"), s.number("scale", 1.0));
    s.fail("kind", fmt::format("unknown model kind '{}' (expected sparse, power_decay or exponential_decay)", kind));
  });
  s.finish();
  return model;
}

GammaSequence read_gamma(Section s) {
  const std::string kind = s.text("kind", "linear");
  GammaSequence gamma = guarded(s, "kind", [&]() -> GammaSequence {
    if (kind == "linear") return linear_gamma(s.number("factor", 1.0));
    if (kind == "constant") return constant_gamma(s.number("value"));
    s.fail("kind", fmt::format("unknown gamma kind '{}' (expected linear or constant)", kind));
  });
  s.finish();
  return gamma;
}

namespace {

void read_command(Section& root, const std::string& expected) {
  if (root.has("command")) {
    const std::string command = root.text("command");
    if (command != expected) root.fail("command", fmt::format("config is for '{}', not '{}'", command, expected));
  } else {
    root.echo_raw("command", expected);
  }
}

Section analysis_section(Section& root, const std::string& name) {
  read_command(root, "analyze");
  Section analyze = root.child("analyze");
  return analyze.child(name);
}

void finish_analysis(Section& root, const json& config, const std::string& name) {
  // Only the selected analysis is read; siblings are ignored but must be objects.
  for (const auto& [key, value] : config.at("analyze").items())
    if (key != name && !value.is_object()) throw ConfigError("analyze." + key, "expected an object");
  root.finish();
}

}  // namespace

SolveRun parse_solve(const json& config, json& echo) {
  Section root(config, echo, "");
  read_command(root, "solve");
  SolveRun run;
  run.op = read_operator(root.child("operator"));
  Section s = root.child("solve");
  run.p = s.number("p", 2.0);
  run.alpha = s.number("alpha");
  run.elastic_eta = s.number("elastic_eta", 0.0);
  run.tol = s.number("tol", 1e-10);
  run.max_iter = s.count("max_iter", 100000);
  if (run.tol <= 0.0) s.fail("tol", "must be positive");
  if (run.max_iter < 1) s.fail("max_iter", "must be >= 1");

  const json& data = s.raw("data");
  if (data.is_array()) {
    run.data = s.numbers("data");
  } else if (data.is_object()) {
    Section d = s.child("data");
    const SequenceModel model = read_model(d.child("model"));
    const double delta = d.number("delta", 0.0);
    const std::uint64_t seed = d.u64("seed", 1);
    d.finish();
    const OperatorTruncation op = assemble(run.op.spec, run.op.n, run.op.image_norm);
    TruncatedSequence y = apply(op, materialize(model, run.op.n));
    if (delta > 0.0) y = generate_noisy_data(y, delta, run.op.image_norm, seed);
    run.data.assign(y.values().data(), y.values().data() + y.size());
  } else {
    s.fail("data", "expected a list of numbers or a {model, delta, seed} object");
  }
  if (run.data.size() != run.op.n)
    s.fail("data", fmt::format("has {} entries but operator.n is {}", run.data.size(), run.op.n));
  s.finish();
  root.finish();
  return run;
}

RateStudyConfig parse_rates(const json& config, json& echo) {
  Section root(config, echo, "");
  read_command(root, "rates");
  RateStudyConfig study;
  const OperatorConfig op = read_operator(root.child("operator"));
  study.op_spec = op.spec;
  study.n = op.n;
  study.image_norm = op.image_norm;
  study.model = read_model(root.child("model"));

  Section s = root.child("rates");
  study.deltas = s.numbers("deltas", RateStudyConfig::default_delta_grid());
  if (study.deltas.empty()) s.fail("deltas", "delta grid is empty");
  study.repetitions = s.count("repetitions", 5);
  study.master_seed = s.u64("seed", study.master_seed);
  study.p = s.number("p", 2.0);
  study.elastic_eta = s.number("elastic_eta", 0.0);
  study.tol = s.number("tol", 1e-10);
  study.max_iter = s.count("max_iter", 100000);
  study.strict_truncation = s.flag("strict_truncation", false);
  if (s.has("gamma")) study.gamma = read_gamma(s.child("gamma"));

  Section rule = s.child("rule");
  const std::string kind = rule.text("kind", "sdp");
  if (kind == "sdp") {
    SDPRule sdp;
    sdp.tau = rule.number("tau", sdp.tau);
    sdp.q = rule.number("q", sdp.q);
    sdp.j_max = rule.count("j_max", sdp.j_max);
    if (rule.has("alpha0") && rule.raw("alpha0").is_number())
      sdp.alpha0 = rule.number("alpha0");
    else if (rule.has("alpha0") && rule.raw("alpha0") != "auto")
      rule.fail("alpha0", "expected a number or \"auto\"");
    else
      rule.echo_raw("alpha0", "auto");
    guarded(rule, "kind", [&] {
      sdp.validate();
      return 0;
    });
    study.rule = sdp;
  } else if (kind == "a_priori") {
    Section phi = rule.child("phi");
    const std::string phi_kind = phi.text("kind", "power");
    study.rule = guarded(phi, "kind", [&]() -> APrioriRule {
      if (phi_kind == "power") {
        const double exponent = phi.number("exponent", 1.0);
        const double factor = phi.number("factor", 1.0);
        return APrioriRule(study.p, power_index_function(exponent, factor));
      }
      if (phi_kind == "profile") {
        const GammaSequence gamma = read_gamma(phi.child("gamma"));
        return APrioriRule(study.p, as_index_function(SmoothnessProfile::from_truncation(
                                        materialize(study.model, study.n), gamma)));
      }
      phi.fail("kind", fmt::format("unknown index function '{}' (expected power or profile)", phi_kind));
    });
    phi.finish();
  } else {
    rule.fail("kind", fmt::format("unknown rule '{}' (expected sdp or a_priori)", kind));
  }
  rule.finish();
  s.finish();
  root.finish();
  try {
    study.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError("rates", e.what());
  }
  return study;
}

PhiRun parse_phi(const json& config, json& echo) {
  Section root(config, echo, "");
  Section s = analysis_section(root, "phi");
  PhiRun run;
  run.model = read_model(s.child("model"));
  run.gamma = read_gamma(s.child("gamma"));
  run.n_max = s.count("n_max", 1000);
  run.t_min = s.number("t_min", 1e-8);
  run.t_max = s.number("t_max", 1.0);
  run.points = s.count("points", 200);
  if (run.n_max < 1) s.fail("n_max", "must be >= 1");
  if (!(run.t_min > 0.0 && run.t_max > run.t_min)) s.fail("t_min", "need 0 < t_min < t_max");
  if (run.points < 4) s.fail("points", "need at least 4 points");
  s.finish();
  finish_analysis(root, config, "phi");
  return run;
}

WitnessRun parse_witness(const json& config, json& echo) {
  Section root(config, echo, "");
  Section s = analysis_section(root, "witness");
  WitnessRun run;
  run.spec = read_spec_only(s.child("operator"));
  run.xi = s.numbers("xi");
  run.mu = s.number("mu", 0.0);
  const std::string tail = s.text("tail", "alternating");
  if (tail == "alternating")
    run.tail = WitnessTail::Alternating;
  else if (tail == "decaying")
    run.tail = WitnessTail::Decaying;
  else
    s.fail("tail", "expected alternating or decaying");
  run.truncation = s.count("truncation", std::max<std::size_t>(run.xi.size(), 1) + 4);
  s.finish();
  finish_analysis(root, config, "witness");
  return run;
}

ConditioningRun parse_conditioning(const json& config, json& echo) {
  Section root(config, echo, "");
  Section s = analysis_section(root, "conditioning");
  ConditioningRun run;
  run.spec = read_spec_only(s.child("operator"));
  run.grid = s.counts("grid");
  if (run.grid.empty()) s.fail("grid", "grid is empty");
  s.finish();
  finish_analysis(root, config, "conditioning");
  return run;
}

WeakStarRun parse_weakstar(const json& config, json& echo) {
  Section root(config, echo, "");
  Section s = analysis_section(root, "weakstar");
  WeakStarRun run;
  run.spec = read_spec_only(s.child("operator"));
  run.k = s.count("k");
  if (run.k < 1) s.fail("k", "must be >= 1");
  const json& probe = s.raw("probe");
  if (probe.is_array()) {
    const auto values = s.numbers("probe");
    if (values.empty()) s.fail("probe", "probe is empty");
    run.probe = TruncatedSequence(Vector(Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()))));
  } else if (probe == "constant-one") {
    s.text("probe");
    run.probe = ConstantOneProbe{};
  } else if (probe == "harmonic") {
    s.text("probe");
    Vector xi(static_cast<Eigen::Index>(run.k));
    for (Eigen::Index i = 0; i < xi.size(); ++i) xi(i) = 1.0 / static_cast<double>(i + 1);
    run.probe = TruncatedSequence(std::move(xi));
  } else {
    s.fail("probe", "expected a list of numbers, \"constant-one\" or \"harmonic\"");
  }
  s.finish();
  finish_analysis(root, config, "weakstar");
  return run;
}

VscRun parse_vsc(const json& config, json& echo) {
  Section root(config, echo, "");
  Section s = analysis_section(root, "vsc");
  VscRun run;
  run.op = read_operator(s.child("operator"));
  run.model = read_model(s.child("model"));
  run.gamma = read_gamma(s.child("gamma"));
  const std::string tail = s.text("tail", "truncated");
  if (tail != "truncated" && tail != "analytic") s.fail("tail", "expected truncated or analytic");
  run.analytic_tail = tail == "analytic";
  run.beta = s.number("beta", 1.0);
  if (!(run.beta > 0.0 && run.beta <= 1.0)) s.fail("beta", "must lie in (0, 1]");
  run.samples = s.count("samples", 1000);
  run.seed = s.u64("seed", 1);
  s.finish();
  finish_analysis(root, config, "vsc");
  return run;
}

GammaRun parse_gamma(const json& config, json& echo) {
  Section root(config, echo, "");
  Section s = analysis_section(root, "gamma");
  GammaRun run;
  run.spec = read_spec_only(s.child("operator"));
  run.n_max = s.count("n_max", 4);
  run.dim = s.count("dim", run.n_max);
  run.dual_norm = read_norm(s, "dual_norm", "l2");
  if (run.n_max < 1 || run.n_max > kMaxSignedSupTerms)
    s.fail("n_max", fmt::format("must lie in [1, {}]", kMaxSignedSupTerms));
  if (run.dim < run.n_max) s.fail("dim", "must be >= n_max");
  s.finish();
  finish_analysis(root, config, "gamma");
  return run;
}

}  // namespace l1reg::cli
