#pragma once

// JSON run configuration. Every value read is also written into an "echo"
// document, so the echo holds the effective configuration with defaults made
// explicit and re-parses to the same run. Unknown keys are rejected with the
// offending field path.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "l1reg/errors.hpp"
#include "l1reg/operators.hpp"
#include "l1reg/rates.hpp"
#include "l1reg/source_conditions.hpp"

namespace l1reg::cli {

using json = nlohmann::ordered_json;

class ConfigError : public InvalidArgument {
 public:
  ConfigError(const std::string& path, const std::string& message)
      : InvalidArgument(path + ": " + message), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Reader over one JSON object that records consumed keys into an echo object.
class Section {
 public:
  Section(const json& in, json& echo, std::string path);

  bool has(const std::string& key) const;
  double number(const std::string& key, std::optional<double> fallback = std::nullopt);
  std::size_t count(const std::string& key, std::optional<std::size_t> fallback = std::nullopt);
  std::uint64_t u64(const std::string& key, std::optional<std::uint64_t> fallback = std::nullopt);
  bool flag(const std::string& key, std::optional<bool> fallback = std::nullopt);
  std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt);
  std::vector<double> numbers(const std::string& key, std::optional<std::vector<double>> fallback = std::nullopt);
  std::vector<std::size_t> counts(const std::string& key, std::optional<std::vector<std::size_t>> fallback = std::nullopt);
  Section child(const std::string& key);
  /// Raw access for values with several admissible shapes.
  const json& raw(const std::string& key);
  void echo_raw(const std::string& key, const json& value);

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  [[noreturn]] void fail(const std::string& key, const std::string& message) const;

  /// Rejects keys present in the input that were never read.
  void finish() const;

 private:
  const json& lookup(const std::string& key, bool& found);

  const json& in_;
  json& echo_;
  std::string path_;
  std::set<std::string> consumed_;
};

json load_config_file(const std::filesystem::path& path);

struct OperatorConfig {
  OperatorSpec spec = OperatorSpec::identity();
  std::size_t n = 1;
  NormKind image_norm = NormKind::L2;
};

OperatorConfig read_operator(Section section);
SequenceModel read_model(Section section);
GammaSequence read_gamma(Section section);

struct SolveRun {
  OperatorConfig op;
  std::vector<double> data;
  double p = 2.0;
  double alpha = 1.0;
  double elastic_eta = 0.0;
  double tol = 1e-10;
  std::size_t max_iter = 100000;
};

struct PhiRun {
  SequenceModel model = SequenceModel::sparse({1}, {1.0});
  GammaSequence gamma;
  std::size_t n_max = 1000;
  double t_min = 1e-8;
  double t_max = 1.0;
  std::size_t points = 200;
};

struct WitnessRun {
  OperatorSpec spec = OperatorSpec::bidiagonal_sum();
  std::vector<double> xi;
  double mu = 0.0;
  WitnessTail tail = WitnessTail::Alternating;
  std::size_t truncation = 1;
};

struct ConditioningRun {
  OperatorSpec spec = OperatorSpec::identity();
  std::vector<std::size_t> grid;
};

struct WeakStarRun {
  OperatorSpec spec = OperatorSpec::identity();
  std::size_t k = 1;
  WeakStarProbe probe = ConstantOneProbe{};
};

struct VscRun {
  OperatorConfig op;
  SequenceModel model = SequenceModel::sparse({1}, {1.0});
  GammaSequence gamma;
  bool analytic_tail = false;
  double beta = 1.0;
  std::size_t samples = 1000;
  std::uint64_t seed = 1;
};

struct GammaRun {
  OperatorSpec spec = OperatorSpec::identity();
  std::size_t n_max = 4;
  std::size_t dim = 4;
  NormKind dual_norm = NormKind::L2;
};

/// Parsers take the whole config document and return the run plus its echo.
SolveRun parse_solve(const json& config, json& echo);
RateStudyConfig parse_rates(const json& config, json& echo);
PhiRun parse_phi(const json& config, json& echo);
WitnessRun parse_witness(const json& config, json& echo);
ConditioningRun parse_conditioning(const json& config, json& echo);
WeakStarRun parse_weakstar(const json& config, json& echo);
VscRun parse_vsc(const json& config, json& echo);
GammaRun parse_gamma(const json& config, json& echo);

}  // namespace l1reg::cli
