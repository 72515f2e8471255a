#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "generators.hpp"
#include "l1reg/errors.hpp"
#include "l1reg/rates.hpp"

using namespace l1reg;
using l1reg::testing::for_all;
using l1reg::testing::Gen;

namespace {

RateStudyConfig small_study() {
  RateStudyConfig c;
  c.op_spec = OperatorSpec::bidiagonal_sum();
  c.n = 60;
  c.model = SequenceModel::sparse({2, 7, 20}, {1.0, -0.5, 0.8});
  c.deltas = {1e-1, std::pow(10.0, -1.5), 1e-2, std::pow(10.0, -2.5), 1e-3};
  c.repetitions = 3;
  c.master_seed = 77;
  return c;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST(Noise, ExactLevelInEachNorm) {
  for_all(50, 200, [](Gen& g) {
    const std::size_t n = g.index(1, 300);
    const TruncatedSequence y(g.gaussian(n));
    const double delta = g.log_uniform(1e-8, 1.0);
    for (NormKind kind : {NormKind::L1, NormKind::L2}) {
      const auto noisy = generate_noisy_data(y, delta, kind, g.engine()());
      EXPECT_NEAR(norm(Vector(noisy.values() - y.values()), kind), delta, 1e-12 * std::max(1.0, delta));
    }
  });
}

TEST(Noise, DeterministicPerSeed) {
  const TruncatedSequence y(Vector::LinSpaced(20, -1.0, 1.0));
  EXPECT_EQ(generate_noisy_data(y, 0.1, NormKind::L2, 9).values(), generate_noisy_data(y, 0.1, NormKind::L2, 9).values());
  EXPECT_NE(generate_noisy_data(y, 0.1, NormKind::L2, 9).values(), generate_noisy_data(y, 0.1, NormKind::L2, 10).values());
  EXPECT_THROW(generate_noisy_data(y, 0.0, NormKind::L2, 1), InvalidArgument);
}

TEST(Seeds, DistinctAndStable) {
  std::set<std::uint64_t> seen;
  for (std::size_t d = 0; d < 20; ++d)
    for (std::size_t r = 0; r < 50; ++r) seen.insert(derive_seed(42, d, r));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_EQ(derive_seed(42, 3, 4), derive_seed(42, 3, 4));
  EXPECT_NE(derive_seed(42, 3, 4), derive_seed(43, 3, 4));
}

TEST(SlopeFit, Examples) {
  const auto deltas = RateStudyConfig::default_delta_grid();
  std::vector<std::pair<double, double>> lin, root, scaled;
  for (double d : deltas) {
    lin.emplace_back(d, d);
    root.emplace_back(d, std::sqrt(d));
    scaled.emplace_back(d, 7.5 * d);
  }
  EXPECT_NEAR(fit_loglog_slope(lin).slope, 1.0, 1e-12);
  EXPECT_NEAR(fit_loglog_slope(lin).stderr_, 0.0, 1e-12);
  EXPECT_NEAR(fit_loglog_slope(root).slope, 0.5, 1e-12);
  EXPECT_NEAR(fit_loglog_slope(root).stderr_, 0.0, 1e-12);
  EXPECT_NEAR(fit_loglog_slope(scaled).slope, 1.0, 1e-12);
  EXPECT_THROW(fit_loglog_slope({{0.1, 0.1}, {0.01, 0.01}}), InvalidArgument);
  EXPECT_THROW(fit_loglog_slope({{0.1, 0.1}, {0.01, 0.01}, {0.001, 0.0}}), InvalidArgument);
}

TEST(SlopeFit, MatchesTextbookFormulas) {
  for_all(51, 50, [](Gen& g) {
    const std::size_t m = g.index(3, 12);
    std::vector<std::pair<double, double>> pairs;
    for (std::size_t i = 0; i < m; ++i) pairs.emplace_back(g.log_uniform(1e-5, 1.0), g.log_uniform(1e-5, 1.0));
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto [d, e] : pairs) {
      sx += std::log(d);
      sy += std::log(e);
      sxx += std::log(d) * std::log(d);
      sxy += std::log(d) * std::log(e);
    }
    const double k = static_cast<double>(m);
    const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    const double icpt = (sy - slope * sx) / k;
    double rss = 0;
    for (auto [d, e] : pairs) rss += std::pow(std::log(e) - icpt - slope * std::log(d), 2);
    const double se = std::sqrt(rss / (k - 2.0) / (sxx - sx * sx / k));
    const auto fit = fit_loglog_slope(pairs);
    EXPECT_NEAR(fit.slope, slope, 1e-9 * std::max(1.0, std::abs(slope)));
    EXPECT_NEAR(fit.stderr_, se, 1e-8 * std::max(1.0, se));
  });
}

TEST(PredictedExponent, Examples) {
  const auto grid = log_grid(1e-8, 1e-2, 13);
  std::vector<double> t(grid.rbegin(), grid.rend());
  const auto sparse = SmoothnessProfile::from_model(SequenceModel::sparse({1, 3}, {1.0, 2.0}), linear_gamma(), 100);
  EXPECT_NEAR(predicted_exponent(sparse, t), 1.0, 1e-9);
  const auto p2 = SmoothnessProfile::from_model(SequenceModel::power_decay(2.0), linear_gamma(), 100000);
  EXPECT_NEAR(predicted_exponent(p2, t), 0.5, 0.02);
  const auto p3 = SmoothnessProfile::from_model(SequenceModel::power_decay(3.0), linear_gamma(), 100000);
  EXPECT_NEAR(predicted_exponent(p3, t), 2.0 / 3.0, 0.02);
  EXPECT_THROW(predicted_exponent(sparse, {1e-2, 1e-3, 1e-4}), InvalidArgument);
  EXPECT_THROW(predicted_exponent(sparse, {2.0, 1e-3, 1e-4, 1e-5}), InvalidArgument);
}

TEST(Study, ConfigValidation) {
  auto c = small_study();
  c.deltas.clear();
  EXPECT_THROW(run_rate_study(c), InvalidArgument);
  c = small_study();
  c.deltas = {1e-3, 1e-2, 1e-1};
  EXPECT_THROW(run_rate_study(c), InvalidArgument);
  c = small_study();
  c.repetitions = 0;
  EXPECT_THROW(run_rate_study(c), InvalidArgument);
  c = small_study();
  c.jobs = 0;
  EXPECT_THROW(run_rate_study(c), InvalidArgument);
}

TEST(Study, ParallelMatchesSequential) {
  auto c = small_study();
  const RateStudy serial = run_rate_study(c);
  c.jobs = 3;
  const RateStudy parallel = run_rate_study(c);
  std::ostringstream a, b;
  write_records_csv(a, serial);
  write_records_csv(b, parallel);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(serial.slope, parallel.slope);
}

TEST(Study, RecordsAndCsv) {
  const auto c = small_study();
  const RateStudy study = run_rate_study(c);
  ASSERT_EQ(study.records.size(), c.deltas.size() * c.repetitions);
  for (std::size_t i = 0; i < study.records.size(); ++i) {
    const auto& r = study.records[i];
    EXPECT_EQ(r.delta_index, i / c.repetitions);
    EXPECT_EQ(r.rep, i % c.repetitions);
    EXPECT_EQ(r.seed, derive_seed(c.master_seed, r.delta_index, r.rep));
    EXPECT_FALSE(r.failed) << r.failure;
    EXPECT_LE(r.discrepancy, 1.5 * r.delta * (1 + 1e-12));
    EXPECT_LE(r.max_violation, 1e-7);
  }
  EXPECT_TRUE(study.valid);
  EXPECT_EQ(study.n_failed, 0u);

  std::ostringstream rec, sum, plot;
  write_records_csv(rec, study);
  write_summary_csv(sum, study);
  write_loglog_data(plot, study, c.deltas);
  const auto rl = lines(rec.str());
  ASSERT_EQ(rl.size(), study.records.size() + 1);
  EXPECT_EQ(rl[0], "delta,rep,seed,alpha,discrepancy,error_l1,converged,sdp_flag");
  for (std::size_t i = 1; i < rl.size(); ++i) EXPECT_EQ(std::count(rl[i].begin(), rl[i].end(), ','), 7);
  const auto sl = lines(sum.str());
  ASSERT_EQ(sl.size(), 2u);
  EXPECT_EQ(sl[0], "slope,stderr,predicted_exponent,n_failed");
  const auto pl = lines(plot.str());
  ASSERT_EQ(pl.size(), c.deltas.size() + 1);
  EXPECT_EQ(pl[0][0], '#');
}

TEST(Study, MedianErrorsShrinkWithDelta) {
  auto c = small_study();
  const RateStudy study = run_rate_study(c);
  const auto med = study.median_errors(c.deltas.size());
  std::size_t violations = 0;
  for (std::size_t i = 1; i < med.size(); ++i) violations += med[i] > med[i - 1];
  // At most 5% of steps, rounded down, may go the wrong way.
  EXPECT_LE(violations, med.size() / 20);
  EXPECT_GT(study.slope, 0.8);
}

TEST(Study, APrioriRule) {
  auto c = small_study();
  c.rule = APrioriRule(2.0, power_index_function(1.0));
  const RateStudy study = run_rate_study(c);
  for (const auto& r : study.records) {
    EXPECT_DOUBLE_EQ(r.alpha, r.delta);
    EXPECT_EQ(r.solves, 1u);
  }
  EXPECT_TRUE(study.valid);
}

TEST(Study, IdentityClosedForm) {
  RateStudyConfig c;
  c.n = 30;
  c.image_norm = NormKind::L1;
  c.p = 1.0;
  c.model = SequenceModel::sparse({1, 4}, {1.0, -2.0});
  SDPRule rule;
  rule.alpha0 = std::acos(-1.0);
  c.rule = rule;
  c.repetitions = 2;
  const RateStudy study = run_rate_study(c);
  EXPECT_TRUE(study.valid);
  // The closed form returns y^delta, so the l1 error equals delta.
  for (const auto& r : study.records) EXPECT_NEAR(r.error_l1, r.delta, 1e-12);
  EXPECT_NEAR(study.slope, 1.0, 1e-9);
}

TEST(Study, TruncationReport) {
  auto c = small_study();
  c.model = SequenceModel::power_decay(2.0);
  c.deltas = {1e-1, 1e-2, 1e-3};
  c.repetitions = 1;
  const RateStudy study = run_rate_study(c);
  EXPECT_NEAR(study.truncation_tail, tail_sum(c.model, c.n), 1e-15);
  EXPECT_FALSE(study.truncation_ok);
  c.strict_truncation = true;
  EXPECT_THROW(run_rate_study(c), InvalidArgument);
}
