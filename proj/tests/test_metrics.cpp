#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "site/metrics.hpp"
#include "test_util.hpp"

using namespace site;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using Labels = std::vector<std::uint32_t>;

namespace {

struct Data {
  MatrixXd x;
  Labels y;
};

/// Gaussian blobs: `per_class` rows for each of `classes` classes, centers
/// drawn with the given spread, unit within-class noise.
Data blobs(std::mt19937_64& rng, int per_class, int d, int classes, double spread) {
  std::normal_distribution<double> normal;
  MatrixXd centers(classes, d);
  for (int c = 0; c < classes; ++c)
    for (int j = 0; j < d; ++j) centers(c, j) = spread * normal(rng);
  Data out{MatrixXd(per_class * classes, d), {}};
  for (int i = 0; i < per_class * classes; ++i) {
    const int c = i % classes;
    out.y.push_back(static_cast<std::uint32_t>(c));
    for (int j = 0; j < d; ++j) out.x(i, j) = centers(c, j) + normal(rng);
  }
  return out;
}

double run(MetricId id, const MatrixXd& x, const Labels& y) {
  return compute_metric(x, y, MetricConfig::defaults(id)).value;
}

MatrixXd naive_covariance(const MatrixXd& x) {
  const auto n = x.rows(), d = x.cols();
  VectorXd mu = VectorXd::Zero(d);
  for (Eigen::Index i = 0; i < n; ++i) mu += x.row(i).transpose();
  mu /= static_cast<double>(n);
  MatrixXd c = MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index a = 0; a < d; ++a)
      for (Eigen::Index b = 0; b < d; ++b) c(a, b) += (x(i, a) - mu(a)) * (x(i, b) - mu(b));
  return c / static_cast<double>(n);
}

double hscore_oracle(const MatrixXd& x, const Labels& y) {
  const auto n = x.rows();
  const MatrixXd cov_f = naive_covariance(x);
  // E[f | y] assigned back to every row, then its covariance.
  const std::uint32_t classes = *std::max_element(y.begin(), y.end()) + 1;
  MatrixXd means = MatrixXd::Zero(classes, x.cols());
  std::vector<double> counts(classes, 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    means.row(y[i]) += x.row(i);
    counts[y[i]] += 1.0;
  }
  for (std::uint32_t c = 0; c < classes; ++c) means.row(c) /= counts[c];
  MatrixXd assigned(n, x.cols());
  for (Eigen::Index i = 0; i < n; ++i) assigned.row(i) = means.row(y[i]);
  const MatrixXd cov_z = naive_covariance(assigned);

  Eigen::JacobiSVD<MatrixXd> svd(cov_f, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const VectorXd s = svd.singularValues();
  VectorXd inv = VectorXd::Zero(s.size());
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (s(k) > 1e-10 * s(0)) inv(k) = 1.0 / s(k);
  const MatrixXd pinv = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
  return (pinv * cov_z).trace();
}

/// Direct dense evaluation of the Bayesian linear regression log evidence.
double evidence_dense(const MatrixXd& f, const VectorXd& t, double alpha, double beta) {
  const double n = static_cast<double>(f.rows());
  const double d = static_cast<double>(f.cols());
  const MatrixXd a = alpha * MatrixXd::Identity(f.cols(), f.cols()) + beta * f.transpose() * f;
  const Eigen::LDLT<MatrixXd> ldlt(a);
  const VectorXd m = beta * ldlt.solve(f.transpose() * t);
  const double logdet = ldlt.vectorD().array().log().sum();
  return 0.5 * n * std::log(beta) + 0.5 * d * std::log(alpha) - 0.5 * n * std::log(2 * std::numbers::pi) -
         0.5 * beta * (t - f * m).squaredNorm() - 0.5 * alpha * m.squaredNorm() - 0.5 * logdet;
}

double logme_grid_oracle(const MatrixXd& x, const Labels& y) {
  const std::uint32_t classes = *std::max_element(y.begin(), y.end()) + 1;
  double total = 0.0;
  for (std::uint32_t c = 0; c < classes; ++c) {
    VectorXd t(x.rows());
    for (Eigen::Index i = 0; i < t.size(); ++i) t(i) = y[i] == c ? 1.0 : 0.0;
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < 60; ++a)
      for (int b = 0; b < 60; ++b) {
        const double alpha = std::pow(10.0, -4.0 + 8.0 * a / 59.0);
        const double beta = std::pow(10.0, -4.0 + 8.0 * b / 59.0);
        best = std::max(best, evidence_dense(x, t, alpha, beta));
      }
    total += best / static_cast<double>(x.rows());
  }
  return total / classes;
}

}  // namespace

// ---------------------------------------------------------------------------
// H-Score

TEST(HScore, OneDimensionalExample) {
  MatrixXd x(4, 1);
  x << 1, 1, -1, -1;
  EXPECT_NEAR(run(MetricId::hscore, x, {0, 0, 1, 1}), 1.0, 1e-9);
}

TEST(HScore, EqualClassMeansGiveZero) {
  MatrixXd x(4, 2);
  x << 1, 2, -1, -2, 1, 2, -1, -2;
  EXPECT_NEAR(run(MetricId::hscore, x, {0, 0, 1, 1}), 0.0, 1e-12);
}

TEST(HScore, ConstantFeaturesAreRankDeficientNotAnError) {
  const MatrixXd x = MatrixXd::Constant(6, 3, 2.5);
  const auto s = compute_metric(x, Labels{0, 1, 0, 1, 0, 1}, MetricConfig::defaults(MetricId::hscore));
  EXPECT_EQ(s.value, 0.0);
  ASSERT_FALSE(s.notes.empty());
  EXPECT_NE(s.notes[0].find("rank-deficient"), std::string::npos);
}

TEST(HScore, MatchesNaiveOracle) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    auto data = blobs(rng, 50, 16, 4, 1.0);
    EXPECT_NEAR(run(MetricId::hscore, data.x, data.y), hscore_oracle(data.x, data.y), 1e-8);
  }
}

// ---------------------------------------------------------------------------
// LogME

TEST(LogME, FixedPointBeatsGridSearch) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    auto data = blobs(rng, 25, 8, 4, 0.5 + 0.1 * trial);
    const double fixed = run(MetricId::logme, data.x, data.y);
    EXPECT_GE(fixed, logme_grid_oracle(data.x, data.y) - 1e-2) << "trial " << trial;
  }
}

TEST(LogME, SvdEvidenceMatchesDenseEvidence) {
  std::mt19937_64 rng(23);
  auto data = blobs(rng, 20, 6, 3, 1.0);
  VectorXd t(data.x.rows());
  for (Eigen::Index i = 0; i < t.size(); ++i) t(i) = data.y[i] == 1 ? 1.0 : 0.0;
  for (double alpha : {1e-3, 0.5, 20.0})
    for (double beta : {1e-2, 1.0, 300.0})
      EXPECT_NEAR(logme_log_evidence(data.x, t, alpha, beta), evidence_dense(data.x, t, alpha, beta), 1e-8);
}

TEST(LogME, SeparableBeatsIdenticalRows) {
  // The regression has no intercept, so separable means each class on its own axis.
  MatrixXd same(6, 2), separable(6, 2);
  same.setOnes();
  separable << 3, 0.1, 3.1, 0, 2.9, -0.1, 0, 3, 0.1, 3.1, -0.1, 2.9;
  const Labels y{0, 0, 0, 1, 1, 1};
  EXPECT_GT(run(MetricId::logme, separable, y), run(MetricId::logme, same, y));
}

TEST(LogME, ZeroFeaturesGiveLabelMeanEvidence) {
  const MatrixXd x = MatrixXd::Zero(8, 3);
  const Labels y{0, 1, 0, 1, 0, 1, 0, 1};
  // F = 0: beta* = n / n_k and every alpha term cancels.
  const double expected = 0.5 * std::log(2.0) - 0.5 * std::log(2 * std::numbers::pi) - 0.5;
  const auto s = compute_metric(x, y, MetricConfig::defaults(MetricId::logme));
  EXPECT_NEAR(s.value, expected, 1e-9);
  EXPECT_TRUE(s.converged);
  EXPECT_EQ(s.diagnostics.count("class0.iterations"), 1u);
}

// ---------------------------------------------------------------------------
// NLEEP

TEST(NLEEP, SingleComponentGivesNegativeLabelEntropy) {
  std::mt19937_64 rng(29);
  auto data = blobs(rng, 30, 5, 2, 2.0);
  MetricConfig cfg = MetricConfig::defaults(MetricId::nleep);
  std::get<NLEEPOptions>(cfg.options).components = 1;
  EXPECT_NEAR(compute_metric(data.x, data.y, cfg).value, std::log(0.5), 1e-6);

  Labels skewed(data.y.size(), 0);
  for (std::size_t i = 0; i < skewed.size(); i += 4) skewed[i] = 1;
  const double p1 = 15.0 / 60.0;
  EXPECT_NEAR(compute_metric(data.x, skewed, cfg).value, p1 * std::log(p1) + (1 - p1) * std::log(1 - p1), 1e-9);
}

TEST(NLEEP, SeparatedClustersApproachZero) {
  std::mt19937_64 rng(31);
  auto data = blobs(rng, 40, 4, 2, 30.0);
  MetricConfig cfg = MetricConfig::defaults(MetricId::nleep);
  std::get<NLEEPOptions>(cfg.options).components = 2;
  const double v = compute_metric(data.x, data.y, cfg).value;
  EXPECT_LE(v, 0.0);
  EXPECT_GT(v, -1e-3);
}

TEST(NLEEP, AlwaysNonPositiveWithDiagnostics) {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 5; ++trial) {
    auto data = blobs(rng, 30, 12, 3, 0.5 * trial);
    const auto s = compute_metric(data.x, data.y, MetricConfig::defaults(MetricId::nleep));
    EXPECT_LE(s.value, 0.0);
    EXPECT_TRUE(std::isfinite(s.value));
    EXPECT_EQ(s.diagnostics.count("iterations"), 1u);
    EXPECT_EQ(s.diagnostics.at("components"), 9.0);  // min(5*3, 90/10)
  }
}

TEST(NLEEP, DuplicatedRowsPruneDegenerateComponents) {
  // Two distinct points repeated; asking for many components leaves some empty.
  MatrixXd x(40, 2);
  Labels y;
  for (int i = 0; i < 40; ++i) {
    x.row(i) << (i % 2 ? 5.0 : -5.0), 0.0;
    y.push_back(static_cast<std::uint32_t>(i % 2));
  }
  MetricConfig cfg = MetricConfig::defaults(MetricId::nleep);
  std::get<NLEEPOptions>(cfg.options).components = 6;
  const auto s = compute_metric(x, y, cfg);
  EXPECT_TRUE(std::isfinite(s.value));
  EXPECT_NEAR(s.value, 0.0, 1e-9);
  EXPECT_LE(s.diagnostics.at("components"), 6.0);
}

// ---------------------------------------------------------------------------
// TransRate

TEST(TransRate, ZeroFeatures) {
  EXPECT_NEAR(run(MetricId::transrate, MatrixXd::Zero(6, 4), {0, 1, 2, 0, 1, 2}), 0.0, 1e-12);
}

TEST(TransRate, TwoPointClassesMatchOneDimensionalOracle) {
  // classes at +mu / -mu, no within-class spread: only the total term survives.
  const double mu = 1.7;
  MatrixXd x(6, 1);
  x << mu, mu, mu, -mu, -mu, -mu;
  const double n = 6.0, eps = 1.0;
  const double lambda = (x.transpose() * x)(0, 0);
  EXPECT_NEAR(run(MetricId::transrate, x, {0, 0, 0, 1, 1, 1}), 0.5 * std::log(1.0 + lambda / (n * eps * eps)),
              1e-12);
}

TEST(TransRate, LogdetMatchesEigenvalueOracle) {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> normal;
  for (auto [n, d] : {std::pair{50, 8}, std::pair{10, 16}, std::pair{200, 16}}) {
    MatrixXd z(n, d);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) z(i, j) = normal(rng);
    for (double eps : {0.5, 1.0, 2.0}) {
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(z.transpose() * z);
      const double scale = d / (n * eps * eps);
      double oracle = 0.0;
      for (int k = 0; k < d; ++k) oracle += std::log1p(std::max(es.eigenvalues()(k), 0.0) * scale);
      EXPECT_NEAR(coding_rate(z, eps), 0.5 * oracle, 1e-8);
    }
  }
}

TEST(TransRate, NonNegativeOnRandomInputs) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 10; ++trial) {
    auto data = blobs(rng, 20, 6, 3, 0.3 * trial);
    EXPECT_GE(run(MetricId::transrate, data.x, data.y), -1e-9);
  }
}

// ---------------------------------------------------------------------------
// GBC

TEST(GBC, IdenticalClasses) {
  MatrixXd two(4, 1), three(6, 1);
  two << 1, 3, 1, 3;
  three << 1, 3, 1, 3, 1, 3;
  EXPECT_NEAR(run(MetricId::gbc, two, {0, 0, 1, 1}), -1.0, 1e-9);
  EXPECT_NEAR(run(MetricId::gbc, three, {0, 0, 1, 1, 2, 2}), -3.0, 1e-9);
}

TEST(GBC, UnitGaussiansFourApart) {
  // {-1, 1} and {3, 5}: population means 0 and 4, variances 1.
  MatrixXd x(4, 1);
  x << -1, 1, 3, 5;
  EXPECT_NEAR(run(MetricId::gbc, x, {0, 0, 1, 1}), -std::exp(-2.0), 1e-6);
}

TEST(GBC, ClosedFormWithUnequalVariances) {
  const VectorXd ma = VectorXd::Constant(1, 0.0), va = VectorXd::Constant(1, 1.0);
  const VectorXd mb = VectorXd::Constant(1, 1.0), vb = VectorXd::Constant(1, 4.0);
  const double avg = 2.5;
  const double expected = 0.125 * 1.0 / avg + 0.5 * std::log(avg / 2.0);
  EXPECT_NEAR(bhattacharyya_diagonal(ma, va, mb, vb), expected, 1e-12);
}

TEST(GBC, ZeroVarianceIsFloored) {
  MatrixXd x(4, 2);
  x << 0, 1, 0, 2, 1, 3, 1, 4;
  const auto s = compute_metric(x, Labels{0, 0, 1, 1}, MetricConfig::defaults(MetricId::gbc));
  EXPECT_TRUE(std::isfinite(s.value));
  EXPECT_EQ(s.diagnostics.at("floored_dims"), 2.0);
}

TEST(GBC, RangeBounds) {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 10; ++trial) {
    auto data = blobs(rng, 10, 4, 4, 0.5 * trial);
    const double v = run(MetricId::gbc, data.x, data.y);
    EXPECT_GE(v, -6.0);
    EXPECT_LT(v, 0.0);
  }
}

// ---------------------------------------------------------------------------
// SFDA

TEST(SFDA, SeparatedClassesApproachZero) {
  std::mt19937_64 rng(53);
  auto data = blobs(rng, 30, 6, 3, 40.0);
  const double v = run(MetricId::sfda, data.x, data.y);
  EXPECT_LE(v, 0.0);
  EXPECT_GT(v, -1e-3);
}

TEST(SFDA, NonPositiveAndFiniteIncludingSingularScatter) {
  std::mt19937_64 rng(59);
  for (int trial = 0; trial < 5; ++trial) {
    auto data = blobs(rng, 8, 40, 3, 1.0);  // d > n: singular within-class scatter
    const double v = run(MetricId::sfda, data.x, data.y);
    EXPECT_LE(v, 0.0);
    EXPECT_TRUE(std::isfinite(v));
  }
  MatrixXd collapsed(4, 2);
  collapsed << 1, 1, 1, 1, 2, 2, 2, 2;
  EXPECT_TRUE(std::isfinite(run(MetricId::sfda, collapsed, {0, 0, 1, 1})));
}

TEST(SFDA, SelfChallengeIsSeededAndDeterministic) {
  std::mt19937_64 rng(61);
  auto data = blobs(rng, 20, 5, 3, 1.0);
  MetricConfig cfg = MetricConfig::defaults(MetricId::sfda);
  std::get<SFDAOptions>(cfg.options).self_challenge = true;
  const double a = compute_metric(data.x, data.y, cfg).value;
  const double b = compute_metric(data.x, data.y, cfg).value;
  EXPECT_EQ(a, b);
  EXPECT_LE(a, 0.0);
}

// ---------------------------------------------------------------------------
// Properties shared by all metrics

class EveryMetric : public ::testing::TestWithParam<MetricId> {};

TEST_P(EveryMetric, RowPermutationInvariant) {
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 5; ++trial) {
    auto data = blobs(rng, 20, 6, 3, 1.5);
    std::vector<Eigen::Index> perm(data.x.rows());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    MatrixXd px(data.x.rows(), data.x.cols());
    Labels py(data.y.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
      px.row(static_cast<Eigen::Index>(i)) = data.x.row(perm[i]);
      py[i] = data.y[static_cast<std::size_t>(perm[i])];
    }
    EXPECT_NEAR(run(GetParam(), data.x, data.y), run(GetParam(), px, py), 1e-9);
  }
}

TEST_P(EveryMetric, ClassRelabelingInvariant) {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 5; ++trial) {
    auto data = blobs(rng, 20, 6, 4, 1.5);
    const std::vector<std::uint32_t> map{2, 0, 3, 1};
    Labels relabeled;
    for (auto c : data.y) relabeled.push_back(map[c]);
    EXPECT_NEAR(run(GetParam(), data.x, data.y), run(GetParam(), data.x, relabeled), 1e-9);
    // Sparse ids (not 0..C-1) are remapped too.
    Labels sparse;
    for (auto c : data.y) sparse.push_back(10 * c + 7);
    EXPECT_NEAR(run(GetParam(), data.x, data.y), run(GetParam(), data.x, sparse), 1e-9);
  }
}

TEST_P(EveryMetric, ShuffledLabelsNeverScoreHigher) {
  std::mt19937_64 rng(73);
  auto data = blobs(rng, 30, 6, 3, 4.0);
  const double truth = run(GetParam(), data.x, data.y);
  double worst_margin = std::numeric_limits<double>::infinity();
  for (int s = 0; s < 20; ++s) {
    Labels shuffled = data.y;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const double v = run(GetParam(), data.x, shuffled);
    worst_margin = std::min(worst_margin, truth - v);
  }
  RecordProperty("min_margin", std::to_string(worst_margin));
  EXPECT_GE(worst_margin, -1e-9);
}

TEST_P(EveryMetric, Deterministic) {
  std::mt19937_64 rng(79);
  auto data = blobs(rng, 25, 10, 3, 1.0);
  EXPECT_EQ(run(GetParam(), data.x, data.y), run(GetParam(), data.x, data.y));
}

TEST_P(EveryMetric, RejectsInvalidInputs) {
  MatrixXd x = MatrixXd::Random(6, 2);
  EXPECT_THROW(run(GetParam(), x, {0, 0, 0, 0, 0, 0}), Error);  // one class
  EXPECT_THROW(run(GetParam(), x, {0, 0, 1, 1, 1, 2}), Error);  // singleton class
  EXPECT_THROW(run(GetParam(), x, {0, 1, 0, 1}), Error);        // length mismatch
  x(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(run(GetParam(), x, {0, 1, 0, 1, 0, 1}), Error);
}

INSTANTIATE_TEST_SUITE_P(All, EveryMetric, ::testing::ValuesIn(kAllMetrics),
                         [](const auto& info) { return std::string(to_string(info.param)); });

// ---------------------------------------------------------------------------
// Config and batch scoring

TEST(MetricConfig, ParsesIdsAndRejectsBadOptions) {
  for (auto id : kAllMetrics) EXPECT_EQ(parse_metric_id(to_string(id)), id);
  EXPECT_FALSE(parse_metric_id("leep").has_value());
  MetricConfig cfg = MetricConfig::defaults(MetricId::transrate);
  std::get<TransRateOptions>(cfg.options).eps = 0.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = MetricConfig::defaults(MetricId::logme);
  std::get<LogMEOptions>(cfg.options).max_iter = 0;
  EXPECT_THROW(cfg.validate(), Error);
}

namespace {

BenchmarkManifest tiny_benchmark(const fs::path& dir, int models, int datasets) {
  std::mt19937_64 rng(83);
  BenchmarkManifest m;
  m.base_dir = dir;
  for (int k = 0; k < models; ++k) m.models.push_back({"m" + std::to_string(k), "fam", 1.0 + k, ""});
  for (int t = 0; t < datasets; ++t) m.datasets.push_back({"d" + std::to_string(t), 3, "natural"});
  for (const auto& model : m.models)
    for (const auto& ds : m.datasets) {
      auto [fm, lv] = site::test::random_features(rng, 30, 5, 3);
      fm.model_id = model.model_id;
      fm.dataset_id = lv.dataset_id = ds.dataset_id;
      const fs::path rel = model.model_id + "_" + ds.dataset_id + ".sitb";
      write_features(fm, lv, dir / rel);
      m.features.push_back({model.model_id, ds.dataset_id, rel});
    }
  return m;
}

}  // namespace

TEST(ScoreAll, CardinalityAndDeterminism) {
  site::test::TempDir dir;
  const auto m = tiny_benchmark(dir.path(), 3, 2);
  const std::vector<MetricConfig> metrics{MetricConfig::defaults(MetricId::logme),
                                          MetricConfig::defaults(MetricId::nleep)};
  const auto a = score_all(m, metrics, 1);
  const auto b = score_all(m, metrics, 4);
  EXPECT_EQ(a.table.size(), 12u);
  EXPECT_TRUE(a.failures.empty());
  EXPECT_TRUE(a.table == b.table);
}

TEST(ScoreAll, SameFileUnderTwoModelIdsScoresIdentically) {
  site::test::TempDir dir;
  auto m = tiny_benchmark(dir.path(), 2, 1);
  m.features[1].path = m.features[0].path;
  const auto run = score_all(m, {MetricConfig::defaults(MetricId::sfda), MetricConfig::defaults(MetricId::gbc)});
  for (const char* metric : {"sfda", "gbc"})
    EXPECT_EQ(run.table.at(metric, "m0", "d0"), run.table.at(metric, "m1", "d0"));
}

TEST(ScoreAll, FailingTripleDoesNotAbortBatch) {
  site::test::TempDir dir;
  auto m = tiny_benchmark(dir.path(), 3, 1);
  fs::remove(dir / m.features[1].path.string());
  const auto run = score_all(m, {MetricConfig::defaults(MetricId::hscore)});
  EXPECT_EQ(run.table.size(), 2u);
  ASSERT_EQ(run.failures.size(), 1u);
  EXPECT_EQ(run.failures[0].key.model_id, "m1");
}

TEST(ScoreAll, DuplicateMetricRejected) {
  site::test::TempDir dir;
  const auto m = tiny_benchmark(dir.path(), 2, 1);
  EXPECT_THROW(score_all(m, {MetricConfig::defaults(MetricId::gbc), MetricConfig::defaults(MetricId::gbc)}), Error);
}
