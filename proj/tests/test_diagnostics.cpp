#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "site/diagnostics.hpp"
#include "site/synthetic.hpp"

using namespace site;

namespace {

const std::vector<std::string> kPool = default_static_order().model_ids;

/// Accuracies in the static order on every dataset.
AccuracyTable ordered_accuracies(const std::vector<std::string>& datasets) {
  AccuracyTable acc;
  for (const auto& ds : datasets)
    for (std::size_t i = 0; i < kPool.size(); ++i) acc.set(kPool[i], ds, 0.95 - 0.02 * static_cast<double>(i));
  return acc;
}

BenchmarkManifest metadata_manifest() {
  BenchmarkManifest m;
  m.models = paper_pool_models();
  m.datasets = paper_pool_datasets(10);
  return m;
}

double oracle_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

}  // namespace

// ---------------------------------------------------------------------------
// Static ranker

TEST(Static, PoolEndpoints) {
  const auto s = static_scores(default_static_order(), kPool);
  EXPECT_EQ(s.at("resnet152"), 11.0);
  EXPECT_EQ(s.at("mnasnet1_0"), 1.0);
}

TEST(Static, TwoModels) {
  const auto s = static_scores(StaticOrder{{"A", "B"}}, {"B", "A"});
  EXPECT_EQ(s.at("A"), 2.0);
  EXPECT_EQ(s.at("B"), 1.0);
}

TEST(Static, UnknownModelIsNamed) {
  try {
    static_scores(default_static_order(), {"resnet50", "vgg16"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::unknown_model);
    EXPECT_NE(std::string(e.what()).find("vgg16"), std::string::npos);
  }
}

TEST(Static, SubsetScoresStayDenseAndOrdered) {
  const std::vector<std::string> subset{"googlenet", "resnet50", "mobilenet_v2"};
  const auto s = static_scores(default_static_order(), subset);
  EXPECT_EQ(s.at("resnet50"), 3.0);
  EXPECT_EQ(s.at("googlenet"), 2.0);
  EXPECT_EQ(s.at("mobilenet_v2"), 1.0);
}

TEST(Static, PerfectOnStaticallyOrderedAccuracies) {
  const std::vector<std::string> datasets{"a", "b", "c"};
  const auto acc = ordered_accuracies(datasets);
  const auto t = static_scores(default_static_order(), kPool);
  for (const auto& ds : datasets) EXPECT_EQ(evaluate_scores(t, acc, ds, kPool), 1.0);
}

TEST(Static, OrderByParams) {
  const auto order = order_by_params(paper_pool_models());
  EXPECT_EQ(order.model_ids.front(), "resnet152");
  EXPECT_EQ(order.model_ids.back(), "mobilenet_v2");
}

TEST(Evaluate, ThreeModelDiscordantTopPair) {
  AccuracyTable acc;
  acc.set("a", "x", 0.9);
  acc.set("b", "x", 0.8);
  acc.set("c", "x", 0.7);
  ScoreTable scores;
  scores.set({"logme", "a", "x"}, {0.5, true});
  scores.set({"logme", "b", "x"}, {0.7, true});
  scores.set({"logme", "c", "x"}, {0.6, true});
  EXPECT_NEAR(evaluate_metric(scores, acc, "logme", "x", {"a", "b", "c"}), -0.5455, 1e-4);
  EXPECT_THROW(evaluate_metric(scores, acc, "logme", "x", {"a", "b", "d"}), Error);
}

// ---------------------------------------------------------------------------
// Ablation

TEST(Ablation, DefaultPlanGivesFiveEntriesElevenToSeven) {
  const auto acc = ordered_accuracies({"x"});
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  ModelValues scores;
  for (const auto& m : kPool) scores[m] = normal(rng);
  const auto sweep = ablation_sweep(scores, acc, "x", kPool, default_ablation_plan());
  ASSERT_EQ(sweep.size(), 5u);
  for (std::size_t k = 0; k < sweep.size(); ++k) {
    EXPECT_EQ(sweep[k].model_count, 11 - k);
    EXPECT_EQ(sweep[k].removed.size(), k);
  }
}

TEST(Ablation, EntriesMatchIndependentSubsetEvaluation) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.3, 0.95);
  for (int trial = 0; trial < 50; ++trial) {
    AccuracyTable acc;
    ModelValues scores;
    for (const auto& m : kPool) {
      acc.set(m, "x", unit(rng));
      scores[m] = normal(rng);
    }
    auto plan = default_ablation_plan();
    const auto sweep = ablation_sweep(scores, acc, "x", kPool, plan);
    for (std::size_t k = 0; k < sweep.size(); ++k) {
      std::vector<std::string> subset;
      for (const auto& m : kPool)
        if (std::find(plan.removal_sequence.begin(), plan.removal_sequence.begin() + static_cast<long>(k), m) ==
            plan.removal_sequence.begin() + static_cast<long>(k))
          subset.push_back(m);
      RankedScores rs;
      for (const auto& m : subset) {
        rs.model_ids.push_back(m);
        rs.ground_truth.push_back(acc.at(m, "x"));
        rs.predicted.push_back(scores.at(m));
      }
      EXPECT_NEAR(sweep[k].tau_w, weighted_kendall_tau(rs), 1e-12);
    }
  }
}

TEST(Ablation, EmptyPlanIsFullSet) {
  const auto acc = ordered_accuracies({"x"});
  const auto t = static_scores(default_static_order(), kPool);
  const auto sweep = ablation_sweep(t, acc, "x", kPool, AblationPlan{});
  ASSERT_EQ(sweep.size(), 1u);
  EXPECT_EQ(sweep[0].tau_w, evaluate_scores(t, acc, "x", kPool));
}

TEST(Ablation, InvalidPlans) {
  const std::vector<std::string> three{"a", "b", "c"};
  const AblationPlan dup{{"a", "a"}}, unknown{{"z"}}, too_many{{"a", "b"}};
  EXPECT_THROW(dup.validate(three), Error);
  EXPECT_THROW(unknown.validate(three), Error);
  EXPECT_THROW(too_many.validate(three), Error);  // leaves 1 model
  EXPECT_NO_THROW(AblationPlan{{"a"}}.validate(three));
}

// ---------------------------------------------------------------------------
// Fidelity

TEST(Fidelity, PairCount) {
  ModelValues v;
  for (std::size_t i = 0; i < kPool.size(); ++i) v[kPool[i]] = static_cast<double>(i);
  EXPECT_EQ(delta_pairs(v, kPool).size(), 55u);
}

TEST(Fidelity, AffineScoresGiveSignedOne) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.3, 0.95);
  ModelValues acc, up, down;
  for (const auto& m : kPool) {
    acc[m] = unit(rng);
    up[m] = 4.0 * acc[m] - 1.0;
    down[m] = -0.25 * acc[m] + 3.0;
  }
  const auto r_up = fidelity_from_values(up, acc, "t", "x", kPool);
  const auto r_down = fidelity_from_values(down, acc, "t", "x", kPool);
  EXPECT_NEAR(r_up.pearson_r, 1.0, 1e-9);
  EXPECT_NEAR(r_down.pearson_r, -1.0, 1e-9);
  EXPECT_EQ(r_up.pair_count, 55u);
}

TEST(Fidelity, MatchesDirectPearsonOracle) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 50; ++trial) {
    ModelValues acc, t;
    for (const auto& m : kPool) {
      acc[m] = normal(rng);
      t[m] = normal(rng);
    }
    std::vector<std::string> ids = kPool;
    std::sort(ids.begin(), ids.end());
    std::vector<double> da, dt;
    for (std::size_t i = 0; i < ids.size(); ++i)
      for (std::size_t j = i + 1; j < ids.size(); ++j) {
        da.push_back(acc[ids[i]] - acc[ids[j]]);
        dt.push_back(t[ids[i]] - t[ids[j]]);
      }
    EXPECT_NEAR(fidelity_from_values(t, acc, "t", "x", kPool).pearson_r, oracle_pearson(da, dt), 1e-10);
  }
}

TEST(Fidelity, ConstantScoresAreFlagged) {
  ModelValues acc, t;
  for (std::size_t i = 0; i < kPool.size(); ++i) {
    acc[kPool[i]] = 0.1 * static_cast<double>(i);
    t[kPool[i]] = 1.0;
  }
  const auto rec = fidelity_from_values(t, acc, "t", "x", kPool);
  EXPECT_TRUE(rec.flagged);
  EXPECT_TRUE(std::isnan(rec.pearson_r));
}

// ---------------------------------------------------------------------------
// Dispersion

TEST(Dispersion, EightOfTenWinner) {
  std::vector<std::string> datasets;
  for (int t = 0; t < 10; ++t) datasets.push_back("d" + std::to_string(t));
  AccuracyTable acc = ordered_accuracies(datasets);
  acc.set("densenet201", "d8", 0.99);
  acc.set("resnet101", "d9", 0.99);
  const auto stats = rank_dispersion(acc, kPool, datasets);
  EXPECT_EQ(stats.top1_concentration, 0.8);
  EXPECT_EQ(stats.winner_histogram.at("resnet152"), 8);
  ASSERT_TRUE(stats.mean_pairwise_tau.has_value());
  EXPECT_GT(*stats.mean_pairwise_tau, 0.9);
}

TEST(Dispersion, SingleDatasetIsFlagged) {
  const auto acc = ordered_accuracies({"only"});
  const auto stats = rank_dispersion(acc, kPool, {"only"});
  EXPECT_TRUE(stats.flagged);
  EXPECT_FALSE(stats.mean_pairwise_tau.has_value());
  EXPECT_EQ(stats.top1_concentration, 1.0);
}

TEST(Dispersion, IdenticalRankingsHaveTauOne) {
  const auto acc = ordered_accuracies({"a", "b", "c"});
  EXPECT_EQ(*rank_dispersion(acc, kPool, {"a", "b", "c"}).mean_pairwise_tau, 1.0);
}

// ---------------------------------------------------------------------------
// Audit

TEST(Audit, PaperPoolFlagsResnetAndDensenet) {
  auto m = metadata_manifest();
  m.accuracies = ordered_accuracies(m.dataset_ids());
  const auto report = audit_benchmark(m, m.accuracies);
  const auto& fh = report.at("family_hierarchy");
  EXPECT_EQ(fh.verdict, Verdict::flag);
  EXPECT_NE(fh.evidence.find("resnet"), std::string::npos);
  EXPECT_NE(fh.evidence.find("densenet"), std::string::npos);
  EXPECT_EQ(report.at("budget_match").verdict, Verdict::flag);
  EXPECT_EQ(report.at("rank_dispersion").verdict, Verdict::flag);
  EXPECT_EQ(report.checks.size(), kAuditChecks.size());
}

TEST(Audit, SaturatedDatasetFlagsHeadroom) {
  auto m = metadata_manifest();
  m.accuracies = ordered_accuracies(m.dataset_ids());
  for (const auto& id : kPool) m.accuracies.set(id, "cifar10", 0.995);
  const auto r = audit_benchmark(m, m.accuracies);
  EXPECT_EQ(r.at("headroom").verdict, Verdict::flag);
  EXPECT_NE(r.at("headroom").evidence.find("cifar10"), std::string::npos);
}

TEST(Audit, CleanPoolPassesEveryCheck) {
  BenchmarkManifest m;
  m.models = {{"a1", "alpha", 10.0, ""}, {"b1", "beta", 12.0, ""}, {"c1", "gamma", 9.0, ""}, {"d1", "delta", 11.0, ""}};
  m.datasets = {{"x", 5, "natural"}, {"y", 5, "texture"}, {"z", 5, "medical"}, {"w", 5, "satellite"}};
  const std::vector<std::vector<double>> acc{
      {0.90, 0.80, 0.70, 0.60}, {0.60, 0.90, 0.80, 0.70}, {0.70, 0.60, 0.90, 0.80}, {0.80, 0.70, 0.60, 0.90}};
  for (std::size_t t = 0; t < 4; ++t)
    for (std::size_t k = 0; k < 4; ++k) m.accuracies.set(m.models[k].model_id, m.datasets[t].dataset_id, acc[t][k]);
  const auto r = audit_benchmark(m, m.accuracies);
  for (auto check : kAuditChecks) EXPECT_EQ(r.at(check).verdict, Verdict::pass) << check << ": " << r.at(check).evidence;
}

TEST(Audit, MissingMetadataIsInsufficient) {
  auto m = metadata_manifest();
  m.models[0].family.clear();
  m.datasets[0].domain_tag.clear();
  const auto r = audit_benchmark(m, m.accuracies);  // no accuracies at all
  EXPECT_EQ(r.at("family_hierarchy").verdict, Verdict::insufficient);
  EXPECT_EQ(r.at("domain_variety").verdict, Verdict::insufficient);
  EXPECT_EQ(r.at("headroom").verdict, Verdict::insufficient);
  EXPECT_EQ(r.at("rank_dispersion").verdict, Verdict::insufficient);
}

TEST(Audit, EveryChecklistItemMapsToACheck) {
  for (const auto& [item, check] : kChecklistItems)
    EXPECT_NE(std::find(kAuditChecks.begin(), kAuditChecks.end(), check), kAuditChecks.end()) << item;
}
