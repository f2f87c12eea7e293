#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <tuple>
#include <type_traits>
#include <variant>
#include <vector>

#include "site/feature_store.hpp"
#include "site/metrics/gbc.hpp"
#include "site/metrics/hscore.hpp"
#include "site/metrics/logme.hpp"
#include "site/metrics/nleep.hpp"
#include "site/metrics/sfda.hpp"
#include "site/metrics/transrate.hpp"
#include "site/metrics/types.hpp"

namespace site {

inline MetricScore compute_metric(const Eigen::MatrixXd& features, std::span<const std::uint32_t> labels,
                                  const MetricConfig& cfg) {
  cfg.validate();
  return std::visit(
      [&](const auto& o) -> MetricScore {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, HScoreOptions>) return hscore(features, labels, o);
        else if constexpr (std::is_same_v<T, LogMEOptions>) return logme(features, labels, o);
        else if constexpr (std::is_same_v<T, NLEEPOptions>) return nleep(features, labels, o);
        else if constexpr (std::is_same_v<T, TransRateOptions>) return transrate(features, labels, o);
        else if constexpr (std::is_same_v<T, GBCOptions>) return gbc(features, labels, o);
        else return sfda(features, labels, o);
      },
      cfg.options);
}

inline MetricScore compute_metric(const FeatureMatrix& features, const LabelVector& labels,
                                  const MetricConfig& cfg) {
  auto score = compute_metric(features.to_eigen(), labels.labels, cfg);
  score.model_id = features.model_id;
  score.dataset_id = features.dataset_id;
  return score;
}

struct ScoreFailure {
  ScoreKey key;
  std::string message;
};

struct ScoreRun {
  ScoreTable table;
  std::vector<MetricScore> scores;  // sorted by (metric, model, dataset)
  std::vector<ScoreFailure> failures;
};

/// Scores every (metric, model, dataset) triple of the manifest. Feature files
/// are processed in parallel; a failing triple is recorded and the batch
/// continues. Results do not depend on the thread count.
inline ScoreRun score_all(const BenchmarkManifest& manifest, const std::vector<MetricConfig>& metrics,
                          unsigned threads = 0) {
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    metrics[i].validate();
    for (std::size_t j = 0; j < i; ++j)
      if (metrics[j].id == metrics[i].id)
        throw Error(Errc::invalid_argument, "metric '" + std::string(to_string(metrics[i].id)) + "' listed twice");
  }
  ScoreRun run;
  std::mutex mu;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t idx = next++; idx < manifest.features.size(); idx = next++) {
      const auto& ref = manifest.features[idx];
      std::vector<MetricScore> local_scores;
      std::vector<ScoreFailure> local_failures;
      FeatureMatrix matrix;
      LabelVector labels;
      std::string load_error;
      try {
        std::tie(matrix, labels) = read_features(manifest.resolve(ref));
        matrix.model_id = ref.model_id;
        matrix.dataset_id = labels.dataset_id = ref.dataset_id;
      } catch (const std::exception& e) {
        load_error = e.what();
      }
      const Eigen::MatrixXd x = load_error.empty() ? matrix.to_eigen() : Eigen::MatrixXd{};
      for (const auto& cfg : metrics) {
        ScoreKey key{std::string(to_string(cfg.id)), ref.model_id, ref.dataset_id};
        if (!load_error.empty()) {
          local_failures.push_back({key, load_error});
          continue;
        }
        try {
          auto s = compute_metric(x, labels.labels, cfg);
          s.model_id = ref.model_id;
          s.dataset_id = ref.dataset_id;
          if (!std::isfinite(s.value)) throw Error(Errc::non_finite, "metric produced a non-finite score");
          local_scores.push_back(std::move(s));
        } catch (const std::exception& e) {
          local_failures.push_back({key, e.what()});
        }
      }
      std::lock_guard lock(mu);
      for (auto& s : local_scores) run.scores.push_back(std::move(s));
      for (auto& f : local_failures) run.failures.push_back(std::move(f));
    }
  };

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned count = static_cast<unsigned>(
      std::min<std::size_t>(threads == 0 ? hw : threads, std::max<std::size_t>(manifest.features.size(), 1)));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < count; ++t) pool.emplace_back(worker);
    worker();
  }

  auto key_of = [](const MetricScore& s) { return ScoreKey{std::string(to_string(s.metric)), s.model_id, s.dataset_id}; };
  std::sort(run.scores.begin(), run.scores.end(),
            [&](const MetricScore& a, const MetricScore& b) { return key_of(a) < key_of(b); });
  std::sort(run.failures.begin(), run.failures.end(),
            [](const ScoreFailure& a, const ScoreFailure& b) { return a.key < b.key; });
  for (const auto& s : run.scores) run.table.set(key_of(s), {s.value, s.converged});
  return run;
}

}  // namespace site
