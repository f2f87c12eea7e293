#pragma once

// Synthetic benchmarks over the standard 11-model pool: class-structured
// Gaussian features whose separability tracks a per-(model, dataset) quality,
// with accuracies derived from the same quality.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "site/diagnostics.hpp"
#include "site/feature_store.hpp"

namespace site {

/// torchvision ids, families and parameter counts (millions).
inline std::vector<ModelRecord> paper_pool_models() {
  return {
      {"resnet34", "resnet", 21.8, ""},         {"resnet50", "resnet", 25.6, ""},
      {"resnet101", "resnet", 44.5, ""},        {"resnet152", "resnet", 60.2, ""},
      {"densenet121", "densenet", 8.0, ""},     {"densenet169", "densenet", 14.1, ""},
      {"densenet201", "densenet", 20.0, ""},    {"googlenet", "googlenet", 6.6, ""},
      {"inception_v3", "inception", 27.2, ""},  {"mobilenet_v2", "mobilenet", 3.5, ""},
      {"mnasnet1_0", "mnasnet", 4.4, ""},
  };
}

inline std::vector<DatasetRecord> paper_pool_datasets(std::uint32_t num_classes) {
  return {
      {"aircraft", num_classes, "fine_grained"}, {"cifar10", num_classes, "natural"},
      {"cifar100", num_classes, "natural"},      {"dtd", num_classes, "texture"},
      {"food", num_classes, "food"},             {"pets", num_classes, "fine_grained"},
  };
}

struct SyntheticOptions {
  std::size_t datasets = 6;  // prefix of the standard six
  std::uint64_t n = 120;
  std::uint64_t d = 32;
  std::uint32_t classes = 4;
  double jitter = 0.15;  // per-dataset perturbation of model quality
  std::uint64_t seed = 42;
};

/// Writes features/<model>__<dataset>.sitb and manifest.json under `dir` and
/// returns the manifest.
inline BenchmarkManifest write_synthetic_benchmark(const fs::path& dir, const SyntheticOptions& opts = {}) {
  if (opts.datasets < 1 || opts.datasets > 6) throw Error(Errc::invalid_argument, "datasets must be in [1, 6]");
  if (opts.classes < 2 || opts.n < 2 * opts.classes || opts.d < 1)
    throw Error(Errc::invalid_argument, "need classes >= 2, n >= 2*classes, d >= 1");

  BenchmarkManifest m;
  m.models = paper_pool_models();
  auto all = paper_pool_datasets(opts.classes);
  m.datasets.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(opts.datasets));
  m.base_dir = dir;
  fs::create_directories(dir / "features");

  const auto order = default_static_order();
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (const auto& ds : m.datasets) {
    for (const auto& model : m.models) {
      const auto pos = std::find(order.model_ids.begin(), order.model_ids.end(), model.model_id) - order.model_ids.begin();
      double quality = 1.0 - static_cast<double>(pos) / static_cast<double>(order.model_ids.size());
      quality = std::clamp(quality + opts.jitter * normal(rng), 0.0, 1.0);
      m.accuracies.set(model.model_id, ds.dataset_id, 0.5 + 0.45 * quality);

      const double separation = 0.5 + 2.5 * quality;
      std::vector<double> centers(static_cast<std::size_t>(opts.classes * opts.d));
      for (auto& c : centers) c = separation * normal(rng);

      FeatureMatrix fm{model.model_id, ds.dataset_id, opts.n, opts.d, {}};
      LabelVector lv{ds.dataset_id, {}};
      fm.values.reserve(static_cast<std::size_t>(opts.n * opts.d));
      for (std::uint64_t i = 0; i < opts.n; ++i) {
        const auto y = static_cast<std::uint32_t>(i % opts.classes);
        lv.labels.push_back(y);
        for (std::uint64_t j = 0; j < opts.d; ++j)
          fm.values.push_back(static_cast<float>(centers[y * opts.d + j] + normal(rng)));
      }
      const fs::path rel = fs::path("features") / (model.model_id + "__" + ds.dataset_id + ".sitb");
      write_features(fm, lv, dir / rel);
      m.features.push_back({model.model_id, ds.dataset_id, rel});
    }
  }
  write_file_atomic(dir / "manifest.json", manifest_to_json(m).dump(2) + "\n");
  return m;
}

}  // namespace site
