#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "site/feature_store.hpp"

namespace site::test {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("site_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

/// Random matrix with labels cycling over `classes` (so every class has >= 2 rows when n >= 2*classes).
inline std::pair<FeatureMatrix, LabelVector> random_features(std::mt19937_64& rng, std::uint64_t n, std::uint64_t d,
                                                             std::uint32_t classes) {
  std::normal_distribution<float> normal(0.0f, 1.0f);
  FeatureMatrix m{"m", "ds", n, d, {}};
  m.values.resize(n * d);
  for (auto& v : m.values) v = normal(rng);
  LabelVector l{"ds", {}};
  for (std::uint64_t i = 0; i < n; ++i) l.labels.push_back(static_cast<std::uint32_t>(i % classes));
  return {m, l};
}

}  // namespace site::test
