#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "site/error.hpp"

namespace site {

enum class MetricId { hscore, logme, nleep, transrate, gbc, sfda };

inline constexpr std::array<MetricId, 6> kAllMetrics = {MetricId::hscore, MetricId::logme,
                                                        MetricId::nleep,  MetricId::transrate,
                                                        MetricId::gbc,    MetricId::sfda};

constexpr std::string_view to_string(MetricId id) noexcept {
  switch (id) {
    case MetricId::hscore: return "hscore";
    case MetricId::logme: return "logme";
    case MetricId::nleep: return "nleep";
    case MetricId::transrate: return "transrate";
    case MetricId::gbc: return "gbc";
    case MetricId::sfda: return "sfda";
  }
  return "unknown";
}

inline std::optional<MetricId> parse_metric_id(std::string_view name) {
  for (auto id : kAllMetrics)
    if (to_string(id) == name) return id;
  return std::nullopt;
}

struct HScoreOptions {
  double rcond = 1e-10;  // relative eigenvalue cutoff for the pseudo-inverse
};

struct LogMEOptions {
  int max_iter = 100;
  double tol = 1e-3;  // absolute change of the (unnormalized) log evidence
};

struct NLEEPOptions {
  double variance_retained = 0.8;
  int components = 0;  // 0 selects min(5*C, floor(n/10))
  int max_iter = 100;
  double tol = 1e-4;  // change of the mean log-likelihood
  double variance_floor = 1e-6;
  std::uint64_t seed = 42;
};

struct TransRateOptions {
  double eps = 1.0;
};

struct GBCOptions {
  double variance_floor = 1e-6;
  int pca_dims = 0;  // 0 disables the PCA reduction
};

struct SFDAOptions {
  double shrinkage = 1.0;  // scaled by tr(S_w)/d
  bool self_challenge = false;
  double noise_scale = 0.1;  // noise std as a fraction of each feature's std
  std::uint64_t seed = 42;
};

using MetricOptions =
    std::variant<HScoreOptions, LogMEOptions, NLEEPOptions, TransRateOptions, GBCOptions, SFDAOptions>;

struct MetricConfig {
  MetricId id = MetricId::hscore;
  MetricOptions options;

  static MetricConfig defaults(MetricId id) {
    switch (id) {
      case MetricId::hscore: return {id, HScoreOptions{}};
      case MetricId::logme: return {id, LogMEOptions{}};
      case MetricId::nleep: return {id, NLEEPOptions{}};
      case MetricId::transrate: return {id, TransRateOptions{}};
      case MetricId::gbc: return {id, GBCOptions{}};
      case MetricId::sfda: return {id, SFDAOptions{}};
    }
    return {id, HScoreOptions{}};
  }

  void validate() const {
    if (static_cast<std::size_t>(id) != options.index())
      throw Error(Errc::invalid_argument, "options do not belong to metric " + std::string(to_string(id)));
    auto bad = [&](const std::string& what) {
      throw Error(Errc::invalid_argument, std::string(to_string(id)) + ": " + what);
    };
    std::visit(
        [&](const auto& o) {
          using T = std::decay_t<decltype(o)>;
          if constexpr (std::is_same_v<T, HScoreOptions>) {
            if (!(o.rcond > 0.0 && o.rcond < 1.0)) bad("rcond must be in (0, 1)");
          } else if constexpr (std::is_same_v<T, LogMEOptions>) {
            if (o.max_iter < 1) bad("max_iter must be >= 1");
            if (!(o.tol > 0.0)) bad("tol must be > 0");
          } else if constexpr (std::is_same_v<T, NLEEPOptions>) {
            if (!(o.variance_retained > 0.0 && o.variance_retained <= 1.0)) bad("variance_retained must be in (0, 1]");
            if (o.components < 0) bad("components must be >= 0");
            if (o.max_iter < 1) bad("max_iter must be >= 1");
            if (!(o.tol > 0.0)) bad("tol must be > 0");
            if (!(o.variance_floor > 0.0)) bad("variance_floor must be > 0");
          } else if constexpr (std::is_same_v<T, TransRateOptions>) {
            if (!(o.eps > 0.0) || !std::isfinite(o.eps)) bad("eps must be > 0");
          } else if constexpr (std::is_same_v<T, GBCOptions>) {
            if (!(o.variance_floor > 0.0)) bad("variance_floor must be > 0");
            if (o.pca_dims < 0) bad("pca_dims must be >= 0");
          } else if constexpr (std::is_same_v<T, SFDAOptions>) {
            if (!(o.shrinkage >= 0.0) || !std::isfinite(o.shrinkage)) bad("shrinkage must be >= 0");
            if (!(o.noise_scale >= 0.0)) bad("noise_scale must be >= 0");
          }
        },
        options);
  }
};

struct MetricScore {
  MetricId metric = MetricId::hscore;
  std::string model_id;
  std::string dataset_id;
  double value = 0.0;
  bool converged = true;
  std::map<std::string, double> diagnostics;
  std::vector<std::string> notes;
};

}  // namespace site
