#pragma once

// Rank correlation: Kendall's tau, weighted Kendall's tau with hyperbolic
// weights over the ground-truth ranking, and Pearson's r.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "site/error.hpp"

namespace site {

/// Ground truth G and predicted scores T aligned to the same model ids.
struct RankedScores {
  std::vector<std::string> model_ids;
  std::vector<double> ground_truth;
  std::vector<double> predicted;

  void validate() const {
    const std::size_t m = ground_truth.size();
    if (m < 2) throw Error(Errc::invalid_argument, "rank statistics need at least 2 models");
    if (predicted.size() != m || (!model_ids.empty() && model_ids.size() != m))
      throw Error(Errc::invalid_argument, "ranked sequences differ in length");
    for (std::size_t i = 0; i < m; ++i)
      if (!std::isfinite(ground_truth[i]) || !std::isfinite(predicted[i]))
        throw Error(Errc::non_finite, "non-finite value in ranked scores");
  }
};

/// ranks[i] is the rank of input element i; 0 is the best (largest) value.
struct RankAssignment {
  std::vector<std::size_t> ranks;
};

inline int sgn(double x) { return (x > 0.0) - (x < 0.0); }

/// Descending ranks. Ties go to the smaller model id, or to the earlier
/// position when no ids are supplied.
inline RankAssignment rank_desc(std::span<const double> values,
                                std::span<const std::string> ids = {}) {
  if (values.empty()) throw Error(Errc::invalid_argument, "rank_desc needs at least 1 value");
  if (!ids.empty() && ids.size() != values.size())
    throw Error(Errc::invalid_argument, "rank_desc: ids and values differ in length");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (values[a] != values[b]) return values[a] > values[b];
    if (!ids.empty()) return ids[a] < ids[b];
    return false;
  });
  RankAssignment out;
  out.ranks.resize(values.size());
  for (std::size_t r = 0; r < order.size(); ++r) out.ranks[order[r]] = r;
  return out;
}

inline double kendall_tau(std::span<const double> g, std::span<const double> t) {
  const std::size_t m = g.size();
  if (m < 2 || t.size() != m) throw Error(Errc::invalid_argument, "kendall_tau needs two equal sequences of length >= 2");
  long long sum = 0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) sum += sgn(g[i] - g[j]) * sgn(t[i] - t[j]);
  return 2.0 * static_cast<double>(sum) / (static_cast<double>(m) * static_cast<double>(m - 1));
}

inline double kendall_tau(const RankedScores& rs) {
  rs.validate();
  return kendall_tau(rs.ground_truth, rs.predicted);
}

inline double hyperbolic_weight(std::size_t r, std::size_t s) {
  return 1.0 / (static_cast<double>(s) + 1.0) + 1.0 / (static_cast<double>(r) + 1.0);
}

/// Pair signs weighted by w(rho(i), rho(j)) = 1/(rho(i)+1) + 1/(rho(j)+1),
/// where rho ranks the ground truth. Normalized by the total pair weight so
/// the statistic stays in [-1, 1]; tied pairs add weight but no sign.
inline double weighted_kendall_tau(const RankedScores& rs) {
  rs.validate();
  const std::size_t m = rs.ground_truth.size();
  const auto rho = rank_desc(rs.ground_truth, rs.model_ids);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double w = hyperbolic_weight(rho.ranks[i], rho.ranks[j]);
      num += sgn(rs.ground_truth[i] - rs.ground_truth[j]) * sgn(rs.predicted[i] - rs.predicted[j]) * w;
      den += w;
    }
  }
  return num / den;
}

inline double weighted_kendall_tau(std::span<const double> g, std::span<const double> t) {
  return weighted_kendall_tau(RankedScores{{}, {g.begin(), g.end()}, {t.begin(), t.end()}});
}

/// Product-moment correlation. Returns 0 when exactly one sequence is
/// constant; throws undefined_correlation when both are.
inline double pearson(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw Error(Errc::invalid_argument, "pearson needs two equal sequences of length >= 2");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double e) { return e == v.front(); });
  };
  const bool cx = constant(x);
  const bool cy = constant(y);
  if (cx && cy) throw Error(Errc::undefined_correlation, "correlation undefined: both sequences constant");
  if (cx || cy) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace site
