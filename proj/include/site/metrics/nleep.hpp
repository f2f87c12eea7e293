#pragma once

// NLEEP: a diagonal Gaussian mixture fit on PCA-reduced features stands in
// for the source classifier. Its responsibilities act as pseudo-source
// posteriors, and the score is the mean log-likelihood of the
// expected empirical predictor P(y|x) = sum_z P(y|z) r(x, z).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "site/metrics/common.hpp"
#include "site/metrics/types.hpp"

namespace site {

/// Diagonal-covariance Gaussian mixture.
struct DiagonalGmm {
  Eigen::VectorXd weights;    // K
  Eigen::MatrixXd means;      // K x d
  Eigen::MatrixXd variances;  // K x d
  int iterations = 0;
  bool converged = false;
  int pruned = 0;
  double mean_log_likelihood = 0.0;

  Eigen::Index components() const { return weights.size(); }

  /// Log of weight_k * N(x_i | mean_k, var_k) for every row and component.
  Eigen::MatrixXd log_joint(const Eigen::MatrixXd& x) const {
    const Eigen::Index n = x.rows();
    const Eigen::Index k = components();
    const double log2pi = std::log(2.0 * std::numbers::pi);
    Eigen::MatrixXd out(n, k);
    for (Eigen::Index c = 0; c < k; ++c) {
      const Eigen::RowVectorXd inv = variances.row(c).cwiseInverse();
      const double norm = std::log(weights(c)) -
                          0.5 * (static_cast<double>(x.cols()) * log2pi + variances.row(c).array().log().sum());
      for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::RowVectorXd diff = x.row(i) - means.row(c);
        out(i, c) = norm - 0.5 * diff.cwiseProduct(diff).dot(inv);
      }
    }
    return out;
  }

  /// Posterior responsibilities; also returns the mean log-likelihood.
  Eigen::MatrixXd responsibilities(const Eigen::MatrixXd& x, double* mean_ll = nullptr) const {
    Eigen::MatrixXd r = log_joint(x);
    double ll = 0.0;
    for (Eigen::Index i = 0; i < r.rows(); ++i) {
      const double lse = metrics_detail::log_sum_exp(r.row(i).transpose());
      ll += lse;
      r.row(i) = (r.row(i).array() - lse).exp();
    }
    if (mean_ll) *mean_ll = ll / static_cast<double>(x.rows());
    return r;
  }
};

namespace nleep_detail {

using metrics_detail::Index;
using metrics_detail::MatrixXd;
using metrics_detail::VectorXd;

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// k-means++ style seeding: first center uniform, then D^2 sampling. Stops
/// early when every remaining point coincides with a chosen center.
inline std::vector<Index> seed_centers(const MatrixXd& x, Index k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Index n = x.rows();
  std::vector<Index> centers;
  centers.push_back(static_cast<Index>(uniform01(rng) * static_cast<double>(n)) % n);
  VectorXd dist2 = (x.rowwise() - x.row(centers[0])).rowwise().squaredNorm();
  while (static_cast<Index>(centers.size()) < k) {
    const double total = dist2.sum();
    if (!(total > 0.0)) break;
    const double target = uniform01(rng) * total;
    double cum = 0.0;
    Index pick = n - 1;
    for (Index i = 0; i < n; ++i) {
      cum += dist2(i);
      if (cum > target && dist2(i) > 0.0) {
        pick = i;
        break;
      }
    }
    while (dist2(pick) <= 0.0 && pick > 0) --pick;
    centers.push_back(pick);
    dist2 = dist2.cwiseMin((x.rowwise() - x.row(pick)).rowwise().squaredNorm());
  }
  return centers;
}

inline void m_step(const MatrixXd& x, const MatrixXd& resp, double floor, DiagonalGmm& gmm) {
  const double n = static_cast<double>(x.rows());
  // Prune components whose effective count has vanished.
  const VectorXd counts = resp.colwise().sum().transpose();
  std::vector<Index> keep;
  for (Index c = 0; c < counts.size(); ++c)
    if (counts(c) > 1e-6 * n) keep.push_back(c);
  gmm.pruned += static_cast<int>(counts.size() - static_cast<Index>(keep.size()));

  const Index k = static_cast<Index>(keep.size());
  gmm.weights.resize(k);
  gmm.means.resize(k, x.cols());
  gmm.variances.resize(k, x.cols());
  for (Index j = 0; j < k; ++j) {
    const Index c = keep[static_cast<std::size_t>(j)];
    const double nk = counts(c);
    gmm.weights(j) = nk / n;
    const Eigen::RowVectorXd mean = (resp.col(c).transpose() * x) / nk;
    const Eigen::RowVectorXd second = (resp.col(c).transpose() * x.cwiseProduct(x)) / nk;
    gmm.means.row(j) = mean;
    gmm.variances.row(j) = (second - mean.cwiseProduct(mean)).cwiseMax(floor);
  }
  gmm.weights /= gmm.weights.sum();
}

}  // namespace nleep_detail

/// Fits a diagonal GMM with k components by EM from k-means++ seeds.
inline DiagonalGmm fit_diagonal_gmm(const Eigen::MatrixXd& x, Eigen::Index k, int max_iter, double tol,
                                    double variance_floor, std::uint64_t seed) {
  using namespace nleep_detail;
  const auto centers = seed_centers(x, k, seed);
  DiagonalGmm gmm;
  const Index kk = static_cast<Index>(centers.size());
  gmm.weights = VectorXd::Constant(kk, 1.0 / static_cast<double>(kk));
  gmm.means.resize(kk, x.cols());
  for (Index c = 0; c < kk; ++c) gmm.means.row(c) = x.row(centers[static_cast<std::size_t>(c)]);
  const Eigen::RowVectorXd global_var =
      ((x.rowwise() - x.colwise().mean()).cwiseProduct(x.rowwise() - x.colwise().mean())).colwise().mean();
  gmm.variances = global_var.cwiseMax(variance_floor).replicate(kk, 1);
  gmm.pruned = static_cast<int>(k - kk);

  double prev = -std::numeric_limits<double>::infinity();
  for (int it = 1; it <= max_iter; ++it) {
    double ll = 0.0;
    const MatrixXd resp = gmm.responsibilities(x, &ll);
    gmm.iterations = it;
    gmm.mean_log_likelihood = ll;
    if (std::abs(ll - prev) < tol) {
      gmm.converged = true;
      break;
    }
    prev = ll;
    m_step(x, resp, variance_floor, gmm);
  }
  return gmm;
}

inline MetricScore nleep(const Eigen::MatrixXd& features, std::span<const std::uint32_t> labels,
                         const NLEEPOptions& opts = {}) {
  using namespace metrics_detail;
  check_inputs(features, labels);

  // Canonical row order makes the seeded initialization independent of how
  // rows were ordered on input.
  const auto order = canonical_row_order(features);
  MatrixXd x(features.rows(), features.cols());
  std::vector<std::uint32_t> y(labels.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    x.row(static_cast<Index>(i)) = features.row(order[i]);
    y[i] = labels[static_cast<std::size_t>(order[i])];
  }
  const auto part = check_inputs(x, y);
  const Index n = x.rows();
  const int num_classes = part.num_classes();

  const MatrixXd reduced = pca_project(x, opts.variance_retained);
  Index k = opts.components > 0 ? opts.components : std::min<Index>(5 * num_classes, n / 10);
  k = std::clamp<Index>(k, 1, n);

  const auto gmm = fit_diagonal_gmm(reduced, k, opts.max_iter, opts.tol, opts.variance_floor, opts.seed);
  const MatrixXd resp = gmm.responsibilities(reduced);
  const Index kk = gmm.components();

  // Empirical joint P(y, z) and conditional P(y | z).
  MatrixXd joint = MatrixXd::Zero(num_classes, kk);
  for (Index i = 0; i < n; ++i) joint.row(part.cls[i]) += resp.row(i);
  joint /= static_cast<double>(n);
  const Eigen::RowVectorXd marginal = joint.colwise().sum();
  MatrixXd conditional = joint;
  for (Index z = 0; z < kk; ++z)
    conditional.col(z) = marginal(z) > 0.0 ? VectorXd(joint.col(z) / marginal(z)) : VectorXd::Zero(num_classes);

  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double p = conditional.row(part.cls[i]).dot(resp.row(i));
    total += std::min(std::log(p), 0.0);
  }

  MetricScore out;
  out.metric = MetricId::nleep;
  out.value = total / static_cast<double>(n);
  out.converged = gmm.converged;
  out.diagnostics["components"] = static_cast<double>(kk);
  out.diagnostics["pca_dims"] = static_cast<double>(reduced.cols());
  out.diagnostics["iterations"] = gmm.iterations;
  out.diagnostics["converged"] = gmm.converged ? 1.0 : 0.0;
  out.diagnostics["pruned_components"] = gmm.pruned;
  if (gmm.pruned > 0) out.notes.push_back("degenerate mixture components pruned");
  return out;
}

}  // namespace site
