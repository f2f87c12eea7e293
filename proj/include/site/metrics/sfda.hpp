#pragma once

// SFDA: project features with a shrinkage-regularized Fisher discriminant,
// then score the mean log posterior of the true class under a shared-
// covariance Gaussian classifier fit in the projected space.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "site/metrics/common.hpp"
#include "site/metrics/types.hpp"

namespace site {

namespace sfda_detail {

using metrics_detail::ClassPartition;
using metrics_detail::Index;
using metrics_detail::MatrixXd;
using metrics_detail::VectorXd;

/// Shrinkage scale floor; keeps S_w + lambda*s*I invertible when every class
/// collapses to a point.
inline constexpr double kScaleFloor = 1e-6;
/// Ridge added to the projected shared covariance.
inline constexpr double kProjectedRidge = 1e-9;

/// Top min(C-1, d) generalized eigenvectors of (S_b, S_w + lambda tr(S_w)/d I).
inline MatrixXd fisher_projection(const MatrixXd& x, const ClassPartition& part, double shrinkage) {
  const Index d = x.cols();
  const VectorXd mu = x.colwise().mean();
  const MatrixXd means = metrics_detail::class_means(x, part);
  MatrixXd within = MatrixXd::Zero(d, d);
  MatrixXd between = MatrixXd::Zero(d, d);
  MatrixXd centered = x;
  for (Index i = 0; i < x.rows(); ++i) centered.row(i) -= means.row(part.cls[i]);
  within = centered.transpose() * centered;
  for (int c = 0; c < part.num_classes(); ++c) {
    const VectorXd delta = means.row(c).transpose() - mu;
    between += static_cast<double>(part.counts[c]) * delta * delta.transpose();
  }
  const double scale = std::max(within.trace() / static_cast<double>(d), kScaleFloor);
  MatrixXd regularized = within;
  regularized.diagonal().array() += std::max(shrinkage * scale, kScaleFloor);

  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> ges(between, regularized);
  if (ges.info() != Eigen::Success) throw Error(Errc::invalid_argument, "generalized eigenproblem failed");
  const Index keep = std::min<Index>(part.num_classes() - 1, d);
  MatrixXd w(d, keep);
  for (Index k = 0; k < keep; ++k) w.col(k) = ges.eigenvectors().col(d - 1 - k);
  return w;
}

/// Mean log posterior of the true class under a shared-covariance Gaussian
/// classifier with class priors, fit on `fit_z` and evaluated on `eval_z`.
inline double mean_log_posterior(const MatrixXd& fit_z, const MatrixXd& eval_z, const ClassPartition& part) {
  const Index k = fit_z.cols();
  const int num_classes = part.num_classes();
  const double n = static_cast<double>(fit_z.rows());
  const MatrixXd means = metrics_detail::class_means(fit_z, part);
  MatrixXd centered = fit_z;
  for (Index i = 0; i < fit_z.rows(); ++i) centered.row(i) -= means.row(part.cls[i]);
  MatrixXd shared = centered.transpose() * centered / n;
  shared.diagonal().array() += kProjectedRidge * std::max(1.0, shared.trace() / static_cast<double>(k));
  const Eigen::LDLT<MatrixXd> ldlt(shared);

  // Shared covariance: log N(z | mu_c) differs across classes only by the
  // quadratic term, so the normalizer cancels in the posterior.
  const MatrixXd inv_means = ldlt.solve(means.transpose());  // k x C
  VectorXd bias(num_classes);
  for (int c = 0; c < num_classes; ++c)
    bias(c) = -0.5 * means.row(c).dot(inv_means.col(c)) + std::log(static_cast<double>(part.counts[c]) / n);

  double total = 0.0;
  for (Index i = 0; i < eval_z.rows(); ++i) {
    const VectorXd logits = (eval_z.row(i) * inv_means).transpose() + bias;
    total += std::min(logits(part.cls[i]) - metrics_detail::log_sum_exp(logits), 0.0);
  }
  return total / static_cast<double>(eval_z.rows());
}

}  // namespace sfda_detail

inline MetricScore sfda(const Eigen::MatrixXd& features, std::span<const std::uint32_t> labels,
                        const SFDAOptions& opts = {}) {
  using namespace metrics_detail;
  check_inputs(features, labels);

  const auto order = canonical_row_order(features);
  MatrixXd x(features.rows(), features.cols());
  std::vector<std::uint32_t> y(labels.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    x.row(static_cast<Index>(i)) = features.row(order[i]);
    y[i] = labels[static_cast<std::size_t>(order[i])];
  }
  const auto part = check_inputs(x, y);

  MetricScore out;
  out.metric = MetricId::sfda;
  MatrixXd fit_x = x;
  if (opts.self_challenge && opts.noise_scale > 0.0) {
    // Perturb every feature with Gaussian noise proportional to its spread,
    // fit on the perturbed copy, evaluate on the clean features.
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const Eigen::RowVectorXd spread = covariance(x).diagonal().cwiseSqrt().transpose();
    for (Index i = 0; i < fit_x.rows(); ++i)
      for (Index j = 0; j < fit_x.cols(); ++j) fit_x(i, j) += opts.noise_scale * spread(j) * normal(rng);
    out.notes.push_back("self-challenging noise stage enabled");
  }

  const MatrixXd w = sfda_detail::fisher_projection(fit_x, part, opts.shrinkage);
  out.value = sfda_detail::mean_log_posterior(fit_x * w, x * w, part);
  out.diagnostics["projected_dims"] = static_cast<double>(w.cols());
  out.diagnostics["shrinkage"] = opts.shrinkage;
  return out;
}

}  // namespace site
