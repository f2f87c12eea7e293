#pragma once

#include <cmath>
#include <cstdint>
#include <span>

#include "site/metrics/common.hpp"
#include "site/metrics/types.hpp"

namespace site {

/// Bhattacharyya distance between two diagonal Gaussians.
inline double bhattacharyya_diagonal(const Eigen::VectorXd& mean_a, const Eigen::VectorXd& var_a,
                                     const Eigen::VectorXd& mean_b, const Eigen::VectorXd& var_b) {
  double dist = 0.0;
  for (Eigen::Index j = 0; j < mean_a.size(); ++j) {
    const double avg = 0.5 * (var_a(j) + var_b(j));
    const double diff = mean_a(j) - mean_b(j);
    dist += 0.125 * diff * diff / avg + 0.5 * std::log(avg / std::sqrt(var_a(j) * var_b(j)));
  }
  return dist;
}

/// GBC: -sum over unordered class pairs of exp(-D_B), using per-class
/// diagonal Gaussians with floored variances.
inline MetricScore gbc(const Eigen::MatrixXd& features, std::span<const std::uint32_t> labels,
                       const GBCOptions& opts = {}) {
  using namespace metrics_detail;
  const auto part = check_inputs(features, labels);

  MatrixXd x = features;
  if (opts.pca_dims > 0 && features.cols() > opts.pca_dims) x = pca_project(features, 1.0, opts.pca_dims);

  const int num_classes = part.num_classes();
  const MatrixXd means = class_means(x, part);
  MatrixXd vars = MatrixXd::Zero(num_classes, x.cols());
  for (Index i = 0; i < x.rows(); ++i) {
    const Eigen::RowVectorXd diff = x.row(i) - means.row(part.cls[i]);
    vars.row(part.cls[i]) += diff.cwiseProduct(diff);
  }
  Index floored = 0;
  for (int c = 0; c < num_classes; ++c) {
    vars.row(c) /= static_cast<double>(part.counts[c]);
    for (Index j = 0; j < vars.cols(); ++j) {
      if (vars(c, j) < opts.variance_floor) {
        vars(c, j) = opts.variance_floor;
        ++floored;
      }
    }
  }

  double value = 0.0;
  for (int a = 0; a < num_classes; ++a)
    for (int b = a + 1; b < num_classes; ++b)
      value -= std::exp(-bhattacharyya_diagonal(means.row(a).transpose(), vars.row(a).transpose(),
                                                means.row(b).transpose(), vars.row(b).transpose()));

  MetricScore out;
  out.metric = MetricId::gbc;
  out.value = value;
  out.diagnostics["floored_dims"] = static_cast<double>(floored);
  out.diagnostics["dims"] = static_cast<double>(x.cols());
  if (floored > 0) out.notes.push_back("zero-variance dimensions floored");
  return out;
}

}  // namespace site
