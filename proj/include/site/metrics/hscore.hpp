#pragma once

#include <cstdint>
#include <span>

#include "site/metrics/common.hpp"
#include "site/metrics/types.hpp"

namespace site {

/// H-Score: tr(pinv(cov(f)) * cov(E[f|y])), both covariances divide by n.
/// The pseudo-inverse drops eigenvalues below rcond * lambda_max.
inline MetricScore hscore(const Eigen::MatrixXd& features, std::span<const std::uint32_t> labels,
                          const HScoreOptions& opts = {}) {
  using namespace metrics_detail;
  const auto part = check_inputs(features, labels);
  const double n = static_cast<double>(features.rows());

  MetricScore out;
  out.metric = MetricId::hscore;

  const MatrixXd cov_f = covariance(features);
  const MatrixXd means = class_means(features, part);
  const VectorXd mu = features.colwise().mean();
  MatrixXd cov_z = MatrixXd::Zero(features.cols(), features.cols());
  for (int c = 0; c < part.num_classes(); ++c) {
    const VectorXd delta = means.row(c).transpose() - mu;
    cov_z += (static_cast<double>(part.counts[c]) / n) * delta * delta.transpose();
  }

  const auto eig = sorted_eigen(cov_f);
  const double lambda_max = eig.values.size() > 0 ? eig.values(0) : 0.0;
  if (!(lambda_max > 0.0)) {
    out.value = 0.0;
    out.diagnostics["rank"] = 0;
    out.notes.push_back("rank-deficient: features are constant");
    return out;
  }
  const double cutoff = opts.rcond * lambda_max;
  double value = 0.0;
  Index rank = 0;
  for (Index k = 0; k < eig.values.size(); ++k) {
    if (eig.values(k) <= cutoff) continue;
    const VectorXd v = eig.vectors.col(k);
    value += v.dot(cov_z * v) / eig.values(k);
    ++rank;
  }
  out.value = std::max(value, 0.0);
  out.diagnostics["rank"] = static_cast<double>(rank);
  if (rank < features.cols()) out.notes.push_back("rank-deficient feature covariance");
  return out;
}

}  // namespace site
