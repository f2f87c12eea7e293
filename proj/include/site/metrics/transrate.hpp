#pragma once

#include <cstdint>
#include <span>

#include "site/metrics/common.hpp"
#include "site/metrics/types.hpp"

namespace site {

/// Coding rate R(Z, eps) = 1/2 logdet(I_d + d/(n eps^2) Z^T Z) for an n x d
/// matrix Z. Uses the n x n Gram form when n < d; the determinants agree.
inline double coding_rate(const Eigen::MatrixXd& z, double eps) {
  const double n = static_cast<double>(z.rows());
  const double d = static_cast<double>(z.cols());
  const double scale = d / (n * eps * eps);
  if (z.rows() < z.cols()) {
    const Eigen::MatrixXd gram = Eigen::MatrixXd::Identity(z.rows(), z.rows()) + scale * z * z.transpose();
    return 0.5 * metrics_detail::logdet_spd(gram);
  }
  const Eigen::MatrixXd gram = Eigen::MatrixXd::Identity(z.cols(), z.cols()) + scale * z.transpose() * z;
  return 0.5 * metrics_detail::logdet_spd(gram);
}

/// TransRate: R(Z) - sum_c (n_c/n) R(Z_c) with Z mean-centered and each
/// class block re-centered on its own mean.
inline MetricScore transrate(const Eigen::MatrixXd& features, std::span<const std::uint32_t> labels,
                             const TransRateOptions& opts = {}) {
  using namespace metrics_detail;
  const auto part = check_inputs(features, labels);
  const Index n = features.rows();
  const MatrixXd z = features.rowwise() - features.colwise().mean();

  double within = 0.0;
  for (int c = 0; c < part.num_classes(); ++c) {
    MatrixXd zc(part.counts[c], z.cols());
    Index row = 0;
    for (Index i = 0; i < n; ++i)
      if (part.cls[i] == c) zc.row(row++) = z.row(i);
    zc = zc.rowwise() - zc.colwise().mean();
    within += static_cast<double>(part.counts[c]) / static_cast<double>(n) * coding_rate(zc, opts.eps);
  }

  MetricScore out;
  out.metric = MetricId::transrate;
  out.value = coding_rate(z, opts.eps) - within;
  out.diagnostics["eps"] = opts.eps;
  return out;
}

}  // namespace site
