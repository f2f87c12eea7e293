#pragma once

// LogME: per-class Bayesian linear regression of a one-vs-rest 0/1 target
// on the features, with prior precision alpha and noise precision beta
// tuned by evidence maximization. The score is the per-sample log evidence
// averaged over classes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

#include <Eigen/SVD>

#include "site/metrics/common.hpp"
#include "site/metrics/types.hpp"

namespace site {

namespace logme_detail {

using metrics_detail::Index;
using metrics_detail::VectorXd;

inline constexpr double kPrecisionMin = 1e-10;
inline constexpr double kPrecisionMax = 1e10;

/// The target projected onto the singular basis of F.
struct Projection {
  VectorXd sigma2;       // squared singular values, length r = min(n, d)
  VectorXd proj2;        // (U^T y)^2
  double residual2 = 0;  // part of ||y||^2 outside span(U)
  double n = 0;
  double d = 0;
};

struct Terms {
  double gamma = 0;     // effective number of parameters
  double m2 = 0;        // ||m||^2
  double res2 = 0;      // ||y - F m||^2
  double evidence = 0;  // log p(y | alpha, beta)
};

/// Exact log evidence and fixed-point statistics at (alpha, beta).
inline Terms evaluate(const Projection& p, double alpha, double beta) {
  Terms t;
  double logdet = (p.d - static_cast<double>(p.sigma2.size())) * std::log(alpha);
  for (Index i = 0; i < p.sigma2.size(); ++i) {
    const double s = p.sigma2(i);
    const double denom = alpha + beta * s;
    t.gamma += beta * s / denom;
    t.m2 += beta * beta * s * p.proj2(i) / (denom * denom);
    t.res2 += p.proj2(i) * (alpha / denom) * (alpha / denom);
    logdet += std::log(denom);
  }
  t.res2 += p.residual2;
  t.evidence = 0.5 * p.n * std::log(beta) + 0.5 * p.d * std::log(alpha) -
               0.5 * p.n * std::log(2.0 * std::numbers::pi) - 0.5 * beta * t.res2 - 0.5 * alpha * t.m2 -
               0.5 * logdet;
  return t;
}

struct ClassFit {
  double alpha = 1.0;
  double beta = 1.0;
  double evidence = 0.0;  // unnormalized
  int iterations = 0;
  bool converged = false;
};

inline ClassFit fit(const Projection& p, const LogMEOptions& opts) {
  double alpha = 1.0;
  double beta = 1.0;
  Terms t = evaluate(p, alpha, beta);
  ClassFit best{alpha, beta, t.evidence, 0, false};
  for (int it = 1; it <= opts.max_iter; ++it) {
    const double prev = t.evidence;
    // With m = 0 and gamma = 0 the evidence does not depend on alpha.
    if (t.m2 > 0.0) alpha = std::clamp(t.gamma / t.m2, kPrecisionMin, kPrecisionMax);
    beta = std::clamp((p.n - t.gamma) / std::max(t.res2, 1e-300), kPrecisionMin, kPrecisionMax);
    t = evaluate(p, alpha, beta);
    if (t.evidence > best.evidence) best = {alpha, beta, t.evidence, it, false};
    best.iterations = it;
    if (std::abs(t.evidence - prev) < opts.tol) {
      best.converged = true;
      break;
    }
  }
  return best;
}

}  // namespace logme_detail

/// Log evidence of the one-vs-rest regression for a single 0/1 target at
/// fixed (alpha, beta), computed through the singular basis of F.
inline double logme_log_evidence(const Eigen::MatrixXd& features, const Eigen::VectorXd& target,
                                 double alpha, double beta) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(features, Eigen::ComputeThinU);
  logme_detail::Projection p;
  p.n = static_cast<double>(features.rows());
  p.d = static_cast<double>(features.cols());
  p.sigma2 = svd.singularValues().array().square();
  const Eigen::VectorXd proj = svd.matrixU().transpose() * target;
  p.proj2 = proj.array().square();
  p.residual2 = std::max(target.squaredNorm() - p.proj2.sum(), 0.0);
  return logme_detail::evaluate(p, alpha, beta).evidence;
}

inline MetricScore logme(const Eigen::MatrixXd& features, std::span<const std::uint32_t> labels,
                         const LogMEOptions& opts = {}) {
  using namespace metrics_detail;
  const auto part = check_inputs(features, labels);

  Eigen::BDCSVD<MatrixXd> svd(features, Eigen::ComputeThinU);
  const VectorXd sigma2 = svd.singularValues().array().square();
  const MatrixXd& u = svd.matrixU();

  MetricScore out;
  out.metric = MetricId::logme;
  double total = 0.0;
  int max_iters = 0;
  int converged_classes = 0;
  for (int c = 0; c < part.num_classes(); ++c) {
    VectorXd y(features.rows());
    for (Index i = 0; i < y.size(); ++i) y(i) = part.cls[i] == c ? 1.0 : 0.0;
    logme_detail::Projection p;
    p.n = static_cast<double>(features.rows());
    p.d = static_cast<double>(features.cols());
    p.sigma2 = sigma2;
    const VectorXd proj = u.transpose() * y;
    p.proj2 = proj.array().square();
    p.residual2 = std::max(y.squaredNorm() - p.proj2.sum(), 0.0);

    const auto fit = logme_detail::fit(p, opts);
    total += fit.evidence / p.n;
    max_iters = std::max(max_iters, fit.iterations);
    converged_classes += fit.converged ? 1 : 0;
    const std::string tag = "class" + std::to_string(c);
    out.diagnostics[tag + ".iterations"] = fit.iterations;
    out.diagnostics[tag + ".converged"] = fit.converged ? 1.0 : 0.0;
  }
  out.value = total / part.num_classes();
  out.converged = converged_classes == part.num_classes();
  out.diagnostics["iterations"] = max_iters;
  out.diagnostics["converged"] = out.converged ? 1.0 : 0.0;
  if (!out.converged) out.notes.push_back("iteration cap reached before convergence; best iterate returned");
  return out;
}

}  // namespace site
