#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "site/error.hpp"

namespace site::metrics_detail {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Labels remapped onto 0..C-1 in ascending order of the original ids.
struct ClassPartition {
  std::vector<int> cls;
  std::vector<Index> counts;

  int num_classes() const { return static_cast<int>(counts.size()); }
};

/// Common preconditions of every metric: matching lengths, finite values,
/// at least two classes and at least two samples in each present class.
inline ClassPartition check_inputs(const MatrixXd& x, std::span<const std::uint32_t> labels) {
  if (x.rows() < 2 || x.cols() < 1) throw Error(Errc::bad_dimensions, "features need n >= 2 and d >= 1");
  if (static_cast<Index>(labels.size()) != x.rows())
    throw Error(Errc::label_count_mismatch, "labels length does not match feature rows");
  if (!x.allFinite()) throw Error(Errc::non_finite, "non-finite value in features");

  std::vector<std::uint32_t> distinct(labels.begin(), labels.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 2) throw Error(Errc::invalid_labels, "at least 2 classes required");

  ClassPartition out;
  out.cls.resize(labels.size());
  out.counts.assign(distinct.size(), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto c = std::lower_bound(distinct.begin(), distinct.end(), labels[i]) - distinct.begin();
    out.cls[i] = static_cast<int>(c);
    ++out.counts[c];
  }
  for (std::size_t c = 0; c < distinct.size(); ++c)
    if (out.counts[c] < 2)
      throw Error(Errc::invalid_labels, "class " + std::to_string(distinct[c]) + " has fewer than 2 samples");
  return out;
}

inline MatrixXd class_means(const MatrixXd& x, const ClassPartition& part) {
  MatrixXd means = MatrixXd::Zero(part.num_classes(), x.cols());
  for (Index i = 0; i < x.rows(); ++i) means.row(part.cls[i]) += x.row(i);
  for (int c = 0; c < part.num_classes(); ++c) means.row(c) /= static_cast<double>(part.counts[c]);
  return means;
}

/// Population (divide-by-n) covariance.
inline MatrixXd covariance(const MatrixXd& x) {
  const MatrixXd centered = x.rowwise() - x.colwise().mean();
  return centered.transpose() * centered / static_cast<double>(x.rows());
}

/// Eigenpairs of a symmetric matrix sorted by descending eigenvalue.
struct SortedEigen {
  VectorXd values;
  MatrixXd vectors;
};

inline SortedEigen sorted_eigen(const MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym);
  if (es.info() != Eigen::Success) throw Error(Errc::invalid_argument, "eigendecomposition failed");
  const Index d = sym.rows();
  SortedEigen out{VectorXd(d), MatrixXd(d, d)};
  for (Index k = 0; k < d; ++k) {
    out.values(k) = es.eigenvalues()(d - 1 - k);
    VectorXd v = es.eigenvectors().col(d - 1 - k);
    // Fix the sign so the largest-magnitude component is positive.
    Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    out.vectors.col(k) = v;
  }
  return out;
}

/// Centers x and projects it onto the leading principal axes. Keeps the
/// smallest number of axes whose eigenvalues reach `fraction` of the total
/// variance, capped at `max_dims` when positive. Always keeps at least one.
inline MatrixXd pca_project(const MatrixXd& x, double fraction, Index max_dims = 0) {
  const MatrixXd centered = x.rowwise() - x.colwise().mean();
  const MatrixXd cov = centered.transpose() * centered / static_cast<double>(x.rows());
  const auto eig = sorted_eigen(cov);
  const double total = eig.values.cwiseMax(0.0).sum();
  Index keep = 1;
  if (total > 0.0) {
    double cum = 0.0;
    keep = 0;
    while (keep < eig.values.size()) {
      cum += std::max(eig.values(keep), 0.0);
      ++keep;
      if (cum >= fraction * total * (1.0 - 1e-12)) break;
    }
  }
  if (max_dims > 0) keep = std::min(keep, max_dims);
  return centered * eig.vectors.leftCols(keep);
}

/// Row permutation sorting rows lexicographically. Applying it makes results
/// that depend on row order (seeded initialization) invariant to the order
/// rows arrive in.
inline std::vector<Index> canonical_row_order(const MatrixXd& x) {
  std::vector<Index> order(static_cast<std::size_t>(x.rows()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    for (Index j = 0; j < x.cols(); ++j)
      if (x(a, j) != x(b, j)) return x(a, j) < x(b, j);
    return false;
  });
  return order;
}

/// log det of a symmetric positive definite matrix via Cholesky.
inline double logdet_spd(const MatrixXd& a) {
  Eigen::LLT<MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) throw Error(Errc::invalid_argument, "matrix is not positive definite");
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

inline double log_sum_exp(const Eigen::Ref<const VectorXd>& v) {
  const double mx = v.maxCoeff();
  if (!std::isfinite(mx)) return mx;
  return mx + std::log((v.array() - mx).exp().sum());
}

}  // namespace site::metrics_detail
