#pragma once

// Benchmark diagnostics: the static ranker, model-ablation sweeps, fidelity
// of score gaps to accuracy gaps, rank dispersion, and the benchmark audit.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "site/error.hpp"
#include "site/feature_store.hpp"
#include "site/rank_stats.hpp"

namespace site {

using ModelValues = std::map<std::string, double>;

// ---------------------------------------------------------------------------
// Static ranker

/// A fixed model ordering, best first.
struct StaticOrder {
  std::vector<std::string> model_ids;

  void validate() const {
    std::set<std::string> seen;
    for (const auto& id : model_ids)
      if (!seen.insert(id).second) throw Error(Errc::duplicate_id, "static order lists '" + id + "' twice");
  }

  bool contains(const std::string& id) const {
    return std::find(model_ids.begin(), model_ids.end(), id) != model_ids.end();
  }
};

/// ResNet-152 > DenseNet-201 > ResNet-101 > DenseNet-169 > ResNet-50 >
/// DenseNet-121 > ResNet-34 > GoogleNet > Inception-v3 > MobileNet > MNASNet,
/// using torchvision model ids.
inline StaticOrder default_static_order() {
  return {{"resnet152", "densenet201", "resnet101", "densenet169", "resnet50", "densenet121", "resnet34",
           "googlenet", "inception_v3", "mobilenet_v2", "mnasnet1_0"}};
}

/// Orders models by params_millions descending, ties by model id.
inline StaticOrder order_by_params(std::vector<ModelRecord> models) {
  std::sort(models.begin(), models.end(), [](const ModelRecord& a, const ModelRecord& b) {
    if (a.params_millions != b.params_millions) return a.params_millions > b.params_millions;
    return a.model_id < b.model_id;
  });
  StaticOrder out;
  for (const auto& m : models) out.model_ids.push_back(m.model_id);
  return out;
}

/// T_m = |models| - position of m among the selected models in `order`.
inline ModelValues static_scores(const StaticOrder& order, const std::vector<std::string>& models) {
  order.validate();
  for (const auto& m : models)
    if (!order.contains(m)) throw Error(Errc::unknown_model, "model '" + m + "' missing from static order");
  const std::set<std::string> selected(models.begin(), models.end());
  ModelValues out;
  double next = static_cast<double>(selected.size());
  for (const auto& id : order.model_ids)
    if (selected.count(id)) out[id] = next--;
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

inline ModelValues metric_values(const ScoreTable& scores, const std::string& metric, const std::string& dataset,
                                 const std::vector<std::string>& models) {
  ModelValues out;
  for (const auto& m : models) out[m] = scores.at(metric, m, dataset);
  return out;
}

inline ModelValues accuracy_values(const AccuracyTable& acc, const std::string& dataset,
                                   const std::vector<std::string>& models) {
  ModelValues out;
  for (const auto& m : models) out[m] = acc.at(m, dataset);
  return out;
}

/// Weighted Kendall's tau of predicted scores against accuracies on one dataset.
inline double evaluate_scores(const ModelValues& predicted, const AccuracyTable& acc, const std::string& dataset,
                              const std::vector<std::string>& models) {
  RankedScores rs;
  for (const auto& m : models) {
    auto it = predicted.find(m);
    if (it == predicted.end()) throw Error(Errc::missing_entry, "missing score for (" + m + ", " + dataset + ")");
    rs.model_ids.push_back(m);
    rs.ground_truth.push_back(acc.at(m, dataset));
    rs.predicted.push_back(it->second);
  }
  return weighted_kendall_tau(rs);
}

inline double evaluate_metric(const ScoreTable& scores, const AccuracyTable& acc, const std::string& metric,
                              const std::string& dataset, const std::vector<std::string>& models) {
  return evaluate_scores(metric_values(scores, metric, dataset, models), acc, dataset, models);
}

// ---------------------------------------------------------------------------
// Ablation

struct AblationPlan {
  std::vector<std::string> removal_sequence;

  void validate(const std::vector<std::string>& models) const {
    std::set<std::string> seen;
    for (const auto& id : removal_sequence) {
      if (!seen.insert(id).second) throw Error(Errc::duplicate_id, "ablation plan lists '" + id + "' twice");
      if (std::find(models.begin(), models.end(), id) == models.end())
        throw Error(Errc::unknown_model, "ablation plan references unknown model '" + id + "'");
    }
    if (models.size() < removal_sequence.size() + 2)
      throw Error(Errc::invalid_argument, "ablation must leave at least 2 models");
  }
};

/// Largest members of the over-represented families, removed in this order.
inline AblationPlan default_ablation_plan() {
  return {{"resnet152", "resnet101", "densenet169", "densenet201"}};
}

struct AblationPoint {
  std::vector<std::string> removed;  // prefix of the plan
  std::size_t model_count = 0;
  double tau_w = 0.0;
};

/// Entry k is tau_w over `models` minus the first k removals.
inline std::vector<AblationPoint> ablation_sweep(const ModelValues& predicted, const AccuracyTable& acc,
                                                 const std::string& dataset, const std::vector<std::string>& models,
                                                 const AblationPlan& plan) {
  plan.validate(models);
  std::vector<AblationPoint> out;
  std::vector<std::string> remaining = models;
  std::vector<std::string> removed;
  for (std::size_t k = 0;; ++k) {
    out.push_back({removed, remaining.size(), evaluate_scores(predicted, acc, dataset, remaining)});
    if (k == plan.removal_sequence.size()) break;
    const auto& id = plan.removal_sequence[k];
    remaining.erase(std::find(remaining.begin(), remaining.end(), id));
    removed.push_back(id);
  }
  return out;
}

inline std::vector<AblationPoint> ablation_sweep(const ScoreTable& scores, const AccuracyTable& acc,
                                                 const std::string& metric, const std::string& dataset,
                                                 const std::vector<std::string>& models, const AblationPlan& plan) {
  return ablation_sweep(metric_values(scores, metric, dataset, models), acc, dataset, models, plan);
}

// ---------------------------------------------------------------------------
// Fidelity to accuracy differences

/// Signed differences v_i - v_j over unordered pairs i < j, with models in
/// ascending id order.
inline std::vector<double> delta_pairs(const ModelValues& values, const std::vector<std::string>& models) {
  std::vector<std::string> ids = models;
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  std::vector<double> v;
  for (const auto& id : ids) {
    auto it = values.find(id);
    if (it == values.end()) throw Error(Errc::missing_entry, "missing value for model '" + id + "'");
    v.push_back(it->second);
  }
  std::vector<double> out;
  out.reserve(v.size() * (v.size() - (v.empty() ? 0 : 1)) / 2);
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j) out.push_back(v[i] - v[j]);
  return out;
}

struct FidelityRecord {
  std::string metric_id;
  std::string dataset_id;
  double pearson_r = std::numeric_limits<double>::quiet_NaN();
  std::size_t pair_count = 0;
  bool flagged = false;  // correlation undefined
  std::string note;
};

inline FidelityRecord fidelity_from_values(const ModelValues& scores, const ModelValues& accuracies,
                                           const std::string& metric, const std::string& dataset,
                                           const std::vector<std::string>& models) {
  FidelityRecord rec{metric, dataset};
  const auto d_acc = delta_pairs(accuracies, models);
  const auto d_t = delta_pairs(scores, models);
  rec.pair_count = d_t.size();
  const bool acc_const = std::all_of(d_acc.begin(), d_acc.end(), [](double x) { return x == 0.0; });
  const bool t_const = std::all_of(d_t.begin(), d_t.end(), [](double x) { return x == 0.0; });
  if (d_t.size() < 2 || acc_const || t_const) {
    rec.flagged = true;
    rec.note = d_t.size() < 2 ? "fewer than 2 model pairs"
               : acc_const   ? "accuracies constant: correlation undefined"
                             : "scores constant: correlation undefined";
    return rec;
  }
  rec.pearson_r = pearson(d_acc, d_t);
  return rec;
}

inline FidelityRecord fidelity_correlation(const ScoreTable& scores, const AccuracyTable& acc,
                                           const std::string& metric, const std::string& dataset,
                                           const std::vector<std::string>& models) {
  return fidelity_from_values(metric_values(scores, metric, dataset, models), accuracy_values(acc, dataset, models),
                              metric, dataset, models);
}

// ---------------------------------------------------------------------------
// Rank dispersion

struct DispersionStats {
  double top1_concentration = 0.0;
  std::optional<double> mean_pairwise_tau;  // undefined with fewer than 2 datasets
  std::map<std::string, int> winner_histogram;
  bool flagged = false;
  std::string note;
};

/// Share of datasets won by the most frequent winner, and the mean Kendall
/// tau between per-dataset ground-truth rankings over all dataset pairs.
inline DispersionStats rank_dispersion(const AccuracyTable& acc, const std::vector<std::string>& models,
                                       const std::vector<std::string>& datasets) {
  if (models.size() < 2) throw Error(Errc::invalid_argument, "rank dispersion needs at least 2 models");
  if (datasets.empty()) throw Error(Errc::invalid_argument, "rank dispersion needs at least 1 dataset");
  DispersionStats out;
  std::vector<std::vector<double>> neg_ranks;
  for (const auto& ds : datasets) {
    std::vector<double> values;
    for (const auto& m : models) values.push_back(acc.at(m, ds));
    const auto ranks = rank_desc(values, models);
    std::vector<double> score(models.size());
    for (std::size_t i = 0; i < models.size(); ++i) {
      score[i] = -static_cast<double>(ranks.ranks[i]);
      if (ranks.ranks[i] == 0) ++out.winner_histogram[models[i]];
    }
    neg_ranks.push_back(std::move(score));
  }
  int best = 0;
  for (const auto& [_, wins] : out.winner_histogram) best = std::max(best, wins);
  out.top1_concentration = static_cast<double>(best) / static_cast<double>(datasets.size());

  if (datasets.size() < 2) {
    out.flagged = true;
    out.note = "fewer than 2 datasets: dispersion undefined";
    return out;
  }
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < neg_ranks.size(); ++a)
    for (std::size_t b = a + 1; b < neg_ranks.size(); ++b, ++pairs) sum += kendall_tau(neg_ranks[a], neg_ranks[b]);
  out.mean_pairwise_tau = sum / static_cast<double>(pairs);
  return out;
}

// ---------------------------------------------------------------------------
// Audit

enum class Verdict { pass, flag, insufficient };

constexpr std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::flag: return "flag";
    case Verdict::insufficient: return "insufficient";
  }
  return "insufficient";
}

struct CheckResult {
  Verdict verdict = Verdict::insufficient;
  std::string evidence;
};

struct AuditThresholds {
  double hierarchy_ratio = 1.5;
  double budget_ratio = 3.0;
  double headroom_accuracy = 0.99;
  std::size_t min_domains = 2;
  double dispersion_threshold = 0.5;
};

inline constexpr std::array<std::string_view, 5> kAuditChecks = {"family_hierarchy", "budget_match", "headroom",
                                                                  "domain_variety", "rank_dispersion"};

/// Benchmark-construction checklist items and the check that decides each.
inline constexpr std::array<std::pair<std::string_view, std::string_view>, 6> kChecklistItems = {{
    {"Ensure diversity: models from different families", "family_hierarchy"},
    {"Match computational budgets", "budget_match"},
    {"Avoid trivial hierarchies within a family", "family_hierarchy"},
    {"Include datasets with room for improvement", "headroom"},
    {"Include datasets from multiple domains", "domain_variety"},
    {"Engineer for rank dispersion", "rank_dispersion"},
}};

struct AuditReport {
  std::map<std::string, CheckResult> checks;
  std::optional<DispersionStats> dispersion;

  const CheckResult& at(std::string_view check) const { return checks.at(std::string(check)); }
};

namespace audit_detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

inline CheckResult family_hierarchy(const BenchmarkManifest& m, const AuditThresholds& t) {
  std::map<std::string, std::vector<const ModelRecord*>> families;
  for (const auto& rec : m.models) {
    if (rec.family.empty()) return {Verdict::insufficient, "model '" + rec.model_id + "' has no family"};
    families[rec.family].push_back(&rec);
  }
  std::vector<std::string> flagged;
  for (const auto& [family, members] : families) {
    if (members.size() < 2) continue;
    auto [lo, hi] = std::minmax_element(members.begin(), members.end(), [](auto* a, auto* b) {
      return a->params_millions < b->params_millions;
    });
    const double ratio = (*hi)->params_millions / (*lo)->params_millions;
    if (ratio > t.hierarchy_ratio)
      flagged.push_back(family + " (" + std::to_string(members.size()) + " members, " + (*hi)->model_id + "/" +
                        (*lo)->model_id + " params ratio " + fmt(ratio) + ")");
  }
  if (families.size() < 2)
    return {Verdict::flag, "only one model family: " + families.begin()->first};
  if (flagged.empty()) return {Verdict::pass, std::to_string(families.size()) + " families, no size hierarchy"};
  std::string ev = "size hierarchies in: ";
  for (std::size_t i = 0; i < flagged.size(); ++i) ev += (i ? "; " : "") + flagged[i];
  return {Verdict::flag, ev};
}

inline CheckResult budget_match(const BenchmarkManifest& m, const AuditThresholds& t) {
  if (m.models.size() < 2) return {Verdict::insufficient, "fewer than 2 models"};
  auto [lo, hi] = std::minmax_element(m.models.begin(), m.models.end(), [](const auto& a, const auto& b) {
    return a.params_millions < b.params_millions;
  });
  const double ratio = hi->params_millions / lo->params_millions;
  const std::string ev = hi->model_id + " " + fmt(hi->params_millions) + "M vs " + lo->model_id + " " +
                         fmt(lo->params_millions) + "M, ratio " + fmt(ratio);
  return {ratio > t.budget_ratio ? Verdict::flag : Verdict::pass, ev};
}

inline CheckResult headroom(const BenchmarkManifest& m, const AccuracyTable& acc, const AuditThresholds& t) {
  std::vector<std::string> saturated;
  std::vector<std::string> incomplete;
  for (const auto& ds : m.datasets) {
    double lowest = std::numeric_limits<double>::infinity();
    bool complete = true;
    for (const auto& model : m.models) {
      if (!acc.contains(model.model_id, ds.dataset_id)) {
        complete = false;
        continue;
      }
      lowest = std::min(lowest, acc.at(model.model_id, ds.dataset_id));
    }
    if (!complete) incomplete.push_back(ds.dataset_id);
    else if (lowest > t.headroom_accuracy) saturated.push_back(ds.dataset_id + " (min accuracy " + fmt(lowest) + ")");
  }
  if (!saturated.empty()) {
    std::string ev = "saturated datasets: ";
    for (std::size_t i = 0; i < saturated.size(); ++i) ev += (i ? ", " : "") + saturated[i];
    return {Verdict::flag, ev};
  }
  if (!incomplete.empty()) {
    std::string ev = "missing accuracies for datasets: ";
    for (std::size_t i = 0; i < incomplete.size(); ++i) ev += (i ? ", " : "") + incomplete[i];
    return {Verdict::insufficient, ev};
  }
  return {Verdict::pass, "every dataset has a model at or below " + fmt(t.headroom_accuracy)};
}

inline CheckResult domain_variety(const BenchmarkManifest& m, const AuditThresholds& t) {
  std::set<std::string> domains;
  for (const auto& ds : m.datasets) {
    if (ds.domain_tag.empty()) return {Verdict::insufficient, "dataset '" + ds.dataset_id + "' has no domain tag"};
    domains.insert(ds.domain_tag);
  }
  std::string ev = std::to_string(domains.size()) + " domain(s):";
  for (const auto& d : domains) ev += " " + d;
  return {domains.size() < t.min_domains ? Verdict::flag : Verdict::pass, ev};
}

}  // namespace audit_detail

inline AuditReport audit_benchmark(const BenchmarkManifest& manifest, const AccuracyTable& acc,
                                   const AuditThresholds& t = {}) {
  AuditReport r;
  r.checks["family_hierarchy"] = audit_detail::family_hierarchy(manifest, t);
  r.checks["budget_match"] = audit_detail::budget_match(manifest, t);
  r.checks["headroom"] = audit_detail::headroom(manifest, acc, t);
  r.checks["domain_variety"] = audit_detail::domain_variety(manifest, t);

  CheckResult dispersion{Verdict::insufficient, ""};
  try {
    auto stats = rank_dispersion(acc, manifest.model_ids(), manifest.dataset_ids());
    if (stats.flagged) {
      dispersion.evidence = stats.note;
    } else {
      dispersion.verdict = stats.top1_concentration >= t.dispersion_threshold ? Verdict::flag : Verdict::pass;
      dispersion.evidence = "top1_concentration " + audit_detail::fmt(stats.top1_concentration) +
                            ", mean pairwise tau " + audit_detail::fmt(*stats.mean_pairwise_tau);
    }
    r.dispersion = std::move(stats);
  } catch (const Error& e) {
    dispersion.evidence = std::string("insufficient metadata: ") + e.what();
  }
  r.checks["rank_dispersion"] = std::move(dispersion);
  return r;
}

}  // namespace site
