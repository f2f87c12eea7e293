#pragma once

// Subcommand bodies. Each takes a loaded RunConfig plus output streams and
// returns the process exit status: 0 success, 1 failure, 2 usage.

#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "site/diagnostics.hpp"
#include "site/error.hpp"
#include "site/feature_store.hpp"
#include "site/metrics.hpp"
#include "site/report.hpp"

namespace site {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// The configured order if given; otherwise the default order when it covers
/// every model; otherwise models by parameter count.
inline StaticOrder resolve_static_order(const RunConfig& cfg, const BenchmarkManifest& m) {
  if (cfg.static_order) return *cfg.static_order;
  auto order = default_static_order();
  for (const auto& id : m.model_ids())
    if (!order.contains(id)) return order_by_params(m.models);
  return order;
}

/// The configured plan if given; otherwise the default plan when it applies
/// to this pool; otherwise no removals.
inline AblationPlan resolve_ablation_plan(const RunConfig& cfg, const BenchmarkManifest& m) {
  if (cfg.ablation_plan) return *cfg.ablation_plan;
  auto plan = default_ablation_plan();
  try {
    plan.validate(m.model_ids());
    return plan;
  } catch (const Error&) {
    return {};
  }
}

inline std::vector<std::string> metric_names(const RunConfig& cfg) {
  std::vector<std::string> out;
  for (const auto& mc : cfg.metrics) out.emplace_back(to_string(mc.id));
  return out;
}

// ---------------------------------------------------------------------------

inline int cmd_validate(const RunConfig& cfg, std::ostream& out) {
  const auto issues = check_manifest(cfg.manifest);
  nlohmann::json doc{{"valid", issues.empty()}, {"errors", nlohmann::json::array()}};
  for (const auto& i : issues)
    doc["errors"].push_back({{"code", std::string(to_string(i.code))}, {"message", i.message}, {"path", i.path}});
  out << doc.dump(2) << '\n';
  return issues.empty() ? kExitOk : kExitFailure;
}

inline int cmd_score(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  // Feature files are checked per triple so one bad file only fails its own rows.
  const auto manifest = load_manifest(cfg.manifest, {.validate_files = false});
  const auto run = score_all(manifest, cfg.metrics, cfg.threads);
  fs::create_directories(cfg.output_dir);
  write_file_atomic(cfg.scores_path(), scores_csv(run.table));
  write_file_atomic(cfg.output_dir / "errors.csv", errors_csv(run.failures));
  for (const auto& f : run.failures)
    err << "failed (" << f.key.metric_id << ", " << f.key.model_id << ", " << f.key.dataset_id << "): " << f.message
        << '\n';
  out << "scored " << run.table.size() << " triples, " << run.failures.size() << " failed\n";
  return run.table.size() > 0 ? kExitOk : kExitFailure;
}

/// Throws missing_entry naming every absent (metric, model, dataset) score and
/// (model, dataset) accuracy.
inline void require_complete(const ScoreTable& scores, const AccuracyTable& acc, const std::vector<std::string>& metrics,
                             const BenchmarkManifest& m) {
  std::vector<std::string> missing;
  for (const auto& ds : m.dataset_ids())
    for (const auto& model : m.model_ids()) {
      if (!acc.contains(model, ds)) missing.push_back("accuracy (" + model + ", " + ds + ")");
      for (const auto& metric : metrics)
        if (!scores.contains({metric, model, ds})) missing.push_back("score (" + metric + ", " + model + ", " + ds + ")");
    }
  if (missing.empty()) return;
  std::string msg = "incomplete tables, missing " + std::to_string(missing.size()) + ":";
  for (const auto& s : missing) msg += "\n  " + s;
  throw Error(Errc::missing_entry, msg);
}

inline int cmd_evaluate(const RunConfig& cfg, std::ostream& out) {
  const auto manifest = load_manifest(cfg.manifest, {.validate_files = false});
  const auto scores = parse_scores_csv(detail::read_file(cfg.scores_path()));
  const auto metrics = metric_names(cfg);
  const auto models = manifest.model_ids();
  const auto datasets = manifest.dataset_ids();
  const auto& acc = manifest.accuracies;
  require_complete(scores, acc, metrics, manifest);

  const auto order = resolve_static_order(cfg, manifest);
  const auto plan = resolve_ablation_plan(cfg, manifest);
  plan.validate(models);

  SummaryTable summary;
  summary.datasets = datasets;
  std::vector<CsvRow> ablation_rows;
  std::vector<CsvRow> fidelity_rows;
  fs::create_directories(cfg.output_dir);

  auto emit = [&](const std::string& name, auto values_for) {
    std::vector<double> row;
    for (const auto& ds : datasets) {
      const ModelValues values = values_for(ds);
      row.push_back(evaluate_scores(values, acc, ds, models));
      for (const auto& point : ablation_sweep(values, acc, ds, models, plan)) {
        std::string prefix;
        for (std::size_t i = 0; i < point.removed.size(); ++i) prefix += (i ? "|" : "") + point.removed[i];
        ablation_rows.push_back({name, ds, prefix, format_rounded(point.tau_w)});
      }
      const auto fid = fidelity_from_values(values, accuracy_values(acc, ds, models), name, ds, models);
      fidelity_rows.push_back(
          {name, ds, fid.flagged ? "nan" : format_rounded(fid.pearson_r), std::to_string(fid.pair_count)});
      std::vector<CsvRow> scatter;
      for (const auto& model : models)
        scatter.push_back({model, format_exact(values.at(model)), format_exact(acc.at(model, ds))});
      write_file_atomic(cfg.output_dir / ("scatter_" + name + "_" + ds + ".csv"), to_csv(kScatterHeader, scatter));
    }
    summary.add_row(name, std::move(row));
  };

  for (const auto& metric : metrics)
    emit(metric, [&](const std::string& ds) { return metric_values(scores, metric, ds, models); });
  const auto static_values = static_scores(order, models);
  emit("static", [&](const std::string&) { return static_values; });

  // Per-dataset ground-truth ranks, for rank-dispersion heatmaps.
  std::vector<CsvRow> rank_rows;
  for (const auto& ds : datasets) {
    std::vector<double> values;
    for (const auto& model : models) values.push_back(acc.at(model, ds));
    const auto ranks = rank_desc(values, models);
    for (std::size_t i = 0; i < models.size(); ++i)
      rank_rows.push_back({ds, models[i], std::to_string(ranks.ranks[i] + 1)});
  }

  write_file_atomic(cfg.output_dir / "summary.csv", summary.to_csv());
  write_file_atomic(cfg.output_dir / "ablation.csv", to_csv(kAblationHeader, ablation_rows));
  write_file_atomic(cfg.output_dir / "fidelity.csv", to_csv(kFidelityHeader, fidelity_rows));
  write_file_atomic(cfg.output_dir / "ranks.csv", to_csv({"dataset", "model", "rank"}, rank_rows));
  out << summary.to_csv();
  return kExitOk;
}

inline int cmd_audit(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  nlohmann::json doc;
  try {
    const auto manifest = load_manifest(cfg.manifest, {.validate_files = false});
    doc = audit_to_json(audit_benchmark(manifest, manifest.accuracies, cfg.audit));
  } catch (const std::exception& e) {
    // Audit informs and never fails the run; an unreadable manifest leaves
    // every check without evidence.
    err << "audit: " << e.what() << '\n';
    AuditReport empty;
    for (auto check : kAuditChecks)
      empty.checks[std::string(check)] = {Verdict::insufficient, std::string("manifest unavailable: ") + e.what()};
    doc = audit_to_json(empty);
  }
  const std::string text = doc.dump(2) + "\n";
  try {
    fs::create_directories(cfg.output_dir);
    write_file_atomic(cfg.output_dir / "audit.json", text);
  } catch (const std::exception& e) {
    err << "audit: cannot write audit.json: " << e.what() << '\n';
  }
  out << text;
  return kExitOk;
}

}  // namespace site
