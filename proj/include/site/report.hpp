#pragma once

// Report emission: number formatting, CSV tables, the Table-1-style summary,
// the run configuration, and the audit JSON document.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "site/diagnostics.hpp"
#include "site/error.hpp"
#include "site/feature_store.hpp"
#include "site/metrics.hpp"

namespace site {

// ---------------------------------------------------------------------------
// Formatting

/// Fixed three decimals; negative zero prints as 0.000.
inline std::string format_rounded(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s = buf;
  if (s == "-0.000") s = "0.000";
  return s;
}

/// Shortest text that parses back to the same double.
inline std::string format_exact(double v) {
  if (std::isnan(v)) return "nan";
  return detail::decimal_text(v);
}

// ---------------------------------------------------------------------------
// CSV

using CsvRow = std::vector<std::string>;

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string to_csv(const CsvRow& header, const std::vector<CsvRow>& rows) {
  std::string out;
  auto line = [&](const CsvRow& r) {
    for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + csv_field(r[i]);
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

/// Parses RFC-4180-style CSV text into rows (header included).
inline std::vector<CsvRow> parse_csv(const std::string& text) {
  std::vector<CsvRow> rows;
  CsvRow row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw Error(Errc::invalid_argument, "unterminated quoted CSV field");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(Errc::invalid_argument, "cannot parse " + what + " '" + s + "'");
  }
}

inline const CsvRow kScoresHeader = {"metric", "model", "dataset", "score", "converged"};
inline const CsvRow kErrorsHeader = {"metric", "model", "dataset", "error"};
inline const CsvRow kAblationHeader = {"metric", "dataset", "removed_prefix", "tau_w"};
inline const CsvRow kFidelityHeader = {"metric", "dataset", "pearson_r", "pair_count"};
inline const CsvRow kScatterHeader = {"model", "score", "accuracy"};
inline const CsvRow kStaticHeader = {"dataset", "tau_w"};

inline std::string scores_csv(const ScoreTable& table) {
  std::vector<CsvRow> rows;
  for (const auto& [key, entry] : table.entries())
    rows.push_back({key.metric_id, key.model_id, key.dataset_id, format_exact(entry.value),
                    entry.converged ? "true" : "false"});
  return to_csv(kScoresHeader, rows);
}

inline std::string errors_csv(const std::vector<ScoreFailure>& failures) {
  std::vector<CsvRow> rows;
  for (const auto& f : failures) rows.push_back({f.key.metric_id, f.key.model_id, f.key.dataset_id, f.message});
  return to_csv(kErrorsHeader, rows);
}

inline ScoreTable parse_scores_csv(const std::string& text) {
  const auto rows = parse_csv(text);
  if (rows.empty() || rows.front() != kScoresHeader)
    throw Error(Errc::invalid_argument, "scores file must start with header metric,model,dataset,score,converged");
  ScoreTable table;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != kScoresHeader.size())
      throw Error(Errc::invalid_argument, "scores row " + std::to_string(i) + " has " + std::to_string(r.size()) +
                                              " fields");
    if (r[4] != "true" && r[4] != "false")
      throw Error(Errc::invalid_argument, "scores row " + std::to_string(i) + ": converged must be true/false");
    ScoreKey key{r[0], r[1], r[2]};
    if (table.contains(key)) throw Error(Errc::duplicate_pair, "duplicate score row for (" + r[0] + ", " + r[1] + ", " + r[2] + ")");
    table.set(key, {parse_double(r[3], "score"), r[4] == "true"});
  }
  return table;
}

// ---------------------------------------------------------------------------
// Summary table

/// Rows are metrics (plus "static"), columns are datasets plus Average. The
/// average is taken over unrounded cells; rounding happens only on output.
struct SummaryTable {
  std::vector<std::string> rows;
  std::vector<std::string> datasets;
  std::vector<std::vector<double>> cells;

  void add_row(std::string name, std::vector<double> values) {
    if (values.size() != datasets.size())
      throw Error(Errc::invalid_argument, "summary row '" + name + "' has the wrong number of cells");
    rows.push_back(std::move(name));
    cells.push_back(std::move(values));
  }

  double average(std::size_t row) const {
    const auto& v = cells.at(row);
    if (v.empty()) throw Error(Errc::invalid_argument, "summary row has no datasets");
    double sum = 0.0;
    for (double x : v) sum += x;
    return sum / static_cast<double>(v.size());
  }

  std::string to_csv() const {
    CsvRow header{"metric"};
    header.insert(header.end(), datasets.begin(), datasets.end());
    header.push_back("Average");
    std::vector<CsvRow> out;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      CsvRow line{rows[r]};
      for (double v : cells[r]) line.push_back(format_rounded(v));
      line.push_back(format_rounded(average(r)));
      out.push_back(std::move(line));
    }
    return site::to_csv(header, out);
  }
};

// ---------------------------------------------------------------------------
// Run configuration

struct RunConfig {
  fs::path config_dir;
  fs::path data_root;
  fs::path manifest;
  std::vector<MetricConfig> metrics;
  std::optional<StaticOrder> static_order;
  std::optional<AblationPlan> ablation_plan;
  AuditThresholds audit;
  fs::path output_dir;
  std::optional<fs::path> scores;
  std::uint64_t seed = 42;
  unsigned threads = 0;

  fs::path scores_path() const { return scores.value_or(output_dir / "scores.csv"); }
};

namespace config_detail {

template <class T>
void take(const nlohmann::json& j, const char* key, T& into, std::set<std::string>& used) {
  used.insert(key);
  if (j.contains(key)) into = j.at(key).get<T>();
}

inline void reject_unknown(const nlohmann::json& j, const std::set<std::string>& used, const std::string& where) {
  for (const auto& [key, _] : j.items())
    if (!used.count(key)) throw Error(Errc::usage, "unknown option '" + key + "' in " + where);
}

}  // namespace config_detail

/// Metric configs are either a bare id string or an object with "id" and
/// per-metric options. Seeded metrics inherit `seed` unless they set one.
inline MetricConfig parse_metric_config(const nlohmann::json& j, std::uint64_t seed) {
  using config_detail::take;
  std::string name;
  if (j.is_string()) name = j.get<std::string>();
  else if (j.is_object() && j.contains("id") && j.at("id").is_string()) name = j.at("id").get<std::string>();
  else throw Error(Errc::usage, "metric entry must be a string or an object with an 'id'");
  const auto id = parse_metric_id(name);
  if (!id) throw Error(Errc::usage, "unknown metric id '" + name + "'");
  auto cfg = MetricConfig::defaults(*id);
  if (j.is_string()) {
    if (auto* o = std::get_if<NLEEPOptions>(&cfg.options)) o->seed = seed;
    if (auto* o = std::get_if<SFDAOptions>(&cfg.options)) o->seed = seed;
    return cfg;
  }
  std::set<std::string> used{"id"};
  try {
    std::visit(
        [&](auto& o) {
          using T = std::decay_t<decltype(o)>;
          if constexpr (std::is_same_v<T, HScoreOptions>) {
            take(j, "rcond", o.rcond, used);
          } else if constexpr (std::is_same_v<T, LogMEOptions>) {
            take(j, "max_iter", o.max_iter, used);
            take(j, "tol", o.tol, used);
          } else if constexpr (std::is_same_v<T, NLEEPOptions>) {
            o.seed = seed;
            take(j, "variance_retained", o.variance_retained, used);
            take(j, "components", o.components, used);
            take(j, "max_iter", o.max_iter, used);
            take(j, "tol", o.tol, used);
            take(j, "variance_floor", o.variance_floor, used);
            take(j, "seed", o.seed, used);
          } else if constexpr (std::is_same_v<T, TransRateOptions>) {
            take(j, "eps", o.eps, used);
          } else if constexpr (std::is_same_v<T, GBCOptions>) {
            take(j, "variance_floor", o.variance_floor, used);
            take(j, "pca_dims", o.pca_dims, used);
          } else if constexpr (std::is_same_v<T, SFDAOptions>) {
            o.seed = seed;
            take(j, "shrinkage", o.shrinkage, used);
            take(j, "self_challenge", o.self_challenge, used);
            take(j, "noise_scale", o.noise_scale, used);
            take(j, "seed", o.seed, used);
          }
        },
        cfg.options);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::usage, "bad option type for metric '" + name + "': " + e.what());
  }
  config_detail::reject_unknown(j, used, "metric '" + name + "'");
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw Error(Errc::usage, e.what());
  }
  return cfg;
}

/// Loads a run configuration. The data root comes from `data_root_override`,
/// then the config's "data_root" (relative to the config file), then the
/// SITE_DATA_ROOT environment variable, then the config file's directory.
inline RunConfig load_run_config(const fs::path& path, const std::optional<fs::path>& data_root_override = {}) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(detail::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::usage, "cannot parse config " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw Error(Errc::usage, "config must be a JSON object");

  RunConfig cfg;
  cfg.config_dir = path.parent_path();
  auto relative_to_config = [&](const fs::path& p) { return p.is_absolute() ? p : cfg.config_dir / p; };
  std::set<std::string> used;
  try {
    std::string data_root, manifest = "manifest.json", output_dir = "site_out", scores;
    config_detail::take(j, "data_root", data_root, used);
    config_detail::take(j, "manifest", manifest, used);
    config_detail::take(j, "output_dir", output_dir, used);
    config_detail::take(j, "scores", scores, used);
    config_detail::take(j, "seed", cfg.seed, used);
    config_detail::take(j, "threads", cfg.threads, used);

    if (data_root_override) cfg.data_root = *data_root_override;
    else if (!data_root.empty()) cfg.data_root = relative_to_config(data_root);
    else if (const char* env = std::getenv("SITE_DATA_ROOT"); env && *env) cfg.data_root = env;
    else cfg.data_root = cfg.config_dir;

    cfg.manifest = fs::path(manifest).is_absolute() ? fs::path(manifest) : cfg.data_root / manifest;
    cfg.output_dir = relative_to_config(output_dir);
    if (!scores.empty()) cfg.scores = relative_to_config(scores);

    used.insert("metrics");
    if (j.contains("metrics")) {
      if (!j.at("metrics").is_array()) throw Error(Errc::usage, "'metrics' must be an array");
      for (const auto& m : j.at("metrics")) cfg.metrics.push_back(parse_metric_config(m, cfg.seed));
    } else {
      for (auto id : kAllMetrics) cfg.metrics.push_back(parse_metric_config(std::string(to_string(id)), cfg.seed));
    }
    for (std::size_t a = 0; a < cfg.metrics.size(); ++a)
      for (std::size_t b = 0; b < a; ++b)
        if (cfg.metrics[a].id == cfg.metrics[b].id)
          throw Error(Errc::usage, "metric '" + std::string(to_string(cfg.metrics[a].id)) + "' listed twice");

    used.insert("static_order");
    if (j.contains("static_order")) cfg.static_order = StaticOrder{j.at("static_order").get<std::vector<std::string>>()};
    used.insert("ablation_plan");
    if (j.contains("ablation_plan"))
      cfg.ablation_plan = AblationPlan{j.at("ablation_plan").get<std::vector<std::string>>()};

    used.insert("audit");
    if (j.contains("audit")) {
      const auto& a = j.at("audit");
      std::set<std::string> audit_used;
      config_detail::take(a, "hierarchy_ratio", cfg.audit.hierarchy_ratio, audit_used);
      config_detail::take(a, "budget_ratio", cfg.audit.budget_ratio, audit_used);
      config_detail::take(a, "headroom_accuracy", cfg.audit.headroom_accuracy, audit_used);
      config_detail::take(a, "min_domains", cfg.audit.min_domains, audit_used);
      config_detail::take(a, "dispersion_threshold", cfg.audit.dispersion_threshold, audit_used);
      config_detail::reject_unknown(a, audit_used, "audit");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::usage, std::string("bad config value: ") + e.what());
  }
  config_detail::reject_unknown(j, used, "config");
  return cfg;
}

// ---------------------------------------------------------------------------
// Audit JSON

inline nlohmann::json audit_to_json(const AuditReport& report) {
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& [check, result] : report.checks)
    doc[check] = {{"verdict", std::string(to_string(result.verdict))}, {"evidence", result.evidence}};
  nlohmann::json disp = {{"top1_concentration", nullptr}, {"mean_pairwise_tau", nullptr}};
  if (report.dispersion) {
    disp["top1_concentration"] = report.dispersion->top1_concentration;
    if (report.dispersion->mean_pairwise_tau) disp["mean_pairwise_tau"] = *report.dispersion->mean_pairwise_tau;
  }
  doc["dispersion"] = disp;
  return doc;
}

}  // namespace site
