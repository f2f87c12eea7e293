#pragma once

// Storage and validation of feature matrices, labels, benchmark manifests,
// accuracy tables and score tables.
//
// SITB layout (all integers little-endian):
//   [0,4)   magic "SITB"
//   4       version = 1
//   5       dtype   = 1 (f32)
//   [6,8)   reserved, zero
//   [8,16)  n (u64)
//   [16,24) d (u64)
//   n*d f32 values, row-major
//   n (u64) echoed as a sanity check
//   n u32 labels

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "site/error.hpp"

namespace site {

namespace fs = std::filesystem;

inline constexpr char kSitbMagic[4] = {'S', 'I', 'T', 'B'};
inline constexpr std::uint8_t kSitbVersion = 1;
inline constexpr std::uint8_t kSitbDtypeF32 = 1;
inline constexpr std::size_t kSitbHeaderBytes = 24;

struct FeatureMatrix {
  std::string model_id;
  std::string dataset_id;
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<float> values;  // row-major n*d

  float operator()(std::size_t row, std::size_t col) const { return values[row * d + col]; }

  Eigen::MatrixXd to_eigen() const {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j)
        out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * d + j];
    return out;
  }

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;
};

struct LabelVector {
  std::string dataset_id;
  std::vector<std::uint32_t> labels;

  friend bool operator==(const LabelVector&, const LabelVector&) = default;
};

struct ModelRecord {
  std::string model_id;
  std::string family;
  double params_millions = 0.0;
  std::string notes;
};

struct DatasetRecord {
  std::string dataset_id;
  std::uint32_t num_classes = 0;
  std::string domain_tag;
};

/// Ground-truth accuracies keyed by (model_id, dataset_id).
class AccuracyTable {
 public:
  using Key = std::pair<std::string, std::string>;

  void set(const std::string& model, const std::string& dataset, double accuracy) {
    if (!std::isfinite(accuracy) || accuracy < 0.0 || accuracy > 1.0)
      throw Error(Errc::invalid_argument,
                  "accuracy for (" + model + ", " + dataset + ") outside [0,1]");
    entries_[{model, dataset}] = accuracy;
  }

  bool contains(const std::string& model, const std::string& dataset) const {
    return entries_.count({model, dataset}) != 0;
  }

  double at(const std::string& model, const std::string& dataset) const {
    auto it = entries_.find({model, dataset});
    if (it == entries_.end())
      throw Error(Errc::missing_entry, "missing accuracy for (" + model + ", " + dataset + ")");
    return it->second;
  }

  std::size_t size() const { return entries_.size(); }
  const std::map<Key, double>& entries() const { return entries_; }

 private:
  std::map<Key, double> entries_;
};

struct ScoreKey {
  std::string metric_id;
  std::string model_id;
  std::string dataset_id;

  auto operator<=>(const ScoreKey&) const = default;
};

struct ScoreEntry {
  double value = 0.0;
  bool converged = true;
};

/// Transferability scores keyed by (metric_id, model_id, dataset_id).
class ScoreTable {
 public:
  void set(const ScoreKey& key, ScoreEntry entry) {
    if (!std::isfinite(entry.value))
      throw Error(Errc::non_finite, "non-finite score for (" + key.metric_id + ", " +
                                        key.model_id + ", " + key.dataset_id + ")");
    entries_[key] = entry;
  }

  bool contains(const ScoreKey& key) const { return entries_.count(key) != 0; }

  double at(const std::string& metric, const std::string& model, const std::string& dataset) const {
    auto it = entries_.find(ScoreKey{metric, model, dataset});
    if (it == entries_.end())
      throw Error(Errc::missing_entry,
                  "missing score for (" + metric + ", " + model + ", " + dataset + ")");
    return it->second.value;
  }

  std::size_t size() const { return entries_.size(); }
  const std::map<ScoreKey, ScoreEntry>& entries() const { return entries_; }

  std::vector<std::string> metric_ids() const {
    std::vector<std::string> out;
    for (const auto& [key, _] : entries_)
      if (out.empty() || out.back() != key.metric_id) out.push_back(key.metric_id);
    return out;
  }

  friend bool operator==(const ScoreTable& a, const ScoreTable& b) {
    if (a.entries_.size() != b.entries_.size()) return false;
    return std::equal(a.entries_.begin(), a.entries_.end(), b.entries_.begin(),
                      [](const auto& x, const auto& y) {
                        return x.first == y.first &&
                               std::bit_cast<std::uint64_t>(x.second.value) ==
                                   std::bit_cast<std::uint64_t>(y.second.value) &&
                               x.second.converged == y.second.converged;
                      });
  }

 private:
  std::map<ScoreKey, ScoreEntry> entries_;
};

struct FeatureRef {
  std::string model_id;
  std::string dataset_id;
  fs::path path;  // as written in the manifest
};

struct BenchmarkManifest {
  int version = 1;
  std::vector<ModelRecord> models;
  std::vector<DatasetRecord> datasets;
  std::vector<FeatureRef> features;
  AccuracyTable accuracies;
  fs::path base_dir;  // feature paths resolve against this

  const ModelRecord* find_model(const std::string& id) const {
    auto it = std::find_if(models.begin(), models.end(),
                           [&](const ModelRecord& m) { return m.model_id == id; });
    return it == models.end() ? nullptr : &*it;
  }

  const DatasetRecord* find_dataset(const std::string& id) const {
    auto it = std::find_if(datasets.begin(), datasets.end(),
                           [&](const DatasetRecord& ds) { return ds.dataset_id == id; });
    return it == datasets.end() ? nullptr : &*it;
  }

  fs::path resolve(const FeatureRef& ref) const {
    return ref.path.is_absolute() ? ref.path : base_dir / ref.path;
  }

  std::vector<std::string> model_ids() const {
    std::vector<std::string> out;
    for (const auto& m : models) out.push_back(m.model_id);
    return out;
  }

  std::vector<std::string> dataset_ids() const {
    std::vector<std::string> out;
    for (const auto& ds : datasets) out.push_back(ds.dataset_id);
    return out;
  }
};

// ---------------------------------------------------------------------------
// Validation

inline void validate_matrix(const FeatureMatrix& m) {
  if (m.n < 2) throw Error(Errc::bad_dimensions, "n must be >= 2 (got " + std::to_string(m.n) + ")");
  if (m.d < 1) throw Error(Errc::bad_dimensions, "d must be >= 1");
  if (m.values.size() != m.n * m.d)
    throw Error(Errc::bad_dimensions, "values size does not match n*d");
  for (std::size_t k = 0; k < m.values.size(); ++k)
    if (!std::isfinite(m.values[k]))
      throw Error(Errc::non_finite, "non-finite value at row " + std::to_string(k / m.d) +
                                        ", column " + std::to_string(k % m.d));
}

/// Every label must lie in [0, C) and every class in [0, C) must occur at
/// least twice. When num_classes is not given, C = max label + 1.
inline void validate_labels(std::span<const std::uint32_t> labels,
                            std::optional<std::uint32_t> num_classes = std::nullopt) {
  if (labels.empty()) throw Error(Errc::invalid_labels, "labels are empty");
  const std::uint32_t max_label = *std::max_element(labels.begin(), labels.end());
  const std::uint64_t classes = num_classes ? *num_classes : std::uint64_t{max_label} + 1;
  if (classes < 2) throw Error(Errc::invalid_labels, "at least 2 classes required");
  if (max_label >= classes)
    throw Error(Errc::invalid_labels, "label " + std::to_string(max_label) + " outside [0, " +
                                          std::to_string(classes) + ")");
  std::vector<std::size_t> counts(classes, 0);
  for (auto y : labels) ++counts[y];
  for (std::size_t c = 0; c < counts.size(); ++c)
    if (counts[c] < 2)
      throw Error(Errc::invalid_labels, "class " + std::to_string(c) + " has " +
                                            std::to_string(counts[c]) + " samples (need >= 2)");
}

// ---------------------------------------------------------------------------
// SITB encoding

namespace detail {

inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline std::uint64_t get_u64(const std::string& in, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{static_cast<unsigned char>(in[at + i])} << (8 * i);
  return v;
}

inline std::uint32_t get_u32(const std::string& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{static_cast<unsigned char>(in[at + i])} << (8 * i);
  return v;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(Errc::io, "read failure on " + path.string());
  return bytes;
}

}  // namespace detail

/// Writes bytes to a sibling temp file and renames it over `path`.
inline void write_file_atomic(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io, "cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(Errc::io, "write failure on " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(Errc::io, "cannot rename " + tmp.string() + ": " + ec.message());
}

inline std::string encode_sitb(const FeatureMatrix& matrix, const LabelVector& labels) {
  validate_matrix(matrix);
  if (labels.labels.size() != matrix.n)
    throw Error(Errc::label_count_mismatch, "labels length " + std::to_string(labels.labels.size()) +
                                                " != n " + std::to_string(matrix.n));
  validate_labels(labels.labels);

  std::string out;
  out.reserve(kSitbHeaderBytes + matrix.values.size() * 4 + 8 + matrix.n * 4);
  out.append(kSitbMagic, 4);
  out.push_back(static_cast<char>(kSitbVersion));
  out.push_back(static_cast<char>(kSitbDtypeF32));
  out.push_back('\0');
  out.push_back('\0');
  detail::put_u64(out, matrix.n);
  detail::put_u64(out, matrix.d);
  for (float v : matrix.values) detail::put_u32(out, std::bit_cast<std::uint32_t>(v));
  detail::put_u64(out, matrix.n);
  for (auto y : labels.labels) detail::put_u32(out, y);
  return out;
}

inline std::pair<FeatureMatrix, LabelVector> decode_sitb(const std::string& bytes) {
  const std::size_t size = bytes.size();
  if (size < 4) throw Error(Errc::truncated, "truncated header");
  if (std::memcmp(bytes.data(), kSitbMagic, 4) != 0) throw Error(Errc::bad_magic, "bad magic");
  if (size < kSitbHeaderBytes) throw Error(Errc::truncated, "truncated header");
  if (static_cast<std::uint8_t>(bytes[4]) != kSitbVersion)
    throw Error(Errc::bad_version,
                "bad version " + std::to_string(static_cast<std::uint8_t>(bytes[4])));
  if (static_cast<std::uint8_t>(bytes[5]) != kSitbDtypeF32)
    throw Error(Errc::bad_dtype, "bad dtype " + std::to_string(static_cast<std::uint8_t>(bytes[5])));
  if (bytes[6] != '\0' || bytes[7] != '\0')
    throw Error(Errc::bad_reserved, "reserved header bytes not zero");

  const std::uint64_t n = detail::get_u64(bytes, 8);
  const std::uint64_t d = detail::get_u64(bytes, 16);
  if (n < 2 || d < 1)
    throw Error(Errc::bad_dimensions,
                "bad dimensions n=" + std::to_string(n) + " d=" + std::to_string(d));

  // Reject sizes whose arithmetic would overflow before comparing with the file size.
  constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max() / 8;
  if (n > kMax / d || n * d > kMax / 4) throw Error(Errc::truncated, "truncated payload");
  const std::uint64_t features_end = kSitbHeaderBytes + n * d * 4;
  if (size < features_end + 8) throw Error(Errc::truncated, "truncated payload");
  if (detail::get_u64(bytes, features_end) != n) throw Error(Errc::corrupt_length, "corrupt length");
  const std::uint64_t label_bytes = size - features_end - 8;
  if (label_bytes != n * 4)
    throw Error(Errc::label_count_mismatch,
                "label section holds " + std::to_string(label_bytes) + " bytes, expected " +
                    std::to_string(n * 4));

  FeatureMatrix matrix;
  matrix.n = n;
  matrix.d = d;
  matrix.values.resize(n * d);
  for (std::size_t k = 0; k < matrix.values.size(); ++k)
    matrix.values[k] = std::bit_cast<float>(detail::get_u32(bytes, kSitbHeaderBytes + 4 * k));
  LabelVector labels;
  labels.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) labels.labels[i] = detail::get_u32(bytes, features_end + 8 + 4 * i);

  validate_matrix(matrix);
  validate_labels(labels.labels);
  return {std::move(matrix), std::move(labels)};
}

inline void write_features(const FeatureMatrix& matrix, const LabelVector& labels,
                           const fs::path& path) {
  write_file_atomic(path, encode_sitb(matrix, labels));
}

inline std::pair<FeatureMatrix, LabelVector> read_features(const fs::path& path) {
  if (!fs::exists(path)) throw Error(Errc::missing_file, "missing file " + path.string());
  return decode_sitb(detail::read_file(path));
}

inline constexpr std::uint64_t sitb_file_size(std::uint64_t n, std::uint64_t d) {
  return kSitbHeaderBytes + n * d * 4 + 8 + n * 4;
}

// ---------------------------------------------------------------------------
// Manifest

struct ManifestIssue {
  Errc code;
  std::string message;
  std::string path;  // offending feature file, when applicable
};

struct ManifestOptions {
  std::optional<fs::path> base_dir;  // defaults to the manifest's directory
  bool validate_files = true;
};

namespace detail {

/// Shortest decimal text that parses back to the same double.
inline std::string decimal_text(double v) {
  char buf[64];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline double json_decimal(const nlohmann::json& v) {
  // Decimal text is accepted alongside JSON numbers.
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    std::size_t used = 0;
    double out = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing characters in '" + s + "'");
    return out;
  }
  throw std::invalid_argument("expected a number");
}

}  // namespace detail

/// Parses and cross-validates a manifest, collecting every issue found.
inline BenchmarkManifest parse_manifest(const nlohmann::json& doc, const fs::path& base_dir,
                                        bool validate_files, std::vector<ManifestIssue>& issues) {
  BenchmarkManifest m;
  m.base_dir = base_dir;
  auto issue = [&](Errc code, std::string msg, std::string path = {}) {
    issues.push_back({code, std::move(msg), std::move(path)});
  };

  if (!doc.is_object()) {
    issue(Errc::invalid_manifest, "manifest must be a JSON object");
    return m;
  }
  for (const char* key : {"version", "models", "datasets", "features", "accuracies"})
    if (!doc.contains(key)) issue(Errc::invalid_manifest, std::string("missing key '") + key + "'");
  if (!issues.empty()) return m;

  try {
    m.version = doc.at("version").get<int>();
  } catch (const std::exception&) {
    issue(Errc::invalid_manifest, "version must be an integer");
  }
  if (m.version != 1) issue(Errc::invalid_manifest, "unsupported manifest version " + std::to_string(m.version));

  std::set<std::string> model_ids;
  for (std::size_t i = 0; i < doc.at("models").size(); ++i) {
    const auto& j = doc.at("models")[i];
    const std::string where = "models[" + std::to_string(i) + "]";
    try {
      ModelRecord rec;
      rec.model_id = j.at("id").get<std::string>();
      rec.family = j.value("family", std::string{});
      rec.params_millions = detail::json_decimal(j.at("params_millions"));
      rec.notes = j.value("notes", std::string{});
      if (rec.model_id.empty()) issue(Errc::invalid_manifest, where + ": empty id");
      if (!(rec.params_millions > 0.0) || !std::isfinite(rec.params_millions))
        issue(Errc::invalid_manifest, where + ": params_millions must be > 0");
      if (!model_ids.insert(rec.model_id).second)
        issue(Errc::duplicate_id, "duplicate model_id '" + rec.model_id + "'");
      m.models.push_back(std::move(rec));
    } catch (const std::exception& e) {
      issue(Errc::invalid_manifest, where + ": " + e.what());
    }
  }
  if (m.models.size() < 2) issue(Errc::too_few_models, "at least 2 models required");

  std::set<std::string> dataset_ids;
  for (std::size_t i = 0; i < doc.at("datasets").size(); ++i) {
    const auto& j = doc.at("datasets")[i];
    const std::string where = "datasets[" + std::to_string(i) + "]";
    try {
      DatasetRecord rec;
      rec.dataset_id = j.at("id").get<std::string>();
      const auto classes = j.at("num_classes").get<std::int64_t>();
      rec.domain_tag = j.value("domain", std::string{});
      if (classes < 2 || classes > std::numeric_limits<std::uint32_t>::max())
        issue(Errc::invalid_manifest, where + ": num_classes must be >= 2");
      rec.num_classes = static_cast<std::uint32_t>(std::max<std::int64_t>(classes, 0));
      if (!dataset_ids.insert(rec.dataset_id).second)
        issue(Errc::duplicate_id, "duplicate dataset_id '" + rec.dataset_id + "'");
      m.datasets.push_back(std::move(rec));
    } catch (const std::exception& e) {
      issue(Errc::invalid_manifest, where + ": " + e.what());
    }
  }
  if (m.datasets.empty()) issue(Errc::invalid_manifest, "at least 1 dataset required");

  std::set<std::pair<std::string, std::string>> pairs;
  for (std::size_t i = 0; i < doc.at("features").size(); ++i) {
    const auto& j = doc.at("features")[i];
    const std::string where = "features[" + std::to_string(i) + "]";
    FeatureRef ref;
    try {
      ref.model_id = j.at("model").get<std::string>();
      ref.dataset_id = j.at("dataset").get<std::string>();
      ref.path = j.at("path").get<std::string>();
    } catch (const std::exception& e) {
      issue(Errc::invalid_manifest, where + ": " + e.what());
      continue;
    }
    bool ok = true;
    if (!model_ids.count(ref.model_id)) {
      issue(Errc::unknown_model, "unknown model_id '" + ref.model_id + "' in " + where);
      ok = false;
    }
    const DatasetRecord* ds = m.find_dataset(ref.dataset_id);
    if (!ds) {
      issue(Errc::unknown_dataset, "unknown dataset_id '" + ref.dataset_id + "' in " + where);
      ok = false;
    }
    if (!pairs.insert({ref.model_id, ref.dataset_id}).second) {
      issue(Errc::duplicate_pair, "duplicate pair (" + ref.model_id + ", " + ref.dataset_id + ")");
      ok = false;
    }
    if (ok && validate_files) {
      const fs::path file = m.resolve(ref);
      try {
        auto [matrix, labels] = read_features(file);
        validate_labels(labels.labels, ds->num_classes);
      } catch (const Error& e) {
        issue(e.code(), std::string(e.what()) + " (" + where + ")", file.string());
        ok = false;
      }
    }
    m.features.push_back(std::move(ref));
  }

  std::set<std::pair<std::string, std::string>> acc_pairs;
  for (std::size_t i = 0; i < doc.at("accuracies").size(); ++i) {
    const auto& j = doc.at("accuracies")[i];
    const std::string where = "accuracies[" + std::to_string(i) + "]";
    try {
      const auto model = j.at("model").get<std::string>();
      const auto dataset = j.at("dataset").get<std::string>();
      const double acc = detail::json_decimal(j.at("accuracy"));
      if (!model_ids.count(model)) {
        issue(Errc::unknown_model, "unknown model_id '" + model + "' in " + where);
        continue;
      }
      if (!dataset_ids.count(dataset)) {
        issue(Errc::unknown_dataset, "unknown dataset_id '" + dataset + "' in " + where);
        continue;
      }
      if (!acc_pairs.insert({model, dataset}).second) {
        issue(Errc::duplicate_pair, "duplicate accuracy (" + model + ", " + dataset + ")");
        continue;
      }
      m.accuracies.set(model, dataset, acc);
    } catch (const Error& e) {
      issue(e.code(), where + ": " + e.what());
    } catch (const std::exception& e) {
      issue(Errc::invalid_manifest, where + ": " + e.what());
    }
  }
  return m;
}

/// Loads every issue found in the manifest at `path` without throwing.
inline std::vector<ManifestIssue> check_manifest(const fs::path& path, const ManifestOptions& opts = {}) {
  std::vector<ManifestIssue> issues;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(detail::read_file(path));
  } catch (const Error& e) {
    issues.push_back({e.code(), e.what(), path.string()});
    return issues;
  } catch (const std::exception& e) {
    issues.push_back({Errc::invalid_manifest, std::string("cannot parse manifest: ") + e.what(), path.string()});
    return issues;
  }
  parse_manifest(doc, opts.base_dir.value_or(path.parent_path()), opts.validate_files, issues);
  return issues;
}

inline BenchmarkManifest load_manifest(const fs::path& path, const ManifestOptions& opts = {}) {
  if (!fs::exists(path)) throw Error(Errc::missing_file, "missing manifest " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(detail::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_manifest, std::string("cannot parse manifest: ") + e.what());
  }
  std::vector<ManifestIssue> issues;
  auto m = parse_manifest(doc, opts.base_dir.value_or(path.parent_path()), opts.validate_files, issues);
  if (!issues.empty()) throw Error(issues.front().code, issues.front().message);
  return m;
}

/// Serializes a manifest back to the JSON layout `load_manifest` reads.
inline nlohmann::json manifest_to_json(const BenchmarkManifest& m) {
  nlohmann::json doc;
  doc["version"] = m.version;
  doc["models"] = nlohmann::json::array();
  for (const auto& r : m.models) {
    nlohmann::json j{{"id", r.model_id}, {"family", r.family}, {"params_millions", detail::decimal_text(r.params_millions)}};
    if (!r.notes.empty()) j["notes"] = r.notes;
    doc["models"].push_back(j);
  }
  doc["datasets"] = nlohmann::json::array();
  for (const auto& r : m.datasets)
    doc["datasets"].push_back({{"id", r.dataset_id}, {"num_classes", r.num_classes}, {"domain", r.domain_tag}});
  doc["features"] = nlohmann::json::array();
  for (const auto& f : m.features)
    doc["features"].push_back({{"model", f.model_id}, {"dataset", f.dataset_id}, {"path", f.path.generic_string()}});
  doc["accuracies"] = nlohmann::json::array();
  for (const auto& [key, acc] : m.accuracies.entries())
    doc["accuracies"].push_back({{"model", key.first}, {"dataset", key.second}, {"accuracy", detail::decimal_text(acc)}});
  return doc;
}

}  // namespace site
