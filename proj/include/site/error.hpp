#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace site {

enum class Errc {
  io,
  bad_magic,
  bad_version,
  bad_dtype,
  bad_reserved,
  bad_dimensions,
  truncated,
  corrupt_length,
  label_count_mismatch,
  non_finite,
  invalid_labels,
  invalid_manifest,
  too_few_models,
  unknown_model,
  unknown_dataset,
  duplicate_id,
  duplicate_pair,
  missing_file,
  missing_entry,
  invalid_argument,
  undefined_correlation,
  usage,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::io: return "io";
    case Errc::bad_magic: return "bad_magic";
    case Errc::bad_version: return "bad_version";
    case Errc::bad_dtype: return "bad_dtype";
    case Errc::bad_reserved: return "bad_reserved";
    case Errc::bad_dimensions: return "bad_dimensions";
    case Errc::truncated: return "truncated";
    case Errc::corrupt_length: return "corrupt_length";
    case Errc::label_count_mismatch: return "label_count_mismatch";
    case Errc::non_finite: return "non_finite";
    case Errc::invalid_labels: return "invalid_labels";
    case Errc::invalid_manifest: return "invalid_manifest";
    case Errc::too_few_models: return "too_few_models";
    case Errc::unknown_model: return "unknown_model";
    case Errc::unknown_dataset: return "unknown_dataset";
    case Errc::duplicate_id: return "duplicate_id";
    case Errc::duplicate_pair: return "duplicate_pair";
    case Errc::missing_file: return "missing_file";
    case Errc::missing_entry: return "missing_entry";
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::undefined_correlation: return "undefined_correlation";
    case Errc::usage: return "usage";
  }
  return "unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI's machine-readable output) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message) : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace site
