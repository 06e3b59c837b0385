#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nsbandit/harness.hpp"

namespace nsbandit {

inline constexpr const char* kToolVersion = "1.0.0";

// Raised for anything wrong with a config: unparseable text (the message
// names line and column), unknown fields, or ill-typed values (the
// message names the field path).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Locale-independent decimal rendering with 17 significant digits, enough
// to round-trip any double exactly.
std::string format_double(double value);

// Parses JSON config text; load reads it from a file first.
nlohmann::json parse_config_text(const std::string& text);
nlohmann::json load_config_file(const std::string& path);

// Applies one "dotted.key=value" override to the config tree. Values
// parse as JSON scalars (numbers, booleans, null) and fall back to plain
// strings. Intermediate objects are created on demand; array indices must
// reference existing elements.
void apply_override(nlohmann::json& config, const std::string& assignment);

// Interprets the tree as an experiment config. Unknown keys and wrong
// types raise ConfigError naming the field path; absent optional fields
// take the struct defaults.
ExperimentConfig config_from_json(const nlohmann::json& config);

// Canonical JSON echo of a config (excludes the worker count, which never
// affects results).
nlohmann::json config_to_json(const ExperimentConfig& config);

// Deterministic file renderings: '\n' line endings, '.' decimal point,
// byte-identical for equal inputs.
std::string curves_csv(const ExperimentResult& result);
std::string summary_json(const ExperimentConfig& config,
                         const ExperimentResult& result);
std::string metadata_json(const ExperimentConfig& config,
                          const ExperimentResult& result);
std::string delta_table_csv(const std::vector<DeltaSweepRow>& rows);

// True per-round means of an environment instance, for plotting.
std::string means_csv(const Environment& env);

}  // namespace nsbandit
