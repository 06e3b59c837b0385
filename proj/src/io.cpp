#include "nsbandit/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>

namespace nsbandit {

namespace {

using nlohmann::json;

[[noreturn]] void bad_field(const std::string& path, const std::string& what) {
  throw ConfigError("config field '" + path + "': " + what);
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> keys) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* k : keys) {
      if (item.key() == k) known = true;
    }
    if (!known) {
      const std::string full =
          path.empty() ? item.key() : path + "." + item.key();
      throw ConfigError("unknown config field '" + full + "'");
    }
  }
}

double get_number(const json& obj, const std::string& path, const char* key,
                  double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) bad_field(path + "." + key, "expected a number");
  return v.get<double>();
}

std::uint64_t get_count(const json& obj, const std::string& path,
                        const char* key, std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_unsigned()) {
    bad_field(path + "." + key, "expected a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

int get_int(const json& obj, const std::string& path, const char* key,
            int fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer() && !v.is_number_unsigned()) {
    bad_field(path + "." + key, "expected an integer");
  }
  return v.get<int>();
}

bool get_bool(const json& obj, const std::string& path, const char* key,
              bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) bad_field(path + "." + key, "expected a boolean");
  return v.get<bool>();
}

RewardFamily family_from_json(const json& v) {
  check_keys(v, "env.family", {"kind", "nu"});
  RewardFamily family;
  if (v.contains("kind")) {
    if (!v.at("kind").is_string()) {
      bad_field("env.family.kind", "expected a string");
    }
    const std::string kind = v.at("kind").get<std::string>();
    if (kind == "bernoulli") {
      family.kind = RewardFamily::Kind::kBernoulli;
    } else if (kind == "bounded-beta") {
      family.kind = RewardFamily::Kind::kBoundedBeta;
    } else {
      bad_field("env.family.kind",
                "expected one of 'bernoulli', 'bounded-beta'");
    }
  }
  family.nu = get_number(v, "env.family", "nu", family.nu);
  return family;
}

EnvSpec env_from_json(const json& v) {
  if (!v.is_object()) bad_field("env", "expected an object");
  check_keys(v, "env",
             {"kind", "arms", "horizon", "changes", "mu_max", "sigma",
              "scale", "gap", "base", "family"});
  EnvSpec env;
  if (!v.contains("kind")) bad_field("env.kind", "required");
  if (!v.at("kind").is_string()) bad_field("env.kind", "expected a string");
  const std::string kind = v.at("kind").get<std::string>();
  if (kind == "abrupt") {
    env.kind = EnvSpec::Kind::kAbrupt;
  } else if (kind == "smooth") {
    env.kind = EnvSpec::Kind::kSmooth;
  } else if (kind == "gap") {
    env.kind = EnvSpec::Kind::kGap;
  } else {
    bad_field("env.kind", "expected one of 'abrupt', 'smooth', 'gap'");
  }
  env.arms = get_int(v, "env", "arms", env.arms);
  env.horizon = get_count(v, "env", "horizon", env.horizon);
  env.changes = get_count(v, "env", "changes", env.changes);
  env.mu_max = get_number(v, "env", "mu_max", env.mu_max);
  env.sigma = get_number(v, "env", "sigma", env.sigma);
  env.scale = get_number(v, "env", "scale", env.scale);
  env.gap = get_number(v, "env", "gap", env.gap);
  env.base = get_number(v, "env", "base", env.base);
  if (v.contains("family")) {
    if (!v.at("family").is_object()) {
      bad_field("env.family", "expected an object");
    }
    env.family = family_from_json(v.at("family"));
  }
  return env;
}

std::vector<PolicySpec> policies_from_json(const json& v) {
  if (!v.is_array()) bad_field("policies", "expected an array");
  std::vector<PolicySpec> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string path = "policies." + std::to_string(i);
    const json& entry = v[i];
    if (!entry.is_object()) bad_field(path, "expected an object");
    check_keys(entry, path, {"name", "params"});
    if (!entry.contains("name")) bad_field(path + ".name", "required");
    if (!entry.at("name").is_string()) {
      bad_field(path + ".name", "expected a string");
    }
    PolicySpec spec;
    spec.name = entry.at("name").get<std::string>();
    if (entry.contains("params")) {
      const json& params = entry.at("params");
      if (!params.is_object()) bad_field(path + ".params", "expected an object");
      for (const auto& item : params.items()) {
        if (!item.value().is_number()) {
          bad_field(path + ".params." + item.key(), "expected a number");
        }
        spec.params[item.key()] = item.value().get<double>();
      }
    }
    out.push_back(std::move(spec));
  }
  return out;
}

json parse_scalar(const std::string& text) {
  json v = json::parse(text, nullptr, false);
  if (v.is_discarded()) return json(text);
  return v;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value,
                                 std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

json parse_config_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(e.what());
  }
}

json load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_config_text(text);
}

void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment +
                      "' must look like key=value");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);

  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const auto dot = path.find('.', start);
    parts.push_back(path.substr(start, dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  for (const auto& part : parts) {
    if (part.empty()) {
      throw ConfigError("override key '" + path + "' has an empty segment");
    }
  }

  json* node = &config;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const std::string& key = parts[i];
    if (node->is_array()) {
      const bool digits =
          std::all_of(key.begin(), key.end(),
                      [](unsigned char c) { return std::isdigit(c); });
      if (!digits) {
        throw ConfigError("override key '" + path + "': '" + key +
                          "' is not an array index");
      }
      const std::size_t idx = std::stoull(key);
      if (idx >= node->size()) {
        throw ConfigError("override key '" + path + "': index " + key +
                          " is out of range");
      }
      node = &(*node)[idx];
    } else {
      if (node->is_null()) *node = json::object();
      if (!node->is_object()) {
        throw ConfigError("override key '" + path + "': '" + key +
                          "' indexes a scalar");
      }
      node = &(*node)[key];
    }
    if (i + 1 == parts.size()) *node = parse_scalar(value);
  }
}

ExperimentConfig config_from_json(const json& config) {
  if (!config.is_object()) {
    throw ConfigError("config root must be an object");
  }
  check_keys(config, "",
             {"env", "policies", "runs", "seed", "fixed_instance",
              "emit_every"});
  if (!config.contains("env")) bad_field("env", "required");
  if (!config.contains("policies")) bad_field("policies", "required");

  ExperimentConfig out;
  out.env = env_from_json(config.at("env"));
  out.policies = policies_from_json(config.at("policies"));
  out.runs = get_count(config, "", "runs", out.runs);
  out.master_seed = get_count(config, "", "seed", out.master_seed);
  out.fixed_instance =
      get_bool(config, "", "fixed_instance", out.fixed_instance);
  out.emit_every = get_count(config, "", "emit_every", out.emit_every);
  return out;
}

json config_to_json(const ExperimentConfig& config) {
  const char* kind = nullptr;
  switch (config.env.kind) {
    case EnvSpec::Kind::kAbrupt:
      kind = "abrupt";
      break;
    case EnvSpec::Kind::kSmooth:
      kind = "smooth";
      break;
    case EnvSpec::Kind::kGap:
      kind = "gap";
      break;
  }
  json env{
      {"kind", kind},
      {"arms", config.env.arms},
      {"horizon", config.env.horizon},
      {"changes", config.env.changes},
      {"mu_max", config.env.mu_max},
      {"sigma", config.env.sigma},
      {"scale", config.env.scale},
      {"gap", config.env.gap},
      {"base", config.env.base},
      {"family",
       {{"kind", config.env.family.kind == RewardFamily::Kind::kBernoulli
                     ? "bernoulli"
                     : "bounded-beta"},
        {"nu", config.env.family.nu}}},
  };
  json policies = json::array();
  for (const auto& spec : config.policies) {
    policies.push_back({{"name", spec.name}, {"params", spec.params}});
  }
  return json{{"env", env},
              {"policies", policies},
              {"runs", config.runs},
              {"seed", config.master_seed},
              {"fixed_instance", config.fixed_instance},
              {"emit_every", config.emit_every}};
}

std::string curves_csv(const ExperimentResult& result) {
  std::string out = "t,policy,mean_regret,ci_low,ci_high\n";
  for (const auto& curve : result.curves) {
    for (std::size_t k = 0; k < curve.rounds.size(); ++k) {
      out += std::to_string(curve.rounds[k]);
      out += ',';
      out += curve.policy;
      out += ',';
      out += format_double(curve.mean[k]);
      out += ',';
      out += format_double(curve.ci_low[k]);
      out += ',';
      out += format_double(curve.ci_high[k]);
      out += '\n';
    }
  }
  return out;
}

std::string summary_json(const ExperimentConfig& config,
                         const ExperimentResult& result) {
  json rows = json::array();
  for (std::size_t p = 0; p < result.resolved.size(); ++p) {
    rows.push_back({{"policy", result.curves[p].policy},
                    {"mean_regret", result.final_mean[p]},
                    {"ci_low", result.final_ci_low[p]},
                    {"ci_high", result.final_ci_high[p]}});
  }
  const json doc{{"final", rows},
                 {"horizon", config.env.horizon},
                 {"runs", config.runs}};
  return doc.dump(2) + "\n";
}

std::string metadata_json(const ExperimentConfig& config,
                          const ExperimentResult& result) {
  json policies = json::array();
  for (const auto& spec : result.resolved) {
    policies.push_back({{"name", spec.name}, {"params", spec.params}});
  }
  const json doc{
      {"tool_version", kToolVersion},
      {"config", config_to_json(config)},
      {"resolved_policies", policies},
      {"notes",
       {{"log_base", "natural"},
        {"ci_method", "normal approximation: mean +/- 1.96 * se over runs"},
        {"sw_window_rounding", "nearest integer"},
        {"float_format",
         "csv: 17 significant digits; json: shortest round-trip"}}},
  };
  return doc.dump(2) + "\n";
}

std::string delta_table_csv(const std::vector<DeltaSweepRow>& rows) {
  std::string out = "delta,policy,final_regret,ci_low,ci_high\n";
  for (const auto& row : rows) {
    out += format_double(row.delta);
    out += ',';
    out += row.policy;
    out += ',';
    out += format_double(row.final_mean);
    out += ',';
    out += format_double(row.final_ci_low);
    out += ',';
    out += format_double(row.final_ci_high);
    out += '\n';
  }
  return out;
}

std::string means_csv(const Environment& env) {
  std::string out = "t,arm,mean\n";
  for (std::uint64_t t = 1; t <= env.horizon(); ++t) {
    for (int i = 1; i <= env.arms(); ++i) {
      out += std::to_string(t);
      out += ',';
      out += std::to_string(i);
      out += ',';
      out += format_double(env.mean(t, i));
      out += '\n';
    }
  }
  return out;
}

}  // namespace nsbandit
