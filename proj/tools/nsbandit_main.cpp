#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "nsbandit/environments.hpp"
#include "nsbandit/harness.hpp"
#include "nsbandit/io.hpp"
#include "nsbandit/rng.hpp"
#include "nsbandit/theory.hpp"

namespace {

using namespace nsbandit;

// Exit codes: 0 success, 1 check failure, 2 config/usage error,
// 3 infeasible parameters.
constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitInfeasible = 3;

std::uint64_t parse_seed_text(const std::string& text, const char* origin) {
  std::size_t used = 0;
  std::uint64_t value = 0;
  try {
    value = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty()) {
    throw ConfigError(std::string(origin) + " must be a nonnegative integer, got '" +
                      text + "'");
  }
  return value;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

nlohmann::json load_tree(const std::string& config_path,
                         const std::vector<std::string>& overrides) {
  nlohmann::json tree = load_config_file(config_path);
  for (const auto& assignment : overrides) {
    apply_override(tree, assignment);
  }
  return tree;
}

// The strictest preconditions the regret guarantees place on a tuned
// ds-ts instance; violating any one of them names the inequality.
void enforce_strict_theory(const ExperimentConfig& config) {
  const double tau_floor = 1.0 / (12.0 * std::sqrt(2.0));
  for (const auto& requested : config.policies) {
    const auto spec = auto_tune(requested, config.env);
    if (spec.name != "ds-ts") continue;
    const double gamma = spec.params.at("gamma");
    const double tau_max = spec.params.at("tau_max");
    if (!(gamma > kTheoryGammaLow && gamma < 1.0)) {
      throw InfeasibleError("infeasible: gamma = " + format_double(gamma) +
                            " must lie in (1 - 1/e, 1) = (" +
                            format_double(kTheoryGammaLow) + ", 1)");
    }
    if (!(tau_max >= tau_floor)) {
      throw InfeasibleError("infeasible: tau_max = " +
                            format_double(tau_max) + " must be >= 1/(12*sqrt(2)) = " +
                            format_double(tau_floor));
    }
    if (config.env.kind == EnvSpec::Kind::kSmooth) {
      const double drift = 2.0 * config.env.sigma * d_gamma(gamma);
      if (!(drift < 1.0 / 3.0)) {
        throw InfeasibleError("infeasible: 2*sigma*D(gamma) = " +
                              format_double(drift) + " must be < Delta_0 = " +
                              format_double(1.0 / 3.0));
      }
    }
  }
}

struct RunArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool seed_given = false;
  int jobs = 0;
  bool strict_theory = false;
};

int cmd_run(const RunArgs& args) {
  auto tree = load_tree(args.config_path, args.overrides);
  ExperimentConfig config = config_from_json(tree);
  if (args.seed_given) {
    config.master_seed = args.seed;
  } else if (const char* env_seed = std::getenv("NSBANDIT_SEED")) {
    config.master_seed = parse_seed_text(env_seed, "NSBANDIT_SEED");
  }
  config.jobs = args.jobs;
  if (args.strict_theory) enforce_strict_theory(config);

  const auto result = run_experiment(config);

  const std::filesystem::path dir(args.out_dir);
  std::filesystem::create_directories(dir);
  write_file(dir / "curves.csv", curves_csv(result));
  write_file(dir / "summary.json", summary_json(config, result));
  write_file(dir / "metadata.json", metadata_json(config, result));

  std::cout << "wrote " << (dir / "curves.csv").string() << "\n"
            << "wrote " << (dir / "summary.json").string() << "\n"
            << "wrote " << (dir / "metadata.json").string() << "\n"
            << "final mean regret over " << config.runs << " runs:\n";
  for (std::size_t p = 0; p < result.resolved.size(); ++p) {
    std::cout << "  " << result.curves[p].policy << ": "
              << format_double(result.final_mean[p]) << "\n";
  }
  return kExitOk;
}

struct BoundArgs {
  std::string setting;
  double gamma = 0.0;
  bool gamma_given = false;
  double t = 0.0;
  bool t_given = false;
  double bt = 10.0;
  double delta_t = 0.1;
  double delta = 0.3;
  double sigma = 1e-3;
  double beta = 1.0;
  double f = 5000.0;
  double mu_max = 1.0;
  double tau_max = 0.2;
  bool lemma_form = false;
};

int cmd_bound(const BoundArgs& args) {
  TheoryParams p;
  p.T = args.t_given ? args.t : (args.setting == "abrupt" ? 1e5 : 1e4);
  p.b_t = args.bt;
  p.delta_t = args.delta_t;
  p.delta = args.delta;
  p.sigma = args.sigma;
  p.beta = args.beta;
  p.f_a2 = args.f;
  p.mu_max = args.mu_max;
  p.tau_max = args.tau_max;
  p.gamma = args.gamma_given
                ? args.gamma
                : (args.setting == "abrupt" ? 1.0 - std::sqrt(p.b_t / p.T)
                                            : 1.0 - 10.0 / std::sqrt(p.T));

  std::cout << "setting: " << args.setting << "\n"
            << "gamma: " << format_double(p.gamma) << "\n"
            << "T: " << format_double(p.T) << "\n";

  if (args.setting == "abrupt") {
    const auto b = theorem1_bound(p, args.lemma_form);
    std::cout << "D(gamma): " << format_double(d_gamma(p.gamma)) << "\n"
              << "components:\n"
              << "  pseudo_stationary_term: "
              << format_double(b.pseudo_stationary_term) << "\n"
              << "  concentration_term: "
              << format_double(b.concentration_term) << "\n"
              << "  C(gamma): " << format_double(b.c_const) << "\n"
              << "  L(gamma): " << format_double(b.l_gamma) << "\n"
              << "per-arm bound: " << format_double(b.per_arm) << "\n"
              << "feasibility: gamma in (1 - 1/e, 1), tau_max >= 1/(12*sqrt(2)): ok\n";
  } else {
    const double drift = 2.0 * p.sigma * d_gamma(p.gamma);
    const auto b = theorem2_bound(p);
    std::cout << "D(gamma): " << format_double(d_gamma(p.gamma)) << "\n"
              << "components:\n"
              << "  near_tie_term: " << format_double(b.near_tie_term) << "\n"
              << "  concentration_term: "
              << format_double(b.concentration_term) << "\n"
              << "  M(gamma): " << format_double(b.m_gamma) << "\n"
              << "per-arm bound: " << format_double(b.per_arm) << "\n"
              << "feasibility: 2*sigma*D(gamma) = " << format_double(drift)
              << " < Delta/3 = " << format_double(p.delta / 3.0) << ": ok\n";
  }

  std::cout << "minimum-gap scaling (reference):\n"
               "  CUSUM:  O~(B_T/Delta_T^2 + sqrt(T B_T))\n"
               "  SW-TS:  O~(sqrt(T B_T)/Delta_T)\n"
               "  DS-UCB: O~(sqrt(T B_T)/Delta_T^2)\n"
               "  DS-TS:  O~(sqrt(T B_T)/Delta_T^2)\n"
               "note: the numeric constants are astronomically loose at desk "
               "scales; use the bound for structure (finiteness, "
               "monotonicity, feasibility), not as a forecast.\n";
  return kExitOk;
}

struct GammaArgs {
  std::string setting;
  double t = 0.0;
  double bt = 1.0;
  double beta = 0.5;
};

int cmd_gamma(const GammaArgs& args) {
  if (args.setting == "abrupt") {
    const auto choice = gamma_for_abrupt(args.t, args.bt);
    std::cout << "gamma = 1 - sqrt(B_T/T): " << format_double(choice.gamma)
              << "\n"
              << "in theory domain (1 - 1/e, 1): "
              << (choice.in_theory_domain ? "yes" : "no") << "\n";
    if (choice.in_theory_domain) {
      std::cout << "D(gamma): " << format_double(d_gamma(choice.gamma))
                << "\n";
    }
  } else {
    const auto choice = gamma_for_smooth(args.t, args.beta);
    std::cout << "corollary gamma = 1 - 1/T^(1-beta): "
              << format_double(choice.gamma) << "\n"
              << "in theory domain (1 - 1/e, 1): "
              << (choice.in_theory_domain ? "yes" : "no") << "\n";
    const double practical = 1.0 - 10.0 / std::sqrt(args.t);
    std::cout << "drift-robust gamma = 1 - 10/sqrt(T): "
              << format_double(practical) << "\n";
    if (practical > kTheoryGammaLow && practical < 1.0) {
      std::cout << "D(drift-robust gamma): "
                << format_double(d_gamma(practical)) << "\n";
    }
  }
  return kExitOk;
}

void print_counterexample(const CheckReport& report, const char* label) {
  const auto& v = report.violations.front();
  std::cout << "counterexample (" << label << "): t=" << v.t
            << " arm=" << v.arm << " lhs=" << format_double(v.lhs)
            << " rhs=" << format_double(v.rhs) << "\n";
}

int run_broken_window_fixture() {
  // A window one tenth of what the discount requires admits rounds right
  // after the breakpoint, where the discounted mean still reflects the
  // old phase; the checker must surface them.
  AbruptEnv env(2, 100, {1, 51}, {0.9, 0.1, 0.1, 0.9}, RewardFamily{});
  std::vector<int> pulls(100, 1);
  const auto broken =
      pseudo_stationary_window({1, 51}, 100, d_gamma(0.9) / 10.0);
  const auto report = check_mean_drift_abrupt(pulls, env, 0.9, broken);
  if (!report.ok()) {
    print_counterexample(report, "mean drift, broken window");
    std::cout << "violations: " << report.violations.size() << " of "
              << report.checked << " checked\n";
    return kExitCheckFailed;
  }
  std::cout << "broken-window fixture unexpectedly passed\n";
  return kExitOk;
}

int run_lemma_suite(std::uint64_t instances, std::uint64_t seed) {
  const double gammas[] = {0.7, 0.9, 0.97, 0.99, 0.995};
  std::uint64_t checked = 0;
  for (std::uint64_t rep = 0; rep < instances; ++rep) {
    const int K = 3;
    const std::uint64_t T = 300;
    const auto env = AbruptEnv::generate(
        K, T, 1 + rep % 5, PhiloxStream(seed, StreamId::of(rep, StreamId::kMeans)),
        1.0, RewardFamily{});
    SlotRng rng(seed, StreamId::of(rep, StreamId::policy_role(0)), 0);
    std::vector<int> pulls;
    pulls.reserve(T);
    for (std::uint64_t t = 0; t < T; ++t) {
      pulls.push_back(1 + static_cast<int>(rng.below(K)));
    }
    const double gamma = gammas[rep % 5];

    const auto drift = check_mean_drift_abrupt(pulls, env, gamma);
    if (!drift.ok()) {
      print_counterexample(drift, "mean drift, abrupt");
      return kExitCheckFailed;
    }
    const auto counting = check_counting_lemma(pulls, K, gamma,
                                               {0.5, 2.0, 10.0});
    if (!counting.ok()) {
      print_counterexample(counting, "counting");
      return kExitCheckFailed;
    }
    const SmoothEnv smooth(K, T, 0.02, 1.0, RewardFamily{});
    const auto smooth_drift =
        check_mean_drift_smooth(pulls, smooth, gamma, 0.02);
    if (!smooth_drift.ok()) {
      print_counterexample(smooth_drift, "mean drift, smooth");
      return kExitCheckFailed;
    }
    const auto pseudo =
        pseudo_stationary_set(env.breakpoints(), T, gamma);
    const double cap =
        static_cast<double>(env.phases()) * d_gamma(gamma) + 1e-9;
    if (static_cast<double>(pseudo.excluded) > cap) {
      std::cout << "counterexample (pseudo-stationary size): |S| = "
                << pseudo.excluded << " exceeds B_T * D(gamma) = "
                << format_double(cap) << "\n";
      return kExitCheckFailed;
    }
    checked += drift.checked + counting.checked + smooth_drift.checked + 1;
  }
  std::cout << "lemma suite: " << instances << " instances, " << checked
            << " inequalities checked, 0 violations\n";
  return kExitOk;
}

int run_env_check(const std::string& config_path,
                  const std::vector<std::string>& overrides) {
  const auto tree = load_tree(config_path, overrides);
  const ExperimentConfig config = config_from_json(tree);
  const PhiloxStream means(config.master_seed,
                           StreamId::of(0, StreamId::kMeans));
  const auto env = make_environment(config.env, means);

  if (config.env.kind == EnvSpec::Kind::kSmooth) {
    const auto lipschitz = check_lipschitz(*env, config.env.sigma);
    std::cout << "assumption 1 (per-round drift <= sigma): "
              << (lipschitz.ok() ? "pass" : "FAIL") << ", worst margin "
              << format_double(lipschitz.worst_margin) << " over "
              << lipschitz.checked << " steps\n";
    if (!lipschitz.ok()) {
      print_counterexample(lipschitz, "lipschitz");
      return kExitCheckFailed;
    }
    const double K = config.env.arms;
    const double f = 4.0 * K / (config.env.sigma * (K - 1.0));
    const auto near_tie =
        check_assumption2(*env, {0.05, 0.1, 0.2}, f, 1.0);
    std::cout << "assumption 2 (near-tie rounds, F = 4K/(sigma(K-1)) = "
              << format_double(f) << ", beta = 1):\n";
    for (const auto& entry : near_tie.entries) {
      std::cout << "  delta = " << format_double(entry.delta)
                << ": |H| = " << entry.h_size
                << ", bound = " << format_double(entry.bound) << ": "
                << (entry.ok ? "pass" : "FAIL") << "\n";
    }
    if (!near_tie.ok()) return kExitCheckFailed;
    return kExitOk;
  }

  const auto* abrupt = dynamic_cast<const AbruptEnv*>(env.get());
  std::cout << "phases: " << abrupt->phases() << "\n";
  const double T = static_cast<double>(config.env.horizon);
  const auto choice =
      gamma_for_abrupt(T, static_cast<double>(abrupt->phases()));
  std::cout << "tuned gamma = 1 - sqrt(B_T/T): " << format_double(choice.gamma)
            << (choice.in_theory_domain ? " (in theory domain)"
                                        : " (outside theory domain)")
            << "\n";
  if (choice.in_theory_domain) {
    const auto pseudo = pseudo_stationary_set(abrupt->breakpoints(),
                                              config.env.horizon, choice.gamma);
    const double cap = static_cast<double>(abrupt->phases()) *
                       d_gamma(choice.gamma);
    std::cout << "|S(gamma)| = " << pseudo.excluded
              << " <= B_T * D(gamma) = " << format_double(cap) << ": "
              << (static_cast<double>(pseudo.excluded) <= cap + 1e-9
                      ? "pass"
                      : "FAIL")
              << "\n";
    if (static_cast<double>(pseudo.excluded) > cap + 1e-9) {
      return kExitCheckFailed;
    }
  }
  return kExitOk;
}

struct DumpArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_path;
};

int cmd_dump_means(const DumpArgs& args) {
  const auto tree = load_tree(args.config_path, args.overrides);
  const ExperimentConfig config = config_from_json(tree);
  const PhiloxStream means(config.master_seed,
                           StreamId::of(0, StreamId::kMeans));
  const auto env = make_environment(config.env, means);
  const std::string csv = means_csv(*env);
  if (args.out_path.empty()) {
    std::cout << csv;
  } else {
    write_file(args.out_path, csv);
    std::cout << "wrote " << args.out_path << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"non-stationary bandit laboratory"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "run an experiment from a config file");
  run->add_option("--config", run_args.config_path, "JSON config path")
      ->required();
  run->add_option("--set", run_args.overrides,
                  "dotted-key override, e.g. env.horizon=20000");
  run->add_option("--out", run_args.out_dir, "output directory");
  auto* seed_opt =
      run->add_option("--seed", run_args.seed,
                      "master seed (overrides NSBANDIT_SEED and the config)");
  run->add_option("--jobs", run_args.jobs,
                  "worker threads (0 = all cores); never affects results");
  run->add_flag("--strict-theory", run_args.strict_theory,
                "refuse parameters outside the regret guarantees");

  BoundArgs bound_args;
  auto* bound = app.add_subcommand("bound", "evaluate a regret upper bound");
  bound->add_option("--setting", bound_args.setting, "abrupt or smooth")
      ->required()
      ->check(CLI::IsMember({"abrupt", "smooth"}));
  auto* bound_gamma = bound->add_option("--gamma", bound_args.gamma,
                                        "discount factor (default: tuned)");
  auto* bound_t =
      bound->add_option("--t", bound_args.t, "horizon (default 1e5 / 1e4)");
  auto* bound_bt =
      bound->add_option("--bt", bound_args.bt, "breakpoints (abrupt only)");
  auto* bound_deltat = bound->add_option("--deltat", bound_args.delta_t,
                                         "minimum gap (abrupt only)");
  auto* bound_delta = bound->add_option("--delta", bound_args.delta,
                                        "near-tie gap (smooth only)");
  auto* bound_sigma = bound->add_option("--sigma", bound_args.sigma,
                                        "drift bound (smooth only)");
  auto* bound_beta = bound->add_option("--beta", bound_args.beta,
                                       "near-tie exponent (smooth only)");
  auto* bound_f = bound->add_option("--f", bound_args.f,
                                    "near-tie constant (smooth only)");
  bound->add_option("--mumax", bound_args.mu_max, "maximum expected reward");
  bound->add_option("--taumax", bound_args.tau_max, "variance cap");
  bound->add_flag("--lemma-form", bound_args.lemma_form,
                  "use the appendix form of L(gamma) (abrupt only)");

  GammaArgs gamma_args;
  auto* gamma_cmd =
      app.add_subcommand("gamma", "print the horizon-tuned discount");
  gamma_cmd->add_option("--setting", gamma_args.setting, "abrupt or smooth")
      ->required()
      ->check(CLI::IsMember({"abrupt", "smooth"}));
  gamma_cmd->add_option("--t", gamma_args.t, "horizon")->required();
  gamma_cmd->add_option("--bt", gamma_args.bt, "breakpoints (abrupt)");
  gamma_cmd->add_option("--beta", gamma_args.beta,
                        "near-tie exponent (smooth)");

  bool check_lemmas = false;
  bool check_env = false;
  bool check_broken = false;
  std::uint64_t check_instances = 100;
  std::string check_config;
  std::vector<std::string> check_overrides;
  std::uint64_t check_seed = 1;
  auto* check = app.add_subcommand("check", "run the deterministic checkers");
  check->add_flag("--lemmas", check_lemmas,
                  "fuzz the window, drift, and counting inequalities");
  check->add_flag("--env", check_env,
                  "verify the configured environment's assumptions");
  check->add_option("--config", check_config, "config for --env");
  check->add_option("--set", check_overrides, "dotted-key override");
  check->add_option("--instances", check_instances,
                    "fuzz instances for --lemmas");
  auto* check_seed_opt =
      check->add_option("--seed", check_seed, "fuzz seed for --lemmas");
  check
      ->add_flag("--broken-window", check_broken,
                 "run the drift check against a deliberately short window")
      ->group("");

  DumpArgs dump_args;
  auto* dump = app.add_subcommand(
      "dump-means", "write the true per-round means of the configured "
                    "environment as CSV");
  dump->add_option("--config", dump_args.config_path, "JSON config path")
      ->required();
  dump->add_option("--set", dump_args.overrides, "dotted-key override");
  dump->add_option("--out", dump_args.out_path,
                   "output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfigError;
  }

  try {
    if (*run) {
      run_args.seed_given = seed_opt->count() > 0;
      return cmd_run(run_args);
    }
    if (*bound) {
      bound_args.gamma_given = bound_gamma->count() > 0;
      bound_args.t_given = bound_t->count() > 0;
      if (bound_args.setting == "abrupt") {
        for (const auto* opt : {bound_delta, bound_sigma, bound_beta, bound_f}) {
          if (opt->count() > 0) {
            std::cerr << "usage error: " << opt->get_name()
                      << " applies to the smooth setting only\n";
            return kExitConfigError;
          }
        }
      } else {
        for (const auto* opt : {bound_bt, bound_deltat}) {
          if (opt->count() > 0) {
            std::cerr << "usage error: " << opt->get_name()
                      << " applies to the abrupt setting only\n";
            return kExitConfigError;
          }
        }
      }
      return cmd_bound(bound_args);
    }
    if (*gamma_cmd) {
      return cmd_gamma(gamma_args);
    }
    if (*check) {
      if (check_env && (check_lemmas || check_broken)) {
        std::cerr << "usage error: pick one of --lemmas or --env\n";
        return kExitConfigError;
      }
      if (check_env) {
        if (check_config.empty()) {
          std::cerr << "usage error: --env requires --config\n";
          return kExitConfigError;
        }
        return run_env_check(check_config, check_overrides);
      }
      if (check_seed_opt->count() == 0) {
        if (const char* env_seed = std::getenv("NSBANDIT_SEED")) {
          check_seed = parse_seed_text(env_seed, "NSBANDIT_SEED");
        }
      }
      if (check_broken) return run_broken_window_fixture();
      return run_lemma_suite(check_instances, check_seed);
    }
    if (*dump) {
      return cmd_dump_means(dump_args);
    }
  } catch (const InfeasibleError& e) {
    std::cerr << e.what() << "\n";
    return kExitInfeasible;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::domain_error& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  }
  return kExitConfigError;
}
