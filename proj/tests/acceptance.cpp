// Acceptance gate: one PASS/FAIL line per criterion with the measured
// values, nonzero exit when any criterion fails. Each criterion is
// self-contained and uses fixed seeds, so reruns print identical numbers.
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "nsbandit/environments.hpp"
#include "nsbandit/harness.hpp"
#include "nsbandit/io.hpp"
#include "nsbandit/policies.hpp"
#include "nsbandit/rng.hpp"
#include "nsbandit/theory.hpp"

namespace {

using namespace nsbandit;
namespace fs = std::filesystem;

int g_failures = 0;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

void report(int id, bool ok, const std::string& detail) {
  std::printf("%s criterion %2d: %s\n", ok ? "PASS" : "FAIL", id,
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

double final_of(const ExperimentResult& result, const std::string& name) {
  for (std::size_t p = 0; p < result.resolved.size(); ++p) {
    if (result.resolved[p].name == name) return result.final_mean[p];
  }
  throw std::logic_error("policy not in result: " + name);
}

// 1. With no discounting the posterior must degenerate to plain counts and
// sample means.
void criterion1() {
  const auto start = std::chrono::steady_clock::now();
  const int K = 5;
  DsTs policy(K, 1.0, 0.2);
  SlotRng rng(42, StreamId::of(0, StreamId::policy_role(0)), 0);
  std::vector<std::uint64_t> pulls(K, 0);
  std::vector<double> sums(K, 0.0);
  double worst = 0.0;
  for (std::uint64_t t = 1; t <= 1000; ++t) {
    const int arm = 1 + static_cast<int>(rng.below(K));
    const double x = rng.bernoulli(0.15 * arm) ? 1.0 : 0.0;
    policy.update(t, arm, x, rng);
    pulls[arm - 1] += 1;
    sums[arm - 1] += x;
    for (int i = 1; i <= K; ++i) {
      const auto& post = policy.posterior();
      worst = std::max(worst, std::fabs(post.count(i) -
                                        static_cast<double>(pulls[i - 1])));
      if (pulls[i - 1] > 0) {
        worst = std::max(worst, std::fabs(post.mean(i) -
                                          sums[i - 1] /
                                              static_cast<double>(
                                                  pulls[i - 1])));
      }
    }
  }
  const double elapsed = seconds_since(start);
  report(1, worst <= 1e-12 && elapsed < 1.0,
         "gamma=1 degeneration over 1000 steps: max |state - counts/means| = " +
             fmt(worst) + " (tol 1e-12), time " + fmt(elapsed) + " s (< 1 s)");
}

// 2. The O(1) posterior recursion must agree with from-scratch geometric
// sums, and the discounted counts must telescope across arms.
void criterion2() {
  const auto start = std::chrono::steady_clock::now();
  const int K = 5;
  const std::uint64_t T = 10000;
  double worst_mean = 0.0;
  double worst_total = 0.0;
  for (const double gamma : {0.9, 0.99, 0.999}) {
    DsTs policy(K, gamma, 0.2);
    SlotRng rng(43, StreamId::of(1, StreamId::policy_role(0)), 0);
    std::vector<int> arm_hist;
    std::vector<double> x_hist;
    arm_hist.reserve(T);
    x_hist.reserve(T);
    for (std::uint64_t t = 1; t <= T; ++t) {
      const int arm = 1 + static_cast<int>(rng.below(K));
      const double x = rng.bernoulli(0.1 + 0.15 * arm) ? 1.0 : 0.0;
      policy.update(t, arm, x, rng);
      arm_hist.push_back(arm);
      x_hist.push_back(x);

      double n_direct[5] = {0, 0, 0, 0, 0};
      double s_direct[5] = {0, 0, 0, 0, 0};
      double w = 1.0;
      for (std::uint64_t j = t; j >= 1; --j) {
        n_direct[arm_hist[j - 1] - 1] += w;
        s_direct[arm_hist[j - 1] - 1] += w * x_hist[j - 1];
        w *= gamma;
      }
      const auto& post = policy.posterior();
      for (int i = 1; i <= K; ++i) {
        if (n_direct[i - 1] > 0.0) {
          worst_mean = std::max(
              worst_mean,
              std::fabs(post.mean(i) - s_direct[i - 1] / n_direct[i - 1]));
        }
      }
      const double closed =
          (1.0 - std::pow(gamma, static_cast<double>(t))) / (1.0 - gamma);
      worst_total = std::max(worst_total,
                             std::fabs(post.total_count() - closed));
    }
  }
  const double elapsed = seconds_since(start);
  report(2, worst_mean <= 1e-9 && worst_total <= 1e-9 && elapsed < 5.0,
         "incremental vs direct over 10^4 steps, gamma in {0.9,0.99,0.999}: "
         "max mean error = " +
             fmt(worst_mean) + ", max total-count error = " + fmt(worst_total) +
             " (tol 1e-9), time " + fmt(elapsed) + " s (< 5 s)");
}

// 3. The deterministic inequality suite must hold on 100 fuzzed instances.
void criterion3() {
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t seed = 7;
  const double gammas[] = {0.7, 0.9, 0.97, 0.99, 0.995};
  std::uint64_t checked = 0;
  std::uint64_t violations = 0;
  for (std::uint64_t rep = 0; rep < 100; ++rep) {
    const int K = 3;
    const std::uint64_t T = 300;
    const auto env = AbruptEnv::generate(
        K, T, 1 + rep % 5,
        PhiloxStream(seed, StreamId::of(rep, StreamId::kMeans)), 1.0,
        RewardFamily{});
    SlotRng rng(seed, StreamId::of(rep, StreamId::policy_role(0)), 0);
    std::vector<int> pulls;
    pulls.reserve(T);
    for (std::uint64_t t = 0; t < T; ++t) {
      pulls.push_back(1 + static_cast<int>(rng.below(K)));
    }
    const double gamma = gammas[rep % 5];

    const auto drift = check_mean_drift_abrupt(pulls, env, gamma);
    const auto counting =
        check_counting_lemma(pulls, K, gamma, {0.5, 2.0, 10.0});
    const SmoothEnv smooth_env(K, T, 0.02, 1.0, RewardFamily{});
    const auto smooth = check_mean_drift_smooth(pulls, smooth_env, gamma, 0.02);
    checked += drift.checked + counting.checked + smooth.checked + 1;
    violations += drift.violations.size() + counting.violations.size() +
                  smooth.violations.size();

    const auto pseudo = pseudo_stationary_set(env.breakpoints(), T, gamma);
    const double cap =
        static_cast<double>(env.phases()) * d_gamma(gamma) + 1e-9;
    if (static_cast<double>(pseudo.excluded) > cap) ++violations;
  }
  const double elapsed = seconds_since(start);
  report(3, violations == 0 && elapsed < 30.0,
         "lemma suite on 100 fuzzed instances: " + std::to_string(checked) +
             " inequalities, " + std::to_string(violations) +
             " violations, time " + fmt(elapsed) + " s (< 30 s)");
}

// 4. The drifting environment satisfies both assumptions by enumeration.
void criterion4() {
  const auto start = std::chrono::steady_clock::now();
  const int K = 5;
  const double sigma = 0.001;
  const SmoothEnv env(K, 10000, sigma, 1.0, RewardFamily{});
  const auto lipschitz = check_lipschitz(env, sigma);
  const double f = 4.0 * K / (sigma * (K - 1));
  const auto near_tie = check_assumption2(env, {0.05, 0.1, 0.2}, f, 1.0);
  std::string sizes;
  for (const auto& e : near_tie.entries) {
    sizes += " |H(" + fmt(e.delta) + ")|=" + std::to_string(e.h_size) +
             "<=" + fmt(e.bound);
  }
  const double elapsed = seconds_since(start);
  report(4, lipschitz.ok() && near_tie.ok() && elapsed < 10.0,
         "drift env K=5 T=10^4 sigma=0.001: lipschitz " +
             std::string(lipschitz.ok() ? "ok" : "VIOLATED") +
             " (worst margin " + fmt(lipschitz.worst_margin) + ")," + sizes +
             ", time " + fmt(elapsed) + " s (< 10 s)");
}

// 5. Desk-scale abrupt ordering: discounting beats the stationary sampler
// and tracks the sliding window closely.
void criterion5() {
  const auto start = std::chrono::steady_clock::now();
  ExperimentConfig config;
  config.env.kind = EnvSpec::Kind::kAbrupt;
  config.env.arms = 5;
  config.env.horizon = 20000;
  config.env.changes = 5;
  config.env.mu_max = 1.0;
  config.policies = {{"ds-ts", {}}, {"sw-ts", {}}, {"ts", {}}};
  config.runs = 50;
  config.master_seed = 11;
  config.emit_every = 20000;
  const auto result = run_experiment(config);
  const double ds = final_of(result, "ds-ts");
  const double sw = final_of(result, "sw-ts");
  const double ts = final_of(result, "ts");
  const bool beats_ts = ds < ts;
  const bool tracks_sw = std::fabs(ds - sw) <= 0.25 * sw;
  const double elapsed = seconds_since(start);
  report(5, beats_ts && tracks_sw && elapsed < 120.0,
         "abrupt T=20000 B=5, 50 runs: ds-ts=" + fmt(ds) + " < ts=" + fmt(ts) +
             " is " + (beats_ts ? "true" : "FALSE") + "; |ds-ts - sw-ts|=" +
             fmt(std::fabs(ds - sw)) + " <= 25% of sw-ts=" + fmt(0.25 * sw) +
             " is " + (tracks_sw ? "true" : "FALSE") + "; time " +
             fmt(elapsed) + " s (< 2 min)");
}

// 6. Desk-scale drift sanity: the discounted sampler collects no more than
// half the regret of uniform play.
void criterion6() {
  const auto start = std::chrono::steady_clock::now();
  ExperimentConfig config;
  config.env.kind = EnvSpec::Kind::kSmooth;
  config.env.arms = 5;
  config.env.horizon = 10000;
  config.env.sigma = 0.001;
  config.env.scale = 1.0;
  config.policies = {{"ds-ts", {}}, {"random", {}}};
  config.runs = 50;
  config.master_seed = 12;
  config.emit_every = 10000;
  const auto result = run_experiment(config);
  const double tuned_gamma = result.resolved[0].params.at("gamma");
  const double ds = final_of(result, "ds-ts");
  const double random = final_of(result, "random");
  const double elapsed = seconds_since(start);
  report(6, ds <= 0.5 * random && elapsed < 120.0,
         "drift T=10^4 sigma=0.001 gamma=" + fmt(tuned_gamma) +
             ", 50 runs: ds-ts=" + fmt(ds) + " <= 50% of random=" +
             fmt(0.5 * random) + "; time " + fmt(elapsed) + " s (< 2 min)");
}

// 7. Gap sweep: uniform play pays half the gap per round, and the
// discounted sampler never does worse.
void criterion7() {
  const auto start = std::chrono::steady_clock::now();
  ExperimentConfig config;
  config.env.kind = EnvSpec::Kind::kGap;
  config.env.arms = 2;
  config.env.horizon = 20000;
  config.env.changes = 5;
  config.env.base = 0.5;
  config.policies = {{"random", {}}, {"ds-ts", {}}};
  config.runs = 30;
  config.master_seed = 13;
  config.emit_every = 20000;
  const std::vector<double> grid = {0.05, 0.1, 0.2, 0.3};
  const auto rows = delta_sweep(config, grid);
  bool ok = true;
  std::string detail = "gap sweep T=20000, 30 runs:";
  for (const double delta : grid) {
    double random_mean = 0.0, random_se = 0.0, ds_mean = 0.0;
    for (const auto& row : rows) {
      if (row.delta != delta) continue;
      if (row.policy == "random") {
        random_mean = row.final_mean;
        random_se = (row.final_ci_high - row.final_mean) / 1.96;
      } else if (row.policy == "ds-ts") {
        ds_mean = row.final_mean;
      }
    }
    const double expected = delta * 20000 / 2.0;
    const bool closed_form =
        std::fabs(random_mean - expected) <= 3.0 * random_se;
    const bool no_worse = ds_mean <= random_mean;
    ok = ok && closed_form && no_worse;
    detail += " [delta=" + fmt(delta) + ": random=" + fmt(random_mean) +
              " vs " + fmt(expected) + " (3se=" + fmt(3.0 * random_se) +
              (closed_form ? ", ok" : ", OFF") + "; ds-ts=" + fmt(ds_mean) +
              (no_worse ? " <= random]" : " > random]");
  }
  const double elapsed = seconds_since(start);
  report(7, ok, detail + "; time " + fmt(elapsed) + " s");
}

// 8. Bound evaluators: finite and positive across a feasible grid, and the
// drift-setting feasibility cut lands between the two tuned discounts.
void criterion8() {
  const auto start = std::chrono::steady_clock::now();
  const double x_hi = (1.0 - kTheoryGammaLow) - 1e-6;
  const double x_lo = 1e-7;
  int finite_positive = 0;
  const int points = 200;
  for (int i = 0; i < points; ++i) {
    const double x = std::exp(std::log(x_hi) +
                              (std::log(x_lo) - std::log(x_hi)) * i /
                                  (points - 1));
    TheoryParams abrupt;
    abrupt.gamma = 1.0 - x;
    abrupt.T = 1e9;
    abrupt.b_t = 1000.0;
    abrupt.delta_t = 0.01;
    abrupt.tau_max = 1.0 / (12.0 * std::sqrt(2.0));
    const auto one = theorem1_bound(abrupt);

    TheoryParams smooth = abrupt;
    smooth.sigma = 1e-11;
    smooth.delta = 0.3;
    smooth.beta = 1.0;
    smooth.f_a2 = 5000.0;
    const auto two = theorem2_bound(smooth);

    if (std::isfinite(one.per_arm) && one.per_arm > 0.0 &&
        std::isfinite(two.per_arm) && two.per_arm > 0.0) {
      ++finite_positive;
    }
  }

  TheoryParams q;
  q.T = 1e4;
  q.sigma = 1e-3;
  q.delta = 0.3;
  q.tau_max = 0.2;
  bool flags_infeasible = false;
  q.gamma = 1.0 - 1.0 / std::sqrt(q.T);
  try {
    theorem2_bound(q);
  } catch (const InfeasibleError&) {
    flags_infeasible = true;
  }
  bool accepts_feasible = false;
  q.gamma = 1.0 - 10.0 / std::sqrt(q.T);
  try {
    accepts_feasible = std::isfinite(theorem2_bound(q).per_arm);
  } catch (const InfeasibleError&) {
    accepts_feasible = false;
  }
  const double elapsed = seconds_since(start);
  report(8,
         finite_positive == points && flags_infeasible && accepts_feasible &&
             elapsed < 1.0,
         "bounds finite and positive on " + std::to_string(finite_positive) +
             "/" + std::to_string(points) +
             " grid points; at T=10^4 sigma=10^-3: gamma=1-1/sqrt(T) " +
             (flags_infeasible ? "flagged infeasible" : "NOT flagged") +
             ", gamma=1-10/sqrt(T) " +
             (accepts_feasible ? "accepted" : "NOT accepted") + "; time " +
             fmt(elapsed) + " s (< 1 s)");
}

// 9. Byte-identical outputs across reruns and across worker counts.
void criterion9() {
  const auto start = std::chrono::steady_clock::now();
  const fs::path dir = fs::temp_directory_path() / "nsbandit_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path cfg_path = dir / "config.json";
  {
    std::ofstream cfg(cfg_path);
    cfg << R"({"env": {"kind": "gap", "arms": 2, "horizon": 2000,
                       "changes": 5, "gap": 0.2, "base": 0.5},
               "policies": [{"name": "ds-ts"}, {"name": "random"}],
               "runs": 10, "seed": 3, "emit_every": 100})";
  }
  const std::string cli = NSBANDIT_CLI_PATH;
  const auto invoke = [&](const std::string& out, const std::string& extra) {
    const std::string cmd = "\"" + cli + "\" run --config " +
                            cfg_path.string() + " --out " +
                            (dir / out).string() + extra + " > /dev/null 2>&1";
    return std::system(cmd.c_str()) == 0;
  };
  const bool ran = invoke("a", "") && invoke("b", "") &&
                   invoke("c", " --jobs 3");
  const auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  bool identical = ran;
  std::size_t bytes = 0;
  for (const char* file : {"curves.csv", "summary.json", "metadata.json"}) {
    const std::string a = slurp(dir / "a" / file);
    identical = identical && !a.empty() && a == slurp(dir / "b" / file) &&
                a == slurp(dir / "c" / file);
    bytes += a.size();
  }
  const double elapsed = seconds_since(start);
  report(9, identical,
         std::string("rerun and --jobs 3 outputs ") +
             (identical ? "byte-identical" : "DIFFER") + " across " +
             std::to_string(bytes) + " bytes of csv/json; time " +
             fmt(elapsed) + " s");
}

// 10. Full-scale reproduction: the discounted and sliding-window samplers
// finish as the best pair, the stationary sampler and the adversarial
// baseline as the worst pair.
void criterion10() {
  const auto start = std::chrono::steady_clock::now();
  ExperimentConfig config;
  config.env.kind = EnvSpec::Kind::kAbrupt;
  config.env.arms = 5;
  config.env.horizon = 100000;
  config.env.changes = 10;
  config.env.mu_max = 1.0;
  config.policies = {{"ds-ts", {}},  {"sw-ts", {}}, {"ds-ucb", {}},
                     {"m-ucb", {}},  {"ts", {}},    {"exp3s", {}},
                     {"random", {}}};
  config.runs = 100;
  config.master_seed = 21;
  config.emit_every = 10000;
  config.jobs = 0;  // all cores
  const auto result = run_experiment(config);

  const double ds = final_of(result, "ds-ts");
  const double sw = final_of(result, "sw-ts");
  const double ducb = final_of(result, "ds-ucb");
  const double mucb = final_of(result, "m-ucb");
  const double ts = final_of(result, "ts");
  const double exp3 = final_of(result, "exp3s");
  const double random = final_of(result, "random");

  const double best_pair = std::max(ds, sw);
  const double middle_low = std::min(std::min(ducb, mucb), std::min(ts, exp3));
  const double worst_pair = std::min(ts, exp3);
  const double middle_high = std::max(std::max(ds, sw), std::max(ducb, mucb));
  const bool best_group = best_pair <= middle_low;
  const bool worst_group = worst_pair >= middle_high;
  const double elapsed = seconds_since(start);
  report(10, best_group && worst_group && elapsed < 600.0,
         "T=10^5 K=5 B=10, 100 runs: ds-ts=" + fmt(ds) + " sw-ts=" + fmt(sw) +
             " ds-ucb=" + fmt(ducb) + " m-ucb=" + fmt(mucb) + " ts=" +
             fmt(ts) + " exp3s=" + fmt(exp3) + " random=" + fmt(random) +
             "; best pair {ds-ts,sw-ts} " +
             (best_group ? "holds" : "BROKEN") +
             ", worst pair {ts,exp3s} " + (worst_group ? "holds" : "BROKEN") +
             "; time " + fmt(elapsed) + " s (< 10 min)");
}

void run(int id, const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    report(id, false, std::string("exception: ") + e.what());
  }
}

}  // namespace

int main() {
  run(1, criterion1);
  run(2, criterion2);
  run(3, criterion3);
  run(4, criterion4);
  run(5, criterion5);
  run(6, criterion6);
  run(7, criterion7);
  run(8, criterion8);
  run(9, criterion9);
  run(10, criterion10);
  if (g_failures > 0) {
    std::printf("acceptance: %d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("acceptance: all 10 criteria passed\n");
  return 0;
}
