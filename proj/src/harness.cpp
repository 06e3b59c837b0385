#include "nsbandit/harness.hpp"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <thread>
#include <utility>

#include "nsbandit/policies.hpp"

namespace nsbandit {

namespace {

constexpr double kZ95 = 1.96;

double b_t_of(const EnvSpec& env) {
  return env.kind == EnvSpec::Kind::kSmooth
             ? 1.0
             : static_cast<double>(env.changes);
}

// Largest expected reward the environment can present, used to place the
// ds-ts variance cap at one fifth of it.
double mu_max_of(const EnvSpec& env) {
  switch (env.kind) {
    case EnvSpec::Kind::kAbrupt:
      return env.mu_max;
    case EnvSpec::Kind::kSmooth:
      return env.scale * static_cast<double>(env.arms - 1) /
             static_cast<double>(env.arms);
    case EnvSpec::Kind::kGap:
      return env.base + env.gap / 2.0;
  }
  throw std::logic_error("unreachable");
}

void require_known(const PolicySpec& spec,
                   std::initializer_list<const char*> keys) {
  for (const auto& [key, value] : spec.params) {
    (void)value;
    bool known = false;
    for (const char* k : keys) {
      if (key == k) known = true;
    }
    if (!known) {
      throw std::invalid_argument(spec.name + ": unknown parameter '" + key +
                                  "'");
    }
  }
}

// Keeps an explicitly pinned value, fills the tuned one otherwise.
void fill(PolicySpec& spec, const std::string& key, double value) {
  spec.params.emplace(key, value);
}

double need(const PolicySpec& spec, const char* key) {
  const auto it = spec.params.find(key);
  if (it == spec.params.end()) {
    throw std::invalid_argument(spec.name + ": missing parameter '" +
                                std::string(key) + "'");
  }
  return it->second;
}

std::uint64_t need_count(const PolicySpec& spec, const char* key) {
  const double v = need(spec, key);
  if (!(v >= 1.0) || v != std::floor(v)) {
    throw std::invalid_argument(spec.name + ": parameter '" +
                                std::string(key) +
                                "' must be a positive integer");
  }
  return static_cast<std::uint64_t>(v);
}

void validate(const ExperimentConfig& config) {
  if (config.runs < 1) {
    throw std::invalid_argument("runs must be at least 1");
  }
  if (config.emit_every < 1) {
    throw std::invalid_argument("emit_every must be at least 1");
  }
  if (config.policies.empty()) {
    throw std::invalid_argument("policies must not be empty");
  }
}

// One full replication: every policy plays the same environment instance
// and reward realizations; decisions come from per-policy streams keyed by
// list position. Returns cumulative regret per policy.
std::vector<std::vector<double>> play_run(
    const ExperimentConfig& config, const std::vector<PolicySpec>& resolved,
    std::uint64_t run) {
  const std::uint64_t env_run = config.fixed_instance ? 0 : run;
  const PhiloxStream means(config.master_seed,
                           StreamId::of(env_run, StreamId::kMeans));
  const auto env = make_environment(config.env, means);
  const PhiloxStream rewards(config.master_seed,
                             StreamId::of(run, StreamId::kRewards));

  std::vector<std::vector<double>> cum;
  cum.reserve(resolved.size());
  for (std::size_t p = 0; p < resolved.size(); ++p) {
    const auto policy = make_policy(resolved[p], *env);
    const PhiloxStream decisions(
        config.master_seed, StreamId::of(run, StreamId::policy_role(p)));
    RunTrace trace = run_episode(*policy, *env, rewards, decisions);
    cum.push_back(std::move(trace.cum_regret));
  }
  return cum;
}

// Output labels: repeats of a name get "#2", "#3", ... so rows stay
// distinguishable when one policy appears at several parameter settings.
std::vector<std::string> output_labels(const std::vector<PolicySpec>& specs) {
  std::map<std::string, int> seen;
  std::vector<std::string> labels;
  labels.reserve(specs.size());
  for (const auto& spec : specs) {
    const int k = ++seen[spec.name];
    labels.push_back(k == 1 ? spec.name
                            : spec.name + "#" + std::to_string(k));
  }
  return labels;
}

}  // namespace

PolicySpec auto_tune(const PolicySpec& spec, const EnvSpec& env) {
  const double T = static_cast<double>(env.horizon);
  const double K = static_cast<double>(env.arms);
  const double bt = b_t_of(env);
  PolicySpec out = spec;

  if (spec.name == "ds-ts") {
    require_known(spec, {"gamma", "tau_max"});
    const double gamma = env.kind == EnvSpec::Kind::kSmooth
                             ? 1.0 - 10.0 / std::sqrt(T)
                             : 1.0 - std::sqrt(bt / T);
    fill(out, "gamma", gamma);
    fill(out, "tau_max", mu_max_of(env) / 5.0);
  } else if (spec.name == "ts") {
    require_known(spec, {});
  } else if (spec.name == "sw-ts") {
    require_known(spec, {"window"});
    fill(out, "window", std::round(2.0 * std::sqrt(T * std::log(T) / bt)));
  } else if (spec.name == "ds-ucb") {
    require_known(spec, {"gamma", "b", "xi"});
    fill(out, "gamma", 1.0 - std::sqrt(bt / T) / 4.0);
    fill(out, "b", 1.0);
    fill(out, "xi", 2.0 / 3.0);
  } else if (spec.name == "exp3s") {
    require_known(spec, {"alpha", "gamma_mix"});
    fill(out, "alpha", 1.0 / T);
    const double e = std::numbers::e;
    fill(out, "gamma_mix",
         std::min(1.0, std::sqrt(K * (e + bt * std::log(K * T) /
                                              ((e - 1.0) * T)))));
  } else if (spec.name == "m-ucb") {
    require_known(spec, {"window", "threshold", "explore_frac"});
    fill(out, "window", 800.0);
    const double w = need(out, "window");
    fill(out, "threshold", std::sqrt((w / 2.0) * std::log(2.0 * K * T * T)));
    fill(out, "explore_frac", std::sqrt(K * bt * std::log(T) / T));
  } else if (spec.name == "random" || spec.name == "oracle") {
    require_known(spec, {});
  } else {
    throw std::invalid_argument("unknown policy name '" + spec.name + "'");
  }
  return out;
}

std::unique_ptr<Policy> make_policy(const PolicySpec& spec,
                                    const Environment& env) {
  const int K = env.arms();
  if (spec.name == "ds-ts") {
    return std::make_unique<DsTs>(K, need(spec, "gamma"),
                                  need(spec, "tau_max"));
  }
  if (spec.name == "ts") {
    return std::make_unique<GaussianTs>(K);
  }
  if (spec.name == "sw-ts") {
    return std::make_unique<SwTs>(K, need_count(spec, "window"));
  }
  if (spec.name == "ds-ucb") {
    return std::make_unique<DsUcb>(K, need(spec, "gamma"), need(spec, "b"),
                                   need(spec, "xi"));
  }
  if (spec.name == "exp3s") {
    return std::make_unique<Exp3s>(K, need(spec, "alpha"),
                                   need(spec, "gamma_mix"));
  }
  if (spec.name == "m-ucb") {
    return std::make_unique<MUcb>(K, need_count(spec, "window"),
                                  need(spec, "threshold"),
                                  need(spec, "explore_frac"));
  }
  if (spec.name == "random") {
    return std::make_unique<UniformRandom>(K);
  }
  if (spec.name == "oracle") {
    return std::make_unique<BestArmOracle>(env);
  }
  throw std::invalid_argument("unknown policy name '" + spec.name + "'");
}

std::unique_ptr<Environment> make_environment(const EnvSpec& spec,
                                              const PhiloxStream& means) {
  switch (spec.kind) {
    case EnvSpec::Kind::kAbrupt:
      return std::make_unique<AbruptEnv>(
          AbruptEnv::generate(spec.arms, spec.horizon, spec.changes, means,
                              spec.mu_max, spec.family));
    case EnvSpec::Kind::kSmooth:
      return std::make_unique<SmoothEnv>(spec.arms, spec.horizon, spec.sigma,
                                         spec.scale, spec.family);
    case EnvSpec::Kind::kGap:
      return std::make_unique<AbruptEnv>(
          AbruptEnv::gap_instance(spec.arms, spec.horizon, spec.changes,
                                  spec.gap, spec.base, means, spec.family));
  }
  throw std::logic_error("unreachable");
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  validate(config);
  std::vector<PolicySpec> resolved;
  resolved.reserve(config.policies.size());
  for (const auto& spec : config.policies) {
    resolved.push_back(auto_tune(spec, config.env));
  }

  const std::uint64_t T = config.env.horizon;
  const std::uint64_t R = config.runs;
  const std::size_t P = resolved.size();
  std::vector<std::vector<double>> sum(P, std::vector<double>(T, 0.0));
  std::vector<std::vector<double>> sumsq(P, std::vector<double>(T, 0.0));

  const auto commit = [&](const std::vector<std::vector<double>>& cum) {
    for (std::size_t p = 0; p < P; ++p) {
      for (std::uint64_t t = 0; t < T; ++t) {
        const double x = cum[p][t];
        sum[p][t] += x;
        sumsq[p][t] += x * x;
      }
    }
  };

  std::uint64_t jobs =
      config.jobs > 0
          ? static_cast<std::uint64_t>(config.jobs)
          : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, R);

  if (jobs <= 1) {
    for (std::uint64_t r = 0; r < R; ++r) {
      commit(play_run(config, resolved, r));
    }
  } else {
    // Workers claim run indices; the calling thread folds results strictly
    // in run order, so sums never depend on completion order. The claim
    // throttle bounds how many finished runs can pile up.
    std::mutex mu;
    std::condition_variable cv;
    std::map<std::uint64_t, std::vector<std::vector<double>>> ready;
    std::uint64_t next_claim = 0;
    std::uint64_t committed = 0;

    const auto worker = [&] {
      for (;;) {
        std::uint64_t r;
        {
          std::unique_lock lock(mu);
          cv.wait(lock, [&] {
            return next_claim >= R || next_claim < committed + 2 * jobs;
          });
          if (next_claim >= R) return;
          r = next_claim++;
        }
        auto cum = play_run(config, resolved, r);
        {
          std::lock_guard lock(mu);
          ready.emplace(r, std::move(cum));
        }
        cv.notify_all();
      }
    };

    std::vector<std::thread> pool;
    for (std::uint64_t j = 0; j < jobs; ++j) pool.emplace_back(worker);

    std::unique_lock lock(mu);
    while (committed < R) {
      cv.wait(lock, [&] { return ready.count(committed) > 0; });
      auto cum = std::move(ready.at(committed));
      ready.erase(committed);
      lock.unlock();
      commit(cum);
      lock.lock();
      ++committed;
      cv.notify_all();
    }
    lock.unlock();
    for (auto& th : pool) th.join();
  }

  std::vector<std::uint64_t> rounds;
  for (std::uint64_t t = config.emit_every; t <= T; t += config.emit_every) {
    rounds.push_back(t);
  }
  if (rounds.empty() || rounds.back() != T) rounds.push_back(T);

  const double n = static_cast<double>(R);
  const auto stats = [&](std::size_t p, std::uint64_t t, double& mean,
                         double& lo, double& hi) {
    const double s = sum[p][t - 1];
    mean = s / n;
    if (R > 1) {
      const double var =
          std::max(0.0, (sumsq[p][t - 1] - s * s / n) / (n - 1.0));
      const double se = std::sqrt(var / n);
      lo = mean - kZ95 * se;
      hi = mean + kZ95 * se;
    } else {
      lo = mean;
      hi = mean;
    }
  };

  ExperimentResult result;
  result.resolved = resolved;
  const auto labels = output_labels(resolved);
  for (std::size_t p = 0; p < P; ++p) {
    AggregateCurve curve;
    curve.policy = labels[p];
    curve.rounds = rounds;
    for (const std::uint64_t t : rounds) {
      double mean, lo, hi;
      stats(p, t, mean, lo, hi);
      curve.mean.push_back(mean);
      curve.ci_low.push_back(lo);
      curve.ci_high.push_back(hi);
    }
    result.curves.push_back(std::move(curve));

    double mean, lo, hi;
    stats(p, T, mean, lo, hi);
    result.final_mean.push_back(mean);
    result.final_ci_low.push_back(lo);
    result.final_ci_high.push_back(hi);
  }
  return result;
}

std::vector<DeltaSweepRow> delta_sweep(const ExperimentConfig& config,
                                       const std::vector<double>& grid) {
  if (config.env.kind != EnvSpec::Kind::kGap) {
    throw std::invalid_argument("delta_sweep requires a gap environment");
  }
  std::vector<DeltaSweepRow> rows;
  for (const double delta : grid) {
    ExperimentConfig sub = config;
    sub.env.gap = delta;
    const auto result = run_experiment(sub);
    for (std::size_t p = 0; p < result.resolved.size(); ++p) {
      rows.push_back({delta, result.curves[p].policy, result.final_mean[p],
                      result.final_ci_low[p], result.final_ci_high[p]});
    }
  }
  return rows;
}

}  // namespace nsbandit
