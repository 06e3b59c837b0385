#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "nsbandit/core.hpp"
#include "nsbandit/environments.hpp"
#include "nsbandit/rng.hpp"

namespace nsbandit {

// Environment description; concrete instances are drawn per run from the
// run's means stream (smooth environments are deterministic and ignore it).
struct EnvSpec {
  enum class Kind { kAbrupt, kSmooth, kGap };

  Kind kind = Kind::kAbrupt;
  int arms = 5;
  std::uint64_t horizon = 100000;
  std::uint64_t changes = 10;  // abrupt/gap: number of phases B_T
  double mu_max = 1.0;         // abrupt: cap on drawn phase means
  double sigma = 0.001;        // smooth: per-round drift bound
  double scale = 1.0;          // smooth: mean scale
  double gap = 0.1;            // gap: exact minimum sub-optimality gap
  double base = 0.5;           // gap: midpoint between the two mean levels
  RewardFamily family;
};

// A policy request: name plus explicitly pinned parameters. Parameters a
// caller leaves out are filled by auto_tune from the environment
// description; explicit values always win.
struct PolicySpec {
  std::string name;
  std::map<std::string, double> params;
};

struct ExperimentConfig {
  EnvSpec env;
  std::vector<PolicySpec> policies;
  std::uint64_t runs = 100;
  std::uint64_t master_seed = 1;
  bool fixed_instance = false;  // all runs replay run 0's environment draw
  std::uint64_t emit_every = 1;
  int jobs = 1;  // worker threads; <= 0 means hardware concurrency
};

// Mean cumulative regret across runs with a 95% confidence band
// (normal approximation, sample sd with n-1 denominator). With one run
// the band collapses onto the mean. Rounds are thinned by emit_every but
// always include the final round.
struct AggregateCurve {
  std::string policy;
  std::vector<std::uint64_t> rounds;
  std::vector<double> mean;
  std::vector<double> ci_low;
  std::vector<double> ci_high;
};

struct ExperimentResult {
  std::vector<AggregateCurve> curves;  // one per policy, config order
  std::vector<PolicySpec> resolved;    // fully resolved parameters
  std::vector<double> final_mean;      // regret at the horizon, per policy
  std::vector<double> final_ci_low;
  std::vector<double> final_ci_high;
};

// Fills every parameter auto_tune knows how to derive, keeping explicit
// values. Unknown policy names and unknown parameter keys throw
// std::invalid_argument naming the offender. Tuning rules (natural log):
//   ds-ts   gamma = 1 - sqrt(B_T/T)   (smooth: 1 - 10/sqrt(T))
//           tau_max = mu_max / 5 with mu_max read off the environment
//   sw-ts   window = round(2 sqrt(T ln T / B_T))
//   ds-ucb  gamma = 1 - sqrt(B_T/T)/4, b = 1, xi = 2/3
//   exp3s   alpha = 1/T,
//           gamma_mix = min(1, sqrt(K (e + B_T ln(KT) / ((e-1) T))))
//   m-ucb   window = 800, threshold = sqrt((w/2) ln(2 K T^2)),
//           explore_frac = sqrt(K B_T ln T / T)
// Smooth environments use B_T = 1 in every rule above except the ds-ts
// discount, which has its own drift form.
PolicySpec auto_tune(const PolicySpec& spec, const EnvSpec& env);

// Instantiates a policy from a fully resolved spec. The environment must
// outlive the policy (the oracle plays against it directly).
std::unique_ptr<Policy> make_policy(const PolicySpec& spec,
                                    const Environment& env);

// Draws one environment instance from the given means stream.
std::unique_ptr<Environment> make_environment(const EnvSpec& spec,
                                              const PhiloxStream& means);

// Runs `runs` seeded replications. Within one run every policy faces the
// same environment instance and the same reward realizations per
// (round, arm); each policy draws its own decisions from a private
// stream keyed by its position in the list, so appending a policy never
// changes the curves of the existing ones. Aggregation commits runs in
// index order, making the output identical for any worker count.
ExperimentResult run_experiment(const ExperimentConfig& config);

struct DeltaSweepRow {
  double delta;
  std::string policy;
  double final_mean;
  double final_ci_low;
  double final_ci_high;
};

// Re-runs a gap-environment config once per grid value, collecting final
// regrets. Rows come out grid-outer, policy-inner, exactly one per pair.
std::vector<DeltaSweepRow> delta_sweep(const ExperimentConfig& config,
                                       const std::vector<double>& grid);

}  // namespace nsbandit
