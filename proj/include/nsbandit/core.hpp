#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nsbandit/rng.hpp"

namespace nsbandit {

// Conventions used throughout: rounds t are 1-based and run to the horizon
// T; arms i are 1-based and run to K; rewards lie in [0,1].

class Environment {
 public:
  virtual ~Environment() = default;

  virtual int arms() const = 0;
  virtual std::uint64_t horizon() const = 0;

  // True expected reward of arm i at round t.
  virtual double mean(std::uint64_t t, int i) const = 0;

  // Draws the reward for (t, i). The draw is addressed by (t, i) alone,
  // so every policy run against the same stream sees the same realization
  // when it pulls the same arm at the same round.
  virtual double sample(std::uint64_t t, int i,
                        const PhiloxStream& rewards) const = 0;

  virtual double optimal_mean(std::uint64_t t) const;  // max_i mean(t, i)
  double gap(std::uint64_t t, int i) const;            // optimal_mean - mean
};

// Reward draws for (t, i) live in their own slot, so the number of
// uniforms one draw consumes can never shift another draw.
inline std::uint64_t reward_slot(std::uint64_t t, int i, int arms) {
  return (t - 1) * static_cast<std::uint64_t>(arms) +
         static_cast<std::uint64_t>(i - 1);
}

class Policy {
 public:
  virtual ~Policy() = default;

  virtual std::string name() const = 0;

  // Chooses the arm for round t, drawing only from `rng`.
  virtual int select(std::uint64_t t, SlotRng& rng) = 0;

  // Observes the reward of the arm chosen this round. Shares the round's
  // slot with select, so any draws happen after selection's draws.
  virtual void update(std::uint64_t t, int arm, double reward,
                      SlotRng& rng) = 0;
};

struct RunTrace {
  std::vector<int> chosen;          // arm played each round
  std::vector<double> inst_regret;  // true optimal mean minus played mean
  std::vector<double> cum_regret;   // prefix sums of inst_regret
};

// Plays one freshly initialized policy against the environment for the
// full horizon. Policy draws use one slot per round of `policy_stream`;
// rewards come from `reward_stream` addressed by (round, arm). Regret is
// accounted with the environment's true means, never sampled rewards, so
// the trace is the expected-regret path of the realized pull sequence.
RunTrace run_episode(Policy& policy, const Environment& env,
                     const PhiloxStream& reward_stream,
                     const PhiloxStream& policy_stream);

}  // namespace nsbandit
