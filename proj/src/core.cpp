#include "nsbandit/core.hpp"

#include <stdexcept>

namespace nsbandit {

double Environment::optimal_mean(std::uint64_t t) const {
  double best = mean(t, 1);
  for (int i = 2; i <= arms(); ++i) {
    double m = mean(t, i);
    if (m > best) best = m;
  }
  return best;
}

double Environment::gap(std::uint64_t t, int i) const {
  return optimal_mean(t) - mean(t, i);
}

RunTrace run_episode(Policy& policy, const Environment& env,
                     const PhiloxStream& reward_stream,
                     const PhiloxStream& policy_stream) {
  const std::uint64_t T = env.horizon();
  const int K = env.arms();
  RunTrace trace;
  trace.chosen.resize(T);
  trace.inst_regret.resize(T);
  trace.cum_regret.resize(T);
  double cum = 0.0;
  for (std::uint64_t t = 1; t <= T; ++t) {
    SlotRng round_rng = policy_stream.at(t);
    const int arm = policy.select(t, round_rng);
    if (arm < 1 || arm > K) {
      throw std::logic_error("run_episode: policy chose arm outside [1,K]");
    }
    const double reward = env.sample(t, arm, reward_stream);
    policy.update(t, arm, reward, round_rng);
    const double inst = env.gap(t, arm);
    cum += inst;
    trace.chosen[t - 1] = arm;
    trace.inst_regret[t - 1] = inst;
    trace.cum_regret[t - 1] = cum;
  }
  return trace;
}

}  // namespace nsbandit
