#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "nsbandit/core.hpp"
#include "nsbandit/rng.hpp"

namespace nsbandit {

// Geometrically discounted sufficient statistics shared by the discounted
// policies. Per arm: N is the discounted pull count, sum the discounted
// reward total, and mean their ratio (0 while N is 0). Every observation
// decays all arms and credits only the chosen one, so an unpulled arm's
// mean is left bit-for-bit unchanged.
class DiscountedPosterior {
 public:
  DiscountedPosterior(int arms, double gamma);

  void observe(int chosen, double reward);

  int arms() const { return static_cast<int>(n_.size()); }
  double gamma() const { return gamma_; }
  double count(int i) const { return n_[static_cast<size_t>(i - 1)]; }
  double weighted_sum(int i) const { return sum_[static_cast<size_t>(i - 1)]; }
  double mean(int i) const { return mean_[static_cast<size_t>(i - 1)]; }
  double total_count() const;

 private:
  double gamma_;
  std::vector<double> n_;
  std::vector<double> sum_;
  std::vector<double> mean_;
};

// Discounted Thompson sampling: per-arm Gaussian samples around the
// discounted empirical mean, with standard deviation min(1/sqrt(N),
// tau_max) and tau_max while an arm has no discounted mass. The discount
// keeps the sampling variance of neglected arms from collapsing, which is
// what lets the policy re-explore after a distribution change.
class DsTs : public Policy {
 public:
  DsTs(int arms, double gamma, double tau_max);

  std::string name() const override { return "ds-ts"; }
  int select(std::uint64_t t, SlotRng& rng) override;
  void update(std::uint64_t t, int arm, double reward, SlotRng& rng) override;

  const DiscountedPosterior& posterior() const { return post_; }
  double tau(int i) const;
  double tau_max() const { return tau_max_; }

 private:
  DiscountedPosterior post_;
  double tau_max_;
};

// Stationary Gaussian Thompson sampling: sample mean with sampling
// variance 1/(pulls+1), mean 0 before the first pull.
class GaussianTs : public Policy {
 public:
  explicit GaussianTs(int arms);

  std::string name() const override { return "ts"; }
  int select(std::uint64_t t, SlotRng& rng) override;
  void update(std::uint64_t t, int arm, double reward, SlotRng& rng) override;

  std::uint64_t pulls(int i) const { return pulls_[static_cast<size_t>(i - 1)]; }
  double sample_mean(int i) const;

 private:
  std::vector<std::uint64_t> pulls_;
  std::vector<double> sums_;
};

// Sliding-window Thompson sampling with Beta posteriors over the plays
// that happened in the last `window` rounds. Rewards outside {0,1} are
// binarized by a Bernoulli(reward) flip before entering the posterior.
class SwTs : public Policy {
 public:
  SwTs(int arms, std::uint64_t window);

  std::string name() const override { return "sw-ts"; }
  int select(std::uint64_t t, SlotRng& rng) override;
  void update(std::uint64_t t, int arm, double reward, SlotRng& rng) override;

  std::uint64_t window() const { return window_; }
  std::uint64_t successes(int i) const { return s_[static_cast<size_t>(i - 1)]; }
  std::uint64_t failures(int i) const { return f_[static_cast<size_t>(i - 1)]; }

 private:
  struct Entry {
    std::uint64_t round;
    int arm;
    bool success;
  };

  std::uint64_t window_;
  std::deque<Entry> history_;
  std::vector<std::uint64_t> s_;
  std::vector<std::uint64_t> f_;
};

// Discounted UCB: the same discounted statistics as DsTs plus a padding
// term 2B sqrt(xi log n_t / N_t(i)), where n_t is the total discounted
// count. Arms without discounted mass are played first, lowest index
// first. One pull per round keeps n_t >= 1, so the log stays nonnegative.
class DsUcb : public Policy {
 public:
  DsUcb(int arms, double gamma, double scale_B, double xi);

  std::string name() const override { return "ds-ucb"; }
  int select(std::uint64_t t, SlotRng& rng) override;
  void update(std::uint64_t t, int arm, double reward, SlotRng& rng) override;

  const DiscountedPosterior& posterior() const { return post_; }
  double index(int i) const;  // mean + padding; requires total count > 0

 private:
  DiscountedPosterior post_;
  double scale_B_;
  double xi_;
};

// EXP3.S: exponential weights with an additive mixing term that lets the
// weight of any arm recover after a change. Probabilities mix the weight
// share with gamma_mix/K of uniform exploration; the chosen arm's reward
// is importance-weighted by its probability. Weights are renormalized by
// their maximum every round, which leaves the probabilities unchanged.
class Exp3s : public Policy {
 public:
  Exp3s(int arms, double alpha, double gamma_mix);

  std::string name() const override { return "exp3s"; }
  int select(std::uint64_t t, SlotRng& rng) override;
  void update(std::uint64_t t, int arm, double reward, SlotRng& rng) override;

  double probability(int i) const;
  double alpha() const { return alpha_; }
  double gamma_mix() const { return gamma_mix_; }

 private:
  double alpha_;
  double gamma_mix_;
  std::vector<double> w_;
};

// Change-detection UCB: UCB1 on the data gathered since the last reset,
// forced round-robin exploration whenever ceil(t * explore_frac)
// increments, and a per-arm two-halves test over the arm's last `window`
// observations. When the halves of some arm's window differ by more than
// `threshold`, every arm's history is reset. The exploration schedule
// follows the global round counter and is not reset.
class MUcb : public Policy {
 public:
  MUcb(int arms, std::uint64_t window, double threshold, double explore_frac);

  std::string name() const override { return "m-ucb"; }
  int select(std::uint64_t t, SlotRng& rng) override;
  void update(std::uint64_t t, int arm, double reward, SlotRng& rng) override;

  std::uint64_t resets() const { return resets_; }
  std::uint64_t window() const { return window_; }

 private:
  struct ArmState {
    std::uint64_t pulls = 0;
    double sum = 0.0;
    std::vector<double> ring;  // last `window` observations since reset
    std::size_t start = 0;
    std::size_t size = 0;
    double first_half = 0.0;
    double second_half = 0.0;
  };

  void reset_all();
  void push_observation(ArmState& a, double x);

  std::uint64_t window_;
  double threshold_;
  double explore_frac_;
  std::vector<ArmState> arms_;
  std::uint64_t forced_count_ = 0;
  std::uint64_t schedule_mark_ = 0;  // last value of ceil(t * explore_frac)
  std::uint64_t resets_ = 0;
};

// Uniform-random control.
class UniformRandom : public Policy {
 public:
  explicit UniformRandom(int arms);

  std::string name() const override { return "random"; }
  int select(std::uint64_t t, SlotRng& rng) override;
  void update(std::uint64_t t, int arm, double reward, SlotRng& rng) override;

 private:
  int arms_;
};

// Clairvoyant control: always plays an arm with the highest true mean.
class BestArmOracle : public Policy {
 public:
  explicit BestArmOracle(const Environment& env) : env_(&env) {}

  std::string name() const override { return "oracle"; }
  int select(std::uint64_t t, SlotRng& rng) override;
  void update(std::uint64_t t, int arm, double reward, SlotRng& rng) override;

 private:
  const Environment* env_;
};

}  // namespace nsbandit
