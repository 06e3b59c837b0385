#pragma once

#include <cstdint>
#include <vector>

#include "nsbandit/core.hpp"
#include "nsbandit/rng.hpp"

namespace nsbandit {

// Reward noise attached to a mean process. Bernoulli gives binary feedback
// with the exact target mean; bounded-beta gives a continuous [0,1] family
// with mean mu and spread controlled by the concentration nu.
struct RewardFamily {
  enum class Kind { kBernoulli, kBoundedBeta };

  Kind kind = Kind::kBernoulli;
  double nu = 4.0;  // bounded-beta: a = nu*mu, b = nu*(1-mu)

  double draw(double mu, SlotRng& rng) const;
};

// Piecewise-stationary means: one row of per-arm means per phase, constant
// between breakpoints. Breakpoint b_k is the first round of phase k, with
// b_1 = 1 by convention, so a breakpoint at b means the distribution that
// applies from round b onward differs from the one before it.
class AbruptEnv : public Environment {
 public:
  // `means` is phases x K row-major; every row must lie in [0, 1] and
  // consecutive rows must differ in at least one arm.
  AbruptEnv(int K, std::uint64_t T, std::vector<std::uint64_t> breakpoints,
            std::vector<double> means, RewardFamily family);

  // Draws phase means i.i.d. uniform on (0, mu_max_cap) with breakpoints
  // at 1 + (k-1)*floor(T/B_T); the last phase absorbs the remainder.
  static AbruptEnv generate(int K, std::uint64_t T, std::uint64_t B_T,
                            const PhiloxStream& means_stream,
                            double mu_max_cap, RewardFamily family);

  // Gap-controlled variant: each phase has exactly one best arm at
  // base + gap/2 and all others at base - gap/2, so the minimum
  // sub-optimality gap is `gap` exactly. The best arm is redrawn uniformly
  // among the other arms at every breakpoint, which keeps every breakpoint
  // effective.
  static AbruptEnv gap_instance(int K, std::uint64_t T, std::uint64_t B_T,
                                double gap, double base,
                                const PhiloxStream& means_stream,
                                RewardFamily family);

  int arms() const override { return K_; }
  std::uint64_t horizon() const override { return T_; }
  double mean(std::uint64_t t, int i) const override;
  double sample(std::uint64_t t, int i,
                const PhiloxStream& rewards) const override;
  double optimal_mean(std::uint64_t t) const override;

  const std::vector<std::uint64_t>& breakpoints() const { return breakpoints_; }
  std::uint64_t phases() const { return breakpoints_.size(); }
  std::size_t phase_of(std::uint64_t t) const;
  const RewardFamily& family() const { return family_; }

 private:
  int K_;
  std::uint64_t T_;
  std::vector<std::uint64_t> breakpoints_;
  std::vector<double> means_;       // phases x K
  std::vector<double> phase_best_;  // max of each row
  RewardFamily family_;
};

// Sinusoidal drift: a peak position w(t) = 1 + (K-1)(1+sin(t*sigma))/2
// sweeps across the arm range, and each arm's mean falls off linearly with
// its distance from the peak:
//   mean(t, i) = scale * ((K-1)/K - |w(t)-i|/K).
// scale = 1 gives a maximum mean of (K-1)/K; scale = K/(2(K-1)) caps the
// maximum at 1/2. Per-round steps obey |mean(t+1,i)-mean(t,i)| <= sigma.
class SmoothEnv : public Environment {
 public:
  SmoothEnv(int K, std::uint64_t T, double sigma, double scale,
            RewardFamily family);

  int arms() const override { return K_; }
  std::uint64_t horizon() const override { return T_; }
  double mean(std::uint64_t t, int i) const override;
  double sample(std::uint64_t t, int i,
                const PhiloxStream& rewards) const override;
  double optimal_mean(std::uint64_t t) const override;

  double sigma() const { return sigma_; }
  double scale() const { return scale_; }
  double peak_mean() const;  // scale * (K-1)/K, the attainable maximum
  const RewardFamily& family() const { return family_; }

 private:
  double peak_position(std::uint64_t t) const;

  int K_;
  std::uint64_t T_;
  double sigma_;
  double scale_;
  RewardFamily family_;
};

}  // namespace nsbandit
