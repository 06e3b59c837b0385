#include "nsbandit/environments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nsbandit {

double RewardFamily::draw(double mu, SlotRng& rng) const {
  if (mu <= 0.0) return 0.0;
  if (mu >= 1.0) return 1.0;
  switch (kind) {
    case Kind::kBernoulli:
      return rng.bernoulli(mu) ? 1.0 : 0.0;
    case Kind::kBoundedBeta:
      return rng.beta(nu * mu, nu * (1.0 - mu));
  }
  throw std::logic_error("RewardFamily: unknown kind");
}

AbruptEnv::AbruptEnv(int K, std::uint64_t T,
                     std::vector<std::uint64_t> breakpoints,
                     std::vector<double> means, RewardFamily family)
    : K_(K),
      T_(T),
      breakpoints_(std::move(breakpoints)),
      means_(std::move(means)),
      family_(family) {
  if (K_ < 2) throw std::invalid_argument("AbruptEnv: need at least 2 arms");
  if (T_ < 1) throw std::invalid_argument("AbruptEnv: horizon must be >= 1");
  if (breakpoints_.empty() || breakpoints_.front() != 1) {
    throw std::invalid_argument("AbruptEnv: first breakpoint must be round 1");
  }
  for (std::size_t k = 1; k < breakpoints_.size(); ++k) {
    if (breakpoints_[k] <= breakpoints_[k - 1]) {
      throw std::invalid_argument("AbruptEnv: breakpoints must increase");
    }
  }
  if (breakpoints_.back() > T_) {
    throw std::invalid_argument("AbruptEnv: breakpoint beyond horizon");
  }
  const std::size_t rows = breakpoints_.size();
  if (means_.size() != rows * static_cast<std::size_t>(K_)) {
    throw std::invalid_argument("AbruptEnv: means must be phases x K");
  }
  for (double m : means_) {
    if (!(m >= 0.0 && m <= 1.0)) {
      throw std::invalid_argument("AbruptEnv: means must lie in [0,1]");
    }
  }
  for (std::size_t k = 1; k < rows; ++k) {
    bool changed = false;
    for (int i = 0; i < K_; ++i) {
      if (means_[k * K_ + i] != means_[(k - 1) * K_ + i]) changed = true;
    }
    if (!changed) {
      throw std::invalid_argument(
          "AbruptEnv: consecutive phases must differ in some arm");
    }
  }
  phase_best_.resize(rows);
  for (std::size_t k = 0; k < rows; ++k) {
    phase_best_[k] = *std::max_element(means_.begin() + k * K_,
                                       means_.begin() + (k + 1) * K_);
  }
}

AbruptEnv AbruptEnv::generate(int K, std::uint64_t T, std::uint64_t B_T,
                              const PhiloxStream& means_stream,
                              double mu_max_cap, RewardFamily family) {
  if (B_T < 1) throw std::invalid_argument("AbruptEnv: need at least 1 phase");
  if (B_T > T) {
    throw std::invalid_argument("AbruptEnv: more phases than rounds");
  }
  if (!(mu_max_cap > 0.0 && mu_max_cap <= 1.0)) {
    throw std::invalid_argument("AbruptEnv: mu_max_cap must lie in (0,1]");
  }
  const std::uint64_t width = T / B_T;
  std::vector<std::uint64_t> breakpoints(B_T);
  for (std::uint64_t k = 0; k < B_T; ++k) breakpoints[k] = 1 + k * width;
  std::vector<double> means(B_T * static_cast<std::uint64_t>(K));
  for (std::uint64_t k = 0; k < B_T; ++k) {
    SlotRng rng = means_stream.at(k);
    for (;;) {
      for (int i = 0; i < K; ++i) {
        means[k * K + i] = mu_max_cap * rng.uniform();
      }
      if (k == 0) break;
      bool changed = false;
      for (int i = 0; i < K; ++i) {
        if (means[k * K + i] != means[(k - 1) * K + i]) changed = true;
      }
      if (changed) break;  // redraw guard; continuous draws never tie
    }
  }
  return AbruptEnv(K, T, std::move(breakpoints), std::move(means), family);
}

AbruptEnv AbruptEnv::gap_instance(int K, std::uint64_t T, std::uint64_t B_T,
                                  double gap, double base,
                                  const PhiloxStream& means_stream,
                                  RewardFamily family) {
  if (B_T < 1) throw std::invalid_argument("AbruptEnv: need at least 1 phase");
  if (B_T > T) {
    throw std::invalid_argument("AbruptEnv: more phases than rounds");
  }
  if (!(gap > 0.0)) throw std::invalid_argument("AbruptEnv: gap must be > 0");
  if (!(base - gap / 2 >= 0.0 && base + gap / 2 <= 1.0)) {
    throw std::invalid_argument("AbruptEnv: base +/- gap/2 must lie in [0,1]");
  }
  const std::uint64_t width = T / B_T;
  std::vector<std::uint64_t> breakpoints(B_T);
  for (std::uint64_t k = 0; k < B_T; ++k) breakpoints[k] = 1 + k * width;
  std::vector<double> means(B_T * static_cast<std::uint64_t>(K),
                            base - gap / 2);
  int prev_best = 0;
  for (std::uint64_t k = 0; k < B_T; ++k) {
    SlotRng rng = means_stream.at(k);
    int best;
    if (k == 0) {
      best = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(K)));
    } else {
      // Uniform among the K-1 arms other than the previous best, so every
      // breakpoint moves the optimum.
      auto pick =
          static_cast<int>(rng.below(static_cast<std::uint64_t>(K - 1)));
      best = pick + 1 >= prev_best ? pick + 2 : pick + 1;
    }
    means[k * K + (best - 1)] = base + gap / 2;
    prev_best = best;
  }
  return AbruptEnv(K, T, std::move(breakpoints), std::move(means), family);
}

std::size_t AbruptEnv::phase_of(std::uint64_t t) const {
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
  return static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
}

double AbruptEnv::mean(std::uint64_t t, int i) const {
  return means_[phase_of(t) * K_ + static_cast<std::size_t>(i - 1)];
}

double AbruptEnv::optimal_mean(std::uint64_t t) const {
  return phase_best_[phase_of(t)];
}

double AbruptEnv::sample(std::uint64_t t, int i,
                         const PhiloxStream& rewards) const {
  SlotRng rng = rewards.at(reward_slot(t, i, K_));
  return family_.draw(mean(t, i), rng);
}

SmoothEnv::SmoothEnv(int K, std::uint64_t T, double sigma, double scale,
                     RewardFamily family)
    : K_(K), T_(T), sigma_(sigma), scale_(scale), family_(family) {
  if (K_ < 2) throw std::invalid_argument("SmoothEnv: need at least 2 arms");
  if (T_ < 1) throw std::invalid_argument("SmoothEnv: horizon must be >= 1");
  if (!(sigma_ > 0.0)) {
    throw std::invalid_argument("SmoothEnv: sigma must be > 0");
  }
  if (!(scale_ > 0.0 && scale_ <= 1.0)) {
    throw std::invalid_argument("SmoothEnv: scale must lie in (0,1]");
  }
}

double SmoothEnv::peak_position(std::uint64_t t) const {
  return 1.0 + (K_ - 1) * (1.0 + std::sin(static_cast<double>(t) * sigma_)) / 2.0;
}

double SmoothEnv::mean(std::uint64_t t, int i) const {
  const double w = peak_position(t);
  return scale_ * ((K_ - 1.0) / K_ - std::fabs(w - i) / K_);
}

double SmoothEnv::optimal_mean(std::uint64_t t) const {
  const double w = peak_position(t);
  auto nearest = static_cast<int>(std::llround(w));
  nearest = std::clamp(nearest, 1, K_);
  return scale_ * ((K_ - 1.0) / K_ - std::fabs(w - nearest) / K_);
}

double SmoothEnv::peak_mean() const { return scale_ * (K_ - 1.0) / K_; }

double SmoothEnv::sample(std::uint64_t t, int i,
                         const PhiloxStream& rewards) const {
  SlotRng rng = rewards.at(reward_slot(t, i, K_));
  return family_.draw(mean(t, i), rng);
}

}  // namespace nsbandit
