#include "nsbandit/policies.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace nsbandit {

DiscountedPosterior::DiscountedPosterior(int arms, double gamma)
    : gamma_(gamma) {
  if (arms < 1) {
    throw std::invalid_argument("DiscountedPosterior: need at least 1 arm");
  }
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("DiscountedPosterior: gamma must lie in (0,1]");
  }
  n_.assign(static_cast<size_t>(arms), 0.0);
  sum_.assign(static_cast<size_t>(arms), 0.0);
  mean_.assign(static_cast<size_t>(arms), 0.0);
}

void DiscountedPosterior::observe(int chosen, double reward) {
  if (chosen < 1 || chosen > arms()) {
    throw std::invalid_argument("DiscountedPosterior: arm out of range");
  }
  const auto c = static_cast<size_t>(chosen - 1);
  for (size_t i = 0; i < n_.size(); ++i) {
    sum_[i] *= gamma_;
    n_[i] *= gamma_;
  }
  sum_[c] += reward;
  n_[c] += 1.0;
  // Only the pulled arm's mean moves; the others keep their exact value.
  mean_[c] = sum_[c] / n_[c];
}

double DiscountedPosterior::total_count() const {
  return std::accumulate(n_.begin(), n_.end(), 0.0);
}

DsTs::DsTs(int arms, double gamma, double tau_max)
    : post_(arms, gamma), tau_max_(tau_max) {
  if (!(tau_max > 0.0)) {
    throw std::invalid_argument("DsTs: tau_max must be positive");
  }
}

double DsTs::tau(int i) const {
  const double n = post_.count(i);
  if (n <= 0.0) return tau_max_;
  return std::min(1.0 / std::sqrt(n), tau_max_);
}

int DsTs::select(std::uint64_t, SlotRng& rng) {
  int best = 1;
  double best_theta = -HUGE_VAL;
  for (int i = 1; i <= post_.arms(); ++i) {
    const double theta = rng.normal(post_.mean(i), tau(i));
    if (theta > best_theta) {
      best_theta = theta;
      best = i;
    }
  }
  return best;
}

void DsTs::update(std::uint64_t, int arm, double reward, SlotRng&) {
  post_.observe(arm, reward);
}

GaussianTs::GaussianTs(int arms) {
  if (arms < 1) throw std::invalid_argument("GaussianTs: need at least 1 arm");
  pulls_.assign(static_cast<size_t>(arms), 0);
  sums_.assign(static_cast<size_t>(arms), 0.0);
}

double GaussianTs::sample_mean(int i) const {
  const auto k = pulls_[static_cast<size_t>(i - 1)];
  if (k == 0) return 0.0;
  return sums_[static_cast<size_t>(i - 1)] / static_cast<double>(k);
}

int GaussianTs::select(std::uint64_t, SlotRng& rng) {
  int best = 1;
  double best_theta = -HUGE_VAL;
  for (int i = 1; i <= static_cast<int>(pulls_.size()); ++i) {
    const double sd =
        1.0 / std::sqrt(static_cast<double>(pulls_[static_cast<size_t>(i - 1)]) + 1.0);
    const double theta = rng.normal(sample_mean(i), sd);
    if (theta > best_theta) {
      best_theta = theta;
      best = i;
    }
  }
  return best;
}

void GaussianTs::update(std::uint64_t, int arm, double reward, SlotRng&) {
  pulls_[static_cast<size_t>(arm - 1)] += 1;
  sums_[static_cast<size_t>(arm - 1)] += reward;
}

SwTs::SwTs(int arms, std::uint64_t window) : window_(window) {
  if (arms < 1) throw std::invalid_argument("SwTs: need at least 1 arm");
  if (window < 1) throw std::invalid_argument("SwTs: window must be >= 1");
  s_.assign(static_cast<size_t>(arms), 0);
  f_.assign(static_cast<size_t>(arms), 0);
}

int SwTs::select(std::uint64_t, SlotRng& rng) {
  int best = 1;
  double best_theta = -HUGE_VAL;
  for (int i = 1; i <= static_cast<int>(s_.size()); ++i) {
    const auto idx = static_cast<size_t>(i - 1);
    const double theta = rng.beta(static_cast<double>(s_[idx]) + 1.0,
                                  static_cast<double>(f_[idx]) + 1.0);
    if (theta > best_theta) {
      best_theta = theta;
      best = i;
    }
  }
  return best;
}

void SwTs::update(std::uint64_t t, int arm, double reward, SlotRng& rng) {
  bool success;
  if (reward == 0.0) {
    success = false;
  } else if (reward == 1.0) {
    success = true;
  } else {
    success = rng.bernoulli(reward);
  }
  history_.push_back({t, arm, success});
  const auto idx = static_cast<size_t>(arm - 1);
  (success ? s_[idx] : f_[idx]) += 1;
  while (!history_.empty() && history_.front().round + window_ <= t) {
    const Entry& e = history_.front();
    const auto old = static_cast<size_t>(e.arm - 1);
    (e.success ? s_[old] : f_[old]) -= 1;
    history_.pop_front();
  }
}

DsUcb::DsUcb(int arms, double gamma, double scale_B, double xi)
    : post_(arms, gamma), scale_B_(scale_B), xi_(xi) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("DsUcb: gamma must lie in (0,1)");
  }
  if (!(scale_B > 0.0)) throw std::invalid_argument("DsUcb: B must be positive");
  if (!(xi > 0.0)) throw std::invalid_argument("DsUcb: xi must be positive");
}

double DsUcb::index(int i) const {
  const double total = post_.total_count();
  if (!(total > 0.0)) {
    throw std::logic_error("DsUcb: index undefined before any pull");
  }
  const double n = post_.count(i);
  return post_.mean(i) +
         2.0 * scale_B_ * std::sqrt(xi_ * std::log(total) / n);
}

int DsUcb::select(std::uint64_t, SlotRng&) {
  for (int i = 1; i <= post_.arms(); ++i) {
    if (post_.count(i) == 0.0) return i;  // forced initialization
  }
  int best = 1;
  double best_index = -HUGE_VAL;
  for (int i = 1; i <= post_.arms(); ++i) {
    const double idx = index(i);
    if (idx > best_index) {
      best_index = idx;
      best = i;
    }
  }
  return best;
}

void DsUcb::update(std::uint64_t, int arm, double reward, SlotRng&) {
  post_.observe(arm, reward);
}

Exp3s::Exp3s(int arms, double alpha, double gamma_mix)
    : alpha_(alpha), gamma_mix_(gamma_mix) {
  if (arms < 1) throw std::invalid_argument("Exp3s: need at least 1 arm");
  if (!(alpha >= 0.0)) throw std::invalid_argument("Exp3s: alpha must be >= 0");
  if (!(gamma_mix > 0.0 && gamma_mix <= 1.0)) {
    throw std::invalid_argument("Exp3s: gamma_mix must lie in (0,1]");
  }
  w_.assign(static_cast<size_t>(arms), 1.0);
}

double Exp3s::probability(int i) const {
  const double total = std::accumulate(w_.begin(), w_.end(), 0.0);
  const auto K = static_cast<double>(w_.size());
  return (1.0 - gamma_mix_) * w_[static_cast<size_t>(i - 1)] / total +
         gamma_mix_ / K;
}

int Exp3s::select(std::uint64_t, SlotRng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  const int K = static_cast<int>(w_.size());
  for (int i = 1; i < K; ++i) {
    acc += probability(i);
    if (u < acc) return i;
  }
  return K;
}

void Exp3s::update(std::uint64_t, int arm, double reward, SlotRng&) {
  const auto K = static_cast<double>(w_.size());
  const double p = probability(arm);
  const double xhat = reward / p;
  const double total = std::accumulate(w_.begin(), w_.end(), 0.0);
  w_[static_cast<size_t>(arm - 1)] *= std::exp(gamma_mix_ * xhat / K);
  const double bonus = std::numbers::e * alpha_ / K * total;
  double max_w = 0.0;
  for (double& w : w_) {
    w += bonus;
    max_w = std::max(max_w, w);
  }
  for (double& w : w_) {
    w /= max_w;
    w = std::max(w, DBL_MIN);  // keep weights strictly positive
  }
}

MUcb::MUcb(int arms, std::uint64_t window, double threshold,
           double explore_frac)
    : window_(window), threshold_(threshold), explore_frac_(explore_frac) {
  if (arms < 1) throw std::invalid_argument("MUcb: need at least 1 arm");
  if (window < 2 || window % 2 != 0) {
    throw std::invalid_argument("MUcb: window must be even and >= 2");
  }
  if (!(threshold > 0.0)) {
    throw std::invalid_argument("MUcb: threshold must be positive");
  }
  if (!(explore_frac > 0.0 && explore_frac < 1.0)) {
    throw std::invalid_argument("MUcb: explore_frac must lie in (0,1)");
  }
  arms_.resize(static_cast<size_t>(arms));
  for (auto& a : arms_) a.ring.resize(window_);
}

void MUcb::reset_all() {
  for (auto& a : arms_) {
    a.pulls = 0;
    a.sum = 0.0;
    a.start = 0;
    a.size = 0;
    a.first_half = 0.0;
    a.second_half = 0.0;
  }
  ++resets_;
}

void MUcb::push_observation(ArmState& a, double x) {
  const std::size_t half = window_ / 2;
  if (a.size < window_) {
    a.ring[(a.start + a.size) % window_] = x;
    ++a.size;
    if (a.size == window_) {
      a.first_half = 0.0;
      a.second_half = 0.0;
      for (std::size_t j = 0; j < window_; ++j) {
        const double v = a.ring[(a.start + j) % window_];
        (j < half ? a.first_half : a.second_half) += v;
      }
    }
    return;
  }
  const double oldest = a.ring[a.start];
  const double crossing = a.ring[(a.start + half) % window_];
  a.first_half += crossing - oldest;
  a.second_half += x - crossing;
  a.ring[a.start] = x;
  a.start = (a.start + 1) % window_;
}

int MUcb::select(std::uint64_t t, SlotRng&) {
  const int K = static_cast<int>(arms_.size());
  const auto mark = static_cast<std::uint64_t>(
      std::ceil(static_cast<double>(t) * explore_frac_));
  if (mark > schedule_mark_) {
    schedule_mark_ = mark;
    const int arm = static_cast<int>(forced_count_ % static_cast<std::uint64_t>(K)) + 1;
    ++forced_count_;
    return arm;
  }
  std::uint64_t total = 0;
  for (const auto& a : arms_) total += a.pulls;
  for (int i = 1; i <= K; ++i) {
    if (arms_[static_cast<size_t>(i - 1)].pulls == 0) return i;
  }
  int best = 1;
  double best_index = -HUGE_VAL;
  const double log_total = std::log(static_cast<double>(total));
  for (int i = 1; i <= K; ++i) {
    const auto& a = arms_[static_cast<size_t>(i - 1)];
    const auto n = static_cast<double>(a.pulls);
    const double idx = a.sum / n + std::sqrt(2.0 * log_total / n);
    if (idx > best_index) {
      best_index = idx;
      best = i;
    }
  }
  return best;
}

void MUcb::update(std::uint64_t, int arm, double reward, SlotRng&) {
  ArmState& a = arms_[static_cast<size_t>(arm - 1)];
  a.pulls += 1;
  a.sum += reward;
  push_observation(a, reward);
  if (a.size == window_ &&
      std::fabs(a.second_half - a.first_half) > threshold_) {
    reset_all();
  }
}

UniformRandom::UniformRandom(int arms) : arms_(arms) {
  if (arms < 1) throw std::invalid_argument("UniformRandom: need at least 1 arm");
}

int UniformRandom::select(std::uint64_t, SlotRng& rng) {
  return 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(arms_)));
}

void UniformRandom::update(std::uint64_t, int, double, SlotRng&) {}

int BestArmOracle::select(std::uint64_t t, SlotRng&) {
  int best = 1;
  double best_mean = env_->mean(t, 1);
  for (int i = 2; i <= env_->arms(); ++i) {
    const double m = env_->mean(t, i);
    if (m > best_mean) {
      best_mean = m;
      best = i;
    }
  }
  return best;
}

void BestArmOracle::update(std::uint64_t, int, double, SlotRng&) {}

}  // namespace nsbandit
