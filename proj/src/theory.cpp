#include "nsbandit/theory.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nsbandit {

namespace {

const double kTauMaxMin = 1.0 / (12.0 * std::sqrt(2.0));
constexpr double kDriftSlack = 1e-9;      // float headroom for incremental sums
constexpr double kLipschitzSlack = 1e-12; // float headroom for closed-form means

// gamma^{1/(1-gamma)}, the attenuation a window of length 1/(1-gamma)
// applies; bounded in (1/e^e, 1/e) on (0,1) so log-space is enough.
double gamma_power(double gamma) {
  return std::exp(std::log(gamma) / (1.0 - gamma));
}

double log_gaussian_tail_F(double x) {
  return -0.5 * x * x + std::log(x) - std::log1p(x * x) -
         0.5 * std::log(2.0 * std::acos(-1.0));
}

void require_theorem_domain(const TheoryParams& p) {
  if (!(p.gamma > kTheoryGammaLow && p.gamma < 1.0)) {
    throw std::domain_error("gamma must lie in (1-1/e, 1)");
  }
  if (!(p.tau_max >= kTauMaxMin)) {
    throw std::domain_error("tau_max must be at least 1/(12 sqrt(2))");
  }
  if (!(p.mu_max > 0.0 && p.mu_max <= 1.0)) {
    throw std::domain_error("mu_max must lie in (0, 1]");
  }
  if (!(p.T >= 1.0)) throw std::domain_error("T must be at least 1");
}

void require_valid_breakpoints(const std::vector<std::uint64_t>& breakpoints,
                               std::uint64_t T) {
  if (T < 1) throw std::invalid_argument("horizon must be at least 1");
  if (breakpoints.empty() || breakpoints.front() != 1) {
    throw std::invalid_argument("breakpoints must start at round 1");
  }
  for (std::size_t k = 1; k < breakpoints.size(); ++k) {
    if (breakpoints[k] <= breakpoints[k - 1]) {
      throw std::invalid_argument("breakpoints must be strictly increasing");
    }
  }
  if (breakpoints.back() > T) {
    throw std::invalid_argument("breakpoints must not exceed the horizon");
  }
}

void require_valid_pulls(const std::vector<int>& pulls, std::uint64_t T,
                         int arms) {
  if (pulls.size() != T) {
    throw std::invalid_argument("pull log must cover every round");
  }
  for (int a : pulls) {
    if (a < 1 || a > arms) {
      throw std::invalid_argument("pull log references an invalid arm");
    }
  }
}

}  // namespace

double d_gamma(double gamma) {
  if (!(gamma >= kTheoryGammaLow && gamma < 1.0)) {
    throw std::domain_error("d_gamma: gamma must lie in [1-1/e, 1)");
  }
  const double x = 1.0 - gamma;
  return std::log(x * x * std::log(1.0 / x)) / std::log(gamma);
}

double u_t(double gamma, double n) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::domain_error("u_t: gamma must lie in (0, 1)");
  }
  if (!(n > 0.0)) throw std::domain_error("u_t: count must be positive");
  const double x = 1.0 - gamma;
  return std::sqrt(x * std::log(1.0 / x) / n);
}

double gaussian_tail_F(double x) {
  if (!(x > 0.0)) throw std::domain_error("gaussian_tail_F: x must be positive");
  return std::exp(log_gaussian_tail_F(x));
}

Theorem1Bound theorem1_bound(const TheoryParams& p, bool lemma_form_l) {
  require_theorem_domain(p);
  if (!(p.delta_t > 0.0 && p.delta_t < 1.0)) {
    throw std::domain_error("delta_t must lie in (0, 1)");
  }
  if (!(p.b_t >= 1.0)) throw std::domain_error("b_t must be at least 1");

  const double x = 1.0 - p.gamma;
  const double lg = std::log(1.0 / x);
  const double e25 = std::exp(25.0);
  const double pow_g = gamma_power(p.gamma);
  const double inv_f = std::exp(-log_gaussian_tail_F(p.mu_max / p.tau_max));

  Theorem1Bound out;
  out.c_const = e25 + 12.0 + inv_f;
  const double sq = 1.0 + std::sqrt(2.0);
  out.l_gamma = 144.0 * sq * sq * std::log(1.0 / x + e25) /
                (p.delta_t * p.delta_t);
  if (!lemma_form_l) out.l_gamma /= pow_g;
  out.pseudo_stationary_term = p.b_t * d_gamma(p.gamma);
  out.concentration_term =
      (out.c_const + 2.0) * out.l_gamma * (1.0 / pow_g) * p.T * x * lg;
  out.per_arm = out.pseudo_stationary_term + out.concentration_term;
  return out;
}

Theorem2Bound theorem2_bound(const TheoryParams& p) {
  require_theorem_domain(p);
  if (!(p.delta > 0.0 && p.delta < 1.0)) {
    throw std::domain_error("delta must lie in (0, 1)");
  }
  if (!(p.sigma >= 0.0)) throw std::domain_error("sigma must be nonnegative");
  if (!(p.beta >= 0.0 && p.beta <= 1.0)) {
    throw std::domain_error("beta must lie in [0, 1]");
  }
  if (!(p.f_a2 > 0.0)) throw std::domain_error("f_a2 must be positive");

  const double drift_reach = 2.0 * p.sigma * d_gamma(p.gamma);
  const double third = p.delta / 3.0;
  if (!(drift_reach < third)) {
    std::ostringstream msg;
    msg << "infeasible: 2*sigma*D(gamma) = " << drift_reach
        << " must be < Delta/3 = " << third;
    throw InfeasibleError(msg.str());
  }
  if (!(third <= p.delta_0)) {
    std::ostringstream msg;
    msg << "infeasible: Delta/3 = " << third
        << " must be <= Delta_0 = " << p.delta_0;
    throw InfeasibleError(msg.str());
  }

  const double x = 1.0 - p.gamma;
  const double lg = std::log(1.0 / x);
  const double e25 = std::exp(25.0);
  const double pow_g = gamma_power(p.gamma);
  const double inv_f = std::exp(-log_gaussian_tail_F(p.mu_max / p.tau_max));
  const double sq = 1.0 + std::sqrt(2.0);

  const double l_part = 144.0 * sq * sq * std::log(1.0 / x + e25) /
                        (pow_g * p.delta * p.delta);
  const double denom = third - drift_reach;

  Theorem2Bound out;
  out.m_gamma =
      l_part * (e25 + 13.0 + inv_f) + 594.0 / (pow_g * denom * denom);
  out.near_tie_term = p.f_a2 * p.delta * std::pow(p.T, p.beta);
  out.concentration_term = out.m_gamma * p.T * x * lg;
  out.per_arm = out.near_tie_term + out.concentration_term;
  return out;
}

GammaChoice gamma_for_abrupt(double T, double b_t) {
  if (!(T >= 1.0)) throw std::domain_error("T must be at least 1");
  if (!(b_t > 0.0 && b_t <= T)) {
    throw std::domain_error("b_t must lie in (0, T]");
  }
  GammaChoice out;
  out.gamma = 1.0 - std::sqrt(b_t / T);
  out.in_theory_domain = out.gamma > kTheoryGammaLow;
  return out;
}

GammaChoice gamma_for_smooth(double T, double beta) {
  if (!(T >= 1.0)) throw std::domain_error("T must be at least 1");
  if (!(beta >= 0.0 && beta < 1.0)) {
    throw std::domain_error("beta must lie in [0, 1)");
  }
  GammaChoice out;
  out.gamma = 1.0 - std::pow(T, beta - 1.0);
  out.in_theory_domain = out.gamma > kTheoryGammaLow;
  return out;
}

double a_gamma(const TheoryParams& p, Setting setting) {
  const double x = 1.0 - p.gamma;
  double gap;
  if (setting == Setting::kAbrupt) {
    if (!(p.gamma > 0.0 && p.gamma < 1.0)) {
      throw std::domain_error("gamma must lie in (0, 1)");
    }
    if (!(p.delta_t > 0.0 && p.delta_t < 1.0)) {
      throw std::domain_error("delta_t must lie in (0, 1)");
    }
    gap = p.delta_t;
  } else {
    const double drift_reach = 2.0 * p.sigma * d_gamma(p.gamma);
    const double third = p.delta / 3.0;
    if (!(drift_reach < third)) {
      std::ostringstream msg;
      msg << "infeasible: 2*sigma*D(gamma) = " << drift_reach
          << " must be < Delta/3 = " << third;
      throw InfeasibleError(msg.str());
    }
    gap = third - drift_reach;
  }
  const double n = 12.0 * std::sqrt(2.0) + 3.0 * std::sqrt(x);
  return n * n * std::log(1.0 / x) / (gap * gap);
}

PseudoStationarySet pseudo_stationary_window(
    const std::vector<std::uint64_t>& breakpoints, std::uint64_t T,
    double window) {
  require_valid_breakpoints(breakpoints, T);
  if (!(window > 0.0)) throw std::invalid_argument("window must be positive");

  PseudoStationarySet out;
  out.pseudo.assign(T, 1);
  std::size_t phase = 0;
  for (std::uint64_t t = 1; t <= T; ++t) {
    while (phase + 1 < breakpoints.size() && breakpoints[phase + 1] <= t) {
      ++phase;
    }
    const std::uint64_t start = breakpoints[phase];
    // The window (t-window, t] reaches before this phase iff the last
    // round of the previous phase, start-1, is still inside it.
    if (start >= 2 &&
        static_cast<double>(start - 1) > static_cast<double>(t) - window) {
      out.pseudo[static_cast<std::size_t>(t - 1)] = 0;
      ++out.excluded;
    }
  }
  return out;
}

PseudoStationarySet pseudo_stationary_set(
    const std::vector<std::uint64_t>& breakpoints, std::uint64_t T,
    double gamma) {
  return pseudo_stationary_window(breakpoints, T, d_gamma(gamma));
}

std::vector<std::uint64_t> h_delta_set(const Environment& env, double delta) {
  std::vector<std::uint64_t> rounds;
  const int K = env.arms();
  for (std::uint64_t t = 1; t <= env.horizon(); ++t) {
    bool near_tie = false;
    for (int i = 1; i < K && !near_tie; ++i) {
      for (int j = i + 1; j <= K; ++j) {
        if (std::fabs(env.mean(t, i) - env.mean(t, j)) < delta) {
          near_tie = true;
          break;
        }
      }
    }
    if (near_tie) rounds.push_back(t);
  }
  return rounds;
}

Assumption2Report check_assumption2(const Environment& env,
                                    const std::vector<double>& deltas,
                                    double f, double beta) {
  Assumption2Report out;
  const double T = static_cast<double>(env.horizon());
  for (double delta : deltas) {
    const auto h = h_delta_set(env, delta);
    Assumption2Report::Entry e;
    e.delta = delta;
    e.h_size = h.size();
    e.bound = f * delta * std::pow(T, beta);
    e.ok = static_cast<double>(e.h_size) <= e.bound;
    out.entries.push_back(e);
  }
  return out;
}

namespace {

// Shared drift scan; `pseudo` restricts checked rounds when non-null.
CheckReport mean_drift_scan(const std::vector<int>& pulls,
                            const Environment& env, double gamma,
                            double extra_slack,
                            const PseudoStationarySet* pseudo) {
  const std::uint64_t T = env.horizon();
  const int K = env.arms();
  require_valid_pulls(pulls, T, K);

  std::vector<double> n(static_cast<std::size_t>(K), 0.0);
  std::vector<double> w(static_cast<std::size_t>(K), 0.0);
  CheckReport out;
  for (std::uint64_t t = 1; t <= T; ++t) {
    for (int i = 0; i < K; ++i) {
      n[static_cast<std::size_t>(i)] *= gamma;
      w[static_cast<std::size_t>(i)] *= gamma;
    }
    const auto a = static_cast<std::size_t>(pulls[t - 1] - 1);
    n[a] += 1.0;
    w[a] += env.mean(t, pulls[t - 1]);

    if (pseudo != nullptr && !pseudo->pseudo_stationary(t)) continue;
    for (int i = 1; i <= K; ++i) {
      const double ni = n[static_cast<std::size_t>(i - 1)];
      if (!(ni > 0.0)) continue;
      const double discounted = w[static_cast<std::size_t>(i - 1)] / ni;
      const double lhs = std::fabs(env.mean(t, i) - discounted);
      const double rhs = u_t(gamma, ni) + extra_slack;
      ++out.checked;
      out.worst_margin = std::max(out.worst_margin, lhs - rhs);
      if (lhs - rhs > kDriftSlack) {
        out.violations.push_back({t, i, lhs, rhs});
      }
    }
  }
  return out;
}

}  // namespace

CheckReport check_mean_drift_abrupt(const std::vector<int>& pulls,
                                    const AbruptEnv& env, double gamma) {
  const auto pseudo =
      pseudo_stationary_set(env.breakpoints(), env.horizon(), gamma);
  return mean_drift_scan(pulls, env, gamma, 0.0, &pseudo);
}

CheckReport check_mean_drift_abrupt(const std::vector<int>& pulls,
                                    const AbruptEnv& env, double gamma,
                                    const PseudoStationarySet& pseudo) {
  return mean_drift_scan(pulls, env, gamma, 0.0, &pseudo);
}

CheckReport check_mean_drift_smooth(const std::vector<int>& pulls,
                                    const Environment& env, double gamma,
                                    double sigma) {
  if (!(sigma >= 0.0)) {
    throw std::domain_error("sigma must be nonnegative");
  }
  return mean_drift_scan(pulls, env, gamma, sigma * d_gamma(gamma), nullptr);
}

CheckReport check_counting_lemma(const std::vector<int>& pulls, int arms,
                                 double gamma,
                                 const std::vector<double>& thresholds) {
  if (arms < 1) throw std::invalid_argument("need at least 1 arm");
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::domain_error("gamma must lie in (0, 1)");
  }
  const auto T = static_cast<std::uint64_t>(pulls.size());
  require_valid_pulls(pulls, T, arms);

  std::vector<double> n(static_cast<std::size_t>(arms), 0.0);
  std::vector<std::vector<std::uint64_t>> below(
      thresholds.size(), std::vector<std::uint64_t>(arms, 0));
  for (std::uint64_t t = 1; t <= T; ++t) {
    for (auto& v : n) v *= gamma;
    const auto a = static_cast<std::size_t>(pulls[t - 1] - 1);
    n[a] += 1.0;
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
      if (n[a] < thresholds[k]) below[k][a] += 1;
    }
  }

  CheckReport out;
  const double pieces = std::ceil(static_cast<double>(T) * (1.0 - gamma));
  const double growth = 1.0 / gamma_power(gamma);
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    const double bound = pieces * thresholds[k] * growth;
    for (int i = 1; i <= arms; ++i) {
      const auto lhs =
          static_cast<double>(below[k][static_cast<std::size_t>(i - 1)]);
      ++out.checked;
      out.worst_margin = std::max(out.worst_margin, lhs - bound);
      if (lhs > bound) out.violations.push_back({0, i, lhs, bound});
    }
  }
  return out;
}

CheckReport check_lipschitz(const Environment& env, double sigma) {
  if (!(sigma >= 0.0)) {
    throw std::domain_error("sigma must be nonnegative");
  }
  CheckReport out;
  for (std::uint64_t t = 1; t + 1 <= env.horizon(); ++t) {
    for (int i = 1; i <= env.arms(); ++i) {
      const double lhs = std::fabs(env.mean(t + 1, i) - env.mean(t, i));
      ++out.checked;
      out.worst_margin = std::max(out.worst_margin, lhs - sigma);
      if (lhs > sigma + kLipschitzSlack) {
        out.violations.push_back({t, i, lhs, sigma});
      }
    }
  }
  return out;
}

BetaRange beta_feasible_range(double delta, double sigma, double T, double f,
                              double p) {
  if (!(delta > 0.0 && sigma > 0.0 && f > 0.0 && p > 0.0)) {
    throw std::domain_error("delta, sigma, f and p must be positive");
  }
  if (!(T >= 3.0)) throw std::domain_error("T must be at least 3");

  const double ln_t = std::log(T);
  const double gap_term = 1.0 - std::log(delta / (12.0 * sigma * ln_t)) / ln_t;
  const double tie_term =
      0.5 - std::log(std::sqrt(f * delta / (24.0 * p * ln_t))) / ln_t;
  BetaRange out;
  out.lo = std::max(gap_term, tie_term);
  out.feasible = out.lo <= 1.0;
  return out;
}

}  // namespace nsbandit
