#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsbandit/core.hpp"
#include "nsbandit/environments.hpp"

namespace nsbandit {

// Lower edge of the discount range the regret analysis covers. Helpers
// that need D(gamma) accept the closed endpoint; the bound evaluators
// require gamma strictly above it.
inline const double kTheoryGammaLow = 1.0 - std::exp(-1.0);

// Thrown when the smooth-setting feasibility condition fails; the message
// names the violated inequality with both sides evaluated.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Length of the look-back window that defines pseudo-stationarity:
// D(gamma) = log((1-gamma)^2 log(1/(1-gamma))) / log gamma.
// Increasing in gamma; accepts gamma in [1-1/e, 1).
double d_gamma(double gamma);

// Concentration radius of the discounted mean at discounted count n:
// U = sqrt((1-gamma) log(1/(1-gamma)) / n). Requires gamma in (0,1), n > 0.
double u_t(double gamma, double n);

// Gaussian lower-tail lower bound (1/sqrt(2 pi)) * x/(1+x^2) * exp(-x^2/2),
// evaluated in log space so reciprocals of tiny tails stay finite.
// Requires x > 0.
double gaussian_tail_F(double x);

enum class Setting { kAbrupt, kSmooth };

// Inputs shared by the closed-form evaluators. Fields are read selectively:
// the abrupt bound uses delta_t, the smooth bound uses delta/sigma/beta and
// the change-count model f_a2/delta_0.
struct TheoryParams {
  double gamma = 0.99;
  double T = 1e5;
  double b_t = 10.0;       // number of piecewise-stationary phases
  double delta_t = 0.1;    // abrupt minimum sub-optimality gap
  double delta = 0.3;      // smooth gap parameter
  double sigma = 1e-3;     // per-round drift bound
  double beta = 1.0;       // near-tie round-count exponent
  double f_a2 = 5000.0;    // near-tie round-count constant
  double delta_0 = 1.0 / 3.0;
  double mu_max = 1.0;
  double tau_max = 0.2;
};

// Per-arm pull-count bound for the abrupt setting. The total-regret bound
// is K times per_arm. The constants make the value astronomically loose at
// practical scales; the evaluator exists for structural checks
// (finiteness, monotonicity, parameter feasibility), not calibration.
struct Theorem1Bound {
  double pseudo_stationary_term;  // b_t * D(gamma)
  double concentration_term;
  double per_arm;
  double c_const;   // e^25 + 12 + 1/F(mu_max/tau_max)
  double l_gamma;   // multiplier of the concentration term
};

// `lemma_form_l` drops the gamma^{1/(1-gamma)} factor from l_gamma's
// denominator, matching the statement used inside the appendix proof
// rather than the theorem display.
Theorem1Bound theorem1_bound(const TheoryParams& p, bool lemma_form_l = false);

// Per-arm pull-count bound for the smooth setting. Requires
// 2 sigma D(gamma) < delta/3 <= delta_0; throws InfeasibleError naming the
// failing inequality otherwise.
struct Theorem2Bound {
  double near_tie_term;  // f_a2 * delta * T^beta
  double concentration_term;
  double per_arm;
  double m_gamma;
};

Theorem2Bound theorem2_bound(const TheoryParams& p);

// Horizon-tuned discount choices. The formula can leave the analysis
// domain for small T; in_theory_domain flags gamma > 1-1/e.
struct GammaChoice {
  double gamma;
  bool in_theory_domain;
};

GammaChoice gamma_for_abrupt(double T, double b_t);   // 1 - sqrt(b_t/T)
GammaChoice gamma_for_smooth(double T, double beta);  // 1 - T^(beta-1)

// Threshold A(gamma) below which discounted counts are considered small:
// n^2 log(1/(1-gamma)) / gap^2 with n = 12 sqrt(2) + 3 sqrt(1-gamma); the
// gap is delta_t (abrupt) or delta/3 - 2 sigma D(gamma) (smooth).
double a_gamma(const TheoryParams& p, Setting setting);

// Rounds partitioned by whether the whole look-back window (t-window, t],
// clipped at round 1, lies inside one phase.
struct PseudoStationarySet {
  std::vector<std::uint8_t> pseudo;  // index t-1; 1 when t is pseudo-stationary
  std::uint64_t excluded = 0;        // rounds failing the window condition

  bool pseudo_stationary(std::uint64_t t) const {
    return pseudo[static_cast<std::size_t>(t - 1)] != 0;
  }
};

PseudoStationarySet pseudo_stationary_window(
    const std::vector<std::uint64_t>& breakpoints, std::uint64_t T,
    double window);

// Same with window = d_gamma(gamma). |excluded| <= phases * D(gamma).
PseudoStationarySet pseudo_stationary_set(
    const std::vector<std::uint64_t>& breakpoints, std::uint64_t T,
    double gamma);

// Rounds where some pair of arms has mean gap below delta.
std::vector<std::uint64_t> h_delta_set(const Environment& env, double delta);

// Checks |{t : min pairwise gap < delta}| <= f * delta * T^beta per delta.
struct Assumption2Report {
  struct Entry {
    double delta;
    std::uint64_t h_size;
    double bound;
    bool ok;
  };
  std::vector<Entry> entries;

  bool ok() const {
    for (const auto& e : entries) {
      if (!e.ok) return false;
    }
    return true;
  }
};

Assumption2Report check_assumption2(const Environment& env,
                                    const std::vector<double>& deltas,
                                    double f, double beta);

// Outcome of a deterministic inequality scan. worst_margin is the largest
// lhs - rhs observed (negative when every check passed with room).
struct Violation {
  std::uint64_t t;  // round, or 0 for aggregate checks
  int arm;          // 0 when not arm-specific
  double lhs;
  double rhs;
};

struct CheckReport {
  std::uint64_t checked = 0;
  std::vector<Violation> violations;
  double worst_margin = -HUGE_VAL;

  bool ok() const { return violations.empty(); }
};

// Drift of the discounted mean against the true mean. pulls[t-1] is the
// arm played at round t. The abrupt check asserts
// |mean_t(i) - discounted_mean_t(i)| <= U_t at pseudo-stationary rounds;
// the smooth check adds sigma * D(gamma) of slack and covers every round.
// Both are pointwise facts about the discounting, so violations beyond
// floating-point slack indicate a bug, not bad luck.
CheckReport check_mean_drift_abrupt(const std::vector<int>& pulls,
                                    const AbruptEnv& env, double gamma);

// Same check restricted to the rounds a caller-supplied set marks
// pseudo-stationary. A set built from a window shorter than the one the
// discount implies admits rounds where the inequality genuinely fails,
// which is how a wrong window computation shows up as a counterexample.
CheckReport check_mean_drift_abrupt(const std::vector<int>& pulls,
                                    const AbruptEnv& env, double gamma,
                                    const PseudoStationarySet& pseudo);

CheckReport check_mean_drift_smooth(const std::vector<int>& pulls,
                                    const Environment& env, double gamma,
                                    double sigma);

// For every arm and every threshold A: the number of rounds where the arm
// is played while its post-update discounted count is below A is at most
// ceil(T(1-gamma)) * A * gamma^{-1/(1-gamma)}.
CheckReport check_counting_lemma(const std::vector<int>& pulls, int arms,
                                 double gamma,
                                 const std::vector<double>& thresholds);

// Per-round mean movement never exceeds sigma (plus float slack).
CheckReport check_lipschitz(const Environment& env, double sigma);

// Exponent range [lo, 1] on which the smooth-setting guarantees can bind,
// given gap delta, drift sigma, horizon T, change-count constant f and
// sign-change count p. Empty (lo > 1) is reported as infeasible.
struct BetaRange {
  double lo;
  bool feasible;
};

BetaRange beta_feasible_range(double delta, double sigma, double T, double f,
                              double p);

}  // namespace nsbandit
