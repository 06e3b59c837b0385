#include "nsbandit/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace nsbandit {
namespace {

constexpr std::uint64_t kM0 = 0xD2E7470EE14C6C93ull;
constexpr std::uint64_t kM1 = 0xCA5A826395121157ull;
constexpr std::uint64_t kW0 = 0x9E3779B97F4A7C15ull;
constexpr std::uint64_t kW1 = 0xBB67AE8584CAA73Bull;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi,
                    std::uint64_t& lo) {
  unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  hi = static_cast<std::uint64_t>(p >> 64);
  lo = static_cast<std::uint64_t>(p);
}

}  // namespace

std::array<std::uint64_t, 4> philox4x64(const std::array<std::uint64_t, 4>& ctr,
                                        const std::array<std::uint64_t, 2>& key) {
  std::uint64_t c0 = ctr[0], c1 = ctr[1], c2 = ctr[2], c3 = ctr[3];
  std::uint64_t k0 = key[0], k1 = key[1];
  for (int round = 0; round < 10; ++round) {
    std::uint64_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, c0, hi0, lo0);
    mulhilo(kM1, c2, hi1, lo1);
    c0 = hi1 ^ c1 ^ k0;
    c1 = lo1;
    c2 = hi0 ^ c3 ^ k1;
    c3 = lo0;
    k0 += kW0;
    k1 += kW1;
  }
  return {c0, c1, c2, c3};
}

double u64_to_unit(std::uint64_t x) {
  return (static_cast<double>(x >> 12) + 0.5) * 0x1p-52;
}

double inv_normal_cdf(double u) {
  if (!(u > 0.0 && u < 1.0)) {
    throw std::domain_error("inv_normal_cdf: argument must lie in (0,1)");
  }
  const double q = u - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        q * (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                   6.7265770927008700853e4) *
                      r +
                  4.5921953931549871457e4) *
                     r +
                 1.3731693765509461125e4) *
                    r +
                1.9715909503065514427e3) *
                   r +
               1.3314166789178437745e2) *
                  r +
              3.3871328727963666080e0);
    const double den =
        (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
              3.9307895800092710610e4) *
                 r +
             2.1213794301586595867e4) *
                r +
            5.3941960214247511077e3) *
               r +
           6.8718700749205790830e2) *
              r +
          4.2313330701600911252e1) *
             r +
         1.0);
    return num / den;
  }
  double r = q < 0.0 ? u : 1.0 - u;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        ((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
             2.41780725177450611770e-1) *
                r +
            1.27045825245236838258e0) *
               r +
           3.64784832476320460504e0) *
              r +
          5.76949722146069140550e0) *
             r +
         4.63033784615654529590e0) *
            r +
        1.42343711074968357734e0;
    const double den =
        ((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
             1.51986665636164571966e-2) *
                r +
            1.48103976427480074590e-1) *
               r +
           6.89767334985100004550e-1) *
              r +
          1.67638483018380384940e0) *
             r +
         2.05319162663775882187e0) *
            r +
        1.0;
    val = num / den;
  } else {
    r -= 5.0;
    const double num =
        ((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
             1.24266094738807843860e-3) *
                r +
            2.65321895265761230930e-2) *
               r +
           2.96560571828504891230e-1) *
              r +
          1.78482653991729133580e0) *
             r +
         5.46378491116411436990e0) *
            r +
        6.65790464350110377720e0;
    const double den =
        ((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
             1.84631831751005468180e-5) *
                r +
            7.86869131145613259100e-4) *
               r +
           1.48753612908506148525e-2) *
              r +
          1.36929880922735805310e-1) *
             r +
         5.99832206555887937690e-1) *
            r +
        1.0;
    val = num / den;
  }
  return q < 0.0 ? -val : val;
}

std::uint64_t SlotRng::next_u64() {
  if (pos_ == 4) {
    buf_ = philox4x64({block_, slot_, 0, 0}, key_);
    ++block_;
    pos_ = 0;
  }
  return buf_[pos_++];
}

double SlotRng::uniform() { return u64_to_unit(next_u64()); }

double SlotRng::normal(double mean, double sd) {
  return mean + sd * inv_normal_cdf(uniform());
}

double SlotRng::gamma(double shape) {
  if (!(shape > 0.0)) {
    throw std::invalid_argument("gamma: shape must be positive");
  }
  if (shape < 1.0) {
    // Boost a sub-unit shape through Gamma(a) = Gamma(a+1) * U^(1/a).
    const double u = uniform();
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    const double x = inv_normal_cdf(uniform());
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double SlotRng::beta(double a, double b) {
  const double x = gamma(a);
  const double y = gamma(b);
  const double s = x + y;
  if (s <= 0.0) return a / (a + b);  // both draws underflowed
  return x / s;
}

bool SlotRng::bernoulli(double p) { return uniform() < p; }

std::uint64_t SlotRng::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("below: n must be positive");
  auto v = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
  return v < n ? v : n - 1;
}

}  // namespace nsbandit
