#pragma once

#include <array>
#include <cstdint>

namespace nsbandit {

// Philox4x64-10 block function: four 64-bit outputs as a pure function of
// (counter, key). Counter-based generation lets every draw be addressed
// and replayed in isolation, which is what makes episodes deterministic
// regardless of evaluation order or thread count.
std::array<std::uint64_t, 4> philox4x64(const std::array<std::uint64_t, 4>& ctr,
                                        const std::array<std::uint64_t, 2>& key);

// Maps a 64-bit word to (0,1) using the top 52 bits, centered on the grid.
// Both endpoints (2^-53 and 1-2^-53) are exact in double precision, so the
// result is never 0 or 1.
double u64_to_unit(std::uint64_t x);

// Inverse standard normal CDF, Wichura's PPND16 rational approximations.
// Absolute error below 1e-13 over the full (0,1) range reachable from
// u64_to_unit. Throws std::domain_error outside (0,1).
double inv_normal_cdf(double u);

// Stream-id layout for experiments: one stream per (run, role). Policies
// each get a private role so adding a policy never perturbs the draws seen
// by the environment or by any other policy.
struct StreamId {
  static constexpr std::uint64_t kMeans = 1;    // environment instance draws
  static constexpr std::uint64_t kRewards = 2;  // reward noise, shared by all policies
  static constexpr std::uint64_t kPolicyBase = 16;

  static std::uint64_t of(std::uint64_t run, std::uint64_t role) {
    return (run << 32) | role;
  }
  static std::uint64_t policy_role(std::size_t position) {
    return kPolicyBase + static_cast<std::uint64_t>(position);
  }
};

// Draws from one addressable slot of a keyed stream. A slot owns 2^64
// blocks, so rejection samplers may consume any number of draws without
// shifting the values seen by other slots. Slots are cheap to construct;
// episodes open one per round (policies) or per (round, arm) (rewards).
class SlotRng {
 public:
  SlotRng(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t slot)
      : key_{seed, stream_id}, slot_(slot) {}

  std::uint64_t next_u64();

  double uniform();  // (0,1)
  double normal(double mean, double sd);
  double gamma(double shape);         // Marsaglia-Tsang; any shape > 0
  double beta(double a, double b);    // ratio of two gamma draws
  bool bernoulli(double p);

  // Uniform integer in [0, n), by scaling; n must be positive.
  std::uint64_t below(std::uint64_t n);

 private:
  std::array<std::uint64_t, 2> key_;
  std::uint64_t slot_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 4> buf_{};
  int pos_ = 4;
};

// Factory for the slots of one (seed, stream) pair.
class PhiloxStream {
 public:
  PhiloxStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_(stream_id) {}

  SlotRng at(std::uint64_t slot) const { return SlotRng(seed_, stream_, slot); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
};

}  // namespace nsbandit
