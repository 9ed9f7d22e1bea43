#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <variant>
#include <vector>

#include "qsi/polarization.hpp"
#include "qsi/rng.hpp"

namespace qsi {

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s, exact by definition

/// Analyzer angle sets for the Bell test: the local photon is measured at
/// 0 or 45 degrees, the probe photon at +/-22.5 degrees.
struct PairBases {
  std::array<double, 2> alice_thetas_deg{0.0, 45.0};
  std::array<double, 2> bob_thetas_deg{22.5, -22.5};
};

/// Probe photon comes back untouched after round_trip_s seconds.
struct HonestPairChannel {
  double round_trip_s = 0.0;
};

/// Measure-and-prepare jammer: the probe photon is measured at
/// eavesdrop_theta degrees, collapsed, and a copy is resent. The channel
/// is separable, so it cannot violate the CHSH bound.
struct InterceptResendPairChannel {
  double eavesdrop_theta_deg = 0.0;
  double round_trip_s = 0.0;
};

using PairChannel = std::variant<HonestPairChannel, InterceptResendPairChannel>;

inline double channel_round_trip_s(const PairChannel& channel) {
  return std::visit([](const auto& ch) { return ch.round_trip_s; }, channel);
}

struct PairSample {
  int alice_outcome = 0;  // +1 / -1
  int bob_outcome = 0;    // +1 / -1
  double arrival_time_s = 0.0;
};

/// Sample joint analyzer outcomes for one entangled pair prepared in the
/// state (|HH> + |VV>)/sqrt(2).
///
/// Honest channel: P(outcomes equal) = cos^2(alpha - beta), split evenly
/// between ++ and --, and likewise for unequal outcomes -- the closed-form
/// joint distribution of the ideal state.
///
/// Intercept-resend: the jammer's measurement collapses the pair; the
/// local photon is then measured on the collapsed state, and the probe is
/// a fresh copy of the collapsed state.
inline PairSample sample_pair(double alice_theta_deg, double bob_theta_deg,
                              const PairChannel& channel, StreamRng& rng,
                              double emission_time_s = 0.0) {
  PairSample out;
  out.arrival_time_s = emission_time_s + channel_round_trip_s(channel);
  std::visit(
      [&](const auto& ch) {
        using T = std::decay_t<decltype(ch)>;
        if constexpr (std::is_same_v<T, HonestPairChannel>) {
          const double delta = deg_to_rad(alice_theta_deg - bob_theta_deg);
          const double c = std::cos(delta);
          const bool equal = rng.next_unit() < c * c;
          const int sign = rng.next_unit() < 0.5 ? +1 : -1;
          out.alice_outcome = sign;
          out.bob_outcome = equal ? sign : -sign;
        } else {
          // Jammer's outcome axis: theta_e or theta_e + 90, equal odds.
          const bool jammer_aligned = rng.next_unit() < 0.5;
          const double collapsed_deg =
              ch.eavesdrop_theta_deg + (jammer_aligned ? 0.0 : 90.0);
          const double ca = std::cos(deg_to_rad(alice_theta_deg - collapsed_deg));
          out.alice_outcome = rng.next_unit() < ca * ca ? +1 : -1;
          const double cb = std::cos(deg_to_rad(bob_theta_deg - collapsed_deg));
          out.bob_outcome = rng.next_unit() < cb * cb ? +1 : -1;
        }
      },
      channel);
  return out;
}

/// Coincidence counts for one analyzer-angle pair.
struct CoincidenceTally {
  std::uint64_t n_pp = 0;
  std::uint64_t n_pm = 0;
  std::uint64_t n_mp = 0;
  std::uint64_t n_mm = 0;

  void add(int alice_outcome, int bob_outcome) {
    if (alice_outcome > 0) {
      ++(bob_outcome > 0 ? n_pp : n_pm);
    } else {
      ++(bob_outcome > 0 ? n_mp : n_mm);
    }
  }

  std::uint64_t total() const { return n_pp + n_pm + n_mp + n_mm; }

  CoincidenceTally& operator+=(const CoincidenceTally& o) {
    n_pp += o.n_pp;
    n_pm += o.n_pm;
    n_mp += o.n_mp;
    n_mm += o.n_mm;
    return *this;
  }

  bool operator==(const CoincidenceTally&) const = default;
};

/// Correlation E = (n++ + n-- - n+- - n-+) / total.
inline double correlation(const CoincidenceTally& tally) {
  const std::uint64_t total = tally.total();
  if (total == 0) throw std::invalid_argument("empty coincidence tally");
  const double agree = static_cast<double>(tally.n_pp + tally.n_mm);
  const double disagree = static_cast<double>(tally.n_pm + tally.n_mp);
  return (agree - disagree) / static_cast<double>(total);
}

/// S = E(a,b) + E(a,b') + E(a',b) - E(a',b'), with correlations ordered
/// (a,b), (a,b'), (a',b), (a',b'). This sign placement maximizes |S| for
/// the ideal state at the protocol angles, reaching 2*sqrt(2).
inline double chsh_s(const std::array<double, 4>& correlations) {
  return correlations[0] + correlations[1] + correlations[2] - correlations[3];
}

/// CHSH statistic and verdict: |S| > 2 certifies a non-separable channel.
struct ChshRecord {
  std::array<double, 4> correlations{};
  double s = 0.0;
  bool secure = false;

  static ChshRecord from_tallies(const std::array<CoincidenceTally, 4>& tallies) {
    ChshRecord rec;
    for (std::size_t i = 0; i < 4; ++i) rec.correlations[i] = correlation(tallies[i]);
    rec.s = chsh_s(rec.correlations);
    rec.secure = std::abs(rec.s) > 2.0;
    return rec;
  }
};

struct RangeEstimate {
  double round_trip_s = 0.0;
  double distance_m = 0.0;
};

/// distance = c * (arrival - emission) / 2.
inline RangeEstimate estimate_range(double emission_time_s, double arrival_time_s) {
  if (arrival_time_s < emission_time_s) {
    throw std::invalid_argument("arrival precedes emission");
  }
  const double dt = arrival_time_s - emission_time_s;
  return {dt, kSpeedOfLight * dt / 2.0};
}

struct ChshRunResult {
  std::array<CoincidenceTally, 4> tallies{};  // (a,b), (a,b'), (a',b), (a',b')
  ChshRecord record;
  RangeEstimate range;
  std::uint64_t pairs = 0;
  std::uint64_t seed = 0;
};

/// Run `pairs` trials with analyzer angles chosen uniformly per side.
/// Pair i draws from stream (seed, i); tallies are commutative sums, so
/// the result is identical for any worker count.
inline ChshRunResult run_chsh(const PairChannel& channel, std::uint64_t pairs,
                              std::uint64_t seed, const PairBases& bases = {},
                              int workers = 1) {
  if (pairs < 1) throw std::invalid_argument("pairs must be >= 1");
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");

  const auto tally_range = [&](std::uint64_t begin, std::uint64_t end,
                               std::array<CoincidenceTally, 4>& out) {
    for (std::uint64_t i = begin; i < end; ++i) {
      StreamRng rng(seed, i);
      const std::uint32_t a_idx = rng.uniform_index(2);
      const std::uint32_t b_idx = rng.uniform_index(2);
      const PairSample s = sample_pair(bases.alice_thetas_deg[a_idx],
                                       bases.bob_thetas_deg[b_idx], channel, rng);
      out[a_idx * 2 + b_idx].add(s.alice_outcome, s.bob_outcome);
    }
  };

  ChshRunResult result;
  result.pairs = pairs;
  result.seed = seed;
  if (workers == 1 || pairs < 2) {
    tally_range(0, pairs, result.tallies);
  } else {
    const std::uint64_t n = std::min<std::uint64_t>(workers, pairs);
    std::vector<std::array<CoincidenceTally, 4>> partial(n);
    std::vector<std::thread> pool;
    pool.reserve(n);
    for (std::uint64_t w = 0; w < n; ++w) {
      pool.emplace_back(tally_range, pairs * w / n, pairs * (w + 1) / n,
                        std::ref(partial[w]));
    }
    for (auto& t : pool) t.join();
    for (const auto& part : partial) {
      for (std::size_t k = 0; k < 4; ++k) result.tallies[k] += part[k];
    }
  }

  result.record = ChshRecord::from_tallies(result.tallies);
  // Noiseless timing model: every pair arrives at exactly the configured
  // round trip, so the estimate comes from the first pair's sample.
  StreamRng rng0(seed, 0);
  rng0.uniform_index(2);
  rng0.uniform_index(2);
  const PairSample first = sample_pair(bases.alice_thetas_deg[0], bases.bob_thetas_deg[0],
                                       channel, rng0);
  result.range = estimate_range(0.0, first.arrival_time_s);
  return result;
}

}  // namespace qsi
