#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <thread>
#include <variant>
#include <vector>

#include "qsi/polarization.hpp"
#include "qsi/rng.hpp"
#include "qsi/scene.hpp"

namespace qsi {

/// Weak-coherent pulse source: Poissonian photon number, polarization
/// drawn uniformly from the four protocol states.
struct SourceConfig {
  double mean_photons_per_pulse = 1.0;
  std::uint64_t frames = 1;

  void validate() const {
    if (!(mean_photons_per_pulse > 0.0)) {
      throw std::invalid_argument("mean_photons_per_pulse must be > 0");
    }
    if (frames < 1) throw std::invalid_argument("frames must be >= 1");
  }
};

/// pbs_extinction: probability a photon exits the wrong beam-splitter
/// port (symmetric flip). detection_efficiency: probability an arriving
/// photon registers at all.
struct DetectorConfig {
  double pbs_extinction = 0.0084;
  double detection_efficiency = 1.0;

  void validate() const {
    if (!(pbs_extinction >= 0.0 && pbs_extinction <= 0.5)) {
      throw std::invalid_argument("pbs_extinction must lie in [0, 0.5]");
    }
    if (!(detection_efficiency > 0.0 && detection_efficiency <= 1.0)) {
      throw std::invalid_argument("detection_efficiency must lie in (0, 1]");
    }
  }
};

struct ResendPolicy {
  enum class Kind { EavesdropBasis, FixedState };

  Kind kind = Kind::EavesdropBasis;
  PolarizationState fixed_state{};  // used only when kind == FixedState

  static ResendPolicy eavesdrop_basis() { return {Kind::EavesdropBasis, {}}; }
  static ResendPolicy fixed(PolarizationState s) { return {Kind::FixedState, s}; }
};

/// The object reflects honestly; absorbing pixels swallow the pulse.
struct HonestChannel {
  ObjectMask mask;
};

/// The object intercepts every pulse, measures it in a basis at
/// eavesdrop_theta degrees from HV, resends per the policy, and paints a
/// spoof position.
struct InterceptResendChannel {
  double eavesdrop_theta_deg = 0.0;  // [0, 90)
  ObjectMask spoof_mask;
  ResendPolicy resend_policy = ResendPolicy::eavesdrop_basis();
};

/// Multi-photon pulses are split: the jammer keeps one photon, measures
/// the pulse in both bases (identifying the state perfectly), and resends
/// an exact copy at a spoof position -- no polarization error at all.
/// Single-photon pulses fall back to intercept-resend at
/// single_photon_theta_deg (Breidbart by default).
struct PnsChannel {
  ObjectMask mask;
  ObjectMask spoof_mask;
  double single_photon_theta_deg = 22.5;
};

using ChannelModel = std::variant<HonestChannel, InterceptResendChannel, PnsChannel>;

enum class ChannelAction {
  Passed,             // honest reflection reached the detector
  Absorbed,           // swallowed by the object, or an empty pulse
  InterceptedResent,  // measured and resent by the jammer
  Split,              // photon-number-splitting clone
};

/// One pulse's full lifecycle record.
struct PhotonEvent {
  std::uint64_t frame_index = 0;
  PolarizationState sent_state;
  MeasurementBasis sent_basis;
  PixelCoord true_pixel;
  int photon_count = 0;
  ChannelAction channel_action = ChannelAction::Absorbed;
  PolarizationState received_state;  // state arriving at the detector; valid unless Absorbed
  std::optional<PixelCoord> reported_pixel;
  std::optional<PolarizationState> jammer_guess;  // jammer's identification of sent_state
  std::optional<Outcome> detected_outcome;
  std::optional<bool> is_error;

  bool arrived() const { return channel_action != ChannelAction::Absorbed; }
  bool detected() const { return detected_outcome.has_value(); }

  bool operator==(const PhotonEvent&) const = default;
};

struct Pulse {
  PolarizationState state;
  MeasurementBasis basis;
  int photon_count = 0;
};

/// Draw one pulse: state uniform over {H,V,D,A}, basis implied by the
/// state, photon number Poissonian.
inline Pulse generate_pulse(const SourceConfig& cfg, StreamRng& rng) {
  const PolarizationState state = kProtocolStates[rng.uniform_index(4)];
  const int photons = rng.poisson(cfg.mean_photons_per_pulse);
  return {state, preparation_basis(state), photons};
}

namespace detail {

inline PixelCoord sample_spoof_pixel(const ObjectMask& spoof, StreamRng& rng) {
  const auto& pixels = spoof.reflective_pixels();
  if (pixels.empty()) {
    throw std::invalid_argument("spoof mask has no reflective pixels to paint");
  }
  return pixels[rng.uniform_index(static_cast<std::uint32_t>(pixels.size()))];
}

/// Intercept, measure at theta_e, record the jammer's identification, and
/// resend. The jammer reads its outcome in the sender's basis frame: the
/// aligned axis maps to the basis' aligned state, the orthogonal axis to
/// the orthogonal state.
inline void intercept_resend(PhotonEvent& ev, double theta_e_deg, const ObjectMask& spoof,
                             const ResendPolicy& policy, StreamRng& rng) {
  const MeasurementBasis eavesdrop{theta_e_deg};
  const Outcome collapsed = measure(ev.sent_state, eavesdrop, rng.next_unit());
  ev.jammer_guess = collapsed.axis == Axis::Aligned ? ev.sent_basis.aligned_state()
                                                    : ev.sent_basis.orthogonal_state();
  ev.received_state = policy.kind == ResendPolicy::Kind::FixedState ? policy.fixed_state
                                                                    : collapsed.as_state;
  ev.reported_pixel = sample_spoof_pixel(spoof, rng);
  ev.channel_action = ChannelAction::InterceptedResent;
}

}  // namespace detail

/// Propagate one pulse through the channel. Empty pulses are recorded as
/// Absorbed. Draw order is fixed, so results are a pure function of the
/// event and the stream.
inline PhotonEvent apply_channel(const ChannelModel& model, PhotonEvent ev, StreamRng& rng) {
  if (ev.photon_count < 1) {
    ev.channel_action = ChannelAction::Absorbed;
    return ev;
  }
  std::visit(
      [&](const auto& ch) {
        using T = std::decay_t<decltype(ch)>;
        if constexpr (std::is_same_v<T, HonestChannel>) {
          if (reflect(ch.mask, ev.true_pixel) == Reflection::Reflected) {
            ev.channel_action = ChannelAction::Passed;
            ev.received_state = ev.sent_state;  // honest bounce never disturbs polarization
            ev.reported_pixel = ev.true_pixel;
          } else {
            ev.channel_action = ChannelAction::Absorbed;
          }
        } else if constexpr (std::is_same_v<T, InterceptResendChannel>) {
          detail::intercept_resend(ev, ch.eavesdrop_theta_deg, ch.spoof_mask,
                                   ch.resend_policy, rng);
        } else {
          if (ev.photon_count >= 2) {
            // Both-basis measurement on the split photons identifies the
            // state exactly; the resent copy is error-free.
            ev.jammer_guess = ev.sent_state;
            ev.received_state = ev.sent_state;
            ev.reported_pixel = detail::sample_spoof_pixel(ch.spoof_mask, rng);
            ev.channel_action = ChannelAction::Split;
          } else {
            detail::intercept_resend(ev, ch.single_photon_theta_deg, ch.spoof_mask,
                                     ResendPolicy::eavesdrop_basis(), rng);
          }
        }
      },
      model);
  return ev;
}

/// Matched-basis detection: the measurement basis is always the basis the
/// photon was prepared in, so no sifting is needed. An error is a click in
/// the port orthogonal to the sent state.
inline PhotonEvent detect(PhotonEvent ev, const DetectorConfig& det, StreamRng& rng) {
  if (!ev.arrived()) return ev;
  if (!rng.bernoulli(det.detection_efficiency)) return ev;  // photon lost, no click
  Outcome outcome = measure(ev.received_state, ev.sent_basis, rng.next_unit());
  if (rng.bernoulli(det.pbs_extinction)) {
    outcome = flip_port(outcome, ev.sent_basis);
  }
  ev.detected_outcome = outcome;
  ev.is_error = !(outcome.as_state == ev.sent_state);
  return ev;
}

/// Full simulation output: every frame's event plus the four per-port
/// count grids, exactly reproducible from (configs, seed).
struct RunRecord {
  int grid_width = 0;
  int grid_height = 0;
  std::uint64_t seed = 0;
  std::vector<PhotonEvent> events;           // one per frame, indexed by frame
  std::array<CountGrid, 4> port_grids;       // indexed by port_index (H,V,D,A)

  std::uint64_t detections() const {
    std::uint64_t n = 0;
    for (const auto& ev : events) n += ev.detected() ? 1 : 0;
    return n;
  }

  bool operator==(const RunRecord&) const = default;
};

namespace detail {

/// The object plane the source illuminates (and the camera images).
inline const ObjectMask& channel_plane(const ChannelModel& model) {
  return std::visit(
      [](const auto& ch) -> const ObjectMask& {
        using T = std::decay_t<decltype(ch)>;
        if constexpr (std::is_same_v<T, InterceptResendChannel>) {
          return ch.spoof_mask;
        } else {
          return ch.mask;
        }
      },
      model);
}

inline void validate_channel(const ChannelModel& model) {
  std::visit(
      [](const auto& ch) {
        using T = std::decay_t<decltype(ch)>;
        if constexpr (std::is_same_v<T, InterceptResendChannel>) {
          if (!(ch.eavesdrop_theta_deg >= 0.0 && ch.eavesdrop_theta_deg < 90.0)) {
            throw std::invalid_argument("eavesdrop_theta_deg must lie in [0, 90)");
          }
          if (ch.spoof_mask.reflective_count() == 0) {
            throw std::invalid_argument("spoof mask has no reflective pixels");
          }
        } else if constexpr (std::is_same_v<T, PnsChannel>) {
          if (!(ch.single_photon_theta_deg >= 0.0 && ch.single_photon_theta_deg < 90.0)) {
            throw std::invalid_argument("single_photon_theta_deg must lie in [0, 90)");
          }
          if (ch.spoof_mask.reflective_count() == 0) {
            throw std::invalid_argument("spoof mask has no reflective pixels");
          }
          if (ch.spoof_mask.width() != ch.mask.width() ||
              ch.spoof_mask.height() != ch.mask.height()) {
            throw std::invalid_argument("object and spoof masks must share dimensions");
          }
        }
      },
      model);
}

inline PhotonEvent simulate_frame(std::uint64_t frame_index, const SourceConfig& src,
                                  const DetectorConfig& det, const ChannelModel& channel,
                                  const ObjectMask& plane, std::uint64_t seed) {
  StreamRng rng(seed, frame_index);
  const Pulse pulse = generate_pulse(src, rng);
  PhotonEvent ev;
  ev.frame_index = frame_index;
  ev.sent_state = pulse.state;
  ev.sent_basis = pulse.basis;
  ev.photon_count = pulse.photon_count;
  ev.true_pixel = sample_position(plane, rng.next_unit(), rng.next_unit());
  ev = apply_channel(channel, std::move(ev), rng);
  return detect(std::move(ev), det, rng);
}

}  // namespace detail

/// Run the frame loop. Each frame draws from its own counter-based stream
/// (seed, frame_index), so the record is byte-identical for any worker
/// count. At most one detection registers per frame.
inline RunRecord run_simulation(const SourceConfig& source, const DetectorConfig& detector,
                                const ChannelModel& channel, std::uint64_t seed,
                                int workers = 1) {
  source.validate();
  detector.validate();
  detail::validate_channel(channel);
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");

  const ObjectMask& plane = detail::channel_plane(channel);
  RunRecord run;
  run.grid_width = plane.width();
  run.grid_height = plane.height();
  run.seed = seed;
  run.events.resize(source.frames);
  for (auto& grid : run.port_grids) grid = CountGrid(plane.width(), plane.height());

  const std::uint64_t frames = source.frames;
  const auto simulate_range = [&](std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t i = begin; i < end; ++i) {
      run.events[i] = detail::simulate_frame(i, source, detector, channel, plane, seed);
    }
  };

  if (workers == 1 || frames < 2) {
    simulate_range(0, frames);
  } else {
    const std::uint64_t n = std::min<std::uint64_t>(workers, frames);
    std::vector<std::thread> pool;
    pool.reserve(n);
    for (std::uint64_t w = 0; w < n; ++w) {
      const std::uint64_t begin = frames * w / n;
      const std::uint64_t end = frames * (w + 1) / n;
      pool.emplace_back(simulate_range, begin, end);
    }
    for (auto& t : pool) t.join();
  }

  // Count accumulation is a frame-ordered pass over the finished events;
  // sums are commutative, so this is worker-count independent by
  // construction.
  for (const auto& ev : run.events) {
    if (ev.detected() && ev.reported_pixel) {
      run.port_grids[port_index(ev.detected_outcome->as_state)].add(*ev.reported_pixel);
    }
  }
  return run;
}

}  // namespace qsi
