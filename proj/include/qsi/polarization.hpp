#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace qsi {

inline constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }

/// A pure linear polarization, stored as its angle from horizontal in
/// degrees. Linear polarizations are pi-periodic, so angles live in
/// [0, 180). The four protocol states are exact decimals: H=0, V=90,
/// D=45, A=135.
struct PolarizationState {
  double angle_deg = 0.0;

  static PolarizationState from_degrees(double deg) {
    double r = std::fmod(deg, 180.0);
    if (r < 0.0) r += 180.0;
    if (r >= 180.0) r -= 180.0;  // rounding at the seam, e.g. -1e-16 + 180
    return {r};
  }

  static constexpr PolarizationState h() { return {0.0}; }
  static constexpr PolarizationState v() { return {90.0}; }
  static constexpr PolarizationState d() { return {45.0}; }
  static constexpr PolarizationState a() { return {135.0}; }

  PolarizationState orthogonal() const { return from_degrees(angle_deg + 90.0); }

  bool operator==(const PolarizationState&) const = default;
};

/// The protocol alphabet, in port order H, V, D, A.
inline constexpr std::array<PolarizationState, 4> kProtocolStates{
    PolarizationState::h(), PolarizationState::v(), PolarizationState::d(),
    PolarizationState::a()};

inline constexpr std::array<const char*, 4> kPortNames{"H", "V", "D", "A"};

/// An orthogonal linear measurement basis whose aligned axis sits at
/// theta_deg in [0, 90) from horizontal; the other axis is theta+90.
struct MeasurementBasis {
  double theta_deg = 0.0;

  static constexpr MeasurementBasis hv() { return {0.0}; }
  static constexpr MeasurementBasis da() { return {45.0}; }
  static constexpr MeasurementBasis breidbart() { return {22.5}; }

  static MeasurementBasis at(double theta_deg) {
    if (!(theta_deg >= 0.0 && theta_deg < 90.0)) {
      throw std::invalid_argument("basis angle must lie in [0, 90) degrees, got " +
                                  std::to_string(theta_deg));
    }
    return {theta_deg};
  }

  PolarizationState aligned_state() const {
    return PolarizationState::from_degrees(theta_deg);
  }
  PolarizationState orthogonal_state() const {
    return PolarizationState::from_degrees(theta_deg + 90.0);
  }

  bool operator==(const MeasurementBasis&) const = default;
};

enum class Axis { Aligned, Orthogonal };

/// Result of a projective measurement: which axis clicked, and the
/// post-measurement state (the photon collapses onto the measured axis).
struct Outcome {
  Axis axis = Axis::Aligned;
  PolarizationState as_state;

  bool operator==(const Outcome&) const = default;
};

/// Probability that `state` exits the aligned port of `basis`:
/// cos^2 of the angle between them. The orthogonal port gets the rest.
inline double detection_probability(PolarizationState state, MeasurementBasis basis) {
  const double c = std::cos(deg_to_rad(state.angle_deg - basis.theta_deg));
  return c * c;
}

/// Sample the projective rule with one unit-uniform draw u in [0,1).
/// The outcome state is the measured axis, not the input state; this
/// collapse is what makes intercept-resend destructive.
inline Outcome measure(PolarizationState state, MeasurementBasis basis, double u) {
  if (u < detection_probability(state, basis)) {
    return {Axis::Aligned, basis.aligned_state()};
  }
  return {Axis::Orthogonal, basis.orthogonal_state()};
}

/// Flip an outcome to the other port of the same basis (PBS extinction).
inline Outcome flip_port(const Outcome& o, MeasurementBasis basis) {
  if (o.axis == Axis::Aligned) return {Axis::Orthogonal, basis.orthogonal_state()};
  return {Axis::Aligned, basis.aligned_state()};
}

/// Intercept-resend jammer's own misidentification rate as a function of
/// the angle theta (degrees, [0,90)) between the preparation basis and the
/// eavesdropping basis: (1/4)[(1-cos 2t)+(1-sin 2t)]. Minimum (2-sqrt2)/4
/// at 22.5 degrees, the Breidbart basis.
inline double jammer_error_rate(double theta_deg) {
  const double t = deg_to_rad(2.0 * theta_deg);
  return 0.25 * ((1.0 - std::cos(t)) + (1.0 - std::sin(t)));
}

/// Receiver error rate under intercept-resend when the jammer resends in
/// its eavesdropping basis: (1/4)[(1-cos^2 2t)+(1-sin^2 2t)], identically
/// 25% for every basis angle. This is the secure-image error bound.
inline double bob_error_rate(double theta_deg) {
  const double t = deg_to_rad(2.0 * theta_deg);
  const double c = std::cos(t);
  const double s = std::sin(t);
  return 0.25 * ((1.0 - c * c) + (1.0 - s * s));
}

/// Sender/receiver mutual information in bits per detected photon for a
/// binary symmetric error rate e: 1 + (1-e)log2(1-e) + e log2(e).
/// The 0*log2(0) terms are 0 by continuity.
inline double mutual_information(double bob_error) {
  if (!(bob_error >= 0.0 && bob_error <= 1.0)) {
    throw std::invalid_argument("error rate must lie in [0, 1], got " +
                                std::to_string(bob_error));
  }
  const auto plog2 = [](double p) { return p <= 0.0 ? 0.0 : p * std::log2(p); };
  return 1.0 + plog2(1.0 - bob_error) + plog2(bob_error);
}

/// Basis a protocol state was prepared in: H,V -> HV and D,A -> DA.
/// Works for any linear state (folds the angle into [0, 90)).
inline MeasurementBasis preparation_basis(PolarizationState state) {
  const double a = state.angle_deg;
  return {a < 90.0 ? a : a - 90.0};
}

/// Index of a protocol state in port order H=0, V=1, D=2, A=3.
inline std::size_t port_index(PolarizationState state) {
  for (std::size_t i = 0; i < kProtocolStates.size(); ++i) {
    if (state == kProtocolStates[i]) return i;
  }
  throw std::invalid_argument("not a protocol state: " +
                              std::to_string(state.angle_deg) + " deg");
}

inline const char* state_label(PolarizationState state) {
  return kPortNames[port_index(state)];
}

inline const char* basis_label(MeasurementBasis basis) {
  if (basis == MeasurementBasis::hv()) return "HV";
  if (basis == MeasurementBasis::da()) return "DA";
  throw std::invalid_argument("not a protocol basis: " +
                              std::to_string(basis.theta_deg) + " deg");
}

}  // namespace qsi
