#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qsi/polarization.hpp"
#include "qsi/rng.hpp"

using namespace qsi;

TEST_CASE("protocol states are the exact angles") {
  CHECK(PolarizationState::h().angle_deg == 0.0);
  CHECK(PolarizationState::v().angle_deg == 90.0);
  CHECK(PolarizationState::d().angle_deg == 45.0);
  CHECK(PolarizationState::a().angle_deg == 135.0);
}

TEST_CASE("angles normalize into [0, 180)") {
  CHECK(PolarizationState::from_degrees(180.0).angle_deg == 0.0);
  CHECK(PolarizationState::from_degrees(270.0).angle_deg == 90.0);
  CHECK(PolarizationState::from_degrees(-45.0).angle_deg == 135.0);
  CHECK(PolarizationState::from_degrees(360.0).angle_deg == 0.0);
  // rounding seam: a hair below zero must not land on 180
  const double near = PolarizationState::from_degrees(-1e-16).angle_deg;
  CHECK(near >= 0.0);
  CHECK(near < 180.0);

  StreamRng rng(7, 0);
  for (int i = 0; i < 2000; ++i) {
    const double raw = (rng.next_unit() - 0.5) * 4000.0;
    const double a = PolarizationState::from_degrees(raw).angle_deg;
    CHECK(a >= 0.0);
    CHECK(a < 180.0);
  }
}

TEST_CASE("orthogonal flips by 90 and is an involution on protocol states") {
  CHECK(PolarizationState::h().orthogonal() == PolarizationState::v());
  CHECK(PolarizationState::v().orthogonal() == PolarizationState::h());
  CHECK(PolarizationState::d().orthogonal() == PolarizationState::a());
  CHECK(PolarizationState::a().orthogonal() == PolarizationState::d());
}

TEST_CASE("detection probability: the projective cos^2 rule") {
  CHECK(detection_probability(PolarizationState::h(), MeasurementBasis::hv()) == 1.0);
  CHECK(detection_probability(PolarizationState::d(), MeasurementBasis::hv()) ==
        doctest::Approx(0.5).epsilon(1e-12));
  // against the algebraic form of cos^2(22.5 deg)
  CHECK(detection_probability(PolarizationState::h(), MeasurementBasis::breidbart()) ==
        doctest::Approx(oracle::kCosSq22_5).epsilon(1e-12));
}

TEST_CASE("aligned and orthogonal probabilities sum to one") {
  StreamRng rng(11, 0);
  for (int i = 0; i < 1000; ++i) {
    const auto state = PolarizationState::from_degrees(rng.next_unit() * 180.0);
    const MeasurementBasis basis{rng.next_unit() * 90.0};
    const double p_aligned = detection_probability(state, basis);
    // orthogonal-axis probability computed on its own
    const double c = std::cos(deg_to_rad(state.angle_deg - (basis.theta_deg + 90.0)));
    CHECK(p_aligned + c * c == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("measure collapses to the basis axis at the u threshold") {
  const Outcome aligned = measure(PolarizationState::h(), MeasurementBasis::hv(), 0.3);
  CHECK(aligned.axis == Axis::Aligned);
  CHECK(aligned.as_state == PolarizationState::h());

  const Outcome d_low = measure(PolarizationState::d(), MeasurementBasis::hv(), 0.49);
  CHECK(d_low.axis == Axis::Aligned);
  CHECK(d_low.as_state == PolarizationState::h());

  const Outcome d_high = measure(PolarizationState::d(), MeasurementBasis::hv(), 0.51);
  CHECK(d_high.axis == Axis::Orthogonal);
  CHECK(d_high.as_state == PolarizationState::v());
}

TEST_CASE("measure is deterministic in (state, basis, u)") {
  StreamRng rng(23, 0);
  for (int i = 0; i < 500; ++i) {
    const auto state = PolarizationState::from_degrees(rng.next_unit() * 180.0);
    const MeasurementBasis basis{rng.next_unit() * 90.0};
    const double u = rng.next_unit();
    CHECK(measure(state, basis, u) == measure(state, basis, u));
  }
}

TEST_CASE("jammer error rate: closed form and Breidbart minimum") {
  CHECK(jammer_error_rate(22.5) == doctest::Approx(oracle::kBreidbartMin).epsilon(1e-12));
  CHECK(jammer_error_rate(22.5) == doctest::Approx(0.146447).epsilon(1e-5));
  CHECK(jammer_error_rate(0.0) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(jammer_error_rate(45.0) == doctest::Approx(0.25).epsilon(1e-12));

  // unique minimum over [0, 90) at 22.5
  const double min_value = jammer_error_rate(22.5);
  for (int i = 0; i < 900; ++i) {
    const double theta = i * 0.1;
    if (theta == 22.5) continue;
    CHECK(jammer_error_rate(theta) > min_value);
  }
}

TEST_CASE("receiver error rate is 25% at every angle") {
  CHECK(bob_error_rate(22.5) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(bob_error_rate(0.0) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(bob_error_rate(37.0) == doctest::Approx(0.25).epsilon(1e-12));
  for (int i = 0; i < 900; ++i) {
    CHECK(std::abs(bob_error_rate(i * 0.1) - 0.25) < 1e-12);
  }
}

TEST_CASE("mutual information: endpoints and quoted values") {
  CHECK(mutual_information(0.0) == 1.0);
  CHECK(mutual_information(1.0) == 1.0);  // deterministic flipping carries full information
  CHECK(mutual_information(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::abs(mutual_information(0.25) - 0.1887) < 5e-5);
  CHECK(std::abs(mutual_information(0.0084) - 0.93) < 5e-3);
}

TEST_CASE("mutual information: symmetric about 1/2, decreasing on [0, 1/2]") {
  double prev = mutual_information(0.0);
  for (int i = 1; i <= 500; ++i) {
    const double e = i * 0.001;
    const double mi = mutual_information(e);
    CHECK(mi < prev);
    CHECK(mi == doctest::Approx(mutual_information(1.0 - e)).epsilon(1e-12));
    prev = mi;
  }
  CHECK_THROWS_AS(mutual_information(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(mutual_information(1.1), std::invalid_argument);
}

TEST_CASE("preparation basis pairs states with their bases") {
  CHECK(preparation_basis(PolarizationState::h()) == MeasurementBasis::hv());
  CHECK(preparation_basis(PolarizationState::v()) == MeasurementBasis::hv());
  CHECK(preparation_basis(PolarizationState::d()) == MeasurementBasis::da());
  CHECK(preparation_basis(PolarizationState::a()) == MeasurementBasis::da());
}

TEST_CASE("port indexing and labels") {
  CHECK(port_index(PolarizationState::h()) == 0);
  CHECK(port_index(PolarizationState::v()) == 1);
  CHECK(port_index(PolarizationState::d()) == 2);
  CHECK(port_index(PolarizationState::a()) == 3);
  CHECK_THROWS_AS(port_index(PolarizationState::from_degrees(30.0)), std::invalid_argument);
  CHECK(std::string(state_label(PolarizationState::a())) == "A");
  CHECK(std::string(basis_label(MeasurementBasis::da())) == "DA");
  CHECK_THROWS_AS(basis_label(MeasurementBasis::breidbart()), std::invalid_argument);
}

TEST_CASE("basis range validation") {
  CHECK(MeasurementBasis::at(0.0) == MeasurementBasis::hv());
  CHECK_THROWS_AS(MeasurementBasis::at(90.0), std::invalid_argument);
  CHECK_THROWS_AS(MeasurementBasis::at(-1.0), std::invalid_argument);
}
