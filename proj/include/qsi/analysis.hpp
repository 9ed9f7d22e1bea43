#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>

#include "qsi/polarization.hpp"
#include "qsi/protocol.hpp"
#include "qsi/scene.hpp"

namespace qsi {

/// Error rate above which an image cannot have come through an un-jammed
/// channel (intercept-resend floor).
inline constexpr double kSecureErrorBound = 0.25;

namespace detail {

/// Inverse standard normal CDF (Acklam's rational approximation,
/// |relative error| < 1.15e-9 over (0,1)).
inline double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("probability must lie in (0,1)");
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double q, r;
  if (p < p_low) {
    q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p <= 1.0 - p_low) {
    q = p - 0.5;
    r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  q = std::sqrt(-2.0 * std::log(1.0 - p));
  return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
         ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

}  // namespace detail

struct WilsonInterval {
  double low = 0.0;
  double high = 0.0;
};

/// Wilson score interval for a binomial proportion. Chosen over Wald for
/// correct coverage near 0 and 1, where both the honest (~0.8%) and the
/// jammed (~50%) regimes live.
inline WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials,
                                      double confidence) {
  if (trials == 0) throw std::invalid_argument("wilson interval needs trials > 0");
  if (successes > trials) throw std::invalid_argument("successes exceed trials");
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw std::invalid_argument("confidence must lie in (0,1)");
  }
  const double z = detail::inverse_normal_cdf(0.5 + confidence / 2.0);
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2n = z * z / n;
  const double denom = 1.0 + z2n;
  const double center = (p + z2n / 2.0) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2n / (4.0 * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

struct ChannelErrorCount {
  std::uint64_t errors = 0;
  std::uint64_t total = 0;

  double rate() const {
    return total == 0 ? 0.0 : static_cast<double>(errors) / static_cast<double>(total);
  }
};

/// Detection-error statistics keyed by the SENT state, plus the pooled
/// average with its score interval.
struct ErrorReport {
  std::array<ChannelErrorCount, 4> per_channel{};  // indexed by port_index of sent state
  std::uint64_t n_detected = 0;
  std::uint64_t n_errors = 0;
  double average_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double confidence = 0.99;
};

inline ErrorReport tally_errors(std::span<const PhotonEvent> events,
                                double confidence = 0.99) {
  ErrorReport report;
  report.confidence = confidence;
  for (const auto& ev : events) {
    if (!ev.detected()) continue;
    auto& channel = report.per_channel[port_index(ev.sent_state)];
    ++channel.total;
    ++report.n_detected;
    if (ev.is_error.value()) {
      ++channel.errors;
      ++report.n_errors;
    }
  }
  if (report.n_detected == 0) {
    throw std::invalid_argument("no detections to tally");
  }
  report.average_error =
      static_cast<double>(report.n_errors) / static_cast<double>(report.n_detected);
  const WilsonInterval ci = wilson_interval(report.n_errors, report.n_detected, confidence);
  report.ci_low = ci.low;
  report.ci_high = ci.high;
  return report;
}

enum class Verdict { Secure, Compromised, Inconclusive };

inline const char* verdict_label(Verdict v) {
  switch (v) {
    case Verdict::Secure: return "secure";
    case Verdict::Compromised: return "compromised";
    case Verdict::Inconclusive: return "inconclusive";
  }
  throw std::logic_error("unreachable");
}

/// Secure only when the whole confidence interval sits below the 25%
/// bound; compromised only when it sits above; otherwise the sample is
/// too small to call.
struct SecurityVerdict {
  Verdict verdict = Verdict::Inconclusive;
  double bound = kSecureErrorBound;
  double mutual_information_bits = 0.0;
};

inline SecurityVerdict security_verdict(const ErrorReport& report) {
  SecurityVerdict out;
  out.mutual_information_bits = mutual_information(report.average_error);
  if (report.ci_high < kSecureErrorBound) {
    out.verdict = Verdict::Secure;
  } else if (report.ci_low > kSecureErrorBound) {
    out.verdict = Verdict::Compromised;
  } else {
    out.verdict = Verdict::Inconclusive;
  }
  return out;
}

/// The four per-port images plus their pixelwise sum.
struct ImageSet {
  CountGrid composite;
  std::array<CountGrid, 4> ports;
};

inline ImageSet reconstruct_image(const RunRecord& run) {
  ImageSet out{CountGrid(run.grid_width, run.grid_height), run.port_grids};
  for (const auto& port : out.ports) out.composite += port;
  return out;
}

}  // namespace qsi
