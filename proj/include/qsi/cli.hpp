#pragma once

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "qsi/analysis.hpp"
#include "qsi/entangle.hpp"
#include "qsi/polarization.hpp"
#include "qsi/protocol.hpp"
#include "qsi/report.hpp"
#include "qsi/scene.hpp"

namespace qsi {

struct ThetaGrid {
  double start_deg = 0.0;
  double stop_deg = 45.0;
  double step_deg = 2.5;
};

struct ChannelConfig {
  std::string type = "honest";             // honest | intercept-resend | pns
  double eavesdrop_theta_deg = 0.0;
  std::string resend = "eavesdrop-basis";  // eavesdrop-basis | fixed
  std::string fixed_state = "H";
  double single_photon_theta_deg = 22.5;
};

/// One experiment bundle: a config file plus flag overrides fully
/// determines a run, and identical bundles reproduce byte-identical
/// outputs.
struct RunConfig {
  std::uint64_t seed = 1;
  std::uint64_t frames = 10000;
  std::uint64_t pairs = 100000;
  int workers = 1;
  std::string object_mask = "aircraft";  // built-in name or PBM path
  std::string spoof_mask = "bird";
  double mean_photons_per_pulse = 1.0;
  double pbs_extinction = 0.0084;
  double detection_efficiency = 1.0;
  ChannelConfig channel;
  double range_m = 150.0;
  ThetaGrid theta_grid;
  std::uint64_t frames_per_theta = 160000;
  std::filesystem::path out_dir = "qsi-out";
};

inline PolarizationState parse_state_name(const std::string& name) {
  for (std::size_t i = 0; i < kPortNames.size(); ++i) {
    if (name == kPortNames[i]) return kProtocolStates[i];
  }
  throw std::invalid_argument("unknown polarization state '" + name +
                              "' (expected H, V, D or A)");
}

/// Mask names resolve to the built-ins; anything else is a PBM path.
inline ObjectMask resolve_mask(const std::string& name_or_path) {
  if (name_or_path == "aircraft" || name_or_path == "bird") {
    return builtin_mask(name_or_path);
  }
  return load_mask(name_or_path);
}

inline RunConfig parse_run_config(const Json& j, RunConfig cfg = {}) {
  cfg.seed = j.value("seed", cfg.seed);
  cfg.frames = j.value("frames", cfg.frames);
  cfg.pairs = j.value("pairs", cfg.pairs);
  cfg.workers = j.value("workers", cfg.workers);
  cfg.object_mask = j.value("object", cfg.object_mask);
  cfg.spoof_mask = j.value("spoof", cfg.spoof_mask);
  if (j.contains("source")) {
    cfg.mean_photons_per_pulse =
        j["source"].value("mean_photons_per_pulse", cfg.mean_photons_per_pulse);
  }
  if (j.contains("detector")) {
    cfg.pbs_extinction = j["detector"].value("pbs_extinction", cfg.pbs_extinction);
    cfg.detection_efficiency =
        j["detector"].value("detection_efficiency", cfg.detection_efficiency);
  }
  if (j.contains("channel")) {
    const Json& c = j["channel"];
    cfg.channel.type = c.value("type", cfg.channel.type);
    cfg.channel.eavesdrop_theta_deg =
        c.value("eavesdrop_theta_deg", cfg.channel.eavesdrop_theta_deg);
    cfg.channel.resend = c.value("resend", cfg.channel.resend);
    cfg.channel.fixed_state = c.value("fixed_state", cfg.channel.fixed_state);
    cfg.channel.single_photon_theta_deg =
        c.value("single_photon_theta_deg", cfg.channel.single_photon_theta_deg);
  }
  cfg.range_m = j.value("range_m", cfg.range_m);
  if (j.contains("theta_grid")) {
    const Json& g = j["theta_grid"];
    cfg.theta_grid.start_deg = g.value("start", cfg.theta_grid.start_deg);
    cfg.theta_grid.stop_deg = g.value("stop", cfg.theta_grid.stop_deg);
    cfg.theta_grid.step_deg = g.value("step", cfg.theta_grid.step_deg);
  }
  cfg.frames_per_theta = j.value("frames_per_theta", cfg.frames_per_theta);
  if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();

  if (cfg.channel.type != "honest" && cfg.channel.type != "intercept-resend" &&
      cfg.channel.type != "pns") {
    throw std::invalid_argument("unknown channel type '" + cfg.channel.type + "'");
  }
  if (cfg.channel.resend != "eavesdrop-basis" && cfg.channel.resend != "fixed") {
    throw std::invalid_argument("unknown resend policy '" + cfg.channel.resend + "'");
  }
  return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {}) {
  const std::string text = detail::read_text_file(path);
  return parse_run_config(Json::parse(text), std::move(base));
}

inline ChannelModel build_channel(const RunConfig& cfg) {
  if (cfg.channel.type == "honest") {
    return HonestChannel{resolve_mask(cfg.object_mask)};
  }
  if (cfg.channel.type == "intercept-resend") {
    const ResendPolicy policy =
        cfg.channel.resend == "fixed"
            ? ResendPolicy::fixed(parse_state_name(cfg.channel.fixed_state))
            : ResendPolicy::eavesdrop_basis();
    return InterceptResendChannel{cfg.channel.eavesdrop_theta_deg,
                                  resolve_mask(cfg.spoof_mask), policy};
  }
  return PnsChannel{resolve_mask(cfg.object_mask), resolve_mask(cfg.spoof_mask),
                    cfg.channel.single_photon_theta_deg};
}

/// The part of the config echoed into reports: physics only. Execution
/// details (workers, output paths) stay out so that reruns at different
/// worker counts stay byte-identical.
inline Json config_echo_json(const RunConfig& cfg) {
  Json channel;
  channel["type"] = cfg.channel.type;
  if (cfg.channel.type == "intercept-resend") {
    channel["eavesdrop_theta_deg"] = cfg.channel.eavesdrop_theta_deg;
    channel["resend"] = cfg.channel.resend;
    if (cfg.channel.resend == "fixed") channel["fixed_state"] = cfg.channel.fixed_state;
  }
  if (cfg.channel.type == "pns") {
    channel["single_photon_theta_deg"] = cfg.channel.single_photon_theta_deg;
  }
  Json echo;
  echo["object"] = cfg.object_mask;
  if (cfg.channel.type != "honest") echo["spoof"] = cfg.spoof_mask;
  echo["source"] = Json{{"mean_photons_per_pulse", cfg.mean_photons_per_pulse}};
  echo["detector"] = Json{{"pbs_extinction", cfg.pbs_extinction},
                          {"detection_efficiency", cfg.detection_efficiency}};
  echo["channel"] = channel;
  return echo;
}

namespace detail {

inline std::string format_fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline std::string format_compact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace detail

/// Verdict-driven exit codes: 0 secure, 2 compromised, 3 inconclusive.
/// Config and I/O failures surface as exceptions and exit 1 in main.
inline int run_image_command(const RunConfig& cfg) {
  const SourceConfig source{cfg.mean_photons_per_pulse, cfg.frames};
  const DetectorConfig detector{cfg.pbs_extinction, cfg.detection_efficiency};
  const ChannelModel channel = build_channel(cfg);

  const RunRecord run = run_simulation(source, detector, channel, cfg.seed, cfg.workers);
  const ErrorReport report = tally_errors(run.events);
  const SecurityVerdict verdict = security_verdict(report);
  const ImageSet images = reconstruct_image(run);

  std::filesystem::create_directories(cfg.out_dir);
  write_json(build_report_json(report, verdict, config_echo_json(cfg), cfg.seed, cfg.frames),
             cfg.out_dir / "report.json");
  write_csv(event_log_csv(run), cfg.out_dir / "events.csv");
  write_image_pgm(images.composite, cfg.out_dir / "composite.pgm");
  static constexpr const char* kPortFiles[4] = {"port_h.pgm", "port_v.pgm", "port_d.pgm",
                                                "port_a.pgm"};
  for (std::size_t i = 0; i < 4; ++i) {
    write_image_pgm(images.ports[i], cfg.out_dir / kPortFiles[i]);
  }

  std::printf("detections=%llu average_error=%.6f ci=[%.6f,%.6f] verdict=%s mi=%.4f\n",
              static_cast<unsigned long long>(report.n_detected), report.average_error,
              report.ci_low, report.ci_high, verdict_label(verdict.verdict),
              verdict.mutual_information_bits);
  switch (verdict.verdict) {
    case Verdict::Secure: return 0;
    case Verdict::Compromised: return 2;
    case Verdict::Inconclusive: return 3;
  }
  return 3;
}

/// Sweep the eavesdropping angle: analytic and Monte Carlo error rates
/// for both the jammer and the receiver, one CSV row per angle.
inline int run_attack_curve_command(const RunConfig& cfg) {
  const ObjectMask spoof = resolve_mask(cfg.spoof_mask);
  const SourceConfig source{cfg.mean_photons_per_pulse, cfg.frames_per_theta};
  const DetectorConfig detector{0.0, 1.0};  // isolate the channel's contribution

  std::string csv = "theta,e_J_analytic,e_J_mc,e_B_analytic,e_B_mc\n";
  int row = 0;
  for (double theta = cfg.theta_grid.start_deg; theta < cfg.theta_grid.stop_deg + 1e-9;
       theta += cfg.theta_grid.step_deg, ++row) {
    const ChannelModel channel =
        InterceptResendChannel{theta, spoof, ResendPolicy::eavesdrop_basis()};
    // Decorrelate rows without touching the frame-stream scheme.
    const std::uint64_t row_seed = StreamRng(cfg.seed, 0x777000 + row).next_u64();
    const RunRecord run = run_simulation(source, detector, channel, row_seed, cfg.workers);

    std::uint64_t jammer_wrong = 0, intercepted = 0, errors = 0, detections = 0;
    for (const auto& ev : run.events) {
      if (ev.jammer_guess) {
        ++intercepted;
        if (!(*ev.jammer_guess == ev.sent_state)) ++jammer_wrong;
      }
      if (ev.detected()) {
        ++detections;
        if (ev.is_error.value()) ++errors;
      }
    }
    const double e_j_mc =
        intercepted ? static_cast<double>(jammer_wrong) / intercepted : 0.0;
    const double e_b_mc = detections ? static_cast<double>(errors) / detections : 0.0;
    csv += detail::format_compact(theta);
    csv += ',';
    csv += detail::format_fixed6(jammer_error_rate(theta));
    csv += ',';
    csv += detail::format_fixed6(e_j_mc);
    csv += ',';
    csv += detail::format_fixed6(bob_error_rate(theta));
    csv += ',';
    csv += detail::format_fixed6(e_b_mc);
    csv += '\n';
  }

  std::filesystem::create_directories(cfg.out_dir);
  write_csv(csv, cfg.out_dir / "curve.csv");
  std::printf("attack curve: %d rows -> %s\n", row, (cfg.out_dir / "curve.csv").c_str());
  return 0;
}

/// Bell-test ranging run: 0 when |S| > 2, otherwise 2.
inline int run_chsh_command(const RunConfig& cfg) {
  const double round_trip_s = 2.0 * cfg.range_m / kSpeedOfLight;
  PairChannel channel;
  if (cfg.channel.type == "honest") {
    channel = HonestPairChannel{round_trip_s};
  } else if (cfg.channel.type == "intercept-resend") {
    channel = InterceptResendPairChannel{cfg.channel.eavesdrop_theta_deg, round_trip_s};
  } else {
    throw std::invalid_argument("chsh supports channel types honest and intercept-resend");
  }

  const ChshRunResult result = run_chsh(channel, cfg.pairs, cfg.seed, PairBases{},
                                        cfg.workers);

  Json echo;
  echo["channel"] = Json{{"type", cfg.channel.type},
                         {"eavesdrop_theta_deg", cfg.channel.eavesdrop_theta_deg}};
  echo["range_m"] = cfg.range_m;

  std::filesystem::create_directories(cfg.out_dir);
  write_json(build_chsh_json(result, echo), cfg.out_dir / "chsh.json");

  std::printf("pairs=%llu S=%.4f secure=%s distance=%.6f m\n",
              static_cast<unsigned long long>(result.pairs), result.record.s,
              result.record.secure ? "yes" : "no", result.range.distance_m);
  return result.record.secure ? 0 : 2;
}

}  // namespace qsi
