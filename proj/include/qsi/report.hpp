#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "qsi/analysis.hpp"
#include "qsi/entangle.hpp"
#include "qsi/protocol.hpp"
#include "qsi/scene.hpp"

namespace qsi {

using Json = nlohmann::ordered_json;  // insertion order preserved for stable output

/// JSON report for one imaging run. Key order is fixed so byte equality
/// can be asserted against golden files.
inline Json build_report_json(const ErrorReport& report, const SecurityVerdict& verdict,
                              const Json& config_echo, std::uint64_t seed,
                              std::uint64_t frames,
                              std::optional<double> chsh_s_value = std::nullopt) {
  Json j;
  j["config"] = config_echo;
  j["seed"] = seed;
  j["frames"] = frames;
  j["n_detected"] = report.n_detected;
  j["n_errors"] = report.n_errors;
  Json channels;
  for (std::size_t i = 0; i < 4; ++i) {
    Json c;
    c["errors"] = report.per_channel[i].errors;
    c["total"] = report.per_channel[i].total;
    c["rate"] = report.per_channel[i].rate();
    channels[kPortNames[i]] = c;
  }
  j["per_channel"] = channels;
  j["average_error"] = report.average_error;
  j["ci_low"] = report.ci_low;
  j["ci_high"] = report.ci_high;
  j["confidence"] = report.confidence;
  j["verdict"] = verdict_label(verdict.verdict);
  j["bound"] = verdict.bound;
  j["mutual_information_bits"] = verdict.mutual_information_bits;
  // The Inconclusive band is a finite-sample extension of the sharp 25%
  // bound; flag it so downstream readers know the convention.
  j["finite_sample_verdict"] = true;
  if (chsh_s_value) j["chsh_s"] = *chsh_s_value;
  return j;
}

/// JSON for a Bell-test ranging run.
inline Json build_chsh_json(const ChshRunResult& result, const Json& config_echo) {
  Json j;
  j["config"] = config_echo;
  j["seed"] = result.seed;
  j["pairs"] = result.pairs;
  static constexpr const char* kPairNames[4] = {"E_ab", "E_ab_prime", "E_a_prime_b",
                                                "E_a_prime_b_prime"};
  Json tallies;
  for (std::size_t i = 0; i < 4; ++i) {
    Json t;
    t["n_pp"] = result.tallies[i].n_pp;
    t["n_pm"] = result.tallies[i].n_pm;
    t["n_mp"] = result.tallies[i].n_mp;
    t["n_mm"] = result.tallies[i].n_mm;
    t["correlation"] = result.record.correlations[i];
    tallies[kPairNames[i]] = t;
  }
  j["tallies"] = tallies;
  j["s"] = result.record.s;
  j["secure"] = result.record.secure;
  j["range"] = Json{{"round_trip_s", result.range.round_trip_s},
                    {"distance_m", result.range.distance_m}};
  return j;
}

/// Per-frame event log. One row per emitted frame; empty cells where the
/// photon never produced the quantity.
inline std::string event_log_csv(const RunRecord& run) {
  std::string csv = "frame,sent_state,basis,true_x,true_y,reported_x,reported_y,port,is_error\n";
  for (const auto& ev : run.events) {
    csv += std::to_string(ev.frame_index);
    csv += ',';
    csv += state_label(ev.sent_state);
    csv += ',';
    csv += basis_label(ev.sent_basis);
    csv += ',';
    csv += std::to_string(ev.true_pixel.x);
    csv += ',';
    csv += std::to_string(ev.true_pixel.y);
    csv += ',';
    if (ev.reported_pixel) {
      csv += std::to_string(ev.reported_pixel->x);
      csv += ',';
      csv += std::to_string(ev.reported_pixel->y);
    } else {
      csv += ',';
    }
    csv += ',';
    if (ev.detected()) {
      csv += state_label(ev.detected_outcome->as_state);
      csv += ',';
      csv += ev.is_error.value() ? '1' : '0';
    } else {
      csv += ',';
    }
    csv += '\n';
  }
  return csv;
}

inline void write_json(const Json& j, const std::filesystem::path& path) {
  detail::write_text_file(path, j.dump(2) + "\n");
}

inline void write_csv(const std::string& csv, const std::filesystem::path& path) {
  detail::write_text_file(path, csv);
}

}  // namespace qsi
