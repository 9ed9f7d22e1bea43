// qsi -- quantum-secured imaging and ranging simulator, batch driver.
//
//   qsi simulate image        --config configs/image_honest.json
//   qsi simulate attack-curve --config configs/attack_curve.json
//   qsi simulate chsh         --config configs/chsh_honest.json
//
// Exit codes: 0 secure / ok, 1 config or I/O error, 2 compromised or Bell
// test failed, 3 inconclusive.

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qsi/cli.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> frames;
  std::optional<std::uint64_t> pairs;
  std::optional<int> workers;
  std::optional<std::string> out_dir;
};

void add_common_flags(CLI::App* cmd, Overrides& ov) {
  cmd->add_option("--config", ov.config_path, "JSON experiment bundle")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", ov.seed, "master seed (overrides config)");
  cmd->add_option("--frames", ov.frames, "frame budget (overrides config)");
  cmd->add_option("--pairs", ov.pairs, "entangled-pair budget (overrides config)");
  cmd->add_option("--workers", ov.workers, "simulation worker threads");
  cmd->add_option("--out", ov.out_dir, "output directory");
}

// Precedence: built-in defaults < QSI_OUT_DIR < config file < flags.
qsi::RunConfig assemble_config(const Overrides& ov) {
  qsi::RunConfig cfg;
  if (const char* env = std::getenv("QSI_OUT_DIR")) cfg.out_dir = env;
  if (!ov.config_path.empty()) cfg = qsi::load_run_config(ov.config_path, std::move(cfg));
  if (ov.seed) cfg.seed = *ov.seed;
  if (ov.frames) cfg.frames = *ov.frames;
  if (ov.pairs) cfg.pairs = *ov.pairs;
  if (ov.workers) cfg.workers = *ov.workers;
  if (ov.out_dir) cfg.out_dir = *ov.out_dir;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Photon-level simulator of polarization-secured imaging and ranging"};
  app.require_subcommand(1);

  CLI::App* simulate = app.add_subcommand("simulate", "run an experiment");
  simulate->require_subcommand(1);

  Overrides ov;
  CLI::App* image = simulate->add_subcommand("image", "imaging run with security verdict");
  CLI::App* curve = simulate->add_subcommand("attack-curve",
                                             "error rates vs eavesdropping angle");
  CLI::App* chsh = simulate->add_subcommand("chsh", "Bell-test ranging run");
  add_common_flags(image, ov);
  add_common_flags(curve, ov);
  add_common_flags(chsh, ov);

  CLI11_PARSE(app, argc, argv);

  try {
    const qsi::RunConfig cfg = assemble_config(ov);
    if (image->parsed()) return qsi::run_image_command(cfg);
    if (curve->parsed()) return qsi::run_attack_curve_command(cfg);
    return qsi::run_chsh_command(cfg);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
