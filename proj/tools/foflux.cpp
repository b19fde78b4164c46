#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "foflux/commands.hpp"
#include "foflux/errors.hpp"

namespace {

struct GlobalFlags {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string data_path;
};

void add_common_flags(CLI::App* cmd, GlobalFlags& flags) {
  cmd->add_option("-c,--config", flags.config_path, "INI configuration file");
  cmd->add_option("-o,--out", flags.out_dir, "output directory (overrides [run] out_dir)");
  cmd->add_option("-s,--seed", flags.seed, "master seed (overrides [run] seed)");
  cmd->add_option("-d,--data", flags.data_path, "dataset CSV (overrides [dataset] path)");
}

foflux::RunConfig resolve_config(const GlobalFlags& flags) {
  foflux::RunConfig cfg =
      flags.config_path.empty() ? foflux::RunConfig{} : foflux::load_config(flags.config_path);
  if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
  if (flags.seed) cfg.seed = *flags.seed;
  if (!flags.data_path.empty()) cfg.dataset_path = flags.data_path;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Forward-osmosis water-flux prediction: mechanistic solver with a "
               "GP residual corrector and decomposed uncertainty"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("foflux ") + foflux::kToolVersion);

  GlobalFlags flags;
  std::string model_path, points_path;
  std::optional<std::uint64_t> n_samples, n_points;

  CLI::App* generate = app.add_subcommand("generate", "sample a synthetic dataset");
  add_common_flags(generate, flags);

  CLI::App* fit = app.add_subcommand("fit", "train the hybrid model and save it");
  add_common_flags(fit, flags);

  CLI::App* predict = app.add_subcommand("predict", "predict fluxes with uncertainty bands");
  add_common_flags(predict, flags);
  predict->add_option("-m,--model", model_path, "model file (default <out>/model.json)");
  predict->add_option("-p,--points", points_path, "CSV of operating points");

  CLI::App* evaluate =
      app.add_subcommand("evaluate", "compare physics-only, pure-GP and hybrid accuracy");
  add_common_flags(evaluate, flags);
  evaluate->add_option("-m,--model", model_path, "model file (default: fit in place)");

  CLI::App* validate_uq =
      app.add_subcommand("validate-uq", "check Delta-method spread against Monte Carlo");
  add_common_flags(validate_uq, flags);
  validate_uq->add_option("-m,--model", model_path, "model file (default: fit in place)");
  validate_uq->add_option("-n,--n-samples", n_samples, "Monte-Carlo samples per point");
  validate_uq->add_option("-k,--n-points", n_points, "number of test points to check");

  CLI::App* sensitivity =
      app.add_subcommand("sensitivity", "rank features by mean flux sensitivity");
  add_common_flags(sensitivity, flags);
  sensitivity->add_option("-m,--model", model_path, "model file (default: fit in place)");
  sensitivity->add_option("-k,--n-points", n_points, "number of test points to average over");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(foflux::ExitCode::usage);
  }

  try {
    foflux::RunConfig cfg = resolve_config(flags);
    if (n_samples) cfg.uq_n_samples = *n_samples;
    if (n_points) cfg.uq_n_points = *n_points;

    if (generate->parsed()) return foflux::cmd_generate(cfg);
    if (fit->parsed()) return foflux::cmd_fit(cfg);
    if (predict->parsed()) return foflux::cmd_predict(cfg, model_path, points_path);
    if (evaluate->parsed()) return foflux::cmd_evaluate(cfg, model_path);
    if (validate_uq->parsed()) return foflux::cmd_validate_uq(cfg, model_path);
    if (sensitivity->parsed()) return foflux::cmd_sensitivity(cfg, model_path);
    return static_cast<int>(foflux::ExitCode::usage);
  } catch (const foflux::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return static_cast<int>(foflux::ExitCode::usage);
  }
}
