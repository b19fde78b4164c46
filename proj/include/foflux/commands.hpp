#pragma once

#include <string>

#include "foflux/config.hpp"

namespace foflux {

inline constexpr const char* kToolVersion = "1.0.0";

/// Subcommand entry points. Each writes its artifacts plus a JSON manifest
/// under cfg.out_dir, prints a short summary to stdout, and reports problems
/// by throwing (the CLI maps exception classes to exit codes). An empty
/// `model_path` means "fit the model here instead of loading one".

int cmd_generate(const RunConfig& cfg);
int cmd_fit(const RunConfig& cfg);
int cmd_predict(const RunConfig& cfg, const std::string& model_path,
                const std::string& points_path);
int cmd_evaluate(const RunConfig& cfg, const std::string& model_path);
int cmd_validate_uq(const RunConfig& cfg, const std::string& model_path);
int cmd_sensitivity(const RunConfig& cfg, const std::string& model_path);

}  // namespace foflux
