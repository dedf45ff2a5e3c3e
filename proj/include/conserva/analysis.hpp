#pragma once

#include <nlohmann/json.hpp>

#include "conserva/conservation.hpp"
#include "conserva/dynamics.hpp"
#include "conserva/json_io.hpp"

namespace conserva {

// Shared implementation behind the C API and the CLI. Every command returns
// a JSON document plus the process exit code it implies:
//   0 success, 1 input error, 2 no formal equilibrium,
//   3 empty certificate family, 4 runtime or domain failure.
// Codes 2 and 3 still carry a full report.

struct CommandResult {
  nlohmann::json report;
  int exit_code = 0;
};

struct AnalyzeOptions {
  std::string method = "both";  // "general" | "reduced" | "both"
  double rank_tol = 1e-10;
  double certificate_tol = 1e-8;
  int identity_samples = 20;
  int orthogonality_samples = 100;
  std::uint64_t seed = 20260814;
};

CommandResult run_analyze(const SystemFile& file, const AnalyzeOptions& options);

CommandResult run_convert(const SystemFile& file, const std::string& to);

struct ClassifyOptions {
  std::optional<Matrix> certificate;  // searched for when absent
  double rank_tol = 1e-10;
  double certificate_tol = 1e-8;
};

CommandResult run_classify(const SystemFile& file, const ClassifyOptions& options);

struct CheckOptions {
  int samples = 20;
  std::uint64_t seed = 20260814;
  double rank_tol = 1e-10;
  double certificate_tol = 1e-8;
};

CommandResult run_check(const SystemFile& file, const CheckOptions& options);

struct SimulateOptions {
  enum class Start { simplex, orthant, chart };
  Start start = Start::simplex;
  Vector initial;
  bool time_scaled_chart = false;  // chart starts only: rescaled field
  IntegratorConfig config;
  bool observe_h = true;
  std::optional<Matrix> certificate;  // overrides the searched certificate
  bool plot_data = false;
  double rank_tol = 1e-10;
  double certificate_tol = 1e-8;
};

struct SimulateResult {
  nlohmann::json summary;
  std::string csv;
  // Present when plot_data was requested: (t, H) rows and phase-plane rows.
  std::optional<std::string> plot_time_h;
  std::optional<std::string> plot_phase;
  int exit_code = 0;
};

SimulateResult run_simulate(const SystemFile& file, const SimulateOptions& options);

// 17-significant-digit formatting used for all CSV output; round-trips
// doubles exactly.
std::string format_double(double v);

}  // namespace conserva
