#include "conserva.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "conserva/analysis.hpp"
#include "conserva/log.hpp"

#if defined(__GNUC__)
#define CONSERVA_EXPORT __attribute__((visibility("default")))
#else
#define CONSERVA_EXPORT
#endif

namespace {

thread_local std::string g_last_error;

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out != nullptr) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

nlohmann::json parse_options(const char* options_json) {
  if (options_json == nullptr || options_json[0] == '\0') return nlohmann::json::object();
  nlohmann::json j = nlohmann::json::parse(options_json);  // throws on bad input
  if (!j.is_object()) throw conserva::ParseError("(options)", "expected a JSON object");
  return j;
}

// Exceptions thrown anywhere below the C boundary map to status codes here.
conserva_status status_from_exception() {
  try {
    throw;
  } catch (const conserva::ParseError& e) {
    g_last_error = e.what();
    return CONSERVA_INPUT_ERROR;
  } catch (const nlohmann::json::exception& e) {
    g_last_error = e.what();
    return CONSERVA_INPUT_ERROR;
  } catch (const std::invalid_argument& e) {
    g_last_error = e.what();
    return CONSERVA_INPUT_ERROR;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CONSERVA_RUNTIME_ERROR;
  } catch (...) {
    g_last_error = "unknown error";
    return CONSERVA_RUNTIME_ERROR;
  }
}

conserva_status status_from_code(int exit_code) {
  switch (exit_code) {
    case 0: return CONSERVA_OK;
    case 2: return CONSERVA_NO_EQUILIBRIUM;
    case 3: return CONSERVA_EMPTY_FAMILY;
    case 1: return CONSERVA_INPUT_ERROR;
    default: return CONSERVA_RUNTIME_ERROR;
  }
}

double number_option(const nlohmann::json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw conserva::ParseError(key, "expected a number");
  return j[key].get<double>();
}

std::string string_option(const nlohmann::json& j, const char* key, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_string()) throw conserva::ParseError(key, "expected a string");
  return j[key].get<std::string>();
}

}  // namespace

struct conserva_system {
  conserva::SystemFile file;
};

extern "C" {

CONSERVA_EXPORT conserva_status conserva_system_from_json(const char* json_text,
                                                          conserva_system** out) {
  if (out == nullptr) return CONSERVA_INPUT_ERROR;
  *out = nullptr;
  if (json_text == nullptr) {
    g_last_error = "json_text is null";
    return CONSERVA_INPUT_ERROR;
  }
  try {
    auto* handle = new conserva_system{conserva::parse_system_json(json_text)};
    *out = handle;
    return CONSERVA_OK;
  } catch (...) {
    return status_from_exception();
  }
}

CONSERVA_EXPORT void conserva_system_free(conserva_system* system) { delete system; }

CONSERVA_EXPORT char* conserva_system_to_json(const conserva_system* system) {
  if (system == nullptr) return nullptr;
  try {
    return copy_string(conserva::system_to_json(system->file).dump(2));
  } catch (...) {
    status_from_exception();
    return nullptr;
  }
}

CONSERVA_EXPORT conserva_status conserva_analyze(const conserva_system* system,
                                                 const char* options_json, char** report_json) {
  if (system == nullptr || report_json == nullptr) {
    g_last_error = "null argument";
    return CONSERVA_INPUT_ERROR;
  }
  *report_json = nullptr;
  try {
    const nlohmann::json j = parse_options(options_json);
    conserva::AnalyzeOptions options;
    options.method = string_option(j, "method", options.method);
    options.rank_tol = number_option(j, "rank_tol", options.rank_tol);
    options.certificate_tol = number_option(j, "certificate_tol", options.certificate_tol);
    options.identity_samples =
        static_cast<int>(number_option(j, "identity_samples", options.identity_samples));
    options.orthogonality_samples = static_cast<int>(
        number_option(j, "orthogonality_samples", options.orthogonality_samples));
    options.seed =
        static_cast<std::uint64_t>(number_option(j, "seed", static_cast<double>(options.seed)));
    const conserva::CommandResult result = conserva::run_analyze(system->file, options);
    *report_json = copy_string(result.report.dump(2));
    return status_from_code(result.exit_code);
  } catch (...) {
    return status_from_exception();
  }
}

CONSERVA_EXPORT conserva_status conserva_convert(const conserva_system* system,
                                                 const char* to_kind, char** system_json) {
  if (system == nullptr || system_json == nullptr || to_kind == nullptr) {
    g_last_error = "null argument";
    return CONSERVA_INPUT_ERROR;
  }
  *system_json = nullptr;
  try {
    const conserva::CommandResult result = conserva::run_convert(system->file, to_kind);
    *system_json = copy_string(result.report.dump(2));
    return status_from_code(result.exit_code);
  } catch (...) {
    return status_from_exception();
  }
}

CONSERVA_EXPORT conserva_status conserva_classify(const conserva_system* system,
                                                  const char* options_json, char** report_json) {
  if (system == nullptr || report_json == nullptr) {
    g_last_error = "null argument";
    return CONSERVA_INPUT_ERROR;
  }
  *report_json = nullptr;
  try {
    const nlohmann::json j = parse_options(options_json);
    conserva::ClassifyOptions options;
    options.rank_tol = number_option(j, "rank_tol", options.rank_tol);
    options.certificate_tol = number_option(j, "certificate_tol", options.certificate_tol);
    if (j.contains("certificate"))
      options.certificate = conserva::matrix_from_json(j["certificate"], "certificate");
    const conserva::CommandResult result = conserva::run_classify(system->file, options);
    *report_json = copy_string(result.report.dump(2));
    return status_from_code(result.exit_code);
  } catch (const conserva::CertificateError& e) {
    g_last_error = e.what();
    return CONSERVA_INPUT_ERROR;
  } catch (...) {
    return status_from_exception();
  }
}

CONSERVA_EXPORT conserva_status conserva_check(const conserva_system* system,
                                               const char* options_json, char** report_json) {
  if (system == nullptr || report_json == nullptr) {
    g_last_error = "null argument";
    return CONSERVA_INPUT_ERROR;
  }
  *report_json = nullptr;
  try {
    const nlohmann::json j = parse_options(options_json);
    conserva::CheckOptions options;
    options.samples = static_cast<int>(number_option(j, "samples", options.samples));
    options.seed =
        static_cast<std::uint64_t>(number_option(j, "seed", static_cast<double>(options.seed)));
    options.rank_tol = number_option(j, "rank_tol", options.rank_tol);
    options.certificate_tol = number_option(j, "certificate_tol", options.certificate_tol);
    const conserva::CommandResult result = conserva::run_check(system->file, options);
    *report_json = copy_string(result.report.dump(2));
    return status_from_code(result.exit_code);
  } catch (...) {
    return status_from_exception();
  }
}

CONSERVA_EXPORT conserva_status conserva_simulate(const conserva_system* system,
                                                  const char* options_json, char** summary_json,
                                                  char** csv_text) {
  if (system == nullptr || summary_json == nullptr || csv_text == nullptr) {
    g_last_error = "null argument";
    return CONSERVA_INPUT_ERROR;
  }
  *summary_json = nullptr;
  *csv_text = nullptr;
  try {
    const nlohmann::json j = parse_options(options_json);
    conserva::SimulateOptions options;

    const std::string start = string_option(j, "start", "x0");
    if (start == "x0")
      options.start = conserva::SimulateOptions::Start::simplex;
    else if (start == "y0")
      options.start = conserva::SimulateOptions::Start::orthant;
    else if (start == "u0")
      options.start = conserva::SimulateOptions::Start::chart;
    else
      throw conserva::ParseError("start", "expected x0, y0, or u0");

    if (!j.contains("initial")) throw conserva::ParseError("initial", "required");
    options.initial = conserva::vector_from_json(j["initial"], "initial");

    const std::string method = string_option(j, "method", "rk45");
    if (method == "rk45")
      options.config.method = conserva::IntegratorConfig::Method::adaptive_rk45;
    else if (method == "rk4")
      options.config.method = conserva::IntegratorConfig::Method::fixed_rk4;
    else
      throw conserva::ParseError("method", "expected rk45 or rk4");

    options.config.t_end = number_option(j, "t_end", options.config.t_end);
    options.config.step = number_option(j, "step", options.config.step);
    options.config.abs_tol = number_option(j, "abs_tol", options.config.abs_tol);
    options.config.rel_tol = number_option(j, "rel_tol", options.config.rel_tol);
    options.config.record_every =
        static_cast<int>(number_option(j, "record_every", options.config.record_every));
    options.config.max_steps =
        static_cast<long>(number_option(j, "max_steps", static_cast<double>(options.config.max_steps)));

    const std::string observe = string_option(j, "observe", "H");
    if (observe == "H")
      options.observe_h = true;
    else if (observe == "none")
      options.observe_h = false;
    else
      throw conserva::ParseError("observe", "expected H or none");

    if (j.contains("time_scaled")) {
      if (!j["time_scaled"].is_boolean())
        throw conserva::ParseError("time_scaled", "expected a boolean");
      options.time_scaled_chart = j["time_scaled"].get<bool>();
    }
    if (j.contains("plot_data")) {
      if (!j["plot_data"].is_boolean())
        throw conserva::ParseError("plot_data", "expected a boolean");
      options.plot_data = j["plot_data"].get<bool>();
    }
    if (j.contains("certificate"))
      options.certificate = conserva::matrix_from_json(j["certificate"], "certificate");
    options.rank_tol = number_option(j, "rank_tol", options.rank_tol);
    options.certificate_tol = number_option(j, "certificate_tol", options.certificate_tol);

    conserva::SimulateResult result = conserva::run_simulate(system->file, options);
    if (result.plot_time_h) result.summary["plot_time_h"] = *result.plot_time_h;
    if (result.plot_phase) result.summary["plot_phase"] = *result.plot_phase;
    *summary_json = copy_string(result.summary.dump(2));
    *csv_text = copy_string(result.csv);
    return status_from_code(result.exit_code);
  } catch (...) {
    return status_from_exception();
  }
}

CONSERVA_EXPORT void conserva_string_free(char* text) { std::free(text); }

CONSERVA_EXPORT const char* conserva_last_error(void) { return g_last_error.c_str(); }

CONSERVA_EXPORT const char* conserva_version(void) { return "1.0.0"; }

}  // extern "C"
