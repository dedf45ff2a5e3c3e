// Command-line front end for the conserva shared library. Talks to the
// library exclusively through its C interface.

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "conserva.h"

namespace {

using nlohmann::json;

struct OwnedString {
  char* data = nullptr;
  ~OwnedString() { conserva_string_free(data); }
  std::string str() const { return data == nullptr ? std::string() : std::string(data); }
};

struct OwnedSystem {
  conserva_system* handle = nullptr;
  ~OwnedSystem() { conserva_system_free(handle); }
};

int fail(const std::string& message, int code) {
  std::cerr << "error: " << message << "\n";
  return code;
}

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

bool write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return false;
  out << content;
  return static_cast<bool>(out);
}

int load_system(const std::string& path, OwnedSystem& system) {
  const auto text = read_file(path);
  if (!text) return fail("cannot open '" + path + "'", 1);
  const conserva_status status = conserva_system_from_json(text->c_str(), &system.handle);
  if (status != CONSERVA_OK) return fail(conserva_last_error(), static_cast<int>(status));
  return 0;
}

int emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text << "\n";
    return 0;
  }
  if (!write_file(out_path, text + "\n")) return fail("cannot write '" + out_path + "'", 4);
  return 0;
}

// Collects the *.json files of a directory, sorted for reproducible order.
std::vector<std::string> input_set(const std::string& input, const std::string& input_dir) {
  namespace fs = std::filesystem;
  std::vector<std::string> files;
  if (!input.empty()) files.push_back(input);
  if (!input_dir.empty()) {
    for (const auto& entry : fs::directory_iterator(input_dir))
      if (entry.is_regular_file() && entry.path().extension() == ".json")
        files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
  }
  return files;
}

std::string stem_of(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

int run_one_analyze(const std::string& path, const json& options, const std::string& out_path) {
  OwnedSystem system;
  if (int rc = load_system(path, system); rc != 0) return rc;
  OwnedString report;
  const conserva_status status =
      conserva_analyze(system.handle, options.dump().c_str(), &report.data);
  if (report.data == nullptr) return fail(conserva_last_error(), static_cast<int>(status));
  if (int rc = emit(report.str(), out_path); rc != 0) return rc;
  return static_cast<int>(status);
}

int cmd_analyze(const std::string& input, const std::string& input_dir, const json& options,
                const std::string& out) {
  const auto files = input_set(input, input_dir);
  if (files.empty()) return fail("no input files", 1);
  if (files.size() == 1) return run_one_analyze(files[0], options, out);
  // Batch mode: one report per input, named after it.
  int worst = 0;
  for (const auto& path : files) {
    const std::string out_path =
        (out.empty() ? std::string(".") : out) + "/" + stem_of(path) + ".report.json";
    const int rc = run_one_analyze(path, options, out_path);
    worst = std::max(worst, rc);
    std::cerr << path << " -> " << out_path << " (exit " << rc << ")\n";
  }
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conserva: conserved-quantity detection for replicator and "
               "Lotka-Volterra systems"};
  app.require_subcommand(1);

  std::string input, input_dir, out, method = "both", to, certificate_path;
  double rank_tol = 1e-10, certificate_tol = 1e-8;
  std::uint64_t seed = 20260814;
  int samples = 20, orthogonality_samples = 100;

  auto* analyze = app.add_subcommand("analyze", "Full pipeline: equilibrium, certificate "
                                                "search, classification, verification");
  analyze->add_option("input", input, "system JSON file");
  analyze->add_option("--input-dir", input_dir, "analyze every *.json file in a directory");
  analyze->add_option("--method", method, "certificate search: general, reduced, or both")
      ->check(CLI::IsMember({"general", "reduced", "both"}));
  analyze->add_option("--rank-tol", rank_tol, "relative singular-value cutoff");
  analyze->add_option("--certificate-tol", certificate_tol, "certificate acceptance tolerance");
  analyze->add_option("--samples", samples, "sample count for identity checks");
  analyze->add_option("--orthogonality-samples", orthogonality_samples,
                      "sample count for the orthogonality check");
  analyze->add_option("--seed", seed, "sampling seed");
  analyze->add_option("--out", out, "write the report here instead of stdout "
                                    "(directory in --input-dir mode)");

  std::string start_x0, start_y0, start_u0, observe = "H", csv_path, plot_prefix;
  std::string sim_method = "rk45";
  double t_end = 10.0, step = 0.01, tol = 1e-10;
  long max_steps = 1000000;
  int record_every = 1;
  bool time_scaled = false;

  auto* simulate = app.add_subcommand("simulate", "Integrate a trajectory and track H");
  simulate->add_option("input", input, "system JSON file")->required();
  auto* x0_opt = simulate->add_option("--x0", start_x0, "simplex start, comma-separated");
  auto* y0_opt = simulate->add_option("--y0", start_y0, "orthant start, comma-separated");
  auto* u0_opt = simulate->add_option("--u0", start_u0, "chart start, comma-separated");
  x0_opt->excludes(y0_opt)->excludes(u0_opt);
  y0_opt->excludes(u0_opt);
  simulate->add_option("--t-end", t_end, "integration horizon");
  simulate->add_option("--method", sim_method, "rk45 (adaptive) or rk4 (fixed step)")
      ->check(CLI::IsMember({"rk45", "rk4"}));
  simulate->add_option("--tol", tol, "adaptive absolute and relative tolerance");
  simulate->add_option("--step", step, "fixed step size");
  simulate->add_option("--record-every", record_every, "record every k-th accepted step");
  simulate->add_option("--max-steps", max_steps, "step budget");
  simulate->add_option("--observe", observe, "H or none")
      ->check(CLI::IsMember({"H", "none"}));
  simulate->add_flag("--time-scaled", time_scaled,
                     "with --u0: integrate the time-rescaled chart field");
  simulate->add_option("--certificate", certificate_path,
                       "certificate matrix JSON overriding the search");
  simulate->add_option("--csv", csv_path, "trajectory CSV path (default: stdout)");
  simulate->add_option("--plot-data", plot_prefix,
                       "also write <prefix>_th.csv and <prefix>_phase.csv");
  simulate->add_option("--rank-tol", rank_tol, "relative singular-value cutoff");

  auto* convert = app.add_subcommand("convert", "Convert between the two system kinds");
  convert->add_option("input", input, "system JSON file")->required();
  convert->add_option("--to", to, "target kind: replicator or lv")
      ->required()
      ->check(CLI::IsMember({"replicator", "lv"}));
  convert->add_option("--out", out, "write the converted system here");

  auto* classify = app.add_subcommand("classify", "Classify the induced geometric structure");
  classify->add_option("input", input, "system JSON file")->required();
  classify->add_option("--certificate", certificate_path, "certificate matrix JSON");
  classify->add_option("--rank-tol", rank_tol, "relative singular-value cutoff");
  classify->add_option("--certificate-tol", certificate_tol, "certificate acceptance tolerance");
  classify->add_option("--out", out, "write the classification here");

  auto* check = app.add_subcommand("check", "Run the pointwise identity checks");
  check->add_option("input", input, "system JSON file")->required();
  check->add_option("--samples", samples, "sample count (0 = skip)");
  check->add_option("--seed", seed, "sampling seed");
  check->add_option("--rank-tol", rank_tol, "relative singular-value cutoff");
  check->add_option("--out", out, "write the verification report here");

  CLI11_PARSE(app, argc, argv);

  if (analyze->parsed()) {
    json options = {{"method", method},
                    {"rank_tol", rank_tol},
                    {"certificate_tol", certificate_tol},
                    {"identity_samples", samples},
                    {"orthogonality_samples", orthogonality_samples},
                    {"seed", seed}};
    return cmd_analyze(input, input_dir, options, out);
  }

  OwnedSystem system;
  if (int rc = load_system(input, system); rc != 0) return rc;

  if (convert->parsed()) {
    OwnedString converted;
    const conserva_status status = conserva_convert(system.handle, to.c_str(), &converted.data);
    if (converted.data == nullptr) return fail(conserva_last_error(), static_cast<int>(status));
    if (int rc = emit(converted.str(), out); rc != 0) return rc;
    return static_cast<int>(status);
  }

  if (classify->parsed()) {
    json options = {{"rank_tol", rank_tol}, {"certificate_tol", certificate_tol}};
    if (!certificate_path.empty()) {
      const auto text = read_file(certificate_path);
      if (!text) return fail("cannot open '" + certificate_path + "'", 1);
      json parsed = json::parse(*text, nullptr, false);
      if (parsed.is_discarded()) return fail("invalid JSON in '" + certificate_path + "'", 1);
      options["certificate"] = parsed.is_object() ? parsed["matrix"] : parsed;
    }
    OwnedString report;
    const conserva_status status =
        conserva_classify(system.handle, options.dump().c_str(), &report.data);
    if (report.data == nullptr) return fail(conserva_last_error(), static_cast<int>(status));
    if (int rc = emit(report.str(), out); rc != 0) return rc;
    return static_cast<int>(status);
  }

  if (check->parsed()) {
    json options = {{"samples", samples}, {"seed", seed}, {"rank_tol", rank_tol}};
    OwnedString report;
    const conserva_status status =
        conserva_check(system.handle, options.dump().c_str(), &report.data);
    if (report.data == nullptr) return fail(conserva_last_error(), static_cast<int>(status));
    if (int rc = emit(report.str(), out); rc != 0) return rc;
    return static_cast<int>(status);
  }

  // simulate
  std::string start = "x0", initial_text = start_x0;
  {
    OwnedString echo;
    echo.data = conserva_system_to_json(system.handle);
    const json sys = json::parse(echo.str());
    if (sys["kind"] == "lotka_volterra" && start_x0.empty() && start_u0.empty()) start = "y0";
  }
  if (!start_y0.empty()) {
    start = "y0";
    initial_text = start_y0;
  } else if (!start_u0.empty()) {
    start = "u0";
    initial_text = start_u0;
  }
  if (initial_text.empty()) return fail("missing initial condition (--x0/--y0/--u0)", 1);

  json initial = json::array();
  {
    std::istringstream stream(initial_text);
    std::string piece;
    while (std::getline(stream, piece, ',')) {
      try {
        initial.push_back(std::stod(piece));
      } catch (const std::exception&) {
        return fail("initial condition: '" + piece + "' is not a number", 1);
      }
    }
  }

  json options = {{"start", start},
                  {"initial", initial},
                  {"t_end", t_end},
                  {"method", sim_method},
                  {"step", step},
                  {"abs_tol", tol},
                  {"rel_tol", tol},
                  {"record_every", record_every},
                  {"max_steps", max_steps},
                  {"observe", observe},
                  {"time_scaled", time_scaled},
                  {"plot_data", !plot_prefix.empty()},
                  {"rank_tol", rank_tol}};
  if (!certificate_path.empty()) {
    const auto text = read_file(certificate_path);
    if (!text) return fail("cannot open '" + certificate_path + "'", 1);
    json parsed = json::parse(*text, nullptr, false);
    if (parsed.is_discarded()) return fail("invalid JSON in '" + certificate_path + "'", 1);
    options["certificate"] = parsed.is_object() ? parsed["matrix"] : parsed;
  }

  OwnedString summary, csv;
  const conserva_status status =
      conserva_simulate(system.handle, options.dump().c_str(), &summary.data, &csv.data);
  if (summary.data == nullptr) return fail(conserva_last_error(), static_cast<int>(status));

  json summary_json = json::parse(summary.str());
  if (!plot_prefix.empty()) {
    if (summary_json.contains("plot_time_h") && summary_json["plot_time_h"].is_string())
      if (!write_file(plot_prefix + "_th.csv", summary_json["plot_time_h"].get<std::string>()))
        return fail("cannot write plot data", 4);
    if (summary_json.contains("plot_phase") && summary_json["plot_phase"].is_string())
      if (!write_file(plot_prefix + "_phase.csv", summary_json["plot_phase"].get<std::string>()))
        return fail("cannot write plot data", 4);
    summary_json.erase("plot_time_h");
    summary_json.erase("plot_phase");
  }

  if (csv.data != nullptr && csv.str().size() > 0) {
    if (csv_path.empty()) {
      std::cout << csv.str();
      std::cerr << summary_json.dump(2) << "\n";
    } else {
      if (!write_file(csv_path, csv.str())) return fail("cannot write '" + csv_path + "'", 4);
      std::cout << summary_json.dump(2) << "\n";
    }
  } else {
    std::cout << summary_json.dump(2) << "\n";
  }
  return static_cast<int>(status);
}
