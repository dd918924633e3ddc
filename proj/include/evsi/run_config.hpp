#pragma once

#include "evsi/case_studies.hpp"
#include "evsi/estimators.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace evsi {

struct InputSource {
  enum class Kind { file, case1, case2 };
  Kind kind = Kind::case1;
  std::filesystem::path path;  // file input
  int scenario = 1;            // case1
  int exercise = 1;            // case2
  Index rows = 100000;
  std::uint64_t seed = 1;
  MarkovModelConfig markov;
};

struct RunConfig {
  InputSource input;
  /// Required for file inputs; builtin inputs fall back to their own spec.
  std::optional<DataCollectionSpec> spec;
  /// Focal parameter names, resolved against the PA header at run time.
  std::vector<std::string> focal_names;
  std::vector<long> grid;
  std::vector<Method> methods;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "evsi_out";
  bool plot = false;
  TgaOptions tga;
  long nested_outer = 2000;
  long nested_inner = 500;
  unsigned threads = 0;

  /// Throws ValidationError on an empty or unordered grid, or no methods.
  void validate() const;
};

/// Relative paths inside the document resolve against `base_dir`.
RunConfig parse_config(const nlohmann::json& document,
                       const std::filesystem::path& base_dir = {});
RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

MarkovModelConfig markov_config_from_json(const nlohmann::json& document);
nlohmann::json markov_config_to_json(const MarkovModelConfig& config);
MarkovModelConfig load_markov_config(const std::filesystem::path& path);

/// n_min..n_max inclusive in steps of `step`.
std::vector<long> make_grid(long n_min, long n_max, long step);

struct AnalysisResult {
  std::vector<EvsiCurve> curves;  // in the requested method order
  EvsiEstimate evppi;
};

using LogSink = std::function<void(const std::string&)>;

/// Builds the PA dataset once and runs every requested method on it.
AnalysisResult run_analysis(const RunConfig& config, const LogSink& log = {});

std::string format_curve_csv(const EvsiCurve& curve);
std::string format_evppi_csv(const EvsiEstimate& evppi);
std::string render_svg(const AnalysisResult& result);

/// Writes evsi_<method>.csv per curve, evppi.csv and, if `plot`, curves.svg.
void emit_curves(const AnalysisResult& result, const std::filesystem::path& dir, bool plot);

}  // namespace evsi
