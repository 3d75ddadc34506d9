#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "f2b/backpred.hpp"
#include "f2b/fusion.hpp"
#include "f2b/keyvalue.hpp"
#include "f2b/metrics.hpp"
#include "f2b/poisson.hpp"
#include "f2b/symmetry.hpp"

namespace f2b {

enum class SymmetryMode { detect, none, given };

/// Everything a pipeline run depends on. Built from flat key=value text; see
/// default_key_values() for the full key list.
struct PipelineConfig {
  int resolution = 137;
  std::uint64_t seed = 1;
  double azimuth_deg = 30.0;
  double elevation_deg = 20.0;

  SymmetryMode symmetry_mode = SymmetryMode::detect;
  /// Plane for SymmetryMode::given, in normalized mesh coordinates.
  std::optional<SymmetryPlane> given_plane;
  SymmetryConfig symmetry;

  FusionParams fusion;
  ReconParams recon;
  std::size_t eval_samples = kDefaultMetricSamples;

  PredictorKind predictor = PredictorKind::heuristic;
  ExternalCommand external;

  std::filesystem::path output_dir = "f2b_out";

  /// Throws ConfigError when a value is out of range.
  void validate() const;
};

KeyValues default_key_values();

/// Overlays `overrides` on the defaults and parses the result. Unknown keys and bad
/// values throw ConfigError.
PipelineConfig make_config(const KeyValues& overrides);

/// Canonical text form (every key, exact numbers).
KeyValues to_key_values(const PipelineConfig& config);

/// `key=value` command-line override.
std::pair<std::string, std::string> parse_assignment(const std::string& text);

/// File (optional) then assignments, later entries winning.
PipelineConfig load_config(const std::optional<std::filesystem::path>& file,
                           const std::vector<std::string>& assignments);

}  // namespace f2b
