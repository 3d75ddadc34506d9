#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "f2b/maps.hpp"

namespace f2b {

enum class PredictorKind { oracle, heuristic, external };

/// Runs an out-of-process predictor through the file protocol:
/// `front.f2bm` (+ `front.frame`) and optionally `reflected.f2bm` are written to a fresh
/// temporary directory, `{dir}` in the command template is replaced by that directory
/// (or the directory is appended when the token is absent), and the process must exit
/// with status 0 after writing `back.f2bm` there.
struct ExternalCommand {
  std::string command_template;
  std::filesystem::path working_directory;
  std::chrono::milliseconds timeout{std::chrono::seconds(60)};
};

struct BackPredictorSpec {
  PredictorKind kind = PredictorKind::heuristic;
  std::shared_ptr<const TriangleMesh> mesh;  // oracle only
  ExternalCommand external;                  // external only

  static BackPredictorSpec oracle(std::shared_ptr<const TriangleMesh> mesh);
  static BackPredictorSpec heuristic();
  static BackPredictorSpec external_process(ExternalCommand command);

  /// Throws ConfigError unless exactly the fields of `kind` are populated.
  void validate() const;
};

struct PredictionInput {
  MapSet front;
  std::optional<MapSet> reflected;
};

/// Back maps in opposite_frame(input.front.frame), masked to the front silhouette
/// grown by one pixel.
MapSet predict_back(const BackPredictorSpec& spec, const PredictionInput& input);

/// Reflected depth where the reflected sample lies more than two pixels behind the
/// front, otherwise front depth plus the median of those gaps (10% of the depth range
/// when there are none); normals are front normals mirrored through the view plane.
MapSet predict_back_heuristic(const PredictionInput& input);

MapSet run_external_predictor(const ExternalCommand& command, const PredictionInput& input);

/// Temporary-directory root: $F2B_TMPDIR when set, else the system temp directory.
std::filesystem::path temp_root();

struct DepthL1 {
  /// Mean over the full raster, background as 0, depths normalized by the depth range.
  double mean = 0.0;
  /// Same sum over the union of defined pixels only.
  double mean_defined = 0.0;
  std::size_t pixels = 0;
  std::size_t defined_pixels = 0;
};

struct NormalCos {
  /// Mean of 1 - cos over pixels defined in both maps.
  double mean = 0.0;
  std::size_t compared = 0;
  std::size_t skipped_zero_norm = 0;
};

DepthL1 depth_l1(const MapSet& pred, const MapSet& truth);
NormalCos normal_cos(const MapSet& pred, const MapSet& truth);

struct SimilarityWeights {
  double depth = 1000.0;
  double normal = 100.0;
};

/// w_d * depth_l1 + w_n * normal_cos.
double similarity_score(const MapSet& pred, const MapSet& truth, const SimilarityWeights& weights = {});

}  // namespace f2b
