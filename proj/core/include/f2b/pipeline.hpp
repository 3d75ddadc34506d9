#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "f2b/config.hpp"
#include "f2b/errors.hpp"
#include "f2b/metrics.hpp"

namespace f2b {

/// A stage failure; what() is "stage '<name>': <cause>".
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& cause);
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Exactly one of the two inputs is set. Front maps need a `.frame` sidecar next to
/// the `.f2bm` file.
struct PipelineInput {
  std::optional<std::filesystem::path> mesh;
  std::optional<std::filesystem::path> front_maps;
};

struct StageRecord {
  std::string stage;
  double seconds = 0.0;
  std::string artifact;
  std::uint64_t hash = 0;
  bool resumed = false;
};

struct PipelineResult {
  std::filesystem::path directory;
  std::optional<TriangleMesh> truth;
  MapSet front;
  std::optional<SymmetryPlane> plane;
  std::optional<MapSet> reflected;
  MapSet back;
  OrientedPointCloud cloud;
  FusionStats fusion;
  TriangleMesh mesh;
  SolveReport solve;
  std::optional<EvalReport> report;
  std::vector<StageRecord> stages;
};

/// Artifact names inside the output directory.
namespace artifact {
inline constexpr const char* config = "config.txt";
inline constexpr const char* truth = "truth.obj";
inline constexpr const char* front = "front.f2bm";
inline constexpr const char* front_frame = "front.frame";
inline constexpr const char* plane = "plane.txt";
inline constexpr const char* reflected = "reflected.f2bm";
inline constexpr const char* back = "back.f2bm";
inline constexpr const char* back_frame = "back.frame";
inline constexpr const char* cloud = "cloud.txt";
inline constexpr const char* mesh = "mesh.obj";
inline constexpr const char* report = "report.txt";
}  // namespace artifact

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::span<const std::uint8_t> bytes);
std::uint64_t file_hash(const std::filesystem::path& path);

/// render/ingest -> symmetry -> reflect -> predict-back -> fuse -> reconstruct -> evaluate.
///
/// Every stage writes its artifact into config.output_dir and logs one line to `log`.
/// With `resume`, a stage whose artifacts exist is loaded instead of recomputed, as long
/// as the stored configuration matches and no earlier stage was recomputed. Downstream
/// stages always consume the artifacts as re-read from disk, so resumed and clean runs
/// agree bit for bit.
PipelineResult run_pipeline(const PipelineInput& input, const PipelineConfig& config, std::ostream* log = nullptr,
                            bool resume = false);

struct ManifestEntry {
  std::filesystem::path path;
  std::string tag;
};

/// One `path [tag]` per line; relative paths resolve against the manifest's directory.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

struct CorpusRow {
  std::string model;
  std::string tag;
  EvalReport report;
};

struct CorpusSummary {
  std::string tag;
  std::size_t count = 0;
  double md = 0.0;
  double cd = 0.0;
  double normal_consistency = 0.0;
};

struct CorpusResult {
  std::vector<CorpusRow> rows;
  std::vector<CorpusSummary> summary;
  std::vector<std::string> failures;

  bool complete() const { return failures.empty(); }
};

/// Runs every entry into output_dir/<index>_<stem>, continuing past failures, and
/// writes results.csv and summary.csv (per-tag means, then "all") to output_dir.
CorpusResult run_corpus(const std::vector<ManifestEntry>& entries, const PipelineConfig& config,
                        std::ostream* log = nullptr);

}  // namespace f2b
