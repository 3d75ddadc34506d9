#include "f2b/backpred.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "f2b/errors.hpp"
#include "f2b/render.hpp"

namespace f2b {

namespace {
constexpr double kBackCandidateMargin = 2.0;  // pixels
}  // namespace

BackPredictorSpec BackPredictorSpec::oracle(std::shared_ptr<const TriangleMesh> mesh) {
  BackPredictorSpec spec;
  spec.kind = PredictorKind::oracle;
  spec.mesh = std::move(mesh);
  return spec;
}

BackPredictorSpec BackPredictorSpec::heuristic() { return {}; }

BackPredictorSpec BackPredictorSpec::external_process(ExternalCommand command) {
  BackPredictorSpec spec;
  spec.kind = PredictorKind::external;
  spec.external = std::move(command);
  return spec;
}

void BackPredictorSpec::validate() const {
  const bool has_mesh = mesh != nullptr;
  const bool has_command = !external.command_template.empty();
  switch (kind) {
    case PredictorKind::oracle:
      if (!has_mesh || has_command) throw ConfigError("oracle predictor needs a mesh and nothing else");
      break;
    case PredictorKind::heuristic:
      if (has_mesh || has_command) throw ConfigError("heuristic predictor takes no mesh or command");
      break;
    case PredictorKind::external:
      if (!has_command || has_mesh) throw ConfigError("external predictor needs a command and nothing else");
      break;
  }
}

std::filesystem::path temp_root() {
  if (const char* env = std::getenv("F2B_TMPDIR"); env != nullptr && *env != '\0') return env;
  return std::filesystem::temp_directory_path();
}

MapSet predict_back_heuristic(const PredictionInput& input) {
  const MapSet front = mask_with_silhouette(input.front);
  const ViewFrame& frame = front.frame;
  const MapSet* reflected = input.reflected ? &*input.reflected : nullptr;
  if (reflected) {
    reflected->check_shape();
    if (!same_lattice(reflected->frame, frame)) throw ShapeError("reflected maps use a different frame");
  }

  // A reflected sample is a back candidate only when it lies clearly behind the front
  // surface; coincident samples carry no information about the far side.
  const double margin = kBackCandidateMargin * frame.pixel_size();
  const auto candidate = [&](std::size_t i) {
    return reflected && front.defined(i) && reflected->defined(i) && reflected->depth[i] > front.depth[i] + margin;
  };
  std::vector<double> gaps;
  for (std::size_t i = 0; i < front.pixel_count(); ++i) {
    if (candidate(i)) gaps.push_back(reflected->depth[i] - front.depth[i]);
  }
  double thickness = 0.1 * frame.depth_range();
  if (!gaps.empty()) {
    auto mid = gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2);
    std::nth_element(gaps.begin(), mid, gaps.end());
    thickness = *mid;
  }

  MapSet back = MapSet::background(opposite_frame(frame));
  const double range = frame.depth_range();
  for (std::size_t i = 0; i < front.pixel_count(); ++i) {
    if (!front.defined(i)) continue;
    const double z = candidate(i) ? reflected->depth[i] : front.depth[i] + thickness;
    const double b = std::clamp(-z - 2.0 * frame.near, 0.0, range);
    const Vec3 n = front.normal_view(i);
    back.set(i, static_cast<float>(b), Vec3(-n.x(), n.y(), n.z()));
  }
  return back;
}

MapSet predict_back(const BackPredictorSpec& spec, const PredictionInput& input) {
  spec.validate();
  input.front.check_shape();
  if (input.reflected && !same_lattice(input.reflected->frame, input.front.frame)) {
    throw ShapeError("reflected maps must share the front frame");
  }
  MapSet back;
  switch (spec.kind) {
    case PredictorKind::oracle: back = render_back_truth(*spec.mesh, input.front.frame); break;
    case PredictorKind::heuristic: back = predict_back_heuristic(input); break;
    case PredictorKind::external: back = run_external_predictor(spec.external, input); break;
  }
  const auto allowed = dilate(input.front.silhouette, input.front.resolution(), 1);
  for (std::size_t i = 0; i < back.pixel_count(); ++i) {
    if (back.defined(i) && !allowed[i]) back.clear(i);
  }
  return back;
}

namespace {

void check_comparable(const MapSet& a, const MapSet& b) {
  a.check_shape();
  b.check_shape();
  if (!same_lattice(a.frame, b.frame) || a.frame.direction != b.frame.direction ||
      a.frame.near != b.frame.near || a.frame.far != b.frame.far) {
    throw ShapeError("maps are not in the same frame");
  }
}

}  // namespace

DepthL1 depth_l1(const MapSet& pred, const MapSet& truth) {
  check_comparable(pred, truth);
  const double inv_range = 1.0 / truth.frame.depth_range();
  DepthL1 out;
  out.pixels = truth.pixel_count();
  double sum = 0.0;
  for (std::size_t i = 0; i < truth.pixel_count(); ++i) {
    const bool dp = pred.defined(i), dt = truth.defined(i);
    if (!dp && !dt) continue;
    ++out.defined_pixels;
    const double a = dp ? pred.depth[i] * inv_range : 0.0;
    const double b = dt ? truth.depth[i] * inv_range : 0.0;
    sum += std::abs(a - b);
  }
  out.mean = out.pixels ? sum / static_cast<double>(out.pixels) : 0.0;
  out.mean_defined = out.defined_pixels ? sum / static_cast<double>(out.defined_pixels) : 0.0;
  return out;
}

NormalCos normal_cos(const MapSet& pred, const MapSet& truth) {
  check_comparable(pred, truth);
  NormalCos out;
  double sum = 0.0;
  for (std::size_t i = 0; i < truth.pixel_count(); ++i) {
    if (!pred.defined(i) || !truth.defined(i)) continue;
    const Vec3 a = pred.normal_view(i);
    const Vec3 b = truth.normal_view(i);
    const double na = a.norm(), nb = b.norm();
    if (!(na > 0.0) || !(nb > 0.0)) {
      ++out.skipped_zero_norm;
      continue;
    }
    sum += 1.0 - std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
    ++out.compared;
  }
  out.mean = out.compared ? sum / static_cast<double>(out.compared) : 0.0;
  return out;
}

double similarity_score(const MapSet& pred, const MapSet& truth, const SimilarityWeights& weights) {
  return weights.depth * depth_l1(pred, truth).mean + weights.normal * normal_cos(pred, truth).mean;
}

}  // namespace f2b
