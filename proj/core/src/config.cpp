#include "f2b/config.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "f2b/errors.hpp"

namespace f2b {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::string num(double v) { return format_exact(v); }

std::string mode_name(SymmetryMode m) {
  switch (m) {
    case SymmetryMode::detect: return "detect";
    case SymmetryMode::none: return "none";
    case SymmetryMode::given: return "given";
  }
  return "detect";
}

std::string kind_name(PredictorKind k) {
  switch (k) {
    case PredictorKind::oracle: return "oracle";
    case PredictorKind::heuristic: return "heuristic";
    case PredictorKind::external: return "external";
  }
  return "heuristic";
}

std::string plane_text(const std::optional<SymmetryPlane>& plane) {
  if (!plane) return "";
  const Vec3 n = plane->normal();
  return num(n.x()) + " " + num(n.y()) + " " + num(n.z()) + " " + num(plane->offset);
}

std::optional<SymmetryPlane> parse_plane(const std::string& text) {
  std::istringstream in(text);
  std::string tok;
  std::vector<double> v;
  while (in >> tok) v.push_back(parse_number(tok, "symmetry.plane"));
  if (v.empty()) return std::nullopt;
  if (v.size() != 4) throw ConfigError("'symmetry.plane': expected 'nx ny nz offset'");
  const Vec3 n(v[0], v[1], v[2]);
  if (!(n.norm() > 0.0)) throw ConfigError("'symmetry.plane': zero normal");
  return SymmetryPlane::from_normal_offset(n.normalized(), v[3]);
}

}  // namespace

void PipelineConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  require(resolution >= 16 && resolution <= 4096, "resolution must be in [16, 4096]");
  require(std::isfinite(azimuth_deg) && std::isfinite(elevation_deg) && std::abs(elevation_deg) < 90.0,
          "view angles must be finite with |elevation| < 90");
  require(symmetry_mode != SymmetryMode::given || given_plane.has_value(),
          "symmetry.mode=given needs symmetry.plane");
  require(symmetry.rounds > 0 && symmetry.pairs_per_round > 0, "symmetry sampling counts must be positive");
  require(symmetry.bandwidth > 0.0, "symmetry.bandwidth must be positive");
  require(symmetry.hull_px >= 0.0 && symmetry.hull_frac >= 0.0 && symmetry.hull_frac <= 1.0,
          "symmetry hull thresholds out of range");
  require(symmetry.visibility_frac >= 0.0 && symmetry.visibility_frac <= 1.0,
          "symmetry.visibility_frac must be in [0, 1]");
  require(symmetry.coverage_min >= 0.0 && symmetry.coverage_min <= 1.0, "symmetry.coverage_min must be in [0, 1]");
  require(symmetry.loose_factor >= 1.0, "symmetry.loose_factor must be >= 1");
  require(symmetry.max_normal_angle > 0.0 && symmetry.max_normal_angle <= std::numbers::pi,
          "symmetry.max_normal_angle_deg must be in (0, 180]");
  require(symmetry.icp.max_iterations > 0 && symmetry.icp.max_distance_px > 0.0 && symmetry.icp.tolerance > 0.0,
          "symmetry ICP parameters must be positive");
  fusion.validate();
  recon.validate();
  require(eval_samples > 0, "eval.samples must be positive");
  require(predictor != PredictorKind::external || !external.command_template.empty(),
          "predictor.kind=external needs predictor.command");
  require(external.timeout.count() > 0, "predictor.timeout_s must be positive");
  require(!output_dir.empty(), "output_dir must not be empty");
}

KeyValues default_key_values() { return to_key_values(PipelineConfig{}); }

KeyValues to_key_values(const PipelineConfig& c) {
  return {
      {"resolution", std::to_string(c.resolution)},
      {"seed", std::to_string(c.seed)},
      {"view.azimuth_deg", num(c.azimuth_deg)},
      {"view.elevation_deg", num(c.elevation_deg)},
      {"symmetry.mode", mode_name(c.symmetry_mode)},
      {"symmetry.plane", plane_text(c.given_plane)},
      {"symmetry.rounds", std::to_string(c.symmetry.rounds)},
      {"symmetry.pairs_per_round", std::to_string(c.symmetry.pairs_per_round)},
      {"symmetry.bandwidth", num(c.symmetry.bandwidth)},
      {"symmetry.hull_px", num(c.symmetry.hull_px)},
      {"symmetry.hull_frac", num(c.symmetry.hull_frac)},
      {"symmetry.visibility_frac", num(c.symmetry.visibility_frac)},
      {"symmetry.coverage_min", num(c.symmetry.coverage_min)},
      {"symmetry.loose_factor", num(c.symmetry.loose_factor)},
      {"symmetry.max_normal_angle_deg", num(c.symmetry.max_normal_angle / kDeg)},
      {"symmetry.icp_max_iterations", std::to_string(c.symmetry.icp.max_iterations)},
      {"symmetry.icp_max_distance_px", num(c.symmetry.icp.max_distance_px)},
      {"symmetry.icp_tolerance", num(c.symmetry.icp.tolerance)},
      {"fusion.min_separation", num(c.fusion.min_separation)},
      {"fusion.outlier_threshold", num(c.fusion.outlier_threshold)},
      {"fusion.neighbor_radius", std::to_string(c.fusion.neighbor_radius)},
      {"recon.grid_resolution", std::to_string(c.recon.grid_resolution)},
      {"recon.screen_weight", num(c.recon.screen_weight)},
      {"recon.tolerance", num(c.recon.tolerance)},
      {"recon.max_iterations", std::to_string(c.recon.max_iterations)},
      {"eval.samples", std::to_string(c.eval_samples)},
      {"predictor.kind", kind_name(c.predictor)},
      {"predictor.command", c.external.command_template},
      {"predictor.workdir", c.external.working_directory.string()},
      {"predictor.timeout_s", num(static_cast<double>(c.external.timeout.count()) / 1000.0)},
      {"output_dir", c.output_dir.string()},
  };
}

PipelineConfig make_config(const KeyValues& overrides) {
  KeyValues kv = default_key_values();
  for (const auto& [key, value] : overrides) {
    auto it = kv.find(key);
    if (it == kv.end()) throw ConfigError("unknown configuration key '" + key + "'");
    it->second = value;
  }
  auto integer = [&](const char* key) { return parse_integer(kv.at(key), key); };
  auto number = [&](const char* key) { return parse_number(kv.at(key), key); };
  auto positive_count = [&](const char* key) {
    const long v = integer(key);
    if (v <= 0) throw ConfigError(std::string("'") + key + "' must be positive");
    return static_cast<std::size_t>(v);
  };

  PipelineConfig c;
  c.resolution = static_cast<int>(integer("resolution"));
  {
    const std::string& text = kv.at("seed");
    std::uint64_t seed = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
    if (ec != std::errc() || ptr != text.data() + text.size()) throw ConfigError("'seed': expected an unsigned integer");
    c.seed = seed;
  }
  c.azimuth_deg = number("view.azimuth_deg");
  c.elevation_deg = number("view.elevation_deg");

  const std::string& mode = kv.at("symmetry.mode");
  if (mode == "detect") c.symmetry_mode = SymmetryMode::detect;
  else if (mode == "none") c.symmetry_mode = SymmetryMode::none;
  else if (mode == "given") c.symmetry_mode = SymmetryMode::given;
  else throw ConfigError("'symmetry.mode' must be detect, none or given");
  c.given_plane = parse_plane(kv.at("symmetry.plane"));
  c.symmetry.rounds = static_cast<int>(positive_count("symmetry.rounds"));
  c.symmetry.pairs_per_round = positive_count("symmetry.pairs_per_round");
  c.symmetry.bandwidth = number("symmetry.bandwidth");
  c.symmetry.hull_px = number("symmetry.hull_px");
  c.symmetry.hull_frac = number("symmetry.hull_frac");
  c.symmetry.visibility_frac = number("symmetry.visibility_frac");
  c.symmetry.coverage_min = number("symmetry.coverage_min");
  c.symmetry.loose_factor = number("symmetry.loose_factor");
  c.symmetry.max_normal_angle = number("symmetry.max_normal_angle_deg") * kDeg;
  c.symmetry.icp.max_normal_angle = c.symmetry.max_normal_angle;
  c.symmetry.icp.max_iterations = static_cast<int>(positive_count("symmetry.icp_max_iterations"));
  c.symmetry.icp.max_distance_px = number("symmetry.icp_max_distance_px");
  c.symmetry.icp.tolerance = number("symmetry.icp_tolerance");
  c.symmetry.seed = c.seed;

  c.fusion.min_separation = number("fusion.min_separation");
  c.fusion.outlier_threshold = number("fusion.outlier_threshold");
  c.fusion.neighbor_radius = static_cast<int>(integer("fusion.neighbor_radius"));

  c.recon.grid_resolution = static_cast<int>(integer("recon.grid_resolution"));
  c.recon.screen_weight = number("recon.screen_weight");
  c.recon.tolerance = number("recon.tolerance");
  c.recon.max_iterations = static_cast<int>(integer("recon.max_iterations"));
  c.eval_samples = positive_count("eval.samples");

  const std::string& kind = kv.at("predictor.kind");
  if (kind == "oracle") c.predictor = PredictorKind::oracle;
  else if (kind == "heuristic") c.predictor = PredictorKind::heuristic;
  else if (kind == "external") c.predictor = PredictorKind::external;
  else throw ConfigError("'predictor.kind' must be oracle, heuristic or external");
  c.external.command_template = kv.at("predictor.command");
  c.external.working_directory = kv.at("predictor.workdir");
  const double timeout = number("predictor.timeout_s");
  if (!(timeout > 0.0)) throw ConfigError("'predictor.timeout_s' must be positive");
  c.external.timeout = std::chrono::milliseconds(static_cast<long long>(std::llround(timeout * 1000.0)));
  c.output_dir = kv.at("output_dir");

  c.validate();
  return c;
}

std::pair<std::string, std::string> parse_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("expected key=value, got '" + text + "'");
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  return {trim(text.substr(0, eq)), trim(text.substr(eq + 1))};
}

PipelineConfig load_config(const std::optional<std::filesystem::path>& file,
                           const std::vector<std::string>& assignments) {
  KeyValues kv;
  if (file) kv = read_key_values(*file);
  for (const std::string& a : assignments) {
    auto [key, value] = parse_assignment(a);
    kv[key] = value;
  }
  return make_config(kv);
}

}  // namespace f2b
