#include "f2b/poisson.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "f2b/errors.hpp"
#include "multigrid.hpp"

namespace f2b {

ReconGrid::ReconGrid(int res, const Vec3& org, double s) : resolution(res), origin(org), side(s) {
  if (resolution < 32) throw ConfigError("reconstruction grid resolution must be at least 32");
  if (!(side > 0.0) || !std::isfinite(side)) throw ConfigError("reconstruction grid side must be positive");
  field.assign(node_count(), Vec3::Zero());
  weight.assign(node_count(), 0.0);
  chi.assign(node_count(), 0.0);
}

std::size_t ReconGrid::node_count() const {
  const auto n = static_cast<std::size_t>(resolution + 1);
  return n * n * n;
}

bool ReconGrid::contains(const Vec3& p) const {
  const Vec3 rel = p - origin;
  return (rel.array() >= 0.0).all() && (rel.array() <= side).all();
}

ReconGrid ReconGrid::fit(const OrientedPointCloud& cloud, int resolution) {
  if (cloud.empty()) throw EmptyInputError("point cloud is empty");
  const BoundingBox box = cloud.bounds();
  const double extent = box.extent().maxCoeff();
  if (!(extent > 0.0)) throw DegenerateGeometryError("point cloud has zero extent");
  const double side = 1.2 * extent;
  return ReconGrid(resolution, box.center() - Vec3::Constant(0.5 * side), side);
}

void ReconParams::validate() const {
  if (grid_resolution < 32) throw ConfigError("recon.grid_resolution must be at least 32");
  if (!(screen_weight >= 0.0)) throw ConfigError("recon.screen_weight must be non-negative");
  if (!(tolerance > 0.0 && tolerance <= 1e-3)) throw ConfigError("recon.tolerance must be in (0, 1e-3]");
  if (max_iterations <= 0) throw ConfigError("recon.max_iterations must be positive");
}

namespace {

struct Stencil {
  std::array<std::size_t, 8> node{};
  std::array<double, 8> w{};
  std::size_t cell = 0;
};

Stencil trilinear(const ReconGrid& grid, const Vec3& p) {
  const Vec3 g = (p - grid.origin) / grid.cell_size();
  int c[3];
  double f[3];
  for (int a = 0; a < 3; ++a) {
    c[a] = std::clamp(static_cast<int>(std::floor(g[a])), 0, grid.resolution - 1);
    f[a] = std::clamp(g[a] - c[a], 0.0, 1.0);
  }
  Stencil s;
  int slot = 0;
  for (int dk = 0; dk < 2; ++dk) {
    for (int dj = 0; dj < 2; ++dj) {
      for (int di = 0; di < 2; ++di) {
        s.node[slot] = grid.index(c[0] + di, c[1] + dj, c[2] + dk);
        s.w[slot] = (di ? f[0] : 1.0 - f[0]) * (dj ? f[1] : 1.0 - f[1]) * (dk ? f[2] : 1.0 - f[2]);
        ++slot;
      }
    }
  }
  s.cell = static_cast<std::size_t>(c[0]) +
           static_cast<std::size_t>(grid.resolution) *
               (static_cast<std::size_t>(c[1]) + static_cast<std::size_t>(grid.resolution) * c[2]);
  return s;
}

std::vector<Stencil> stencils(const ReconGrid& grid, const OrientedPointCloud& cloud) {
  std::vector<Stencil> out;
  out.reserve(cloud.size());
  for (const OrientedPoint& p : cloud.points) {
    if (!grid.contains(p.position)) throw ShapeError("point lies outside the reconstruction grid");
    out.push_back(trilinear(grid, p.position));
  }
  return out;
}

// 1 / (points sharing the sample's cell).
std::vector<double> density_weights(const ReconGrid& grid, const std::vector<Stencil>& st) {
  std::vector<std::uint32_t> count(static_cast<std::size_t>(grid.resolution) * grid.resolution * grid.resolution, 0);
  for (const Stencil& s : st) ++count[s.cell];
  std::vector<double> w(st.size());
  for (std::size_t i = 0; i < st.size(); ++i) w[i] = 1.0 / count[st[i].cell];
  return w;
}

bool interior(const ReconGrid& grid, std::size_t idx) {
  const auto n = static_cast<std::size_t>(grid.resolution + 1);
  const std::size_t i = idx % n, j = (idx / n) % n, k = idx / (n * n);
  const std::size_t r = static_cast<std::size_t>(grid.resolution);
  return i > 0 && j > 0 && k > 0 && i < r && j < r && k < r;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

class ScreenedOperator {
 public:
  ScreenedOperator(const ReconGrid& grid, const std::vector<Stencil>& st, double beta)
      : r_(grid.resolution), st_(st), beta_(beta), interior_(grid.node_count(), 0) {
    for (std::size_t i = 0; i < interior_.size(); ++i) interior_[i] = interior(grid, i) ? 1 : 0;
  }

  void apply(const std::vector<double>& x, std::vector<double>& y) const {
    detail::apply_laplacian(r_, x, y);
    if (beta_ == 0.0) return;
    for (const Stencil& s : st_) {
      double v = 0.0;
      for (int q = 0; q < 8; ++q) v += s.w[q] * x[s.node[q]];
      v *= beta_;
      for (int q = 0; q < 8; ++q) {
        if (interior_[s.node[q]]) y[s.node[q]] += v * s.w[q];
      }
    }
  }

  // Adds beta * S' (t, t, ...) to b.
  void add_target(double t, std::vector<double>& b) const {
    if (beta_ == 0.0) return;
    for (const Stencil& s : st_) {
      for (int q = 0; q < 8; ++q) {
        if (interior_[s.node[q]]) b[s.node[q]] += beta_ * t * s.w[q];
      }
    }
  }

 private:
  int r_;
  const std::vector<Stencil>& st_;
  double beta_;
  std::vector<std::uint8_t> interior_;
};

struct CgResult {
  int iterations = 0;
  double residual = 0.0;
  std::vector<double> history;
};

CgResult pcg(const ScreenedOperator& op, const detail::LaplaceMultigrid& mg, const std::vector<double>& b,
             std::vector<double>& x, double tol, int max_iterations) {
  CgResult out;
  const double bnorm = std::sqrt(dot(b, b));
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return out;
  }
  std::vector<double> r(b.size()), z, p, ap;
  op.apply(x, ap);
  for (std::size_t i = 0; i < b.size(); ++i) r[i] = b[i] - ap[i];
  out.residual = std::sqrt(dot(r, r)) / bnorm;
  if (out.residual <= tol) return out;
  mg.apply(r, z);
  p = z;
  double rz = dot(r, z);
  while (out.iterations < max_iterations) {
    op.apply(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) break;
    const double alpha = rz / pap;
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    ++out.iterations;
    out.residual = std::sqrt(dot(r, r)) / bnorm;
    out.history.push_back(out.residual);
    if (out.residual <= tol) return out;
    mg.apply(r, z);
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = z[i] + beta * p[i];
  }
  throw SolverError("conjugate gradients did not reach the tolerance", out.iterations, out.residual);
}

double sample_mean(const std::vector<double>& chi, const std::vector<Stencil>& st, const std::vector<double>& w) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < st.size(); ++i) {
    double v = 0.0;
    for (int q = 0; q < 8; ++q) v += st[i].w[q] * chi[st[i].node[q]];
    num += w[i] * v;
    den += w[i];
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace

void splat_normals(const OrientedPointCloud& cloud, ReconGrid& grid) {
  if (cloud.empty()) throw EmptyInputError("point cloud is empty");
  const auto st = stencils(grid, cloud);
  const auto density = density_weights(grid, st);
  std::fill(grid.field.begin(), grid.field.end(), Vec3::Zero());
  std::fill(grid.weight.begin(), grid.weight.end(), 0.0);
  for (std::size_t p = 0; p < st.size(); ++p) {
    const Vec3& n = cloud.points[p].normal;
    for (int q = 0; q < 8; ++q) {
      grid.weight[st[p].node[q]] += st[p].w[q];
      grid.field[st[p].node[q]] += (st[p].w[q] * density[p]) * n;
    }
  }
}

void solve_indicator(ReconGrid& grid, const OrientedPointCloud& cloud, const ReconParams& params,
                     SolveReport* report) {
  params.validate();
  if (cloud.empty()) throw EmptyInputError("point cloud is empty");
  const auto st = stencils(grid, cloud);
  const auto density = density_weights(grid, st);
  const int r = grid.resolution;
  const int n = r + 1;

  // b = sum over axis edges of (incoming - outgoing) edge-averaged field component.
  std::vector<double> b(grid.node_count(), 0.0);
  const std::size_t stride[3] = {1, static_cast<std::size_t>(n), static_cast<std::size_t>(n) * n};
  for (int k = 1; k < r; ++k) {
    for (int j = 1; j < r; ++j) {
      for (int i = 1; i < r; ++i) {
        const std::size_t idx = grid.index(i, j, k);
        double v = 0.0;
        for (int a = 0; a < 3; ++a) v += 0.5 * (grid.field[idx - stride[a]][a] - grid.field[idx + stride[a]][a]);
        b[idx] = v;
      }
    }
  }

  std::size_t occupied = 0;
  {
    std::vector<std::size_t> cells;
    cells.reserve(st.size());
    for (const Stencil& s : st) cells.push_back(s.cell);
    std::sort(cells.begin(), cells.end());
    occupied = static_cast<std::size_t>(std::unique(cells.begin(), cells.end()) - cells.begin());
  }
  const double beta = params.screen_weight * static_cast<double>(occupied) /
                      (static_cast<double>(st.size()) * static_cast<double>(r));

  const detail::LaplaceMultigrid mg(r);
  std::vector<double> chi(grid.node_count(), 0.0);

  const ScreenedOperator plain(grid, st, 0.0);
  const CgResult first = pcg(plain, mg, b, chi, params.tolerance, params.max_iterations);
  const double target = sample_mean(chi, st, density);

  CgResult second = first;
  if (beta > 0.0) {
    const ScreenedOperator screened(grid, st, beta);
    std::vector<double> rhs = b;
    screened.add_target(target, rhs);
    second = pcg(screened, mg, rhs, chi, params.tolerance, params.max_iterations);
  }
  grid.chi = std::move(chi);
  if (report) {
    report->iterations = first.iterations + (beta > 0.0 ? second.iterations : 0);
    report->residual = second.residual;
    report->residual_history = second.history;
    report->target = target;
  }
}

double iso_level(const ReconGrid& grid, const OrientedPointCloud& cloud) {
  if (cloud.empty()) throw EmptyInputError("point cloud is empty");
  const auto st = stencils(grid, cloud);
  return sample_mean(grid.chi, st, density_weights(grid, st));
}

TriangleMesh extract_mesh(const ReconGrid& grid, const OrientedPointCloud& cloud) {
  return extract_level(grid, iso_level(grid, cloud));
}

TriangleMesh reconstruct(const OrientedPointCloud& cloud, const ReconParams& params, SolveReport* report) {
  params.validate();
  ReconGrid grid = ReconGrid::fit(cloud, params.grid_resolution);
  splat_normals(cloud, grid);
  solve_indicator(grid, cloud, params, report);
  return extract_mesh(grid, cloud);
}

}  // namespace f2b
