#include "multigrid.hpp"

#include <cmath>

namespace f2b::detail {
namespace {

constexpr double kOmega = 0.8;
constexpr int kSweeps = 2;
constexpr int kCoarseSweeps = 40;
constexpr int kMaxDenseUnknowns = 1000;

inline std::size_t at(int n, int i, int j, int k) {
  return static_cast<std::size_t>(i) + static_cast<std::size_t>(n) * (static_cast<std::size_t>(j) + static_cast<std::size_t>(n) * k);
}

// Fine (2r) interior values from coarse (r) values, trilinear.
void prolong_add(int rc, const std::vector<double>& coarse, std::vector<double>& fine) {
  const int nc = rc + 1, rf = 2 * rc, nf = rf + 1;
  for (int k = 1; k < rf; ++k) {
    const int k0 = k / 2, k1 = (k + 1) / 2;
    for (int j = 1; j < rf; ++j) {
      const int j0 = j / 2, j1 = (j + 1) / 2;
      for (int i = 1; i < rf; ++i) {
        const int i0 = i / 2, i1 = (i + 1) / 2;
        double v = coarse[at(nc, i0, j0, k0)] + coarse[at(nc, i1, j0, k0)] + coarse[at(nc, i0, j1, k0)] +
                   coarse[at(nc, i1, j1, k0)] + coarse[at(nc, i0, j0, k1)] + coarse[at(nc, i1, j0, k1)] +
                   coarse[at(nc, i0, j1, k1)] + coarse[at(nc, i1, j1, k1)];
        fine[at(nf, i, j, k)] += 0.125 * v;
      }
    }
  }
}

// Transpose of prolong_add.
void restrict_to(int rc, const std::vector<double>& fine, std::vector<double>& coarse) {
  const int nc = rc + 1, nf = 2 * rc + 1;
  static constexpr double w[3] = {0.5, 1.0, 0.5};
  std::fill(coarse.begin(), coarse.end(), 0.0);
  for (int K = 1; K < rc; ++K) {
    for (int J = 1; J < rc; ++J) {
      for (int I = 1; I < rc; ++I) {
        double sum = 0.0;
        for (int dk = -1; dk <= 1; ++dk) {
          for (int dj = -1; dj <= 1; ++dj) {
            const double wjk = w[dj + 1] * w[dk + 1];
            const std::size_t row = at(nf, 2 * I, 2 * J + dj, 2 * K + dk);
            sum += wjk * (0.5 * fine[row - 1] + fine[row] + 0.5 * fine[row + 1]);
          }
        }
        coarse[at(nc, I, J, K)] = sum;
      }
    }
  }
}

}  // namespace

void apply_laplacian(int r, const std::vector<double>& x, std::vector<double>& y, double scale) {
  const int n = r + 1;
  const std::size_t sj = static_cast<std::size_t>(n), sk = sj * sj;
  y.assign(x.size(), 0.0);
  for (int k = 1; k < r; ++k) {
    for (int j = 1; j < r; ++j) {
      std::size_t idx = at(n, 1, j, k);
      for (int i = 1; i < r; ++i, ++idx) {
        const double s = x[idx - 1] + x[idx + 1] + x[idx - sj] + x[idx + sj] + x[idx - sk] + x[idx + sk];
        y[idx] = scale * (6.0 * x[idx] - s);
      }
    }
  }
}

LaplaceMultigrid::LaplaceMultigrid(int resolution) {
  int r = resolution;
  double scale = 1.0;
  while (true) {
    Level lv;
    lv.r = r;
    lv.scale = scale;
    const auto count = static_cast<std::size_t>(r + 1) * (r + 1) * (r + 1);
    lv.rhs.assign(count, 0.0);
    lv.sol.assign(count, 0.0);
    lv.tmp.assign(count, 0.0);
    levels_.push_back(std::move(lv));
    if (r % 2 != 0 || r <= 4) break;
    r /= 2;
    scale *= 2.0;
  }
  const Level& last = levels_.back();
  const int m = last.r - 1;
  if (m * m * m <= kMaxDenseUnknowns) {
    const int unknowns = m * m * m;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(unknowns, unknowns);
    auto id = [m](int i, int j, int k) { return (i - 1) + m * ((j - 1) + m * (k - 1)); };
    for (int k = 1; k <= m; ++k) {
      for (int j = 1; j <= m; ++j) {
        for (int i = 1; i <= m; ++i) {
          const int row = id(i, j, k);
          a(row, row) = 6.0 * last.scale;
          const int nb[6][3] = {{i - 1, j, k}, {i + 1, j, k}, {i, j - 1, k}, {i, j + 1, k}, {i, j, k - 1}, {i, j, k + 1}};
          for (const auto& q : nb) {
            if (q[0] < 1 || q[1] < 1 || q[2] < 1 || q[0] > m || q[1] > m || q[2] > m) continue;
            a(row, id(q[0], q[1], q[2])) = -last.scale;
          }
        }
      }
    }
    coarse_llt_.compute(a);
    dense_coarse_ = coarse_llt_.info() == Eigen::Success;
  }
}

void LaplaceMultigrid::smooth(const Level& lv, int sweeps) const {
  const double step = kOmega / (6.0 * lv.scale);
  for (int s = 0; s < sweeps; ++s) {
    apply_laplacian(lv.r, lv.sol, lv.tmp, lv.scale);
    const int n = lv.r + 1;
    for (int k = 1; k < lv.r; ++k) {
      for (int j = 1; j < lv.r; ++j) {
        std::size_t idx = at(n, 1, j, k);
        for (int i = 1; i < lv.r; ++i, ++idx) lv.sol[idx] += step * (lv.rhs[idx] - lv.tmp[idx]);
      }
    }
  }
}

void LaplaceMultigrid::solve_coarsest(const Level& lv) const {
  std::fill(lv.sol.begin(), lv.sol.end(), 0.0);
  if (!dense_coarse_) {
    smooth(lv, kCoarseSweeps);
    return;
  }
  const int m = lv.r - 1, n = lv.r + 1;
  Eigen::VectorXd b(m * m * m);
  int row = 0;
  for (int k = 1; k <= m; ++k)
    for (int j = 1; j <= m; ++j)
      for (int i = 1; i <= m; ++i) b[row++] = lv.rhs[at(n, i, j, k)];
  const Eigen::VectorXd x = coarse_llt_.solve(b);
  row = 0;
  for (int k = 1; k <= m; ++k)
    for (int j = 1; j <= m; ++j)
      for (int i = 1; i <= m; ++i) lv.sol[at(n, i, j, k)] = x[row++];
}

void LaplaceMultigrid::cycle(std::size_t level) const {
  const Level& lv = levels_[level];
  if (level + 1 == levels_.size()) {
    solve_coarsest(lv);
    return;
  }
  std::fill(lv.sol.begin(), lv.sol.end(), 0.0);
  smooth(lv, kSweeps);
  apply_laplacian(lv.r, lv.sol, lv.tmp, lv.scale);
  for (std::size_t i = 0; i < lv.tmp.size(); ++i) lv.tmp[i] = lv.rhs[i] - lv.tmp[i];
  const Level& coarse = levels_[level + 1];
  restrict_to(coarse.r, lv.tmp, coarse.rhs);
  cycle(level + 1);
  prolong_add(coarse.r, coarse.sol, lv.sol);
  smooth(lv, kSweeps);
}

void LaplaceMultigrid::apply(const std::vector<double>& r, std::vector<double>& e) const {
  const Level& top = levels_.front();
  top.rhs = r;
  cycle(0);
  e = top.sol;
}

}  // namespace f2b::detail
