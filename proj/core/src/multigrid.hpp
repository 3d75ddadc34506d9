#pragma once

#include <memory>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace f2b::detail {

/// y = L x on the interior of an (r + 1)^3 node lattice; boundary entries of y are 0
/// and boundary entries of x are treated as 0.
void apply_laplacian(int r, const std::vector<double>& x, std::vector<double>& y, double scale = 1.0);

/// Symmetric V-cycle approximating the inverse of the 7-point graph Laplacian with
/// Dirichlet boundary. Fixed linear operator, so usable as a CG preconditioner.
class LaplaceMultigrid {
 public:
  explicit LaplaceMultigrid(int resolution);

  /// e = M^-1 r on the finest lattice.
  void apply(const std::vector<double>& r, std::vector<double>& e) const;

  int levels() const { return static_cast<int>(levels_.size()); }

 private:
  struct Level {
    int r = 0;          // cells per side
    double scale = 1;   // operator is scale * L
    mutable std::vector<double> rhs, sol, tmp;
  };

  void cycle(std::size_t level) const;
  void smooth(const Level& lv, int sweeps) const;
  void solve_coarsest(const Level& lv) const;

  std::vector<Level> levels_;
  Eigen::LLT<Eigen::MatrixXd> coarse_llt_;
  bool dense_coarse_ = false;
};

}  // namespace f2b::detail
