#pragma once

// Direction grids on the unit sphere and a derivative-free local minimiser
// restricted to the sphere. Internal to the core library.

#include <ehz/types.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace ehz::detail {

/// Default grid sizes: 2048 directions in 2D, 4096 in 3D, 8192 random otherwise.
inline int default_grid_size(int n) {
  if (n <= 2) return 2048;
  if (n == 3) return 4096;
  return 8192;
}

inline std::vector<Vec> direction_grid(int n, int count, std::uint64_t seed = 0x5eed) {
  std::vector<Vec> dirs;
  if (n == 1) {
    dirs.push_back(Vec::Constant(1, 1.0));
    dirs.push_back(Vec::Constant(1, -1.0));
    return dirs;
  }
  if (n == 2) {
    dirs.reserve(count);
    for (int i = 0; i < count; ++i) {
      const double a = 2.0 * std::numbers::pi * i / count;
      Vec u(2);
      u << std::cos(a), std::sin(a);
      dirs.push_back(u);
    }
    return dirs;
  }
  dirs.reserve(count + 2 * n);
  for (int i = 0; i < n; ++i) {
    dirs.push_back(Vec::Unit(n, i));
    dirs.push_back(-Vec::Unit(n, i));
  }
  if (n == 3) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < count; ++i) {
      const double z = 1.0 - 2.0 * (i + 0.5) / count;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double a = golden * i;
      Vec u(3);
      u << r * std::cos(a), r * std::sin(a), z;
      dirs.push_back(u);
    }
    return dirs;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  for (int i = 0; i < count; ++i) {
    Vec u(n);
    for (int k = 0; k < n; ++k) u(k) = gauss(rng);
    dirs.push_back(u.normalized());
  }
  return dirs;
}

/// Orthonormal basis of the complement of `u` (columns), n x (n-1).
inline Mat tangent_basis(const Vec& u) {
  const Eigen::Index n = u.size();
  Eigen::HouseholderQR<Mat> qr(u);
  Mat q = qr.householderQ() * Mat::Identity(n, n);
  return q.rightCols(n - 1);
}

struct SphereMin {
  Vec u;
  double value;
};

/// Compass search for a local minimum of f on the unit sphere starting at u0.
inline SphereMin refine_on_sphere(const std::function<double(const Vec&)>& f, Vec u0,
                                  double step = 0.05, double tol = 1e-12, int max_evals = 20000) {
  Vec u = u0.normalized();
  double fu = f(u);
  const Eigen::Index n = u.size();
  if (n == 1) return {u, fu};
  int evals = 1;
  while (step > tol && evals < max_evals) {
    const Mat basis = tangent_basis(u);
    bool moved = false;
    for (Eigen::Index k = 0; k < n - 1 && !moved; ++k) {
      for (const double sgn : {1.0, -1.0}) {
        Vec cand = (u + sgn * step * basis.col(k)).normalized();
        const double fc = f(cand);
        ++evals;
        if (fc < fu) {
          u = cand;
          fu = fc;
          moved = true;
          break;
        }
      }
    }
    if (!moved) step *= 0.5;
  }
  return {u, fu};
}

/// Grid scan followed by local refinement of the best `keep` grid points.
inline SphereMin minimize_on_sphere(const std::function<double(const Vec&)>& f,
                                    const std::vector<Vec>& grid, int keep = 4, double tol = 1e-12) {
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) scored.emplace_back(f(grid[i]), i);
  const std::size_t k = std::min<std::size_t>(keep, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + k, scored.end());
  // initial step about one grid spacing
  const double n = static_cast<double>(grid.front().size());
  const double step = n <= 1 ? 0.0 : 2.0 * std::pow(static_cast<double>(grid.size()), -1.0 / (n - 1.0));
  SphereMin best{grid[scored[0].second], scored[0].first};
  for (std::size_t i = 0; i < k; ++i) {
    SphereMin r = refine_on_sphere(f, grid[scored[i].second], step, tol);
    if (r.value < best.value) best = r;
  }
  return best;
}

}  // namespace ehz::detail
