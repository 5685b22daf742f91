#pragma once

#include <ehz/body.hpp>
#include <ehz/loop.hpp>

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace ehz {

/// Solver settings. JSON keys mirror the field names; unknown keys are rejected.
struct SolverConfig {
  int modes = 24;        ///< Fourier truncation order M
  int samples = 128;     ///< quadrature points N (>= 4M + 1)
  int starts = 16;       ///< independent random starts
  std::uint64_t seed = 1;
  double tol_obj = 1e-10;  ///< relative objective decrease treated as stagnation
  double tol_kkt = 1e-4;   ///< threshold for the reported KKT verdict
  int max_iter = 20000;    ///< iteration cap per start
  /// Report the value of the 2M / 2N polish instead of the M / N optimum.
  bool refine = false;

  void validate() const;
  static SolverConfig from_json(const nlohmann::json& j);
  [[nodiscard]] nlohmann::json to_json() const;
};

struct StartSummary {
  int index = 0;
  std::uint64_t seed = 0;
  bool ok = false;  ///< a loop with positive action was found and optimised
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string message;
};

struct KktResult {
  /// RMS over the sample grid of dist(lambda J z + alpha, d(h^2)(z')), divided by lambda.
  double residual = 0.0;
  Vec alpha;
  /// Multiplier mu fitted jointly with alpha (should match lambda).
  double lambda_fit = 0.0;
  double residual_fit = 0.0;
};

struct CapacityResult {
  explicit CapacityResult(ConvexBody body) : sigma(std::move(body)) {}

  ConvexBody sigma;  ///< the body actually optimised over (after recentering)
  double value = 0.0;  ///< (pi/2) * lambda
  /// Estimated discretisation error of `value` (from the mode-doubling polish).
  double value_tolerance = 0.0;
  Loop loop;  ///< minimiser, normalised to A = 1
  double lambda = 0.0;  ///< I(loop)
  Vec alpha;
  double kkt_residual = 0.0;
  double kkt_lambda = 0.0;
  bool kkt_ok = false;  ///< kkt_residual <= tol_kkt
  int starts_used = 0;
  int starts_succeeded = 0;
  int iterations = 0;
  bool converged = false;
  bool refined = false;
  double coarse_value = 0.0;  ///< value at (M, N)
  double fine_value = 0.0;    ///< value after the (2M, 2N) polish
  Vec shift;  ///< sigma = input + shift
  bool recentered = false;
  /// Near-optimal loops from distinct starts (no canonical carrier is chosen).
  std::vector<Loop> carriers;
  std::vector<StartSummary> starts;

  [[nodiscard]] nlohmann::json to_json(bool with_loop = true) const;
};

/// EHZ capacity of a convex body in R^{2n} by minimising I(z) / A(z) over
/// mean-zero Fourier loops with A(z) > 0. The value is an upper bound on the
/// capacity up to the reported tolerance. Throws Error if no start reaches a
/// loop of positive action.
CapacityResult minimize_capacity(const ConvexBody& sigma, const SolverConfig& config = {});
CapacityResult minimize_capacity(const LagrangianProduct& sigma, const SolverConfig& config = {});

/// Weak-criticality residual of z (assumed A(z) = 1) with multiplier lambda.
KktResult kkt_residual(const ConvexBody& sigma, const Loop& z, double lambda);

struct HomogeneityReport {
  double value = 0.0;
  double scaled_value = 0.0;
  double factor = 1.0;
  double relative_error = 0.0;  ///< |c(c S) - c^2 c(S)| / c(c S)
};

HomogeneityReport capacity_homogeneity_check(const ConvexBody& sigma, double c, const SolverConfig& config = {});

/// c * sigma, keeping the product structure (c K x c T) for products.
ConvexBody scaled_body(const ConvexBody& sigma, double c);

/// Translate sigma (factor-wise for products) so the origin is interior.
struct RecenteredBody {
  ConvexBody body;
  Vec shift;
  bool moved;
};
RecenteredBody recenter_for_solver(const ConvexBody& sigma);

}  // namespace ehz
