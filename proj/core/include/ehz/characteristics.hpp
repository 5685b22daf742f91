#pragma once

#include <ehz/body.hpp>
#include <ehz/loop.hpp>

#include <json.hpp>

#include <string>
#include <vector>

namespace ehz {

/// Raised when a reconstructed curve is too far from the boundary to be a
/// characteristic (see Characteristic::boundary_deviation).
class ReconstructionError : public Error {
 public:
  using Error::Error;
};

/// A closed curve on the boundary of a body, sampled on a uniform time grid
/// t_i = 2*pi*i/N (columns of `samples`, in time order).
struct Characteristic {
  Mat samples;
  int modes = 0;  ///< Fourier order of the source loop (the curve is a trig polynomial of this order)
  double lambda = 0.0;
  Vec alpha;
  double action = 0.0;              ///< A(gamma), exact from the Fourier coefficients of the samples
  double boundary_deviation = 0.0;  ///< max_i |g(gamma_i) - 1|
  double boundary_rms = 0.0;

  [[nodiscard]] int dim() const { return static_cast<int>(samples.rows()); }
  [[nodiscard]] int size() const { return static_cast<int>(samples.cols()); }
  /// The curve as a Fourier loop (mean removed).
  [[nodiscard]] Loop as_loop() const;
  /// Velocity at the sample times (exact derivative of the trig polynomial).
  [[nodiscard]] Mat velocities() const;
};

/// gamma = sqrt(pi / (2 lambda)) (lambda J z + alpha). The deviation from the
/// boundary is measured and reported; above `hard_cap` a ReconstructionError
/// is thrown. Requires lambda > 0 and a body with the origin in its interior.
Characteristic reconstruct(const ConvexBody& sigma, const Loop& z, double lambda, const Vec& alpha,
                           double hard_cap = 0.25);

/// z = J^{-1} ((2 pi d)^{-1/2} (gamma - mean)), fitted to `modes` Fourier modes
/// (0 = the characteristic's own order). For gamma = reconstruct(z, lambda, .)
/// the choice d = lambda / 4 returns z.
Loop inverse_map(const Characteristic& gamma, double d, int modes = 0);

/// Data-driven speed constant: the mean of |gamma'| / |grad g^2(gamma)| over
/// samples where the gauge is differentiable. Equals lambda / 4 for exact
/// characteristics.
double estimate_speed_constant(const ConvexBody& sigma, const Characteristic& gamma);

struct InclusionDefect {
  double max_angle = 0.0;  ///< radians, over samples with a well-defined normal cone
  double rms_angle = 0.0;
  int checked = 0;
};

/// Angle between the finite-difference velocity and J applied to the normal
/// cone of sigma at gamma(t) (blockwise cone for products).
InclusionDefect inclusion_defect(const ConvexBody& sigma, const Characteristic& gamma);

enum class TrajectoryKind { Proper, Gliding, MixedUndetermined };
std::string to_string(TrajectoryKind k);

struct BounceThresholds {
  /// A sample is p-moving when |q'| < moving_fraction * max|gamma'| (and
  /// symmetrically q-moving).
  double moving_fraction = 0.05;
  /// Same-type segments separated by fewer cells are merged.
  int merge_cells = 2;
  /// Longest run of samples where q and p both move that still counts as an
  /// instantaneous switch; 0 selects N / M (one wavelength of the highest mode).
  int transition_cells = 0;
  /// Normalised |<grad g_T(p), grad g_K(q)>| below which a sample is on the gliding set.
  double orthogonality = 1e-3;
  /// Maximum |g - 1| accepted for gamma to count as lying on the boundary.
  double boundary = 0.25;
};

/// A closed (K,T)-billiard trajectory. Bounce points are listed so that
/// length = sum_j h_T(q_{j+1} - q_j) (cyclically); this is the reverse of the
/// time order of the characteristic. momenta[j] is the momentum on the
/// segment from bounce_points[j] to bounce_points[j+1].
struct BilliardTrajectory {
  std::vector<Vec> bounce_points;
  std::vector<Vec> momenta;
  double length = 0.0;
  TrajectoryKind kind = TrajectoryKind::MixedUndetermined;
  std::string diagnostic;
  int longest_transition = 0;  ///< longest run of samples with q and p both moving
  double max_orthogonality = 0.0;

  [[nodiscard]] int bounces() const { return static_cast<int>(bounce_points.size()); }
  [[nodiscard]] nlohmann::json to_json() const;
};

/// h_T-length sum_j h_T(q_{j+1} - q_j) of a closed polygon.
double polygon_length(const ConvexBody& T, const std::vector<Vec>& points);

/// Split a characteristic on the boundary of K x T into q-moving and p-moving
/// segments and read off the billiard trajectory. Throws Error when gamma is
/// not within `thresholds.boundary` of the boundary of K x T.
BilliardTrajectory extract_bounces(const Characteristic& gamma, const LagrangianProduct& product,
                                   const BounceThresholds& thresholds = {});

nlohmann::json characteristic_to_json(const Characteristic& gamma);
/// CSV with header "t,x1,...,x2n".
std::string characteristic_to_csv(const Characteristic& gamma);

}  // namespace ehz
