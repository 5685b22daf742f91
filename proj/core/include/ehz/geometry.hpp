#pragma once

#include <ehz/body.hpp>

#include <cstdint>

namespace ehz {

/// Resolution knobs for the direction-grid based functionals.
struct GeometryOptions {
  /// Number of grid directions; 0 selects 2048 (2D), 4096 (3D) or 8192 (higher).
  int grid = 0;
  std::uint64_t seed = 0x5eed;
};

/// Polar body {y : <x,y> <= 1 for all x in K}. Closed form for ellipsoids,
/// p-balls, unsmoothed polytopes and dilates / linear images of those; other
/// variants raise CapabilityError. Requires the origin in the interior.
ConvexBody polar(const ConvexBody& body);

struct WidthResult {
  double value;
  Vec direction;  ///< unit normal of a narrowest slab
};

/// min_{|u|=1} h(u) + h(-u), by a direction grid plus local refinement. The
/// value is an upper bound on the exact width up to optimiser tolerance.
WidthResult width(const ConvexBody& body, const GeometryOptions& opts = {});

struct InradiusResult {
  double value;
  Vec center;  ///< centre of a largest inscribed ball
};

/// max_x min_{|u|=1} h(u) - <x,u>. Exact (up to floating point) for
/// unsmoothed polytopes; otherwise cutting planes over a refined direction set.
InradiusResult inradius(const ConvexBody& body, const GeometryOptions& opts = {});

/// (K + (-K)) / 2.
ConvexBody minkowski_symmetral(const ConvexBody& body);

struct VolumeEstimate {
  double value;
  double std_error;
  long samples;
};

/// Monte Carlo volume over the bounding box; deterministic given the seed.
/// Bodies not containing the origin are translated internally first.
VolumeEstimate volume_mc(const ConvexBody& body, long samples, std::uint64_t seed);

struct Recentered {
  ConvexBody body;
  Vec shift;  ///< body = original + shift
  bool moved;
};

/// Translate the body so that the origin is interior (to its inscribed-ball
/// centre). Bodies already containing the origin are returned unchanged.
Recentered recenter(const ConvexBody& body, const GeometryOptions& opts = {});

/// Support-function test h_inner(u) <= h_outer(u) (1 + rel_tol) on a direction grid.
bool nested(const ConvexBody& inner, const ConvexBody& outer, double rel_tol = 1e-9,
            const GeometryOptions& opts = {});

/// Euclidean projection of y onto the body, using only the support function:
/// dist(y, K) = max_{|w|=1} <y,w> - h(w), attained at w*, and the projection
/// is y - dist * w*. Points inside are returned unchanged.
Vec project_onto(const ConvexBody& body, const Vec& y, const GeometryOptions& opts = {});

/// Volume of the Euclidean unit ball in R^n.
double unit_ball_volume(int n);

}  // namespace ehz
