#pragma once

#include <ehz/body.hpp>

namespace ehz {

/// Apply the standard complex structure J(q, p) = (-p, q) on R^{2n}.
Vec apply_J(const Vec& x);
/// Column-wise J for a 2n x N matrix.
Mat apply_J(const Mat& x);

/// A mean-zero 2*pi-periodic loop in R^{2n} given by a truncated real Fourier
/// series
///     z(t) = sum_{k=1..M} a_k cos(kt) + b_k sin(kt),
/// together with a uniform quadrature grid t_i = 2*pi*i/N. The constant mode
/// is absent, so every Loop has zero mean.
class Loop {
 public:
  Loop() = default;
  /// Zero loop; requires N >= 4M + 1.
  Loop(int n, int modes, int samples);
  Loop(Mat cos_coeffs, Mat sin_coeffs, int samples);

  [[nodiscard]] int n() const { return static_cast<int>(a_.rows() / 2); }
  [[nodiscard]] int dim() const { return static_cast<int>(a_.rows()); }
  [[nodiscard]] int modes() const { return static_cast<int>(a_.cols()); }
  [[nodiscard]] int samples() const { return samples_; }

  /// Column k-1 holds a_k (resp. b_k).
  [[nodiscard]] const Mat& cos_coeffs() const { return a_; }
  [[nodiscard]] const Mat& sin_coeffs() const { return b_; }
  Mat& cos_coeffs() { return a_; }
  Mat& sin_coeffs() { return b_; }

  [[nodiscard]] Vec eval(double t) const;
  [[nodiscard]] Vec velocity(double t) const;
  /// z(t_i) as columns (2n x N).
  [[nodiscard]] Mat sample_points() const;
  /// z'(t_i) as columns (2n x N).
  [[nodiscard]] Mat sample_velocities() const;
  [[nodiscard]] double time(int i) const;

  [[nodiscard]] Loop scaled(double c) const;
  /// Same loop with time reversed (negates the action).
  [[nodiscard]] Loop reversed() const;
  /// Zero-padded or truncated copy with a new mode count and sample count.
  [[nodiscard]] Loop resized(int modes, int samples) const;

  /// Loop whose Fourier modes 1..M interpolate the given samples (2n x N'),
  /// which must lie on a uniform grid over [0, 2*pi). The mean is discarded.
  static Loop from_samples(const Mat& points, int modes, int samples);

  /// Euclidean norm of the coefficient difference (loops must share shape).
  [[nodiscard]] double coefficient_distance(const Loop& other) const;

 private:
  Mat a_;
  Mat b_;
  int samples_ = 0;
};

/// A(z) = 1/2 * int <Jz, z'> dt, exact in coefficients:
/// A = pi * sum_k k <J a_k, b_k>. The unit circle in the (q1,p1) plane has A = pi.
double symplectic_action(const Loop& z);
/// The same integral by the trapezoidal rule on the loop's sample grid.
double symplectic_action_quadrature(const Loop& z);

/// I(z) = int h^2(z'(t)) dt by the trapezoidal rule on the sample grid.
double dual_action(const ConvexBody& sigma, const Loop& z);
double dual_action(const LagrangianProduct& sigma, const Loop& z);

}  // namespace ehz
