#include <ehz/loop.hpp>

#include <cmath>
#include <numbers>

namespace ehz {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// cos(k t_i), sin(k t_i) tables for k = 1..M (rows) and i = 0..N-1 (columns).
void trig_tables(int modes, int samples, Mat& c, Mat& s) {
  c.resize(modes, samples);
  s.resize(modes, samples);
  for (int i = 0; i < samples; ++i) {
    const double t = kTwoPi * i / samples;
    for (int k = 1; k <= modes; ++k) {
      c(k - 1, i) = std::cos(k * t);
      s(k - 1, i) = std::sin(k * t);
    }
  }
}

}  // namespace

Vec apply_J(const Vec& x) {
  const auto n = x.size() / 2;
  Vec out(x.size());
  out.head(n) = -x.tail(n);
  out.tail(n) = x.head(n);
  return out;
}

Mat apply_J(const Mat& x) {
  const auto n = x.rows() / 2;
  Mat out(x.rows(), x.cols());
  out.topRows(n) = -x.bottomRows(n);
  out.bottomRows(n) = x.topRows(n);
  return out;
}

Loop::Loop(int n, int modes, int samples) : Loop(Mat::Zero(2 * n, modes), Mat::Zero(2 * n, modes), samples) {}

Loop::Loop(Mat cos_coeffs, Mat sin_coeffs, int samples)
    : a_(std::move(cos_coeffs)), b_(std::move(sin_coeffs)), samples_(samples) {
  if (a_.rows() != b_.rows() || a_.cols() != b_.cols()) throw DimensionError("Loop: coefficient shapes differ");
  if (a_.rows() == 0 || a_.rows() % 2 != 0) throw DimensionError("Loop: ambient dimension must be even and positive");
  if (a_.cols() < 1) throw Error("Loop: need at least one Fourier mode");
  if (samples_ < 4 * a_.cols() + 1) throw Error("Loop: sample count must be at least 4 * modes + 1");
}

Vec Loop::eval(double t) const {
  Vec z = Vec::Zero(a_.rows());
  for (int k = 1; k <= modes(); ++k) z += a_.col(k - 1) * std::cos(k * t) + b_.col(k - 1) * std::sin(k * t);
  return z;
}

Vec Loop::velocity(double t) const {
  Vec v = Vec::Zero(a_.rows());
  for (int k = 1; k <= modes(); ++k) v += k * (-a_.col(k - 1) * std::sin(k * t) + b_.col(k - 1) * std::cos(k * t));
  return v;
}

Mat Loop::sample_points() const {
  Mat c;
  Mat s;
  trig_tables(modes(), samples_, c, s);
  return a_ * c + b_ * s;
}

Mat Loop::sample_velocities() const {
  Mat c;
  Mat s;
  trig_tables(modes(), samples_, c, s);
  Vec k = Vec::LinSpaced(modes(), 1.0, modes());
  return (b_ * k.asDiagonal()) * c - (a_ * k.asDiagonal()) * s;
}

double Loop::time(int i) const { return kTwoPi * i / samples_; }

Loop Loop::scaled(double c) const { return Loop(c * a_, c * b_, samples_); }

Loop Loop::reversed() const { return Loop(a_, -b_, samples_); }

Loop Loop::resized(int modes, int samples) const {
  Mat a = Mat::Zero(a_.rows(), modes);
  Mat b = Mat::Zero(b_.rows(), modes);
  const int keep = std::min(modes, this->modes());
  a.leftCols(keep) = a_.leftCols(keep);
  b.leftCols(keep) = b_.leftCols(keep);
  return Loop(std::move(a), std::move(b), samples);
}

Loop Loop::from_samples(const Mat& points, int modes, int samples) {
  const int np = static_cast<int>(points.cols());
  if (np < 2 * modes + 1) throw Error("Loop::from_samples: too few samples for the requested modes");
  Mat c;
  Mat s;
  trig_tables(modes, np, c, s);
  const double w = 2.0 / np;
  return Loop(w * points * c.transpose(), w * points * s.transpose(), samples);
}

double Loop::coefficient_distance(const Loop& other) const {
  if (other.a_.rows() != a_.rows() || other.a_.cols() != a_.cols())
    throw DimensionError("Loop::coefficient_distance: shape mismatch");
  return std::sqrt((a_ - other.a_).squaredNorm() + (b_ - other.b_).squaredNorm());
}

double symplectic_action(const Loop& z) {
  double s = 0.0;
  const Mat& a = z.cos_coeffs();
  const Mat& b = z.sin_coeffs();
  for (int k = 1; k <= z.modes(); ++k) s += k * apply_J(Vec(a.col(k - 1))).dot(b.col(k - 1));
  return std::numbers::pi * s;
}

double symplectic_action_quadrature(const Loop& z) {
  const Mat x = z.sample_points();
  const Mat v = z.sample_velocities();
  const double sum = (apply_J(x).cwiseProduct(v)).sum();
  return 0.5 * kTwoPi / z.samples() * sum;
}

double dual_action(const ConvexBody& sigma, const Loop& z) {
  require_dim(sigma.dim(), z.dim(), "dual_action");
  const Mat v = z.sample_velocities();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < v.cols(); ++i) {
    const double h = sigma.support(v.col(i));
    sum += h * h;
  }
  return kTwoPi / z.samples() * sum;
}

double dual_action(const LagrangianProduct& sigma, const Loop& z) { return dual_action(sigma.body(), z); }

}  // namespace ehz
