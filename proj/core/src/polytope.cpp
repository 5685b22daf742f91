#include <ehz/body.hpp>

#include <cmath>
#include <numeric>

namespace ehz {

namespace {

double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  double r = 1.0;
  for (std::size_t i = 0; i < k; ++i) r = r * static_cast<double>(n - i) / static_cast<double>(i + 1);
  return r;
}

void add_facet(shapes::Facets& out, const Vec& a, double b) {
  for (std::size_t j = 0; j < out.normals.size(); ++j) {
    if ((out.normals[j] - a).norm() < 1e-9 && std::abs(out.offsets[j] - b) < 1e-9 * (1.0 + std::abs(b))) return;
  }
  out.normals.push_back(a);
  out.offsets.push_back(b);
}

}  // namespace

shapes::Facets polytope_facets(const std::vector<Vec>& vertices) {
  if (vertices.empty()) throw Error("polytope_facets: no vertices");
  const auto n = static_cast<std::size_t>(vertices.front().size());
  const std::size_t m = vertices.size();

  double scale = 0.0;
  for (const auto& v : vertices) scale = std::max(scale, (v - vertices.front()).norm());
  const double tol = 1e-10 * std::max(scale, 1e-300);

  Mat diffs(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) diffs.col(static_cast<Eigen::Index>(i)) = vertices[i] - vertices.front();
  Eigen::FullPivLU<Mat> rank_lu(diffs);
  rank_lu.setThreshold(1e-10);
  if (m < n + 1 || static_cast<std::size_t>(rank_lu.rank()) < n) {
    throw Error("polytope_facets: vertices do not span a full-dimensional polytope");
  }
  if (binomial(m, n) > 5e6) throw CapabilityError("polytope_facets: too many vertex subsets to enumerate");

  shapes::Facets out;
  if (n == 1) {
    double lo = vertices.front()(0);
    double hi = lo;
    for (const auto& v : vertices) {
      lo = std::min(lo, v(0));
      hi = std::max(hi, v(0));
    }
    out.normals.push_back(Vec::Constant(1, 1.0));
    out.offsets.push_back(hi);
    out.normals.push_back(Vec::Constant(1, -1.0));
    out.offsets.push_back(-lo);
    return out;
  }

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Mat d(static_cast<Eigen::Index>(n - 1), static_cast<Eigen::Index>(n));
  while (true) {
    const Vec& p0 = vertices[idx[0]];
    for (std::size_t i = 1; i < n; ++i) d.row(static_cast<Eigen::Index>(i - 1)) = (vertices[idx[i]] - p0).transpose();
    Eigen::JacobiSVD<Mat> svd(d, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const bool independent = sv.size() == 0 || sv(sv.size() - 1) > 1e-10 * std::max(sv(0), 1e-300);
    if (independent) {
      Vec a = svd.matrixV().col(static_cast<Eigen::Index>(n - 1));
      a.normalize();
      double b = a.dot(p0);
      bool below = true;
      bool above = true;
      for (const auto& v : vertices) {
        const double s = a.dot(v) - b;
        if (s > tol) below = false;
        if (s < -tol) above = false;
        if (!below && !above) break;
      }
      if (below || above) {
        if (!below) {
          a = -a;
          b = -b;
        }
        // snap tiny components so that symmetric inputs give canonical normals
        for (Eigen::Index k = 0; k < a.size(); ++k)
          if (std::abs(a(k)) < 1e-15) a(k) = 0.0;
        add_facet(out, a, b);
      }
    }
    // next combination
    std::size_t i = n;
    while (i > 0 && idx[i - 1] == m - n + i - 1) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t j = i; j < n; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

}  // namespace ehz
