#pragma once

#include <ehz/billiards.hpp>
#include <ehz/body.hpp>
#include <ehz/capacity.hpp>
#include <ehz/geometry.hpp>
#include <ehz/report.hpp>

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace ehz {

/// Settings shared by all experiments. JSON keys mirror the field names
/// ("solver" and "orbit" are nested objects); unknown keys are rejected.
struct HarnessConfig {
  SolverConfig solver = default_solver();
  OrbitSearchConfig orbit = default_orbit();
  int m_min = 2;  ///< bounce range of the direct orbit oracle
  int m_max = 6;
  std::vector<int> dims{2, 3};
  std::uint64_t seed = 1;  ///< catalog and pair selection
  int bm_pairs = 50;
  /// Pairs (the first ones of the Brunn-Minkowski sample) on which the
  /// capacity form with T + T is solved as well.
  int sqrt_bm_pairs = 8;
  int nested_pairs = 24;
  int nested_product_pairs = 4;
  long volume_samples = 400000;
  /// Inequality slack = slack_factor x the summed solver tolerances.
  double slack_factor = 3.0;
  /// Relative agreement required between the solver and the orbit oracle.
  double oracle_tolerance = 0.02;
  /// Relative tolerance of the purely geometric identities (width, inradius).
  double geometry_tolerance = 1e-4;

  static SolverConfig default_solver();
  static OrbitSearchConfig default_orbit();
  void validate() const;
  static HarnessConfig from_json(const nlohmann::json& j);
  [[nodiscard]] nlohmann::json to_json() const;
};

struct CatalogEntry {
  std::string id;
  ConvexBody body;
};

/// Balls, ellipsoids with axis ratios 2 and 5, p-balls (p = 2, 4, 8), the
/// smoothed cube and simplex, and two random sums of ellipsoids, per
/// dimension in `dims`. Deterministic in `seed`.
std::vector<CatalogEntry> builtin_catalog(const std::vector<int>& dims, std::uint64_t seed);

/// [{"id": "...", "body": {...}}, ...] or {"bodies": [...]}.
std::vector<CatalogEntry> catalog_from_json(const nlohmann::json& j);
nlohmann::json catalog_to_json(const std::vector<CatalogEntry>& catalog);

/// Nested pair K1 within K2 for the monotonicity experiment.
struct NestedPair {
  std::string id;
  ConvexBody inner;
  ConvexBody outer;
};

/// Dilations, Minkowski sums with a small ball and identical pairs of
/// catalog bodies; `count` pairs chosen deterministically from `seed`.
std::vector<NestedPair> nested_pairs_from_catalog(const std::vector<CatalogEntry>& catalog, int count,
                                                  std::uint64_t seed);

/// Runs experiments with a shared, thread-safe cache of capacity solves, so
/// that a body appearing in several experiments is solved once.
class Harness {
 public:
  explicit Harness(HarnessConfig config);

  [[nodiscard]] const HarnessConfig& config() const { return config_; }

  /// Solver result for the Lagrangian product K x T (cached).
  std::shared_ptr<const CapacityResult> solve(const ConvexBody& K, const ConvexBody& T);
  /// Solver result for a general body (cached).
  std::shared_ptr<const CapacityResult> solve(const ConvexBody& sigma);
  /// All product results solved so far, keyed by case-independent body encoding.
  [[nodiscard]] std::vector<std::pair<LagrangianProduct, std::shared_ptr<const CapacityResult>>> product_results() const;

  /// xi_T(K1 + K2) >= xi_T(K1) + xi_T(K2) for one pair, with an equality probe
  /// when K2 is a translate of K1 and optionally the square-root form for
  /// (K1 + K2) x (T + T).
  CaseRecord bm_case(const std::string& id, const ConvexBody& K1, const ConvexBody& K2, const ConvexBody& T,
                     bool translate_of_first, bool capacity_form);

  ExperimentReport verify_bm_billiards(const ConvexBody& K1, const ConvexBody& K2, const ConvexBody& T);
  /// bm_pairs distinct catalog pairs of equal dimension (T = Euclidean ball).
  ExperimentReport verify_bm_suite(const std::vector<CatalogEntry>& catalog);
  ExperimentReport verify_volume_bound(const std::vector<CatalogEntry>& catalog);
  ExperimentReport verify_inradius_bounds(const std::vector<CatalogEntry>& catalog);
  ExperimentReport verify_monotonicity(const std::vector<NestedPair>& pairs, const ConvexBody* T = nullptr);
  /// Solver value against the shortest closed orbit over m in [m_min, m_max].
  ExperimentReport verify_oracle_agreement(const std::vector<CatalogEntry>& catalog);

 private:
  using Entry = std::shared_ptr<const CapacityResult>;
  Entry cached(const std::string& key, const std::function<CapacityResult()>& compute);

  HarnessConfig config_;
  nlohmann::json config_json_;
  std::string hash_;
  mutable std::mutex mutex_;
  std::map<std::string, Entry> cache_;
  std::vector<std::pair<LagrangianProduct, Entry>> products_;

  ExperimentReport start_report(const std::string& name) const;
  void finish_report(ExperimentReport& report) const;
};

/// Experiments of a suite: "bm", "volume", "inradius", "monotonicity", "oracle".
inline const std::vector<std::string>& known_experiments() {
  static const std::vector<std::string> names{"bm", "volume", "inradius", "monotonicity", "oracle"};
  return names;
}

struct SuiteResult {
  std::vector<ExperimentReport> reports;
  /// 0 iff every case of every experiment passed, 1 otherwise.
  int exit_code = 0;
};

/// Suite description:
///   {"experiments": ["bm", ...], "harness": {...}, "catalog": [...], "out": "dir"}
/// All keys optional except "experiments"; unknown keys raise ConfigError.
/// Writes one JSON + CSV report per experiment, volume_ratio_vs_n.csv and
/// suite.json into the output directory (when one is given).
SuiteResult run_suite(const nlohmann::json& suite, const std::string& out_dir = "");
SuiteResult run_suite_file(const std::string& path, const std::string& out_dir = "");

}  // namespace ehz
