#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace ehz {

inline constexpr int kReportSchema = 1;

enum class Verdict { Pass, Fail, Inconclusive };
std::string to_string(Verdict v);

/// One inequality or identity. Relations:
///   "<=" : lhs <= rhs + slack
///   ">=" : lhs >= rhs - slack
///   "==" : |lhs - rhs| <= slack
struct Check {
  std::string name;
  std::string relation;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  /// Signed distance to violation: positive when the check holds without
  /// using the slack, negative by the amount of slack consumed.
  [[nodiscard]] double margin() const;
  [[nodiscard]] bool holds() const;
};

struct CaseRecord {
  std::string id;
  nlohmann::json bodies = nlohmann::json::object();
  nlohmann::json quantities = nlohmann::json::object();
  std::vector<Check> checks;
  /// Participating solver results all converged; otherwise the case is
  /// inconclusive whatever the checks say.
  bool solvers_converged = true;
  /// Set when a precondition failed (e.g. a pair that is not nested).
  bool rejected = false;
  std::string note;
  std::uint64_t seed = 0;
  double runtime = 0.0;  ///< seconds; reported in the timing section only

  /// Fail if a check fails (with converged solvers), inconclusive if any
  /// solver did not converge or the case was rejected, pass otherwise.
  [[nodiscard]] Verdict verdict() const;
};

struct ExperimentReport {
  std::string experiment;
  nlohmann::json config = nlohmann::json::object();
  std::string config_hash;
  std::vector<CaseRecord> records;
  nlohmann::json aggregate = nlohmann::json::object();
  std::string started;
  std::string finished;

  /// Sort records by id and fill the verdict counts of `aggregate`.
  void finalize();
  [[nodiscard]] int count(Verdict v) const;
  [[nodiscard]] bool all_pass() const { return count(Verdict::Pass) == static_cast<int>(records.size()); }

  /// Deterministic part first; wall-clock data lives under "timing".
  [[nodiscard]] nlohmann::json to_json() const;
  /// One row per check: experiment,case,check,relation,lhs,rhs,slack,margin,verdict.
  [[nodiscard]] std::string to_csv() const;
};

/// FNV-1a (64 bit) of the compact JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

/// ISO-8601 UTC time stamp of the current time.
std::string utc_timestamp();

/// Write <dir>/<experiment>.json and <dir>/<experiment>.csv (creating dir).
void write_report(const ExperimentReport& report, const std::string& dir);

}  // namespace ehz
