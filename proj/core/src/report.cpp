#include <ehz/report.hpp>
#include <ehz/types.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace ehz {

using nlohmann::json;

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass:
      return "pass";
    case Verdict::Fail:
      return "fail";
    case Verdict::Inconclusive:
      return "inconclusive";
  }
  return "unknown";
}

double Check::margin() const {
  if (relation == "<=") return rhs - lhs;
  if (relation == ">=") return lhs - rhs;
  if (relation == "==") return -std::abs(lhs - rhs);
  throw Error("Check: unknown relation '" + relation + "'");
}

bool Check::holds() const {
  const double m = margin();
  if (!std::isfinite(m)) return false;
  return m >= -slack;
}

Verdict CaseRecord::verdict() const {
  if (rejected || !solvers_converged) return Verdict::Inconclusive;
  for (const auto& c : checks)
    if (!c.holds()) return Verdict::Fail;
  return Verdict::Pass;
}

void ExperimentReport::finalize() {
  std::sort(records.begin(), records.end(), [](const CaseRecord& a, const CaseRecord& b) { return a.id < b.id; });
  aggregate["cases"] = records.size();
  aggregate["pass"] = count(Verdict::Pass);
  aggregate["fail"] = count(Verdict::Fail);
  aggregate["inconclusive"] = count(Verdict::Inconclusive);
  std::size_t checks = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& r : records) {
    checks += r.checks.size();
    for (const auto& c : r.checks)
      if (c.slack > 0 || c.margin() < 0) worst = std::min(worst, (c.margin() + c.slack) / std::max(c.slack, 1e-300));
  }
  aggregate["checks"] = checks;
  // smallest (margin + slack) / slack over checks: < 0 means a violation
  aggregate["min_relative_headroom"] = std::isfinite(worst) ? json(worst) : json(nullptr);
}

int ExperimentReport::count(Verdict v) const {
  return static_cast<int>(std::count_if(records.begin(), records.end(), [v](const CaseRecord& r) { return r.verdict() == v; }));
}

namespace {

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

json ExperimentReport::to_json() const {
  json recs = json::array();
  json runtimes = json::object();
  for (const auto& r : records) {
    json checks = json::array();
    for (const auto& c : r.checks) {
      checks.push_back({{"name", c.name},
                        {"relation", c.relation},
                        {"lhs", number(c.lhs)},
                        {"rhs", number(c.rhs)},
                        {"slack", number(c.slack)},
                        {"margin", number(c.margin())},
                        {"holds", c.holds()}});
    }
    json rec = {{"id", r.id},
                {"bodies", r.bodies},
                {"quantities", r.quantities},
                {"checks", checks},
                {"solvers_converged", r.solvers_converged},
                {"verdict", to_string(r.verdict())},
                {"seed", r.seed},
                {"config_hash", config_hash}};
    if (!r.note.empty()) rec["note"] = r.note;
    recs.push_back(std::move(rec));
    runtimes[r.id] = r.runtime;
  }
  return {{"schema", kReportSchema},
          {"experiment", experiment},
          {"config_hash", config_hash},
          {"config", config},
          {"records", recs},
          {"aggregate", aggregate},
          {"timing", {{"started", started}, {"finished", finished}, {"runtimes", runtimes}}}};
}

std::string ExperimentReport::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "experiment,case,check,relation,lhs,rhs,slack,margin,verdict\n";
  for (const auto& r : records) {
    const auto v = to_string(r.verdict());
    for (const auto& c : r.checks) {
      out << experiment << ',' << r.id << ',' << c.name << ',' << c.relation << ',' << c.lhs << ',' << c.rhs << ','
          << c.slack << ',' << c.margin() << ',' << v << '\n';
    }
  }
  return out.str();
}

std::string config_hash(const json& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : config.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

void write_report(const ExperimentReport& report, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("write_report: cannot create '" + dir + "': " + ec.message());
  const fs::path base = fs::path(dir) / report.experiment;
  {
    std::ofstream f(base.string() + ".json");
    if (!f) throw Error("write_report: cannot write " + base.string() + ".json");
    f << report.to_json().dump(2) << '\n';
  }
  {
    std::ofstream f(base.string() + ".csv");
    if (!f) throw Error("write_report: cannot write " + base.string() + ".csv");
    f << report.to_csv();
  }
}

}  // namespace ehz
