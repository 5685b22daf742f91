#include "test_util.hpp"

#include <ehz/geometry.hpp>
#include <ehz/harness.hpp>
#include <ehz/report.hpp>

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

using namespace ehz;
using namespace ehz::testing;
using nlohmann::json;

namespace {

HarnessConfig small_config() {
  HarnessConfig c;
  c.solver.starts = 2;
  c.dims = {2};
  c.volume_samples = 20000;
  return c;
}

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("ehz-test-" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

json read_json(const std::filesystem::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("checks and verdicts") {
  const Check le{"le", "<=", 1.0, 2.0, 0.1};
  CHECK(le.margin() == doctest::Approx(1.0));
  CHECK(le.holds());
  const Check ge{"ge", ">=", 1.0, 1.05, 0.1};
  CHECK(ge.margin() == doctest::Approx(-0.05));
  CHECK(ge.holds());
  const Check eq{"eq", "==", 1.0, 1.3, 0.1};
  CHECK(eq.margin() == doctest::Approx(-0.3));
  CHECK_FALSE(eq.holds());

  CaseRecord rec;
  rec.checks = {le, ge};
  CHECK(rec.verdict() == Verdict::Pass);
  rec.checks.push_back(eq);
  CHECK(rec.verdict() == Verdict::Fail);
  rec.solvers_converged = false;
  CHECK(rec.verdict() == Verdict::Inconclusive);
  CaseRecord rejected;
  rejected.rejected = true;
  CHECK(rejected.verdict() == Verdict::Inconclusive);
  CHECK(to_string(Verdict::Pass) == "pass");
  CHECK(to_string(Verdict::Fail) == "fail");
  CHECK(to_string(Verdict::Inconclusive) == "inconclusive");
}

TEST_CASE("experiment reports") {
  ExperimentReport rep;
  rep.experiment = "demo";
  rep.config = {{"x", 1}};
  rep.config_hash = config_hash(rep.config);
  CaseRecord b;
  b.id = "b";
  b.checks = {{"c", "<=", 1.0, 2.0, 0.0}};
  b.runtime = 1.5;
  CaseRecord a;
  a.id = "a";
  a.checks = {{"c", ">=", 1.0, 2.0, 0.0}};
  rep.records = {b, a};
  rep.finalize();
  CHECK(rep.records.front().id == "a");
  CHECK(rep.count(Verdict::Pass) == 1);
  CHECK(rep.count(Verdict::Fail) == 1);
  CHECK_FALSE(rep.all_pass());
  const auto j = rep.to_json();
  CHECK(j.at("schema") == kReportSchema);
  CHECK(j.at("records").size() == 2);
  CHECK(j.at("records")[0].at("verdict") == "fail");
  CHECK(j.at("aggregate").at("pass") == 1);
  // wall-clock data is kept out of the records
  CHECK_FALSE(j.at("records")[1].contains("runtime"));
  CHECK(j.contains("timing"));
  const auto csv = rep.to_csv();
  CHECK(csv.rfind("experiment,case,check,relation,lhs,rhs,slack,margin,verdict\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

  const auto dir = fresh_dir("report");
  write_report(rep, dir.string());
  CHECK(std::filesystem::exists(dir / "demo.json"));
  CHECK(std::filesystem::exists(dir / "demo.csv"));
  CHECK(read_json(dir / "demo.json").at("experiment") == "demo");
  std::filesystem::remove_all(dir);
}

TEST_CASE("configuration hashing and time stamps") {
  const json a = {{"x", 1}, {"y", {1, 2}}};
  CHECK(config_hash(a) == config_hash(json::parse(a.dump())));
  CHECK(config_hash(a).size() == 16);
  CHECK(config_hash(a) != config_hash(json{{"x", 2}, {"y", {1, 2}}}));
  const auto ts = utc_timestamp();
  CHECK(ts.size() == 20);
  CHECK(ts.back() == 'Z');
}

TEST_CASE("harness configuration") {
  const HarnessConfig c;
  CHECK_NOTHROW(c.validate());
  const auto j = c.to_json();
  CHECK(HarnessConfig::from_json(j).to_json() == j);
  const auto partial = HarnessConfig::from_json(json{{"bm_pairs", 3}, {"solver", {{"starts", 2}}}});
  CHECK(partial.bm_pairs == 3);
  CHECK(partial.solver.starts == 2);
  CHECK(partial.solver.modes == c.solver.modes);
  CHECK_THROWS_AS(HarnessConfig::from_json(json{{"bogus", 1}}), ConfigError);
  CHECK_THROWS_AS(HarnessConfig::from_json(json{{"m_min", 5}, {"m_max", 3}}), ConfigError);
  CHECK_THROWS_AS(HarnessConfig::from_json(json{{"bm_pairs", -1}}), ConfigError);
  CHECK_THROWS_AS(HarnessConfig::from_json(json{{"dims", "two"}}), ConfigError);
  CHECK_THROWS_AS(HarnessConfig::from_json(json{{"solver", {{"modes", 64}, {"samples", 32}}}}), ConfigError);
}

TEST_CASE("built-in catalog") {
  const auto cat = builtin_catalog({2, 3}, 1);
  CHECK(cat.size() == 18);
  std::set<std::string> ids;
  for (const auto& e : cat) {
    CAPTURE(e.id);
    ids.insert(e.id);
    CHECK(e.body.origin_interior());
    CHECK((e.body.dim() == 2 || e.body.dim() == 3));
  }
  CHECK(ids.size() == cat.size());
  CHECK(ids.count("n2/ball"));
  CHECK(ids.count("n3/cube-smoothed"));
  // deterministic in the seed, and the random entries depend on it
  CHECK(catalog_to_json(builtin_catalog({2, 3}, 1)) == catalog_to_json(cat));
  CHECK(catalog_to_json(builtin_catalog({2, 3}, 2)) != catalog_to_json(cat));
  // JSON round trip
  const auto back = catalog_from_json(catalog_to_json(cat));
  CHECK(catalog_to_json(back) == catalog_to_json(cat));
  CHECK(catalog_from_json(json{{"bodies", catalog_to_json(cat)}}).size() == cat.size());
  CHECK_THROWS_AS(catalog_from_json(json{{"items", json::array()}}), ConfigError);
  const json dup = {{{"id", "a"}, {"body", {{"type", "ball"}, {"dim", 2}}}},
                    {{"id", "a"}, {"body", {{"type", "ball"}, {"dim", 2}}}}};
  CHECK_THROWS_AS(catalog_from_json(dup), ConfigError);
}

TEST_CASE("nested pairs are nested") {
  const auto cat = builtin_catalog({2}, 1);
  const auto pairs = nested_pairs_from_catalog(cat, 10, 3);
  CHECK(pairs.size() == 10);
  int identical = 0;
  for (const auto& p : pairs) {
    CAPTURE(p.id);
    CHECK(p.inner.dim() == p.outer.dim());
    CHECK(nested(p.inner, p.outer));
    if (p.id.find("identical") != std::string::npos) ++identical;
  }
  CHECK(identical == 2);
  CHECK(nested_pairs_from_catalog(cat, 10, 3).front().id == pairs.front().id);
}

TEST_CASE("Brunn-Minkowski case on discs is an equality") {
  Harness h(small_config());
  const auto disc = ConvexBody::ball(2);
  const auto rec = h.bm_case("discs", disc, disc, disc, true, false);
  CHECK(rec.verdict() == Verdict::Pass);
  REQUIRE_FALSE(rec.checks.empty());
  bool equality = false;
  for (const auto& c : rec.checks)
    if (c.relation == "==") equality = true;
  CHECK(equality);
  // the cache returns the same object for the same body
  CHECK(h.solve(disc, disc).get() == h.solve(disc, disc).get());
  CHECK(h.solve(disc, disc)->value == doctest::Approx(4.0).epsilon(0.02));
  CHECK(h.product_results().size() >= 1);
}

TEST_CASE("suites") {
  SUBCASE("an empty suite passes and writes a summary") {
    const auto dir = fresh_dir("empty");
    const auto r = run_suite(json{{"experiments", json::array()}}, dir.string());
    CHECK(r.exit_code == 0);
    CHECK(r.reports.empty());
    CHECK(read_json(dir / "suite.json").at("exit_code") == 0);
    std::filesystem::remove_all(dir);
  }
  SUBCASE("configuration errors") {
    CHECK_THROWS_AS(run_suite(json{{"experiments", {"nope"}}}), ConfigError);
    CHECK_THROWS_AS(run_suite(json{{"experiments", json::array()}, {"extra", 1}}), ConfigError);
    CHECK_THROWS_AS(run_suite(json{{"harness", json::object()}}), ConfigError);
    const json bad_body = {{"experiments", {"volume"}},
                           {"catalog", {{{"id", "x"}, {"body", {{"type", "dodecahedron"}}}}}}};
    CHECK_THROWS_AS(run_suite(bad_body), ConfigError);
  }
  SUBCASE("a one-body volume experiment") {
    const auto dir = fresh_dir("volume");
    const json suite = {{"experiments", {"volume"}},
                        {"harness", {{"dims", {2}}, {"volume_samples", 20000}, {"solver", {{"starts", 2}}}}},
                        {"catalog", {{{"id", "disc"}, {"body", {{"type", "ball"}, {"dim", 2}}}}}},
                        {"out", dir.string()}};
    const auto r = run_suite(suite);
    REQUIRE(r.reports.size() == 1);
    CHECK(r.exit_code == 0);
    CHECK(r.reports[0].all_pass());
    CHECK(std::filesystem::exists(dir / "volume.json"));
    CHECK(std::filesystem::exists(dir / "volume.csv"));
    std::ifstream csv(dir / "volume_ratio_vs_n.csv");
    std::string header, row;
    std::getline(csv, header);
    CHECK(header == "case,n,ratio,ratio_bound");
    std::getline(csv, row);
    CHECK(row.rfind("disc,2,", 0) == 0);
    // disc: xi = 4, ratio = 4 / (sqrt(2) sqrt(pi))
    const auto& rec = r.reports[0].records;
    auto it = std::find_if(rec.begin(), rec.end(), [](const CaseRecord& c) { return c.id == "disc"; });
    REQUIRE(it != rec.end());
    CHECK(it->quantities.at("ratio").get<double>() ==
          doctest::Approx(4.0 / (std::sqrt(2.0) * std::sqrt(M_PI))).epsilon(0.03));
    std::filesystem::remove_all(dir);
  }
}

}  // TEST_SUITE
