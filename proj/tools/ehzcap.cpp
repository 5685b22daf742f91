#include <ehz/billiards.hpp>
#include <ehz/body_json.hpp>
#include <ehz/capacity.hpp>
#include <ehz/characteristics.hpp>
#include <ehz/harness.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using nlohmann::json;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

ehz::Vec parse_vector(const std::string& text) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ehz::ConfigError("cannot parse vector component '" + item + "'");
    }
  }
  if (values.empty()) throw ehz::ConfigError("empty vector");
  return Eigen::Map<const ehz::Vec>(values.data(), static_cast<Eigen::Index>(values.size()));
}

// Radial projection of x onto the boundary of the body.
ehz::Vec onto_boundary(const ehz::ConvexBody& body, const ehz::Vec& x) {
  ehz::require_dim(body.dim(), x.size(), "start point");
  const double g = body.gauge(x);
  if (!(g > 0)) throw ehz::ConfigError("start point must be non-zero");
  return x / g;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ehz::Error("cannot write " + path);
  out << text;
}

int run_capacity(const std::vector<std::string>& files, const std::string& config_path, bool with_loop,
                 const std::string& csv_path) {
  ehz::SolverConfig cfg;
  if (!config_path.empty()) cfg = ehz::SolverConfig::from_json(ehz::read_json_file(config_path));
  std::optional<ehz::LagrangianProduct> product;
  std::optional<ehz::ConvexBody> body;
  if (files.size() == 2) {
    product = ehz::LagrangianProduct{ehz::body_from_json(ehz::read_json_file(files[0])),
                                     ehz::body_from_json(ehz::read_json_file(files[1]))};
  } else {
    body = ehz::body_from_json(ehz::read_json_file(files[0]));
    if (const auto* p = std::get_if<ehz::shapes::Product>(&body->variant())) {
      product = ehz::LagrangianProduct{p->q_body, p->p_body};
    }
  }
  const auto result = product ? ehz::minimize_capacity(*product, cfg) : ehz::minimize_capacity(*body, cfg);
  json out = result.to_json(with_loop);
  const auto gamma = ehz::reconstruct(result.sigma, result.loop, result.lambda, result.alpha);
  if (with_loop) out["characteristic"] = ehz::characteristic_to_json(gamma);
  if (product) {
    // the solver may have translated the factors; split the body it used
    const auto& used = std::get<ehz::shapes::Product>(result.sigma.variant());
    const auto traj = ehz::extract_bounces(gamma, ehz::LagrangianProduct{used.q_body, used.p_body});
    out["trajectory"] = traj.to_json();
  }
  if (!csv_path.empty()) write_text(csv_path, ehz::characteristic_to_csv(gamma));
  std::cout << out.dump(2) << '\n';
  return result.converged ? kExitPass : kExitFail;
}

int run_trace(const std::string& k_file, const std::string& t_file, int bounces, const std::string& q_text,
              const std::string& p_text, const std::string& csv_path) {
  const auto K = ehz::body_from_json(ehz::read_json_file(k_file));
  const auto T = ehz::body_from_json(ehz::read_json_file(t_file));
  ehz::require_dim(K.dim(), T.dim(), "billiard trace");
  const int n = K.dim();
  const ehz::Vec q = onto_boundary(K, q_text.empty() ? ehz::Vec(ehz::Vec::Unit(n, 0)) : parse_vector(q_text));
  // default momentum: straight back through the body along the inward normal
  const ehz::Vec p = p_text.empty() ? onto_boundary(T, K.gauge_gradient(q)) : onto_boundary(T, parse_vector(p_text));
  const auto tr = ehz::trace(K, T, ehz::BilliardState{q, p}, bounces);
  json states = json::array();
  std::ostringstream csv;
  csv.precision(17);
  csv << "k";
  for (int i = 0; i < n; ++i) csv << ",q" << (i + 1);
  for (int i = 0; i < n; ++i) csv << ",p" << (i + 1);
  csv << '\n';
  for (std::size_t k = 0; k < tr.states.size(); ++k) {
    const auto& s = tr.states[k];
    states.push_back({{"q", ehz::vec_to_json(s.q)}, {"p", ehz::vec_to_json(s.p)}});
    csv << k;
    for (int i = 0; i < n; ++i) csv << ',' << s.q(i);
    for (int i = 0; i < n; ++i) csv << ',' << s.p(i);
    csv << '\n';
  }
  if (!csv_path.empty()) write_text(csv_path, csv.str());
  json out = {{"bounces", bounces}, {"completed", tr.completed}, {"states", states}};
  if (!tr.diagnostic.empty()) out["diagnostic"] = tr.diagnostic;
  std::cout << out.dump(2) << '\n';
  return tr.completed ? kExitPass : kExitFail;
}

int run_shortest(const std::string& k_file, const std::string& t_file, int m, int m_max,
                 const ehz::OrbitSearchConfig& cfg, const std::string& csv_path) {
  const auto K = ehz::body_from_json(ehz::read_json_file(k_file));
  const auto T = ehz::body_from_json(ehz::read_json_file(t_file));
  const auto orbit = m > 0 ? ehz::shortest_orbit_direct(K, T, m, cfg) : ehz::shortest_orbit_range(K, T, 2, m_max, cfg);
  if (!csv_path.empty()) write_text(csv_path, ehz::orbit_to_csv(T, orbit));
  std::cout << orbit.to_json().dump(2) << '\n';
  return kExitPass;
}

void print_summary(const std::vector<ehz::ExperimentReport>& reports) {
  for (const auto& r : reports) {
    std::cerr << r.experiment << ": " << r.count(ehz::Verdict::Pass) << " pass, " << r.count(ehz::Verdict::Fail)
              << " fail, " << r.count(ehz::Verdict::Inconclusive) << " inconclusive (" << r.records.size()
              << " cases)\n";
    for (const auto& rec : r.records) {
      if (rec.verdict() == ehz::Verdict::Pass) continue;
      std::cerr << "  " << ehz::to_string(rec.verdict()) << ": " << rec.id;
      if (!rec.note.empty()) std::cerr << " (" << rec.note << ")";
      std::cerr << '\n';
    }
  }
}

int run_verify(const std::string& which, const std::string& catalog_path, const std::string& config_path,
               std::optional<std::uint64_t> seed, const std::string& out_dir) {
  json suite = {{"experiments", json::array()}};
  if (which == "all") {
    for (const auto& e : ehz::known_experiments()) suite["experiments"].push_back(e);
  } else {
    suite["experiments"].push_back(which);
  }
  json harness = config_path.empty() ? json::object() : ehz::read_json_file(config_path);
  if (seed) harness["seed"] = *seed;
  suite["harness"] = harness;
  if (!catalog_path.empty()) suite["catalog"] = ehz::read_json_file(catalog_path);
  const auto result = ehz::run_suite(suite, out_dir);
  print_summary(result.reports);
  return result.exit_code;
}

int run_suite_command(const std::string& path, const std::string& out_dir) {
  const auto result = ehz::run_suite_file(path, out_dir);
  print_summary(result.reports);
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EHZ capacities of convex bodies and Minkowski billiards"};
  app.require_subcommand(1);

  std::vector<std::string> cap_files;
  std::string cap_config, cap_csv;
  bool cap_loop = false;
  auto* cap = app.add_subcommand("capacity", "capacity of a body, or of K x T given two files");
  cap->add_option("bodies", cap_files, "body.json, or K.json T.json")->required()->expected(1, 2)->check(CLI::ExistingFile);
  cap->add_option("--config", cap_config, "solver configuration (JSON)")->check(CLI::ExistingFile);
  cap->add_flag("--loop", cap_loop, "include the minimising loop and characteristic");
  cap->add_option("--csv", cap_csv, "write the characteristic samples as CSV");

  auto* bil = app.add_subcommand("billiard", "Minkowski billiards in K with momentum body T");
  bil->require_subcommand(1);
  std::string k_file, t_file, q_text, p_text, bil_csv;
  int bounces = 10;
  auto* tr = bil->add_subcommand("trace", "iterate the billiard map");
  tr->add_option("K", k_file, "table (JSON)")->required()->check(CLI::ExistingFile);
  tr->add_option("T", t_file, "momentum body (JSON)")->required()->check(CLI::ExistingFile);
  tr->add_option("-m,--bounces", bounces, "number of bounces")->check(CLI::PositiveNumber);
  tr->add_option("--q", q_text, "start position, projected onto the boundary of K (comma separated)");
  tr->add_option("--p", p_text, "start momentum, projected onto the boundary of T (comma separated)");
  tr->add_option("--csv", bil_csv, "write states as CSV");
  int m = 0, m_max = 6;
  ehz::OrbitSearchConfig orbit_cfg;
  auto* sh = bil->add_subcommand("shortest", "shortest closed billiard orbit by direct search");
  sh->add_option("K", k_file, "table (JSON)")->required()->check(CLI::ExistingFile);
  sh->add_option("T", t_file, "momentum body (JSON)")->required()->check(CLI::ExistingFile);
  sh->add_option("-m,--bounces", m, "exact number of bounces (default: search 2..m-max)")->check(CLI::Range(2, 64));
  sh->add_option("--m-max", m_max, "largest bounce count of the range search")->check(CLI::Range(2, 64));
  sh->add_option("--starts", orbit_cfg.starts, "random starts")->check(CLI::PositiveNumber);
  sh->add_option("--seed", orbit_cfg.seed, "random seed");
  sh->add_option("--csv", bil_csv, "write bounce points and momenta as CSV");

  std::string which, catalog, harness_config, out_dir;
  std::optional<std::uint64_t> seed;
  auto* ver = app.add_subcommand("verify", "check the billiard inequalities on a catalog");
  ver->add_option("experiment", which, "bm | volume | inradius | monotonicity | oracle | all")
      ->required()
      ->check(CLI::IsMember({"bm", "volume", "inradius", "monotonicity", "oracle", "all"}));
  ver->add_option("--catalog", catalog, "catalog of bodies (JSON)")->check(CLI::ExistingFile);
  ver->add_option("--config", harness_config, "harness configuration (JSON)")->check(CLI::ExistingFile);
  ver->add_option("--seed", seed, "seed for catalog and pair selection");
  ver->add_option("--out", out_dir, "directory for JSON/CSV reports");

  std::string suite_file;
  auto* suite = app.add_subcommand("suite", "run the experiments listed in a suite configuration");
  suite->add_option("config", suite_file, "suite configuration (JSON)")->required()->check(CLI::ExistingFile);
  suite->add_option("--out", out_dir, "directory for JSON/CSV reports (overrides the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (*cap) return run_capacity(cap_files, cap_config, cap_loop, cap_csv);
    if (*tr) return run_trace(k_file, t_file, bounces, q_text, p_text, bil_csv);
    if (*sh) return run_shortest(k_file, t_file, sh->count("-m") ? m : 0, m_max, orbit_cfg, bil_csv);
    if (*ver) return run_verify(which, catalog, harness_config, seed, out_dir);
    if (*suite) return run_suite_command(suite_file, out_dir);
  } catch (const ehz::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFail;
  }
  return kExitUsage;
}
