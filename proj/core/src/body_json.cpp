#include <ehz/body_json.hpp>

#include <fstream>

namespace ehz {

using nlohmann::json;

namespace {

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(std::string("body JSON: missing field '") + key + "'");
  return j.at(key);
}

double number(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number()) throw ConfigError(std::string("body JSON: field '") + key + "' must be a number");
  return v.get<double>();
}

}  // namespace

json vec_to_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vec vec_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("expected a non-empty array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError("expected a non-empty array of numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

json mat_to_json(const Mat& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vec_to_json(m.row(r).transpose()));
  return out;
}

Mat mat_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("expected a non-empty matrix (array of rows)");
  const Vec first = vec_from_json(j[0]);
  Mat m(static_cast<Eigen::Index>(j.size()), first.size());
  for (std::size_t r = 0; r < j.size(); ++r) {
    const Vec row = vec_from_json(j[r]);
    if (row.size() != first.size()) throw ConfigError("matrix rows have different lengths");
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

json body_to_json(const ConvexBody& body) {
  return std::visit(
      [](const auto& s) -> json {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, shapes::Ellipsoid>) {
          return {{"type", "ellipsoid"}, {"shape", mat_to_json(s.shape)}};
        } else if constexpr (std::is_same_v<S, shapes::PBall>) {
          return {{"type", "pball"}, {"p", s.p}, {"radii", vec_to_json(s.radii)}};
        } else if constexpr (std::is_same_v<S, shapes::Polytope>) {
          json verts = json::array();
          for (const auto& v : s.vertices) verts.push_back(vec_to_json(v));
          return {{"type", "polytope"}, {"vertices", verts}, {"smoothing", s.smoothing}};
        } else if constexpr (std::is_same_v<S, shapes::Sum>) {
          return {{"type", "sum"}, {"a", body_to_json(s.a)}, {"b", body_to_json(s.b)}};
        } else if constexpr (std::is_same_v<S, shapes::Dilate>) {
          return {{"type", "dilate"}, {"factor", s.factor}, {"body", body_to_json(s.body)}};
        } else if constexpr (std::is_same_v<S, shapes::Translate>) {
          return {{"type", "translate"}, {"shift", vec_to_json(s.shift)}, {"body", body_to_json(s.body)}};
        } else if constexpr (std::is_same_v<S, shapes::Linear>) {
          return {{"type", "linear"}, {"map", mat_to_json(s.map)}, {"body", body_to_json(s.body)}};
        } else {
          return {{"type", "product"}, {"K", body_to_json(s.q_body)}, {"T", body_to_json(s.p_body)}};
        }
      },
      body.variant());
}

ConvexBody body_from_json(const json& j) {
  const json& t = field(j, "type");
  if (!t.is_string()) throw ConfigError("body JSON: 'type' must be a string");
  const std::string type = t.get<std::string>();
  try {
    if (type == "ellipsoid") {
      if (j.contains("axes")) return ConvexBody::ellipsoid_axes(vec_from_json(j.at("axes")));
      return ConvexBody::ellipsoid(mat_from_json(field(j, "shape")));
    }
    if (type == "pball") return ConvexBody::pball(number(j, "p"), vec_from_json(field(j, "radii")));
    if (type == "ball") {
      const double r = j.contains("radius") ? number(j, "radius") : 1.0;
      return ConvexBody::ball(static_cast<int>(number(j, "dim")), r);
    }
    if (type == "polytope") {
      const json& vs = field(j, "vertices");
      if (!vs.is_array()) throw ConfigError("body JSON: 'vertices' must be an array");
      std::vector<Vec> verts;
      for (const auto& v : vs) verts.push_back(vec_from_json(v));
      const double smoothing = j.contains("smoothing") ? number(j, "smoothing") : 0.0;
      return ConvexBody::polytope(std::move(verts), smoothing);
    }
    if (type == "sum") return ConvexBody::sum(body_from_json(field(j, "a")), body_from_json(field(j, "b")));
    if (type == "dilate") return ConvexBody::dilate(number(j, "factor"), body_from_json(field(j, "body")));
    if (type == "translate")
      return ConvexBody::translate(vec_from_json(field(j, "shift")), body_from_json(field(j, "body")));
    if (type == "linear") return ConvexBody::linear(mat_from_json(field(j, "map")), body_from_json(field(j, "body")));
    if (type == "product") return ConvexBody::product(body_from_json(field(j, "K")), body_from_json(field(j, "T")));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("body JSON (") + type + "): " + e.what());
  }
  throw ConfigError("body JSON: unknown body type '" + type + "'");
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse " + path + ": " + e.what());
  }
}

}  // namespace ehz
