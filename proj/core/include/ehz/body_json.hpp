#pragma once

#include <ehz/body.hpp>

#include <json.hpp>

#include <string>

namespace ehz {

/// JSON encoding of bodies:
///   {"type": "ellipsoid", "shape": [[...], ...]}          (or "axes": [...])
///   {"type": "pball", "p": 4, "radii": [...]}
///   {"type": "ball", "dim": 2, "radius": 1}                (input only; becomes a pball)
///   {"type": "polytope", "vertices": [[...], ...], "smoothing": 0}
///   {"type": "sum", "a": {...}, "b": {...}}
///   {"type": "dilate", "factor": 2, "body": {...}}
///   {"type": "translate", "shift": [...], "body": {...}}
///   {"type": "linear", "map": [[...], ...], "body": {...}}
///   {"type": "product", "K": {...}, "T": {...}}
/// Doubles are written with round-trip precision, so encode/decode is lossless.
/// Malformed input raises ConfigError.
nlohmann::json body_to_json(const ConvexBody& body);
ConvexBody body_from_json(const nlohmann::json& j);

nlohmann::json vec_to_json(const Vec& v);
Vec vec_from_json(const nlohmann::json& j);
nlohmann::json mat_to_json(const Mat& m);
Mat mat_from_json(const nlohmann::json& j);

/// Read a JSON document from a file; ConfigError on I/O or parse failure.
nlohmann::json read_json_file(const std::string& path);

}  // namespace ehz
