#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "srdev/algebra.hpp"
#include "srdev/cohomology.hpp"
#include "srdev/develop.hpp"
#include "srdev/manifold.hpp"

namespace srdev {

/// Reads and parses a JSON file. Throws MalformedSpec naming the file and
/// the byte offset of a parse error.
nlohmann::json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// {"dim", "growth", "brackets": {"i,j": {"k": "p/q"}}}, 1-based, i < j.
AlgebraSpec parse_algebra_spec(const nlohmann::json& j);
nlohmann::json to_json(const AlgebraSpec& spec);
GradedLieAlgebra load_algebra(const std::string& path);

/// Manifold file: chart, growth, frame, and an optional starting point "q0".
struct ManifoldSpec {
  FrameField frame;
  std::optional<std::vector<double>> q0;
};
ManifoldSpec parse_manifold_spec(const nlohmann::json& j);
nlohmann::json to_json(const FrameField& frame, const std::optional<std::vector<double>>& q0 = {});
ManifoldSpec load_manifold(const std::string& path);
/// Structural equality of charts, growth vectors, expressions and q0.
bool same_manifold(const ManifoldSpec& a, const ManifoldSpec& b);

/// Sorted monomial -> "p/q" map, keys like "e5^{1,2,3}".
nlohmann::json to_json(const AmbientAlgebra& g, const HomElement& x);
nlohmann::json to_json(const RatVector& v);

/// Header t,q1..qd[,h11..hkk], one row per grid point.
std::string path_csv(const Path& p);
/// Header path,t,q1..qd, one row per path for each sampled time.
std::string ensemble_csv(const Ensemble& e);

}  // namespace srdev
