#include "srdev/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "srdev/errors.hpp"

namespace srdev {

using nlohmann::json;

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedSpec(path + ": cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw MalformedSpec(path + ": invalid JSON at byte " + std::to_string(e.byte) + ": " +
                        e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw MalformedSpec(path + ": cannot write file");
  out << text;
  if (!out) throw MalformedSpec(path + ": write failed");
}

namespace {

int parse_index(const std::string& s, const std::string& where) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    throw MalformedSpec(where + ": expected a 1-based index, got '" + s + "'");
  }
  while (used < s.size() && s[used] == ' ') ++used;
  if (used != s.size() || v < 1) throw MalformedSpec(where + ": expected a 1-based index, got '" + s + "'");
  return v - 1;
}

Rational parse_coefficient(const json& v, const std::string& where) {
  if (v.is_number_integer()) return Rational(v.get<long>());
  if (v.is_string()) {
    try {
      return parse_rational(v.get<std::string>());
    } catch (const Error& e) {
      throw MalformedSpec(where + ": " + e.what());
    }
  }
  throw MalformedSpec(where + ": coefficients must be integers or \"p/q\" strings");
}

const json& field(const json& j, const char* name) {
  if (!j.is_object() || !j.contains(name))
    throw MalformedSpec(std::string("missing field \"") + name + "\"");
  return j.at(name);
}

template <class T>
T get_as(const json& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw MalformedSpec(where + ": unexpected value " + j.dump());
  }
}

}  // namespace

AlgebraSpec parse_algebra_spec(const json& j) {
  AlgebraSpec s;
  const json& dim = field(j, "dim");
  if (!dim.is_number_integer()) throw MalformedSpec("dim: expected an integer");
  s.dim = dim.get<int>();
  s.growth = get_as<std::vector<int>>(field(j, "growth"), "growth");
  const json& br = field(j, "brackets");
  if (!br.is_object()) throw MalformedSpec("brackets: expected an object");
  for (const auto& [key, val] : br.items()) {
    const std::string where = "brackets[\"" + key + "\"]";
    const auto comma = key.find(',');
    if (comma == std::string::npos) throw MalformedSpec(where + ": key must be \"i,j\"");
    const int i = parse_index(key.substr(0, comma), where);
    const int jj = parse_index(key.substr(comma + 1), where);
    if (i >= jj) throw MalformedSpec(where + ": keys need i < j");
    if (jj >= s.dim) throw MalformedSpec(where + ": index exceeds dim");
    if (!val.is_object()) throw MalformedSpec(where + ": expected an object");
    for (const auto& [kk, c] : val.items()) {
      const int k = parse_index(kk, where);
      if (k >= s.dim) throw MalformedSpec(where + "[\"" + kk + "\"]: index exceeds dim");
      Rational r = parse_coefficient(c, where + "[\"" + kk + "\"]");
      if (!is_zero(r)) s.brackets[{i, jj}][k] = r;
    }
    if (s.brackets.count({i, jj}) && s.brackets[{i, jj}].empty()) s.brackets.erase({i, jj});
  }
  return s;
}

json to_json(const AlgebraSpec& spec) {
  json br = json::object();
  for (const auto& [ij, row] : spec.brackets) {
    json r = json::object();
    for (const auto& [k, c] : row)
      if (!is_zero(c)) r[std::to_string(k + 1)] = to_string(c);
    if (!r.empty()) br[std::to_string(ij.first + 1) + "," + std::to_string(ij.second + 1)] = r;
  }
  return {{"dim", spec.dim}, {"growth", spec.growth}, {"brackets", br}};
}

GradedLieAlgebra load_algebra(const std::string& path) {
  const json j = read_json_file(path);
  try {
    return build_algebra(parse_algebra_spec(j));
  } catch (const MalformedSpec& e) {
    throw MalformedSpec(path + ": " + e.what());
  }
}

ManifoldSpec parse_manifold_spec(const json& j) {
  ManifoldSpec m;
  const json& chart = field(j, "chart");
  Chart& c = m.frame.chart;
  c.coords = get_as<std::vector<std::string>>(field(chart, "coords"), "chart.coords");
  c.periodic.assign(c.coords.size(), false);
  if (chart.contains("periodic"))
    for (const auto& name : get_as<std::vector<std::string>>(chart.at("periodic"), "chart.periodic")) {
      const int idx = c.index(name);
      if (idx < 0) throw MalformedSpec("chart.periodic: unknown coordinate '" + name + "'");
      c.periodic[idx] = true;
    }
  const auto box = get_as<std::vector<std::vector<double>>>(field(chart, "box"), "chart.box");
  if (box.size() != c.coords.size())
    throw MalformedSpec("chart.box: need one interval per coordinate");
  for (std::size_t a = 0; a < box.size(); ++a) {
    if (box[a].size() != 2 || !(box[a][0] < box[a][1]))
      throw MalformedSpec("chart.box[" + std::to_string(a) + "]: expected [lo, hi] with lo < hi");
    c.box.emplace_back(box[a][0], box[a][1]);
  }
  m.frame.growth = get_as<std::vector<int>>(field(j, "growth"), "growth");
  const auto rows = get_as<std::vector<std::vector<std::string>>>(field(j, "frame"), "frame");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::vector<Expr> f;
    for (std::size_t a = 0; a < rows[i].size(); ++a) {
      try {
        f.push_back(parse_expr(rows[i][a], c));
      } catch (const Error& e) {
        throw MalformedSpec("frame[" + std::to_string(i) + "][" + std::to_string(a) + "] \"" +
                            rows[i][a] + "\": " + e.kind() + ": " + e.what());
      }
    }
    m.frame.fields.push_back(std::move(f));
  }
  if (j.contains("q0")) {
    m.q0 = get_as<std::vector<double>>(j.at("q0"), "q0");
    if (m.q0->size() != c.coords.size()) throw MalformedSpec("q0: wrong number of coordinates");
  }
  m.frame.validate();
  return m;
}

json to_json(const FrameField& frame, const std::optional<std::vector<double>>& q0) {
  const Chart& c = frame.chart;
  json periodic = json::array(), box = json::array(), rows = json::array();
  for (int a = 0; a < c.dim(); ++a) {
    if (c.periodic[a]) periodic.push_back(c.coords[a]);
    box.push_back({c.box[a].first, c.box[a].second});
  }
  for (const auto& f : frame.fields) {
    json r = json::array();
    for (const auto& e : f) r.push_back(to_string(e, c.coords));
    rows.push_back(r);
  }
  json j = {{"chart", {{"coords", c.coords}, {"periodic", periodic}, {"box", box}}},
            {"growth", frame.growth},
            {"frame", rows}};
  if (q0) j["q0"] = *q0;
  return j;
}

ManifoldSpec load_manifold(const std::string& path) {
  const json j = read_json_file(path);
  try {
    return parse_manifold_spec(j);
  } catch (const MalformedSpec& e) {
    throw MalformedSpec(path + ": " + e.what());
  }
}

bool same_manifold(const ManifoldSpec& a, const ManifoldSpec& b) {
  if (!(a.frame.chart == b.frame.chart) || a.frame.growth != b.frame.growth || a.q0 != b.q0)
    return false;
  if (a.frame.fields.size() != b.frame.fields.size()) return false;
  for (std::size_t i = 0; i < a.frame.fields.size(); ++i) {
    if (a.frame.fields[i].size() != b.frame.fields[i].size()) return false;
    for (std::size_t k = 0; k < a.frame.fields[i].size(); ++k)
      if (!a.frame.fields[i][k].same(b.frame.fields[i][k])) return false;
  }
  return true;
}

json to_json(const AmbientAlgebra& g, const HomElement& x) {
  json j = json::object();
  for (const auto& [m, c] : x.terms()) {
    HomElement single(x.arity());
    single.add(m.a, m.J, Rational(1));
    j[to_string(g, single)] = to_string(c);
  }
  return j;
}

json to_json(const RatVector& v) {
  json j = json::array();
  for (const auto& r : v) j.push_back(to_string(r));
  return j;
}

std::string path_csv(const Path& p) {
  std::ostringstream os;
  os << std::setprecision(17);
  const std::size_t d = p.q.empty() ? 0 : p.q.front().size();
  const std::size_t hh = p.h.empty() ? 0 : p.h.front().size();
  std::size_t k = 0;
  while (k * k < hh) ++k;
  os << "t";
  for (std::size_t a = 0; a < d; ++a) os << ",q" << a + 1;
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t c = 0; c < k; ++c) os << ",h" << r + 1 << c + 1;
  os << "\n";
  for (std::size_t s = 0; s < p.t.size(); ++s) {
    os << p.t[s];
    for (double v : p.q[s]) os << "," << v;
    if (hh)
      for (double v : p.h[s]) os << "," << v;
    os << "\n";
  }
  return os.str();
}

std::string ensemble_csv(const Ensemble& e) {
  std::ostringstream os;
  os << std::setprecision(17) << "path,t";
  for (int a = 0; a < e.dim; ++a) os << ",q" << a + 1;
  os << "\n";
  for (std::size_t r = 0; r < e.times.size(); ++r)
    for (std::size_t p = 0; p < e.paths; ++p) {
      os << p << "," << e.times[r];
      for (int a = 0; a < e.dim; ++a) os << "," << e.at(r, p, a);
      os << "\n";
    }
  return os.str();
}

}  // namespace srdev
