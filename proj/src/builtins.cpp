#include "srdev/builtins.hpp"

#include <numbers>

#include "srdev/errors.hpp"

namespace srdev {

namespace {

Chart chart(std::vector<std::string> coords, std::vector<bool> periodic,
            std::vector<std::pair<double, double>> box) {
  return Chart{std::move(coords), std::move(periodic), std::move(box)};
}

FrameField from_strings(Chart c, std::vector<int> growth,
                        const std::vector<std::vector<std::string>>& rows) {
  FrameField f;
  f.chart = std::move(c);
  f.growth = std::move(growth);
  for (const auto& row : rows) {
    std::vector<Expr> v;
    for (const auto& s : row) v.push_back(parse_expr(s, f.chart));
    f.fields.push_back(std::move(v));
  }
  f.validate();
  return f;
}

constexpr double kTau = 2 * std::numbers::pi;

}  // namespace

FrameField halfplane_frame() {
  return from_strings(chart({"x", "y"}, {false, false}, {{-1.0, 1.0}, {0.5, 2.0}}), {2},
                      {{"y", "0"}, {"0", "y"}});
}

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names{
      "heisenberg3", "contact-halfplane", "goursat-halfplane", "engel-halfplane",
      "free23",      "flat-plane",        "hyperbolic-plane",  "sphere-patch"};
  return names;
}

BuiltinStructure builtin(std::string_view name) {
  BuiltinStructure b;
  b.name = std::string(name);
  if (name == "heisenberg3") {
    b.frame = from_strings(chart({"x", "y", "z"}, {false, false, false}, {{-1, 1}, {-1, 1}, {-1, 1}}),
                           {2, 3}, {{"1", "0", "-y/2"}, {"0", "1", "x/2"}, {"0", "0", "1"}});
    b.q0 = {0, 0, 0};
  } else if (name == "contact-halfplane") {
    // Once-prolonged half-plane; the third field is [X1, X2] plus sin(t1) X1
    // so that [X3, X_i] has no X3 component.
    b.frame = from_strings(chart({"x", "y", "t1"}, {false, false, true}, {{-1, 1}, {0.5, 2}, {0, kTau}}),
                           {2, 3},
                           {{"0", "0", "1"},
                            {"cos(t1)*y", "sin(t1)*y", "0"},
                            {"-sin(t1)*y", "cos(t1)*y", "sin(t1)"}});
    b.q0 = {0, 1, 1};
  } else if (name == "goursat-halfplane" || name == "engel-halfplane") {
    b.frame = prolong(prolong(halfplane_frame()));
    b.q0 = {0, 1, 1, 1};
  } else if (name == "free23") {
    b.frame = carnot_frame(free_nilpotent(2, 3));
    b.q0.assign(5, 0.0);
  } else if (name == "flat-plane") {
    b.frame = from_strings(chart({"x", "y"}, {false, false}, {{-1, 1}, {-1, 1}}), {2},
                           {{"1", "0"}, {"0", "1"}});
    b.q0 = {0, 0};
  } else if (name == "hyperbolic-plane") {
    b.frame = halfplane_frame();
    b.q0 = {0, 1};
  } else if (name == "sphere-patch") {
    b.frame = from_strings(chart({"th", "ph"}, {false, true}, {{0.5, 2.5}, {0, kTau}}), {2},
                           {{"1", "0"}, {"0", "1/sin(th)"}});
    b.q0 = {std::numbers::pi / 2, 0};
  } else {
    std::string all;
    for (const auto& n : builtin_names()) all += (all.empty() ? "" : ", ") + n;
    throw MalformedSpec("unknown builtin '" + std::string(name) + "' (known: " + all + ")");
  }
  return b;
}

}  // namespace srdev
