#include "srdev/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "srdev/algebra.hpp"
#include "srdev/builtins.hpp"
#include "srdev/cohomology.hpp"
#include "srdev/develop.hpp"
#include "srdev/errors.hpp"
#include "srdev/manifold.hpp"
#include "srdev/montecarlo.hpp"

namespace srdev {

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "FAILED " << what << "; ";
    }
  }
};

/// Term of a hom element in the e_a^{jk} notation: a = 0 is the symmetry
/// generator, a >= 1 and the indices in J are 1-based basis labels.
struct Term {
  int coeff;
  int a;
  std::vector<int> J;
};

HomElement hom(const AmbientAlgebra& g, int arity, const std::vector<Term>& terms) {
  HomElement x(arity);
  for (const auto& t : terms) {
    std::vector<int> idx;
    for (int j : t.J) idx.push_back(j - 1);
    x.add(t.a == 0 ? g.n() : t.a - 1, idx, Rational(t.coeff));
  }
  return x;
}

std::vector<std::vector<double>> random_points(const Chart& chart, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> pts;
  for (int p = 0; p < count; ++p) {
    std::vector<double> q;
    for (const auto& [lo, hi] : chart.box) q.push_back(std::uniform_real_distribution<double>(lo, hi)(rng));
    pts.push_back(q);
  }
  return pts;
}

GradedLieAlgebra engel_algebra() {
  AlgebraSpec s;
  s.dim = 4;
  s.growth = {2, 3, 4};
  s.brackets[{0, 1}][2] = 1;
  s.brackets[{0, 2}][3] = 1;
  return build_algebra(s);
}

/// Dimension of the degree-l part of the free Lie algebra on r generators.
long witt(int r, int l) {
  auto mobius = [](int d) {
    int mu = 1;
    for (int p = 2; p * p <= d; ++p)
      if (d % p == 0) {
        d /= p;
        if (d % p == 0) return 0;
        mu = -mu;
      }
    return d > 1 ? -mu : mu;
  };
  long sum = 0;
  for (int d = 1; d <= l; ++d)
    if (l % d == 0) sum += mobius(d) * static_cast<long>(std::pow(r, l / d));
  return sum / l;
}

bool is_zero_matrix(const RatMatrix& m) {
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c)
      if (!is_zero(m(r, c))) return false;
  return true;
}

Outcome criterion1() {
  Outcome o;
  const auto alg = free_nilpotent(2, 3);
  AlgebraSpec expected;
  expected.dim = 5;
  expected.growth = {2, 3, 5};
  expected.brackets[{0, 1}][2] = 1;
  expected.brackets[{0, 2}][3] = 1;
  expected.brackets[{1, 2}][4] = 1;
  o.check(alg.to_spec() == expected, "bracket table of free(2,3)");

  const auto metric = extend_metric(alg);
  const auto g = ambient(alg, symmetry_algebra(alg, metric));
  o.check(g.dim_h() == 1, "dim h = 1");
  if (!o.pass) return o;
  // [e0, e_i] for i = 1..5
  const std::vector<std::vector<int>> rel = {
      {0, -1, 0, 0, 0}, {1, 0, 0, 0, 0}, {0, 0, 0, 0, 0}, {0, 0, 0, 0, -1}, {0, 0, 0, 1, 0}};
  for (int i = 0; i < 5; ++i) {
    const RatVector v = g.bracket_basis(g.n(), i);
    bool same = true;
    for (int k = 0; k < 5; ++k) same = same && v[k] == rel[i][k];
    same = same && is_zero(v[5]);
    o.check(same, "[e0,e" + std::to_string(i + 1) + "]");
  }

  CochainComplex cx(g, metric, 3);
  struct Case {
    std::string name;
    Term input;
    std::vector<Term> image;
  };
  const std::vector<Case> cases = {
      {"d(e0 x e^1)", {1, 0, {1}}, {{-1, 1, {2, 1}}, {1, 5, {4, 1}}, {-1, 4, {5, 1}}}},
      {"d(e0 x e^2)", {1, 0, {2}}, {{1, 2, {1, 2}}, {1, 5, {4, 2}}, {-1, 4, {5, 2}}}},
      {"d(e1 x e^3)", {1, 1, {3}}, {{-1, 3, {2, 3}}, {-1, 1, {1, 2}}}},
      {"d(e2 x e^3)", {1, 2, {3}}, {{1, 3, {1, 3}}, {-1, 2, {1, 2}}}},
      {"d(e3 x e^4)", {1, 3, {4}}, {{1, 4, {1, 4}}, {1, 5, {2, 4}}, {-1, 3, {1, 3}}}},
      {"d(e3 x e^5)", {1, 3, {5}}, {{1, 4, {1, 5}}, {1, 5, {2, 5}}, {-1, 3, {2, 3}}}},
  };
  for (const auto& c : cases) {
    const HomElement got = cx.differential(hom(g, 1, {c.input}));
    const HomElement want = hom(g, 2, c.image);
    o.check(got == want, c.name + " = " + to_string(g, got));
  }
  o.detail << "bracket table, 5 ambient relations and 6 differentials compared exactly";
  return o;
}

Outcome criterion2() {
  Outcome o;
  {
    const auto alg = free_nilpotent(2, 3);
    const auto metric = extend_metric(alg);
    CochainComplex cx(ambient(alg, symmetry_algebra(alg, metric)), metric, 3);
    const HomElement got = morimoto_popp_obstruction(cx, 0);
    const HomElement want = hom(cx.algebra(), 3, {{-1, 5, {3, 2, 1}}});
    o.check(got == want, "(2,3,5) obstruction for i=1 is " + to_string(cx.algebra(), got));
    o.detail << "(2,3,5), i=1: " << to_string(cx.algebra(), got) << "; ";
  }
  {
    const auto alg = free_nilpotent(2, 2);
    const auto metric = extend_metric(alg);
    CochainComplex cx(ambient(alg, symmetry_algebra(alg, metric)), metric, 3);
    for (int i = 0; i < 2; ++i)
      o.check(morimoto_popp_obstruction(cx, i).is_zero(),
              "h3 obstruction vanishes for i=" + std::to_string(i + 1));
    o.detail << "h3: 0 for i=1,2";
  }
  return o;
}

Outcome criterion3() {
  Outcome o;
  auto dim_h = [](const GradedLieAlgebra& a) { return symmetry_algebra(a, extend_metric(a)).dim(); };
  const int h3 = dim_h(free_nilpotent(2, 2));
  const int f235 = dim_h(free_nilpotent(2, 3));
  const int engel = dim_h(engel_algebra());
  o.check(h3 == 1, "dim h(h3) = 1");
  o.check(f235 == 1, "dim h(2,3,5) = 1");
  o.check(engel == 0, "dim h(Engel) = 0");
  const auto growth = free_nilpotent(2, 4).growth();
  std::vector<int> oracle;
  long total = 0;
  for (int l = 1; l <= 4; ++l) oracle.push_back(static_cast<int>(total += witt(2, l)));
  o.check(growth == oracle && growth == std::vector<int>{2, 3, 5, 8}, "free(2,4) growth (2,3,5,8)");
  o.detail << "dim h: h3=" << h3 << " (2,3,5)=" << f235 << " Engel=" << engel << "; free(2,4) growth (";
  for (std::size_t i = 0; i < growth.size(); ++i) o.detail << (i ? "," : "") << growth[i];
  o.detail << ")";
  return o;
}

Outcome criterion4() {
  Outcome o;
  struct Named {
    std::string name;
    GradedLieAlgebra alg;
  };
  const std::vector<Named> algs = {{"h3", free_nilpotent(2, 2)},
                                   {"(2,3,5)", free_nilpotent(2, 3)},
                                   {"Engel", engel_algebra()},
                                   {"free(2,4)", free_nilpotent(2, 4)}};
  for (const auto& [name, alg] : algs) {
    const auto metric = extend_metric(alg);
    CochainComplex cx(ambient(alg, symmetry_algebra(alg, metric)), metric, alg.dim());
    for (int k = 0; k + 2 <= cx.max_arity(); ++k)
      o.check(is_zero_matrix(cx.differential_matrix(k + 1) * cx.differential_matrix(k)),
              name + " dd = 0 on arity " + std::to_string(k));
    if (cx.algebra().dim_h() > 0) {
      const NormalModule nm = normal_module_popp(cx);
      o.check(nm.feasible && nm.complements_image, name + " N + im d+ = hom+");
      o.check(nm.h_invariant, name + " N is h-invariant");
      o.detail << name << ": dd=0 up to arity " << cx.max_arity() << ", dim N=" << nm.module.dim()
               << "; ";
    } else {
      o.detail << name << ": dd=0 up to arity " << cx.max_arity() << "; ";
    }
    if (name == "h3") {
      std::vector<int> rows, cols;
      for (int i = 0; i < cx.space(2).size(); ++i)
        if (cx.space(2).degree(i) == 1) rows.push_back(i);
      for (int i = 0; i < cx.space(1).size(); ++i)
        if (cx.space(1).degree(i) == 1) cols.push_back(i);
      const RatMatrix d = cx.differential_matrix(1);
      RatMatrix block(rows.size(), cols.size());
      for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols.size(); ++c) block(r, c) = d(rows[r], cols[c]);
      o.check(rows.size() == cols.size() && rank(block) == rows.size(),
              "h3 degree-one differential is bijective");
      o.detail << "h3 degree-one d: " << rows.size() << "x" << cols.size() << " of rank "
               << rank(block) << "; ";
    }
  }
  return o;
}

Outcome criterion5() {
  Outcome o;
  const auto b = builtin("contact-halfplane");
  const FrameAnalysis an = analyze_frame(b.frame);
  o.check(an.sym.dim() == 1, "dim h = 1");
  // Exact consistency: B B^+ = I means the Christoffel system is solvable
  // for every right-hand side.
  const int k1 = b.frame.k1();
  RatMatrix bm(k1, an.sym.dim() * k1);
  for (int al = 0; al < an.sym.dim(); ++al)
    for (int j = 0; j < k1; ++j)
      for (int i = 0; i < k1; ++i) bm(i, al * k1 + j) = an.sym.basis[al](j, i);
  const RatMatrix prod = bm * pseudo_inverse(bm);
  bool identity = true;
  for (int i = 0; i < k1; ++i)
    for (int j = 0; j < k1; ++j) identity = identity && prod(i, j) == (i == j ? 1 : 0);
  o.check(identity, "exact residual of the Christoffel system is zero");

  const ChristoffelField gamma(an.sf, an.sym);
  double worst_gamma = 0, worst_defect = 0;
  const int n = b.frame.n();
  for (const auto& q : random_points(b.frame.chart, 100, 5)) {
    const auto g = gamma.at(q);
    const auto c = an.sf.constants(q);
    worst_gamma = std::max({worst_gamma, std::abs(g[0] - c[(0 * n + 1) * n + 0]),
                            std::abs(g[1] - c[(0 * n + 1) * n + 1])});
    for (double d : generator_defect(gamma, q)) worst_defect = std::max(worst_defect, std::abs(d));
  }
  o.check(worst_gamma <= 1e-12, "Gamma matches c^1_12, c^2_12");
  o.check(worst_defect <= 1e-9, "generator defect <= 1e-9");
  o.detail << "max |Gamma - (c^1_12, c^2_12)| = " << worst_gamma << ", max defect = " << worst_defect
           << " over 100 points";
  return o;
}

Outcome criterion6() {
  Outcome o;
  const auto b = builtin("goursat-halfplane");
  StructureField sf(b.frame);
  auto points = sample_grid(b.frame.chart, 3);
  const auto rep = adapted_growth(b.frame, sf, points);
  o.check(b.frame.growth == std::vector<int>{2, 3, 4}, "growth (2,3,4)");
  double worst = 0;
  const int n = b.frame.n();
  for (const auto& q : random_points(b.frame.chart, 50, 6)) {
    const auto c = sf.constants(q);
    worst = std::max(worst, std::abs(c[(1 * n + 3) * n + 3] - std::sin(q[2]) * std::sin(q[3])));
  }
  o.check(worst <= 1e-12, "c^4_24 = sin t1 sin t2");
  const auto alg = nilpotentization(b.frame, rep);
  const auto sym = symmetry_algebra(alg, extend_metric(alg));
  const auto dc = develop_condition(b.frame, sf, alg, sym, points);
  o.check(!dc.feasible && dc.witness_direction.has_value(), "develop condition infeasible with witness");
  const auto drift = popp_drift(sf, b.q0);
  double norm = 0;
  for (double d : drift) norm += d * d;
  norm = std::sqrt(norm);
  o.check(norm > 1e-6, "Popp drift nonzero");
  o.detail << "max |c^4_24 - sin t1 sin t2| = " << worst << " over 50 points; infeasible";
  if (dc.witness_direction) {
    o.detail << ", witness direction (";
    for (std::size_t i = 0; i < dc.witness_direction->size(); ++i)
      o.detail << (i ? "," : "") << to_string((*dc.witness_direction)[i]);
    o.detail << ")";
  }
  o.detail << "; |Popp drift(q0)| = " << norm;
  return o;
}

Outcome criterion7() {
  Outcome o;
  for (const char* name : {"hyperbolic-plane", "sphere-patch"}) {
    const auto b = builtin(name);
    StructureField sf(b.frame);
    const auto rep = levi_civita_check(b.frame, sf, sample_grid(b.frame.chart, 7));
    o.check(rep.max_difference <= 1e-9, std::string(name) + " drifts agree");
    o.detail << name << ": max difference " << rep.max_difference << " (max drift "
             << rep.max_drift << ") over " << rep.points << " points; ";
  }
  return o;
}

Outcome criterion8() {
  Outcome o;
  {
    const auto b = builtin("contact-halfplane");
    const FrameAnalysis an = analyze_frame(b.frame);
    const ChristoffelField gamma(an.sf, an.sym);
    const std::vector<std::string> t{"t"};
    const std::vector<Expr> u = {parse_expr("cos(t)", t), parse_expr("sin(2*t)", t)};
    // Rotation with rational entries in SO(2).
    const Rational c(3, 5), s(4, 5);
    const std::vector<Expr> ur = {Expr(c) * u[0] - Expr(s) * u[1], Expr(s) * u[0] + Expr(c) * u[1]};
    const std::vector<double> r = {0.6, -0.8, 0.8, 0.6};
    const Path p1 = develop_curve(b.frame, gamma, u, b.q0, {}, 1e-3, 1.0);
    const Path p2 = develop_curve(b.frame, gamma, ur, b.q0, r, 1e-3, 1.0);
    double diff = 0;
    for (std::size_t k = 0; k < p1.q.size(); ++k)
      for (std::size_t a = 0; a < p1.q[k].size(); ++a)
        diff = std::max(diff, std::abs(p1.q[k][a] - p2.q[k][a]));
    o.check(diff <= 1e-6, "lift independence within 1e-6");
    o.detail << "lift independence: max |q - q'| = " << diff << "; ";
  }
  {
    const auto b = builtin("heisenberg3");
    const FrameAnalysis an = analyze_frame(b.frame);
    const auto gamma = ChristoffelField::constant(an.sf, an.sym,
                                                  std::vector<double>(an.sym.dim() * 2, 0.0));
    const std::vector<std::string> t{"t"};
    const std::vector<Expr> u = {parse_expr("cos(t)", t), parse_expr("sin(t)", t)};
    const double exact[3] = {std::sin(1.0), 1 - std::cos(1.0), 0.5 * (1 - std::sin(1.0))};
    std::vector<double> errs;
    for (double dt : {0.1, 0.05, 0.025}) {
      const Path p = develop_curve(b.frame, gamma, u, b.q0, {}, dt, 1.0);
      double e = 0;
      for (int a = 0; a < 3; ++a) e = std::max(e, std::abs(p.q.back()[a] - exact[a]));
      errs.push_back(e);
    }
    const double r1 = errs[0] / errs[1], r2 = errs[1] / errs[2];
    o.check(r1 >= 8 && r2 >= 8, "RK4 error ratio >= 8 per halving");
    o.detail << "RK4 endpoint errors " << errs[0] << ", " << errs[1] << ", " << errs[2]
             << " (ratios " << r1 << ", " << r2 << ")";
  }
  return o;
}

std::size_t scaled(double paths, const SuiteOptions& opts) {
  return std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(paths * opts.path_scale)));
}

Outcome criterion9(const SuiteOptions& opts) {
  Outcome o;
  SDEConfig cfg;
  cfg.dt = 1e-3;
  cfg.T = 1.0;
  cfg.seed = opts.seed;
  cfg.threads = opts.threads;
  const auto lift = carnot_lift(free_nilpotent(2, 2));
  const std::size_t paths = scaled(2e5, opts);
  const Ensemble e = simulate_ensemble(*lift, cfg, paths, {1.0});
  const MCEstimate z = estimate(e, 0, Expr::var(2), cfg.dt);
  const MCEstimate z2 = estimate(e, 0, Expr::pow(Expr::var(2), 2), cfg.dt);
  const double var = (z2.mean - z.mean * z.mean) * static_cast<double>(paths) / (paths - 1);
  o.check(var >= 0.24 && var <= 0.26, "Var(z) in [0.24, 0.26]");
  o.detail << "Var(z(1)) = " << var << " over " << paths << " paths (dt 1e-3), mean z = " << z.mean
           << " +- " << z.std_error;
  return o;
}

const char* kFamily[] = {"x", "y", "t1", "x^2", "y^2", "t1^2"};

Outcome criterion10(const SuiteOptions& opts) {
  Outcome o;
  const auto b = builtin("contact-halfplane");
  const FrameAnalysis an = analyze_frame(b.frame);
  const ChristoffelField gamma(an.sf, an.sym);
  std::vector<Expr> fs;
  for (const char* f : kFamily) fs.push_back(parse_expr(f, b.frame.chart));
  SDEConfig cfg;
  const double t = 0.01;
  cfg.dt = t / 20;
  cfg.seed = opts.seed + 10;
  cfg.threads = opts.threads;
  const auto reps = generator_tests(b.frame, gamma, fs, b.q0, t, cfg, scaled(1e6, opts),
                                    "contact-halfplane");
  o.detail << std::setprecision(4);
  for (const auto& r : reps) {
    o.check(r.matches_popp && r.pass, "generator test for " + r.function);
    o.detail << r.function << ": " << r.mc_value << " vs " << r.popp_value << " (se " << r.stderr_value
             << ", bias " << r.bias << "; t/2: " << r.mc_half << ", bias " << r.bias_half << "); ";
  }
  return o;
}

Outcome criterion11(const SuiteOptions& opts) {
  Outcome o;
  const auto b = builtin("contact-halfplane");
  const FrameAnalysis an = analyze_frame(b.frame);
  const ChristoffelField gamma(an.sf, an.sym);
  SDEConfig cfg;
  cfg.dt = 5e-3;
  cfg.seed = opts.seed + 11;
  cfg.threads = opts.threads;
  const std::size_t paths = scaled(1e5, opts);
  const auto good = equivalence_test(b.frame, an.sf, gamma, b.q0, 0.5, cfg, paths, "contact-halfplane");
  const auto bad = equivalence_test(b.frame, an.sf, gamma.with_offset(0, 0, 0.5), b.q0, 0.5, cfg,
                                    paths, "contact-halfplane");
  o.check(good.pass, "solver Gamma passes at 3 sigma");
  o.check(!bad.pass, "perturbed Gamma fails");
  o.detail << "max |z| = " << good.max_abs_z << " (solver), " << bad.max_abs_z
           << " (perturbed) over " << paths << " paths at t = 0.5";
  return o;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const SuiteOptions& opts, std::ostream* progress) {
  struct Entry {
    int id;
    std::string name;
    double limit;
    std::function<Outcome()> run;
  };
  const std::vector<Entry> entries = {
      {1, "free(2,3) tables and differentials", 1, criterion1},
      {2, "Morimoto-Popp obstruction", 0, criterion2},
      {3, "symmetry dimensions and free(2,4) growth", 0, criterion3},
      {4, "dd = 0, normal module, h3 bijectivity", 0, criterion4},
      {5, "contact Christoffel symbols", 0, criterion5},
      {6, "Goursat counterexample", 5, criterion6},
      {7, "Levi-Civita recovery", 0, criterion7},
      {8, "lift independence and RK4 order", 0, criterion8},
      {9, "Levy area variance", 60, [&] { return criterion9(opts); }},
      {10, "generator test on contact", 600, [&] { return criterion10(opts); }},
      {11, "developed vs Popp equivalence", 0, [&] { return criterion11(opts); }},
  };
  std::vector<CriterionResult> out;
  for (const auto& e : entries) {
    if (!opts.only.empty() && std::find(opts.only.begin(), opts.only.end(), e.id) == opts.only.end())
      continue;
    CriterionResult r;
    r.id = e.id;
    r.name = e.name;
    r.time_limit = e.limit;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      Outcome o = e.run();
      r.pass = o.pass;
      r.detail = o.detail.str();
    } catch (const std::exception& ex) {
      r.pass = false;
      r.detail = std::string("exception: ") + ex.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    // Time limits refer to the full-size battery.
    if (r.time_limit > 0 && opts.path_scale >= 1.0 && r.seconds > r.time_limit) {
      r.pass = false;
      r.detail += " [over time limit]";
    }
    if (progress) *progress << format_result(r) << std::endl;
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_result(const CriterionResult& r) {
  std::ostringstream os;
  os << (r.pass ? "PASS" : "FAIL") << "  " << std::setw(2) << r.id << "  " << r.name << "  ("
     << std::fixed << std::setprecision(2) << r.seconds << " s";
  if (r.time_limit > 0) os << ", limit " << std::setprecision(0) << r.time_limit << " s";
  os << ")  " << r.detail;
  return os.str();
}

nlohmann::json to_json(const std::vector<CriterionResult>& results) {
  nlohmann::json j = nlohmann::json::array();
  bool all = true;
  for (const auto& r : results) {
    all = all && r.pass;
    j.push_back({{"id", r.id},
                 {"name", r.name},
                 {"pass", r.pass},
                 {"seconds", r.seconds},
                 {"detail", r.detail}});
  }
  return {{"test", "suite"}, {"criteria", j}, {"pass", all}};
}

}  // namespace srdev
