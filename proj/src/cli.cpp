#include "srdev/cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include "srdev/acceptance.hpp"
#include "srdev/algebra.hpp"
#include "srdev/builtins.hpp"
#include "srdev/cohomology.hpp"
#include "srdev/develop.hpp"
#include "srdev/errors.hpp"
#include "srdev/io.hpp"
#include "srdev/manifold.hpp"
#include "srdev/montecarlo.hpp"

namespace srdev {

namespace {

using nlohmann::json;

struct Opts {
  std::string input, builtin, output, csv;
  std::string method = "popp", scheme = "heun", gamma = "solver";
  std::uint64_t seed = 1;
  long paths = 0;  // 0: command default
  double dt = 0;   // 0: command default
  double T = 1.0;
  double t = 0;    // 0: command default
  double tol = 1e-9;
  double perturb = 0;
  int threads = 1;
  int samples = 3;
  bool no_projection = false;
  int generators = 2, step = 2;
  std::vector<double> q0, h0;
  std::vector<std::string> functions;
  double scale = 1.0;
  std::uint64_t suite_seed = SuiteOptions{}.seed;
  std::vector<int> only;
};

struct Resolved {
  std::string label;
  std::optional<GradedLieAlgebra> alg;
  std::optional<FrameField> frame;
  std::optional<std::vector<double>> q0;
};

Resolved resolve(const Opts& o) {
  Resolved r;
  if (!o.builtin.empty()) {
    BuiltinStructure b = builtin(o.builtin);
    r.label = b.name;
    r.frame = b.frame;
    r.q0 = b.q0;
    return r;
  }
  if (o.input.empty()) throw MalformedSpec("no input: give a spec file or --builtin NAME");
  r.label = o.input;
  const json j = read_json_file(o.input);
  try {
    if (j.is_object() && j.contains("frame")) {
      ManifoldSpec m = parse_manifold_spec(j);
      r.frame = m.frame;
      r.q0 = m.q0;
    } else if (j.is_object() && j.contains("brackets")) {
      r.alg = build_algebra(parse_algebra_spec(j));
    } else {
      throw MalformedSpec("expected an algebra spec (\"brackets\") or a manifold spec (\"frame\")");
    }
  } catch (const MalformedSpec& e) {
    throw MalformedSpec(o.input + ": " + e.what());
  }
  return r;
}

FrameField frame_of(const Resolved& r) {
  return r.frame ? *r.frame : carnot_frame(*r.alg);
}

GradedLieAlgebra algebra_of(const Resolved& r, const Opts& o) {
  if (r.alg) return *r.alg;
  return analyze_frame(*r.frame, o.samples, o.tol).alg;
}

std::vector<double> start_point(const Opts& o, const Resolved& r, const FrameField& f) {
  std::vector<double> q;
  if (!o.q0.empty())
    q = o.q0;
  else if (r.q0)
    q = *r.q0;
  else
    for (const auto& [lo, hi] : f.chart.box) q.push_back(0.5 * (lo + hi));
  if (q.size() != static_cast<std::size_t>(f.chart.dim()))
    throw DimensionMismatch("starting point needs " + std::to_string(f.chart.dim()) + " coordinates");
  return q;
}

std::string fmt_growth(const std::vector<int>& g) {
  std::string s = "(";
  for (std::size_t i = 0; i < g.size(); ++i) s += (i ? "," : "") + std::to_string(g[i]);
  return s + ")";
}

std::string fmt_vec(const std::vector<double>& v) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ")";
  return os.str();
}

json matrix_json(const RatMatrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) rows.push_back(to_json(m.row_vector(r)));
  return rows;
}

class Reporter {
public:
  Reporter(const Opts& o, std::ostream& out) : o_(o), out_(out) {}
  void emit(const json& report, const std::string& human) {
    out_ << human;
    if (!o_.output.empty()) write_text_file(o_.output, report.dump(2) + "\n");
  }
  std::ostream& out() { return out_; }

private:
  const Opts& o_;
  std::ostream& out_;
};

SDEConfig sde_config(const Opts& o, double default_dt) {
  SDEConfig c;
  c.dt = o.dt > 0 ? o.dt : default_dt;
  c.T = o.T;
  c.seed = o.seed;
  c.threads = o.threads;
  c.scheme = o.scheme == "euler" ? Scheme::Euler : Scheme::Heun;
  c.projection = !o.no_projection;
  return c;
}

ChristoffelField christoffel_for(const Opts& o, const FrameAnalysis& an) {
  ChristoffelField g = o.gamma == "zero"
                           ? ChristoffelField::constant(an.sf, an.sym,
                                                        std::vector<double>(an.sym.dim() * an.frame.k1(), 0.0))
                           : ChristoffelField(an.sf, an.sym, o.tol);
  if (o.perturb != 0) {
    if (an.sym.dim() == 0) throw MalformedSpec("--perturb needs a nontrivial symmetry algebra");
    g = g.with_offset(0, 0, o.perturb);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Commands

int cmd_algebra_check(const Opts& o, Reporter& rep) {
  const auto alg = load_algebra(o.input);
  json j = {{"test", "algebra-check"}, {"valid", true}, {"dim", alg.dim()}, {"growth", alg.growth()}};
  rep.emit(j, o.input + ": valid graded nilpotent Lie algebra, dim " + std::to_string(alg.dim()) +
                  ", growth " + fmt_growth(alg.growth()) + "\n");
  return 0;
}

int cmd_algebra_free(const Opts& o, Reporter& rep) {
  if (o.generators < 2 || o.step < 1) throw MalformedSpec("need --generators >= 2 and --step >= 1");
  const auto alg = free_nilpotent(o.generators, o.step);
  const json spec = to_json(alg.to_spec());
  if (o.output.empty())
    rep.out() << spec.dump(2) << "\n";
  else {
    write_text_file(o.output, spec.dump(2) + "\n");
    rep.out() << "free nilpotent algebra, growth " << fmt_growth(alg.growth()) << ", written to "
              << o.output << "\n";
  }
  return 0;
}

int cmd_symmetry(const Opts& o, Reporter& rep) {
  const Resolved r = resolve(o);
  const auto alg = algebra_of(r, o);
  const auto sym = symmetry_algebra(alg, extend_metric(alg));
  json basis = json::array();
  std::ostringstream h;
  h << r.label << ": dimH=" << sym.dim() << ", k0=" << sym.k0 << ", dim ker h=" << sym.ker.rows()
    << "\n";
  for (int a = 0; a < sym.dim(); ++a) {
    basis.push_back(matrix_json(sym.basis[a]));
    h << "  A" << a + 1 << " layer-one block:";
    const RatMatrix b = sym.layer1_block(a, alg.generators());
    for (std::size_t i = 0; i < b.rows(); ++i) {
      h << " [";
      for (std::size_t k = 0; k < b.cols(); ++k) h << (k ? " " : "") << to_string(b(i, k));
      h << "]";
    }
    h << "\n";
  }
  json j = {{"test", "symmetry"},   {"structure_id", r.label}, {"dim_h", sym.dim()},
            {"k0", sym.k0},          {"ker", matrix_json(sym.ker)}, {"basis", basis}};
  rep.emit(j, h.str());
  return 0;
}

int cmd_normal_module(const Opts& o, Reporter& rep) {
  const Resolved r = resolve(o);
  const auto alg = algebra_of(r, o);
  const auto metric = extend_metric(alg);
  CochainComplex cx(ambient(alg, symmetry_algebra(alg, metric)), metric, 3);
  const NormalModule nm = o.method == "morimoto" ? normal_module_morimoto(cx) : normal_module_popp(cx);
  const HomSubspace im = image_partial_plus(cx);
  json nonzero = json::array();
  for (int i = 0; i < alg.generators(); ++i) nonzero.push_back(!morimoto_popp_obstruction(cx, i).is_zero());
  json j = {{"test", "normal-module"},
            {"structure_id", r.label},
            {"method", o.method},
            {"dim_hom_plus", cx.space(2).plus().size()},
            {"dim_im_partial_plus", im.dim()},
            {"dim_N", nm.module.dim()},
            {"feasible", nm.feasible},
            {"complements_image", nm.complements_image},
            {"h_invariant", nm.h_invariant},
            {"obstruction_nonzero", nonzero}};
  std::ostringstream h;
  h << r.label << ": " << o.method << " normal module, dim hom+=" << cx.space(2).plus().size()
    << ", dim im d+=" << im.dim() << ", dim N=" << nm.module.dim()
    << ", complement=" << (nm.complements_image ? "yes" : "no")
    << ", h-invariant=" << (nm.h_invariant ? "yes" : "no") << "\n";
  if (!nm.feasible) {
    h << "infeasible: S is not orthogonal to im d+";
    if (nm.witness) {
      j["witness"] = to_json(cx.algebra(), *nm.witness);
      h << ", witness " << to_string(cx.algebra(), *nm.witness);
    }
    h << "\n";
  }
  rep.emit(j, h.str());
  return nm.feasible ? 0 : 1;
}

int cmd_obstruction(const Opts& o, Reporter& rep) {
  const Resolved r = resolve(o);
  const auto alg = algebra_of(r, o);
  const auto metric = extend_metric(alg);
  CochainComplex cx(ambient(alg, symmetry_algebra(alg, metric)), metric, 3);
  json items = json::array(), nonzero = json::array();
  std::ostringstream h;
  for (int i = 0; i < alg.generators(); ++i) {
    const HomElement x = morimoto_popp_obstruction(cx, i);
    items.push_back(to_json(cx.algebra(), x));
    nonzero.push_back(!x.is_zero());
    h << r.label << ": d(sum_j e_j x e^j) ^ e^" << i + 1 << " = " << to_string(cx.algebra(), x)
      << "\n";
  }
  rep.emit({{"test", "obstruction"},
            {"structure_id", r.label},
            {"obstruction", items},
            {"obstruction_nonzero", nonzero}},
           h.str());
  return 0;
}

int cmd_manifold_check(const Opts& o, Reporter& rep) {
  const Resolved r = resolve(o);
  const FrameField f = frame_of(r);
  StructureField sf(f);
  const auto rep_eq = adapted_growth(f, sf, sample_grid(f.chart, o.samples), o.tol);
  json j = {{"test", "manifold-check"},
            {"structure_id", r.label},
            {"growth", rep_eq.growth},
            {"points", rep_eq.points.size()},
            {"equinilpotent", rep_eq.equinilpotent},
            {"max_deviation", rep_eq.max_deviation}};
  std::ostringstream h;
  h << r.label << ": growth " << fmt_growth(rep_eq.growth) << " at " << rep_eq.points.size()
    << " points, equinilpotent=" << (rep_eq.equinilpotent ? "yes" : "no")
    << " (max deviation " << rep_eq.max_deviation << ")\n";
  if (rep_eq.equinilpotent) j["nilpotentization"] = to_json(nilpotentization(f, rep_eq).to_spec());
  rep.emit(j, h.str());
  return rep_eq.equinilpotent ? 0 : 1;
}

int cmd_christoffel(const Opts& o, Reporter& rep) {
  const Resolved r = resolve(o);
  const FrameAnalysis an = analyze_frame(frame_of(r), o.samples, o.tol);
  const auto q = start_point(o, r, an.frame);
  const ChristoffelField g = christoffel_for(o, an);
  double worst = 0;
  for (const auto& p : an.points)
    for (double d : generator_defect(g, p)) worst = std::max(worst, std::abs(d));
  const auto vals = g.at(q);
  json j = {{"test", "christoffel"}, {"structure_id", r.label}, {"dim_h", an.sym.dim()},
            {"q", q},                {"gamma", vals},            {"max_defect", worst}};
  std::ostringstream h;
  h << r.label << ": dimH=" << an.sym.dim() << ", Gamma at " << fmt_vec(q) << " = " << fmt_vec(vals)
    << " (layout alpha*k1 + j), max generator defect " << worst << "\n";
  rep.emit(j, h.str());
  return 0;
}

int cmd_develop_condition(const Opts& o, Reporter& rep) {
  const Resolved r = resolve(o);
  const FrameAnalysis an = analyze_frame(frame_of(r), o.samples, o.tol);
  const auto dc = develop_condition(an.frame, an.sf, an.alg, an.sym, an.points, o.tol);
  json j = {{"test", "develop-condition"},
            {"structure_id", r.label},
            {"dim_h", an.sym.dim()},
            {"feasible", dc.feasible},
            {"max_abs", dc.max_abs}};
  std::ostringstream h;
  h << r.label << ": dimH=" << an.sym.dim() << ", ";
  if (dc.feasible) {
    h << "feasible\n";
  } else {
    j["witness"] = {{"direction", to_json(*dc.witness_direction)},
                    {"point", dc.witness_point},
                    {"value", dc.witness_value}};
    h << "infeasible: direction (";
    for (std::size_t i = 0; i < dc.witness_direction->size(); ++i)
      h << (i ? "," : "") << to_string((*dc.witness_direction)[i]);
    h << ") in ker h has divergence " << dc.witness_value << " at " << fmt_vec(dc.witness_point)
      << "\n";
  }
  rep.emit(j, h.str());
  return dc.feasible ? 0 : 1;
}

int cmd_prolong(const Opts& o, Reporter& rep) {
  const Resolved r = resolve(o);
  const FrameField p = prolong(frame_of(r), o.samples);
  const json spec = to_json(p);
  if (o.output.empty())
    rep.out() << spec.dump(2) << "\n";
  else {
    write_text_file(o.output, spec.dump(2) + "\n");
    rep.out() << r.label << ": prolonged frame with growth " << fmt_growth(p.growth)
              << " written to " << o.output << "\n";
  }
  return 0;
}

int cmd_simulate(const std::string& process, const Opts& o, Reporter& rep) {
  const Resolved r = resolve(o);
  const SDEConfig cfg = sde_config(o, 1e-3);
  cfg.validate();
  std::unique_ptr<Diffusion> proc;
  if (process == "carnot") {
    proc = carnot_lift(algebra_of(r, o));
  } else {
    const FrameAnalysis an = analyze_frame(frame_of(r), o.samples, o.tol);
    const auto q = start_point(o, r, an.frame);
    if (process == "develop")
      proc = developed_diffusion(an.frame, christoffel_for(o, an), q, o.h0, cfg.projection);
    else
      proc = popp_diffusion(an.frame, an.sf, q);
  }
  const std::size_t paths = o.paths > 0 ? static_cast<std::size_t>(o.paths) : 1;
  json j = {{"test", "simulate"}, {"process", process}, {"structure_id", r.label},
            {"paths", paths},     {"dt", cfg.dt},        {"T", cfg.T},
            {"seed", cfg.seed}};
  std::ostringstream h;
  if (paths == 1) {
    const Path p = simulate_path(*proc, cfg, 0);
    if (!o.csv.empty()) write_text_file(o.csv, path_csv(p));
    j["left_chart"] = p.left_chart;
    j["endpoint"] = p.q.back();
    h << process << " path on " << r.label << ": " << p.t.size() << " points, endpoint "
      << fmt_vec(p.q.back()) << (p.left_chart ? " (left the chart box)" : "") << "\n";
  } else {
    const Ensemble e = simulate_ensemble(*proc, cfg, paths, {cfg.steps() * cfg.dt});
    if (!o.csv.empty()) write_text_file(o.csv, ensemble_csv(e));
    std::vector<double> mean(e.dim, 0.0), se(e.dim, 0.0);
    for (int c = 0; c < e.dim; ++c) {
      const MCEstimate m = estimate(e, 0, Expr::var(c), cfg.dt);
      mean[c] = m.mean;
      se[c] = m.std_error;
    }
    j["left_chart"] = e.left_chart;
    j["mean"] = mean;
    j["stderr"] = se;
    h << process << " on " << r.label << ": " << paths << " paths to T=" << e.times[0]
      << ", endpoint mean " << fmt_vec(mean) << ", stderr " << fmt_vec(se) << ", left chart "
      << e.left_chart << "\n";
  }
  if (!o.csv.empty()) h << "paths written to " << o.csv << "\n";
  rep.emit(j, h.str());
  return 0;
}

std::vector<Expr> default_family(const Chart& chart) {
  std::vector<Expr> fs;
  const int d = chart.dim();
  for (int a = 0; a < d; ++a) fs.push_back(Expr::var(a));
  for (int a = 0; a < d; ++a) fs.push_back(Expr::pow(Expr::var(a), 2));
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b) fs.push_back(Expr::var(a) * Expr::var(b));
  return fs;
}

int cmd_verify_generator(const Opts& o, Reporter& rep) {
  const Resolved r = resolve(o);
  const FrameAnalysis an = analyze_frame(frame_of(r), o.samples, o.tol);
  const auto q = start_point(o, r, an.frame);
  const double t = o.t > 0 ? o.t : 0.01;
  const SDEConfig cfg = sde_config(o, t / 20);
  std::vector<Expr> fs;
  for (const auto& s : o.functions) fs.push_back(parse_expr(s, an.frame.chart));
  if (fs.empty()) fs = default_family(an.frame.chart);
  const std::size_t paths = o.paths > 0 ? static_cast<std::size_t>(o.paths) : 100000;
  const auto reports = generator_tests(an.frame, christoffel_for(o, an), fs, q, t, cfg, paths, r.label);
  json items = json::array();
  bool all = true;
  std::ostringstream h;
  h << "generator test on " << r.label << ", t=" << t << ", dt=" << cfg.dt << ", " << paths
    << " paths\n";
  for (const auto& g : reports) {
    items.push_back(to_json(g));
    const bool ok = g.pass && g.matches_popp;
    all = all && ok;
    h << "  " << (ok ? "PASS" : "FAIL") << "  f=" << g.function << "  mc=" << g.mc_value
      << "  (1/2)Delta f=" << g.symbolic_value << "  (1/2)Delta_P f=" << g.popp_value
      << "  stderr=" << g.stderr_value << "  bias=" << g.bias << "\n";
  }
  rep.emit({{"test", "generator"}, {"structure_id", r.label}, {"results", items}, {"pass", all}},
           h.str());
  return all ? 0 : 1;
}

int cmd_verify_equivalence(const Opts& o, Reporter& rep) {
  const Resolved r = resolve(o);
  const FrameAnalysis an = analyze_frame(frame_of(r), o.samples, o.tol);
  const auto q = start_point(o, r, an.frame);
  const double t = o.t > 0 ? o.t : 0.5;
  const SDEConfig cfg = sde_config(o, 5e-3);
  const std::size_t paths = o.paths > 0 ? static_cast<std::size_t>(o.paths) : 100000;
  const auto e = equivalence_test(an.frame, an.sf, christoffel_for(o, an), q, t, cfg, paths, r.label);
  std::ostringstream h;
  h << "equivalence test on " << r.label << ", t=" << t << ", dt=" << cfg.dt << ", " << paths
    << " paths: " << (e.pass ? "PASS" : "FAIL") << " (max |z| " << e.max_abs_z << ")\n";
  for (std::size_t i = 0; i < e.moments.size(); ++i)
    h << "  E[" << e.moments[i] << "]  developed " << e.developed[i] << "  popp " << e.popp[i]
      << "  z " << e.z[i] << "\n";
  rep.emit(to_json(e), h.str());
  return e.pass ? 0 : 1;
}

int cmd_verify_levi_civita(const Opts& o, Reporter& rep) {
  const Resolved r = resolve(o);
  const FrameField f = frame_of(r);
  StructureField sf(f);
  const auto lc = levi_civita_check(f, sf, sample_grid(f.chart, std::max(o.samples, 5)));
  const bool ok = lc.max_difference <= o.tol;
  rep.emit({{"test", "levi-civita"},
            {"structure_id", r.label},
            {"max_difference", lc.max_difference},
            {"max_drift", lc.max_drift},
            {"points", lc.points},
            {"pass", ok}},
           r.label + ": Levi-Civita drift vs Popp drift, max difference " +
               std::to_string(lc.max_difference) + " over " + std::to_string(lc.points) +
               " points: " + (ok ? "PASS" : "FAIL") + "\n");
  return ok ? 0 : 1;
}

int cmd_verify_suite(const Opts& o, Reporter& rep) {
  SuiteOptions so;
  so.seed = o.suite_seed;
  so.threads = o.threads;
  so.path_scale = o.scale;
  so.only = o.only;
  const auto results = run_acceptance(so, &rep.out());
  int passed = 0;
  for (const auto& r : results) passed += r.pass ? 1 : 0;
  std::ostringstream h;
  h << passed << "/" << results.size() << " criteria passed\n";
  rep.emit(to_json(results), h.str());
  return passed == static_cast<int>(results.size()) ? 0 : 1;
}

int exit_code(const Error& e) {
  static const std::set<std::string> mathematical = {
      "RankDrop", "Inconsistent", "KernelNotOneDimensional", "SingularFrame", "NonFinite",
      "TheoremCheckFailed"};
  return mathematical.count(e.kind()) ? 1 : 2;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Opts o;
  CLI::App app{"Sub-Riemannian structures, Cartan connections and stochastic development", "srdev"};
  app.require_subcommand(1);

  auto input = [&](CLI::App* s) {
    auto* file = s->add_option("file", o.input, "algebra or manifold spec (JSON)");
    auto* b = s->add_option("--builtin", o.builtin, "named structure")
                  ->check(CLI::IsMember(builtin_names()));
    file->excludes(b);
    s->add_option("--samples", o.samples, "sample points per coordinate")->check(CLI::Range(1, 50));
    s->add_option("--tol", o.tol, "numerical tolerance");
  };
  auto output = [&](CLI::App* s) { s->add_option("-o,--output", o.output, "JSON report file"); };
  auto sim = [&](CLI::App* s) {
    s->add_option("--seed", o.seed, "random seed");
    s->add_option("--paths", o.paths, "number of paths")->check(CLI::PositiveNumber);
    s->add_option("--dt", o.dt, "step size")->check(CLI::PositiveNumber);
    s->add_option("--threads", o.threads, "worker threads")->check(CLI::Range(1, 256));
    s->add_option("--scheme", o.scheme, "heun or euler")->check(CLI::IsMember({"heun", "euler"}));
    s->add_flag("--no-projection", o.no_projection, "skip polar projection of the rotation");
    s->add_option("--q0", o.q0, "starting point")->expected(1, -1);
  };
  auto gamma = [&](CLI::App* s) {
    s->add_option("--gamma", o.gamma, "solver or zero")->check(CLI::IsMember({"solver", "zero"}));
    s->add_option("--perturb", o.perturb, "offset added to Gamma^1_1");
  };

  auto* algebra = app.add_subcommand("algebra", "graded nilpotent Lie algebras");
  algebra->require_subcommand(1);
  auto* acheck = algebra->add_subcommand("check", "validate an algebra spec");
  acheck->add_option("file", o.input, "algebra spec")->required();
  output(acheck);
  auto* afree = algebra->add_subcommand("free", "emit a free nilpotent algebra spec");
  afree->add_option("--generators", o.generators, "number of generators")->required();
  afree->add_option("--step", o.step, "nilpotency step")->required();
  output(afree);

  auto* symmetry = app.add_subcommand("symmetry", "symmetry algebra h");
  input(symmetry);
  output(symmetry);
  auto* nmod = app.add_subcommand("normal-module", "normal module N");
  input(nmod);
  output(nmod);
  nmod->add_option("--method", o.method, "popp or morimoto")->check(CLI::IsMember({"popp", "morimoto"}));
  auto* obstruction = app.add_subcommand("obstruction", "Morimoto versus Popp obstruction");
  input(obstruction);
  output(obstruction);

  auto* manifold = app.add_subcommand("manifold", "frames on a chart");
  manifold->require_subcommand(1);
  auto* mcheck = manifold->add_subcommand("check", "growth vector and equinilpotency");
  input(mcheck);
  output(mcheck);
  auto* christoffel = app.add_subcommand("christoffel", "solve for Christoffel symbols");
  input(christoffel);
  output(christoffel);
  gamma(christoffel);
  christoffel->add_option("--q0", o.q0, "evaluation point")->expected(1, -1);
  auto* devcond = app.add_subcommand("develop-condition", "check the development condition");
  input(devcond);
  output(devcond);
  auto* prol = app.add_subcommand("prolong", "prolong a frame by an angle coordinate");
  input(prol);
  output(prol);

  auto* simulate = app.add_subcommand("simulate", "simulate paths");
  simulate->require_subcommand(1);
  std::vector<std::pair<std::string, CLI::App*>> sims;
  for (const char* name : {"develop", "popp", "carnot"}) {
    auto* s = simulate->add_subcommand(name, std::string(name) + " process");
    input(s);
    output(s);
    sim(s);
    s->add_option("--T", o.T, "horizon")->check(CLI::PositiveNumber);
    s->add_option("--csv", o.csv, "path CSV output");
    if (std::string(name) == "develop") {
      gamma(s);
      s->add_option("--h0", o.h0, "initial rotation, row-major")->expected(1, -1);
    }
    sims.emplace_back(name, s);
  }

  auto* verify = app.add_subcommand("verify", "statistical and numerical checks");
  verify->require_subcommand(1);
  auto* vgen = verify->add_subcommand("generator", "Monte Carlo generator test");
  input(vgen);
  output(vgen);
  sim(vgen);
  gamma(vgen);
  vgen->add_option("--t", o.t, "time horizon")->check(CLI::PositiveNumber);
  vgen->add_option("--f", o.functions, "test function (repeatable)");
  auto* veq = verify->add_subcommand("equivalence", "developed process versus Popp diffusion");
  input(veq);
  output(veq);
  sim(veq);
  gamma(veq);
  veq->add_option("--t", o.t, "time horizon")->check(CLI::PositiveNumber);
  auto* vlc = verify->add_subcommand("levi-civita", "Riemannian cross-check");
  input(vlc);
  output(vlc);
  auto* vsuite = verify->add_subcommand("suite", "full acceptance battery");
  output(vsuite);
  vsuite->add_option("--seed", o.suite_seed, "random seed");
  vsuite->add_option("--threads", o.threads, "worker threads")->check(CLI::Range(1, 256));
  vsuite->add_option("--scale", o.scale, "path count multiplier")->check(CLI::PositiveNumber);
  vsuite->add_option("--only", o.only, "criterion ids")->expected(1, -1);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  Reporter rep(o, out);
  try {
    if (*acheck) return cmd_algebra_check(o, rep);
    if (*afree) return cmd_algebra_free(o, rep);
    if (*symmetry) return cmd_symmetry(o, rep);
    if (*nmod) return cmd_normal_module(o, rep);
    if (*obstruction) return cmd_obstruction(o, rep);
    if (*mcheck) return cmd_manifold_check(o, rep);
    if (*christoffel) return cmd_christoffel(o, rep);
    if (*devcond) return cmd_develop_condition(o, rep);
    if (*prol) return cmd_prolong(o, rep);
    for (const auto& [name, s] : sims)
      if (*s) return cmd_simulate(name, o, rep);
    if (*vgen) return cmd_verify_generator(o, rep);
    if (*veq) return cmd_verify_equivalence(o, rep);
    if (*vlc) return cmd_verify_levi_civita(o, rep);
    if (*vsuite) return cmd_verify_suite(o, rep);
  } catch (const Error& e) {
    err << "error: " << e.kind() << ": " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace srdev
