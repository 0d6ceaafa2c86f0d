#include "srdev/montecarlo.hpp"

#include <cmath>

#include "srdev/errors.hpp"

namespace srdev {

namespace {

struct Moments {
  double mean = 0, var = 0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  for (double x : v) m.var += (x - m.mean) * (x - m.mean);
  m.var /= static_cast<double>(v.size() - 1);
  return m;
}

std::vector<double> samples(const Ensemble& e, std::size_t r, const Expr& f) {
  std::vector<double> out(e.paths);
  for (std::size_t p = 0; p < e.paths; ++p) {
    out[p] = f.eval({e.values.data() + (r * e.paths + p) * e.dim, std::size_t(e.dim)});
    if (!std::isfinite(out[p]))
      throw NonFinite("test function is not finite on path " + std::to_string(p));
  }
  return out;
}

}  // namespace

MCEstimate estimate(const Ensemble& e, std::size_t r, const Expr& f, double dt) {
  if (e.paths < 2) throw MalformedSpec("an estimate needs at least two paths");
  const Moments m = moments(samples(e, r, f));
  return {m.mean, std::sqrt(m.var / static_cast<double>(e.paths)), e.paths, dt, e.times[r]};
}

MCEstimate estimate_expectation(const Diffusion& proc, const Expr& f, double t,
                                const SDEConfig& cfg, std::size_t paths) {
  if (paths < 2) throw MalformedSpec("an estimate needs at least two paths");
  SDEConfig c = cfg;
  c.T = t;
  const Ensemble e = simulate_ensemble(proc, c, paths, {t});
  return estimate(e, 0, f, c.dt);
}

std::vector<GeneratorReport> generator_tests(const FrameField& frame, const ChristoffelField& gamma,
                                             const std::vector<Expr>& fs,
                                             const std::vector<double>& q0, double t,
                                             const SDEConfig& cfg, std::size_t paths,
                                             const std::string& structure_id) {
  if (paths < 2) throw MalformedSpec("generator test needs at least two paths");
  SDEConfig c = cfg;
  c.T = t;
  auto proc = developed_diffusion(frame, gamma, q0, {}, cfg.projection);
  const Ensemble e = simulate_ensemble(*proc, c, paths, {t, t / 2, t / 4});
  const double n = static_cast<double>(paths);

  std::vector<GeneratorReport> out;
  for (const Expr& f : fs) {
    GeneratorReport rep;
    rep.structure_id = structure_id;
    rep.function = to_string(f, frame.chart.coords);
    rep.t = t;
    rep.dt = cfg.dt;
    rep.paths = paths;
    rep.left_chart = e.left_chart;
    rep.f0 = f.eval(q0);
    rep.symbolic_value = 0.5 * developed_generator(frame, gamma, f, q0);
    rep.popp_value = 0.5 * popp_sublaplacian(frame, gamma.structure(), f, q0);

    // Per-path generator quotients at t, t/2, t/4.
    std::vector<std::vector<double>> g(3);
    for (int r = 0; r < 3; ++r) {
      g[r] = samples(e, r, f);
      for (double& v : g[r]) v = (v - rep.f0) / e.times[r];
    }
    std::vector<double> d1(paths), d2(paths);
    for (std::size_t p = 0; p < paths; ++p) {
      d1[p] = g[0][p] - g[1][p];
      d2[p] = g[1][p] - g[2][p];
    }
    const Moments m0 = moments(g[0]), m1 = moments(g[1]);
    const Moments md1 = moments(d1), md2 = moments(d2);
    rep.mc_value = m0.mean;
    rep.stderr_value = std::sqrt(m0.var / n);
    rep.mc_half = m1.mean;
    rep.stderr_half = std::sqrt(m1.var / n);
    rep.bias = 2 * std::abs(md1.mean);
    rep.bias_half = 2 * std::abs(md2.mean);
    rep.z = rep.stderr_value > 0 ? (rep.mc_value - rep.symbolic_value) / rep.stderr_value : 0.0;
    const double diff_se = std::sqrt((md1.var + md2.var) / n);
    rep.bias_shrinks = std::abs(md2.mean) <= std::abs(md1.mean) + 3 * diff_se;

    auto within = [](double mc, double target, double se, double bias) {
      return std::abs(mc - target) <= 3 * se + bias + 1e-12;
    };
    rep.pass = within(rep.mc_value, rep.symbolic_value, rep.stderr_value, rep.bias) &&
               within(rep.mc_half, rep.symbolic_value, rep.stderr_half, rep.bias_half) &&
               rep.bias_shrinks;
    rep.matches_popp = within(rep.mc_value, rep.popp_value, rep.stderr_value, rep.bias) &&
                       within(rep.mc_half, rep.popp_value, rep.stderr_half, rep.bias_half);
    out.push_back(std::move(rep));
  }
  return out;
}

GeneratorReport generator_test(const FrameField& frame, const ChristoffelField& gamma,
                               const Expr& f, const std::vector<double>& q0, double t,
                               const SDEConfig& cfg, std::size_t paths,
                               const std::string& structure_id) {
  return generator_tests(frame, gamma, {f}, q0, t, cfg, paths, structure_id).front();
}

std::uint64_t popp_seed(std::uint64_t seed) { return seed ^ 0x5851f42d4c957f2dULL; }

EquivalenceReport equivalence_test(const FrameField& frame, const StructureField& sf,
                                   const ChristoffelField& gamma, const std::vector<double>& q0,
                                   double t, const SDEConfig& cfg, std::size_t paths,
                                   const std::string& structure_id) {
  if (paths < 2) throw MalformedSpec("equivalence test needs at least two paths");
  EquivalenceReport rep;
  rep.structure_id = structure_id;
  rep.t = t;
  rep.dt = cfg.dt;
  rep.paths = paths;
  SDEConfig c = cfg;
  c.T = t;
  auto dev = developed_diffusion(frame, gamma, q0, {}, cfg.projection);
  const Ensemble a = simulate_ensemble(*dev, c, paths, {t});
  c.seed = popp_seed(cfg.seed);
  auto pop = popp_diffusion(frame, sf, q0);
  const Ensemble b = simulate_ensemble(*pop, c, paths, {t});
  rep.left_chart_developed = a.left_chart;
  rep.left_chart_popp = b.left_chart;

  const double n = static_cast<double>(paths);
  const auto& names = frame.chart.coords;
  for (int k = 0; k < frame.chart.dim(); ++k)
    for (int power = 1; power <= 2; ++power) {
      const Expr f = Expr::pow(Expr::var(k), power);
      const Moments ma = moments(samples(a, 0, f)), mb = moments(samples(b, 0, f));
      const double se = std::sqrt((ma.var + mb.var) / n);
      const double z = se > 0 ? (ma.mean - mb.mean) / se : 0.0;
      rep.moments.push_back(power == 1 ? names[k] : names[k] + "^2");
      rep.developed.push_back(ma.mean);
      rep.popp.push_back(mb.mean);
      rep.std_error.push_back(se);
      rep.z.push_back(z);
      rep.max_abs_z = std::max(rep.max_abs_z, std::abs(z));
    }
  rep.pass = rep.max_abs_z <= 3.0;
  return rep;
}

nlohmann::json to_json(const MCEstimate& e) {
  return {{"mean", e.mean}, {"stderr", e.std_error}, {"paths", e.paths}, {"dt", e.dt}, {"t", e.t}};
}

nlohmann::json to_json(const GeneratorReport& r) {
  return {{"test", "generator"},
          {"structure_id", r.structure_id},
          {"function", r.function},
          {"t", r.t},
          {"dt", r.dt},
          {"paths", r.paths},
          {"mc_value", r.mc_value},
          {"symbolic_value", r.symbolic_value},
          {"popp_value", r.popp_value},
          {"stderr", r.stderr_value},
          {"z", r.z},
          {"bias", r.bias},
          {"mc_value_half", r.mc_half},
          {"stderr_half", r.stderr_half},
          {"bias_half", r.bias_half},
          {"bias_shrinks", r.bias_shrinks},
          {"matches_popp", r.matches_popp},
          {"left_chart", r.left_chart},
          {"pass", r.pass}};
}

nlohmann::json to_json(const EquivalenceReport& r) {
  return {{"test", "equivalence"},
          {"structure_id", r.structure_id},
          {"t", r.t},
          {"dt", r.dt},
          {"paths", r.paths},
          {"moments", r.moments},
          {"mc_value", r.developed},
          {"symbolic_value", r.popp},
          {"stderr", r.std_error},
          {"z", r.z},
          {"max_abs_z", r.max_abs_z},
          {"left_chart", {r.left_chart_developed, r.left_chart_popp}},
          {"pass", r.pass}};
}

}  // namespace srdev
