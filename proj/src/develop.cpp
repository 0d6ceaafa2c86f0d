#include "srdev/develop.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <thread>

#include "srdev/errors.hpp"

namespace srdev {

void SDEConfig::validate() const {
  if (!(dt > 0) || !std::isfinite(dt)) throw MalformedSpec("dt must be positive");
  if (!(T >= dt) || !std::isfinite(T)) throw MalformedSpec("T must be at least dt");
  if (threads < 1) throw MalformedSpec("threads must be at least 1");
}

long SDEConfig::steps() const {
  const double r = T / dt;
  const double n = std::round(r);
  if (std::abs(r - n) <= 1e-9 * std::max(1.0, n)) return static_cast<long>(n);
  return static_cast<long>(std::floor(r));
}

namespace {

constexpr std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double open_unit(std::uint64_t r) {
  return (static_cast<double>(r >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

void gaussian_increments(std::uint64_t seed, std::uint64_t path, std::uint64_t step, double* out,
                         int count) {
  const std::uint64_t key = mix(mix(mix(seed) ^ path) ^ (step * 0xd1b54a32d192ed03ULL));
  for (int j = 0; 2 * j < count; ++j) {
    const double u1 = open_unit(mix(key + 2 * static_cast<std::uint64_t>(j) + 1));
    const double u2 = open_unit(mix(key ^ (0xa0761d6478bd642fULL * (j + 1))));
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    out[2 * j] = r * std::cos(a);
    if (2 * j + 1 < count) out[2 * j + 1] = r * std::sin(a);
  }
}

namespace {

void check_step(const GradedLieAlgebra& alg) {
  if (alg.step() > 4)
    throw StepTooLarge("group law is implemented up to step 4, algebra has step " +
                       std::to_string(alg.step()));
}

std::vector<double> br(const GradedLieAlgebra& alg, const std::vector<double>& x,
                       const std::vector<double>& y) {
  std::vector<double> out(x.size());
  alg.bracket(x, y, out);
  return out;
}

void axpy(double a, const std::vector<double>& x, std::vector<double>& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

}  // namespace

std::vector<double> bch(const GradedLieAlgebra& alg, std::span<const double> x,
                        std::span<const double> y) {
  check_step(alg);
  if (x.size() != static_cast<std::size_t>(alg.dim()) || y.size() != x.size())
    throw DimensionMismatch("bch arguments must have the algebra dimension");
  std::vector<double> xv(x.begin(), x.end()), yv(y.begin(), y.end());
  std::vector<double> z = xv;
  axpy(1.0, yv, z);
  if (alg.step() < 2) return z;
  const auto xy = br(alg, xv, yv);
  axpy(0.5, xy, z);
  if (alg.step() < 3) return z;
  const auto xxy = br(alg, xv, xy);
  const auto yyx = br(alg, yv, br(alg, yv, xv));
  axpy(1.0 / 12, xxy, z);
  axpy(1.0 / 12, yyx, z);
  if (alg.step() < 4) return z;
  axpy(-1.0 / 24, br(alg, yv, xxy), z);
  return z;
}

std::vector<double> left_invariant_field(const GradedLieAlgebra& alg, std::span<const double> x,
                                         std::span<const double> e) {
  check_step(alg);
  if (x.size() != static_cast<std::size_t>(alg.dim()) || e.size() != x.size())
    throw DimensionMismatch("left_invariant_field arguments must have the algebra dimension");
  std::vector<double> xv(x.begin(), x.end()), ev(e.begin(), e.end());
  std::vector<double> v = ev;
  if (alg.step() < 2) return v;
  const auto xe = br(alg, xv, ev);
  axpy(0.5, xe, v);
  if (alg.step() < 3) return v;
  axpy(1.0 / 12, br(alg, xv, xe), v);
  return v;
}

void polar_project(double* h, int k) {
  // Newton-Schulz iteration towards the orthogonal polar factor.
  std::vector<double> hth(static_cast<std::size_t>(k) * k), next(static_cast<std::size_t>(k) * k);
  for (int it = 0; it < 20; ++it) {
    double err = 0;
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) {
        double s = 0;
        for (int r = 0; r < k; ++r) s += h[r * k + a] * h[r * k + b];
        hth[a * k + b] = s;
        const double d = s - (a == b ? 1.0 : 0.0);
        err += d * d;
      }
    if (err < 1e-28) return;
    if (!(err < 1.0)) throw NonFinite("frame rotation drifted too far from the orthogonal group");
    for (int r = 0; r < k; ++r)
      for (int b = 0; b < k; ++b) {
        double s = 0;
        for (int a = 0; a < k; ++a) s += h[r * k + a] * hth[a * k + b];
        next[r * k + b] = 1.5 * h[r * k + b] - 0.5 * s;
      }
    std::copy(next.begin(), next.end(), h);
  }
}

namespace {

class CarnotLift final : public Diffusion {
public:
  explicit CarnotLift(const GradedLieAlgebra& alg) : alg_(alg) { check_step(alg); }
  int state_dim() const override { return alg_.dim(); }
  int observed_dim() const override { return alg_.dim(); }
  int noise_dim() const override { return alg_.generators(); }
  std::vector<double> initial() const override { return std::vector<double>(alg_.dim(), 0.0); }

  struct Buffers : Scratch {
    std::vector<double> e, xe, xxe;
  };
  std::unique_ptr<Scratch> scratch() const override {
    auto s = std::make_unique<Buffers>();
    s->e.assign(alg_.dim(), 0.0);
    s->xe.resize(alg_.dim());
    s->xxe.resize(alg_.dim());
    return s;
  }
  void coefficients(const double* y, double* b, double* g, Scratch& base) const override {
    auto& s = static_cast<Buffers&>(base);
    const int n = alg_.dim();
    std::span<const double> x(y, n);
    std::fill(b, b + n, 0.0);
    for (int k = 0; k < noise_dim(); ++k) {
      double* gk = g + static_cast<std::ptrdiff_t>(k) * n;
      std::fill(gk, gk + n, 0.0);
      gk[k] = 1.0;
      if (alg_.step() < 2) continue;
      s.e[k] = 1.0;
      alg_.bracket(x, s.e, s.xe);
      s.e[k] = 0.0;
      for (int c = 0; c < n; ++c) gk[c] += 0.5 * s.xe[c];
      if (alg_.step() < 3) continue;
      alg_.bracket(x, s.xe, s.xxe);
      for (int c = 0; c < n; ++c) gk[c] += s.xxe[c] / 12;
    }
  }

private:
  GradedLieAlgebra alg_;
};

struct ChartScratch : Diffusion::Scratch {
  StructureField::Workspace ws;
  std::vector<double> xh, div, gamma, c;
};

void check_initial(const Chart& chart, const std::vector<double>& q0) {
  if (q0.size() != static_cast<std::size_t>(chart.dim()))
    throw DimensionMismatch("initial point has " + std::to_string(q0.size()) +
                            " coordinates, chart has " + std::to_string(chart.dim()));
}

std::vector<double> checked_rotation(std::vector<double> h0, int k1) {
  const std::size_t kk = static_cast<std::size_t>(k1) * k1;
  if (h0.empty()) {
    h0.assign(kk, 0.0);
    for (int i = 0; i < k1; ++i) h0[i * k1 + i] = 1.0;
    return h0;
  }
  if (h0.size() != kk) throw DimensionMismatch("initial rotation must be k1 x k1");
  double err = 0;
  for (int a = 0; a < k1; ++a)
    for (int b = 0; b < k1; ++b) {
      double s = 0;
      for (int r = 0; r < k1; ++r) s += h0[r * k1 + a] * h0[r * k1 + b];
      err += std::pow(s - (a == b ? 1.0 : 0.0), 2);
    }
  if (std::sqrt(err) > 1e-8) throw MalformedSpec("initial rotation is not orthogonal");
  return h0;
}

class Developed final : public Diffusion {
public:
  Developed(const FrameField& frame, const ChristoffelField& gamma, std::vector<double> q0,
            std::vector<double> h0, bool projection)
      : chart_(frame.chart), gamma_(gamma), q0_(std::move(q0)), projection_(projection) {
    check_initial(chart_, q0_);
    d_ = chart_.dim();
    k1_ = frame.k1();
    if (gamma_.k1() != k1_) throw DimensionMismatch("Christoffel field does not match the frame");
    h0_ = checked_rotation(std::move(h0), k1_);
  }
  int state_dim() const override { return d_ + k1_ * k1_; }
  int observed_dim() const override { return d_; }
  int noise_dim() const override { return k1_; }
  std::vector<double> initial() const override {
    std::vector<double> y = q0_;
    y.insert(y.end(), h0_.begin(), h0_.end());
    return y;
  }
  std::unique_ptr<Scratch> scratch() const override {
    auto s = std::make_unique<ChartScratch>();
    s->ws = gamma_.structure().workspace();
    s->xh.resize(static_cast<std::size_t>(k1_) * d_);
    s->div.resize(k1_);
    s->gamma.resize(static_cast<std::size_t>(gamma_.dim_h()) * k1_);
    s->c.resize(gamma_.dim_h());
    return s;
  }
  void coefficients(const double* y, double* b, double* g, Scratch& base) const override {
    auto& s = static_cast<ChartScratch&>(base);
    const int m = state_dim(), dh = gamma_.dim_h();
    const double* h = y + d_;
    gamma_.structure().horizontal(y, s.xh.data(), s.div.data(), s.ws);
    gamma_.eval_from_divergence(s.div.data(), s.gamma.data());
    const auto& blocks = gamma_.blocks();
    std::fill(b, b + m, 0.0);
    for (int k = 0; k < k1_; ++k) {
      double* gk = g + static_cast<std::ptrdiff_t>(k) * m;
      std::fill(gk, gk + m, 0.0);
      for (int i = 0; i < k1_; ++i) {
        const double a = h[k * k1_ + i];
        for (int c = 0; c < d_; ++c) gk[c] += a * s.xh[i * d_ + c];
      }
      for (int al = 0; al < dh; ++al) {
        double w = 0;
        for (int i = 0; i < k1_; ++i) w += h[k * k1_ + i] * s.gamma[al * k1_ + i];
        s.c[al] = w;
      }
      // dh = sum_alpha c_alpha h A_alpha, A_alpha the layer-one block.
      for (int r = 0; r < k1_; ++r)
        for (int col = 0; col < k1_; ++col) {
          double v = 0;
          for (int al = 0; al < dh; ++al) {
            if (s.c[al] == 0.0) continue;
            double t = 0;
            for (int j = 0; j < k1_; ++j) t += h[r * k1_ + j] * blocks[(al * k1_ + j) * k1_ + col];
            v += s.c[al] * t;
          }
          gk[d_ + r * k1_ + col] = v;
        }
    }
  }
  void project(double* y) const override {
    if (projection_) polar_project(y + d_, k1_);
  }
  bool inside(const double* y) const override { return chart_.contains({y, std::size_t(d_)}); }

private:
  Chart chart_;
  ChristoffelField gamma_;
  std::vector<double> q0_, h0_;
  bool projection_;
  int d_ = 0, k1_ = 0;
};

class Popp final : public Diffusion {
public:
  Popp(const FrameField& frame, const StructureField& sf, std::vector<double> q0)
      : chart_(frame.chart), sf_(sf), q0_(std::move(q0)) {
    check_initial(chart_, q0_);
    d_ = chart_.dim();
    k1_ = frame.k1();
  }
  int state_dim() const override { return d_; }
  int observed_dim() const override { return d_; }
  int noise_dim() const override { return k1_; }
  std::vector<double> initial() const override { return q0_; }
  std::unique_ptr<Scratch> scratch() const override {
    auto s = std::make_unique<ChartScratch>();
    s->ws = sf_.workspace();
    s->xh.resize(static_cast<std::size_t>(k1_) * d_);
    s->div.resize(k1_);
    return s;
  }
  void coefficients(const double* y, double* b, double* g, Scratch& base) const override {
    auto& s = static_cast<ChartScratch&>(base);
    sf_.horizontal(y, s.xh.data(), s.div.data(), s.ws);
    std::fill(b, b + d_, 0.0);
    for (int i = 0; i < k1_; ++i)
      for (int c = 0; c < d_; ++c) {
        g[i * d_ + c] = s.xh[i * d_ + c];
        b[c] += 0.5 * s.div[i] * s.xh[i * d_ + c];
      }
  }
  bool inside(const double* y) const override { return chart_.contains({y, std::size_t(d_)}); }

private:
  Chart chart_;
  StructureField sf_;
  std::vector<double> q0_;
  int d_ = 0, k1_ = 0;
};

/// Working buffers for one stepping thread.
struct Stepper {
  explicit Stepper(const Diffusion& p, Scheme scheme)
      : proc(p), scheme(scheme), m(p.state_dim()), r(p.noise_dim()), scratch(p.scratch()),
        b0(m), b1(m), g0(static_cast<std::size_t>(r) * m), g1(static_cast<std::size_t>(r) * m),
        pred(m), dw(r) {}

  void step(std::vector<double>& y, std::uint64_t seed, std::uint64_t path, std::uint64_t k,
            double dt) {
    gaussian_increments(seed, path, k, dw.data(), r);
    const double sq = std::sqrt(dt);
    for (auto& w : dw) w *= sq;
    proc.coefficients(y.data(), b0.data(), g0.data(), *scratch);
    for (int c = 0; c < m; ++c) {
      double v = b0[c] * dt;
      for (int q = 0; q < r; ++q) v += g0[q * m + c] * dw[q];
      pred[c] = y[c] + v;
    }
    if (scheme == Scheme::Heun) {
      proc.coefficients(pred.data(), b1.data(), g1.data(), *scratch);
      for (int c = 0; c < m; ++c) {
        double v = 0.5 * (b0[c] + b1[c]) * dt;
        for (int q = 0; q < r; ++q) v += 0.5 * (g0[q * m + c] + g1[q * m + c]) * dw[q];
        y[c] += v;
      }
    } else {
      // Euler-Maruyama on the Ito form; the correction (1/2) sum_q (Dg_q) g_q
      // is taken by a forward difference along each g_q.
      std::vector<double> shifted(m);
      const double eps = 1e-6;
      for (int c = 0; c < m; ++c) pred[c] = y[c] + b0[c] * dt;
      for (int q = 0; q < r; ++q) {
        for (int c = 0; c < m; ++c) shifted[c] = y[c] + eps * g0[q * m + c];
        proc.coefficients(shifted.data(), b1.data(), g1.data(), *scratch);
        for (int c = 0; c < m; ++c)
          pred[c] += 0.5 * dt * (g1[q * m + c] - g0[q * m + c]) / eps + g0[q * m + c] * dw[q];
      }
      y = pred;
    }
    proc.project(y.data());
    for (double v : y)
      if (!std::isfinite(v))
        throw NonFinite("state became non-finite on path " + std::to_string(path) + " at step " +
                        std::to_string(k));
  }

  const Diffusion& proc;
  Scheme scheme;
  int m, r;
  std::unique_ptr<Diffusion::Scratch> scratch;
  std::vector<double> b0, b1, g0, g1, pred, dw;
};

}  // namespace

std::unique_ptr<Diffusion> carnot_lift(const GradedLieAlgebra& alg) {
  return std::make_unique<CarnotLift>(alg);
}

std::unique_ptr<Diffusion> developed_diffusion(const FrameField& frame, const ChristoffelField& gamma,
                                               std::vector<double> q0, std::vector<double> h0,
                                               bool projection) {
  return std::make_unique<Developed>(frame, gamma, std::move(q0), std::move(h0), projection);
}

std::unique_ptr<Diffusion> popp_diffusion(const FrameField& frame, const StructureField& sf,
                                          std::vector<double> q0) {
  return std::make_unique<Popp>(frame, sf, std::move(q0));
}

Path simulate_path(const Diffusion& proc, const SDEConfig& cfg, std::uint64_t path_index) {
  cfg.validate();
  const long steps = cfg.steps();
  const int obs = proc.observed_dim(), m = proc.state_dim();
  Stepper st(proc, cfg.scheme);
  std::vector<double> y = proc.initial();
  Path p;
  auto record = [&](long k) {
    p.t.push_back(static_cast<double>(k) * cfg.dt);
    p.q.emplace_back(y.begin(), y.begin() + obs);
    if (m > obs) p.h.emplace_back(y.begin() + obs, y.end());
    if (!proc.inside(y.data())) p.left_chart = true;
  };
  record(0);
  for (long k = 0; k < steps; ++k) {
    st.step(y, cfg.seed, path_index, static_cast<std::uint64_t>(k), cfg.dt);
    record(k + 1);
  }
  return p;
}

Path simulate_carnot_lift(const GradedLieAlgebra& alg, const SDEConfig& cfg,
                          std::uint64_t path_index) {
  return simulate_path(*carnot_lift(alg), cfg, path_index);
}

Path develop_sde(const FrameField& frame, const ChristoffelField& gamma, std::vector<double> q0,
                 std::vector<double> h0, const SDEConfig& cfg, std::uint64_t path_index) {
  auto proc = developed_diffusion(frame, gamma, std::move(q0), std::move(h0), cfg.projection);
  return simulate_path(*proc, cfg, path_index);
}

Path simulate_popp(const FrameField& frame, const StructureField& sf, std::vector<double> q0,
                   const SDEConfig& cfg, std::uint64_t path_index) {
  return simulate_path(*popp_diffusion(frame, sf, std::move(q0)), cfg, path_index);
}

Path develop_curve(const FrameField& frame, const ChristoffelField& gamma,
                   const std::vector<Expr>& u, std::vector<double> q0, std::vector<double> h0,
                   double dt, double T, bool projection) {
  SDEConfig cfg;
  cfg.dt = dt;
  cfg.T = T;
  cfg.validate();
  if (u.size() != static_cast<std::size_t>(frame.k1()))
    throw DimensionMismatch("control needs one expression per horizontal direction");
  Developed proc(frame, gamma, std::move(q0), std::move(h0), projection);
  const int m = proc.state_dim(), r = proc.noise_dim(), d = proc.observed_dim();
  auto scratch = proc.scratch();
  std::vector<double> b(m), g(static_cast<std::size_t>(r) * m), uv(r);
  auto rhs = [&](double t, const std::vector<double>& y, std::vector<double>& out) {
    const double tt[1] = {t};
    for (int k = 0; k < r; ++k) uv[k] = u[k].eval(tt);
    proc.coefficients(y.data(), b.data(), g.data(), *scratch);
    for (int c = 0; c < m; ++c) {
      double v = 0;
      for (int k = 0; k < r; ++k) v += g[k * m + c] * uv[k];
      out[c] = v;
    }
  };
  const long steps = cfg.steps();
  std::vector<double> y = proc.initial(), k1(m), k2(m), k3(m), k4(m), tmp(m);
  Path p;
  auto record = [&](double t) {
    p.t.push_back(t);
    p.q.emplace_back(y.begin(), y.begin() + d);
    p.h.emplace_back(y.begin() + d, y.end());
    if (!proc.inside(y.data())) p.left_chart = true;
  };
  record(0);
  for (long s = 0; s < steps; ++s) {
    const double t = static_cast<double>(s) * dt;
    rhs(t, y, k1);
    for (int c = 0; c < m; ++c) tmp[c] = y[c] + 0.5 * dt * k1[c];
    rhs(t + 0.5 * dt, tmp, k2);
    for (int c = 0; c < m; ++c) tmp[c] = y[c] + 0.5 * dt * k2[c];
    rhs(t + 0.5 * dt, tmp, k3);
    for (int c = 0; c < m; ++c) tmp[c] = y[c] + dt * k3[c];
    rhs(t + dt, tmp, k4);
    for (int c = 0; c < m; ++c) y[c] += dt / 6 * (k1[c] + 2 * k2[c] + 2 * k3[c] + k4[c]);
    proc.project(y.data());
    record(static_cast<double>(s + 1) * dt);
  }
  return p;
}

Ensemble simulate_ensemble(const Diffusion& proc, const SDEConfig& cfg, std::size_t paths,
                           const std::vector<double>& times) {
  cfg.validate();
  const long steps = cfg.steps();
  std::vector<long> at;
  for (double t : times) {
    const long k = std::lround(t / cfg.dt);
    if (k < 0 || k > steps) throw MalformedSpec("sample time outside [0, T]");
    at.push_back(k);
  }
  Ensemble e;
  e.paths = paths;
  e.dim = proc.observed_dim();
  for (long k : at) e.times.push_back(static_cast<double>(k) * cfg.dt);
  e.values.assign(at.size() * paths * e.dim, 0.0);
  std::vector<char> left(paths, 0);
  const long last = at.empty() ? 0 : *std::max_element(at.begin(), at.end());

  auto work = [&](std::size_t begin, std::size_t end) {
    Stepper st(proc, cfg.scheme);
    for (std::size_t p = begin; p < end; ++p) {
      std::vector<double> y = proc.initial();
      auto store = [&](long k) {
        for (std::size_t r = 0; r < at.size(); ++r)
          if (at[r] == k)
            std::copy(y.begin(), y.begin() + e.dim, e.values.begin() + (r * paths + p) * e.dim);
        if (!proc.inside(y.data())) left[p] = 1;
      };
      store(0);
      for (long k = 0; k < last; ++k) {
        st.step(y, cfg.seed, p, static_cast<std::uint64_t>(k), cfg.dt);
        store(k + 1);
      }
    }
  };

  const std::size_t workers = std::min<std::size_t>(std::max(cfg.threads, 1), std::max<std::size_t>(paths, 1));
  if (workers <= 1) {
    work(0, paths);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    const std::size_t chunk = (paths + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t b = std::min(paths, w * chunk), en = std::min(paths, b + chunk);
      pool.emplace_back([&, w, b, en] {
        try {
          work(b, en);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& err : errors)
      if (err) std::rethrow_exception(err);
  }
  for (char c : left) e.left_chart += c ? 1 : 0;
  return e;
}

}  // namespace srdev
