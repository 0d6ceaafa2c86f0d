#include "srdev/manifold.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "srdev/errors.hpp"

namespace srdev {

namespace {

std::string point_string(std::span<const double> q) {
  std::string s = "(";
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(q[i]);
  }
  return s + ")";
}

int numeric_rank(const Eigen::MatrixXd& m, double tol) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  const double scale = std::max(1.0, s(0));
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > tol * scale) ++r;
  return r;
}

}  // namespace

void FrameField::validate() const {
  const int d = chart.dim();
  if (d < 1) throw MalformedSpec("chart needs at least one coordinate");
  if (static_cast<int>(chart.periodic.size()) != d || static_cast<int>(chart.box.size()) != d)
    throw MalformedSpec("chart periodic flags and box must match the coordinate count");
  if (n() != d)
    throw MalformedSpec("frame has " + std::to_string(n()) + " fields on a chart of dimension " +
                        std::to_string(d));
  for (const auto& f : fields)
    if (static_cast<int>(f.size()) != d) throw MalformedSpec("frame field with wrong component count");
  if (growth.empty() || growth.back() != n())
    throw MalformedSpec("growth vector must end with the frame size");
  for (std::size_t l = 0; l < growth.size(); ++l)
    if (growth[l] <= (l ? growth[l - 1] : 0))
      throw MalformedSpec("growth vector must be strictly increasing and positive");
}

std::vector<Expr> lie_bracket(const std::vector<Expr>& x, const std::vector<Expr>& y) {
  if (x.size() != y.size()) throw DimensionMismatch("bracket of fields on different charts");
  std::vector<Expr> out(x.size());
  for (std::size_t b = 0; b < x.size(); ++b) out[b] = apply_field(x, y[b]) - apply_field(y, x[b]);
  return out;
}

FrameField carnot_frame(const GradedLieAlgebra& alg) {
  if (alg.step() > 4)
    throw StepTooLarge("left-invariant fields are implemented up to step 4, algebra has step " +
                       std::to_string(alg.step()));
  const int n = alg.dim();
  std::vector<Expr> x(n);
  for (int i = 0; i < n; ++i) x[i] = Expr::var(i);
  auto br = [&](const std::vector<Expr>& u, const std::vector<Expr>& v) {
    std::vector<Expr> out(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          if (sgn(alg.c(i, j, k)) != 0 && !u[i].is_zero() && !v[j].is_zero())
            out[k] = out[k] + Expr(alg.c(i, j, k)) * u[i] * v[j];
    return out;
  };
  FrameField f;
  for (int i = 0; i < n; ++i) {
    f.chart.coords.push_back("x" + std::to_string(i + 1));
    f.chart.periodic.push_back(false);
    f.chart.box.emplace_back(-1.0, 1.0);
  }
  f.growth = alg.growth();
  for (int i = 0; i < n; ++i) {
    std::vector<Expr> e(n);
    e[i] = Expr(1);
    auto b1 = br(x, e);
    auto b2 = br(x, b1);
    std::vector<Expr> v(n);
    for (int k = 0; k < n; ++k) v[k] = e[k] + Expr(rational(1, 2)) * b1[k] + Expr(rational(1, 12)) * b2[k];
    f.fields.push_back(std::move(v));
  }
  return f;
}

std::vector<std::vector<double>> sample_grid(const Chart& chart, int per_dim) {
  const int d = chart.dim();
  std::vector<std::vector<double>> out;
  std::vector<int> idx(d, 0);
  while (true) {
    std::vector<double> p(d);
    for (int a = 0; a < d; ++a) {
      auto [lo, hi] = chart.box[a];
      p[a] = lo + (idx[a] + 0.5) * (hi - lo) / per_dim;
    }
    out.push_back(std::move(p));
    int a = d - 1;
    while (a >= 0 && ++idx[a] == per_dim) idx[a--] = 0;
    if (a < 0) break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// StructureField

StructureField::StructureField(const FrameField& frame) {
  frame.validate();
  n_ = frame.n();
  k1_ = frame.k1();
  d_ = frame.chart.dim();
  std::vector<Expr> head;
  for (int a = 0; a < d_; ++a)
    for (int i = 0; i < n_; ++i) head.push_back(frame.fields[i][a]);  // F(a, i)
  std::vector<Expr> all = head, hor = head;
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j) {
      pairs_.emplace_back(i, j);
      auto b = lie_bracket(frame.fields[i], frame.fields[j]);
      all.insert(all.end(), b.begin(), b.end());
    }
  for (int i = 0; i < k1_; ++i)
    for (int l = 0; l < n_; ++l) {
      if (l == i) continue;
      hpairs_.emplace_back(l, i);
      auto b = lie_bracket(frame.fields[l], frame.fields[i]);
      hor.insert(hor.end(), b.begin(), b.end());
    }
  all_ = ExprProgram(all);
  hor_ = ExprProgram(hor);
}

StructureField::Workspace StructureField::workspace() const {
  Workspace ws;
  ws.regs.resize(std::max(all_.registers(), hor_.registers()));
  ws.vals.resize(std::max(all_.outputs(), hor_.outputs()));
  ws.lu.resize(static_cast<std::size_t>(n_) * n_);
  ws.rhs.resize(n_);
  ws.perm.resize(n_);
  return ws;
}

void StructureField::factor(const double* frame, Workspace& ws) const {
  const int n = n_;
  double* a = ws.lu.data();
  std::copy(frame, frame + n * n, a);
  double scale = 0;
  for (int i = 0; i < n * n; ++i) scale = std::max(scale, std::abs(a[i]));
  for (int i = 0; i < n; ++i) ws.perm[i] = i;
  for (int c = 0; c < n; ++c) {
    int p = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(a[r * n + c]) > std::abs(a[p * n + c])) p = r;
    if (!(std::abs(a[p * n + c]) > 1e-13 * scale))
      throw SingularFrame("frame matrix is singular");
    if (p != c) {
      for (int j = 0; j < n; ++j) std::swap(a[p * n + j], a[c * n + j]);
      std::swap(ws.perm[p], ws.perm[c]);
    }
    for (int r = c + 1; r < n; ++r) {
      double f = a[r * n + c] / a[c * n + c];
      a[r * n + c] = f;
      for (int j = c + 1; j < n; ++j) a[r * n + j] -= f * a[c * n + j];
    }
  }
}

void StructureField::solve(Workspace& ws, double* x) const {
  // Solves F x = rhs with the factorisation in ws.lu.
  const int n = n_;
  const double* a = ws.lu.data();
  for (int i = 0; i < n; ++i) x[i] = ws.rhs[ws.perm[i]];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) x[i] -= a[i * n + j] * x[j];
  for (int i = n - 1; i >= 0; --i) {
    for (int j = i + 1; j < n; ++j) x[i] -= a[i * n + j] * x[j];
    x[i] /= a[i * n + i];
  }
}

void StructureField::constants(const double* q, double* c, Workspace& ws) const {
  const int n = n_;
  all_.eval(q, ws.vals.data(), ws.regs.data());
  try {
    factor(ws.vals.data(), ws);
  } catch (const SingularFrame&) {
    throw SingularFrame("frame matrix is singular at " + point_string({q, static_cast<std::size_t>(d_)}));
  }
  std::fill(c, c + n * n * n, 0.0);
  std::vector<double> x(n);
  const double* br = ws.vals.data() + n * n;
  for (std::size_t p = 0; p < pairs_.size(); ++p) {
    auto [i, j] = pairs_[p];
    std::copy(br + p * n, br + (p + 1) * n, ws.rhs.begin());
    solve(ws, x.data());
    for (int k = 0; k < n; ++k) {
      c[(i * n + j) * n + k] = x[k];
      c[(j * n + i) * n + k] = -x[k];
    }
  }
}

std::vector<double> StructureField::constants(std::span<const double> q) const {
  Workspace ws = workspace();
  std::vector<double> c(static_cast<std::size_t>(n_) * n_ * n_);
  constants(q.data(), c.data(), ws);
  return c;
}

double StructureField::residual(std::span<const double> q) const {
  const int n = n_;
  std::vector<double> vals = all_.eval(q);
  std::vector<double> c = constants(q);
  double worst = 0;
  for (std::size_t p = 0; p < pairs_.size(); ++p) {
    auto [i, j] = pairs_[p];
    double num = 0, den = 0;
    for (int a = 0; a < n; ++a) {
      double s = 0;
      for (int k = 0; k < n; ++k) s += c[(i * n + j) * n + k] * vals[a * n + k];
      double b = vals[n * n + p * n + a];
      num = std::max(num, std::abs(s - b));
      den = std::max(den, std::abs(b));
    }
    worst = std::max(worst, num / std::max(1.0, den));
  }
  return worst;
}

void StructureField::horizontal(const double* q, double* xh, double* div, Workspace& ws) const {
  const int n = n_;
  hor_.eval(q, ws.vals.data(), ws.regs.data());
  const double* f = ws.vals.data();
  for (int i = 0; i < k1_; ++i)
    for (int a = 0; a < d_; ++a) xh[i * d_ + a] = f[a * n + i];
  factor(f, ws);
  std::fill(div, div + k1_, 0.0);
  double x[16];
  std::vector<double> big;
  double* xs = x;
  if (n > 16) {
    big.resize(n);
    xs = big.data();
  }
  const double* br = f + n * n;
  for (std::size_t p = 0; p < hpairs_.size(); ++p) {
    auto [l, i] = hpairs_[p];
    std::copy(br + p * n, br + (p + 1) * n, ws.rhs.begin());
    solve(ws, xs);
    div[i] += xs[l];
  }
}

// ---------------------------------------------------------------------------
// Growth and nilpotentization

EquinilpotencyReport adapted_growth(const FrameField& frame, const StructureField& sf,
                                    const std::vector<std::vector<double>>& points, double tol) {
  const int n = frame.n();
  const auto& growth = frame.growth;
  const int m = static_cast<int>(growth.size());
  std::vector<int> layer(n);
  for (int i = 0, l = 0; i < n; ++i) {
    while (i >= growth[l]) ++l;
    layer[i] = l + 1;
  }
  EquinilpotencyReport rep;
  rep.growth = growth;
  rep.points = points;
  rep.graded_mean.assign(static_cast<std::size_t>(n) * n * n, 0.0);
  std::vector<std::vector<double>> all_c;
  auto ws = sf.workspace();
  std::vector<double> c(static_cast<std::size_t>(n) * n * n);
  for (const auto& q : points) {
    sf.constants(q.data(), c.data(), ws);
    // S_1 = span(e_1..e_k1); S_l = S_{l-1} + [S_1, S_{l-1}] in frame coordinates.
    std::vector<Eigen::VectorXd> gens;
    for (int i = 0; i < growth[0]; ++i) gens.push_back(Eigen::VectorXd::Unit(n, i));
    bool ok = true;
    for (int l = 2; l <= m && ok; ++l) {
      for (int i = 0; i < growth[0]; ++i)
        for (int j = 0; j < growth[l - 2]; ++j) {
          Eigen::VectorXd v(n);
          for (int k = 0; k < n; ++k) v(k) = c[(i * n + j) * n + k];
          for (int k = growth[l - 1]; k < n; ++k)
            if (std::abs(v(k)) > tol * std::max(1.0, v.norm())) ok = false;
          gens.push_back(v);
        }
      Eigen::MatrixXd span(n, gens.size());
      for (std::size_t g = 0; g < gens.size(); ++g) span.col(g) = gens[g];
      if (numeric_rank(span, 1e-8) != growth[l - 1]) ok = false;
    }
    if (!ok)
      throw RankDrop("growth vector or adaptedness fails at " + point_string(q));
    rep.point_ok.push_back(true);
    all_c.push_back(c);
  }
  // Graded constants: layer(k) = layer(i) + layer(j).
  rep.max_deviation = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        if (layer[k] != layer[i] + layer[j]) continue;
        const std::size_t at = (static_cast<std::size_t>(i) * n + j) * n + k;
        double mean = 0;
        for (const auto& cc : all_c) mean += cc[at];
        if (!all_c.empty()) mean /= static_cast<double>(all_c.size());
        rep.graded_mean[at] = mean;
        for (const auto& cc : all_c)
          rep.max_deviation = std::max(rep.max_deviation, std::abs(cc[at] - mean) / std::max(1.0, std::abs(mean)));
      }
  rep.equinilpotent = rep.max_deviation <= tol;
  return rep;
}

GradedLieAlgebra nilpotentization(const FrameField& frame, const EquinilpotencyReport& rep) {
  const int n = frame.n();
  AlgebraSpec spec;
  spec.dim = n;
  spec.growth = frame.growth;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double v = rep.graded_mean[(static_cast<std::size_t>(i) * n + j) * n + k];
        Rational r = rationalize(v, 1000);
        if (std::abs(v) > 1e-9 && sgn(r) != 0) spec.brackets[{i, j}][k] = r;
      }
  return build_algebra(spec);
}

// ---------------------------------------------------------------------------
// Sub-Laplacians

HorizontalDerivatives horizontal_derivatives(const FrameField& frame, const Expr& f) {
  HorizontalDerivatives out;
  for (int i = 0; i < frame.k1(); ++i) {
    Expr xf = apply_field(frame.fields[i], f);
    out.first.push_back(xf);
    out.second = out.second + apply_field(frame.fields[i], xf);
  }
  return out;
}

std::vector<double> popp_drift(const StructureField& sf, std::span<const double> q) {
  auto ws = sf.workspace();
  std::vector<double> xh(static_cast<std::size_t>(sf.k1()) * sf.chart_dim()), div(sf.k1());
  sf.horizontal(q.data(), xh.data(), div.data(), ws);
  // -sum_l c^l_{il} = sum_l c^l_{li}
  return div;
}

double popp_sublaplacian(const FrameField& frame, const StructureField& sf, const Expr& f,
                         std::span<const double> q) {
  HorizontalDerivatives hd = horizontal_derivatives(frame, f);
  std::vector<double> d = popp_drift(sf, q);
  double out = hd.second.eval(q);
  for (int i = 0; i < frame.k1(); ++i) out += d[i] * hd.first[i].eval(q);
  return out;
}

DevelopConditionReport develop_condition(const FrameField& frame, const StructureField& sf,
                                         const GradedLieAlgebra& alg, const SymmetryAlgebra& sym,
                                         const std::vector<std::vector<double>>& points, double tol) {
  EquinilpotencyReport rep = adapted_growth(frame, sf, points, tol);
  const int n = frame.n();
  if (alg.dim() != n || alg.growth() != frame.growth)
    throw ModelMismatch("frame growth differs from the model algebra");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        if (alg.layer(k) != alg.layer(i) + alg.layer(j)) continue;
        double v = rep.graded_mean[(static_cast<std::size_t>(i) * n + j) * n + k];
        if (std::abs(v - alg.c(i, j, k).get_d()) > 1e-6)
          throw ModelMismatch("graded constant c_{" + std::to_string(i + 1) + std::to_string(j + 1) +
                              "}^" + std::to_string(k + 1) + " of the frame is " + std::to_string(v) +
                              ", model has " + to_string(alg.c(i, j, k)));
      }
  if (!rep.equinilpotent)
    throw ModelMismatch("graded constants vary over the sample points");

  DevelopConditionReport out;
  const int k1 = frame.k1();
  auto ws = sf.workspace();
  std::vector<double> xh(static_cast<std::size_t>(k1) * sf.chart_dim()), div(k1);
  for (const auto& q : points) {
    sf.horizontal(q.data(), xh.data(), div.data(), ws);
    for (std::size_t r = 0; r < sym.ker.rows(); ++r) {
      double s = 0;
      for (int i = 0; i < k1; ++i) s += sym.ker(r, i).get_d() * div[i];
      out.max_abs = std::max(out.max_abs, std::abs(s));
      if (out.feasible && std::abs(s) > tol) {
        out.feasible = false;
        out.witness_direction = sym.ker.row_vector(r);
        out.witness_point = q;
        out.witness_value = s;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Christoffel symbols

ChristoffelField::ChristoffelField(const StructureField& sf, const SymmetryAlgebra& sym, double tol)
    : sf_(sf) {
  k1_ = sf.k1();
  dim_h_ = sym.dim();
  tol_ = tol;
  const int cols = dim_h_ * k1_;
  RatMatrix b(k1_, cols);
  for (int al = 0; al < dim_h_; ++al)
    for (int j = 0; j < k1_; ++j)
      for (int i = 0; i < k1_; ++i) b(i, al * k1_ + j) = sym.basis[al](j, i);
  RatMatrix pinv = cols ? pseudo_inverse(b) : RatMatrix(0, k1_);
  pinv_.resize(static_cast<std::size_t>(cols) * k1_);
  bmat_.resize(static_cast<std::size_t>(k1_) * cols);
  for (int r = 0; r < cols; ++r)
    for (int i = 0; i < k1_; ++i) pinv_[r * k1_ + i] = pinv(r, i).get_d();
  for (int i = 0; i < k1_; ++i)
    for (int r = 0; r < cols; ++r) bmat_[i * cols + r] = b(i, r).get_d();
  blocks_.resize(static_cast<std::size_t>(dim_h_) * k1_ * k1_);
  for (int al = 0; al < dim_h_; ++al)
    for (int j = 0; j < k1_; ++j)
      for (int i = 0; i < k1_; ++i) blocks_[(al * k1_ + j) * k1_ + i] = sym.basis[al](j, i).get_d();
  offset_.assign(cols, 0.0);
}

ChristoffelField ChristoffelField::constant(const StructureField& sf, const SymmetryAlgebra& sym,
                                            std::vector<double> values) {
  ChristoffelField g(sf, sym);
  if (values.size() != static_cast<std::size_t>(g.dim_h_ * g.k1_))
    throw DimensionMismatch("constant Christoffel values need dimH*k1 entries");
  g.solved_ = false;
  g.constant_ = std::move(values);
  return g;
}

ChristoffelField ChristoffelField::with_offset(int alpha, int j, double delta) const {
  if (alpha < 0 || alpha >= dim_h_ || j < 0 || j >= k1_)
    throw DimensionMismatch("Christoffel offset index out of range");
  ChristoffelField g = *this;
  g.offset_[alpha * k1_ + j] += delta;
  return g;
}

void ChristoffelField::eval_from_divergence(const double* div, double* gamma) const {
  const int cols = dim_h_ * k1_;
  if (!solved_) {
    for (int r = 0; r < cols; ++r) gamma[r] = constant_[r] + offset_[r];
    return;
  }
  for (int r = 0; r < cols; ++r) {
    double s = 0;
    for (int i = 0; i < k1_; ++i) s += pinv_[r * k1_ + i] * div[i];
    gamma[r] = s;
  }
  for (int i = 0; i < k1_; ++i) {
    double s = 0;
    for (int r = 0; r < cols; ++r) s += bmat_[i * cols + r] * gamma[r];
    if (std::abs(s - div[i]) > tol_ * std::max(1.0, std::abs(div[i])))
      throw Inconsistent("Christoffel system has no solution in direction " + std::to_string(i + 1) +
                             " (residual " + std::to_string(std::abs(s - div[i])) + ")",
                         i);
  }
  for (int r = 0; r < cols; ++r) gamma[r] += offset_[r];
}

void ChristoffelField::eval(const double* q, double* gamma, StructureField::Workspace& ws) const {
  std::vector<double> xh(static_cast<std::size_t>(k1_) * sf_.chart_dim()), div(k1_);
  sf_.horizontal(q, xh.data(), div.data(), ws);
  eval_from_divergence(div.data(), gamma);
}

std::vector<double> ChristoffelField::at(std::span<const double> q) const {
  auto ws = sf_.workspace();
  std::vector<double> g(static_cast<std::size_t>(dim_h_) * k1_);
  eval(q.data(), g.data(), ws);
  return g;
}

void ChristoffelField::drift(const double* gamma, double* out) const {
  for (int i = 0; i < k1_; ++i) {
    double s = 0;
    for (int al = 0; al < dim_h_; ++al)
      for (int j = 0; j < k1_; ++j) s += gamma[al * k1_ + j] * blocks_[(al * k1_ + j) * k1_ + i];
    out[i] = s;
  }
}

std::vector<double> generator_defect(const ChristoffelField& gamma, std::span<const double> q) {
  const StructureField& sf = gamma.structure();
  auto ws = sf.workspace();
  const int k1 = sf.k1();
  std::vector<double> xh(static_cast<std::size_t>(k1) * sf.chart_dim()), div(k1), drift(k1);
  sf.horizontal(q.data(), xh.data(), div.data(), ws);
  std::vector<double> g = gamma.at(q);
  gamma.drift(g.data(), drift.data());
  for (int i = 0; i < k1; ++i) drift[i] -= div[i];
  return drift;
}

double developed_generator(const FrameField& frame, const ChristoffelField& gamma, const Expr& f,
                           std::span<const double> q) {
  HorizontalDerivatives hd = horizontal_derivatives(frame, f);
  std::vector<double> g = gamma.at(q), drift(frame.k1());
  gamma.drift(g.data(), drift.data());
  double out = hd.second.eval(q);
  for (int i = 0; i < frame.k1(); ++i) out += drift[i] * hd.first[i].eval(q);
  return out;
}

// ---------------------------------------------------------------------------
// Riemannian cross-check

LeviCivitaReport levi_civita_check(const FrameField& frame, const StructureField& sf,
                                   const std::vector<std::vector<double>>& points) {
  const int n = frame.n();
  if (frame.growth.size() != 1) throw MalformedSpec("Levi-Civita check needs a Riemannian frame");
  LeviCivitaReport rep;
  auto ws = sf.workspace();
  std::vector<double> c(static_cast<std::size_t>(n) * n * n);
  auto C = [&](int k, int i, int j) { return c[(i * n + j) * n + k]; };  // c^k_{ij}
  for (const auto& q : points) {
    sf.constants(q.data(), c.data(), ws);
    // so(n) basis A_(j,k) = E_jk - E_kj, Gamma^(j,k)_a = <nabla_a e_k, e_j>.
    std::vector<double> lc(n, 0.0), popp(n, 0.0);
    for (int j = 0; j < n; ++j)
      for (int k = j + 1; k < n; ++k)
        for (int a = 0; a < n; ++a) {
          double g = 0.5 * (C(j, a, k) - C(a, k, j) + C(k, j, a));
          for (int i = 0; i < n; ++i) {
            double aai = (a == j && k == i ? 1.0 : 0.0) - (a == k && j == i ? 1.0 : 0.0);
            lc[i] += g * aai;
          }
        }
    for (int i = 0; i < n; ++i)
      for (int l = 0; l < n; ++l) popp[i] += C(l, l, i);
    for (int i = 0; i < n; ++i) {
      rep.max_difference = std::max(rep.max_difference, std::abs(lc[i] - popp[i]));
      rep.max_drift = std::max(rep.max_drift, std::abs(popp[i]));
    }
    ++rep.points;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Prolongation and Levy form

FrameField prolong(const FrameField& frame, int samples_per_dim) {
  frame.validate();
  if (frame.k1() != 2) throw MalformedSpec("prolongation needs exactly two horizontal fields");
  const int d = frame.chart.dim();
  FrameField out;
  out.chart = frame.chart;
  std::string name;
  for (int s = 1;; ++s) {
    name = "t" + std::to_string(s);
    if (frame.chart.index(name) < 0) break;
  }
  out.chart.coords.push_back(name);
  out.chart.periodic.push_back(true);
  out.chart.box.emplace_back(0.0, 2 * std::numbers::pi);
  const int D = d + 1;
  Expr t = Expr::var(d);
  std::vector<Expr> y1(D), y2(D);
  y1[d] = Expr(1);
  for (int a = 0; a < d; ++a)
    y2[a] = Expr::cos(t) * frame.fields[0][a] + Expr::sin(t) * frame.fields[1][a];
  std::vector<std::vector<Expr>> fields{y1, y2};
  std::vector<int> growth{2};
  auto pts = sample_grid(out.chart, samples_per_dim);
  std::vector<ExprProgram> progs;
  auto rank_at = [&](const std::vector<std::vector<Expr>>& fs, const std::vector<double>& q) {
    Eigen::MatrixXd m(D, fs.size());
    for (std::size_t i = 0; i < fs.size(); ++i)
      for (int a = 0; a < D; ++a) m(a, i) = fs[i][a].eval(q);
    return numeric_rank(m, 1e-8);
  };
  std::vector<int> prev_level{0, 1};
  while (static_cast<int>(fields.size()) < D) {
    std::vector<int> added;
    for (int h = 0; h < 2; ++h)
      for (int p : prev_level) {
        if (static_cast<int>(fields.size()) == D) break;
        auto cand = lie_bracket(fields[h], fields[p]);
        auto trial = fields;
        trial.push_back(cand);
        bool increases = true;
        for (const auto& q : pts)
          if (rank_at(trial, q) != static_cast<int>(trial.size())) {
            increases = false;
            break;
          }
        if (increases) {
          fields.push_back(std::move(cand));
          added.push_back(static_cast<int>(fields.size()) - 1);
        }
      }
    if (added.empty())
      throw RankDrop("prolonged frame stops growing at dimension " + std::to_string(fields.size()) +
                     " of " + std::to_string(D));
    growth.push_back(static_cast<int>(fields.size()));
    prev_level = added;
  }
  out.fields = std::move(fields);
  out.growth = std::move(growth);
  return out;
}

LevyKernel levy_kernel(const FrameField& frame, const StructureField& sf, std::span<const double> q,
                       double tol) {
  const int n = frame.n();
  if (frame.growth.size() < 2 || frame.growth[0] != 2 || frame.growth[1] != 3 || n < 4)
    throw MalformedSpec("Levy form needs growth of the form (2, 3, ...)");
  std::vector<double> c = sf.constants(q);
  Eigen::MatrixXd m(3 * (n - 3), 3);
  for (int a = 0; a < 3; ++a)
    for (int k = 3; k < n; ++k)
      for (int b = 0; b < 3; ++b) m(a * (n - 3) + (k - 3), b) = c[(a * n + b) * n + k];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double scale = std::max(1.0, s(0));
  int nullity = 0;
  for (int i = 0; i < 3; ++i)
    if (i >= s.size() || s(i) <= tol * scale) ++nullity;
  if (nullity != 1)
    throw KernelNotOneDimensional("Levy form kernel has dimension " + std::to_string(nullity) +
                                  " at " + point_string(q));
  Eigen::Vector3d v = svd.matrixV().col(2);
  int big = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(v(i)) > std::abs(v(big))) big = i;
  if (v(big) < 0) v = -v;
  LevyKernel out;
  out.direction = {v(0), v(1), v(2)};
  out.in_distribution = std::abs(v(2)) <= 1e-9;
  return out;
}

FrameAnalysis analyze_frame(const FrameField& frame, int samples_per_dim, double tol) {
  StructureField sf(frame);
  auto points = sample_grid(frame.chart, samples_per_dim);
  auto report = adapted_growth(frame, sf, points, tol);
  GradedLieAlgebra alg = nilpotentization(frame, report);
  ExtendedMetric metric = extend_metric(alg);
  SymmetryAlgebra sym = symmetry_algebra(alg, metric);
  return FrameAnalysis{frame,           sf,  std::move(points), std::move(report),
                       std::move(alg), std::move(metric), std::move(sym)};
}

}  // namespace srdev
