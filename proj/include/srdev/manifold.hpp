#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "srdev/algebra.hpp"
#include "srdev/expr.hpp"

namespace srdev {

/// Adapted frame (X_1, ..., X_n) on a chart of dimension n.
struct FrameField {
  Chart chart;
  std::vector<int> growth;
  std::vector<std::vector<Expr>> fields;  ///< fields[i][a]: d/dx^a component of X_{i+1}

  int n() const { return static_cast<int>(fields.size()); }
  int k1() const { return growth.front(); }
  /// Throws MalformedSpec on inconsistent sizes.
  void validate() const;
};

std::vector<Expr> lie_bracket(const std::vector<Expr>& x, const std::vector<Expr>& y);

/// Left-invariant frame of a Carnot group in exponential coordinates of the
/// first kind. Throws StepTooLarge above step 4.
FrameField carnot_frame(const GradedLieAlgebra& alg);

/// Midpoint grid with `per_dim` points per coordinate inside the chart box.
std::vector<std::vector<double>> sample_grid(const Chart& chart, int per_dim);

/// Pointwise structure constants [X_i, X_j] = sum_k c_ij^k X_k, obtained by
/// symbolic brackets and a numeric solve against the frame matrix.
class StructureField {
public:
  explicit StructureField(const FrameField& frame);

  int n() const { return n_; }
  int k1() const { return k1_; }
  int chart_dim() const { return d_; }

  struct Workspace {
    std::vector<double> regs, vals, lu, rhs;
    std::vector<int> perm;
  };
  Workspace workspace() const;

  /// c[(i*n + j)*n + k]. Throws SingularFrame.
  void constants(const double* q, double* c, Workspace& ws) const;
  std::vector<double> constants(std::span<const double> q) const;
  /// Max relative residual of the bracket decomposition at q.
  double residual(std::span<const double> q) const;

  /// Horizontal frame xh[i*d + a] = X_i^a (i < k1) and divergences
  /// div[i] = sum_l c^l_{li}. Throws SingularFrame.
  void horizontal(const double* q, double* xh, double* div, Workspace& ws) const;

private:
  void factor(const double* frame, Workspace& ws) const;
  void solve(Workspace& ws, double* x) const;

  int n_ = 0, k1_ = 0, d_ = 0;
  std::vector<std::pair<int, int>> pairs_;      // all i < j
  std::vector<std::pair<int, int>> hpairs_;     // (l, i) with i < k1, l != i
  ExprProgram all_, hor_;
};

struct EquinilpotencyReport {
  std::vector<int> growth;                   ///< measured at every passing point
  std::vector<std::vector<double>> points;
  std::vector<bool> point_ok;
  std::vector<double> graded_mean;           ///< n^3 layout, only graded entries set
  double max_deviation = 0;
  bool equinilpotent = false;
};

/// Checks filtration ranks and adaptedness at each sample point and whether
/// the graded structure constants are constant. Throws RankDrop on a point
/// where the growth vector differs from the declared one.
EquinilpotencyReport adapted_growth(const FrameField& frame, const StructureField& sf,
                                    const std::vector<std::vector<double>>& points,
                                    double tol = 1e-9);

/// Graded algebra of the averaged graded constants, rounded to rationals.
GradedLieAlgebra nilpotentization(const FrameField& frame, const EquinilpotencyReport& rep);

/// Frame together with its structure constants, nilpotentization and
/// symmetry algebra, computed on a sample grid.
struct FrameAnalysis {
  FrameField frame;
  StructureField sf;
  std::vector<std::vector<double>> points;
  EquinilpotencyReport report;
  GradedLieAlgebra alg;
  ExtendedMetric metric;
  SymmetryAlgebra sym;
};
/// Throws RankDrop, and the algebra errors of the nilpotentization.
FrameAnalysis analyze_frame(const FrameField& frame, int samples_per_dim = 3, double tol = 1e-9);

/// Horizontal derivatives X_i f (i < k1) and sum_i X_i^2 f.
struct HorizontalDerivatives {
  std::vector<Expr> first;
  Expr second;
};
HorizontalDerivatives horizontal_derivatives(const FrameField& frame, const Expr& f);

/// Popp drift coefficients d_i = -sum_l c^l_{il}, i < k1.
std::vector<double> popp_drift(const StructureField& sf, std::span<const double> q);
/// Delta_P f at q = sum_i X_i^2 f + d_i X_i f.
double popp_sublaplacian(const FrameField& frame, const StructureField& sf, const Expr& f,
                         std::span<const double> q);

struct DevelopConditionReport {
  bool feasible = true;
  std::optional<RatVector> witness_direction;  ///< basis vector of ker h, length k1
  std::vector<double> witness_point;
  double witness_value = 0;
  double max_abs = 0;
};

/// For every basis direction v of ker h checks that sum_i v_i sum_l c^l_{li}
/// vanishes on the sample points. Throws ModelMismatch if the frame's
/// nilpotentization differs from alg.
DevelopConditionReport develop_condition(const FrameField& frame, const StructureField& sf,
                                         const GradedLieAlgebra& alg, const SymmetryAlgebra& sym,
                                         const std::vector<std::vector<double>>& points,
                                         double tol = 1e-9);

/// Gamma^alpha_j as the minimum-norm solution of
/// sum_{alpha, j} Gamma^alpha_j (A_alpha)^j_i = sum_l c^l_{li}, i < k1.
class ChristoffelField {
public:
  ChristoffelField(const StructureField& sf, const SymmetryAlgebra& sym, double tol = 1e-9);
  /// Gamma identically equal to `values` (layout alpha*k1 + j).
  static ChristoffelField constant(const StructureField& sf, const SymmetryAlgebra& sym,
                                   std::vector<double> values);

  int dim_h() const { return dim_h_; }
  int k1() const { return k1_; }
  const StructureField& structure() const { return sf_; }
  /// Layer-one blocks, a[alpha*k1*k1 + j*k1 + i] = (A_alpha)_{ji}.
  const std::vector<double>& blocks() const { return blocks_; }

  /// Constant added to every evaluation (for perturbation experiments).
  ChristoffelField with_offset(int alpha, int j, double delta) const;

  /// gamma[alpha*k1 + j]. Throws Inconsistent when solving and the
  /// residual exceeds tol.
  void eval(const double* q, double* gamma, StructureField::Workspace& ws) const;
  std::vector<double> at(std::span<const double> q) const;
  /// Same, from precomputed divergences div[i] = sum_l c^l_{li}.
  void eval_from_divergence(const double* div, double* gamma) const;

  /// drift[i] = sum_{alpha, j} gamma[alpha, j] (A_alpha)_{ji}.
  void drift(const double* gamma, double* out) const;

private:
  explicit ChristoffelField(const StructureField& sf) : sf_(sf) {}
  StructureField sf_;
  int dim_h_ = 0, k1_ = 0;
  bool solved_ = true;
  double tol_ = 1e-9;
  std::vector<double> pinv_;      // (dim_h*k1) x k1
  std::vector<double> bmat_;      // k1 x (dim_h*k1)
  std::vector<double> constant_;  // used when !solved_
  std::vector<double> offset_;
  std::vector<double> blocks_;
};

/// defect_i = sum_{alpha,j} Gamma^alpha_j (A_alpha)^j_i - sum_l c^l_{li}.
std::vector<double> generator_defect(const ChristoffelField& gamma, std::span<const double> q);

/// Delta f at q from the developed-generator formula with the given Gamma.
double developed_generator(const FrameField& frame, const ChristoffelField& gamma, const Expr& f,
                           std::span<const double> q);

struct LeviCivitaReport {
  double max_difference = 0;
  double max_drift = 0;
  int points = 0;
};

/// Riemannian frames only (growth (n)): drift of the developed generator
/// with Levi-Civita Christoffel symbols for so(n) against the Popp drift.
LeviCivitaReport levi_civita_check(const FrameField& frame, const StructureField& sf,
                                   const std::vector<std::vector<double>>& points);

/// Appends an angle coordinate t and returns (Y_1, Y_2) = (d/dt, cos t X_1 +
/// sin t X_2) completed to an adapted frame by iterated brackets.
/// Throws RankDrop when no completion exists on the samples.
FrameField prolong(const FrameField& frame, int samples_per_dim = 3);

struct LevyKernel {
  std::vector<double> direction;  ///< coefficients on X_1, X_2, X_3, unit length
  bool in_distribution = false;
};

/// Kernel of the skew form on span(X_1, X_2, X_3) with values modulo that
/// span. Throws KernelNotOneDimensional.
LevyKernel levy_kernel(const FrameField& frame, const StructureField& sf,
                       std::span<const double> q, double tol = 1e-9);

}  // namespace srdev
