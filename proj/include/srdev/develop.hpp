#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "srdev/algebra.hpp"
#include "srdev/manifold.hpp"

namespace srdev {

enum class Scheme { Heun, Euler };

struct SDEConfig {
  double dt = 1e-3;
  double T = 1.0;
  std::uint64_t seed = 1;
  Scheme scheme = Scheme::Heun;
  bool projection = true;  ///< polar projection of the frame rotation
  int threads = 1;

  /// Throws MalformedSpec unless dt > 0 and T >= dt.
  void validate() const;
  /// floor(T/dt), tolerant to rounding of exact multiples.
  long steps() const;
};

/// Standard normal increments keyed by (seed, path, step, lane); the value
/// does not depend on evaluation order.
void gaussian_increments(std::uint64_t seed, std::uint64_t path, std::uint64_t step, double* out,
                         int count);

/// Group law of the Carnot group in exponential coordinates (truncated BCH).
/// Throws StepTooLarge above step 4.
std::vector<double> bch(const GradedLieAlgebra& alg, std::span<const double> x,
                        std::span<const double> y);
/// d/dt bch(x, t e) at t = 0.
std::vector<double> left_invariant_field(const GradedLieAlgebra& alg, std::span<const double> x,
                                         std::span<const double> e);

/// Stratonovich system dy = b(y) dt + sum_k g_k(y) o dW^k.
class Diffusion {
public:
  virtual ~Diffusion() = default;
  virtual int state_dim() const = 0;
  /// Leading state coordinates that are reported (chart or group point).
  virtual int observed_dim() const = 0;
  virtual int noise_dim() const = 0;
  virtual std::vector<double> initial() const = 0;

  struct Scratch {
    virtual ~Scratch() = default;
  };
  virtual std::unique_ptr<Scratch> scratch() const = 0;
  /// b has state_dim entries, g is noise_dim x state_dim row-major.
  virtual void coefficients(const double* y, double* b, double* g, Scratch& s) const = 0;
  virtual void project(double*) const {}
  virtual bool inside(const double*) const { return true; }
};

std::unique_ptr<Diffusion> carnot_lift(const GradedLieAlgebra& alg);
/// State (q, h) with h the k1 x k1 rotation, row-major. Drift-free; noise k
/// moves q along sum_i h_ki X_i and h by sum_alpha (sum_i h_ki Gamma^alpha_i) h A_alpha.
std::unique_ptr<Diffusion> developed_diffusion(const FrameField& frame, const ChristoffelField& gamma,
                                               std::vector<double> q0, std::vector<double> h0,
                                               bool projection = true);
/// dq = sum_i X_i o db^i + (1/2) sum_i d_i X_i dt with the Popp drift d.
std::unique_ptr<Diffusion> popp_diffusion(const FrameField& frame, const StructureField& sf,
                                          std::vector<double> q0);

struct Path {
  std::vector<double> t;
  std::vector<std::vector<double>> q;  ///< observed coordinates per grid point
  std::vector<std::vector<double>> h;  ///< rotation per grid point (developments only)
  bool left_chart = false;
};

/// One trajectory on the uniform grid with floor(T/dt) + 1 points.
Path simulate_path(const Diffusion& proc, const SDEConfig& cfg, std::uint64_t path_index);

Path simulate_carnot_lift(const GradedLieAlgebra& alg, const SDEConfig& cfg,
                          std::uint64_t path_index);
Path develop_sde(const FrameField& frame, const ChristoffelField& gamma, std::vector<double> q0,
                 std::vector<double> h0, const SDEConfig& cfg, std::uint64_t path_index);
Path simulate_popp(const FrameField& frame, const StructureField& sf, std::vector<double> q0,
                   const SDEConfig& cfg, std::uint64_t path_index);

/// Deterministic development along a control u(t) (k1 expressions in t) by
/// classical RK4, with polar projection of h after each step if requested.
Path develop_curve(const FrameField& frame, const ChristoffelField& gamma,
                   const std::vector<Expr>& u, std::vector<double> q0, std::vector<double> h0,
                   double dt, double T, bool projection = true);

/// Observed coordinates of many independent paths at selected times.
struct Ensemble {
  std::size_t paths = 0;
  int dim = 0;
  std::vector<double> times;
  std::vector<double> values;  ///< [(r * paths + p) * dim + c]
  std::size_t left_chart = 0;

  double at(std::size_t r, std::size_t p, int c) const { return values[(r * paths + p) * dim + c]; }
};

/// Paths 0..paths-1 of the seeded stream, split over cfg.threads workers in
/// fixed blocks; the result is identical for any thread count. Times are
/// rounded to the grid. Throws NonFinite if a state blows up.
Ensemble simulate_ensemble(const Diffusion& proc, const SDEConfig& cfg, std::size_t paths,
                           const std::vector<double>& times);

/// Nearest orthogonal matrix (polar factor) of a k x k row-major matrix.
void polar_project(double* h, int k);

}  // namespace srdev
