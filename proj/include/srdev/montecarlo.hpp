#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "srdev/develop.hpp"

namespace srdev {

struct MCEstimate {
  double mean = 0;
  double std_error = 0;  ///< sample standard deviation / sqrt(paths)
  std::size_t paths = 0;
  double dt = 0;
  double t = 0;
};

/// Mean of f over the paths of an ensemble at sample index r; f reads the
/// observed coordinates. Throws NonFinite on a non-finite sample.
MCEstimate estimate(const Ensemble& e, std::size_t r, const Expr& f, double dt);

/// E f(y_t) over `paths` paths. Throws MalformedSpec if paths < 2.
MCEstimate estimate_expectation(const Diffusion& proc, const Expr& f, double t,
                                const SDEConfig& cfg, std::size_t paths);

struct GeneratorReport {
  std::string structure_id;
  std::string function;
  double t = 0, dt = 0;
  std::size_t paths = 0;
  double f0 = 0;
  double mc_value = 0;        ///< (E f(q_t) - f(q0)) / t
  double stderr_value = 0;    ///< stderr of mc_value
  double symbolic_value = 0;  ///< (1/2) Delta f(q0) with the given Gamma
  double popp_value = 0;      ///< (1/2) Delta_P f(q0)
  double bias = 0;            ///< 2 |mc(t) - mc(t/2)|
  double z = 0;
  double mc_half = 0, stderr_half = 0, bias_half = 0;
  bool bias_shrinks = false;
  bool pass = false;       ///< mc agrees with symbolic_value at t and t/2
  bool matches_popp = false;
  std::size_t left_chart = 0;
};

/// Developed process started at (q0, identity); samples the same paths at
/// t, t/2 and t/4.
GeneratorReport generator_test(const FrameField& frame, const ChristoffelField& gamma,
                               const Expr& f, const std::vector<double>& q0, double t,
                               const SDEConfig& cfg, std::size_t paths,
                               const std::string& structure_id = "");
/// Several test functions evaluated on one set of paths.
std::vector<GeneratorReport> generator_tests(const FrameField& frame, const ChristoffelField& gamma,
                                             const std::vector<Expr>& fs,
                                             const std::vector<double>& q0, double t,
                                             const SDEConfig& cfg, std::size_t paths,
                                             const std::string& structure_id = "");

struct EquivalenceReport {
  std::string structure_id;
  double t = 0, dt = 0;
  std::size_t paths = 0;
  std::vector<std::string> moments;  ///< "x", "x^2", ...
  std::vector<double> developed, popp, std_error, z;
  double max_abs_z = 0;
  bool pass = false;
  std::size_t left_chart_developed = 0, left_chart_popp = 0;
};

/// First and second moments of every chart coordinate at time t, developed
/// process (seed cfg.seed) against the Popp diffusion (independent seed).
EquivalenceReport equivalence_test(const FrameField& frame, const StructureField& sf,
                                   const ChristoffelField& gamma, const std::vector<double>& q0,
                                   double t, const SDEConfig& cfg, std::size_t paths,
                                   const std::string& structure_id = "");

/// Seed used for the Popp side of an equivalence test.
std::uint64_t popp_seed(std::uint64_t seed);

nlohmann::json to_json(const MCEstimate& e);
nlohmann::json to_json(const GeneratorReport& r);
nlohmann::json to_json(const EquivalenceReport& r);

}  // namespace srdev
