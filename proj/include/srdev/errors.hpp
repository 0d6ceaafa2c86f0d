#pragma once

#include <stdexcept>
#include <string>

namespace srdev {

/// Base class for every error raised by the library. `kind()` is a stable
/// machine-readable tag used in CLI reports.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

// Input errors: the caller handed us something we cannot interpret.
struct MalformedSpec : Error {
  explicit MalformedSpec(const std::string& w) : Error("MalformedSpec", w) {}
};
struct SyntaxError : Error {
  SyntaxError(const std::string& w, std::size_t pos)
      : Error("SyntaxError", w + " at position " + std::to_string(pos)), position(pos) {}
  std::size_t position;
};
struct UnknownIdentifier : Error {
  UnknownIdentifier(const std::string& name, std::size_t pos)
      : Error("UnknownIdentifier",
              "unknown identifier '" + name + "' at position " + std::to_string(pos)),
        position(pos) {}
  std::size_t position;
};
struct DimensionMismatch : Error {
  explicit DimensionMismatch(const std::string& w) : Error("DimensionMismatch", w) {}
};

// Violations of the graded Lie algebra axioms.
struct JacobiViolation : Error {
  explicit JacobiViolation(const std::string& w) : Error("JacobiViolation", w) {}
};
struct GradingViolation : Error {
  explicit GradingViolation(const std::string& w) : Error("GradingViolation", w) {}
};
struct NotBracketGenerating : Error {
  explicit NotBracketGenerating(const std::string& w) : Error("NotBracketGenerating", w) {}
};
struct SurjectivityFailure : Error {
  explicit SurjectivityFailure(const std::string& w) : Error("SurjectivityFailure", w) {}
};
struct ClosureFailure : Error {
  explicit ClosureFailure(const std::string& w) : Error("ClosureFailure", w) {}
};
/// An identity that holds as a theorem failed to verify; indicates a bug.
struct TheoremCheckFailed : Error {
  explicit TheoremCheckFailed(const std::string& w) : Error("TheoremCheckFailed", w) {}
};

// Geometry on a chart.
struct SingularFrame : Error {
  explicit SingularFrame(const std::string& w) : Error("SingularFrame", w) {}
};
struct RankDrop : Error {
  explicit RankDrop(const std::string& w) : Error("RankDrop", w) {}
};
struct ModelMismatch : Error {
  explicit ModelMismatch(const std::string& w) : Error("ModelMismatch", w) {}
};
struct Inconsistent : Error {
  Inconsistent(const std::string& w, int index) : Error("Inconsistent", w), index(index) {}
  int index;  ///< violating horizontal direction, 0-based
};
struct KernelNotOneDimensional : Error {
  explicit KernelNotOneDimensional(const std::string& w)
      : Error("KernelNotOneDimensional", w) {}
};

// Simulation.
struct StepTooLarge : Error {
  explicit StepTooLarge(const std::string& w) : Error("StepTooLarge", w) {}
};
struct NonFinite : Error {
  explicit NonFinite(const std::string& w) : Error("NonFinite", w) {}
};

}  // namespace srdev
