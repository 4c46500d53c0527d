#pragma once

#include <stdexcept>
#include <string>

namespace wsi {

// Base for all numerical failures raised by the library. Callers that run
// iterations attach the step index via `at_step`.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class SingularShift : public Error {
 public:
  explicit SingularShift(const std::string& what) : Error(what) {}
};

class TieBreakUndefined : public Error {
 public:
  explicit TieBreakUndefined(const std::string& what) : Error(what) {}
};

class NotInChart : public Error {
 public:
  explicit NotInChart(const std::string& what) : Error(what) {}
};

class ShiftCollision : public Error {
 public:
  explicit ShiftCollision(const std::string& what) : Error(what) {}
};

class DegenerateSpectrum : public Error {
 public:
  explicit DegenerateSpectrum(const std::string& what) : Error(what) {}
};

class SingularFunctionValue : public Error {
 public:
  explicit SingularFunctionValue(const std::string& what) : Error(what) {}
};

class StepSizeTooLarge : public Error {
 public:
  explicit StepSizeTooLarge(const std::string& what) : Error(what) {}
};

// Boundary of a branch-selection region; carries the iteration step when
// raised inside an orbit.
class OnBoundary : public Error {
 public:
  explicit OnBoundary(const std::string& what, int step = -1)
      : Error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

class ConePoint : public Error {
 public:
  explicit ConePoint(const std::string& what) : Error(what) {}
};

class FlatnessViolated : public Error {
 public:
  explicit FlatnessViolated(const std::string& what) : Error(what) {}
};

class DepthInsufficient : public Error {
 public:
  explicit DepthInsufficient(const std::string& what) : Error(what) {}
};

class PrecisionExhausted : public Error {
 public:
  explicit PrecisionExhausted(const std::string& what) : Error(what) {}
};

class InsufficientTail : public Error {
 public:
  explicit InsufficientTail(const std::string& what) : Error(what) {}
};

}  // namespace wsi
