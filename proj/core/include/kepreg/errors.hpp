#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace kepreg {

// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define KEPREG_DEFINE_ERROR(Name)                                  \
  class Name : public Error {                                      \
   public:                                                         \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
  };

KEPREG_DEFINE_ERROR(CollisionProximity)
KEPREG_DEFINE_ERROR(OutsideDomain)
KEPREG_DEFINE_ERROR(HyperbolicOrParabolic)
KEPREG_DEFINE_ERROR(RectilinearOrbit)
KEPREG_DEFINE_ERROR(CollisionPoint)
KEPREG_DEFINE_ERROR(OriginPoint)
KEPREG_DEFINE_ERROR(NorthPole)
KEPREG_DEFINE_ERROR(NonpositiveTau)
KEPREG_DEFINE_ERROR(ConstraintDrift)
KEPREG_DEFINE_ERROR(DegenerateAction)
KEPREG_DEFINE_ERROR(CircularOrbit)
KEPREG_DEFINE_ERROR(RetrogradeCircular)
KEPREG_DEFINE_ERROR(AxisPole)
KEPREG_DEFINE_ERROR(TangentialCrossing)
KEPREG_DEFINE_ERROR(IntegrationFailure)
KEPREG_DEFINE_ERROR(DomainExit)
KEPREG_DEFINE_ERROR(LeftLocalization)
KEPREG_DEFINE_ERROR(OpenLoop)
KEPREG_DEFINE_ERROR(RankAmbiguous)
KEPREG_DEFINE_ERROR(ChartExit)
KEPREG_DEFINE_ERROR(ConfigError)
KEPREG_DEFINE_ERROR(InvalidArgument)

#undef KEPREG_DEFINE_ERROR

// Newton failure. Carries the best iterate found and the residual history so
// callers can inspect how far the solve got.
class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, std::vector<double> best_iterate = {},
                std::vector<double> residual_history = {})
      : Error("NoConvergence: " + what),
        best_iterate(std::move(best_iterate)),
        residual_history(std::move(residual_history)) {}
  std::vector<double> best_iterate;
  std::vector<double> residual_history;
};

class ContinuationStuck : public Error {
 public:
  ContinuationStuck(const std::string& what, double last_good_epsilon)
      : Error("ContinuationStuck: " + what), last_good_epsilon(last_good_epsilon) {}
  double last_good_epsilon;
};

// A localization band was left; records the first offending sample.
class BandViolation : public Error {
 public:
  BandViolation(const std::string& what, std::size_t sample, double s)
      : Error("BandViolation: " + what), sample(sample), s(s) {}
  std::size_t sample;
  double s;
};

}  // namespace kepreg
