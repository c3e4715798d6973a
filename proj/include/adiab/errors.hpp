#pragma once

#include <stdexcept>
#include <string>

namespace adiab {

// Root of everything the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class NearSingular : public Error {
 public:
  NearSingular(const std::string& what, double gap_estimate)
      : Error(what), gap_estimate(gap_estimate) {}
  double gap_estimate;
};

class UnknownExample : public Error {
 public:
  using Error::Error;
};

class GapViolation : public Error {
 public:
  GapViolation(const std::string& what, double t) : Error(what), t(t) {}
  double t;
};

class QuadratureFailure : public Error {
 public:
  QuadratureFailure(const std::string& what, int nodes, double residual)
      : Error(what), nodes(nodes), residual(residual) {}
  int nodes;
  double residual;
};

class NoWeakAssociation : public Error {
 public:
  using Error::Error;
};

class RayHitsSpectrum : public Error {
 public:
  RayHitsSpectrum(const std::string& what, double t, double delta)
      : Error(what), t(t), delta(delta) {}
  double t, delta;
};

class StiffnessFailure : public Error {
 public:
  StiffnessFailure(const std::string& what, double t, double h)
      : Error(what), t(t), h(h) {}
  double t, h;
};

class Divergence : public Error {
 public:
  Divergence(const std::string& what, double t) : Error(what), t(t) {}
  double t;
};

class AdiabaticityViolation : public Error {
 public:
  AdiabaticityViolation(const std::string& what, double residual)
      : Error(what), residual(residual) {}
  double residual;
};

class KernelInclusionViolation : public Error {
 public:
  KernelInclusionViolation(const std::string& what, double t, double residual)
      : Error(what), t(t), residual(residual) {}
  double t, residual;
};

class IterationBreakdown : public Error {
 public:
  IterationBreakdown(const std::string& what, int level, double t)
      : Error(what), level(level), t(t) {}
  int level;
  double t;
};

class FitRejected : public Error {
 public:
  using Error::Error;
};

}  // namespace adiab
