#pragma once

#include <stdexcept>
#include <string>

namespace effdyn {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Invalid user-supplied configuration: bad dimensions, missing callbacks,
// unparseable or inconsistent config files.
class ConfigError : public Error {
public:
  using Error::Error;
};

// A callback produced a non-finite value where a finite one was required.
class EvaluationError : public Error {
public:
  using Error::Error;
};

// Phi (or another matrix that must be SPD) lost rank at an evaluation point.
class DegenerateCoordinateError : public Error {
public:
  using Error::Error;
};

class DivergenceError : public Error {
public:
  DivergenceError(const std::string& what, long replica, long step)
      : Error(what), replica(replica), step(step) {}
  long replica = -1;
  long step = -1;
};

class ProjectionError : public Error {
public:
  ProjectionError(const std::string& what, double residual)
      : Error(what), residual(residual) {}
  double residual = 0.0;
};

class EstimationError : public Error {
public:
  using Error::Error;
};

class OracleError : public Error {
public:
  OracleError(const std::string& what, double achieved_tol)
      : Error(what), achieved_tol(achieved_tol) {}
  double achieved_tol = 0.0;
};

class UnsupportedGeometryError : public Error {
public:
  using Error::Error;
};

class NumericError : public Error {
public:
  using Error::Error;
};

// A bound query is missing required extras or mixes incompatible fields.
class QueryError : public Error {
public:
  using Error::Error;
};

// The dissipative bound was requested in the wrong parameter regime.
class RegimeError : public Error {
public:
  using Error::Error;
};

}  // namespace effdyn
