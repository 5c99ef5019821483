#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace folioid {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input tables or mismatched dimensions (ids out of range,
/// wrong vector lengths). Distinct from a failed mathematical check.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// An operation was called outside its declared domain.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A construction that must succeed for valid input produced an
/// inconsistent result.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// A partial multiplication was queried on a non-composable pair.
class NotComposable : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// Base-level composability |s(g) - t(h)| exceeded tolerance.
class CompositionError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// Tangent-level composability |Ts v_g - Tt v_h| exceeded tolerance.
class TangentCompositionError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// theta assigns different cosets to two representatives of one coset.
class ThetaNotWellDefined : public Error {
 public:
  using Error::Error;
};

class SamplerError : public Error {
 public:
  using Error::Error;
};

class NumericalBlowup : public Error {
 public:
  using Error::Error;
};

class FlowEscapedBox : public Error {
 public:
  FlowEscapedBox(const std::string& what, std::vector<double> last_state, double time)
      : Error(what), last_state_(std::move(last_state)), time_(time) {}
  const std::vector<double>& last_state() const { return last_state_; }
  double time() const { return time_; }

 private:
  std::vector<double> last_state_;
  double time_;
};

/// Numerical rank of a distribution (or derived bundle) differs from the
/// declared or previously observed rank. This is a hypothesis violation:
/// the scenario does not describe a subbundle.
class RankDrift : public Error {
 public:
  RankDrift(const std::string& what, std::vector<double> location, int expected, int found)
      : Error(what), location_(std::move(location)), expected_(expected), found_(found) {}
  const std::vector<double>& location() const { return location_; }
  int expected() const { return expected_; }
  int found() const { return found_; }

 private:
  std::vector<double> location_;
  int expected_;
  int found_;
};

/// The tangent directions used to pin down a covector fail to span.
class SpanDeficiency : public Error {
 public:
  using Error::Error;
};

class LiftFailed : public Error {
 public:
  LiftFailed(const std::string& what, std::vector<double> location, double residual)
      : Error(what), location_(std::move(location)), residual_(residual) {}
  const std::vector<double>& location() const { return location_; }
  double residual() const { return residual_; }

 private:
  std::vector<double> location_;
  double residual_;
};

class TransportFailed : public Error {
 public:
  using Error::Error;
};

/// The leaf/left-translation compatibility g*([s g] n t^-1(s g)) = [g] n t^-1(t g)
/// failed at a sampled arrow. Carries the witness as serialized JSON text.
class Condition6Violated : public Error {
 public:
  Condition6Violated(const std::string& what, std::string witness_json)
      : Error(what), witness_json_(std::move(witness_json)) {}
  const std::string& witness_json() const { return witness_json_; }

 private:
  std::string witness_json_;
};

class WellDefinednessViolated : public Error {
 public:
  using Error::Error;
};

/// Scenario configuration failed to parse or validate.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace folioid
