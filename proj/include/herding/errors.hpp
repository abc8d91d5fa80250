#pragma once

#include <stdexcept>
#include <string>

namespace herding {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A herder sits on top of an evader; the repulsive field is singular there.
class CollisionSingularity : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// A linear system that should be solved is numerically singular.
class SingularSystem : public Error {
 public:
  using Error::Error;
};

class NonSymmetricInput : public Error {
 public:
  using Error::Error;
};

class NotSettled : public Error {
 public:
  using Error::Error;
};

// Scenario document is missing a field or has the wrong type. `field()` is
// the dotted path of the offending entry, e.g. "sim.T".
class SchemaError : public Error {
 public:
  explicit SchemaError(std::string field, const std::string& what = {})
      : Error(what.empty() ? field : field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Scenario value parses but breaks a model invariant (e.g. beta outside (0,1)).
class InvariantViolation : public Error {
 public:
  explicit InvariantViolation(std::string field, const std::string& what = {})
      : Error(what.empty() ? field : field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace herding
