#pragma once

#include <stdexcept>
#include <string>

namespace finsler {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A field was evaluated outside the set where it is smooth (y = 0, |x| >= 1, ...).
class DomainError : public Error {
public:
  using Error::Error;
};

/// A jet was asked for a derivative beyond its truncation order.
class OrderExceededError : public Error {
public:
  using Error::Error;
};

/// The fundamental tensor failed the positive-definiteness test.
class MetricDegeneracyError : public Error {
public:
  MetricDegeneracyError(const std::string& what, double eigenvalue)
      : Error(what + " (smallest eigenvalue " + std::to_string(eigenvalue) + ")"),
        eigenvalue_(eigenvalue) {}
  double eigenvalue() const noexcept { return eigenvalue_; }

private:
  double eigenvalue_;
};

class DependentInputError : public Error {
public:
  using Error::Error;
};

class DegenerateFlagError : public Error {
public:
  using Error::Error;
};

/// Input frame is not orthonormal; carries the largest Gram-matrix deviation.
class FrameError : public Error {
public:
  FrameError(const std::string& what, double deviation)
      : Error(what + " (max Gram deviation " + std::to_string(deviation) + ")"),
        deviation_(deviation) {}
  double deviation() const noexcept { return deviation_; }

private:
  double deviation_;
};

class DimensionError : public Error {
public:
  using Error::Error;
};

class ImmersionError : public Error {
public:
  using Error::Error;
};

class TangencyError : public Error {
public:
  using Error::Error;
};

class NormalityError : public Error {
public:
  using Error::Error;
};

/// An integrated curve left the kernel domain.
class DomainExitError : public Error {
public:
  DomainExitError(const std::string& what, double time)
      : Error(what + " at t=" + std::to_string(time)), time_(time) {}
  double time() const noexcept { return time_; }

private:
  double time_;
};

/// Malformed metric/immersion/suite document; `field` names the offending entry.
class SpecError : public Error {
public:
  SpecError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

}  // namespace finsler
