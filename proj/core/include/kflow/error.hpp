#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kflow {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A field was combined with a grid or field of a different shape.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid argument or unsupported model/dimension combination.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A (1,1) form failed the positivity floor. Carries the worst node and its
/// smallest eigenvalue; `time` is NaN outside of a flow.
class DegenerateMetricError : public Error {
 public:
  DegenerateMetricError(const std::string& what, std::size_t node, double eigenvalue,
                        double time);
  std::size_t node() const { return node_; }
  double eigenvalue() const { return eigenvalue_; }
  double time() const { return time_; }

 private:
  std::size_t node_;
  double eigenvalue_;
  double time_;
};

/// A non-finite value appeared during time stepping.
class NumericBlowupError : public Error {
 public:
  NumericBlowupError(const std::string& what, std::size_t node, double time);
  std::size_t node() const { return node_; }
  double time() const { return time_; }

 private:
  std::size_t node_;
  double time_;
};

/// A form is not d-dbar exact (cohomological or discrete compatibility failure).
class CompatibilityError : public Error {
 public:
  CompatibilityError(const std::string& residual_name, double residual);
  const std::string& residual_name() const { return name_; }
  double residual() const { return residual_; }

 private:
  std::string name_;
  double residual_;
};

/// Bad configuration document or override.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace kflow
