#include "kflow/error.hpp"

#include <cmath>
#include <sstream>

namespace kflow {

namespace {

std::string with_location(const std::string& what, std::size_t node, double time) {
  std::ostringstream os;
  os << what << " (node " << node;
  if (!std::isnan(time)) os << ", t = " << time;
  os << ")";
  return os.str();
}

}  // namespace

DegenerateMetricError::DegenerateMetricError(const std::string& what, std::size_t node,
                                             double eigenvalue, double time)
    : Error(with_location(what + ": smallest eigenvalue " + std::to_string(eigenvalue), node,
                          time)),
      node_(node),
      eigenvalue_(eigenvalue),
      time_(time) {}

NumericBlowupError::NumericBlowupError(const std::string& what, std::size_t node, double time)
    : Error(with_location(what, node, time)), node_(node), time_(time) {}

CompatibilityError::CompatibilityError(const std::string& residual_name, double residual)
    : Error("form is not ddbar-exact: " + residual_name + " = " + std::to_string(residual)),
      name_(residual_name),
      residual_(residual) {}

}  // namespace kflow
