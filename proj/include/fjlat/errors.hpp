#pragma once

#include <stdexcept>
#include <string>

namespace fjlat {

// Bad argument values (out-of-range parameters, malformed vectors, ...).
class invalid_parameter_error : public std::invalid_argument {
 public:
  explicit invalid_parameter_error(const std::string& what)
      : std::invalid_argument(what) {}
};

// A queueing quantity has no finite value; carries the violated constraint
// (e.g. "lambda >= 1/eta") so sweeps can tell instability from numeric failure.
class instability_error : public std::runtime_error {
 public:
  explicit instability_error(const std::string& constraint)
      : std::runtime_error("unstable: " + constraint), constraint_(constraint) {}
  const std::string& constraint() const { return constraint_; }

 private:
  std::string constraint_;
};

// An approximation left its domain of validity (not a numerical failure).
class approximation_domain_error : public std::runtime_error {
 public:
  explicit approximation_domain_error(const std::string& what)
      : std::runtime_error(what) {}
};

class iteration_limit_error : public std::runtime_error {
 public:
  explicit iteration_limit_error(const std::string& what)
      : std::runtime_error(what) {}
};

class degenerate_model_error : public std::runtime_error {
 public:
  explicit degenerate_model_error(const std::string& what)
      : std::runtime_error(what) {}
};

class degenerate_input_error : public std::runtime_error {
 public:
  explicit degenerate_input_error(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace fjlat
