#ifndef LQSPECTRA_ERRORS_HPP
#define LQSPECTRA_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace lqs {

// Precondition / argument violations: bad radii, invalid probability
// vectors, points outside a chart's domain, and so on.
class DomainError : public std::runtime_error {
public:
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// A configured budget (word count, memory) would be exceeded.  Carries the
// deepest level that still fits the budget, when known (-1 otherwise).
class ResourceError : public std::runtime_error {
public:
  ResourceError(const std::string& what, int level_that_fits)
      : std::runtime_error(what), level_that_fits_(level_that_fits) {}
  int level_that_fits() const { return level_that_fits_; }

private:
  int level_that_fits_;
};

// A constructed object failed a structural invariant.  The witness string
// identifies the offending element(s).
class InvariantViolation : public std::runtime_error {
public:
  InvariantViolation(const std::string& what, std::string witness)
      : std::runtime_error(what + " [witness: " + witness + "]"),
        witness_(std::move(witness)) {}
  const std::string& witness() const { return witness_; }

private:
  std::string witness_;
};

// Malformed input file.  Carries the field (or line) that failed.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, std::string field)
      : std::runtime_error(what + " (field: " + field + ")"),
        field_(std::move(field)) {}
  const std::string& field() const { return field_; }

private:
  std::string field_;
};

}  // namespace lqs

#endif
