// SPDX-License-Identifier: Apache-2.0

#ifndef ABEM_ERRORS_HPP
#define ABEM_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <utility>

namespace abem
{

// Precondition or contract violation on a library call (bad mesh node, wrong
// space kind, non-nested meshes, ...).
class InvalidArgument : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

// Experiment configuration could not be parsed or is inconsistent. `field()`
// names the offending key.
class ConfigError : public std::runtime_error
{
public:
  ConfigError(std::string field, const std::string &what)
    : std::runtime_error(field + ": " + what), field_(std::move(field))
  {
  }
  const std::string &field() const noexcept { return field_; }

private:
  std::string field_;
};

// Factorization or quadrature failure.
class NumericalError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// Output file or directory could not be written, or input could not be read.
class IoError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

}  // namespace abem

#endif  // ABEM_ERRORS_HPP
