#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ssr {

// Invalid argument values (labels out of range, bad lengths, invalid blocks).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

// Tensor extents that do not line up.
class ShapeError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Non-finite values where finite ones are required.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class UnsupportedError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

class StateNotCollapsedError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A size guard or a request that cannot be met. `achievable` carries the best
// count the caller could ask for instead, when that is meaningful.
class RefusalError : public std::runtime_error {
public:
  explicit RefusalError(const std::string& what, std::size_t achievable = 0)
      : std::runtime_error(what), achievable_(achievable) {}
  std::size_t achievable() const noexcept { return achievable_; }

private:
  std::size_t achievable_;
};

class GenerationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace ssr
