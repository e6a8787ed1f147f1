#pragma once

#include <stdexcept>
#include <string>

namespace anisoboot {

// Invalid arguments, broken preconditions, out-of-regime formula inputs.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// File or stream failures (snapshots, sweep CSV, metadata).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

}  // namespace detail
}  // namespace anisoboot
