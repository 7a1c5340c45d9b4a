#pragma once

#include <stdexcept>
#include <string>

namespace incompat {

/// Base of every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A measurement was attempted on a configuration with no items.
struct EmptyPool : Error {
  using Error::Error;
};

struct UnknownVariable : Error {
  using Error::Error;
};

struct UnknownValue : Error {
  using Error::Error;
};

/// Conditioning on an event sequence of probability zero.
struct ZeroCondition : Error {
  using Error::Error;
};

/// A measurement system (or one of its parts) violates an invariant.
struct ValidationError : Error {
  using Error::Error;
};

/// A system document does not match the schema. `path()` is a JSON pointer
/// to the offending node.
class SpecError : public Error {
 public:
  SpecError(std::string path, const std::string& message)
      : Error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Fine events passed to an interference computation are not the block of
/// the coarse event.
struct BlockMismatch : Error {
  using Error::Error;
};

/// A deck update was requested without naming which item was drawn.
struct AmbiguousDraw : Error {
  using Error::Error;
};

struct RankDeficient : Error {
  using Error::Error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

struct ShapeMismatch : Error {
  using Error::Error;
};

}  // namespace incompat
