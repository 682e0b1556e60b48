#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace stcpd {

// Precondition violations raise std::invalid_argument. The two classes below
// cover malformed input files and numeric breakdown, so callers (the CLI in
// particular) can map each family to its own exit code.

enum class FormatErrc {
  Io,
  BadMagic,
  UnsupportedVersion,
  DimOverflow,
  Truncated,
  LengthMismatch,
  NonFinite,
  ChecksumMismatch,
  Parse,
  MissingEntry,
  DuplicateEntry,
  UnknownVariable,
  OutOfRange,
};

const char* to_string(FormatErrc code) noexcept;

class FormatError : public std::runtime_error {
 public:
  FormatError(FormatErrc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  FormatErrc code() const noexcept { return code_; }

 private:
  FormatErrc code_;
};

class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what,
                        std::optional<std::size_t> iteration = std::nullopt)
      : std::runtime_error(what), iteration_(iteration) {}

  /// ALS sweep (1-based) at which the failure was detected, if any.
  std::optional<std::size_t> iteration() const noexcept { return iteration_; }

 private:
  std::optional<std::size_t> iteration_;
};

}  // namespace stcpd
