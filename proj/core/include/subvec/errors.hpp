#pragma once

#include <stdexcept>
#include <string>

namespace subvec {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad memory access inside the simulated machine (out of bounds, misaligned).
class TrapError : public Error {
public:
  explicit TrapError(const std::string& msg) : Error(msg) {}
};

// Instruction word or instruction field the decoder does not recognize.
class DecodeError : public Error {
public:
  explicit DecodeError(const std::string& msg) : Error(msg) {}
};

// Requested (Na, Nw, E) combination lies outside the overflow-free region.
// The message carries the violated bound so callers can print it verbatim.
class RegionError : public Error {
public:
  explicit RegionError(const std::string& msg) : Error(msg) {}
};

// Malformed run configuration, tensor shape, or key=value file.
class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Fixture file that cannot be read or written.
class IoError : public Error {
public:
  explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace subvec
