#ifndef PEDSPAWN_ERROR_HPP
#define PEDSPAWN_ERROR_HPP

#include <stdexcept>
#include <string>

namespace pedspawn {

/// Malformed or contradictory configuration. Maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Missing, unreadable or inconsistent input/output data. Maps to CLI exit code 2.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pedspawn

#endif  // PEDSPAWN_ERROR_HPP
