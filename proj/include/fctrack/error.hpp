#pragma once

#include <stdexcept>
#include <string>

namespace fctrack {

// Malformed user input: bad files, bad config, invalid values. Maps to CLI exit code 1.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fctrack
