#pragma once

#include <stdexcept>
#include <string>

namespace qmusic {

// Numerical failure (ill-conditioned systems, degenerate pilots, ...).
// Distinct from std::invalid_argument so the CLI can map it to its own
// exit code.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qmusic
