#pragma once

#include <stdexcept>
#include <string>

namespace csd {

// Shape mismatch between matrices, designs and sample blocks.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A matrix that must have full column rank does not.
class RankError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Decomposition failed to converge, or a probability-zero degenerate event
// (e.g. an all-zero denominator) was observed.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace csd
