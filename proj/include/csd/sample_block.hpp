#pragma once

#include "csd/spectral.hpp"

namespace csd {

/// Nb snapshots of compressive measurements, one column per snapshot.
/// zs holds the M1 max-energy channels, zo the M2 min-energy channels
/// (zero rows for known-variance designs).
struct SampleBlock {
    Matrix zs;
    Matrix zo;

    int nb() const { return static_cast<int>(zs.cols()); }
    int m1() const { return static_cast<int>(zs.rows()); }
    int m2() const { return static_cast<int>(zo.rows()); }
};

}  // namespace csd
