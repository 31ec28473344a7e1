#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace relaydiff {

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StructuralError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IntegrationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Interval of admissible threshold values [lo, hi] \subset (0, 1/2).
struct ThresholdDomain {
    double lo;
    double hi;

    ThresholdDomain(double lo_, double hi_) : lo(lo_), hi(hi_) {
        if (!(0.0 < lo && lo < hi && hi < 0.5))
            throw DomainError("ThresholdDomain: need 0 < lo < hi < 1/2");
    }

    double length() const { return hi - lo; }
};

}  // namespace relaydiff
