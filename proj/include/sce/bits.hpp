#pragma once

#include <cmath>
#include <limits>

#include "sce/error.hpp"

namespace sce {

// Information quantity in base-2 units. Nonnegative; +inf is a legal value
// (KL support violations) and propagates through arithmetic. Never NaN.
// Rounding noise down to -1e-12 is clamped to zero; anything more negative
// indicates a broken computation and throws.
class Bits {
public:
    Bits() : value_(0.0) {}

    static Bits zero() { return Bits(); }

    static Bits infinity() {
        Bits b;
        b.value_ = std::numeric_limits<double>::infinity();
        return b;
    }

    static Bits from_value(double v) {
        if (std::isnan(v)) fail(Errc::internal, "NaN bit count");
        if (v < 0.0) {
            if (v < -1e-12) fail(Errc::internal, "negative bit count " + std::to_string(v));
            v = 0.0;
        }
        Bits b;
        b.value_ = v;
        return b;
    }

    double value() const { return value_; }
    bool infinite() const { return std::isinf(value_); }

    Bits operator+(const Bits& o) const { return from_value(value_ + o.value_); }

    friend bool operator==(const Bits& a, const Bits& b) { return a.value_ == b.value_; }
    friend bool operator<(const Bits& a, const Bits& b) { return a.value_ < b.value_; }

private:
    double value_;
};

}  // namespace sce
