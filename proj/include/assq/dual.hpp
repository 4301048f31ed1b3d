#pragma once

#include <cmath>

namespace assq {

// Forward-mode dual number: value plus first derivative.
struct Dual {
    double v = 0.0;
    double d = 0.0;
};

inline Dual operator+(Dual x, Dual y) { return {x.v + y.v, x.d + y.d}; }
inline Dual operator-(Dual x, Dual y) { return {x.v - y.v, x.d - y.d}; }
inline Dual operator-(Dual x) { return {-x.v, -x.d}; }
inline Dual operator*(Dual x, Dual y) { return {x.v * y.v, x.d * y.v + x.v * y.d}; }
inline Dual operator*(double s, Dual x) { return {s * x.v, s * x.d}; }
inline Dual operator/(Dual x, Dual y) {
    return {x.v / y.v, (x.d * y.v - x.v * y.d) / (y.v * y.v)};
}
inline Dual sqrt(Dual x) {
    double r = std::sqrt(x.v);
    return {r, r > 0.0 ? x.d / (2.0 * r) : 0.0};
}
inline Dual abs(Dual x) { return x.v < 0.0 ? -x : x; }
inline Dual constant(double v) { return {v, 0.0}; }

} // namespace assq
