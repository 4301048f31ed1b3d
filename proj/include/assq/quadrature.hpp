#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <complex>
#include <utility>

namespace assq {

// Adaptive Gauss-Kronrod on a finite interval. Works for real and
// std::complex<double> integrands. tol is relative to the integral's L1 norm;
// asking for less than ~1e-13 only burns refinement depth.
template <class F>
auto integrate(F &&f, double lo, double hi, double tol = 1e-12,
               unsigned max_depth = 12) {
    using boost::math::quadrature::gauss_kronrod;
    double err = 0.0;
    return gauss_kronrod<double, 31>::integrate(std::forward<F>(f), lo, hi,
                                                max_depth, tol, &err);
}

} // namespace assq
