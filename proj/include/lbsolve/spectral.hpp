#pragma once

#include <span>
#include <vector>

#include "lbsolve/types.hpp"

namespace lbs {

std::vector<Complex> dft(std::span<const Complex> x);
// Inverse transform including the 1/n factor.
std::vector<Complex> idft(std::span<const Complex> x);

// Signed wavenumber of bin j for length n.
inline long wavenumber(std::size_t j, std::size_t n) {
  return j <= n / 2 ? static_cast<long>(j) : static_cast<long>(j) - static_cast<long>(n);
}

// d^order/dalpha^order of periodic samples; the Nyquist mode is dropped
// for odd orders and kept for even orders.
std::vector<Complex> spectral_derivative(std::span<const Complex> x, int order);

// Trigonometric interpolant of x evaluated at alpha_j + delta.
std::vector<Complex> trig_shift(std::span<const Complex> x, double delta);
std::vector<double> trig_shift(std::span<const double> x, double delta);

// Trigonometric interpolant of x evaluated at a single parameter value.
Complex trig_eval(std::span<const Complex> x, double alpha);

}  // namespace lbs
