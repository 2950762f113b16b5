#include <doctest.h>

#include <cmath>

#include "lbsolve/spectral.hpp"

using namespace lbs;

namespace {

std::vector<Complex> sample(std::size_t n, double shift = 0.0) {
  std::vector<Complex> x(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = kTwoPi * static_cast<double>(j) / static_cast<double>(n) + shift;
    x[j] = std::exp(Complex(std::cos(t), 0.5 * std::sin(2 * t)));
  }
  return x;
}

}  // namespace

TEST_CASE("dft round trip") {
  const auto x = sample(24);
  const auto y = idft(dft(x));
  for (std::size_t j = 0; j < x.size(); ++j) CHECK(std::abs(x[j] - y[j]) < 1e-14);
  CHECK(wavenumber(3, 8) == 3);
  CHECK(wavenumber(4, 8) == 4);
  CHECK(wavenumber(5, 8) == -3);
}

TEST_CASE("spectral derivative of a smooth periodic function") {
  const std::size_t n = 64;
  const auto x = sample(n);
  const auto d = spectral_derivative(x, 1);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = kTwoPi * static_cast<double>(j) / static_cast<double>(n);
    const Complex exact = x[j] * Complex(-std::sin(t), std::cos(2 * t));
    CHECK(std::abs(d[j] - exact) < 1e-11);
  }
}

TEST_CASE("trig_shift interpolates") {
  const std::size_t n = 64;
  const double delta = 0.037;
  const auto s = trig_shift(sample(n), delta);
  const auto exact = sample(n, delta);
  for (std::size_t j = 0; j < n; ++j) CHECK(std::abs(s[j] - exact[j]) < 1e-12);
  CHECK(std::abs(trig_eval(sample(n), 1.234) - sample(1, 1.234)[0]) < 1e-12);
}
