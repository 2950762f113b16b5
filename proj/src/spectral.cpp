#include "lbsolve/spectral.hpp"

#include <cmath>

#include <unsupported/Eigen/FFT>

namespace lbs {

std::vector<Complex> dft(std::span<const Complex> x) {
  Eigen::FFT<double> fft;
  std::vector<Complex> in(x.begin(), x.end()), out;
  fft.fwd(out, in);
  return out;
}

std::vector<Complex> idft(std::span<const Complex> x) {
  Eigen::FFT<double> fft;
  std::vector<Complex> in(x.begin(), x.end()), out;
  fft.inv(out, in);
  return out;
}

std::vector<Complex> spectral_derivative(std::span<const Complex> x, int order) {
  const std::size_t n = x.size();
  auto c = dft(x);
  for (std::size_t j = 0; j < n; ++j) {
    const long k = wavenumber(j, n);
    if (n % 2 == 0 && j == n / 2 && order % 2 == 1) {
      c[j] = 0.0;
      continue;
    }
    c[j] *= std::pow(Complex(0.0, static_cast<double>(k)), order);
  }
  return idft(c);
}

std::vector<Complex> trig_shift(std::span<const Complex> x, double delta) {
  const std::size_t n = x.size();
  auto c = dft(x);
  for (std::size_t j = 0; j < n; ++j) {
    if (n % 2 == 0 && j == n / 2) {
      // split Nyquist mode symmetrically so real data stays real
      c[j] *= std::cos(static_cast<double>(n / 2) * delta);
      continue;
    }
    c[j] *= std::polar(1.0, static_cast<double>(wavenumber(j, n)) * delta);
  }
  return idft(c);
}

std::vector<double> trig_shift(std::span<const double> x, double delta) {
  std::vector<Complex> z(x.begin(), x.end());
  auto s = trig_shift(std::span<const Complex>(z), delta);
  std::vector<double> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = s[i].real();
  return out;
}

Complex trig_eval(std::span<const Complex> x, double alpha) {
  return trig_shift(x, alpha)[0];
}

}  // namespace lbs
