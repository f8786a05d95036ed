#pragma once

// Periodic spectral tools on a uniform grid t_l = 2*pi*l/M, l = 0..M-1.

#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "coolshape/errors.hpp"

namespace coolshape::fourier {

using Eigen::Index;
using Eigen::VectorXcd;
using Eigen::VectorXd;

inline VectorXcd forward(const VectorXd& values) {
  Eigen::FFT<double> fft;
  VectorXcd out;
  fft.fwd(out, values);
  return out;
}

inline VectorXd inverse(const VectorXcd& coeffs) {
  Eigen::FFT<double> fft;
  VectorXd out;
  fft.inv(out, coeffs);
  return out;
}

/// Signed wavenumber of FFT slot k for an M-point transform.
inline double wavenumber(Index k, Index M) {
  return static_cast<double>(k <= M / 2 ? k : k - M);
}

/// d^order/dt^order of the trigonometric interpolant, sampled at the nodes.
/// The Nyquist mode is dropped for odd orders (its derivative vanishes at the
/// nodes) and kept for even orders.
inline VectorXd derivative(const VectorXd& values, int order) {
  const Index M = values.size();
  if (M % 2 != 0) throw ArgumentError("fourier::derivative: even sample count required");
  VectorXcd c = forward(values);
  const std::complex<double> I(0.0, 1.0);
  for (Index k = 0; k < M; ++k) {
    const double m = wavenumber(k, M);
    if (k == M / 2 && order % 2 == 1) {
      c[k] = 0.0;
      continue;
    }
    std::complex<double> factor(1.0, 0.0);
    for (int o = 0; o < order; ++o) factor *= I * m;
    c[k] *= factor;
  }
  return inverse(c);
}

/// Samples of the trigonometric interpolant on a finer uniform grid of Mf
/// points (Mf a multiple of M). The Nyquist mode is split evenly.
inline VectorXd upsample(const VectorXd& values, Index Mf) {
  const Index M = values.size();
  if (M % 2 != 0 || Mf < M || Mf % M != 0) throw ArgumentError("fourier::upsample: Mf must be a multiple of even M");
  if (Mf == M) return values;
  const VectorXcd c = forward(values);
  VectorXcd cf = VectorXcd::Zero(Mf);
  for (Index k = 0; k < M / 2; ++k) cf[k] = c[k];
  for (Index k = 1; k < M / 2; ++k) cf[Mf - k] = c[M - k];
  cf[M / 2] = 0.5 * c[M / 2];
  cf[Mf - M / 2] = 0.5 * c[M / 2];
  const double scale = static_cast<double>(Mf) / static_cast<double>(M);
  return inverse(cf) * scale;
}

/// Coefficients of a real trigonometric interpolant, for evaluation off-grid.
struct TrigSeries {
  VectorXcd coeffs;  // raw FFT of the samples
  Index M = 0;

  explicit TrigSeries(const VectorXd& samples) : coeffs(forward(samples)), M(samples.size()) {
    if (M % 2 != 0 || M < 2) throw ArgumentError("TrigSeries: even sample count >= 2 required");
  }

  /// p(t) for order 0, p'(t) for order 1, p''(t) for order 2.
  double eval(double t, int order = 0) const {
    const Index half = M / 2;
    double acc = 0.0;
    if (order == 0) acc = coeffs[0].real();
    // e^{ikt} by rotation, re-anchored every few steps to bound drift
    const std::complex<double> step(std::cos(t), std::sin(t));
    std::complex<double> e = step;
    for (Index k = 1; k < half; ++k) {
      const double kk = static_cast<double>(k);
      if (k % 16 == 0) e = {std::cos(kk * t), std::sin(kk * t)};
      std::complex<double> term = coeffs[k] * e;
      if (order == 1) term *= std::complex<double>(0.0, kk);
      if (order == 2) term *= -kk * kk;
      acc += 2.0 * term.real();
      e *= step;
    }
    const double h = static_cast<double>(half);
    const double a = coeffs[half].real();
    if (order == 0) acc += a * std::cos(h * t);
    if (order == 1) acc += -a * h * std::sin(h * t);
    if (order == 2) acc += -a * h * h * std::cos(h * t);
    return acc / static_cast<double>(M);
  }

  /// Integral of the interpolant from 0 to t.
  double integral(double t) const {
    const Index half = M / 2;
    double acc = coeffs[0].real() * t;
    for (Index k = 1; k < half; ++k) {
      const double kk = static_cast<double>(k);
      // integral of 2 Re(c e^{ikt}) = 2 Re(c (e^{ikt} - 1) / (ik))
      const std::complex<double> e(std::cos(kk * t) - 1.0, std::sin(kk * t));
      acc += 2.0 * (coeffs[k] * e / std::complex<double>(0.0, kk)).real();
    }
    const double h = static_cast<double>(half);
    acc += coeffs[half].real() * std::sin(h * t) / h;
    return acc / static_cast<double>(M);
  }

  double mean() const { return coeffs[0].real() / static_cast<double>(M); }
};

}  // namespace coolshape::fourier
