#pragma once

// Independent reference computations used only by tests. None of these call
// into the FFT, the correlation routine or the eigen solver under test.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "chpca/random.hpp"
#include "chpca/types.hpp"

namespace oracle {

using cplx = std::complex<double>;

inline std::vector<cplx> direct_dft(const std::vector<cplx>& x, int sign) {
  const std::size_t n = x.size();
  std::vector<cplx> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    cplx acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>((k * t) % n) / static_cast<double>(n);
      acc += x[t] * std::polar(1.0, angle);
    }
    out[k] = acc;
  }
  return out;
}

/// Hilbert transform by an O(T^2) DFT: -i on positive bins, +i on negative bins.
inline std::vector<double> hilbert_dft(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<cplx> z(x.begin(), x.end());
  auto X = direct_dft(z, -1);
  for (std::size_t k = 0; k < n; ++k) {
    if (k == 0 || (n % 2 == 0 && k == n / 2))
      X[k] = 0.0;
    else if (2 * k < n)
      X[k] *= cplx(0.0, -1.0);
    else
      X[k] *= cplx(0.0, 1.0);
  }
  const auto y = direct_dft(X, +1);
  std::vector<double> out(n);
  for (std::size_t t = 0; t < n; ++t) out[t] = y[t].real() / static_cast<double>(n);
  return out;
}

/// (1/T) sum_t z_a(t) conj(z_b(t)), normalized by sqrt(M_aa M_bb).
inline Eigen::MatrixXcd correlation_triple_loop(const chpca::ComplexMatrix& w) {
  const auto C = w.rows(), T = w.cols();
  Eigen::MatrixXcd raw(C, C);
  for (Eigen::Index a = 0; a < C; ++a)
    for (Eigen::Index b = 0; b < C; ++b) {
      cplx acc = 0.0;
      for (Eigen::Index t = 0; t < T; ++t) acc += w(a, t) * std::conj(w(b, t));
      raw(a, b) = acc / static_cast<double>(T);
    }
  Eigen::MatrixXcd out(C, C);
  for (Eigen::Index a = 0; a < C; ++a)
    for (Eigen::Index b = 0; b < C; ++b)
      out(a, b) = raw(a, b) / std::sqrt(raw(a, a).real() * raw(b, b).real());
  return out;
}

inline Eigen::MatrixXcd reconstruct(const Eigen::VectorXd& values, const Eigen::MatrixXcd& vectors) {
  const auto n = vectors.rows();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index j = 0; j < values.size(); ++j)
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = 0; b < n; ++b) out(a, b) += values(j) * vectors(a, j) * std::conj(vectors(b, j));
  return out;
}

/// Random Hermitian positive semidefinite matrix B B* with unit-ish scale.
inline Eigen::MatrixXcd random_hermitian_psd(int n, chpca::RandomStream& rng) {
  Eigen::MatrixXcd b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) b(i, j) = {rng.normal(), rng.normal()};
  Eigen::MatrixXcd m = b * b.adjoint() / static_cast<double>(n);
  for (int i = 0; i < n; ++i) {
    m(i, i) = m(i, i).real();
    for (int j = i + 1; j < n; ++j) m(j, i) = std::conj(m(i, j));
  }
  return m;
}

/// |sum_t y_t e^{-i 2 pi f t}|^2 after removing the least-squares line.
inline double power_at(const std::vector<double>& x, double freq) {
  const double n = static_cast<double>(x.size());
  double st = 0, sx = 0, stt = 0, stx = 0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    st += t;
    sx += x[t];
    stt += double(t) * t;
    stx += t * x[t];
  }
  const double slope = (n * stx - st * sx) / (n * stt - st * st);
  const double icpt = (sx - slope * st) / n;
  cplx acc = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t)
    acc += (x[t] - icpt - slope * t) * std::polar(1.0, -2.0 * std::numbers::pi * freq * t);
  return std::norm(acc);
}

inline double circular_autocorrelation(const std::vector<double>& x, std::size_t lag) {
  double acc = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) acc += x[t] * x[(t + lag) % x.size()];
  return acc / static_cast<double>(x.size());
}

}  // namespace oracle
