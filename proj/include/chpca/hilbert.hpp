#pragma once

// Analytic signals and the complex (Hermitian) correlation matrix.
//
// Sign convention: the analytic signal keeps the non-negative frequencies, so
// cos(wt) -> exp(iwt). If series a leads series b by d days, arg(M_ab) = w*d > 0.

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "chpca/parallel.hpp"
#include "chpca/types.hpp"

namespace chpca {

/// Principal argument in (-pi, pi].
inline double principal_arg(std::complex<double> z) {
  const double a = std::arg(z);
  return a <= -std::numbers::pi ? std::numbers::pi : a;
}

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  return a <= -std::numbers::pi ? a + 2.0 * std::numbers::pi : a;
}

/// w + iH[w] computed with one FFT round trip. Spectrum multiplier: 1 at DC,
/// 2 for 0 < k < T/2, 1 at k = T/2 (T even), 0 above.
inline std::vector<std::complex<double>> analytic_row(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 2) throw Error("analytic signal needs at least two samples");
  for (double x : series)
    if (!std::isfinite(x)) throw Error("analytic signal: non-finite input");

  std::vector<std::complex<double>> time(series.begin(), series.end()), freq;
  Eigen::FFT<double> fft;
  fft.fwd(freq, time);
  const std::size_t half = n / 2;
  for (std::size_t k = 1; k < n; ++k) {
    if (k < half || (k == half && n % 2 == 1))
      freq[k] *= 2.0;
    else if (k > half)
      freq[k] = 0.0;
  }
  fft.inv(time, freq);
  // The real part is the input by construction; keep it exact.
  for (std::size_t t = 0; t < n; ++t) time[t].real(series[t]);
  return time;
}

/// Discrete Hilbert transform: -i on positive bins, +i on negative bins,
/// zero at DC and at the Nyquist bin.
inline std::vector<double> hilbert_transform(std::span<const double> series) {
  const auto z = analytic_row(series);
  std::vector<double> out(z.size());
  for (std::size_t t = 0; t < z.size(); ++t) out[t] = z[t].imag();
  return out;
}

inline AnalyticPanel analytic_signal(const Panel& panel) {
  AnalyticPanel out;
  out.countries = panel.countries;
  out.values.resize(panel.n_series(), panel.n_days());
  parallel_for(static_cast<std::size_t>(panel.n_series()), [&](std::size_t i) {
    const auto c = static_cast<Eigen::Index>(i);
    const auto z = analytic_row({panel.values.row(c).data(), static_cast<std::size_t>(panel.n_days())});
    for (Eigen::Index t = 0; t < panel.n_days(); ++t) out.values(c, t) = z[static_cast<std::size_t>(t)];
  });
  return out;
}

struct CorrelationOptions {
  /// Divide by sqrt(M_aa M_bb) so the diagonal is exactly one.
  bool normalize = true;
};

/// M = (1/T) W W*, optionally normalized to unit diagonal. The result is
/// exactly Hermitian: the lower triangle mirrors the upper.
inline ComplexCorrMatrix complex_correlation(const AnalyticPanel& apanel,
                                             const CorrelationOptions& options = {}) {
  const Eigen::Index C = apanel.values.rows();
  const Eigen::Index T = apanel.values.cols();
  if (C == 0 || T == 0) throw Error("complex_correlation: empty panel");

  ComplexCorrMatrix out;
  out.countries = apanel.countries;
  out.values = apanel.values * apanel.values.adjoint() / static_cast<double>(T);

  Eigen::VectorXd power(C);
  for (Eigen::Index a = 0; a < C; ++a) {
    power(a) = out.values(a, a).real();
    if (!(power(a) > 0.0))
      throw Error("complex_correlation: zero-power series " +
                  (a < static_cast<Eigen::Index>(apanel.countries.size())
                       ? apanel.countries[static_cast<std::size_t>(a)]
                       : std::to_string(a)));
  }
  for (Eigen::Index a = 0; a < C; ++a) {
    out.values(a, a) = options.normalize ? 1.0 : power(a);
    for (Eigen::Index b = a + 1; b < C; ++b) {
      std::complex<double> m = out.values(a, b);
      if (options.normalize) m /= std::sqrt(power(a) * power(b));
      out.values(a, b) = m;
      out.values(b, a) = std::conj(m);
    }
  }
  return out;
}

struct AmplitudePhase {
  double amplitude = 0.0;
  double phase = 0.0;
};

inline AmplitudePhase amplitude_phase(std::complex<double> z) {
  return {std::abs(z), principal_arg(z)};
}

}  // namespace chpca
