#pragma once

// Synthetic panels with a planted lead-lag structure.
//
// Row c is exp(base + A cos(2 pi f t / T - theta_c) + w cos(2 pi t / 7) + e_c(t) / snr)
// with e_c(t) i.i.d. N(0, 1). A = 1 / (2 sin(pi f / T)) so the carrier's
// day-over-day log ratio has unit amplitude. A row with a larger theta_c
// peaks later, so its eigenvector argument is -theta_c up to a global phase.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "chpca/hilbert.hpp"
#include "chpca/random.hpp"
#include "chpca/types.hpp"

namespace chpca {

struct SynthSpec {
  int n_series = 30;
  int n_days = 365;
  std::vector<double> planted_phases;  // radians, one per series
  int carrier_freq = 16;               // cycles per n_days
  double snr = 10.0;
  std::uint64_t seed = 0;
  double weekly_amp = 0.0;
  double base = std::log(1000.0);

  void validate() const {
    if (n_series < 1) throw Error("synth: n_series must be positive");
    if (n_days < 14) throw Error("synth: n_days must be at least 14");
    if (static_cast<int>(planted_phases.size()) != n_series)
      throw Error("synth: need one planted phase per series");
    if (!(carrier_freq > 0 && 2 * carrier_freq < n_days))
      throw Error("synth: carrier_freq must satisfy 0 < f < T/2");
    if (!(snr > 0.0) || !std::isfinite(snr)) throw Error("synth: snr must be positive and finite");
    if (!(weekly_amp >= 0.0)) throw Error("synth: weekly_amp must be non-negative");
    for (double p : planted_phases)
      if (!(p > -std::numbers::pi && p <= std::numbers::pi))
        throw Error("synth: planted phases must lie in (-pi, pi]");
  }

  double carrier_amplitude() const {
    return 1.0 / (2.0 * std::sin(std::numbers::pi * carrier_freq / n_days));
  }
};

/// Splits n series into contiguous, nearly equal blocks, one per cluster phase.
inline std::vector<double> cluster_phases(int n_series, const std::vector<double>& clusters) {
  if (clusters.empty()) throw Error("synth: at least one cluster phase is required");
  std::vector<double> out;
  const auto k = static_cast<int>(clusters.size());
  for (int c = 0; c < n_series; ++c) out.push_back(clusters[static_cast<std::size_t>(c * k / n_series)]);
  return out;
}

inline Panel generate(const SynthSpec& spec) {
  spec.validate();
  Panel panel;
  const Date start = make_date(2021, 1, 1);
  for (int t = 0; t < spec.n_days; ++t) panel.dates.push_back(start + std::chrono::days{t});
  panel.values.resize(spec.n_series, spec.n_days);
  const double A = spec.carrier_amplitude();
  const double omega = 2.0 * std::numbers::pi * spec.carrier_freq / spec.n_days;
  for (int c = 0; c < spec.n_series; ++c) {
    char name[16];
    std::snprintf(name, sizeof name, "S%03d", c + 1);
    panel.countries.emplace_back(name);
    RandomStream rng(child_seed(spec.seed, static_cast<std::uint64_t>(c)));
    const double theta = spec.planted_phases[static_cast<std::size_t>(c)];
    for (int t = 0; t < spec.n_days; ++t) {
      const double log_level = spec.base + A * std::cos(omega * t - theta) +
                               spec.weekly_amp * std::cos(2.0 * std::numbers::pi * t / 7.0) +
                               rng.normal() / spec.snr;
      panel.values(c, t) = std::exp(log_level);
    }
  }
  return panel;
}

/// min over alpha of mean_c |wrap(arg v_c + theta_c - alpha)|, in radians.
/// The objective is piecewise linear with convex kinks at the residuals, so
/// the minimum is attained at one of them.
inline double recovery_error(const Eigen::VectorXcd& eigenvector, const std::vector<double>& planted) {
  if (static_cast<std::size_t>(eigenvector.size()) != planted.size())
    throw Error("recovery_error: size mismatch");
  std::vector<double> residual(planted.size());
  for (std::size_t c = 0; c < planted.size(); ++c)
    residual[c] = wrap_angle(principal_arg(eigenvector(static_cast<Eigen::Index>(c))) + planted[c]);
  double best = HUGE_VAL;
  for (double alpha : residual) {
    double sum = 0.0;
    for (double r : residual) sum += std::abs(wrap_angle(r - alpha));
    best = std::min(best, sum / static_cast<double>(residual.size()));
  }
  return best;
}

}  // namespace chpca
