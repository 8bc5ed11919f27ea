#pragma once

// Eigendecomposition of the complex correlation matrix and the rotational
// random shuffling (RRS) null ensemble.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "chpca/hilbert.hpp"
#include "chpca/parallel.hpp"
#include "chpca/random.hpp"
#include "chpca/types.hpp"

namespace chpca {

/// Which ensemble spread is multiplied by the confidence multiplier.
enum class Spread {
  standard_deviation,  // stdev over the surrogates (1/(n-1))
  standard_error,      // stdev / sqrt(n)
};

inline std::string_view spread_name(Spread s) {
  return s == Spread::standard_deviation ? "sd" : "se";
}

inline Spread parse_spread(std::string_view text) {
  if (text == "sd") return Spread::standard_deviation;
  if (text == "se") return Spread::standard_error;
  throw Error("unknown spread '" + std::string(text) + "' (expected sd or se)");
}

struct RrsConfig {
  int n_samples = 20;
  double confidence_multiplier = 2.33;
  std::uint64_t seed = 0;
  Spread spread = Spread::standard_deviation;

  void validate() const {
    if (n_samples < 2) throw Error("RRS needs at least 2 samples");
    if (!(confidence_multiplier > 0.0)) throw Error("confidence multiplier must be positive");
  }
};

/// Per-rank statistics of the surrogate eigenvalues.
struct RrsStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;
  Eigen::VectorXd se;
  RrsConfig config;

  const Eigen::VectorXd& spread() const {
    return config.spread == Spread::standard_deviation ? sd : se;
  }
};

struct Spectrum {
  std::vector<std::string> countries;
  Eigen::VectorXd eigenvalues;   // descending
  Eigen::MatrixXcd eigenvectors;  // column j pairs with eigenvalues(j), phase-fixed
  std::optional<RrsStats> rrs;
  std::vector<bool> significant;

  Eigen::Index size() const { return eigenvalues.size(); }
};

/// Removes the global phase: rotates so that the component sum is real and
/// positive, or, if that sum vanishes, so the largest-amplitude component is.
inline Eigen::VectorXcd fix_phase(const Eigen::VectorXcd& v) {
  if (v.size() == 0 || v.norm() == 0.0) throw Error("fix_phase: zero vector");
  const std::complex<double> sum = v.sum();
  double theta;
  if (std::abs(sum) >= 1e-8) {
    theta = std::arg(sum);
  } else {
    Eigen::Index largest = 0;
    v.cwiseAbs().maxCoeff(&largest);
    theta = std::arg(v(largest));
  }
  Eigen::VectorXcd out = v * std::polar(1.0, -theta);
  if (std::abs(sum) >= 1e-8) {
    // The rotated sum is real up to rounding; pin it.
    const std::complex<double> s = out.sum();
    out *= std::polar(1.0, -std::arg(s));
  }
  return out;
}

inline double hermitian_residual(const Eigen::MatrixXcd& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

/// Full eigensystem, eigenvalues descending, eigenvectors phase-fixed.
/// Equal eigenvalues are ordered by descending component amplitudes compared
/// lexicographically in country order.
inline Spectrum eigendecompose(const ComplexCorrMatrix& matrix) {
  const Eigen::MatrixXcd& m = matrix.values;
  if (m.rows() != m.cols() || m.rows() == 0) throw Error("eigendecompose: matrix must be square and non-empty");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (hermitian_residual(m) > 1e-10 * scale) throw Error("eigendecompose: matrix is not Hermitian");

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m);
  if (solver.info() != Eigen::Success) throw Error("eigendecompose: solver did not converge");
  const Eigen::Index n = m.rows();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::vector<Eigen::VectorXcd> vectors;
  vectors.reserve(order.size());
  for (Eigen::Index j = 0; j < n; ++j) vectors.push_back(fix_phase(solver.eigenvectors().col(j)));
  const Eigen::VectorXd& values = solver.eigenvalues();
  const double tie = 1e-12 * scale;
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (std::abs(values(a) - values(b)) > tie) return values(a) > values(b);
    const auto& va = vectors[static_cast<std::size_t>(a)];
    const auto& vb = vectors[static_cast<std::size_t>(b)];
    for (Eigen::Index c = 0; c < n; ++c) {
      const double x = std::abs(va(c)), y = std::abs(vb(c));
      if (x != y) return x > y;
    }
    return false;
  });

  Spectrum out;
  out.countries = matrix.countries;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index src = order[static_cast<std::size_t>(j)];
    out.eigenvalues(j) = values(src);
    out.eigenvectors.col(j) = vectors[static_cast<std::size_t>(src)];
  }
  return out;
}

/// out[t] = in[(t + tau) mod T].
inline void rotate_row(std::span<const double> in, std::size_t tau, std::span<double> out) {
  const std::size_t n = in.size();
  for (std::size_t t = 0; t < n; ++t) out[t] = in[(t + tau) % n];
}

/// One RRS surrogate: row c is rotated by tau_c drawn from child_seed(seed, c).
inline Panel rrs_sample(const Panel& panel, std::uint64_t seed) {
  Panel out = panel;
  const auto T = static_cast<std::size_t>(panel.n_days());
  for (Eigen::Index c = 0; c < panel.n_series(); ++c) {
    RandomStream rng(child_seed(seed, static_cast<std::uint64_t>(c)));
    rotate_row({panel.values.row(c).data(), T}, rng.uniform_index(T), {out.values.row(c).data(), T});
  }
  return out;
}

namespace detail {

// Descending eigenvalues of a standardized panel, single-threaded.
inline Eigen::VectorXd panel_eigenvalues(const Panel& panel, const CorrelationOptions& options) {
  AnalyticPanel apanel;
  apanel.countries = panel.countries;
  apanel.values.resize(panel.n_series(), panel.n_days());
  for (Eigen::Index c = 0; c < panel.n_series(); ++c) {
    const auto z = analytic_row({panel.values.row(c).data(), static_cast<std::size_t>(panel.n_days())});
    for (Eigen::Index t = 0; t < panel.n_days(); ++t) apanel.values(c, t) = z[static_cast<std::size_t>(t)];
  }
  const auto m = complex_correlation(apanel, options);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m.values, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().reverse();
}

}  // namespace detail

/// Surrogate seed for sample s is child_seed(config.seed, s).
inline RrsStats rrs_ensemble(const Panel& panel, const RrsConfig& config,
                             const CorrelationOptions& options = {}) {
  config.validate();
  const auto n = static_cast<std::size_t>(config.n_samples);
  std::vector<Eigen::VectorXd> samples(n);
  parallel_for(n, [&](std::size_t s) {
    samples[s] = detail::panel_eigenvalues(rrs_sample(panel, child_seed(config.seed, s)), options);
  });

  const Eigen::Index C = panel.n_series();
  RrsStats stats;
  stats.config = config;
  stats.mean = Eigen::VectorXd::Zero(C);
  for (const auto& s : samples) stats.mean += s;
  stats.mean /= static_cast<double>(n);
  stats.sd = Eigen::VectorXd::Zero(C);
  for (const auto& s : samples) stats.sd.array() += (s - stats.mean).array().square();
  stats.sd = (stats.sd / static_cast<double>(n - 1)).cwiseSqrt();
  stats.se = stats.sd / std::sqrt(static_cast<double>(n));
  return stats;
}

/// Flag j is set iff observed_j > mean_j + multiplier * spread_j.
inline std::vector<bool> significance(const Eigen::VectorXd& observed, const Eigen::VectorXd& mean,
                                      const Eigen::VectorXd& spread, double multiplier) {
  if (observed.size() != mean.size() || observed.size() != spread.size())
    throw Error("significance: length mismatch");
  std::vector<bool> flags(static_cast<std::size_t>(observed.size()));
  for (Eigen::Index j = 0; j < observed.size(); ++j)
    flags[static_cast<std::size_t>(j)] = observed(j) > mean(j) + multiplier * spread(j);
  return flags;
}

/// Observed spectrum of a standardized panel together with its RRS ensemble.
inline Spectrum analyze_panel(const Panel& standardized, const RrsConfig& config,
                              const CorrelationOptions& options = {}) {
  config.validate();
  Spectrum spectrum = eigendecompose(complex_correlation(analytic_signal(standardized), options));
  spectrum.rrs = rrs_ensemble(standardized, config, options);
  spectrum.significant = significance(spectrum.eigenvalues, spectrum.rrs->mean,
                                      spectrum.rrs->spread(), config.confidence_multiplier);
  return spectrum;
}

struct ScreeRow {
  int rank = 0;
  double observed = 0.0;
  double rrs_mean = 0.0;
  double error_bar = 0.0;  // multiplier * spread
  double margin = 0.0;     // observed - (rrs_mean + error_bar)
  bool significant = false;
};

inline std::vector<ScreeRow> scree_table(const Spectrum& spectrum) {
  if (!spectrum.rrs) throw Error("scree_table: spectrum has no RRS statistics");
  const auto& rrs = *spectrum.rrs;
  std::vector<ScreeRow> rows;
  for (Eigen::Index j = 0; j < spectrum.size(); ++j) {
    ScreeRow row;
    row.rank = static_cast<int>(j + 1);
    row.observed = spectrum.eigenvalues(j);
    row.rrs_mean = rrs.mean(j);
    row.error_bar = rrs.config.confidence_multiplier * rrs.spread()(j);
    row.margin = row.observed - (row.rrs_mean + row.error_bar);
    row.significant = spectrum.significant.at(static_cast<std::size_t>(j));
    rows.push_back(row);
  }
  return rows;
}

inline int significant_count(const Spectrum& spectrum) {
  return static_cast<int>(std::count(spectrum.significant.begin(), spectrum.significant.end(), true));
}

}  // namespace chpca
