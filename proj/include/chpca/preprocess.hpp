#pragma once

// Weekly-cycle removal, log ratios and standardization.
//
// Pipeline order per row: clean (0.1 floor) -> detrend_weekly -> re-clamp at
// 0.1 -> log_ratio -> standardize.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "chpca/ingest.hpp"
#include "chpca/nelder_mead.hpp"
#include "chpca/parallel.hpp"
#include "chpca/types.hpp"

namespace chpca {

enum class DetrendMethod { state_space, moving_average_7, none };

inline std::string_view detrend_name(DetrendMethod m) {
  switch (m) {
    case DetrendMethod::state_space: return "state-space";
    case DetrendMethod::moving_average_7: return "ma7";
    case DetrendMethod::none: return "none";
  }
  return "";
}

inline DetrendMethod parse_detrend(std::string_view text) {
  for (auto m : {DetrendMethod::state_space, DetrendMethod::moving_average_7, DetrendMethod::none})
    if (detrend_name(m) == text) return m;
  throw Error("unknown detrend method '" + std::string(text) + "' (expected state-space, ma7 or none)");
}

struct DetrendConfig {
  DetrendMethod method = DetrendMethod::state_space;
  int max_likelihood_iters = 200;
  /// Lower bound on every noise variance, in units of the series' squared RMS.
  double variance_floor = 1e-8;
  /// Fit the state-space model to log levels so weekly cycles are multiplicative.
  bool log_domain = true;

  void validate() const {
    if (!(variance_floor > 0.0)) throw Error("variance_floor must be positive");
    if (max_likelihood_iters < 1) throw Error("max_likelihood_iters must be at least 1");
  }
};

namespace detail {

// Local linear trend + period-7 dummy seasonal. State layout:
//   [level, slope, s_t, s_{t-1}, ..., s_{t-5}]
// Observation: y_t = level_t + s_t + eps_t.
// Disturbances enter level, slope and s_t with variances q(0..2).
class WeeklyStructuralModel {
public:
  static constexpr int kStates = 8;
  using Vec = Eigen::Matrix<double, kStates, 1>;
  using Mat = Eigen::Matrix<double, kStates, kStates>;

  explicit WeeklyStructuralModel(std::span<const double> y) : y_(y) {}

  /// Gaussian log-likelihood for variances (obs, level, slope, seasonal),
  /// ignoring the first kStates observations absorbed by the diffuse start.
  double log_likelihood(const Eigen::Vector4d& var) const {
    Vec a = initial_state();
    Mat P = initial_cov();
    double ll = 0.0;
    for (std::size_t t = 0; t < y_.size(); ++t) {
      const double v = y_[t] - (a(0) + a(2));
      const double F = observe_var(P) + var(0);
      if (!(F > 0.0)) return -HUGE_VAL;
      const Vec PZ = P.col(0) + P.col(2);
      a += PZ * (v / F);
      P -= PZ * PZ.transpose() / F;
      if (t >= static_cast<std::size_t>(kStates))
        ll -= 0.5 * (std::log(2.0 * std::numbers::pi) + std::log(F) + v * v / F);
      a = transition(a);
      P = propagate(P);
      add_noise(P, var);
    }
    return ll;
  }

  /// Smoothed states E[x_t | y_1..y_T] via the backward disturbance recursion.
  std::vector<Vec> smooth(const Eigen::Vector4d& var) const {
    const std::size_t n = y_.size();
    std::vector<Vec> a_pred(n);
    std::vector<Mat> P_pred(n);
    std::vector<double> v(n), F(n);
    Vec a = initial_state();
    Mat P = initial_cov();
    for (std::size_t t = 0; t < n; ++t) {
      a_pred[t] = a;
      P_pred[t] = P;
      v[t] = y_[t] - (a(0) + a(2));
      F[t] = observe_var(P) + var(0);
      const Vec PZ = P.col(0) + P.col(2);
      a += PZ * (v[t] / F[t]);
      P -= PZ * PZ.transpose() / F[t];
      a = transition(a);
      P = propagate(P);
      add_noise(P, var);
    }
    // r_{t-1} = Z' v_t / F_t + L_t' r_t with L_t = T (I - P_t Z' Z / F_t).
    std::vector<Vec> out(n);
    Vec r = Vec::Zero();
    for (std::size_t t = n; t-- > 0;) {
      const Vec Ttr = transition_transpose(r);  // T' r_t
      const Vec PZ = P_pred[t].col(0) + P_pred[t].col(2);
      // (I - Z' PZ' / F) T' r = T'r - Z' (PZ . T'r) / F
      const double k = PZ.dot(Ttr) / F[t];
      Vec next = Ttr;
      next(0) += v[t] / F[t] - k;
      next(2) += v[t] / F[t] - k;
      r = next;
      out[t] = a_pred[t] + P_pred[t] * r;
    }
    return out;
  }

private:
  Vec initial_state() const {
    Vec a = Vec::Zero();
    a(0) = y_.empty() ? 0.0 : y_[0];
    return a;
  }
  static Mat initial_cov() { return Mat::Identity() * 1e6; }

  static double observe_var(const Mat& P) { return P(0, 0) + 2.0 * P(0, 2) + P(2, 2); }

  static Vec transition(const Vec& a) {
    Vec out;
    out(0) = a(0) + a(1);
    out(1) = a(1);
    out(2) = -a.tail<6>().sum();
    for (int i = 3; i < kStates; ++i) out(i) = a(i - 1);
    return out;
  }

  static Vec transition_transpose(const Vec& r) {
    Vec out;
    out(0) = r(0);
    out(1) = r(0) + r(1);
    for (int i = 2; i < kStates - 1; ++i) out(i) = -r(2) + r(i + 1);
    out(kStates - 1) = -r(2);
    return out;
  }

  // T P T' using the sparsity of T.
  static Mat propagate(const Mat& P) {
    Mat TP;
    TP.row(0) = P.row(0) + P.row(1);
    TP.row(1) = P.row(1);
    TP.row(2) = -P.bottomRows<6>().colwise().sum();
    for (int i = 3; i < kStates; ++i) TP.row(i) = P.row(i - 1);
    Mat out;
    out.col(0) = TP.col(0) + TP.col(1);
    out.col(1) = TP.col(1);
    out.col(2) = -TP.rightCols<6>().rowwise().sum();
    for (int i = 3; i < kStates; ++i) out.col(i) = TP.col(i - 1);
    return out;
  }

  static void add_noise(Mat& P, const Eigen::Vector4d& var) {
    P(0, 0) += var(1);
    P(1, 1) += var(2);
    P(2, 2) += var(3);
  }

  std::span<const double> y_;
};

inline void require_finite(std::span<const double> series) {
  for (double x : series)
    if (!std::isfinite(x)) throw Error("detrend_weekly: non-finite input");
}

}  // namespace detail

/// Weekly structural model: variances are fit by maximum likelihood over
/// log-variances (Nelder-Mead) and the smoothed level is returned.
inline std::vector<double> detrend_state_space(std::span<const double> series,
                                               const DetrendConfig& config = {}) {
  const std::size_t n = series.size();
  double ms = 0.0;
  for (double x : series) ms += x * x;
  const double scale = std::sqrt(ms / static_cast<double>(n));
  if (scale == 0.0) return std::vector<double>(n, 0.0);

  std::vector<double> y(n);
  for (std::size_t t = 0; t < n; ++t) y[t] = series[t] / scale;
  const detail::WeeklyStructuralModel model(y);

  double diff_var = 0.0;
  for (std::size_t t = 1; t < n; ++t) diff_var += (y[t] - y[t - 1]) * (y[t] - y[t - 1]);
  diff_var /= static_cast<double>(n - 1);
  const double floor = config.variance_floor;
  const double start = std::log(std::max(diff_var / 4.0, floor));

  auto to_var = [floor](const Eigen::VectorXd& theta) {
    Eigen::Vector4d v;
    for (int i = 0; i < 4; ++i) v(i) = std::max(std::exp(std::min(theta(i), 50.0)), floor);
    return v;
  };
  const auto fit = nelder_mead(
      [&](const Eigen::VectorXd& theta) { return -model.log_likelihood(to_var(theta)); },
      Eigen::VectorXd::Constant(4, start), 1.0, config.max_likelihood_iters);

  const auto states = model.smooth(to_var(fit.argmin));
  std::vector<double> out(n);
  for (std::size_t t = 0; t < n; ++t) out[t] = states[t](0) * scale;
  return out;
}

/// Centered 7-day mean; the window shrinks symmetrically near the edges.
inline std::vector<double> detrend_moving_average(std::span<const double> series) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(series.size());
  std::vector<double> out(series.size());
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    const std::ptrdiff_t half = std::min<std::ptrdiff_t>({3, t, n - 1 - t});
    double sum = 0.0;
    for (std::ptrdiff_t k = t - half; k <= t + half; ++k) sum += series[static_cast<std::size_t>(k)];
    out[static_cast<std::size_t>(t)] = sum / static_cast<double>(2 * half + 1);
  }
  return out;
}

/// Removes the period-7 cycle from a daily series.
inline std::vector<double> detrend_weekly(std::span<const double> series,
                                          const DetrendConfig& config = {}) {
  config.validate();
  if (series.size() < 14) throw Error("detrend_weekly: need at least 14 days");
  detail::require_finite(series);
  switch (config.method) {
    case DetrendMethod::state_space: {
      if (!config.log_domain) return detrend_state_space(series, config);
      std::vector<double> logs(series.size());
      for (std::size_t t = 0; t < series.size(); ++t) {
        if (!(series[t] > 0.0)) throw Error("detrend_weekly: log-domain fit needs positive input");
        logs[t] = std::log(series[t]);
      }
      auto trend = detrend_state_space(logs, config);
      for (double& x : trend) x = std::exp(x);
      return trend;
    }
    case DetrendMethod::moving_average_7: return detrend_moving_average(series);
    case DetrendMethod::none: break;
  }
  return {series.begin(), series.end()};
}

/// Detrends every row and re-clamps at the 0.1 floor. Rows run in parallel.
inline Panel detrend_panel(const Panel& panel, const DetrendConfig& config = {}) {
  Panel out = panel;
  if (config.method == DetrendMethod::none) return out;
  parallel_for(static_cast<std::size_t>(panel.n_series()), [&](std::size_t i) {
    const auto row = static_cast<Eigen::Index>(i);
    std::span<const double> series(panel.values.row(row).data(),
                                   static_cast<std::size_t>(panel.n_days()));
    std::vector<double> smoothed;
    try {
      smoothed = detrend_weekly(series, config);
    } catch (const Error& e) {
      throw Error(panel.countries[i] + ": " + e.what());
    }
    for (Eigen::Index t = 0; t < panel.n_days(); ++t)
      out.values(row, t) = std::max(smoothed[static_cast<std::size_t>(t)], kCaseFloor);
  });
  return out;
}

/// r[c,t] = log x[c,t] - log x[c,t-1]. Drops the first date.
inline Panel log_ratio(const Panel& panel) {
  if (panel.n_days() < 2) throw Error("log_ratio: need at least two days");
  for (Eigen::Index c = 0; c < panel.n_series(); ++c)
    for (Eigen::Index t = 0; t < panel.n_days(); ++t)
      if (!(panel.values(c, t) > 0.0))
        throw Error("log_ratio: non-positive value for " + panel.countries[static_cast<std::size_t>(c)] +
                    " at column " + std::to_string(t));
  Panel out;
  out.countries = panel.countries;
  if (!panel.dates.empty()) out.dates.assign(panel.dates.begin() + 1, panel.dates.end());
  const RealMatrix logs = panel.values.array().log().matrix();
  out.values = logs.rightCols(panel.n_days() - 1) - logs.leftCols(panel.n_days() - 1);
  return out;
}

/// Per-row z-score with the population (1/T) variance.
inline Panel standardize(const Panel& panel) {
  Panel out = panel;
  const double T = static_cast<double>(panel.n_days());
  for (Eigen::Index c = 0; c < panel.n_series(); ++c) {
    auto row = out.values.row(c);
    const double mean = row.sum() / T;
    row.array() -= mean;
    const double var = row.squaredNorm() / T;
    if (!(var > 0.0) || var < 1e-24 * (mean * mean + 1.0))
      throw Error("standardize: zero variance for " + panel.countries[static_cast<std::size_t>(c)]);
    row /= std::sqrt(var);
  }
  return out;
}

/// detrend -> re-clamp -> log_ratio -> standardize.
inline Panel prepare_panel(const Panel& cleaned, const DetrendConfig& config = {}) {
  return standardize(log_ratio(detrend_panel(cleaned, config)));
}

}  // namespace chpca
