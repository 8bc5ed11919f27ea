#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "chpca/hilbert.hpp"
#include "chpca/preprocess.hpp"
#include "chpca/random.hpp"
#include "oracles.hpp"

using namespace chpca;
using std::numbers::pi;

namespace {

std::vector<double> tone(int T, int k, double (*f)(double), double shift = 0.0) {
  std::vector<double> x(T);
  for (int t = 0; t < T; ++t) x[t] = f(2.0 * pi * k * (t - shift) / T);
  return x;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

Panel panel_of(const std::vector<std::vector<double>>& rows) {
  Panel p;
  p.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t c = 0; c < rows.size(); ++c) {
    p.countries.push_back("R" + std::to_string(c));
    for (std::size_t t = 0; t < rows[c].size(); ++t)
      p.values(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(t)) = rows[c][t];
  }
  return p;
}

Panel random_panel(int C, int T, RandomStream& rng) {
  std::vector<std::vector<double>> rows(C, std::vector<double>(T));
  for (auto& r : rows)
    for (double& v : r) v = rng.normal();
  return panel_of(rows);
}

double (*const kCos)(double) = [](double x) { return std::cos(x); };
double (*const kSin)(double) = [](double x) { return std::sin(x); };
double (*const kNegCos)(double) = [](double x) { return -std::cos(x); };

}  // namespace

TEST(HilbertTransform, CanonicalPairs) {
  for (int T : {64, 365, 1027}) {
    for (int k : {1, 7, T / 2 - 1}) {
      EXPECT_LT(max_abs_diff(hilbert_transform(tone(T, k, kCos)), tone(T, k, kSin)), 1e-10) << T << ' ' << k;
      EXPECT_LT(max_abs_diff(hilbert_transform(tone(T, k, kSin)), tone(T, k, kNegCos)), 1e-10) << T << ' ' << k;
    }
  }
}

TEST(HilbertTransform, ConstantAndNyquistVanish) {
  for (double v : hilbert_transform(std::vector<double>(40, 3.5))) EXPECT_NEAR(v, 0.0, 1e-12);
  std::vector<double> alternating(16);
  for (int t = 0; t < 16; ++t) alternating[t] = t % 2 ? -1.0 : 1.0;
  for (double v : hilbert_transform(alternating)) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(HilbertTransform, MatchesDirectDftOracle) {
  RandomStream rng(17);
  for (int T : {2, 3, 16, 31, 100, 127}) {
    std::vector<double> x(T);
    for (double& v : x) v = rng.normal();
    EXPECT_LT(max_abs_diff(hilbert_transform(x), oracle::hilbert_dft(x)), 1e-10) << T;
  }
}

TEST(HilbertTransform, Linearity) {
  RandomStream rng(23);
  const int T = 211;
  std::vector<double> x(T), y(T), combo(T);
  for (int t = 0; t < T; ++t) {
    x[t] = rng.normal();
    y[t] = rng.normal();
    combo[t] = 2.5 * x[t] - 0.75 * y[t];
  }
  const auto hx = hilbert_transform(x), hy = hilbert_transform(y), hc = hilbert_transform(combo);
  for (int t = 0; t < T; ++t) EXPECT_NEAR(hc[t], 2.5 * hx[t] - 0.75 * hy[t], 1e-10);
}

TEST(HilbertTransform, Errors) {
  EXPECT_THROW(hilbert_transform(std::vector<double>{1.0}), Error);
  EXPECT_THROW(hilbert_transform(std::vector<double>{1.0, HUGE_VAL, 2.0}), Error);
}

TEST(AnalyticSignal, CosineBecomesComplexExponential) {
  const int T = 256, k = 9;
  const auto p = panel_of({tone(T, k, kCos)});
  const auto z = analytic_signal(p);
  for (int t = 0; t < T; ++t) {
    const auto expected = std::polar(1.0, 2.0 * pi * k * t / T);
    EXPECT_LT(std::abs(z.values(0, t) - expected), 1e-10);
  }
}

TEST(AnalyticSignal, RealPartIsInput) {
  RandomStream rng(4);
  const auto p = random_panel(5, 97, rng);
  const auto z = analytic_signal(p);
  EXPECT_LT((z.values.real() - p.values).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_EQ(z.countries, p.countries);
}

TEST(AnalyticSignal, ParsevalOnWhiteNoise) {
  RandomStream rng(31);
  const auto p = standardize(random_panel(8, 1000, rng));
  const auto z = analytic_signal(p);
  for (Eigen::Index c = 0; c < p.n_series(); ++c) {
    const double power = z.values.row(c).cwiseAbs2().mean();
    const double var = p.values.row(c).squaredNorm() / static_cast<double>(p.n_days());
    EXPECT_NEAR(power / (2.0 * var), 1.0, 0.05);
  }
}

TEST(ComplexCorrelation, SelfCorrelationIsOne) {
  RandomStream rng(2);
  const auto m = complex_correlation(analytic_signal(random_panel(4, 50, rng)));
  for (int a = 0; a < 4; ++a) EXPECT_EQ(m.values(a, a), std::complex<double>(1.0, 0.0));
  EXPECT_NEAR(m.values.trace().real(), 4.0, 1e-15);
}

TEST(ComplexCorrelation, ShiftedSinusoidPhaseAndSign) {
  const int T = 365, k = 7;
  for (int delta : {1, 3, 10}) {
    // Row b is row a delayed by delta days, so a leads b.
    const auto m = complex_correlation(analytic_signal(panel_of({tone(T, k, kCos), tone(T, k, kCos, delta)})));
    const double omega = 2.0 * pi * k / T;
    EXPECT_NEAR(std::abs(m.values(0, 1)), 1.0, 1e-8);
    EXPECT_NEAR(std::arg(m.values(0, 1)), omega * delta, 1e-8);
    EXPECT_GT(std::arg(m.values(0, 1)), 0.0);
  }
}

TEST(ComplexCorrelation, MatchesTripleLoopOracle) {
  RandomStream rng(101);
  for (int trial = 0; trial < 20; ++trial) {
    const int C = 1 + static_cast<int>(rng.uniform_index(8));
    const int T = 2 + static_cast<int>(rng.uniform_index(63));
    const auto z = analytic_signal(random_panel(C, T, rng));
    const auto m = complex_correlation(z);
    EXPECT_LT((m.values - oracle::correlation_triple_loop(z.values)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ComplexCorrelation, HermitianPsdAndUnnormalizedMode) {
  RandomStream rng(55);
  const auto p = standardize(random_panel(12, 80, rng));
  const auto z = analytic_signal(p);
  const auto m = complex_correlation(z);
  EXPECT_EQ((m.values - m.values.adjoint()).cwiseAbs().maxCoeff(), 0.0);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m.values);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-9);

  const auto raw = complex_correlation(z, {.normalize = false});
  for (int a = 0; a < 12; ++a) EXPECT_NEAR(raw.values(a, a).real(), z.values.row(a).cwiseAbs2().mean(), 1e-12);
}

TEST(ComplexCorrelation, InvariantUnderCommonCircularShift) {
  RandomStream rng(77);
  const auto p = standardize(random_panel(6, 120, rng));
  Panel shifted = p;
  const int tau = 17;
  for (Eigen::Index c = 0; c < p.n_series(); ++c)
    for (Eigen::Index t = 0; t < p.n_days(); ++t) shifted.values(c, t) = p.values(c, (t + tau) % p.n_days());
  const auto a = complex_correlation(analytic_signal(p)), b = complex_correlation(analytic_signal(shifted));
  EXPECT_LT((a.values - b.values).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(ComplexCorrelation, ZeroPowerRowNamesCountry) {
  AnalyticPanel z;
  z.countries = {"JP", "FR"};
  z.values = ComplexMatrix::Zero(2, 10);
  z.values(0, 3) = 1.0;
  try {
    complex_correlation(z);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("FR"), std::string::npos);
  }
}

TEST(AmplitudePhase, Examples) {
  auto ap = amplitude_phase({1.0, 0.0});
  EXPECT_DOUBLE_EQ(ap.amplitude, 1.0);
  EXPECT_DOUBLE_EQ(ap.phase, 0.0);
  ap = amplitude_phase({0.0, 1.0});
  EXPECT_DOUBLE_EQ(ap.amplitude, 1.0);
  EXPECT_DOUBLE_EQ(ap.phase, pi / 2);
  ap = amplitude_phase({-0.3, -0.4});
  EXPECT_NEAR(ap.amplitude, 0.5, 1e-15);
  EXPECT_NEAR(ap.phase, -2.214297435588181, 1e-12);
  // Principal range is (-pi, pi].
  EXPECT_DOUBLE_EQ(amplitude_phase({-1.0, -0.0}).phase, pi);
}
