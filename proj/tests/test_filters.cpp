#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "trucklens/error.hpp"
#include "trucklens/filters.hpp"

namespace {

using namespace trucklens;
using namespace trucklens::filters;
constexpr double kPi = std::numbers::pi;

std::vector<FilterCoefficients> all_designs(FilterMode mode, double rate = 100.0) {
  std::vector<FilterCoefficients> out;
  for (auto kind : {FilterKind::butterworth, FilterKind::fir, FilterKind::savgol}) {
    FilterConfig c;
    c.kind = kind;
    c.mode = mode;
    out.push_back(design(c, rate));
  }
  FilterConfig b4;
  b4.order = 4;
  b4.mode = mode;
  out.push_back(design(b4, rate));
  return out;
}

// Hand-rolled normal equations for a centered least-squares polynomial fit.
std::vector<double> savgol_oracle(int half, int degree) {
  const int m = degree + 1;
  std::vector<std::vector<double>> ata(m, std::vector<double>(m, 0.0));
  for (int j = -half; j <= half; ++j)
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) ata[r][c] += std::pow(j, r) * std::pow(j, c);
  // invert via Gauss-Jordan
  std::vector<std::vector<double>> inv(m, std::vector<double>(m, 0.0));
  for (int i = 0; i < m; ++i) inv[i][i] = 1.0;
  for (int col = 0; col < m; ++col) {
    int piv = col;
    for (int r = col + 1; r < m; ++r)
      if (std::abs(ata[r][col]) > std::abs(ata[piv][col])) piv = r;
    std::swap(ata[col], ata[piv]);
    std::swap(inv[col], inv[piv]);
    const double p = ata[col][col];
    for (int c = 0; c < m; ++c) {
      ata[col][c] /= p;
      inv[col][c] /= p;
    }
    for (int r = 0; r < m; ++r) {
      if (r == col) continue;
      const double f = ata[r][col];
      for (int c = 0; c < m; ++c) {
        ata[r][c] -= f * ata[col][c];
        inv[r][c] -= f * inv[col][c];
      }
    }
  }
  std::vector<double> taps;
  for (int j = -half; j <= half; ++j) {
    double w = 0.0;
    for (int c = 0; c < m; ++c) w += inv[0][c] * std::pow(j, c);
    taps.push_back(w);
  }
  return taps;
}

TEST(Design, ButterworthMinus3dB) {
  auto c = design_butterworth(1.0, 1, 100.0);
  EXPECT_NEAR(c.dc_gain(), 1.0, 1e-9);
  EXPECT_NEAR(magnitude_at(c, 1.0), 1.0 / std::sqrt(2.0), 1e-3);
  for (int order : {2, 3, 4, 5}) {
    auto h = design_butterworth(2.0, order, 50.0);
    EXPECT_NEAR(h.dc_gain(), 1.0, 1e-9) << order;
    EXPECT_NEAR(magnitude_at(h, 2.0), 1.0 / std::sqrt(2.0), 1e-3) << order;
  }
}

TEST(Design, ButterworthFirstOrderCoefficients) {
  // bilinear transform of wc/(s+wc) with pre-warping
  const double k = std::tan(kPi * 1.0 / 100.0);
  auto c = design_butterworth(1.0, 1, 100.0);
  ASSERT_EQ(c.numerator.size(), 2u);
  EXPECT_NEAR(c.numerator[0], k / (1 + k), 1e-12);
  EXPECT_NEAR(c.numerator[1], k / (1 + k), 1e-12);
  EXPECT_NEAR(c.denominator[1], (k - 1) / (k + 1), 1e-12);
}

TEST(Design, SavgolMatchesNormalEquations) {
  auto c = design_savgol(0.5, 2, 100.0);
  ASSERT_EQ(c.numerator.size(), 51u);
  EXPECT_NEAR(std::accumulate(c.numerator.begin(), c.numerator.end(), 0.0), 1.0, 1e-9);
  auto oracle = savgol_oracle(25, 2);
  for (std::size_t i = 0; i < 51; ++i) EXPECT_NEAR(c.numerator[i], oracle[i], 1e-9) << i;
}

TEST(Design, FirWindowAndDcGain) {
  auto c = design_fir(1.0, 0.5, 100.0);
  EXPECT_EQ(c.numerator.size(), 51u);
  EXPECT_NEAR(c.dc_gain(), 1.0, 1e-9);
  for (std::size_t i = 0; i < 25; ++i) EXPECT_NEAR(c.numerator[i], c.numerator[50 - i], 1e-15);
  EXPECT_EQ(odd_window_length(0.5, 5.0), 3u);
  EXPECT_EQ(odd_window_length(0.5, 10.0), 5u);
  EXPECT_EQ(odd_window_length(0.5, 25.0), 13u);
}

TEST(Design, Errors) {
  FilterConfig fir;
  fir.kind = FilterKind::fir;
  fir.cutoff_hz = 60.0;
  EXPECT_THROW(design(fir, 100.0), Error);
  FilterConfig bw;
  bw.cutoff_hz = 50.0;
  EXPECT_THROW(design(bw, 100.0), Error);
  FilterConfig sg;
  sg.kind = FilterKind::savgol;
  sg.window_seconds = 0.02;  // 3 samples at 100 Hz
  sg.poly_degree = 3;
  EXPECT_THROW(design(sg, 100.0), Error);
  bw.cutoff_hz = 1.0;
  bw.order = 0;
  EXPECT_THROW(design(bw, 100.0), Error);
}

TEST(Causal, ConstantPassesFromFirstSample) {
  std::vector<double> x(300, 500.0);
  for (const auto& c : all_designs(FilterMode::causal)) {
    auto y = apply_causal(c, x);
    ASSERT_EQ(y.size(), x.size());
    for (double v : y) ASSERT_NEAR(v, 500.0, 1e-9);
  }
}

TEST(Causal, StepFromRestMatchesRecursion) {
  auto c = design_butterworth(1.0, 1, 100.0);
  std::vector<double> step(400, 1.0);
  auto y = apply_causal(c, step, InitialState::rest);
  const double b0 = c.numerator[0], b1 = c.numerator[1], a1 = c.denominator[1];
  double prev_x = 0.0, prev_y = 0.0;
  for (std::size_t n = 0; n < y.size(); ++n) {
    const double ref = b0 * step[n] + b1 * prev_x - a1 * prev_y;
    EXPECT_NEAR(y[n], ref, 1e-12);
    if (n > 0) {
      EXPECT_GT(y[n], y[n - 1]);
    }
    EXPECT_LT(y[n], 1.0);
    prev_x = step[n];
    prev_y = ref;
  }
  EXPECT_GT(y.back(), 0.9);
}

TEST(Causal, FirImpulseGivesTaps) {
  auto c = design_fir(1.0, 0.5, 100.0);
  std::vector<double> impulse(80, 0.0);
  impulse[0] = 1.0;
  auto y = apply_causal(c, impulse, InitialState::rest);
  for (std::size_t i = 0; i < c.numerator.size(); ++i) EXPECT_NEAR(y[i], c.numerator[i], 1e-15);
  for (std::size_t i = c.numerator.size(); i < y.size(); ++i) EXPECT_NEAR(y[i], 0.0, 1e-15);
}

TEST(Causal, SavgolTrailingWindowReproducesQuadratic) {
  auto c = design_savgol(0.5, 2, 100.0, true);
  std::vector<double> x(200);
  for (std::size_t n = 0; n < x.size(); ++n) x[n] = 3.0 + 0.5 * n - 0.01 * n * n;
  auto y = apply_causal(c, x);
  for (std::size_t n = 50; n < x.size(); ++n) EXPECT_NEAR(y[n], x[n], 1e-7 * (1 + std::abs(x[n])));
}

TEST(Causal, StreamingEqualsBatch) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd(0.0, 10.0);
  std::vector<double> x(500);
  for (auto& v : x) v = nd(rng);
  for (const auto& c : all_designs(FilterMode::causal)) {
    auto batch = apply_causal(c, x);
    CausalFilter f(c);
    for (std::size_t i = 0; i < x.size(); ++i) ASSERT_EQ(f.step(x[i]), batch[i]);
  }
}

TEST(ZeroPhase, ConstantIsFixedPoint) {
  std::vector<double> x(400, -1234.5);
  for (const auto& c : all_designs(FilterMode::zero_phase)) {
    auto y = apply_zero_phase(c, x);
    for (double v : y) ASSERT_NEAR(v, -1234.5, 1e-9);
  }
}

TEST(ZeroPhase, SymmetricTriangleStaysSymmetric) {
  std::vector<double> x(601, 0.0);
  for (int i = 0; i < 601; ++i) x[i] = std::max(0.0, 100.0 - std::abs(i - 300) * 1.0);
  for (const auto& c : all_designs(FilterMode::zero_phase)) {
    auto y = apply_zero_phase(c, x);
    for (int i = 0; i < 601; ++i) ASSERT_NEAR(y[i], y[600 - i], 1e-8);
    EXPECT_EQ(std::max_element(y.begin(), y.end()) - y.begin(), 300);
  }
}

TEST(ZeroPhase, TimeReversalEquivariant) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd(0.0, 50.0);
  std::vector<double> x(700);
  for (auto& v : x) v = nd(rng);
  std::vector<double> rx(x.rbegin(), x.rend());
  for (const auto& c : all_designs(FilterMode::zero_phase)) {
    auto y = apply_zero_phase(c, x);
    auto ry = apply_zero_phase(c, rx);
    for (std::size_t i = 0; i < x.size(); ++i) ASSERT_NEAR(ry[i], y[x.size() - 1 - i], 1e-8);
  }
}

TEST(ZeroPhase, SineAmplitudeAndLag) {
  const double rate = 100.0, f = 0.2, fc = 1.0;
  auto c = design_butterworth(fc, 1, rate);
  std::vector<double> x(6000);
  for (std::size_t n = 0; n < x.size(); ++n) x[n] = 1000.0 * std::sin(2 * kPi * f * n / rate);
  auto y = apply_zero_phase(c, x);
  // analytic zero-phase gain |H|^2 of the pre-warped first-order design
  const double r = std::tan(kPi * f / rate) / std::tan(kPi * fc / rate);
  const double gain = 1.0 / (1.0 + r * r);
  double peak = 0.0;
  for (std::size_t n = 1000; n < 5000; ++n) peak = std::max(peak, std::abs(y[n]));
  EXPECT_NEAR(peak / 1000.0, gain, 2e-3);
  // cross-correlation peak at lag 0
  auto xcorr = [&](int lag) {
    double s = 0.0;
    for (std::size_t n = 1000; n < 5000; ++n) s += x[n] * y[n + lag];
    return s;
  };
  const double c0 = xcorr(0);
  for (int lag : {-3, -2, -1, 1, 2, 3}) EXPECT_GT(c0, xcorr(lag));
}

TEST(ZeroPhase, TooShortNamesMinimum) {
  auto c = design_fir(1.0, 0.5, 100.0);
  const auto min = zero_phase_min_length(c);
  EXPECT_EQ(min, 3 * 51 + 1);
  std::vector<double> x(min - 1, 1.0);
  try {
    apply_zero_phase(c, x);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find(std::to_string(min)), std::string::npos);
  }
  std::vector<double> ok(min, 1.0);
  EXPECT_NO_THROW(apply_zero_phase(c, ok));
}

TEST(Properties, ButterworthReducesWhiteNoiseVariance) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<double> x(20000);
  for (auto& v : x) v = nd(rng);
  auto var = [](const std::vector<double>& v) {
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    double s = 0.0;
    for (double e : v) s += (e - m) * (e - m);
    return s / v.size();
  };
  const double vx = var(x);
  for (double fc : {1.0, 10.0, 24.0}) {
    for (int order : {1, 2, 4}) {
      auto c = design_butterworth(fc, order, 100.0);
      EXPECT_LT(var(apply_causal(c, x)), vx);
      EXPECT_LT(var(apply_zero_phase(c, x)), vx);
    }
  }
}

TEST(Differentiate, Ramp) {
  std::vector<double> x(50);
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = 100.0 * k;
  for (double v : differentiate(x, 100.0)) EXPECT_NEAR(v, 10000.0, 1e-8);
}

TEST(Differentiate, ConstantGivesZeros) {
  std::vector<double> x(20, 42.0);
  for (double v : differentiate(x, 100.0)) EXPECT_EQ(v, 0.0);
}

TEST(Differentiate, SineAgainstAnalytic) {
  const double rate = 100.0;
  for (double f : {0.5, 0.2}) {
    std::vector<double> x(1000);
    for (std::size_t n = 0; n < x.size(); ++n) x[n] = std::sin(2 * kPi * f * n / rate);
    auto d = differentiate(x, rate);
    const double amp = 2 * kPi * f;
    for (std::size_t n = 0; n < x.size(); ++n)
      ASSERT_NEAR(d[n], amp * std::cos(2 * kPi * f * n / rate), 1e-3 * amp) << f << " " << n;
  }
}

TEST(Differentiate, QuadraticIsExactIncludingEdges) {
  std::vector<double> x(30);
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = 2.0 * k * k - 3.0 * k + 1.0;
  auto d = differentiate(x, 1.0);
  for (std::size_t k = 0; k < x.size(); ++k) EXPECT_NEAR(d[k], 4.0 * k - 3.0, 1e-9);
}

TEST(Differentiate, InvertsCumulativeIntegral) {
  const double rate = 1000.0;
  std::vector<double> x(5000), s(5000, 0.0);
  for (std::size_t n = 0; n < x.size(); ++n) x[n] = 500.0 + 300.0 * std::sin(2 * kPi * 0.1 * n / rate);
  for (std::size_t n = 1; n < x.size(); ++n) s[n] = s[n - 1] + (x[n - 1] + x[n]) / (2.0 * rate);
  auto d = differentiate(s, rate);
  for (std::size_t n = 1; n + 1 < x.size(); ++n) ASSERT_NEAR(d[n], x[n], 1e-6 * std::abs(x[n]));
}

TEST(Differentiate, TooShort) {
  std::vector<double> x{1.0, 2.0};
  EXPECT_THROW(differentiate(x, 10.0), Error);
}

}  // namespace
