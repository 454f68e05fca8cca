#include "trucklens/filters.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "trucklens/error.hpp"

namespace trucklens::filters {
namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

double sinc(double x) {
  if (x == 0.0) return 1.0;
  return std::sin(kPi * x) / (kPi * x);
}

std::vector<double> odd_extend(std::span<const double> x, std::size_t pad) {
  const std::size_t n = x.size();
  std::vector<double> out;
  out.reserve(n + 2 * pad);
  for (std::size_t i = pad; i > 0; --i) out.push_back(2.0 * x[0] - x[i]);
  out.insert(out.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) out.push_back(2.0 * x[n - 1] - x[n - 1 - i]);
  return out;
}

void run_causal(CausalFilter& filter, std::vector<double>& data) {
  for (auto& v : data) v = filter.step(v);
}

}  // namespace

std::string_view to_string(FilterKind kind) {
  switch (kind) {
    case FilterKind::butterworth: return "butterworth";
    case FilterKind::fir: return "fir";
    case FilterKind::savgol: return "savgol";
  }
  return "?";
}

std::string_view to_string(FilterMode mode) { return mode == FilterMode::causal ? "causal" : "zero_phase"; }

FilterKind parse_filter_kind(std::string_view name) {
  if (name == "butterworth") return FilterKind::butterworth;
  if (name == "fir") return FilterKind::fir;
  if (name == "savgol") return FilterKind::savgol;
  throw Error(ErrorCode::invalid_argument, "unknown filter kind '" + std::string(name) + "'");
}

FilterMode parse_filter_mode(std::string_view name) {
  if (name == "causal") return FilterMode::causal;
  if (name == "zero_phase") return FilterMode::zero_phase;
  throw Error(ErrorCode::invalid_argument, "unknown filter mode '" + std::string(name) + "'");
}

std::size_t FilterCoefficients::length() const { return std::max(numerator.size(), denominator.size()); }

double FilterCoefficients::dc_gain() const {
  double num = 0.0, den = 0.0;
  for (double v : numerator) num += v;
  for (double v : denominator) den += v;
  return num / den;
}

std::size_t odd_window_length(double seconds, double rate) {
  const double r = seconds * rate;
  return 2 * static_cast<std::size_t>(std::floor(std::max(r, 0.0) / 2.0)) + 1;
}

void validate(const FilterConfig& config, double rate) {
  if (!(rate > 0.0)) throw Error(ErrorCode::design, "sampling rate must be positive");
  switch (config.kind) {
    case FilterKind::butterworth:
    case FilterKind::fir:
      if (!(config.cutoff_hz > 0.0)) throw Error(ErrorCode::design, "cutoff must be positive");
      if (!(config.cutoff_hz < rate / 2.0)) {
        throw Error(ErrorCode::design, "cutoff " + std::to_string(config.cutoff_hz) + " Hz is not below Nyquist (" +
                                           std::to_string(rate / 2.0) + " Hz)");
      }
      if (config.kind == FilterKind::butterworth && config.order < 1) {
        throw Error(ErrorCode::design, "butterworth order must be >= 1");
      }
      if (config.kind == FilterKind::fir && !(config.window_seconds > 0.0)) {
        throw Error(ErrorCode::design, "fir window must be positive");
      }
      break;
    case FilterKind::savgol: {
      if (!(config.window_seconds > 0.0)) throw Error(ErrorCode::design, "savgol window must be positive");
      if (config.poly_degree < 0) throw Error(ErrorCode::design, "savgol degree must be >= 0");
      auto len = odd_window_length(config.window_seconds, rate);
      if (len < static_cast<std::size_t>(config.poly_degree) + 1) {
        throw Error(ErrorCode::design, "savgol window of " + std::to_string(len) + " samples is shorter than degree+1");
      }
      break;
    }
  }
}

FilterCoefficients design_butterworth(double cutoff_hz, int order, double rate) {
  validate(FilterConfig{FilterKind::butterworth, cutoff_hz, order}, rate);
  const double k = 2.0 * rate;
  const double wa = k * std::tan(kPi * cutoff_hz / rate);  // pre-warped analog corner
  FilterCoefficients c;
  c.kind = FilterKind::butterworth;
  c.design_rate = rate;

  for (int i = 1; i <= order / 2; ++i) {
    const double theta = kPi * (2.0 * i + order - 1) / (2.0 * order);
    const double damp = -2.0 * std::cos(theta) * wa;
    const double a0 = k * k + damp * k + wa * wa;
    Section s;
    s.b0 = wa * wa / a0;
    s.b1 = 2.0 * wa * wa / a0;
    s.b2 = wa * wa / a0;
    s.a1 = 2.0 * (wa * wa - k * k) / a0;
    s.a2 = (k * k - damp * k + wa * wa) / a0;
    c.sections.push_back(s);
  }
  if (order % 2 == 1) {
    const double a0 = k + wa;
    Section s;
    s.b0 = wa / a0;
    s.b1 = wa / a0;
    s.a1 = (wa - k) / a0;
    c.sections.push_back(s);
  }

  std::vector<double> num{1.0}, den{1.0};
  for (const auto& s : c.sections) {
    const bool first_order = s.b2 == 0.0 && s.a2 == 0.0;
    num = convolve(num, first_order ? std::vector<double>{s.b0, s.b1} : std::vector<double>{s.b0, s.b1, s.b2});
    den = convolve(den, first_order ? std::vector<double>{1.0, s.a1} : std::vector<double>{1.0, s.a1, s.a2});
  }
  c.numerator = std::move(num);
  c.denominator = std::move(den);
  return c;
}

FilterCoefficients design_fir(double cutoff_hz, double window_seconds, double rate) {
  FilterConfig cfg;
  cfg.kind = FilterKind::fir;
  cfg.cutoff_hz = cutoff_hz;
  cfg.window_seconds = window_seconds;
  validate(cfg, rate);

  const std::size_t n = odd_window_length(window_seconds, rate);
  const double fc = cutoff_hz / rate;
  const double mid = static_cast<double>(n - 1) / 2.0;
  std::vector<double> taps(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = n > 1 ? 0.54 - 0.46 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n - 1)) : 1.0;
    taps[i] = 2.0 * fc * sinc(2.0 * fc * (static_cast<double>(i) - mid)) * w;
    sum += taps[i];
  }
  for (auto& t : taps) t /= sum;

  FilterCoefficients c;
  c.kind = FilterKind::fir;
  c.numerator = std::move(taps);
  c.design_rate = rate;
  return c;
}

FilterCoefficients design_savgol(double window_seconds, int poly_degree, double rate, bool eval_at_end) {
  FilterConfig cfg;
  cfg.kind = FilterKind::savgol;
  cfg.window_seconds = window_seconds;
  cfg.poly_degree = poly_degree;
  validate(cfg, rate);

  const auto n = static_cast<Eigen::Index>(odd_window_length(window_seconds, rate));
  const Eigen::Index cols = poly_degree + 1;
  const double anchor = eval_at_end ? static_cast<double>(n - 1) : static_cast<double>(n - 1) / 2.0;
  const double scale = std::max(1.0, static_cast<double>(n - 1) / 2.0);

  // Rows are window positions (oldest first), columns are powers of the
  // offset from the evaluation point; the fitted value there is coefficient 0.
  Eigen::MatrixXd vander(n, cols);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double u = (static_cast<double>(j) - anchor) / scale;
    double p = 1.0;
    for (Eigen::Index q = 0; q < cols; ++q) {
      vander(j, q) = p;
      p *= u;
    }
  }
  const Eigen::MatrixXd pinv = vander.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(n, n));
  // Tap k multiplies x[newest - k]; window position j = n-1-k.
  std::vector<double> taps(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) taps[static_cast<std::size_t>(k)] = pinv(0, n - 1 - k);

  FilterCoefficients c;
  c.kind = FilterKind::savgol;
  c.mode = eval_at_end ? FilterMode::causal : FilterMode::zero_phase;
  c.numerator = std::move(taps);
  c.design_rate = rate;
  return c;
}

FilterCoefficients design(const FilterConfig& config, double rate) {
  FilterCoefficients c;
  switch (config.kind) {
    case FilterKind::butterworth: c = design_butterworth(config.cutoff_hz, config.order, rate); break;
    case FilterKind::fir: c = design_fir(config.cutoff_hz, config.window_seconds, rate); break;
    case FilterKind::savgol:
      c = design_savgol(config.window_seconds, config.poly_degree, rate, config.mode == FilterMode::causal);
      break;
  }
  c.mode = config.mode;
  return c;
}

double magnitude_at(const FilterCoefficients& coeffs, double freq_hz) {
  const double w = 2.0 * kPi * freq_hz / coeffs.design_rate;
  auto eval = [&](const std::vector<double>& p) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t k = 0; k < p.size(); ++k) acc += p[k] * std::polar(1.0, -w * static_cast<double>(k));
    return acc;
  };
  return std::abs(eval(coeffs.numerator) / eval(coeffs.denominator));
}

double dc_group_delay(const FilterCoefficients& coeffs) {
  auto centroid = [](const std::vector<double>& p) {
    double s = 0.0, m = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      s += p[k];
      m += static_cast<double>(k) * p[k];
    }
    return m / s;
  };
  return centroid(coeffs.numerator) - centroid(coeffs.denominator);
}

CausalFilter::CausalFilter(const FilterCoefficients& coeffs, InitialState init) : init_(init) {
  auto add_stage = [&](std::vector<double> b, std::vector<double> a) {
    const std::size_t len = std::max(b.size(), a.size());
    b.resize(len, 0.0);
    a.resize(len, 0.0);
    Stage st;
    double sb = 0.0, sa = 0.0;
    for (double v : b) sb += v;
    for (double v : a) sa += v;
    st.gain = sb / sa;
    st.b = std::move(b);
    st.a = std::move(a);
    st.z.assign(len - 1, 0.0);
    stages_.push_back(std::move(st));
  };
  if (!coeffs.sections.empty()) {
    for (const auto& s : coeffs.sections) add_stage({s.b0, s.b1, s.b2}, {1.0, s.a1, s.a2});
  } else {
    add_stage(coeffs.numerator, coeffs.denominator);
  }
}

void CausalFilter::reset() {
  for (auto& st : stages_) std::fill(st.z.begin(), st.z.end(), 0.0);
  primed_ = false;
}

double CausalFilter::step(double x) {
  const bool prime = !primed_ && init_ == InitialState::step_matched;
  primed_ = true;
  double v = x;
  for (auto& st : stages_) {
    const std::size_t order = st.z.size();
    if (prime) {
      // Steady state for a constant input v with output gain*v.
      for (std::size_t i = 0; i < order; ++i) {
        double acc = 0.0;
        for (std::size_t k = i + 1; k <= order; ++k) acc += st.b[k] - st.a[k] * st.gain;
        st.z[i] = acc * v;
      }
    }
    const double y = st.b[0] * v + (order > 0 ? st.z[0] : 0.0);
    for (std::size_t i = 0; i + 1 < order; ++i) st.z[i] = st.b[i + 1] * v - st.a[i + 1] * y + st.z[i + 1];
    if (order > 0) st.z[order - 1] = st.b[order] * v - st.a[order] * y;
    v = y;
  }
  return v;
}

std::vector<double> apply_causal(const FilterCoefficients& coeffs, std::span<const double> series, InitialState init) {
  if (series.empty()) throw Error(ErrorCode::invalid_argument, "cannot filter an empty series");
  std::vector<double> out(series.begin(), series.end());
  CausalFilter filter(coeffs, init);
  run_causal(filter, out);
  return out;
}

std::size_t zero_phase_min_length(const FilterCoefficients& coeffs) { return 3 * coeffs.length() + 1; }

std::vector<double> apply_zero_phase(const FilterCoefficients& coeffs, std::span<const double> series) {
  const std::size_t min_len = zero_phase_min_length(coeffs);
  if (series.size() < min_len) {
    throw Error(ErrorCode::invalid_argument, "zero-phase filtering needs at least " + std::to_string(min_len) +
                                                 " samples, got " + std::to_string(series.size()));
  }
  const std::size_t pad = 3 * coeffs.length();
  std::vector<double> ext = odd_extend(series, pad);

  if (coeffs.kind == FilterKind::savgol) {
    const std::size_t n = coeffs.numerator.size();
    const std::size_t half = (n - 1) / 2;
    std::vector<double> out(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
      const std::size_t center = i + pad;
      double acc = 0.0;
      // numerator[k] weights the sample k steps before the window's end.
      for (std::size_t k = 0; k < n; ++k) acc += coeffs.numerator[k] * ext[center + half - k];
      out[i] = acc;
    }
    return out;
  }

  // Forward-backward and backward-forward passes are averaged so the result
  // is exactly equivariant under time reversal, edges included.
  auto two_pass = [&](std::vector<double>& v) {
    CausalFilter first(coeffs);
    run_causal(first, v);
    std::reverse(v.begin(), v.end());
    CausalFilter second(coeffs);
    run_causal(second, v);
    std::reverse(v.begin(), v.end());
  };
  std::vector<double> fb = ext;
  two_pass(fb);
  std::vector<double> bf(ext.rbegin(), ext.rend());
  two_pass(bf);
  std::reverse(bf.begin(), bf.end());
  std::vector<double> out(series.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = 0.5 * (fb[pad + i] + bf[pad + i]);
  return out;
}

std::vector<double> apply(const FilterCoefficients& coeffs, std::span<const double> series) {
  return coeffs.mode == FilterMode::causal ? apply_causal(coeffs, series) : apply_zero_phase(coeffs, series);
}

std::vector<double> differentiate(std::span<const double> series, double rate) {
  const std::size_t n = series.size();
  if (n < 3) throw Error(ErrorCode::invalid_argument, "differentiation needs at least 3 samples");
  std::vector<double> d(n);
  const double h = rate / 2.0;
  d[0] = (-3.0 * series[0] + 4.0 * series[1] - series[2]) * h;
  for (std::size_t k = 1; k + 1 < n; ++k) d[k] = (series[k + 1] - series[k - 1]) * h;
  d[n - 1] = (3.0 * series[n - 1] - 4.0 * series[n - 2] + series[n - 3]) * h;
  return d;
}

}  // namespace trucklens::filters
