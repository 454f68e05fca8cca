#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace trucklens::filters {

enum class FilterKind { butterworth, fir, savgol };
enum class FilterMode { causal, zero_phase };

std::string_view to_string(FilterKind kind);
std::string_view to_string(FilterMode mode);
FilterKind parse_filter_kind(std::string_view name);
FilterMode parse_filter_mode(std::string_view name);

/// Parameters of one smoothing stage. Defaults: 1 Hz first-order Butterworth,
/// 0.5 s window and degree 2 for the windowed families, zero-phase.
struct FilterConfig {
  FilterKind kind = FilterKind::butterworth;
  double cutoff_hz = 1.0;
  int order = 1;
  double window_seconds = 0.5;
  int poly_degree = 2;
  FilterMode mode = FilterMode::zero_phase;

  bool operator==(const FilterConfig&) const = default;
};

/// Normalized biquad (a0 == 1). First-order sections have b2 == a2 == 0.
struct Section {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

/// Designed filter. `numerator`/`denominator` hold the expanded transfer
/// function; recursive designs are applied through `sections`.
struct FilterCoefficients {
  FilterKind kind = FilterKind::fir;
  FilterMode mode = FilterMode::zero_phase;
  std::vector<double> numerator;
  std::vector<double> denominator{1.0};
  std::vector<Section> sections;
  double design_rate = 0.0;

  std::size_t length() const;
  double dc_gain() const;
};

/// Odd tap count closest to `seconds * rate` (at least 1).
std::size_t odd_window_length(double seconds, double rate);

/// Throws Error(design) when the config is not realizable at `rate`.
void validate(const FilterConfig& config, double rate);

FilterCoefficients design(const FilterConfig& config, double rate);

FilterCoefficients design_butterworth(double cutoff_hz, int order, double rate);
FilterCoefficients design_fir(double cutoff_hz, double window_seconds, double rate);
/// Least-squares polynomial smoothing taps. `eval_at_end` selects the
/// trailing-window variant (fit evaluated at the newest sample).
FilterCoefficients design_savgol(double window_seconds, int poly_degree, double rate, bool eval_at_end = false);

/// Frequency response magnitude at `freq_hz`.
double magnitude_at(const FilterCoefficients& coeffs, double freq_hz);

/// DC group delay in samples.
double dc_group_delay(const FilterCoefficients& coeffs);

enum class InitialState {
  step_matched,  // state as if the first value had been applied forever
  rest,          // all-zero history
};

/// Stateful transposed direct-form II filter. Shared by the batch and
/// streaming paths so both produce identical arithmetic.
class CausalFilter {
 public:
  explicit CausalFilter(const FilterCoefficients& coeffs, InitialState init = InitialState::step_matched);

  double step(double x);
  void reset();

 private:
  struct Stage {
    std::vector<double> b, a, z;
    double gain = 1.0;
  };

  std::vector<Stage> stages_;
  InitialState init_;
  bool primed_ = false;
};

std::vector<double> apply_causal(const FilterCoefficients& coeffs, std::span<const double> series,
                                 InitialState init = InitialState::step_matched);

/// Minimum series length accepted by apply_zero_phase.
std::size_t zero_phase_min_length(const FilterCoefficients& coeffs);

/// Forward-backward filtering with odd reflective padding of 3x the filter
/// length. Savitzky-Golay designs are applied once as a centered window.
std::vector<double> apply_zero_phase(const FilterCoefficients& coeffs, std::span<const double> series);

/// Applies according to `coeffs.mode`.
std::vector<double> apply(const FilterCoefficients& coeffs, std::span<const double> series);

/// Second-order central differences with one-sided second-order edges,
/// scaled by `rate`.
std::vector<double> differentiate(std::span<const double> series, double rate);

}  // namespace trucklens::filters
