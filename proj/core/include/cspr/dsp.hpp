#pragma once

#include "cspr/linalg.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace cspr {

/// Linear-phase FIR filter designed by the windowed-sinc method (Hamming).
struct FirFilter {
  std::vector<double> taps;
  double low_hz = 0.0;   ///< 0 for a low-pass design
  double high_hz = 0.0;
  double sample_rate_hz = 0.0;

  std::size_t num_taps() const noexcept { return taps.size(); }
};

inline constexpr std::size_t kDefaultBandpassTaps = 255;

/// Windowed-sinc band-pass. Each low-pass prototype is scaled to unit DC
/// gain, so the band-pass sums to exactly zero at DC.
FirFilter design_bandpass(double low_hz, double high_hz, double sample_rate_hz,
                          std::size_t num_taps = kDefaultBandpassTaps);

FirFilter design_lowpass(double cutoff_hz, double sample_rate_hz, std::size_t num_taps);

/// |H(f)| evaluated by a direct DTFT of the taps.
double frequency_response(const FirFilter& filter, double freq_hz);

/// Zero-phase forward-backward filtering of a single signal, with odd
/// reflection padding of min(3 (taps - 1), length - 1) samples on each end.
std::vector<double> filtfilt(const FirFilter& filter, std::span<const double> signal);

/// Zero-phase filtering of every channel (row), followed by removal of the
/// small residual channel mean. Requires more samples than taps.
Matrix filter_trial(const FirFilter& filter, const Matrix& trial);

/// Integer decimation ratio between two rates; throws when it is not an integer.
std::size_t decimation_factor(double from_hz, double to_hz);

/// Anti-aliasing low-pass used by downsample (cutoff 0.45 x new Nyquist).
FirFilter anti_alias_filter(std::size_t factor, double sample_rate_hz = 1.0);

/// Low-pass then keep every factor-th sample. factor == 1 returns the input.
Matrix downsample(const Matrix& trial, std::size_t factor);

struct PsdEstimate {
  std::vector<double> freqs;
  std::vector<double> power;  ///< one-sided, signal^2 / Hz
  std::size_t segment_len = 0;
  double overlap_fraction = 0.5;
};

/// Welch's method: Hamming-windowed overlapping segments, averaged
/// periodograms, one-sided, normalized by window power.
PsdEstimate welch_psd(std::span<const double> signal, double sample_rate_hz, std::size_t segment_len,
                      double overlap_fraction = 0.5);

inline constexpr double kPowerFloor = 1e-20;

/// 10 log10 of the mean PSD over bins with low <= f <= high.
double band_power_db(const PsdEstimate& psd, double low_hz, double high_hz);

}  // namespace cspr
