#include "cspr/dsp.hpp"

#include "cspr/error.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

namespace cspr {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> hamming(std::size_t n) {
  std::vector<double> w(n);
  if (n == 1) {
    w[0] = 1.0;
    return w;
  }
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.54 - 0.46 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  return w;
}

// Windowed ideal low-pass with cutoff given as a fraction of the sample rate,
// scaled to unit DC gain.
std::vector<double> windowed_sinc(double cutoff_fraction, const std::vector<double>& window) {
  const auto n = window.size();
  const double mid = static_cast<double>(n - 1) / 2.0;
  std::vector<double> h(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double m = static_cast<double>(i) - mid;
    const double ideal = m == 0.0 ? 2.0 * cutoff_fraction
                                  : std::sin(2.0 * kPi * cutoff_fraction * m) / (kPi * m);
    h[i] = ideal * window[i];
    sum += h[i];
  }
  for (auto& v : h) v /= sum;
  return h;
}

void check_taps(std::size_t num_taps) {
  require(num_taps >= 3 && num_taps % 2 == 1, ErrorKind::InvalidArgument,
          "FIR design: tap count must be odd and >= 3, got " + std::to_string(num_taps));
}

// Causal FIR pass; samples before the start are held at signal[0], which is
// the steady state of an FIR filter fed a constant.
std::vector<double> fir_pass(const std::vector<double>& taps, const std::vector<double>& x) {
  const auto n = x.size();
  const auto m = taps.size();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    if (i + 1 >= m) {
      const double* xp = x.data() + (i + 1 - m);
      // taps[k] multiplies x[i - k]
      for (std::size_t k = 0; k < m; ++k) acc += taps[k] * xp[m - 1 - k];
    } else {
      for (std::size_t k = 0; k < m; ++k) acc += taps[k] * (k <= i ? x[i - k] : x[0]);
    }
    y[i] = acc;
  }
  return y;
}

}  // namespace

FirFilter design_lowpass(double cutoff_hz, double sample_rate_hz, std::size_t num_taps) {
  check_taps(num_taps);
  require(sample_rate_hz > 0.0 && cutoff_hz > 0.0 && cutoff_hz < sample_rate_hz / 2.0,
          ErrorKind::InvalidArgument, "design_lowpass: cutoff must lie in (0, Nyquist)");
  FirFilter f;
  f.low_hz = 0.0;
  f.high_hz = cutoff_hz;
  f.sample_rate_hz = sample_rate_hz;
  f.taps = windowed_sinc(cutoff_hz / sample_rate_hz, hamming(num_taps));
  return f;
}

FirFilter design_bandpass(double low_hz, double high_hz, double sample_rate_hz, std::size_t num_taps) {
  check_taps(num_taps);
  require(sample_rate_hz > 0.0 && low_hz > 0.0 && low_hz < high_hz && high_hz < sample_rate_hz / 2.0,
          ErrorKind::InvalidArgument,
          "design_bandpass: need 0 < low < high < Nyquist, got [" + std::to_string(low_hz) + ", " +
              std::to_string(high_hz) + "] at " + std::to_string(sample_rate_hz) + " Hz");
  const auto window = hamming(num_taps);
  const auto upper = windowed_sinc(high_hz / sample_rate_hz, window);
  const auto lower = windowed_sinc(low_hz / sample_rate_hz, window);
  FirFilter f;
  f.low_hz = low_hz;
  f.high_hz = high_hz;
  f.sample_rate_hz = sample_rate_hz;
  f.taps.resize(num_taps);
  for (std::size_t i = 0; i < num_taps; ++i) f.taps[i] = upper[i] - lower[i];
  // Enforce exact symmetry against rounding in the sinc evaluation.
  for (std::size_t i = 0; i < num_taps / 2; ++i) {
    const double avg = 0.5 * (f.taps[i] + f.taps[num_taps - 1 - i]);
    f.taps[i] = f.taps[num_taps - 1 - i] = avg;
  }
  return f;
}

double frequency_response(const FirFilter& filter, double freq_hz) {
  std::complex<double> acc = 0.0;
  const double omega = 2.0 * kPi * freq_hz / filter.sample_rate_hz;
  for (std::size_t i = 0; i < filter.taps.size(); ++i) {
    acc += filter.taps[i] * std::polar(1.0, -omega * static_cast<double>(i));
  }
  return std::abs(acc);
}

std::vector<double> filtfilt(const FirFilter& filter, std::span<const double> signal) {
  const auto n = signal.size();
  const auto m = filter.taps.size();
  require(n > m, ErrorKind::Degenerate,
          "filtfilt: signal of " + std::to_string(n) + " samples is not longer than the " + std::to_string(m) +
              "-tap filter");
  const std::size_t pad = std::min(3 * (m - 1), n - 1);

  std::vector<double> ext(n + 2 * pad);
  for (std::size_t i = 0; i < pad; ++i) ext[i] = 2.0 * signal[0] - signal[pad - i];
  std::copy(signal.begin(), signal.end(), ext.begin() + static_cast<std::ptrdiff_t>(pad));
  for (std::size_t i = 0; i < pad; ++i) ext[pad + n + i] = 2.0 * signal[n - 1] - signal[n - 2 - i];

  auto forward = fir_pass(filter.taps, ext);
  std::reverse(forward.begin(), forward.end());
  auto backward = fir_pass(filter.taps, forward);
  std::reverse(backward.begin(), backward.end());
  return {backward.begin() + static_cast<std::ptrdiff_t>(pad),
          backward.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

Matrix filter_trial(const FirFilter& filter, const Matrix& trial) {
  require(trial.cols() > static_cast<Eigen::Index>(filter.num_taps()), ErrorKind::Degenerate,
          "filter_trial: trial of " + std::to_string(trial.cols()) + " samples is shorter than the " +
              std::to_string(filter.num_taps()) + "-tap filter");
  Matrix out(trial.rows(), trial.cols());
  std::vector<double> row(static_cast<std::size_t>(trial.cols()));
  for (Eigen::Index c = 0; c < trial.rows(); ++c) {
    for (Eigen::Index s = 0; s < trial.cols(); ++s) row[static_cast<std::size_t>(s)] = trial(c, s);
    const auto y = filtfilt(filter, row);
    for (Eigen::Index s = 0; s < trial.cols(); ++s) out(c, s) = y[static_cast<std::size_t>(s)];
  }
  if (filter.low_hz > 0.0) {
    // A finite window of band-limited signal is not exactly zero-mean.
    out.colwise() -= out.rowwise().mean();
  }
  return out;
}

std::size_t decimation_factor(double from_hz, double to_hz) {
  require(from_hz > 0.0 && to_hz > 0.0 && to_hz <= from_hz, ErrorKind::InvalidArgument,
          "downsample: target rate must be positive and not above the source rate");
  const double ratio = from_hz / to_hz;
  const double rounded = std::round(ratio);
  require(std::abs(ratio - rounded) < 1e-9 * ratio, ErrorKind::InvalidArgument,
          "downsample: " + std::to_string(from_hz) + " Hz -> " + std::to_string(to_hz) +
              " Hz is not an integer factor");
  return static_cast<std::size_t>(rounded);
}

FirFilter anti_alias_filter(std::size_t factor, double sample_rate_hz) {
  require(factor >= 2, ErrorKind::InvalidArgument, "anti_alias_filter: factor must be >= 2");
  const double new_nyquist = sample_rate_hz / static_cast<double>(factor) / 2.0;
  return design_lowpass(0.45 * new_nyquist, sample_rate_hz, 24 * factor + 1);
}

Matrix downsample(const Matrix& trial, std::size_t factor) {
  require(factor >= 1, ErrorKind::InvalidArgument, "downsample: factor must be >= 1");
  if (factor == 1) return trial;
  const auto smoothed = filter_trial(anti_alias_filter(factor), trial);
  const auto kept = (trial.cols() + static_cast<Eigen::Index>(factor) - 1) / static_cast<Eigen::Index>(factor);
  Matrix out(trial.rows(), kept);
  for (Eigen::Index j = 0; j < kept; ++j) out.col(j) = smoothed.col(j * static_cast<Eigen::Index>(factor));
  return out;
}

PsdEstimate welch_psd(std::span<const double> signal, double sample_rate_hz, std::size_t segment_len,
                      double overlap_fraction) {
  require(segment_len >= 2, ErrorKind::InvalidArgument, "welch_psd: segment length must be >= 2");
  require(overlap_fraction >= 0.0 && overlap_fraction < 1.0, ErrorKind::InvalidArgument,
          "welch_psd: overlap must lie in [0, 1)");
  require(sample_rate_hz > 0.0, ErrorKind::InvalidArgument, "welch_psd: sample rate must be positive");
  require(signal.size() >= segment_len, ErrorKind::Degenerate,
          "welch_psd: signal of " + std::to_string(signal.size()) + " samples is shorter than one segment");

  const auto overlap = static_cast<std::size_t>(std::round(overlap_fraction * static_cast<double>(segment_len)));
  const std::size_t step = std::max<std::size_t>(1, segment_len - overlap);
  const std::size_t num_segments = 1 + (signal.size() - segment_len) / step;

  const auto window = hamming(segment_len);
  double window_power = 0.0;
  for (double w : window) window_power += w * w;

  const std::size_t bins = segment_len / 2 + 1;
  std::vector<double> acc(bins, 0.0);
  Eigen::FFT<double> fft;
  std::vector<double> segment(segment_len);
  std::vector<std::complex<double>> spectrum;
  for (std::size_t s = 0; s < num_segments; ++s) {
    const std::size_t start = s * step;
    for (std::size_t i = 0; i < segment_len; ++i) segment[i] = signal[start + i] * window[i];
    fft.fwd(spectrum, segment);
    for (std::size_t k = 0; k < bins; ++k) acc[k] += std::norm(spectrum[k]);
  }

  PsdEstimate psd;
  psd.segment_len = segment_len;
  psd.overlap_fraction = overlap_fraction;
  psd.freqs.resize(bins);
  psd.power.resize(bins);
  const double scale = 1.0 / (sample_rate_hz * window_power * static_cast<double>(num_segments));
  for (std::size_t k = 0; k < bins; ++k) {
    psd.freqs[k] = static_cast<double>(k) * sample_rate_hz / static_cast<double>(segment_len);
    const bool unpaired = k == 0 || (segment_len % 2 == 0 && k == bins - 1);
    psd.power[k] = acc[k] * scale * (unpaired ? 1.0 : 2.0);
  }
  return psd;
}

double band_power_db(const PsdEstimate& psd, double low_hz, double high_hz) {
  require(!psd.freqs.empty() && psd.freqs.size() == psd.power.size(), ErrorKind::InvalidArgument,
          "band_power_db: malformed PSD");
  require(low_hz <= high_hz && low_hz >= psd.freqs.front() - 1e-9 && high_hz <= psd.freqs.back() + 1e-9,
          ErrorKind::InvalidArgument, "band_power_db: band outside the PSD range");
  const double tol = 1e-9 * std::max(1.0, psd.freqs.back());
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < psd.freqs.size(); ++k) {
    if (psd.freqs[k] >= low_hz - tol && psd.freqs[k] <= high_hz + tol) {
      sum += psd.power[k];
      ++count;
    }
  }
  require(count > 0, ErrorKind::Degenerate, "band_power_db: no frequency bins inside the band");
  return 10.0 * std::log10(std::max(sum / static_cast<double>(count), kPowerFloor));
}

}  // namespace cspr
