#pragma once

#include "cspr/linalg.hpp"
#include "cspr/preprocess.hpp"
#include "cspr/trials.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace cspr {

/// Synthetic EEG with planted sources: x(t) = A s(t) + noise.
///
/// A has orthonormal columns (see planted_mixing). Every source is band-limited noise in
/// [source_low_hz, source_high_hz], rescaled per trial to variance exp(z) with
/// z ~ N(0, logvar_spread^2) truncated at 3 sd, times a fixed gain (1 for
/// source 1, distractor_gain for the rest). Only source 1 drives the target:
/// y = target_center + target_slope * z_1.
struct SynthSpec {
  std::size_t channels = 16;
  std::size_t samples = 768;
  double sample_rate_hz = 256.0;
  std::size_t trials = 600;
  std::size_t sources = 3;
  double noise_ratio = 0.1;  ///< sensor noise sd / RMS of the noiseless mixture
  double source_low_hz = 4.0;
  double source_high_hz = 13.0;
  double logvar_spread = 1.0;
  double distractor_gain = 3.0;  ///< amplitude of sources 2..c relative to source 1
  double target_center = 2.0;
  double target_slope = 0.3;

  bool bandpass = true;  ///< apply the 1-20 Hz trial filter to trial output
  double band_low_hz = 1.0;
  double band_high_hz = 20.0;
  std::size_t num_taps = 255;

  // Session (response-time) mode.
  double session_duration_s = 600.0;
  double gap_min_s = 2.0;
  double gap_max_s = 10.0;
  double outlier_fraction = 0.02;
  double outlier_scale = 5.0;

  void validate() const;
  nlohmann::json to_json() const;
  static SynthSpec from_json(const nlohmann::json& doc);
};

struct SynthWorld {
  LabeledTrialSet data;
  Matrix mixing;                    ///< C x c, orthonormal columns
  std::vector<double> source_logvar;  ///< z_1 per trial
};

/// Epoched trials with targets. Deterministic in (spec, seed).
SynthWorld generate_trials(const SynthSpec& spec, std::uint64_t seed, std::size_t jobs = 1);

struct SynthSession {
  SessionRecord session;
  Matrix mixing;
  std::vector<double> response_speeds;  ///< noiseless y before outliers
};

/// A continuous recording with PVT-like events at random 2-10 s gaps. The 3 s
/// window before each onset carries source-1 variance tied to that event's
/// response speed; response times are 1/y with occasional outliers.
SynthSession generate_session(const SynthSpec& spec, std::uint64_t seed, const std::string& subject_id = "synth");

/// Mixing matrix of the synthetic world: orthonormal columns, the first
/// (target source) with equal-magnitude random-sign entries so that no single
/// channel carries it preferentially.
Matrix planted_mixing(std::size_t channels, std::size_t sources, std::uint64_t seed);

/// Random C x c matrix with orthonormal columns.
Matrix random_orthonormal(std::size_t rows, std::size_t cols, std::uint64_t seed);

/// Unit-variance real signal whose spectrum is confined to [low, high] Hz.
std::vector<double> band_limited_noise(std::size_t length, double sample_rate_hz, double low_hz, double high_hz,
                                       std::uint64_t seed, std::uint64_t stream);

}  // namespace cspr
