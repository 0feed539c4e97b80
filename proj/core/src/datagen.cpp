#include "cspr/datagen.hpp"

#include "cspr/dsp.hpp"
#include "cspr/error.hpp"
#include "cspr/parallel.hpp"
#include "cspr/rng.hpp"

#include <Eigen/QR>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <optional>
#include <random>
#include <string>

namespace cspr {

namespace {

enum Stream : std::uint64_t {
  kMixing = 1,
  kLatent = 2,
  kSourceWave = 3,
  kNoise = 4,
  kEvents = 5,
};

double source_gain(const SynthSpec& spec, Eigen::Index j) { return j == 0 ? 1.0 : spec.distractor_gain; }

double truncated_normal(Rng& rng, double sd) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (;;) {
    const double z = normal(rng);
    if (std::abs(z) <= 3.0) return sd * z;
  }
}

}  // namespace

void SynthSpec::validate() const {
  require(channels >= 2 && samples >= 2 && trials >= 1, ErrorKind::InvalidArgument,
          "synth: need channels >= 2, samples >= 2 and trials >= 1");
  require(sources >= 1 && sources <= channels, ErrorKind::InvalidArgument,
          "synth: source count must lie in [1, channels]");
  require(noise_ratio >= 0.0 && std::isfinite(noise_ratio), ErrorKind::InvalidArgument,
          "synth: noise ratio must be non-negative");
  require(sample_rate_hz > 0.0 && source_low_hz > 0.0 && source_low_hz < source_high_hz &&
              source_high_hz < sample_rate_hz / 2.0,
          ErrorKind::InvalidArgument, "synth: source band must lie inside (0, Nyquist)");
  require(distractor_gain >= 0.0 && std::isfinite(distractor_gain), ErrorKind::InvalidArgument,
          "synth: distractor gain must be non-negative");
  require(logvar_spread >= 0.0 && target_slope > 0.0, ErrorKind::InvalidArgument,
          "synth: target slope must be positive and log-variance spread non-negative");
  require(target_center - 3.0 * logvar_spread * target_slope > 0.0, ErrorKind::InvalidArgument,
          "synth: target link can produce non-positive targets");
  require(gap_min_s > 0.0 && gap_min_s <= gap_max_s && session_duration_s > gap_max_s, ErrorKind::InvalidArgument,
          "synth: bad session timing");
  require(outlier_fraction >= 0.0 && outlier_fraction <= 1.0 && outlier_scale >= 1.0, ErrorKind::InvalidArgument,
          "synth: bad outlier settings");
}

nlohmann::json SynthSpec::to_json() const {
  return {{"channels", channels},
          {"samples", samples},
          {"sample_rate_hz", sample_rate_hz},
          {"trials", trials},
          {"sources", sources},
          {"noise_ratio", noise_ratio},
          {"source_low_hz", source_low_hz},
          {"source_high_hz", source_high_hz},
          {"logvar_spread", logvar_spread},
          {"distractor_gain", distractor_gain},
          {"target_center", target_center},
          {"target_slope", target_slope},
          {"bandpass", bandpass},
          {"band_low_hz", band_low_hz},
          {"band_high_hz", band_high_hz},
          {"num_taps", num_taps},
          {"session_duration_s", session_duration_s},
          {"gap_min_s", gap_min_s},
          {"gap_max_s", gap_max_s},
          {"outlier_fraction", outlier_fraction},
          {"outlier_scale", outlier_scale}};
}

SynthSpec SynthSpec::from_json(const nlohmann::json& doc) {
  SynthSpec s;
  auto get = [&](const char* key, auto& field) {
    if (doc.contains(key)) field = doc.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("channels", s.channels);
  get("samples", s.samples);
  get("sample_rate_hz", s.sample_rate_hz);
  get("trials", s.trials);
  get("sources", s.sources);
  get("noise_ratio", s.noise_ratio);
  get("source_low_hz", s.source_low_hz);
  get("source_high_hz", s.source_high_hz);
  get("logvar_spread", s.logvar_spread);
  get("distractor_gain", s.distractor_gain);
  get("target_center", s.target_center);
  get("target_slope", s.target_slope);
  get("bandpass", s.bandpass);
  get("band_low_hz", s.band_low_hz);
  get("band_high_hz", s.band_high_hz);
  get("num_taps", s.num_taps);
  get("session_duration_s", s.session_duration_s);
  get("gap_min_s", s.gap_min_s);
  get("gap_max_s", s.gap_max_s);
  get("outlier_fraction", s.outlier_fraction);
  get("outlier_scale", s.outlier_scale);
  return s;
}

Matrix random_orthonormal(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  require(cols >= 1 && cols <= rows, ErrorKind::InvalidArgument, "random_orthonormal: need 1 <= cols <= rows");
  auto rng = make_rng(seed, {kMixing});
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(g.rows(), g.cols());
  normalize_column_signs(q);
  return q;
}

Matrix planted_mixing(std::size_t channels, std::size_t sources, std::uint64_t seed) {
  require(sources >= 1 && sources <= channels, ErrorKind::InvalidArgument, "planted_mixing: need 1 <= sources <= channels");
  auto rng = make_rng(seed, {kMixing});
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  const auto rows = static_cast<Eigen::Index>(channels);
  Matrix g(rows, static_cast<Eigen::Index>(sources));
  for (Eigen::Index i = 0; i < rows; ++i) g(i, 0) = coin(rng) ? 1.0 : -1.0;
  for (Eigen::Index j = 1; j < g.cols(); ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) g(i, j) = normal(rng);
  }
  // Householder QR keeps span(g_1) as the first column, so |A_c1| = 1/sqrt(C).
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(rows, g.cols());
  normalize_column_signs(q);
  return q;
}

std::vector<double> band_limited_noise(std::size_t length, double sample_rate_hz, double low_hz, double high_hz,
                                       std::uint64_t seed, std::uint64_t stream) {
  require(length >= 4, ErrorKind::InvalidArgument, "band_limited_noise: length must be >= 4");
  auto rng = make_rng(seed, {kSourceWave, stream});
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<std::complex<double>> spectrum(length, {0.0, 0.0});
  std::size_t active = 0;
  for (std::size_t k = 1; 2 * k < length; ++k) {
    const double f = static_cast<double>(k) * sample_rate_hz / static_cast<double>(length);
    if (f < low_hz || f > high_hz) continue;
    const double re = normal(rng);
    const double im = normal(rng);
    spectrum[k] = {re, im};
    spectrum[length - k] = {re, -im};
    ++active;
  }
  require(active > 0, ErrorKind::InvalidArgument, "band_limited_noise: band contains no frequency bins");

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> time;
  fft.inv(time, spectrum);
  std::vector<double> out(length);
  double mean = 0.0;
  for (std::size_t i = 0; i < length; ++i) {
    out[i] = time[i].real();
    mean += out[i];
  }
  mean /= static_cast<double>(length);
  double ss = 0.0;
  for (auto& v : out) {
    v -= mean;
    ss += v * v;
  }
  const double sd = std::sqrt(ss / static_cast<double>(length - 1));
  for (auto& v : out) v /= sd;
  return out;
}

SynthWorld generate_trials(const SynthSpec& spec, std::uint64_t seed, std::size_t jobs) {
  spec.validate();
  const auto c = static_cast<Eigen::Index>(spec.channels);
  const auto s = static_cast<Eigen::Index>(spec.samples);
  const auto m = static_cast<Eigen::Index>(spec.sources);

  SynthWorld world;
  world.mixing = planted_mixing(spec.channels, spec.sources, seed);
  world.data.sample_rate_hz = spec.sample_rate_hz;
  world.data.trials.resize(spec.trials);
  world.data.targets.resize(spec.trials);
  world.source_logvar.resize(spec.trials);

  // Latents drawn sequentially so they do not depend on the job count.
  Matrix latent(static_cast<Eigen::Index>(spec.trials), m);
  {
    auto rng = make_rng(seed, {kLatent});
    for (Eigen::Index n = 0; n < latent.rows(); ++n) {
      for (Eigen::Index j = 0; j < m; ++j) latent(n, j) = truncated_normal(rng, spec.logvar_spread);
    }
  }

  parallel_for(spec.trials, jobs, [&](std::size_t n) {
    const auto row = static_cast<Eigen::Index>(n);
    Matrix sources(m, s);
    for (Eigen::Index j = 0; j < m; ++j) {
      const auto wave = band_limited_noise(spec.samples, spec.sample_rate_hz, spec.source_low_hz, spec.source_high_hz,
                                           seed, n * spec.sources + static_cast<std::size_t>(j));
      const double amp = source_gain(spec, j) * std::exp(0.5 * latent(row, j));
      for (Eigen::Index t = 0; t < s; ++t) sources(j, t) = amp * wave[static_cast<std::size_t>(t)];
    }
    world.data.trials[n] = world.mixing * sources;
    world.source_logvar[n] = latent(row, 0);
    world.data.targets[n] = spec.target_center + spec.target_slope * world.source_logvar[n];
  });

  double power = 0.0;
  for (const auto& x : world.data.trials) power += x.squaredNorm();
  const double rms = std::sqrt(power / static_cast<double>(spec.trials * spec.channels * spec.samples));
  const double noise_sd = spec.noise_ratio * rms;

  std::optional<FirFilter> filter;
  if (spec.bandpass) filter = design_bandpass(spec.band_low_hz, spec.band_high_hz, spec.sample_rate_hz, spec.num_taps);

  parallel_for(spec.trials, jobs, [&](std::size_t n) {
    auto& x = world.data.trials[n];
    if (noise_sd > 0.0) {
      auto rng = make_rng(seed, {kNoise, n});
      std::normal_distribution<double> normal(0.0, noise_sd);
      for (Eigen::Index j = 0; j < s; ++j) {
        for (Eigen::Index i = 0; i < c; ++i) x(i, j) += normal(rng);
      }
    }
    if (filter) x = filter_trial(*filter, x);
  });
  return world;
}

SynthSession generate_session(const SynthSpec& spec, std::uint64_t seed, const std::string& subject_id) {
  spec.validate();
  const double fs = spec.sample_rate_hz;
  const auto total = static_cast<std::size_t>(std::llround(spec.session_duration_s * fs));
  const auto c = static_cast<Eigen::Index>(spec.channels);
  const auto m = static_cast<Eigen::Index>(spec.sources);
  const double window_s = 3.0;

  SynthSession out;
  out.mixing = planted_mixing(spec.channels, spec.sources, seed);
  out.session.subject_id = subject_id;
  out.session.sample_rate_hz = fs;
  for (std::size_t i = 0; i < spec.channels; ++i) out.session.channel_names.push_back("ch" + std::to_string(i + 1));

  auto rng = make_rng(seed, {kEvents});
  std::uniform_real_distribution<double> gap(spec.gap_min_s, spec.gap_max_s);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::vector<double>> latents;
  for (double t = gap(rng); t < spec.session_duration_s - 1.0; t += gap(rng)) {
    std::vector<double> z(static_cast<std::size_t>(m));
    for (auto& v : z) v = truncated_normal(rng, spec.logvar_spread);
    const double y = spec.target_center + spec.target_slope * z[0];
    double rt = 1.0 / y;
    if (unit(rng) < spec.outlier_fraction) rt *= spec.outlier_scale;
    out.session.events.push_back({t, rt});
    out.response_speeds.push_back(y);
    latents.push_back(std::move(z));
  }

  Matrix sources(m, static_cast<Eigen::Index>(total));
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto wave = band_limited_noise(total, fs, spec.source_low_hz, spec.source_high_hz, seed,
                                         0x5e55000ULL + static_cast<std::uint64_t>(j));
    std::vector<double> amp(total, source_gain(spec, j));
    for (std::size_t e = 0; e < out.session.events.size(); ++e) {
      const double onset = out.session.events[e].onset_s;
      const auto begin = static_cast<long long>(std::llround(std::max(0.0, onset - window_s) * fs));
      const auto end = std::min<long long>(static_cast<long long>(std::llround(onset * fs)), static_cast<long long>(total));
      const double a = source_gain(spec, j) * std::exp(0.5 * latents[e][static_cast<std::size_t>(j)]);
      for (long long t = begin; t < end; ++t) amp[static_cast<std::size_t>(t)] = a;
    }
    for (std::size_t t = 0; t < total; ++t) sources(j, static_cast<Eigen::Index>(t)) = amp[t] * wave[t];
  }
  out.session.eeg = out.mixing * sources;

  const double rms = std::sqrt(out.session.eeg.squaredNorm() / static_cast<double>(out.session.eeg.size()));
  if (spec.noise_ratio > 0.0) {
    auto noise_rng = make_rng(seed, {kNoise, 0x5e55ULL});
    std::normal_distribution<double> normal(0.0, spec.noise_ratio * rms);
    for (Eigen::Index t = 0; t < out.session.eeg.cols(); ++t) {
      for (Eigen::Index i = 0; i < c; ++i) out.session.eeg(i, t) += normal(noise_rng);
    }
  }
  return out;
}

}  // namespace cspr
