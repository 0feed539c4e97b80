#include "cspr/preprocess.hpp"

#include "cspr/dsp.hpp"
#include "cspr/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace cspr {

void SessionRecord::validate() const {
  require(sample_rate_hz > 0.0 && std::isfinite(sample_rate_hz), ErrorKind::Format,
          "session: sample rate must be positive");
  require(eeg.rows() >= 1 && eeg.cols() >= 1, ErrorKind::Format, "session: empty EEG");
  require(channel_names.empty() || channel_names.size() == static_cast<std::size_t>(eeg.rows()),
          ErrorKind::Format, "session: channel names do not match the EEG channel count");
  for (std::size_t i = 0; i < events.size(); ++i) {
    require(std::isfinite(events[i].onset_s) && std::isfinite(events[i].rt_s), ErrorKind::Format,
            "session: event " + std::to_string(i) + " is not finite");
    require(events[i].rt_s > 0.0, ErrorKind::Format, "session: event " + std::to_string(i) + " has RT <= 0");
    if (i > 0) {
      require(events[i].onset_s > events[i - 1].onset_s, ErrorKind::Format,
              "session: onsets must be strictly increasing (event " + std::to_string(i) + ")");
    }
  }
}

EpochResult epoch(const SessionRecord& session, std::span<const std::size_t> event_indices, double window_s) {
  require(window_s > 0.0 && std::isfinite(window_s), ErrorKind::InvalidArgument, "epoch: window must be positive");
  const auto length = static_cast<long long>(std::llround(window_s * session.sample_rate_hz));
  require(length >= 1, ErrorKind::InvalidArgument, "epoch: window shorter than one sample");
  const auto total = static_cast<long long>(session.eeg.cols());

  EpochResult out;
  for (auto idx : event_indices) {
    require(idx < session.events.size(), ErrorKind::InvalidArgument, "epoch: event index out of range");
    const double onset = session.events[idx].onset_s;
    if (onset < window_s) {
      out.skipped.push_back({idx, "onset " + std::to_string(onset) + " s is earlier than the " +
                                      std::to_string(window_s) + " s window"});
      continue;
    }
    const auto start = static_cast<long long>(std::llround((onset - window_s) * session.sample_rate_hz));
    if (start < 0 || start + length > total) {
      out.skipped.push_back({idx, "window extends past the end of the recording"});
      continue;
    }
    out.trials.emplace_back(session.eeg.middleCols(start, length));
    out.event_indices.push_back(idx);
  }
  return out;
}

EpochResult epoch(const SessionRecord& session, double window_s) {
  std::vector<std::size_t> all(session.events.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return epoch(session, all, window_s);
}

std::vector<std::size_t> remove_overlaps(std::span<const Event> events, double window_s) {
  std::vector<std::size_t> kept;
  for (std::size_t n = 0; n < events.size(); ++n) {
    if (n > 0 && events[n].onset_s - events[n - 1].onset_s < events[n - 1].rt_s + window_s) continue;
    kept.push_back(n);
  }
  return kept;
}

ThresholdResult threshold_outliers(std::span<const double> rts) {
  require(rts.size() >= 2, ErrorKind::Degenerate, "threshold_outliers: need at least 2 response times");
  double mean = 0.0;
  for (double v : rts) {
    require(std::isfinite(v) && v > 0.0, ErrorKind::InvalidArgument, "threshold_outliers: response times must be positive");
    mean += v;
  }
  mean /= static_cast<double>(rts.size());
  double ss = 0.0;
  for (double v : rts) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(rts.size() - 1));

  ThresholdResult out;
  out.theta = mean + 3.0 * sd;
  out.values.assign(rts.begin(), rts.end());
  out.clipped.assign(rts.size(), false);
  for (std::size_t i = 0; i < rts.size(); ++i) {
    if (out.values[i] > out.theta) {
      out.values[i] = out.theta;
      out.clipped[i] = true;
    }
  }
  return out;
}

std::vector<double> smooth_rts(std::span<const double> onsets_s, std::span<const double> rts, double window_s) {
  require(onsets_s.size() == rts.size(), ErrorKind::Dimension, "smooth_rts: onset and RT counts differ");
  require(window_s >= 0.0, ErrorKind::InvalidArgument, "smooth_rts: window must be non-negative");
  const double half = window_s / 2.0;
  std::vector<double> out(rts.size());
  std::size_t lo = 0;
  std::size_t hi = 0;
  for (std::size_t n = 0; n < rts.size(); ++n) {
    while (hi < rts.size() && onsets_s[hi] <= onsets_s[n] + half) ++hi;
    while (onsets_s[lo] < onsets_s[n] - half) ++lo;
    double sum = 0.0;
    for (std::size_t i = lo; i < hi; ++i) sum += rts[i];
    out[n] = sum / static_cast<double>(hi - lo);
  }
  return out;
}

std::vector<double> to_response_speed(std::span<const double> rts) {
  std::vector<double> out(rts.size());
  for (std::size_t i = 0; i < rts.size(); ++i) {
    require(std::isfinite(rts[i]) && rts[i] > 0.0, ErrorKind::InvalidArgument,
            "to_response_speed: response time must be positive");
    out[i] = 1.0 / rts[i];
  }
  return out;
}

PreprocessResult preprocess_subject(std::span<const SessionRecord> sessions, const PreprocessOptions& options) {
  require(!sessions.empty(), ErrorKind::InvalidArgument, "preprocess: no sessions");

  // Resample first so epoch boundaries are in the working rate.
  std::vector<SessionRecord> working(sessions.begin(), sessions.end());
  double rate = working.front().sample_rate_hz;
  for (auto& s : working) {
    s.validate();
    require(s.subject_id == working.front().subject_id, ErrorKind::InvalidArgument,
            "preprocess: sessions belong to different subjects");
    if (options.target_rate_hz > 0.0 && options.target_rate_hz != s.sample_rate_hz) {
      const auto factor = decimation_factor(s.sample_rate_hz, options.target_rate_hz);
      s.eeg = downsample(s.eeg, factor);
      s.sample_rate_hz /= static_cast<double>(factor);
    }
    require(s.sample_rate_hz == rate || options.target_rate_hz > 0.0, ErrorKind::InvalidArgument,
            "preprocess: sessions have different sample rates");
    require(s.eeg.rows() == working.front().eeg.rows(), ErrorKind::Format,
            "preprocess: sessions have different channel counts");
  }
  rate = working.front().sample_rate_hz;

  std::vector<std::vector<std::size_t>> kept(working.size());
  std::vector<double> pooled;
  for (std::size_t s = 0; s < working.size(); ++s) {
    kept[s] = remove_overlaps(working[s].events, options.window_s);
    for (auto i : kept[s]) pooled.push_back(working[s].events[i].rt_s);
  }
  const auto clipped = threshold_outliers(pooled);

  const auto filter = design_bandpass(options.band_low_hz, options.band_high_hz, rate, options.num_taps);

  PreprocessResult result;
  result.theta = clipped.theta;
  result.data.sample_rate_hz = rate;
  std::size_t offset = 0;
  for (std::size_t s = 0; s < working.size(); ++s) {
    const auto& session = working[s];
    const auto& idx = kept[s];
    std::vector<double> onsets(idx.size());
    std::vector<double> rts(idx.size());
    SessionSummary summary;
    summary.subject_id = session.subject_id;
    summary.events = session.events.size();
    for (std::size_t j = 0; j < idx.size(); ++j) {
      onsets[j] = session.events[idx[j]].onset_s;
      rts[j] = clipped.values[offset + j];
      if (clipped.clipped[offset + j]) ++summary.clipped;
    }
    offset += idx.size();

    const auto smoothed = smooth_rts(onsets, rts, options.smooth_window_s);
    const auto speeds = to_response_speed(smoothed);

    std::size_t next_kept = 0;
    for (std::size_t i = 0; i < session.events.size(); ++i) {
      if (next_kept < idx.size() && idx[next_kept] == i) {
        ++next_kept;
      } else {
        summary.dropped_overlap.push_back(i);
      }
    }

    auto epochs = epoch(session, idx, options.window_s);
    summary.skipped_epoch = epochs.skipped;
    for (std::size_t t = 0; t < epochs.trials.size(); ++t) {
      const auto pos = static_cast<std::size_t>(
          std::lower_bound(idx.begin(), idx.end(), epochs.event_indices[t]) - idx.begin());
      result.data.trials.push_back(filter_trial(filter, epochs.trials[t]));
      result.data.targets.push_back(speeds[pos]);
    }
    summary.trials = epochs.trials.size();
    result.sessions.push_back(std::move(summary));
  }
  return result;
}

}  // namespace cspr
