#pragma once

#include "cspr/linalg.hpp"
#include "cspr/trials.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace cspr {

struct Event {
  double onset_s = 0.0;
  double rt_s = 0.0;  ///< response time
};

/// One continuous recording: channels x samples EEG plus stimulus events.
struct SessionRecord {
  std::string subject_id;
  double sample_rate_hz = 256.0;
  std::vector<std::string> channel_names;
  Matrix eeg;
  std::vector<Event> events;

  /// Onsets strictly increasing, response times positive, shape consistent.
  void validate() const;
};

struct SkippedEvent {
  std::size_t event_index;
  std::string reason;
};

struct EpochResult {
  std::vector<Matrix> trials;
  std::vector<std::size_t> event_indices;  ///< source event of each trial
  std::vector<SkippedEvent> skipped;
};

/// Trial n covers samples [round((t_n - window) fs), +round(window fs)).
/// Events whose window falls outside the recording are skipped, not padded.
EpochResult epoch(const SessionRecord& session, std::span<const std::size_t> event_indices,
                  double window_s = 3.0);
EpochResult epoch(const SessionRecord& session, double window_s = 3.0);

/// Indices of events kept by the overlap rule: event n is dropped when
/// t_n - t_{n-1} < RT_{n-1} + window, comparing against the previous event in
/// the raw sequence whether or not that one was kept.
std::vector<std::size_t> remove_overlaps(std::span<const Event> events, double window_s = 3.0);

struct ThresholdResult {
  std::vector<double> values;
  double theta = 0.0;
  std::vector<bool> clipped;
};

/// theta = mean + 3 sd (n - 1); values above theta are replaced by theta.
ThresholdResult threshold_outliers(std::span<const double> rts);

/// Mean of all values whose onsets lie within window/2 of each onset.
std::vector<double> smooth_rts(std::span<const double> onsets_s, std::span<const double> rts,
                               double window_s = 60.0);

std::vector<double> to_response_speed(std::span<const double> rts);

/// Targets after clip, smooth and invert.
struct CleanTargets {
  std::vector<double> response_speeds;
  double theta = 0.0;
  std::vector<bool> clipped;
};

struct PreprocessOptions {
  double window_s = 3.0;
  double smooth_window_s = 60.0;
  double band_low_hz = 1.0;
  double band_high_hz = 20.0;
  std::size_t num_taps = 255;
  double target_rate_hz = 0.0;  ///< 0 keeps the recorded rate
};

struct SessionSummary {
  std::string subject_id;
  std::size_t events = 0;
  std::vector<std::size_t> dropped_overlap;
  std::vector<SkippedEvent> skipped_epoch;
  std::size_t clipped = 0;
  std::size_t trials = 0;
};

struct PreprocessResult {
  LabeledTrialSet data;
  double theta = 0.0;
  std::vector<SessionSummary> sessions;
};

/// Full per-subject pipeline over one or more sessions: overlap removal,
/// pooled outlier threshold, per-session smoothing, RT -> RS, epoching and
/// band-pass filtering of each trial.
PreprocessResult preprocess_subject(std::span<const SessionRecord> sessions, const PreprocessOptions& options);

}  // namespace cspr
