#pragma once

#include "cspr/preprocess.hpp"
#include "cspr/spatial_filter.hpp"
#include "cspr/trials.hpp"

#include <filesystem>
#include <string>

namespace cspr::io {

// Every dataset is a JSON manifest plus a raw little-endian float64 payload
// whose path (`data_file`) is relative to the manifest's directory.
//
// Session manifest:
//   {"format": "cspr-session", "version": 1, "subject_id", "sample_rate_hz",
//    "channels": [names], "events": [{"onset_s", "rt_s"}], "data_file"}
//   payload: channel-major, channel 0 samples first.
//
// Trial-set manifest:
//   {"format": "cspr-trials", "version": 1, "sample_rate_hz", "channels",
//    "samples", "trials", "targets": [...], "data_file"}
//   payload: trial after trial, each channel-major.
//
// All read failures, including a missing file, throw ErrorKind::Format.

void write_session(const std::filesystem::path& manifest, const SessionRecord& session,
                   const std::string& data_file = "");
SessionRecord read_session(const std::filesystem::path& manifest);

void write_trial_set(const std::filesystem::path& manifest, const LabeledTrialSet& data,
                     const std::string& data_file = "");
LabeledTrialSet read_trial_set(const std::filesystem::path& manifest);

void write_filter_bank(const std::filesystem::path& path, const FilterBank& bank);
FilterBank read_filter_bank(const std::filesystem::path& path);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace cspr::io
