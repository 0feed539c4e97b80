#include "cspr/io.hpp"

#include "cspr/binary.hpp"
#include "cspr/error.hpp"

#include <fstream>
#include <sstream>

namespace cspr::io {

namespace fs = std::filesystem;

namespace {

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Format, "cannot open '" + path.string() + "'");
  return in;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Format, "cannot create '" + path.string() + "'");
  return out;
}

std::string default_payload(const fs::path& manifest, const std::string& data_file) {
  if (!data_file.empty()) return data_file;
  auto stem = manifest.filename();
  stem.replace_extension(".bin");
  return stem.string();
}

std::uintmax_t payload_doubles(const fs::path& path) {
  std::error_code ec;
  const auto bytes = fs::file_size(path, ec);
  if (ec) fail(ErrorKind::Format, "cannot stat '" + path.string() + "'");
  if (bytes % sizeof(double) != 0) fail(ErrorKind::Format, "'" + path.string() + "' is not a float64 payload");
  return bytes / sizeof(double);
}

template <class Fn>
auto with_format_errors(const fs::path& path, Fn&& fn) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, path.string() + ": " + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Format) throw;
    fail(ErrorKind::Format, path.string() + ": " + e.what());
  }
}

}  // namespace

nlohmann::json read_json(const fs::path& path) {
  auto in = open_in(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const nlohmann::json& doc) {
  write_text(path, doc.dump(2) + "\n");
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!out) fail(ErrorKind::Format, "write failed for '" + path.string() + "'");
}

void write_session(const fs::path& manifest, const SessionRecord& session, const std::string& data_file) {
  const auto payload = default_payload(manifest, data_file);
  nlohmann::json doc;
  doc["format"] = "cspr-session";
  doc["version"] = 1;
  doc["subject_id"] = session.subject_id;
  doc["sample_rate_hz"] = session.sample_rate_hz;
  if (session.channel_names.empty()) {
    doc["channels"] = nlohmann::json::array();
    for (Eigen::Index i = 0; i < session.eeg.rows(); ++i) doc["channels"].push_back("ch" + std::to_string(i + 1));
  } else {
    doc["channels"] = session.channel_names;
  }
  auto& events = doc["events"] = nlohmann::json::array();
  for (const auto& e : session.events) events.push_back({{"onset_s", e.onset_s}, {"rt_s", e.rt_s}});
  doc["data_file"] = payload;

  auto out = open_out(manifest.parent_path() / payload);
  // Row-major copy gives the channel-major on-disk order.
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = session.eeg;
  binary::write_f64(out, std::span<const double>(rows.data(), static_cast<std::size_t>(rows.size())));
  if (!out) fail(ErrorKind::Format, "write failed for session payload");
  write_json(manifest, doc);
}

SessionRecord read_session(const fs::path& manifest) {
  const auto doc = read_json(manifest);
  return with_format_errors(manifest, [&] {
    if (doc.value("format", std::string("cspr-session")) != "cspr-session") {
      fail(ErrorKind::Format, "not a session manifest");
    }
    SessionRecord s;
    s.subject_id = doc.at("subject_id").get<std::string>();
    s.sample_rate_hz = doc.at("sample_rate_hz").get<double>();
    s.channel_names = doc.at("channels").get<std::vector<std::string>>();
    for (const auto& e : doc.at("events")) s.events.push_back({e.at("onset_s").get<double>(), e.at("rt_s").get<double>()});
    const auto payload = manifest.parent_path() / doc.at("data_file").get<std::string>();
    const auto count = payload_doubles(payload);
    const auto channels = s.channel_names.size();
    if (channels == 0 || count % channels != 0) fail(ErrorKind::Format, "payload size is not a multiple of the channel count");
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows(
        static_cast<Eigen::Index>(channels), static_cast<Eigen::Index>(count / channels));
    auto in = open_in(payload);
    if (!binary::read_f64(in, std::span<double>(rows.data(), static_cast<std::size_t>(rows.size())))) {
      fail(ErrorKind::Format, "truncated session payload");
    }
    s.eeg = rows;
    s.validate();
    return s;
  });
}

void write_trial_set(const fs::path& manifest, const LabeledTrialSet& data, const std::string& data_file) {
  data.validate();
  const auto payload = default_payload(manifest, data_file);
  nlohmann::json doc;
  doc["format"] = "cspr-trials";
  doc["version"] = 1;
  doc["sample_rate_hz"] = data.sample_rate_hz;
  doc["channels"] = data.channels();
  doc["samples"] = data.samples();
  doc["trials"] = data.size();
  doc["targets"] = data.targets;
  doc["data_file"] = payload;

  auto out = open_out(manifest.parent_path() / payload);
  for (const auto& t : data.trials) {
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = t;
    binary::write_f64(out, std::span<const double>(rows.data(), static_cast<std::size_t>(rows.size())));
  }
  if (!out) fail(ErrorKind::Format, "write failed for trial payload");
  write_json(manifest, doc);
}

LabeledTrialSet read_trial_set(const fs::path& manifest) {
  const auto doc = read_json(manifest);
  return with_format_errors(manifest, [&] {
    if (doc.at("format") != "cspr-trials") fail(ErrorKind::Format, "not a trial-set manifest");
    LabeledTrialSet data;
    data.sample_rate_hz = doc.at("sample_rate_hz").get<double>();
    const auto c = doc.at("channels").get<std::size_t>();
    const auto s = doc.at("samples").get<std::size_t>();
    const auto n = doc.at("trials").get<std::size_t>();
    data.targets = doc.at("targets").get<std::vector<double>>();
    if (data.targets.size() != n) fail(ErrorKind::Format, "target count does not match 'trials'");
    const auto payload = manifest.parent_path() / doc.at("data_file").get<std::string>();
    if (payload_doubles(payload) != c * s * n) fail(ErrorKind::Format, "payload size does not match channels x samples x trials");
    auto in = open_in(payload);
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows(static_cast<Eigen::Index>(c),
                                                                                static_cast<Eigen::Index>(s));
    data.trials.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (!binary::read_f64(in, std::span<double>(rows.data(), static_cast<std::size_t>(rows.size())))) {
        fail(ErrorKind::Format, "truncated trial payload");
      }
      data.trials.emplace_back(rows);
    }
    data.validate();
    return data;
  });
}

void write_filter_bank(const fs::path& path, const FilterBank& bank) {
  auto out = open_out(path);
  bank.write(out);
}

FilterBank read_filter_bank(const fs::path& path) {
  auto in = open_in(path);
  return FilterBank::read(in);
}

}  // namespace cspr::io
