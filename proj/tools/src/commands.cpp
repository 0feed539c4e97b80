#include "commands.hpp"

#include "json_config.hpp"

#include <cspr/datagen.hpp>
#include <cspr/error.hpp>
#include <cspr/eval.hpp>
#include <cspr/features.hpp>
#include <cspr/io.hpp>
#include <cspr/preprocess.hpp>
#include <cspr/spatial_filter.hpp>

#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

namespace fs = std::filesystem;

namespace cspr::cli {

namespace {

// Collects output paths under --out-dir and writes run-manifest.json last.
// Nothing touches the output directory until a command has finished its
// computation and asks for its first path.
class Outputs {
 public:
  Outputs(const GlobalOptions& globals, const CLI::App& command) : globals_(globals), command_(command) {}

  fs::path path(const std::string& name) {
    fs::create_directories(globals_.out_dir);
    files_.push_back(name);
    return fs::path(globals_.out_dir) / name;
  }

  void json(const std::string& name, const nlohmann::json& doc) { io::write_json(path(name), doc); }

  template <class Writer>
  void csv(const std::string& name, Writer&& writer) {
    std::ostringstream text;
    writer(text);
    io::write_text(path(name), text.str());
  }

  /// `stem`.json or `stem`.csv depending on --format.
  template <class Writer>
  void table(const std::string& stem, const nlohmann::json& doc, Writer&& writer) {
    if (globals_.format == "csv") {
      csv(stem + ".csv", std::forward<Writer>(writer));
    } else {
      json(stem + ".json", doc);
    }
  }

  void finish() {
    nlohmann::json manifest = {
        {"tool", "cspr"},
        {"version", CSPR_VERSION},
        {"command", command_.get_name()},
        {"config", resolved_options(command_)},
        {"outputs", files_},
    };
    fs::create_directories(globals_.out_dir);
    io::write_json(fs::path(globals_.out_dir) / "run-manifest.json", manifest);
  }

 private:
  const GlobalOptions& globals_;
  const CLI::App& command_;
  std::vector<std::string> files_;
};

nlohmann::json matrix_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
    rows.push_back(row);
  }
  return rows;
}

std::vector<std::string> names_of(std::initializer_list<std::string_view> names) {
  return {names.begin(), names.end()};
}

// Options shared by eval, the sweeps and the noise experiment.
struct EvalArgs {
  std::string data;
  std::vector<std::string> feature_sets = {"raw", "car", "ovr", "ova"};
  std::vector<std::string> regressors = {"lasso", "knn"};
  std::string shape = "triangular";
  std::string mode = "mean-trial";
  bool plot_data = false;
  EvalConfig config;

  void add(CLI::App& sub, std::size_t repeats) {
    config.repeats = repeats;
    sub.add_option("--data", data, "Trial-set manifest (JSON)")->required();
    sub.add_option("--feature-sets", feature_sets, "Feature sets: raw, car, ovr, ova")
        ->delimiter(',')
        ->check(CLI::IsMember(names_of({"raw", "car", "ovr", "ova"})));
    sub.add_option("--regressors", regressors, "Regressors: lasso, knn")
        ->delimiter(',')
        ->check(CLI::IsMember(names_of({"lasso", "knn"})));
    sub.add_option("--folds", config.folds, "Cross-validation folds")->check(CLI::Range(2, 1000));
    sub.add_option("--repeats", config.repeats, "Repeats of the whole cross-validation")->check(CLI::PositiveNumber);
    sub.add_option("--num-classes", config.num_classes, "Fuzzy classes K")->check(CLI::Range(2, 1000));
    sub.add_option("--filters-per-class", config.filters_per_class, "Spatial filters per class F")
        ->check(CLI::PositiveNumber);
    sub.add_option("--shape", shape, "Membership shape")->check(CLI::IsMember(names_of({"triangular", "gaussian"})));
    sub.add_option("--covariance-mode", mode, "Class covariance construction")
        ->check(CLI::IsMember(names_of({"mean-trial", "weighted-cov"})));
    sub.add_option("--ridge", config.ridge, "Relative ridge added to the denominator")->check(CLI::NonNegativeNumber);
    sub.add_option("--noise-percent", config.noise_percent, "Attribute noise q% applied to features")
        ->check(CLI::Range(0.0, 100.0));
    sub.add_option("--knn-k", config.knn_k, "Neighbours for kNN")->check(CLI::PositiveNumber);
    sub.add_option("--lasso-folds", config.lasso_folds, "Inner folds for LASSO lambda selection")
        ->check(CLI::Range(2, 1000));
    sub.add_option("--lasso-grid", config.lasso_grid, "Lambda grid size")->check(CLI::PositiveNumber);
    sub.add_option("--segment-seconds", config.segment_seconds, "Welch segment length in seconds")
        ->check(CLI::PositiveNumber);
    sub.add_option("--overlap", config.overlap_fraction, "Welch segment overlap fraction")
        ->check(CLI::Range(0.0, 0.99));
    sub.add_flag("--plot-data", plot_data, "Also write plot-ready CSV tables");
  }

  EvalConfig resolve(const GlobalOptions& globals) const {
    EvalConfig c = config;
    c.feature_sets.clear();
    for (const auto& s : feature_sets) c.feature_sets.push_back(parse_feature_set(s));
    c.regressors.clear();
    for (const auto& r : regressors) c.regressors.push_back(parse_regressor(r));
    c.shape = parse_membership_shape(shape);
    c.mode = parse_covariance_mode(mode);
    c.seed = globals.seed;
    c.jobs = globals.jobs;
    c.validate();
    return c;
  }
};

void add_synth(CLI::App& root, const GlobalOptions& g, std::map<std::string, Action>& actions) {
  auto* sub = root.add_subcommand("synth", "Generate a synthetic trial set or continuous session");
  auto spec = std::make_shared<SynthSpec>();
  auto mode = std::make_shared<std::string>("trials");
  auto subject = std::make_shared<std::string>("synth");
  sub->add_option("--mode", *mode, "trials: epoched trials with targets; session: continuous recording with events")
      ->check(CLI::IsMember(names_of({"trials", "session"})));
  sub->add_option("--channels", spec->channels, "Channels C")->check(CLI::PositiveNumber);
  sub->add_option("--samples", spec->samples, "Samples per trial")->check(CLI::PositiveNumber);
  sub->add_option("--sample-rate", spec->sample_rate_hz, "Sampling rate in Hz")->check(CLI::PositiveNumber);
  sub->add_option("--trials", spec->trials, "Trials N")->check(CLI::PositiveNumber);
  sub->add_option("--sources", spec->sources, "Planted sources c")->check(CLI::PositiveNumber);
  sub->add_option("--noise-ratio", spec->noise_ratio, "Sensor noise sd relative to the noiseless RMS")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--source-low", spec->source_low_hz, "Source band lower edge (Hz)");
  sub->add_option("--source-high", spec->source_high_hz, "Source band upper edge (Hz)");
  sub->add_option("--logvar-spread", spec->logvar_spread, "Std of the per-trial source log-variance");
  sub->add_option("--distractor-gain", spec->distractor_gain, "Amplitude of sources 2..c relative to source 1")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--target-center", spec->target_center, "Target at mean log-variance");
  sub->add_option("--target-slope", spec->target_slope, "Target change per unit log-variance of source 1");
  sub->add_option("--bandpass", spec->bandpass, "Band-pass each generated trial (true/false)");
  sub->add_option("--band-low", spec->band_low_hz, "Trial band-pass lower edge (Hz)");
  sub->add_option("--band-high", spec->band_high_hz, "Trial band-pass upper edge (Hz)");
  sub->add_option("--taps", spec->num_taps, "Trial band-pass FIR length (odd)");
  sub->add_option("--duration", spec->session_duration_s, "Session length in seconds (session mode)");
  sub->add_option("--gap-min", spec->gap_min_s, "Shortest gap between events in seconds (session mode)");
  sub->add_option("--gap-max", spec->gap_max_s, "Longest gap between events in seconds (session mode)");
  sub->add_option("--outlier-fraction", spec->outlier_fraction, "Fraction of response times made outliers");
  sub->add_option("--outlier-scale", spec->outlier_scale, "Outlier response-time multiplier");
  sub->add_option("--subject", *subject, "Subject id written into the session (session mode)");

  actions["synth"] = [sub, &g, spec, mode, subject] {
    spec->validate();
    Outputs out(g, *sub);
    if (*mode == "trials") {
      const auto world = generate_trials(*spec, g.seed, g.jobs);
      io::write_trial_set(out.path("trials.json"), world.data);
      out.path("trials.bin");
      out.json("truth.json", {{"spec", spec->to_json()},
                              {"mixing", matrix_json(world.mixing)},
                              {"source_logvar", world.source_logvar}});
    } else {
      const auto synth = generate_session(*spec, g.seed, *subject);
      io::write_session(out.path("session.json"), synth.session);
      out.path("session.bin");
      out.json("truth.json", {{"spec", spec->to_json()},
                              {"mixing", matrix_json(synth.mixing)},
                              {"response_speeds", synth.response_speeds}});
    }
    out.finish();
  };
}

void add_preprocess(CLI::App& root, const GlobalOptions& g, std::map<std::string, Action>& actions) {
  auto* sub = root.add_subcommand("preprocess", "Turn one subject's sessions into a band-passed trial set");
  auto sessions = std::make_shared<std::vector<std::string>>();
  auto opts = std::make_shared<PreprocessOptions>();
  sub->add_option("--session", *sessions, "Session manifest (repeat for several sessions of one subject)")
      ->required();
  sub->add_option("--window", opts->window_s, "Epoch length before each onset, seconds")->check(CLI::PositiveNumber);
  sub->add_option("--smooth-window", opts->smooth_window_s, "Response-time smoothing window, seconds")
      ->check(CLI::PositiveNumber);
  sub->add_option("--band-low", opts->band_low_hz, "Band-pass lower edge (Hz)");
  sub->add_option("--band-high", opts->band_high_hz, "Band-pass upper edge (Hz)");
  sub->add_option("--taps", opts->num_taps, "Band-pass FIR length (odd)");
  sub->add_option("--target-rate", opts->target_rate_hz, "Downsample to this rate first (0 keeps the rate)")
      ->check(CLI::NonNegativeNumber);

  actions["preprocess"] = [sub, &g, sessions, opts] {
    std::vector<SessionRecord> records;
    for (const auto& path : *sessions) records.push_back(io::read_session(path));
    const auto result = preprocess_subject(records, *opts);

    nlohmann::json summary = {{"theta", result.theta}, {"trials", result.data.size()}, {"sessions", nlohmann::json::array()}};
    for (const auto& s : result.sessions) {
      nlohmann::json skipped = nlohmann::json::array();
      for (const auto& e : s.skipped_epoch) skipped.push_back({{"event", e.event_index}, {"reason", e.reason}});
      summary["sessions"].push_back({{"subject_id", s.subject_id},
                                     {"events", s.events},
                                     {"dropped_overlap", s.dropped_overlap},
                                     {"skipped_epoch", skipped},
                                     {"clipped", s.clipped},
                                     {"trials", s.trials}});
    }
    Outputs out(g, *sub);
    io::write_trial_set(out.path("trials.json"), result.data);
    out.path("trials.bin");
    out.json("preprocess-summary.json", summary);
    out.finish();
  };
}

void add_fit_filters(CLI::App& root, const GlobalOptions& g, std::map<std::string, Action>& actions) {
  auto* sub = root.add_subcommand("fit-filters", "Learn CSPR spatial filters from a trial set");
  struct Args {
    std::string data;
    std::string variant = "cspr-ovr";
    std::string shape = "triangular";
    std::string mode = "mean-trial";
    CsprOptions options;
  };
  auto a = std::make_shared<Args>();
  sub->add_option("--data", a->data, "Trial-set manifest (JSON)")->required();
  sub->add_option("--variant", a->variant, "cspr-ovr or cspr-ova")
      ->check(CLI::IsMember(names_of({"cspr-ovr", "cspr-ova"})));
  sub->add_option("--num-classes", a->options.num_classes, "Fuzzy classes K")->check(CLI::Range(2, 1000));
  sub->add_option("--filters-per-class", a->options.filters_per_class, "Spatial filters per class F")
      ->check(CLI::PositiveNumber);
  sub->add_option("--shape", a->shape, "Membership shape")->check(CLI::IsMember(names_of({"triangular", "gaussian"})));
  sub->add_option("--covariance-mode", a->mode, "Class covariance construction")
      ->check(CLI::IsMember(names_of({"mean-trial", "weighted-cov"})));
  sub->add_option("--ridge", a->options.ridge, "Relative ridge added to the denominator")
      ->check(CLI::NonNegativeNumber);

  actions["fit-filters"] = [sub, &g, a] {
    const auto data = io::read_trial_set(a->data);
    auto options = a->options;
    options.objective = objective_of(parse_filter_variant(a->variant));
    options.shape = parse_membership_shape(a->shape);
    options.mode = parse_covariance_mode(a->mode);
    options.jobs = g.jobs;
    const auto bank = fit_cspr(data, options);

    nlohmann::json eig = nlohmann::json::array();
    for (const auto& v : bank.eigenvalues()) eig.push_back(std::vector<double>(v.data(), v.data() + v.size()));
    nlohmann::json summary = {{"variant", std::string(to_string(bank.variant()))},
                              {"covariance_mode", std::string(to_string(bank.covariance_mode()))},
                              {"channels", bank.channels()},
                              {"outputs", bank.outputs()},
                              {"eigenvalues", eig},
                              {"partition", bank.partition()->to_json()}};
    Outputs out(g, *sub);
    io::write_filter_bank(out.path("filters.cspfb"), bank);
    out.json("filters-summary.json", summary);
    out.finish();
  };
}

void add_apply_filters(CLI::App& root, const GlobalOptions& g, std::map<std::string, Action>& actions) {
  auto* sub = root.add_subcommand("apply-filters", "Project every trial through a learned filter bank");
  auto data_path = std::make_shared<std::string>();
  auto filters_path = std::make_shared<std::string>();
  sub->add_option("--data", *data_path, "Trial-set manifest (JSON)")->required();
  sub->add_option("--filters", *filters_path, "Filter bank written by fit-filters")->required();

  actions["apply-filters"] = [sub, &g, data_path, filters_path] {
    auto data = io::read_trial_set(*data_path);
    const auto bank = io::read_filter_bank(*filters_path);
    for (auto& trial : data.trials) trial = bank.apply(trial);
    Outputs out(g, *sub);
    io::write_trial_set(out.path("filtered.json"), data);
    out.path("filtered.bin");
    out.finish();
  };
}

void add_features(CLI::App& root, const GlobalOptions& g, std::map<std::string, Action>& actions) {
  auto* sub = root.add_subcommand("features", "Extract theta/alpha band-power features (dB)");
  struct Args {
    std::string data;
    std::string mode = "raw";
    std::string filters;
    BandPowerOptions options;
  };
  auto a = std::make_shared<Args>();
  sub->add_option("--data", a->data, "Trial-set manifest (JSON)")->required();
  sub->add_option("--mode", a->mode, "raw, car, or filtered (needs --filters)")
      ->check(CLI::IsMember(names_of({"raw", "car", "filtered"})));
  sub->add_option("--filters", a->filters, "Filter bank for --mode filtered");
  sub->add_option("--segment-seconds", a->options.segment_seconds, "Welch segment length in seconds")
      ->check(CLI::PositiveNumber);
  sub->add_option("--overlap", a->options.overlap_fraction, "Welch segment overlap fraction")
      ->check(CLI::Range(0.0, 0.99));

  actions["features"] = [sub, &g, a] {
    const auto mode = a->mode == "raw" ? FeatureMode::Raw : a->mode == "car" ? FeatureMode::Car : FeatureMode::Filtered;
    require(mode != FeatureMode::Filtered || !a->filters.empty(), ErrorKind::InvalidArgument,
            "features: --mode filtered needs --filters");
    const auto data = io::read_trial_set(a->data);
    std::optional<FilterBank> bank;
    if (mode == FeatureMode::Filtered) bank = io::read_filter_bank(a->filters);
    auto options = a->options;
    options.sample_rate_hz = data.sample_rate_hz;
    const auto fm = extract_features(data.trials, mode, options, bank ? &*bank : nullptr, g.jobs);

    nlohmann::json doc = {{"labels", fm.labels}, {"targets", data.targets}, {"values", matrix_json(fm.values)}};
    Outputs out(g, *sub);
    out.table("features", doc, [&](std::ostream& os) { write_feature_csv(os, fm, data.targets); });
    out.finish();
  };
}

void add_eval(CLI::App& root, const GlobalOptions& g, std::map<std::string, Action>& actions) {
  auto* sub = root.add_subcommand("eval", "Repeated k-fold cross-validation of every feature set and regressor");
  auto a = std::make_shared<EvalArgs>();
  a->add(*sub, 10);

  actions["eval"] = [sub, &g, a] {
    const auto config = a->resolve(g);
    const auto data = io::read_trial_set(a->data);
    const auto report = run_cv(data, config);
    Outputs out(g, *sub);
    out.json("report.json", report.to_json());
    out.csv("report.csv", [&](std::ostream& os) { report.write_csv(os); });
    if (a->plot_data) {
      out.csv("plot-method-means.csv", [&](std::ostream& os) { report.write_method_means_csv(os); });
      out.csv("plot-improvements.csv", [&](std::ostream& os) { report.write_improvements_csv(os); });
    }
    out.finish();
  };
}

void add_sweep(CLI::App& root, const GlobalOptions& g, std::map<std::string, Action>& actions, bool classes) {
  const std::string name = classes ? "sweep-k" : "sweep-f";
  auto* sub = root.add_subcommand(name, classes ? "Cross-validated performance versus the number of fuzzy classes K"
                                                : "Cross-validated performance versus filters per class F");
  auto a = std::make_shared<EvalArgs>();
  a->feature_sets = {"ovr"};
  a->add(*sub, kSweepRepeats);
  auto values = std::make_shared<std::vector<std::size_t>>(classes ? kDefaultSweepK : kDefaultSweepF);
  sub->add_option("--values", *values, classes ? "K values to try" : "F values to try")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);

  actions[name] = [sub, &g, a, values, classes, name] {
    const auto config = a->resolve(g);
    const auto data = io::read_trial_set(a->data);
    const auto table = classes ? sweep_k(data, config, *values, config.repeats)
                               : sweep_f(data, config, *values, config.repeats);
    Outputs out(g, *sub);
    out.table(name, table.to_json(), [&](std::ostream& os) { table.write_csv(os); });
    if (a->plot_data) out.csv("plot-" + name + ".csv", [&](std::ostream& os) { table.write_csv(os); });
    out.finish();
  };
}

void add_noise(CLI::App& root, const GlobalOptions& g, std::map<std::string, Action>& actions) {
  auto* sub = root.add_subcommand("noise-robustness", "Cross-validated performance under attribute noise");
  auto a = std::make_shared<EvalArgs>();
  a->add(*sub, 10);
  auto levels = std::make_shared<std::vector<double>>(kDefaultNoiseLevels);
  sub->add_option("--levels", *levels, "Noise levels q% to evaluate")->delimiter(',')->check(CLI::Range(0.0, 100.0));

  actions["noise-robustness"] = [sub, &g, a, levels] {
    const auto config = a->resolve(g);
    const auto data = io::read_trial_set(a->data);
    const auto rows = noise_robustness(data, config, *levels);
    Outputs out(g, *sub);
    out.table("noise-robustness", noise_rows_json(rows), [&](std::ostream& os) { write_noise_csv(os, rows); });
    out.finish();
  };
}

void add_timing(CLI::App& root, const GlobalOptions& g, std::map<std::string, Action>& actions) {
  auto* sub = root.add_subcommand("timing", "Wall-clock CSPR training time versus trial count");
  struct Args {
    std::vector<std::size_t> counts = {200, 400, 600, 800, 1000, 1200, 1400, 1600, 1800, 2000};
    std::string objective = "ovr";
    std::string mode = "mean-trial";
    TimingOptions options;
  };
  auto a = std::make_shared<Args>();
  sub->add_option("--trial-counts", a->counts, "Trial counts N to time")->delimiter(',')->check(CLI::PositiveNumber);
  sub->add_option("--channels", a->options.channels, "Channels C")->check(CLI::PositiveNumber);
  sub->add_option("--samples", a->options.samples, "Samples per trial")->check(CLI::PositiveNumber);
  sub->add_option("--num-classes", a->options.num_classes, "Fuzzy classes K")->check(CLI::Range(2, 1000));
  sub->add_option("--filters-per-class", a->options.filters_per_class, "Spatial filters per class F")
      ->check(CLI::PositiveNumber);
  sub->add_option("--objective", a->objective, "ovr or ova")->check(CLI::IsMember(names_of({"ovr", "ova"})));
  sub->add_option("--covariance-mode", a->mode, "Class covariance construction")
      ->check(CLI::IsMember(names_of({"mean-trial", "weighted-cov"})));
  sub->add_option("--runs", a->options.runs, "Timed fits per N; the fastest is reported")->check(CLI::PositiveNumber);

  actions["timing"] = [sub, &g, a] {
    auto options = a->options;
    options.objective = a->objective == "ova" ? Objective::OneVsAll : Objective::OneVsRest;
    options.mode = parse_covariance_mode(a->mode);
    options.seed = g.seed;
    const auto table = measure_training_time(a->counts, options);
    Outputs out(g, *sub);
    out.table("timing", table.to_json(), [&](std::ostream& os) { table.write_csv(os); });
    out.finish();
  };
}

}  // namespace

void register_commands(CLI::App& root, GlobalOptions& globals, std::map<std::string, Action>& actions) {
  add_synth(root, globals, actions);
  add_preprocess(root, globals, actions);
  add_fit_filters(root, globals, actions);
  add_apply_filters(root, globals, actions);
  add_features(root, globals, actions);
  add_eval(root, globals, actions);
  add_sweep(root, globals, actions, true);
  add_sweep(root, globals, actions, false);
  add_noise(root, globals, actions);
  add_timing(root, globals, actions);
}

}  // namespace cspr::cli
