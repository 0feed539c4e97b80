#include "cspr/eval.hpp"

#include "cspr/datagen.hpp"
#include "cspr/error.hpp"
#include "cspr/metrics.hpp"
#include "cspr/parallel.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>
#include <string>
#include <utility>

namespace cspr {

namespace {

constexpr std::uint64_t kFoldStream = 0xf01dULL;
constexpr std::uint64_t kNoiseStream = 0x9015eULL;
constexpr std::uint64_t kLassoStream = 0x1a55cULL;

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

FeatureMode feature_mode(FeatureSet set) {
  switch (set) {
    case FeatureSet::Raw: return FeatureMode::Raw;
    case FeatureSet::Car: return FeatureMode::Car;
    default: return FeatureMode::Filtered;
  }
}

bool is_filtered(FeatureSet set) { return set == FeatureSet::Ovr || set == FeatureSet::Ova; }

Matrix select_rows(const Matrix& m, std::span<const std::size_t> rows) {
  Matrix out(idx(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(idx(i)) = m.row(idx(rows[i]));
  return out;
}

BandPowerOptions band_options(const EvalConfig& config, double sample_rate_hz) {
  BandPowerOptions options;
  options.sample_rate_hz = sample_rate_hz;
  options.segment_seconds = config.segment_seconds;
  options.overlap_fraction = config.overlap_fraction;
  return options;
}

template <class E>
std::vector<E> parse_list(const nlohmann::json& doc, E (*parse)(std::string_view)) {
  std::vector<E> out;
  for (const auto& item : doc) out.push_back(parse(item.get<std::string>()));
  return out;
}

std::optional<double> optional_cc(const Vector& pred, std::span<const double> truth) {
  try {
    return cc(std::span<const double>(pred.data(), static_cast<std::size_t>(pred.size())), truth);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Degenerate) throw;
    return std::nullopt;
  }
}

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::string optional_csv(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

// Scores every (feature set, regressor) pair on one train/test split.
// `cached` optionally holds Raw and CAR features of all trials, indexed by
// the original trial index; these transforms are unsupervised and per-trial.
std::vector<FoldScore> score_split(const LabeledTrialSet& train, const LabeledTrialSet& test,
                                   const EvalConfig& config, std::size_t repeat, std::size_t fold,
                                   const std::array<const Matrix*, 2>& cached,
                                   std::span<const std::size_t> train_rows, std::span<const std::size_t> test_rows) {
  std::vector<FoldScore> scores;
  for (auto set : config.feature_sets) {
    const auto set_id = static_cast<std::uint64_t>(set);
    Matrix x_train;
    Matrix x_test;
    const Matrix* full = set == FeatureSet::Raw ? cached[0] : set == FeatureSet::Car ? cached[1] : nullptr;
    if (full != nullptr) {
      x_train = select_rows(*full, train_rows);
      x_test = select_rows(*full, test_rows);
    } else {
      auto stage = FeatureStage::fit(train, set, config);
      x_train = stage.transform(train.trials).values;
      x_test = stage.transform(test.trials).values;
    }
    if (config.noise_percent > 0.0) {
      auto train_rng = make_rng(config.seed, {kNoiseStream, repeat, fold, set_id, 0});
      auto test_rng = make_rng(config.seed, {kNoiseStream, repeat, fold, set_id, 1});
      x_train = inject_attribute_noise(x_train, config.noise_percent, train_rng);
      x_test = inject_attribute_noise(x_test, config.noise_percent, test_rng);
    }
    for (auto reg : config.regressors) {
      const auto lasso_seed = make_rng(config.seed, {kLassoStream, repeat, fold, set_id})();
      const auto model = fit_regressor(x_train, train.targets, reg, config, lasso_seed);
      const Vector pred = predict(model, x_test);
      FoldScore score;
      score.repeat = repeat;
      score.fold = fold;
      score.set = set;
      score.reg = reg;
      score.rmse = rmse(std::span<const double>(pred.data(), static_cast<std::size_t>(pred.size())), test.targets);
      score.cc = optional_cc(pred, test.targets);
      scores.push_back(score);
    }
  }
  return scores;
}

std::vector<std::size_t> complement(std::size_t n, std::span<const std::size_t> test) {
  std::vector<bool> held(n, false);
  for (auto i : test) held[i] = true;
  std::vector<std::size_t> train;
  train.reserve(n - test.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (!held[i]) train.push_back(i);
  }
  return train;
}

constexpr std::array<std::pair<FeatureSet, FeatureSet>, 6> kImprovementPairs = {{
    {FeatureSet::Car, FeatureSet::Raw},
    {FeatureSet::Ovr, FeatureSet::Raw},
    {FeatureSet::Ova, FeatureSet::Raw},
    {FeatureSet::Ovr, FeatureSet::Car},
    {FeatureSet::Ova, FeatureSet::Car},
    {FeatureSet::Ova, FeatureSet::Ovr},
}};

}  // namespace

std::string_view to_string(FeatureSet set) noexcept {
  switch (set) {
    case FeatureSet::Raw: return "raw";
    case FeatureSet::Car: return "car";
    case FeatureSet::Ovr: return "ovr";
    case FeatureSet::Ova: return "ova";
  }
  return "unknown";
}

std::string_view to_string(Regressor reg) noexcept {
  return reg == Regressor::Lasso ? "lasso" : "knn";
}

FeatureSet parse_feature_set(std::string_view name) {
  if (name == "raw") return FeatureSet::Raw;
  if (name == "car") return FeatureSet::Car;
  if (name == "ovr") return FeatureSet::Ovr;
  if (name == "ova") return FeatureSet::Ova;
  fail(ErrorKind::InvalidArgument, "unknown feature set '" + std::string(name) + "' (raw, car, ovr, ova)");
}

Regressor parse_regressor(std::string_view name) {
  if (name == "lasso") return Regressor::Lasso;
  if (name == "knn") return Regressor::Knn;
  fail(ErrorKind::InvalidArgument, "unknown regressor '" + std::string(name) + "' (lasso, knn)");
}

void EvalConfig::validate() const {
  require(!feature_sets.empty(), ErrorKind::InvalidArgument, "eval: no feature sets selected");
  require(!regressors.empty(), ErrorKind::InvalidArgument, "eval: no regressors selected");
  require(std::set<FeatureSet>(feature_sets.begin(), feature_sets.end()).size() == feature_sets.size(),
          ErrorKind::InvalidArgument, "eval: feature set listed twice");
  require(std::set<Regressor>(regressors.begin(), regressors.end()).size() == regressors.size(),
          ErrorKind::InvalidArgument, "eval: regressor listed twice");
  require(folds >= 2, ErrorKind::InvalidArgument, "eval: folds must be >= 2");
  require(repeats >= 1, ErrorKind::InvalidArgument, "eval: repeats must be >= 1");
  require(num_classes >= 2, ErrorKind::InvalidArgument, "eval: K must be >= 2");
  require(filters_per_class >= 1, ErrorKind::InvalidArgument, "eval: F must be >= 1");
  require(std::isfinite(ridge) && ridge >= 0.0, ErrorKind::InvalidArgument, "eval: ridge must be >= 0");
  require(noise_percent >= 0.0 && noise_percent <= 100.0, ErrorKind::InvalidArgument,
          "eval: noise percent must lie in [0, 100]");
  require(knn_k >= 1, ErrorKind::InvalidArgument, "eval: kNN k must be >= 1");
  require(lasso_folds >= 2, ErrorKind::InvalidArgument, "eval: inner LASSO folds must be >= 2");
  require(lasso_grid >= 1, ErrorKind::InvalidArgument, "eval: LASSO grid must have >= 1 point");
  require(segment_seconds > 0.0, ErrorKind::InvalidArgument, "eval: segment length must be positive");
  require(overlap_fraction >= 0.0 && overlap_fraction < 1.0, ErrorKind::InvalidArgument,
          "eval: overlap must lie in [0, 1)");
  require(jobs >= 1, ErrorKind::InvalidArgument, "eval: jobs must be >= 1");
}

nlohmann::json EvalConfig::to_json() const {
  nlohmann::json sets = nlohmann::json::array();
  for (auto s : feature_sets) sets.push_back(std::string(to_string(s)));
  nlohmann::json regs = nlohmann::json::array();
  for (auto r : regressors) regs.push_back(std::string(to_string(r)));
  return {
      {"feature_sets", sets},
      {"regressors", regs},
      {"folds", folds},
      {"repeats", repeats},
      {"seed", seed},
      {"num_classes", num_classes},
      {"filters_per_class", filters_per_class},
      {"shape", std::string(cspr::to_string(shape))},
      {"covariance_mode", std::string(cspr::to_string(mode))},
      {"ridge", ridge},
      {"noise_percent", noise_percent},
      {"knn_k", knn_k},
      {"lasso_folds", lasso_folds},
      {"lasso_grid", lasso_grid},
      {"segment_seconds", segment_seconds},
      {"overlap_fraction", overlap_fraction},
  };
}

EvalConfig EvalConfig::from_json(const nlohmann::json& doc) {
  require(doc.is_object(), ErrorKind::InvalidArgument, "eval config: expected a JSON object");
  EvalConfig c;
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "feature_sets") c.feature_sets = parse_list(value, &parse_feature_set);
      else if (key == "regressors") c.regressors = parse_list(value, &parse_regressor);
      else if (key == "folds") c.folds = value.get<std::size_t>();
      else if (key == "repeats") c.repeats = value.get<std::size_t>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "num_classes") c.num_classes = value.get<std::size_t>();
      else if (key == "filters_per_class") c.filters_per_class = value.get<std::size_t>();
      else if (key == "shape") c.shape = parse_membership_shape(value.get<std::string>());
      else if (key == "covariance_mode") c.mode = parse_covariance_mode(value.get<std::string>());
      else if (key == "ridge") c.ridge = value.get<double>();
      else if (key == "noise_percent") c.noise_percent = value.get<double>();
      else if (key == "knn_k") c.knn_k = value.get<std::size_t>();
      else if (key == "lasso_folds") c.lasso_folds = value.get<std::size_t>();
      else if (key == "lasso_grid") c.lasso_grid = value.get<std::size_t>();
      else if (key == "segment_seconds") c.segment_seconds = value.get<double>();
      else if (key == "overlap_fraction") c.overlap_fraction = value.get<double>();
      else fail(ErrorKind::InvalidArgument, "eval config: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::InvalidArgument, std::string("eval config: ") + e.what());
  }
  c.validate();
  return c;
}

std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::size_t folds, std::uint64_t seed,
                                                 std::size_t repeat) {
  require(folds >= 2, ErrorKind::InvalidArgument, "make_folds: folds must be >= 2");
  require(n >= folds, ErrorKind::Degenerate,
          "make_folds: " + std::to_string(n) + " trials cannot fill " + std::to_string(folds) + " folds");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto rng = make_rng(seed, {kFoldStream, repeat});
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<std::vector<std::size_t>> out(folds);
  const std::size_t base = n / folds;
  const std::size_t extra = n % folds;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t len = base + (f < extra ? 1 : 0);
    out[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                  order.begin() + static_cast<std::ptrdiff_t>(pos + len));
    std::sort(out[f].begin(), out[f].end());
    pos += len;
  }
  return out;
}

Matrix inject_attribute_noise(const Matrix& features, double percent, Rng& rng) {
  require(percent >= 0.0 && percent <= 100.0, ErrorKind::InvalidArgument,
          "inject_attribute_noise: percent must lie in [0, 100]");
  Matrix out = features;
  const auto n = static_cast<std::size_t>(features.rows());
  const auto count = static_cast<std::size_t>(std::llround(percent / 100.0 * static_cast<double>(n)));
  if (count == 0 || n == 0) return out;

  std::vector<std::size_t> rows(n);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Eigen::Index j = 0; j < features.cols(); ++j) {
    const double lo = features.col(j).minCoeff();
    const double hi = features.col(j).maxCoeff();
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    // Partial Fisher-Yates: the first `count` entries are a uniform sample
    // without replacement.
    for (std::size_t i = 0; i < count; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(rows[i], rows[pick(rng)]);
      out(idx(rows[i]), j) = lo + (hi - lo) * unit(rng);
    }
  }
  return out;
}

FeatureStage FeatureStage::fit(const LabeledTrialSet& train, FeatureSet set, const EvalConfig& config) {
  FeatureStage stage;
  stage.set_ = set;
  stage.options_ = band_options(config, train.sample_rate_hz);
  if (is_filtered(set)) {
    CsprOptions options;
    options.num_classes = config.num_classes;
    options.filters_per_class = config.filters_per_class;
    options.objective = set == FeatureSet::Ova ? Objective::OneVsAll : Objective::OneVsRest;
    options.shape = config.shape;
    options.mode = config.mode;
    options.ridge = config.ridge;
    stage.bank_ = fit_cspr(train, options);
  }
  return stage;
}

FeatureMatrix FeatureStage::transform(std::span<const Matrix> trials, std::size_t jobs) const {
  return extract_features(trials, feature_mode(set_), options_, bank_ ? &*bank_ : nullptr, jobs);
}

RegressionModel fit_regressor(const Matrix& features, std::span<const double> targets, Regressor reg,
                              const EvalConfig& config, std::uint64_t seed) {
  if (reg == Regressor::Knn) return KnnModel::fit(features, targets, config.knn_k);
  LassoCvOptions options;
  options.folds = config.lasso_folds;
  options.grid_size = config.lasso_grid;
  options.seed = seed;
  return lasso_cv_fit(features, targets, options).model;
}

Vector predict(const RegressionModel& model, const Matrix& features) {
  return std::visit([&](const auto& m) { return m.predict(features); }, model);
}

std::vector<FoldScore> evaluate_fold(const LabeledTrialSet& train, const LabeledTrialSet& test,
                                     const EvalConfig& config, std::size_t repeat, std::size_t fold) {
  config.validate();
  return score_split(train, test, config, repeat, fold, {nullptr, nullptr}, {}, {});
}

const MethodSummary& EvalReport::method(FeatureSet set, Regressor reg) const {
  for (const auto& m : summary) {
    if (m.set == set && m.reg == reg) return m;
  }
  fail(ErrorKind::InvalidArgument, "report has no method " + std::string(to_string(set)) + "/" +
                                       std::string(to_string(reg)));
}

EvalReport run_cv(const LabeledTrialSet& data, const EvalConfig& config) {
  config.validate();
  data.validate();
  require(data.size() >= config.folds, ErrorKind::Degenerate,
          "run_cv: " + std::to_string(data.size()) + " trials cannot fill " + std::to_string(config.folds) +
              " folds");

  // Raw and CAR band powers do not depend on the training fold.
  std::array<Matrix, 2> cache;
  std::array<const Matrix*, 2> cached{nullptr, nullptr};
  const auto options = band_options(config, data.sample_rate_hz);
  for (auto set : config.feature_sets) {
    if (is_filtered(set)) continue;
    const auto slot = set == FeatureSet::Raw ? 0 : 1;
    if (cached[slot] != nullptr) continue;
    cache[slot] = extract_features(data.trials, feature_mode(set), options, nullptr, config.jobs).values;
    cached[slot] = &cache[slot];
  }

  const std::size_t jobs_total = config.repeats * config.folds;
  std::vector<std::vector<std::vector<std::size_t>>> folds(config.repeats);
  for (std::size_t r = 0; r < config.repeats; ++r) folds[r] = make_folds(data.size(), config.folds, config.seed, r);

  std::vector<std::vector<FoldScore>> slots(jobs_total);
  parallel_for(jobs_total, config.jobs, [&](std::size_t job) {
    const std::size_t r = job / config.folds;
    const std::size_t f = job % config.folds;
    const auto& test_rows = folds[r][f];
    require(!test_rows.empty() && test_rows.size() < data.size(), ErrorKind::Degenerate, "run_cv: degenerate fold");
    const auto train_rows = complement(data.size(), test_rows);
    const auto train = data.subset(train_rows);
    const auto test = data.subset(test_rows);
    slots[job] = score_split(train, test, config, r, f, cached, train_rows, test_rows);
  });

  EvalReport report;
  report.config = config;
  report.trials = data.size();
  for (auto& s : slots) report.scores.insert(report.scores.end(), s.begin(), s.end());

  for (auto set : config.feature_sets) {
    for (auto reg : config.regressors) {
      MethodSummary m{set, reg, 0.0, std::nullopt, 0};
      double rmse_total = 0.0;
      double cc_total = 0.0;
      std::size_t cc_repeats = 0;
      for (std::size_t r = 0; r < config.repeats; ++r) {
        double rmse_sum = 0.0;
        double cc_sum = 0.0;
        std::size_t cc_count = 0;
        for (const auto& s : report.scores) {
          if (s.repeat != r || s.set != set || s.reg != reg) continue;
          rmse_sum += s.rmse;
          if (s.cc) {
            cc_sum += *s.cc;
            ++cc_count;
          } else {
            ++m.cc_missing;
          }
        }
        rmse_total += rmse_sum / static_cast<double>(config.folds);
        if (cc_count > 0) {
          cc_total += cc_sum / static_cast<double>(cc_count);
          ++cc_repeats;
        }
      }
      m.mean_rmse = rmse_total / static_cast<double>(config.repeats);
      if (cc_repeats > 0) m.mean_cc = cc_total / static_cast<double>(cc_repeats);
      if (m.cc_missing > 0) report.cc_missing = true;
      report.summary.push_back(m);
    }
  }

  auto has = [&](FeatureSet s) {
    return std::find(config.feature_sets.begin(), config.feature_sets.end(), s) != config.feature_sets.end();
  };
  for (auto reg : config.regressors) {
    for (const auto& [improved, base] : kImprovementPairs) {
      if (!has(improved) || !has(base)) continue;
      const auto& a = report.method(improved, reg);
      const auto& b = report.method(base, reg);
      Improvement imp{reg, improved, base, 0.0, std::nullopt};
      imp.rmse_percent = b.mean_rmse > 0.0 ? (b.mean_rmse - a.mean_rmse) / b.mean_rmse * 100.0 : 0.0;
      if (a.mean_cc && b.mean_cc && *b.mean_cc != 0.0) {
        imp.cc_percent = (*a.mean_cc - *b.mean_cc) / *b.mean_cc * 100.0;
      }
      report.improvements.push_back(imp);
    }
  }
  return report;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json scores_json = nlohmann::json::array();
  for (const auto& s : scores) {
    scores_json.push_back({{"repeat", s.repeat},
                           {"fold", s.fold},
                           {"feature_set", std::string(to_string(s.set))},
                           {"regressor", std::string(to_string(s.reg))},
                           {"rmse", s.rmse},
                           {"cc", optional_json(s.cc)}});
  }
  nlohmann::json summary_json = nlohmann::json::array();
  for (const auto& m : summary) {
    summary_json.push_back({{"feature_set", std::string(to_string(m.set))},
                            {"regressor", std::string(to_string(m.reg))},
                            {"mean_rmse", m.mean_rmse},
                            {"mean_cc", optional_json(m.mean_cc)},
                            {"cc_missing_folds", m.cc_missing}});
  }
  nlohmann::json imp_json = nlohmann::json::array();
  for (const auto& i : improvements) {
    imp_json.push_back({{"regressor", std::string(to_string(i.reg))},
                        {"improved", std::string(to_string(i.improved))},
                        {"base", std::string(to_string(i.base))},
                        {"rmse_percent", i.rmse_percent},
                        {"cc_percent", optional_json(i.cc_percent)}});
  }
  return {{"config", config.to_json()},
          {"trials", trials},
          {"cc_missing", cc_missing},
          {"scores", scores_json},
          {"summary", summary_json},
          {"improvements", imp_json}};
}

void EvalReport::write_csv(std::ostream& out) const {
  out << "repeat,fold,feature_set,regressor,rmse,cc\n";
  for (const auto& s : scores) {
    out << s.repeat << ',' << s.fold << ',' << to_string(s.set) << ',' << to_string(s.reg) << ','
        << format_double(s.rmse) << ',' << optional_csv(s.cc) << '\n';
  }
}

void EvalReport::write_method_means_csv(std::ostream& out) const {
  out << "method,regressor,feature_set,mean_rmse,mean_cc\n";
  for (const auto& m : summary) {
    out << to_string(m.reg) << '/' << to_string(m.set) << ',' << to_string(m.reg) << ',' << to_string(m.set) << ','
        << format_double(m.mean_rmse) << ',' << optional_csv(m.mean_cc) << '\n';
  }
}

void EvalReport::write_improvements_csv(std::ostream& out) const {
  out << "comparison,regressor,improved,base,rmse_percent,cc_percent\n";
  for (const auto& i : improvements) {
    out << to_string(i.reg) << ':' << to_string(i.improved) << '/' << to_string(i.base) << ',' << to_string(i.reg)
        << ',' << to_string(i.improved) << ',' << to_string(i.base) << ',' << format_double(i.rmse_percent) << ','
        << optional_csv(i.cc_percent) << '\n';
  }
}

namespace {

SweepTable run_sweep(const LabeledTrialSet& data, const EvalConfig& base, std::span<const std::size_t> settings,
                     std::size_t repeats, bool sweep_classes) {
  EvalConfig config = base;
  config.repeats = repeats;
  config.feature_sets.clear();
  for (auto s : base.feature_sets) {
    if (is_filtered(s)) config.feature_sets.push_back(s);
  }
  if (config.feature_sets.empty()) config.feature_sets = {FeatureSet::Ovr};

  SweepTable table;
  table.parameter = sweep_classes ? "K" : "F";
  for (auto setting : settings) {
    if (sweep_classes) {
      config.num_classes = setting;
    } else {
      config.filters_per_class = setting;
    }
    std::optional<EvalReport> report;
    std::string error;
    try {
      report = run_cv(data, config);
    } catch (const Error& e) {
      error = std::string(to_string(e.kind())) + ": " + e.what();
    }
    for (auto set : config.feature_sets) {
      for (auto reg : config.regressors) {
        SweepRow row;
        row.setting = setting;
        row.reg = reg;
        row.set = set;
        if (report) {
          const auto& m = report->method(set, reg);
          row.mean_rmse = m.mean_rmse;
          row.mean_cc = m.mean_cc;
        } else {
          row.error = error;
        }
        table.rows.push_back(std::move(row));
      }
    }
  }
  return table;
}

}  // namespace

SweepTable sweep_k(const LabeledTrialSet& data, const EvalConfig& base, std::span<const std::size_t> ks,
                   std::size_t repeats) {
  return run_sweep(data, base, ks, repeats, true);
}

SweepTable sweep_f(const LabeledTrialSet& data, const EvalConfig& base, std::span<const std::size_t> fs,
                   std::size_t repeats) {
  return run_sweep(data, base, fs, repeats, false);
}

nlohmann::json SweepTable::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json row = {{parameter, r.setting},
                          {"feature_set", std::string(to_string(r.set))},
                          {"regressor", std::string(to_string(r.reg))},
                          {"mean_rmse", optional_json(r.mean_rmse)},
                          {"mean_cc", optional_json(r.mean_cc)}};
    if (!r.error.empty()) row["error"] = r.error;
    rows_json.push_back(std::move(row));
  }
  return {{"parameter", parameter}, {"rows", rows_json}};
}

void SweepTable::write_csv(std::ostream& out) const {
  out << parameter << ",feature_set,regressor,mean_rmse,mean_cc,error\n";
  for (const auto& r : rows) {
    std::string error = r.error;
    std::replace(error.begin(), error.end(), ',', ';');
    out << r.setting << ',' << to_string(r.set) << ',' << to_string(r.reg) << ',' << optional_csv(r.mean_rmse)
        << ',' << optional_csv(r.mean_cc) << ',' << error << '\n';
  }
}

std::vector<NoiseRow> noise_robustness(const LabeledTrialSet& data, const EvalConfig& base,
                                       std::span<const double> levels) {
  std::vector<NoiseRow> rows;
  for (double q : levels) {
    EvalConfig config = base;
    config.noise_percent = q;
    const auto report = run_cv(data, config);
    for (const auto& m : report.summary) rows.push_back({q, m.set, m.reg, m.mean_rmse, m.mean_cc});
  }
  return rows;
}

nlohmann::json noise_rows_json(std::span<const NoiseRow> rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    out.push_back({{"noise_percent", r.percent},
                   {"feature_set", std::string(to_string(r.set))},
                   {"regressor", std::string(to_string(r.reg))},
                   {"mean_rmse", r.mean_rmse},
                   {"mean_cc", optional_json(r.mean_cc)}});
  }
  return out;
}

void write_noise_csv(std::ostream& out, std::span<const NoiseRow> rows) {
  out << "noise_percent,feature_set,regressor,mean_rmse,mean_cc\n";
  for (const auto& r : rows) {
    out << format_double(r.percent) << ',' << to_string(r.set) << ',' << to_string(r.reg) << ','
        << format_double(r.mean_rmse) << ',' << optional_csv(r.mean_cc) << '\n';
  }
}

TimingTable measure_training_time(std::span<const std::size_t> trial_counts, const TimingOptions& options) {
  require(!trial_counts.empty(), ErrorKind::InvalidArgument, "timing: no trial counts");
  require(options.runs >= 1, ErrorKind::InvalidArgument, "timing: runs must be >= 1");
  const auto largest = *std::max_element(trial_counts.begin(), trial_counts.end());

  SynthSpec spec;
  spec.channels = options.channels;
  spec.samples = options.samples;
  spec.trials = largest;
  spec.sources = std::min<std::size_t>(3, options.channels);
  spec.bandpass = false;
  const auto world = generate_trials(spec, options.seed);
  const std::span<const Matrix> trials(world.data.trials);
  const std::span<const double> targets(world.data.targets);

  CsprOptions fit;
  fit.num_classes = options.num_classes;
  fit.filters_per_class = options.filters_per_class;
  fit.objective = options.objective;
  fit.mode = options.mode;

  auto time_fit = [&](std::size_t n) {
    const auto start = std::chrono::steady_clock::now();
    const auto bank = fit_cspr(trials.first(n), targets.first(n), fit);
    const auto stop = std::chrono::steady_clock::now();
    require(bank.outputs() > 0, ErrorKind::Degenerate, "timing: empty filter bank");
    return std::chrono::duration<double>(stop - start).count();
  };

  time_fit(*std::min_element(trial_counts.begin(), trial_counts.end()));  // warm caches and allocator

  // Rounds sweep every N in turn so a slow stretch of the machine lands on all
  // of them; interference only ever adds time, hence the fastest run per N.
  std::vector<double> best(trial_counts.size(), std::numeric_limits<double>::infinity());
  for (std::size_t r = 0; r < options.runs; ++r) {
    for (std::size_t i = 0; i < trial_counts.size(); ++i) best[i] = std::min(best[i], time_fit(trial_counts[i]));
  }
  TimingTable table;
  for (std::size_t i = 0; i < trial_counts.size(); ++i) table.rows.push_back({trial_counts[i], best[i]});

  const auto m = static_cast<double>(table.rows.size());
  double mx = 0.0;
  double my = 0.0;
  for (const auto& r : table.rows) {
    mx += static_cast<double>(r.trials) / m;
    my += r.seconds / m;
  }
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto& r : table.rows) {
    const double dx = static_cast<double>(r.trials) - mx;
    const double dy = r.seconds - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  table.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  table.intercept = my - table.slope * mx;
  table.r_squared = (sxx > 0.0 && syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 0.0;
  return table;
}

nlohmann::json TimingTable::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& r : rows) rows_json.push_back({{"trials", r.trials}, {"seconds", r.seconds}});
  return {{"rows", rows_json}, {"intercept", intercept}, {"slope", slope}, {"r_squared", r_squared}};
}

void TimingTable::write_csv(std::ostream& out) const {
  out << "trials,seconds\n";
  for (const auto& r : rows) out << r.trials << ',' << format_double(r.seconds) << '\n';
}

}  // namespace cspr
