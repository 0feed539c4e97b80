#pragma once

#include "cspr/features.hpp"
#include "cspr/fuzzy.hpp"
#include "cspr/regression.hpp"
#include "cspr/rng.hpp"
#include "cspr/spatial_filter.hpp"
#include "cspr/trials.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cspr {

enum class FeatureSet { Raw, Car, Ovr, Ova };
enum class Regressor { Lasso, Knn };

std::string_view to_string(FeatureSet set) noexcept;
std::string_view to_string(Regressor reg) noexcept;
FeatureSet parse_feature_set(std::string_view name);
Regressor parse_regressor(std::string_view name);

struct EvalConfig {
  std::vector<FeatureSet> feature_sets = {FeatureSet::Raw, FeatureSet::Car, FeatureSet::Ovr, FeatureSet::Ova};
  std::vector<Regressor> regressors = {Regressor::Lasso, Regressor::Knn};
  std::size_t folds = 5;
  std::size_t repeats = 10;
  std::uint64_t seed = 0;

  std::size_t num_classes = 3;
  std::size_t filters_per_class = 21;
  MembershipShape shape = MembershipShape::Triangular;
  CovarianceMode mode = CovarianceMode::MeanTrial;
  double ridge = kDefaultRidge;

  double noise_percent = 0.0;  ///< attribute noise q%, applied to train and test features
  std::size_t knn_k = 5;
  std::size_t lasso_folds = 5;
  std::size_t lasso_grid = 50;

  double segment_seconds = 1.0;
  double overlap_fraction = 0.5;

  /// Thread count; results do not depend on it.
  std::size_t jobs = 1;

  void validate() const;
  nlohmann::json to_json() const;  ///< excludes `jobs`
  static EvalConfig from_json(const nlohmann::json& doc);
};

/// Fold membership for one repeat: a seeded shuffle split into `folds`
/// nearly equal contiguous blocks. Entry f holds the test indices of fold f.
std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::size_t folds, std::uint64_t seed,
                                                 std::size_t repeat);

/// Replaces exactly round(q% N) randomly chosen entries of every column with
/// uniform draws between that column's min and max.
Matrix inject_attribute_noise(const Matrix& features, double percent, Rng& rng);

/// The supervised part of a pipeline fitted on training trials only.
class FeatureStage {
 public:
  static FeatureStage fit(const LabeledTrialSet& train, FeatureSet set, const EvalConfig& config);

  FeatureSet set() const noexcept { return set_; }
  const std::optional<FilterBank>& bank() const noexcept { return bank_; }

  FeatureMatrix transform(std::span<const Matrix> trials, std::size_t jobs = 1) const;

 private:
  FeatureSet set_ = FeatureSet::Raw;
  BandPowerOptions options_;
  std::optional<FilterBank> bank_;
};

using RegressionModel = std::variant<LassoModel, KnnModel>;

RegressionModel fit_regressor(const Matrix& features, std::span<const double> targets, Regressor reg,
                              const EvalConfig& config, std::uint64_t seed);
Vector predict(const RegressionModel& model, const Matrix& features);

struct FoldScore {
  std::size_t repeat = 0;
  std::size_t fold = 0;
  FeatureSet set = FeatureSet::Raw;
  Regressor reg = Regressor::Lasso;
  double rmse = 0.0;
  std::optional<double> cc;  ///< empty when undefined (constant predictions or targets)
};

struct MethodSummary {
  FeatureSet set;
  Regressor reg;
  double mean_rmse = 0.0;
  std::optional<double> mean_cc;
  std::size_t cc_missing = 0;  ///< folds whose CC was undefined
};

/// Percentage improvement of `improved` over `base`: (base - new) / base for
/// RMSE, (new - base) / base for CC, both x 100.
struct Improvement {
  Regressor reg;
  FeatureSet improved;
  FeatureSet base;
  double rmse_percent = 0.0;
  std::optional<double> cc_percent;
};

struct EvalReport {
  EvalConfig config;
  std::size_t trials = 0;
  std::vector<FoldScore> scores;  ///< ordered by repeat, fold, feature set, regressor
  std::vector<MethodSummary> summary;
  std::vector<Improvement> improvements;
  bool cc_missing = false;

  const MethodSummary& method(FeatureSet set, Regressor reg) const;

  nlohmann::json to_json() const;
  void write_csv(std::ostream& out) const;
  /// Mean RMSE/CC per method (layout of the per-method bar chart).
  void write_method_means_csv(std::ostream& out) const;
  /// Pairwise percentage improvements.
  void write_improvements_csv(std::ostream& out) const;
};

/// Repeated k-fold cross-validation. Per repeat: shuffle, split, and for each
/// fold fit the spatial filters, feature scaling and regressor on the other
/// folds only; score on the held-out fold. Means are over folds, then repeats.
EvalReport run_cv(const LabeledTrialSet& data, const EvalConfig& config);

/// Scores of one (repeat, fold) job; exposed for leakage tests.
std::vector<FoldScore> evaluate_fold(const LabeledTrialSet& train, const LabeledTrialSet& test,
                                     const EvalConfig& config, std::size_t repeat, std::size_t fold);

struct SweepRow {
  std::size_t setting = 0;
  Regressor reg = Regressor::Lasso;
  FeatureSet set = FeatureSet::Ovr;
  std::optional<double> mean_rmse;
  std::optional<double> mean_cc;
  std::string error;  ///< non-empty when this setting could not run
};

struct SweepTable {
  std::string parameter;  ///< "K" or "F"
  std::vector<SweepRow> rows;

  nlohmann::json to_json() const;
  void write_csv(std::ostream& out) const;
};

inline const std::vector<std::size_t> kDefaultSweepK = {2, 3, 4, 5, 6, 7};
inline const std::vector<std::size_t> kDefaultSweepF = {5, 10, 20, 30, 40, 50, 60};
inline constexpr std::size_t kSweepRepeats = 5;

/// Runs run_cv for each K (or F) with the base config's other settings and
/// `repeats` repeats. Feature sets other than OVR/OVA in the base config are
/// ignored; an empty selection means OVR. Failing settings are recorded, not thrown.
SweepTable sweep_k(const LabeledTrialSet& data, const EvalConfig& base, std::span<const std::size_t> ks,
                   std::size_t repeats = kSweepRepeats);
SweepTable sweep_f(const LabeledTrialSet& data, const EvalConfig& base, std::span<const std::size_t> fs,
                   std::size_t repeats = kSweepRepeats);

struct NoiseRow {
  double percent = 0.0;
  FeatureSet set = FeatureSet::Raw;
  Regressor reg = Regressor::Lasso;
  double mean_rmse = 0.0;
  std::optional<double> mean_cc;
};

inline const std::vector<double> kDefaultNoiseLevels = {0.0, 10.0, 20.0, 30.0, 40.0};

std::vector<NoiseRow> noise_robustness(const LabeledTrialSet& data, const EvalConfig& base,
                                       std::span<const double> levels);
nlohmann::json noise_rows_json(std::span<const NoiseRow> rows);
void write_noise_csv(std::ostream& out, std::span<const NoiseRow> rows);

struct TimingOptions {
  std::size_t channels = 62;
  std::size_t samples = 768;
  std::size_t num_classes = 3;
  std::size_t filters_per_class = 21;
  Objective objective = Objective::OneVsRest;
  CovarianceMode mode = CovarianceMode::MeanTrial;
  std::size_t runs = 9;
  std::uint64_t seed = 0;
};

struct TimingRow {
  std::size_t trials = 0;
  double seconds = 0.0;  ///< fastest of `runs` wall-clock fits
};

struct TimingTable {
  std::vector<TimingRow> rows;
  double intercept = 0.0;  ///< least-squares seconds = intercept + slope N
  double slope = 0.0;
  double r_squared = 0.0;

  nlohmann::json to_json() const;
  void write_csv(std::ostream& out) const;
};

TimingTable measure_training_time(std::span<const std::size_t> trial_counts, const TimingOptions& options);

}  // namespace cspr
