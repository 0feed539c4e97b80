#pragma once

#include "cspr/fuzzy.hpp"
#include "cspr/linalg.hpp"
#include "cspr/trials.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace cspr {

/// Whether the class-k denominator excludes class k (one-versus-rest) or
/// sums over every class (one-versus-all).
enum class Objective { OneVsRest, OneVsAll };

enum class FilterVariant { CsprOvr, CsprOva, CspOvr, CspOva };

/// How the per-class covariance is formed from weighted trials.
///  - MeanTrial: covariance of the membership-weighted mean trial.
///  - WeightedCov: membership-weighted mean of per-trial covariances.
enum class CovarianceMode { MeanTrial, WeightedCov };

std::string_view to_string(FilterVariant variant) noexcept;
std::string_view to_string(CovarianceMode mode) noexcept;
FilterVariant parse_filter_variant(std::string_view name);
CovarianceMode parse_covariance_mode(std::string_view name);
Objective objective_of(FilterVariant variant) noexcept;

/// Common average reference: subtracts the cross-channel mean at every sample.
Matrix car_filter(const Matrix& trial);

/// Sum_n w_n X_n / Sum_n w_n.
Matrix fuzzy_mean_trial(std::span<const Matrix> trials, std::span<const double> weights);
Matrix fuzzy_mean_trial(const LabeledTrialSet& data, const FuzzyPartition& partition, std::size_t k);

Matrix class_covariance(std::span<const Matrix> trials, std::span<const double> weights,
                        CovarianceMode mode);
Matrix class_covariance(const LabeledTrialSet& data, const FuzzyPartition& partition, std::size_t k,
                        CovarianceMode mode);

/// Learned spatial filters W = [W_1, ..., W_K], C x (K F), grouped by class.
class FilterBank {
 public:
  FilterBank() = default;
  FilterBank(Matrix weights, std::vector<Vector> eigenvalues, FilterVariant variant,
             CovarianceMode mode, std::optional<FuzzyPartition> partition = std::nullopt);

  const Matrix& weights() const noexcept { return weights_; }
  const std::vector<Vector>& eigenvalues() const noexcept { return eigenvalues_; }
  std::size_t channels() const noexcept { return static_cast<std::size_t>(weights_.rows()); }
  std::size_t outputs() const noexcept { return static_cast<std::size_t>(weights_.cols()); }
  std::size_t num_classes() const noexcept { return eigenvalues_.size(); }
  std::size_t filters_per_class() const noexcept {
    return eigenvalues_.empty() ? 0 : static_cast<std::size_t>(eigenvalues_.front().size());
  }
  FilterVariant variant() const noexcept { return variant_; }
  CovarianceMode covariance_mode() const noexcept { return mode_; }
  const std::optional<FuzzyPartition>& partition() const noexcept { return partition_; }

  /// W^T X. Throws Dimension on a channel mismatch.
  Matrix apply(const Matrix& trial) const;

  /// JSON header followed by the little-endian float64 column-major W payload.
  void write(std::ostream& out) const;
  static FilterBank read(std::istream& in);

 private:
  Matrix weights_;
  std::vector<Vector> eigenvalues_;
  FilterVariant variant_ = FilterVariant::CsprOvr;
  CovarianceMode mode_ = CovarianceMode::MeanTrial;
  std::optional<FuzzyPartition> partition_;
};

inline Matrix apply_filter(const FilterBank& bank, const Matrix& trial) { return bank.apply(trial); }

struct CsprOptions {
  std::size_t num_classes = 3;
  std::size_t filters_per_class = 21;
  Objective objective = Objective::OneVsRest;
  MembershipShape shape = MembershipShape::Triangular;
  CovarianceMode mode = CovarianceMode::MeanTrial;
  double ridge = kDefaultRidge;
  std::size_t jobs = 1;
};

/// Per-class filters from an explicit N x K membership matrix. Column k of
/// the result block k holds the top-F generalized eigenvectors of
/// (Sigma_k, denominator_k).
struct MembershipFit {
  Matrix weights;
  std::vector<Vector> eigenvalues;
};
MembershipFit fit_from_memberships(std::span<const Matrix> trials, const Matrix& memberships,
                                   std::size_t filters_per_class, Objective objective,
                                   CovarianceMode mode, double ridge = kDefaultRidge,
                                   std::size_t jobs = 1);

/// Fuzzy-class CSP for continuous targets.
FilterBank fit_cspr(const LabeledTrialSet& data, const CsprOptions& options);
/// Same, without validating values; trials must share one shape.
FilterBank fit_cspr(std::span<const Matrix> trials, std::span<const double> targets, const CsprOptions& options);

/// Multiclass CSP for crisp labels in [0, K).
FilterBank fit_csp(std::span<const Matrix> trials, std::span<const std::size_t> labels,
                   std::size_t num_classes, std::size_t filters_per_class, Objective objective,
                   CovarianceMode mode, double ridge = kDefaultRidge);

}  // namespace cspr
