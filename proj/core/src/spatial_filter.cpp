#include "cspr/spatial_filter.hpp"

#include "cspr/binary.hpp"
#include "cspr/error.hpp"
#include "cspr/parallel.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

namespace cspr {

namespace {

constexpr char kBankMagic[8] = {'C', 'S', 'P', 'R', 'F', 'B', '0', '1'};
constexpr double kMinClassWeight = 1e-12;

void check_weights(std::span<const Matrix> trials, std::span<const double> weights) {
  require(!trials.empty(), ErrorKind::Degenerate, "class statistics: no trials");
  require(trials.size() == weights.size(), ErrorKind::Dimension,
          "class statistics: trial and weight counts differ");
  for (double w : weights) {
    require(std::isfinite(w) && w >= 0.0, ErrorKind::InvalidArgument,
            "class statistics: weights must be finite and non-negative");
  }
}

double total_weight(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  return total;
}

std::vector<double> class_weights(const LabeledTrialSet& data, const FuzzyPartition& partition,
                                  std::size_t k) {
  std::vector<double> w(data.size());
  for (std::size_t n = 0; n < data.size(); ++n) w[n] = partition.membership(k, data.targets[n]);
  return w;
}

}  // namespace

std::string_view to_string(FilterVariant variant) noexcept {
  switch (variant) {
    case FilterVariant::CsprOvr: return "cspr-ovr";
    case FilterVariant::CsprOva: return "cspr-ova";
    case FilterVariant::CspOvr: return "csp-ovr";
    case FilterVariant::CspOva: return "csp-ova";
  }
  return "cspr-ovr";
}

std::string_view to_string(CovarianceMode mode) noexcept {
  return mode == CovarianceMode::WeightedCov ? "weighted-cov" : "mean-trial";
}

FilterVariant parse_filter_variant(std::string_view name) {
  if (name == "cspr-ovr" || name == "ovr") return FilterVariant::CsprOvr;
  if (name == "cspr-ova" || name == "ova") return FilterVariant::CsprOva;
  if (name == "csp-ovr") return FilterVariant::CspOvr;
  if (name == "csp-ova") return FilterVariant::CspOva;
  fail(ErrorKind::InvalidArgument, "unknown filter variant '" + std::string(name) + "'");
}

CovarianceMode parse_covariance_mode(std::string_view name) {
  if (name == "mean-trial") return CovarianceMode::MeanTrial;
  if (name == "weighted-cov") return CovarianceMode::WeightedCov;
  fail(ErrorKind::InvalidArgument, "unknown covariance mode '" + std::string(name) + "'");
}

Objective objective_of(FilterVariant variant) noexcept {
  return variant == FilterVariant::CsprOva || variant == FilterVariant::CspOva ? Objective::OneVsAll
                                                                               : Objective::OneVsRest;
}

Matrix car_filter(const Matrix& trial) {
  require(trial.rows() >= 2, ErrorKind::Dimension, "car_filter: need at least 2 channels");
  const Eigen::RowVectorXd mean = trial.colwise().mean();
  return trial.rowwise() - mean;
}

Matrix fuzzy_mean_trial(std::span<const Matrix> trials, std::span<const double> weights) {
  check_weights(trials, weights);
  const double total = total_weight(weights);
  require(total > kMinClassWeight, ErrorKind::Degenerate, "fuzzy class has zero total membership");
  Matrix sum = Matrix::Zero(trials.front().rows(), trials.front().cols());
  for (std::size_t n = 0; n < trials.size(); ++n) {
    if (weights[n] != 0.0) sum.noalias() += weights[n] * trials[n];
  }
  return sum / total;
}

Matrix fuzzy_mean_trial(const LabeledTrialSet& data, const FuzzyPartition& partition, std::size_t k) {
  const auto w = class_weights(data, partition, k);
  return fuzzy_mean_trial(data.trials, w);
}

Matrix class_covariance(std::span<const Matrix> trials, std::span<const double> weights,
                        CovarianceMode mode) {
  if (mode == CovarianceMode::MeanTrial) return trial_covariance(fuzzy_mean_trial(trials, weights));

  check_weights(trials, weights);
  const double total = total_weight(weights);
  require(total > kMinClassWeight, ErrorKind::Degenerate, "fuzzy class has zero total membership");
  const auto c = trials.front().rows();
  Matrix sum = Matrix::Zero(c, c);
  for (std::size_t n = 0; n < trials.size(); ++n) {
    if (weights[n] != 0.0) sum.noalias() += weights[n] * trial_covariance(trials[n]);
  }
  return sum / total;
}

Matrix class_covariance(const LabeledTrialSet& data, const FuzzyPartition& partition, std::size_t k,
                        CovarianceMode mode) {
  const auto w = class_weights(data, partition, k);
  return class_covariance(data.trials, w, mode);
}

FilterBank::FilterBank(Matrix weights, std::vector<Vector> eigenvalues, FilterVariant variant,
                       CovarianceMode mode, std::optional<FuzzyPartition> partition)
    : weights_(std::move(weights)),
      eigenvalues_(std::move(eigenvalues)),
      variant_(variant),
      mode_(mode),
      partition_(std::move(partition)) {
  require(!eigenvalues_.empty(), ErrorKind::InvalidArgument, "filter bank: no classes");
  const auto f = eigenvalues_.front().size();
  for (const auto& ev : eigenvalues_) {
    require(ev.size() == f, ErrorKind::Dimension, "filter bank: ragged eigenvalue blocks");
  }
  require(weights_.cols() == static_cast<Eigen::Index>(eigenvalues_.size()) * f, ErrorKind::Dimension,
          "filter bank: weight columns must equal K * F");
  require(weights_.rows() >= 1, ErrorKind::Dimension, "filter bank: no channels");
  if (partition_) {
    require(partition_->num_classes() == eigenvalues_.size(), ErrorKind::Dimension,
            "filter bank: partition class count differs from K");
  }
}

Matrix FilterBank::apply(const Matrix& trial) const {
  require(trial.rows() == weights_.rows(), ErrorKind::Dimension,
          "apply_filter: trial has " + std::to_string(trial.rows()) + " channels, filters expect " +
              std::to_string(weights_.rows()));
  return weights_.transpose() * trial;
}

void FilterBank::write(std::ostream& out) const {
  nlohmann::json header;
  header["format"] = "cspr-filter-bank";
  header["version"] = 1;
  header["channels"] = channels();
  header["outputs"] = outputs();
  header["K"] = num_classes();
  header["F"] = filters_per_class();
  header["variant"] = std::string(to_string(variant_));
  header["covariance_mode"] = std::string(to_string(mode_));
  auto& ev = header["eigenvalues"] = nlohmann::json::array();
  for (const auto& block : eigenvalues_) ev.push_back(std::vector<double>(block.data(), block.data() + block.size()));
  header["partition"] = partition_ ? partition_->to_json() : nlohmann::json(nullptr);

  const std::string text = header.dump();
  out.write(kBankMagic, sizeof kBankMagic);
  binary::write_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  binary::write_f64(out, std::span<const double>(weights_.data(), static_cast<std::size_t>(weights_.size())));
  if (!out) fail(ErrorKind::Format, "filter bank: write failed");
}

FilterBank FilterBank::read(std::istream& in) {
  char magic[sizeof kBankMagic];
  if (!in.read(magic, sizeof magic) || std::string_view(magic, sizeof magic) != std::string_view(kBankMagic, sizeof kBankMagic)) {
    fail(ErrorKind::Format, "filter bank: bad magic");
  }
  std::uint64_t header_len = 0;
  if (!binary::read_u64(in, header_len) || header_len > (1u << 26)) {
    fail(ErrorKind::Format, "filter bank: bad header length");
  }
  std::string text(header_len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(header_len))) {
    fail(ErrorKind::Format, "filter bank: truncated header");
  }

  try {
    const auto header = nlohmann::json::parse(text);
    if (header.at("format") != "cspr-filter-bank") fail(ErrorKind::Format, "filter bank: wrong format tag");
    const auto c = header.at("channels").get<std::size_t>();
    const auto outputs = header.at("outputs").get<std::size_t>();
    std::vector<Vector> eigenvalues;
    for (const auto& block : header.at("eigenvalues")) {
      auto values = block.get<std::vector<double>>();
      eigenvalues.emplace_back(Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size())));
    }
    require(eigenvalues.size() == header.at("K").get<std::size_t>(), ErrorKind::Format,
            "filter bank: K does not match eigenvalue blocks");
    std::optional<FuzzyPartition> partition;
    if (!header.at("partition").is_null()) partition = FuzzyPartition::from_json(header.at("partition"));

    Matrix weights(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(outputs));
    if (!binary::read_f64(in, std::span<double>(weights.data(), static_cast<std::size_t>(weights.size())))) {
      fail(ErrorKind::Format, "filter bank: truncated weight payload");
    }
    return FilterBank(std::move(weights), std::move(eigenvalues),
                      parse_filter_variant(header.at("variant").get<std::string>()),
                      parse_covariance_mode(header.at("covariance_mode").get<std::string>()),
                      std::move(partition));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, std::string("filter bank: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Format) throw;
    fail(ErrorKind::Format, std::string("filter bank: ") + e.what());
  }
}

MembershipFit fit_from_memberships(std::span<const Matrix> trials, const Matrix& memberships,
                                   std::size_t filters_per_class, Objective objective,
                                   CovarianceMode mode, double ridge, std::size_t jobs) {
  require(!trials.empty(), ErrorKind::Degenerate, "spatial filter fit: no training trials");
  require(memberships.rows() == static_cast<Eigen::Index>(trials.size()), ErrorKind::Dimension,
          "spatial filter fit: membership rows must equal the trial count");
  const auto num_classes = static_cast<std::size_t>(memberships.cols());
  require(num_classes >= 2, ErrorKind::InvalidArgument, "spatial filter fit: need K >= 2");
  const auto c = static_cast<std::size_t>(trials.front().rows());
  require(filters_per_class >= 1 && filters_per_class <= c, ErrorKind::Dimension,
          "spatial filter fit: F = " + std::to_string(filters_per_class) + " exceeds C = " + std::to_string(c));
  for (const auto& t : trials) {
    require(t.rows() == trials.front().rows() && t.cols() == trials.front().cols(), ErrorKind::Dimension,
            "spatial filter fit: trials differ in shape");
  }

  for (std::size_t k = 0; k < num_classes; ++k) {
    if (!(memberships.col(static_cast<Eigen::Index>(k)).sum() > kMinClassWeight)) {
      fail(ErrorKind::Degenerate, "fuzzy class " + std::to_string(k + 1) + " has zero total membership");
    }
  }

  // Per-trial covariances are shared by every class in WeightedCov mode.
  std::vector<Matrix> trial_covs;
  if (mode == CovarianceMode::WeightedCov) {
    trial_covs.resize(trials.size());
    parallel_for(trials.size(), jobs, [&](std::size_t n) { trial_covs[n] = trial_covariance(trials[n]); });
  }

  std::vector<Matrix> class_covs(num_classes);
  parallel_for(num_classes, jobs, [&](std::size_t k) {
    const auto w = memberships.col(static_cast<Eigen::Index>(k));
    const double total = w.sum();
    if (mode == CovarianceMode::MeanTrial) {
      Matrix mean = Matrix::Zero(trials.front().rows(), trials.front().cols());
      for (std::size_t n = 0; n < trials.size(); ++n) {
        if (w(static_cast<Eigen::Index>(n)) != 0.0) mean.noalias() += w(static_cast<Eigen::Index>(n)) * trials[n];
      }
      class_covs[k] = trial_covariance(mean / total);
    } else {
      Matrix sum = Matrix::Zero(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(c));
      for (std::size_t n = 0; n < trials.size(); ++n) {
        if (w(static_cast<Eigen::Index>(n)) != 0.0) sum.noalias() += w(static_cast<Eigen::Index>(n)) * trial_covs[n];
      }
      class_covs[k] = sum / total;
    }
  });

  MembershipFit fit;
  fit.weights.resize(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(num_classes * filters_per_class));
  fit.eigenvalues.resize(num_classes);
  std::vector<GenEigResult> solved(num_classes);
  parallel_for(num_classes, jobs, [&](std::size_t k) {
    Matrix denominator = Matrix::Zero(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(c));
    for (std::size_t i = 0; i < num_classes; ++i) {
      if (i != k || objective == Objective::OneVsAll) denominator += class_covs[i];
    }
    try {
      solved[k] = solve_generalized_eig(class_covs[k], denominator, filters_per_class, ridge);
    } catch (const Error& e) {
      fail(e.kind(), "class " + std::to_string(k + 1) + ": " + e.what());
    }
  });
  for (std::size_t k = 0; k < num_classes; ++k) {
    fit.weights.middleCols(static_cast<Eigen::Index>(k * filters_per_class),
                           static_cast<Eigen::Index>(filters_per_class)) = solved[k].eigenvectors;
    fit.eigenvalues[k] = solved[k].eigenvalues;
  }
  return fit;
}

FilterBank fit_cspr(std::span<const Matrix> trials, std::span<const double> targets, const CsprOptions& options) {
  require(!trials.empty(), ErrorKind::InvalidArgument, "fit_cspr: no trials");
  require(trials.size() == targets.size(), ErrorKind::Dimension, "fit_cspr: target count differs from trial count");
  const auto channels = static_cast<std::size_t>(trials.front().rows());
  require(options.filters_per_class <= channels, ErrorKind::Dimension,
          "fit_cspr: F = " + std::to_string(options.filters_per_class) + " exceeds C = " + std::to_string(channels));
  auto partition = FuzzyPartition::build(targets, options.num_classes, options.shape);

  Matrix mu(static_cast<Eigen::Index>(trials.size()), static_cast<Eigen::Index>(options.num_classes));
  for (std::size_t n = 0; n < trials.size(); ++n) {
    for (std::size_t k = 0; k < options.num_classes; ++k) {
      mu(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k)) = partition.membership(k, targets[n]);
    }
  }
  auto fit = fit_from_memberships(trials, mu, options.filters_per_class, options.objective, options.mode,
                                  options.ridge, options.jobs);
  const auto variant = options.objective == Objective::OneVsAll ? FilterVariant::CsprOva : FilterVariant::CsprOvr;
  return FilterBank(std::move(fit.weights), std::move(fit.eigenvalues), variant, options.mode, std::move(partition));
}

FilterBank fit_cspr(const LabeledTrialSet& data, const CsprOptions& options) {
  data.validate();
  return fit_cspr(data.trials, data.targets, options);
}

FilterBank fit_csp(std::span<const Matrix> trials, std::span<const std::size_t> labels,
                   std::size_t num_classes, std::size_t filters_per_class, Objective objective,
                   CovarianceMode mode, double ridge) {
  require(labels.size() == trials.size(), ErrorKind::Dimension, "fit_csp: label count differs from trial count");
  Matrix mu = Matrix::Zero(static_cast<Eigen::Index>(trials.size()), static_cast<Eigen::Index>(num_classes));
  for (std::size_t n = 0; n < labels.size(); ++n) {
    require(labels[n] < num_classes, ErrorKind::InvalidArgument, "fit_csp: label out of range");
    mu(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(labels[n])) = 1.0;
  }
  auto fit = fit_from_memberships(trials, mu, filters_per_class, objective, mode, ridge);
  const auto variant = objective == Objective::OneVsAll ? FilterVariant::CspOva : FilterVariant::CspOvr;
  return FilterBank(std::move(fit.weights), std::move(fit.eigenvalues), variant, mode);
}

}  // namespace cspr
