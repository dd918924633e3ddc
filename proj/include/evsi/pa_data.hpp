#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace evsi {

using Index = Eigen::Index;

/// Probabilistic-analysis dataset: M joint draws of the model parameters and
/// the net monetary benefit of each of D decisions. Row i of `theta` and row i
/// of `nb` belong to the same simulation draw. Immutable once constructed.
class PaDataset {
 public:
  /// Validates shapes (M >= 2, P >= 1, D >= 2), row alignment, name counts
  /// and finiteness. Throws ShapeError / ParseError.
  PaDataset(Eigen::MatrixXd theta, Eigen::MatrixXd nb,
            std::vector<std::string> param_names,
            std::vector<std::string> decision_names);

  const Eigen::MatrixXd& theta() const noexcept { return theta_; }
  const Eigen::MatrixXd& nb() const noexcept { return nb_; }
  const std::vector<std::string>& param_names() const noexcept {
    return param_names_;
  }
  const std::vector<std::string>& decision_names() const noexcept {
    return decision_names_;
  }

  Index rows() const noexcept { return theta_.rows(); }
  Index params() const noexcept { return theta_.cols(); }
  Index decisions() const noexcept { return nb_.cols(); }

  /// Column index of `param.<name>`; throws IndexError when absent.
  Index param_index(const std::string& name) const;

 private:
  Eigen::MatrixXd theta_;
  Eigen::MatrixXd nb_;
  std::vector<std::string> param_names_;
  std::vector<std::string> decision_names_;
};

// CSV interchange: header row with `param.<name>` and `nb.<name>` columns in
// any order, one simulation draw per row.
PaDataset read_pa_dataset(std::istream& in);
PaDataset load_pa_dataset(const std::filesystem::path& path);

// Writes parameters first, then benefits, with 17 significant digits so a
// reload reproduces every value bit-for-bit.
void write_pa_dataset(const PaDataset& pa, std::ostream& out);
void save_pa_dataset(const PaDataset& pa, const std::filesystem::path& path);

struct IncrementalBenefitSamples {
  Eigen::MatrixXd inb;  // M x (D-1), non-reference decisions in original order
  Index reference = 0;
};

IncrementalBenefitSamples incremental_nb(const PaDataset& pa, Index reference);

struct Moments {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
};

Moments prior_moments(std::span<const double> samples);

enum class LikelihoodFamily { gaussian, bernoulli, poisson, binomial, exponential, custom };

std::string to_string(LikelihoodFamily family);
LikelihoodFamily likelihood_family_from_string(const std::string& name);

/// Per-observation likelihood of the proposed study. `trials` is the m of a
/// Binomial(m, phi) observation; ignored by other families.
struct Likelihood {
  LikelihoodFamily family = LikelihoodFamily::gaussian;
  int trials = 1;
};

/// What the proposed study measures: which parameter columns it informs, the
/// likelihood, and the per-focal prior mean, per-observation variance and
/// prior effective sample size.
struct DataCollectionSpec {
  std::vector<Index> focal_indices;
  Likelihood likelihood;
  std::vector<double> mu0;
  std::vector<double> sigma2;
  std::vector<double> n0;

  std::size_t focal_count() const noexcept { return focal_indices.size(); }

  /// Throws ValidationError on any broken invariant.
  void validate(Index param_count) const;

  /// Stable short text identifying the spec, used to tag output curves.
  std::string digest() const;
};

/// M x J matrix holding the focal columns of `pa` in spec order.
Eigen::MatrixXd focal_columns(const PaDataset& pa, std::span<const Index> focal);

}  // namespace evsi
