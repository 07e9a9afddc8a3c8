#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "coxkl/dataset.hpp"
#include "coxkl/types.hpp"

namespace coxkl {

/// Per-subject risk scores from one external model, aligned to a dataset's
/// record order. When the external model is linear, the generating
/// coefficient vector is carried along (zero-padded to the dataset's p).
class ExternalScores {
 public:
  static ExternalScores from_scores(std::string label, Vector scores);

  /// Scores Z' beta_tilde computed on the given dataset.
  static ExternalScores linear(std::string label, const SurvivalDataset& data,
                               Vector beta_tilde);

  const std::string& label() const { return label_; }
  const Vector& scores() const { return scores_; }
  const std::optional<Vector>& linear_coefficients() const {
    return linear_coefficients_;
  }
  int n() const { return static_cast<int>(scores_.size()); }

  ExternalScores subset(const std::vector<int>& indices) const;

  /// Length/finiteness check against a dataset; throws ValidationError.
  void check_alignment(const SurvivalDataset& data) const;

 private:
  ExternalScores(std::string label, Vector scores,
                 std::optional<Vector> linear_coefficients);

  std::string label_;
  Vector scores_;
  std::optional<Vector> linear_coefficients_;
};

/// Reads `id,score` or `id,score_1,...,score_M`; ids must match the
/// dataset's records in order (no silent reordering).
std::vector<ExternalScores> load_scores(std::istream& source,
                                        const SurvivalDataset& data);

}  // namespace coxkl
