#include "coxkl/external_scores.hpp"

#include <istream>

#include "text_util.hpp"

namespace coxkl {

ExternalScores::ExternalScores(std::string label, Vector scores,
                               std::optional<Vector> linear_coefficients)
    : label_(std::move(label)),
      scores_(std::move(scores)),
      linear_coefficients_(std::move(linear_coefficients)) {
  if (!scores_.allFinite())
    throw ValidationError("external scores '" + label_ +
                          "': non-finite score");
}

ExternalScores ExternalScores::from_scores(std::string label, Vector scores) {
  return ExternalScores(std::move(label), std::move(scores), std::nullopt);
}

ExternalScores ExternalScores::linear(std::string label,
                                      const SurvivalDataset& data,
                                      Vector beta_tilde) {
  if (beta_tilde.size() != data.p())
    throw ValidationError("external scores '" + label +
                          "': coefficient length != p");
  Vector scores = data.covariates() * beta_tilde;
  return ExternalScores(std::move(label), std::move(scores),
                        std::move(beta_tilde));
}

ExternalScores ExternalScores::subset(const std::vector<int>& indices) const {
  Vector sub(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t i = 0; i < indices.size(); ++i)
    sub[static_cast<Eigen::Index>(i)] = scores_[indices[i]];
  return ExternalScores(label_, std::move(sub), linear_coefficients_);
}

void ExternalScores::check_alignment(const SurvivalDataset& data) const {
  if (n() != data.n())
    throw ValidationError("external scores '" + label_ + "': " +
                          std::to_string(n()) + " scores for " +
                          std::to_string(data.n()) + " records");
}

std::vector<ExternalScores> load_scores(std::istream& source,
                                        const SurvivalDataset& data) {
  std::string line;
  if (!std::getline(source, line)) throw ParseError("scores: empty input");
  const auto header = detail::split_csv(line);
  if (header.size() < 2 || header[0] != "id")
    throw ParseError("scores: header must be id,score[,...]");

  const int m = static_cast<int>(header.size()) - 1;
  std::vector<std::string> labels(header.begin() + 1, header.end());
  Matrix values(data.n(), m);

  int row = 0;
  int line_no = 1;
  while (std::getline(source, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = detail::split_csv(line);
    if (static_cast<int>(cells.size()) != m + 1)
      throw ParseError("scores line " + std::to_string(line_no) +
                       ": wrong cell count");
    if (row >= data.n())
      throw ParseError("scores: more rows than dataset records");
    if (std::string_view(cells[0]) != data.ids()[row])
      throw ValidationError("scores line " + std::to_string(line_no) +
                            ": id '" + std::string(cells[0]) +
                            "' does not match dataset id '" +
                            data.ids()[row] + "' (same order required)");
    for (int j = 0; j < m; ++j) {
      const auto v = detail::parse_double(cells[j + 1]);
      if (!v)
        throw ParseError("scores line " + std::to_string(line_no) +
                         ", column '" + labels[j] + "': malformed number");
      values(row, j) = *v;
    }
    ++row;
  }
  if (row != data.n())
    throw ValidationError("scores: " + std::to_string(row) + " rows for " +
                          std::to_string(data.n()) + " records");

  std::vector<ExternalScores> out;
  out.reserve(m);
  for (int j = 0; j < m; ++j)
    out.push_back(ExternalScores::from_scores(labels[j], values.col(j)));
  return out;
}

}  // namespace coxkl
