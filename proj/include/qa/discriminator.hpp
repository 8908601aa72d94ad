#pragma once

#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qa/matrix.hpp"
#include "qa/text_index.hpp"

namespace qa::disc {

/// Names one score source. The three built-in ids are tfd (lexical), drd
/// (question/document relevance) and avd (answer verification); any other
/// non-empty id is accepted as an extension.
class DiscriminatorId {
 public:
  DiscriminatorId() = default;
  explicit DiscriminatorId(std::string id);

  const std::string& str() const noexcept { return id_; }
  auto operator<=>(const DiscriminatorId&) const = default;

 private:
  std::string id_;
};

inline const DiscriminatorId kTfd{"tfd"};
inline const DiscriminatorId kDrd{"drd"};
inline const DiscriminatorId kAvd{"avd"};

/// Parses "tfd,drd,avd" style lists; rejects empty entries and repeats.
std::vector<DiscriminatorId> parse_discriminator_list(std::string_view csv);
std::string join(std::span<const DiscriminatorId> ids);

/// K_disc × N scores for one (question, candidate) pair. Column j belongs to
/// doc_ids[j], row i to row_ids[i]. lexical optionally holds the raw retrieval
/// score per column and is used only to rank columns when truncating.
struct ScoreMatrix {
  std::string question_id;
  std::size_t candidate_index = 0;
  std::vector<std::string> doc_ids;
  std::vector<DiscriminatorId> row_ids;
  Matrix values;
  std::vector<double> lexical;

  std::size_t doc_count() const noexcept { return doc_ids.size(); }

  /// Throws unless shapes agree and every value is in [0, 1].
  void validate() const;

  /// Keeps the listed rows, in the listed order.
  ScoreMatrix select_rows(std::span<const DiscriminatorId> ids) const;

  /// Reorders columns by descending lexical score (ties by column position)
  /// and keeps the first n. Without lexical scores the column order is kept.
  ScoreMatrix truncate_by_lexical(std::size_t n) const;
};

/// One discriminator's scores over an ordered document list.
struct ScoreRow {
  DiscriminatorId id;
  std::vector<std::string> doc_ids;
  std::vector<double> values;
};

/// Stacks rows in the given fixed order. Every row must cover exactly the
/// matrix doc_ids in the same order, and every listed id must be present.
ScoreMatrix assemble_score_matrix(std::string question_id, std::size_t candidate_index,
                                  std::vector<std::string> doc_ids,
                                  std::span<const ScoreRow> rows,
                                  std::span<const DiscriminatorId> order);

/// Divides by the row maximum; an all-zero row stays all-zero.
std::vector<double> max_normalize(std::span<const double> raw);

/// Lexical discriminator: scores each document with the union of question and
/// answer query tokens, then max-normalizes the row.
std::vector<double> tfd_score(const text::InvertedIndex& index, std::string_view question,
                              std::string_view answer, std::span<const std::string> doc_ids,
                              const text::ScorerConfig& scorer = {});

/// Same over documents drawn from several indices; corpus_ids[j] selects the
/// index of doc_ids[j].
std::vector<double> tfd_score(std::span<const text::InvertedIndex* const> indices,
                              std::string_view question, std::string_view answer,
                              std::span<const std::string> doc_ids,
                              std::span<const std::string> corpus_ids,
                              const text::ScorerConfig& scorer = {});

}  // namespace qa::disc
