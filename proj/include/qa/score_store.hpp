#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qa/discriminator.hpp"

namespace qa::disc {

struct ScoreKey {
  std::string question_id;
  std::size_t candidate_index = 0;
  std::string doc_id;
  std::string discriminator;

  auto operator<=>(const ScoreKey&) const = default;
};

/// Exact-key score table backed by the TSV format
/// `question_id \t candidate_index \t doc_id \t discriminator_id \t score`.
class PrecomputedScoreStore {
 public:
  /// Throws if the score is outside [0, 1]. A repeated key overwrites.
  void insert(ScoreKey key, double score);
  std::optional<double> find(const ScoreKey& key) const;
  std::size_t size() const noexcept { return scores_.size(); }

  /// Merges another store in; its entries win on conflicts.
  void merge(const PrecomputedScoreStore& other);

  /// Errors name the line of the offending record.
  static PrecomputedScoreStore load(const std::string& path);
  /// Rows in key order with shortest round-trip number formatting.
  void save(const std::string& path) const;

  const std::map<ScoreKey, double>& entries() const noexcept { return scores_; }
  bool operator==(const PrecomputedScoreStore&) const = default;

 private:
  std::map<ScoreKey, double> scores_;
};

struct ScoreLookup {
  std::vector<double> values;
  std::size_t missing = 0;
};

/// Per-document exact lookup; absent keys take missing_score and are counted.
ScoreLookup lookup_scores(const PrecomputedScoreStore& store, const std::string& question_id,
                          std::size_t candidate_index, std::span<const std::string> doc_ids,
                          const DiscriminatorId& id, double missing_score = 0.0);

}  // namespace qa::disc
