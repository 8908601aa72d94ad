#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "qa/ranker.hpp"

namespace qa::ranker {

struct RankedDoc {
  std::string doc_id;
  double weight = 0.0;
};

struct CandidateRanking {
  std::string question_id;
  std::size_t candidate_index = 0;
  std::vector<RankedDoc> ranking;
};

/// Documents of every (question, candidate) ordered by attention weight,
/// descending, ties by ascending doc_id; at most top_k entries with the raw
/// (not renormalized) weights.
std::vector<CandidateRanking> export_rankings(const RankerParams& params,
                                              std::span<const QuestionInstance> instances,
                                              std::size_t top_k);

/// {"question_id", "candidate_index", "ranking": [{"doc_id", "weight"}]} per line.
std::string rankings_to_jsonl(std::span<const CandidateRanking> rankings);
std::vector<CandidateRanking> rankings_from_jsonl(const std::string& text);

}  // namespace qa::ranker
