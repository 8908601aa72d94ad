#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qa/dataset.hpp"
#include "qa/discriminator.hpp"
#include "qa/ranker.hpp"
#include "qa/remote_scorer.hpp"
#include "qa/score_store.hpp"
#include "qa/text_index.hpp"

namespace qa::pipeline {

/// Retrieval output for one (question, candidate); one JSON line each.
struct RetrievalRecord {
  std::string question_id;
  std::size_t candidate_index = 0;
  bool degenerate = false;
  std::vector<text::RetrievedDoc> docs;
  /// Documents contributed by each index, in index order.
  std::vector<std::size_t> counts;

  bool operator==(const RetrievalRecord&) const = default;
};

std::vector<RetrievalRecord> retrieve_all(std::span<const text::QuotaIndex> indices,
                                          std::span<const data::Question> questions,
                                          const text::ScorerConfig& scorer = {});

std::string retrievals_to_jsonl(std::span<const RetrievalRecord> records);
std::vector<RetrievalRecord> read_retrievals(const std::string& path);

/// Where a discriminator's scores come from: "native" (the lexical
/// discriminator, computed from the indices), "file:<tsv>" or "remote:<url>".
struct ScoreBinding {
  enum class Kind { kNative, kFile, kRemote };
  Kind kind = Kind::kNative;
  std::string target;

  static ScoreBinding parse(const std::string& spec);
  std::string str() const;
};

struct ScoringInputs {
  std::span<const data::Question> questions;
  std::span<const RetrievalRecord> retrievals;
  std::span<const text::InvertedIndex* const> indices;
  text::ScorerConfig scorer;
  /// Template for remote bindings; base_url comes from the binding.
  disc::RemoteScorerConfig remote;
  /// Directory for remote-score caches (one file per discriminator), if any.
  std::optional<std::string> cache_dir;
};

struct ScoringOutcome {
  disc::PrecomputedScoreStore store;
  /// discriminator -> lookups that fell back to the missing-score policy
  std::map<std::string, std::size_t> missing;
  std::size_t remote_requests = 0;
};

/// Produces one score per (retrieved document, discriminator) using each
/// discriminator's binding.
ScoringOutcome score_retrievals(const ScoringInputs& inputs,
                                std::span<const disc::DiscriminatorId> discriminators,
                                const std::map<std::string, ScoreBinding>& bindings);

struct InstanceOptions {
  std::size_t n_max = 40;
  double missing_score = 0.0;
};

/// Joins questions, their retrievals and a score store into ranker input.
/// Rows follow `rows`; each candidate keeps at most n_max documents in
/// retrieval order. Candidates without a retrieval record get no documents.
std::vector<ranker::QuestionInstance> build_instances(
    std::span<const data::Question> questions, std::span<const RetrievalRecord> retrievals,
    const disc::PrecomputedScoreStore& store, std::span<const disc::DiscriminatorId> rows,
    const InstanceOptions& options = {}, std::size_t* missing = nullptr);

}  // namespace qa::pipeline
