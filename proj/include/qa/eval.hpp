#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qa/dataset.hpp"
#include "qa/discriminator.hpp"
#include "qa/pipeline.hpp"
#include "qa/ranker.hpp"

namespace qa::eval {

struct QuestionOutcome {
  std::string question_id;
  std::size_t predicted = 0;
  std::size_t answer = 0;
  std::vector<double> probabilities;

  bool operator==(const QuestionOutcome&) const = default;
};

struct EvalReport {
  std::string dataset;
  std::string split;
  std::string system;  ///< "attentive-ranker" or "ir-baseline"
  double accuracy = 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;
  std::vector<QuestionOutcome> predictions;
  std::string config_fingerprint;

  bool operator==(const EvalReport&) const = default;
};

/// Accuracy of the ranker over a labeled split; unlabeled questions throw.
EvalReport accuracy(const ranker::RankerParams& params,
                    std::span<const ranker::QuestionInstance> instances,
                    const std::string& dataset, const std::string& split,
                    const std::string& fingerprint = {});

/// Lexical baseline over precomputed retrievals: each candidate is worth its
/// best retrieved lexical score (0 without documents); the argmax wins, lowest
/// index on ties. Probabilities hold the per-candidate best scores.
EvalReport ir_baseline(std::span<const data::Question> questions,
                       std::span<const pipeline::RetrievalRecord> retrievals,
                       const std::string& dataset, const std::string& split);

/// Same, retrieving from the indices first.
EvalReport ir_baseline(std::span<const text::QuotaIndex> indices,
                       std::span<const data::Question> questions, const std::string& dataset,
                       const std::string& split, const text::ScorerConfig& scorer = {});

/// [a], [a,b], [a,b,c] ... for an ordered discriminator list.
std::vector<std::vector<disc::DiscriminatorId>> cumulative_subsets(
    std::span<const disc::DiscriminatorId> order);

/// Instances for one dataset, carrying every discriminator row any subset uses.
struct ExperimentData {
  std::string name;
  std::vector<ranker::QuestionInstance> train;
  std::vector<ranker::QuestionInstance> dev;
  std::vector<ranker::QuestionInstance> eval;
};

struct AblationCell {
  double accuracy = 0.0;  ///< mean over seeds
  std::vector<double> per_seed;
};

struct AblationRow {
  std::string dataset;
  std::vector<AblationCell> cells;  ///< one per subset
};

struct AblationTable {
  std::vector<std::vector<disc::DiscriminatorId>> subsets;
  std::vector<std::uint64_t> seeds;
  std::string eval_split;
  std::vector<AblationRow> rows;
};

/// Trains and evaluates one model per (dataset, subset, seed). Every subset's
/// rows are checked on every instance before any training starts.
AblationTable ablation_run(std::span<const std::vector<disc::DiscriminatorId>> subsets,
                           std::span<const ExperimentData> datasets,
                           const ranker::RankerConfig& config,
                           std::span<const std::uint64_t> seeds,
                           const std::string& eval_split = "test");

struct SweepPoint {
  std::size_t n = 0;
  double accuracy = 0.0;  ///< mean dev accuracy over seeds
  std::vector<double> per_seed;
  /// Some candidate had fewer than n documents; it used what it had.
  bool short_lists = false;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  std::vector<std::uint64_t> seeds;
};

/// For each n (strictly increasing), truncates every candidate to its top-n
/// documents by lexical score, retrains per seed and records dev accuracy.
SweepResult doc_count_sweep(std::span<const std::size_t> ns,
                            std::span<const ranker::QuestionInstance> train,
                            std::span<const ranker::QuestionInstance> dev,
                            const ranker::RankerConfig& config,
                            std::span<const std::uint64_t> seeds);

/// Truncation used by the sweep, exposed for inspection.
std::vector<ranker::QuestionInstance> truncate_documents(
    std::span<const ranker::QuestionInstance> instances, std::size_t n, bool* short_lists = nullptr);

std::vector<ranker::QuestionInstance> select_rows(std::span<const ranker::QuestionInstance> instances,
                                                  std::span<const disc::DiscriminatorId> rows);

}  // namespace qa::eval
