#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "qa/ranker.hpp"

namespace qa::synth {

struct TaskOptions {
  std::size_t questions = 200;
  std::size_t candidates = 4;
  std::size_t docs = 10;
  std::uint64_t seed = 1;
};

/// Rows tfd, drd, avd. The avd row reads 0.9 on every document of the correct
/// candidate and 0.1 elsewhere; tfd and drd are uniform noise.
std::vector<ranker::QuestionInstance> separable_task(const TaskOptions& opts);

/// Rows tfd, drd, avd with columns in descending lexical order. The correct
/// candidate has one informative document (avd 0.9) at a lexical rank drawn
/// uniformly from 1..5; every other avd entry is uniform in [0, 0.5]. tfd is
/// the normalized lexical score and drd is noise, so neither separates
/// candidates. Needs docs >= 5.
std::vector<ranker::QuestionInstance> rank_displaced_task(const TaskOptions& opts);

struct WorkspaceOptions {
  std::size_t questions_per_split = 40;
  std::size_t candidates = 4;
  std::size_t docs_per_candidate = 6;
  std::uint64_t seed = 7;
};

struct WorkspaceFiles {
  std::string corpus_a;
  std::string corpus_b;
  std::string dataset_dir;
  std::string drd_scores;
  std::string avd_scores;
};

/// Writes a small text-level task under dir: two JSONL corpora, a dataset
/// directory with train/dev/test splits, and drd/avd score files keyed by the
/// documents each candidate will retrieve. The avd file carries the signal.
WorkspaceFiles write_workspace(const std::string& dir, const WorkspaceOptions& opts);

}  // namespace qa::synth
