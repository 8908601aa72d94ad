#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qa/ranker.hpp"

namespace qa::ranker {

struct EpochRecord {
  std::size_t restart = 0;
  std::size_t epoch = 0;  ///< 1-based
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double dev_loss = 0.0;
  double dev_accuracy = 0.0;
};

struct TrainResult {
  RankerParams params;  ///< snapshot with the lowest selection loss
  std::vector<EpochRecord> log;
  std::size_t best_restart = 0;
  std::size_t best_epoch = 0;
  double best_loss = 0.0;
  /// One line per aborted restart.
  std::vector<std::string> diagnostics;
};

struct LossSummary {
  double loss = 0.0;
  double accuracy = 0.0;
};

/// Mean cross-entropy and accuracy of fixed parameters over labeled instances.
LossSummary evaluate_loss(std::span<const QuestionInstance> instances, const RankerParams& params);

/// Runs config.restarts independent trainings seeded seed, seed+1, ... Each one
/// initializes fresh parameters, shuffles the training set every epoch, takes
/// one Adam step per mini-batch on the mean cross-entropy, and scores the dev
/// set after every epoch. The snapshot with the lowest dev loss over all epochs
/// and restarts is returned; with an empty dev set the epoch's training loss is
/// used for selection instead. A restart whose loss turns non-finite is
/// abandoned and reported in diagnostics.
TrainResult train(std::span<const QuestionInstance> train_set,
                  std::span<const QuestionInstance> dev_set, const RankerConfig& config,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

}  // namespace qa::ranker
