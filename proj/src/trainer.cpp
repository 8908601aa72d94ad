#include "qa/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "qa/error.hpp"
#include "qa/optim.hpp"
#include "qa/rng.hpp"

namespace qa::ranker {

namespace {

struct ExampleResult {
  double loss = 0.0;
  bool correct = false;
};

// Forward + reverse sweep for one example; gradients stay on the tape until
// the caller flushes them, so reduction order is fixed by the caller.
ExampleResult run_example(Tape& tape, RankerParams& params, const QuestionInstance& instance,
                          double seed) {
  const ParamNodes p = ParamNodes::trainable(tape, params);
  std::vector<double> logits;
  const NodeId loss = record_loss(tape, p, instance, &logits);
  tape.compute_gradients(loss, seed);
  const auto best = static_cast<std::size_t>(
      std::max_element(logits.begin(), logits.end()) - logits.begin());
  return ExampleResult{tape.value(loss)(0, 0), best == *instance.answer_index};
}

}  // namespace

LossSummary evaluate_loss(std::span<const QuestionInstance> instances, const RankerParams& params) {
  LossSummary s;
  if (instances.empty()) return s;
  for (const auto& inst : instances) {
    const auto pred = predict(inst, params);
    if (!inst.answer_index) {
      throw Error("validation", "question '" + inst.question_id + "' is unlabeled");
    }
    s.loss += cross_entropy(pred.logits, *inst.answer_index);
    if (pred.predicted_index == *inst.answer_index) s.accuracy += 1.0;
  }
  s.loss /= static_cast<double>(instances.size());
  s.accuracy /= static_cast<double>(instances.size());
  return s;
}

TrainResult train(std::span<const QuestionInstance> train_set,
                  std::span<const QuestionInstance> dev_set, const RankerConfig& config,
                  const std::function<void(const EpochRecord&)>& on_epoch) {
  config.validate();
  if (train_set.empty()) throw Error("validation", "training set is empty");
  for (const auto& inst : train_set) {
    check_instance(inst, config.k_disc);
    if (!inst.answer_index) {
      throw Error("validation", "training question '" + inst.question_id + "' is unlabeled");
    }
  }
  for (const auto& inst : dev_set) check_instance(inst, config.k_disc);

  TrainResult result;
  bool have_best = false;
  const AdamOptions adam_options{config.learning_rate, config.beta1, config.beta2, config.epsilon};

  for (std::size_t restart = 0; restart < config.restarts; ++restart) {
    const std::uint64_t seed = config.seed + restart;
    RankerParams params = RankerParams::initialize(config, seed);
    const auto tensors = params.all();
    Adam adam(tensors, adam_options);
    Rng shuffle_rng(derive_seed(seed, 0x5eed));
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    bool aborted = false;

    for (std::size_t epoch = 1; epoch <= config.epochs && !aborted; ++epoch) {
      shuffle_rng.shuffle(std::span<std::size_t>(order));
      double loss_sum = 0.0;
      std::size_t correct = 0;

      for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
        const std::size_t end = std::min(order.size(), start + config.batch_size);
        const std::size_t n = end - start;
        const double weight = 1.0 / static_cast<double>(n);
        params.zero_grad();

        std::vector<Tape> tapes(n);
        std::vector<ExampleResult> results(n);
        auto work = [&](std::size_t lo, std::size_t hi) {
          for (std::size_t i = lo; i < hi; ++i) {
            results[i] = run_example(tapes[i], params, train_set[order[start + i]], weight);
          }
        };
        const std::size_t workers = std::min(config.threads, n);
        if (workers <= 1) {
          work(0, n);
        } else {
          std::vector<std::thread> pool;
          const std::size_t chunk = (n + workers - 1) / workers;
          for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t lo = w * chunk;
            const std::size_t hi = std::min(n, lo + chunk);
            if (lo < hi) pool.emplace_back(work, lo, hi);
          }
          for (auto& t : pool) t.join();
        }
        double batch_loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          tapes[i].flush_gradients();
          batch_loss += results[i].loss;
          correct += results[i].correct ? 1 : 0;
        }
        if (!std::isfinite(batch_loss)) {
          result.diagnostics.push_back("restart " + std::to_string(restart) + " (seed " +
                                       std::to_string(seed) + "): non-finite loss in epoch " +
                                       std::to_string(epoch) + "; abandoned");
          aborted = true;
          break;
        }
        loss_sum += batch_loss;
        adam.step(tensors);
      }
      if (aborted) break;

      EpochRecord rec;
      rec.restart = restart;
      rec.epoch = epoch;
      rec.train_loss = loss_sum / static_cast<double>(order.size());
      rec.train_accuracy = static_cast<double>(correct) / static_cast<double>(order.size());
      if (!dev_set.empty()) {
        const auto dev = evaluate_loss(dev_set, params);
        rec.dev_loss = dev.loss;
        rec.dev_accuracy = dev.accuracy;
      }
      const double selection = dev_set.empty() ? rec.train_loss : rec.dev_loss;
      if (!std::isfinite(selection)) {
        result.diagnostics.push_back("restart " + std::to_string(restart) +
                                     ": non-finite selection loss; abandoned");
        aborted = true;
        break;
      }
      result.log.push_back(rec);
      if (on_epoch) on_epoch(rec);
      if (!have_best || selection < result.best_loss) {
        have_best = true;
        result.best_loss = selection;
        result.best_restart = restart;
        result.best_epoch = epoch;
        result.params = params;
      }
    }
  }
  if (!have_best) {
    if (config.epochs == 0) {
      // Nothing to train: the first restart's initialization is the answer.
      result.params = RankerParams::initialize(config, config.seed);
      result.best_loss = dev_set.empty() ? evaluate_loss(train_set, result.params).loss
                                         : evaluate_loss(dev_set, result.params).loss;
      return result;
    }
    throw Error("numeric", "every restart diverged");
  }
  result.params.zero_grad();
  return result;
}

}  // namespace qa::ranker
