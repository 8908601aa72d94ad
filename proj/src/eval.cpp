#include "qa/eval.hpp"

#include <algorithm>
#include <map>

#include "qa/error.hpp"
#include "qa/trainer.hpp"

namespace qa::eval {

EvalReport accuracy(const ranker::RankerParams& params,
                    std::span<const ranker::QuestionInstance> instances,
                    const std::string& dataset, const std::string& split,
                    const std::string& fingerprint) {
  EvalReport r{dataset, split, "attentive-ranker", 0.0, 0, 0, {}, fingerprint};
  for (const auto& inst : instances) {
    if (!inst.answer_index) {
      throw Error("validation", "question '" + inst.question_id + "' in split " + split + " is unlabeled");
    }
    const auto pred = ranker::predict(inst, params);
    r.predictions.push_back({inst.question_id, pred.predicted_index, *inst.answer_index, pred.probabilities});
    if (pred.predicted_index == *inst.answer_index) ++r.correct;
    ++r.total;
  }
  r.accuracy = r.total == 0 ? 0.0 : static_cast<double>(r.correct) / static_cast<double>(r.total);
  return r;
}

EvalReport ir_baseline(std::span<const data::Question> questions,
                       std::span<const pipeline::RetrievalRecord> retrievals,
                       const std::string& dataset, const std::string& split) {
  std::map<std::pair<std::string, std::size_t>, double> best;
  for (const auto& rec : retrievals) {
    double top = 0.0;
    for (const auto& d : rec.docs) top = std::max(top, d.score);
    best[{rec.question_id, rec.candidate_index}] = top;
  }
  EvalReport r{dataset, split, "ir-baseline", 0.0, 0, 0, {}, ""};
  for (const auto& q : questions) {
    if (!q.answer_index) {
      throw Error("validation", "question '" + q.id + "' in split " + split + " is unlabeled");
    }
    std::vector<double> scores;
    for (std::size_t c = 0; c < q.candidates.size(); ++c) {
      auto it = best.find({q.id, c});
      scores.push_back(it == best.end() ? 0.0 : it->second);
    }
    const auto predicted =
        static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin());
    r.predictions.push_back({q.id, predicted, *q.answer_index, scores});
    if (predicted == *q.answer_index) ++r.correct;
    ++r.total;
  }
  r.accuracy = r.total == 0 ? 0.0 : static_cast<double>(r.correct) / static_cast<double>(r.total);
  return r;
}

EvalReport ir_baseline(std::span<const text::QuotaIndex> indices,
                       std::span<const data::Question> questions, const std::string& dataset,
                       const std::string& split, const text::ScorerConfig& scorer) {
  const auto records = pipeline::retrieve_all(indices, questions, scorer);
  return ir_baseline(questions, records, dataset, split);
}

std::vector<std::vector<disc::DiscriminatorId>> cumulative_subsets(
    std::span<const disc::DiscriminatorId> order) {
  std::vector<std::vector<disc::DiscriminatorId>> out;
  for (std::size_t k = 1; k <= order.size(); ++k) out.emplace_back(order.begin(), order.begin() + k);
  return out;
}

std::vector<ranker::QuestionInstance> select_rows(std::span<const ranker::QuestionInstance> instances,
                                                  std::span<const disc::DiscriminatorId> rows) {
  std::vector<ranker::QuestionInstance> out;
  out.reserve(instances.size());
  for (const auto& inst : instances) {
    ranker::QuestionInstance copy{inst.question_id, inst.answer_index, {}};
    for (const auto& c : inst.candidates) copy.candidates.push_back(c.select_rows(rows));
    out.push_back(std::move(copy));
  }
  return out;
}

AblationTable ablation_run(std::span<const std::vector<disc::DiscriminatorId>> subsets,
                           std::span<const ExperimentData> datasets,
                           const ranker::RankerConfig& config,
                           std::span<const std::uint64_t> seeds, const std::string& eval_split) {
  if (subsets.empty()) throw Error("config", "ablation needs at least one subset");
  if (seeds.empty()) throw Error("config", "ablation needs at least one seed");
  // Fail fast: selecting rows throws for any absent score source.
  std::vector<std::vector<std::array<std::vector<ranker::QuestionInstance>, 3>>> prepared;
  for (const auto& ds : datasets) {
    auto& per_subset = prepared.emplace_back();
    for (const auto& subset : subsets) {
      per_subset.push_back({select_rows(ds.train, subset), select_rows(ds.dev, subset),
                            select_rows(ds.eval, subset)});
    }
  }

  AblationTable table{{subsets.begin(), subsets.end()}, {seeds.begin(), seeds.end()}, eval_split, {}};
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    AblationRow row{datasets[d].name, {}};
    for (std::size_t s = 0; s < subsets.size(); ++s) {
      const auto& [train, dev, held_out] = prepared[d][s];
      AblationCell cell;
      for (std::uint64_t seed : seeds) {
        ranker::RankerConfig c = config;
        c.k_disc = subsets[s].size();
        c.seed = seed;
        const auto trained = ranker::train(train, dev, c);
        cell.per_seed.push_back(accuracy(trained.params, held_out, datasets[d].name, eval_split).accuracy);
      }
      double total = 0.0;
      for (double a : cell.per_seed) total += a;
      cell.accuracy = total / static_cast<double>(cell.per_seed.size());
      row.cells.push_back(std::move(cell));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::vector<ranker::QuestionInstance> truncate_documents(
    std::span<const ranker::QuestionInstance> instances, std::size_t n, bool* short_lists) {
  std::vector<ranker::QuestionInstance> out;
  bool shortfall = false;
  for (const auto& inst : instances) {
    ranker::QuestionInstance copy{inst.question_id, inst.answer_index, {}};
    for (const auto& c : inst.candidates) {
      if (c.doc_count() < n) shortfall = true;
      copy.candidates.push_back(c.truncate_by_lexical(n));
    }
    out.push_back(std::move(copy));
  }
  if (short_lists != nullptr) *short_lists = shortfall;
  return out;
}

SweepResult doc_count_sweep(std::span<const std::size_t> ns,
                            std::span<const ranker::QuestionInstance> train,
                            std::span<const ranker::QuestionInstance> dev,
                            const ranker::RankerConfig& config,
                            std::span<const std::uint64_t> seeds) {
  if (seeds.empty()) throw Error("config", "sweep needs at least one seed");
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (ns[i] == 0 || (i > 0 && ns[i] <= ns[i - 1])) {
      throw Error("config", "sweep sizes must be positive and strictly increasing");
    }
  }
  SweepResult result{{}, {seeds.begin(), seeds.end()}};
  for (std::size_t n : ns) {
    SweepPoint point{n, 0.0, {}, false};
    bool short_train = false, short_dev = false;
    const auto train_n = truncate_documents(train, n, &short_train);
    const auto dev_n = truncate_documents(dev, n, &short_dev);
    point.short_lists = short_train || short_dev;
    for (std::uint64_t seed : seeds) {
      ranker::RankerConfig c = config;
      c.seed = seed;
      c.n_max = n;
      const auto trained = ranker::train(train_n, dev_n, c);
      point.per_seed.push_back(accuracy(trained.params, dev_n, "", "dev").accuracy);
    }
    double total = 0.0;
    for (double a : point.per_seed) total += a;
    point.accuracy = total / static_cast<double>(point.per_seed.size());
    result.points.push_back(std::move(point));
  }
  return result;
}

}  // namespace qa::eval
