#include "qa/synthetic.hpp"

#include <array>
#include <filesystem>

#include "json.hpp"
#include "qa/binary_io.hpp"
#include "qa/dataset.hpp"
#include "qa/error.hpp"
#include "qa/rng.hpp"
#include "qa/score_store.hpp"

namespace qa::synth {
namespace {

const std::vector<disc::DiscriminatorId>& rows() {
  static const std::vector<disc::DiscriminatorId> r{disc::kTfd, disc::kDrd, disc::kAvd};
  return r;
}

disc::ScoreMatrix make_matrix(const std::string& qid, std::size_t cand, std::size_t docs) {
  disc::ScoreMatrix m;
  m.question_id = qid;
  m.candidate_index = cand;
  m.row_ids = rows();
  m.values = Matrix(3, docs);
  for (std::size_t j = 0; j < docs; ++j) {
    m.doc_ids.push_back(qid + "-c" + std::to_string(cand) + "-d" + std::to_string(j));
  }
  return m;
}

void check(const TaskOptions& o, std::size_t min_docs) {
  if (o.questions == 0 || o.candidates < 2 || o.docs < min_docs) {
    throw Error("config", "synthetic task needs questions > 0, candidates >= 2, docs >= " +
                              std::to_string(min_docs));
  }
}

}  // namespace

std::vector<ranker::QuestionInstance> separable_task(const TaskOptions& opts) {
  check(opts, 1);
  Rng rng(opts.seed);
  std::vector<ranker::QuestionInstance> out;
  for (std::size_t q = 0; q < opts.questions; ++q) {
    ranker::QuestionInstance inst;
    inst.question_id = "sep" + std::to_string(q);
    inst.answer_index = rng.below(opts.candidates);
    for (std::size_t c = 0; c < opts.candidates; ++c) {
      auto m = make_matrix(inst.question_id, c, opts.docs);
      for (std::size_t j = 0; j < opts.docs; ++j) {
        m.values(0, j) = rng.uniform();
        m.values(1, j) = rng.uniform();
        m.values(2, j) = c == *inst.answer_index ? 0.9 : 0.1;
        m.lexical.push_back(static_cast<double>(opts.docs - j));
      }
      inst.candidates.push_back(std::move(m));
    }
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<ranker::QuestionInstance> rank_displaced_task(const TaskOptions& opts) {
  check(opts, 5);
  Rng rng(opts.seed);
  std::vector<ranker::QuestionInstance> out;
  for (std::size_t q = 0; q < opts.questions; ++q) {
    ranker::QuestionInstance inst;
    inst.question_id = "disp" + std::to_string(q);
    inst.answer_index = rng.below(opts.candidates);
    const std::size_t informative = rng.below(5);
    for (std::size_t c = 0; c < opts.candidates; ++c) {
      auto m = make_matrix(inst.question_id, c, opts.docs);
      for (std::size_t j = 0; j < opts.docs; ++j) {
        const double lex = static_cast<double>(opts.docs - j);
        m.lexical.push_back(lex);
        m.values(0, j) = lex / static_cast<double>(opts.docs);
        m.values(1, j) = rng.uniform();
        const bool signal = c == *inst.answer_index && j == informative;
        m.values(2, j) = signal ? 0.9 : rng.uniform(0.0, 0.5);
      }
      inst.candidates.push_back(std::move(m));
    }
    out.push_back(std::move(inst));
  }
  return out;
}

WorkspaceFiles write_workspace(const std::string& dir, const WorkspaceOptions& opts) {
  if (opts.questions_per_split == 0 || opts.candidates < 2 || opts.docs_per_candidate == 0) {
    throw Error("config", "synthetic workspace needs questions, >= 2 candidates and documents");
  }
  namespace fs = std::filesystem;
  static constexpr std::array<const char*, 12> kFiller{
      "river", "stone", "light", "metal", "cloud", "field",
      "glass", "plant", "sound", "water", "wheel", "tower"};

  Rng rng(opts.seed);
  WorkspaceFiles files{(fs::path(dir) / "corpus_a.jsonl").string(),
                       (fs::path(dir) / "corpus_b.jsonl").string(),
                       (fs::path(dir) / "dataset").string(),
                       (fs::path(dir) / "drd.tsv").string(),
                       (fs::path(dir) / "avd.tsv").string()};
  std::string corpus_a, corpus_b;
  disc::PrecomputedScoreStore drd, avd;
  data::QaDataset ds;
  ds.name = "synthetic";

  std::size_t serial = 0;
  for (auto split : data::kAllSplits) {
    auto& questions = ds.splits[split];
    for (std::size_t i = 0; i < opts.questions_per_split; ++i, ++serial) {
      const std::string topic = "topic" + std::to_string(serial);
      data::Question q;
      q.id = std::string(data::to_string(split)) + "-" + std::to_string(i);
      q.text = "Which property does " + topic + " show?";
      q.answer_index = rng.below(opts.candidates);
      for (std::size_t c = 0; c < opts.candidates; ++c) {
        const std::string answer = "answer" + std::to_string(serial) + "x" + std::to_string(c);
        q.candidates.push_back(answer);
        for (std::size_t k = 0; k < opts.docs_per_candidate; ++k) {
          const std::string doc_id = "syn-" + std::to_string(serial) + "-" + std::to_string(c) +
                                     "-" + std::to_string(k);
          std::string text;
          const auto repeats = 1 + rng.below(3);
          for (std::uint64_t r = 0; r < repeats; ++r) text += topic + " ";
          text += answer;
          const auto filler = 2 + rng.below(8);
          for (std::uint64_t f = 0; f < filler; ++f) {
            text += " ";
            text += kFiller[rng.below(kFiller.size())];
          }
          nlohmann::json line{{"doc_id", doc_id}, {"text", text}};
          (k % 2 == 0 ? corpus_a : corpus_b) += line.dump() + "\n";
          const bool correct = c == *q.answer_index;
          avd.insert({q.id, c, doc_id, disc::kAvd.str()}, correct ? 0.9 : 0.1);
          drd.insert({q.id, c, doc_id, disc::kDrd.str()}, rng.uniform());
        }
      }
      questions.push_back(std::move(q));
    }
  }
  // Documents that share vocabulary but no answer token never pass retrieval.
  for (std::size_t n = 0; n < 20; ++n) {
    nlohmann::json line{{"doc_id", "noise-" + std::to_string(n)},
                        {"text", std::string("property ") + kFiller[n % kFiller.size()]}};
    corpus_b += line.dump() + "\n";
  }

  io::write_file(files.corpus_a, corpus_a);
  io::write_file(files.corpus_b, corpus_b);
  data::save_dataset(ds, files.dataset_dir);
  drd.save(files.drd_scores);
  avd.save(files.avd_scores);
  return files;
}

}  // namespace qa::synth
