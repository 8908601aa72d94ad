#include "qa/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <unordered_map>

#include "json.hpp"
#include "qa/error.hpp"

namespace qa::pipeline {

using nlohmann::json;

std::vector<RetrievalRecord> retrieve_all(std::span<const text::QuotaIndex> indices,
                                          std::span<const data::Question> questions,
                                          const text::ScorerConfig& scorer) {
  std::vector<RetrievalRecord> out;
  for (const auto& q : questions) {
    for (std::size_t c = 0; c < q.candidates.size(); ++c) {
      auto r = text::retrieve_multi(indices, q.text, q.candidates[c], scorer);
      out.push_back(RetrievalRecord{q.id, c, r.degenerate, std::move(r.docs), std::move(r.counts)});
    }
  }
  return out;
}

std::string retrievals_to_jsonl(std::span<const RetrievalRecord> records) {
  std::string out;
  for (const auto& r : records) {
    json j;
    j["question_id"] = r.question_id;
    j["candidate_index"] = r.candidate_index;
    j["degenerate"] = r.degenerate;
    j["counts"] = r.counts;
    j["docs"] = json::array();
    for (const auto& d : r.docs) {
      j["docs"].push_back({{"doc_id", d.doc_id}, {"corpus_id", d.corpus_id}, {"score", d.score}});
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<RetrievalRecord> read_retrievals(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open " + path);
  std::vector<RetrievalRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = json::parse(line);
      RetrievalRecord r;
      r.question_id = j.at("question_id").get<std::string>();
      r.candidate_index = j.at("candidate_index").get<std::size_t>();
      r.degenerate = j.value("degenerate", false);
      r.counts = j.value("counts", std::vector<std::size_t>{});
      for (const auto& d : j.at("docs")) {
        r.docs.push_back(text::RetrievedDoc{d.at("doc_id").get<std::string>(),
                                            d.value("corpus_id", std::string()),
                                            d.value("score", 0.0)});
      }
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw Error("format", path + ": line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

ScoreBinding ScoreBinding::parse(const std::string& spec) {
  if (spec == "native") return {Kind::kNative, ""};
  if (spec.starts_with("file:") && spec.size() > 5) return {Kind::kFile, spec.substr(5)};
  if (spec.starts_with("remote:") && spec.size() > 7) return {Kind::kRemote, spec.substr(7)};
  throw Error("config", "bad score binding '" + spec + "' (native | file:<path> | remote:<url>)");
}

std::string ScoreBinding::str() const {
  switch (kind) {
    case Kind::kNative: return "native";
    case Kind::kFile: return "file:" + target;
    case Kind::kRemote: return "remote:" + target;
  }
  return "native";
}

ScoringOutcome score_retrievals(const ScoringInputs& in,
                                std::span<const disc::DiscriminatorId> discriminators,
                                const std::map<std::string, ScoreBinding>& bindings) {
  std::unordered_map<std::string, const data::Question*> by_id;
  for (const auto& q : in.questions) by_id.emplace(q.id, &q);
  auto question_of = [&](const RetrievalRecord& r) -> const data::Question& {
    auto it = by_id.find(r.question_id);
    if (it == by_id.end()) throw Error("validation", "retrieval for unknown question '" + r.question_id + "'");
    if (r.candidate_index >= it->second->candidates.size()) {
      throw Error("validation", "retrieval for missing candidate of '" + r.question_id + "'");
    }
    return *it->second;
  };

  ScoringOutcome out;
  for (const auto& id : discriminators) {
    auto bit = bindings.find(id.str());
    if (bit == bindings.end()) throw Error("config", "no score binding for '" + id.str() + "'");
    const ScoreBinding& binding = bit->second;
    auto& missing = out.missing[id.str()];

    switch (binding.kind) {
      case ScoreBinding::Kind::kNative: {
        if (id != disc::kTfd) throw Error("config", "only tfd has a native implementation");
        for (const auto& r : in.retrievals) {
          const auto& q = question_of(r);
          std::vector<std::string> doc_ids, corpus_ids;
          for (const auto& d : r.docs) {
            doc_ids.push_back(d.doc_id);
            corpus_ids.push_back(d.corpus_id);
          }
          const auto row = disc::tfd_score(in.indices, q.text, q.candidates[r.candidate_index],
                                           doc_ids, corpus_ids, in.scorer);
          for (std::size_t j = 0; j < row.size(); ++j) {
            out.store.insert({r.question_id, r.candidate_index, doc_ids[j], id.str()}, row[j]);
          }
        }
        break;
      }
      case ScoreBinding::Kind::kFile: {
        const auto source = disc::PrecomputedScoreStore::load(binding.target);
        for (const auto& r : in.retrievals) {
          for (const auto& d : r.docs) {
            disc::ScoreKey key{r.question_id, r.candidate_index, d.doc_id, id.str()};
            if (auto v = source.find(key)) {
              out.store.insert(std::move(key), *v);
            } else {
              ++missing;
            }
          }
        }
        break;
      }
      case ScoreBinding::Kind::kRemote: {
        disc::RemoteScorerConfig rc = in.remote;
        rc.base_url = binding.target;
        if (in.cache_dir) {
          rc.cache_path = (std::filesystem::path(*in.cache_dir) / ("remote-" + id.str() + ".tsv")).string();
        }
        disc::RemoteScorer scorer(rc);
        std::vector<disc::RemoteItem> items;
        std::vector<disc::ScoreKey> keys;
        std::unordered_map<std::string, const text::InvertedIndex*> corpus_owner;
        for (const auto* idx : in.indices) {
          for (const auto& doc : idx->documents()) corpus_owner.emplace(doc.corpus_id, idx);
        }
        for (const auto& r : in.retrievals) {
          const auto& q = question_of(r);
          for (const auto& d : r.docs) {
            auto owner = corpus_owner.find(d.corpus_id);
            if (owner == corpus_owner.end() || !owner->second->find(d.doc_id)) {
              throw Error("validation", "no text for document '" + d.doc_id + "'");
            }
            const auto& rec = owner->second->document(*owner->second->find(d.doc_id));
            items.push_back({q.text, q.candidates[r.candidate_index], rec.text});
            keys.push_back({r.question_id, r.candidate_index, d.doc_id, id.str()});
          }
        }
        const auto scores = scorer.score(id, items);
        for (std::size_t i = 0; i < scores.size(); ++i) out.store.insert(keys[i], scores[i]);
        out.remote_requests += scorer.requests_sent();
        break;
      }
    }
  }
  return out;
}

std::vector<ranker::QuestionInstance> build_instances(
    std::span<const data::Question> questions, std::span<const RetrievalRecord> retrievals,
    const disc::PrecomputedScoreStore& store, std::span<const disc::DiscriminatorId> rows,
    const InstanceOptions& options, std::size_t* missing) {
  std::map<std::pair<std::string, std::size_t>, const RetrievalRecord*> by_key;
  for (const auto& r : retrievals) by_key[{r.question_id, r.candidate_index}] = &r;

  std::size_t missing_total = 0;
  std::vector<ranker::QuestionInstance> out;
  for (const auto& q : questions) {
    ranker::QuestionInstance inst{q.id, q.answer_index, {}};
    for (std::size_t c = 0; c < q.candidates.size(); ++c) {
      std::vector<std::string> doc_ids;
      std::vector<double> lexical;
      if (auto it = by_key.find({q.id, c}); it != by_key.end()) {
        for (const auto& d : it->second->docs) {
          if (doc_ids.size() == options.n_max) break;
          doc_ids.push_back(d.doc_id);
          lexical.push_back(d.score);
        }
      }
      std::vector<disc::ScoreRow> score_rows;
      for (const auto& id : rows) {
        auto found = disc::lookup_scores(store, q.id, c, doc_ids, id, options.missing_score);
        missing_total += found.missing;
        score_rows.push_back({id, doc_ids, std::move(found.values)});
      }
      auto m = disc::assemble_score_matrix(q.id, c, doc_ids, score_rows, rows);
      m.lexical = std::move(lexical);
      inst.candidates.push_back(std::move(m));
    }
    out.push_back(std::move(inst));
  }
  if (missing != nullptr) *missing = missing_total;
  return out;
}

}  // namespace qa::pipeline
