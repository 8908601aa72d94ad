#include "qa/rankings.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "qa/error.hpp"

namespace qa::ranker {

using nlohmann::json;

std::vector<CandidateRanking> export_rankings(const RankerParams& params,
                                              std::span<const QuestionInstance> instances,
                                              std::size_t top_k) {
  std::vector<CandidateRanking> out;
  for (const auto& inst : instances) {
    const auto pred = predict(inst, params);
    for (std::size_t c = 0; c < inst.candidates.size(); ++c) {
      const auto& docs = inst.candidates[c].doc_ids;
      const auto& weights = pred.attention[c].weights;
      std::vector<std::size_t> order(docs.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return weights[a] != weights[b] ? weights[a] > weights[b] : docs[a] < docs[b];
      });
      CandidateRanking r{inst.question_id, inst.candidates[c].candidate_index, {}};
      for (std::size_t k = 0; k < std::min(top_k, order.size()); ++k) {
        r.ranking.push_back(RankedDoc{docs[order[k]], weights[order[k]]});
      }
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::string rankings_to_jsonl(std::span<const CandidateRanking> rankings) {
  std::string out;
  for (const auto& r : rankings) {
    json j;
    j["question_id"] = r.question_id;
    j["candidate_index"] = r.candidate_index;
    j["ranking"] = json::array();
    for (const auto& d : r.ranking) j["ranking"].push_back({{"doc_id", d.doc_id}, {"weight", d.weight}});
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<CandidateRanking> rankings_from_jsonl(const std::string& text) {
  std::vector<CandidateRanking> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      auto j = json::parse(line);
      CandidateRanking r{j.at("question_id").get<std::string>(),
                         j.at("candidate_index").get<std::size_t>(), {}};
      for (const auto& d : j.at("ranking")) {
        r.ranking.push_back(RankedDoc{d.at("doc_id").get<std::string>(), d.at("weight").get<double>()});
      }
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw Error("format", "rankings line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace qa::ranker
