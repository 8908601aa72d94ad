#include "qa/score_store.hpp"

#include <charconv>
#include <fstream>

#include "qa/binary_io.hpp"
#include "qa/error.hpp"
#include "qa/numfmt.hpp"

namespace qa::disc {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string_view::npos ? line.npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

}  // namespace

void PrecomputedScoreStore::insert(ScoreKey key, double score) {
  if (!(score >= 0.0 && score <= 1.0)) {
    throw Error("validation", "score " + format_double(score) + " outside [0,1] for " +
                                  key.question_id + "/" + std::to_string(key.candidate_index) +
                                  "/" + key.doc_id + "/" + key.discriminator);
  }
  scores_[std::move(key)] = score;
}

std::optional<double> PrecomputedScoreStore::find(const ScoreKey& key) const {
  auto it = scores_.find(key);
  if (it == scores_.end()) return std::nullopt;
  return it->second;
}

void PrecomputedScoreStore::merge(const PrecomputedScoreStore& other) {
  for (const auto& [k, v] : other.scores_) scores_[k] = v;
}

PrecomputedScoreStore PrecomputedScoreStore::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open score file " + path);
  PrecomputedScoreStore store;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    const std::string where = path + ":" + std::to_string(line_no);
    if (fields.size() != 5) throw Error("format", where + ": expected 5 tab-separated fields");
    std::size_t candidate = 0;
    const auto cf = fields[1];
    auto [ptr, ec] = std::from_chars(cf.data(), cf.data() + cf.size(), candidate);
    if (ec != std::errc() || ptr != cf.data() + cf.size()) {
      throw Error("format", where + ": bad candidate index '" + std::string(cf) + "'");
    }
    double score = 0.0;
    try {
      score = parse_double(fields[4]);
    } catch (const Error&) {
      throw Error("format", where + ": bad score '" + std::string(fields[4]) + "'");
    }
    try {
      store.insert(ScoreKey{std::string(fields[0]), candidate, std::string(fields[2]),
                            std::string(fields[3])},
                   score);
    } catch (const Error& e) {
      throw Error(e.kind(), where + ": " + e.what());
    }
  }
  return store;
}

void PrecomputedScoreStore::save(const std::string& path) const {
  std::string out;
  for (const auto& [k, v] : scores_) {
    out += k.question_id;
    out += '\t';
    out += std::to_string(k.candidate_index);
    out += '\t';
    out += k.doc_id;
    out += '\t';
    out += k.discriminator;
    out += '\t';
    out += format_double(v);
    out += '\n';
  }
  io::write_file(path, out);
}

ScoreLookup lookup_scores(const PrecomputedScoreStore& store, const std::string& question_id,
                          std::size_t candidate_index, std::span<const std::string> doc_ids,
                          const DiscriminatorId& id, double missing_score) {
  ScoreLookup out;
  out.values.reserve(doc_ids.size());
  ScoreKey key{question_id, candidate_index, {}, id.str()};
  for (const auto& doc : doc_ids) {
    key.doc_id = doc;
    if (auto v = store.find(key)) {
      out.values.push_back(*v);
    } else {
      out.values.push_back(missing_score);
      ++out.missing;
    }
  }
  return out;
}

}  // namespace qa::disc
