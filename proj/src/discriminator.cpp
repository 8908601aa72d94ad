#include "qa/discriminator.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "qa/error.hpp"

namespace qa::disc {

DiscriminatorId::DiscriminatorId(std::string id) : id_(std::move(id)) {
  if (id_.empty() || id_.find_first_of(" \t\r\n,") != std::string::npos) {
    throw Error("config", "invalid discriminator id '" + id_ + "'");
  }
}

std::vector<DiscriminatorId> parse_discriminator_list(std::string_view csv) {
  std::vector<DiscriminatorId> out;
  std::set<std::string> seen;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const auto end = std::min(csv.find(',', start), csv.size());
    std::string item(csv.substr(start, end - start));
    if (!seen.insert(item).second) throw Error("config", "discriminator '" + item + "' listed twice");
    out.emplace_back(std::move(item));
    start = end + 1;
  }
  return out;
}

std::string join(std::span<const DiscriminatorId> ids) {
  std::string out;
  for (const auto& id : ids) {
    if (!out.empty()) out += ',';
    out += id.str();
  }
  return out;
}

void ScoreMatrix::validate() const {
  if (values.rows() != row_ids.size() || values.cols() != doc_ids.size()) {
    throw Error("shape", "score matrix for " + question_id + "/" + std::to_string(candidate_index) +
                             " is " + values.shape_string() + " but has " +
                             std::to_string(row_ids.size()) + " rows and " +
                             std::to_string(doc_ids.size()) + " documents");
  }
  if (!lexical.empty() && lexical.size() != doc_ids.size()) {
    throw Error("shape", "lexical scores do not match documents for " + question_id);
  }
  for (std::size_t i = 0; i < values.rows(); ++i) {
    for (std::size_t j = 0; j < values.cols(); ++j) {
      const double v = values(i, j);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw Error("validation", "score " + std::to_string(v) + " outside [0,1] for " +
                                      row_ids[i].str() + " on " + doc_ids[j]);
      }
    }
  }
}

ScoreMatrix ScoreMatrix::select_rows(std::span<const DiscriminatorId> ids) const {
  ScoreMatrix out{question_id, candidate_index, doc_ids, {}, Matrix(ids.size(), doc_ids.size()),
                  lexical};
  for (std::size_t r = 0; r < ids.size(); ++r) {
    auto it = std::find(row_ids.begin(), row_ids.end(), ids[r]);
    if (it == row_ids.end()) throw Error("validation", "no '" + ids[r].str() + "' row in score matrix");
    const auto src = static_cast<std::size_t>(it - row_ids.begin());
    for (std::size_t j = 0; j < doc_ids.size(); ++j) out.values(r, j) = values(src, j);
    out.row_ids.push_back(ids[r]);
  }
  return out;
}

ScoreMatrix ScoreMatrix::truncate_by_lexical(std::size_t n) const {
  std::vector<std::size_t> order(doc_ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (!lexical.empty()) {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return lexical[a] > lexical[b]; });
  }
  order.resize(std::min(n, order.size()));
  ScoreMatrix out{question_id, candidate_index, {}, row_ids, Matrix(row_ids.size(), order.size()), {}};
  for (std::size_t j = 0; j < order.size(); ++j) {
    out.doc_ids.push_back(doc_ids[order[j]]);
    if (!lexical.empty()) out.lexical.push_back(lexical[order[j]]);
    for (std::size_t r = 0; r < row_ids.size(); ++r) out.values(r, j) = values(r, order[j]);
  }
  return out;
}

ScoreMatrix assemble_score_matrix(std::string question_id, std::size_t candidate_index,
                                  std::vector<std::string> doc_ids,
                                  std::span<const ScoreRow> rows,
                                  std::span<const DiscriminatorId> order) {
  ScoreMatrix m{std::move(question_id), candidate_index, std::move(doc_ids), {},
                Matrix(order.size(), 0), {}};
  m.values = Matrix(order.size(), m.doc_ids.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    auto it = std::find_if(rows.begin(), rows.end(), [&](const ScoreRow& row) { return row.id == order[r]; });
    if (it == rows.end()) throw Error("validation", "missing score row for '" + order[r].str() + "'");
    if (it->values.size() != m.doc_ids.size() || it->doc_ids.size() != m.doc_ids.size()) {
      throw Error("shape", "score row '" + order[r].str() + "' has " + std::to_string(it->values.size()) +
                               " values for " + std::to_string(m.doc_ids.size()) + " documents");
    }
    if (it->doc_ids != m.doc_ids) {
      throw Error("validation", "score row '" + order[r].str() + "' has a different document order");
    }
    for (std::size_t j = 0; j < m.doc_ids.size(); ++j) m.values(r, j) = it->values[j];
    m.row_ids.push_back(order[r]);
  }
  m.validate();
  return m;
}

std::vector<double> max_normalize(std::span<const double> raw) {
  std::vector<double> out(raw.begin(), raw.end());
  double mx = 0.0;
  for (double v : raw) {
    if (v < 0.0) throw Error("validation", "negative lexical score");
    mx = std::max(mx, v);
  }
  if (mx > 0.0) {
    for (double& v : out) v /= mx;
  }
  return out;
}

std::vector<double> tfd_score(const text::InvertedIndex& index, std::string_view question,
                              std::string_view answer, std::span<const std::string> doc_ids,
                              const text::ScorerConfig& scorer) {
  const auto terms = text::LexicalQuery::make(question, answer).terms();
  std::vector<double> raw;
  raw.reserve(doc_ids.size());
  for (const auto& id : doc_ids) raw.push_back(index.score(terms, id, scorer));
  return max_normalize(raw);
}

std::vector<double> tfd_score(std::span<const text::InvertedIndex* const> indices,
                              std::string_view question, std::string_view answer,
                              std::span<const std::string> doc_ids,
                              std::span<const std::string> corpus_ids,
                              const text::ScorerConfig& scorer) {
  if (doc_ids.size() != corpus_ids.size()) throw Error("shape", "tfd: doc/corpus length mismatch");
  const auto terms = text::LexicalQuery::make(question, answer).terms();
  std::vector<double> raw;
  raw.reserve(doc_ids.size());
  for (std::size_t j = 0; j < doc_ids.size(); ++j) {
    const text::InvertedIndex* owner = nullptr;
    for (const auto* idx : indices) {
      if (idx->find(doc_ids[j])) {
        const auto& rec = idx->document(*idx->find(doc_ids[j]));
        if (rec.corpus_id == corpus_ids[j]) {
          owner = idx;
          break;
        }
      }
    }
    if (owner == nullptr) {
      throw Error("validation", "document '" + doc_ids[j] + "' of corpus '" + corpus_ids[j] +
                                    "' is in none of the indices");
    }
    raw.push_back(owner->score(terms, doc_ids[j], scorer));
  }
  return max_normalize(raw);
}

}  // namespace qa::disc
