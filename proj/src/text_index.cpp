#include "qa/text_index.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include "json.hpp"

#include "qa/binary_io.hpp"
#include "qa/error.hpp"
#include "qa/tokenizer.hpp"

namespace qa::text {

namespace {

constexpr std::string_view kIndexMagic{"QAIDX\0\0\0", 8};
constexpr std::string_view kIndexTrailer{"QAIDXEND", 8};
constexpr std::uint32_t kIndexVersion = 1;

std::vector<std::string> sorted_unique(std::vector<std::string> tokens) {
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  return tokens;
}

// Sorted doc refs that contain any of the given terms.
std::vector<std::uint32_t> docs_matching_any(const InvertedIndex& index,
                                             std::span<const std::string> terms) {
  std::vector<std::uint32_t> refs;
  for (const auto& t : terms) {
    for (const Posting& p : index.postings(t)) refs.push_back(p.doc);
  }
  std::sort(refs.begin(), refs.end());
  refs.erase(std::unique(refs.begin(), refs.end()), refs.end());
  return refs;
}

}  // namespace

std::string to_string(ScorerKind kind) {
  return kind == ScorerKind::kBm25 ? "bm25" : "classic-tfidf";
}

ScorerKind parse_scorer(std::string_view name) {
  if (name == "bm25") return ScorerKind::kBm25;
  if (name == "classic-tfidf") return ScorerKind::kClassicTfidf;
  throw Error("config", "unknown scorer '" + std::string(name) + "'");
}

InvertedIndex InvertedIndex::build(std::vector<DocumentRecord> docs) {
  InvertedIndex index;
  std::vector<std::vector<std::string>> tokens;
  for (auto& d : docs) {
    auto t = tokenize(d.text);
    if (t.empty()) continue;
    d.token_count = static_cast<std::uint32_t>(t.size());
    index.docs_.push_back(std::move(d));
    tokens.push_back(std::move(t));
  }

  std::vector<std::size_t> order(index.docs_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return index.docs_[a].doc_id < index.docs_[b].doc_id;
  });
  std::vector<DocumentRecord> sorted;
  sorted.reserve(order.size());
  for (std::size_t ref = 0; ref < order.size(); ++ref) {
    auto& doc = index.docs_[order[ref]];
    if (!sorted.empty() && sorted.back().doc_id == doc.doc_id) {
      throw Error("validation", "duplicate doc_id '" + doc.doc_id + "'");
    }
    std::map<std::string_view, std::uint32_t> tf;
    for (const auto& t : tokens[order[ref]]) ++tf[t];
    for (const auto& [term, count] : tf) {
      index.postings_[std::string(term)].push_back(
          Posting{static_cast<std::uint32_t>(ref), count});
    }
    sorted.push_back(std::move(doc));
  }
  index.docs_ = std::move(sorted);
  index.finish();
  return index;
}

void InvertedIndex::finish() {
  total_tokens_ = 0;
  doc_lookup_.clear();
  for (std::uint32_t ref = 0; ref < docs_.size(); ++ref) {
    total_tokens_ += docs_[ref].token_count;
    doc_lookup_.emplace(docs_[ref].doc_id, ref);
  }
}

InvertedIndex InvertedIndex::from_parts(
    std::vector<DocumentRecord> docs,
    std::vector<std::pair<std::string, std::vector<Posting>>> postings) {
  InvertedIndex index;
  index.docs_ = std::move(docs);
  for (std::size_t i = 1; i < index.docs_.size(); ++i) {
    if (!(index.docs_[i - 1].doc_id < index.docs_[i].doc_id)) {
      throw Error("format", "document table not strictly sorted at entry " + std::to_string(i));
    }
  }
  std::vector<std::uint64_t> occurrences(index.docs_.size(), 0);
  for (auto& [term, list] : postings) {
    if (list.empty()) throw Error("format", "empty posting list for '" + term + "'");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const Posting& p = list[i];
      if (p.doc >= index.docs_.size() || p.tf == 0 || (i > 0 && list[i - 1].doc >= p.doc)) {
        throw Error("format", "corrupt posting list for '" + term + "'");
      }
      occurrences[p.doc] += p.tf;
    }
    if (!index.postings_.emplace(std::move(term), std::move(list)).second) {
      throw Error("format", "duplicate term in index file");
    }
  }
  for (std::size_t i = 0; i < index.docs_.size(); ++i) {
    if (occurrences[i] != index.docs_[i].token_count) {
      throw Error("format", "token count mismatch for '" + index.docs_[i].doc_id + "'");
    }
  }
  index.finish();
  return index;
}

double InvertedIndex::average_doc_length() const noexcept {
  if (docs_.empty()) return 0.0;
  return static_cast<double>(total_tokens_) / static_cast<double>(docs_.size());
}

std::optional<std::uint32_t> InvertedIndex::find(std::string_view doc_id) const {
  auto it = doc_lookup_.find(std::string(doc_id));
  if (it == doc_lookup_.end()) return std::nullopt;
  return it->second;
}

std::span<const Posting> InvertedIndex::postings(std::string_view term) const {
  auto it = postings_.find(std::string(term));
  if (it == postings_.end()) return {};
  return it->second;
}

std::uint32_t InvertedIndex::document_frequency(std::string_view term) const {
  return static_cast<std::uint32_t>(postings(term).size());
}

std::uint32_t InvertedIndex::term_frequency(std::string_view term, std::uint32_t doc) const {
  auto list = postings(term);
  auto it = std::lower_bound(list.begin(), list.end(), doc,
                             [](const Posting& p, std::uint32_t d) { return p.doc < d; });
  return (it != list.end() && it->doc == doc) ? it->tf : 0;
}

std::vector<std::string> InvertedIndex::sorted_terms() const {
  std::vector<std::string> terms;
  terms.reserve(postings_.size());
  for (const auto& [term, _] : postings_) terms.push_back(term);
  std::sort(terms.begin(), terms.end());
  return terms;
}

double InvertedIndex::score(std::span<const std::string> query, std::uint32_t doc,
                            const ScorerConfig& scorer) const {
  if (doc >= docs_.size()) throw Error("validation", "unknown document reference");
  const double n_docs = static_cast<double>(docs_.size());
  const double length_ratio = static_cast<double>(docs_[doc].token_count) / average_doc_length();
  double total = 0.0;
  for (const auto& term : query) {
    const std::uint32_t tf = term_frequency(term, doc);
    if (tf == 0) continue;
    const double df = static_cast<double>(document_frequency(term));
    const double f = static_cast<double>(tf);
    if (scorer.kind == ScorerKind::kBm25) {
      // Non-negative idf variant, so every matching term adds a positive amount.
      const double idf = std::log(1.0 + (n_docs - df + 0.5) / (df + 0.5));
      total += idf * f * (scorer.k1 + 1.0) /
               (f + scorer.k1 * (1.0 - scorer.b + scorer.b * length_ratio));
    } else {
      total += f * std::log(1.0 + n_docs / df);
    }
  }
  return total;
}

double InvertedIndex::score(std::span<const std::string> query, std::string_view doc_id,
                            const ScorerConfig& scorer) const {
  auto ref = find(doc_id);
  if (!ref) throw Error("validation", "unknown document '" + std::string(doc_id) + "'");
  return score(query, *ref, scorer);
}

LexicalQuery LexicalQuery::make(std::string_view question, std::string_view answer) {
  return LexicalQuery{sorted_unique(query_tokens(question)), sorted_unique(query_tokens(answer))};
}

std::vector<std::string> LexicalQuery::terms() const {
  std::vector<std::string> all = question_tokens;
  all.insert(all.end(), answer_tokens.begin(), answer_tokens.end());
  return sorted_unique(std::move(all));
}

RetrievalResult retrieve(const InvertedIndex& index, std::string_view question,
                         std::string_view answer, std::size_t top_k, const ScorerConfig& scorer) {
  if (top_k == 0) throw Error("validation", "top_k must be positive");
  const auto query = LexicalQuery::make(question, answer);
  RetrievalResult result;
  result.degenerate = query.degenerate();

  std::vector<std::uint32_t> candidates;
  const auto with_question = docs_matching_any(index, query.question_tokens);
  const auto with_answer = docs_matching_any(index, query.answer_tokens);
  if (query.question_tokens.empty()) {
    candidates = with_answer;
  } else if (query.answer_tokens.empty()) {
    candidates = with_question;
  } else {
    std::set_intersection(with_question.begin(), with_question.end(), with_answer.begin(),
                          with_answer.end(), std::back_inserter(candidates));
  }

  const auto terms = query.terms();
  std::vector<std::pair<double, std::uint32_t>> scored;
  scored.reserve(candidates.size());
  for (std::uint32_t ref : candidates) scored.emplace_back(index.score(terms, ref, scorer), ref);
  // Refs follow doc_id order, so ascending ref is ascending doc_id.
  auto better = [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  };
  const std::size_t keep = std::min(top_k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep),
                    scored.end(), better);
  for (std::size_t i = 0; i < keep; ++i) {
    const auto& doc = index.document(scored[i].second);
    result.docs.push_back(RetrievedDoc{doc.doc_id, doc.corpus_id, scored[i].first});
  }
  return result;
}

MultiRetrieval retrieve_multi(std::span<const QuotaIndex> indices, std::string_view question,
                              std::string_view answer, const ScorerConfig& scorer) {
  MultiRetrieval out;
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto& qi = indices[i];
    if (qi.index == nullptr || qi.quota == 0) {
      throw Error("config", "index " + std::to_string(i) + " needs a positive quota");
    }
    auto part = retrieve(*qi.index, question, answer, qi.quota, scorer);
    out.degenerate = out.degenerate || part.degenerate;
    out.counts.push_back(part.docs.size());
    for (auto& d : part.docs) {
      if (!seen.emplace(d.doc_id, i).second) {
        throw Error("validation", "doc_id '" + d.doc_id + "' returned by more than one index");
      }
      out.docs.push_back(std::move(d));
    }
  }
  return out;
}

void save_index(const InvertedIndex& index, const std::string& path) {
  io::ByteWriter w;
  w.bytes(kIndexMagic);
  w.u32(kIndexVersion);
  w.u64(index.doc_count());
  for (const auto& d : index.documents()) {
    w.string(d.doc_id);
    w.string(d.corpus_id);
    w.string(d.text);
    w.u32(d.token_count);
  }
  const auto terms = index.sorted_terms();
  w.u64(terms.size());
  for (const auto& term : terms) {
    auto list = index.postings(term);
    w.string(term);
    w.u32(static_cast<std::uint32_t>(list.size()));
    for (const Posting& p : list) {
      w.u32(p.doc);
      w.u32(p.tf);
    }
  }
  w.bytes(kIndexTrailer);
  io::write_file(path, w.buffer());
}

InvertedIndex load_index(const std::string& path) {
  const std::string data = io::read_file(path);
  io::ByteReader r(data);
  if (data.size() < kIndexMagic.size() || r.bytes(kIndexMagic.size()) != kIndexMagic) {
    throw Error("version", path + " is not an index file (bad magic)");
  }
  const auto version = r.u32();
  if (version != kIndexVersion) {
    throw Error("version", path + ": unsupported index version " + std::to_string(version));
  }
  const auto n_docs = r.u64();
  std::vector<DocumentRecord> docs;
  for (std::uint64_t i = 0; i < n_docs; ++i) {
    DocumentRecord d;
    d.doc_id = r.string();
    d.corpus_id = r.string();
    d.text = r.string();
    d.token_count = r.u32();
    docs.push_back(std::move(d));
  }
  const auto n_terms = r.u64();
  std::vector<std::pair<std::string, std::vector<Posting>>> postings;
  for (std::uint64_t i = 0; i < n_terms; ++i) {
    std::string term = r.string();
    const auto n = r.u32();
    if (static_cast<std::uint64_t>(n) * 8 > r.remaining()) throw Error("format", "truncated file");
    std::vector<Posting> list(n);
    for (auto& p : list) {
      p.doc = r.u32();
      p.tf = r.u32();
    }
    postings.emplace_back(std::move(term), std::move(list));
  }
  if (r.bytes(kIndexTrailer.size()) != kIndexTrailer || !r.at_end()) {
    throw Error("format", path + ": missing or misplaced trailer");
  }
  return InvertedIndex::from_parts(std::move(docs), std::move(postings));
}

std::vector<DocumentRecord> read_corpus(const std::string& path,
                                        std::optional<std::string> corpus_id) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open corpus " + path);
  const std::filesystem::path p(path);
  const bool jsonl = p.extension() == ".jsonl" || p.extension() == ".json";
  const std::string default_corpus = corpus_id.value_or(p.stem().string());

  std::vector<DocumentRecord> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (jsonl) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        auto j = nlohmann::json::parse(line);
        DocumentRecord d;
        d.doc_id = j.at("doc_id").get<std::string>();
        d.corpus_id = j.contains("corpus_id") ? j.at("corpus_id").get<std::string>()
                                               : default_corpus;
        if (corpus_id) d.corpus_id = *corpus_id;
        d.text = j.at("text").get<std::string>();
        docs.push_back(std::move(d));
      } catch (const nlohmann::json::exception& e) {
        throw Error("format", path + ":" + std::to_string(line_no) + ": " + e.what());
      }
    } else {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      docs.push_back(DocumentRecord{default_corpus + ":" + std::to_string(line_no),
                                    default_corpus, line, 0});
    }
  }
  return docs;
}

}  // namespace qa::text
