#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace qa::text {

struct DocumentRecord {
  std::string doc_id;
  std::string corpus_id;
  std::string text;
  std::uint32_t token_count = 0;

  bool operator==(const DocumentRecord&) const = default;
};

enum class ScorerKind { kBm25, kClassicTfidf };

struct ScorerConfig {
  ScorerKind kind = ScorerKind::kBm25;
  double k1 = 1.2;
  double b = 0.75;
};

std::string to_string(ScorerKind kind);
/// Accepts "bm25" and "classic-tfidf".
ScorerKind parse_scorer(std::string_view name);

struct Posting {
  std::uint32_t doc = 0;
  std::uint32_t tf = 0;

  bool operator==(const Posting&) const = default;
};

/// Term-at-a-time inverted index over a document collection.
///
/// Documents are stored sorted by doc_id and referenced by their position in
/// that order, which makes the built structure independent of ingestion order.
/// Immutable after build() or load_index(); safe for concurrent readers.
class InvertedIndex {
 public:
  InvertedIndex() = default;

  /// Tokenizes every document, drops documents without tokens and rejects
  /// duplicate doc_ids. The token_count field of the input is recomputed.
  [[nodiscard]] static InvertedIndex build(std::vector<DocumentRecord> docs);

  std::size_t doc_count() const noexcept { return docs_.size(); }
  std::size_t term_count() const noexcept { return postings_.size(); }
  std::uint64_t total_tokens() const noexcept { return total_tokens_; }
  double average_doc_length() const noexcept;

  std::span<const DocumentRecord> documents() const noexcept { return docs_; }
  const DocumentRecord& document(std::uint32_t ref) const { return docs_.at(ref); }
  std::optional<std::uint32_t> find(std::string_view doc_id) const;

  std::span<const Posting> postings(std::string_view term) const;
  std::uint32_t document_frequency(std::string_view term) const;
  std::uint32_t term_frequency(std::string_view term, std::uint32_t doc) const;

  /// Terms in lexicographic order.
  std::vector<std::string> sorted_terms() const;

  /// Lexical relevance of one document for a token multiset; each occurrence of
  /// a query token contributes once. Tokens absent from the index contribute 0.
  double score(std::span<const std::string> query, std::uint32_t doc,
               const ScorerConfig& scorer = {}) const;
  /// Same, by doc_id; throws for unknown documents.
  double score(std::span<const std::string> query, std::string_view doc_id,
               const ScorerConfig& scorer = {}) const;

  /// Reassembles an index from persisted parts, validating every invariant.
  static InvertedIndex from_parts(std::vector<DocumentRecord> docs,
                                  std::vector<std::pair<std::string, std::vector<Posting>>> postings);

 private:
  void finish();

  std::vector<DocumentRecord> docs_;
  std::unordered_map<std::string, std::vector<Posting>> postings_;
  std::unordered_map<std::string, std::uint32_t> doc_lookup_;
  std::uint64_t total_tokens_ = 0;
};

/// The "question tokens AND answer tokens" query. Both groups are
/// stopword-filtered, deduplicated and sorted.
struct LexicalQuery {
  std::vector<std::string> question_tokens;
  std::vector<std::string> answer_tokens;

  static LexicalQuery make(std::string_view question, std::string_view answer);

  /// Sorted union of both groups; the terms used for ranking.
  std::vector<std::string> terms() const;
  bool degenerate() const noexcept { return question_tokens.empty() || answer_tokens.empty(); }
};

struct RetrievedDoc {
  std::string doc_id;
  std::string corpus_id;
  double score = 0.0;

  bool operator==(const RetrievedDoc&) const = default;
};

struct RetrievalResult {
  std::vector<RetrievedDoc> docs;
  /// Set when one token group was empty and only the other was required.
  bool degenerate = false;
};

/// Documents containing at least one question token and at least one answer
/// token, ranked by score over the union of both groups (descending, ties by
/// ascending doc_id). When exactly one group is empty only the other is
/// required; when both are empty nothing is returned.
RetrievalResult retrieve(const InvertedIndex& index, std::string_view question,
                         std::string_view answer, std::size_t top_k,
                         const ScorerConfig& scorer = {});

struct QuotaIndex {
  const InvertedIndex* index = nullptr;
  std::size_t quota = 0;
};

struct MultiRetrieval {
  /// Per-index results concatenated in index order; no global re-sort.
  std::vector<RetrievedDoc> docs;
  /// Number of documents each index actually contributed.
  std::vector<std::size_t> counts;
  bool degenerate = false;
};

/// Retrieves up to quota documents from each index. Shortfalls are reported in
/// counts and never backfilled from another index.
MultiRetrieval retrieve_multi(std::span<const QuotaIndex> indices, std::string_view question,
                              std::string_view answer, const ScorerConfig& scorer = {});

/// Single-file persistence: versioned magic header, little-endian fixed-width
/// integers, length-prefixed strings and postings.
void save_index(const InvertedIndex& index, const std::string& path);
InvertedIndex load_index(const std::string& path);

/// Reads a corpus file. ".jsonl"/".json" files hold {"doc_id", "corpus_id",
/// "text"} objects; anything else is plain text with one document per line and
/// ids "<corpus>:<line>" (1-based). corpus_id defaults to the file stem for
/// plain text.
std::vector<DocumentRecord> read_corpus(const std::string& path,
                                        std::optional<std::string> corpus_id = std::nullopt);

}  // namespace qa::text
