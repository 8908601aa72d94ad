#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qa::data {

/// One multiple-choice question. answer_index is absent for unlabeled splits.
struct Question {
  std::string id;
  std::string text;
  std::vector<std::string> candidates;
  std::optional<std::size_t> answer_index;

  bool operator==(const Question&) const = default;
};

enum class Split { kTrain, kDev, kTest };

inline constexpr std::array<Split, 3> kAllSplits = {Split::kTrain, Split::kDev, Split::kTest};

std::string_view to_string(Split split);
/// Accepts "train", "dev" and "test".
Split parse_split(std::string_view name);

struct QaDataset {
  std::string name;
  std::map<Split, std::vector<Question>> splits;

  const std::vector<Question>& split(Split s) const;
  bool operator==(const QaDataset&) const = default;
};

/// Throws qa::Error if a question breaks an invariant (fewer than two
/// candidates, empty or duplicate candidate text, answer out of range).
void validate_question(const Question& q);

/// Reads one JSON-lines split. Blank lines are skipped. Errors name the line
/// number for malformed records and the id for duplicates.
std::vector<Question> read_questions(const std::string& path);
void write_questions(const std::vector<Question>& questions, const std::string& path);

/// Loads {train,dev,test}.jsonl from a directory; missing split files yield
/// empty splits. A regular file is loaded as the split named by its stem, or
/// as "train" when the stem is not a split name.
QaDataset load_dataset(const std::string& path);
void save_dataset(const QaDataset& ds, const std::string& dir);

struct ValidationReport {
  std::map<Split, std::size_t> split_counts;
  /// candidate count -> number of questions
  std::map<std::size_t, std::size_t> candidate_histogram;
  double labeled_fraction = 0.0;
  std::size_t total = 0;
};

ValidationReport validate_dataset(const QaDataset& ds);

/// Converts one ARC file (native CSV or the upstream JSONL with question.stem /
/// question.choices / answerKey) into canonical questions.
std::vector<Question> convert_arc_file(const std::string& path);

/// Converts the ARC split files in a directory: names ending in -Train, -Dev or
/// -Test with a .csv or .jsonl extension. JSONL wins when a split has both.
QaDataset convert_arc_directory(const std::string& dir);

}  // namespace qa::data
