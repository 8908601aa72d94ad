#include "qa/dataset.hpp"

#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "json.hpp"
#include "qa/binary_io.hpp"
#include "qa/error.hpp"

namespace qa::data {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kTest: return "test";
  }
  return "train";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "dev") return Split::kDev;
  if (name == "test") return Split::kTest;
  throw Error("config", "unknown split '" + std::string(name) + "'");
}

const std::vector<Question>& QaDataset::split(Split s) const {
  static const std::vector<Question> kEmpty;
  auto it = splits.find(s);
  return it == splits.end() ? kEmpty : it->second;
}

void validate_question(const Question& q) {
  if (q.candidates.size() < 2) {
    throw Error("validation", "question '" + q.id + "' has fewer than 2 candidates");
  }
  std::set<std::string_view> seen;
  for (const auto& c : q.candidates) {
    if (c.empty()) throw Error("validation", "question '" + q.id + "' has an empty candidate");
    if (!seen.insert(c).second) {
      throw Error("validation", "question '" + q.id + "' repeats candidate '" + c + "'");
    }
  }
  if (q.answer_index && *q.answer_index >= q.candidates.size()) {
    throw Error("validation", "question '" + q.id + "': answer_index " +
                                  std::to_string(*q.answer_index) + " out of range");
  }
}

std::vector<Question> read_questions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open " + path);
  std::vector<Question> out;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Question q;
    try {
      auto j = json::parse(line);
      q.id = j.at("id").get<std::string>();
      q.text = j.at("question").get<std::string>();
      q.candidates = j.at("candidates").get<std::vector<std::string>>();
      if (j.contains("answer_index") && !j.at("answer_index").is_null()) {
        const auto idx = j.at("answer_index").get<long long>();
        if (idx < 0) throw Error("validation", "negative answer_index");
        q.answer_index = static_cast<std::size_t>(idx);
      }
    } catch (const json::exception& e) {
      throw Error("format", path + ": line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.kind(), path + ": line " + std::to_string(line_no) + ": " + e.what());
    }
    try {
      validate_question(q);
    } catch (const Error& e) {
      throw Error(e.kind(), path + ": line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!ids.insert(q.id).second) {
      throw Error("validation", path + ": duplicate id '" + q.id + "'");
    }
    out.push_back(std::move(q));
  }
  return out;
}

void write_questions(const std::vector<Question>& questions, const std::string& path) {
  std::string out;
  for (const auto& q : questions) {
    json j;
    j["id"] = q.id;
    j["question"] = q.text;
    j["candidates"] = q.candidates;
    if (q.answer_index) j["answer_index"] = *q.answer_index;
    out += j.dump();
    out += '\n';
  }
  io::write_file(path, out);
}

QaDataset load_dataset(const std::string& path) {
  QaDataset ds;
  const fs::path p(path);
  if (fs::is_directory(p)) {
    ds.name = p.filename().string();
    if (ds.name.empty()) ds.name = p.parent_path().filename().string();
    for (Split s : kAllSplits) {
      const auto file = p / (std::string(to_string(s)) + ".jsonl");
      ds.splits[s] = fs::exists(file) ? read_questions(file.string()) : std::vector<Question>{};
    }
    return ds;
  }
  if (!fs::exists(p)) throw Error("io", "no such dataset " + path);
  ds.name = p.stem().string();
  Split target = Split::kTrain;
  try {
    target = parse_split(p.stem().string());
  } catch (const Error&) {
  }
  for (Split s : kAllSplits) ds.splits[s] = {};
  ds.splits[target] = read_questions(path);
  return ds;
}

void save_dataset(const QaDataset& ds, const std::string& dir) {
  for (Split s : kAllSplits) {
    write_questions(ds.split(s), (fs::path(dir) / (std::string(to_string(s)) + ".jsonl")).string());
  }
}

ValidationReport validate_dataset(const QaDataset& ds) {
  ValidationReport r;
  std::size_t labeled = 0;
  for (Split s : kAllSplits) {
    const auto& qs = ds.split(s);
    r.split_counts[s] = qs.size();
    for (const auto& q : qs) {
      ++r.candidate_histogram[q.candidates.size()];
      if (q.answer_index) ++labeled;
    }
    r.total += qs.size();
  }
  r.labeled_fraction = r.total == 0 ? 0.0 : static_cast<double>(labeled) / static_cast<double>(r.total);
  return r;
}

namespace {

// RFC 4180 records: quoted fields may contain commas, doubled quotes and newlines.
std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      row.push_back(std::move(field));
      field.clear();
      if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
      row.clear();
    } else {
      field += c;
    }
  }
  if (!field.empty() || !row.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::optional<std::size_t> answer_position(const std::vector<std::string>& labels,
                                           const std::string& key) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == key) return i;
  }
  return std::nullopt;
}

Question from_labeled_choices(std::string id, std::string stem, std::vector<std::string> labels,
                              std::vector<std::string> texts, const std::string& key) {
  Question q{std::move(id), trim(std::move(stem)), {}, std::nullopt};
  for (auto& t : texts) q.candidates.push_back(trim(std::move(t)));
  if (!key.empty()) {
    q.answer_index = answer_position(labels, trim(key));
    if (!q.answer_index) throw Error("format", "answer key '" + key + "' matches no choice in " + q.id);
  }
  return q;
}

}  // namespace

std::vector<Question> convert_arc_file(const std::string& path) {
  const std::string text = io::read_file(path);
  std::vector<Question> out;
  const auto ext = fs::path(path).extension();
  if (ext == ".jsonl" || ext == ".json") {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        auto j = json::parse(line);
        std::vector<std::string> labels, texts;
        for (const auto& c : j.at("question").at("choices")) {
          labels.push_back(c.at("label").get<std::string>());
          texts.push_back(c.at("text").get<std::string>());
        }
        out.push_back(from_labeled_choices(j.at("id").get<std::string>(),
                                           j.at("question").at("stem").get<std::string>(),
                                           labels, texts, j.value("answerKey", std::string())));
      } catch (const json::exception& e) {
        throw Error("format", path + ": line " + std::to_string(line_no) + ": " + e.what());
      }
    }
  } else {
    auto rows = parse_csv(text);
    if (rows.empty()) return out;
    const auto& header = rows.front();
    auto column = [&](const std::string& name) -> std::size_t {
      for (std::size_t i = 0; i < header.size(); ++i) {
        if (trim(header[i]) == name) return i;
      }
      throw Error("format", path + ": missing CSV column '" + name + "'");
    };
    const auto id_col = column("questionID");
    const auto key_col = column("AnswerKey");
    const auto q_col = column("question");
    static const std::regex kOption(R"(\(([A-Ea-e1-5])\)\s*)");
    for (std::size_t r = 1; r < rows.size(); ++r) {
      const auto& row = rows[r];
      if (row.size() <= std::max({id_col, key_col, q_col})) {
        throw Error("format", path + ": row " + std::to_string(r + 1) + " has too few fields");
      }
      const std::string& body = row[q_col];
      std::vector<std::pair<std::size_t, std::smatch>> marks;
      for (auto it = std::sregex_iterator(body.begin(), body.end(), kOption);
           it != std::sregex_iterator(); ++it) {
        marks.emplace_back(static_cast<std::size_t>(it->position()), *it);
      }
      if (marks.size() < 2) {
        throw Error("format", path + ": row " + std::to_string(r + 1) + " has no answer options");
      }
      std::vector<std::string> labels, texts;
      for (std::size_t k = 0; k < marks.size(); ++k) {
        const auto start = marks[k].first + static_cast<std::size_t>(marks[k].second.length());
        const auto end = k + 1 < marks.size() ? marks[k + 1].first : body.size();
        labels.push_back(marks[k].second[1].str());
        texts.push_back(body.substr(start, end - start));
      }
      out.push_back(from_labeled_choices(row[id_col], body.substr(0, marks.front().first),
                                         labels, texts, row[key_col]));
    }
  }
  for (const auto& q : out) validate_question(q);
  return out;
}

QaDataset convert_arc_directory(const std::string& dir) {
  if (!fs::is_directory(dir)) throw Error("io", "not a directory: " + dir);
  std::map<Split, fs::path> chosen;
  std::vector<fs::path> entries;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file()) entries.push_back(e.path());
  }
  std::sort(entries.begin(), entries.end());
  for (const auto& p : entries) {
    const auto ext = p.extension().string();
    if (ext != ".csv" && ext != ".jsonl") continue;
    std::string stem = p.stem().string();
    std::transform(stem.begin(), stem.end(), stem.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    std::optional<Split> split;
    for (Split s : kAllSplits) {
      if (stem.ends_with("-" + std::string(to_string(s)))) split = s;
    }
    if (!split) continue;
    auto [it, fresh] = chosen.emplace(*split, p);
    if (!fresh && ext == ".jsonl") it->second = p;
  }
  if (chosen.empty()) throw Error("io", dir + " holds no ARC split files");
  QaDataset ds;
  ds.name = fs::path(dir).filename().string();
  for (Split s : kAllSplits) {
    auto it = chosen.find(s);
    ds.splits[s] = it == chosen.end() ? std::vector<Question>{} : convert_arc_file(it->second.string());
  }
  return ds;
}

}  // namespace qa::data
