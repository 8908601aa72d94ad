#include "qa/report.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "json.hpp"
#include "qa/binary_io.hpp"
#include "qa/error.hpp"
#include "qa/numfmt.hpp"

namespace qa::report {
namespace {

using nlohmann::json;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string subset_name(const std::vector<disc::DiscriminatorId>& subset) {
  std::string out;
  for (const auto& id : subset) {
    if (!out.empty()) out += '+';
    out += id.str();
  }
  return out;
}

std::string join_doubles(const std::vector<double>& v, char sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += format_double(v[i]);
  }
  return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

json eval_json(const eval::EvalReport& r) {
  json preds = json::array();
  for (const auto& p : r.predictions) {
    preds.push_back({{"question_id", p.question_id},
                     {"predicted", p.predicted},
                     {"answer", p.answer},
                     {"probabilities", p.probabilities}});
  }
  return {{"dataset", r.dataset},         {"split", r.split},
          {"system", r.system},           {"accuracy", r.accuracy},
          {"correct", r.correct},         {"total", r.total},
          {"config_fingerprint", r.config_fingerprint}, {"predictions", preds}};
}

json ablation_json(const eval::AblationTable& t) {
  json subsets = json::array();
  for (const auto& s : t.subsets) subsets.push_back(subset_name(s));
  json rows = json::array();
  for (const auto& row : t.rows) {
    json cells = json::array();
    for (const auto& c : row.cells) cells.push_back({{"accuracy", c.accuracy}, {"per_seed", c.per_seed}});
    rows.push_back({{"dataset", row.dataset}, {"cells", cells}});
  }
  return {{"subsets", subsets}, {"seeds", t.seeds}, {"eval_split", t.eval_split}, {"rows", rows}};
}

json sweep_json(const eval::SweepResult& s) {
  json points = json::array();
  for (const auto& p : s.points) {
    points.push_back({{"n", p.n},
                      {"accuracy", p.accuracy},
                      {"per_seed", p.per_seed},
                      {"short_lists", p.short_lists}});
  }
  return {{"seeds", s.seeds}, {"points", points}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error("format", std::string("report json: ") + e.what());
  }
}

template <typename F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error("format", std::string("report json: ") + e.what());
  }
}

}  // namespace

Format parse_format(std::string_view name) {
  if (name == "json") return Format::kJson;
  if (name == "csv") return Format::kCsv;
  if (name == "markdown" || name == "md") return Format::kMarkdown;
  throw Error("config", "unknown report format '" + std::string(name) + "'");
}

std::string_view to_string(Format f) {
  switch (f) {
    case Format::kJson: return "json";
    case Format::kCsv: return "csv";
    case Format::kMarkdown: return "markdown";
  }
  return "json";
}

std::optional<double> reference_accuracy(std::string_view dataset, std::string_view system) {
  const auto d = lower(dataset);
  const bool easy = d.find("easy") != std::string::npos;
  const bool challenge = d.find("challenge") != std::string::npos;
  if (!easy && !challenge) return std::nullopt;
  if (system == "random") return 0.25;
  if (easy) {
    if (system == "ir-baseline") return 0.6255;
    if (system == "attentive-ranker" || system == "tfd+drd+avd") return 0.7230;
    if (system == "tfd") return 0.6389;
    if (system == "tfd+drd") return 0.6748;
  } else {
    if (system == "attentive-ranker" || system == "tfd+drd+avd") return 0.4472;
    if (system == "tfd") return 0.2670;
    if (system == "tfd+drd") return 0.3416;
  }
  return std::nullopt;
}

std::string render(const eval::EvalReport& r, Format f) {
  switch (f) {
    case Format::kJson: return dump(eval_json(r));
    case Format::kCsv: {
      std::string out = "dataset,split,system,accuracy,correct,total\n";
      out += csv_field(r.dataset) + "," + csv_field(r.split) + "," + csv_field(r.system) + "," +
             format_double(r.accuracy) + "," + std::to_string(r.correct) + "," +
             std::to_string(r.total) + "\n";
      return out;
    }
    case Format::kMarkdown: {
      std::ostringstream os;
      os << "| Dataset | Split | System | Source | Accuracy |\n";
      os << "|---|---|---|---|---|\n";
      os << "| " << r.dataset << " | " << r.split << " | " << r.system << " | measured | "
         << format_percent(r.accuracy) << " |\n";
      if (auto ref = reference_accuracy(r.dataset, r.system)) {
        os << "| " << r.dataset << " | " << r.split << " | " << r.system << " | reference | "
           << format_percent(*ref) << " |\n";
      }
      if (auto rnd = reference_accuracy(r.dataset, "random")) {
        os << "| " << r.dataset << " | " << r.split << " | random | reference | "
           << format_percent(*rnd) << " |\n";
      }
      os << "\n" << r.correct << " of " << r.total << " correct.\n";
      return os.str();
    }
  }
  return {};
}

std::string render(const eval::AblationTable& t, Format f) {
  switch (f) {
    case Format::kJson: return dump(ablation_json(t));
    case Format::kCsv: {
      std::string out = "dataset,subset,accuracy,per_seed\n";
      for (const auto& row : t.rows) {
        for (std::size_t s = 0; s < row.cells.size(); ++s) {
          out += csv_field(row.dataset) + "," + subset_name(t.subsets[s]) + "," +
                 format_double(row.cells[s].accuracy) + "," + join_doubles(row.cells[s].per_seed, ';') +
                 "\n";
        }
      }
      return out;
    }
    case Format::kMarkdown: {
      std::ostringstream os;
      os << "| Dataset | Source |";
      for (const auto& s : t.subsets) os << " " << subset_name(s) << " |";
      os << "\n|---|---|";
      for (std::size_t i = 0; i < t.subsets.size(); ++i) os << "---|";
      os << "\n";
      for (const auto& row : t.rows) {
        os << "| " << row.dataset << " | measured |";
        for (const auto& c : row.cells) os << " " << format_percent(c.accuracy) << " |";
        os << "\n";
        bool any = false;
        std::ostringstream ref;
        ref << "| " << row.dataset << " | reference |";
        for (const auto& s : t.subsets) {
          auto v = reference_accuracy(row.dataset, subset_name(s));
          any = any || v.has_value();
          ref << " " << (v ? format_percent(*v) : std::string("n/a")) << " |";
        }
        if (any) os << ref.str() << "\n";
      }
      os << "\nEvaluated on " << t.eval_split << ", mean over " << t.seeds.size() << " seed(s).\n";
      return os.str();
    }
  }
  return {};
}

std::string render(const eval::SweepResult& s, Format f) {
  switch (f) {
    case Format::kJson: return dump(sweep_json(s));
    case Format::kCsv: {
      std::string out = "n,accuracy,short_lists,per_seed\n";
      for (const auto& p : s.points) {
        out += std::to_string(p.n) + "," + format_double(p.accuracy) + "," +
               (p.short_lists ? "1" : "0") + "," + join_doubles(p.per_seed, ';') + "\n";
      }
      return out;
    }
    case Format::kMarkdown: {
      std::ostringstream os;
      os << "| N | Dev accuracy | Short lists |\n|---|---|---|\n";
      for (const auto& p : s.points) {
        os << "| " << p.n << " | " << format_percent(p.accuracy) << " | "
           << (p.short_lists ? "yes" : "no") << " |\n";
      }
      return os.str();
    }
  }
  return {};
}

template <typename T>
void emit_report(const std::string& path, const T& value, Format f) {
  io::write_file(path, render(value, f));
}

template void emit_report(const std::string&, const eval::EvalReport&, Format);
template void emit_report(const std::string&, const eval::AblationTable&, Format);
template void emit_report(const std::string&, const eval::SweepResult&, Format);

eval::EvalReport eval_report_from_json(std::string_view text) {
  const auto j = parse_json(text);
  return guarded([&] {
    eval::EvalReport r;
    r.dataset = j.at("dataset").get<std::string>();
    r.split = j.at("split").get<std::string>();
    r.system = j.at("system").get<std::string>();
    r.accuracy = j.at("accuracy").get<double>();
    r.correct = j.at("correct").get<std::size_t>();
    r.total = j.at("total").get<std::size_t>();
    r.config_fingerprint = j.at("config_fingerprint").get<std::string>();
    for (const auto& p : j.at("predictions")) {
      r.predictions.push_back({p.at("question_id").get<std::string>(), p.at("predicted").get<std::size_t>(),
                               p.at("answer").get<std::size_t>(),
                               p.at("probabilities").get<std::vector<double>>()});
    }
    return r;
  });
}

eval::AblationTable ablation_from_json(std::string_view text) {
  const auto j = parse_json(text);
  return guarded([&] {
    eval::AblationTable t;
    for (const auto& s : j.at("subsets")) {
      std::vector<disc::DiscriminatorId> ids;
      for (const auto& part : split(s.get<std::string>(), '+')) ids.emplace_back(part);
      t.subsets.push_back(std::move(ids));
    }
    t.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    t.eval_split = j.at("eval_split").get<std::string>();
    for (const auto& row : j.at("rows")) {
      eval::AblationRow r{row.at("dataset").get<std::string>(), {}};
      for (const auto& c : row.at("cells")) {
        r.cells.push_back({c.at("accuracy").get<double>(), c.at("per_seed").get<std::vector<double>>()});
      }
      t.rows.push_back(std::move(r));
    }
    return t;
  });
}

eval::SweepResult sweep_from_json(std::string_view text) {
  const auto j = parse_json(text);
  return guarded([&] {
    eval::SweepResult s;
    s.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    for (const auto& p : j.at("points")) {
      s.points.push_back({p.at("n").get<std::size_t>(), p.at("accuracy").get<double>(),
                          p.at("per_seed").get<std::vector<double>>(), p.at("short_lists").get<bool>()});
    }
    return s;
  });
}

eval::SweepResult sweep_from_csv(std::string_view text) {
  eval::SweepResult s;
  auto lines = split(text, '\n');
  if (lines.empty() || lines[0] != "n,accuracy,short_lists,per_seed") {
    throw Error("format", "sweep csv: unexpected header");
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto f = split(lines[i], ',');
    if (f.size() != 4) throw Error("format", "sweep csv line " + std::to_string(i + 1) + ": expected 4 fields");
    eval::SweepPoint p;
    p.n = static_cast<std::size_t>(parse_double(f[0]));
    p.accuracy = parse_double(f[1]);
    p.short_lists = f[2] == "1";
    if (!f[3].empty()) {
      for (const auto& v : split(f[3], ';')) p.per_seed.push_back(parse_double(v));
    }
    s.points.push_back(std::move(p));
  }
  return s;
}

}  // namespace qa::report
