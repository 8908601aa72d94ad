#include "commands.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>

#include "qa/binary_io.hpp"
#include "qa/checkpoint.hpp"
#include "qa/dataset.hpp"
#include "qa/error.hpp"
#include "qa/eval.hpp"
#include "qa/pipeline.hpp"
#include "qa/rankings.hpp"
#include "qa/report.hpp"
#include "qa/synthetic.hpp"
#include "qa/text_index.hpp"
#include "qa/trainer.hpp"

namespace qa::cli {
namespace fs = std::filesystem;
using nlohmann::json;

void RunContext::output(const std::string& path) { manifest.outputs[path] = path_sha256(path); }

namespace {

// ---- config access -------------------------------------------------------

std::string text(const json& cfg, const std::string& key) {
  if (!cfg.contains(key)) throw MissingOption(key);
  return cfg.at(key).get<std::string>();
}

std::string text_or(const json& cfg, const std::string& key, const std::string& fallback) {
  return cfg.contains(key) ? cfg.at(key).get<std::string>() : fallback;
}

std::size_t count_or(const json& cfg, const std::string& key, std::size_t fallback) {
  return cfg.contains(key) ? cfg.at(key).get<std::size_t>() : fallback;
}

std::vector<std::string> list_or_empty(const json& cfg, const std::string& key) {
  return cfg.contains(key) ? cfg.at(key).get<std::vector<std::string>>() : std::vector<std::string>{};
}

std::vector<disc::DiscriminatorId> discriminators(const json& cfg, const std::string& key) {
  std::vector<disc::DiscriminatorId> out;
  for (const auto& s : list_or_empty(cfg, key)) out.emplace_back(s);
  if (out.empty()) throw MissingOption(key);
  return out;
}

std::vector<std::uint64_t> seeds_or(const json& cfg, std::vector<std::uint64_t> fallback) {
  return cfg.contains("seeds") ? cfg.at("seeds").get<std::vector<std::uint64_t>>() : fallback;
}

ranker::RankerConfig ranker_config(const json& cfg) {
  auto c = ranker::config_from_json(cfg);
  c.validate();
  return c;
}

void record_restart_seeds(RunContext& ctx, const ranker::RankerConfig& rc) {
  ctx.manifest.seeds.clear();
  for (std::size_t r = 0; r < rc.restarts; ++r) ctx.manifest.seeds.push_back(rc.seed + r);
}

text::ScorerConfig scorer_config(const json& cfg) {
  return text::ScorerConfig{text::parse_scorer(text_or(cfg, "scorer", "bm25"))};
}

std::map<std::string, pipeline::ScoreBinding> bindings(const json& cfg,
                                                       std::span<const disc::DiscriminatorId> ids) {
  std::map<std::string, pipeline::ScoreBinding> out;
  if (cfg.contains("bindings")) {
    for (const auto& [k, v] : cfg.at("bindings").items()) {
      out[k] = pipeline::ScoreBinding::parse(v.get<std::string>());
    }
  }
  for (const auto& id : ids) {
    if (!out.contains(id.str())) {
      if (id == disc::kTfd) {
        out[id.str()] = pipeline::ScoreBinding{};
      } else {
        throw Error("config", "discriminator '" + id.str() + "' has no score binding");
      }
    }
  }
  for (const auto& [k, _] : out) {
    bool listed = false;
    for (const auto& id : ids) listed = listed || id.str() == k;
    if (!listed) throw Error("config", "binding for '" + k + "' names an unlisted discriminator");
  }
  return out;
}

std::vector<std::size_t> quotas(const json& cfg, std::size_t index_count, std::size_t n_max) {
  if (index_count == 0) throw MissingOption("indices");
  std::vector<std::size_t> q;
  if (cfg.contains("quotas")) {
    q = cfg.at("quotas").get<std::vector<std::size_t>>();
    if (q.size() != index_count) {
      throw Error("config", "got " + std::to_string(q.size()) + " quotas for " +
                                std::to_string(index_count) + " indices");
    }
  } else {
    for (std::size_t i = 0; i < index_count; ++i) {
      q.push_back(n_max / index_count + (i < n_max % index_count ? 1 : 0));
    }
  }
  std::size_t sum = 0;
  for (auto v : q) sum += v;
  if (sum != n_max) {
    throw Error("config", "quotas sum to " + std::to_string(sum) + " but n_max is " +
                              std::to_string(n_max));
  }
  return q;
}

std::vector<data::Question> all_questions(const data::QaDataset& ds) {
  std::vector<data::Question> out;
  for (auto s : data::kAllSplits) {
    const auto& qs = ds.split(s);
    out.insert(out.end(), qs.begin(), qs.end());
  }
  return out;
}

std::string dataset_name(const json& cfg, const data::QaDataset& ds) {
  return text_or(cfg, "dataset_name", ds.name);
}

void note(const std::string& msg) { std::cerr << "note: " << msg << "\n"; }

/// Dataset, retrievals and scores: what every model command consumes.
struct Inputs {
  data::QaDataset ds;
  std::vector<pipeline::RetrievalRecord> retrievals;
  disc::PrecomputedScoreStore store;

  std::vector<ranker::QuestionInstance> instances(data::Split split,
                                                  std::span<const disc::DiscriminatorId> rows,
                                                  std::size_t n_max, double missing_score) const {
    std::size_t missing = 0;
    auto out = pipeline::build_instances(ds.split(split), retrievals, store, rows,
                                         {n_max, missing_score}, &missing);
    if (missing > 0) {
      note(std::to_string(missing) + " score lookups in " + std::string(data::to_string(split)) +
           " used the missing-score value " + format_missing(missing_score));
    }
    return out;
  }

  static std::string format_missing(double v) { return nlohmann::json(v).dump(); }
};

Inputs load_inputs(const json& cfg, const std::string& dataset_key = "dataset",
                   const std::string& retrievals_key = "retrievals",
                   const std::string& scores_key = "scores") {
  Inputs in;
  in.ds = data::load_dataset(text(cfg, dataset_key));
  in.retrievals = pipeline::read_retrievals(text(cfg, retrievals_key));
  if (cfg.contains(scores_key)) in.store = disc::PrecomputedScoreStore::load(text(cfg, scores_key));
  return in;
}

double missing_score(const json& cfg) {
  return cfg.contains("missing_score") ? cfg.at("missing_score").get<double>() : 0.0;
}

std::string epoch_line(const ranker::EpochRecord& r) {
  return json{{"restart", r.restart},         {"epoch", r.epoch},
              {"train_loss", r.train_loss},   {"train_accuracy", r.train_accuracy},
              {"dev_loss", r.dev_loss},       {"dev_accuracy", r.dev_accuracy}}
             .dump();
}

void print_summary(const json& j) { std::cout << j.dump() << "\n"; }

// ---- steps shared by the single commands and the pipeline ----------------

void build_index(const std::string& corpus, std::optional<std::string> corpus_id,
                 const std::string& output) {
  text::save_index(text::InvertedIndex::build(text::read_corpus(corpus, std::move(corpus_id))), output);
}

std::vector<pipeline::RetrievalRecord> retrieve(const data::QaDataset& ds,
                                                const std::vector<std::string>& index_paths,
                                                const std::vector<std::size_t>& quota,
                                                const text::ScorerConfig& scorer,
                                                std::vector<text::InvertedIndex>& holder) {
  holder.clear();
  for (const auto& p : index_paths) holder.push_back(text::load_index(p));
  std::vector<text::QuotaIndex> qi;
  for (std::size_t i = 0; i < holder.size(); ++i) qi.push_back({&holder[i], quota[i]});
  const auto questions = all_questions(ds);
  return pipeline::retrieve_all(qi, questions, scorer);
}

disc::PrecomputedScoreStore score(const data::QaDataset& ds,
                                  std::span<const pipeline::RetrievalRecord> retrievals,
                                  std::span<const text::InvertedIndex> indices,
                                  std::span<const disc::DiscriminatorId> ids,
                                  const std::map<std::string, pipeline::ScoreBinding>& binds,
                                  const json& cfg) {
  const auto questions = all_questions(ds);
  std::vector<const text::InvertedIndex*> ptrs;
  for (const auto& idx : indices) ptrs.push_back(&idx);
  pipeline::ScoringInputs in;
  in.questions = questions;
  in.retrievals = retrievals;
  in.indices = ptrs;
  in.scorer = scorer_config(cfg);
  if (cfg.contains("remote")) {
    const auto& r = cfg.at("remote");
    in.remote.timeout_ms = r.value("timeout_ms", in.remote.timeout_ms);
    in.remote.max_batch = r.value("max_batch", in.remote.max_batch);
    in.remote.retry_count = r.value("retry_count", in.remote.retry_count);
    in.remote.max_in_flight = r.value("max_in_flight", in.remote.max_in_flight);
  }
  if (const char* dir = std::getenv("QA_CACHE_DIR"); dir != nullptr && *dir != '\0') {
    in.cache_dir = std::string(dir);
  }
  auto outcome = pipeline::score_retrievals(in, ids, binds);
  for (const auto& [id, n] : outcome.missing) {
    if (n > 0) note(std::to_string(n) + " " + id + " scores were absent from the score file");
  }
  return std::move(outcome.store);
}

ranker::TrainResult train_model(const Inputs& in, std::span<const disc::DiscriminatorId> rows,
                                const ranker::RankerConfig& rc, double missing,
                                const std::optional<std::string>& log_path) {
  const auto train_set = in.instances(data::Split::kTrain, rows, rc.n_max, missing);
  const auto dev_set = in.instances(data::Split::kDev, rows, rc.n_max, missing);
  std::string log;
  auto result = ranker::train(train_set, dev_set, rc, [&](const ranker::EpochRecord& r) {
    log += epoch_line(r) + "\n";
  });
  for (const auto& d : result.diagnostics) note(d);
  if (log_path) io::write_file(*log_path, log);
  return result;
}

eval::EvalReport evaluate(const ranker::Checkpoint& ck, const std::string& ck_path, const Inputs& in,
                          data::Split split, double missing, const std::string& name) {
  const auto instances = in.instances(split, ck.discriminators, ck.config.n_max, missing);
  for (const auto& inst : instances) {
    for (const auto& c : inst.candidates) ranker::check_compatible(ck, c.row_ids);
  }
  const auto fingerprint = path_sha256(ck_path).substr(0, 16);
  return eval::accuracy(ck.params, instances, name, std::string(data::to_string(split)), fingerprint);
}

// ---- commands ------------------------------------------------------------

void run_convert(const json& cfg, RunContext& ctx) {
  const auto out = text(cfg, "output");
  const auto in = text(cfg, "input");
  std::size_t total = 0;
  if (fs::is_directory(in)) {
    const auto ds = data::convert_arc_directory(in);
    data::save_dataset(ds, out);
    for (const auto& [split, qs] : ds.splits) total += qs.size();
  } else {
    const auto questions = data::convert_arc_file(in);
    data::write_questions(questions, out);
    total = questions.size();
  }
  ctx.output(out);
  ctx.manifest_path = out + ".manifest.json";
  print_summary({{"command", "convert-arc"}, {"questions", total}});
}

void run_index(const json& cfg, RunContext& ctx) {
  const auto out = text(cfg, "output");
  std::optional<std::string> id;
  if (cfg.contains("corpus_id")) id = cfg.at("corpus_id").get<std::string>();
  build_index(text(cfg, "corpus"), id, out);
  ctx.output(out);
  ctx.manifest_path = out + ".manifest.json";
  const auto idx = text::load_index(out);
  print_summary({{"command", "index"}, {"documents", idx.doc_count()}, {"terms", idx.term_count()}});
}

void run_retrieve(const json& cfg, RunContext& ctx) {
  const auto out = text(cfg, "output");
  const auto ds = data::load_dataset(text(cfg, "dataset"));
  const auto paths = list_or_empty(cfg, "indices");
  const auto q = quotas(cfg, paths.size(), ranker_config(cfg).n_max);
  std::vector<text::InvertedIndex> holder;
  const auto records = retrieve(ds, paths, q, scorer_config(cfg), holder);
  io::write_file(out, pipeline::retrievals_to_jsonl(records));
  ctx.output(out);
  ctx.manifest_path = out + ".manifest.json";
  std::size_t degenerate = 0;
  for (const auto& r : records) degenerate += r.degenerate ? 1 : 0;
  print_summary({{"command", "retrieve"}, {"records", records.size()}, {"degenerate", degenerate}});
}

void run_score(const json& cfg, RunContext& ctx) {
  const auto out = text(cfg, "output");
  const auto ds = data::load_dataset(text(cfg, "dataset"));
  const auto retrievals = pipeline::read_retrievals(text(cfg, "retrievals"));
  const auto ids = discriminators(cfg, "discriminators");
  const auto binds = bindings(cfg, ids);
  std::vector<text::InvertedIndex> indices;
  for (const auto& p : list_or_empty(cfg, "indices")) indices.push_back(text::load_index(p));
  const auto store = score(ds, retrievals, indices, ids, binds, cfg);
  store.save(out);
  ctx.output(out);
  ctx.manifest_path = out + ".manifest.json";
  print_summary({{"command", "score"}, {"scores", store.size()}});
}

void run_train(const json& cfg, RunContext& ctx) {
  const auto out = text(cfg, "output");
  const auto in = load_inputs(cfg);
  const auto rows = discriminators(cfg, "discriminators");
  auto rc = ranker_config(cfg);
  rc.k_disc = rows.size();
  std::optional<std::string> log;
  if (cfg.contains("log")) log = text(cfg, "log");
  record_restart_seeds(ctx, rc);
  auto result = train_model(in, rows, rc, missing_score(cfg), log);
  ranker::save_checkpoint({rc, rows, std::move(result.params)}, out);
  ctx.output(out);
  if (log) ctx.output(*log);
  ctx.manifest_path = out + ".manifest.json";
  print_summary({{"command", "train"},
                 {"best_restart", result.best_restart},
                 {"best_epoch", result.best_epoch},
                 {"best_loss", result.best_loss}});
}

void run_eval(const json& cfg, RunContext& ctx) {
  const auto out = text(cfg, "output");
  const auto format = report::parse_format(text_or(cfg, "format", "json"));
  const auto split = data::parse_split(text_or(cfg, "split", "test"));
  eval::EvalReport rep;
  if (cfg.value("ir_baseline", false)) {
    const auto ds = data::load_dataset(text(cfg, "dataset"));
    const auto retrievals = pipeline::read_retrievals(text(cfg, "retrievals"));
    rep = eval::ir_baseline(ds.split(split), retrievals, dataset_name(cfg, ds),
                            std::string(data::to_string(split)));
  } else {
    const auto ck_path = text(cfg, "checkpoint");
    const auto ck = ranker::load_checkpoint(ck_path);
    const auto in = load_inputs(cfg);
    rep = evaluate(ck, ck_path, in, split, missing_score(cfg), dataset_name(cfg, in.ds));
  }
  report::emit_report(out, rep, format);
  ctx.output(out);
  ctx.manifest_path = out + ".manifest.json";
  print_summary({{"command", "eval"}, {"system", rep.system}, {"accuracy", rep.accuracy},
                 {"correct", rep.correct}, {"total", rep.total}});
}

void run_ablate(const json& cfg, RunContext& ctx) {
  const auto out = text(cfg, "output");
  const auto format = report::parse_format(text_or(cfg, "format", "json"));
  const auto order = discriminators(cfg, "subsets");
  const auto subsets = eval::cumulative_subsets(order);
  const auto split = data::parse_split(text_or(cfg, "split", "test"));
  auto rc = ranker_config(cfg);
  // One restart per seed: the seeds play the role of restarts.
  if (!cfg.contains("restarts")) rc.restarts = 1;
  const auto seeds = seeds_or(cfg, {1, 2, 3, 4, 5});
  ctx.manifest.seeds = seeds;

  const auto datasets = list_or_empty(cfg, "datasets");
  const auto retrievals = list_or_empty(cfg, "retrievals");
  const auto scores = list_or_empty(cfg, "scores");
  if (datasets.empty()) throw MissingOption("datasets");
  if (retrievals.size() != datasets.size() || scores.size() != datasets.size()) {
    throw Error("config", "datasets, retrievals and scores need one entry each per dataset");
  }
  std::vector<eval::ExperimentData> data;
  for (std::size_t i = 0; i < datasets.size(); ++i) {
    Inputs in;
    in.ds = data::load_dataset(datasets[i]);
    in.retrievals = pipeline::read_retrievals(retrievals[i]);
    in.store = disc::PrecomputedScoreStore::load(scores[i]);
    const double ms = missing_score(cfg);
    data.push_back({in.ds.name, in.instances(data::Split::kTrain, order, rc.n_max, ms),
                    in.instances(data::Split::kDev, order, rc.n_max, ms),
                    in.instances(split, order, rc.n_max, ms)});
  }
  const auto table = eval::ablation_run(subsets, data, rc, seeds, std::string(data::to_string(split)));
  report::emit_report(out, table, format);
  ctx.output(out);
  ctx.manifest_path = out + ".manifest.json";
  json acc = json::array();
  for (const auto& row : table.rows) {
    json cells = json::array();
    for (const auto& c : row.cells) cells.push_back(c.accuracy);
    acc.push_back({{"dataset", row.dataset}, {"accuracy", cells}});
  }
  print_summary({{"command", "ablate"}, {"rows", acc}});
}

void run_sweep(const json& cfg, RunContext& ctx) {
  const auto out = text(cfg, "output");
  const auto format = report::parse_format(text_or(cfg, "format", "json"));
  const auto rows = discriminators(cfg, "discriminators");
  auto rc = ranker_config(cfg);
  rc.k_disc = rows.size();
  if (!cfg.contains("restarts")) rc.restarts = 1;
  if (!cfg.contains("n_values")) throw MissingOption("n_values");
  const auto ns = cfg.at("n_values").get<std::vector<std::size_t>>();
  const auto seeds = seeds_or(cfg, {1, 2, 3, 4, 5});
  ctx.manifest.seeds = seeds;
  const auto in = load_inputs(cfg);
  std::size_t top = 0;
  for (auto n : ns) top = std::max(top, n);
  const double ms = missing_score(cfg);
  const auto train_set = in.instances(data::Split::kTrain, rows, top, ms);
  const auto dev_set = in.instances(data::Split::kDev, rows, top, ms);
  const auto result = eval::doc_count_sweep(ns, train_set, dev_set, rc, seeds);
  for (const auto& p : result.points) {
    if (p.short_lists) note("N=" + std::to_string(p.n) + ": some candidates had fewer documents");
  }
  report::emit_report(out, result, format);
  ctx.output(out);
  ctx.manifest_path = out + ".manifest.json";
  json points = json::array();
  for (const auto& p : result.points) points.push_back({{"n", p.n}, {"accuracy", p.accuracy}});
  print_summary({{"command", "sweep"}, {"points", points}});
}

void run_export(const json& cfg, RunContext& ctx) {
  const auto out = text(cfg, "output");
  const auto ck = ranker::load_checkpoint(text(cfg, "checkpoint"));
  const auto in = load_inputs(cfg);
  const auto split = data::parse_split(text_or(cfg, "split", "test"));
  const auto instances = in.instances(split, ck.discriminators, ck.config.n_max, missing_score(cfg));
  const auto rankings = ranker::export_rankings(ck.params, instances, count_or(cfg, "top_k", 10));
  io::write_file(out, ranker::rankings_to_jsonl(rankings));
  ctx.output(out);
  ctx.manifest_path = out + ".manifest.json";
  print_summary({{"command", "export-ranked"}, {"rankings", rankings.size()}});
}

void run_synth(const json& cfg, RunContext& ctx) {
  const auto dir = text(cfg, "output_dir");
  synth::WorkspaceOptions opts;
  opts.questions_per_split = count_or(cfg, "questions", opts.questions_per_split);
  opts.candidates = count_or(cfg, "candidates", opts.candidates);
  opts.docs_per_candidate = count_or(cfg, "docs", opts.docs_per_candidate);
  opts.seed = cfg.contains("seed") ? cfg.at("seed").get<std::uint64_t>() : opts.seed;
  ctx.manifest.seeds = {opts.seed};
  const auto files = synth::write_workspace(dir, opts);

  json pipeline_cfg{{"corpora", {files.corpus_a, files.corpus_b}},
                    {"quotas", {20, 20}},
                    {"dataset", files.dataset_dir},
                    {"discriminators", {"tfd", "drd", "avd"}},
                    {"bindings", {{"drd", "file:" + files.drd_scores}, {"avd", "file:" + files.avd_scores}}},
                    {"split", "test"},
                    {"top_k", 5}};
  const auto cfg_path = (fs::path(dir) / "pipeline.json").string();
  io::write_file(cfg_path, pipeline_cfg.dump(2) + "\n");
  for (const auto& p : {files.corpus_a, files.corpus_b, files.dataset_dir, files.drd_scores,
                        files.avd_scores, cfg_path}) {
    ctx.output(p);
  }
  ctx.manifest_path = (fs::path(dir) / "manifest.json").string();
  print_summary({{"command", "synth"}, {"config", cfg_path}});
}

void run_pipeline(const json& cfg, RunContext& ctx) {
  const fs::path dir = text(cfg, "output_dir");
  fs::create_directories(dir);
  const auto at = [&](const std::string& name) { return (dir / name).string(); };
  const auto format = report::parse_format(text_or(cfg, "format", "json"));
  const auto ids = discriminators(cfg, "discriminators");
  const auto binds = bindings(cfg, ids);
  auto rc = ranker_config(cfg);
  rc.k_disc = ids.size();
  const auto split = data::parse_split(text_or(cfg, "split", "test"));
  const auto scorer = scorer_config(cfg);

  const auto corpora = list_or_empty(cfg, "corpora");
  const auto q = quotas(cfg, corpora.size(), rc.n_max);
  const auto corpus_ids = list_or_empty(cfg, "corpus_ids");
  std::vector<std::string> index_paths;
  for (std::size_t i = 0; i < corpora.size(); ++i) {
    std::optional<std::string> id;
    if (i < corpus_ids.size()) id = corpus_ids[i];
    index_paths.push_back(at("index_" + std::to_string(i) + ".qaidx"));
    build_index(corpora[i], id, index_paths.back());
    ctx.output(index_paths.back());
  }

  Inputs in;
  in.ds = data::load_dataset(text(cfg, "dataset"));
  std::vector<text::InvertedIndex> indices;
  in.retrievals = retrieve(in.ds, index_paths, q, scorer, indices);
  io::write_file(at("retrievals.jsonl"), pipeline::retrievals_to_jsonl(in.retrievals));
  ctx.output(at("retrievals.jsonl"));

  in.store = score(in.ds, in.retrievals, indices, ids, binds, cfg);
  in.store.save(at("scores.tsv"));
  ctx.output(at("scores.tsv"));

  const double ms = missing_score(cfg);
  record_restart_seeds(ctx, rc);
  auto result = train_model(in, ids, rc, ms, at("train_log.jsonl"));
  ctx.output(at("train_log.jsonl"));
  const auto ck_path = at("checkpoint.qack");
  ranker::save_checkpoint({rc, ids, result.params}, ck_path);
  ctx.output(ck_path);

  const auto ck = ranker::load_checkpoint(ck_path);
  const auto name = dataset_name(cfg, in.ds);
  const auto rep = evaluate(ck, ck_path, in, split, ms, name);
  const std::string ext = format == report::Format::kMarkdown ? "md" : std::string(report::to_string(format));
  report::emit_report(at("report." + ext), rep, format);
  ctx.output(at("report." + ext));

  const auto baseline = eval::ir_baseline(in.ds.split(split), in.retrievals, name,
                                          std::string(data::to_string(split)));
  report::emit_report(at("ir_baseline." + ext), baseline, format);
  ctx.output(at("ir_baseline." + ext));

  const auto instances = in.instances(split, ids, rc.n_max, ms);
  const auto rankings = ranker::export_rankings(ck.params, instances, count_or(cfg, "top_k", 10));
  io::write_file(at("rankings.jsonl"), ranker::rankings_to_jsonl(rankings));
  ctx.output(at("rankings.jsonl"));

  ctx.manifest_path = at("manifest.json");
  print_summary({{"command", "pipeline"},
                 {"accuracy", rep.accuracy},
                 {"ir_baseline_accuracy", baseline.accuracy},
                 {"total", rep.total}});
}

void run_rerun(const json& cfg, RunContext&);

// ---- option tables -------------------------------------------------------

std::vector<OptionSpec> ranker_options() {
  return {
      {"k_disc", "k-disc", Kind::kCount, "score rows per candidate"},
      {"d", "proj-dim", Kind::kCount, "projection width"},
      {"m", "key-dim", Kind::kCount, "key width"},
      {"q", "value-dim", Kind::kCount, "value width"},
      {"h", "hidden", Kind::kCount, "decision head hidden width"},
      {"n_max", "n-max", Kind::kCount, "documents per candidate"},
      {"epochs", "epochs", Kind::kCount, "training epochs"},
      {"batch_size", "batch-size", Kind::kCount, "questions per Adam step"},
      {"restarts", "restarts", Kind::kCount, "independent initializations"},
      {"seed", "seed", Kind::kCount, "base seed"},
      {"learning_rate", "learning-rate", Kind::kNumber, "Adam step size"},
      {"beta1", "beta1", Kind::kNumber, "Adam first-moment decay"},
      {"beta2", "beta2", Kind::kNumber, "Adam second-moment decay"},
      {"epsilon", "epsilon", Kind::kNumber, "Adam epsilon"},
      {"threads", "threads", Kind::kCount, "gradient worker threads"},
  };
}

std::vector<OptionSpec> with(std::vector<OptionSpec> a, const std::vector<OptionSpec>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

const OptionSpec kDataset{"dataset", "dataset", Kind::kInput, "dataset directory or split file"};
const OptionSpec kRetrievals{"retrievals", "retrievals", Kind::kInput, "retrieval records (JSONL)"};
const OptionSpec kScores{"scores", "scores", Kind::kInput, "score file (TSV)"};
const OptionSpec kOutput{"output", "output,out", Kind::kOutput, "output path"};
const OptionSpec kFormat{"format", "format", Kind::kText, "json, csv or markdown"};
const OptionSpec kSplit{"split", "split", Kind::kText, "train, dev or test"};
const OptionSpec kMissing{"missing_score", "missing-score", Kind::kNumber, "value for absent scores"};
const OptionSpec kDiscs{"discriminators", "discriminators", Kind::kList, "score rows in order"};
const OptionSpec kBind{"bindings", "bind", Kind::kBindings, "id=native|file:<tsv>|remote:<url>"};
const OptionSpec kScorer{"scorer", "scorer", Kind::kText, "bm25 or classic-tfidf"};
const OptionSpec kIndices{"indices", "index", Kind::kInputList, "index files"};
const OptionSpec kQuotas{"quotas", "quota", Kind::kCountList, "documents per index"};
const OptionSpec kSeeds{"seeds", "seeds", Kind::kCountList, "training seeds"};
const OptionSpec kName{"dataset_name", "dataset-name", Kind::kText, "name used in reports"};

std::vector<CommandSpec> build_commands() {
  std::vector<CommandSpec> c;
  c.push_back({"convert-arc", "Convert ARC CSV/JSONL files to question JSONL",
               {{"input", "input,in", Kind::kInput, "ARC file, or a directory of split files"}, kOutput},
               {"input", "output"},
               run_convert});
  c.push_back({"index", "Build an inverted index from a corpus file",
               {{"corpus", "corpus", Kind::kInput, "corpus file"},
                {"corpus_id", "corpus-id", Kind::kText, "corpus id override"},
                kOutput},
               {"corpus", "output"},
               run_index});
  c.push_back({"retrieve", "Retrieve documents for every (question, candidate)",
               {kDataset, kIndices, kQuotas, kScorer,
                {"n_max", "n-max", Kind::kCount, "documents per candidate"}, kOutput},
               {"dataset", "indices", "output"},
               run_retrieve});
  c.push_back({"score", "Compute or collect discriminator scores for retrieved documents",
               {kDataset, kRetrievals, kIndices, kDiscs, kBind, kScorer,
                {"output", "output,out,scores-out", Kind::kOutput, "score file to write (TSV)"}},
               {"dataset", "retrievals", "discriminators", "output"},
               run_score});
  c.push_back({"train", "Train the attentive ranker",
               with({kDataset, kRetrievals, kScores, kDiscs, kMissing,
                     {"log", "log", Kind::kOutput, "per-epoch log (JSONL)"}, kOutput},
                    ranker_options()),
               {"dataset", "retrievals", "scores", "discriminators", "output"},
               run_train});
  c.push_back({"eval", "Evaluate a checkpoint, or the IR baseline, on one split",
               {{"checkpoint", "checkpoint", Kind::kInput, "trained checkpoint"},
                kDataset, kRetrievals, kScores, kSplit, kFormat, kMissing, kName,
                {"ir_baseline", "ir-baseline", Kind::kFlag, "score the lexical baseline instead"},
                kOutput},
               {"dataset", "retrievals", "output"},
               run_eval});
  c.push_back({"ablate", "Cumulative discriminator ablation",
               with({{"datasets", "dataset", Kind::kInputList, "dataset per table row"},
                     {"retrievals", "retrievals", Kind::kInputList, "retrievals per dataset"},
                     {"scores", "scores", Kind::kInputList, "scores per dataset"},
                     {"subsets", "subsets", Kind::kList, "discriminator order"},
                     kSeeds, kSplit, kFormat, kMissing, kOutput},
                    ranker_options()),
               {"datasets", "retrievals", "scores", "subsets", "output"},
               run_ablate});
  c.push_back({"sweep", "Dev accuracy against documents per candidate",
               with({kDataset, kRetrievals, kScores, kDiscs,
                     {"n_values", "n", Kind::kCountList, "document counts"},
                     kSeeds, kFormat, kMissing, kOutput},
                    ranker_options()),
               {"dataset", "retrievals", "scores", "discriminators", "n_values", "output"},
               run_sweep});
  c.push_back({"export-ranked", "Write documents ranked by attention weight",
               {{"checkpoint", "checkpoint", Kind::kInput, "trained checkpoint"},
                kDataset, kRetrievals, kScores, kSplit, kMissing,
                {"top_k", "top-k", Kind::kCount, "documents kept per candidate"}, kOutput},
               {"checkpoint", "dataset", "retrievals", "scores", "output"},
               run_export});
  c.push_back({"synth", "Write a synthetic corpus, dataset and score files",
               {{"output_dir", "output-dir", Kind::kOutput, "workspace directory"},
                {"questions", "questions", Kind::kCount, "questions per split"},
                {"candidates", "candidates", Kind::kCount, "candidates per question"},
                {"docs", "docs", Kind::kCount, "documents per candidate"},
                {"seed", "seed", Kind::kCount, "generator seed"}},
               {"output_dir"},
               run_synth});
  c.push_back({"pipeline", "Index, retrieve, score, train, evaluate and export in one run",
               with({{"corpora", "corpus", Kind::kInputList, "corpus files, one index each"},
                     {"corpus_ids", "corpus-id", Kind::kList, "corpus id overrides"},
                     kQuotas, kDataset, kDiscs, kBind, kScorer, kSplit, kFormat, kMissing, kName,
                     {"top_k", "top-k", Kind::kCount, "documents kept per candidate"},
                     {"output_dir", "output-dir", Kind::kOutput, "output directory"}},
                    ranker_options()),
               {"corpora", "dataset", "discriminators", "output_dir"},
               run_pipeline});
  c.push_back({"rerun", "Repeat a run from its manifest",
               {{"manifest", "manifest", Kind::kInput, "manifest written by an earlier run"},
                {"output", "output", Kind::kOutput, "replace the recorded output path"},
                {"output_dir", "output-dir", Kind::kOutput, "replace the recorded output directory"},
                {"skip_digest_check", "skip-digest-check", Kind::kFlag,
                 "run even if inputs changed"}},
               {"manifest"},
               run_rerun});
  return c;
}

bool is_path(Kind k) { return k == Kind::kInput || k == Kind::kOutput || k == Kind::kInputList; }

void collect_inputs(const CommandSpec& spec, const json& cfg, Manifest& m) {
  auto add = [&m](const std::string& p) {
    if (fs::exists(p)) m.inputs[p] = path_sha256(p);
  };
  for (const auto& o : spec.options) {
    if (!cfg.contains(o.key)) continue;
    if (o.kind == Kind::kInput) add(cfg.at(o.key).get<std::string>());
    if (o.kind == Kind::kInputList) {
      for (const auto& p : cfg.at(o.key)) add(p.get<std::string>());
    }
    if (o.kind == Kind::kBindings) {
      for (const auto& [_, v] : cfg.at(o.key).items()) {
        const auto b = pipeline::ScoreBinding::parse(v.get<std::string>());
        if (b.kind == pipeline::ScoreBinding::Kind::kFile) add(b.target);
      }
    }
  }
}

std::string absolute(const std::string& p) { return fs::absolute(p).lexically_normal().string(); }

void run_rerun(const json& cfg, RunContext& ctx) {
  const auto m = load_manifest(text(cfg, "manifest"));
  const auto& spec = find_command(m.command);
  if (spec.name == "rerun") throw Error("config", "a rerun manifest cannot be rerun");
  if (!cfg.value("skip_digest_check", false)) {
    for (const auto& [path, digest] : m.inputs) {
      if (!fs::exists(path) || path_sha256(path) != digest) {
        throw Error("validation", "input changed since the manifest was written: " + path);
      }
    }
  }
  json run_cfg = m.config;
  if (cfg.contains("output")) run_cfg["output"] = cfg.at("output");
  if (cfg.contains("output_dir")) run_cfg["output_dir"] = cfg.at("output_dir");
  execute(spec, resolve(spec, run_cfg));
  ctx.manifest_path.clear();
}

}  // namespace

const std::vector<CommandSpec>& commands() {
  static const std::vector<CommandSpec> c = build_commands();
  return c;
}

const CommandSpec& find_command(const std::string& name) {
  for (const auto& c : commands()) {
    if (c.name == name) return c;
  }
  throw Error("config", "unknown command '" + name + "'");
}

json resolve(const CommandSpec& spec, json cfg) {
  for (const auto& o : spec.options) {
    if (!cfg.contains(o.key)) continue;
    auto& v = cfg[o.key];
    if (is_path(o.kind)) {
      if (v.is_array()) {
        for (auto& p : v) p = absolute(p.get<std::string>());
      } else {
        v = absolute(v.get<std::string>());
      }
    }
    if (o.kind == Kind::kBindings) {
      for (auto& [k, b] : v.items()) {
        auto parsed = pipeline::ScoreBinding::parse(b.get<std::string>());
        if (parsed.kind == pipeline::ScoreBinding::Kind::kFile) {
          parsed.target = absolute(parsed.target);
          b = parsed.str();
        }
      }
    }
  }
  for (const auto& key : spec.required) {
    if (!cfg.contains(key)) throw MissingOption(key);
  }
  return cfg;
}

void execute(const CommandSpec& spec, const json& cfg) {
  RunContext ctx;
  ctx.manifest.command = spec.name;
  ctx.manifest.config = cfg;
  collect_inputs(spec, cfg, ctx.manifest);
  try {
    spec.run(cfg, ctx);
  } catch (const json::exception& e) {
    throw Error("config", e.what());
  }
  if (!ctx.manifest_path.empty()) save_manifest(ctx.manifest, ctx.manifest_path);
}

}  // namespace qa::cli
