#include "qa/remote_scorer.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>

#include "httplib.h"
#include "json.hpp"
#include "qa/binary_io.hpp"
#include "qa/error.hpp"
#include "qa/numfmt.hpp"

namespace qa::disc {

using nlohmann::json;

void RemoteScorerConfig::validate() const {
  if (base_url.empty()) throw Error("config", "remote scorer needs a base_url");
  if (timeout_ms <= 0) throw Error("config", "remote scorer timeout must be positive");
  if (max_batch == 0) throw Error("config", "remote scorer max_batch must be at least 1");
  if (max_in_flight == 0) throw Error("config", "remote scorer max_in_flight must be at least 1");
  if (retry_count < 0) throw Error("config", "remote scorer retry_count must be non-negative");
}

RemoteScorer::RemoteScorer(RemoteScorerConfig config) : config_(std::move(config)) {
  config_.validate();
  // Split "http://host:port/prefix" into the client address and a path prefix.
  const auto scheme = config_.base_url.find("://");
  const auto path_start =
      config_.base_url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  host_ = config_.base_url.substr(0, path_start);
  if (path_start != std::string::npos) path_prefix_ = config_.base_url.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();

  if (config_.cache_path && std::filesystem::exists(*config_.cache_path)) {
    std::ifstream in(*config_.cache_path);
    std::string line;
    while (std::getline(in, line)) {
      const auto tab = line.find('\t');
      if (tab == std::string::npos) continue;
      cache_[line.substr(0, tab)] = parse_double(std::string_view(line).substr(tab + 1));
    }
  }
}

std::string RemoteScorer::cache_key(const DiscriminatorId& id, const RemoteItem& item) {
  // FNV-1a over length-prefixed fields.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::string_view s) {
    const auto n = static_cast<std::uint64_t>(s.size());
    for (int i = 0; i < 8; ++i) {
      h ^= (n >> (8 * i)) & 0xFF;
      h *= 0x100000001b3ULL;
    }
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  mix(id.str());
  mix(item.question);
  mix(item.answer ? "1" : "0");
  mix(item.answer.value_or(""));
  mix(item.document);
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<double> RemoteScorer::send_batch(const DiscriminatorId& id,
                                             std::span<const RemoteItem> items,
                                             std::size_t first) {
  json body;
  body["discriminator"] = id.str();
  body["items"] = json::array();
  for (const auto& item : items) {
    json j{{"question", item.question}, {"document", item.document}};
    if (item.answer) j["answer"] = *item.answer;
    body["items"].push_back(std::move(j));
  }
  const std::string payload = body.dump();
  const std::string range =
      "[" + std::to_string(first) + ", " + std::to_string(first + items.size()) + ")";

  httplib::Client client(host_);
  const auto secs = config_.timeout_ms / 1000;
  const auto usecs = (config_.timeout_ms % 1000) * 1000;
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);

  std::string last_error;
  for (int attempt = 0; attempt <= config_.retry_count; ++attempt) {
    ++requests_;
    auto res = client.Post(path_prefix_ + "/v1/score", payload, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw Error("protocol", "batch " + range + ": HTTP " + std::to_string(res->status) + ": " + res->body);
    }
    std::vector<double> scores;
    try {
      auto j = json::parse(res->body);
      scores = j.at("scores").get<std::vector<double>>();
    } catch (const json::exception& e) {
      throw Error("protocol", "batch " + range + ": malformed response: " + e.what());
    }
    if (scores.size() != items.size()) {
      throw Error("protocol", "batch " + range + ": " + std::to_string(scores.size()) +
                                  " scores for " + std::to_string(items.size()) + " items");
    }
    for (double s : scores) {
      if (!(s >= 0.0 && s <= 1.0)) {
        throw Error("protocol", "batch " + range + ": score " + format_double(s) + " outside [0,1]");
      }
    }
    return scores;
  }
  throw Error("network", "batch " + range + " failed after " +
                             std::to_string(config_.retry_count + 1) + " attempts: " + last_error);
}

std::vector<double> RemoteScorer::score(const DiscriminatorId& id,
                                        std::span<const RemoteItem> items) {
  std::vector<RemoteItem> normalized(items.begin(), items.end());
  for (auto& item : normalized) {
    if (id == kDrd) item.answer.reset();
    if (id == kAvd && !item.answer) throw Error("validation", "avd requests need an answer");
  }

  std::vector<double> out(normalized.size(), 0.0);
  std::vector<std::string> keys;
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < normalized.size(); ++i) {
    keys.push_back(cache_key(id, normalized[i]));
    if (auto it = cache_.find(keys.back()); it != cache_.end()) {
      out[i] = it->second;
    } else {
      pending.push_back(i);
    }
  }

  // Batches cover consecutive pending items; at most max_in_flight run at once
  // and results are written back by position, so ordering never depends on timing.
  std::vector<std::pair<std::size_t, std::size_t>> batches;
  for (std::size_t b = 0; b < pending.size(); b += config_.max_batch) {
    batches.emplace_back(b, std::min(pending.size(), b + config_.max_batch));
  }
  for (std::size_t w = 0; w < batches.size(); w += config_.max_in_flight) {
    std::vector<std::future<std::vector<double>>> wave;
    const std::size_t wave_end = std::min(batches.size(), w + config_.max_in_flight);
    for (std::size_t k = w; k < wave_end; ++k) {
      auto [lo, hi] = batches[k];
      auto batch_items = std::make_shared<std::vector<RemoteItem>>();
      for (std::size_t p = lo; p < hi; ++p) batch_items->push_back(normalized[pending[p]]);
      const std::size_t first = pending[lo];
      auto task = [this, id, batch_items, first] { return send_batch(id, *batch_items, first); };
      wave.push_back(config_.max_in_flight == 1 ? std::async(std::launch::deferred, task)
                                                : std::async(std::launch::async, task));
    }
    for (std::size_t k = w; k < wave_end; ++k) {
      auto scores = wave[k - w].get();
      auto [lo, hi] = batches[k];
      for (std::size_t p = lo; p < hi; ++p) {
        out[pending[p]] = scores[p - lo];
        cache_[keys[pending[p]]] = scores[p - lo];
      }
    }
  }
  if (!pending.empty()) save_cache();
  return out;
}

bool RemoteScorer::healthy() {
  httplib::Client client(host_);
  client.set_connection_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);
  auto res = client.Get(path_prefix_ + "/v1/health");
  if (!res || res->status != 200) return false;
  try {
    return json::parse(res->body).at("status") == "ok";
  } catch (const json::exception&) {
    return false;
  }
}

void RemoteScorer::save_cache() const {
  if (!config_.cache_path) return;
  std::vector<std::pair<std::string, double>> rows(cache_.begin(), cache_.end());
  std::sort(rows.begin(), rows.end());
  std::string out;
  for (const auto& [k, v] : rows) out += k + "\t" + format_double(v) + "\n";
  io::write_file(*config_.cache_path, out);
}

}  // namespace qa::disc
