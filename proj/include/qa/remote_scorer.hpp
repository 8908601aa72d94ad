#pragma once

#include <atomic>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "qa/discriminator.hpp"

namespace qa::disc {

struct RemoteScorerConfig {
  std::string base_url;
  int timeout_ms = 30000;
  std::size_t max_batch = 64;
  int retry_count = 2;
  std::optional<std::string> cache_path;
  /// Upper bound on batches in flight at once.
  std::size_t max_in_flight = 1;

  void validate() const;
};

struct RemoteItem {
  std::string question;
  std::optional<std::string> answer;
  std::string document;
};

/// Client for the scoring service protocol:
///   POST {base_url}/v1/score  {"discriminator": id, "items": [{question, answer?, document}]}
///                             -> {"scores": [float]}
///   GET  {base_url}/v1/health -> {"status": "ok"}
///
/// drd requests never carry the answer, avd requests always do. Results are
/// cached by content hash (in memory, and on disk when cache_path is set), so
/// a repeated item costs no request.
class RemoteScorer {
 public:
  explicit RemoteScorer(RemoteScorerConfig config);

  /// Scores aligned with items. Network failures after all retries throw
  /// qa::Error("network") naming the failed batch range; malformed or
  /// out-of-range responses throw qa::Error("protocol").
  std::vector<double> score(const DiscriminatorId& id, std::span<const RemoteItem> items);

  bool healthy();

  /// POST requests issued so far (retries included).
  std::size_t requests_sent() const noexcept { return requests_.load(); }

  /// Writes the cache file, if configured. score() calls this itself.
  void save_cache() const;

  static std::string cache_key(const DiscriminatorId& id, const RemoteItem& item);

 private:
  std::vector<double> send_batch(const DiscriminatorId& id, std::span<const RemoteItem> items,
                                 std::size_t first);

  RemoteScorerConfig config_;
  std::string host_;
  std::string path_prefix_;
  std::unordered_map<std::string, double> cache_;
  std::atomic<std::size_t> requests_{0};
};

}  // namespace qa::disc
