#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "qa/discriminator.hpp"
#include "qa/ranker.hpp"

namespace qa::ranker {

nlohmann::json config_to_json(const RankerConfig& config);
/// Reads the RankerConfig fields present in j on top of base. Unknown keys are
/// ignored so experiment configs can carry other sections.
RankerConfig config_from_json(const nlohmann::json& j, RankerConfig base = {});

/// Trained parameters plus everything needed to use them safely.
struct Checkpoint {
  RankerConfig config;
  /// Score-matrix row order the parameters were trained with.
  std::vector<disc::DiscriminatorId> discriminators;
  RankerParams params;
};

/// Layout: 8-byte magic, u32 header length, JSON header (version, config,
/// discriminator order, seed, tensor shapes), u64 value count, then every
/// parameter as little-endian float64 in RankerParams field order.
void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

/// Throws unless the score rows match the checkpoint's discriminator order.
void check_compatible(const Checkpoint& checkpoint, std::span<const disc::DiscriminatorId> rows);

}  // namespace qa::ranker
