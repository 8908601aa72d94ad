#include "qa/checkpoint.hpp"

#include "qa/binary_io.hpp"
#include "qa/error.hpp"

namespace qa::ranker {

using nlohmann::json;

namespace {

constexpr std::string_view kMagic{"QACKPT\0\0", 8};
constexpr int kVersion = 1;

}  // namespace

json config_to_json(const RankerConfig& c) {
  return json{{"k_disc", c.k_disc},       {"d", c.d},
              {"m", c.m},                 {"q", c.q},
              {"h", c.h},                 {"n_max", c.n_max},
              {"epochs", c.epochs},       {"batch_size", c.batch_size},
              {"restarts", c.restarts},   {"seed", c.seed},
              {"learning_rate", c.learning_rate}, {"beta1", c.beta1},
              {"beta2", c.beta2},         {"epsilon", c.epsilon},
              {"threads", c.threads}};
}

RankerConfig config_from_json(const json& j, RankerConfig c) {
  auto read = [&j](const char* key, auto& field) {
    if (!j.contains(key)) return;
    try {
      j.at(key).get_to(field);
    } catch (const json::exception& e) {
      throw Error("config", std::string("bad value for '") + key + "': " + e.what());
    }
  };
  read("k_disc", c.k_disc);
  read("d", c.d);
  read("m", c.m);
  read("q", c.q);
  read("h", c.h);
  read("n_max", c.n_max);
  read("epochs", c.epochs);
  read("batch_size", c.batch_size);
  read("restarts", c.restarts);
  read("seed", c.seed);
  read("learning_rate", c.learning_rate);
  read("beta1", c.beta1);
  read("beta2", c.beta2);
  read("epsilon", c.epsilon);
  read("threads", c.threads);
  return c;
}

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  ck.params.check_shapes(ck.config);
  if (ck.discriminators.size() != ck.config.k_disc) {
    throw Error("config", "checkpoint lists " + std::to_string(ck.discriminators.size()) +
                              " discriminators for k_disc " + std::to_string(ck.config.k_disc));
  }
  json header;
  header["format"] = "attentive-ranker";
  header["version"] = kVersion;
  header["config"] = config_to_json(ck.config);
  header["seed"] = ck.config.seed;
  header["discriminators"] = json::array();
  for (const auto& d : ck.discriminators) header["discriminators"].push_back(d.str());
  std::size_t count = 0;
  header["tensors"] = json::array();
  for (const ParamTensor* t : ck.params.all()) {
    header["tensors"].push_back({{"name", t->name}, {"rows", t->value.rows()}, {"cols", t->value.cols()}});
    count += t->value.size();
  }
  const std::string text = header.dump();

  io::ByteWriter w;
  w.bytes(kMagic);
  w.u32(static_cast<std::uint32_t>(text.size()));
  w.bytes(text);
  w.u64(count);
  for (const ParamTensor* t : ck.params.all()) {
    for (double v : t->value.values()) w.f64(v);
  }
  io::write_file(path, w.buffer());
}

Checkpoint load_checkpoint(const std::string& path) {
  const std::string data = io::read_file(path);
  io::ByteReader r(data);
  if (data.size() < kMagic.size() || r.bytes(kMagic.size()) != kMagic) {
    throw Error("version", path + " is not a checkpoint (bad magic)");
  }
  const auto header_len = r.u32();
  json header;
  try {
    header = json::parse(r.bytes(header_len));
  } catch (const json::exception& e) {
    throw Error("format", path + ": bad checkpoint header: " + e.what());
  }
  if (header.value("version", -1) != kVersion) {
    throw Error("version", path + ": unsupported checkpoint version");
  }
  Checkpoint ck;
  ck.config = config_from_json(header.at("config"));
  ck.config.validate();
  for (const auto& d : header.at("discriminators")) ck.discriminators.emplace_back(d.get<std::string>());
  if (ck.discriminators.size() != ck.config.k_disc) {
    throw Error("format", path + ": discriminator list does not match k_disc");
  }
  ck.params = RankerParams::zeros(ck.config);
  std::size_t expected = 0;
  for (const ParamTensor* t : ck.params.all()) expected += t->value.size();
  const auto count = r.u64();
  if (count != expected || r.remaining() != count * 8) {
    throw Error("format", path + ": truncated or oversized parameter payload");
  }
  for (ParamTensor* t : ck.params.all()) {
    for (double& v : t->value.values()) v = r.f64();
    t->value.require_finite("checkpoint parameters");
  }
  return ck;
}

void check_compatible(const Checkpoint& ck, std::span<const disc::DiscriminatorId> rows) {
  if (rows.size() != ck.discriminators.size() ||
      !std::equal(rows.begin(), rows.end(), ck.discriminators.begin())) {
    throw Error("config", "score rows [" + disc::join(rows) + "] do not match checkpoint rows [" +
                              disc::join(ck.discriminators) + "]");
  }
}

}  // namespace qa::ranker
