#include "goalcraft/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "goalcraft/error.hpp"

namespace goalcraft {

static_assert(std::endian::native == std::endian::little,
              "checkpoint encoding assumes a little-endian host");

namespace {

constexpr const char* kActorTag = "actor/";
constexpr const char* kCriticTag = "critic/";

void put_u32(std::string& out, std::uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

void put_u64(std::string& out, std::uint64_t v) {
  char buf[8];
  std::memcpy(buf, &v, 8);
  out.append(buf, 8);
}

void put_tensor(std::string& out, const std::string& name, const Tensor& t) {
  put_u64(out, name.size());
  out += name;
  put_u64(out, t.rank());
  for (std::size_t d : t.shape()) put_u64(out, d);
  out.append(reinterpret_cast<const char*>(t.data()), t.size() * sizeof(double));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view take(std::size_t n, const std::string& what) {
    if (bytes_.size() - pos_ < n) {
      throw IoError("checkpoint truncated while reading " + what);
    }
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  std::uint32_t u32(const std::string& what) {
    std::uint32_t v;
    std::memcpy(&v, take(4, what).data(), 4);
    return v;
  }

  std::uint64_t u64(const std::string& what) {
    std::uint64_t v;
    std::memcpy(&v, take(8, what).data(), 8);
    return v;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_checkpoint(const AgentParams& params, const CheckpointMeta& meta) {
  nlohmann::json j;
  j["config_hash"] = meta.config_hash;
  j["epoch"] = meta.epoch;
  j["variant"] = meta.variant;
  j["seed"] = meta.seed;
  j["extra"] = meta.extra;
  const std::string meta_text = j.dump();

  std::string out(kCheckpointMagic, 4);
  put_u32(out, kCheckpointVersion);
  put_u64(out, meta_text.size());
  out += meta_text;
  put_u64(out, params.actor.size() + params.critic.size());
  for (const auto& [name, t] : params.actor) put_tensor(out, kActorTag + name, t);
  for (const auto& [name, t] : params.critic) put_tensor(out, kCriticTag + name, t);
  return out;
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  Reader in(bytes);
  if (in.take(4, "magic") != std::string_view(kCheckpointMagic, 4)) {
    throw IoError("not a checkpoint: bad magic bytes");
  }
  const auto version = in.u32("version");
  if (version != kCheckpointVersion) {
    throw IoError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto meta_len = in.u64("metadata length");
  const auto meta_text = in.take(meta_len, "metadata");

  Checkpoint ck;
  try {
    const auto j = nlohmann::json::parse(meta_text);
    ck.meta.config_hash = j.at("config_hash").get<std::string>();
    ck.meta.epoch = j.at("epoch").get<int>();
    ck.meta.variant = j.at("variant").get<std::string>();
    ck.meta.seed = j.at("seed").get<std::uint64_t>();
    ck.meta.extra = j.at("extra").get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("checkpoint metadata is malformed: ") + e.what());
  }

  const auto count = in.u64("tensor count");
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::string idx = "tensor #" + std::to_string(i);
    const auto name_len = in.u64(idx + " name length");
    const std::string name(in.take(name_len, idx + " name"));
    const auto rank = in.u64("tensor '" + name + "' rank");
    if (rank > 8) throw IoError("tensor '" + name + "' has implausible rank " + std::to_string(rank));
    std::vector<std::size_t> shape(rank);
    std::size_t n = 1;
    for (auto& d : shape) {
      d = in.u64("tensor '" + name + "' dims");
      if (d != 0 && n > bytes.size() / d) {
        throw IoError("checkpoint truncated while reading tensor '" + name + "' payload");
      }
      n *= d;
    }
    const auto payload = in.take(n * sizeof(double), "tensor '" + name + "' payload");
    std::vector<double> values(n);
    std::memcpy(values.data(), payload.data(), payload.size());
    Tensor t(std::move(shape), std::move(values));
    ParamStore* store = nullptr;
    std::string local;
    if (name.starts_with(kActorTag)) {
      store = &ck.params.actor;
      local = name.substr(std::strlen(kActorTag));
    } else if (name.starts_with(kCriticTag)) {
      store = &ck.params.critic;
      local = name.substr(std::strlen(kCriticTag));
    } else {
      throw IoError("checkpoint tensor '" + name + "' has no actor/ or critic/ prefix");
    }
    if (!store->emplace(local, std::move(t)).second) {
      throw IoError("checkpoint tensor '" + name + "' appears twice");
    }
  }
  if (!in.done()) throw IoError("checkpoint has trailing bytes after the last tensor");
  return ck;
}

void save_checkpoint(const std::string& path, const AgentParams& params,
                     const CheckpointMeta& meta) {
  const std::string bytes = encode_checkpoint(params, meta);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return decode_checkpoint(ss.str());
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

void check_checkpoint_layout(const AgentParams& params, const CriticSpec& critic,
                             std::size_t actor_width) {
  TrainConfig cfg;
  cfg.actor_width = actor_width;
  const AgentParams expected = init_agent(critic, cfg);
  require_same_layout(params.actor, expected.actor, "checkpoint actor vs config");
  require_same_layout(params.critic, expected.critic, "checkpoint critic vs config");
}

}  // namespace goalcraft
