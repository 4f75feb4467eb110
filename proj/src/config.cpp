#include "goalcraft/config.hpp"

#include <openssl/evp.h>

#include <cctype>
#include <cmath>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "goalcraft/error.hpp"

namespace goalcraft {

namespace {

[[noreturn]] void fail_at(int line, const std::string& msg) {
  throw ConfigError("line " + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

bool is_identifier(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  }
  return true;
}

class ValueParser {
 public:
  ValueParser(const std::string& text, int line) : text_(text), line_(line) {}

  ConfigValue parse_all() {
    ConfigValue v = parse_value();
    skip_ws();
    if (pos_ != text_.size()) fail_at(line_, "unexpected trailing text '" + text_.substr(pos_) + "'");
    return v;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }

  ConfigValue parse_value() {
    skip_ws();
    if (pos_ >= text_.size()) fail_at(line_, "missing value");
    const char c = text_[pos_];
    ConfigValue v;
    v.line = line_;
    if (c == '"') {
      v.data = parse_string();
    } else if (c == '[') {
      v.data = parse_list();
    } else if (text_.compare(pos_, 4, "true") == 0) {
      pos_ += 4;
      v.data = true;
    } else if (text_.compare(pos_, 5, "false") == 0) {
      pos_ += 5;
      v.data = false;
    } else {
      parse_number(v);
    }
    return v;
  }

  std::string parse_string() {
    ++pos_;
    std::string out;
    while (pos_ < text_.size() && text_[pos_] != '"') {
      if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) ++pos_;
      out += text_[pos_++];
    }
    if (pos_ >= text_.size()) fail_at(line_, "unterminated string");
    ++pos_;
    return out;
  }

  ConfigValue::List parse_list() {
    ++pos_;
    ConfigValue::List items;
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == ']') {
      ++pos_;
      return items;
    }
    while (true) {
      items.push_back(parse_value());
      skip_ws();
      if (pos_ >= text_.size()) fail_at(line_, "unterminated list");
      if (text_[pos_] == ',') {
        ++pos_;
        continue;
      }
      if (text_[pos_] == ']') {
        ++pos_;
        return items;
      }
      fail_at(line_, "expected ',' or ']' in list");
    }
  }

  void parse_number(ConfigValue& v) {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                   text_[pos_] == '.' || text_[pos_] == '-' || text_[pos_] == '+')) {
      ++pos_;
    }
    const std::string tok = text_.substr(start, pos_ - start);
    if (tok.empty()) fail_at(line_, "cannot parse value at '" + text_.substr(start) + "'");
    const bool is_float = tok.find_first_of(".eE") != std::string::npos || tok == "inf" ||
                          tok == "nan";
    const char* b = tok.data();
    const char* e = tok.data() + tok.size();
    if (!is_float) {
      std::int64_t iv = 0;
      auto [p, ec] = std::from_chars(b, e, iv);
      if (ec == std::errc() && p == e) {
        v.data = iv;
        return;
      }
    } else {
      double dv = 0.0;
      auto [p, ec] = std::from_chars(b, e, dv);
      if (ec == std::errc() && p == e && std::isfinite(dv)) {
        v.data = dv;
        return;
      }
    }
    fail_at(line_, "cannot parse value '" + tok + "' (strings must be quoted)");
  }

  const std::string& text_;
  int line_;
  std::size_t pos_ = 0;
};

std::string where(const std::string& key, const ConfigValue& v) {
  return "line " + std::to_string(v.line) + ": key '" + key + "'";
}

[[noreturn]] void bad_type(const std::string& key, const ConfigValue& v, const char* expected) {
  throw ConfigError(where(key, v) + " expects " + expected + ", got " + v.type_name());
}

std::int64_t as_int(const std::string& key, const ConfigValue& v) {
  if (auto p = std::get_if<std::int64_t>(&v.data)) return *p;
  bad_type(key, v, "an integer");
}

double as_double(const std::string& key, const ConfigValue& v) {
  if (auto p = std::get_if<double>(&v.data)) return *p;
  if (auto p = std::get_if<std::int64_t>(&v.data)) return static_cast<double>(*p);
  bad_type(key, v, "a number");
}

std::string as_string(const std::string& key, const ConfigValue& v) {
  if (auto p = std::get_if<std::string>(&v.data)) return *p;
  bad_type(key, v, "a quoted string");
}

bool as_bool(const std::string& key, const ConfigValue& v) {
  if (auto p = std::get_if<bool>(&v.data)) return *p;
  bad_type(key, v, "true or false");
}

const ConfigValue::List& as_list(const std::string& key, const ConfigValue& v) {
  if (auto p = std::get_if<ConfigValue::List>(&v.data)) return *p;
  bad_type(key, v, "a list");
}

std::size_t as_positive(const std::string& key, const ConfigValue& v) {
  const auto i = as_int(key, v);
  if (i < 1) throw ConfigError(where(key, v) + " must be >= 1");
  return static_cast<std::size_t>(i);
}

int as_count(const std::string& key, const ConfigValue& v) {
  const auto i = as_int(key, v);
  if (i < 0 || i > 100000000) throw ConfigError(where(key, v) + " must be a count >= 0");
  return static_cast<int>(i);
}

template <typename Parse>
auto parse_enum(const std::string& key, const ConfigValue& v, Parse parse) {
  try {
    return parse(as_string(key, v));
  } catch (const ConfigError& e) {
    throw ConfigError(where(key, v) + ": " + e.what());
  }
}

using Setter = std::function<void(RunConfig&, const std::string&, const ConfigValue&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      // env.kind is applied before everything else (it selects a preset).
      {"env.kind", [](RunConfig&, const std::string&, const ConfigValue&) {}},
      {"env.reward", [](RunConfig& c, const std::string& k, const ConfigValue& v) {
         c.env.reward = parse_enum(k, v, parse_reward_kind);
       }},
      {"env.drag", [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.env.drag = as_double(k, v); }},
      {"env.dt", [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.env.dt = as_double(k, v); }},
      {"env.v_max", [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.env.v_max = as_double(k, v); }},
      {"env.a_max", [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.env.a_max = as_double(k, v); }},
      {"env.success_radius", [](RunConfig& c, const std::string& k, const ConfigValue& v) {
         c.env.success_radius = as_double(k, v);
       }},
      {"env.horizon", [](RunConfig& c, const std::string& k, const ConfigValue& v) {
         c.env.horizon = static_cast<int>(as_positive(k, v));
       }},
      {"env.obstacles", [](RunConfig& c, const std::string& k, const ConfigValue& v) {
         c.env.obstacles.clear();
         for (const auto& item : as_list(k, v)) {
           const auto& xs = as_list(k, item);
           if (xs.size() != 4) throw ConfigError(where(k, v) + ": each obstacle is [x0, y0, x1, y1]");
           c.env.obstacles.push_back(Rect{as_double(k, xs[0]), as_double(k, xs[1]),
                                          as_double(k, xs[2]), as_double(k, xs[3])});
         }
       }},
      {"critic.variant", [](RunConfig& c, const std::string& k, const ConfigValue& v) {
         c.critic.variant = parse_enum(k, v, parse_critic_variant);
       }},
      {"critic.latent_dim", [](RunConfig& c, const std::string& k, const ConfigValue& v) {
         c.critic.latent_dim = as_positive(k, v);
         c.latent_dim_explicit = true;
       }},
      {"critic.monolithic_width", [](RunConfig& c, const std::string& k, const ConfigValue& v) {
         c.critic.monolithic_width = as_positive(k, v);
       }},
      {"critic.branch_width", [](RunConfig& c, const std::string& k, const ConfigValue& v) {
         c.critic.branch_width = as_positive(k, v);
         c.branch_width_explicit = true;
       }},
      {"train.gamma", [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.train.gamma = as_double(k, v); }},
      {"train.polyak", [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.train.polyak = as_double(k, v); }},
      {"train.actor_lr", [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.train.actor_lr = as_double(k, v); }},
      {"train.critic_lr", [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.train.critic_lr = as_double(k, v); }},
      {"train.batch_size", [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.train.batch_size = as_positive(k, v); }},
      {"train.noise_sigma", [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.train.noise_sigma = as_double(k, v); }},
      {"train.random_action_prob", [](RunConfig& c, const std::string& k, const ConfigValue& v) {
         c.train.random_action_prob = as_double(k, v);
       }},
      {"train.warmup_rollouts", [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.train.warmup_rollouts = as_count(k, v); }},
      {"train.epochs", [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.train.epochs = as_count(k, v); }},
      {"train.cycles_per_epoch", [](RunConfig& c, const std::string& k, const ConfigValue& v) {
         c.train.cycles_per_epoch = static_cast<int>(as_positive(k, v));
       }},
      {"train.rollouts_per_cycle", [](RunConfig& c, const std::string& k, const ConfigValue& v) {
         c.train.rollouts_per_cycle = static_cast<int>(as_positive(k, v));
       }},
      {"train.batches_per_cycle", [](RunConfig& c, const std::string& k, const ConfigValue& v) {
         c.train.batches_per_cycle = static_cast<int>(as_positive(k, v));
       }},
      {"train.q_target_clip", [](RunConfig& c, const std::string& k, const ConfigValue& v) {
         if (std::holds_alternative<bool>(v.data)) {
           c.train.q_target_clip = as_bool(k, v) ? ClipMode::on : ClipMode::off;
           return;
         }
         const std::string s = as_string(k, v);
         if (s == "auto") c.train.q_target_clip = ClipMode::automatic;
         else if (s == "on") c.train.q_target_clip = ClipMode::on;
         else if (s == "off") c.train.q_target_clip = ClipMode::off;
         else throw ConfigError(where(k, v) + " expects \"auto\", \"on\" or \"off\"");
       }},
      {"train.action_l2", [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.train.action_l2 = as_double(k, v); }},
      {"train.actor_width", [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.train.actor_width = as_positive(k, v); }},
      {"train.num_workers", [](RunConfig& c, const std::string& k, const ConfigValue& v) {
         c.train.num_workers = static_cast<int>(as_positive(k, v));
       }},
      {"train.checkpoint_every", [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.checkpoint_every = as_count(k, v); }},
      {"her.strategy", [](RunConfig& c, const std::string& k, const ConfigValue& v) {
         c.train.her.strategy = parse_enum(k, v, parse_her_strategy);
       }},
      {"her.k", [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.train.her.k = as_double(k, v); }},
      {"replay.capacity_episodes", [](RunConfig& c, const std::string& k, const ConfigValue& v) {
         c.train.replay_capacity = as_positive(k, v);
       }},
      {"eval.n_rollouts", [](RunConfig& c, const std::string& k, const ConfigValue& v) {
         c.train.eval_rollouts = static_cast<int>(as_positive(k, v));
       }},
      {"eval.region", [](RunConfig& c, const std::string& k, const ConfigValue& v) {
         c.train_region.kind = parse_enum(k, v, parse_region_kind);
       }},
      {"eval.radius_threshold", [](RunConfig& c, const std::string& k, const ConfigValue& v) {
         c.train_region.radius_threshold = as_double(k, v);
       }},
      {"finetune.pretrain_region", [](RunConfig& c, const std::string& k, const ConfigValue& v) {
         c.finetune.pretrain_region.kind = parse_enum(k, v, parse_region_kind);
       }},
      {"finetune.finetune_region", [](RunConfig& c, const std::string& k, const ConfigValue& v) {
         c.finetune.finetune_region.kind = parse_enum(k, v, parse_region_kind);
       }},
      {"finetune.radius_threshold", [](RunConfig& c, const std::string& k, const ConfigValue& v) {
         c.finetune.pretrain_region.radius_threshold = as_double(k, v);
         c.finetune.finetune_region.radius_threshold = as_double(k, v);
       }},
      {"finetune.mode", [](RunConfig& c, const std::string& k, const ConfigValue& v) {
         c.finetune.mode = parse_enum(k, v, parse_finetune_mode);
       }},
      {"finetune.pretrain_epochs", [](RunConfig& c, const std::string& k, const ConfigValue& v) {
         c.finetune.pretrain_epochs = as_count(k, v);
       }},
      {"finetune.finetune_epochs", [](RunConfig& c, const std::string& k, const ConfigValue& v) {
         c.finetune.finetune_epochs = as_count(k, v);
       }},
      {"finetune.her_k", [](RunConfig& c, const std::string& k, const ConfigValue& v) {
         c.finetune.finetune_her.k = as_double(k, v);
       }},
      {"run.seeds", [](RunConfig& c, const std::string& k, const ConfigValue& v) {
         c.seeds.clear();
         for (const auto& item : as_list(k, v)) {
           const auto s = as_int(k, item);
           if (s < 0) throw ConfigError(where(k, v) + ": seeds must be non-negative");
           c.seeds.push_back(static_cast<std::uint64_t>(s));
         }
         if (c.seeds.empty()) throw ConfigError(where(k, v) + ": at least one seed is required");
       }},
  };
  return table;
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

std::string quote(const std::string& s) { return "\"" + s + "\""; }

}  // namespace

std::string ConfigValue::type_name() const {
  switch (data.index()) {
    case 0: return "integer";
    case 1: return "float";
    case 2: return "string";
    case 3: return "bool";
    default: return "list";
  }
}

std::string ConfigValue::to_text() const {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::int64_t>) return std::to_string(x);
        else if constexpr (std::is_same_v<T, double>) return fmt_double(x);
        else if constexpr (std::is_same_v<T, std::string>) return quote(x);
        else if constexpr (std::is_same_v<T, bool>) return x ? "true" : "false";
        else {
          std::string out = "[";
          for (std::size_t i = 0; i < x.size(); ++i) out += (i ? ", " : "") + x[i].to_text();
          return out + "]";
        }
      },
      data);
}

std::map<std::string, ConfigValue> parse_config_text(const std::string& text) {
  std::map<std::string, ConfigValue> kv;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail_at(line_no, "malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      if (!is_identifier(section)) fail_at(line_no, "invalid section name '" + section + "'");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail_at(line_no, "expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    if (!is_identifier(key)) fail_at(line_no, "invalid key '" + key + "'");
    if (section.empty()) fail_at(line_no, "key '" + key + "' appears before any [section]");
    const std::string full = section + "." + key;
    const std::string value_text = trim(line.substr(eq + 1));
    ConfigValue v = ValueParser(value_text, line_no).parse_all();
    if (kv.contains(full)) fail_at(line_no, "duplicate key '" + full + "'");
    kv.emplace(full, std::move(v));
  }
  return kv;
}

bool is_known_config_key(const std::string& key) { return setters().contains(key); }

std::string resolve_config_key(const std::string& key) {
  if (key.find('.') != std::string::npos) return key;
  for (const char* section : {"critic", "train", "env", "her", "replay", "eval", "finetune", "run"}) {
    const std::string full = std::string(section) + "." + key;
    if (is_known_config_key(full)) return full;
  }
  return key;
}

RunConfig build_run_config(const std::map<std::string, ConfigValue>& kv) {
  for (const auto& [key, value] : kv) {
    if (!is_known_config_key(key)) {
      throw ConfigError("line " + std::to_string(value.line) + ": unknown key '" + key + "'");
    }
  }
  for (const char* required : {"env.kind", "critic.variant"}) {
    if (!kv.contains(required)) {
      throw ConfigError(std::string("missing required key '") + required + "'");
    }
  }

  RunConfig cfg;
  const auto& kind_value = kv.at("env.kind");
  switch (parse_enum("env.kind", kind_value, parse_env_kind)) {
    case EnvKind::point_reach: cfg.env = EnvConfig::point_reach(); break;
    case EnvKind::u_maze: cfg.env = EnvConfig::u_maze(); break;
    case EnvKind::drag_world: cfg.env = EnvConfig::drag_world(0.6); break;
  }
  for (const auto& [key, value] : kv) setters().at(key)(cfg, key, value);

  cfg.critic.dims = env_dims();
  if (!cfg.latent_dim_explicit) cfg.critic.latent_dim = default_latent_dim(cfg.critic.variant);
  if (!cfg.branch_width_explicit) {
    cfg.critic.branch_width = matched_width(cfg.critic.dims, cfg.critic.latent_dim,
                                            cfg.critic.monolithic_width, cfg.critic.variant);
  }

  try {
    cfg.env.validate();
    cfg.critic.validate();
    cfg.train.validate();
    cfg.train_region.validate();
    cfg.finetune.validate(cfg.critic);
  } catch (const ContractError& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  return cfg;
}

RunConfig parse_run_config(const std::string& text) { return build_run_config(parse_config_text(text)); }

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_run_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string RunConfig::to_text() const {
  std::ostringstream out;
  out << "[env]\n";
  out << "kind = " << quote(to_string(env.kind)) << "\n";
  out << "reward = " << quote(to_string(env.reward)) << "\n";
  out << "drag = " << fmt_double(env.drag) << "\n";
  out << "dt = " << fmt_double(env.dt) << "\n";
  out << "v_max = " << fmt_double(env.v_max) << "\n";
  out << "a_max = " << fmt_double(env.a_max) << "\n";
  out << "success_radius = " << fmt_double(env.success_radius) << "\n";
  out << "horizon = " << env.horizon << "\n";
  out << "obstacles = [";
  for (std::size_t i = 0; i < env.obstacles.size(); ++i) {
    const Rect& r = env.obstacles[i];
    out << (i ? ", " : "") << "[" << fmt_double(r.x0) << ", " << fmt_double(r.y0) << ", "
        << fmt_double(r.x1) << ", " << fmt_double(r.y1) << "]";
  }
  out << "]\n\n[critic]\n";
  out << "variant = " << quote(to_string(critic.variant)) << "\n";
  if (latent_dim_explicit) out << "latent_dim = " << critic.latent_dim << "\n";
  out << "monolithic_width = " << critic.monolithic_width << "\n";
  if (branch_width_explicit) out << "branch_width = " << critic.branch_width << "\n";
  out << "\n[train]\n";
  out << "gamma = " << fmt_double(train.gamma) << "\n";
  out << "polyak = " << fmt_double(train.polyak) << "\n";
  out << "actor_lr = " << fmt_double(train.actor_lr) << "\n";
  out << "critic_lr = " << fmt_double(train.critic_lr) << "\n";
  out << "batch_size = " << train.batch_size << "\n";
  out << "noise_sigma = " << fmt_double(train.noise_sigma) << "\n";
  out << "random_action_prob = " << fmt_double(train.random_action_prob) << "\n";
  out << "warmup_rollouts = " << train.warmup_rollouts << "\n";
  out << "epochs = " << train.epochs << "\n";
  out << "cycles_per_epoch = " << train.cycles_per_epoch << "\n";
  out << "rollouts_per_cycle = " << train.rollouts_per_cycle << "\n";
  out << "batches_per_cycle = " << train.batches_per_cycle << "\n";
  const char* clip = train.q_target_clip == ClipMode::on    ? "on"
                     : train.q_target_clip == ClipMode::off ? "off"
                                                            : "auto";
  out << "q_target_clip = " << quote(clip) << "\n";
  out << "action_l2 = " << fmt_double(train.action_l2) << "\n";
  out << "actor_width = " << train.actor_width << "\n";
  out << "num_workers = " << train.num_workers << "\n";
  out << "checkpoint_every = " << checkpoint_every << "\n";
  out << "\n[her]\n";
  out << "strategy = " << quote(to_string(train.her.strategy)) << "\n";
  out << "k = " << fmt_double(train.her.k) << "\n";
  out << "\n[replay]\ncapacity_episodes = " << train.replay_capacity << "\n";
  out << "\n[eval]\n";
  out << "n_rollouts = " << train.eval_rollouts << "\n";
  out << "region = " << quote(to_string(train_region.kind)) << "\n";
  out << "radius_threshold = " << fmt_double(train_region.radius_threshold) << "\n";
  out << "\n[finetune]\n";
  out << "pretrain_region = " << quote(to_string(finetune.pretrain_region.kind)) << "\n";
  out << "finetune_region = " << quote(to_string(finetune.finetune_region.kind)) << "\n";
  out << "radius_threshold = " << fmt_double(finetune.finetune_region.radius_threshold) << "\n";
  out << "mode = " << quote(to_string(finetune.mode)) << "\n";
  out << "pretrain_epochs = " << finetune.pretrain_epochs << "\n";
  out << "finetune_epochs = " << finetune.finetune_epochs << "\n";
  out << "her_k = " << fmt_double(finetune.finetune_her.k) << "\n";
  out << "\n[run]\nseeds = [";
  for (std::size_t i = 0; i < seeds.size(); ++i) out << (i ? ", " : "") << seeds[i];
  out << "]\n";
  return out.str();
}

RunConfig with_override(const RunConfig& base, const std::string& key, const std::string& value) {
  const std::string full = resolve_config_key(key);
  if (!is_known_config_key(full)) throw ConfigError("unknown config key '" + key + "'");
  auto kv = parse_config_text(base.to_text());
  kv.insert_or_assign(full, ValueParser(value, 0).parse_all());
  return build_run_config(kv);
}

std::string config_hash(const RunConfig& cfg) {
  const std::string text = cfg.to_text();
  const std::string blob = "blob " + std::to_string(text.size()) + std::string(1, '\0') + text;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(blob.data(), blob.size(), digest, &len, EVP_sha1(), nullptr) != 1) {
    throw IoError("SHA-1 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

}  // namespace goalcraft
