#include <doctest.h>

#include "goalcraft/checkpoint.hpp"
#include "goalcraft/error.hpp"
#include "helpers.hpp"

using namespace goalcraft;

namespace {

AgentParams sample_agent(CriticVariant v = CriticVariant::bvn) {
  const CriticSpec spec = make_critic_spec(v, env_dims(), 16);
  TrainConfig cfg;
  cfg.actor_width = 8;
  cfg.seed = 3;
  return init_agent(spec, cfg);
}

CheckpointMeta sample_meta() {
  return {"0123abcd", 4, "bvn", 3, {{"phase", "finetune"}}};
}

std::string message_of(std::string_view bytes) {
  try {
    decode_checkpoint(bytes);
  } catch (const IoError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("checkpoint") {
  TEST_CASE("save, load, save is byte-identical") {
    const auto dir = gc_test::scratch_dir("checkpoint_roundtrip");
    const AgentParams p = sample_agent();
    save_checkpoint((dir / "a.gcqk").string(), p, sample_meta());
    Checkpoint c = load_checkpoint((dir / "a.gcqk").string());
    CHECK(c.params == p);
    CHECK(c.meta == sample_meta());
    save_checkpoint((dir / "b.gcqk").string(), c.params, c.meta);
    CHECK(gc_test::slurp(dir / "a.gcqk") == gc_test::slurp(dir / "b.gcqk"));
    CHECK(gc_test::slurp(dir / "a.gcqk").substr(0, 4) == "GCQK");
  }

  TEST_CASE("corrupt inputs are IO errors") {
    const std::string good = encode_checkpoint(sample_agent(), sample_meta());
    std::string bad_magic = good;
    bad_magic[0] = 'X';
    CHECK(message_of(bad_magic).find("magic") != std::string::npos);
    std::string bad_version = good;
    bad_version[4] = 9;
    CHECK(message_of(bad_version).find("version") != std::string::npos);
    const std::string cut = good.substr(0, good.size() - 20);
    const std::string msg = message_of(cut);
    CHECK(msg.find("critic/") != std::string::npos);
    CHECK_FALSE(message_of(good + "x").empty());
    CHECK_FALSE(message_of("").empty());
    CHECK_THROWS_AS(load_checkpoint("/nonexistent/x.gcqk"), IoError);
  }

  TEST_CASE("layout checks") {
    const AgentParams p = sample_agent();
    const CriticSpec bvn = make_critic_spec(CriticVariant::bvn, env_dims(), 16);
    const CriticSpec mono = make_critic_spec(CriticVariant::monolithic, env_dims(), 16);
    CHECK_NOTHROW(check_checkpoint_layout(p, bvn, 8));
    CHECK_THROWS_AS(check_checkpoint_layout(p, mono, 8), ShapeError);
    CHECK_THROWS_AS(check_checkpoint_layout(p, bvn, 16), ShapeError);
    CHECK_THROWS_AS(check_checkpoint_layout(p, make_critic_spec(CriticVariant::bvn, env_dims(), 32), 8),
                    ShapeError);
  }
}
