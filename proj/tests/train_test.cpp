#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sqf/chess/position.hpp"
#include "sqf/common/error.hpp"
#include "sqf/common/rng.hpp"
#include "sqf/data/build.hpp"
#include "sqf/model/checkpoint.hpp"
#include "sqf/train/config.hpp"
#include "sqf/train/mask.hpp"
#include "sqf/train/trainer.hpp"

using namespace sqf;
using namespace sqf::train;

namespace {

model::ModelConfig tiny_model(int history = 1) {
  model::ModelConfig cfg;
  cfg.layers = 1;
  cfg.embed_dim = 32;
  cfg.mlp_expansion = 2;
  cfg.history = history;
  cfg.mode = model::Mode::Human;
  cfg.posenc = model::PosEnc::Gab;
  cfg.gab_d1 = 2;
  cfg.gab_d2 = 8;
  cfg.gab_d3 = 8;
  return cfg;
}

// Examples at several plies of one game, distinct targets.
std::vector<data::TrainingExample> small_batch(int history = 1) {
  data::GameRecord g;
  g.white_elo = 1700;
  g.black_elo = 1650;
  g.result = data::GameResult::WhiteWin;
  for (const char* uci : {"e2e4", "e7e5", "g1f3", "b8c6", "f1c4", "g8f6"})
    g.moves.push_back(chess::Move::parse_uci(uci));
  const auto states = data::replay_game(g);
  std::vector<data::TrainingExample> batch;
  for (int ply = 0; ply < 4; ++ply)
    batch.push_back(data::build_example(states, g.moves, ply, history,
                                        g.white_elo, g.black_elo, g.result));
  return batch;
}

TrainConfig fast_config() {
  TrainConfig cfg;
  cfg.warmup_steps = 5;
  cfg.cosine_cycles = 100000;
  cfg.lr = 1e-3;
  cfg.min_lr = 1e-4;
  return cfg;
}

}  // namespace

TEST_CASE("train config text round-trip and validation") {
  TrainConfig cfg;
  cfg.optimizer = Optimizer::Nadam;
  cfg.swa = true;
  cfg.cosine_cycles = 123;
  TrainConfig back = TrainConfig::from_text(cfg.to_text());
  CHECK(back == cfg);

  CHECK_THROWS_AS(TrainConfig::from_text("nonsense=1\n"), ParseError);
  TrainConfig bad;
  bad.min_lr = bad.lr * 2;
  CHECK_THROWS_AS(bad.validate(), ShapeError);
}

TEST_CASE("learning rate schedule") {
  TrainConfig cfg;  // warmup 1000, cycle 50000, lr 5e-5, min_lr 1e-5
  CHECK(lr_at(0, cfg) == 0.0);
  CHECK(lr_at(500, cfg) == doctest::Approx(cfg.lr / 2));
  CHECK(lr_at(1000, cfg) == doctest::Approx(cfg.lr));
  CHECK(lr_at(1000 + 25000, cfg) == doctest::Approx((cfg.lr + cfg.min_lr) / 2));
  CHECK(lr_at(1000 + 49999, cfg) > cfg.min_lr);
  // Restart at the cycle boundary.
  CHECK(lr_at(1000 + 50000, cfg) == doctest::Approx(cfg.lr));

  SUBCASE("no refresh parks at min_lr") {
    cfg.refresh_lr_scheduler = false;
    CHECK(lr_at(1000 + 50000, cfg) == doctest::Approx(cfg.min_lr));
    CHECK(lr_at(1000 + 350000, cfg) == doctest::Approx(cfg.min_lr));
  }
}

TEST_CASE("history masking") {
  auto batch = small_batch(3);
  const data::TrainingExample& ex = batch[3];
  REQUIRE(ex.history() == 3);

  SUBCASE("p=0 is identity") {
    Rng rng(1);
    CHECK(mask_history(ex, 0.0, rng) == ex);
  }

  SUBCASE("p=1 masks between one and n slots") {
    Rng rng(2);
    bool saw_full = false, saw_partial = false;
    for (int rep = 0; rep < 200; ++rep) {
      auto masked = mask_history(ex, 1.0, rng);
      CHECK(masked.boards[0] == ex.boards[0]);  // current never touched
      // Find the survivor: deepest slot still matching the original.
      int survivor = 3;
      while (survivor > 0 && !(masked.boards[survivor] == ex.boards[survivor]))
        --survivor;
      for (int i = survivor + 1; i <= 3; ++i) {
        CHECK(masked.boards[i] == masked.boards[survivor]);
        CHECK(masked.repetition[i] == masked.repetition[survivor]);
      }
      if (survivor == 0) saw_full = true;
      if (survivor == 2) saw_partial = true;
    }
    CHECK(saw_full);
    CHECK(saw_partial);
  }

  SUBCASE("seeded runs reproduce") {
    Rng a(7), b(7);
    for (int rep = 0; rep < 20; ++rep)
      CHECK(mask_history(ex, 0.5, a) == mask_history(ex, 0.5, b));
  }

  SUBCASE("n=0 stack untouched") {
    auto flat = small_batch(0)[0];
    Rng rng(3);
    CHECK(mask_history(flat, 1.0, rng) == flat);
  }
}

TEST_CASE("swa running mean") {
  const auto cfg = tiny_model();
  model::Parameters a(cfg, 1), b(cfg, 2);

  SwaState swa;
  swa_update(swa, a);
  auto one = swa_finalize(swa, a);
  for (int i = 0; i < a.count(); ++i)
    CHECK(one.tensor(i).data == a.tensor(i).data);

  swa_update(swa, b);
  auto two = swa_finalize(swa, a);
  for (int i = 0; i < a.count(); ++i)
    for (size_t j = 0; j < two.tensor(i).data.size(); ++j)
      CHECK(two.tensor(i).data[j] ==
            doctest::Approx(0.5f * (a.tensor(i).data[j] + b.tensor(i).data[j]))
                .epsilon(1e-6));

  SUBCASE("mean of identical snapshots is the snapshot") {
    SwaState same;
    swa_update(same, a);
    swa_update(same, a);
    swa_update(same, a);
    auto out = swa_finalize(same, a);
    for (int i = 0; i < a.count(); ++i)
      for (size_t j = 0; j < out.tensor(i).data.size(); ++j)
        CHECK(out.tensor(i).data[j] ==
              doctest::Approx(a.tensor(i).data[j]).epsilon(1e-6));
  }
}

TEST_CASE("train_step learns a single batch") {
  const auto mcfg = tiny_model();
  model::Parameters params(mcfg, 11);
  Trainer trainer(params, fast_config());
  auto batch = small_batch();

  auto first = trainer.train_step(batch);
  CHECK(first.step == 1);
  CHECK(first.lr == doctest::Approx(1e-3 / 5));
  CHECK(first.grad_norm > 0);
  CHECK_FALSE(first.aborted);

  double last = first.loss;
  double after = last;
  for (int i = 0; i < 99; ++i) after = trainer.train_step(batch).loss;
  CHECK(after < last / 2);  // overfits a fixed batch quickly
  CHECK(trainer.step() == 100);

  SUBCASE("loss composition holds through training") {
    auto m = trainer.evaluate(batch);
    CHECK(m.loss ==
          doctest::Approx(m.policy_loss + 0.1 * m.value_loss).epsilon(1e-6));
  }
}

TEST_CASE("gradient clipping caps the applied norm") {
  const auto mcfg = tiny_model();
  model::Parameters params(mcfg, 11);
  TrainConfig cfg = fast_config();
  cfg.grad_clip_norm = 1e-6;  // force clipping
  Trainer trainer(params, cfg);
  auto batch = small_batch();
  auto m = trainer.train_step(batch);
  CHECK(m.grad_norm > cfg.grad_clip_norm);  // reported norm is pre-clip
  CHECK_FALSE(m.aborted);
}

TEST_CASE("deterministic given identical setup") {
  const auto mcfg = tiny_model();
  auto batch = small_batch();
  model::Parameters p1(mcfg, 11), p2(mcfg, 11);
  Trainer t1(p1, fast_config()), t2(p2, fast_config());
  for (int i = 0; i < 5; ++i) {
    auto a = t1.train_step(batch);
    auto b = t2.train_step(batch);
    CHECK(a.loss == b.loss);
    CHECK(a.grad_norm == b.grad_norm);
  }
  for (int i = 0; i < p1.count(); ++i)
    CHECK(p1.tensor(i).data == p2.tensor(i).data);
}

TEST_CASE("nadam optimizer steps") {
  const auto mcfg = tiny_model();
  model::Parameters params(mcfg, 11);
  TrainConfig cfg = fast_config();
  cfg.optimizer = Optimizer::Nadam;
  Trainer trainer(params, cfg);
  auto batch = small_batch();
  double first = trainer.train_step(batch).loss;
  double last = first;
  for (int i = 0; i < 49; ++i) last = trainer.train_step(batch).loss;
  CHECK(last < first);
}

TEST_CASE("checkpoint resume matches uninterrupted training step-for-step") {
  const auto dir = std::filesystem::temp_directory_path() / "sqf_train_test";
  std::filesystem::create_directories(dir);
  const auto ckpt = (dir / "resume.sqfm").string();

  const auto mcfg = tiny_model();
  auto batch = small_batch();

  // Uninterrupted: 10 steps.
  model::Parameters ref(mcfg, 21);
  Trainer tref(ref, fast_config());
  tref.swa();  // swa untouched
  std::vector<double> ref_losses;
  for (int i = 0; i < 10; ++i) ref_losses.push_back(tref.train_step(batch).loss);

  // Interrupted: 5 steps, checkpoint, reload, 5 more.
  model::Parameters live(mcfg, 21);
  Trainer t1(live, fast_config());
  std::vector<double> losses;
  for (int i = 0; i < 5; ++i) losses.push_back(t1.train_step(batch).loss);
  swa_update(t1.swa(), live);
  t1.save(ckpt);

  model::CheckpointExtra extra;
  model::Parameters resumed = model::load_checkpoint(ckpt, &extra);
  Trainer t2(resumed, fast_config());
  t2.restore(extra);
  CHECK(t2.step() == 5);
  CHECK(t2.swa().count == 1);
  for (int i = 0; i < 5; ++i) losses.push_back(t2.train_step(batch).loss);

  for (int i = 0; i < 10; ++i) CHECK(losses[i] == ref_losses[i]);
  for (int i = 0; i < ref.count(); ++i)
    CHECK(resumed.tensor(i).data == ref.tensor(i).data);

  SUBCASE("save -> load -> save is byte-identical") {
    const auto again = (dir / "again.sqfm").string();
    model::CheckpointExtra extra2;
    model::Parameters p2 = model::load_checkpoint(ckpt, &extra2);
    Trainer t3(p2, fast_config());
    t3.restore(extra2);
    t3.save(again);
    std::ifstream f1(ckpt, std::ios::binary), f2(again, std::ios::binary);
    std::stringstream s1, s2;
    s1 << f1.rdbuf();
    s2 << f2.rdbuf();
    CHECK(s1.str() == s2.str());
    CHECK(s1.str().size() > 0);
  }
}

TEST_CASE("metrics log is newline-delimited json") {
  StepMetrics m;
  m.step = 12;
  m.lr = 5e-5;
  m.loss = 3.25;
  m.policy_acc = 0.5;
  m.value_acc = 0.25;
  CHECK(metrics_json(m) ==
        "{\"step\":12,\"lr\":5e-05,\"loss\":3.25,"
        "\"policy_acc\":0.5,\"value_acc\":0.25}");

  const auto dir = std::filesystem::temp_directory_path() / "sqf_train_test";
  std::filesystem::create_directories(dir);
  MetricsLog log(dir / "metrics.ndjson");
  log.append(m);
  m.step = 13;
  log.append(m);
  std::ifstream in(dir / "metrics.ndjson");
  std::string l1, l2;
  std::getline(in, l1);
  std::getline(in, l2);
  CHECK(l1.find("\"step\":12") != std::string::npos);
  CHECK(l2.find("\"step\":13") != std::string::npos);
}
