// Copyright 2026 The itransf-kbc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "itransf/checkpoint.h"
#include "itransf/cli.h"
#include "itransf/kb_data.h"
#include "test_util.h"

namespace itransf {
namespace {

using cli::run_cli;

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

// Small named KB written as train/valid/test files.
class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto store = testing::random_store(25, 3, 150, 17, 15);
    auto write = [&](const std::string& name, const TripleList& triples) {
      std::ofstream out(dir_ / name);
      for (const auto& x : triples) {
        out << "e" << x.h << "\trel" << x.r << "\te" << x.t << "\n";
      }
    };
    write("train.txt", store.train());
    write("valid.txt", store.valid());
    write("test.txt", store.test());
  }

  std::vector<std::string> train_args(const std::string& out) const {
    return {"train", "--data", dir_.path().string(), "--out", (dir_ / out).string(),
            "--dim", "4", "--concepts", "3", "--k", "1", "--epochs", "6", "--batch-size", "16",
            "--margin", "1", "--lr", "0.02", "--eval-every", "2", "--quiet"};
  }

  testing::TempDir dir_;
};

TEST(DatasetDefaults, PublishedValues) {
  const auto wn = cli::dataset_defaults("WN18");
  ASSERT_TRUE(wn);
  EXPECT_EQ(wn->margin, 5.0);
  EXPECT_EQ(wn->dim, 50);
  EXPECT_EQ(wn->batch_size, 20);
  EXPECT_EQ(wn->lr, 0.01);
  EXPECT_EQ(wn->num_concepts, 30);
  const auto fb = cli::dataset_defaults("fb15k");
  ASSERT_TRUE(fb);
  EXPECT_EQ(fb->margin, 1.0);
  EXPECT_EQ(fb->dim, 100);
  EXPECT_EQ(fb->batch_size, 1000);
  EXPECT_EQ(fb->lr, 0.1);
  EXPECT_EQ(fb->num_concepts, 300);
  EXPECT_FALSE(cli::dataset_defaults("yago"));
}

TEST(Cli, DryRunPrintsResolvedConfig) {
  const auto r = run({"train", "--dataset", "wn18", "--dry-run"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["hyperparams"]["margin"], 5.0);
  EXPECT_EQ(j["hyperparams"]["dim"], 50);
  EXPECT_EQ(j["hyperparams"]["num_concepts"], 30);
  EXPECT_EQ(j["hyperparams"]["temperature"], 0.25);
  EXPECT_EQ(j["hyperparams"]["batch_size"], 20);

  const auto fb = run({"train", "--dataset", "fb15k", "--margin", "2", "--dry-run"});
  const auto k = nlohmann::json::parse(fb.out);
  EXPECT_EQ(k["hyperparams"]["margin"], 2.0);
  EXPECT_EQ(k["hyperparams"]["num_concepts"], 300);
}

TEST(Cli, DataDirFromEnvironment) {
  ::setenv(cli::kDataDirEnv, "/srv/kb", 1);
  const auto r = run({"train", "--dataset", "wn18", "--dry-run"});
  ::unsetenv(cli::kDataDirEnv);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["train_file"], "/srv/kb/wn18/train.txt");
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, cli::kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"train", "--dataset", "wn18", "--k", "40", "--dry-run"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"train", "--dataset", "wn18", "--norm", "3", "--dry-run"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"train", "--dry-run"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"train", "--dataset", "wn18", "--model", "transe", "--attention", "dense",
                 "--dry-run"})
                .code,
            cli::kExitUsage);
  EXPECT_EQ(run({"train", "--help"}).code, cli::kExitOk);
}

TEST_F(CliTest, MissingDataIsDataError) {
  const auto r = run({"train", "--data", (dir_ / "nowhere").string(), "--epochs", "1"});
  EXPECT_EQ(r.code, cli::kExitData);
  EXPECT_NE(r.err.find("data error"), std::string::npos);
}

TEST_F(CliTest, ConfigFileWithFlagPrecedence) {
  std::ofstream(dir_ / "run.ini") << "# comment\nmargin = 3.5\ndim=7\nl1_coef=0.01\n";
  const auto r = run({"train", "--dataset", "wn18", "--config", (dir_ / "run.ini").string(),
                      "--dim", "9", "--dry-run"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["hyperparams"]["margin"], 3.5);  // config beats dataset default
  EXPECT_EQ(j["hyperparams"]["dim"], 9);       // flag beats config
  EXPECT_EQ(j["hyperparams"]["l1_coef"], 0.01);
  std::ofstream(dir_ / "bad.ini") << "bogus=1\n";
  EXPECT_EQ(run({"train", "--dataset", "wn18", "--config", (dir_ / "bad.ini").string(),
                 "--dry-run"})
                .code,
            cli::kExitUsage);
}

TEST_F(CliTest, TrainWritesArtifactsAndIsReproducible) {
  auto r = run(train_args("a"));
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"model.ckpt", "config.json", "config.ini", "history.csv", "history.json",
                        "train.log", "summary.json"}) {
    EXPECT_TRUE(std::filesystem::exists(dir_ / "a" / f)) << f;
  }
  ASSERT_EQ(run(train_args("b")).code, 0);
  EXPECT_EQ(slurp(dir_ / "a" / "model.ckpt"), slurp(dir_ / "b" / "model.ckpt"));

  // The emitted flat config reproduces the run.
  const auto replay = run({"train", "--config", (dir_ / "a" / "config.ini").string(), "--out",
                           (dir_ / "c").string(), "--quiet"});
  ASSERT_EQ(replay.code, 0) << replay.err;
  EXPECT_EQ(slurp(dir_ / "a" / "model.ckpt"), slurp(dir_ / "c" / "model.ckpt"));
}

TEST_F(CliTest, ZeroEpochsWritesInitCheckpoint) {
  auto args = train_args("init");
  args.push_back("--epochs");
  args.push_back("0");
  args.push_back("--seed");
  args.push_back("5");
  ASSERT_EQ(run(args).code, 0);
  const auto ck = load_checkpoint(dir_ / "init" / "model.ckpt");
  const auto ds = load_dataset_dir(dir_.path());
  EXPECT_EQ(ck.params, init_params(ds.vocab.num_entities(), ds.vocab.num_relations(), ck.hp, 5));
  EXPECT_EQ(ck.vocab_fingerprint, ds.vocab.fingerprint());
}

TEST_F(CliTest, EvalOutputsAndRawVersusFiltered) {
  ASSERT_EQ(run(train_args("m")).code, 0);
  const auto ckpt = (dir_ / "m" / "model.ckpt").string();
  const auto f = run({"eval", "--data", dir_.path().string(), "--checkpoint", ckpt, "--format",
                      "json", "--bins", "3", "--out", (dir_ / "ev").string(),
                      "--per-relation-csv"});
  ASSERT_EQ(f.code, 0) << f.err;
  const auto fj = nlohmann::json::parse(f.out);
  EXPECT_EQ(fj["per_bin"].size(), 3u);
  for (const char* name : {"eval.json", "eval.txt", "per_relation.csv", "eval_config.json"}) {
    EXPECT_TRUE(std::filesystem::exists(dir_ / "ev" / name)) << name;
  }
  const auto raw = run({"eval", "--data", dir_.path().string(), "--checkpoint", ckpt, "--format",
                        "json", "--raw"});
  ASSERT_EQ(raw.code, 0);
  const auto rj = nlohmann::json::parse(raw.out);
  EXPECT_GE(rj["mean_rank"].get<double>(), fj["mean_rank"].get<double>());
  EXPECT_FALSE(rj["filtered"].get<bool>());

  const auto text = run({"eval", "--data", dir_.path().string(), "--checkpoint", ckpt,
                         "--bins", "3"});
  EXPECT_NE(text.out.find("rel-avg hits@10"), std::string::npos);
}

TEST_F(CliTest, EvalRejectsForeignVocabulary) {
  ASSERT_EQ(run(train_args("m")).code, 0);
  testing::TempDir other;
  std::ofstream(other / "train.txt") << "x\tr\ty\n";
  std::ofstream(other / "valid.txt") << "";
  std::ofstream(other / "test.txt") << "y\tr\tx\n";
  const auto r = run({"eval", "--data", other.path().string(), "--checkpoint",
                      (dir_ / "m" / "model.ckpt").string()});
  EXPECT_EQ(r.code, cli::kExitData);
  EXPECT_NE(r.err.find("vocabulary"), std::string::npos);
}

TEST_F(CliTest, EvalOfMemorizingCheckpoint) {
  // Chain KB e_i = i, r = 1 under TransE: every training triple ranks first.
  testing::TempDir chain;
  {
    std::ofstream tr(chain / "train.txt");
    for (int i = 0; i < 15; ++i) tr << "n" << i << "\tnext\tn" << i + 1 << "\n";
    std::ofstream(chain / "valid.txt") << "";
    std::ofstream(chain / "test.txt") << "";
  }
  const auto ds = load_dataset_dir(chain.path());
  Checkpoint ck;
  ck.hp.model = ModelKind::kTransE;
  ck.hp.dim = 1;
  ck.vocab_fingerprint = ds.vocab.fingerprint();
  ck.params = init_params(ds.vocab.num_entities(), 1, ck.hp, 0);
  for (std::size_t e = 0; e < ds.vocab.num_entities(); ++e) {
    ck.params.entity[e] = std::stod(ds.vocab.entity_name(static_cast<EntityId>(e)).substr(1));
  }
  ck.params.relation[0] = 1;
  save_checkpoint(chain / "memo.ckpt", ck);
  const auto r = run({"eval", "--data", chain.path().string(), "--checkpoint",
                      (chain / "memo.ckpt").string(), "--split", "train", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["hits_at_10"], 100.0);
  EXPECT_EQ(j["mean_rank"], 1.0);
}

TEST_F(CliTest, SweepTables) {
  auto args = train_args("sw");
  args[0] = "sweep";
  args.insert(args.end(), {"--axis", "lambda", "--values", "0.0003,0.001,0.003"});
  const auto r = run(args);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = slurp(dir_ / "sw" / "sweep.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  EXPECT_EQ(csv.substr(0, csv.find('\r')),
            "lambda,mean_rank,hits_at_10,seconds_per_epoch,epochs,status");
  std::size_t ok = 0;
  for (auto pos = csv.find(",ok\r\n"); pos != std::string::npos; pos = csv.find(",ok\r\n", pos + 1)) {
    ++ok;
  }
  EXPECT_EQ(ok, 3u);

  auto single = train_args("sm");
  single[0] = "sweep";
  single.insert(single.end(), {"--axis", "m", "--values", "3"});
  ASSERT_EQ(run(single).code, 0);
  // One m value is a plain train: same checkpoint as train with that m.
  ASSERT_EQ(run(train_args("plain")).code, 0);
  EXPECT_EQ(slurp(dir_ / "sm" / "m=3" / "model.ckpt"), slurp(dir_ / "plain" / "model.ckpt"));
}

TEST_F(CliTest, SweepRecordsFailuresAndContinues) {
  auto args = train_args("bad");
  args[0] = "sweep";
  args.insert(args.end(), {"--axis", "mode", "--values", "sparse,dense", "--lr", "1e308",
                           "--margin", "1e308"});
  const auto r = run(args);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = slurp(dir_ / "bad" / "sweep.csv");
  EXPECT_NE(csv.find("failed"), std::string::npos);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);

  auto bad_value = train_args("bv");
  bad_value[0] = "sweep";
  bad_value.insert(bad_value.end(), {"--axis", "m", "--values", "3,x"});
  EXPECT_EQ(run(bad_value).code, cli::kExitUsage);
}

TEST_F(CliTest, Exports) {
  ASSERT_EQ(run(train_args("k1")).code, 0);
  const auto ckpt = (dir_ / "k1" / "model.ckpt").string();
  const auto att = run({"export", "attention", "--data", dir_.path().string(), "--checkpoint",
                        ckpt, "--out", (dir_ / "att.csv").string()});
  ASSERT_EQ(att.code, 0) << att.err;
  const auto table = nlohmann::json::parse(slurp(dir_ / "att.json"));
  EXPECT_EQ(table["rows"].size(), 6u);
  for (const auto& row : table["rows"]) {
    int ones = 0;
    for (const auto& [k, v] : row.items()) {
      if (k != "row" && v.get<double>() == 1.0) ++ones;
    }
    EXPECT_EQ(ones, 1);
  }

  const auto freq = run({"export", "frequency", "--data", dir_.path().string(), "--out",
                         (dir_ / "freq.csv").string()});
  ASSERT_EQ(freq.code, 0);
  EXPECT_EQ(nlohmann::json::parse(slurp(dir_ / "freq.json"))["rows"].size(), 3u);

  EXPECT_EQ(run({"export", "bins", "--data", dir_.path().string()}).code, cli::kExitUsage);
  const auto bins = run({"export", "bins", "--data", dir_.path().string(), "--checkpoint", ckpt,
                         "--checkpoint", ckpt, "--name", "a", "--name", "b", "--out",
                         (dir_ / "bins.csv").string()});
  ASSERT_EQ(bins.code, 0) << bins.err;
  const auto bj = nlohmann::json::parse(slurp(dir_ / "bins.json"));
  EXPECT_EQ(bj["columns"].back(), "b");

  EXPECT_EQ(run({"export", "attention", "--data", dir_.path().string(), "--checkpoint", ckpt,
                 "--relations", "nope", "--out", (dir_ / "x.csv").string()})
                .code,
            cli::kExitUsage);
}

}  // namespace
}  // namespace itransf
