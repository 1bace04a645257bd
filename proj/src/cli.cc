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
#include "itransf/cli.h"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "itransf/checkpoint.h"
#include "itransf/errors.h"
#include "itransf/evaluation.h"
#include "itransf/export_report.h"
#include "itransf/kb_data.h"
#include "itransf/training.h"

namespace itransf::cli {

namespace fs = std::filesystem;

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

unsigned hardware_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

// Streams every write to two sinks.
class TeeBuf : public std::streambuf {
 public:
  TeeBuf(std::streambuf* a, std::streambuf* b) : a_(a), b_(b) {}

 protected:
  int overflow(int c) override {
    if (c == EOF) return !EOF;
    const int ra = a_ ? a_->sputc(static_cast<char>(c)) : c;
    const int rb = b_ ? b_->sputc(static_cast<char>(c)) : c;
    return ra == EOF || rb == EOF ? EOF : c;
  }
  int sync() override {
    const int ra = a_ ? a_->pubsync() : 0;
    const int rb = b_ ? b_->pubsync() : 0;
    return ra == 0 && rb == 0 ? 0 : -1;
  }

 private:
  std::streambuf* a_;
  std::streambuf* b_;
};

// Options shared by commands that read a dataset.
struct DataFlags {
  std::string dataset;
  std::string data_dir;
  std::string train, valid, test;

  void add(CLI::App* app) {
    app->add_option("--dataset", dataset, "dataset name; wn18 and fb15k select published defaults");
    app->add_option("--data", data_dir,
                    std::string("directory with train.txt, valid.txt, test.txt (default: $") +
                        kDataDirEnv + "/<dataset>)");
    app->add_option("--train-file", train, "training split (overrides --data)");
    app->add_option("--valid-file", valid, "validation split (overrides --data)");
    app->add_option("--test-file", test, "test split (overrides --data)");
  }

  void resolve(RunConfig& c) const {
    c.dataset = lower(dataset);
    if (!data_dir.empty()) {
      c.data_dir = data_dir;
    } else if (!c.dataset.empty()) {
      const char* root = std::getenv(kDataDirEnv);
      c.data_dir = fs::path(root != nullptr && *root != '\0' ? root : "data") / c.dataset;
    }
    c.train_path = !train.empty() ? fs::path(train) : c.data_dir / "train.txt";
    c.valid_path = !valid.empty() ? fs::path(valid) : c.data_dir / "valid.txt";
    c.test_path = !test.empty() ? fs::path(test) : c.data_dir / "test.txt";
    if (c.data_dir.empty() && (train.empty() || valid.empty() || test.empty())) {
      throw UsageError("no data: pass --dataset, --data, or all of --train-file/--valid-file/--test-file");
    }
  }
};

// Training flags. Hyperparameters are optional so that precedence can be
// resolved as flag > config file > dataset default > built-in default.
struct TrainFlags {
  std::optional<std::string> model, sampling, attention;
  std::optional<int> dim, num_concepts, max_active, norm, batch_size, epochs, block_every,
      block_stop, cost_budget;
  std::optional<double> margin, temperature, lr, init_noise, domain_lambda, l1_coef, proj_penalty;
  bool domain_uniform_side = false;
  std::uint64_t seed = 1;
  std::string out_dir;
  std::optional<unsigned> threads;
  int eval_every = 10;
  int patience = 200;
  bool no_early_stop = false;
  std::size_t valid_max = 1000;
  int checkpoint_every = 0;
  std::string init_from;
  bool dry_run = false;
  bool quiet = false;

  void add(CLI::App* app) {
    app->add_option("--model", model, "itransf | transe | stranse")
        ->check(CLI::IsMember({"itransf", "transe", "stranse"}, CLI::ignore_case));
    app->add_option("--dim,-n", dim, "embedding dimension n");
    app->add_option("--concepts,-m", num_concepts, "number of shared concept matrices m");
    app->add_option("--k", max_active, "max active concepts per assignment vector");
    app->add_option("--margin", margin, "hinge margin");
    app->add_option("--temperature", temperature, "softmax temperature");
    app->add_option("--norm", norm, "energy norm, 1 or 2");
    app->add_option("--lr", lr, "SGD learning rate");
    app->add_option("--batch-size", batch_size, "mini-batch size");
    app->add_option("--epochs", epochs, "training epochs");
    app->add_option("--block-every", block_every, "epochs between block updates");
    app->add_option("--block-stop", block_stop, "last epoch with a block update (-1: epochs/2)");
    app->add_option("--init-noise", init_noise, "std. dev. of concept-matrix init noise");
    app->add_option("--sampling", sampling, "uniform | bernoulli | domain")
        ->check(CLI::IsMember({"uniform", "bernoulli", "domain"}, CLI::ignore_case));
    app->add_option("--lambda", domain_lambda, "domain sampling rate");
    app->add_flag("--domain-uniform-side", domain_uniform_side,
                  "domain sampling picks the corrupted side by a fair coin");
    app->add_option("--attention", attention, "sparse | dense | dense_l1")
        ->check(CLI::IsMember({"sparse", "dense", "dense_l1"}, CLI::ignore_case));
    app->add_option("--l1-coef", l1_coef, "weight penalty for dense_l1 attention");
    app->add_option("--proj-penalty", proj_penalty, "projected-norm penalty weight");
    app->add_option("--cost-budget", cost_budget, "triples per block-update cost (-1: all)");
    app->add_option("--seed", seed, "random seed");
    app->add_option("--out", out_dir, "output directory");
    app->add_option("--threads", threads, "validation worker threads (default 1)");
    app->add_option("--eval-every", eval_every, "epochs between validations (0: never)");
    app->add_option("--patience", patience, "early-stop patience in epochs");
    app->add_flag("--no-early-stop", no_early_stop, "train for all epochs");
    app->add_option("--valid-max", valid_max, "validation triples per check (0: all)");
    app->add_option("--checkpoint-every", checkpoint_every, "periodic checkpoints (0: off)");
    app->add_option("--init-from", init_from, "warm-start checkpoint (e.g. a TransE run)");
    app->add_flag("--dry-run", dry_run, "print the resolved configuration and exit");
    app->add_flag("--quiet", quiet, "no per-epoch progress on stderr");
  }

  RunConfig resolve(const DataFlags& data) const {
    RunConfig c;
    data.resolve(c);
    Hyperparams& hp = c.hp;
    if (auto d = dataset_defaults(c.dataset)) {
      hp.margin = d->margin;
      hp.dim = d->dim;
      hp.batch_size = d->batch_size;
      hp.lr = d->lr;
      hp.num_concepts = d->num_concepts;
    }
    if (model) hp.model = parse_model_kind(lower(*model));
    if (sampling) hp.sampling = parse_sampling_mode(lower(*sampling));
    if (attention) hp.attention = parse_attention_mode(lower(*attention));
    if (dim) hp.dim = *dim;
    if (num_concepts) hp.num_concepts = *num_concepts;
    if (max_active) hp.max_active = *max_active;
    if (norm) hp.norm = *norm;
    if (batch_size) hp.batch_size = *batch_size;
    if (epochs) hp.epochs = *epochs;
    if (block_every) hp.block_every = *block_every;
    if (block_stop) hp.block_stop = *block_stop;
    if (cost_budget) hp.cost_budget = *cost_budget;
    if (margin) hp.margin = *margin;
    if (temperature) hp.temperature = *temperature;
    if (lr) hp.lr = *lr;
    if (init_noise) hp.init_noise_sd = *init_noise;
    if (domain_lambda) hp.domain_lambda = *domain_lambda;
    if (l1_coef) hp.l1_coef = *l1_coef;
    if (proj_penalty) hp.proj_penalty = *proj_penalty;
    hp.domain_uniform_side = domain_uniform_side;

    c.seed = seed;
    c.threads = threads.value_or(1);
    c.eval_every = eval_every;
    c.patience = patience;
    c.early_stop = !no_early_stop;
    c.valid_max = valid_max;
    c.checkpoint_every = checkpoint_every;
    c.init_from = init_from;
    c.out_dir = !out_dir.empty()
                    ? fs::path(out_dir)
                    : fs::path("runs") /
                          ((c.dataset.empty() ? std::string("run") : c.dataset) + "-seed" +
                           std::to_string(seed));
    check(c);
    return c;
  }

  static void check(const RunConfig& c) {
    try {
      c.hp.validate();
    } catch (const ArgumentError& e) {
      throw UsageError(e.what());
    }
    if (c.hp.model != ModelKind::kITransF && c.hp.attention != AttentionMode::kSparse) {
      throw UsageError("--attention applies to --model itransf only");
    }
    if (c.threads < 1) throw UsageError("--threads must be >= 1");
    if (c.eval_every < 0 || c.patience < 0 || c.checkpoint_every < 0) {
      throw UsageError("--eval-every, --patience and --checkpoint-every must be >= 0");
    }
  }
};

// Applies key=value lines to options not given on the command line.
void apply_config_file(CLI::App* app, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read config file " + path);
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_config(in);
  } catch (const CLI::ParseError& e) {
    throw UsageError("config file " + path + ": " + e.what());
  }
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    std::string key = item.name;
    std::replace(key.begin(), key.end(), '_', '-');
    CLI::Option* opt = app->get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config") {
      throw UsageError("config file " + path + ": unknown key '" + item.name + "'");
    }
    if (opt->count() > 0) continue;
    opt->add_result(item.inputs);
    try {
      opt->run_callback();
    } catch (const CLI::ParseError& e) {
      throw UsageError("config file " + path + ": " + item.name + ": " + e.what());
    }
  }
}

Dataset load_data(const RunConfig& c) {
  return load_dataset(c.train_path, c.valid_path, c.test_path);
}

void write_run_config(const RunConfig& c) {
  fs::create_directories(c.out_dir);
  write_text(c.out_dir / "config.json", to_json(c).dump(2) + "\n");
  write_text(c.out_dir / "config.ini", to_flat_config(c));
}

struct TrainOutcome {
  TrainResult result;
  double seconds_per_epoch = 0;
};

TrainOutcome run_training(const RunConfig& c, const Dataset& ds, std::ostream* progress) {
  write_run_config(c);
  std::ofstream log_file(c.out_dir / "train.log", std::ios::trunc);
  TeeBuf tee(log_file.rdbuf(), progress != nullptr ? progress->rdbuf() : nullptr);
  std::ostream log(&tee);

  std::optional<Checkpoint> warm;
  if (!c.init_from.empty()) {
    warm = load_checkpoint(c.init_from);
    if (warm->vocab_fingerprint != ds.vocab.fingerprint()) {
      throw VocabError("warm-start checkpoint was built on a different vocabulary");
    }
  }

  const auto& store = ds.store;
  TrainOptions opts;
  opts.warm_start = warm ? &warm->params : nullptr;
  opts.log = &log;
  double validation_seconds = 0;
  if (c.eval_every > 0 && !store.valid().empty()) {
    opts.eval_every = c.eval_every;
    opts.patience = c.early_stop ? c.patience : 0;
    opts.validate = [&](const ModelParams& p) {
      const auto t0 = std::chrono::steady_clock::now();
      EvalOptions eo;
      eo.threads = c.threads;
      eo.max_triples = c.valid_max;
      eo.subsample_seed = mix_seed(c.seed, 4);
      const auto rep = evaluate(store.valid(), p, store, c.hp, eo);
      validation_seconds +=
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      return ValidationResult{rep.hits_at_10, rep.mean_rank};
    };
  }
  const auto fingerprint = ds.vocab.fingerprint();
  auto make_checkpoint = [&](const ModelParams& p, nlohmann::json extra) {
    Checkpoint ck;
    ck.hp = c.hp;
    ck.vocab_fingerprint = fingerprint;
    ck.params = p;
    extra["seed"] = c.seed;
    extra["dataset"] = c.dataset;
    ck.extra = std::move(extra);
    return ck;
  };
  if (c.checkpoint_every > 0) {
    opts.checkpoint_every = c.checkpoint_every;
    opts.on_checkpoint = [&](int epoch, const ModelParams& p) {
      save_checkpoint(c.out_dir / ("epoch-" + std::to_string(epoch) + ".ckpt"),
                      make_checkpoint(p, {{"epoch", epoch}}));
    };
  }

  const auto t0 = std::chrono::steady_clock::now();
  TrainOutcome outcome;
  outcome.result = train(store, c.hp, c.seed, opts);
  const double total =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto& r = outcome.result;
  if (r.epochs_run > 0) outcome.seconds_per_epoch = (total - validation_seconds) / r.epochs_run;

  save_checkpoint(c.out_dir / "model.ckpt",
                  make_checkpoint(r.params, {{"epochs_run", r.epochs_run},
                                             {"best_epoch", r.best_epoch},
                                             {"early_stopped", r.early_stopped}}));

  Table hist;
  hist.columns = {"epoch", "mean_loss", "seconds", "block_updated", "changed_bits",
                  "valid_mean_rank", "valid_hits_at_10"};
  for (const auto& rec : r.history) {
    hist.rows.push_back({std::to_string(rec.epoch), format_double(rec.mean_loss),
                         format_double(rec.seconds), rec.block_updated ? "1" : "0",
                         std::to_string(rec.changed_bits),
                         rec.valid_mean_rank ? format_double(*rec.valid_mean_rank) : "",
                         rec.valid_hits10 ? format_double(*rec.valid_hits10) : ""});
  }
  write_table(hist, c.out_dir / "history.csv");
  nlohmann::json summary = {{"epochs_run", r.epochs_run},
                            {"best_epoch", r.best_epoch},
                            {"early_stopped", r.early_stopped},
                            {"seconds_per_epoch", outcome.seconds_per_epoch},
                            {"vocab_fingerprint", fingerprint}};
  write_text(c.out_dir / "summary.json", summary.dump(2) + "\n");
  log.flush();
  return outcome;
}

// ---- train ----------------------------------------------------------------

struct TrainCommand {
  DataFlags data;
  TrainFlags flags;
  std::string config;

  void add(CLI::App* app) {
    data.add(app);
    flags.add(app);
    app->add_option("--config", config, "flat key=value file; command-line flags win");
  }

  int run(std::ostream& out, std::ostream& err) {
    const RunConfig c = flags.resolve(data);
    if (flags.dry_run) {
      out << to_json(c).dump(2) << '\n';
      return kExitOk;
    }
    const Dataset ds = load_data(c);
    const auto outcome = run_training(c, ds, flags.quiet ? nullptr : &err);
    out << "wrote " << (c.out_dir / "model.ckpt").string() << " after "
        << outcome.result.epochs_run << " epochs\n";
    return kExitOk;
  }
};

// ---- eval -----------------------------------------------------------------

struct EvalFlags {
  std::string checkpoint;
  std::string split = "test";
  bool raw = false;
  std::string direction = "both";
  int bins = 0;
  std::optional<unsigned> threads;
  std::string out_dir;
  std::string format = "text";
  bool per_relation_csv = false;
  std::size_t max_triples = 0;

  void add(CLI::App* app, bool with_checkpoint) {
    if (with_checkpoint) {
      app->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
    }
    app->add_option("--split", split, "train | valid | test")
        ->check(CLI::IsMember({"train", "valid", "test"}));
    app->add_flag("--raw", raw, "unfiltered ranking");
    app->add_option("--direction", direction, "head | tail | both")
        ->check(CLI::IsMember({"head", "tail", "both"}));
    app->add_option("--bins", bins, "per-bin relation-averaged Hits@10 over N frequency bins");
    app->add_option("--threads", threads, "worker threads (default: all cores)");
    app->add_option("--format", format, "text | json (stdout)")
        ->check(CLI::IsMember({"text", "json"}));
    app->add_flag("--per-relation-csv", per_relation_csv, "also write per_relation.csv");
    app->add_option("--max-triples", max_triples, "evaluate a seeded subset (0: all)");
  }

  EvalOptions options() const {
    EvalOptions eo;
    eo.filtered = !raw;
    eo.direction = direction == "head"   ? Direction::kHead
                   : direction == "tail" ? Direction::kTail
                                         : Direction::kBoth;
    eo.threads = threads.value_or(hardware_threads());
    eo.max_triples = max_triples;
    return eo;
  }
};

const TripleList& split_of(const TripleStore& store, const std::string& name) {
  if (name == "train") return store.train();
  if (name == "valid") return store.valid();
  return store.test();
}

Checkpoint load_matching(const fs::path& path, const Vocab& vocab) {
  Checkpoint ck = load_checkpoint(path);
  if (ck.vocab_fingerprint != vocab.fingerprint()) {
    throw VocabError("checkpoint " + path.string() +
                     " was trained on a different vocabulary than the supplied data");
  }
  if (ck.params.num_entities != vocab.num_entities() ||
      ck.params.num_relations != vocab.num_relations()) {
    throw VocabError("checkpoint shape does not match the supplied data");
  }
  return ck;
}

struct EvalCommand {
  DataFlags data;
  EvalFlags flags;
  std::string out_dir;
  std::string config;

  void add(CLI::App* app) {
    data.add(app);
    flags.add(app, true);
    app->add_option("--out", out_dir, "directory for eval.json, eval.txt, per_relation.csv");
    app->add_option("--config", config, "flat key=value file; command-line flags win");
  }

  int run(std::ostream& out, std::ostream&) {
    RunConfig c;
    data.resolve(c);
    if (flags.bins < 0) throw UsageError("--bins must be >= 0");
    if (flags.threads && *flags.threads < 1) throw UsageError("--threads must be >= 1");
    const Dataset ds = load_data(c);
    const Checkpoint ck = load_matching(flags.checkpoint, ds.vocab);
    EvalOptions eo = flags.options();
    std::optional<FrequencyBins> bins;
    if (flags.bins > 0) {
      bins = bin_relations(ds.store, flags.bins);
      eo.bins = &*bins;
    }
    const auto report = evaluate(split_of(ds.store, flags.split), ck.params, ds.store, ck.hp, eo);
    const auto json = to_json(report, &ds.vocab);
    const auto text = format_report(report, &ds.vocab);
    out << (flags.format == "json" ? json.dump(2) + "\n" : text);
    if (!out_dir.empty()) {
      const fs::path dir(out_dir);
      fs::create_directories(dir);
      nlohmann::json cfg = {{"checkpoint", flags.checkpoint},
                            {"split", flags.split},
                            {"filtered", !flags.raw},
                            {"direction", flags.direction},
                            {"bins", flags.bins},
                            {"max_triples", flags.max_triples},
                            {"train_file", c.train_path.string()},
                            {"valid_file", c.valid_path.string()},
                            {"test_file", c.test_path.string()}};
      write_text(dir / "eval_config.json", cfg.dump(2) + "\n");
      write_text(dir / "eval.json", json.dump(2) + "\n");
      write_text(dir / "eval.txt", text);
      if (flags.per_relation_csv) {
        write_table(per_relation_table(report, ds.vocab, ds.store), dir / "per_relation.csv");
      }
    }
    return kExitOk;
  }
};

// ---- sweep ----------------------------------------------------------------

struct SweepCommand {
  DataFlags data;
  TrainFlags flags;
  std::string axis;
  std::vector<std::string> values;
  std::string split = "test";
  std::optional<unsigned> eval_threads;
  std::string config;

  void add(CLI::App* app) {
    data.add(app);
    flags.add(app);
    app->add_option("--axis", axis, "lambda | m | mode")
        ->required()
        ->check(CLI::IsMember({"lambda", "m", "mode"}));
    app->add_option("--values", values, "comma-separated values")
        ->required()
        ->delimiter(',')
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    app->add_option("--split", split, "evaluation split")
        ->check(CLI::IsMember({"train", "valid", "test"}));
    app->add_option("--eval-threads", eval_threads, "evaluation workers (default: all cores)");
    app->add_option("--config", config, "flat key=value file; command-line flags win");
  }

  int run(std::ostream& out, std::ostream& err) {
    if (values.empty()) throw UsageError("--values must not be empty");
    const RunConfig base = flags.resolve(data);
    // Materialize every run's config up front so bad values fail before work.
    std::vector<RunConfig> runs;
    for (const auto& v : values) {
      RunConfig c = base;
      try {
        if (axis == "lambda") {
          c.hp.sampling = SamplingMode::kDomain;
          c.hp.domain_lambda = std::stod(v);
        } else if (axis == "m") {
          std::size_t used = 0;
          c.hp.num_concepts = std::stoi(v, &used);
          if (used != v.size()) throw std::invalid_argument(v);
        } else {
          c.hp.attention = parse_attention_mode(lower(v));
        }
      } catch (const std::exception&) {
        throw UsageError("bad --values entry '" + v + "' for axis " + axis);
      }
      c.out_dir = base.out_dir / (axis + "=" + v);
      TrainFlags::check(c);
      runs.push_back(std::move(c));
    }
    if (flags.dry_run) {
      auto arr = nlohmann::json::array();
      for (const auto& c : runs) arr.push_back(to_json(c));
      out << arr.dump(2) << '\n';
      return kExitOk;
    }
    const Dataset ds = load_data(base);
    write_run_config(base);

    const std::string axis_column = axis == "lambda" ? "lambda" : axis == "m" ? "m" : "attention";
    Table table;
    table.columns = {axis_column, "mean_rank", "hits_at_10", "seconds_per_epoch", "epochs",
                     "status"};
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const auto& c = runs[i];
      try {
        const auto outcome = run_training(c, ds, flags.quiet ? nullptr : &err);
        EvalOptions eo;
        eo.threads = eval_threads.value_or(hardware_threads());
        const auto report =
            evaluate(split_of(ds.store, split), outcome.result.params, ds.store, c.hp, eo);
        write_text(c.out_dir / "eval.json", to_json(report, &ds.vocab).dump(2) + "\n");
        table.rows.push_back({values[i], format_double(report.mean_rank),
                              format_double(report.hits_at_10),
                              format_double(outcome.seconds_per_epoch),
                              std::to_string(outcome.result.epochs_run), "ok"});
      } catch (const std::exception& e) {
        err << "sweep run " << axis << "=" << values[i] << " failed: " << e.what() << '\n';
        table.rows.push_back(
            {values[i], "", "", "", "", std::string("failed: ") + e.what()});
      }
    }
    write_table(table, base.out_dir / "sweep.csv");
    out << table.to_csv();
    return kExitOk;
  }
};

// ---- export ---------------------------------------------------------------

struct ExportCommand {
  DataFlags data;
  std::string what;
  std::vector<std::string> checkpoints;
  std::vector<std::string> names;
  std::vector<std::string> relations;
  std::string out_path;
  int bins = 3;
  std::string split = "test";
  std::optional<unsigned> threads;
  std::string config;

  void add(CLI::App* app) {
    data.add(app);
    app->add_option("what", what, "attention | frequency | bins")
        ->required()
        ->check(CLI::IsMember({"attention", "frequency", "bins"}));
    app->add_option("--checkpoint", checkpoints, "model checkpoint (repeat for bins)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    app->add_option("--name", names, "column name per checkpoint (bins)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    app->add_option("--relations", relations, "relation names to export (attention)")
        ->delimiter(',')
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    app->add_option("--out", out_path, "output CSV path; a .json mirror is written alongside");
    app->add_option("--bins", bins, "number of frequency bins");
    app->add_option("--split", split, "evaluation split for bins")
        ->check(CLI::IsMember({"train", "valid", "test"}));
    app->add_option("--threads", threads, "evaluation workers (default: all cores)");
    app->add_option("--config", config, "flat key=value file; command-line flags win");
  }

  int run(std::ostream& out, std::ostream&) {
    // Preconditions first, before any data is read.
    if ((what == "attention" || what == "bins") && checkpoints.empty()) {
      throw UsageError("export " + what + " needs a trained model: pass --checkpoint");
    }
    if (what == "attention" && checkpoints.size() != 1) {
      throw UsageError("export attention takes exactly one --checkpoint");
    }
    if (!names.empty() && names.size() != checkpoints.size()) {
      throw UsageError("--name must be given once per --checkpoint");
    }
    if (bins < 1) throw UsageError("--bins must be >= 1");
    RunConfig c;
    data.resolve(c);
    const fs::path path = out_path.empty() ? fs::path(what + ".csv") : fs::path(out_path);
    const Dataset ds = load_data(c);

    if (what == "frequency") {
      export_frequency(ds.store, ds.vocab, path);
    } else if (what == "attention") {
      const Checkpoint ck = load_matching(checkpoints.front(), ds.vocab);
      if (ck.hp.model == ModelKind::kTransE) {
        throw UsageError("a TransE checkpoint has no attention vectors");
      }
      export_attention(attention_snapshot(ck.params, ck.hp), ds.vocab, path, relations);
    } else {
      const auto fb = bin_relations(ds.store, bins);
      std::vector<NamedReport> reports;
      for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        const Checkpoint ck = load_matching(checkpoints[i], ds.vocab);
        EvalOptions eo;
        eo.threads = threads.value_or(hardware_threads());
        eo.bins = &fb;
        const std::string name =
            names.empty() ? std::string(to_string(ck.hp.model)) + "_" + std::to_string(i) : names[i];
        reports.emplace_back(name, evaluate(split_of(ds.store, split), ck.params, ds.store, ck.hp, eo));
      }
      export_bin_comparison(reports, fb, path);
    }
    out << "wrote " << path.string() << '\n';
    return kExitOk;
  }
};

}  // namespace

std::optional<DatasetDefaults> dataset_defaults(std::string_view name) {
  const auto n = lower(name);
  if (n == "wn18") return DatasetDefaults{5.0, 50, 20, 0.01, 30};
  if (n == "fb15k") return DatasetDefaults{1.0, 100, 1000, 0.1, 300};
  return std::nullopt;
}

nlohmann::json to_json(const RunConfig& c) {
  return {{"dataset", c.dataset},
          {"data_dir", c.data_dir.string()},
          {"train_file", c.train_path.string()},
          {"valid_file", c.valid_path.string()},
          {"test_file", c.test_path.string()},
          {"hyperparams", to_json(c.hp)},
          {"seed", c.seed},
          {"out_dir", c.out_dir.string()},
          {"threads", c.threads},
          {"eval_every", c.eval_every},
          {"patience", c.patience},
          {"early_stop", c.early_stop},
          {"valid_max", c.valid_max},
          {"checkpoint_every", c.checkpoint_every},
          {"init_from", c.init_from.string()}};
}

std::string to_flat_config(const RunConfig& c) {
  const Hyperparams& hp = c.hp;
  std::ostringstream s;
  auto kv = [&s](std::string_view k, const std::string& v) { s << k << '=' << v << '\n'; };
  auto quoted = [](const std::string& v) {
    std::string q = "\"";
    for (char ch : v) {
      if (ch == '"' || ch == '\\') q += '\\';
      q += ch;
    }
    return q + "\"";
  };
  if (!c.dataset.empty()) kv("dataset", quoted(c.dataset));
  kv("train-file", quoted(c.train_path.string()));
  kv("valid-file", quoted(c.valid_path.string()));
  kv("test-file", quoted(c.test_path.string()));
  kv("model", std::string(to_string(hp.model)));
  kv("dim", std::to_string(hp.dim));
  kv("concepts", std::to_string(hp.num_concepts));
  kv("k", std::to_string(hp.max_active));
  kv("margin", format_double(hp.margin));
  kv("temperature", format_double(hp.temperature));
  kv("norm", std::to_string(hp.norm));
  kv("lr", format_double(hp.lr));
  kv("batch-size", std::to_string(hp.batch_size));
  kv("epochs", std::to_string(hp.epochs));
  kv("block-every", std::to_string(hp.block_every));
  kv("block-stop", std::to_string(hp.block_stop));
  kv("init-noise", format_double(hp.init_noise_sd));
  kv("sampling", std::string(to_string(hp.sampling)));
  kv("lambda", format_double(hp.domain_lambda));
  kv("domain-uniform-side", hp.domain_uniform_side ? "true" : "false");
  kv("attention", std::string(to_string(hp.attention)));
  kv("l1-coef", format_double(hp.l1_coef));
  kv("proj-penalty", format_double(hp.proj_penalty));
  kv("cost-budget", std::to_string(hp.cost_budget));
  kv("seed", std::to_string(c.seed));
  kv("out", quoted(c.out_dir.string()));
  kv("threads", std::to_string(c.threads));
  kv("eval-every", std::to_string(c.eval_every));
  kv("patience", std::to_string(c.patience));
  kv("no-early-stop", c.early_stop ? "false" : "true");
  kv("valid-max", std::to_string(c.valid_max));
  kv("checkpoint-every", std::to_string(c.checkpoint_every));
  if (!c.init_from.empty()) kv("init-from", quoted(c.init_from.string()));
  return s.str();
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Knowledge base completion with sparse shared concept projections"};
  app.name("itransf");
  app.require_subcommand(1);

  TrainCommand train_cmd;
  EvalCommand eval_cmd;
  SweepCommand sweep_cmd;
  ExportCommand export_cmd;
  auto* train_app = app.add_subcommand("train", "train a model and write a checkpoint");
  auto* eval_app = app.add_subcommand("eval", "rank a split with a trained checkpoint");
  auto* sweep_app = app.add_subcommand("sweep", "train and evaluate one run per axis value");
  auto* export_app = app.add_subcommand("export", "write plot-ready CSV/JSON data");
  // A repeated scalar flag takes its last value; list options opt back in to TakeAll.
  for (auto* sub : {train_app, eval_app, sweep_app, export_app}) {
    sub->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  }
  train_cmd.add(train_app);
  eval_cmd.add(eval_app);
  sweep_cmd.add(sweep_app);
  export_cmd.add(export_app);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? kExitOk : kExitUsage;
    }
    auto with_config = [&](CLI::App* sub, const std::string& cfg) {
      if (!cfg.empty()) apply_config_file(sub, cfg);
    };
    if (train_app->parsed()) {
      with_config(train_app, train_cmd.config);
      return train_cmd.run(out, err);
    }
    if (eval_app->parsed()) {
      with_config(eval_app, eval_cmd.config);
      return eval_cmd.run(out, err);
    }
    if (sweep_app->parsed()) {
      with_config(sweep_app, sweep_cmd.config);
      return sweep_cmd.run(out, err);
    }
    with_config(export_app, export_cmd.config);
    return export_cmd.run(out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ArgumentError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, out, err);
}

}  // namespace itransf::cli
