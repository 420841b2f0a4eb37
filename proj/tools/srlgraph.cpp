#include "srl/check.hpp"
#include "srl/inference.hpp"
#include "srl/io.hpp"
#include "srl/model.hpp"
#include "srl/parallel.hpp"
#include "srl/training.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <thread>

namespace {

using namespace srl;

int int_of(const std::string& v) { return std::stoi(v); }
double dbl_of(const std::string& v) { return std::stod(v); }

void apply_config_map(TrainConfig& cfg, const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "mode") cfg.mode = mode_from_string(value);
    else if (key == "order") cfg.order = order_from_string(value);
    else if (key == "lambda") cfg.lambda = dbl_of(value);
    else if (key == "mfvi_iters") cfg.mfvi_iters = int_of(value);
    else if (key == "epochs") cfg.epochs = int_of(value);
    else if (key == "batch_tokens") cfg.batch_tokens = int_of(value);
    else if (key == "learning_rate") cfg.learning_rate = dbl_of(value);
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "min_freq") cfg.min_freq = int_of(value);
    else if (key == "unk_rate") cfg.unk_rate = dbl_of(value);
    else if (key == "clip_norm") cfg.clip_norm = dbl_of(value);
    else if (key == "dropout") cfg.dropout = dbl_of(value);
    else if (key == "workers") cfg.workers = int_of(value);
    else if (key == "early_stop_train_f1") cfg.early_stop_train_f1 = dbl_of(value);
    else if (key == "word_dim") cfg.word_dim = int_of(value);
    else if (key == "lemma_dim") cfg.lemma_dim = int_of(value);
    else if (key == "char_dim") cfg.char_dim = int_of(value);
    else if (key == "char_hidden") cfg.char_hidden = int_of(value);
    else if (key == "hidden") cfg.hidden = int_of(value);
    else if (key == "layers") cfg.layers = int_of(value);
    else if (key == "edge_mlp") cfg.edge_mlp = int_of(value);
    else if (key == "label_mlp") cfg.label_mlp = int_of(value);
    else if (key == "second_mlp") cfg.second_mlp = int_of(value);
    else if (key == "len_cap") cfg.len_cap = int_of(value);
    else throw std::runtime_error("config: unknown key '" + key + "'");
  }
}

std::vector<SrlStructure> load_corpus(const std::string& path, Mode mode, bool strict) {
  std::vector<io::ParseDiagnostic> diags;
  std::vector<SrlStructure> out = io::read_corpus(path, {mode, strict}, &diags);
  for (const auto& d : diags)
    std::cerr << path << ":" << d.line << ": warning: " << d.message << "\n";
  return out;
}

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const size_t m = xs.size() / 2;
  return xs.size() % 2 ? xs[m] : 0.5 * (xs[m - 1] + xs[m]);
}

struct BenchRun {
  double sents_per_sec = 0.0;
  std::vector<SrlStructure> output;
};

BenchRun bench_decode(const Model& model, const std::vector<SrlStructure>& input, Order order,
                      int repeats, int workers) {
  BenchRun run;
  run.output.resize(input.size());
  auto decode_all = [&] {
    parallel_for(static_cast<int>(input.size()), workers, [&](int i) {
      run.output[static_cast<size_t>(i)] =
          decode_sentence(model, input[static_cast<size_t>(i)].sentence, order);
    });
  };
  decode_all();  // warmup, excluded from timing
  std::vector<double> rates;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    decode_all();
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rates.push_back(static_cast<double>(input.size()) / secs);
  }
  run.sents_per_sec = median(rates);
  return run;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"End-to-end span-based semantic role labeling as word-level graph parsing"};
  app.require_subcommand(1);

  // ---- train ----------------------------------------------------------------
  auto* train_cmd = app.add_subcommand("train", "Train a model");
  std::string tr_train, tr_dev, tr_config, tr_out, tr_log, tr_mode, tr_order, tr_embeddings;
  std::vector<std::string> tr_overrides;
  train_cmd->add_option("--train", tr_train, "Training corpus")->required();
  train_cmd->add_option("--dev", tr_dev, "Development corpus");
  train_cmd->add_option("--config", tr_config, "key=value config file");
  train_cmd->add_option("--out", tr_out, "Output model path")->required();
  train_cmd->add_option("--log", tr_log, "Per-epoch JSON log path");
  train_cmd->add_option("--mode", tr_mode, "span | dependency");
  train_cmd->add_option("--order", tr_order, "O1 | O2");
  train_cmd->add_option("--embeddings", tr_embeddings, "Pre-trained word vector file");
  train_cmd->add_option("--set", tr_overrides, "Config overrides as key=value");

  // ---- parse ----------------------------------------------------------------
  auto* parse_cmd = app.add_subcommand("parse", "Parse a corpus with a trained model");
  std::string pa_model, pa_input, pa_output, pa_order, pa_format = "json";
  int pa_workers = static_cast<int>(std::thread::hardware_concurrency());
  uint64_t pa_seed = 1;
  parse_cmd->add_option("--model", pa_model)->required();
  parse_cmd->add_option("--input", pa_input)->required();
  parse_cmd->add_option("--output", pa_output)->required();
  parse_cmd->add_option("--order", pa_order, "O1 | O2 (default: order the model was trained for)");
  parse_cmd->add_option("--format", pa_format, "columns | json")
      ->check(CLI::IsMember({"columns", "json"}));
  parse_cmd->add_option("--workers", pa_workers);
  parse_cmd->add_option("--seed", pa_seed, "Accepted for reproducible pipelines; decoding is deterministic");

  // ---- eval -----------------------------------------------------------------
  auto* eval_cmd = app.add_subcommand("eval", "Score predictions against gold");
  std::string ev_gold, ev_pred, ev_mode = "span";
  eval_cmd->add_option("--gold", ev_gold)->required();
  eval_cmd->add_option("--pred", ev_pred)->required();
  eval_cmd->add_option("--mode", ev_mode);

  // ---- bench ----------------------------------------------------------------
  auto* bench_cmd = app.add_subcommand("bench", "Measure decoding speed");
  std::string be_model, be_input, be_order = "both", be_output;
  int be_repeat = 5, be_workers = static_cast<int>(std::thread::hardware_concurrency());
  uint64_t be_seed = 1;
  bench_cmd->add_option("--model", be_model)->required();
  bench_cmd->add_option("--input", be_input)->required();
  bench_cmd->add_option("--order", be_order, "O1 | O2 | both")
      ->check(CLI::IsMember({"O1", "O2", "both"}));
  bench_cmd->add_option("--repeat", be_repeat);
  bench_cmd->add_option("--workers", be_workers);
  bench_cmd->add_option("--output", be_output, "Write the decoded structures (json)");
  bench_cmd->add_option("--seed", be_seed);

  // ---- check ----------------------------------------------------------------
  auto* check_cmd = app.add_subcommand("check", "Run the transform/inference property suites");
  int ck_fuzz = 10000;
  uint64_t ck_seed = 42;
  check_cmd->add_option("--fuzz", ck_fuzz, "Round-trip fuzz case count");
  check_cmd->add_option("--seed", ck_seed);

  // Exit codes: 0 success, 1 usage, 2 data error, 3 property failure.
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*train_cmd) {
      TrainConfig cfg;
      if (!tr_config.empty()) apply_config_map(cfg, io::read_config_file(tr_config));
      std::map<std::string, std::string> overrides;
      for (const std::string& kv : tr_overrides) {
        const size_t eq = kv.find('=');
        if (eq == std::string::npos)
          throw std::runtime_error("--set expects key=value, got '" + kv + "'");
        overrides[kv.substr(0, eq)] = kv.substr(eq + 1);
      }
      apply_config_map(cfg, overrides);
      if (!tr_mode.empty()) cfg.mode = mode_from_string(tr_mode);
      if (!tr_order.empty()) cfg.order = order_from_string(tr_order);
      cfg.embeddings = tr_embeddings;
      cfg.validate();
      const auto corpus = load_corpus(tr_train, cfg.mode, false);
      std::vector<SrlStructure> dev;
      if (!tr_dev.empty()) dev = load_corpus(tr_dev, cfg.mode, false);
      TrainResult result = train(corpus, dev, cfg, tr_out, tr_log);
      std::cout << "best epoch " << result.best_epoch << ", dev F1 "
                << result.best_dev_f1 << "\n";
      result.model.save(tr_out);
      return 0;
    }

    if (*parse_cmd) {
      const Model model = Model::load(pa_model);
      const Order order =
          pa_order.empty() ? model.trained_order : order_from_string(pa_order);
      const auto input = load_corpus(pa_input, model.cfg.mode, false);
      std::vector<SrlStructure> out(input.size());
      parallel_for(static_cast<int>(input.size()), std::max(1, pa_workers), [&](int i) {
        out[static_cast<size_t>(i)] =
            decode_sentence(model, input[static_cast<size_t>(i)].sentence, order);
      });
      if (pa_format == "json")
        io::write_predictions_json(out, pa_output);
      else
        io::write_corpus(out, pa_output, model.cfg.mode);
      return 0;
    }

    if (*eval_cmd) {
      const Mode mode = mode_from_string(ev_mode);
      const auto gold = load_corpus(ev_gold, mode, false);
      const auto pred = load_corpus(ev_pred, mode, false);
      const F1Result r = evaluate_f1(pred, gold);
      std::printf("P %.2f R %.2f F1 %.2f\n", r.precision, r.recall, r.f1);
      return 0;
    }

    if (*bench_cmd) {
      const Model model = Model::load(be_model);
      const auto input = load_corpus(be_input, model.cfg.mode, false);
      if (input.empty()) throw std::runtime_error("bench: empty input");
      std::vector<SrlStructure> last;
      for (const char* ord : {"O1", "O2"}) {
        if (be_order != "both" && be_order != ord) continue;
        BenchRun run =
            bench_decode(model, input, order_from_string(ord), be_repeat, std::max(1, be_workers));
        std::printf("%s %.1f sents/s (median of %d runs, %zu sentences)\n", ord,
                    run.sents_per_sec, be_repeat, input.size());
        last = std::move(run.output);
      }
      if (!be_output.empty()) io::write_predictions_json(last, be_output);
      return 0;
    }

    if (*check_cmd) {
      const auto results = check::run_all(ck_fuzz, ck_seed);
      bool all = true;
      for (const auto& r : results) {
        std::printf("[%s] %s: %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
        all = all && r.pass;
      }
      return all ? 0 : 3;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
