#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fgbp/bp.hpp"
#include "fgbp/constructions.hpp"
#include "fgbp/decomposed_mp.hpp"
#include "fgbp/exact.hpp"
#include "fgbp/fgnn.hpp"
#include "fgbp/ldpc.hpp"
#include "fgbp/lowrank.hpp"
#include "fgbp/synthetic.hpp"
#include "fgbp/train.hpp"

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_output(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  out << text;
}

json beliefs_json(const std::vector<std::vector<double>>& beliefs) {
  json arr = json::array();
  for (const auto& b : beliefs) arr.push_back(b);
  return arr;
}

int run_gen(const std::string& kind, int count, int n, int window, int budget,
            std::uint64_t seed, const std::string& out_path) {
  if (kind == "tree") {
    fgbp::Rng root(seed);
    json doc;
    doc["schema"] = "fgbp-dataset-v1";
    doc["instances"] = json::array();
    for (int i = 0; i < count; ++i) {
      const auto inst = fgbp::gen_tree_instance(
          3, 6, root.child(static_cast<std::uint64_t>(i)).next_u64());
      json entry;
      entry["graph"] = json::parse(fgbp::graph_to_json(inst.graph));
      entry["labels"] = inst.labels;
      doc["instances"].push_back(std::move(entry));
    }
    write_output(out_path, doc.dump(2) + "\n");
    return 0;
  }
  fgbp::SyntheticSpec spec;
  spec.kind = fgbp::kind_from_name(kind);
  spec.n = n;
  spec.window = window;
  spec.budget = budget;
  spec.seed = seed;
  write_output(out_path, fgbp::dataset_to_json(fgbp::gen_dataset(spec, count)));
  return 0;
}

int run_infer(const std::string& graph_path, const std::string& engine,
              int iterations, double damping, const std::string& out_path) {
  const auto g = fgbp::graph_from_json(read_file(graph_path));
  json doc;
  doc["engine"] = engine;
  if (engine == "exact") {
    const auto marginals = fgbp::exact_marginals(g);
    const auto map = fgbp::exact_map(g);
    doc["beliefs"] = beliefs_json(marginals);
    doc["map"] = map.assignment;
    doc["log_score"] = map.log_score;
  } else {
    fgbp::BpConfig cfg;
    cfg.max_iterations = iterations;
    cfg.damping = damping;
    if (engine == "sum") {
      const auto r = fgbp::run_bp(g, cfg);
      doc["beliefs"] = beliefs_json(r.beliefs);
      doc["map"] = fgbp::decode_map_from_beliefs(r.beliefs);
      doc["converged"] = r.converged;
      doc["iterations"] = r.iterations;
    } else if (engine == "max") {
      cfg.mode = fgbp::BpMode::kMaxSum;
      const auto r = fgbp::run_bp(g, cfg);
      doc["beliefs"] = beliefs_json(r.beliefs);
      doc["map"] = fgbp::decode_map_from_beliefs(r.beliefs);
      doc["converged"] = r.converged;
      doc["iterations"] = r.iterations;
    } else if (engine == "lowrank") {
      const auto r = fgbp::run_lowrank_bp(g, cfg);
      doc["beliefs"] = beliefs_json(r.beliefs);
      doc["map"] = fgbp::decode_map_from_beliefs(r.beliefs);
      doc["converged"] = r.converged;
      doc["iterations"] = r.iterations;
    } else {
      cfg.mode = fgbp::BpMode::kMaxSum;
      const auto r = fgbp::run_decomposed_max_product(g, cfg);
      doc["beliefs"] = beliefs_json(r.beliefs);
      doc["map"] = r.decode;
      doc["converged"] = r.converged;
      doc["iterations"] = r.iterations;
    }
  }
  write_output(out_path, doc.dump(2) + "\n");
  return 0;
}

int run_verify(std::uint64_t seed) {
  bool all_pass = true;
  for (const auto& report : fgbp::run_construction_certifiers(seed)) {
    std::cout << report.name << ": " << (report.pass ? "pass" : "FAIL")
              << " (max err " << report.max_err << ")\n";
    all_pass = all_pass && report.pass;
  }
  return all_pass ? 0 : 1;
}

int run_train(const std::string& data_path, const std::string& eval_path,
              int epochs, std::uint64_t seed, const std::string& out_path,
              const std::string& metrics_path) {
  const auto train_data = fgbp::dataset_from_json(read_file(data_path));
  const auto eval_data = eval_path.empty()
                             ? train_data
                             : fgbp::dataset_from_json(read_file(eval_path));
  fgbp::TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.seed = seed;
  const auto result = fgbp::train_map_model(train_data, eval_data, cfg);
  write_output(out_path, fgbp::model_to_json(result.model));
  if (!metrics_path.empty()) {
    write_output(metrics_path, fgbp::metrics_to_json(result.metrics));
  }
  return 0;
}

int run_eval(const std::string& data_path, const std::string& model_path,
             const std::string& out_path) {
  const auto data = fgbp::dataset_from_json(read_file(data_path));
  const auto model = fgbp::model_from_json(read_file(model_path));
  json doc;
  doc["instances"] = data.size();
  doc["model_accuracy"] = fgbp::evaluate_model(model, data);
  doc["maxsum_accuracy"] = fgbp::evaluate_maxsum(data);
  write_output(out_path, doc.dump(2) + "\n");
  return 0;
}

int run_ldpc(const std::string& grid, int snr_db, double sigma_b, int trials,
             std::uint64_t seed, const std::string& decoders_arg,
             const std::string& modulation, const std::string& out_path) {
  std::vector<std::string> decoders;
  std::stringstream ss(decoders_arg);
  for (std::string part; std::getline(ss, part, ',');) {
    if (part != "sum" && part != "max" && part != "bit") {
      throw std::runtime_error("unknown decoder: " + part);
    }
    decoders.push_back(part);
  }
  std::vector<int> snr_grid;
  std::vector<double> sigma_b_grid;
  if (grid == "full") {
    for (int s = 0; s <= 4; ++s) snr_grid.push_back(s);
    for (int b = 0; b <= 5; ++b) sigma_b_grid.push_back(b);
  } else {
    snr_grid.push_back(snr_db);
    sigma_b_grid.push_back(sigma_b);
  }
  const auto mod = modulation == "bit" ? fgbp::Modulation::kBit
                                       : fgbp::Modulation::kBpsk;
  const auto code = fgbp::ldpc_make_code(96, 3, 6, seed);
  const auto rows = fgbp::ldpc_decode_eval(code, decoders, snr_grid,
                                           sigma_b_grid, trials, seed, mod);
  write_output(out_path, fgbp::ber_rows_to_csv(rows));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete factor-graph inference engine"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::string out_path;

  auto* gen = app.add_subcommand("gen", "Generate a labeled dataset");
  std::string gen_kind = "D1";
  int gen_count = 10, gen_n = 14, gen_window = 8, gen_budget = 5;
  gen->add_option("--kind", gen_kind, "D1|D2|D3|tree");
  gen->add_option("--count", gen_count, "number of instances");
  gen->add_option("--n", gen_n, "chain length");
  gen->add_option("--window", gen_window, "budget window size");
  gen->add_option("--budget", gen_budget, "budget k");
  gen->add_option("--seed", seed, "rng seed");
  gen->add_option("--out", out_path, "output path (default stdout)");

  auto* infer = app.add_subcommand("infer", "Run inference on a graph JSON");
  std::string infer_graph, infer_engine = "sum";
  int infer_iterations = 100;
  double infer_damping = 0.0;
  infer->add_option("--graph", infer_graph, "factor graph JSON path")
      ->required();
  infer->add_option("--engine", infer_engine, "exact|sum|max|lowrank|maxdecomp")
      ->check(CLI::IsMember({"exact", "sum", "max", "lowrank", "maxdecomp"}));
  infer->add_option("--iterations", infer_iterations, "bp iteration cap");
  infer->add_option("--damping", infer_damping, "message damping in [0,1)");
  infer->add_option("--seed", seed, "rng seed (unused, accepted for symmetry)");
  infer->add_option("--out", out_path, "output path (default stdout)");

  auto* verify = app.add_subcommand("verify", "Run construction certifiers");
  verify->add_option("--seed", seed, "rng seed");

  auto* train = app.add_subcommand("train", "Train the FGNN on a dataset");
  std::string train_data, train_eval, train_metrics;
  int train_epochs = 100;
  train->add_option("--data", train_data, "training dataset JSON")->required();
  train->add_option("--eval", train_eval, "eval dataset JSON (default: train)");
  train->add_option("--epochs", train_epochs, "training epochs");
  train->add_option("--seed", seed, "rng seed");
  train->add_option("--out", out_path, "model checkpoint path");
  train->add_option("--metrics", train_metrics, "per-epoch metrics JSON path");

  auto* eval = app.add_subcommand("eval", "Evaluate a trained model");
  std::string eval_data, eval_model;
  eval->add_option("--data", eval_data, "dataset JSON")->required();
  eval->add_option("--model", eval_model, "model checkpoint path")->required();
  eval->add_option("--seed", seed, "rng seed (unused, accepted for symmetry)");
  eval->add_option("--out", out_path, "output path (default stdout)");

  auto* ldpc = app.add_subcommand("ldpc", "LDPC BER sweep");
  std::string ldpc_grid = "full", ldpc_decoders = "sum,max,bit";
  std::string ldpc_modulation = "bpsk";
  int ldpc_snr = 4, ldpc_trials = 100;
  double ldpc_sigma_b = 0.0;
  ldpc->add_option("--grid", ldpc_grid, "full|single")
      ->check(CLI::IsMember({"full", "single"}));
  ldpc->add_option("--snr", ldpc_snr, "snr_db for --grid single");
  ldpc->add_option("--sigma-b", ldpc_sigma_b, "burst sigma for --grid single");
  ldpc->add_option("--trials", ldpc_trials, "codewords per grid cell");
  ldpc->add_option("--decoders", ldpc_decoders, "comma list of sum|max|bit");
  ldpc->add_option("--modulation", ldpc_modulation, "bpsk|bit")
      ->check(CLI::IsMember({"bpsk", "bit"}));
  ldpc->add_option("--seed", seed, "rng seed");
  ldpc->add_option("--out", out_path, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (gen->parsed()) {
      return run_gen(gen_kind, gen_count, gen_n, gen_window, gen_budget, seed,
                     out_path);
    }
    if (infer->parsed()) {
      return run_infer(infer_graph, infer_engine, infer_iterations,
                       infer_damping, out_path);
    }
    if (verify->parsed()) return run_verify(seed);
    if (train->parsed()) {
      return run_train(train_data, train_eval, train_epochs, seed, out_path,
                       train_metrics);
    }
    if (eval->parsed()) return run_eval(eval_data, eval_model, out_path);
    if (ldpc->parsed()) {
      return run_ldpc(ldpc_grid, ldpc_snr, ldpc_sigma_b, ldpc_trials, seed,
                      ldpc_decoders, ldpc_modulation, out_path);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
