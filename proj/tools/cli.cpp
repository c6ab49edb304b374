#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "psc/bench.hpp"
#include "psc/dataio.hpp"
#include "psc/error.hpp"
#include "psc/metrics.hpp"
#include "psc/psc.hpp"
#include "psc/runtime.hpp"
#include "psc/spectral.hpp"

namespace psc::cli {
namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

// Inputs ending in an IDX image suffix are read as IDX; anything else is CSV.
struct InputSpec {
  std::string path;
  std::optional<std::string> label_column;
  std::optional<std::string> labels_path;
};

void add_input_options(CLI::App* cmd, InputSpec& in, bool required = true) {
  auto* opt = cmd->add_option("--input", in.path, "CSV with header row, or IDX image file");
  if (required) opt->required();
  cmd->add_option("--label-column", in.label_column, "CSV column holding ground-truth labels");
  cmd->add_option("--labels", in.labels_path, "separate label file (IDX or single-column CSV)");
}

bool is_idx(const std::string& path) {
  return path.find("idx3") != std::string::npos || path.ends_with(".idx");
}

LabeledData load_input(const InputSpec& in) {
  LabeledData out;
  if (is_idx(in.path)) {
    if (in.label_column) throw ConfigError("--label-column applies to CSV input only");
    out.data = load_idx(in.path);
  } else {
    out = load_csv(in.path, in.label_column);
  }
  if (in.labels_path) {
    if (out.labels) throw ConfigError("give either --label-column or --labels, not both");
    const std::string& lp = *in.labels_path;
    out.labels = lp.find("idx1") != std::string::npos ? load_idx_labels(lp) : read_labels_csv(lp);
    if (out.labels->size() != out.data.rows()) {
      throw ShapeError("label file has " + std::to_string(out.labels->size()) + " rows, data has " +
                       std::to_string(out.data.rows()));
    }
  }
  return out;
}

EigenBackend backend_for(const std::string& name, std::size_t n) {
  if (name == "ql") return EigenBackend::kHouseholderQL;
  if (name == "lapack") return EigenBackend::kLapack;
  if (name == "auto") return n <= 1500 ? EigenBackend::kHouseholderQL : EigenBackend::kLapack;
  throw ConfigError("unknown eigensolver '" + name + "' (expected ql, lapack or auto)");
}

std::string backend_name(EigenBackend b) {
  return b == EigenBackend::kLapack ? "lapack" : "ql";
}

std::size_t distinct_count(const LabelVector& labels) {
  return std::set<std::int64_t>(labels.begin(), labels.end()).size();
}

std::size_t resolve_k(const std::optional<std::size_t>& k, const LabeledData& data) {
  if (k) return *k;
  if (data.labels) return distinct_count(*data.labels);
  throw ConfigError("--k is required when the input carries no labels");
}

void write_json(const std::string& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  f << j.dump(2) << '\n';
  if (!f) throw Error("failed writing '" + path + "'");
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

json hp_json(const TrainHyperparams& hp) {
  return {{"epochs", hp.epochs},           {"batch_size", hp.batch_size},
          {"learning_rate", hp.learning_rate}, {"optimizer", to_string(hp.optimizer)},
          {"seed", hp.seed}};
}

json train_report_json(const TrainReport& r) {
  return {{"loss_history", r.loss_history},
          {"final_mse", r.final_mse},
          {"final_learning_rate", r.final_learning_rate},
          {"epochs_run", r.epochs_run},
          {"rejected_epochs", r.rejected_epochs}};
}

json warnings_json(const std::vector<std::string>& w) { return json(w); }

// Hyperparameter flags shared by psc-train and bench.
struct TrainFlags {
  std::size_t p = 2;
  double rate = 1.0;
  std::optional<double> sigma;
  std::vector<std::size_t> hidden{32, 64, 32};
  std::size_t epochs = 200;
  std::size_t batch_size = 64;
  double lr = 1e-3;
  std::string optimizer = "adam";
  bool standardize = false;
  std::string eigen = "auto";
};

void add_train_options(CLI::App* cmd, TrainFlags& f) {
  cmd->add_option("--p", f.p, "embedding width")->capture_default_str();
  cmd->add_option("--rate", f.rate, "sampling rate r in (0, 1]")->capture_default_str();
  cmd->add_option("--sigma", f.sigma, "Gaussian bandwidth (default: median heuristic)");
  cmd->add_option("--hidden", f.hidden, "hidden widths, comma separated")
      ->delimiter(',')
      ->capture_default_str();
  cmd->add_option("--epochs", f.epochs)->capture_default_str();
  cmd->add_option("--batch-size", f.batch_size)->capture_default_str();
  cmd->add_option("--lr", f.lr, "learning rate")->capture_default_str();
  cmd->add_option("--optimizer", f.optimizer, "adam or sgd")->capture_default_str();
  cmd->add_flag("--standardize", f.standardize, "z-score features before use");
  cmd->add_option("--eigen", f.eigen, "eigensolver: ql, lapack or auto")->capture_default_str();
}

PscTrainConfig train_config(const TrainFlags& f, std::uint64_t seed, std::size_t n_rows) {
  PscTrainConfig c;
  c.p = f.p;
  c.sample_rate = f.rate;
  c.sigma = f.sigma;
  c.hidden = f.hidden;
  c.hp.epochs = f.epochs;
  c.hp.batch_size = f.batch_size;
  c.hp.learning_rate = f.lr;
  c.hp.optimizer = optimizer_from_string(f.optimizer);
  c.hp.seed = seed;
  c.standardize = f.standardize;
  c.eigen_backend = backend_for(f.eigen, sample_size(n_rows, f.rate));
  c.threads = numeric_threads();
  return c;
}

json train_config_json(const PscTrainConfig& c) {
  return {{"p", c.p},
          {"rate", c.sample_rate},
          {"sigma", c.sigma ? json(*c.sigma) : json(nullptr)},
          {"hidden", c.hidden},
          {"standardize", c.standardize},
          {"eigen", backend_name(c.eigen_backend)},
          {"train", hp_json(c.hp)}};
}

// ---- sc ----

struct ScFlags {
  InputSpec in;
  std::optional<std::size_t> k;
  std::optional<std::size_t> p;
  std::optional<double> sigma;
  std::uint64_t seed = 0;
  bool standardize = false;
  bool normalize_rows = false;
  std::string eigen = "auto";
  std::string out;
  std::optional<std::string> report;
};

int run_sc(const ScFlags& f, std::ostream& out) {
  const LabeledData data = load_input(f.in);
  Matrix x = f.standardize ? standardize(data.data).data : data.data;
  ScConfig config;
  config.k = resolve_k(f.k, data);
  config.p = f.p;
  config.sigma = f.sigma;
  config.seed = f.seed;
  config.normalize_rows = f.normalize_rows;
  config.eigen_backend = backend_for(f.eigen, x.rows());
  config.threads = numeric_threads();
  const auto warnings = validate(config, x.rows(), x.cols());
  for (const auto& w : warnings) out << "warning: " << w << '\n';

  const auto start = Clock::now();
  const ScResult result = spectral_cluster(x, config);
  const double secs = seconds_since(start);
  write_labels_csv(f.out, result.assignment.labels);

  if (f.report) {
    json r;
    r["method"] = "SC";
    r["rows"] = x.rows();
    r["cols"] = x.cols();
    r["config"] = {{"k", config.k},
                   {"p", config.width()},
                   {"sigma", result.sigma},
                   {"seed", config.seed},
                   {"standardize", f.standardize},
                   {"normalize_rows", config.normalize_rows},
                   {"eigen", backend_name(config.eigen_backend)}};
    r["seconds"] = secs;
    r["eigenvalues"] = result.embedding.eigenvalues;
    r["warnings"] = warnings_json(warnings);
    r["quality"] = data.labels ? to_json(evaluate(*data.labels, result.assignment.labels))
                               : json(nullptr);
    write_json(*f.report, r);
  }
  return 0;
}

// ---- psc-train ----

struct PscTrainFlags {
  InputSpec in;
  TrainFlags train;
  std::uint64_t seed = 0;
  std::string model;
  std::optional<std::string> report;
};

int run_psc_train(const PscTrainFlags& f, std::ostream&) {
  const LabeledData data = load_input(f.in);
  const PscTrainConfig config = train_config(f.train, f.seed, data.data.rows());
  const auto start = Clock::now();
  const PscTraining t = psc_train_detailed(data.data, config);
  const double secs = seconds_since(start);
  save_model(t.model, f.model);
  if (f.report) {
    json r;
    r["method"] = "PSC";
    r["rows"] = data.data.rows();
    r["cols"] = data.data.cols();
    r["config"] = train_config_json(config);
    r["sigma"] = t.model.sigma;
    r["sample_size"] = t.model.sample_size;
    r["eigenvalues"] = t.targets.eigenvalues;
    r["training"] = train_report_json(t.report);
    r["seconds"] = secs;
    write_json(*f.report, r);
  }
  return 0;
}

// ---- psc-predict ----

struct PscPredictFlags {
  std::string model;
  InputSpec in;
  std::optional<std::size_t> k;
  std::uint64_t seed = 0;
  std::string out;
  std::optional<std::string> report;
};

int run_psc_predict(const PscPredictFlags& f, std::ostream&) {
  const PscModel model = load_model(f.model);
  const LabeledData data = load_input(f.in);
  const std::size_t k = resolve_k(f.k, data);
  const auto start = Clock::now();
  const ClusterAssignment a = psc_cluster(model, data.data, k, f.seed);
  const double secs = seconds_since(start);
  write_labels_csv(f.out, a.labels);
  if (f.report) {
    json r;
    r["method"] = "PSC";
    r["rows"] = data.data.rows();
    r["config"] = {{"k", k}, {"seed", f.seed}, {"model", f.model}};
    r["seconds"] = secs;
    r["quality"] = data.labels ? to_json(evaluate(*data.labels, a.labels)) : json(nullptr);
    write_json(*f.report, r);
  }
  return 0;
}

// ---- psc-extend ----

struct PscExtendFlags {
  std::string model;
  InputSpec in;
  std::vector<std::string> batches;
  std::size_t k = 2;
  std::uint64_t seed = 0;
  std::string mode = "recluster-all";
  std::string out;
  std::optional<std::string> report;
};

int run_psc_extend(const PscExtendFlags& f, std::ostream&) {
  IncrementalSession session(load_model(f.model), incremental_mode_from_string(f.mode));
  const LabeledData base = load_input(f.in);
  std::optional<LabelVector> truth = base.labels;
  json steps = json::array();
  auto step = [&](const Matrix& batch, const std::string& source) {
    session.extend(batch, f.k, f.seed);
    steps.push_back({{"source", source},
                     {"rows", batch.rows()},
                     {"points_seen", session.points_seen()},
                     {"embed_seconds", session.last_embed_seconds()},
                     {"cluster_seconds", session.last_cluster_seconds()}});
  };
  step(base.data, f.in.path);
  for (const auto& path : f.batches) {
    InputSpec spec{path, f.in.label_column, std::nullopt};
    const LabeledData batch = load_input(spec);
    if (truth) {
      if (!batch.labels) throw ConfigError("batch '" + path + "' lacks the label column");
      truth->insert(truth->end(), batch.labels->begin(), batch.labels->end());
    }
    step(batch.data, path);
  }
  write_labels_csv(f.out, session.assignment().labels);
  if (f.report) {
    json r;
    r["method"] = "PSC";
    r["config"] = {{"k", f.k}, {"seed", f.seed}, {"mode", f.mode}, {"model", f.model}};
    r["steps"] = std::move(steps);
    r["quality"] =
        truth ? to_json(evaluate(*truth, session.assignment().labels)) : json(nullptr);
    write_json(*f.report, r);
  }
  return 0;
}

// ---- eval ----

struct EvalFlags {
  std::string truth;
  std::string pred;
  std::optional<std::string> truth_column;
  std::optional<std::string> pred_column;
  std::optional<std::string> report;
};

int run_eval(const EvalFlags& f, std::ostream& out) {
  const LabelVector y = read_labels_csv(f.truth, f.truth_column);
  const LabelVector yhat = read_labels_csv(f.pred, f.pred_column);
  const json r = to_json(evaluate(y, yhat));
  if (f.report) {
    write_json(*f.report, r);
  } else {
    out << r.dump() << '\n';
  }
  return 0;
}

// ---- gen ----

struct SynthFlags {
  std::size_t n = 1000;
  std::size_t dim = 10;
  std::size_t centers = 3;
  double r_inner = 1.0;
  double r_outer = 5.0;
  double noise = 0.05;
  double cluster_std = 1.0;
};

void add_synth_options(CLI::App* cmd, SynthFlags& f) {
  cmd->add_option("--n", f.n)->capture_default_str();
  cmd->add_option("--dim", f.dim, "blobs dimension")->capture_default_str();
  cmd->add_option("--centers", f.centers, "blobs centers")->capture_default_str();
  cmd->add_option("--r-inner", f.r_inner, "circles inner radius")->capture_default_str();
  cmd->add_option("--r-outer", f.r_outer, "circles outer radius")->capture_default_str();
  cmd->add_option("--noise", f.noise, "circles radial noise std")->capture_default_str();
  cmd->add_option("--cluster-std", f.cluster_std, "blobs spread")->capture_default_str();
}

json synth_json(const SynthFlags& f) {
  return {{"n", f.n},           {"dim", f.dim},         {"centers", f.centers},
          {"r_inner", f.r_inner}, {"r_outer", f.r_outer}, {"noise", f.noise},
          {"cluster_std", f.cluster_std}};
}

struct GenFlags {
  std::string dataset = "circles";
  SynthFlags synth;
  std::uint64_t seed = 0;
  std::string out;
};

LabeledData generate(const std::string& name, const SynthFlags& f, std::uint64_t seed) {
  if (name == "circles") return gen_circles(f.n, f.r_inner, f.r_outer, f.noise, seed);
  if (name == "blobs") return gen_blobs(f.n, f.dim, f.centers, f.cluster_std, 10.0, seed);
  throw ConfigError("unknown synthetic dataset '" + name + "' (expected circles or blobs)");
}

int run_gen(const GenFlags& f, std::ostream&) {
  const LabeledData d = generate(f.dataset, f.synth, f.seed);
  write_csv(f.out, d.data, d.labels);
  return 0;
}

// ---- bench ----

struct BenchFlags {
  std::string dataset = "circles";
  InputSpec in;
  SynthFlags synth{3000};
  std::uint64_t data_seed = 0;
  std::vector<std::string> methods{"sc", "psc"};
  std::optional<std::size_t> k;
  TrainFlags train;
  std::size_t trials = 5;
  std::uint64_t seed = 0;
  std::string report;
};

int run_bench(BenchFlags f, std::ostream& out) {
  if (f.trials == 0) throw ConfigError("--trials must be at least 1");
  LabeledData data;
  std::string name = f.dataset;
  if (!f.in.path.empty()) {
    data = load_input(f.in);
    name = f.in.path;
  } else {
    data = generate(f.dataset, f.synth, f.data_seed);
  }
  const Matrix x = f.train.standardize ? standardize(data.data).data : data.data;
  const std::size_t k = resolve_k(f.k, data);

  BenchReport report;
  report.dataset = name;
  report.fingerprint = fingerprint(data.data);
  report.trials = f.trials;
  report.config = {{"dataset", name},
                   {"rows", x.rows()},
                   {"cols", x.cols()},
                   {"generator", f.in.path.empty() ? synth_json(f.synth) : json(nullptr)},
                   {"data_seed", f.data_seed},
                   {"k", k},
                   {"methods", f.methods},
                   {"trials", f.trials},
                   {"seed", f.seed},
                   {"trial_seeds", "seed + trial index"},
                   {"threads", numeric_threads()}};

  for (const auto& method : f.methods) {
    MethodReport m;
    if (method == "sc") {
      m.method = "SC";
      ScConfig config;
      config.k = k;
      config.p = f.train.p;
      config.sigma = f.train.sigma;
      config.eigen_backend = backend_for(f.train.eigen, x.rows());
      config.threads = numeric_threads();
      for (const auto& w : validate(config, x.rows(), x.cols())) out << "warning: " << w << '\n';
      std::vector<PhaseMeasurement> total;
      for (std::size_t t = 0; t < f.trials; ++t) {
        config.seed = f.seed + t;
        ScResult r;
        total.push_back(measure_phase([&] { r = spectral_cluster(x, config); }));
        if (t == 0) m.first_trial_labels = r.assignment.labels;
        if (data.labels) m.quality_trials.push_back(evaluate(*data.labels, r.assignment.labels));
      }
      m.phases.emplace_back("total", summarize(total));
      report.config["sc"] = {{"p", config.width()},
                             {"sigma", config.sigma ? json(*config.sigma) : json(nullptr)},
                             {"eigen", backend_name(config.eigen_backend)}};
    } else if (method == "psc") {
      m.method = "PSC";
      // Standardization is already applied to x above.
      TrainFlags tf = f.train;
      tf.standardize = false;
      std::vector<PhaseMeasurement> training, inference;
      PscTrainConfig config;
      for (std::size_t t = 0; t < f.trials; ++t) {
        config = train_config(tf, f.seed + t, x.rows());
        PscModel model;
        training.push_back(measure_phase([&] { model = psc_train(x, config); }));
        ClusterAssignment a;
        inference.push_back(measure_phase([&] { a = psc_cluster(model, x, k, f.seed + t); }));
        if (t == 0) m.first_trial_labels = a.labels;
        if (data.labels) m.quality_trials.push_back(evaluate(*data.labels, a.labels));
      }
      m.phases.emplace_back("training", summarize(training));
      m.phases.emplace_back("inference", summarize(inference));
      json pc = train_config_json(config);
      pc["standardize"] = f.train.standardize;
      pc["train"].erase("seed");
      report.config["psc"] = std::move(pc);
    } else {
      throw ConfigError("unknown method '" + method + "' (expected sc or psc)");
    }
    if (!m.quality_trials.empty()) m.quality = trial_summary(m.quality_trials);
    report.methods.push_back(std::move(m));
  }
  write_json(f.report, to_json(report));
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral and parametric spectral clustering", "psc"};
  app.require_subcommand(1);
  std::function<int()> action;

  ScFlags sc;
  auto* sc_cmd = app.add_subcommand("sc", "spectral clustering of a dataset");
  add_input_options(sc_cmd, sc.in);
  sc_cmd->add_option("--k", sc.k, "number of clusters (default: distinct labels)");
  sc_cmd->add_option("--p", sc.p, "embedding width (default: k)");
  sc_cmd->add_option("--sigma", sc.sigma, "Gaussian bandwidth (default: median heuristic)");
  sc_cmd->add_option("--seed", sc.seed)->capture_default_str();
  sc_cmd->add_flag("--standardize", sc.standardize, "z-score features before use");
  sc_cmd->add_flag("--normalize-rows", sc.normalize_rows, "unit-normalize embedding rows");
  sc_cmd->add_option("--eigen", sc.eigen, "eigensolver: ql, lapack or auto")
      ->capture_default_str();
  sc_cmd->add_option("--out", sc.out, "label CSV to write")->required();
  sc_cmd->add_option("--report", sc.report, "JSON report to write");
  sc_cmd->callback([&] { action = [&] { return run_sc(sc, out); }; });

  PscTrainFlags pt;
  auto* pt_cmd = app.add_subcommand("psc-train", "fit the embedding regressor");
  add_input_options(pt_cmd, pt.in);
  add_train_options(pt_cmd, pt.train);
  pt_cmd->add_option("--seed", pt.seed)->capture_default_str();
  pt_cmd->add_option("--model", pt.model, "model file to write")->required();
  pt_cmd->add_option("--report", pt.report, "JSON report to write");
  pt_cmd->callback([&] { action = [&] { return run_psc_train(pt, out); }; });

  PscPredictFlags pp;
  auto* pp_cmd = app.add_subcommand("psc-predict", "embed with a trained model and cluster");
  pp_cmd->add_option("--model", pp.model)->required();
  add_input_options(pp_cmd, pp.in);
  pp_cmd->add_option("--k", pp.k, "number of clusters (default: distinct labels)");
  pp_cmd->add_option("--seed", pp.seed)->capture_default_str();
  pp_cmd->add_option("--out", pp.out, "label CSV to write")->required();
  pp_cmd->add_option("--report", pp.report, "JSON report to write");
  pp_cmd->callback([&] { action = [&] { return run_psc_predict(pp, out); }; });

  PscExtendFlags pe;
  auto* pe_cmd = app.add_subcommand("psc-extend", "cluster a base set plus arriving batches");
  pe_cmd->add_option("--model", pe.model)->required();
  add_input_options(pe_cmd, pe.in);
  pe_cmd->add_option("--batch", pe.batches, "CSV batch, repeatable, applied in order");
  pe_cmd->add_option("--k", pe.k)->required();
  pe_cmd->add_option("--seed", pe.seed)->capture_default_str();
  pe_cmd->add_option("--mode", pe.mode, "recluster-all or assign-to-centroids")
      ->capture_default_str();
  pe_cmd->add_option("--out", pe.out, "labels of every point seen")->required();
  pe_cmd->add_option("--report", pe.report, "JSON report to write");
  pe_cmd->callback([&] { action = [&] { return run_psc_extend(pe, out); }; });

  EvalFlags ev;
  auto* ev_cmd = app.add_subcommand("eval", "score predicted labels against ground truth");
  ev_cmd->add_option("--truth", ev.truth, "ground-truth label CSV")->required();
  ev_cmd->add_option("--pred", ev.pred, "predicted label CSV")->required();
  ev_cmd->add_option("--truth-column", ev.truth_column);
  ev_cmd->add_option("--pred-column", ev.pred_column);
  ev_cmd->add_option("--report", ev.report, "JSON file (default: stdout)");
  ev_cmd->callback([&] { action = [&] { return run_eval(ev, out); }; });

  BenchFlags bf;
  auto* bench_cmd = app.add_subcommand("bench", "repeated timed, memory-probed trials");
  bench_cmd->add_option("--dataset", bf.dataset, "circles or blobs")->capture_default_str();
  add_input_options(bench_cmd, bf.in, false);
  add_synth_options(bench_cmd, bf.synth);
  bench_cmd->add_option("--data-seed", bf.data_seed)->capture_default_str();
  bench_cmd->add_option("--methods", bf.methods, "comma separated: sc, psc")
      ->delimiter(',')
      ->capture_default_str();
  bench_cmd->add_option("--k", bf.k, "number of clusters (default: distinct labels)");
  add_train_options(bench_cmd, bf.train);
  bench_cmd->add_option("--trials", bf.trials)->capture_default_str();
  bench_cmd->add_option("--seed", bf.seed, "seed of the first trial")->capture_default_str();
  bench_cmd->add_option("--report", bf.report, "JSON report to write")->required();
  bench_cmd->callback([&] { action = [&] { return run_bench(bf, out); }; });

  GenFlags gf;
  auto* gen_cmd = app.add_subcommand("gen", "write a synthetic labeled dataset");
  gen_cmd->add_option("--dataset", gf.dataset, "circles or blobs")->capture_default_str();
  add_synth_options(gen_cmd, gf.synth);
  gen_cmd->add_option("--seed", gf.seed)->capture_default_str();
  gen_cmd->add_option("--out", gf.out, "CSV to write")->required();
  gen_cmd->callback([&] { action = [&] { return run_gen(gf, out); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "psc: " << e.what() << '\n';
    return 2;
  }

  try {
    apply_thread_policy();
    return action();
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "psc: error: " << msg << '\n';
    return 1;
  }
}

}  // namespace psc::cli
