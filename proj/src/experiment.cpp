// SPDX-License-Identifier: Apache-2.0
#include "oodkit/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "oodkit/oracle.hpp"
#include "oodkit/scenario_gen.hpp"
#include "oodkit/serialize.hpp"

namespace oodkit {

using nlohmann::json;

std::string run_mode_name(RunMode mode) {
  switch (mode) {
    case RunMode::Oracle: return "oracle";
    case RunMode::Tabular: return "tabular";
    case RunMode::Mlp: return "mlp";
  }
  return "?";
}

RunMode run_mode_from_name(const std::string& name) {
  if (name == "oracle") return RunMode::Oracle;
  if (name == "tabular") return RunMode::Tabular;
  if (name == "mlp") return RunMode::Mlp;
  throw InvalidParams("unknown run mode '" + name + "'");
}

json OutDistSpec::params() const { return json::parse(params_text); }

json ExperimentConfig::scenario_params() const {
  return json::parse(scenario_params_text);
}

void ExperimentConfig::validate() const {
  if (methods.empty()) throw InvalidParams("config: needs at least one method");
  if (scores.empty()) throw InvalidParams("config: needs at least one score");
  if (test_outs.empty()) {
    throw InvalidParams("config: needs at least one test out-distribution");
  }
  if (seeds.empty()) throw InvalidParams("config: needs at least one seed");
  for (double l : lambda_values) {
    if (!(l > 0.0)) throw InvalidParams("config: lambda sweep values must be > 0");
  }
  for (double q : tpr_levels) {
    if (!(q > 0.0 && q <= 1.0)) {
      throw InvalidParams("config: tpr levels must lie in (0,1]");
    }
  }
  for (const auto& m : methods) m.loss.validate();
}

namespace {

LossSpec loss_from_json(const json& j) {
  LossSpec spec;
  spec.kind = loss_kind_from_name(j.at("kind").get<std::string>());
  if (j.contains("lambda")) spec.lambda = j["lambda"].get<double>();
  if (j.contains("m_in")) spec.margins.m_in = j["m_in"].get<double>();
  if (j.contains("m_out")) spec.margins.m_out = j["m_out"].get<double>();
  if (j.contains("labeled_fraction")) {
    spec.labeled_fraction = j["labeled_fraction"].get<double>();
  }
  return spec;
}

json loss_to_json(const LossSpec& spec) {
  json j;
  j["kind"] = loss_kind_name(spec.kind);
  j["lambda"] = spec.lambda;
  if (spec.kind == LossKind::EnergyMargin) {
    j["m_in"] = spec.margins.m_in;
    j["m_out"] = spec.margins.m_out;
  }
  if (spec.labeled_fraction != 1.0) {
    j["labeled_fraction"] = spec.labeled_fraction;
  }
  return j;
}

std::string format_lambda(double lambda) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", lambda);
  return buf;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig config;
  if (j.contains("schema_version")) {
    config.schema_version = j["schema_version"].get<int>();
    if (config.schema_version != 1) {
      throw InvalidParams("unsupported config schema_version");
    }
  }
  const auto& scenario = j.at("scenario");
  config.scenario_name = scenario.at("name").get<std::string>();
  if (scenario.contains("params")) {
    config.scenario_params_text = scenario["params"].dump();
  }
  if (scenario.contains("seed")) {
    config.scenario_seed = scenario["seed"].get<std::uint64_t>();
  }

  for (const auto& m : j.at("methods")) {
    MethodSpec spec;
    spec.name = m.at("name").get<std::string>();
    spec.loss = loss_from_json(m.at("loss"));
    if (m.contains("mode")) {
      spec.mode = run_mode_from_name(m["mode"].get<std::string>());
    }
    config.methods.push_back(std::move(spec));
  }
  config.scores = j.at("scores").get<std::vector<std::string>>();
  if (j.contains("tpr_levels")) {
    config.tpr_levels = j["tpr_levels"].get<std::vector<double>>();
  }
  for (const auto& od : j.at("test_out_distributions")) {
    OutDistSpec spec;
    spec.name = od.at("name").get<std::string>();
    spec.kind = od.at("kind").get<std::string>();
    if (od.contains("params")) spec.params_text = od["params"].dump();
    spec.training = od.contains("training") && od["training"].get<bool>();
    if (spec.kind == "training" && !od.contains("training")) {
      spec.training = true;
    }
    config.test_outs.push_back(std::move(spec));
  }

  if (j.contains("run")) {
    const auto& run = j["run"];
    if (run.contains("seeds")) {
      config.seeds = run["seeds"].get<std::vector<std::uint64_t>>();
    }
    if (run.contains("steps")) config.steps = run["steps"].get<std::size_t>();
    if (run.contains("learning_rate")) {
      config.learning_rate = run["learning_rate"].get<double>();
    }
    if (run.contains("lambda_values")) {
      config.lambda_values = run["lambda_values"].get<std::vector<double>>();
    }
    if (run.contains("labeled_fraction")) {
      config.labeled_fraction = run["labeled_fraction"].get<double>();
    }
    if (run.contains("compare_shared_separate")) {
      config.compare_shared_separate =
          run["compare_shared_separate"].get<bool>();
    }
    if (run.contains("mlp")) {
      const auto& m = run["mlp"];
      if (m.contains("hidden")) {
        config.mlp_arch.hidden = m["hidden"].get<std::vector<std::size_t>>();
      }
      if (m.contains("activation")) {
        config.mlp_arch.activation =
            activation_from_name(m["activation"].get<std::string>());
      }
      if (m.contains("epochs")) {
        config.mlp_options.epochs = m["epochs"].get<std::size_t>();
      }
      if (m.contains("steps_per_epoch")) {
        config.mlp_options.steps_per_epoch =
            m["steps_per_epoch"].get<std::size_t>();
      }
      if (m.contains("batch_in")) {
        config.mlp_options.batch_in = m["batch_in"].get<std::size_t>();
      }
      if (m.contains("batch_out")) {
        config.mlp_options.batch_out = m["batch_out"].get<std::size_t>();
      }
      if (m.contains("learning_rate")) {
        config.mlp_options.learning_rate = m["learning_rate"].get<double>();
      }
      if (m.contains("momentum")) {
        config.mlp_options.momentum = m["momentum"].get<double>();
      }
      if (m.contains("cosine_decay")) {
        config.mlp_options.cosine_decay = m["cosine_decay"].get<bool>();
      }
    }
  }
  if (j.contains("output")) {
    const auto& out = j["output"];
    if (out.contains("dir")) config.output_dir = out["dir"].get<std::string>();
    if (out.contains("format")) {
      config.format = out["format"].get<std::string>();
    }
    if (out.contains("jobs")) config.jobs = out["jobs"].get<int>();
  }
  config.validate();
  return config;
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
  return from_json(read_json_file(path));
}

json ExperimentConfig::to_json() const {
  json j;
  j["schema_version"] = schema_version;
  j["scenario"] = {{"name", scenario_name},
                   {"params", scenario_params()},
                   {"seed", scenario_seed}};
  json methods_json = json::array();
  for (const auto& m : methods) {
    methods_json.push_back({{"name", m.name},
                            {"loss", loss_to_json(m.loss)},
                            {"mode", run_mode_name(m.mode)}});
  }
  j["methods"] = std::move(methods_json);
  j["scores"] = scores;
  j["tpr_levels"] = tpr_levels;
  json outs = json::array();
  for (const auto& od : test_outs) {
    outs.push_back({{"name", od.name},
                    {"kind", od.kind},
                    {"params", od.params()},
                    {"training", od.training}});
  }
  j["test_out_distributions"] = std::move(outs);
  j["run"] = {{"seeds", seeds},
              {"steps", steps},
              {"learning_rate", learning_rate},
              {"lambda_values", lambda_values},
              {"labeled_fraction", labeled_fraction},
              {"compare_shared_separate", compare_shared_separate},
              {"mlp",
               {{"hidden", mlp_arch.hidden},
                {"activation", activation_name(mlp_arch.activation)},
                {"epochs", mlp_options.epochs},
                {"steps_per_epoch", mlp_options.steps_per_epoch},
                {"batch_in", mlp_options.batch_in},
                {"batch_out", mlp_options.batch_out},
                {"learning_rate", mlp_options.learning_rate},
                {"momentum", mlp_options.momentum},
                {"cosine_decay", mlp_options.cosine_decay}}}};
  j["output"] = {{"dir", output_dir}, {"format", format}, {"jobs", jobs}};
  return j;
}

void emit_report(const MetricReport& report, ReportFormat format,
                 const std::filesystem::path& path) {
  if (format == ReportFormat::Csv) {
    write_text_file(path, report_to_csv(report));
  } else {
    write_json_file(path, report_to_json(report));
  }
}

namespace {

Method method_for_kind(LossKind kind) {
  switch (kind) {
    case LossKind::BinaryBalanced: return Method::Binary;
    case LossKind::ClassifierCE:
    case LossKind::ConfidenceOE: return Method::OE;
    case LossKind::BackgroundClass: return Method::BGC;
    case LossKind::EnergyMargin: return Method::Energy;
    case LossKind::SharedCombo: return Method::SharedCombo;
  }
  throw InvalidParams("method_for_kind: bad kind");
}

bool kind_has_classifier(LossKind kind) {
  return kind != LossKind::BinaryBalanced;
}

// One (method x seed x lambda) training/evaluation cell.
struct Cell {
  MethodSpec method;
  std::uint64_t seed = 0;
  std::string row_name;
};

struct CellResult {
  std::vector<std::pair<std::string, ScoreVector>> scores;  // requested order
  std::optional<double> accuracy;
  std::vector<double> trajectory;
  std::optional<json> checkpoint;
};

CellResult run_cell(const ExperimentConfig& config, const OODScenario& scenario,
                    const Cell& cell) {
  CellResult result;
  std::map<std::string, ScoreVector> named;
  const LossSpec& spec = cell.method.loss;

  switch (cell.method.mode) {
    case RunMode::Oracle: {
      std::optional<EnergyMargins> margins;
      if (spec.kind == LossKind::EnergyMargin) margins = spec.margins;
      named = oracle_scores(scenario, method_for_kind(spec.kind), margins);
      if (kind_has_classifier(spec.kind)) {
        result.accuracy = bayes_accuracy(scenario);
      }
      break;
    }
    case RunMode::Tabular: {
      MinimizeOptions options;
      options.steps = config.steps;
      options.learning_rate = config.learning_rate;
      options.seed = cell.seed;
      auto minimized = tabular_minimize(scenario, spec, options);
      named = model_scores(minimized.logits, spec, scenario.num_classes());
      if (kind_has_classifier(spec.kind)) {
        result.accuracy = population_accuracy(
            scenario,
            class_probs_from_logits(minimized.logits, scenario.num_classes()));
      }
      result.trajectory = std::move(minimized.loss_trajectory);
      break;
    }
    case RunMode::Mlp: {
      MlpArchitecture arch = config.mlp_arch;
      arch.input_dim = scenario.domain()->coord_dim();
      arch.num_classes = scenario.num_classes();
      MlpTrainOptions options = config.mlp_options;
      options.seed = cell.seed;
      auto trained = mlp_train(scenario, arch, spec, options);
      named = mlp_scores(trained.model, scenario.domain(), spec);
      if (kind_has_classifier(spec.kind)) {
        const auto table = mlp_logit_table(trained.model, scenario.domain(), spec);
        result.accuracy = population_accuracy(
            scenario, class_probs_from_logits(table, scenario.num_classes()));
      }
      result.trajectory = std::move(trained.loss_trajectory);
      result.checkpoint = mlp_to_json(trained.model);
      break;
    }
  }

  for (const auto& want : config.scores) {
    auto it = named.find(want);
    if (it != named.end()) {
      result.scores.emplace_back(want, it->second);
    }
  }
  if (result.scores.empty()) {
    throw InvalidParams("method '" + cell.method.name +
                        "' emits none of the requested scores");
  }
  return result;
}

void run_cells(const ExperimentConfig& config, const OODScenario& scenario,
               const std::vector<Cell>& cells,
               std::vector<std::optional<CellResult>>& results,
               std::vector<RunFailure>& failures) {
  results.assign(cells.size(), std::nullopt);
  std::mutex failure_mutex;
  std::atomic<std::size_t> next{0};
  const int jobs = std::max(1, std::min<int>(config.jobs,
                                             static_cast<int>(cells.size())));

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      try {
        results[i] = run_cell(config, scenario, cells[i]);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        failures.push_back(RunFailure{cells[i].row_name, cells[i].seed,
                                      cells[i].method.loss.lambda, e.what()});
      }
    }
  };

  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
}

std::vector<Cell> expand_cells(const ExperimentConfig& config) {
  std::vector<double> lambdas = config.lambda_values;
  std::vector<Cell> cells;
  for (const auto& method : config.methods) {
    const std::vector<double> method_lambdas =
        lambdas.empty() ? std::vector<double>{method.loss.lambda} : lambdas;
    for (double lambda : method_lambdas) {
      for (std::uint64_t seed : config.seeds) {
        Cell cell;
        cell.method = method;
        cell.method.loss.lambda = lambda;
        if (config.labeled_fraction != 1.0) {
          cell.method.loss.labeled_fraction = config.labeled_fraction;
        }
        cell.seed = seed;
        cell.row_name = method.name;
        if (method_lambdas.size() > 1) {
          cell.row_name += "_lam" + format_lambda(lambda);
        }
        if (config.seeds.size() > 1) {
          cell.row_name += "_seed" + std::to_string(seed);
        }
        cells.push_back(std::move(cell));
      }
    }
  }
  return cells;
}

std::vector<TestOutDist> make_columns(const ExperimentConfig& config,
                                      const OODScenario& scenario) {
  std::vector<TestOutDist> columns;
  for (const auto& spec : config.test_outs) {
    if (spec.kind == "training") {
      columns.push_back(TestOutDist{spec.name, scenario.out_dist(), spec.training});
    } else {
      columns.push_back(TestOutDist{
          spec.name,
          generate_out_distribution(spec.kind, spec.params(), scenario.domain()),
          spec.training});
    }
  }
  return columns;
}

std::filesystem::path report_path(const std::filesystem::path& out_dir,
                                  double q, bool csv) {
  const int percent = static_cast<int>(std::lround(q * 100.0));
  return out_dir / ("report_q" + std::to_string(percent) +
                    (csv ? ".csv" : ".json"));
}

ExperimentResult assemble_and_emit(const ExperimentConfig& config,
                                   const OODScenario& scenario,
                                   const std::vector<Cell>& cells,
                                   std::vector<std::optional<CellResult>>& results,
                                   std::vector<RunFailure> failures,
                                   const std::filesystem::path& out_dir,
                                   bool persist_artifacts) {
  const auto columns = make_columns(config, scenario);
  const auto p_in = scenario.in_dist().marginal_distribution();

  std::vector<ScoredMethod> rows;
  json rows_manifest = json::array();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!results[i]) continue;
    const auto& cell = cells[i];
    auto& result = *results[i];
    for (auto& [score_name, scores] : result.scores) {
      rows.push_back(ScoredMethod{cell.row_name, score_name, scores,
                                  result.accuracy});
      if (persist_artifacts) {
        const std::string file =
            "scores/" + cell.row_name + "_" + score_name + ".csv";
        save_scores_csv(scores, out_dir / file);
        json entry = {{"method", cell.row_name},
                      {"score", score_name},
                      {"file", file}};
        if (result.accuracy) entry["accuracy"] = *result.accuracy;
        rows_manifest.push_back(std::move(entry));
      }
    }
    if (persist_artifacts && !result.trajectory.empty()) {
      save_trajectory_csv(result.trajectory,
                          out_dir / ("trajectories/" + cell.row_name + ".csv"));
    }
    if (persist_artifacts && result.checkpoint) {
      write_json_file(out_dir / ("checkpoints/" + cell.row_name + ".json"),
                      *result.checkpoint);
    }
  }
  if (rows.empty()) {
    throw Error(failures.empty() ? "experiment produced no rows"
                                 : "all cells failed: " + failures[0].error);
  }
  if (persist_artifacts) {
    write_json_file(out_dir / "rows.json", rows_manifest);
  }

  ExperimentResult out;
  out.failures = std::move(failures);
  const bool want_csv = config.format == "csv" || config.format == "both";
  const bool want_json = config.format == "json" || config.format == "both";
  for (double q : config.tpr_levels) {
    MetricReport report = build_report(p_in, columns, rows, q);
    if (want_csv) {
      const auto path = report_path(out_dir, q, true);
      emit_report(report, ReportFormat::Csv, path);
      out.report_files.push_back(path);
    }
    if (want_json) {
      const auto path = report_path(out_dir, q, false);
      emit_report(report, ReportFormat::Json, path);
      out.report_files.push_back(path);
    }
    out.reports.push_back(std::move(report));
  }

  if (!out.failures.empty()) {
    json manifest = json::array();
    for (const auto& f : out.failures) {
      manifest.push_back({{"method", f.method},
                          {"seed", f.seed},
                          {"lambda", f.lambda},
                          {"error", f.error}});
    }
    const auto path = out_dir / "failure_manifest.json";
    write_json_file(path, manifest);
    out.failure_manifest = path;
  }
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::filesystem::path& out_dir) {
  config.validate();
  OODScenario scenario = generate_scenario(
      config.scenario_name, config.scenario_params(), config.scenario_seed);
  if (!scenario.full_mixture_support()) {
    throw InvalidParams(
        "run_experiment: training scenario must cover the whole domain "
        "(points with p(x) = 0 leave scores undefined)");
  }
  std::filesystem::create_directories(out_dir);
  save_scenario(scenario, out_dir / "scenario.json");

  const auto cells = expand_cells(config);
  std::vector<std::optional<CellResult>> results;
  std::vector<RunFailure> failures;
  run_cells(config, scenario, cells, results, failures);
  return assemble_and_emit(config, scenario, cells, results,
                           std::move(failures), out_dir, true);
}

ExperimentResult rebuild_report_from_artifacts(
    const ExperimentConfig& config, const std::filesystem::path& out_dir) {
  const OODScenario scenario = load_scenario(out_dir / "scenario.json");
  const auto columns = make_columns(config, scenario);
  const auto p_in = scenario.in_dist().marginal_distribution();
  const json manifest = read_json_file(out_dir / "rows.json");

  std::vector<ScoredMethod> rows;
  for (const auto& entry : manifest) {
    ScoredMethod row{
        entry.at("method").get<std::string>(),
        entry.at("score").get<std::string>(),
        load_scores_csv(out_dir / entry.at("file").get<std::string>(),
                        scenario.domain()),
        std::nullopt};
    if (entry.contains("accuracy")) {
      row.accuracy = entry["accuracy"].get<double>();
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error("rows.json lists no artifacts");

  ExperimentResult out;
  const bool want_csv = config.format == "csv" || config.format == "both";
  const bool want_json = config.format == "json" || config.format == "both";
  for (double q : config.tpr_levels) {
    MetricReport report = build_report(p_in, columns, rows, q);
    if (want_csv) {
      const auto path = report_path(out_dir, q, true);
      emit_report(report, ReportFormat::Csv, path);
      out.report_files.push_back(path);
    }
    if (want_json) {
      const auto path = report_path(out_dir, q, false);
      emit_report(report, ReportFormat::Json, path);
      out.report_files.push_back(path);
    }
    out.reports.push_back(std::move(report));
  }
  return out;
}

std::vector<PairedReports> compare_shared_vs_separate(
    const ExperimentConfig& config, const std::filesystem::path& out_dir) {
  config.validate();
  OODScenario scenario = generate_scenario(
      config.scenario_name, config.scenario_params(), config.scenario_seed);
  if (!scenario.full_mixture_support()) {
    throw InvalidParams("compare_shared_vs_separate: scenario must cover the "
                        "whole domain");
  }
  std::filesystem::create_directories(out_dir);
  const auto columns = make_columns(config, scenario);
  const auto p_in = scenario.in_dist().marginal_distribution();
  const double q = config.tpr_levels.front();
  const std::size_t k = scenario.num_classes();
  const std::size_t n = scenario.size();

  // Which mode to train in comes from the first non-oracle method, so a
  // tabular config compares tabular models and an MLP config MLP ones.
  RunMode mode = RunMode::Tabular;
  for (const auto& m : config.methods) {
    if (m.mode == RunMode::Mlp) mode = RunMode::Mlp;
  }

  auto train_kind = [&](LossKind kind, std::uint64_t seed)
      -> std::pair<PredictiveTable, PredictiveTable> {
    LossSpec spec;
    spec.kind = kind;
    spec.labeled_fraction = config.labeled_fraction;
    TabularLogits table{nullptr, 0, {}};
    if (mode == RunMode::Mlp) {
      MlpArchitecture arch = config.mlp_arch;
      arch.input_dim = scenario.domain()->coord_dim();
      arch.num_classes = k;
      MlpTrainOptions options = config.mlp_options;
      options.seed = seed;
      auto trained = mlp_train(scenario, arch, spec, options);
      table = mlp_logit_table(trained.model, scenario.domain(), spec);
    } else {
      MinimizeOptions options;
      options.steps = config.steps;
      options.learning_rate = config.learning_rate;
      options.seed = seed;
      table = tabular_minimize(scenario, spec, options).logits;
    }
    // (class probs, disc probs); dummy class table for the binary kind.
    if (kind == LossKind::BinaryBalanced) {
      auto disc = disc_probs_from_logits(table);
      return {PredictiveTable(scenario.domain(), 1, disc.values()),
              std::move(disc)};
    }
    auto classes = class_probs_from_logits(table, k);
    auto disc = kind == LossKind::SharedCombo
                    ? disc_probs_from_logits(table)
                    : PredictiveTable(scenario.domain(), 1,
                                      std::vector<double>(n, 0.0));
    return {std::move(classes), std::move(disc)};
  };

  auto combo_scores = [&](const PredictiveTable& disc,
                          const PredictiveTable& classes) {
    std::vector<double> s1(n), s2(n), s3(n);
    for (std::size_t x = 0; x < n; ++x) {
      const double p = disc.row(x)[0];
      s1[x] = p;
      s2[x] = score_s2(p, classes.row(x));
      s3[x] = score_s3(p, classes.row(x));
    }
    return std::array<ScoreVector, 3>{
        ScoreVector(scenario.domain(), std::move(s1)),
        ScoreVector(scenario.domain(), std::move(s2)),
        ScoreVector(scenario.domain(), std::move(s3))};
  };

  auto msp_scores = [&](const PredictiveTable& classes) {
    std::vector<double> msp(n);
    for (std::size_t x = 0; x < n; ++x) msp[x] = score_msp(classes.row(x));
    return ScoreVector(scenario.domain(), std::move(msp));
  };

  std::vector<PairedReports> out;
  for (std::uint64_t seed : config.seeds) {
    auto [shared_classes, shared_disc] =
        train_kind(LossKind::SharedCombo, seed);
    auto [sep_classes, unused] = train_kind(LossKind::ClassifierCE, seed);
    auto [dummy, sep_disc] = train_kind(LossKind::BinaryBalanced, seed);

    const auto shared_combo = combo_scores(shared_disc, shared_classes);
    const auto sep_combo = combo_scores(sep_disc, sep_classes);
    const auto plain_shared = combo_scores(shared_disc, sep_classes);

    const double shared_acc = population_accuracy(scenario, shared_classes);
    const double sep_acc = population_accuracy(scenario, sep_classes);

    std::vector<ScoredMethod> shared_rows = {
        {"shared_bindisc", "s1", shared_combo[0], std::nullopt},
        {"shared_classi", "msp", msp_scores(shared_classes), shared_acc},
        {"shared_combi", "s2", shared_combo[1], shared_acc},
        {"shared_combi", "s3", shared_combo[2], shared_acc},
        {"plain_x_shared_disc", "s2", plain_shared[1], sep_acc},
        {"plain_x_shared_disc", "s3", plain_shared[2], sep_acc},
    };
    std::vector<ScoredMethod> separate_rows = {
        {"sep_bindisc", "s1", sep_combo[0], std::nullopt},
        {"sep_classi", "msp", msp_scores(sep_classes), sep_acc},
        {"sep_combi", "s2", sep_combo[1], sep_acc},
        {"sep_combi", "s3", sep_combo[2], sep_acc},
    };

    PairedReports paired;
    paired.seed = seed;
    paired.shared = build_report(p_in, columns, shared_rows, q);
    paired.separate = build_report(p_in, columns, separate_rows, q);

    // Delta rows: shared minus separate, matched by score key.
    paired.delta = paired.shared;
    paired.delta.rows.clear();
    const std::size_t pairs[][2] = {{0, 0}, {1, 1}, {2, 2}, {3, 3}};
    for (const auto& pair : pairs) {
      const auto& s = paired.shared.rows[pair[0]];
      const auto& t = paired.separate.rows[pair[1]];
      ReportRow d;
      d.method = "delta_" + s.method + "_vs_" + t.method;
      d.score = s.score;
      if (s.accuracy && t.accuracy) d.accuracy = *s.accuracy - *t.accuracy;
      for (std::size_t c = 0; c < s.cells.size(); ++c) {
        MetricCell cell;
        cell.auc = s.cells[c]->auc - t.cells[c]->auc;
        cell.fpr_at_tpr = s.cells[c]->fpr_at_tpr - t.cells[c]->fpr_at_tpr;
        cell.tpr_level = q;
        d.cells.emplace_back(cell);
      }
      if (s.mean_auc && t.mean_auc) d.mean_auc = *s.mean_auc - *t.mean_auc;
      if (s.mean_fpr && t.mean_fpr) d.mean_fpr = *s.mean_fpr - *t.mean_fpr;
      paired.delta.rows.push_back(std::move(d));
    }

    const std::string suffix = "_seed" + std::to_string(seed);
    const bool csv = config.format != "json";
    const ReportFormat fmt = csv ? ReportFormat::Csv : ReportFormat::Json;
    const char* ext = csv ? ".csv" : ".json";
    emit_report(paired.shared, fmt, out_dir / ("shared" + suffix + ext));
    emit_report(paired.separate, fmt, out_dir / ("separate" + suffix + ext));
    emit_report(paired.delta, fmt, out_dir / ("delta" + suffix + ext));
    out.push_back(std::move(paired));
  }
  return out;
}

}  // namespace oodkit
