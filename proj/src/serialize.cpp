// SPDX-License-Identifier: Apache-2.0
#include "oodkit/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

namespace oodkit {

using nlohmann::json;

namespace {

// Round-trip-exact formatting for artifact files that feed recomputation.
std::string full_precision(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Fixed-width formatting for human-facing report cells.
std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

double parse_score(const std::string& text) {
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  return std::stod(text);
}

}  // namespace

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path().empty()
                                          ? "."
                                          : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoFailure("write failed for '" + path.string() + "'");
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json_file(const std::filesystem::path& path) {
  return json::parse(read_text_file(path));
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

json scenario_to_json(const OODScenario& scenario) {
  const auto& domain = scenario.domain();
  json j;
  j["points"] = domain->ids();
  if (domain->has_coordinates()) {
    json coords = json::array();
    for (std::size_t x = 0; x < domain->size(); ++x) {
      const auto c = domain->coords(x);
      coords.push_back(std::vector<double>(c.begin(), c.end()));
    }
    j["coordinates"] = std::move(coords);
  }
  j["K"] = scenario.num_classes();
  j["joint"] = scenario.in_dist().joint_matrix();
  j["out_mass"] = std::vector<double>(scenario.out_dist().masses().begin(),
                                      scenario.out_dist().masses().end());
  j["prior_in"] = scenario.prior_in();
  return j;
}

OODScenario scenario_from_json(const json& j) {
  for (const char* key : {"points", "K", "joint", "out_mass", "prior_in"}) {
    if (!j.contains(key)) {
      throw InvalidParams(std::string("scenario file missing field '") + key +
                          "'");
    }
  }
  auto ids = j["points"].get<std::vector<std::string>>();
  DomainPtr domain;
  if (j.contains("coordinates")) {
    const auto& coords_json = j["coordinates"];
    if (coords_json.size() != ids.size()) {
      throw InvalidParams("scenario file: coordinates size mismatch");
    }
    std::size_t dim = coords_json.empty() ? 0 : coords_json[0].size();
    std::vector<double> coords;
    coords.reserve(ids.size() * dim);
    for (const auto& row : coords_json) {
      if (row.size() != dim) {
        throw InvalidParams("scenario file: ragged coordinates");
      }
      for (const auto& v : row) coords.push_back(v.get<double>());
    }
    domain = std::make_shared<DiscreteDomain>(std::move(ids), std::move(coords),
                                              dim);
  } else {
    domain = std::make_shared<DiscreteDomain>(std::move(ids));
  }
  const auto k = j["K"].get<std::size_t>();
  auto joint = j["joint"].get<std::vector<double>>();
  auto out_mass = j["out_mass"].get<std::vector<double>>();
  return OODScenario(LabeledInDistribution(domain, k, std::move(joint)),
                     FiniteDistribution(domain, std::move(out_mass)),
                     j["prior_in"].get<double>());
}

void save_scenario(const OODScenario& scenario,
                   const std::filesystem::path& path) {
  write_json_file(path, scenario_to_json(scenario));
}

OODScenario load_scenario(const std::filesystem::path& path) {
  return scenario_from_json(read_json_file(path));
}

FiniteDistribution load_out_distribution(const std::filesystem::path& path,
                                         const DomainPtr& domain) {
  const json j = read_json_file(path);
  if (!j.contains("out_mass")) {
    throw InvalidParams("out-distribution file missing 'out_mass'");
  }
  return FiniteDistribution(domain, j["out_mass"].get<std::vector<double>>());
}

void save_scores_csv(const ScoreVector& scores,
                     const std::filesystem::path& path) {
  std::string text = "point_id,score\n";
  for (std::size_t x = 0; x < scores.size(); ++x) {
    text += scores.domain()->id(x);
    text += ',';
    text += full_precision(scores.value(x));
    text += '\n';
  }
  write_text_file(path, text);
}

ScoreVector load_scores_csv(const std::filesystem::path& path,
                            const DomainPtr& domain) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line)) throw IoFailure("empty score file");
  std::vector<double> values(domain->size(),
                             std::numeric_limits<double>::quiet_NaN());
  std::vector<bool> seen(domain->size(), false);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw IoFailure("malformed score row: '" + line + "'");
    }
    const std::size_t x = domain->index_of(line.substr(0, comma));
    values[x] = parse_score(line.substr(comma + 1));
    seen[x] = true;
  }
  for (std::size_t x = 0; x < domain->size(); ++x) {
    if (!seen[x]) {
      throw IoFailure("score file misses point '" + domain->id(x) + "'");
    }
  }
  return ScoreVector(domain, std::move(values));
}

void save_table_csv(const PredictiveTable& table,
                    const std::filesystem::path& path) {
  std::string text = "point_id";
  for (std::size_t c = 0; c < table.width(); ++c) {
    text += ",p" + std::to_string(c);
  }
  text += '\n';
  for (std::size_t x = 0; x < table.size(); ++x) {
    text += table.domain()->id(x);
    if (table.is_defined(x)) {
      for (double v : table.row(x)) {
        text += ',';
        text += full_precision(v);
      }
    } else {
      for (std::size_t c = 0; c < table.width(); ++c) text += ",absent";
    }
    text += '\n';
  }
  write_text_file(path, text);
}

std::string report_to_csv(const MetricReport& report) {
  const bool with_acc = report.has_accuracy();
  const bool with_means = report.has_means();
  std::string text = "model,score";
  if (with_acc) text += ",acc";
  if (with_means) text += ",mean_auc,mean_fpr";
  for (const auto& col : report.columns) {
    text += ",auc:" + col + ",fpr:" + col;
  }
  text += '\n';
  for (const auto& row : report.rows) {
    text += row.method + "," + row.score;
    if (with_acc) {
      text += ',';
      text += row.accuracy ? fixed6(*row.accuracy) : "";
    }
    if (with_means) {
      text += ',';
      text += row.mean_auc ? fixed6(*row.mean_auc) : "";
      text += ',';
      text += row.mean_fpr ? fixed6(*row.mean_fpr) : "";
    }
    for (const auto& cell : row.cells) {
      if (cell) {
        text += ',' + fixed6(cell->auc) + ',' + fixed6(cell->fpr_at_tpr);
      } else {
        text += ",,";
      }
    }
    text += '\n';
  }
  return text;
}

json report_to_json(const MetricReport& report) {
  json j;
  j["tpr_level"] = report.tpr_level;
  json columns = json::array();
  for (std::size_t c = 0; c < report.columns.size(); ++c) {
    columns.push_back(
        {{"name", report.columns[c]}, {"training", bool(report.training_out[c])}});
  }
  j["columns"] = std::move(columns);
  json rows = json::array();
  for (const auto& row : report.rows) {
    json r;
    r["method"] = row.method;
    r["score"] = row.score;
    if (row.accuracy) r["accuracy"] = *row.accuracy;
    if (row.mean_auc) r["mean_auc"] = *row.mean_auc;
    if (row.mean_fpr) r["mean_fpr"] = *row.mean_fpr;
    json cells = json::array();
    for (const auto& cell : row.cells) {
      if (cell) {
        cells.push_back({{"auc", cell->auc},
                         {"fpr_at_tpr", cell->fpr_at_tpr},
                         {"tpr_level", cell->tpr_level}});
      } else {
        cells.push_back(nullptr);
      }
    }
    r["cells"] = std::move(cells);
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  return j;
}

MetricReport report_from_json(const json& j) {
  MetricReport report;
  report.tpr_level = j["tpr_level"].get<double>();
  for (const auto& col : j["columns"]) {
    report.columns.push_back(col["name"].get<std::string>());
    report.training_out.push_back(col["training"].get<bool>());
  }
  for (const auto& r : j["rows"]) {
    ReportRow row;
    row.method = r["method"].get<std::string>();
    row.score = r["score"].get<std::string>();
    if (r.contains("accuracy")) row.accuracy = r["accuracy"].get<double>();
    if (r.contains("mean_auc")) row.mean_auc = r["mean_auc"].get<double>();
    if (r.contains("mean_fpr")) row.mean_fpr = r["mean_fpr"].get<double>();
    for (const auto& cell : r["cells"]) {
      if (cell.is_null()) {
        row.cells.emplace_back(std::nullopt);
      } else {
        row.cells.emplace_back(MetricCell{cell["auc"].get<double>(),
                                          cell["fpr_at_tpr"].get<double>(),
                                          cell["tpr_level"].get<double>()});
      }
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

json mlp_to_json(const SharedMLP& model) {
  const auto& arch = model.architecture();
  json j;
  j["architecture"] = {{"input_dim", arch.input_dim},
                       {"hidden", arch.hidden},
                       {"num_classes", arch.num_classes},
                       {"activation", activation_name(arch.activation)}};
  j["parameters"] = model.parameters();
  return j;
}

SharedMLP mlp_from_json(const json& j) {
  const auto& a = j["architecture"];
  MlpArchitecture arch;
  arch.input_dim = a["input_dim"].get<std::size_t>();
  arch.hidden = a["hidden"].get<std::vector<std::size_t>>();
  arch.num_classes = a["num_classes"].get<std::size_t>();
  arch.activation = activation_from_name(a["activation"].get<std::string>());
  SharedMLP model(arch, 0);
  auto params = j["parameters"].get<std::vector<double>>();
  if (params.size() != model.parameter_count()) {
    throw InvalidParams("checkpoint parameter count mismatch");
  }
  model.parameters() = std::move(params);
  return model;
}

void save_trajectory_csv(const std::vector<double>& losses,
                         const std::filesystem::path& path) {
  std::string text = "step,loss\n";
  for (std::size_t i = 0; i < losses.size(); ++i) {
    text += std::to_string(i) + "," + full_precision(losses[i]) + "\n";
  }
  write_text_file(path, text);
}

}  // namespace oodkit
