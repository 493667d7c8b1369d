// Command-line front end; talks to the library exclusively through the C
// API in gaplm/gaplm.h.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gaplm/gaplm.h"
#include "json.hpp"

using nlohmann::json;

namespace {

int report_error_and_exit_code() {
  json err{{"code", gaplm_last_error_name()},
           {"message", gaplm_last_error_message()},
           {"context", json::parse(gaplm_last_error_context_json())}};
  std::cerr << err.dump() << "\n";
  return gaplm_last_error_code();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << json{{"code", "io_error"},
                      {"message", "cannot write '" + path + "'"},
                      {"context", json::object()}}
                     .dump()
              << "\n";
    std::exit(static_cast<int>(GAPLM_E_IO));
  }
  out << content;
}

std::vector<std::string> split_csv_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

struct FitArgs {
  std::string data_path;
  std::string config_path;
  std::string out_dir = ".";
  std::string link;
  std::string correlation;
  std::string projection;
  std::string cluster_col;
  std::string response_col;
  std::string linear_cols;
  std::string additive_cols;
  double alpha = 0.0;
  bool alpha_set = false;
  double level = 0.0;
  int degree = 0;
  int step1 = 0;
  int step2 = 0;
  int grid_points = 0;
  int threads = 0;
  bool band = false;
  bool rescale = false;
};

int run_fit(const FitArgs& args) {
  json columns = json::object();
  json model = json::object();
  if (!args.config_path.empty()) {
    std::ifstream in(args.config_path);
    if (!in) {
      std::cerr << json{{"code", "io_error"},
                        {"message", "cannot open '" + args.config_path + "'"},
                        {"context", json::object()}}
                       .dump()
                << "\n";
      return static_cast<int>(GAPLM_E_IO);
    }
    json file_cfg;
    try {
      in >> file_cfg;
    } catch (const std::exception& e) {
      std::cerr << json{{"code", "parse_error"},
                        {"message", std::string("bad config JSON: ") + e.what()},
                        {"context", json::object()}}
                       .dump()
                << "\n";
      return static_cast<int>(GAPLM_E_PARSE);
    }
    if (file_cfg.contains("columns")) columns = file_cfg.at("columns");
    for (auto& [key, value] : file_cfg.items())
      if (key != "columns") model[key] = value;
  }

  if (!args.cluster_col.empty()) columns["cluster"] = args.cluster_col;
  if (!args.response_col.empty()) columns["response"] = args.response_col;
  if (!args.linear_cols.empty())
    columns["linear"] = split_csv_list(args.linear_cols);
  if (!args.additive_cols.empty())
    columns["additive"] = split_csv_list(args.additive_cols);
  if (args.rescale) columns["rescale"] = true;

  if (!args.link.empty()) model["link"] = args.link;
  if (!args.correlation.empty()) model["correlation"] = args.correlation;
  if (args.alpha_set) model["alpha"] = args.alpha;
  if (args.level > 0.0) model["level"] = args.level;
  if (args.degree > 0) model["degree"] = args.degree;
  if (args.step1 > 0) model["step1_knots"] = args.step1;
  if (args.step2 > 0) model["step2_knots"] = args.step2;
  if (args.grid_points > 0) model["grid_points"] = args.grid_points;
  if (args.threads > 0) model["threads"] = args.threads;
  if (args.band) model["band"] = true;
  if (!args.projection.empty()) model["projection"] = args.projection;

  gaplm_dataset* dataset = nullptr;
  if (gaplm_dataset_load_csv(args.data_path.c_str(), columns.dump().c_str(),
                             &dataset) != GAPLM_OK)
    return report_error_and_exit_code();

  gaplm_fit* fit = nullptr;
  if (gaplm_fit_run(dataset, model.dump().c_str(), &fit) != GAPLM_OK) {
    gaplm_dataset_free(dataset);
    return report_error_and_exit_code();
  }

  std::filesystem::create_directories(args.out_dir);

  char* report = nullptr;
  if (gaplm_fit_report_json(fit, &report) != GAPLM_OK) {
    gaplm_fit_free(fit);
    gaplm_dataset_free(dataset);
    return report_error_and_exit_code();
  }
  write_file(args.out_dir + "/report.json", report);
  gaplm_string_free(report);

  const int n_components = gaplm_fit_num_components(fit);
  for (int l = 1; l <= n_components; ++l) {
    char* curve = nullptr;
    if (gaplm_fit_curve_csv(fit, l, &curve) != GAPLM_OK) {
      gaplm_fit_free(fit);
      gaplm_dataset_free(dataset);
      return report_error_and_exit_code();
    }
    write_file(args.out_dir + "/curves_" + std::to_string(l) + ".csv", curve);
    gaplm_string_free(curve);
  }

  const int d1 = gaplm_fit_num_linear(fit);
  std::vector<double> beta(static_cast<std::size_t>(d1));
  std::vector<double> se(static_cast<std::size_t>(d1));
  gaplm_fit_beta(fit, beta.data(), d1);
  gaplm_fit_beta_se(fit, se.data(), d1);
  for (int k = 0; k < d1; ++k)
    std::printf("beta[%d] = %10.5f  (se %.5f)\n", k, beta[static_cast<std::size_t>(k)],
                se[static_cast<std::size_t>(k)]);
  std::printf("report: %s/report.json, %d curve file(s)\n", args.out_dir.c_str(),
              n_components);

  gaplm_fit_free(fit);
  gaplm_dataset_free(dataset);
  return 0;
}

struct SimArgs {
  int example = 1;
  int n = 0;
  int m = 0;
  int nsim = 0;
  std::string correlation = "ex";
  long long seed = 1;
  int threads = 0;
  double level = 0.95;
  int degree = 3;
  bool record_probe = false;
  double probe_z = 0.5;
  std::string out_dir = ".";
};

int run_simulate(const SimArgs& args) {
  json cfg{{"example", args.example}, {"correlation", args.correlation},
           {"seed", args.seed},       {"threads", args.threads},
           {"level", args.level},     {"degree", args.degree},
           {"record_probe", args.record_probe},
           {"probe_z", args.probe_z}};
  if (args.n > 0) cfg["n"] = args.n;
  if (args.m > 0) cfg["m"] = args.m;
  if (args.nsim > 0) cfg["nsim"] = args.nsim;

  char* report = nullptr;
  char* table = nullptr;
  if (gaplm_simulate_run(cfg.dump().c_str(), &report, &table) != GAPLM_OK)
    return report_error_and_exit_code();

  std::filesystem::create_directories(args.out_dir);
  write_file(args.out_dir + "/mc_report.json", report);
  write_file(args.out_dir + "/mc_table.txt", table);
  std::fputs(table, stdout);
  gaplm_string_free(report);
  gaplm_string_free(table);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-step spline GEE for generalized additive partially "
               "linear models with clustered data"};
  app.require_subcommand(1);

  FitArgs fit_args;
  CLI::App* fit = app.add_subcommand("fit", "fit a model to a CSV dataset");
  fit->add_option("--data", fit_args.data_path, "input CSV file")->required();
  fit->add_option("--config", fit_args.config_path, "JSON config file");
  fit->add_option("--out", fit_args.out_dir, "output directory");
  fit->add_option("--link", fit_args.link, "gaussian | binomial");
  fit->add_option("--correlation", fit_args.correlation, "ind | ex | ar1");
  fit->add_option("--alpha", fit_args.alpha, "fixed correlation parameter")
      ->check(CLI::Number)
      ->each([&](const std::string&) { fit_args.alpha_set = true; });
  fit->add_option("--level", fit_args.level, "confidence level");
  fit->add_option("--degree", fit_args.degree, "spline degree");
  fit->add_option("--step1-knots", fit_args.step1, "override step-I knots");
  fit->add_option("--step2-knots", fit_args.step2, "override step-II knots");
  fit->add_option("--grid-points", fit_args.grid_points, "curve grid size");
  fit->add_option("--threads", fit_args.threads,
                  "worker threads for component fits (0 = hardware)");
  fit->add_flag("--band", fit_args.band, "simultaneous bands (degree 1 only)");
  fit->add_option("--projection", fit_args.projection,
                  "weighted | unweighted");
  fit->add_option("--cluster-col", fit_args.cluster_col, "cluster id column");
  fit->add_option("--response-col", fit_args.response_col, "response column");
  fit->add_option("--linear", fit_args.linear_cols,
                  "comma-separated linear covariate columns");
  fit->add_option("--additive", fit_args.additive_cols,
                  "comma-separated additive covariate columns");
  fit->add_flag("--rescale", fit_args.rescale,
                "min-max rescale additive columns onto [0,1]");

  SimArgs sim_args;
  CLI::App* sim = app.add_subcommand("simulate", "run a Monte Carlo study");
  sim->add_option("--example", sim_args.example, "1 (continuous) or 2 (binary)")
      ->required();
  sim->add_option("--n", sim_args.n, "number of clusters");
  sim->add_option("--m", sim_args.m, "cluster size");
  sim->add_option("--nsim", sim_args.nsim, "number of replications");
  sim->add_option("--correlation", sim_args.correlation, "ind | ex | ar1");
  sim->add_option("--seed", sim_args.seed, "RNG seed");
  sim->add_option("--threads", sim_args.threads,
                  "worker threads (0 = hardware)");
  sim->add_option("--level", sim_args.level, "confidence level");
  sim->add_option("--degree", sim_args.degree, "spline degree");
  sim->add_flag("--record-probe", sim_args.record_probe,
                "record oracle values at a probe point");
  sim->add_option("--probe-z", sim_args.probe_z, "probe location");
  sim->add_option("--out", sim_args.out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  if (fit->parsed()) return run_fit(fit_args);
  return run_simulate(sim_args);
}
