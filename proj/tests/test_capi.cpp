#include <cstring>
#include <string>

#include "doctest.h"
#include "gaplm/gaplm.h"
#include "json.hpp"

namespace {

const char* kCsv =
    "cluster,y,x1,z1\n"
    "1,1.2,0.5,0.05\n"
    "1,0.3,-0.4,0.35\n"
    "1,0.9,0.9,0.55\n"
    "1,-0.2,-1.1,0.95\n"
    "2,0.8,0.2,0.15\n"
    "2,1.6,1.2,0.45\n"
    "2,-0.7,-0.9,0.65\n"
    "2,0.1,0.1,0.85\n"
    "3,0.4,0.3,0.25\n"
    "3,-0.3,-0.6,0.5\n"
    "3,1.1,0.8,0.75\n"
    "3,0.0,0.0,1.0\n"
    "4,0.6,0.4,0.1\n"
    "4,-0.5,-0.8,0.4\n"
    "4,1.3,1.0,0.6\n"
    "4,0.2,0.2,0.9\n";

const char* kColumns =
    "{\"cluster\":\"cluster\",\"response\":\"y\","
    "\"linear\":[\"x1\"],\"additive\":[\"z1\"]}";

}  // namespace

TEST_CASE("version and error state") {
  CHECK(std::strlen(gaplm_version()) > 0);

  gaplm_dataset* dataset = nullptr;
  const gaplm_status status =
      gaplm_dataset_load_csv("/nonexistent/file.csv", kColumns, &dataset);
  CHECK(status == GAPLM_E_IO);
  CHECK(gaplm_last_error_code() == GAPLM_E_IO);
  CHECK(std::string(gaplm_last_error_name()) == "io_error");
  CHECK(std::string(gaplm_last_error_message()).find("cannot open") !=
        std::string::npos);
  const auto ctx = nlohmann::json::parse(gaplm_last_error_context_json());
  CHECK(ctx.at("path") == "/nonexistent/file.csv");
}

TEST_CASE("dataset, fit and curves through the C surface") {
  gaplm_dataset* dataset = nullptr;
  REQUIRE(gaplm_dataset_parse_csv(kCsv, kColumns, &dataset) == GAPLM_OK);
  CHECK(gaplm_last_error_code() == 0);
  CHECK(gaplm_dataset_num_clusters(dataset) == 4);
  CHECK(gaplm_dataset_num_obs(dataset) == 16);

  gaplm_fit* fit = nullptr;
  const char* config =
      "{\"link\":\"gaussian\",\"correlation\":\"ind\",\"degree\":1,"
      "\"step1_knots\":2,\"step2_knots\":2,\"grid_points\":11}";
  REQUIRE(gaplm_fit_run(dataset, config, &fit) == GAPLM_OK);

  CHECK(gaplm_fit_num_linear(fit) == 1);
  CHECK(gaplm_fit_num_components(fit) == 1);
  double beta = 0.0, se = 0.0;
  REQUIRE(gaplm_fit_beta(fit, &beta, 1) == GAPLM_OK);
  REQUIRE(gaplm_fit_beta_se(fit, &se, 1) == GAPLM_OK);
  CHECK(se > 0.0);

  char* report = nullptr;
  REQUIRE(gaplm_fit_report_json(fit, &report) == GAPLM_OK);
  const auto parsed = nlohmann::json::parse(report);
  CHECK(parsed.at("n_clusters") == 4);
  CHECK(parsed.at("beta").size() == 1);
  CHECK(parsed.at("beta")[0].get<double>() == beta);
  gaplm_string_free(report);

  char* curve = nullptr;
  REQUIRE(gaplm_fit_curve_csv(fit, 1, &curve) == GAPLM_OK);
  CHECK(std::string(curve).rfind("z,estimate,ci_lower,ci_upper\n", 0) == 0);
  gaplm_string_free(curve);

  CHECK(gaplm_fit_curve_csv(fit, 5, &curve) == GAPLM_E_PARAM_DOMAIN);

  gaplm_fit_free(fit);
  gaplm_dataset_free(dataset);
}

TEST_CASE("configuration errors surface with stable codes") {
  gaplm_dataset* dataset = nullptr;
  REQUIRE(gaplm_dataset_parse_csv(kCsv, kColumns, &dataset) == GAPLM_OK);

  gaplm_fit* fit = nullptr;
  CHECK(gaplm_fit_run(dataset, "{\"link\":\"poisson\"}", &fit) ==
        GAPLM_E_CONFIG);
  CHECK(gaplm_fit_run(dataset, "{not json", &fit) == GAPLM_E_CONFIG);
  CHECK(gaplm_fit_run(dataset, "{\"band\":true}", &fit) == GAPLM_E_BAND_DEGREE);
  CHECK(gaplm_fit_run(dataset, "{\"level\":1.5}", &fit) ==
        GAPLM_E_PARAM_DOMAIN);

  gaplm_dataset_free(dataset);
}

TEST_CASE("simulation through the C surface is byte-reproducible") {
  const char* config =
      "{\"example\":1,\"n\":20,\"m\":5,\"nsim\":3,\"seed\":77,\"threads\":1}";
  char* report1 = nullptr;
  char* table1 = nullptr;
  REQUIRE(gaplm_simulate_run(config, &report1, &table1) == GAPLM_OK);
  char* report2 = nullptr;
  REQUIRE(gaplm_simulate_run(config, &report2, nullptr) == GAPLM_OK);

  CHECK(std::string(report1) == std::string(report2));
  const auto parsed = nlohmann::json::parse(report1);
  CHECK(parsed.at("replications").at("done") == 3);
  CHECK(parsed.at("components").size() == 3);
  CHECK(std::string(table1).find("coverage") != std::string::npos);

  gaplm_string_free(report1);
  gaplm_string_free(report2);
  gaplm_string_free(table1);

  CHECK(gaplm_simulate_run("{\"example\":3}", nullptr, nullptr) ==
        GAPLM_E_PARAM_DOMAIN);
}
