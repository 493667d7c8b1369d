#include "gaplm/gaplm.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include "gaplm/csv.hpp"
#include "gaplm/pipeline.hpp"
#include "gaplm/simulate.hpp"
#include "json.hpp"

using nlohmann::json;

struct gaplm_dataset {
  gaplm::ClusteredDataset data;
};

struct gaplm_fit {
  gaplm::FitResult result;
};

namespace {

struct ThreadError {
  int code = 0;
  std::string name = "ok";
  std::string message;
  std::string context_json = "{}";
};

thread_local ThreadError g_error;

void clear_error() { g_error = ThreadError{}; }

gaplm_status set_error(gaplm::ErrorCode code, const std::string& message,
                       const std::map<std::string, std::string>& context = {}) {
  g_error.code = static_cast<int>(code);
  g_error.name = gaplm::error_code_name(code);
  g_error.message = message;
  json ctx = json::object();
  for (const auto& [key, value] : context) ctx[key] = value;
  g_error.context_json = ctx.dump();
  return static_cast<gaplm_status>(g_error.code);
}

template <typename F>
gaplm_status wrap(F&& body) noexcept {
  try {
    clear_error();
    body();
    return GAPLM_OK;
  } catch (const gaplm::Error& e) {
    return set_error(e.code(), e.what(), e.context());
  } catch (const json::exception& e) {
    return set_error(gaplm::ErrorCode::config_error,
                     std::string("bad configuration JSON: ") + e.what());
  } catch (const std::exception& e) {
    return set_error(gaplm::ErrorCode::internal, e.what());
  } catch (...) {
    return set_error(gaplm::ErrorCode::internal, "unknown error");
  }
}

char* copy_string(const std::string& text) {
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  if (out) std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

json parse_json_or_empty(const char* text) {
  if (!text || !*text) return json::object();
  return json::parse(text);
}

gaplm::CsvOptions csv_options_from_json(const char* options_json) {
  const json j = parse_json_or_empty(options_json);
  gaplm::CsvOptions options;
  options.cluster_column = j.value("cluster", options.cluster_column);
  options.response_column = j.value("response", options.response_column);
  if (j.contains("linear"))
    options.linear_columns = j.at("linear").get<std::vector<std::string>>();
  if (j.contains("additive"))
    options.additive_columns = j.at("additive").get<std::vector<std::string>>();
  options.rescale = j.value("rescale", options.rescale);
  return options;
}

gaplm::CorrKind corr_from_string(const std::string& name) {
  if (name == "ind" || name == "independence") return gaplm::CorrKind::independence;
  if (name == "ex" || name == "exchangeable") return gaplm::CorrKind::exchangeable;
  if (name == "ar1") return gaplm::CorrKind::ar1;
  throw gaplm::Error(gaplm::ErrorCode::config_error,
                     "unknown correlation structure '" + name + "'");
}

gaplm::RunConfig fit_config_from_json(const char* config_json) {
  const json j = parse_json_or_empty(config_json);
  gaplm::RunConfig cfg;
  const std::string link = j.value("link", "gaussian");
  if (link == "gaussian")
    cfg.link = gaplm::LinkKind::gaussian_identity;
  else if (link == "binomial" || link == "logit")
    cfg.link = gaplm::LinkKind::bernoulli_logit;
  else
    throw gaplm::Error(gaplm::ErrorCode::config_error,
                       "unknown link '" + link + "'");
  cfg.working = corr_from_string(j.value("correlation", "ind"));
  if (j.contains("alpha")) cfg.fixed_alpha = j.at("alpha").get<double>();
  cfg.degree = j.value("degree", cfg.degree);
  cfg.step1_override = j.value("step1_knots", cfg.step1_override);
  cfg.step2_override = j.value("step2_knots", cfg.step2_override);
  cfg.level = j.value("level", cfg.level);
  cfg.band = j.value("band", cfg.band);
  const std::string projection = j.value("projection", "weighted");
  if (projection == "weighted")
    cfg.projection = gaplm::ProjectionKind::weighted;
  else if (projection == "unweighted")
    cfg.projection = gaplm::ProjectionKind::unweighted;
  else
    throw gaplm::Error(gaplm::ErrorCode::config_error,
                       "unknown projection '" + projection + "'");
  cfg.grid_points = j.value("grid_points", cfg.grid_points);
  cfg.threads = j.value("threads", cfg.threads);
  return cfg;
}

gaplm::McConfig mc_config_from_json(const char* config_json) {
  const json j = parse_json_or_empty(config_json);
  gaplm::McConfig cfg;
  cfg.example = j.value("example", cfg.example);
  cfg.n = j.value("n", cfg.n);
  cfg.m = j.value("m", cfg.m);
  cfg.working = corr_from_string(j.value("correlation", "ex"));
  cfg.nsim = j.value("nsim", cfg.nsim);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.threads = j.value("threads", cfg.threads);
  cfg.level = j.value("level", cfg.level);
  cfg.degree = j.value("degree", cfg.degree);
  cfg.record_probe = j.value("record_probe", cfg.record_probe);
  cfg.probe_z = j.value("probe_z", cfg.probe_z);
  return cfg;
}

}  // namespace

extern "C" {

const char* gaplm_version(void) { return "0.1.0"; }

int gaplm_last_error_code(void) { return g_error.code; }
const char* gaplm_last_error_name(void) { return g_error.name.c_str(); }
const char* gaplm_last_error_message(void) { return g_error.message.c_str(); }
const char* gaplm_last_error_context_json(void) {
  return g_error.context_json.c_str();
}

gaplm_status gaplm_dataset_load_csv(const char* path, const char* options_json,
                                    gaplm_dataset** out) {
  return wrap([&] {
    if (!path || !out)
      throw gaplm::Error(gaplm::ErrorCode::param_domain, "null argument");
    auto handle = std::make_unique<gaplm_dataset>();
    handle->data = gaplm::load_csv(path, csv_options_from_json(options_json));
    *out = handle.release();
  });
}

gaplm_status gaplm_dataset_parse_csv(const char* text, const char* options_json,
                                     gaplm_dataset** out) {
  return wrap([&] {
    if (!text || !out)
      throw gaplm::Error(gaplm::ErrorCode::param_domain, "null argument");
    auto handle = std::make_unique<gaplm_dataset>();
    handle->data = gaplm::parse_csv(text, csv_options_from_json(options_json));
    *out = handle.release();
  });
}

gaplm_status gaplm_dataset_save_csv(const gaplm_dataset* dataset,
                                    const char* path, const char* options_json) {
  return wrap([&] {
    if (!dataset || !path)
      throw gaplm::Error(gaplm::ErrorCode::param_domain, "null argument");
    gaplm::save_csv(path, dataset->data, csv_options_from_json(options_json));
  });
}

void gaplm_dataset_free(gaplm_dataset* dataset) { delete dataset; }

int gaplm_dataset_num_clusters(const gaplm_dataset* dataset) {
  return dataset ? dataset->data.n() : 0;
}

long long gaplm_dataset_num_obs(const gaplm_dataset* dataset) {
  return dataset ? dataset->data.n_total() : 0;
}

gaplm_status gaplm_fit_run(const gaplm_dataset* dataset,
                           const char* config_json, gaplm_fit** out) {
  return wrap([&] {
    if (!dataset || !out)
      throw gaplm::Error(gaplm::ErrorCode::param_domain, "null argument");
    auto handle = std::make_unique<gaplm_fit>();
    handle->result =
        gaplm::run_fit(dataset->data, fit_config_from_json(config_json));
    *out = handle.release();
  });
}

void gaplm_fit_free(gaplm_fit* fit) { delete fit; }

int gaplm_fit_num_linear(const gaplm_fit* fit) {
  return fit ? static_cast<int>(fit->result.pilot.beta.size()) : 0;
}

int gaplm_fit_num_components(const gaplm_fit* fit) {
  return fit ? static_cast<int>(fit->result.components.size()) : 0;
}

gaplm_status gaplm_fit_beta(const gaplm_fit* fit, double* out, int capacity) {
  return wrap([&] {
    if (!fit || !out)
      throw gaplm::Error(gaplm::ErrorCode::param_domain, "null argument");
    const auto& beta = fit->result.pilot.beta;
    if (capacity < beta.size())
      throw gaplm::Error(gaplm::ErrorCode::param_domain, "buffer too small");
    for (Eigen::Index k = 0; k < beta.size(); ++k) out[k] = beta[k];
  });
}

gaplm_status gaplm_fit_beta_se(const gaplm_fit* fit, double* out, int capacity) {
  return wrap([&] {
    if (!fit || !out)
      throw gaplm::Error(gaplm::ErrorCode::param_domain, "null argument");
    const auto& se = fit->result.beta_se;
    if (capacity < se.size())
      throw gaplm::Error(gaplm::ErrorCode::param_domain, "buffer too small");
    for (Eigen::Index k = 0; k < se.size(); ++k) out[k] = se[k];
  });
}

gaplm_status gaplm_fit_report_json(const gaplm_fit* fit, char** out) {
  return wrap([&] {
    if (!fit || !out)
      throw gaplm::Error(gaplm::ErrorCode::param_domain, "null argument");
    *out = copy_string(gaplm::fit_report_json(fit->result));
    if (!*out) throw std::bad_alloc();
  });
}

gaplm_status gaplm_fit_curve_csv(const gaplm_fit* fit, int component_1based,
                                 char** out) {
  return wrap([&] {
    if (!fit || !out)
      throw gaplm::Error(gaplm::ErrorCode::param_domain, "null argument");
    *out = copy_string(gaplm::curve_csv(fit->result, component_1based - 1));
    if (!*out) throw std::bad_alloc();
  });
}

gaplm_status gaplm_simulate_run(const char* config_json, char** report_json,
                                char** table_text) {
  return wrap([&] {
    const gaplm::McReport report =
        gaplm::run_monte_carlo(mc_config_from_json(config_json));
    if (report_json) {
      *report_json = copy_string(gaplm::mc_report_json(report));
      if (!*report_json) throw std::bad_alloc();
    }
    if (table_text) {
      *table_text = copy_string(gaplm::mc_table_text(report));
      if (!*table_text) throw std::bad_alloc();
    }
  });
}

void gaplm_string_free(char* text) { std::free(text); }

}  // extern "C"
