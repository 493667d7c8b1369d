#include "gaplm/pipeline.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <thread>

#include "gaplm/knots.hpp"
#include "json.hpp"

namespace gaplm {

PilotPipeline run_pilot_pipeline(const ClusteredDataset& data, LinkKind link,
                                 CorrKind working, int degree, int step1_knots,
                                 const double* fixed_alpha,
                                 const SolverControl& ctrl) {
  PilotPipeline out;

  ModelSpec ind_spec;
  ind_spec.link = link == LinkKind::gaussian_identity ? LinkFamily::gaussian()
                                                      : LinkFamily::bernoulli();
  ind_spec.working_corr = WorkingCorrelation{CorrKind::independence, 0.0};
  ind_spec.degree = degree;

  PilotFit first = fit_pilot(data, ind_spec, step1_knots, ctrl);
  out.dispersion = pearson_dispersion(first.problem, first.solution.coefficients);

  if (working == CorrKind::independence) {
    out.alpha_hat = 0.0;
  } else if (fixed_alpha) {
    out.alpha_hat = *fixed_alpha;
  } else {
    out.alpha_hat = estimate_alpha_from_residuals(
        pearson_residuals(first.problem, first.solution.coefficients),
        out.dispersion, working);
  }

  out.spec = ind_spec;
  if (link == LinkKind::gaussian_identity)
    out.spec.link = LinkFamily::gaussian(out.dispersion);
  out.spec.working_corr = WorkingCorrelation{working, out.alpha_hat};
  out.spec.working_corr.validate(data.max_cluster_size());

  out.pilot = fit_pilot(data, out.spec, step1_knots, ctrl);
  return out;
}

FitResult run_fit(const ClusteredDataset& data, const RunConfig& cfg) {
  data.validate();
  if (!(cfg.level > 0.0 && cfg.level < 1.0))
    throw Error(ErrorCode::param_domain, "confidence level must be in (0,1)");
  if (cfg.band && cfg.degree != 1)
    throw Error(ErrorCode::band_degree,
                "simultaneous bands require --degree 1");
  if (cfg.degree < 1)
    throw Error(ErrorCode::param_domain, "spline degree must be >= 1");

  SolverControl ctrl;
  FitResult result;
  result.config = cfg;
  result.n = data.n();
  result.n_total = data.n_total();
  result.p_order = cfg.degree + 1;
  result.step1_knots = cfg.step1_override > 0
                           ? cfg.step1_override
                           : step1_knots(result.n_total, result.p_order);
  result.z_maps = data.z_maps;

  const double* fixed_alpha =
      cfg.fixed_alpha.has_value() ? &cfg.fixed_alpha.value() : nullptr;
  PilotPipeline pp = run_pilot_pipeline(data, cfg.link, cfg.working, cfg.degree,
                                        result.step1_knots, fixed_alpha, ctrl);
  result.alpha_hat = pp.alpha_hat;
  result.dispersion = pp.dispersion;

  const SigmaHat sigma =
      estimate_sigma(pp.pilot.problem, pp.pilot.solution.coefficients);
  result.beta_sandwich = sandwich_beta(pp.pilot, sigma, cfg.projection);
  result.beta_se = result.beta_sandwich.xi.diagonal().array().sqrt();

  Eigen::VectorXd grid(cfg.grid_points);
  for (int i = 0; i < cfg.grid_points; ++i)
    grid[i] = static_cast<double>(i) / (cfg.grid_points - 1);

  auto fit_one = [&](int l) {
    ComponentResult comp;
    comp.index = l;
    comp.plan.p = result.p_order;
    comp.plan.n_step1 = result.step1_knots;
    if (cfg.step2_override > 0) {
      comp.plan.ns_lower = comp.plan.ns_upper = comp.plan.ns_selected =
          cfg.step2_override;
      comp.fit = fit_component(data, pp.spec, pp.pilot, l, cfg.step2_override,
                               ctrl);
      const double q_star = weighted_half_rss(comp.fit.problem, comp.fit.gamma);
      comp.plan.trace.push_back(BicTraceEntry{
          cfg.step2_override,
          bic_value(q_star, comp.fit.basis.dim(), data.n()), true, ""});
    } else {
      const auto [lo, hi] = step2_candidates(result.n_total, result.p_order);
      comp.plan = select_component_knots(data, pp.spec, pp.pilot, l, lo, hi,
                                         ctrl);
      comp.plan.p = result.p_order;
      comp.plan.n_step1 = result.step1_knots;
      comp.fit =
          fit_component(data, pp.spec, pp.pilot, l, comp.plan.ns_selected, ctrl);
    }
    comp.sandwich = sandwich_theta(comp.fit, sigma);
    comp.fit.xi_star = comp.sandwich.xi;
    comp.ci = pointwise_ci(comp.fit, comp.sandwich, grid, cfg.level);
    if (cfg.band)
      comp.band = simultaneous_band(comp.fit, comp.sandwich, grid, cfg.level);
    return comp;
  };

  const int d2 = data.d2();
  result.components.resize(static_cast<std::size_t>(d2));
  int threads = cfg.threads <= 0
                    ? static_cast<int>(std::max(1u, std::thread::hardware_concurrency()))
                    : cfg.threads;
  threads = std::min(threads, std::max(1, d2));
  if (threads <= 1 || d2 <= 1) {
    for (int l = 0; l < d2; ++l)
      result.components[static_cast<std::size_t>(l)] = fit_one(l);
  } else {
    // component fits are independent given the pilot
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_lock;
    auto worker = [&]() {
      while (true) {
        const int l = next.fetch_add(1);
        if (l >= d2) break;
        try {
          result.components[static_cast<std::size_t>(l)] = fit_one(l);
        } catch (...) {
          std::lock_guard<std::mutex> guard(failure_lock);
          if (!failure) failure = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  result.pilot = std::move(pp.pilot);
  return result;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

nlohmann::ordered_json solution_json(const GeeSolution& sol) {
  return nlohmann::ordered_json{{"converged", sol.converged},
                                {"iterations", sol.iterations},
                                {"score_norm", sol.final_score_norm},
                                {"score_threshold", sol.score_threshold}};
}

const char* link_name(LinkKind k) {
  return k == LinkKind::gaussian_identity ? "gaussian" : "binomial";
}

}  // namespace

std::string fit_report_json(const FitResult& result) {
  nlohmann::ordered_json j;
  j["config"] = {
      {"link", link_name(result.config.link)},
      {"correlation", corr_kind_name(result.config.working)},
      {"alpha_fixed", result.config.fixed_alpha.has_value()},
      {"degree", result.config.degree},
      {"level", result.config.level},
      {"band", result.config.band},
      {"projection", result.config.projection == ProjectionKind::weighted
                         ? "weighted"
                         : "unweighted"},
      {"grid_points", result.config.grid_points},
  };
  j["n_clusters"] = result.n;
  j["n_total"] = result.n_total;
  j["alpha_hat"] = result.alpha_hat;
  j["dispersion"] = result.dispersion;
  j["knots"] = {{"p", result.p_order}, {"step1", result.step1_knots}};

  j["beta"] = std::vector<double>(
      result.pilot.beta.data(), result.pilot.beta.data() + result.pilot.beta.size());
  j["beta_se"] = std::vector<double>(result.beta_se.data(),
                                     result.beta_se.data() + result.beta_se.size());
  j["pilot"] = solution_json(result.pilot.solution);

  nlohmann::ordered_json comps = nlohmann::ordered_json::array();
  for (const auto& comp : result.components) {
    nlohmann::ordered_json trace = nlohmann::ordered_json::array();
    for (const auto& entry : comp.plan.trace) {
      nlohmann::ordered_json t{{"knots", entry.ns}, {"ok", entry.ok}};
      if (entry.ok && std::isfinite(entry.bic)) t["bic"] = entry.bic;
      else if (entry.ok) t["bic"] = "-inf";
      if (!entry.note.empty()) t["note"] = entry.note;
      trace.push_back(std::move(t));
    }
    nlohmann::ordered_json cj{
        {"component", comp.index + 1},
        {"knots", {{"lower", comp.plan.ns_lower},
                   {"upper", comp.plan.ns_upper},
                   {"selected", comp.plan.ns_selected},
                   {"bic_trace", std::move(trace)}}},
        {"solution", solution_json(comp.fit.solution)},
        {"gamma", std::vector<double>(comp.fit.gamma.data(),
                                      comp.fit.gamma.data() + comp.fit.gamma.size())},
    };
    comps.push_back(std::move(cj));
  }
  j["components"] = std::move(comps);
  return j.dump(2) + "\n";
}

std::string curve_csv(const FitResult& result, int component) {
  if (component < 0 || component >= static_cast<int>(result.components.size()))
    throw Error(ErrorCode::param_domain, "component index out of range");
  const ComponentResult& comp =
      result.components[static_cast<std::size_t>(component)];
  const AffineMap map = component < static_cast<int>(result.z_maps.size())
                            ? result.z_maps[static_cast<std::size_t>(component)]
                            : AffineMap{};

  std::string out = "z,estimate,ci_lower,ci_upper";
  if (comp.band) out += ",band_lower,band_upper";
  out += "\n";
  for (Eigen::Index k = 0; k < comp.ci.z.size(); ++k) {
    out += format_double(map.from_unit(comp.ci.z[k]));
    out += "," + format_double(comp.ci.value[k]);
    out += "," + format_double(comp.ci.lower[k]);
    out += "," + format_double(comp.ci.upper[k]);
    if (comp.band) {
      out += "," + format_double(comp.band->lower[k]);
      out += "," + format_double(comp.band->upper[k]);
    }
    out += "\n";
  }
  return out;
}

}  // namespace gaplm
