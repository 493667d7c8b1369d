#include "gaplm/two_step.hpp"

#include <cmath>
#include <limits>

namespace gaplm {

namespace {

// Least-squares projection of a target curve onto the basis over a dense
// grid; used to seed the Step-II iterations.
Eigen::VectorXd project_onto_basis(const CenteredSplineBasis& basis,
                                   const std::function<double(double)>& target) {
  const int grid_size = 201;
  Eigen::VectorXd grid(grid_size), values(grid_size);
  for (int i = 0; i < grid_size; ++i) {
    grid[i] = static_cast<double>(i) / (grid_size - 1);
    values[i] = target(grid[i]);
  }
  const Eigen::MatrixXd g = basis.eval_matrix(grid);
  const Eigen::MatrixXd gtg = g.transpose() * g;
  Eigen::LLT<Eigen::MatrixXd> llt(gtg);
  if (llt.info() != Eigen::Success) return Eigen::VectorXd::Zero(basis.dim());
  return llt.solve(g.transpose() * values);
}

GeeProblem make_component_problem(
    const ClusteredDataset& data, const ModelSpec& spec,
    const CenteredSplineBasis& basis, int component,
    const std::function<double(const Eigen::VectorXd& x_row,
                               const Eigen::VectorXd& z_row)>& offset_fn) {
  GeeProblem problem;
  problem.link = spec.link;
  problem.working_corr = spec.working_corr;
  problem.clusters.reserve(data.clusters.size());
  for (const auto& c : data.clusters) {
    GeeCluster gc;
    gc.y = c.y;
    gc.design = basis.eval_matrix(c.z.col(component));
    gc.offset.resize(c.y.size());
    for (Eigen::Index j = 0; j < c.y.size(); ++j)
      gc.offset[j] = offset_fn(c.x.row(j), c.z.row(j));
    problem.clusters.push_back(std::move(gc));
  }
  return problem;
}

ComponentFit fit_second_step(const ClusteredDataset& data,
                             const ModelSpec& spec, int component,
                             int step2_knot_count, const SolverControl& ctrl,
                             const std::function<double(const Eigen::VectorXd&,
                                                        const Eigen::VectorXd&)>&
                                 offset_fn,
                             const std::function<double(double)>& init_curve,
                             bool oracle) {
  data.validate();
  if (component < 0 || component >= data.d2())
    throw Error(ErrorCode::param_domain,
                "component index out of range: " + std::to_string(component));

  ComponentFit fit;
  fit.component = component;
  fit.oracle = oracle;
  fit.basis = CenteredSplineBasis::fit(step2_knot_count, spec.degree,
                                       data.additive_column(component));
  fit.problem = make_component_problem(data, spec, fit.basis, component,
                                       offset_fn);
  const Eigen::VectorXd init = project_onto_basis(fit.basis, init_curve);
  fit.solution = solve(fit.problem, init, ctrl);
  fit.gamma = fit.solution.coefficients;
  return fit;
}

}  // namespace

std::vector<double> TruthSpec::centers_for(const ClusteredDataset& data) const {
  std::vector<double> centers(theta0.size(), 0.0);
  const long long n_total = data.n_total();
  for (std::size_t l = 0; l < theta0.size(); ++l) {
    double sum = 0.0;
    for (const auto& c : data.clusters)
      for (Eigen::Index j = 0; j < c.z.rows(); ++j)
        sum += theta0[l](c.z(j, static_cast<Eigen::Index>(l)));
    centers[l] = sum / static_cast<double>(n_total);
  }
  return centers;
}

PilotFit fit_pilot(const ClusteredDataset& data, const ModelSpec& spec,
                   int step1_knot_count, const SolverControl& ctrl) {
  data.validate();
  spec.working_corr.validate(data.max_cluster_size());

  PilotFit pilot;
  pilot.d1 = data.d1();
  pilot.d2 = data.d2();

  for (int l = 0; l < pilot.d2; ++l)
    pilot.bases.push_back(CenteredSplineBasis::fit(
        step1_knot_count, spec.degree, data.additive_column(l)));

  const int basis_dim = pilot.d2 > 0 ? pilot.bases[0].dim() : 0;
  const int p = pilot.d1 + pilot.d2 * basis_dim;

  GeeProblem problem;
  problem.link = spec.link;
  problem.working_corr = spec.working_corr;
  problem.clusters.reserve(data.clusters.size());
  for (const auto& c : data.clusters) {
    GeeCluster gc;
    gc.y = c.y;
    gc.offset = Eigen::VectorXd::Zero(c.y.size());
    gc.design.resize(c.y.size(), p);
    gc.design.leftCols(pilot.d1) = c.x;
    for (int l = 0; l < pilot.d2; ++l)
      gc.design.block(0, pilot.d1 + l * basis_dim, c.y.size(), basis_dim) =
          pilot.bases[static_cast<std::size_t>(l)].eval_matrix(c.z.col(l));
    problem.clusters.push_back(std::move(gc));
  }

  Eigen::VectorXd init = Eigen::VectorXd::Zero(p);
  if (spec.working_corr.structure != CorrKind::independence) {
    GeeProblem ind_problem = problem;
    ind_problem.working_corr = WorkingCorrelation{CorrKind::independence, 0.0};
    init = solve(ind_problem, init, ctrl).coefficients;
  }
  pilot.solution = solve(problem, init, ctrl);

  pilot.beta = pilot.solution.coefficients.head(pilot.d1);
  pilot.gamma.resize(basis_dim, pilot.d2);
  for (int l = 0; l < pilot.d2; ++l)
    pilot.gamma.col(l) =
        pilot.solution.coefficients.segment(pilot.d1 + l * basis_dim, basis_dim);
  pilot.problem = std::move(problem);
  return pilot;
}

ComponentFit fit_component(const ClusteredDataset& data, const ModelSpec& spec,
                           const PilotFit& pilot, int component,
                           int step2_knot_count, const SolverControl& ctrl) {
  auto offset_fn = [&](const Eigen::VectorXd& x_row,
                       const Eigen::VectorXd& z_row) {
    double value = x_row.dot(pilot.beta);
    for (int l = 0; l < pilot.d2; ++l)
      if (l != component) value += pilot.theta(l, z_row[l]);
    return value;
  };
  auto init_curve = [&](double z) { return pilot.theta(component, z); };
  return fit_second_step(data, spec, component, step2_knot_count, ctrl,
                         offset_fn, init_curve, false);
}

ComponentFit fit_oracle(const ClusteredDataset& data, const ModelSpec& spec,
                        const TruthSpec& truth, int component,
                        int step2_knot_count, const SolverControl& ctrl) {
  if (truth.beta0.size() != data.d1() ||
      static_cast<int>(truth.theta0.size()) != data.d2())
    throw Error(ErrorCode::config_error, "truth dimensions do not match data");
  const std::vector<double> centers = truth.centers_for(data);
  auto offset_fn = [&](const Eigen::VectorXd& x_row,
                       const Eigen::VectorXd& z_row) {
    double value = x_row.dot(truth.beta0);
    for (int l = 0; l < data.d2(); ++l)
      if (l != component)
        value += truth.theta0[static_cast<std::size_t>(l)](z_row[l]) -
                 centers[static_cast<std::size_t>(l)];
    return value;
  };
  auto init_curve = [&](double z) {
    return truth.theta0[static_cast<std::size_t>(component)](z) -
           centers[static_cast<std::size_t>(component)];
  };
  return fit_second_step(data, spec, component, step2_knot_count, ctrl,
                         offset_fn, init_curve, true);
}

ComponentCurve evaluate_component(const ComponentFit& fit,
                                  const Eigen::VectorXd& z_grid) {
  ComponentCurve curve;
  curve.z = z_grid;
  curve.basis_rows = fit.basis.eval_matrix(z_grid);
  curve.value = curve.basis_rows * fit.gamma;
  return curve;
}

double weighted_half_rss(const GeeProblem& problem, const Eigen::VectorXd& coef) {
  double total = 0.0;
  for (int i = 0; i < static_cast<int>(problem.clusters.size()); ++i) {
    const auto& c = problem.clusters[static_cast<std::size_t>(i)];
    const ClusterState state = eval_cluster(problem, i, coef);
    const Eigen::VectorXd resid = c.y - state.mu;
    total += resid.dot(state.cov.solve(resid));
  }
  return 0.5 * total;
}

KnotPlan select_component_knots(const ClusteredDataset& data,
                                const ModelSpec& spec, const PilotFit& pilot,
                                int component, int lower, int upper,
                                const SolverControl& ctrl) {
  if (lower < 1 || upper < lower)
    throw Error(ErrorCode::param_domain, "empty knot candidate interval");

  KnotPlan plan;
  plan.ns_lower = lower;
  plan.ns_upper = upper;

  double best = std::numeric_limits<double>::infinity();
  bool have_best = false;
  for (int ns = lower; ns <= upper; ++ns) {
    BicTraceEntry entry;
    entry.ns = ns;
    try {
      const ComponentFit fit =
          fit_component(data, spec, pilot, component, ns, ctrl);
      const double q_star = weighted_half_rss(fit.problem, fit.gamma);
      entry.bic = bic_value(q_star, fit.basis.dim(), data.n());
      entry.ok = true;
      if (std::isinf(entry.bic) && entry.bic < 0.0) entry.note = "perfect fit";
      if (!fit.solution.converged) entry.note = "not converged";
    } catch (const Error& e) {
      entry.ok = false;
      entry.note = std::string(error_code_name(e.code())) + ": " + e.what();
    }
    if (entry.ok && entry.bic < best) {
      best = entry.bic;
      plan.ns_selected = ns;
      have_best = true;
    }
    plan.trace.push_back(std::move(entry));
  }

  if (!have_best) {
    std::string detail;
    for (const auto& entry : plan.trace)
      detail += "N=" + std::to_string(entry.ns) + " -> " + entry.note + "; ";
    throw Error(ErrorCode::selection_failed,
                "every knot candidate failed for component " +
                    std::to_string(component) + ": " + detail);
  }
  return plan;
}

}  // namespace gaplm
