#include "fsi/fsi.hpp"

#include "fsi/errors.hpp"
#include "fsi/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

namespace fsi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_index_model(const RegressionDataset& data) {
  if (data.covariate_dimension() < 2) {
    throw InputError(
        "single index fitting needs p >= 2: for p = 1 the index set is {1} and the model is plain "
        "local Frechet regression (use local_frechet_at)");
  }
}

IndexParam index_from_angles(const Eigen::VectorXd& eta) {
  return normalize_identifiable(angles_to_unit_vector(eta));
}

NelderMeadOptions simplex_options(const FsiConfig& config, Eigen::Index p) {
  NelderMeadOptions nm;
  nm.initial_step = config.simplex_step;
  nm.diameter_tolerance = config.simplex_tolerance;
  nm.max_evaluations = config.evaluations_per_angle * static_cast<int>(p - 1);
  return nm;
}

double quantile_sorted(const std::vector<double>& sorted, double prob) {
  const double pos = prob * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

int default_start_count(Eigen::Index p) {
  if (p <= 2) return 10;
  if (p <= 5) return 50;
  return 100;
}

int default_retained_count(Eigen::Index p) {
  if (p <= 2) return 2;
  if (p <= 5) return 3;
  return 5;
}

std::vector<Eigen::VectorXd> generate_starts(Eigen::Index p, const FsiConfig& config) {
  if (p < 2) throw InputError("generate_starts: p must be at least 2");
  const Eigen::Index dim = p - 1;
  std::vector<Eigen::VectorXd> starts;
  if (config.start_scheme == StartScheme::Lattice) {
    const double nodes[3] = {-std::numbers::pi / 3, 0.0, std::numbers::pi / 3};
    std::size_t total = 1;
    for (Eigen::Index j = 0; j < dim; ++j) total *= 3;
    for (std::size_t code = 0; code < total; ++code) {
      Eigen::VectorXd eta(dim);
      std::size_t c = code;
      for (Eigen::Index j = 0; j < dim; ++j, c /= 3) eta[j] = nodes[c % 3];
      starts.push_back(std::move(eta));
    }
    return starts;
  }
  const int count = config.start_count.value_or(default_start_count(p));
  if (count < 1) throw InputError("start count must be positive");
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> angle(-std::numbers::pi / 2, std::numbers::pi / 2);
  for (int k = 0; k < count; ++k) {
    Eigen::VectorXd eta(dim);
    for (Eigen::Index j = 0; j < dim; ++j) eta[j] = angle(rng);
    starts.push_back(std::move(eta));
  }
  return starts;
}

CriterionEvaluation evaluate_wn(const RegressionDataset& data, const IndexParam& theta, double h,
                                const Kernel& kernel, const SphereSolverOptions& solver) {
  if (theta.dimension() != data.covariate_dimension()) throw InputError("wn_criterion: dimension mismatch");
  const Eigen::Index n = data.size();
  const MetricSpace& space = data.space();
  const Eigen::VectorXd u = data.X() * theta.theta();

  CriterionEvaluation out;
  out.fitted.resize(space.dimension(), n);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    LocalWeights lw;
    try {
      lw = scalar_local_weights(u, u[i], h, kernel);
    } catch (const DegenerateWindow& e) {
      throw DegenerateWindow(std::string(e.what()) + " (observation " + std::to_string(i) + ")", i);
    }
    FittedObject fit;
    if (space.kind() == SpaceKind::Sphere) {
      const Eigen::Vector3d start = nadaraya_watson_sphere_on_index(data.Y(), u, u[i], h, kernel, i);
      fit = space.weighted_frechet_mean(data.Y(), lw.weights, start, solver);
    } else {
      fit = space.weighted_frechet_mean(data.Y(), lw.weights);
    }
    total += space.squared_distance(data.Y().col(i), fit.point);
    out.fitted.col(i) = fit.point;
  }
  out.value = total / static_cast<double>(n);
  return out;
}

double wn_criterion(const RegressionDataset& data, const IndexParam& theta, double h, const Kernel& kernel,
                    const SphereSolverOptions& solver) {
  return evaluate_wn(data, theta, h, kernel, solver).value;
}

double wn_proxy_sphere(const RegressionDataset& data, const IndexParam& theta, double h, const Kernel& kernel) {
  if (data.space().kind() != SpaceKind::Sphere) throw InputError("wn_proxy_sphere: sphere responses only");
  if (theta.dimension() != data.covariate_dimension()) throw InputError("wn_proxy_sphere: dimension mismatch");
  const Eigen::Index n = data.size();
  const Eigen::VectorXd u = data.X() * theta.theta();
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    LocalWeights lw;
    try {
      lw = scalar_local_weights(u, u[i], h, kernel);
    } catch (const DegenerateWindow& e) {
      throw DegenerateWindow(std::string(e.what()) + " (observation " + std::to_string(i) + ")", i);
    }
    const Eigen::Vector3d sum = data.Y() * lw.weights;
    const double norm = sum.norm();
    if (!(norm > 1e-12 * static_cast<double>(n))) {
      throw DegenerateWindow("proxy fit has zero norm (observation " + std::to_string(i) + ")", i);
    }
    const double d = sphere::angle(data.Y().col(i), sum / norm);
    total += d * d;
  }
  return total / static_cast<double>(n);
}

IndexEstimate estimate_index(const RegressionDataset& data, double h, const FsiConfig& config) {
  require_index_model(data);
  if (data.size() < 10) throw InputError("single index fitting needs at least 10 observations");
  const Eigen::Index p = data.covariate_dimension();
  const Kernel kernel(config.kernel);
  const bool sphere = data.space().kind() == SpaceKind::Sphere;

  auto criterion = [&](const Eigen::VectorXd& eta) {
    try {
      return wn_criterion(data, index_from_angles(eta), h, kernel, config.solver);
    } catch (const NumericalError&) {
      return kInf;
    }
  };
  auto proxy = [&](const Eigen::VectorXd& eta) {
    try {
      return wn_proxy_sphere(data, index_from_angles(eta), h, kernel);
    } catch (const NumericalError&) {
      return kInf;
    }
  };

  IndexEstimate est;
  est.h = h;
  const std::vector<Eigen::VectorXd> starts = generate_starts(p, config);
  est.starts.resize(starts.size());
  const NelderMeadOptions nm = simplex_options(config, p);

  // Stage 1: proxy refinement on the sphere, plain screening otherwise.
  parallel_for(starts.size(), config.threads, [&](std::size_t k) {
    StartTrace& tr = est.starts[k];
    tr.start = starts[k];
    if (sphere) {
      const NelderMeadResult r = nelder_mead(proxy, starts[k], nm);
      tr.refined = r.argmin;
      tr.screen_value = r.value;
      tr.evaluations = r.evaluations;
    } else {
      tr.refined = starts[k];
      tr.screen_value = criterion(starts[k]);
      tr.evaluations = 1;
    }
  });

  std::vector<std::size_t> order(starts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return est.starts[a].screen_value < est.starts[b].screen_value;
  });
  const auto keep = static_cast<std::size_t>(config.retained_count.value_or(default_retained_count(p)));
  std::vector<std::size_t> retained;
  for (std::size_t k : order) {
    if (retained.size() >= keep) break;
    if (std::isfinite(est.starts[k].screen_value)) retained.push_back(k);
  }
  // Every screen infeasible: still try the first starts directly.
  for (std::size_t k = 0; retained.empty() && k < std::min(keep, starts.size()); ++k) retained.push_back(k);
  std::sort(retained.begin(), retained.end());

  // Stage 2: direct minimization of W_n.
  parallel_for(retained.size(), config.threads, [&](std::size_t r) {
    StartTrace& tr = est.starts[retained[r]];
    tr.retained = true;
    const NelderMeadResult res = nelder_mead(criterion, tr.refined, nm);
    tr.final_angles = res.argmin;
    tr.final_value = res.value;
    tr.evaluations += res.evaluations;
  });

  std::optional<std::size_t> best;
  for (std::size_t k : retained) {
    const StartTrace& tr = est.starts[k];
    if (!std::isfinite(tr.final_value)) continue;
    // Lowest start index wins ties within 1e-12.
    if (!best || tr.final_value < est.starts[*best].final_value - 1e-12) best = k;
  }
  if (!best) return est;

  const IndexParam theta = index_from_angles(est.starts[*best].final_angles);
  try {
    CriterionEvaluation ev = evaluate_wn(data, theta, h, kernel, config.solver);
    est.theta = theta;
    est.criterion = ev.value;
    est.fitted = std::move(ev.fitted);
  } catch (const NumericalError&) {
    // The normalized representative failed where the raw angles did not; leave infeasible.
  }
  return est;
}

std::vector<double> bandwidth_grid_for_index(const Eigen::VectorXd& u, int size) {
  if (size < 1) throw InputError("bandwidth grid size must be positive");
  const Eigen::Index n = u.size();
  if (n < 2) throw InputError("bandwidth grid needs at least two observations");
  std::vector<double> gaps;
  gaps.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) gaps.push_back(std::abs(u[i] - u[j]));
  }
  std::sort(gaps.begin(), gaps.end());
  double lo = quantile_sorted(gaps, 0.05);
  const double hi = quantile_sorted(gaps, 0.50);
  if (!(hi > 0.0)) throw InputError("bandwidth grid: index values are (nearly) all equal");
  if (!(lo > 0.0)) {
    const auto first_positive = std::upper_bound(gaps.begin(), gaps.end(), 0.0);
    lo = *first_positive;
  }
  std::vector<double> grid;
  if (size == 1) return {hi};
  for (int k = 0; k < size; ++k) {
    const double frac = static_cast<double>(k) / static_cast<double>(size - 1);
    grid.push_back(std::exp(std::log(lo) + frac * (std::log(hi) - std::log(lo))));
  }
  return grid;
}

std::vector<double> default_bandwidth_grid(const Eigen::MatrixXd& X, int size) {
  const Eigen::MatrixXd centered = X.rowwise() - X.colwise().mean();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const IndexParam pilot = normalize_identifiable(svd.matrixV().col(0));
  return bandwidth_grid_for_index(X * pilot.theta(), size);
}

LoocvResult loocv_bandwidth(const RegressionDataset& data, std::span<const double> grid, const LooFitter& fitter,
                            unsigned threads) {
  if (grid.empty()) throw InputError("loocv_bandwidth: empty bandwidth grid");
  const Eigen::Index n = data.size();
  if (n < 3) throw InputError("loocv_bandwidth: need at least 3 observations");

  LoocvResult out;
  out.scores.assign(grid.size(), kInf);
  std::vector<RegressionDataset> folds;
  folds.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) folds.push_back(data.without(i));

  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double h = grid[g];
    std::vector<double> errs(static_cast<std::size_t>(n), kInf);
    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t i) {
      const auto row = static_cast<Eigen::Index>(i);
      try {
        const Eigen::VectorXd pred = fitter(folds[i], data.X().row(row).transpose(), h);
        errs[i] = data.space().squared_distance(data.Y().col(row), pred);
      } catch (const NumericalError&) {
        errs[i] = kInf;
      }
    });
    double total = 0.0;
    for (double e : errs) total += e;
    out.scores[g] = total;
  }

  std::optional<std::size_t> best;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (!std::isfinite(out.scores[g])) continue;
    if (!best) {
      best = g;
      continue;
    }
    const double b = out.scores[*best];
    const double tie = 1e-12 * std::max(1.0, std::abs(b));
    if (out.scores[g] < b - tie || (std::abs(out.scores[g] - b) <= tie && grid[g] > grid[*best])) best = g;
  }
  if (!best) throw FitFailure("loocv_bandwidth: every bandwidth in the grid is infeasible");
  out.h_star = grid[*best];
  return out;
}

LooFitter local_index_fitter(const IndexParam& theta, const Kernel& kernel, const SphereSolverOptions& solver) {
  return [theta, kernel, solver](const RegressionDataset& train, const Eigen::VectorXd& x, double h) {
    LocalFitOptions opts;
    opts.solver = solver;
    return local_frechet_at(train, x, theta, h, kernel, opts).point;
  };
}

LooFitter multivariate_local_fitter(const Kernel& kernel, const SphereSolverOptions& solver) {
  return [kernel, solver](const RegressionDataset& train, const Eigen::VectorXd& x, double h) {
    return multivariate_local_frechet_at(train, x, h, kernel, solver).point;
  };
}

namespace {

FsiFit finish_fit(const RegressionDataset& data, const FsiConfig& config, std::vector<IndexEstimate> path,
                  std::size_t chosen) {
  FsiFit fit;
  fit.kernel = config.kernel;
  fit.solver = config.solver;
  const IndexEstimate& est = path[chosen];
  fit.theta_hat = *est.theta;
  fit.h_star = est.h;
  fit.criterion = est.criterion;
  fit.fitted = est.fitted;
  fit.path = std::move(path);
  (void)data;
  return fit;
}

}  // namespace

FsiFit fit_fsi(const RegressionDataset& data, const FsiConfig& config) {
  require_index_model(data);
  std::vector<double> grid = config.bandwidths;
  if (grid.empty()) grid = default_bandwidth_grid(data.X(), config.auto_grid_size);

  std::vector<IndexEstimate> path;
  path.reserve(grid.size());
  for (double h : grid) path.push_back(estimate_index(data, h, config));
  if (std::none_of(path.begin(), path.end(), [](const IndexEstimate& e) { return e.feasible(); })) {
    throw FitFailure("fit_fsi: every (theta, h) pair was infeasible");
  }

  const Kernel kernel(config.kernel);
  LooFitter fitter;
  if (config.loocv == LoocvVariant::FixedTheta) {
    fitter = [&](const RegressionDataset& train, const Eigen::VectorXd& x, double h) -> Eigen::VectorXd {
      const auto it = std::find_if(path.begin(), path.end(), [h](const IndexEstimate& e) { return e.h == h; });
      if (it == path.end() || !it->feasible()) throw FitFailure("no index estimate at this bandwidth");
      LocalFitOptions opts;
      opts.solver = config.solver;
      return local_frechet_at(train, x, *it->theta, h, kernel, opts).point;
    };
  } else {
    FsiConfig inner = config;
    inner.threads = 1;
    fitter = [inner, kernel](const RegressionDataset& train, const Eigen::VectorXd& x, double h) -> Eigen::VectorXd {
      const IndexEstimate est = estimate_index(train, h, inner);
      if (!est.feasible()) throw FitFailure("no feasible index on the training fold");
      LocalFitOptions opts;
      opts.solver = inner.solver;
      return local_frechet_at(train, x, *est.theta, h, kernel, opts).point;
    };
  }
  const LoocvResult cv = loocv_bandwidth(data, grid, fitter, config.threads);
  const auto chosen = static_cast<std::size_t>(std::find(grid.begin(), grid.end(), cv.h_star) - grid.begin());
  if (!path[chosen].feasible()) throw FitFailure("fit_fsi: selected bandwidth has no index estimate");
  FsiFit fit = finish_fit(data, config, std::move(path), chosen);
  fit.loocv_scores = cv.scores;
  return fit;
}

FsiFit fit_fsi_fixed_bandwidth(const RegressionDataset& data, double h, const FsiConfig& config) {
  std::vector<IndexEstimate> path;
  path.push_back(estimate_index(data, h, config));
  if (!path.front().feasible()) throw FitFailure("fit_fsi: every (theta, h) pair was infeasible");
  return finish_fit(data, config, std::move(path), 0);
}

FittedObject predict(const FsiFit& fit, const RegressionDataset& data, const Eigen::VectorXd& x_new) {
  LocalFitOptions opts;
  opts.solver = fit.solver;
  return local_frechet_at(data, x_new, fit.theta_hat, fit.h_star, Kernel(fit.kernel), opts);
}

bool is_extrapolation(const FsiFit& fit, const RegressionDataset& data, const Eigen::VectorXd& x_new) {
  const Eigen::VectorXd u = data.X() * fit.theta_hat.theta();
  const double v = fit.theta_hat.project(x_new);
  return v < u.minCoeff() - fit.h_star || v > u.maxCoeff() + fit.h_star;
}

}  // namespace fsi
