#include "fsi/mortality.hpp"

#include "fsi/csv.hpp"
#include "fsi/errors.hpp"
#include "fsi/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <random>

namespace fsi {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Inverts a piecewise-linear CDF given by (x_k, C_k), C nondecreasing from 0 to 1.
Eigen::VectorXd invert_cdf(const std::vector<double>& x, const std::vector<double>& cdf, const Eigen::VectorXd& levels) {
  Eigen::VectorXd q(levels.size());
  for (Eigen::Index k = 0; k < levels.size(); ++k) {
    const double t = levels[k];
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), t);
    if (it == cdf.begin()) {
      q[k] = x.front();
    } else if (it == cdf.end()) {
      q[k] = x.back();
    } else {
      const auto j = static_cast<std::size_t>(it - cdf.begin());
      const double span = cdf[j] - cdf[j - 1];
      const double frac = span > 0.0 ? (t - cdf[j - 1]) / span : 1.0;
      q[k] = x[j - 1] + frac * (x[j] - x[j - 1]);
    }
    if (k > 0) q[k] = std::max(q[k], q[k - 1]);
  }
  q[0] = std::max(q[0], x.front());
  q[q.size() - 1] = std::min(q[q.size() - 1], x.back());
  return q;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double percentile(std::vector<double> v, double prob) {
  std::sort(v.begin(), v.end());
  const double pos = prob * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

bool is_missing(const std::string& field) {
  return field.empty() || field == "NA" || field == "na" || field == "nan" || field == "NaN";
}

}  // namespace

void Lifetable::validate() const {
  if (ages.size() != survivors.size()) throw InputError("lifetable " + unit + ": ages and lx differ in length");
  if (ages.size() < 2) throw InputError("lifetable " + unit + ": needs at least two ages");
  for (std::size_t j = 0; j < ages.size(); ++j) {
    if (!std::isfinite(ages[j]) || !std::isfinite(survivors[j]) || survivors[j] < 0.0) {
      throw InputError("lifetable " + unit + ": invalid entry at row " + std::to_string(j + 1));
    }
    if (j > 0 && !(ages[j] > ages[j - 1])) throw InputError("lifetable " + unit + ": ages must increase");
    if (j > 0 && survivors[j] > survivors[j - 1]) {
      throw InputError("lifetable " + unit + ": survivors lx increase at age " + format_double(ages[j]));
    }
  }
}

Lifetable read_lifetable(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  Lifetable lt;
  lt.unit = path.stem().string();
  const std::size_t age = table.column("age");
  const std::size_t lx = table.column("lx");
  for (const auto& row : table.rows) {
    lt.ages.push_back(parse_double(row[age], "lifetable " + lt.unit + " age"));
    lt.survivors.push_back(parse_double(row[lx], "lifetable " + lt.unit + " lx"));
  }
  lt.validate();
  return lt;
}

void write_lifetable(const Lifetable& table, const std::filesystem::path& path) {
  CsvWriter out(path, {"age", "lx"});
  for (std::size_t j = 0; j < table.ages.size(); ++j) {
    out.row({format_double(table.ages[j]), format_double(table.survivors[j])});
  }
}

DeathHistogram death_histogram(const Lifetable& table, double lo, double hi) {
  table.validate();
  if (!(lo < hi)) throw InputError("age range must satisfy lo < hi");
  if (lo < table.ages.front() || hi > table.ages.back()) {
    throw InputError("lifetable " + table.unit + ": age range [" + format_double(lo) + ", " + format_double(hi) +
                     "] outside the table's ages");
  }
  DeathHistogram hist;
  double total = 0.0;
  for (std::size_t j = 0; j + 1 < table.ages.size(); ++j) {
    const double a = table.ages[j];
    const double b = table.ages[j + 1];
    const double left = std::max(a, lo);
    const double right = std::min(b, hi);
    if (!(right > left)) continue;
    const double deaths = (table.survivors[j] - table.survivors[j + 1]) * (right - left) / (b - a);
    if (hist.edges.empty()) hist.edges.push_back(left);
    hist.edges.push_back(right);
    hist.masses.push_back(deaths);
    total += deaths;
  }
  if (!(total > 0.0)) throw InputError("lifetable " + table.unit + ": no deaths in the age range");
  for (double& m : hist.masses) m /= total;
  return hist;
}

double silverman_bandwidth(const DeathHistogram& hist) {
  double mean = 0.0;
  int nonempty = 0;
  for (std::size_t j = 0; j < hist.masses.size(); ++j) {
    mean += hist.masses[j] * 0.5 * (hist.edges[j] + hist.edges[j + 1]);
    nonempty += hist.masses[j] > 0.0;
  }
  double var = 0.0;
  for (std::size_t j = 0; j < hist.masses.size(); ++j) {
    const double c = 0.5 * (hist.edges[j] + hist.edges[j + 1]) - mean;
    var += hist.masses[j] * c * c;
  }
  std::vector<double> cdf{0.0};
  for (double m : hist.masses) cdf.push_back(cdf.back() + m);
  Eigen::VectorXd probs(2);
  probs << 0.25, 0.75;
  const Eigen::VectorXd quart = invert_cdf(hist.edges, cdf, probs);
  const double iqr = quart[1] - quart[0];
  double spread = std::sqrt(var);
  if (iqr > 0.0) spread = std::min(spread, iqr / 1.34);
  return 0.9 * spread * std::pow(static_cast<double>(std::max(nonempty, 1)), -0.2);
}

QuantileGrid lifetable_to_quantile(const Lifetable& table, double lo, double hi, const ProbabilityGrid& grid,
                                   std::optional<double> bandwidth) {
  const DeathHistogram hist = death_histogram(table, lo, hi);
  const double bw = bandwidth.value_or(silverman_bandwidth(hist));
  if (!(bw >= 0.0) || !std::isfinite(bw)) throw InputError("density bandwidth must be nonnegative");

  if (bw == 0.0) {
    std::vector<double> cdf{0.0};
    for (double m : hist.masses) cdf.push_back(cdf.back() + m);
    cdf.back() = 1.0;
    return QuantileGrid(grid, invert_cdf(hist.edges, cdf, *grid));
  }

  constexpr int kNodes = 2001;
  std::vector<double> x(kNodes);
  std::vector<double> density(kNodes, 0.0);
  for (int k = 0; k < kNodes; ++k) x[k] = lo + (hi - lo) * k / (kNodes - 1);
  const double norm = 1.0 / (bw * std::sqrt(2.0 * std::numbers::pi));
  for (std::size_t j = 0; j < hist.masses.size(); ++j) {
    const double w = hist.masses[j];
    if (w <= 0.0) continue;
    const double c = 0.5 * (hist.edges[j] + hist.edges[j + 1]);
    for (const double centre : {c, 2.0 * lo - c, 2.0 * hi - c}) {
      for (int k = 0; k < kNodes; ++k) {
        const double z = (x[k] - centre) / bw;
        if (std::abs(z) < 40.0) density[k] += w * norm * std::exp(-0.5 * z * z);
      }
    }
  }
  std::vector<double> cdf(kNodes, 0.0);
  for (int k = 1; k < kNodes; ++k) cdf[k] = cdf[k - 1] + 0.5 * (density[k] + density[k - 1]) * (x[k] - x[k - 1]);
  const double total = cdf.back();
  for (double& c : cdf) c /= total;
  cdf.back() = 1.0;
  return QuantileGrid(grid, invert_cdf(x, cdf, *grid));
}

QuantileGrid sample_frechet_mean_wasserstein(std::span<const QuantileGrid> Y) {
  if (Y.empty()) throw InputError("sample_frechet_mean_wasserstein: empty input");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(Y.front().size());
  for (const auto& q : Y) {
    const bool same = q.grid() == Y.front().grid() ||
                      (q.size() == Y.front().size() && q.levels() == Y.front().levels());
    if (!same) {
      throw InputError("sample_frechet_mean_wasserstein: grid mismatch");
    }
    sum += q.values();
  }
  return QuantileGrid(Y.front().grid(), sum / static_cast<double>(Y.size()));
}

Eigen::VectorXd sample_frechet_mean(const Eigen::MatrixXd& Y, const MetricSpace& space) {
  return space.weighted_frechet_mean(Y, Eigen::VectorXd::Ones(Y.cols())).point;
}

double frechet_r2(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& fitted, const MetricSpace& space) {
  if (Y.rows() != fitted.rows() || Y.cols() != fitted.cols()) throw InputError("frechet_r2: shape mismatch");
  const Eigen::VectorXd mean = sample_frechet_mean(Y, space);
  double resid = 0.0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < Y.cols(); ++i) {
    resid += space.squared_distance(Y.col(i), fitted.col(i));
    total += space.squared_distance(Y.col(i), mean);
  }
  if (!(total > 0.0)) throw InputError("frechet_r2: responses have zero Frechet variance");
  return 1.0 - resid / total;
}

Model global_frechet_model(const SphereSolverOptions& solver) {
  return {"GF", [solver](const RegressionDataset& train) -> Predictor {
            return [train, solver](const Eigen::VectorXd& x) { return global_frechet_fit(train, x, solver).point; };
          }};
}

Model local_frechet_model(std::string name, Eigen::Index column, double h, KernelFamily kernel) {
  return {std::move(name), [column, h, kernel](const RegressionDataset& train) -> Predictor {
            Eigen::VectorXd e = Eigen::VectorXd::Zero(train.covariate_dimension());
            e[column] = 1.0;
            const IndexParam theta = IndexParam::from_vector(e);
            return [train, theta, h, kernel](const Eigen::VectorXd& x) {
              return local_frechet_at(train, x, theta, h, Kernel(kernel)).point;
            };
          }};
}

Model fsi_model(double h, const FsiConfig& config) {
  FsiConfig inner = config;
  inner.threads = 1;
  return {"FSI", [h, inner](const RegressionDataset& train) -> Predictor {
            const IndexEstimate est = estimate_index(train, h, inner);
            if (!est.feasible()) throw FitFailure("FSI: no feasible index on the training set");
            const IndexParam theta = *est.theta;
            LocalFitOptions opts;
            opts.solver = inner.solver;
            return [train, theta, h, kernel = Kernel(inner.kernel), opts](const Eigen::VectorXd& x) {
              return local_frechet_at(train, x, theta, h, kernel, opts).point;
            };
          }};
}

Model mean_model() {
  return {"mean", [](const RegressionDataset& train) -> Predictor {
            const Eigen::VectorXd mean = sample_frechet_mean(train.Y(), train.space());
            return [mean](const Eigen::VectorXd&) { return mean; };
          }};
}

SplitScores mspe_splits(const RegressionDataset& data, const std::vector<Model>& models, int n_splits, int test_size,
                        std::uint64_t seed, unsigned threads) {
  const Eigen::Index n = data.size();
  if (n_splits < 1) throw InputError("mspe_splits: need at least one split");
  if (test_size < 1 || test_size >= n) throw InputError("mspe_splits: test size must be in [1, n)");

  SplitScores out;
  std::mt19937_64 rng(seed);
  std::vector<std::vector<Eigen::Index>> train_sets;
  for (int k = 0; k < n_splits; ++k) {
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Eigen::Index> test(perm.begin(), perm.begin() + test_size);
    std::vector<Eigen::Index> train(perm.begin() + test_size, perm.end());
    std::sort(test.begin(), test.end());
    std::sort(train.begin(), train.end());
    out.test_sets.push_back(std::move(test));
    train_sets.push_back(std::move(train));
  }

  const std::size_t M = models.size();
  out.mspe.assign(M, std::vector<double>(static_cast<std::size_t>(n_splits), kNaN));
  parallel_for(M * static_cast<std::size_t>(n_splits), threads, [&](std::size_t job) {
    const std::size_t m = job / static_cast<std::size_t>(n_splits);
    const std::size_t k = job % static_cast<std::size_t>(n_splits);
    try {
      const RegressionDataset train = data.subset(train_sets[k]);
      const Predictor predict = models[m].train(train);
      double total = 0.0;
      for (Eigen::Index i : out.test_sets[k]) {
        total += data.space().squared_distance(data.Y().col(i), predict(data.X().row(i).transpose()));
      }
      out.mspe[m][k] = total / static_cast<double>(test_size);
    } catch (const NumericalError&) {
    }
  });

  for (std::size_t m = 0; m < M; ++m) {
    std::vector<double> ok;
    for (double v : out.mspe[m]) {
      if (!std::isnan(v)) ok.push_back(v);
    }
    out.failed.push_back(n_splits - static_cast<int>(ok.size()));
    if (ok.empty()) {
      out.mean.push_back(kNaN);
      out.sd.push_back(kNaN);
      continue;
    }
    const double mean = std::accumulate(ok.begin(), ok.end(), 0.0) / static_cast<double>(ok.size());
    double ss = 0.0;
    for (double v : ok) ss += (v - mean) * (v - mean);
    out.mean.push_back(mean);
    out.sd.push_back(ok.size() > 1 ? std::sqrt(ss / static_cast<double>(ok.size() - 1)) : kNaN);
  }
  return out;
}

MortalityResult run_mortality_pipeline(const std::filesystem::path& lifetable_dir,
                                       const std::filesystem::path& covariates_file, const MortalityConfig& config) {
  if (!std::filesystem::is_directory(lifetable_dir)) {
    throw InputError("lifetable directory not found: " + lifetable_dir.string());
  }
  const CsvTable cov = read_csv(covariates_file);
  const std::size_t unit_col = cov.column("unit");
  std::vector<std::size_t> cov_cols;
  for (const auto& name : config.covariates) cov_cols.push_back(cov.column(name));
  const auto p = static_cast<Eigen::Index>(cov_cols.size());
  if (p < 2) throw InputError("the pipeline needs at least two covariates");

  std::vector<std::string> warnings;
  std::map<std::string, std::size_t> cov_rows;
  for (std::size_t r = 0; r < cov.rows.size(); ++r) {
    const std::string& unit = cov.rows[r][unit_col];
    if (cov_rows.count(unit)) throw InputError("covariates: duplicate unit " + unit);
    cov_rows[unit] = r;
  }
  std::vector<std::string> lifetable_units;
  for (const auto& entry : std::filesystem::directory_iterator(lifetable_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") {
      lifetable_units.push_back(entry.path().stem().string());
    }
  }
  std::sort(lifetable_units.begin(), lifetable_units.end());

  const ProbabilityGrid grid = uniform_probability_grid(config.grid_size);
  std::vector<std::string> units;
  std::vector<Eigen::VectorXd> quantiles;
  std::vector<Eigen::VectorXd> covariates;
  for (const auto& unit : lifetable_units) {
    const auto it = cov_rows.find(unit);
    if (it == cov_rows.end()) {
      warnings.push_back("unit " + unit + " has a lifetable but no covariates; dropped");
      continue;
    }
    const auto& row = cov.rows[it->second];
    Eigen::VectorXd x(p);
    bool missing = false;
    for (Eigen::Index j = 0; j < p; ++j) {
      const std::string& field = row[cov_cols[static_cast<std::size_t>(j)]];
      if (is_missing(field)) {
        missing = true;
        break;
      }
      x[j] = parse_double(field, "covariates for " + unit);
      if (!std::isfinite(x[j])) missing = true;
    }
    if (missing) {
      warnings.push_back("unit " + unit + " has missing covariates; dropped");
      continue;
    }
    const Lifetable lt = read_lifetable(lifetable_dir / (unit + ".csv"));
    quantiles.push_back(
        lifetable_to_quantile(lt, config.age_lo, config.age_hi, grid, config.density_bandwidth).values());
    covariates.push_back(std::move(x));
    units.push_back(unit);
  }
  for (const auto& [unit, r] : cov_rows) {
    if (!std::binary_search(lifetable_units.begin(), lifetable_units.end(), unit)) {
      warnings.push_back("unit " + unit + " has covariates but no lifetable; dropped");
    }
  }
  const auto n = static_cast<Eigen::Index>(units.size());
  if (n < 10) throw InputError("only " + std::to_string(n) + " usable units; at least 10 are required");

  Eigen::MatrixXd raw(n, p);
  Eigen::MatrixXd Y(config.grid_size, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    raw.row(i) = covariates[static_cast<std::size_t>(i)].transpose();
    Y.col(i) = quantiles[static_cast<std::size_t>(i)];
  }
  const RegressionDataset data = RegressionDataset(raw, Y, MetricSpace::wasserstein(grid)).standardized();
  // Singular design shows up as a non-invertible covariance in the global fit.
  (void)global_frechet_weights(data.X(), data.X().row(0).transpose());

  std::vector<ModelResult> results;
  std::vector<Model> models;

  {
    ModelResult gf{"GF", 0.0, std::nullopt, Eigen::MatrixXd(Y.rows(), n)};
    for (Eigen::Index i = 0; i < n; ++i) gf.fitted.col(i) = global_frechet_fit(data, data.X().row(i).transpose()).point;
    results.push_back(std::move(gf));
    models.push_back(global_frechet_model());
  }

  const Kernel kernel(config.fsi.kernel);
  for (Eigen::Index j = 0; j < p; ++j) {
    const std::string name = "LF_" + config.covariates[static_cast<std::size_t>(j)];
    Eigen::VectorXd e = Eigen::VectorXd::Zero(p);
    e[j] = 1.0;
    const IndexParam theta = IndexParam::from_vector(e);
    const std::vector<double> lf_grid = bandwidth_grid_for_index(data.X().col(j), config.bandwidth_grid_size);
    const LoocvResult cv = loocv_bandwidth(data, lf_grid, local_index_fitter(theta, kernel), config.threads);
    ModelResult lf{name, 0.0, cv.h_star, Eigen::MatrixXd(Y.rows(), n)};
    for (Eigen::Index i = 0; i < n; ++i) {
      lf.fitted.col(i) = local_frechet_at(data, data.X().row(i).transpose(), theta, cv.h_star, kernel).point;
    }
    results.push_back(std::move(lf));
    models.push_back(local_frechet_model(name, j, cv.h_star, config.fsi.kernel));
  }

  FsiConfig fsi_config = config.fsi;
  fsi_config.threads = config.threads;
  fsi_config.auto_grid_size = config.bandwidth_grid_size;
  FsiFit fit = fit_fsi(data, fsi_config);
  results.push_back({"FSI", 0.0, fit.h_star, fit.fitted});
  models.push_back(fsi_model(fit.h_star, fsi_config));

  for (auto& r : results) r.r2 = frechet_r2(Y, r.fitted, data.space());

  std::optional<SplitScores> splits;
  if (config.splits > 0) {
    splits = mspe_splits(data, models, config.splits, config.test_size, config.seed, config.threads);
  }

  std::vector<WhatIfRow> whatif;
  const Standardization& st = *data.standardization();
  Eigen::VectorXd medians(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    std::vector<double> col(raw.col(j).data(), raw.col(j).data() + n);
    medians[j] = percentile(col, 0.5);
  }
  for (Eigen::Index j = 0; j < p && config.whatif_points > 0; ++j) {
    std::vector<double> col(raw.col(j).data(), raw.col(j).data() + n);
    const double a = percentile(col, 0.1);
    const double b = percentile(col, 0.9);
    for (int k = 0; k < config.whatif_points; ++k) {
      const double frac = config.whatif_points == 1 ? 0.5 : static_cast<double>(k) / (config.whatif_points - 1);
      Eigen::VectorXd x = medians;
      x[j] = a + frac * (b - a);
      const Eigen::VectorXd z = st.apply(x);
      whatif.push_back({config.covariates[static_cast<std::size_t>(j)], x[j], z[j], predict(fit, data, z).point});
    }
  }

  return MortalityResult{std::move(units), std::move(warnings), data,   raw,
                         std::move(results), std::move(fit), std::move(splits), std::move(whatif)};
}

void write_mortality_outputs(const MortalityResult& result, const MortalityConfig& config,
                             const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto& splits = result.splits;
  {
    std::vector<std::string> header{"model", "r2", "h_star"};
    if (splits) header.insert(header.end(), {"mspe_mean", "mspe_sd", "failed_splits"});
    CsvWriter out(out_dir / "comparison.csv", header);
    for (std::size_t m = 0; m < result.models.size(); ++m) {
      const ModelResult& r = result.models[m];
      std::vector<std::string> row{r.name, format_double(r.r2), r.h_star ? format_double(*r.h_star) : ""};
      if (splits) {
        row.insert(row.end(), {format_double(splits->mean[m]), format_double(splits->sd[m]),
                               std::to_string(splits->failed[m])});
      }
      out.row(row);
    }
  }
  {
    nlohmann::ordered_json j;
    j["covariates"] = config.covariates;
    j["theta_hat"] = std::vector<double>(result.fsi.theta_hat.theta().data(),
                                         result.fsi.theta_hat.theta().data() + result.fsi.theta_hat.dimension());
    j["eta"] = std::vector<double>(result.fsi.theta_hat.eta().data(),
                                   result.fsi.theta_hat.eta().data() + result.fsi.theta_hat.eta().size());
    j["h_star"] = result.fsi.h_star;
    j["criterion"] = result.fsi.criterion;
    nlohmann::ordered_json path = nlohmann::ordered_json::array();
    for (std::size_t g = 0; g < result.fsi.path.size(); ++g) {
      const IndexEstimate& e = result.fsi.path[g];
      nlohmann::ordered_json entry;
      entry["h"] = e.h;
      entry["feasible"] = e.feasible();
      if (e.feasible()) {
        entry["theta"] = std::vector<double>(e.theta->theta().data(), e.theta->theta().data() + e.theta->dimension());
        entry["criterion"] = e.criterion;
      }
      if (g < result.fsi.loocv_scores.size() && std::isfinite(result.fsi.loocv_scores[g])) {
        entry["loocv_score"] = result.fsi.loocv_scores[g];
      }
      path.push_back(entry);
    }
    j["bandwidth_path"] = path;
    std::ofstream(out_dir / "theta_hat.json") << j.dump(2) << '\n';
  }
  const Eigen::VectorXd& levels = *result.data.space().grid();
  std::vector<std::string> level_names;
  for (Eigen::Index k = 0; k < levels.size(); ++k) level_names.push_back("q" + format_double(levels[k]));
  {
    std::vector<std::string> header{"unit", "model"};
    header.insert(header.end(), level_names.begin(), level_names.end());
    CsvWriter out(out_dir / "fitted_quantiles.csv", header);
    auto emit = [&](const std::string& unit, const std::string& model, const Eigen::VectorXd& q) {
      std::vector<std::string> row{unit, model};
      for (Eigen::Index k = 0; k < q.size(); ++k) row.push_back(format_double(q[k]));
      out.row(row);
    };
    for (std::size_t i = 0; i < result.units.size(); ++i) {
      const auto col = static_cast<Eigen::Index>(i);
      emit(result.units[i], "observed", result.data.Y().col(col));
      for (const auto& r : result.models) emit(result.units[i], r.name, r.fitted.col(col));
    }
  }
  {
    CsvWriter out(out_dir / "splits.csv", {"split", "model", "mspe", "test_units"});
    if (splits) {
      for (std::size_t k = 0; k < splits->test_sets.size(); ++k) {
        std::string test;
        for (Eigen::Index i : splits->test_sets[k]) {
          if (!test.empty()) test += ';';
          test += result.units[static_cast<std::size_t>(i)];
        }
        for (std::size_t m = 0; m < result.models.size(); ++m) {
          out.row({std::to_string(k), result.models[m].name, format_double(splits->mspe[m][k]), test});
        }
      }
    }
  }
  {
    std::vector<std::string> header{"covariate", "value", "standardized"};
    header.insert(header.end(), level_names.begin(), level_names.end());
    CsvWriter out(out_dir / "whatif.csv", header);
    for (const auto& w : result.whatif) {
      std::vector<std::string> row{w.covariate, format_double(w.raw_value), format_double(w.standardized_value)};
      for (Eigen::Index k = 0; k < w.quantiles.size(); ++k) row.push_back(format_double(w.quantiles[k]));
      out.row(row);
    }
  }
}

Eigen::VectorXd default_synthetic_theta() {
  Eigen::VectorXd theta(5);
  theta << 0.65, 0.72, -0.10, 0.05, 0.20;
  return theta.normalized();
}

void write_synthetic_mortality(const std::filesystem::path& dir, const SyntheticMortalityConfig& config) {
  if (config.units < 10) throw InputError("synthetic data needs at least 10 units");
  const Eigen::VectorXd theta0 =
      normalize_identifiable(config.theta0.size() ? config.theta0 : default_synthetic_theta()).theta();
  if (theta0.size() != 5) throw InputError("synthetic theta0 must have 5 entries");
  std::filesystem::create_directories(dir / "lifetables");

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int n = config.units;
  // Raw covariate scales loosely resemble HDI, health spending (% GDP),
  // GDP growth (%), infant mortality (per 1000) and CO2 (t per capita).
  Eigen::MatrixXd raw(n, 5);
  for (int i = 0; i < n; ++i) {
    raw(i, 0) = 0.70 + 0.25 * unif(rng);
    raw(i, 1) = 4.0 + 8.0 * unif(rng);
    raw(i, 2) = 2.0 + 2.0 * normal(rng);
    raw(i, 3) = 2.0 + 30.0 * unif(rng);
    raw(i, 4) = 1.0 + 14.0 * unif(rng);
  }
  const Eigen::RowVectorXd mean = raw.colwise().mean();
  const Eigen::MatrixXd centered = raw.rowwise() - mean;
  const Eigen::RowVectorXd sd = (centered.colwise().squaredNorm() / (n - 1)).cwiseSqrt();
  const Eigen::MatrixXd Z = centered.array().rowwise() / sd.array();

  nlohmann::ordered_json truth;
  truth["theta0"] = std::vector<double>(theta0.data(), theta0.data() + theta0.size());
  truth["covariates"] = {"hdi", "hce", "gdpc", "im", "co2e"};
  truth["seed"] = config.seed;
  truth["link"] = "age at death ~ normal(74 + 7 tanh(2U) + e, 11 - 3 tanh(2U)) truncated to [20, 110], e ~ N(0, " +
                  format_double(config.mean_noise) + "^2)";
  nlohmann::ordered_json per_unit = nlohmann::ordered_json::array();

  CsvWriter cov(dir / "covariates.csv", {"unit", "hdi", "hce", "gdpc", "im", "co2e"});
  for (int i = 0; i < n; ++i) {
    char name[16];
    std::snprintf(name, sizeof name, "U%02d", i + 1);
    const double U = Z.row(i).dot(theta0);
    const double mu = 74.0 + 7.0 * std::tanh(2.0 * U) + config.mean_noise * normal(rng);
    const double sigma = 11.0 - 3.0 * std::tanh(2.0 * U);
    const double F20 = normal_cdf((20.0 - mu) / sigma);
    const double F110 = normal_cdf((110.0 - mu) / sigma);

    Lifetable lt;
    lt.unit = name;
    for (int age = 0; age <= 110; ++age) {
      double F;
      if (age < 20) {
        F = 0.02 * age / 20.0;
      } else {
        F = 0.02 + 0.98 * (normal_cdf((age - mu) / sigma) - F20) / (F110 - F20);
      }
      lt.ages.push_back(age);
      lt.survivors.push_back(std::round(100000.0 * (1.0 - std::min(F, 1.0))));
    }
    lt.survivors.back() = 0.0;
    write_lifetable(lt, dir / "lifetables" / (lt.unit + ".csv"));

    std::vector<std::string> row{lt.unit};
    for (int j = 0; j < 5; ++j) row.push_back(format_double(raw(i, j)));
    cov.row(row);
    per_unit.push_back({{"unit", lt.unit}, {"index", U}, {"mean", mu}, {"sd", sigma}});
  }
  truth["units"] = per_unit;
  std::ofstream(dir / "truth.json") << truth.dump(2) << '\n';
}

}  // namespace fsi
