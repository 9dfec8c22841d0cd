#include "fsi/sphere_sim.hpp"

#include "fsi/csv.hpp"
#include "fsi/errors.hpp"
#include "fsi/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace fsi {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

MetricSummary summarize(const std::vector<ReplicateRecord>& records, std::size_t setting, std::size_t grid_size,
                        double ReplicateRecord::*metric) {
  MetricSummary s;
  s.average.assign(grid_size, 0.0);
  s.sd.assign(grid_size, kNaN);
  s.count.assign(grid_size, 0);
  std::vector<std::vector<double>> values(grid_size);
  for (std::size_t r = 0; r < records.size(); ++r) {
    const ReplicateRecord& rec = records[r];
    if (rec.setting != setting) continue;
    const double v = rec.*metric;
    if (std::isnan(v)) continue;
    values[r % grid_size].push_back(v);
  }
  for (std::size_t g = 0; g < grid_size; ++g) {
    const auto& v = values[g];
    s.count[g] = static_cast<int>(v.size());
    if (v.empty()) {
      s.average[g] = kNaN;
      continue;
    }
    double sum = 0.0;
    for (double x : v) sum += x;
    const double mean = sum / static_cast<double>(v.size());
    s.average[g] = mean;
    if (v.size() > 1) {
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      s.sd[g] = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < grid_size; ++g) {
    if (!std::isnan(s.average[g]) && s.average[g] < best) {
      best = s.average[g];
      s.best = g;
    }
  }
  return s;
}

}  // namespace

IndexParam SimSetting::true_index() const {
  if (theta0) {
    if (theta0->size() != p) throw InputError("theta0 length must equal p");
    return normalize_identifiable(*theta0);
  }
  return normalize_identifiable(Eigen::VectorXd::Ones(p));
}

void SimSetting::validate() const {
  if (p < 2) {
    throw InputError("p must be at least 2: for p = 1 the index set is {1} and the model is plain local Frechet "
                     "regression");
  }
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw InputError("sigma2 must be positive");
  if (replicates < 1) throw InputError("replicates must be at least 1");
  if (n < 10) throw InputError("n must be at least 10");
  (void)true_index();
}

std::string SimSetting::label() const {
  return "n" + std::to_string(n) + "_p" + std::to_string(p) + "_s" + format_double(sigma2);
}

Eigen::Vector3d sphere_regression_function(double u, int p) {
  const double v = u / std::sqrt(static_cast<double>(p));
  const double r = std::sqrt(std::max(0.0, 1.0 - v * v));
  return {r * std::cos(std::numbers::pi * v), r * std::sin(std::numbers::pi * v), v};
}

Eigen::Matrix<double, 3, 2> tangent_basis(const Eigen::Vector3d& m) {
  std::array<int, 3> axes{0, 1, 2};
  std::stable_sort(axes.begin(), axes.end(), [&](int a, int b) { return std::abs(m[a]) < std::abs(m[b]); });
  Eigen::Matrix<double, 3, 2> basis;
  for (int k = 0; k < 2; ++k) {
    Eigen::Vector3d e = Eigen::Vector3d::Unit(axes[static_cast<std::size_t>(k)]);
    e -= m.dot(e) * m;
    for (int j = 0; j < k; ++j) e -= basis.col(j).dot(e) * basis.col(j);
    basis.col(k) = e.normalized();
  }
  return basis;
}

SphereSample generate_sphere_dataset(const SimSetting& setting, std::uint64_t replicate) {
  setting.validate();
  const IndexParam theta0 = setting.true_index();
  std::seed_seq seq{static_cast<std::uint32_t>(setting.seed), static_cast<std::uint32_t>(setting.seed >> 32),
                    static_cast<std::uint32_t>(replicate), static_cast<std::uint32_t>(replicate >> 32)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::normal_distribution<double> normal(0.0, std::sqrt(setting.sigma2));

  const int n = setting.n;
  const int p = setting.p;
  Eigen::MatrixXd X(n, p);
  Eigen::MatrixXd Y(3, n);
  Eigen::MatrixXd truth(3, n);
  Eigen::VectorXd U(n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(p));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) X(i, j) = unif(rng) * scale;
  }
  for (int i = 0; i < n; ++i) {
    U[i] = theta0.project(X.row(i).transpose());
    const Eigen::Vector3d m = sphere_regression_function(U[i], p);
    const Eigen::Matrix<double, 3, 2> V = tangent_basis(m);
    const double c1 = normal(rng);
    const double c2 = normal(rng);
    const Eigen::Vector3d z = c1 * V.col(0) + c2 * V.col(1);
    truth.col(i) = m;
    Y.col(i) = sphere::exp(m, z);
  }
  return {RegressionDataset(std::move(X), std::move(Y), MetricSpace::sphere()), std::move(truth), std::move(U)};
}

double se_theta(const Eigen::VectorXd& theta_hat, const Eigen::VectorXd& theta0) {
  if (theta_hat.size() != theta0.size()) throw InputError("se_theta: dimension mismatch");
  const double c = std::min(1.0, std::abs(theta0.dot(theta_hat)));
  const double a = std::acos(c);
  return a * a;
}

double msee(const Eigen::MatrixXd& fitted, const Eigen::MatrixXd& truth) {
  if (fitted.rows() != truth.rows() || fitted.cols() != truth.cols()) throw InputError("msee: length mismatch");
  if (fitted.cols() == 0) throw InputError("msee: empty input");
  double total = 0.0;
  for (Eigen::Index i = 0; i < fitted.cols(); ++i) {
    const double c = std::clamp(truth.col(i).dot(fitted.col(i)), -1.0, 1.0);
    const double a = std::acos(c);
    total += a * a;
  }
  return total / static_cast<double>(fitted.cols());
}

int SimReport::failures() const {
  int total = 0;
  for (const auto& s : summaries) total += s.failures;
  return total;
}

SimReport run_simulation(const std::vector<SimSetting>& settings, const SimConfig& config) {
  if (config.bandwidths.empty()) throw InputError("run_simulation: empty bandwidth grid");
  for (double h : config.bandwidths) {
    if (!(h > 0.0) || !std::isfinite(h)) throw InputError("bandwidths must be positive");
  }
  for (const auto& s : settings) s.validate();

  SimReport report;
  report.bandwidths = config.bandwidths;
  const std::size_t G = config.bandwidths.size();
  const Kernel kernel(config.fsi.kernel);

  for (std::size_t si = 0; si < settings.size(); ++si) {
    const SimSetting& setting = settings[si];
    FsiConfig fsi_config = config.fsi;
    fsi_config.seed = setting.seed;  // the same starts for every replicate of a setting
    fsi_config.threads = 1;
    const IndexParam theta0 = setting.true_index();

    const auto R = static_cast<std::size_t>(setting.replicates);
    std::vector<ReplicateRecord> block(R * G);
    parallel_for(R, config.threads, [&](std::size_t r) {
      const SphereSample sample = generate_sphere_dataset(setting, r);
      for (std::size_t g = 0; g < G; ++g) {
        const double h = config.bandwidths[g];
        ReplicateRecord& rec = block[r * G + g];
        rec.setting = si;
        rec.replicate = static_cast<int>(r);
        rec.h = h;
        rec.se = rec.msee_fsi = rec.msee_mlf = kNaN;
        try {
          const IndexEstimate est = estimate_index(sample.data, h, fsi_config);
          if (est.feasible()) {
            rec.se = se_theta(est.theta->theta(), theta0.theta());
            rec.msee_fsi = msee(est.fitted, sample.truth);
          }
        } catch (const NumericalError&) {
        }
        if (!config.run_mlf) continue;
        try {
          Eigen::MatrixXd fitted(3, setting.n);
          for (int i = 0; i < setting.n; ++i) {
            fitted.col(i) =
                multivariate_local_frechet_at(sample.data, sample.data.X().row(i).transpose(), h, kernel,
                                              fsi_config.solver)
                    .point;
          }
          rec.msee_mlf = msee(fitted, sample.truth);
        } catch (const NumericalError&) {
        }
      }
    });

    const std::size_t offset = report.records.size();
    report.records.insert(report.records.end(), block.begin(), block.end());
    std::vector<ReplicateRecord> mine(report.records.begin() + static_cast<std::ptrdiff_t>(offset),
                                      report.records.end());
    SettingSummary summary;
    summary.setting = setting;
    summary.se = summarize(mine, si, G, &ReplicateRecord::se);
    summary.msee_fsi = summarize(mine, si, G, &ReplicateRecord::msee_fsi);
    summary.msee_mlf = summarize(mine, si, G, &ReplicateRecord::msee_mlf);
    for (const auto& rec : mine) {
      summary.failures += std::isnan(rec.se) + std::isnan(rec.msee_fsi) + (config.run_mlf && std::isnan(rec.msee_mlf));
    }
    report.summaries.push_back(std::move(summary));
  }
  return report;
}

void write_replicates_csv(const SimReport& report, const std::filesystem::path& path) {
  CsvWriter out(path, {"setting", "n", "p", "sigma2", "replicate", "h", "se", "msee_fsi", "msee_mlf"});
  for (const auto& rec : report.records) {
    const SimSetting& s = report.summaries.at(rec.setting).setting;
    out.row({s.label(), std::to_string(s.n), std::to_string(s.p), format_double(s.sigma2),
             std::to_string(rec.replicate), format_double(rec.h), format_double(rec.se), format_double(rec.msee_fsi),
             format_double(rec.msee_mlf)});
  }
}

void write_summary_csv(const SimReport& report, const std::filesystem::path& path) {
  CsvWriter out(path, {"setting", "p", "n", "sigma2", "replicates", "failures", "se_avg", "se_sd", "se_h",
                       "msee_fsi_avg", "msee_fsi_sd", "msee_fsi_h", "msee_mlf_avg", "msee_mlf_sd", "msee_mlf_h"});
  for (const auto& s : report.summaries) {
    auto cells = [&](const MetricSummary& m) {
      return std::vector<std::string>{format_double(m.average[m.best]), format_double(m.sd[m.best]),
                                      format_double(report.bandwidths[m.best])};
    };
    std::vector<std::string> row{s.setting.label(), std::to_string(s.setting.p), std::to_string(s.setting.n),
                                 format_double(s.setting.sigma2), std::to_string(s.setting.replicates),
                                 std::to_string(s.failures)};
    for (const MetricSummary* m : {&s.se, &s.msee_fsi, &s.msee_mlf}) {
      const auto c = cells(*m);
      row.insert(row.end(), c.begin(), c.end());
    }
    out.row(row);
  }
}

}  // namespace fsi
