#include "cli.hpp"

#include "fsi/csv.hpp"
#include "fsi/errors.hpp"
#include "fsi/fsi.hpp"
#include "fsi/mortality.hpp"
#include "fsi/sphere_sim.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <regex>
#include <sstream>

#ifndef FSI_VERSION
#define FSI_VERSION "0.0.0"
#endif

namespace fsi::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 15];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int k = 0; k < len; ++k) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[k]);
  return hex.str();
}

unsigned resolve_thread_option(int flag) {
  if (flag >= 0) return static_cast<unsigned>(flag);
  if (const char* env = std::getenv("FSI_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v >= 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
    throw InputError(std::string("FSI_THREADS must be a nonnegative integer, got '") + env + "'");
  }
  return 0;
}

StartScheme parse_starts(const std::string& s) {
  if (s == "random") return StartScheme::Random;
  if (s == "lattice") return StartScheme::Lattice;
  throw InputError("--starts must be 'random' or 'lattice'");
}

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json fsi_config_json(const FsiConfig& c) {
  json j;
  j["bandwidths"] = c.bandwidths.empty() ? json("auto") : json(c.bandwidths);
  j["auto_grid_size"] = c.auto_grid_size;
  j["start_count"] = c.start_count ? json(*c.start_count) : json("default");
  j["retained_count"] = c.retained_count ? json(*c.retained_count) : json("default");
  j["seed"] = c.seed;
  j["kernel"] = to_string(c.kernel);
  j["starts"] = c.start_scheme == StartScheme::Lattice ? "lattice" : "random";
  j["loocv"] = c.loocv == LoocvVariant::RefitTheta ? "refit_theta" : "fixed_theta";
  j["simplex_step"] = c.simplex_step;
  j["simplex_tolerance"] = c.simplex_tolerance;
  j["evaluations_per_angle"] = c.evaluations_per_angle;
  j["sphere_tolerance"] = c.solver.tolerance;
  j["sphere_max_iterations"] = c.solver.max_iterations;
  return j;
}

/// Collects manifest fields and writes manifest.json into the output directory.
class Manifest {
 public:
  Manifest(std::string command, const std::vector<std::string>& args)
      : start_(std::chrono::steady_clock::now()) {
    doc_["command"] = std::move(command);
    doc_["arguments"] = args;
    doc_["version"] = FSI_VERSION;
  }

  json& operator[](const char* key) { return doc_[key]; }

  void add_input(const fs::path& path) {
    if (fs::is_directory(path)) {
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(path)) {
        if (e.is_regular_file()) files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) doc_["inputs"][f.string()] = sha256_file(f);
    } else if (fs::is_regular_file(path)) {
      doc_["inputs"][path.string()] = sha256_file(path);
    }
  }

  void write(const fs::path& out_dir, int exit_code, const std::string& message) {
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    doc_["exit_code"] = exit_code;
    doc_["status"] = exit_code == 0 ? "ok" : message;
    doc_["duration_seconds"] = seconds;
    if (!doc_.contains("inputs")) doc_["inputs"] = json::object();
    std::ofstream(out_dir / "manifest.json") << doc_.dump(2) << '\n';
  }

 private:
  json doc_;
  std::chrono::steady_clock::time_point start_;
};

// Runs `body` after the output directory exists, recording the outcome in the manifest.
template <class Body>
int with_manifest(Manifest& manifest, const fs::path& out_dir, std::ostream& err, Body&& body) {
  fs::create_directories(out_dir);
  int code = 0;
  std::string message;
  try {
    code = body();
    if (code != 0) message = "failed";
  } catch (const InputError& e) {
    code = 1;
    message = e.what();
    err << "error: " << e.what() << '\n';
  } catch (const NumericalError& e) {
    code = 2;
    message = e.what();
    err << "numerical failure: " << e.what() << '\n';
  }
  manifest.write(out_dir, code, message);
  return code;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string settings_file;
  std::vector<int> n{100};
  std::vector<int> p{2};
  std::vector<double> sigma2{0.4};
  int replicates = 1;
  std::uint64_t seed = 1;
  std::vector<double> bandwidths;
  std::vector<double> theta0;
  std::string out;
  int threads = -1;
  bool emit_data = false;
  bool no_mlf = false;
  std::string starts = "random";
  std::string kernel = "gaussian";
};

std::vector<double> default_sim_bandwidths() { return {0.1, 0.14, 0.2, 0.28, 0.4, 0.56, 0.8}; }

int cmd_simulate(const SimulateArgs& a, const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  std::vector<SimSetting> settings;
  std::vector<double> bandwidths = a.bandwidths;
  auto make = [&](int n, int p, double s2, int reps, std::uint64_t seed, const std::vector<double>& th) {
    SimSetting s;
    s.n = n;
    s.p = p;
    s.sigma2 = s2;
    s.replicates = reps;
    s.seed = seed;
    if (!th.empty()) s.theta0 = Eigen::Map<const Eigen::VectorXd>(th.data(), static_cast<Eigen::Index>(th.size()));
    s.validate();
    return s;
  };
  if (!a.settings_file.empty()) {
    std::ifstream in(a.settings_file);
    if (!in) throw InputError("cannot open settings file " + a.settings_file);
    json cfg;
    try {
      cfg = json::parse(in);
    } catch (const json::exception& e) {
      throw InputError("settings file: " + std::string(e.what()));
    }
    try {
      if (cfg.contains("bandwidths") && bandwidths.empty()) bandwidths = cfg["bandwidths"].get<std::vector<double>>();
      std::uint64_t k = 0;
      for (const auto& s : cfg.at("settings")) {
        settings.push_back(make(s.value("n", a.n.front()), s.value("p", a.p.front()),
                                s.value("sigma2", a.sigma2.front()), s.value("replicates", a.replicates),
                                s.value("seed", a.seed + k), s.value("theta0", a.theta0)));
        ++k;
      }
    } catch (const json::exception& e) {
      throw InputError("settings file: " + std::string(e.what()));
    }
  } else {
    std::uint64_t k = 0;
    for (int p : a.p) {
      for (double s2 : a.sigma2) {
        for (int n : a.n) settings.push_back(make(n, p, s2, a.replicates, a.seed + k++, a.theta0));
      }
    }
  }
  if (settings.empty()) throw InputError("no simulation settings given");
  if (bandwidths.empty()) bandwidths = default_sim_bandwidths();

  SimConfig config;
  config.bandwidths = bandwidths;
  config.threads = resolve_thread_option(a.threads);
  config.run_mlf = !a.no_mlf;
  config.fsi.start_scheme = parse_starts(a.starts);
  config.fsi.kernel = kernel_family_from_string(a.kernel);

  Manifest manifest("simulate", argv);
  json js = json::array();
  for (const auto& s : settings) {
    js.push_back({{"label", s.label()},
                  {"n", s.n},
                  {"p", s.p},
                  {"sigma2", s.sigma2},
                  {"replicates", s.replicates},
                  {"seed", s.seed},
                  {"theta0", vec_json(s.true_index().theta())}});
  }
  manifest["config"] = {{"settings", js},
                        {"bandwidths", bandwidths},
                        {"mlf", config.run_mlf},
                        {"fsi", fsi_config_json(config.fsi)},
                        {"threads", config.threads}};
  manifest["seed"] = a.seed;
  if (!a.settings_file.empty()) manifest.add_input(a.settings_file);

  const fs::path out_dir = a.out;
  return with_manifest(manifest, out_dir, err, [&] {
    if (a.emit_data) {
      for (const auto& s : settings) {
        const SphereSample sample = generate_sphere_dataset(s, 0);
        std::vector<std::string> header;
        for (int j = 1; j <= s.p; ++j) header.push_back("x" + std::to_string(j));
        header.insert(header.end(), {"y1", "y2", "y3", "m1", "m2", "m3"});
        CsvWriter w(out_dir / ("data_" + s.label() + ".csv"), header);
        for (int i = 0; i < s.n; ++i) {
          std::vector<std::string> row;
          for (int j = 0; j < s.p; ++j) row.push_back(format_double(sample.data.X()(i, j)));
          for (int k = 0; k < 3; ++k) row.push_back(format_double(sample.data.Y()(k, i)));
          for (int k = 0; k < 3; ++k) row.push_back(format_double(sample.truth(k, i)));
          w.row(row);
        }
      }
    }
    const SimReport report = run_simulation(settings, config);
    write_replicates_csv(report, out_dir / "sim_replicates.csv");
    write_summary_csv(report, out_dir / "sim_summary.csv");
    for (const auto& s : report.summaries) {
      out << s.setting.label() << ": SE " << format_double(s.se.average[s.se.best]) << ", MSEE_FSI "
          << format_double(s.msee_fsi.average[s.msee_fsi.best]) << ", MSEE_mLF "
          << format_double(s.msee_mlf.average[s.msee_mlf.best]) << ", failures " << s.failures << '\n';
    }
    if (report.failures() > 0) {
      err << "error: " << report.failures() << " replicate fits failed\n";
      return 2;
    }
    return 0;
  });
}

// ---------------------------------------------------------------------------

struct MortalityArgs {
  std::string lifetables;
  std::string covariates;
  std::string out;
  int splits = 30;
  int test_size = 10;
  std::uint64_t seed = 1;
  std::vector<double> age_range{20.0, 110.0};
  int grid_size = 101;
  std::string density_bw = "auto";
  std::vector<std::string> covariate_names{"hdi", "hce", "gdpc", "im", "co2e"};
  std::vector<double> bandwidths;
  bool refit_theta = false;
  std::string starts = "lattice";
  std::string kernel = "gaussian";
  int threads = -1;
};

int cmd_mortality(const MortalityArgs& a, const std::vector<std::string>& argv, std::ostream& out,
                  std::ostream& err) {
  if (!fs::is_directory(a.lifetables)) throw InputError("lifetable directory not found: " + a.lifetables);
  if (!fs::is_regular_file(a.covariates)) throw InputError("covariates file not found: " + a.covariates);
  if (a.age_range.size() != 2) throw InputError("--age-range takes two values");

  MortalityConfig config;
  config.age_lo = a.age_range[0];
  config.age_hi = a.age_range[1];
  config.grid_size = a.grid_size;
  if (a.density_bw != "auto") config.density_bandwidth = parse_double(a.density_bw, "--density-bw");
  config.covariates = a.covariate_names;
  config.splits = a.splits;
  config.test_size = a.test_size;
  config.seed = a.seed;
  config.threads = resolve_thread_option(a.threads);
  config.fsi.bandwidths = a.bandwidths;
  config.fsi.seed = a.seed;
  config.fsi.start_scheme = parse_starts(a.starts);
  config.fsi.kernel = kernel_family_from_string(a.kernel);
  if (a.refit_theta) config.fsi.loocv = LoocvVariant::RefitTheta;
  if (config.splits < 0) throw InputError("--splits must be nonnegative");

  Manifest manifest("mortality", argv);
  manifest["config"] = {{"age_range", a.age_range},
                        {"grid_size", config.grid_size},
                        {"density_bandwidth", a.density_bw},
                        {"covariates", config.covariates},
                        {"splits", config.splits},
                        {"test_size", config.test_size},
                        {"fsi", fsi_config_json(config.fsi)},
                        {"threads", config.threads}};
  manifest["seed"] = a.seed;
  manifest.add_input(a.lifetables);
  manifest.add_input(a.covariates);

  return with_manifest(manifest, a.out, err, [&] {
    const MortalityResult result = run_mortality_pipeline(a.lifetables, a.covariates, config);
    for (const auto& w : result.warnings) err << "warning: " << w << '\n';
    write_mortality_outputs(result, config, a.out);
    out << "units: " << result.units.size() << '\n';
    for (std::size_t m = 0; m < result.models.size(); ++m) {
      out << result.models[m].name << ": R2 " << format_double(result.models[m].r2);
      if (result.splits) out << ", MSPE " << format_double(result.splits->mean[m]);
      out << '\n';
    }
    return 0;
  });
}

// ---------------------------------------------------------------------------

struct FitArgs {
  std::string data;
  std::string geometry;
  std::string out;
  std::vector<double> bandwidths;
  std::uint64_t seed = 1;
  std::string starts = "random";
  std::string kernel = "gaussian";
  bool refit_theta = false;
  int start_count = 0;
  int retained = 0;
  int threads = -1;
};

int cmd_fit(const FitArgs& a, const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  const CsvTable table = read_csv(a.data);
  std::vector<std::size_t> xcols;
  const std::regex xname("x[0-9]+");
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (std::regex_match(table.header[c], xname)) xcols.push_back(c);
  }
  if (xcols.empty()) throw InputError("missing required covariate columns x1, x2, ...");
  std::sort(xcols.begin(), xcols.end(), [&](std::size_t l, std::size_t r) {
    return std::stoi(table.header[l].substr(1)) < std::stoi(table.header[r].substr(1));
  });

  std::vector<std::size_t> ycols;
  std::optional<MetricSpace> space;
  if (a.geometry == "sphere") {
    for (const char* name : {"y1", "y2", "y3"}) ycols.push_back(table.column(name));
    space = MetricSpace::sphere();
  } else if (a.geometry == "euclidean") {
    ycols.push_back(table.column(table.has_column("y") ? "y" : "y1"));
    space = MetricSpace::euclidean();
  } else if (a.geometry == "wasserstein") {
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      if (!table.header[c].empty() && table.header[c][0] == 'q') ycols.push_back(c);
    }
    if (ycols.size() < 2) throw InputError("wasserstein geometry needs at least two quantile columns q...");
    space = MetricSpace::wasserstein(uniform_probability_grid(static_cast<Eigen::Index>(ycols.size())));
  } else {
    throw InputError("--geometry must be sphere, wasserstein or euclidean");
  }

  const auto n = static_cast<Eigen::Index>(table.rows.size());
  Eigen::MatrixXd X(n, static_cast<Eigen::Index>(xcols.size()));
  Eigen::MatrixXd Y(static_cast<Eigen::Index>(ycols.size()), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    const std::string where = a.data + " row " + std::to_string(i + 2);
    for (std::size_t j = 0; j < xcols.size(); ++j) X(i, static_cast<Eigen::Index>(j)) = parse_double(row[xcols[j]], where);
    for (std::size_t k = 0; k < ycols.size(); ++k) Y(static_cast<Eigen::Index>(k), i) = parse_double(row[ycols[k]], where);
  }
  const RegressionDataset data(X, Y, *space);

  FsiConfig config;
  config.bandwidths = a.bandwidths;
  config.seed = a.seed;
  config.start_scheme = parse_starts(a.starts);
  config.kernel = kernel_family_from_string(a.kernel);
  if (a.refit_theta) config.loocv = LoocvVariant::RefitTheta;
  if (a.start_count > 0) config.start_count = a.start_count;
  if (a.retained > 0) config.retained_count = a.retained;
  config.threads = resolve_thread_option(a.threads);

  Manifest manifest("fit", argv);
  manifest["config"] = {{"geometry", a.geometry}, {"fsi", fsi_config_json(config)}, {"threads", config.threads}};
  manifest["seed"] = a.seed;
  manifest.add_input(a.data);

  const fs::path out_dir = a.out;
  return with_manifest(manifest, out_dir, err, [&] {
    const FsiFit fit = fit_fsi(data, config);
    json j;
    j["theta_hat"] = vec_json(fit.theta_hat.theta());
    j["eta"] = vec_json(fit.theta_hat.eta());
    j["h_star"] = fit.h_star;
    j["criterion"] = fit.criterion;
    j["n"] = n;
    j["geometry"] = a.geometry;
    std::ofstream(out_dir / "theta_hat.json") << j.dump(2) << '\n';

    std::vector<std::string> header{"row"};
    for (std::size_t k = 0; k < ycols.size(); ++k) header.push_back(table.header[ycols[k]]);
    CsvWriter fitted(out_dir / "fitted.csv", header);
    for (Eigen::Index i = 0; i < n; ++i) {
      std::vector<std::string> row{std::to_string(i)};
      for (Eigen::Index k = 0; k < fit.fitted.rows(); ++k) row.push_back(format_double(fit.fitted(k, i)));
      fitted.row(row);
    }

    CsvWriter trace(out_dir / "criterion_trace.csv", {"h", "feasible", "loocv_score", "start", "start_angles",
                                                      "screen_value", "retained", "final_value", "evaluations"});
    for (std::size_t g = 0; g < fit.path.size(); ++g) {
      const IndexEstimate& e = fit.path[g];
      const std::string score = g < fit.loocv_scores.size() ? format_double(fit.loocv_scores[g]) : "";
      for (std::size_t k = 0; k < e.starts.size(); ++k) {
        const StartTrace& s = e.starts[k];
        std::string angles;
        for (Eigen::Index c = 0; c < s.start.size(); ++c) angles += (c ? ";" : "") + format_double(s.start[c]);
        trace.row({format_double(e.h), e.feasible() ? "1" : "0", score, std::to_string(k), angles,
                   format_double(s.screen_value), s.retained ? "1" : "0",
                   s.retained ? format_double(s.final_value) : "", std::to_string(s.evaluations)});
      }
    }
    out << "theta_hat:";
    for (Eigen::Index k = 0; k < fit.theta_hat.dimension(); ++k) out << ' ' << format_double(fit.theta_hat.theta()[k]);
    out << "\nh_star: " << format_double(fit.h_star) << "\ncriterion: " << format_double(fit.criterion) << '\n';
    return 0;
  });
}

// ---------------------------------------------------------------------------

struct SyntheticArgs {
  std::string out;
  int units = 40;
  std::uint64_t seed = 2024;
  double noise = 0.8;
};

int cmd_make_synthetic(const SyntheticArgs& a, const std::vector<std::string>& argv, std::ostream& out,
                       std::ostream& err) {
  SyntheticMortalityConfig config;
  config.units = a.units;
  config.seed = a.seed;
  config.mean_noise = a.noise;
  Manifest manifest("make-synthetic", argv);
  manifest["config"] = {{"units", a.units}, {"noise", a.noise}};
  manifest["seed"] = a.seed;
  return with_manifest(manifest, a.out, err, [&] {
    write_synthetic_mortality(a.out, config);
    out << "wrote " << a.units << " synthetic lifetables to " << a.out << '\n';
    return 0;
  });
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Frechet single index regression"};
  app.name("fsi");
  app.set_version_flag("--version", FSI_VERSION);
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "sphere simulation study");
  s->add_option("--settings", sim.settings_file, "JSON settings file")->check(CLI::ExistingFile);
  s->add_option("--n", sim.n, "sample sizes")->expected(1, -1);
  s->add_option("--p", sim.p, "covariate dimensions")->expected(1, -1);
  s->add_option("--sigma2", sim.sigma2, "noise levels")->expected(1, -1);
  s->add_option("--replicates", sim.replicates, "replicates per setting");
  s->add_option("--seed", sim.seed, "base seed; setting k uses seed + k");
  s->add_option("--bandwidths", sim.bandwidths, "bandwidth grid")->expected(1, -1);
  s->add_option("--theta0", sim.theta0, "true index (default (1,...,1) normalized)")->expected(1, -1);
  s->add_option("--starts", sim.starts, "random or lattice");
  s->add_option("--kernel", sim.kernel, "gaussian or epanechnikov");
  s->add_option("--threads", sim.threads, "worker threads (0 = all cores)");
  s->add_flag("--emit-data", sim.emit_data, "also write the first replicate of each setting as CSV");
  s->add_flag("--no-mlf", sim.no_mlf, "skip the multivariate local Frechet competitor");
  s->add_option("--out", sim.out, "output directory")->required();

  MortalityArgs mort;
  auto* m = app.add_subcommand("mortality", "lifetable distributional regression");
  m->add_option("--lifetables", mort.lifetables, "directory of <unit>.csv lifetables")->required();
  m->add_option("--covariates", mort.covariates, "covariates CSV")->required();
  m->add_option("--out", mort.out, "output directory")->required();
  m->add_option("--splits", mort.splits, "random train/test splits (0 disables)");
  m->add_option("--test-size", mort.test_size, "units per test set");
  m->add_option("--seed", mort.seed, "seed");
  m->add_option("--age-range", mort.age_range, "age range lo hi")->expected(2);
  m->add_option("--grid-size", mort.grid_size, "quantile grid size");
  m->add_option("--density-bw", mort.density_bw, "density bandwidth in years, 0 for histogram, or auto");
  m->add_option("--covariate-names", mort.covariate_names, "covariate columns")->expected(2, -1);
  m->add_option("--bandwidths", mort.bandwidths, "FSI bandwidth grid (default auto)")->expected(1, -1);
  m->add_option("--starts", mort.starts, "lattice or random");
  m->add_option("--kernel", mort.kernel, "gaussian or epanechnikov");
  m->add_flag("--loocv-refit-theta", mort.refit_theta, "refit theta for every held-out unit");
  m->add_option("--threads", mort.threads, "worker threads (0 = all cores)");

  FitArgs fit;
  auto* f = app.add_subcommand("fit", "FSI fit on a CSV file");
  f->add_option("--data", fit.data, "CSV with x1..xp and response columns")->required()->check(CLI::ExistingFile);
  f->add_option("--geometry", fit.geometry, "sphere, wasserstein or euclidean")->required();
  f->add_option("--out", fit.out, "output directory")->required();
  f->add_option("--bandwidths", fit.bandwidths, "bandwidth grid (default auto)")->expected(1, -1);
  f->add_option("--seed", fit.seed, "seed for random starts");
  f->add_option("--starts", fit.starts, "random or lattice");
  f->add_option("--start-count", fit.start_count, "number of random starts");
  f->add_option("--retained", fit.retained, "starts kept for the final stage");
  f->add_option("--kernel", fit.kernel, "gaussian or epanechnikov");
  f->add_flag("--loocv-refit-theta", fit.refit_theta, "refit theta for every held-out observation");
  f->add_option("--threads", fit.threads, "worker threads (0 = all cores)");

  SyntheticArgs syn;
  auto* y = app.add_subcommand("make-synthetic", "write a synthetic lifetable data set");
  y->add_option("--out", syn.out, "output directory")->required();
  y->add_option("--units", syn.units, "number of units");
  y->add_option("--seed", syn.seed, "seed");
  y->add_option("--noise", syn.noise, "sd of the unit-level mean perturbation (years)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << FSI_VERSION << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (*s) return cmd_simulate(sim, args, out, err);
    if (*m) return cmd_mortality(mort, args, out, err);
    if (*f) return cmd_fit(fit, args, out, err);
    if (*y) return cmd_make_synthetic(syn, args, out, err);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace fsi::cli
