#include "hybridsmooth_cli/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "hybridsmooth/hybridsmooth.hpp"

namespace hs::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

/// Not converged; outputs are still written.
struct NoConvergence {
  std::string message;
};

// Option values resolved as flags > JSON config file > defaults.
class Settings {
 public:
  explicit Settings(CLI::App* app) : app_(app) {}

  template <class T>
  void add(const std::string& flag, const std::string& key, T fallback, const std::string& help) {
    auto holder = std::make_shared<T>(fallback);
    CLI::Option* opt = app_->add_option(flag, *holder, help)->capture_default_str();
    defaults_[key] = fallback;
    bindings_.push_back({key, opt, [holder] { return json(*holder); }});
  }

  template <class T>
  void add_list(const std::string& flag, const std::string& key, std::vector<T> fallback, const std::string& help) {
    auto holder = std::make_shared<std::vector<T>>(fallback);
    CLI::Option* opt = app_->add_option(flag, *holder, help)->delimiter(',');
    defaults_[key] = fallback;
    bindings_.push_back({key, opt, [holder] { return json(*holder); }});
  }

  /// Boolean setting turned off by a flag such as --no-trim.
  void add_switch_off(const std::string& flag, const std::string& key, const std::string& help) {
    CLI::Option* opt = app_->add_flag(flag, help);
    defaults_[key] = true;
    bindings_.push_back({key, opt, [] { return json(false); }});
  }

  void add_switch_on(const std::string& flag, const std::string& key, const std::string& help) {
    CLI::Option* opt = app_->add_flag(flag, help);
    defaults_[key] = false;
    bindings_.push_back({key, opt, [] { return json(true); }});
  }

  [[nodiscard]] json resolve(const std::string& config_path) const {
    json resolved = defaults_;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw InputError("cannot open config file '" + config_path + "'");
      json file;
      try {
        file = json::parse(in);
      } catch (const json::exception& e) {
        throw InputError("config file '" + config_path + "': " + e.what());
      }
      if (!file.is_object()) throw InputError("config file must hold a JSON object");
      for (auto it = file.begin(); it != file.end(); ++it) {
        if (!resolved.contains(it.key())) throw InputError("unknown config key '" + it.key() + "'");
        const json& current = resolved[it.key()];
        const bool compatible = (current.is_number() && it.value().is_number()) ||
                                current.type() == it.value().type();
        if (!compatible) throw InputError("config key '" + it.key() + "' has the wrong type");
        resolved[it.key()] = it.value();
      }
    }
    for (const auto& b : bindings_) {
      if (b.option->count() > 0) resolved[b.key] = b.value();
    }
    return resolved;
  }

  [[nodiscard]] bool given(const std::string& key) const {
    for (const auto& b : bindings_) {
      if (b.key == key) return b.option->count() > 0;
    }
    return false;
  }

 private:
  struct Binding {
    std::string key;
    CLI::Option* option;
    std::function<json()> value;
  };
  CLI::App* app_;
  json defaults_ = json::object();
  std::vector<Binding> bindings_;
};

struct Command {
  CLI::App* app = nullptr;
  std::unique_ptr<Settings> settings;
  std::string input;
  std::string config;
  std::string output_dir = ".";
  std::string prefix;
};

Command make_command(CLI::App& root, const std::string& name, const std::string& description, bool input_required) {
  Command c;
  c.app = root.add_subcommand(name, description);
  c.settings = std::make_unique<Settings>(c.app);
  auto* in = c.app->add_option("-i,--input", c.input, "Input CSV");
  if (input_required) in->required();
  c.app->add_option("-c,--config", c.config, "JSON config file (flags take precedence)");
  c.app->add_option("-o,--output-dir", c.output_dir, "Directory for output files")->capture_default_str();
  c.app->add_option("--prefix", c.prefix, "Output file prefix (default: input file stem)");
  return c;
}

unsigned resolve_threads(const json& cfg, bool flag_given) {
  long long threads = cfg.at("threads").get<long long>();
  if (!flag_given && threads < 0) {
    if (const char* env = std::getenv("HS_THREADS")) {
      try {
        threads = std::stoll(env);
      } catch (const std::exception&) {
        throw InputError("HS_THREADS must be an integer");
      }
    } else {
      threads = 0;
    }
  }
  if (threads < 0) throw InputError("threads must be nonnegative (0 = all cores)");
  return static_cast<unsigned>(threads);
}

std::optional<std::size_t> column(const json& cfg, const char* key) {
  const long long v = cfg.at(key).get<long long>();
  if (v < 0) return std::nullopt;
  return static_cast<std::size_t>(v);
}

std::string prefix_for(const Command& c, const std::string& fallback) {
  if (!c.prefix.empty()) return c.prefix;
  if (!c.input.empty()) return fs::path(c.input).stem().string();
  return fallback;
}

// All outputs are rendered in memory first and written only once the whole
// command has succeeded.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

  std::ostringstream& file(const std::string& name) {
    files_.push_back({name, std::make_unique<std::ostringstream>()});
    return *files_.back().second;
  }

  void write(std::ostream& out) const {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw InputError("cannot create output directory '" + dir_.string() + "': " + ec.message());
    for (const auto& [name, content] : files_) {
      const fs::path path = dir_ / name;
      std::ofstream f(path, std::ios::binary);
      if (!f) throw InputError("cannot write '" + path.string() + "'");
      f << content->str();
      out << "wrote " << path.string() << '\n';
    }
  }

 private:
  fs::path dir_;
  std::vector<std::pair<std::string, std::unique_ptr<std::ostringstream>>> files_;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

FistaOptions fista_options(const json& cfg) {
  FistaOptions f;
  f.tol = cfg.at("tol").get<double>();
  f.max_iter = cfg.at("max_iter").get<int>();
  return f;
}

HybridSettings hybrid_settings(const json& cfg, unsigned threads) {
  HybridSettings h;
  h.omega_points = cfg.at("omega_points").get<std::size_t>();
  h.lambda_points = cfg.at("lambda_points").get<std::size_t>();
  h.grid.fista = fista_options(cfg);
  h.grid.threads = threads;
  return h;
}

ChainConfig chain_config(const json& cfg, unsigned threads) {
  ChainConfig c;
  c.chains = cfg.at("chains").get<int>();
  c.iterations = cfg.at("iters").get<int>();
  c.burnin = cfg.at("burnin").get<int>();
  c.thin = cfg.at("thin").get<int>();
  c.seed = cfg.at("seed").get<std::uint64_t>();
  c.threads = threads;
  c.validate();
  return c;
}

void add_hybrid_settings(Settings& s) {
  s.add<std::size_t>("--omega-points", "omega_points", 25, "Omega grid size");
  s.add<std::size_t>("--lambda-points", "lambda_points", 25, "Lambda grid size");
  s.add<double>("--tol", "tol", 1e-4, "FISTA tolerance on the largest coefficient change");
  s.add<int>("--max-iter", "max_iter", 20000, "FISTA iteration cap");
}

void add_chain_settings(Settings& s) {
  s.add<int>("--chains", "chains", 4, "MCMC chains");
  s.add<int>("--iters", "iters", 1000, "Sweeps per chain, burn-in included");
  s.add<int>("--burnin", "burnin", 200, "Burn-in sweeps");
  s.add<int>("--thin", "thin", 1, "Thinning interval");
  s.add<std::uint64_t>("--seed", "seed", 1, "Random seed");
  s.add<double>("--delta", "delta", 1e-8, "Orthogonalization regularizer");
  s.add_switch_off("--no-orthogonalize", "orthogonalize", "Sample the model without reparametrization");
}

struct LoadedSeries {
  TimeSeries original;
  StandardizedSeries standardized;
  SplineDesign design;
};

LoadedSeries load_input(const Command& c, const json& cfg) {
  const CsvTable table = read_csv(c.input);
  TimeSeries ts = series_from_table(table, column(cfg, "time_col"), column(cfg, "value_col"),
                                    fs::path(c.input).stem().string());
  StandardizedSeries st = standardize_times(ts);
  SplineDesign design = build_design(st.series.times_vector());
  return {std::move(ts), std::move(st), std::move(design)};
}

void write_decomposition(const TimeSeries& ts, const Eigen::VectorXd& trend, const Eigen::VectorXd& anomaly,
                         std::ostream& out) {
  out << "t,y,trend,anomaly,residual\n";
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const double y = ts.values()[i];
    out << format_double(ts.times()[i]) << ',' << format_double(y) << ',' << format_double(trend(k)) << ','
        << format_double(anomaly(k)) << ',' << format_double(y - trend(k) - anomaly(k)) << '\n';
  }
}

// ---------------------------------------------------------------- analyze

int cmd_analyze(Command& c, std::ostream& out) {
  const json cfg = c.settings->resolve(c.config);
  const unsigned threads = resolve_threads(cfg, c.settings->given("threads"));
  const std::string method = cfg.at("method").get<std::string>();
  if (method != "elbow" && method != "aicc" && method != "bayes") {
    throw InputError("method must be elbow, aicc or bayes");
  }
  const bool bayes = method == "bayes";
  const std::string basis_name = cfg.at("basis").get<std::string>();
  const BasisVariant variant = basis_name == "default" ? (bayes ? BasisVariant::centered : BasisVariant::forward)
                                                        : parse_basis_variant(basis_name);
  const double threshold = cfg.at("threshold").get<double>();
  const double level = cfg.at("level").get<double>();
  const bool timing = cfg.at("timing").get<bool>();

  const LoadedSeries in = load_input(c, cfg);
  const auto n = in.design.size();
  const Eigen::VectorXd y = in.standardized.series.values_vector();
  const Eigen::VectorXd times = in.original.times_vector();
  const StepBasis basis = step_basis(n, variant);
  const auto start = std::chrono::steady_clock::now();

  json echo = cfg;
  echo["input"] = c.input;
  echo["basis"] = std::string(to_string(variant));

  const std::string prefix = prefix_for(c, "analysis");
  OutputSet files(c.output_dir);
  DetectionReport report;
  std::optional<NoConvergence> problem;

  if (!bayes) {
    const HybridAnalysis h = analyze_hybrid(y, in.design, basis, hybrid_settings(cfg, threads));
    const HybridFit& fit = method == "elbow" ? h.elbow_fit : h.aicc_fit;
    report = detect_hybrid(fit.gamma_hat, basis, times, threshold);
    report.method = method;
    report.penalties = {{"lambda", fit.lambda}, {"omega", fit.omega}};
    report.diagnostics = {{"fista_iterations", static_cast<double>(fit.iterations)},
                          {"active", static_cast<double>(fit.n_active)},
                          {"edf", fit.edf_total},
                          {"rmse", fit.rmse},
                          {"unconverged_cells", static_cast<double>(h.grid.unconverged())}};
    report.converged = fit.converged;
    if (!fit.converged) problem = NoConvergence{"FISTA did not converge at the selected penalties"};
    write_decomposition(in.original, fit.trend, fit.anomaly, files.file(prefix + "_decomposition.csv"));
  } else {
    BayesSettings bs;
    bs.basis = variant;
    bs.chains = chain_config(cfg, threads);
    bs.delta = cfg.at("delta").get<double>();
    bs.orthogonalize = cfg.at("orthogonalize").get<bool>();
    bs.anchor = hybrid_settings(cfg, threads);
    const BayesAnalysis b = analyze_bayes(y, in.design, basis, bs);
    report = detect_bayes(b.samples, basis, times, threshold, level);

    const Eigen::MatrixXd beta = b.samples.pooled_beta();
    const Eigen::MatrixXd g = b.samples.pooled_g();
    const Eigen::MatrixXd gamma = b.samples.pooled_gamma();
    const Eigen::VectorXd trend = in.design.trend * beta.rowwise().mean() + g.rowwise().mean();
    const Eigen::VectorXd anomaly = basis.psi * gamma.rowwise().mean();

    const auto mean_of = [&](std::vector<double> ChainSamples::*member) {
      double sum = 0.0;
      std::size_t count = 0;
      for (const auto& ch : b.samples.chains) {
        if (ch.failed) continue;
        for (double v : ch.*member) sum += v;
        count += (ch.*member).size();
      }
      return sum / static_cast<double>(count);
    };
    report.penalties = {{"lambda2_posterior_mean", mean_of(&ChainSamples::lambda2)},
                        {"omega_posterior_mean", mean_of(&ChainSamples::omega)},
                        {"sigma2_posterior_mean", mean_of(&ChainSamples::sigma2)},
                        {"lambda2_prior_shape", b.priors.lambda2_shape},
                        {"lambda2_prior_rate", b.priors.lambda2_rate},
                        {"omega_prior_shape", b.priors.omega_shape},
                        {"omega_prior_rate", b.priors.omega_rate}};
    report.converged = b.samples.healthy_chains() == b.samples.chains.size();
    if (!report.converged) problem = NoConvergence{"some chains failed numerically"};

    write_decomposition(in.original, trend, anomaly, files.file(prefix + "_decomposition.csv"));
    write_interval_csv(report, files.file(prefix + "_intervals.csv"));
  }

  report.config_json = echo.dump();
  if (timing) report.runtime_seconds = seconds_since(start);
  files.file(prefix + "_report.json") << report_to_json(report) << '\n';
  files.write(out);

  out << method << ": flagged";
  const auto flagged = report.flagged_indices();
  if (flagged.empty()) out << " nothing";
  for (const auto i : flagged) out << ' ' << i;
  out << '\n';
  if (problem) throw *problem;
  return kSuccess;
}

// ----------------------------------------------------------------- select

int cmd_select(Command& c, std::ostream& out) {
  const json cfg = c.settings->resolve(c.config);
  const unsigned threads = resolve_threads(cfg, c.settings->given("threads"));
  const BasisVariant variant = parse_basis_variant(cfg.at("basis").get<std::string>());
  const LoadedSeries in = load_input(c, cfg);
  const Eigen::VectorXd y = in.standardized.series.values_vector();
  const StepBasis basis = step_basis(in.design.size(), variant);
  const HybridAnalysis h = analyze_hybrid(y, in.design, basis, hybrid_settings(cfg, threads));

  const std::string prefix = prefix_for(c, "select");
  OutputSet files(c.output_dir);
  write_grid_csv(h.grid, h.elbow, h.aicc, files.file(prefix + "_grid.csv"));

  json sel;
  const auto describe = [&](const Selection& s, const HybridFit& fit) {
    json j;
    j["lambda"] = s.lambda;
    j["omega"] = s.omega;
    j["lambda_index"] = s.lambda_index;
    j["omega_index"] = s.omega_index;
    j["edf"] = fit.edf_total;
    j["active"] = fit.n_active;
    j["rmse"] = fit.rmse;
    j["converged"] = fit.converged;
    return j;
  };
  sel["elbow"] = describe(h.elbow, h.elbow_fit);
  sel["aicc"] = describe(h.aicc, h.aicc_fit);
  sel["baseline_rmse"] = h.grid.baseline_rmse;
  sel["unconverged_cells"] = h.grid.unconverged();
  json echo = cfg;
  echo["input"] = c.input;
  sel["config"] = echo;
  files.file(prefix + "_selection.json") << format_json(sel.dump()) << '\n';
  files.write(out);
  out << "elbow: lambda " << format_double(h.elbow.lambda) << " omega " << format_double(h.elbow.omega) << '\n';
  out << "aicc: lambda " << format_double(h.aicc.lambda) << " omega " << format_double(h.aicc.omega) << '\n';
  if (h.grid.unconverged() > 0) throw NoConvergence{std::to_string(h.grid.unconverged()) + " grid cells did not converge"};
  return kSuccess;
}

// --------------------------------------------------------------- separate

int cmd_separate(Command& c, std::ostream& out) {
  const json cfg = c.settings->resolve(c.config);
  SeparationConfig sep = default_separation_config();
  sep.trim_fraction = cfg.at("trim_fraction").get<double>();
  sep.extreme_ratio = cfg.at("extreme_ratio").get<double>();
  const double threshold = cfg.at("kernel_threshold").get<double>();
  for (auto& k : sep.filters) k.threshold = threshold;
  sep.validate();
  const bool trim = cfg.at("trim").get<bool>();

  const CsvTable table = read_csv(c.input);
  const TimeSeries stream = series_from_table(table, column(cfg, "time_col"), column(cfg, "value_col"),
                                              fs::path(c.input).stem().string());
  std::vector<Cycle> cycles;
  if (const auto state = column(cfg, "state_col")) {
    if (*state >= table.columns.size()) throw InputError("state column index out of range");
    std::vector<bool> on;
    for (double v : table.columns[*state]) on.push_back(v != 0.0);
    cycles = separate_by_state(stream, on);
  } else {
    cycles = separate_cycles(stream, sep);
  }

  const std::string prefix = prefix_for(c, "stream");
  OutputSet files(c.output_dir);
  json manifest;
  manifest["input"] = c.input;
  manifest["config"] = cfg;
  json entries = json::array();
  for (std::size_t k = 0; k < cycles.size(); ++k) {
    Cycle cycle = cycles[k];
    json e;
    e["cycle"] = k;
    e["source_start"] = cycle.source_offset;
    e["source_end"] = cycle.source_offset + cycle.series.size();
    e["complete"] = cycle.complete;
    bool trimmed = false;
    if (trim) {
      try {
        cycle = trim_cycle(cycle, sep);
        trimmed = true;
      } catch (const InputError& err) {
        e["trim_skipped"] = err.what();
      }
    }
    e["trimmed"] = trimmed;
    e["phase_start"] = cycle.source_offset + cycle.phase.start;
    e["phase_end"] = cycle.source_offset + cycle.phase.end;
    const std::string name = prefix + "_cycle" + std::to_string(k) + ".csv";
    e["file"] = name;
    write_series(cycle.running_phase(), files.file(name));
    entries.push_back(std::move(e));
  }
  manifest["cycles"] = std::move(entries);
  files.file(prefix + "_manifest.json") << format_json(manifest.dump()) << '\n';
  files.write(out);
  out << cycles.size() << " cycles\n";
  return kSuccess;
}

// --------------------------------------------------------------- simulate

int cmd_simulate(Command& c, std::ostream& out) {
  const json cfg = c.settings->resolve(c.config);
  const unsigned threads = resolve_threads(cfg, c.settings->given("threads"));
  StudyConfig study;
  const auto length = cfg.at("length").get<long long>();
  if (length < 10) throw InputError("trend length must be at least 10");
  if (!c.input.empty()) {
    study.trend = series_from_table(read_csv(c.input), std::nullopt, column(cfg, "value_col")).values_vector();
  } else {
    study.trend = reference_trend(length, cfg.at("top").get<double>());
  }
  study.disturbance_index = cfg.at("index").get<Eigen::Index>();
  study.sizes = cfg.at("sizes").get<std::vector<double>>();
  study.sigmas = cfg.at("sigmas").get<std::vector<double>>();
  study.replicates = cfg.at("replicates").get<int>();
  study.methods.clear();
  for (const auto& m : cfg.at("methods").get<std::vector<std::string>>()) study.methods.push_back(parse_study_method(m));
  study.seed = cfg.at("seed").get<std::uint64_t>();
  study.window = cfg.at("window").get<Eigen::Index>();
  study.hybrid_threshold = cfg.at("hybrid_threshold").get<double>();
  study.bayes_threshold = cfg.at("bayes_threshold").get<double>();
  study.level = cfg.at("level").get<double>();
  study.hybrid = hybrid_settings(cfg, 1);
  study.bayes.chains = chain_config(cfg, 1);
  study.bayes.delta = cfg.at("delta").get<double>();
  study.bayes.orthogonalize = cfg.at("orthogonalize").get<bool>();
  study.threads = threads;
  study.validate();

  const auto surfaces = detection_surfaces(study);
  const std::string prefix = prefix_for(c, "study");
  OutputSet files(c.output_dir);
  json meta;
  json echo = cfg;
  if (!c.input.empty()) echo["trend_input"] = c.input;
  meta["config"] = echo;
  meta["trend"] = std::vector<double>(study.trend.data(), study.trend.data() + study.trend.size());
  json listing = json::array();
  for (const auto& s : surfaces) {
    const std::string m(to_string(s.method));
    write_surface_csv(s, files.file(prefix + "_" + m + "_surface.csv"));
    files.file(prefix + "_" + m + "_contours.json") << surface_contours_json(s) << '\n';
    listing.push_back({{"method", m},
                       {"surface", prefix + "_" + m + "_surface.csv"},
                       {"contours", prefix + "_" + m + "_contours.json"}});
  }
  meta["outputs"] = std::move(listing);
  files.file(prefix + "_config.json") << format_json(meta.dump()) << '\n';
  files.write(out);
  return kSuccess;
}

// ------------------------------------------------------------------ bench

int cmd_bench(Command& c, std::ostream& out) {
  const json cfg = c.settings->resolve(c.config);
  const unsigned threads = resolve_threads(cfg, c.settings->given("threads"));
  TimeSeries ts = TimeSeries::from_values({0, 0, 0, 0});
  if (!c.input.empty()) {
    ts = series_from_table(read_csv(c.input), column(cfg, "time_col"), column(cfg, "value_col"));
  } else {
    Random rng(cfg.at("seed").get<std::uint64_t>());
    ts = synth_cycle(reference_trend(), 1.0, 150, 0.1, rng);
  }
  const StandardizedSeries st = standardize_times(ts);
  const SplineDesign design = build_design(st.series.times_vector());
  const Eigen::VectorXd y = st.series.values_vector();
  const int repeats = cfg.at("repeats").get<int>();
  if (repeats < 1) throw InputError("repeats must be at least 1");

  const HybridSettings hs = hybrid_settings(cfg, threads);
  const StepBasis forward = step_basis(design.size(), BasisVariant::forward);
  const StepBasis centered = step_basis(design.size(), BasisVariant::centered);

  double hybrid_seconds = 0.0;
  double sampler_seconds = 0.0;
  for (int r = 0; r < repeats; ++r) {
    auto t0 = std::chrono::steady_clock::now();
    const HybridAnalysis h = analyze_hybrid(y, design, forward, hs);
    hybrid_seconds += seconds_since(t0);

    BayesSettings bs;
    bs.chains = chain_config(cfg, threads);
    bs.priors = hybrid_anchored_priors(h);
    bs.delta = cfg.at("delta").get<double>();
    bs.orthogonalize = cfg.at("orthogonalize").get<bool>();
    t0 = std::chrono::steady_clock::now();
    (void)analyze_bayes(y, design, centered, bs);
    sampler_seconds += seconds_since(t0);
  }
  hybrid_seconds /= repeats;
  sampler_seconds /= repeats;
  const double ratio = sampler_seconds / hybrid_seconds;

  out << "method,seconds\n";
  out << "hybrid," << format_double(hybrid_seconds) << '\n';
  out << "bayes," << format_double(sampler_seconds) << '\n';
  out << "ratio," << format_double(ratio) << '\n';

  if (!c.prefix.empty() || c.output_dir != ".") {
    OutputSet files(c.output_dir);
    json j;
    j["n"] = design.size();
    j["hybrid_seconds"] = hybrid_seconds;
    j["bayes_seconds"] = sampler_seconds;
    j["ratio"] = ratio;
    j["config"] = cfg;
    files.file(prefix_for(c, "bench") + "_bench.json") << format_json(j.dump()) << '\n';
    files.write(out);
  }
  return kSuccess;
}

void common_settings(Settings& s) {
  s.add<long long>("--threads", "threads", -1, "Worker cap (0 = all cores; falls back to HS_THREADS)");
}

void column_settings(Settings& s) {
  s.add<long long>("--time-col", "time_col", -1, "Zero-based time column (-1: automatic)");
  s.add<long long>("--value-col", "value_col", -1, "Zero-based value column (-1: automatic)");
}

// Routes library logging to the caller's error stream for one run.
class LogScope {
 public:
  LogScope(std::ostream& err, const std::string& level) : previous_(spdlog::default_logger()) {
    auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
    auto logger = std::make_shared<spdlog::logger>("hybridsmooth", sink);
    logger->set_pattern("[%l] %v");
    logger->set_level(spdlog::level::from_str(level));
    spdlog::set_default_logger(logger);
  }
  ~LogScope() { spdlog::set_default_logger(previous_); }
  LogScope(const LogScope&) = delete;
  LogScope& operator=(const LogScope&) = delete;

 private:
  std::shared_ptr<spdlog::logger> previous_;
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Trend and change-point analysis of monitoring cycles"};
  app.require_subcommand(1);
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")->capture_default_str();

  Command analyze = make_command(app, "analyze", "Detect level shifts in one cycle", true);
  {
    auto& s = *analyze.settings;
    s.add<std::string>("-m,--method", "method", "aicc", "elbow, aicc or bayes");
    s.add<double>("--threshold", "threshold", 0.15, "Minimum |magnitude| of a flagged shift");
    s.add<double>("--level", "level", 0.95, "Credible level (bayes)");
    s.add<std::string>("--basis", "basis", "default", "Step basis: forward, centered or default");
    add_hybrid_settings(s);
    add_chain_settings(s);
    column_settings(s);
    common_settings(s);
    s.add_switch_on("--timing", "timing", "Record the runtime in the report");
  }

  Command select = make_command(app, "select", "Evaluate the penalty grid and both selection rules", true);
  {
    auto& s = *select.settings;
    s.add<std::string>("--basis", "basis", "forward", "Step basis: forward or centered");
    add_hybrid_settings(s);
    column_settings(s);
    common_settings(s);
  }

  Command separate = make_command(app, "separate", "Split a monitoring stream into cycles", true);
  {
    auto& s = *separate.settings;
    column_settings(s);
    s.add<long long>("--state-col", "state_col", -1, "Zero-based on/off column; overrides the filters");
    s.add<double>("--trim-fraction", "trim_fraction", 0.15, "Largest share of differences trimmed as extreme");
    s.add<double>("--extreme-ratio", "extreme_ratio", 3.0, "Extreme differences exceed this multiple of the median");
    s.add<double>("--kernel-threshold", "kernel_threshold", 4.0, "Kernel firing threshold in robust scale units");
    s.add_switch_off("--no-trim", "trim", "Keep warm-up and cool-down sections");
  }

  Command simulate = make_command(app, "simulate", "Monte Carlo detection-probability surface", false);
  {
    auto& s = *simulate.settings;
    s.add<long long>("--length", "length", 300, "Reference trend length");
    s.add<double>("--top", "top", 8.0, "Reference trend end value");
    s.add<long long>("--value-col", "value_col", -1, "Value column of a trend given with --input");
    s.add<long long>("--index", "index", 150, "Disturbance index");
    s.add_list<double>("--sizes", "sizes", {0.05, 0.2, 0.7, 2.0}, "Disturbance sizes");
    s.add_list<double>("--sigmas", "sigmas", {0.02, 0.07, 0.2, 0.5}, "Noise standard deviations");
    s.add<int>("--replicates", "replicates", 20, "Datasets per cell");
    s.add_list<std::string>("--methods", "methods", {"hybrid_elbow", "hybrid_aicc", "bayes"},
                            "hybrid_elbow, hybrid_aicc, bayes");
    s.add<long long>("--window", "window", 1, "Detection tolerance in samples");
    s.add<double>("--hybrid-threshold", "hybrid_threshold", 0.0, "Minimum |gamma| for a hybrid detection");
    s.add<double>("--bayes-threshold", "bayes_threshold", 0.0, "Minimum |posterior mean| for a bayes detection");
    s.add<double>("--level", "level", 0.95, "Credible level");
    add_hybrid_settings(s);
    add_chain_settings(s);
    common_settings(s);
  }

  Command bench = make_command(app, "bench", "Wall-clock comparison of the hybrid and bayes analyses", false);
  {
    auto& s = *bench.settings;
    add_hybrid_settings(s);
    add_chain_settings(s);
    column_settings(s);
    common_settings(s);
    s.add<int>("--repeats", "repeats", 1, "Timed repetitions");
  }

  std::vector<std::string> argv_storage{"hybridsmooth"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kInputError;
  }

  try {
    const LogScope logs(err, log_level);
    if (*analyze.app) return cmd_analyze(analyze, out);
    if (*select.app) return cmd_select(select, out);
    if (*separate.app) return cmd_separate(separate, out);
    if (*simulate.app) return cmd_simulate(simulate, out);
    if (*bench.app) return cmd_bench(bench, out);
  } catch (const NoConvergence& e) {
    err << "error: " << e.message << '\n';
    return kNoConvergence;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kNoConvergence;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const nlohmann::json::exception& e) {
    err << "error: invalid configuration value: " << e.what() << '\n';
    return kInputError;
  } catch (const spdlog::spdlog_ex& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}

}  // namespace hs::cli
