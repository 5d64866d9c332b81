#include "distboost/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "distboost/model_io.hpp"
#include "distboost/simgen.hpp"
#include "distboost/stabsel.hpp"
#include "distboost/table.hpp"
#include "distboost/tune.hpp"

#ifndef DISTBOOST_VERSION
#define DISTBOOST_VERSION "0.0.0"
#endif

namespace distboost::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct CommonArgs {
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  int threads = 0;
};

struct ModelArgs {
  std::string data;
  std::string response;
  std::string family = "normal";
  std::string method = "inner";
  double nu = 0.1;
  std::string learner = "linear";
  double penalty = 0.0;
  std::vector<std::string> covariates;
};

struct FitArgs {
  std::string mstop = "100";
};

struct CvArgs {
  int folds = 25;
  std::string plan = "subsample";
  int grid_max = 300;
  int grid_length = 10;
  bool dense_path = false;
};

struct StabselArgs {
  std::optional<int> q;
  std::optional<double> pi_thr;
  std::optional<double> pfer;
  int subsamples = 100;
  int mstop_cap = 1000;
};

struct PredictArgs {
  std::string model;
  std::string data;
};

struct SimulateArgs {
  std::string scenario = "1A";
  std::size_t n = 500;
  std::size_t p = 6;
};

struct ReproduceArgs {
  std::string experiment;
  int reps = 0;
  std::size_t n = 500;
  int iterations = 1500;
  std::size_t p_noise = 0;
  int folds = 25;
  int grid_max = 300;
  int grid_length = 10;
  std::vector<int> dims{2, 3};
  std::vector<std::string> methods;
  std::vector<std::string> scenarios{"1A"};
  std::vector<std::size_t> ps{50, 250, 500};
  std::vector<int> qs{8, 15, 25, 50};
  int subsamples = 50;
  int mstop_cap = 1000;
  double nu = 0.1;
};

struct LoadedData {
  Dataset data;
  std::string digest;
};

int resolve_threads(int flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("DISTBOOST_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return v;
    } catch (const std::exception&) {
    }
    throw std::invalid_argument(fmt::format("DISTBOOST_THREADS='{}' is not a positive integer", env));
  }
  return 1;
}

LoadedData load_data(const ModelArgs& args, const DistributionFamily& family) {
  const auto table = read_csv(fs::path(args.data));
  const auto response_col = [&] {
    try {
      return table.column_index(args.response);
    } catch (const std::out_of_range&) {
      throw std::invalid_argument(fmt::format("response column '{}' not found in {}", args.response, args.data));
    }
  }();
  std::vector<std::string> names = args.covariates;
  if (names.empty()) {
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
      if (j != response_col) names.push_back(table.columns[j]);
    }
  }
  std::vector<std::vector<double>> cols;
  for (const auto& name : names) {
    if (name == args.response) throw std::invalid_argument("the response cannot be a covariate");
    std::size_t idx;
    try {
      idx = table.column_index(name);
    } catch (const std::out_of_range&) {
      throw std::invalid_argument(fmt::format("covariate column '{}' not found in {}", name, args.data));
    }
    cols.push_back(numeric_column(table, idx));
  }
  auto y = numeric_column(table, response_col);
  check_response(family, y);
  return {Dataset(std::move(cols), std::move(y), std::move(names)), file_digest(args.data)};
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = std::string::npos;
    }
    if (used != item.size()) throw std::invalid_argument(fmt::format("cannot parse '{}' as an integer", item));
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty integer list");
  return out;
}

BoostConfig make_boost_config(const ModelArgs& args, const Dataset& data) {
  BoostConfig cfg;
  cfg.family = family_from_name(args.family);
  cfg.method = method_from_name(args.method);
  cfg.step_length = args.nu;
  cfg.learners.resize(cfg.family.n_params());
  for (auto& set : cfg.learners) {
    for (std::size_t j = 0; j < data.p(); ++j) {
      if (args.learner == "linear") {
        set.push_back(BaseLearnerSpec::linear(j));
      } else if (args.learner == "ridge") {
        if (!(args.penalty > 0)) throw std::invalid_argument("--learner ridge needs --penalty > 0");
        set.push_back(BaseLearnerSpec::ridge(j, args.penalty));
      } else {
        throw std::invalid_argument(fmt::format("unknown learner '{}'", args.learner));
      }
    }
  }
  return cfg;
}

ordered_json model_args_json(const ModelArgs& a) {
  return {{"data", a.data},       {"response", a.response}, {"family", a.family},
          {"method", a.method},   {"nu", a.nu},             {"learner", a.learner},
          {"penalty", a.penalty}, {"covariates", a.covariates}};
}

class OutputDir {
 public:
  explicit OutputDir(const std::string& dir) : dir_(dir) {
    if (dir.empty()) throw std::invalid_argument("--out is required");
    fs::create_directories(dir_);
  }
  fs::path file(const std::string& name) {
    files_.push_back(name);
    return dir_ / name;
  }
  const std::vector<std::string>& files() const { return files_; }
  const fs::path& path() const { return dir_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

void write_manifest(OutputDir& out, const std::string& command, const std::vector<std::string>& argv,
                    ordered_json config, std::uint64_t seed, double seconds,
                    const std::string& digest, ordered_json extra = ordered_json::object()) {
  ordered_json m;
  m["command"] = command;
  m["argv"] = argv;
  m["config"] = std::move(config);
  m["seed"] = seed;
  m["version"] = DISTBOOST_VERSION;
  m["duration_seconds"] = seconds;
  m["input_digest"] = digest.empty() ? ordered_json(nullptr) : ordered_json(digest);
  m["outputs"] = out.files();
  for (auto& [k, v] : extra.items()) m[k] = v;
  std::ofstream f(out.path() / "manifest.json", std::ios::binary);
  if (!f) throw std::runtime_error("cannot write manifest.json");
  f << m.dump(2) << "\n";
}

std::string join_ints(const std::vector<int>& v, std::string_view sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? std::string(sep) : "") + std::to_string(v[i]);
  return s;
}

// --- commands --------------------------------------------------------------------------------

struct CommandResult {
  ordered_json config;
  std::string digest;
  ordered_json extra = ordered_json::object();
};

CommandResult cmd_fit(const ModelArgs& m, const FitArgs& f, OutputDir& out, std::ostream& log) {
  const auto family = family_from_name(m.family);
  const auto loaded = load_data(m, family);
  auto cfg = make_boost_config(m, loaded.data);
  cfg.mstop = parse_int_list(f.mstop);
  if (cfg.method == Method::Cyclical && cfg.mstop.size() == 1) {
    cfg.mstop.assign(family.n_params(), cfg.mstop.front());
  }
  const auto state = fit(cfg, loaded.data);
  save_model(Model::from_state(state, cfg.method, cfg.mstop, loaded.data.column_names()),
             out.file("model.json"));

  Table trace{{"iteration", "risk"}, {}};
  for (std::size_t i = 0; i < state.risk_trace.size(); ++i) {
    trace.rows.push_back({std::to_string(i), format_number(state.risk_trace[i])});
  }
  write_csv(trace, out.file("risk_trace.csv"));

  Table sel{{"step", "iteration", "parameter", "covariate", "intercept", "slope", "risk_after"}, {}};
  for (std::size_t s = 0; s < state.selection_log.size(); ++s) {
    const auto& e = state.selection_log[s];
    sel.rows.push_back({std::to_string(s + 1), std::to_string(e.iteration), family.param_names[e.param],
                        loaded.data.column_names()[e.covariate], format_number(e.intercept),
                        format_number(e.slope), format_number(e.risk_after)});
  }
  write_csv(sel, out.file("selection.csv"));

  fmt::print(log, "fitted {} {} model: {} updates, final risk {}\n", m.method, m.family,
             state.selection_log.size(), format_number(risk(state)));
  auto config = model_args_json(m);
  config["mstop"] = cfg.mstop;
  return {config, loaded.digest};
}

CommandResult cmd_cv(const ModelArgs& m, const CvArgs& c, std::uint64_t seed, int threads, OutputDir& out,
                     std::ostream& log) {
  const auto family = family_from_name(m.family);
  const auto loaded = load_data(m, family);
  auto cfg = make_boost_config(m, loaded.data);
  const int k = family.n_params();
  MstopGrid grid;
  if (cfg.method == Method::Cyclical) {
    grid = make_grid(c.grid_max, c.grid_length, k);
  } else if (c.dense_path) {
    grid = path_grid(k * c.grid_max);
  } else {
    grid = make_grid(k * c.grid_max, c.grid_length, 1);
  }
  cfg.mstop = grid.points.back();
  ResamplingPlan plan;
  if (c.plan == "subsample") {
    plan.kind = ResamplingKind::SubsampleHalf;
  } else if (c.plan == "bootstrap") {
    plan.kind = ResamplingKind::Bootstrap;
  } else {
    throw std::invalid_argument(fmt::format("unknown resampling plan '{}'", c.plan));
  }
  plan.folds = c.folds;
  plan.seed = seed;
  const auto result = cv_risk(cfg, loaded.data, plan, grid, threads);
  for (const auto& w : result.warnings) fmt::print(log, "warning: {}\n", w);

  Table t;
  if (cfg.method == Method::Cyclical) {
    for (const auto& name : family.param_names) t.columns.push_back("mstop_" + name);
  } else {
    t.columns.push_back("mstop");
  }
  t.columns.push_back("mean_risk");
  for (std::size_t g = 0; g < grid.points.size(); ++g) {
    std::vector<std::string> row;
    for (int v : grid.points[g]) row.push_back(std::to_string(v));
    row.push_back(format_number(result.mean_risk[g]));
    t.rows.push_back(std::move(row));
  }
  write_csv(t, out.file("cv_risk.csv"));

  ordered_json summary{{"best_mstop", result.best_point},
                       {"best_mean_risk", result.mean_risk[result.best_index]},
                       {"grid_points", grid.points.size()},
                       {"folds_used", result.folds_used},
                       {"path_fits", result.path_fits},
                       {"grid_evaluations", result.grid_evaluations},
                       {"warnings", result.warnings}};
  std::ofstream(out.file("cv_summary.json"), std::ios::binary) << summary.dump(2) << "\n";
  fmt::print(log, "best mstop: {} (mean out-of-bag risk {}; {} path fits over {} folds)\n",
             join_ints(result.best_point, ","), format_number(result.mean_risk[result.best_index]),
             result.path_fits, result.folds_used);

  auto config = model_args_json(m);
  config["folds"] = c.folds;
  config["plan"] = c.plan;
  config["grid_max"] = c.grid_max;
  config["grid_length"] = c.grid_length;
  config["dense_path"] = c.dense_path;
  return {config, loaded.digest};
}

CommandResult cmd_stabsel(const ModelArgs& m, const StabselArgs& s, std::uint64_t seed, int threads,
                          OutputDir& out, std::ostream& log) {
  const auto family = family_from_name(m.family);
  const auto loaded = load_data(m, family);
  auto cfg = make_boost_config(m, loaded.data);
  auto sc = resolve_triple(s.q, s.pi_thr, s.pfer, effective_p(cfg));
  sc.subsamples = s.subsamples;
  sc.mstop_cap = s.mstop_cap;
  sc.seed = seed;
  cfg.mstop.assign(cfg.method == Method::Cyclical ? family.n_params() : 1, s.mstop_cap);
  const auto result = run_stabsel(sc, cfg, loaded.data, threads);

  const auto& names = loaded.data.column_names();
  std::vector<std::pair<ParamCovariate, double>> sorted(result.frequencies.begin(), result.frequencies.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Table freq{{"parameter", "covariate", "frequency", "stable"}, {}};
  for (const auto& [pair, f] : sorted) {
    freq.rows.push_back({family.param_names[pair.first], names[pair.second], format_number(f),
                         result.stable_set.count(pair) ? "1" : "0"});
  }
  write_csv(freq, out.file("frequencies.csv"));

  Table sets{{"subsample", "parameter", "covariate"}, {}};
  for (std::size_t b = 0; b < result.per_subsample_sets.size(); ++b) {
    for (const auto& pair : result.per_subsample_sets[b]) {
      sets.rows.push_back({std::to_string(b), family.param_names[pair.first], names[pair.second]});
    }
  }
  write_csv(sets, out.file("subsample_sets.csv"));

  std::ostringstream report;
  fmt::print(report, "effective_p: {}\n", result.effective_p);
  fmt::print(report, "q: {}\npi_thr: {}\npfer: {}\n", sc.q, format_number(sc.pi_thr), format_number(sc.pfer));
  fmt::print(report, "pfer_bound: {}  (q^2 / ((2 pi_thr - 1) effective_p), no distributional assumptions)\n",
             format_number(result.pfer_bound));
  fmt::print(report, "subsamples: {}\nstable_set_size: {}\n", sc.subsamples, result.stable_set.size());
  for (const auto& pair : result.stable_set) {
    fmt::print(report, "  {}:{}  {}\n", family.param_names[pair.first], names[pair.second],
               format_number(result.frequencies.at(pair)));
  }
  fmt::print(report, "capped_subsamples: {}\n", result.warnings.size());
  std::ofstream(out.file("stabsel_report.txt"), std::ios::binary) << report.str();
  log << report.str();

  auto config = model_args_json(m);
  config["q"] = sc.q;
  config["pi_thr"] = sc.pi_thr;
  config["pfer"] = sc.pfer;
  config["subsamples"] = sc.subsamples;
  config["mstop_cap"] = sc.mstop_cap;
  return {config, loaded.digest};
}

CommandResult cmd_predict(const PredictArgs& p, OutputDir& out, std::ostream& log) {
  const auto model = load_model(p.model);
  const auto table = read_csv(fs::path(p.data));
  std::map<std::string, std::vector<double>> columns;
  for (const auto& per_param : model.slopes) {
    for (const auto& [name, slope] : per_param) {
      if (!columns.count(name)) {
        std::size_t idx;
        try {
          idx = table.column_index(name);
        } catch (const std::out_of_range&) {
          throw std::invalid_argument(fmt::format("new data lacks column '{}' used by the model", name));
        }
        columns[name] = numeric_column(table, idx);
      }
    }
  }
  const auto etas = model.predict_etas(columns, table.rows.size());
  Table t;
  for (const auto& name : model.family.param_names) t.columns.push_back(name);
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    std::vector<std::string> row;
    for (int k = 0; k < model.family.n_params(); ++k) {
      row.push_back(format_number(inverse_link(model.family.links[k], etas[k][i])));
    }
    t.rows.push_back(std::move(row));
  }
  write_csv(t, out.file("predictions.csv"));
  fmt::print(log, "predicted {} rows\n", table.rows.size());
  return {{{"model", p.model}, {"data", p.data}}, file_digest(p.data)};
}

CommandResult cmd_simulate(const SimulateArgs& a, std::uint64_t seed, OutputDir& out, std::ostream& log) {
  const auto scenario = make_scenario(scenario_from_name(a.scenario), a.n, a.p, seed);
  const auto sim = generate(scenario);
  Table t;
  for (const auto& name : sim.data.column_names()) t.columns.push_back(name);
  t.columns.push_back("y");
  for (std::size_t i = 0; i < sim.data.n(); ++i) {
    std::vector<std::string> row;
    for (std::size_t j = 0; j < sim.data.p(); ++j) row.push_back(format_number(sim.data.column(j)[i]));
    row.push_back(format_number(sim.data.y()[i]));
    t.rows.push_back(std::move(row));
  }
  write_csv(t, out.file("data.csv"));
  Table truth{{"parameter", "covariate", "coefficient"}, {}};
  for (const auto& [param, cov] : sim.truth) {
    truth.rows.push_back({scenario.family.param_names[param], sim.data.column_names()[cov],
                          format_number(scenario.coefficients[param].at(cov))});
  }
  write_csv(truth, out.file("truth.csv"));
  fmt::print(log, "simulated scenario {} ({} family): n = {}, p = {}, {} true effects\n", a.scenario,
             scenario.family.name(), a.n, a.p, sim.truth.size());
  return {{{"scenario", a.scenario}, {"n", a.n}, {"p", a.p}, {"family", scenario.family.name()}}, ""};
}

std::vector<Method> parse_methods(const std::vector<std::string>& names, std::vector<Method> fallback) {
  if (names.empty()) return fallback;
  std::vector<Method> out;
  for (const auto& n : names) out.push_back(method_from_name(n));
  return out;
}

CommandResult cmd_reproduce(const ReproduceArgs& a, std::uint64_t seed, int threads, OutputDir& out,
                            std::ostream& log, ordered_json& extra) {
  const auto all3 = std::vector<Method>{Method::Cyclical, Method::NoncycInner, Method::NoncycOuter};
  ordered_json config{{"experiment", a.experiment}};
  Table table;
  if (a.experiment == "convergence") {
    ConvergenceSettings s;
    s.replications = a.reps > 0 ? a.reps : 20;
    s.n = a.n;
    s.total_iterations = a.iterations;
    s.step_length = a.nu;
    s.methods = parse_methods(a.methods, all3);
    s.seed = seed;
    s.threads = threads;
    table = run_experiment(s);
    config.update({{"reps", s.replications}, {"n", s.n}, {"iterations", s.total_iterations}});
  } else if (a.experiment == "speed") {
    SpeedSettings s;
    s.replications = a.reps > 0 ? a.reps : 20;
    s.n = a.n;
    s.p_noise = a.p_noise;
    s.total_iterations = a.iterations;
    s.step_length = a.nu;
    s.methods = parse_methods(a.methods, all3);
    s.seed = seed;
    s.threads = threads;
    table = run_experiment(s);
    config.update({{"reps", s.replications}, {"n", s.n}, {"p_noise", s.p_noise},
                   {"iterations", s.total_iterations}});
  } else if (a.experiment == "runtime") {
    RuntimeSettings s;
    s.replications = a.reps > 0 ? a.reps : 1;
    s.n = a.n;
    s.folds = a.folds;
    s.grid_max = a.grid_max;
    s.grid_length = a.grid_length;
    s.dimensions = a.dims;
    s.step_length = a.nu;
    s.methods = parse_methods(a.methods, all3);
    s.seed = seed;
    s.threads = threads;
    const auto rows = run_runtime(s);
    table = to_table(rows);
    ordered_json timings = ordered_json::array();
    for (const auto& r : rows) {
      timings.push_back({{"replication", r.replication}, {"dimensions", r.dimensions},
                         {"method", std::string(method_name(r.method))}, {"seconds", r.seconds}});
    }
    extra["timings"] = std::move(timings);
    config.update({{"reps", s.replications}, {"n", s.n}, {"folds", s.folds}, {"grid_max", s.grid_max},
                   {"grid_length", s.grid_length}, {"dims", s.dimensions}});
  } else if (a.experiment == "stabsweep") {
    SweepSettings s;
    s.replications = a.reps > 0 ? a.reps : 5;
    s.n = a.n;
    s.scenarios.clear();
    for (const auto& name : a.scenarios) s.scenarios.push_back(scenario_from_name(name));
    s.methods = parse_methods(a.methods, {Method::Cyclical, Method::NoncycInner});
    s.ps = a.ps;
    s.qs = a.qs;
    s.subsamples = a.subsamples;
    s.mstop_cap = a.mstop_cap;
    s.step_length = a.nu;
    s.seed = seed;
    s.threads = threads;
    table = run_experiment(s);
    config.update({{"reps", s.replications}, {"n", s.n}, {"scenarios", a.scenarios}, {"ps", s.ps},
                   {"qs", s.qs}, {"subsamples", s.subsamples}, {"mstop_cap", s.mstop_cap}});
  } else {
    throw std::invalid_argument(fmt::format("unknown experiment '{}'", a.experiment));
  }
  write_csv(table, out.file(a.experiment + ".csv"));
  fmt::print(log, "{}: wrote {} rows\n", a.experiment, table.rows.size());
  config["methods"] = a.methods;
  config["nu"] = a.nu;
  return {config, ""};
}

std::vector<std::string> read_manifest_argv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open manifest '{}'", path));
  const auto j = ordered_json::parse(in);
  return j.at("argv").get<std::vector<std::string>>();
}

void add_common(CLI::App* cmd, CommonArgs& c, bool uses_seed) {
  cmd->add_option("--out", c.out_dir, "Output directory")->required();
  cmd->add_option("--threads", c.threads, "Worker threads (default: $DISTBOOST_THREADS or 1)");
  if (uses_seed) cmd->add_option("--seed", c.seed, "Random seed (generated and recorded if omitted)");
}

void add_model(CLI::App* cmd, ModelArgs& m) {
  cmd->add_option("--data", m.data, "Input CSV with a header row")->required();
  cmd->add_option("--response", m.response, "Response column name")->required();
  cmd->add_option("--family", m.family, "normal | negbin | zinb")
      ->check(CLI::IsMember({"normal", "negbin", "zinb"}));
  cmd->add_option("--method", m.method, "cyclical | inner | outer")
      ->check(CLI::IsMember({"cyclical", "inner", "outer"}));
  cmd->add_option("--nu", m.nu, "Step length in (0, 1)");
  cmd->add_option("--learner", m.learner, "linear | ridge")->check(CLI::IsMember({"linear", "ridge"}));
  cmd->add_option("--penalty", m.penalty, "Ridge penalty on the slope");
  cmd->add_option("--covariates", m.covariates, "Covariate columns (default: all but the response)")
      ->delimiter(',');
}

}  // namespace

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path));
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 initialisation failed");
  }
  char buf[1 << 15];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return "sha256:" + hex;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Distributional component-wise gradient boosting", "distboost"};
  app.require_subcommand(1);
  app.set_version_flag("--version", DISTBOOST_VERSION);

  CommonArgs common;
  ModelArgs model;
  FitArgs fit_args;
  CvArgs cv_args;
  StabselArgs stab_args;
  PredictArgs predict_args;
  SimulateArgs sim_args;
  ReproduceArgs repro;
  std::string manifest_path;

  auto* fit_cmd = app.add_subcommand("fit", "Fit a boosted distributional regression model");
  add_common(fit_cmd, common, true);
  add_model(fit_cmd, model);
  fit_cmd->add_option("--mstop", fit_args.mstop, "Iterations: scalar, or comma list per parameter (cyclical)");

  auto* cv_cmd = app.add_subcommand("cv", "Tune mstop by out-of-bag risk");
  add_common(cv_cmd, common, true);
  add_model(cv_cmd, model);
  cv_cmd->add_option("--folds", cv_args.folds, "Number of resampling folds");
  cv_cmd->add_option("--plan", cv_args.plan, "subsample | bootstrap")
      ->check(CLI::IsMember({"subsample", "bootstrap"}));
  cv_cmd->add_option("--grid-max", cv_args.grid_max, "Largest mstop per distribution parameter");
  cv_cmd->add_option("--grid-length", cv_args.grid_length, "Points per grid axis");
  cv_cmd->add_flag("--dense-path", cv_args.dense_path,
                   "Noncyclical: evaluate every iteration up to n_params * grid-max");

  auto* stab_cmd = app.add_subcommand("stabsel", "Stability selection with error control");
  add_common(stab_cmd, common, true);
  add_model(stab_cmd, model);
  stab_cmd->add_option("--q", stab_args.q, "Distinct base-learners per subsample");
  stab_cmd->add_option("--pi-thr", stab_args.pi_thr, "Selection-frequency threshold in (0.5, 1]");
  stab_cmd->add_option("--pfer", stab_args.pfer, "Per-family error rate bound");
  stab_cmd->add_option("--B", stab_args.subsamples, "Number of subsamples");
  stab_cmd->add_option("--mstop-cap", stab_args.mstop_cap, "Iteration cap per subsample fit");

  auto* predict_cmd = app.add_subcommand("predict", "Predict distribution parameters for new data");
  add_common(predict_cmd, common, false);
  predict_cmd->add_option("--model", predict_args.model, "model.json from fit")->required();
  predict_cmd->add_option("--data", predict_args.data, "CSV with the model's covariate columns")->required();

  auto* sim_cmd = app.add_subcommand("simulate", "Write a simulated scenario dataset");
  add_common(sim_cmd, common, true);
  sim_cmd->add_option("--scenario", sim_args.scenario, "1A 1B 2A 2B 3A 3B conv")
      ->check(CLI::IsMember({"1A", "1B", "2A", "2B", "3A", "3B", "conv"}));
  sim_cmd->add_option("--n", sim_args.n, "Observations");
  sim_cmd->add_option("--p", sim_args.p, "Total covariates (>= 6)");

  auto* repro_cmd = app.add_subcommand("reproduce", "Run a simulation experiment");
  add_common(repro_cmd, common, true);
  repro_cmd->add_option("--experiment", repro.experiment, "convergence | speed | runtime | stabsweep")
      ->required()
      ->check(CLI::IsMember({"convergence", "speed", "runtime", "stabsweep"}));
  repro_cmd->add_option("--reps", repro.reps, "Replications (experiment default if omitted)");
  repro_cmd->add_option("--n", repro.n, "Observations per dataset");
  repro_cmd->add_option("--iterations", repro.iterations, "Total boosting updates (convergence, speed)");
  repro_cmd->add_option("--p-noise", repro.p_noise, "Noise covariates (speed)");
  repro_cmd->add_option("--folds", repro.folds, "Bootstrap folds (runtime)");
  repro_cmd->add_option("--grid-max", repro.grid_max, "Largest mstop per parameter (runtime)");
  repro_cmd->add_option("--grid-length", repro.grid_length, "Grid axis length (runtime)");
  repro_cmd->add_option("--dims", repro.dims, "Distribution dimensions (runtime)")->delimiter(',');
  repro_cmd->add_option("--methods", repro.methods, "Subset of cyclical,inner,outer")->delimiter(',');
  repro_cmd->add_option("--scenarios", repro.scenarios, "Scenarios (stabsweep)")->delimiter(',');
  repro_cmd->add_option("--ps", repro.ps, "Covariate counts (stabsweep)")->delimiter(',');
  repro_cmd->add_option("--qs", repro.qs, "q values (stabsweep)")->delimiter(',');
  repro_cmd->add_option("--B", repro.subsamples, "Subsamples (stabsweep)");
  repro_cmd->add_option("--mstop-cap", repro.mstop_cap, "Iteration cap (stabsweep)");
  repro_cmd->add_option("--nu", repro.nu, "Step length");

  auto* rerun_cmd = app.add_subcommand("rerun", "Repeat a run recorded in a manifest");
  rerun_cmd->add_option("--manifest", manifest_path, "manifest.json of an earlier run")->required();
  rerun_cmd->add_option("--out", common.out_dir, "New output directory")->required();

  std::vector<const char*> cargv;
  for (const auto& a : args) cargv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (rerun_cmd->parsed()) {
      auto recorded = read_manifest_argv(manifest_path);
      const auto it = std::find(recorded.begin(), recorded.end(), "--out");
      if (it == recorded.end() || std::next(it) == recorded.end()) {
        throw std::invalid_argument("manifest argv has no --out");
      }
      *std::next(it) = common.out_dir;
      return run(recorded, out, err);
    }

    const auto start = std::chrono::steady_clock::now();
    const int threads = resolve_threads(common.threads);
    std::vector<std::string> argv(args.begin(), args.end());
    std::uint64_t seed = 0;
    if (common.seed) {
      seed = *common.seed;
    } else {
      std::random_device rd;
      seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
      if (!predict_cmd->parsed()) {
        argv.push_back("--seed");
        argv.push_back(std::to_string(seed));
      }
    }
    OutputDir dir(common.out_dir);
    CommandResult result;
    std::string command;
    ordered_json extra = ordered_json::object();
    if (fit_cmd->parsed()) {
      command = "fit";
      result = cmd_fit(model, fit_args, dir, out);
    } else if (cv_cmd->parsed()) {
      command = "cv";
      result = cmd_cv(model, cv_args, seed, threads, dir, out);
    } else if (stab_cmd->parsed()) {
      command = "stabsel";
      result = cmd_stabsel(model, stab_args, seed, threads, dir, out);
    } else if (predict_cmd->parsed()) {
      command = "predict";
      result = cmd_predict(predict_args, dir, out);
    } else if (sim_cmd->parsed()) {
      command = "simulate";
      result = cmd_simulate(sim_args, seed, dir, out);
    } else {
      command = "reproduce";
      result = cmd_reproduce(repro, seed, threads, dir, out, extra);
    }
    result.config["threads"] = threads;
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    write_manifest(dir, command, argv, result.config, seed, elapsed.count(), result.digest, extra);
    return 0;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return 1;
  }
}

}  // namespace distboost::cli
