#include "auxcop/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <regex>

#include "auxcop/error.hpp"
#include "auxcop/imputation.hpp"
#include "auxcop/io.hpp"
#include "auxcop/oracle.hpp"
#include "auxcop/regression.hpp"
#include "auxcop/simulation.hpp"
#include "auxcop/stats.hpp"

namespace fs = std::filesystem;

namespace auxcop {

const char* to_string(Command c) noexcept {
  switch (c) {
    case Command::simulate: return "simulate";
    case Command::fit: return "fit";
    case Command::impute: return "impute";
    case Command::analyze: return "analyze";
    case Command::diagnose: return "diagnose";
  }
  return "?";
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j{{"command", to_string(command)},
                   {"data", data_path},
                   {"schema", schema_path},
                   {"draws", draws_dir},
                   {"imputations", imputations_dir},
                   {"mode", auxcop::to_string(mode)},
                   {"iters", iters},
                   {"burnin", burnin},
                   {"thin", thin},
                   {"m", m},
                   {"spacing", spacing},
                   {"rank", rank},
                   {"candidate-bins", candidate_bins},
                   {"response", response},
                   {"covariates", covariates},
                   {"tau", taus},
                   {"ols", ols},
                   {"scale-numeric", scale_numeric},
                   {"bootstrap", bootstrap},
                   {"preset", preset},
                   {"n", n},
                   {"p", p},
                   {"missing", missing}};
  j["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
  return j;
}

std::uint64_t RunConfig::hash() const { return fnv1a64(to_json().dump()); }

namespace {

struct UsageHelp {
  std::string text;
};

// Options per command; every value arrives as a string and is typed below.
const std::map<std::string, std::vector<std::string>>& command_options() {
  static const std::map<std::string, std::vector<std::string>> opts{
      {"simulate", {"preset", "n", "p", "missing", "seed", "out"}},
      {"fit",
       {"data", "schema", "mode", "iters", "burnin", "thin", "rank", "seed", "out",
        "candidate-bins"}},
      {"impute", {"draws", "m", "spacing", "seed", "out"}},
      {"analyze",
       {"imputations", "response", "covariates", "tau", "bootstrap", "seed", "out"}},
      {"diagnose", {"data", "schema", "draws", "out"}},
  };
  return opts;
}

const std::map<std::string, std::string>& command_descriptions() {
  static const std::map<std::string, std::string> d{
      {"simulate", "Generate a synthetic dataset with its truth and schema"},
      {"fit", "Run the copula Gibbs sampler and write posterior draws"},
      {"impute", "Build completed datasets from stored draws"},
      {"analyze", "Fit regressions to each completed dataset and pool them"},
      {"diagnose", "Compare indicator correlations with the polychoric oracle"},
  };
  return d;
}

const std::map<std::string, std::string>& option_descriptions() {
  static const std::map<std::string, std::string> d{
      {"preset", "sec4-1 (copula study data) or mi (mixed-type population sample)"},
      {"n", "rows to simulate"},
      {"p", "study columns (sec4-1)"},
      {"missing", "target missing rate per column (sec4-1)"},
      {"seed", "RNG seed"},
      {"out", "output directory"},
      {"data", "CSV data file"},
      {"schema", "JSON schema file"},
      {"mode", "full, eql or ehql"},
      {"iters", "total sweeps"},
      {"burnin", "sweeps discarded before draws are kept"},
      {"thin", "keep every thin-th sweep after burn-in"},
      {"rank", "factor rank (0: number of latents)"},
      {"candidate-bins", "equal-width bins used to place intermediate points"},
      {"draws", "directory written by fit"},
      {"m", "number of imputations"},
      {"spacing", "retained draws between imputations"},
      {"imputations", "directory written by impute"},
      {"response", "response column"},
      {"covariates", "comma-separated covariate columns"},
      {"tau", "comma-separated quantile levels"},
      {"bootstrap", "bootstrap resamples for quantile-regression variances"},
  };
  return d;
}

const std::map<std::string, std::vector<std::string>>& command_flags() {
  static const std::map<std::string, std::vector<std::string>> flags{
      {"analyze", {"ols", "scale-numeric"}},
  };
  return flags;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::string as_text(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string out;
    for (std::size_t k = 0; k < v.size(); ++k) out += (k ? "," : "") + as_text(v[k]);
    return out;
  }
  return v.dump();
}

long long to_integer(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw Error(Errc::config_error, "--" + key + " expects an integer, got '" + text + "'");
  }
}

double to_real(const std::string& key, const std::string& text) {
  try {
    return parse_double(text);
  } catch (const Error&) {
    throw Error(Errc::config_error, "--" + key + " expects a number, got '" + text + "'");
  }
}

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(Errc::config_error, message);
}

}  // namespace

RunConfig parse_and_validate(const std::vector<std::string>& args) {
  CLI::App app{"Gaussian copula estimation and multiple imputation with auxiliary quantiles",
               "auxcopula"};
  app.require_subcommand(1, 1);
  std::map<std::string, std::map<std::string, std::string>> raw;
  std::map<std::string, std::map<std::string, bool>> raw_flags;
  std::map<std::string, std::string> config_file;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [cmd, names] : command_options()) {
    CLI::App* sub = app.add_subcommand(cmd, command_descriptions().at(cmd));
    subs[cmd] = sub;
    for (const auto& name : names)
      sub->add_option("--" + name, raw[cmd][name], option_descriptions().at(name));
    sub->add_option("--config", config_file[cmd], "JSON file with default flag values");
    if (auto it = command_flags().find(cmd); it != command_flags().end())
      for (const auto& f : it->second)
        sub->add_flag("--" + f, raw_flags[cmd][f],
                      f == "ols" ? "also fit least squares"
                                 : "standardize numeric covariates to standard deviation 1/2");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw UsageHelp{app.help()};
  } catch (const CLI::ParseError& e) {
    throw Error(Errc::config_error, e.what());
  }

  std::string cmd;
  for (const auto& [name, sub] : subs)
    if (sub->parsed()) cmd = name;
  CLI::App* sub = subs.at(cmd);

  // File values first, then every flag given on the command line.
  nlohmann::json merged = nlohmann::json::object();
  if (!config_file[cmd].empty()) {
    require(fs::exists(config_file[cmd]), "--config: file '" + config_file[cmd] + "' not found");
    nlohmann::json file;
    try {
      file = nlohmann::json::parse(read_file(config_file[cmd]));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::config_error, "--config: " + std::string(e.what()));
    }
    require(file.is_object(), "--config: expected a JSON object");
    for (const auto& [k, v] : file.items()) merged[k] = v;
  }
  for (const auto& name : command_options().at(cmd))
    if (sub->count("--" + name)) merged[name] = raw[cmd][name];
  if (auto it = command_flags().find(cmd); it != command_flags().end())
    for (const auto& f : it->second)
      if (sub->count("--" + f)) merged[f] = true;

  RunConfig c;
  c.command = cmd == "simulate" ? Command::simulate
              : cmd == "fit"    ? Command::fit
              : cmd == "impute" ? Command::impute
              : cmd == "analyze" ? Command::analyze
                                 : Command::diagnose;
  auto text = [&](const char* key) -> std::optional<std::string> {
    if (!merged.contains(key) || merged[key].is_null()) return std::nullopt;
    return as_text(merged[key]);
  };
  auto set_int = [&](const char* key, int& field) {
    if (auto v = text(key)) field = static_cast<int>(to_integer(key, *v));
  };
  if (auto v = text("data")) c.data_path = *v;
  if (auto v = text("schema")) c.schema_path = *v;
  if (auto v = text("draws")) c.draws_dir = *v;
  if (auto v = text("imputations")) c.imputations_dir = *v;
  if (auto v = text("out")) c.output_dir = *v;
  if (auto v = text("mode")) c.mode = likelihood_mode_from_string(*v);
  set_int("iters", c.iters);
  set_int("burnin", c.burnin);
  set_int("thin", c.thin);
  set_int("m", c.m);
  set_int("spacing", c.spacing);
  set_int("rank", c.rank);
  set_int("candidate-bins", c.candidate_bins);
  set_int("bootstrap", c.bootstrap);
  set_int("n", c.n);
  set_int("p", c.p);
  if (auto v = text("seed")) {
    const long long s = to_integer("seed", *v);
    require(s >= 0, "--seed must be non-negative");
    c.seed = static_cast<std::uint64_t>(s);
  }
  if (auto v = text("missing")) c.missing = to_real("missing", *v);
  if (auto v = text("preset")) c.preset = *v;
  if (auto v = text("response")) c.response = *v;
  if (auto v = text("covariates")) c.covariates = split_list(*v);
  if (auto v = text("tau")) {
    c.taus.clear();
    for (const auto& t : split_list(*v)) c.taus.push_back(to_real("tau", t));
  }
  if (merged.contains("ols")) c.ols = merged["ols"].is_boolean() ? merged["ols"].get<bool>() : true;
  if (merged.contains("scale-numeric"))
    c.scale_numeric =
        merged["scale-numeric"].is_boolean() ? merged["scale-numeric"].get<bool>() : true;

  // Cross-field checks, all before any computation.
  require(c.iters >= 1, "--iters must be >= 1");
  require(c.burnin >= 0 && c.burnin < c.iters,
          "--burnin (" + std::to_string(c.burnin) + ") must be in [0, --iters = " +
              std::to_string(c.iters) + ")");
  require(c.thin >= 1, "--thin must be >= 1");
  require(c.m >= 1, "--m must be >= 1");
  require(c.spacing >= 1, "--spacing must be >= 1");
  require(c.rank >= 0, "--rank must be >= 0");
  require(c.candidate_bins >= 2, "--candidate-bins must be >= 2");
  require(c.bootstrap >= 2, "--bootstrap must be >= 2");
  for (double t : c.taus) require(t > 0.0 && t < 1.0, "--tau values must lie in (0, 1)");
  auto need_file = [&](const std::string& path, const char* flag) {
    require(!path.empty(), std::string("--") + flag + " is required for " + cmd);
    require(fs::exists(path), std::string("--") + flag + ": '" + path + "' not found");
  };
  switch (c.command) {
    case Command::simulate:
      require(c.preset == "sec4-1" || c.preset == "mi",
              "--preset must be 'sec4-1' or 'mi' (got '" + c.preset + "')");
      require(c.n >= 1, "--n must be >= 1");
      require(c.p >= 1, "--p must be >= 1");
      require(c.missing > 0.0 && c.missing < 1.0, "--missing must lie in (0, 1)");
      require(!c.output_dir.empty(), "--out is required for simulate");
      break;
    case Command::fit:
      need_file(c.data_path, "data");
      need_file(c.schema_path, "schema");
      require(c.seed.has_value(), "--seed is required for fit");
      require(!c.output_dir.empty(), "--out is required for fit");
      break;
    case Command::impute:
      need_file(c.draws_dir, "draws");
      require(c.seed.has_value(), "--seed is required for impute");
      break;
    case Command::analyze:
      need_file(c.imputations_dir, "imputations");
      require(!c.response.empty(), "--response is required for analyze");
      require(!c.covariates.empty(), "--covariates is required for analyze");
      break;
    case Command::diagnose:
      need_file(c.data_path, "data");
      need_file(c.schema_path, "schema");
      if (!c.draws_dir.empty()) need_file(c.draws_dir, "draws");
      require(!c.output_dir.empty(), "--out is required for diagnose");
      break;
  }
  return c;
}

namespace {

std::uint64_t seed_of(const RunConfig& c) { return c.seed.value_or(1); }

void write_csv(const fs::path& path, const RunConfig& c, const std::string& body) {
  write_file(path, header_comment(c.hash(), seed_of(c)) + body);
}

void write_json(const fs::path& path, const RunConfig& c, nlohmann::json doc) {
  doc["_header"] = "auxcopula config=" + hex64(c.hash()) + " seed=" + std::to_string(seed_of(c));
  write_file(path, doc.dump(2) + "\n");
}

std::string matrix_csv(const Eigen::MatrixXd& m) {
  std::string out;
  for (Eigen::Index j = 0; j < m.cols(); ++j) out += (j ? ",c" : "c") + std::to_string(j);
  out += '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out += (j ? "," : "") + format_double(m(i, j));
    out += '\n';
  }
  return out;
}

void run_simulate(const RunConfig& c) {
  const fs::path out = c.output_dir;
  Rng rng(seed_of(c));
  if (c.preset == "sec4-1") {
    const Eigen::MatrixXd c0 = gen_correlation(rng, 2 * c.p);
    const auto margins = cycle_marginals(c.p);
    const Eigen::VectorXd alpha_r = Eigen::VectorXd::Constant(c.p, norm_quantile(c.missing));
    const SimulatedData sim = gen_copula_data(rng, c0, margins, alpha_r, c.n);
    std::vector<ColumnModel> models(static_cast<std::size_t>(c.p));
    for (int j = 0; j < c.p; ++j) {
      models[static_cast<std::size_t>(j)].aux =
          true_aux(*margins[static_cast<std::size_t>(j)], {0.0, 0.5, 1.0}, sim.bounds[static_cast<std::size_t>(j)]);
      models[static_cast<std::size_t>(j)].marginal = margins[static_cast<std::size_t>(j)];
    }
    write_csv(out / "data.csv", c, dataset_to_csv(sim.data.schemas(), sim.data.values()));
    write_csv(out / "truth.csv", c, dataset_to_csv(sim.data.schemas(), sim.complete));
    write_csv(out / "c0.csv", c, matrix_csv(sim.c0));
    write_json(out / "schema.json", c, schema_to_json(sim.data.schemas(), models));
  } else {
    Rng pop_rng = Rng::substream(seed_of(c), 0xC0FFEE, 0);
    const Population pop = make_population(pop_rng, std::max(50000, c.n), 0.5);
    const Eigen::Index mnar = pop.data.column_index(pop.mnar_column);
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(pop.data.rows()));
    std::iota(idx.begin(), idx.end(), 0);
    for (int k = 0; k < c.n; ++k)
      std::swap(idx[static_cast<std::size_t>(k)],
                idx[static_cast<std::size_t>(k + static_cast<Eigen::Index>(rng.index(idx.size() - k)))]);
    Eigen::MatrixXd complete(c.n, pop.data.cols());
    for (int k = 0; k < c.n; ++k) complete.row(k) = pop.data.values().row(idx[static_cast<std::size_t>(k)]);
    Eigen::MatrixXd masked = complete;
    std::vector<double> col(complete.col(mnar).data(), complete.col(mnar).data() + c.n);
    const auto mask = apply_an_missingness(rng, col);
    for (int k = 0; k < c.n; ++k)
      if (mask[static_cast<std::size_t>(k)]) masked(k, mnar) = kMissing;
    for (Eigen::Index j = 0; j < masked.cols(); ++j)
      if (j != mnar)
        for (int k = 0; k < c.n; ++k)
          if (rng.bernoulli(0.05)) masked(k, j) = kMissing;
    const Dataset data(pop.data.schemas(), masked);
    std::vector<ColumnModel> models(pop.data.schemas().size());
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
      const auto& s = data.schema(j);
      if (!s.is_numeric()) continue;
      if (j == mnar) {
        std::vector<double> all(pop.data.values().col(mnar).data(),
                                pop.data.values().col(mnar).data() + pop.data.rows());
        models[static_cast<std::size_t>(j)].aux = empirical_aux(all, {0.0, 0.5, 1.0}, s.kind);
      } else {
        models[static_cast<std::size_t>(j)].aux = empirical_aux(data.observed(j), decile_taus(), s.kind);
      }
    }
    write_csv(out / "data.csv", c, dataset_to_csv(data.schemas(), data.values()));
    write_csv(out / "truth.csv", c, dataset_to_csv(data.schemas(), complete));
    write_json(out / "schema.json", c, schema_to_json(data.schemas(), models));
    nlohmann::json target = nlohmann::json::object();
    for (std::size_t k = 0; k < pop.coef_names.size(); ++k)
      target[pop.coef_names[k]] = pop.target(static_cast<Eigen::Index>(k));
    write_json(out / "population_target.json", c,
               {{"response", pop.response}, {"covariates", pop.covariates}, {"tau", 0.5},
                {"coefficients", target}});
  }
  std::cout << "simulate: wrote " << out.string() << "\n";
}

void run_fit(const RunConfig& c) {
  const fs::path out = c.output_dir;
  const SchemaFile schema = schema_from_json(nlohmann::json::parse(read_file(c.schema_path)));
  const Dataset data = dataset_from_csv(parse_csv(read_file(c.data_path)), schema.schemas);
  ChainConfig cc;
  cc.mode = c.mode;
  cc.iters = c.iters;
  cc.burnin = c.burnin;
  cc.thin = c.thin;
  cc.seed = *c.seed;
  cc.hyper.rank = c.rank;
  cc.candidate_bins = c.candidate_bins;
  const PosteriorOutput post = run_chain(data, schema.models, cc);

  write_csv(out / "data.csv", c, dataset_to_csv(data.schemas(), data.values()));
  write_csv(out / "draws.csv", c, draws_to_csv(post));
  write_csv(out / "marginals.csv", c, marginals_to_csv(post));
  write_csv(out / "missing_draws.csv", c, missing_draws_to_csv(post));
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& cell : post.missing_cells) cells.push_back({cell.row, cell.col});
  std::vector<int> sweeps;
  for (const auto& d : post.draws) sweeps.push_back(d.sweep);
  nlohmann::json layout = nlohmann::json::array();
  for (const auto& l : post.layout) {
    const char* role = l.role == LatentRole::numeric   ? "numeric"
                       : l.role == LatentRole::binary  ? "binary"
                       : l.role == LatentRole::level   ? "level"
                                                       : "indicator";
    layout.push_back({{"role", role},
                      {"column", post.schemas[static_cast<std::size_t>(l.source)].name},
                      {"level", l.level}});
  }
  write_json(out / "fit_meta.json", c,
             {{"mode", to_string(c.mode)},
              {"schema", schema_to_json(post.schemas, post.models)},
              {"layout", layout},
              {"missing_cells", cells},
              {"sweeps", sweeps},
              {"iters", c.iters},
              {"burnin", c.burnin},
              {"thin", c.thin},
              {"seed", *c.seed}});
  std::cout << "fit: " << post.draws.size() << " draws retained in " << post.seconds << " s, wrote "
            << out.string() << "\n";
}

void run_impute(const RunConfig& c) {
  const fs::path dir = c.draws_dir;
  const fs::path out = c.output_dir.empty() ? dir / "imputations" : fs::path(c.output_dir);
  const nlohmann::json meta = nlohmann::json::parse(read_file(dir / "fit_meta.json"));
  const PosteriorOutput post = posterior_from_files(meta, parse_csv(read_file(dir / "marginals.csv")),
                                                    parse_csv(read_file(dir / "missing_draws.csv")));
  const Dataset data = dataset_from_csv(parse_csv(read_file(dir / "data.csv")), post.schemas);
  const auto imps = make_imputations(data, post, c.m, c.spacing);
  for (std::size_t k = 0; k < imps.size(); ++k)
    write_csv(out / ("imp_" + std::to_string(k + 1) + ".csv"), c,
              dataset_to_csv(post.schemas, imps[k].values));
  nlohmann::json schema_doc = schema_to_json(post.schemas, post.models);
  write_json(out / "schema.json", c, schema_doc);
  std::cout << "impute: wrote " << imps.size() << " completed datasets to " << out.string() << "\n";
}

nlohmann::json pooled_json(const std::vector<std::string>& names,
                           const std::vector<std::vector<double>>& est,
                           const std::vector<std::vector<double>>& var) {
  nlohmann::json coefs = nlohmann::json::array();
  for (std::size_t k = 0; k < names.size(); ++k) {
    nlohmann::json entry{{"name", names[k]}};
    if (est[k].size() >= 2) {
      const auto r = rubin_combine(est[k], var[k]);
      entry.update({{"estimate", r.qbar}, {"within", r.ubar}, {"between", r.b}, {"total", r.t},
                    {"df", std::isinf(r.df) ? nlohmann::json("inf") : nlohmann::json(r.df)},
                    {"ci95", {r.ci_lo, r.ci_hi}}});
    } else {
      entry.update({{"estimate", est[k].at(0)}, {"variance", var[k].at(0)}});
    }
    coefs.push_back(entry);
  }
  return coefs;
}

void run_analyze(const RunConfig& c) {
  const fs::path dir = c.imputations_dir;
  const fs::path out = c.output_dir.empty() ? dir : fs::path(c.output_dir);
  const SchemaFile schema = schema_from_json(nlohmann::json::parse(read_file(dir / "schema.json")));
  std::vector<std::pair<int, fs::path>> files;
  const std::regex pattern("imp_([0-9]+)\\.csv");
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (std::regex_match(name, m, pattern)) files.emplace_back(std::stoi(m[1]), entry.path());
  }
  if (files.empty()) throw Error(Errc::io_error, "no imp_<k>.csv files in " + dir.string());
  std::sort(files.begin(), files.end());

  std::vector<Design> designs;
  for (const auto& [k, path] : files) {
    const Dataset d = dataset_from_csv(parse_csv(read_file(path)), schema.schemas);
    if (d.missing_count() > 0) throw Error(Errc::io_error, path.string() + " still has missing cells");
    designs.push_back(build_design(d.schemas(), d.values(), {c.response, c.covariates, c.scale_numeric}));
  }
  const auto& names = designs.front().names;
  nlohmann::json analyses = nlohmann::json::array();
  if (c.ols) {
    std::vector<std::vector<double>> est(names.size()), var(names.size());
    for (const auto& d : designs) {
      const auto fit = fit_ols(d);
      for (std::size_t k = 0; k < names.size(); ++k) {
        est[k].push_back(fit.coef(static_cast<Eigen::Index>(k)));
        var[k].push_back(fit.var(static_cast<Eigen::Index>(k)));
      }
    }
    analyses.push_back({{"method", "ols"}, {"coefficients", pooled_json(names, est, var)}});
  }
  for (std::size_t t = 0; t < c.taus.size(); ++t) {
    Rng rng = Rng::substream(seed_of(c), t, 0);
    std::vector<std::vector<double>> est(names.size()), var(names.size());
    for (const auto& d : designs) {
      const auto fit = fit_quantile_regression(d, c.taus[t], rng, c.bootstrap);
      for (std::size_t k = 0; k < names.size(); ++k) {
        est[k].push_back(fit.coef(static_cast<Eigen::Index>(k)));
        var[k].push_back(fit.var(static_cast<Eigen::Index>(k)));
      }
    }
    analyses.push_back({{"method", "quantile"},
                        {"tau", c.taus[t]},
                        {"coefficients", pooled_json(names, est, var)}});
  }
  write_json(out / "pooled.json", c,
             {{"response", c.response}, {"imputations", files.size()}, {"analyses", analyses}});
  std::cout << "analyze: pooled " << files.size() << " imputations, wrote "
            << (out / "pooled.json").string() << "\n";
}

void run_diagnose(const RunConfig& c) {
  const SchemaFile schema = schema_from_json(nlohmann::json::parse(read_file(c.schema_path)));
  const Dataset data = dataset_from_csv(parse_csv(read_file(c.data_path)), schema.schemas);
  const auto layout = build_layout(data.schemas());

  std::map<std::pair<int, int>, std::pair<double, int>> posterior;
  if (!c.draws_dir.empty()) {
    const CsvTable draws = parse_csv(read_file(fs::path(c.draws_dir) / "draws.csv"));
    const std::size_t s = draws.column("sweep"), p = draws.column("param"), i = draws.column("i"),
                      j = draws.column("j"), v = draws.column("value");
    for (const auto& row : draws.rows) {
      if (row[p] != "corr" || row[s] == "0") continue;
      auto& slot = posterior[{std::stoi(row[i]), std::stoi(row[j])}];
      slot.first += parse_double(row[v]);
      slot.second += 1;
    }
  }

  nlohmann::json results = nlohmann::json::array();
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    const auto& s = data.schema(j);
    const auto& model = schema.models[static_cast<std::size_t>(j)];
    if (!s.is_numeric() || s.missingness != MissingnessMode::modeled || !model.aux) continue;
    const AuxiliaryQuantileSet known = model.aux->known_only();
    const auto obs = data.observed(j);
    const BinnedColumn bins = build_bins(known, obs);
    std::vector<int> bin_or_missing(static_cast<std::size_t>(data.rows()), -1);
    std::size_t e = 0;
    for (Eigen::Index i = 0; i < data.rows(); ++i)
      if (!data.is_missing(i, j)) bin_or_missing[static_cast<std::size_t>(i)] = bins.bin_of[e++];
    std::vector<double> taus{bins.bins.front().known_tau_lo};
    for (const auto& b : bins.bins) taus.push_back(b.known_tau_hi);
    const CellTable table = indicator_pair_table(bin_or_missing, taus);

    nlohmann::json r{{"column", s.name}, {"missing_rate", data.missing_rate(j)}};
    try {
      r["polychoric"] = polychoric_mle(table);
    } catch (const Error& err) {
      if (err.code() != Errc::boundary_estimate) throw;
      r["polychoric"] = nullptr;
      r["note"] = err.what();
    }
    if (!posterior.empty()) {
      Eigen::Index lat = -1, ind = -1;
      for (std::size_t l = 0; l < layout.size(); ++l) {
        if (layout[l].source != j) continue;
        if (layout[l].role == LatentRole::indicator)
          ind = static_cast<Eigen::Index>(l);
        else
          lat = static_cast<Eigen::Index>(l);
      }
      const auto it = posterior.find({static_cast<int>(lat), static_cast<int>(ind)});
      if (it != posterior.end()) {
        const double mean = it->second.first / it->second.second;
        r["posterior_mean"] = mean;
        if (r["polychoric"].is_number())
          r["abs_difference"] = std::fabs(mean - r["polychoric"].get<double>());
      }
    }
    results.push_back(r);
  }
  write_json(fs::path(c.output_dir) / "diagnose.json", c, {{"columns", results}});
  std::cout << "diagnose: " << results.size() << " column(s), wrote "
            << (fs::path(c.output_dir) / "diagnose.json").string() << "\n";
}

}  // namespace

void execute(const RunConfig& config) {
  switch (config.command) {
    case Command::simulate: run_simulate(config); break;
    case Command::fit: run_fit(config); break;
    case Command::impute: run_impute(config); break;
    case Command::analyze: run_analyze(config); break;
    case Command::diagnose: run_diagnose(config); break;
  }
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  RunConfig config;
  try {
    config = parse_and_validate(args);
  } catch (const UsageHelp& h) {
    std::cout << h.text;
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "auxcopula: " << e.what() << "\n";
    return 2;
  }
  try {
    execute(config);
  } catch (const std::exception& e) {
    std::cerr << "auxcopula " << to_string(config.command) << " failed: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace auxcop
