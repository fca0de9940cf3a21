#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <map>
#include <ostream>
#include <sstream>

#include "pcts/copula_link.hpp"
#include "pcts/diagnose.hpp"
#include "pcts/errors.hpp"
#include "pcts/fit.hpp"
#include "pcts/generate.hpp"
#include "pcts/io.hpp"
#include "pcts/parallel.hpp"
#include "pcts/random.hpp"

#ifndef PCTS_VERSION
#define PCTS_VERSION "unknown"
#endif

namespace pcts::cli {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

const std::vector<std::string> kCommands{"simulate", "fit",  "diagnose",
                                         "bounds",   "link", "simstudy"};
const std::vector<std::string> kModels{"dar1",          "inar1",         "cinar",
                                       "super-renewal", "super-clipped", "copula"};

// Every config field, visited by name. Keys use underscores.
template <typename Config, typename F>
void visit_fields(Config& c, F&& f) {
  f("command", c.command);
  f("model", c.model);
  f("input", c.input);
  f("count_col", c.count_col);
  f("covariates", c.covariates);
  f("trend", c.trend);
  f("latent_order", c.latent_order);
  f("particles", c.particles);
  f("final_particles", c.final_particles);
  f("seed", c.seed);
  f("replicates", c.replicates);
  f("out_dir", c.out_dir);
  f("bootstrap_sims", c.bootstrap_sims);
  f("refit", c.refit);
  f("threads", c.threads);
  f("optimizer", c.optimizer);
  f("max_evaluations", c.max_evaluations);
  f("n", c.n);
  f("lambda", c.lambda);
  f("mu", c.mu);
  f("beta", c.beta);
  f("alpha", c.alpha);
  f("p", c.p);
  f("phi", c.phi);
  f("lifetime", c.lifetime);
  f("burn_in", c.burn_in);
  f("lambda_grid", c.lambda_grid);
  f("lambdas", c.lambdas);
  f("u_points", c.u_points);
  f("hermite_order", c.hermite_order);
  f("max_lag", c.max_lag);
  f("fit_record", c.fit_record);
}

json config_to_json(const RunConfig& cfg) {
  json j = json::object();
  visit_fields(cfg, [&](const char* key, const auto& v) { j[key] = v; });
  return j;
}

std::string normalize_key(std::string key) {
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

/// Values in the config file replace the command-line values.
void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw IngestionError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  if (j.contains("config") && j["config"].is_object()) j = j["config"];
  if (!j.is_object()) throw IngestionError("config file '" + path + "' must hold an object");
  std::map<std::string, json> entries;
  for (auto it = j.begin(); it != j.end(); ++it) entries[normalize_key(it.key())] = it.value();
  const std::string command = cfg.command;
  visit_fields(cfg, [&](const char* key, auto& v) {
    const auto it = entries.find(key);
    if (it == entries.end()) return;
    try {
      it->second.get_to(v);
    } catch (const json::exception& e) {
      throw IngestionError(std::string("config key '") + key + "' has the wrong type");
    }
    entries.erase(it);
  });
  if (!entries.empty()) {
    throw IngestionError("unknown config key '" + entries.begin()->first + "'");
  }
  if (cfg.command != command) {
    throw IngestionError("config file was recorded for command '" + cfg.command +
                         "', not '" + command + "'");
  }
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

std::string fixed(double v, int digits) {
  if (!std::isfinite(v)) return std::isnan(v) ? "NA" : (v > 0 ? "inf" : "-inf");
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

struct Session {
  RunConfig cfg;
  std::ostream& out;
  std::ostream& err;
  std::vector<std::string> outputs;
  std::vector<std::string> warnings;

  std::string path(const std::string& name) const { return (fs::path(cfg.out_dir) / name).string(); }

  void write(const std::string& name, const std::string& contents) {
    write_text(path(name), contents);
    outputs.push_back(name);
  }

  void warn(const std::string& message) {
    warnings.push_back(message);
    err << "warning: " << message << '\n';
  }

  void write_run_record() {
    json record = json::object();
    record["library"] = "pcts";
    record["library_version"] = PCTS_VERSION;
    record["command"] = cfg.command;
    record["seed"] = cfg.seed;
    record["config"] = config_to_json(cfg);
    record["outputs"] = outputs;
    record["warnings"] = warnings;
    write_text(path(cfg.command + ".run.json"), record.dump(2) + "\n");
  }
};

// ---------------------------------------------------------------------------
// Model and data assembly

void check_model(const std::string& model) {
  if (std::find(kModels.begin(), kModels.end(), model) == kModels.end()) {
    throw ModelError("unknown model family '" + model + "'");
  }
}

bool is_stationary_family(const std::string& model) {
  return model == "dar1" || model == "inar1" || model == "cinar";
}

std::vector<std::string> covariate_tokens(const RunConfig& cfg) {
  std::vector<std::string> tokens = cfg.covariates;
  if (cfg.trend && std::find(tokens.begin(), tokens.end(), "trend") == tokens.end()) {
    tokens.push_back("trend");
  }
  return tokens;
}

/// Resolves covariate tokens against an optional input table. Tokens that
/// are not columns may be `trend` (t = 1..n) or, when `synthetic` is set,
/// `bernoulli:P` (IID draws seeded from `seed`).
void resolve_covariates(const std::vector<std::string>& tokens, const CsvTable* table,
                        long n, bool synthetic, std::uint64_t seed, Eigen::MatrixXd& cov,
                        std::vector<std::string>& names) {
  cov.resize(n, static_cast<Eigen::Index>(tokens.size()));
  names.clear();
  for (std::size_t j = 0; j < tokens.size(); ++j) {
    const std::string& tok = tokens[j];
    const bool in_table =
        table && std::find(table->header.begin(), table->header.end(), tok) != table->header.end();
    if (in_table) {
      const auto& col = table->columns[table->column(tok)];
      for (long t = 0; t < n; ++t) cov(t, j) = col[t];
      names.push_back(tok);
    } else if (tok == "trend") {
      cov.col(j) = trend_column(n);
      names.push_back(tok);
    } else if (synthetic && tok.rfind("bernoulli:", 0) == 0) {
      const double prob = std::stod(tok.substr(10));
      if (!(prob >= 0.0 && prob <= 1.0)) throw DomainError("bernoulli covariate needs P in [0, 1]");
      Rng rng(derive_seed(seed, 0xC0000 + j));
      for (long t = 0; t < n; ++t) cov(t, j) = rng.bernoulli(prob) ? 1.0 : 0.0;
      names.push_back("c" + std::to_string(j + 1));
    } else if (table) {
      table->column(tok);  // throws, naming the column
    } else {
      throw IngestionError("covariate '" + tok + "' needs an input column");
    }
  }
}

CountSeries load_input(const RunConfig& cfg, const std::vector<std::string>& tokens) {
  if (cfg.input.empty()) throw IngestionError("--input is required for " + cfg.command);
  const CsvTable table = read_csv(cfg.input);
  CountSeries s = series_from_table(table, cfg.count_col, {});
  resolve_covariates(tokens, &table, s.size(), false, cfg.seed, s.covariates,
                     s.covariate_names);
  return s;
}

MeanModel mean_design(const Eigen::MatrixXd& cov, const std::vector<std::string>& names,
                      double mu, const std::vector<double>& beta) {
  MeanModel m;
  m.mu = mu;
  m.covariates = cov;
  m.covariate_names = names;
  if (beta.empty()) {
    m.beta = Eigen::VectorXd::Zero(cov.cols());
  } else if (static_cast<Eigen::Index>(beta.size()) == cov.cols()) {
    m.beta = to_vector(beta);
  } else {
    throw ModelError("--beta has " + std::to_string(beta.size()) + " entries for " +
                     std::to_string(cov.cols()) + " covariates");
  }
  return m;
}

OptimizerConfig optimizer_config(const RunConfig& cfg) {
  OptimizerConfig o;
  o.method = parse_optimizer_method(cfg.optimizer);
  o.max_evaluations = cfg.max_evaluations;
  return o;
}

GhkConfig ghk_config(const RunConfig& cfg, std::uint64_t seed, int threads) {
  GhkConfig g;
  g.particles = cfg.particles;
  g.final_particles = cfg.final_particles;
  g.seed = seed;
  g.threads = threads;
  return g;
}

struct SuperDesign {
  double p = 0.5;
  Eigen::VectorXd gamma_b;
};

SuperDesign super_design(const RunConfig& cfg, long n) {
  SuperDesign d;
  if (cfg.model == "super-renewal") {
    const RenewalLifetime life = make_lifetime(to_vector(cfg.lifetime));
    d.p = 1.0 / life.mean();
    d.gamma_b = renewal_acvf(life, static_cast<int>(n));
  } else {
    d.p = 0.5;
    d.gamma_b = clipped_acvf(LatentAR(to_vector(cfg.phi)), static_cast<int>(n));
  }
  return d;
}

std::string fit_label(const std::string& model, int r) {
  if (model != "copula") return "LP";
  if (r == 0) return "WN";
  return "AR" + std::to_string(r);
}

// ---------------------------------------------------------------------------
// Commands

void cmd_simulate(Session& s) {
  const RunConfig& cfg = s.cfg;
  check_model(cfg.model);
  std::unique_ptr<CsvTable> table;
  if (!cfg.input.empty()) table = std::make_unique<CsvTable>(read_csv(cfg.input));
  const long n = table ? table->rows() : cfg.n;
  if (n < 1) throw DomainError("series length must be >= 1");
  const std::vector<std::string> tokens = covariate_tokens(cfg);

  CountSeries series;
  if (is_stationary_family(cfg.model)) {
    if (!tokens.empty()) throw ModelError(cfg.model + " is stationary; covariates are not supported");
    if (cfg.model == "dar1") {
      series = gen_dar1(cfg.lambda, cfg.p, n, cfg.seed);
    } else if (cfg.model == "inar1") {
      if (cfg.alpha >= 0.95) {
        std::ostringstream os;
        os << "inar1 with alpha=" << cfg.alpha
           << " is close to unit thinning and mixes slowly; lag-k correlation alpha^k decays "
              "over roughly "
           << fixed(-1.0 / std::log(cfg.alpha), 0) << " steps";
        s.warn(os.str());
      }
      series = gen_inar1(cfg.lambda, cfg.alpha, n, cfg.seed);
    } else {
      series = gen_cinar(cfg.lambda, cfg.alpha, to_vector(cfg.phi), n, cfg.seed, cfg.burn_in);
    }
  } else {
    Eigen::MatrixXd cov;
    std::vector<std::string> names;
    resolve_covariates(tokens, table.get(), n, true, cfg.seed, cov, names);
    const MeanModel mean = mean_design(cov, names, cfg.mu, cfg.beta);
    if (cfg.model == "copula") {
      series = gen_copula(mean, LatentAR(to_vector(cfg.phi)), cfg.seed);
    } else if (cfg.model == "super-renewal") {
      series = gen_super_renewal(mean.lambda(), make_lifetime(to_vector(cfg.lifetime)), cfg.seed);
    } else {
      series = gen_super_clipped(mean.lambda(), LatentAR(to_vector(cfg.phi)), cfg.seed);
    }
    series.covariates = cov;
    series.covariate_names = names;
  }
  write_series_csv(s.path("series.csv"), series);
  s.outputs.push_back("series.csv");
  s.out << "simulated " << cfg.model << " series, n=" << n << ", mean "
        << fixed(series.as_double().mean(), 4) << " -> " << s.path("series.csv") << '\n';
}

json fit_to_json(const FitResult& f, int r) {
  json j = json::object();
  j["latent_order"] = r;
  j["theta_names"] = f.theta_names;
  j["theta"] = to_std(f.theta_hat);
  j["phi"] = to_std(f.eta_hat);
  j["se"] = to_std(f.se);
  j["loglik"] = f.loglik;
  j["sse"] = f.sse;
  j["aic"] = f.aic;
  j["bic"] = f.bic;
  j["converged"] = f.converged;
  j["evaluations"] = f.evaluations;
  j["n"] = f.n;
  j["diagnostic"] = f.diagnostic;
  return j;
}

void cmd_fit(Session& s) {
  const RunConfig& cfg = s.cfg;
  check_model(cfg.model);
  if (is_stationary_family(cfg.model)) {
    throw ModelError("fit supports copula, super-renewal and super-clipped families");
  }
  const CountSeries series = load_input(cfg, covariate_tokens(cfg));
  MeanModel tmpl = mean_design(series.covariates, series.covariate_names, 0.0, {});
  const OptimizerConfig opt = optimizer_config(cfg);

  std::vector<std::pair<int, FitResult>> fits;
  if (cfg.model == "copula") {
    if (cfg.latent_order.empty()) throw DomainError("--latent-order needs at least one value");
    for (int r : cfg.latent_order) {
      fits.emplace_back(r, fit_ghk(series, tmpl, r, opt, ghk_config(cfg, cfg.seed, cfg.threads)));
    }
  } else {
    const SuperDesign d = super_design(cfg, series.size());
    fits.emplace_back(0, fit_linear_prediction(series, tmpl, d.p, d.gamma_b, opt));
  }

  // Column layout: theta names, then phi_1..phi_R.
  int max_r = 0;
  for (const auto& [r, f] : fits) max_r = std::max(max_r, static_cast<int>(f.eta_hat.size()));
  std::vector<std::string> cols = fits.front().second.theta_names;
  for (int k = 1; k <= max_r; ++k) cols.push_back("phi" + std::to_string(k));

  std::size_t best_aic = 0, best_bic = 0;
  for (std::size_t i = 1; i < fits.size(); ++i) {
    if (fits[i].second.aic < fits[best_aic].second.aic) best_aic = i;
    if (fits[i].second.bic < fits[best_bic].second.bic) best_bic = i;
  }
  const bool lp = cfg.model != "copula";

  std::ostringstream table;
  table << "Summary of the " << cfg.model << " fit (n=" << series.size() << ")\n";
  table << std::left << std::setw(8) << "model" << std::setw(8) << "row";
  for (const auto& c : cols) table << std::right << std::setw(12) << c;
  if (lp) {
    table << std::setw(14) << "SSE";
  } else {
    table << std::setw(14) << "loglik" << std::setw(14) << "AIC" << std::setw(14) << "BIC";
  }
  table << '\n';
  std::ostringstream kv;
  for (std::size_t i = 0; i < fits.size(); ++i) {
    const auto& [r, f] = fits[i];
    const std::string label = fit_label(cfg.model, r);
    const long q = f.theta_hat.size();
    auto value = [&](const Eigen::VectorXd& v, std::size_t c, long offset) -> double {
      if (static_cast<long>(c) < q) return v.size() > static_cast<long>(c) ? v(c) : NAN;
      const long k = static_cast<long>(c) - q;
      return k < f.eta_hat.size() && offset + k < v.size() ? v(offset + k) : NAN;
    };
    Eigen::VectorXd est(q + f.eta_hat.size());
    est << f.theta_hat, f.eta_hat;
    const Eigen::VectorXd se = f.se.size() == est.size()
                                   ? f.se
                                   : Eigen::VectorXd::Constant(est.size(), NAN);
    table << std::left << std::setw(8) << label << std::setw(8) << "est";
    kv << "model=" << label << " record=estimate";
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const double v = value(est, c, q);
      table << std::right << std::setw(12) << (std::isnan(v) ? "" : fixed(v, 5));
      if (!std::isnan(v)) kv << ' ' << cols[c] << '=' << format_double(v);
    }
    if (lp) {
      table << std::setw(14) << fixed(f.sse, 4);
    } else {
      table << std::setw(14) << fixed(f.loglik, 4)
            << std::setw(14) << (fixed(f.aic, 4) + (i == best_aic ? "*" : " "))
            << std::setw(14) << (fixed(f.bic, 4) + (i == best_bic ? "*" : " "));
    }
    table << '\n' << std::left << std::setw(8) << "" << std::setw(8) << "se";
    kv << '\n' << "model=" << label << " record=se";
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const double v = value(se, c, q);
      const bool present = static_cast<long>(c) < q || static_cast<long>(c) - q < f.eta_hat.size();
      table << std::right << std::setw(12) << (present ? "(" + fixed(v, 5) + ")" : "");
      if (present) kv << ' ' << cols[c] << '=' << format_double(v);
    }
    table << '\n';
    kv << '\n' << "model=" << label << " record=criteria";
    if (lp) {
      kv << " sse=" << format_double(f.sse);
    } else {
      kv << " loglik=" << format_double(f.loglik) << " aic=" << format_double(f.aic)
         << " bic=" << format_double(f.bic) << " best_aic=" << (i == best_aic ? 1 : 0)
         << " best_bic=" << (i == best_bic ? 1 : 0);
    }
    kv << " converged=" << (f.converged ? 1 : 0) << '\n';
    if (!f.diagnostic.empty()) s.warn(label + ": " + f.diagnostic);
  }
  if (!lp && fits.size() > 1) table << "* lowest value in column\n";

  json record = json::object();
  record["model"] = cfg.model;
  record["count_col"] = cfg.count_col;
  record["covariates"] = series.covariate_names;
  record["n"] = series.size();
  record["fits"] = json::array();
  for (const auto& [r, f] : fits) record["fits"].push_back(fit_to_json(f, r));

  s.write("fit.txt", table.str());
  s.write("fit.kv", kv.str());
  s.write("fit.json", record.dump(2) + "\n");
  s.out << table.str();
}

FittedCopula model_from_record(const RunConfig& cfg, const CountSeries& series) {
  std::ifstream in(cfg.fit_record);
  if (!in) throw IngestionError("cannot open model record '" + cfg.fit_record + "'");
  const json rec = json::parse(in);
  const long n = rec.at("n").get<long>();
  if (n != series.size()) {
    throw ModelError("model record was fitted to " + std::to_string(n) +
                     " observations but the data have " + std::to_string(series.size()));
  }
  const json& fits = rec.at("fits");
  if (fits.empty()) throw ModelError("model record holds no fits");
  const int want = cfg.latent_order.empty() ? -1 : cfg.latent_order.front();
  json chosen = fits.front();
  for (const auto& f : fits) {
    if (f.at("latent_order").get<int>() == want) chosen = f;
  }
  const std::vector<double> theta = chosen.at("theta").get<std::vector<double>>();
  const std::vector<double> phi = chosen.at("phi").get<std::vector<double>>();
  if (static_cast<long>(theta.size()) != series.covariates.cols() + 1) {
    throw ModelError("model record has " + std::to_string(theta.size()) +
                     " mean coefficients but the data supply " +
                     std::to_string(series.covariates.cols()) + " covariates");
  }
  MeanModel tmpl = mean_design(series.covariates, series.covariate_names, 0.0, {});
  return {tmpl.with_params(to_vector(theta)), LatentAR(to_vector(phi))};
}

void cmd_diagnose(Session& s) {
  RunConfig& cfg = s.cfg;
  std::vector<std::string> tokens = covariate_tokens(cfg);
  if (!cfg.fit_record.empty()) {
    std::ifstream in(cfg.fit_record);
    if (!in) throw IngestionError("cannot open model record '" + cfg.fit_record + "'");
    tokens = json::parse(in).at("covariates").get<std::vector<std::string>>();
  }
  const CountSeries series = load_input(cfg, tokens);
  const FittedCopula model =
      cfg.fit_record.empty()
          ? FittedCopula{mean_design(series.covariates, series.covariate_names, cfg.mu, cfg.beta),
                         LatentAR(to_vector(cfg.phi))}
          : model_from_record(cfg, series);

  const ResidualSeries res = latent_residuals(series, model.mean, model.latent);
  std::ostringstream rcsv;
  rcsv << "t,x,zhat,rhat,missing\n";
  for (long t = 0; t < series.size(); ++t) {
    rcsv << t + 1 << ',' << series.x(t) << ',' << format_double(res.zhat(t)) << ','
         << format_double(res.rhat(t)) << ',' << (res.missing[t] ? 1 : 0) << '\n';
  }
  long finite = 0;
  for (double r : res.rhat) finite += std::isfinite(r) ? 1 : 0;
  const AcfTable acf =
      residual_acf(res.rhat, static_cast<int>(std::min<long>(cfg.max_lag, finite - 1)));
  std::ostringstream acsv;
  acsv << "lag,acf,pacf,band\n";
  for (Eigen::Index h = 0; h < acf.acf.size(); ++h) {
    acsv << h << ',' << format_double(acf.acf(h)) << ',' << format_double(acf.pacf(h)) << ','
         << format_double(acf.band) << '\n';
  }

  PitConfig pc;
  pc.particles = cfg.particles;
  pc.b_sims = cfg.bootstrap_sims;
  pc.seed = cfg.seed;
  pc.threads = cfg.threads;
  if (cfg.refit) {
    const MeanModel tmpl = mean_design(series.covariates, series.covariate_names, 0.0, {});
    const int r = model.latent.order();
    const OptimizerConfig opt = optimizer_config(cfg);
    const std::uint64_t seed = cfg.seed;
    const long m = cfg.particles;
    pc.refit = [tmpl, r, opt, seed, m](const CountSeries& sim) {
      GhkConfig g;
      g.particles = m;
      g.final_particles = m;
      g.seed = seed;
      g.standard_errors = false;
      return fitted_copula(fit_ghk(sim, tmpl, r, opt, g), tmpl);
    };
  }
  const PitSummary pit = pit_summary(series, model, pc);
  if (!pit.warning.empty()) s.warn(pit.warning);
  std::ostringstream pcsv;
  pcsv << "bin,lower,upper,proportion\n";
  for (int i = 0; i < kPitBins; ++i) {
    pcsv << i + 1 << ',' << format_double(i / 10.0) << ',' << format_double((i + 1) / 10.0)
         << ',' << format_double(pit.bins(i)) << '\n';
  }
  std::ostringstream fcsv;
  fcsv << "u,fbar\n";
  for (Eigen::Index i = 0; i < pit.fbar.size(); ++i) {
    fcsv << format_double(static_cast<double>(i) / (pit.fbar.size() - 1)) << ','
         << format_double(pit.fbar(i)) << '\n';
  }
  std::ostringstream summary;
  summary << "Q=" << fixed(pit.q, 4) << "\np_value=" << fixed(pit.p_value, 4)
          << "\nb_sims=" << pit.b_sims << '\n';

  s.write("residuals.csv", rcsv.str());
  s.write("acf.csv", acsv.str());
  s.write("pit.csv", pcsv.str());
  s.write("pit_cdf.csv", fcsv.str());
  s.write("diagnose.txt", summary.str());
  s.out << summary.str();
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    double lo = 0.0, hi = 0.0, step = 0.0;
    char c1 = 0, c2 = 0;
    std::istringstream is(text);
    if (!(is >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || !(step > 0.0) ||
        hi < lo) {
      throw DomainError("lambda grid must be lo:hi:step, got '" + text + "'");
    }
    const long count = std::lround(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (long i = 0; i < count; ++i) out.push_back(lo + i * step);
  } else {
    std::istringstream is(text);
    std::string field;
    while (std::getline(is, field, ',')) out.push_back(std::stod(field));
  }
  for (double v : out) {
    if (!(v > 0.0)) throw DomainError("lambda values must be positive");
  }
  return out;
}

void cmd_bounds(Session& s) {
  std::ostringstream csv;
  csv << "lambda,nb,super_nb,p_star\n";
  for (double lambda : parse_grid(s.cfg.lambda_grid)) {
    const CorrelationBound b = correlation_bound(lambda);
    csv << format_double(lambda) << ',' << format_double(b.nb) << ','
        << format_double(b.super_nb) << ',' << format_double(b.p_star) << '\n';
  }
  s.write("bounds.csv", csv.str());
  s.out << "wrote " << s.path("bounds.csv") << '\n';
}

void cmd_link(Session& s) {
  const RunConfig& cfg = s.cfg;
  if (cfg.u_points < 2) throw DomainError("--u-points must be >= 2");
  std::ostringstream csv;
  csv << "lambda,u,L\n";
  for (double lambda : cfg.lambdas) {
    const HermiteExpansion e = hermite_coefficients(lambda, cfg.hermite_order);
    double worst = 0.0;
    for (int i = 0; i < cfg.u_points; ++i) {
      const double u = 2 * i == cfg.u_points - 1 ? 0.0 : -1.0 + 2.0 * i / (cfg.u_points - 1);
      const double l = link(e, u);
      worst = std::max(worst, std::abs(l - u));
      csv << format_double(lambda) << ',' << format_double(u) << ',' << format_double(l) << '\n';
    }
    s.out << "lambda=" << format_double(lambda) << " tail_mass=" << fixed(e.tail_mass, 6)
          << " max|L(u)-u|=" << fixed(worst, 6) << '\n';
  }
  s.write("link.csv", csv.str());
}

void cmd_simstudy(Session& s) {
  const RunConfig& cfg = s.cfg;
  check_model(cfg.model);
  if (is_stationary_family(cfg.model)) {
    throw ModelError("simstudy supports copula, super-renewal and super-clipped families");
  }
  if (cfg.replicates < 2) throw DomainError("--replicates must be >= 2");
  std::vector<std::string> tokens = covariate_tokens(cfg);
  if (tokens.empty()) tokens = {"trend", "bernoulli:0.3"};
  const std::vector<double> beta =
      cfg.beta.empty() && tokens.size() == 2 ? std::vector<double>{0.01, 1.0} : cfg.beta;
  Eigen::MatrixXd cov;
  std::vector<std::string> names;
  resolve_covariates(tokens, nullptr, cfg.n, true, cfg.seed, cov, names);
  const MeanModel truth = mean_design(cov, names, cfg.mu, beta);
  const MeanModel tmpl = mean_design(cov, names, 0.0, {});
  const OptimizerConfig opt = optimizer_config(cfg);
  const LatentAR latent(to_vector(cfg.phi));
  const bool copula = cfg.model == "copula";

  const int reps = cfg.replicates;
  std::vector<FitResult> fits(reps);
  parallel_for(reps, cfg.threads, [&](long begin, long end) {
    for (long i = begin; i < end; ++i) {
      const std::uint64_t rep_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(i) + 1);
      if (copula) {
        const CountSeries x = gen_copula(truth, latent, rep_seed);
        fits[i] = fit_ghk(x, tmpl, latent.order(), opt, ghk_config(cfg, derive_seed(rep_seed, 77), 1));
      } else {
        const SuperDesign d = super_design(cfg, cfg.n);
        const CountSeries x =
            cfg.model == "super-renewal"
                ? gen_super_renewal(truth.lambda(), make_lifetime(to_vector(cfg.lifetime)), rep_seed)
                : gen_super_clipped(truth.lambda(), latent, rep_seed);
        fits[i] = fit_linear_prediction(x, tmpl, d.p, d.gamma_b, opt);
      }
    }
  });

  std::vector<std::string> pnames = fits.front().theta_names;
  Eigen::VectorXd true_vals(truth.params().size() + (copula ? latent.order() : 0));
  true_vals.head(truth.params().size()) = truth.params();
  if (copula) {
    true_vals.tail(latent.order()) = latent.phi();
    for (int k = 1; k <= latent.order(); ++k) pnames.push_back("phi" + std::to_string(k));
  }
  const long k = true_vals.size();
  Eigen::MatrixXd est(reps, k), se(reps, k);
  std::ostringstream csv;
  csv << "replicate";
  for (const auto& p : pnames) csv << ',' << p;
  for (const auto& p : pnames) csv << ",se_" << p;
  csv << ",converged\n";
  for (int i = 0; i < reps; ++i) {
    est.row(i).head(fits[i].theta_hat.size()) = fits[i].theta_hat.transpose();
    if (copula) est.row(i).tail(latent.order()) = fits[i].eta_hat.transpose();
    se.row(i) = fits[i].se.size() == k ? Eigen::RowVectorXd(fits[i].se.transpose())
                                       : Eigen::RowVectorXd::Constant(k, NAN);
    csv << i + 1;
    for (long j = 0; j < k; ++j) csv << ',' << format_double(est(i, j));
    for (long j = 0; j < k; ++j) csv << ',' << format_double(se(i, j));
    csv << ',' << (fits[i].converged ? 1 : 0) << '\n';
  }

  std::ostringstream table;
  table << "Simulation study: " << cfg.model << ", n=" << cfg.n << ", " << reps
        << " replicates\n";
  table << std::left << std::setw(10) << "param" << std::right << std::setw(12) << "true"
        << std::setw(12) << "mean" << std::setw(12) << "SD" << std::setw(12) << "mean SE" << '\n';
  for (long j = 0; j < k; ++j) {
    const double mean = est.col(j).mean();
    const double sd = std::sqrt((est.col(j).array() - mean).square().sum() / (reps - 1));
    double se_sum = 0.0;
    long se_count = 0;
    for (int i = 0; i < reps; ++i) {
      if (std::isfinite(se(i, j))) {
        se_sum += se(i, j);
        ++se_count;
      }
    }
    table << std::left << std::setw(10) << pnames[j] << std::right << std::setw(12)
          << fixed(true_vals(j), 5) << std::setw(12) << fixed(mean, 5) << std::setw(12)
          << fixed(sd, 5) << std::setw(12) << fixed(se_count ? se_sum / se_count : NAN, 5)
          << '\n';
  }
  s.write("simstudy.csv", csv.str());
  s.write("simstudy.txt", table.str());
  s.out << table.str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  std::string config_path;
  CLI::App app{"pcts: simulation and inference for count time series with Poisson marginals"};
  app.option_defaults()->always_capture_default();
  app.fallthrough();
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", PCTS_VERSION);

  app.add_option("--config", config_path,
                 "JSON config file or run record; its values override flags");
  app.add_option("--model", cfg.model, "dar1|inar1|cinar|super-renewal|super-clipped|copula");
  app.add_option("--input", cfg.input, "series CSV with header t,x[,c1..cq]");
  app.add_option("--count-col", cfg.count_col, "count column name");
  app.add_option("--covariates", cfg.covariates,
                 "covariate columns; 'trend' is t=1..n, 'bernoulli:P' is simulated")
      ->delimiter(',');
  app.add_flag("--trend", cfg.trend, "add the trend covariate t=1..n");
  app.add_option("--latent-order", cfg.latent_order, "latent AR order(s) r, e.g. 0,1,2")
      ->delimiter(',');
  app.add_option("--particles", cfg.particles, "GHK particles m during optimisation and PIT");
  app.add_option("--final-particles", cfg.final_particles,
                 "particles for the final likelihood and Hessian");
  app.add_option("--seed", cfg.seed, "master seed");
  app.add_option("--replicates", cfg.replicates, "simulation-study replicates");
  app.add_option("--out-dir", cfg.out_dir, "output directory");
  app.add_option("--bootstrap-sims", cfg.bootstrap_sims, "bootstrap series for the Q p-value");
  app.add_flag("--refit", cfg.refit, "refit each bootstrap series before its PIT");
  app.add_option("--threads", cfg.threads, "worker threads (0 = all cores)");
  app.add_option("--optimizer", cfg.optimizer, "nelder-mead|bfgs");
  app.add_option("--max-evaluations", cfg.max_evaluations, "objective evaluation budget");
  app.add_option("--n", cfg.n, "simulated series length");
  app.add_option("--lambda", cfg.lambda, "Poisson mean for dar1/inar1/cinar");
  app.add_option("--mu", cfg.mu, "intercept of log lambda_t");
  app.add_option("--beta", cfg.beta, "covariate coefficients")->delimiter(',');
  app.add_option("--alpha", cfg.alpha, "thinning probability (inar1, cinar)");
  app.add_option("--p", cfg.p, "DAR(1) repeat probability");
  app.add_option("--phi", cfg.phi, "latent AR coefficients / cinar lag probabilities")
      ->delimiter(',');
  app.add_option("--lifetime", cfg.lifetime, "renewal lifetime pmf P(L=1), P(L=2), ...")
      ->delimiter(',');
  app.add_option("--burn-in", cfg.burn_in, "cinar burn-in steps");
  app.add_option("--lambda-grid", cfg.lambda_grid, "bounds grid lo:hi:step or list");
  app.add_option("--lambdas", cfg.lambdas, "link lambda values")->delimiter(',');
  app.add_option("--u-points", cfg.u_points, "link evaluation points on [-1, 1]");
  app.add_option("--hermite-order", cfg.hermite_order, "Hermite truncation order K");
  app.add_option("--max-lag", cfg.max_lag, "largest residual ACF lag");
  app.add_option("--fit-record", cfg.fit_record, "fit.json written by the fit command");

  app.add_subcommand("simulate", "simulate a series");
  app.add_subcommand("fit", "fit a model to a series");
  app.add_subcommand("diagnose", "residual, ACF/PACF and PIT diagnostics");
  app.add_subcommand("bounds", "most negative lag-one correlations");
  app.add_subcommand("link", "copula link function curves");
  app.add_subcommand("simstudy", "replicated simulate-and-fit study");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }
  cfg.command = app.get_subcommands().front()->get_name();

  try {
    if (!config_path.empty()) apply_config_file(cfg, config_path);
    Session session{cfg, out, err, {}, {}};
    fs::create_directories(cfg.out_dir);
    const std::string& c = cfg.command;
    if (c == "simulate") {
      cmd_simulate(session);
    } else if (c == "fit") {
      cmd_fit(session);
    } else if (c == "diagnose") {
      cmd_diagnose(session);
    } else if (c == "bounds") {
      cmd_bounds(session);
    } else if (c == "link") {
      cmd_link(session);
    } else {
      cmd_simstudy(session);
    }
    session.write_run_record();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace pcts::cli
