// acme: carcass-persistence mortality estimation toolkit.
//
// Subcommands: simulate, fit-removal, fit-discovery, reduction, estimate.
// Exit codes: 0 success, 2 input error, 3 numerical/fit failure, 4 I/O error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "acme/fit.hpp"
#include "acme/idt.hpp"
#include "acme/inference.hpp"
#include "acme/legacy.hpp"
#include "acme/reduction.hpp"

using json = nlohmann::ordered_json;

namespace {

constexpr const char* schema_version = "1.0";

struct Options {
  std::string command;
  std::string carcasses_path;
  std::string searches_path;
  std::string out_path;
  std::string format = "json";
  std::string prior = "objective";
  std::vector<double> intervals = {7.0};
  std::vector<double> gammas = {0.5, 0.9};
  std::vector<long long> counts;
  std::vector<std::string> from_fit;
  std::vector<double> legacy;  // s, t_hat
  double alpha = 0.4695;
  double rho = 0.0809;
  double a = 1.0322;
  double b = 0.0706;
  double bleed = 0.9573;
  double tol = 1e-3;
  double window = 0.0;  // 0 = default 10 * interval
  double pfm_cadence = 3.0;
  int n_carcasses = 500;
  int n_searches = 0;  // 0 = default covering window + 30 intervals
  int terms = 0;  // 0 = accumulate until the tail bound meets --tol
  std::uint64_t seed = 1;
  bool constant_only = false;
};

class CliError : public std::runtime_error {
 public:
  CliError(int code, const std::string& msg) : std::runtime_error(msg), exit_code(code) {}
  int exit_code;
};

json config_json(const Options& o) {
  json cfg;
  cfg["command"] = o.command;
  if (!o.carcasses_path.empty()) cfg["carcasses"] = o.carcasses_path;
  if (!o.searches_path.empty()) cfg["searches"] = o.searches_path;
  cfg["alpha"] = o.alpha;
  cfg["rho"] = o.rho;
  cfg["a"] = o.a;
  cfg["b"] = o.b;
  cfg["bleed"] = o.bleed;
  cfg["interval"] = o.intervals;
  cfg["prior"] = o.prior;
  cfg["gamma"] = o.gammas;
  cfg["tol"] = o.tol;
  if (o.terms > 0) cfg["terms"] = o.terms;
  cfg["seed"] = o.seed;
  cfg["format"] = o.format;
  if (!o.counts.empty()) cfg["counts"] = o.counts;
  if (!o.from_fit.empty()) cfg["from_fit"] = o.from_fit;
  if (!o.legacy.empty()) cfg["legacy"] = o.legacy;
  if (o.command == "simulate") {
    cfg["n"] = o.n_carcasses;
    cfg["window"] = o.window;
    cfg["n_searches"] = o.n_searches;
    cfg["pfm_cadence"] = o.pfm_cadence;
  }
  if (o.command == "fit-discovery") cfg["constant"] = o.constant_only;
  return cfg;
}

void write_output(const Options& o, const std::string& text) {
  if (o.out_path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(o.out_path);
  if (!out) throw CliError(4, "cannot open output file " + o.out_path);
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
  if (!out) throw CliError(4, "failed writing " + o.out_path);
}

acme::IdtDataset load_dataset(const Options& o, bool need_searches) {
  if (o.carcasses_path.empty()) throw CliError(2, "--carcasses is required");
  std::ifstream cin_s(o.carcasses_path);
  if (!cin_s) throw CliError(4, "cannot open " + o.carcasses_path);
  std::stringstream searches;
  if (!o.searches_path.empty()) {
    std::ifstream sin(o.searches_path);
    if (!sin) throw CliError(4, "cannot open " + o.searches_path);
    searches << sin.rdbuf();
  } else {
    if (need_searches) throw CliError(2, "--searches is required");
    searches << "carcass_id,search_time,discovered\n";
  }
  try {
    return acme::parse_dataset(cin_s, searches);
  } catch (const acme::ParseError& e) {
    std::ostringstream msg;
    msg << "input validation failed:";
    for (const auto& issue : e.issues()) msg << "\n  " << issue;
    throw CliError(2, msg.str());
  }
}

acme::AcmeParams params_from(const Options& o, double interval) {
  Options eff = o;
  for (const auto& path : o.from_fit) {
    std::ifstream in(path);
    if (!in) throw CliError(4, "cannot open fit report " + path);
    json rep = json::parse(in, nullptr, false);
    if (rep.is_discarded() || !rep.contains("estimates"))
      throw CliError(2, "not a fit report: " + path);
    const auto& est = rep["estimates"];
    if (est.contains("alpha")) eff.alpha = est["alpha"].get<double>();
    if (est.contains("rho")) eff.rho = est["rho"].get<double>();
    if (est.contains("a")) eff.a = est["a"].get<double>();
    if (est.contains("b")) eff.b = est["b"].get<double>();
    if (est.contains("bleed")) eff.bleed = est["bleed"].get<double>();
  }
  acme::AcmeParams p{{eff.alpha, eff.rho}, {eff.a, eff.b}, eff.bleed, interval};
  try {
    p.validate();
  } catch (const std::exception& e) {
    throw CliError(2, std::string("invalid parameters: ") + e.what());
  }
  return p;
}

acme::ReductionResult compute_reduction(const Options& o, const acme::AcmeParams& p) {
  return (o.terms > 0) ? acme::reduction_factor_n_terms(p, o.terms, o.tol)
                       : acme::reduction_factor(p, o.tol);
}

json fit_json(const acme::FitResult& fr) {
  json j;
  json est, se;
  for (std::size_t i = 0; i < fr.names.size(); ++i) {
    est[fr.names[i]] = fr.estimates[i];
    se[fr.names[i]] = std::isnan(fr.std_errors[i]) ? json() : json(fr.std_errors[i]);
  }
  j["estimates"] = est;
  j["std_errors"] = se;
  j["nllh"] = fr.nllh;
  j["converged"] = fr.converged;
  j["n_evals"] = fr.n_evals;
  j["boundary"] = fr.boundary;
  j["warnings"] = fr.warnings;
  return j;
}

json interval_json(const acme::IntervalEstimate& est) {
  json j;
  j["lo"] = est.lo;
  j["hi"] = est.hi;
  j["gamma"] = est.gamma;
  if (est.kind == acme::IntervalKind::hpd) j["contiguous"] = est.contiguous;
  return j;
}

int cmd_simulate(const Options& o) {
  const double I = o.intervals.front();
  acme::AcmeParams p = params_from(o, I);
  const double window = (o.window > 0.0) ? o.window : 10.0 * I;
  const int n_searches =
      (o.n_searches > 0) ? o.n_searches : static_cast<int>(std::ceil(window / I)) + 30;
  std::vector<double> times(n_searches);
  for (int i = 0; i < n_searches; ++i) times[i] = I * (i + 1);

  acme::SimulationOptions sopts;
  sopts.pfm_cadence = o.pfm_cadence;
  acme::SimulatedIdt sim =
      acme::simulate_idt(p, o.n_carcasses, window, times, o.seed, sopts);

  const std::string cpath = o.carcasses_path.empty() ? "carcasses.csv" : o.carcasses_path;
  const std::string spath = o.searches_path.empty() ? "searches.csv" : o.searches_path;
  {
    std::ofstream out(cpath);
    if (!out) throw CliError(4, "cannot open " + cpath);
    acme::write_carcasses_csv(sim.data, out);
  }
  {
    std::ofstream out(spath);
    if (!out) throw CliError(4, "cannot open " + spath);
    acme::write_searches_csv(sim.data, out);
  }

  long discovered = 0, first = 0;
  for (char c : sim.ever_discovered) discovered += c;
  for (char c : sim.first_search_discovered) first += c;
  acme::ReductionResult rr = compute_reduction(o, p);

  json j;
  j["schema_version"] = schema_version;
  j["config"] = config_json(o);
  j["carcasses_written"] = cpath;
  j["searches_written"] = spath;
  j["n_carcasses"] = o.n_carcasses;
  j["discovered_fraction"] = static_cast<double>(discovered) / o.n_carcasses;
  j["predicted_r_star"] = rr.r_star;
  j["first_search_discovered_fraction"] = static_cast<double>(first) / o.n_carcasses;
  j["predicted_t_star_0"] = rr.t_star_0;
  write_output(o, j.dump(2));
  return 0;
}

int cmd_fit_removal(const Options& o) {
  acme::IdtDataset ds = load_dataset(o, false);
  acme::FitResult weibull = acme::fit_removal(ds);
  if (!weibull.converged) {
    std::ostringstream msg;
    msg << "removal fit failed";
    for (const auto& w : weibull.warnings) msg << "; " << w;
    throw CliError(3, msg.str());
  }
  acme::FitResult expo = acme::fit_removal_fixed_shape(ds, 1.0);

  json j;
  j["schema_version"] = schema_version;
  j["config"] = config_json(o);
  json body = fit_json(weibull);
  body["mean_persistence_days"] =
      acme::mean_persistence({weibull.estimate("alpha"), weibull.estimate("rho")});
  j.update(body);
  json ej = fit_json(expo);
  ej["mean_persistence_days"] = 1.0 / expo.estimate("rho");
  j["exponential_fit"] = ej;
  write_output(o, j.dump(2));
  return 0;
}

int cmd_fit_discovery(const Options& o) {
  acme::IdtDataset ds = load_dataset(o, true);
  json j;
  j["schema_version"] = schema_version;
  j["config"] = config_json(o);

  acme::FitResult constant = acme::fit_discovery_constant(ds);
  if (o.constant_only) {
    if (!constant.converged) throw CliError(3, "constant-proficiency fit failed");
    j.update(fit_json(constant));
    write_output(o, j.dump(2));
    return 0;
  }

  acme::FitResult full = acme::fit_discovery(ds);
  if (!full.converged) throw CliError(3, "discovery fit failed");
  j.update(fit_json(full));
  if (constant.converged) {
    acme::DevianceReport dev = acme::deviance_vs_constant(full, constant);
    json dj;
    dj["deviance"] = dev.deviance;
    dj["dof"] = dev.dof;
    dj["p_value"] = dev.p_value;
    dj["constant_fit"] = fit_json(constant);
    j["deviance_vs_constant"] = dj;
  }
  write_output(o, j.dump(2));
  return 0;
}

int cmd_reduction(const Options& o) {
  std::vector<double> intervals = o.intervals;
  std::sort(intervals.begin(), intervals.end());

  json rows = json::array();
  std::ostringstream csv;
  csv << "interval,r_star,t_star_0,multiplier,n_terms,truncation_bound,converged\n";
  for (double I : intervals) {
    acme::AcmeParams p = params_from(o, I);
    acme::ReductionResult rr;
    try {
      rr = compute_reduction(o, p);
    } catch (const std::exception& e) {
      throw CliError(3, std::string("reduction failed at interval ") + std::to_string(I) +
                            ": " + e.what());
    }
    json row;
    row["interval"] = I;
    row["r_star"] = rr.r_star;
    row["t_star_0"] = rr.t_star_0;
    row["multiplier"] = 1.0 / rr.r_star;
    row["terms"] = rr.terms;
    row["n_terms"] = rr.n_terms;
    row["truncation_bound"] = rr.truncation_bound;
    row["converged"] = rr.converged;
    rows.push_back(row);
    csv << I << ',' << rr.r_star << ',' << rr.t_star_0 << ',' << 1.0 / rr.r_star << ','
        << rr.n_terms << ',' << rr.truncation_bound << ',' << (rr.converged ? 1 : 0) << '\n';
  }

  if (o.format == "csv") {
    write_output(o, csv.str());
    return 0;
  }
  json j;
  j["schema_version"] = schema_version;
  j["config"] = config_json(o);
  j["results"] = rows;
  write_output(o, j.dump(2));
  return 0;
}

int cmd_estimate(const Options& o) {
  if (o.counts.empty()) throw CliError(2, "--counts is required for estimate");
  for (long long c : o.counts)
    if (c < 0) throw CliError(2, "counts must be >= 0");
  const double I = o.intervals.front();
  acme::AcmeParams p = params_from(o, I);

  acme::ReductionResult rr;
  try {
    rr = compute_reduction(o, p);
  } catch (const std::exception& e) {
    throw CliError(3, std::string("reduction failed: ") + e.what());
  }

  acme::PriorSpec prior = acme::PriorSpec::objective();
  json prior_j;
  prior_j["kind"] = "objective";
  if (o.prior == "empirical") {
    try {
      acme::EmpiricalBayesFit eb =
          acme::empirical_bayes_fit(o.counts, rr, I);
      prior = eb.prior;
      prior_j["kind"] = eb.fell_back ? "objective" : "empirical";
      prior_j["fell_back"] = eb.fell_back;
      if (!eb.warnings.empty()) prior_j["warnings"] = eb.warnings;
    } catch (const std::domain_error& e) {
      throw CliError(2, std::string("empirical prior: ") + e.what());
    }
  }
  prior_j["xi"] = prior.xi;
  prior_j["lambda"] = prior.lambda;

  const bool no_bleed = (p.bleed == 0.0) || (rr.r_star - rr.t_star_0 < 1e-12);

  std::ostringstream csv;
  csv << "count,m,probability\n";
  json periods = json::array();
  for (long long C : o.counts) {
    json pj;
    pj["count"] = C;
    pj["point_estimate"] = acme::point_estimate(static_cast<double>(C), rr);

    json mm;
    for (double g : o.gammas) {
      json gj;
      gj["one_sided"] = interval_json(
          acme::mean_mortality_interval(C, rr, I, prior, g, acme::IntervalKind::one_sided));
      gj["symmetric"] = interval_json(
          acme::mean_mortality_interval(C, rr, I, prior, g, acme::IntervalKind::symmetric));
      mm[std::to_string(g)] = gj;
    }
    pj["mean_mortality_intervals"] = mm;

    acme::MortalityPosterior post = acme::mortality_posterior_pmf(C, rr, I, prior);
    pj["posterior_mean"] = post.mean;
    json mi;
    for (double g : o.gammas) {
      json gj;
      gj["one_sided"] =
          interval_json(acme::mortality_interval(post, g, acme::IntervalKind::one_sided));
      gj["symmetric"] =
          interval_json(acme::mortality_interval(post, g, acme::IntervalKind::symmetric));
      gj["hpd"] = interval_json(acme::mortality_interval(post, g, acme::IntervalKind::hpd));
      if (no_bleed) {
        gj["classical"] = interval_json(acme::classical_binomial_interval(C, rr, g));
        gj["uniform_prior"] = interval_json(acme::uniform_prior_interval(C, rr, g));
      }
      mi[std::to_string(g)] = gj;
    }
    pj["mortality_intervals"] = mi;

    json pmf = json::array();
    for (std::size_t m = 0; m < post.pmf.size(); ++m) {
      pmf.push_back(post.pmf[m]);
      csv << C << ',' << m << ',' << post.pmf[m] << '\n';
    }
    pj["pmf"] = pmf;

    if (o.legacy.size() == 2) {
      acme::ConstantCaseParams cc{o.legacy[0], o.legacy[1], I};
      acme::LegacyEstimates le = acme::compare_all(static_cast<double>(C), cc);
      json lj;
      lj["erickson"] = le.erickson;
      lj["shoemaker"] = le.shoemaker;
      lj["pollock"] = le.pollock;
      lj["huso"] = le.huso;
      pj["legacy"] = lj;
    }
    periods.push_back(pj);
  }

  long long total = 0;
  for (long long c : o.counts) total += c;
  json pooled;
  pooled["count"] = total;
  pooled["intervals_pooled"] = o.counts.size();
  pooled["point_estimate"] = acme::point_estimate(static_cast<double>(total), rr) /
                             static_cast<double>(o.counts.size());
  const double I_pooled = I * static_cast<double>(o.counts.size());
  json pm;
  for (double g : o.gammas) {
    json gj;
    gj["one_sided"] = interval_json(acme::mean_mortality_interval(
        total, rr, I_pooled, prior, g, acme::IntervalKind::one_sided));
    gj["symmetric"] = interval_json(acme::mean_mortality_interval(
        total, rr, I_pooled, prior, g, acme::IntervalKind::symmetric));
    pm[std::to_string(g)] = gj;
  }
  pooled["mean_mortality_intervals"] = pm;

  if (o.format == "csv") {
    write_output(o, csv.str());
    return 0;
  }

  json j;
  j["schema_version"] = schema_version;
  j["config"] = config_json(o);
  j["prior"] = prior_j;
  j["r_star"] = rr.r_star;
  j["t_star_0"] = rr.t_star_0;
  j["assumptions"] = json::array(
      {"mean daily mortality treated as constant over the periods contributing carcasses"});
  j["periods"] = periods;
  j["pooled"] = pooled;
  write_output(o, j.dump(2));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"carcass persistence / detection mortality estimator"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--carcasses", o.carcasses_path, "carcass CSV path");
    sub->add_option("--searches", o.searches_path, "search CSV path");
    sub->add_option("--interval", o.intervals, "search interval(s), days")->delimiter(',');
    sub->add_option("--alpha", o.alpha, "removal shape");
    sub->add_option("--rho", o.rho, "removal rate, 1/day");
    sub->add_option("--a", o.a, "proficiency intercept");
    sub->add_option("--b", o.b, "proficiency decay, 1/day");
    sub->add_option("--bleed", o.bleed, "bleed-through probability");
    sub->add_option("--prior", o.prior, "objective|empirical")
        ->check(CLI::IsMember({"objective", "empirical"}));
    sub->add_option("--gamma", o.gammas, "coverage levels")->delimiter(',');
    sub->add_option("--tol", o.tol, "reduction target relative error");
    sub->add_option("--terms", o.terms,
                    "fixed number of series terms (0 = stop on the tail bound)");
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--out", o.out_path, "output path (default stdout)");
    sub->add_option("--format", o.format, "json|csv")
        ->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--legacy", o.legacy, "s,t_hat for the constant-case comparison")
        ->delimiter(',');
    sub->add_option("--from-fit", o.from_fit, "fit report JSON(s) supplying parameters");
  };

  CLI::App* sim = app.add_subcommand("simulate", "generate a synthetic detection trial");
  add_common(sim);
  sim->add_option("--n", o.n_carcasses, "number of carcasses");
  sim->add_option("--window", o.window, "placement window, days");
  sim->add_option("--n-searches", o.n_searches, "number of scheduled searches");
  sim->add_option("--pfm-cadence", o.pfm_cadence, "presence check cadence, days");

  CLI::App* fr = app.add_subcommand("fit-removal", "fit the removal distribution");
  add_common(fr);

  CLI::App* fd = app.add_subcommand("fit-discovery", "fit the discovery model");
  add_common(fd);
  fd->add_flag("--constant", o.constant_only, "fit only the constant-proficiency submodel");

  CLI::App* red = app.add_subcommand("reduction", "compute reduction factors");
  add_common(red);

  CLI::App* est = app.add_subcommand("estimate", "point and interval mortality estimates");
  add_common(est);
  est->add_option("--counts", o.counts, "observed carcass counts per period")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) { o.command = "simulate"; return cmd_simulate(o); }
    if (fr->parsed()) { o.command = "fit-removal"; return cmd_fit_removal(o); }
    if (fd->parsed()) { o.command = "fit-discovery"; return cmd_fit_discovery(o); }
    if (red->parsed()) { o.command = "reduction"; return cmd_reduction(o); }
    if (est->parsed()) { o.command = "estimate"; return cmd_estimate(o); }
  } catch (const CliError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
