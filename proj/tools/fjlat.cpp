// Command-line front end: reproduces the comparison table, the low-traffic
// sweep, and the simulation/bound/approximation figures as CSV (optionally
// with standalone SVG plots).
//
// Exit codes: 0 success, 2 invalid configuration, 3 instability in at least
// one grid cell (results are still written).

#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fjlat/experiments.hpp"

namespace {

struct CommonOpts {
  std::uint64_t seed = 1;
  std::int64_t arrivals = 200000;
  int reps = 5;
  double warmup = 0.2;
  std::string out;
  bool plot = false;
  std::string layout_file;
  std::string lambdas_csv;
  std::string config_file;
};

std::vector<double> parse_lambdas(const std::string& csv) {
  std::vector<double> out;
  std::string token;
  std::istringstream in(csv);
  while (std::getline(in, token, ',')) {
    if (token.empty()) continue;
    out.push_back(std::stod(token));
  }
  return out;
}

// Applies `key = value` lines ('#' comments allowed) to the subcommand's
// options; values already given on the command line win.
void apply_config_file(CLI::App* cmd, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw fjlat::invalid_parameter_error("cannot open config " + path);
  std::string line;
  auto trim = [](std::string s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw fjlat::invalid_parameter_error("config line without '=': " + t);
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    auto* opt = cmd->get_option_no_throw("--" + key);
    if (!opt)
      throw fjlat::invalid_parameter_error("unknown config key '" + key +
                                           "' for subcommand " + cmd->get_name());
    if (opt->count() == 0) {
      opt->add_result(value);
      opt->run_callback();
    }
  }
}

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_sim = true) {
  cmd->add_option("--config", opts.config_file,
                  "flat key = value config file; command-line flags override it");
  cmd->add_option("--seed", opts.seed, "base RNG seed");
  if (with_sim) {
    cmd->add_option("--arrivals", opts.arrivals, "arrivals per replication");
    cmd->add_option("--reps", opts.reps, "replications per cell");
    cmd->add_option("--warmup", opts.warmup, "warmup fraction of arrivals");
  }
  cmd->add_option("--lambdas", opts.lambdas_csv,
                  "comma-separated arrival rates (default: documented grid)");
  cmd->add_option("--out", opts.out, "output CSV path (default: stdout)");
  cmd->add_flag("--plot", opts.plot, "also write an SVG plot next to --out");
}

void emit(const std::string& csv, const CommonOpts& opts,
          const std::string& x_col, const std::vector<std::string>& y_cols,
          const std::string& title) {
  if (opts.out.empty()) {
    std::fputs(csv.c_str(), stdout);
  } else {
    fjlat::write_text_file(opts.out, csv);
  }
  if (opts.plot && !opts.out.empty() && !y_cols.empty()) {
    auto series = fjlat::csv_to_series(csv, x_col, y_cols);
    fjlat::write_text_file(opts.out + ".svg", fjlat::render_svg(title, series));
  }
}

fjlat::SimSettings sim_settings(const CommonOpts& opts) {
  return {opts.arrivals, opts.reps, opts.seed, opts.warmup};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fork-join latency laboratory for availability-coded storage"};
  app.require_subcommand(1);

  CommonOpts table1_opts, low_opts, cmp_opts, fjfa_opts, freq_opts, qbd_opts,
      bounds_opts;

  auto* table1 = app.add_subcommand(
      "table1", "closed-form code comparison (CSV with published values)");
  double table1_mu = 1.0, table1_baseline = 0.0;
  table1->add_option("--mu", table1_mu, "per-server service rate");
  table1->add_option("--baseline", table1_baseline,
                     "cumulative rate for the normalized column (default 9*mu, "
                     "the nine-server MDS system's)");
  add_common(table1, table1_opts, false);

  auto* low = app.add_subcommand("lowtraffic",
                                 "expected download time vs locality/availability");
  double low_mu = 1.0;
  std::vector<int> low_r{1, 2, 3, 4, 5, 6}, low_t{0, 1, 2, 3, 4, 5, 6};
  low->add_option("--mu", low_mu, "per-server service rate");
  low->add_option("--r", low_r, "locality values");
  low->add_option("--t", low_t, "availability values");
  add_common(low, low_opts, false);

  auto* cmp = app.add_subcommand(
      "compare-codes", "simulated download time of the four comparison codes");
  double cmp_rate = 10.0;
  cmp->add_option("--cumulative-rate", cmp_rate,
                  "total service rate split evenly across servers");
  add_common(cmp, cmp_opts);

  auto* fjfa = app.add_subcommand(
      "fjfa-bounds", "fixed-arrival simulation vs bounds and approximations");
  int fjfa_r = 2, fjfa_t = 1;
  double fjfa_mu = 1.0;
  std::string fjfa_trace;
  fjfa->add_option("--r", fjfa_r, "locality");
  fjfa->add_option("--t", fjfa_t, "availability");
  fjfa->add_option("--mu", fjfa_mu, "per-server service rate");
  fjfa->add_option("--layout-file", fjfa_opts.layout_file,
                   "use this layout instead of the built-in single-object one");
  fjfa->add_option("--trace", fjfa_trace,
                   "write a per-request trace CSV of the first grid cell here");
  add_common(fjfa, fjfa_opts);

  auto* freq = app.add_subcommand(
      "service-freqs", "simulated service-type and winner fractions (r = 2)");
  int freq_t = 1;
  double freq_gamma = 1.0, freq_mu = 1.0;
  freq->add_option("--t", freq_t, "availability");
  freq->add_option("--gamma", freq_gamma, "systematic server rate");
  freq->add_option("--mu", freq_mu, "recovery server rate");
  add_common(freq, freq_opts);

  auto* qbd = app.add_subcommand(
      "qbd-ub", "matrix-analytic upper bound vs Split-Merge/Fast-Split-Merge");
  double qbd_gamma = 1.0, qbd_mu = 1.0;
  qbd->add_option("--gamma", qbd_gamma, "systematic server rate");
  qbd->add_option("--mu", qbd_mu, "recovery server rate");
  add_common(qbd, qbd_opts, false);

  auto* bounds = app.add_subcommand(
      "bounds", "analytic bound/approximation sweep over lambda");
  auto* approx = app.add_subcommand(
      "approx", "alias of 'bounds' (same columns, same schema)");
  int bounds_r = 2, bounds_t = 1, bounds_k = 1;
  double bounds_mu = 1.0;
  for (auto* cmd : {bounds, approx}) {
    cmd->add_option("--r", bounds_r, "locality");
    cmd->add_option("--t", bounds_t, "availability");
    cmd->add_option("--mu", bounds_mu, "per-server service rate");
    cmd->add_option("--k", bounds_k, "object count for the mixture lower bound");
  }
  add_common(bounds, bounds_opts, false);
  CommonOpts approx_opts;
  add_common(approx, approx_opts, false);

  CLI11_PARSE(app, argc, argv);

  fjlat::RunStatus status;
  try {
    for (auto* sub : app.get_subcommands()) {
      auto* copt = sub->get_option_no_throw("--config");
      if (copt && copt->count() > 0)
        apply_config_file(sub, copt->as<std::string>());
    }
    if (*table1) {
      if (table1_baseline <= 0.0) table1_baseline = 9.0 * table1_mu;
      emit(fjlat::run_table1(table1_mu, table1_baseline), table1_opts, "", {},
           "");
    } else if (*low) {
      emit(fjlat::run_lowtraffic_sweep(low_r, low_t, low_mu), low_opts, "t",
           {"et_mu"}, "expected download time (low traffic)");
    } else if (*cmp) {
      emit(fjlat::run_code_comparison(parse_lambdas(cmp_opts.lambdas_csv),
                                      sim_settings(cmp_opts), status, cmp_rate),
           cmp_opts, "lambda", {"mean_t"}, "code comparison");
    } else if (*fjfa) {
      std::optional<fjlat::StorageLayout> layout;
      if (!fjfa_opts.layout_file.empty()) {
        layout = fjlat::read_layout_file(fjfa_opts.layout_file);
        fjfa_r = layout->params.r;
        fjfa_t = layout->params.t;
      }
      std::string trace;
      emit(fjlat::run_fjfa_bounds(fjfa_r, fjfa_t, fjfa_mu,
                                  parse_lambdas(fjfa_opts.lambdas_csv),
                                  sim_settings(fjfa_opts), status, layout,
                                  fjfa_trace.empty() ? nullptr : &trace),
           fjfa_opts, "lambda",
           {"sim_mean", "lb_fsm", "ub_sm", "approx_r2", "ub_ma", "ht_approx"},
           "FJ-FA bounds and approximations");
      if (!fjfa_trace.empty()) fjlat::write_text_file(fjfa_trace, trace);
    } else if (*freq) {
      emit(fjlat::run_service_freqs(freq_t, freq_gamma, freq_mu,
                                    parse_lambdas(freq_opts.lambdas_csv),
                                    sim_settings(freq_opts), status),
           freq_opts, "lambda", {"f0", "ws", "f0_bound"},
           "service-type and winner fractions");
    } else if (*qbd) {
      emit(fjlat::run_qbd_ub(qbd_gamma, qbd_mu,
                             parse_lambdas(qbd_opts.lambdas_csv), status),
           qbd_opts, "lambda", {"ub_ma", "ub_sm", "lb_fsm"},
           "matrix-analytic bound");
    } else if (*bounds || *approx) {
      const CommonOpts& opts = *bounds ? bounds_opts : approx_opts;
      emit(fjlat::run_bounds_sweep(bounds_r, bounds_t, bounds_mu, bounds_k,
                                   parse_lambdas(opts.lambdas_csv), status),
           opts, "lambda", {"lb_fsm", "lb_mixture", "approx", "ub_sm"},
           "analytic bounds");
    }
  } catch (const fjlat::invalid_parameter_error& e) {
    std::fprintf(stderr, "invalid configuration: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return status.any_instability ? 3 : 0;
}
