#pragma once

// Experiment runners behind the CLI: each produces a CSV whose comment header
// carries the fully resolved configuration (including the seed and the actual
// lambda grid), so a run can be re-created from its own output. Instability in
// a cell is flagged in-row and surfaces as a nonzero status, never an abort of
// the whole sweep.

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fjlat/bounds.hpp"
#include "fjlat/codes.hpp"
#include "fjlat/dist.hpp"
#include "fjlat/errors.hpp"
#include "fjlat/lowtraffic.hpp"
#include "fjlat/qbd.hpp"
#include "fjlat/sim.hpp"

namespace fjlat {

inline std::string fmt_num(double v, const char* spec = "%.10g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

class Csv {
 public:
  void comment(const std::string& key, const std::string& value) {
    out_ << "# " << key << " " << value << "\n";
  }
  void comment(const std::string& key, double value) {
    comment(key, fmt_num(value));
  }
  void comment_list(const std::string& key, const std::vector<double>& xs) {
    std::string joined;
    for (std::size_t i = 0; i < xs.size(); ++i)
      joined += (i ? "," : "") + fmt_num(xs[i]);
    comment(key, joined);
  }
  void header(const std::vector<std::string>& cols) { row(cols); }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ",";
      if (cells[i].find_first_of(",\"") == std::string::npos) {
        out_ << cells[i];
      } else {
        out_ << '"';
        for (char c : cells[i]) {
          if (c == '"') out_ << '"';
          out_ << c;
        }
        out_ << '"';
      }
    }
    out_ << "\n";
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

// Splits one CSV line, honoring double-quoted fields and trailing empties.
inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

struct SimSettings {
  std::int64_t arrivals = 200000;
  int reps = 5;
  std::uint64_t seed = 1;
  double warmup = 0.2;
};

struct RunStatus {
  bool any_instability = false;
};

inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> xs;
  if (n == 1) return {lo};
  for (int i = 0; i < n; ++i)
    xs.push_back(lo + (hi - lo) * i / (n - 1));
  return xs;
}

// --- table1 --------------------------------------------------------------

struct Table1Paper {
  double et_mu;
  double et_mu_norm;
};

// Per-request trace with the record fields in request order.
inline std::string trace_csv(const SimResult& result) {
  Csv csv;
  csv.comment("rows", static_cast<double>(result.trace.size()));
  csv.header({"arrival", "object", "hol_epoch", "departure", "type", "winner"});
  for (const auto& rec : result.trace)
    csv.row({fmt_num(rec.arrival), std::to_string(rec.object),
             fmt_num(rec.hol_epoch), fmt_num(rec.departure),
             std::to_string(rec.type_index), std::to_string(rec.winner)});
  return csv.str();
}

inline std::string run_table1(double mu = 1.0,
                              double baseline_cumulative_rate = 9.0) {
  auto rows = comparison_table(mu, baseline_cumulative_rate);
  // Values as printed in the source table (raw, normalized).
  const std::map<std::string, Table1Paper> paper = {
      {"3-replication", {0.33, 0.67}},
      {"(9,6)-MDS", {0.67, 0.67}},
      {"(10,6,3,1)-LRC", {0.6, 0.83}},
      {"(14,6,2,3)-LRC", {0.45, 0.71}},
  };
  Csv csv;
  csv.comment("experiment", "table1");
  csv.comment("mu", mu);
  csv.comment("baseline_cumulative_rate", baseline_cumulative_rate);
  csv.comment("seed", "n/a (closed form)");
  csv.header({"label", "et_mu", "et_mu_norm", "overhead", "fault_tolerance",
              "paper_et_mu", "paper_et_mu_norm", "et_mu_flag"});
  for (const auto& r : rows) {
    const auto& pv = paper.at(r.label);
    // The table prints two decimals; the (10,6,3,1) row's 0.6 is not
    // reproduced by either closed form and is flagged.
    bool match = std::abs(r.et_mu_raw - pv.et_mu) <= 0.01;
    csv.row({r.label, fmt_num(r.et_mu_raw), fmt_num(r.et_mu_normalized),
             fmt_num(r.storage_overhead), std::to_string(r.fault_tolerance),
             fmt_num(pv.et_mu), fmt_num(pv.et_mu_norm),
             match ? "ok" : "mismatch"});
  }
  return csv.str();
}

// --- lowtraffic ----------------------------------------------------------

inline std::string run_lowtraffic_sweep(const std::vector<int>& r_list,
                                        const std::vector<int>& t_list,
                                        double mu = 1.0) {
  Csv csv;
  csv.comment("experiment", "lowtraffic");
  csv.comment("mu", mu);
  csv.comment("seed", "n/a (closed form)");
  csv.header({"r", "t", "et_mu", "rel_gain_next_t"});
  for (int r : r_list)
    for (int t : t_list)
      csv.row({std::to_string(r), std::to_string(t),
               fmt_num(et_availability(r, t, mu) * mu),
               fmt_num(relative_gain_per_t(r, t))});
  return csv.str();
}

// --- compare-codes -------------------------------------------------------

struct ComparisonScheme {
  std::string label;
  StorageLayout layout;
  std::optional<int> mds_k;
};

inline std::vector<ComparisonScheme> comparison_schemes() {
  std::vector<ComparisonScheme> out;
  out.push_back({"(18,6)-replication", replication_layout(6, 3), std::nullopt});
  out.push_back({"(14,6,2,3)-availability",
                 direct_sum(simplex_layout(3), simplex_layout(3)), std::nullopt});
  out.push_back({"(10,6,3,1)-LRC", azure_lrc_layout(), std::nullopt});
  out.push_back({"(9,6)-MDS", mds_layout(9, 6), 6});
  return out;
}

// All four systems store six objects and split a cumulative service rate of 10
// evenly across their servers.
inline std::string run_code_comparison(std::vector<double> lambdas,
                                       const SimSettings& sim,
                                       RunStatus& status,
                                       double cumulative_rate = 10.0) {
  if (lambdas.empty()) lambdas = linspace(0.2, 2.0, 10);
  auto schemes = comparison_schemes();
  Csv csv;
  csv.comment("experiment", "compare-codes");
  csv.comment("cumulative_rate", cumulative_rate);
  csv.comment_list("lambdas", lambdas);
  csv.comment("arrivals", static_cast<double>(sim.arrivals));
  csv.comment("reps", static_cast<double>(sim.reps));
  csv.comment("warmup_fraction", sim.warmup);
  csv.comment("seed", static_cast<double>(sim.seed));
  csv.header({"lambda", "scheme", "profile", "mean_t", "half_width", "stable"});
  for (double lambda : lambdas) {
    for (const auto& scheme : schemes) {
      for (const char* profile : {"uniform", "skewed"}) {
        SimConfig cfg;
        cfg.mode = SimMode::GA;
        cfg.layout = scheme.layout;
        cfg.mds_k = scheme.mds_k;
        cfg.popularity = std::string(profile) == "uniform"
                             ? uniform_popularity(scheme.layout.params.k)
                             : skewed_popularity(scheme.layout.params.k);
        cfg.lambda = lambda;
        cfg.mu = cumulative_rate / scheme.layout.params.n;
        cfg.n_arrivals = sim.arrivals;
        cfg.warmup_fraction = sim.warmup;
        cfg.seed = sim.seed;
        auto rep = replicate(cfg, sim.reps);
        bool stable = !rep.aggregate.aborted;
        if (!stable) status.any_instability = true;
        csv.row({fmt_num(lambda), scheme.label, profile,
                 stable ? fmt_num(rep.aggregate.mean_t) : "",
                 stable ? fmt_num(rep.aggregate.mean_half_width) : "",
                 stable ? "1" : "0"});
      }
    }
  }
  return csv.str();
}

// --- fjfa-bounds ---------------------------------------------------------

inline std::vector<double> default_bounds_lambdas(int r, int t, double mu) {
  double sm_limit = 1.0 / et_availability(r, t, mu);
  std::vector<double> lambdas;
  for (double load : linspace(0.15, 0.90, 10)) lambdas.push_back(load * sm_limit);
  return lambdas;
}

inline std::string run_fjfa_bounds(int r, int t, double mu,
                                   std::vector<double> lambdas,
                                   const SimSettings& sim, RunStatus& status,
                                   const std::optional<StorageLayout>& layout_override =
                                       std::nullopt,
                                   std::string* trace_out = nullptr) {
  if (lambdas.empty()) lambdas = default_bounds_lambdas(r, t, mu);
  StorageLayout layout =
      layout_override ? *layout_override : single_object_layout(r, t);
  if (layout.params.r != r || layout.params.t != t)
    throw invalid_parameter_error("fjfa-bounds: layout (r,t) mismatch");
  bool r2t1 = (r == 2 && t == 1);
  Csv csv;
  csv.comment("experiment", "fjfa-bounds");
  csv.comment("r", static_cast<double>(r));
  csv.comment("t", static_cast<double>(t));
  csv.comment("mu", mu);
  csv.comment("layout", layout.name);
  csv.comment_list("lambdas", lambdas);
  csv.comment("arrivals", static_cast<double>(sim.arrivals));
  csv.comment("reps", static_cast<double>(sim.reps));
  csv.comment("warmup_fraction", sim.warmup);
  csv.comment("seed", static_cast<double>(sim.seed));
  csv.header({"lambda", "sim_mean", "sim_hw", "lb_fsm", "ub_sm", "approx_r2",
              "ub_ma", "ht_approx", "stable"});
  bool first_cell = true;
  for (double lambda : lambdas) {
    SimConfig cfg;
    cfg.mode = SimMode::FA;
    cfg.layout = layout;
    cfg.lambda = lambda;
    cfg.mu = mu;
    cfg.n_arrivals = sim.arrivals;
    cfg.warmup_fraction = sim.warmup;
    cfg.seed = sim.seed;
    if (trace_out && first_cell) {
      SimConfig traced = cfg;
      traced.record_trace = true;
      *trace_out = trace_csv(simulate(traced));
      first_cell = false;
    }
    auto rep = replicate(cfg, sim.reps);
    bool stable = !rep.aggregate.aborted;

    auto tryv = [&](auto&& f) -> std::string {
      try {
        return fmt_num(f());
      } catch (const instability_error&) {
        status.any_instability = true;
        return "";
      } catch (const approximation_domain_error&) {
        return "";
      }
    };
    if (!stable) status.any_instability = true;
    csv.row({fmt_num(lambda), stable ? fmt_num(rep.aggregate.mean_t) : "",
             stable ? fmt_num(rep.aggregate.mean_half_width) : "",
             tryv([&] { return fsm_mean_lower(lambda, t, mu); }),
             tryv([&] { return sm_mean_upper(lambda, r, t, mu); }),
             r == 2 ? tryv([&] { return approx_r2_mean(lambda, t, mu); }) : "",
             r2t1 ? tryv([&] { return ma_mean_ub(lambda, mu, mu, mu); }) : "",
             r2t1 ? tryv([&] {
               return pk_mean({lambda, r2t1_service_moment_lb(mu, mu)});
             })
                  : "",
             stable ? "1" : "0"});
  }
  return csv.str();
}

// --- service-freqs -------------------------------------------------------

inline std::string run_service_freqs(int t, double gamma, double mu,
                                     std::vector<double> lambdas,
                                     const SimSettings& sim, RunStatus& status) {
  StorageLayout layout = single_object_layout(2, t);
  std::vector<double> rates(layout.params.n, mu);
  rates[0] = gamma;
  double capacity =
      (t == 1) ? fjfa_r2t1_stability_limit({gamma, mu, mu})
               : saturation_throughput(layout, mu, rates, 100000, sim.seed);
  if (lambdas.empty())
    for (double load : linspace(0.3, 0.9, 7)) lambdas.push_back(load * capacity);

  bool r2t1 = (t == 1);
  HighTrafficFractions ht{};
  if (r2t1) ht = hightraffic_fractions({gamma, mu, mu});

  Csv csv;
  csv.comment("experiment", "service-freqs");
  csv.comment("t", static_cast<double>(t));
  csv.comment("gamma", gamma);
  csv.comment("mu", mu);
  csv.comment("capacity_estimate", capacity);
  csv.comment_list("lambdas", lambdas);
  csv.comment("arrivals", static_cast<double>(sim.arrivals));
  csv.comment("reps", static_cast<double>(sim.reps));
  csv.comment("warmup_fraction", sim.warmup);
  csv.comment("seed", static_cast<double>(sim.seed));
  std::vector<std::string> cols{"lambda"};
  for (int i = 0; i <= t; ++i) cols.push_back("f" + std::to_string(i));
  cols.insert(cols.end(), {"ws", "wr", "f0_bound", "ws_bound", "stable"});
  csv.header(cols);
  for (double lambda : lambdas) {
    SimConfig cfg;
    cfg.mode = SimMode::FA;
    cfg.layout = layout;
    cfg.lambda = lambda;
    cfg.server_rates = rates;
    cfg.n_arrivals = sim.arrivals;
    cfg.warmup_fraction = sim.warmup;
    cfg.seed = sim.seed;
    auto rep = replicate(cfg, sim.reps);
    bool stable = !rep.aggregate.aborted;
    if (!stable) status.any_instability = true;
    std::vector<std::string> cells{fmt_num(lambda)};
    for (int i = 0; i <= t; ++i)
      cells.push_back(stable ? fmt_num(rep.aggregate.type_freqs.f[i]) : "");
    cells.push_back(stable ? fmt_num(rep.aggregate.ws) : "");
    cells.push_back(stable ? fmt_num(rep.aggregate.wr) : "");
    cells.push_back(r2t1 ? fmt_num(ht.f0_hat) : "");
    cells.push_back(r2t1 ? fmt_num(ht.ws_hat) : "");
    cells.push_back(stable ? "1" : "0");
    csv.row(cells);
  }
  return csv.str();
}

// --- qbd-ub --------------------------------------------------------------

inline std::string run_qbd_ub(double gamma, double mu,
                              std::vector<double> lambdas, RunStatus& status) {
  double sm_limit = 1.0 / et_availability(2, 1, mu);
  if (lambdas.empty())
    for (double load : linspace(0.1, 0.95, 10)) lambdas.push_back(load * sm_limit);
  Csv csv;
  csv.comment("experiment", "qbd-ub");
  csv.comment("gamma", gamma);
  csv.comment("mu", mu);
  csv.comment_list("lambdas", lambdas);
  csv.comment("seed", "n/a (closed form)");
  csv.header({"lambda", "ub_ma", "ub_sm", "lb_fsm"});
  for (double lambda : lambdas) {
    auto tryv = [&](auto&& f) -> std::string {
      try {
        return fmt_num(f());
      } catch (const instability_error&) {
        status.any_instability = true;
        return "";
      }
    };
    csv.row({fmt_num(lambda),
             tryv([&] { return ma_mean_ub(lambda, gamma, mu, mu); }),
             tryv([&] { return sm_mean_upper(lambda, 2, 1, mu); }),
             tryv([&] { return fsm_mean_lower(lambda, 1, mu); })});
  }
  return csv.str();
}

// --- bounds / approx (analytic sweep) ------------------------------------

inline std::string run_bounds_sweep(int r, int t, double mu, int k,
                                    std::vector<double> lambdas,
                                    RunStatus& status) {
  if (lambdas.empty()) lambdas = default_bounds_lambdas(r, t, mu);
  PopularityVector p = uniform_popularity(k);
  Csv csv;
  csv.comment("experiment", "bounds");
  csv.comment("r", static_cast<double>(r));
  csv.comment("t", static_cast<double>(t));
  csv.comment("mu", mu);
  csv.comment("k", static_cast<double>(k));
  csv.comment_list("lambdas", lambdas);
  csv.comment("seed", "n/a (closed form)");
  csv.header({"lambda", "lb_fsm", "lb_mixture", "approx", "ub_sm"});
  for (double lambda : lambdas) {
    auto tryv = [&](auto&& f) -> std::string {
      try {
        return fmt_num(f());
      } catch (const instability_error&) {
        status.any_instability = true;
        return "";
      } catch (const approximation_domain_error&) {
        return "";
      }
    };
    csv.row({fmt_num(lambda),
             tryv([&] { return fsm_mean_lower(lambda, t, mu); }),
             tryv([&] { return fjga_mean_lower(lambda, p, t, mu); }),
             r == 2 ? tryv([&] { return approx_r2_mean(lambda, t, mu); }) : "",
             tryv([&] { return sm_mean_upper(lambda, r, t, mu); })});
  }
  return csv.str();
}

// --- SVG plot ------------------------------------------------------------

struct PlotSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

// Standalone SVG line plot; no display dependency.
inline std::string render_svg(const std::string& title,
                              const std::vector<PlotSeries>& series) {
  const int width = 640, height = 420, margin = 56;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series)
    for (auto [x, y] : s.points) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  if (xmin > xmax) {
    xmin = 0;
    xmax = 1;
    ymin = 0;
    ymax = 1;
  }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  auto px = [&](double x) {
    return margin + (x - xmin) / (xmax - xmin) * (width - 2 * margin);
  };
  auto py = [&](double y) {
    return height - margin - (y - ymin) / (ymax - ymin) * (height - 2 * margin);
  };
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c",
                                  "#9467bd", "#ff7f0e", "#8c564b"};
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
         "font-size=\"14\">" << title << "</text>\n";
  svg << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\""
      << width - margin << "\" y2=\"" << height - margin
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin
      << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    double x = xmin + (xmax - xmin) * i / 4.0;
    double y = ymin + (ymax - ymin) * i / 4.0;
    svg << "<text x=\"" << px(x) << "\" y=\"" << height - margin + 16
        << "\" text-anchor=\"middle\" font-size=\"10\">" << fmt_num(x, "%.3g")
        << "</text>\n";
    svg << "<text x=\"" << margin - 6 << "\" y=\"" << py(y) + 3
        << "\" text-anchor=\"end\" font-size=\"10\">" << fmt_num(y, "%.3g")
        << "</text>\n";
  }
  int ci = 0;
  for (const auto& s : series) {
    const char* color = kColors[ci % 6];
    svg << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (auto [x, y] : s.points) svg << px(x) << "," << py(y) << " ";
    svg << "\"/>\n";
    svg << "<text x=\"" << width - margin + 4 << "\" y=\""
        << margin + 14 * ci << "\" font-size=\"10\" fill=\"" << color << "\">"
        << s.name << "</text>\n";
    ++ci;
  }
  svg << "</svg>\n";
  return svg.str();
}

// Builds plot series from CSV body columns (x column vs each named y column),
// skipping comment lines and empty cells.
inline std::vector<PlotSeries> csv_to_series(const std::string& csv,
                                             const std::string& x_col,
                                             const std::vector<std::string>& y_cols) {
  std::istringstream in(csv);
  std::string line;
  std::vector<std::string> header;
  std::vector<PlotSeries> series;
  int x_idx = -1;
  std::vector<int> y_idx;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells = split_csv_line(line);
    if (header.empty()) {
      header = cells;
      for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == x_col) x_idx = static_cast<int>(i);
        for (const auto& name : y_cols)
          if (header[i] == name) {
            y_idx.push_back(static_cast<int>(i));
            series.push_back({name, {}});
          }
      }
      continue;
    }
    if (x_idx < 0) break;
    for (std::size_t j = 0; j < y_idx.size(); ++j) {
      int yi = y_idx[j];
      if (yi >= static_cast<int>(cells.size())) continue;
      if (cells[yi].empty() || cells[x_idx].empty()) continue;
      series[j].points.push_back(
          {std::stod(cells[x_idx]), std::stod(cells[yi])});
    }
  }
  return series;
}

inline void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw invalid_parameter_error("cannot write " + path);
  out << body;
}

}  // namespace fjlat
