#include "fjlat/experiments.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "fjlat/lowtraffic.hpp"

#include "catch2/catch_amalgamated.hpp"

using namespace fjlat;
using Catch::Approx;

namespace {

std::vector<std::vector<std::string>> parse_body(const std::string& csv) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    rows.push_back(split_csv_line(line));
  }
  return rows;
}

int column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

}  // namespace

TEST_CASE("table1 values and mismatch flag") {
  std::string csv = run_table1();
  auto rows = parse_body(csv);
  REQUIRE(rows.size() == 5);  // header + 4 codes
  int et = column(rows[0], "et_mu");
  int norm = column(rows[0], "et_mu_norm");
  int flag = column(rows[0], "et_mu_flag");
  REQUIRE(et >= 0);
  REQUIRE(norm >= 0);
  REQUIRE(flag >= 0);

  CHECK(std::stod(rows[1][et]) == Approx(0.3333).margin(5e-5));
  CHECK(std::stod(rows[2][et]) == Approx(0.6667).margin(5e-5));
  CHECK(std::stod(rows[4][et]) == Approx(0.4571).margin(5e-5));
  CHECK(std::stod(rows[1][norm]) == Approx(0.667).margin(5e-3));
  CHECK(std::stod(rows[2][norm]) == Approx(0.667).margin(5e-3));
  CHECK(std::stod(rows[3][norm]) == Approx(0.833).margin(5e-3));
  CHECK(std::stod(rows[4][norm]) == Approx(0.711).margin(5e-3));

  CHECK(rows[1][flag] == "ok");
  CHECK(rows[2][flag] == "ok");
  CHECK(rows[3][flag] == "mismatch");  // 0.75 vs the printed 0.6
  CHECK(rows[4][flag] == "ok");

  // comments carry the resolved configuration
  CHECK(csv.find("# experiment table1") != std::string::npos);
  CHECK(csv.find("# mu 1") != std::string::npos);
}

TEST_CASE("lowtraffic sweep is monotone") {
  std::string csv = run_lowtraffic_sweep({2}, {0, 1, 2, 3, 4, 5, 6});
  auto rows = parse_body(csv);
  int et = column(rows[0], "et_mu");
  double prev = 1e9;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    double v = std::stod(rows[i][et]);
    CHECK(v < prev);
    prev = v;
  }
  // relative drop column equals 1/(r(t+1)+1)
  int gain = column(rows[0], "rel_gain_next_t");
  CHECK(std::stod(rows[1][gain]) == Approx(1.0 / 3.0));
  std::string csv_r = run_lowtraffic_sweep({1, 2, 3, 4, 5, 6}, {3});
  auto rows_r = parse_body(csv_r);
  prev = 0.0;
  for (std::size_t i = 1; i < rows_r.size(); ++i) {
    double v = std::stod(rows_r[i][et]);
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("CSV reruns are byte-identical") {
  RunStatus s1, s2;
  SimSettings sim{20000, 3, 5, 0.2};
  std::string a = run_fjfa_bounds(2, 1, 1.0, {}, sim, s1);
  std::string b = run_fjfa_bounds(2, 1, 1.0, {}, sim, s2);
  CHECK(a == b);
  CHECK(a.find("# seed 5") != std::string::npos);
}

TEST_CASE("qbd-ub sweep columns") {
  RunStatus status;
  std::string csv = run_qbd_ub(1.0, 1.0, {}, status);
  auto rows = parse_body(csv);
  int ma = column(rows[0], "ub_ma");
  int sm = column(rows[0], "ub_sm");
  int fsm = column(rows[0], "lb_fsm");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i][sm].empty()) continue;
    double vma = std::stod(rows[i][ma]);
    CHECK(vma < std::stod(rows[i][sm]));
    CHECK(vma > std::stod(rows[i][fsm]));
  }
}

TEST_CASE("bounds sweep flags instability instead of failing") {
  RunStatus status;
  // the grid deliberately crosses the SM stability limit
  std::string csv = run_bounds_sweep(2, 1, 1.0, 1, {0.5, 1.0, 1.49, 1.55}, status);
  auto rows = parse_body(csv);
  REQUIRE(rows.size() == 5);
  CHECK(status.any_instability);
  CHECK(rows[4][column(rows[0], "ub_sm")].empty());
  CHECK_FALSE(rows[2][column(rows[0], "ub_sm")].empty());
  // sandwich in the stable rows: lb_mixture <= ub_sm
  for (std::size_t i = 1; i <= 3; ++i) {
    double lb = std::stod(rows[i][column(rows[0], "lb_mixture")]);
    double ub = std::stod(rows[i][column(rows[0], "ub_sm")]);
    CHECK(lb <= ub);
  }
}

TEST_CASE("compare-codes cells match the closed forms at vanishing load") {
  RunStatus status;
  SimSettings sim{20000, 3, 11, 0.2};
  std::string csv = run_code_comparison({0.05}, sim, status);
  auto rows = parse_body(csv);
  int scheme = column(rows[0], "scheme");
  int profile = column(rows[0], "profile");
  int mean = column(rows[0], "mean_t");
  // per-server rate is 10/n; expected low-traffic time per scheme
  std::map<std::string, double> expected{
      {"(18,6)-replication", et_replication(3, 10.0 / 18.0)},
      {"(14,6,2,3)-availability", et_availability(2, 3, 10.0 / 14.0)},
      {"(10,6,3,1)-LRC", et_availability(3, 1, 10.0 / 10.0)},
      {"(9,6)-MDS", et_mds(9, 6, 10.0 / 9.0)},
  };
  int checked = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i][profile] != "uniform") continue;
    double m = std::stod(rows[i][mean]);
    CHECK(m == Approx(expected.at(rows[i][scheme])).epsilon(0.05));
    ++checked;
  }
  CHECK(checked == 4);
}

TEST_CASE("svg rendering") {
  std::vector<PlotSeries> series{{"a", {{0.0, 1.0}, {1.0, 2.0}}},
                                 {"b", {{0.0, 2.0}, {1.0, 0.5}}}};
  std::string svg = render_svg("demo", series);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
  CHECK(svg.find("demo") != std::string::npos);

  std::string csv = run_table1();
  auto extracted = csv_to_series(csv, "et_mu", {"et_mu_norm"});
  REQUIRE(extracted.size() == 1);
  CHECK(extracted[0].points.size() == 4);
}

TEST_CASE("layout file feeds the bounds runner") {
  auto path = std::filesystem::temp_directory_path() / "fjlat_test_layout.txt";
  write_layout_file(single_object_layout(2, 1), path.string());
  auto layout = read_layout_file(path.string());
  RunStatus status;
  SimSettings sim{15000, 2, 3, 0.2};
  std::string csv = run_fjfa_bounds(2, 1, 1.0, {0.5}, sim, status, layout);
  auto rows = parse_body(csv);
  REQUIRE(rows.size() == 2);
  CHECK_FALSE(rows[1][column(rows[0], "sim_mean")].empty());
  std::filesystem::remove(path);
}
