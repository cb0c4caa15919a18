#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "helpers.hpp"
#include "ppac/csv.hpp"
#include "ppac/svg.hpp"

using namespace ppac;

TEST_CASE("double formatting round-trips") {
  for (double v : {0.0, -0.0, 1.0, 0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 5e-324}) {
    CHECK(parse_double(format_double(v)) == v);
  }
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(std::isnan(parse_double("nan")));
  CHECK(parse_double("inf") == std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(parse_double("1.0x"), InvalidArgument);
  CHECK_THROWS_AS(parse_double(""), InvalidArgument);
}

TEST_CASE("trajectory CSV round trip is exact") {
  const Plant plant = showcase_plant();
  const auto ctrl = testing::showcase_controller(plant);
  SimConfig cfg;
  cfg.t_final = 0.5;
  const double x0[] = {1.0, -1.0};
  auto log = simulate(plant, ctrl, x0, cfg);
  std::stringstream ss;
  write_csv(log, ss);
  auto back = read_csv(ss, log.controller());
  CHECK(back == log);
  CHECK(back.order() == 2);
  CHECK(back.params() == 1);
}

TEST_CASE("malformed CSV is rejected with a line number") {
  std::istringstream bad_header("t,x1,oops\n");
  CHECK_THROWS_AS(read_csv(bad_header), InvalidArgument);
  std::ostringstream good;
  TrajectoryLog log("c", 1, 1);
  log.append(std::vector<double>(TrajectoryLog::header(1, 1).size(), 1.0));
  write_csv(log, good);
  std::istringstream short_row(good.str() + "1,2,3\n");
  try {
    read_csv(short_row);
    FAIL("expected an error");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("SVG plots") {
  Plot p;
  p.title = "x1 & bound";
  p.y_label = "x1";
  p.series.push_back({"x1", {0, 1, 2, 3}, {1, 0.5, std::nan(""), 0.1}, "#000", false});
  p.series.push_back({"bound", {0, 1, 2, 3}, {2, 1, 0.5, 0.2}, "#f00", true});
  const std::string svg = render_svg(p);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("x1 &amp; bound") != std::string::npos);
  CHECK(svg.find("stroke-dasharray") != std::string::npos);
  // the NaN splits the first series into two polylines, the second is one
  std::size_t lines = 0;
  for (auto pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1)) ++lines;
  CHECK(lines == 3);
}

TEST_CASE("nice ticks") {
  auto t = nice_ticks(0.0, 20.0);
  REQUIRE(!t.empty());
  CHECK(t.front() >= 0.0);
  CHECK(t.back() <= 20.0);
  for (std::size_t i = 1; i < t.size(); ++i) CHECK(t[i] > t[i - 1]);
  CHECK(nice_ticks(1.0, 1.0).empty());
}
