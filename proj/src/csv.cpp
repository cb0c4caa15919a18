#include "ppac/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "ppac/errors.hpp"

namespace ppac {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

double parse_double(const std::string& text) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end || text.empty()) {
    throw InvalidArgument("'" + text + "' is not a number");
  }
  return v;
}

void write_csv(const TrajectoryLog& log, std::ostream& out) {
  const auto& cols = log.columns();
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  out << '\n';
  std::string line;
  for (std::size_t r = 0; r < log.rows(); ++r) {
    line.clear();
    const auto& row = log.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) line += ',';
      line += format_double(row[c]);
    }
    line += '\n';
    out << line;
  }
}

void write_csv(const TrajectoryLog& log, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path.string());
  write_csv(log, f);
  if (!f) throw Error("write failed for " + path.string());
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream s(line);
  while (std::getline(s, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

TrajectoryLog read_csv(std::istream& in, const std::string& controller) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("line 1: empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto cols = split(line);
  int n = 0;
  int q = 0;
  for (const auto& c : cols) {
    if (c.size() > 1 && c[0] == 'x') ++n;
    if (c.rfind("theta_hat", 0) == 0) ++q;
  }
  if (n < 1 || q < 1 || cols != TrajectoryLog::header(n, q)) {
    throw InvalidArgument("line 1: header does not match the trajectory log layout");
  }
  TrajectoryLog log(controller, n, q);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != cols.size()) {
      throw InvalidArgument("line " + std::to_string(lineno) + ": expected " + std::to_string(cols.size()) +
                            " fields, found " + std::to_string(cells.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) {
      try {
        row.push_back(parse_double(c));
      } catch (const InvalidArgument& e) {
        throw InvalidArgument("line " + std::to_string(lineno) + ": " + e.what());
      }
    }
    log.append(std::move(row));
  }
  return log;
}

TrajectoryLog read_csv(const std::filesystem::path& path, const std::string& controller) {
  std::ifstream f(path);
  if (!f) throw InvalidArgument("cannot open " + path.string());
  return read_csv(f, controller);
}

}  // namespace ppac
