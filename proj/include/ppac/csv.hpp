#pragma once

// Trajectory logs as CSV: one header line with the column names of
// TrajectoryLog::header(n, q), then one line per sample. Numbers use the
// shortest representation that parses back to the same double.

#include <filesystem>
#include <iosfwd>
#include <string>

#include "ppac/sim.hpp"

namespace ppac {

void write_csv(const TrajectoryLog& log, std::ostream& out);
void write_csv(const TrajectoryLog& log, const std::filesystem::path& path);

/// Infers n and q from the header and requires it to match the documented
/// layout exactly. Throws InvalidArgument with the line number on bad input.
TrajectoryLog read_csv(std::istream& in, const std::string& controller = {});
TrajectoryLog read_csv(const std::filesystem::path& path, const std::string& controller = {});

/// Shortest round-trip text for a double ("nan", "inf", "-inf" for non-finite values).
std::string format_double(double v);
/// Parses the output of format_double; throws InvalidArgument on anything else.
double parse_double(const std::string& text);

}  // namespace ppac
