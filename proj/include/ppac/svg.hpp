#pragma once

// Minimal static line plots: axes, ticks, a legend and one polyline per series.

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ppac {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool dashed = false;
};

struct Plot {
  std::string title;
  std::string x_label = "t";
  std::string y_label;
  std::vector<Series> series;
  /// Fixed y range; points outside are clipped to the frame. Derived from the
  /// finite data when absent.
  std::optional<std::pair<double, double>> y_range;
  int width = 720;
  int height = 420;
};

std::string render_svg(const Plot& plot);
void write_svg(const Plot& plot, const std::filesystem::path& path);

/// Round tick positions covering [lo, hi], roughly `target` of them.
std::vector<double> nice_ticks(double lo, double hi, int target = 6);

}  // namespace ppac
