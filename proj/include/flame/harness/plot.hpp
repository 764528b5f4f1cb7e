#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "flame/harness/metrics.hpp"

namespace flame::harness {

enum class PlotKind { LearningCurve, MseVsNest, GoalScatter };
PlotKind plot_kind_from_string(const std::string& s);

struct PlotOptions {
  /// learning-curve: y columns against "step"; empty means episode_return.
  std::vector<std::string> series;
  std::string title;
};

/// learning-curve needs "step" plus the series columns; mse-vs-nest needs
/// n_est,mse (log-log axes); goal-scatter needs x,y and draws the four goals.
/// Output depends only on the input table, byte for byte.
std::string render_plot(const CsvTable& table, PlotKind kind, const PlotOptions& options = {});
void emit_plot(const std::filesystem::path& csv, PlotKind kind, const std::filesystem::path& svg,
               const PlotOptions& options = {});

}  // namespace flame::harness
