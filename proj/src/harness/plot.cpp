#include "flame/harness/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace flame::harness {

PlotKind plot_kind_from_string(const std::string& s) {
  if (s == "learning-curve") return PlotKind::LearningCurve;
  if (s == "mse-vs-nest") return PlotKind::MseVsNest;
  if (s == "goal-scatter") return PlotKind::GoalScatter;
  throw std::invalid_argument("unknown plot kind '" + s + "' (expected learning-curve, mse-vs-nest or goal-scatter)");
}

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v, bool log_axis) {
  char buf[32];
  if (log_axis) v = std::pow(10.0, v);
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Range {
  double lo = 0.0, hi = 1.0;
  void fit(const std::vector<double>& xs) {
    bool any = false;
    double a = 0, b = 0;
    for (double x : xs) {
      if (!std::isfinite(x)) continue;
      a = any ? std::min(a, x) : x;
      b = any ? std::max(b, x) : x;
      any = true;
    }
    if (!any) return;
    if (b - a < 1e-12) {
      a -= 0.5;
      b += 0.5;
    }
    const double pad = 0.05 * (b - a);
    lo = a - pad;
    hi = b + pad;
  }
};

class Canvas {
 public:
  Canvas(Range x, Range y, bool xlog, bool ylog) : x_(x), y_(y), xlog_(xlog), ylog_(ylog) {}

  double px(double x) const { return kLeft + (x - x_.lo) / (x_.hi - x_.lo) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y_.lo) / (y_.hi - y_.lo) * (kHeight - kTop - kBottom); }

  void axes(const std::string& xlabel, const std::string& ylabel, const std::string& title) {
    const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
    body_ += "<rect x=\"" + num(x0) + "\" y=\"" + num(y1) + "\" width=\"" + num(x1 - x0) + "\" height=\"" +
             num(y0 - y1) + "\" fill=\"none\" stroke=\"#333\"/>\n";
    for (int i = 0; i <= 4; ++i) {
      const double fx = x_.lo + (x_.hi - x_.lo) * i / 4.0;
      const double fy = y_.lo + (y_.hi - y_.lo) * i / 4.0;
      body_ += "<text x=\"" + num(px(fx)) + "\" y=\"" + num(y0 + 16) + "\" font-size=\"11\" text-anchor=\"middle\">" +
               tick_label(fx, xlog_) + "</text>\n";
      body_ += "<text x=\"" + num(x0 - 6) + "\" y=\"" + num(py(fy) + 4) + "\" font-size=\"11\" text-anchor=\"end\">" +
               tick_label(fy, ylog_) + "</text>\n";
    }
    body_ += "<text x=\"" + num((x0 + x1) / 2) + "\" y=\"" + num(kHeight - 12) +
             "\" font-size=\"13\" text-anchor=\"middle\">" + xlabel + "</text>\n";
    body_ += "<text x=\"16\" y=\"" + num((y0 + y1) / 2) + "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
             num((y0 + y1) / 2) + ")\">" + ylabel + "</text>\n";
    if (!title.empty()) {
      body_ += "<text x=\"" + num(kWidth / 2) + "\" y=\"24\" font-size=\"14\" text-anchor=\"middle\">" + title +
               "</text>\n";
    }
  }

  void polyline(const std::vector<double>& xs, const std::vector<double>& ys, const char* color, const std::string& name) {
    body_ += "<polyline class=\"series\" data-name=\"" + name + "\" fill=\"none\" stroke=\"" + color +
             "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i) body_ += (i ? " " : "") + num(px(xs[i])) + "," + num(py(ys[i]));
    body_ += "\"/>\n";
  }

  void circle(double x, double y, double r, const char* fill, const char* stroke = "none") {
    body_ += "<circle cx=\"" + num(px(x)) + "\" cy=\"" + num(py(y)) + "\" r=\"" + num(r) + "\" fill=\"" + fill +
             "\" stroke=\"" + stroke + "\"/>\n";
  }

  void legend(const std::vector<std::string>& names) {
    for (std::size_t i = 0; i < names.size(); ++i) {
      const double y = kTop + 14 + 14 * static_cast<double>(i);
      body_ += "<text x=\"" + num(kWidth - kRight - 8) + "\" y=\"" + num(y) + "\" font-size=\"11\" text-anchor=\"end\" fill=\"" +
               kColors[i % 6] + "\">" + names[i] + "</text>\n";
    }
  }

  std::string finish() const {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
           "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" +
           body_ + "</svg>\n";
  }

 private:
  Range x_, y_;
  bool xlog_, ylog_;
  std::string body_;
};

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

std::string learning_curve(const CsvTable& t, const PlotOptions& o) {
  std::vector<std::string> series = o.series.empty() ? std::vector<std::string>{"episode_return"} : o.series;
  const auto step = to_std(t.column("step"));
  std::vector<std::vector<double>> xs, ys;
  std::vector<double> all_x, all_y;
  for (const auto& name : series) {
    const auto col = to_std(t.column(name));
    std::vector<double> x, y;
    for (std::size_t i = 0; i < col.size(); ++i) {
      if (!std::isfinite(col[i])) continue;
      x.push_back(step[i]);
      y.push_back(col[i]);
    }
    all_x.insert(all_x.end(), x.begin(), x.end());
    all_y.insert(all_y.end(), y.begin(), y.end());
    xs.push_back(std::move(x));
    ys.push_back(std::move(y));
  }
  Range rx, ry;
  rx.fit(all_x);
  ry.fit(all_y);
  Canvas c(rx, ry, false, false);
  c.axes("step", series.size() == 1 ? series[0] : "value", o.title);
  for (std::size_t k = 0; k < series.size(); ++k) {
    if (!xs[k].empty()) c.polyline(xs[k], ys[k], kColors[k % 6], series[k]);
  }
  if (series.size() > 1) c.legend(series);
  return c.finish();
}

std::string mse_vs_nest(const CsvTable& t, const PlotOptions& o) {
  const auto n = to_std(t.column("n_est"));
  const auto mse = to_std(t.column("mse"));
  std::vector<double> x, y;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (!(n[i] > 0.0) || !(mse[i] > 0.0)) continue;
    x.push_back(std::log10(n[i]));
    y.push_back(std::log10(mse[i]));
  }
  Range rx, ry;
  rx.fit(x);
  ry.fit(y);
  Canvas c(rx, ry, true, true);
  c.axes("N_est", "log-likelihood MSE", o.title);
  if (!x.empty()) c.polyline(x, y, kColors[0], "mse");
  for (std::size_t i = 0; i < x.size(); ++i) c.circle(x[i], y[i], 3.0, kColors[0]);
  return c.finish();
}

std::string goal_scatter(const CsvTable& t, const PlotOptions& o) {
  Range r;
  r.lo = -8.0;
  r.hi = 8.0;
  Canvas c(r, r, false, false);
  c.axes("x", "y", o.title);
  for (double gx : {5.0, -5.0})
    for (double gy : {5.0, -5.0}) c.circle(gx, gy, 0.5 / 16.0 * (kWidth - kLeft - kRight), "none", "#2ca02c");
  const auto x = to_std(t.column("x"));
  const auto y = to_std(t.column("y"));
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::isfinite(x[i]) && std::isfinite(y[i])) c.circle(x[i], y[i], 2.0, kColors[0]);
  }
  return c.finish();
}

}  // namespace

std::string render_plot(const CsvTable& table, PlotKind kind, const PlotOptions& options) {
  switch (kind) {
    case PlotKind::LearningCurve: return learning_curve(table, options);
    case PlotKind::MseVsNest: return mse_vs_nest(table, options);
    case PlotKind::GoalScatter: return goal_scatter(table, options);
  }
  throw std::logic_error("unknown plot kind");
}

void emit_plot(const std::filesystem::path& csv, PlotKind kind, const std::filesystem::path& svg,
               const PlotOptions& options) {
  const std::string text = render_plot(read_csv(csv), kind, options);
  std::ofstream out(svg, std::ios::trunc | std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + svg.string());
  out << text;
}

}  // namespace flame::harness
