#include "goalcraft/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "goalcraft/csv.hpp"

namespace goalcraft {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kMargin = 56.0;
constexpr double kArena = 480.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string open_svg(double w, double h) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) +
         "\" viewBox=\"0 0 " + num(w) + " " + num(h) + "\" font-family=\"sans-serif\" font-size=\"12\">\n"
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

// Unit-arena coordinates to pixels; y grows upward in the arena.
double ax(double x) { return kMargin + x * kArena; }
double ay(double y) { return kMargin + (1.0 - y) * kArena; }

std::string arena_frame(const EnvConfig& env, Goal goal) {
  std::string out;
  out += "<rect x=\"" + num(ax(0)) + "\" y=\"" + num(ay(1)) + "\" width=\"" + num(kArena) +
         "\" height=\"" + num(kArena) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (const Rect& r : env.obstacles) {
    out += "<rect x=\"" + num(ax(r.x0)) + "\" y=\"" + num(ay(r.y1)) + "\" width=\"" +
           num((r.x1 - r.x0) * kArena) + "\" height=\"" + num((r.y1 - r.y0) * kArena) +
           "\" fill=\"#777777\"/>\n";
  }
  out += "<circle cx=\"" + num(ax(goal.x)) + "\" cy=\"" + num(ay(goal.y)) +
         "\" r=\"6\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
  return out;
}

// Blue to yellow through green, t in [0, 1].
std::string ramp(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const double r = 68 + t * (253 - 68);
  const double g = 1 + t * (231 - 1);
  const double b = 84 + (t < 0.5 ? t * 2 * (140 - 84) : (1 - (t - 0.5) * 2) * (140 - 37) + 37 - 0);
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(r), static_cast<int>(g),
                static_cast<int>(std::clamp(b, 0.0, 255.0)));
  return buf;
}

}  // namespace

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string learning_curve_svg(const std::vector<CurveSeries>& series, const std::string& title,
                               const std::string& y_label) {
  double x_max = 1.0;
  double y_lo = std::numeric_limits<double>::infinity();
  double y_hi = -std::numeric_limits<double>::infinity();
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      x_max = std::max(x_max, static_cast<double>(p.epoch));
      y_lo = std::min({y_lo, p.mean, p.ci_low});
      y_hi = std::max({y_hi, p.mean, p.ci_high});
    }
  }
  if (!std::isfinite(y_lo)) y_lo = 0.0, y_hi = 1.0;
  if (y_hi - y_lo < 1e-9) y_lo -= 0.5, y_hi += 0.5;

  const double plot_w = kWidth - 2 * kMargin - 120;
  const double plot_h = kHeight - 2 * kMargin;
  auto px = [&](double e) { return kMargin + e / x_max * plot_w; };
  auto py = [&](double v) { return kMargin + (1.0 - (v - y_lo) / (y_hi - y_lo)) * plot_h; };

  std::string out = open_svg(kWidth, kHeight);
  out += "<text x=\"" + num(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" +
         xml_escape(title) + "</text>\n";
  out += "<line x1=\"" + num(kMargin) + "\" y1=\"" + num(kMargin + plot_h) + "\" x2=\"" +
         num(kMargin + plot_w) + "\" y2=\"" + num(kMargin + plot_h) + "\" stroke=\"black\"/>\n";
  out += "<line x1=\"" + num(kMargin) + "\" y1=\"" + num(kMargin) + "\" x2=\"" + num(kMargin) +
         "\" y2=\"" + num(kMargin + plot_h) + "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = y_lo + (y_hi - y_lo) * i / 4.0;
    out += "<text x=\"" + num(kMargin - 6) + "\" y=\"" + num(py(v) + 4) +
           "\" text-anchor=\"end\">" + num(v) + "</text>\n";
    const double e = x_max * i / 4.0;
    out += "<text x=\"" + num(px(e)) + "\" y=\"" + num(kMargin + plot_h + 16) +
           "\" text-anchor=\"middle\">" + num(e) + "</text>\n";
  }
  out += "<text x=\"" + num(kMargin + plot_w / 2) + "\" y=\"" + num(kHeight - 12) +
         "\" text-anchor=\"middle\">epoch</text>\n";
  out += "<text x=\"16\" y=\"" + num(kMargin + plot_h / 2) + "\" transform=\"rotate(-90 16 " +
         num(kMargin + plot_h / 2) + ")\" text-anchor=\"middle\">" + xml_escape(y_label) +
         "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* colour = kPalette[k % std::size(kPalette)];
    const bool band = std::any_of(s.points.begin(), s.points.end(),
                                  [](const CurvePoint& p) { return p.n_seeds > 1; });
    if (band && !s.points.empty()) {
      std::string pts;
      for (const auto& p : s.points) pts += num(px(p.epoch)) + "," + num(py(p.ci_high)) + " ";
      for (auto it = s.points.rbegin(); it != s.points.rend(); ++it) {
        pts += num(px(it->epoch)) + "," + num(py(it->ci_low)) + " ";
      }
      out += "<polygon class=\"ci-band\" points=\"" + pts + "\" fill=\"" + colour +
             "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
    }
    std::string pts;
    for (const auto& p : s.points) pts += num(px(p.epoch)) + "," + num(py(p.mean)) + " ";
    out += "<polyline class=\"mean\" points=\"" + pts + "\" fill=\"none\" stroke=\"" + colour +
           "\" stroke-width=\"2\"/>\n";
    const double ly = kMargin + 18.0 * static_cast<double>(k);
    out += "<line x1=\"" + num(kWidth - kMargin - 110) + "\" y1=\"" + num(ly) + "\" x2=\"" +
           num(kWidth - kMargin - 90) + "\" y2=\"" + num(ly) + "\" stroke=\"" + colour +
           "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + num(kWidth - kMargin - 84) + "\" y=\"" + num(ly + 4) + "\">" +
           xml_escape(s.label) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

std::string quiver_svg(const FieldScan& scan, std::size_t grid_n, const EnvConfig& env, Goal goal) {
  const double side = kArena + 2 * kMargin;
  std::string out = open_svg(side, side);
  out += arena_frame(env, goal);
  double longest = 0.0;
  for (const auto& s : scan.samples) longest = std::max(longest, std::hypot(s.phi_2d[0], s.phi_2d[1]));
  const double cell = kArena / static_cast<double>(std::max<std::size_t>(grid_n, 1));
  for (const auto& s : scan.samples) {
    const double x = ax(s.position.x);
    const double y = ay(s.position.y);
    const double len = std::hypot(s.phi_2d[0], s.phi_2d[1]);
    if (longest <= 0.0 || len <= 0.0) {
      out += "<circle cx=\"" + num(x) + "\" cy=\"" + num(y) + "\" r=\"1.5\" fill=\"#1f77b4\"/>\n";
      continue;
    }
    const double scale = 0.45 * cell * len / longest;
    const double dx = s.phi_2d[0] / len * scale;
    const double dy = -s.phi_2d[1] / len * scale;
    out += "<line x1=\"" + num(x - dx) + "\" y1=\"" + num(y - dy) + "\" x2=\"" + num(x + dx) +
           "\" y2=\"" + num(y + dy) + "\" stroke=\"#1f77b4\" stroke-width=\"1.2\"/>\n";
    out += "<circle cx=\"" + num(x + dx) + "\" cy=\"" + num(y + dy) +
           "\" r=\"1.6\" fill=\"#1f77b4\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

std::string heatmap_svg(const Heatmap& map, const EnvConfig& env, Goal goal) {
  const double side = kArena + 2 * kMargin;
  std::string out = open_svg(side, side);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& v : map.values) {
    if (v) lo = std::min(lo, *v), hi = std::max(hi, *v);
  }
  const double span = hi > lo ? hi - lo : 1.0;
  const double cell = kArena / static_cast<double>(std::max<std::size_t>(map.grid_n, 1));
  for (std::size_t i = 0; i < map.grid_n; ++i) {
    for (std::size_t j = 0; j < map.grid_n; ++j) {
      const auto& v = map.values[i * map.grid_n + j];
      if (!v) continue;
      const double x0 = kMargin + static_cast<double>(i) * cell;
      const double y0 = kMargin + kArena - static_cast<double>(j + 1) * cell;
      out += "<rect x=\"" + num(x0) + "\" y=\"" + num(y0) + "\" width=\"" + num(cell) +
             "\" height=\"" + num(cell) + "\" fill=\"" + ramp((*v - lo) / span) + "\"><title>" +
             format_double(*v) + "</title></rect>\n";
    }
  }
  out += arena_frame(env, goal);
  out += "</svg>\n";
  return out;
}

}  // namespace goalcraft
