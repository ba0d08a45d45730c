#include <algorithm>
#include <cmath>
#include <sstream>

#include "llmize/cli.hpp"

namespace llmize::cli {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 500.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 190.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 60.0;

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

struct Series {
  const char* name;
  const char* colour;
  double HistoryRow::*field;
};

constexpr Series kSeries[] = {
    {"best_so_far", "#d62728", &HistoryRow::best_so_far},
    {"best_of_step", "#1f77b4", &HistoryRow::best_of_step},
    {"mean_of_step", "#2ca02c", &HistoryRow::mean_of_step},
};

}  // namespace

std::string convergence_svg(const std::vector<HistoryRow>& rows) {
  double x_lo = rows.front().step_index;
  double x_hi = x_lo;
  double y_lo = rows.front().best_so_far;
  double y_hi = y_lo;
  for (const auto& r : rows) {
    x_lo = std::min(x_lo, r.step_index);
    x_hi = std::max(x_hi, r.step_index);
    for (const auto& s : kSeries) {
      y_lo = std::min(y_lo, r.*s.field);
      y_hi = std::max(y_hi, r.*s.field);
    }
  }
  if (x_hi == x_lo) {
    x_lo -= 0.5;
    x_hi += 0.5;
  }
  if (y_hi == y_lo) {
    const double pad = std::max(1.0, std::abs(y_lo) * 0.05);
    y_lo -= pad;
    y_hi += pad;
  }
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * plot_w; };
  auto py = [&](double y) { return kTop + (y_hi - y) / (y_hi - y_lo) * plot_h; };

  std::ostringstream svg;
  svg << R"(<svg xmlns="http://www.w3.org/2000/svg" width=")" << kWidth << R"(" height=")" << kHeight
      << R"(" font-family="sans-serif" font-size="12">)" << "\n";
  svg << R"(<rect width="100%" height="100%" fill="white"/>)" << "\n";

  // axes with min/max ticks
  svg << R"(<line x1=")" << kLeft << R"(" y1=")" << kTop + plot_h << R"(" x2=")" << kLeft + plot_w << R"(" y2=")"
      << kTop + plot_h << R"(" stroke="black"/>)" << "\n";
  svg << R"(<line x1=")" << kLeft << R"(" y1=")" << kTop << R"(" x2=")" << kLeft << R"(" y2=")" << kTop + plot_h
      << R"(" stroke="black"/>)" << "\n";
  svg << R"(<text x=")" << kLeft << R"(" y=")" << kTop + plot_h + 18 << R"(" text-anchor="middle">)" << fmt(x_lo)
      << "</text>\n";
  svg << R"(<text x=")" << kLeft + plot_w << R"(" y=")" << kTop + plot_h + 18 << R"(" text-anchor="middle">)"
      << fmt(x_hi) << "</text>\n";
  svg << R"(<text x=")" << kLeft - 6 << R"(" y=")" << kTop + plot_h << R"(" text-anchor="end">)" << fmt(y_lo)
      << "</text>\n";
  svg << R"(<text x=")" << kLeft - 6 << R"(" y=")" << kTop + 4 << R"(" text-anchor="end">)" << fmt(y_hi)
      << "</text>\n";
  svg << R"(<text x=")" << kLeft + plot_w / 2 << R"(" y=")" << kHeight - 15 << R"(" text-anchor="middle">step_index</text>)"
      << "\n";
  svg << R"(<text x="20" y=")" << kTop + plot_h / 2 << R"x(" text-anchor="middle" transform="rotate(-90 20 )x"
      << kTop + plot_h / 2 << R"x()">score</text>)x" << "\n";

  for (const auto& s : kSeries) {
    svg << R"(<polyline fill="none" stroke=")" << s.colour << R"(" stroke-width="2" points=")";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      svg << (i ? " " : "") << fmt(px(rows[i].step_index)) << "," << fmt(py(rows[i].*s.field));
    }
    svg << R"("/>)" << "\n";
  }

  double ly = kTop + 10;
  for (const auto& s : kSeries) {
    const double lx = kLeft + plot_w + 20;
    svg << R"(<line x1=")" << lx << R"(" y1=")" << ly << R"(" x2=")" << lx + 25 << R"(" y2=")" << ly
        << R"(" stroke=")" << s.colour << R"(" stroke-width="2"/>)" << "\n";
    svg << R"(<text x=")" << lx + 32 << R"(" y=")" << ly + 4 << R"(">)" << s.name << "</text>\n";
    ly += 20;
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string tour_svg(const TspInstance& instance, const Permutation& route) {
  constexpr double kSize = 520.0;
  constexpr double kMargin = 10.0;
  const double scale = (kSize - 2 * kMargin) / 100.0;
  auto px = [&](double x) { return kMargin + x * scale; };
  auto py = [&](double y) { return kSize - kMargin - y * scale; };

  std::ostringstream svg;
  svg << R"(<svg xmlns="http://www.w3.org/2000/svg" width=")" << kSize << R"(" height=")" << kSize
      << R"(" font-family="sans-serif" font-size="10">)" << "\n";
  svg << R"(<rect width="100%" height="100%" fill="white"/>)" << "\n";
  svg << R"(<polyline fill="none" stroke="#1f77b4" stroke-width="2" points=")";
  for (std::size_t k = 0; k <= route.order.size(); ++k) {
    const auto& c = instance.cities[route.order[k % route.order.size()]];
    svg << (k ? " " : "") << fmt(px(c.x)) << "," << fmt(py(c.y));
  }
  svg << R"("/>)" << "\n";
  for (std::size_t i = 0; i < instance.n(); ++i) {
    const auto& c = instance.cities[i];
    svg << R"(<circle cx=")" << fmt(px(c.x)) << R"(" cy=")" << fmt(py(c.y)) << R"(" r="5" fill="red"/>)"
        << R"(<text x=")" << fmt(px(c.x) + 7) << R"(" y=")" << fmt(py(c.y) - 7) << R"(">)" << i << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace llmize::cli
