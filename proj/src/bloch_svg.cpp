#include "geoflow/bloch_svg.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace geoflow {

namespace {

constexpr double kPanel = 220.0;   // panel edge in px
constexpr double kMargin = 30.0;
constexpr double kRadius = 90.0;   // unit circle radius in px

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

struct Panel {
  double cx, cy;  // px center
  int i, j;       // coordinate indices shown on this cross-section
  const char* label;
  double map_x(double v) const { return cx + v * kRadius; }
  double map_y(double v) const { return cy - v * kRadius; }
};

}  // namespace

std::string render_bloch_svg(const TrajectoryTable& table,
                             BasisConvention convention) {
  if (table.coord_count != 3)
    throw InvariantError(
        "bloch plot: trajectory must have exactly 3 coordinate columns (n = 2)");
  const double scale =
      convention == BasisConvention::kOrthonormal ? std::sqrt(2.0) : 1.0;

  const double width = 3 * kPanel + 2 * kMargin;
  const double height = kPanel + 2 * kMargin;
  const Panel panels[3] = {
      {kMargin + kPanel * 0.5, kMargin + kPanel * 0.5, 0, 1, "x1-x2"},
      {kMargin + kPanel * 1.5, kMargin + kPanel * 0.5, 0, 2, "x1-x3"},
      {kMargin + kPanel * 2.5, kMargin + kPanel * 0.5, 1, 2, "x2-x3"},
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\""
      << fmt(width) << "\" height=\"" << fmt(height) << "\" viewBox=\"0 0 "
      << fmt(width) << ' ' << fmt(height) << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const Panel& p : panels) {
    svg << "<circle cx=\"" << fmt(p.cx) << "\" cy=\"" << fmt(p.cy)
        << "\" r=\"" << fmt(kRadius)
        << "\" fill=\"none\" stroke=\"#888888\" stroke-width=\"1\"/>\n";
    // axes through the center
    svg << "<line x1=\"" << fmt(p.cx - kRadius) << "\" y1=\"" << fmt(p.cy)
        << "\" x2=\"" << fmt(p.cx + kRadius) << "\" y2=\"" << fmt(p.cy)
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg << "<line x1=\"" << fmt(p.cx) << "\" y1=\"" << fmt(p.cy - kRadius)
        << "\" x2=\"" << fmt(p.cx) << "\" y2=\"" << fmt(p.cy + kRadius)
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg << "<text x=\"" << fmt(p.cx) << "\" y=\"" << fmt(p.cy + kRadius + 18)
        << "\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\">"
        << p.label << "</text>\n";
    if (table.x.size() > 1) {
      svg << "<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.5\" points=\"";
      for (size_t r = 0; r < table.x.size(); ++r) {
        if (r > 0) svg << ' ';
        svg << fmt(p.map_x(scale * table.x[r](p.i))) << ','
            << fmt(p.map_y(scale * table.x[r](p.j)));
      }
      svg << "\"/>\n";
    }
    const RVector& first = table.x.front();
    const RVector& last = table.x.back();
    svg << "<circle cx=\"" << fmt(p.map_x(scale * first(p.i))) << "\" cy=\""
        << fmt(p.map_y(scale * first(p.j)))
        << "\" r=\"4\" fill=\"none\" stroke=\"#2a9d2a\" stroke-width=\"1.5\"/>\n";
    svg << "<circle cx=\"" << fmt(p.map_x(scale * last(p.i))) << "\" cy=\""
        << fmt(p.map_y(scale * last(p.j)))
        << "\" r=\"3.2\" fill=\"#c03030\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_bloch_svg(const std::string& path, const TrajectoryTable& table,
                     BasisConvention convention) {
  atomic_write_file(path, render_bloch_svg(table, convention));
}

}  // namespace geoflow
