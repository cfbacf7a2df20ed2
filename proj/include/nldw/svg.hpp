#pragma once

// ============================================================================
// svg.hpp -- minimal hand-emitted scatter/line plots
//
// Inspection aids only: a fixed 640x480 canvas, axis frame with min/max tick
// labels, the data as a polyline with point markers, and an optional fitted
// straight line drawn across the data range.  No dependencies, deterministic
// output (all coordinates go through the shared "%.12g" formatter).
// ============================================================================

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "nldw/csv.hpp"
#include "nldw/errors.hpp"

namespace nldw {

struct SvgPlotOptions {
  std::string title;
  std::string x_label = "x";
  std::string y_label = "y";
  bool draw_fit = false;
  double slope = 0.0;
  double intercept = 0.0;
};

inline std::string svg_scatter_plot(const std::vector<double>& xs,
                                    const std::vector<double>& ys,
                                    const SvgPlotOptions& opt) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw OutOfRange("svg_scatter_plot: need >= 2 matched points");
  }
  const double W = 640.0, H = 480.0;
  const double ml = 70.0, mr = 20.0, mt = 40.0, mb = 50.0;

  double xmin = xs[0], xmax = xs[0], ymin = ys[0], ymax = ys[0];
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xmin = std::min(xmin, xs[i]);
    xmax = std::max(xmax, xs[i]);
    ymin = std::min(ymin, ys[i]);
    ymax = std::max(ymax, ys[i]);
  }
  if (opt.draw_fit) {
    ymin = std::min({ymin, opt.intercept + opt.slope * xmin,
                     opt.intercept + opt.slope * xmax});
    ymax = std::max({ymax, opt.intercept + opt.slope * xmin,
                     opt.intercept + opt.slope * xmax});
  }
  const double xpad = (xmax - xmin) > 0 ? 0.05 * (xmax - xmin) : 1.0;
  const double ypad = (ymax - ymin) > 0 ? 0.05 * (ymax - ymin) : 1.0;
  xmin -= xpad;
  xmax += xpad;
  ymin -= ypad;
  ymax += ypad;

  const auto px = [&](double x) {
    return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr);
  };
  const auto py = [&](double y) {
    return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb);
  };
  const auto n = [&](double v) { return format_number(v); };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" "
       "height=\"480\" viewBox=\"0 0 640 480\">\n";
  s += "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
  // axis frame
  s += "<rect x=\"" + n(ml) + "\" y=\"" + n(mt) + "\" width=\"" +
       n(W - ml - mr) + "\" height=\"" + n(H - mt - mb) +
       "\" fill=\"none\" stroke=\"black\"/>\n";
  // labels
  s += "<text x=\"" + n(W / 2) + "\" y=\"24\" text-anchor=\"middle\" "
       "font-family=\"sans-serif\" font-size=\"15\">" + opt.title +
       "</text>\n";
  s += "<text x=\"" + n(W / 2) + "\" y=\"" + n(H - 12) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"13\">" + opt.x_label + "</text>\n";
  s += "<text x=\"18\" y=\"" + n(H / 2) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"13\" transform=\"rotate(-90 18 " + n(H / 2) + ")\">" +
       opt.y_label + "</text>\n";
  // tick labels: data-range corners
  s += "<text x=\"" + n(ml) + "\" y=\"" + n(H - mb + 18) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"11\">" + n(xmin + xpad) + "</text>\n";
  s += "<text x=\"" + n(W - mr) + "\" y=\"" + n(H - mb + 18) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"11\">" + n(xmax - xpad) + "</text>\n";
  s += "<text x=\"" + n(ml - 6) + "\" y=\"" + n(py(ymin + ypad) + 4) +
       "\" text-anchor=\"end\" font-family=\"sans-serif\" "
       "font-size=\"11\">" + n(ymin + ypad) + "</text>\n";
  s += "<text x=\"" + n(ml - 6) + "\" y=\"" + n(py(ymax - ypad) + 4) +
       "\" text-anchor=\"end\" font-family=\"sans-serif\" "
       "font-size=\"11\">" + n(ymax - ypad) + "</text>\n";

  // fitted line under the data
  if (opt.draw_fit) {
    s += "<line x1=\"" + n(px(xmin)) + "\" y1=\"" +
         n(py(opt.intercept + opt.slope * xmin)) + "\" x2=\"" + n(px(xmax)) +
         "\" y2=\"" + n(py(opt.intercept + opt.slope * xmax)) +
         "\" stroke=\"#c03030\" stroke-width=\"1.5\"/>\n";
  }

  // data polyline + markers
  s += "<polyline fill=\"none\" stroke=\"#3050c0\" stroke-width=\"1.5\" "
       "points=\"";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ' ';
    s += n(px(xs[i])) + "," + n(py(ys[i]));
  }
  s += "\"/>\n";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    s += "<circle cx=\"" + n(px(xs[i])) + "\" cy=\"" + n(py(ys[i])) +
         "\" r=\"3\" fill=\"#3050c0\"/>\n";
  }
  s += "</svg>\n";
  return s;
}

inline void write_svg_plot(const std::filesystem::path& path,
                           const std::vector<double>& xs,
                           const std::vector<double>& ys,
                           const SvgPlotOptions& opt) {
  write_file_atomic(path, svg_scatter_plot(xs, ys, opt));
}

}  // namespace nldw
