// Minimal SVG line-chart writer: axes, labelled series, shaded confidence
// bands. Output is byte-deterministic given the data.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace regastro {

struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> ci;  // half-widths; empty = no band
  std::string color;
};

class SvgChart {
 public:
  SvgChart(std::string title, std::string x_label, std::string y_label,
           bool log_x = false, bool log_y = false)
      : title_(std::move(title)),
        x_label_(std::move(x_label)),
        y_label_(std::move(y_label)),
        log_x_(log_x),
        log_y_(log_y) {}

  void add_series(SvgSeries s) { series_.push_back(std::move(s)); }

  std::string render() const {
    const double w = 720, h = 480, ml = 70, mr = 20, mt = 40, mb = 50;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series_) {
      for (size_t i = 0; i < s.x.size(); ++i) {
        const double xv = tx(s.x[i]), yv0 = ty_lo(s, i), yv1 = ty_hi(s, i);
        xmin = std::min(xmin, xv);
        xmax = std::max(xmax, xv);
        ymin = std::min(ymin, yv0);
        ymax = std::max(ymax, yv1);
      }
    }
    if (!(xmin < xmax)) { xmin -= 0.5; xmax += 0.5; }
    if (!(ymin < ymax)) { ymin -= 0.5; ymax += 0.5; }
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;

    auto px = [&](double x) {
      return ml + (tx(x) - xmin) / (xmax - xmin) * (w - ml - mr);
    };
    auto py = [&](double yv) {
      return h - mb - (yv - ymin) / (ymax - ymin) * (h - mt - mb);
    };
    auto pyv = [&](double y) { return py(log_y_ ? std::log10(y) : y); };

    std::string out;
    char buf[256];
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" "
           "height=\"480\" viewBox=\"0 0 720 480\">\n";
    out += "<rect width=\"720\" height=\"480\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.1f\" y=\"24\" font-size=\"16\" "
                  "text-anchor=\"middle\">%s</text>\n",
                  0.5 * w, title_.c_str());
    out += buf;
    // Axes.
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" "
                  "stroke=\"black\"/>\n",
                  ml, h - mb, w - mr, h - mb);
    out += buf;
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" "
                  "stroke=\"black\"/>\n",
                  ml, mt, ml, h - mb);
    out += buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\" "
                  "text-anchor=\"middle\">%s</text>\n",
                  0.5 * w, h - 12.0, x_label_.c_str());
    out += buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"16\" y=\"%.1f\" font-size=\"12\" "
                  "text-anchor=\"middle\" transform=\"rotate(-90 16 %.1f)\">%s"
                  "</text>\n",
                  0.5 * h, 0.5 * h, y_label_.c_str());
    out += buf;
    // Tick labels at the extremes.
    for (double f : {0.0, 0.5, 1.0}) {
      const double xv = xmin + f * (xmax - xmin);
      const double yv = ymin + f * (ymax - ymin);
      std::snprintf(buf, sizeof(buf),
                    "<text x=\"%.1f\" y=\"%.1f\" font-size=\"10\" "
                    "text-anchor=\"middle\">%.4g</text>\n",
                    ml + f * (w - ml - mr), h - mb + 16.0,
                    log_x_ ? std::pow(10.0, xv) : xv);
      out += buf;
      std::snprintf(buf, sizeof(buf),
                    "<text x=\"%.1f\" y=\"%.1f\" font-size=\"10\" "
                    "text-anchor=\"end\">%.4g</text>\n",
                    ml - 6.0, py(yv) + 4.0, log_y_ ? std::pow(10.0, yv) : yv);
      out += buf;
    }

    int idx = 0;
    for (const auto& s : series_) {
      const std::string color =
          s.color.empty() ? default_color(idx) : s.color;
      if (!s.ci.empty()) {
        std::string pts;
        for (size_t i = 0; i < s.x.size(); ++i) {
          std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", px(s.x[i]),
                        pyv(band_clamp(s.y[i] + s.ci[i])));
          pts += buf;
        }
        for (size_t i = s.x.size(); i-- > 0;) {
          std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", px(s.x[i]),
                        pyv(band_clamp(s.y[i] - s.ci[i])));
          pts += buf;
        }
        out += "<polygon points=\"" + pts + "\" fill=\"" + color +
               "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
      }
      std::string pts;
      for (size_t i = 0; i < s.x.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", px(s.x[i]),
                      pyv(s.y[i]));
        pts += buf;
      }
      out += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" +
             color + "\" stroke-width=\"1.5\"/>\n";
      // Legend entry.
      std::snprintf(buf, sizeof(buf),
                    "<rect x=\"%.1f\" y=\"%.1f\" width=\"12\" height=\"12\" "
                    "fill=\"%s\"/>\n",
                    w - mr - 150.0, mt + 18.0 * idx, color.c_str());
      out += buf;
      std::snprintf(buf, sizeof(buf),
                    "<text x=\"%.1f\" y=\"%.1f\" font-size=\"11\">%s</text>\n",
                    w - mr - 132.0, mt + 18.0 * idx + 10.0, s.label.c_str());
      out += buf;
      ++idx;
    }
    out += "</svg>\n";
    return out;
  }

 private:
  double tx(double x) const { return log_x_ ? std::log10(x) : x; }
  double band_clamp(double y) const {
    // Log-scale bands cannot cross zero.
    return log_y_ ? std::max(y, 1e-300) : y;
  }
  double ty_lo(const SvgSeries& s, size_t i) const {
    const double y = s.ci.empty() ? s.y[i] : s.y[i] - s.ci[i];
    return log_y_ ? std::log10(band_clamp(y)) : y;
  }
  double ty_hi(const SvgSeries& s, size_t i) const {
    const double y = s.ci.empty() ? s.y[i] : s.y[i] + s.ci[i];
    return log_y_ ? std::log10(band_clamp(y)) : y;
  }
  static std::string default_color(int i) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#ff7f0e", "#9467bd", "#8c564b"};
    return palette[i % 6];
  }

  std::string title_, x_label_, y_label_;
  bool log_x_, log_y_;
  std::vector<SvgSeries> series_;
};

}  // namespace regastro
