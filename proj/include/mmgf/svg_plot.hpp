#pragma once

// Minimal dependency-free SVG renderers for the experiment figures: grouped
// bar charts and box plots. Deterministic output — fixed layout, fixed
// number formatting — so rendered files are diffable across runs.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "mmgf/errors.hpp"

namespace mmgf {

namespace svg_detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out += c;
  }
  return out;
}

inline const char* palette(size_t i) {
  static const char* kColors[] = {"#4878a8", "#e49444", "#5aa469",
                                  "#d1615d", "#967bb6", "#8a8a8a"};
  return kColors[i % 6];
}

struct Frame {
  double x0 = 70, y0 = 40, width = 560, height = 300;  // plot area
  double x1() const { return x0 + width; }
  double y1() const { return y0 + height; }
};

inline void open_svg(std::string& out, const std::string& title, double w,
                     double h) {
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " + fmt(w) +
         " " + fmt(h) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out += "<rect width=\"" + fmt(w) + "\" height=\"" + fmt(h) +
         "\" fill=\"white\"/>\n";
  out += "<text x=\"" + fmt(w / 2) +
         "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" +
         escape(title) + "</text>\n";
}

// Horizontal gridlines with y-axis labels for a [0, y_max] scale.
inline void draw_axes(std::string& out, const Frame& f, double y_max) {
  for (int i = 0; i <= 5; ++i) {
    const double v = y_max * i / 5.0;
    const double y = f.y1() - f.height * i / 5.0;
    out += "<line x1=\"" + fmt(f.x0) + "\" y1=\"" + fmt(y) + "\" x2=\"" +
           fmt(f.x1()) + "\" y2=\"" + fmt(y) +
           "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out += "<text x=\"" + fmt(f.x0 - 8) + "\" y=\"" + fmt(y + 4) +
           "\" text-anchor=\"end\">" + fmt(v) + "</text>\n";
  }
  out += "<line x1=\"" + fmt(f.x0) + "\" y1=\"" + fmt(f.y0) + "\" x2=\"" +
         fmt(f.x0) + "\" y2=\"" + fmt(f.y1()) +
         "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  out += "<line x1=\"" + fmt(f.x0) + "\" y1=\"" + fmt(f.y1()) + "\" x2=\"" +
         fmt(f.x1()) + "\" y2=\"" + fmt(f.y1()) +
         "\" stroke=\"black\" stroke-width=\"1\"/>\n";
}

inline void write_file(const std::filesystem::path& path,
                       const std::string& body) {
  std::ofstream out(path);
  if (!out) throw RuntimeFailure(path.string() + ": cannot open for writing");
  out << body;
  if (!out) throw RuntimeFailure(path.string() + ": write failed");
}

}  // namespace svg_detail

// ===== Grouped bar chart =====

struct BarGroup {
  std::string label;             // x-axis group label
  std::vector<double> values;    // one bar per series
};

// One bar per (group, series), series colored and listed in a legend.
// Values are clamped into [0, y_max] for drawing.
inline void write_bar_svg(const std::filesystem::path& path,
                          const std::string& title,
                          const std::vector<std::string>& series,
                          const std::vector<BarGroup>& groups,
                          double y_max = 1.0) {
  using namespace svg_detail;
  if (series.empty() || groups.empty())
    throw ValidationError("write_bar_svg: need at least one series and group");
  for (const auto& g : groups)
    if (g.values.size() != series.size())
      throw ValidationError("write_bar_svg: group '" + g.label + "' has " +
                            std::to_string(g.values.size()) + " values for " +
                            std::to_string(series.size()) + " series");
  if (!(y_max > 0)) throw ValidationError("write_bar_svg: y_max must be > 0");

  Frame f;
  std::string out;
  open_svg(out, title, f.x1() + 150, f.y1() + 60);
  draw_axes(out, f, y_max);

  const double group_w = f.width / static_cast<double>(groups.size());
  const double bar_w = group_w * 0.8 / static_cast<double>(series.size());
  for (size_t gi = 0; gi < groups.size(); ++gi) {
    const double gx = f.x0 + group_w * (static_cast<double>(gi) + 0.1);
    for (size_t si = 0; si < series.size(); ++si) {
      const double v =
          std::clamp(groups[gi].values[si], 0.0, y_max) / y_max;
      const double h = f.height * v;
      out += "<rect x=\"" + fmt(gx + bar_w * static_cast<double>(si)) +
             "\" y=\"" + fmt(f.y1() - h) + "\" width=\"" + fmt(bar_w * 0.92) +
             "\" height=\"" + fmt(h) + "\" fill=\"" + palette(si) + "\"/>\n";
    }
    out += "<text x=\"" + fmt(gx + group_w * 0.4) + "\" y=\"" +
           fmt(f.y1() + 18) + "\" text-anchor=\"middle\">" +
           escape(groups[gi].label) + "</text>\n";
  }
  for (size_t si = 0; si < series.size(); ++si) {
    const double ly = f.y0 + 18.0 * static_cast<double>(si);
    out += "<rect x=\"" + fmt(f.x1() + 16) + "\" y=\"" + fmt(ly) +
           "\" width=\"12\" height=\"12\" fill=\"" + palette(si) + "\"/>\n";
    out += "<text x=\"" + fmt(f.x1() + 34) + "\" y=\"" + fmt(ly + 10) + "\">" +
           escape(series[si]) + "</text>\n";
  }
  out += "</svg>\n";
  write_file(path, out);
}

// ===== Box plot =====

struct BoxStats {
  double lo = 0, q1 = 0, median = 0, q3 = 0, hi = 0;
};

// Five-number summary with linear-interpolation quartiles.
inline BoxStats box_stats(std::vector<double> v) {
  if (v.empty()) throw ValidationError("box_stats: empty sample");
  std::sort(v.begin(), v.end());
  const auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(v.size() - 1);
    const size_t i = static_cast<size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    if (i + 1 >= v.size()) return v.back();
    return v[i] * (1.0 - frac) + v[i + 1] * frac;
  };
  return {v.front(), quantile(0.25), quantile(0.5), quantile(0.75), v.back()};
}

// One box-and-whisker per labeled sample set, drawn on a [0, y_max] scale.
inline void write_box_svg(const std::filesystem::path& path,
                          const std::string& title,
                          const std::vector<std::string>& labels,
                          const std::vector<std::vector<double>>& samples,
                          double y_max = 1.0) {
  using namespace svg_detail;
  if (labels.empty() || labels.size() != samples.size())
    throw ValidationError("write_box_svg: labels and samples must align");
  if (!(y_max > 0)) throw ValidationError("write_box_svg: y_max must be > 0");

  Frame f;
  std::string out;
  open_svg(out, title, f.x1() + 40, f.y1() + 60);
  draw_axes(out, f, y_max);

  const double slot = f.width / static_cast<double>(labels.size());
  const auto ymap = [&](double v) {
    return f.y1() - f.height * std::clamp(v, 0.0, y_max) / y_max;
  };
  for (size_t i = 0; i < labels.size(); ++i) {
    const auto st = box_stats(samples[i]);
    const double cx = f.x0 + slot * (static_cast<double>(i) + 0.5);
    const double half = slot * 0.28;
    // whiskers
    out += "<line x1=\"" + fmt(cx) + "\" y1=\"" + fmt(ymap(st.lo)) +
           "\" x2=\"" + fmt(cx) + "\" y2=\"" + fmt(ymap(st.hi)) +
           "\" stroke=\"black\"/>\n";
    for (const double v : {st.lo, st.hi})
      out += "<line x1=\"" + fmt(cx - half * 0.6) + "\" y1=\"" + fmt(ymap(v)) +
             "\" x2=\"" + fmt(cx + half * 0.6) + "\" y2=\"" + fmt(ymap(v)) +
             "\" stroke=\"black\"/>\n";
    // box
    out += "<rect x=\"" + fmt(cx - half) + "\" y=\"" + fmt(ymap(st.q3)) +
           "\" width=\"" + fmt(2 * half) + "\" height=\"" +
           fmt(std::max(0.5, ymap(st.q1) - ymap(st.q3))) + "\" fill=\"" +
           palette(i) + "\" fill-opacity=\"0.55\" stroke=\"black\"/>\n";
    // median
    out += "<line x1=\"" + fmt(cx - half) + "\" y1=\"" + fmt(ymap(st.median)) +
           "\" x2=\"" + fmt(cx + half) + "\" y2=\"" + fmt(ymap(st.median)) +
           "\" stroke=\"black\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + fmt(cx) + "\" y=\"" + fmt(f.y1() + 18) +
           "\" text-anchor=\"middle\">" + escape(labels[i]) + "</text>\n";
  }
  out += "</svg>\n";
  write_file(path, out);
}

}  // namespace mmgf
