#pragma once

// CSV and SVG artifacts for point clouds, diagrams and flow trajectories.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "phflow/complex.hpp"
#include "phflow/errors.hpp"
#include "phflow/persistence.hpp"
#include "phflow/transport.hpp"

namespace phflow::io {

namespace fs = std::filesystem;

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double value) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) return "nan";
  return std::string(buf, end);
}

inline double parse_double(const std::string& text, const std::string& context) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  while (first < last && (*first == ' ' || *first == '\t')) ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\t' || last[-1] == '\r')) --last;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) throw Error(ErrorKind::invalid_input, context + ": '" + text + "' is not a number");
  return value;
}

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error(ErrorKind::io, "failed writing " + path.string());
}

inline void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create directory " + dir.string() + ": " + ec.message());
}

// ---- point clouds -------------------------------------------------------------------

/// Header `x,y[,z...]`, one point per row.
inline std::string point_cloud_csv(const PointCloud& cloud) {
  static const char* names[] = {"x", "y", "z", "w"};
  std::string out;
  for (std::size_t k = 0; k < cloud.dim(); ++k) {
    if (k) out += ',';
    out += k < 4 ? names[k] : "x" + std::to_string(k);
  }
  out += '\n';
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto p = cloud.point(i);
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (k) out += ',';
      out += format_double(p[k]);
    }
    out += '\n';
  }
  return out;
}

inline PointCloud parse_point_cloud_csv(std::istream& in, const std::string& source = "input") {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::invalid_input, source + ": missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::size_t dim = split(line, ',').size();
  if (dim == 0 || line.empty()) throw Error(ErrorKind::invalid_input, source + ": empty header");
  std::vector<double> coords;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto fields = split(line, ',');
    const std::string where = source + ":" + std::to_string(line_no);
    if (fields.size() != dim)
      throw Error(ErrorKind::invalid_input, where + ": expected " + std::to_string(dim) + " columns");
    for (const auto& f : fields) coords.push_back(parse_double(f, where));
  }
  if (coords.empty()) throw Error(ErrorKind::invalid_input, source + ": no points");
  return PointCloud(dim, std::move(coords));
}

inline PointCloud read_point_cloud_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  return parse_point_cloud_csv(in, path.string());
}

// ---- diagrams -----------------------------------------------------------------------

inline constexpr const char* kDiagramHeader = "birth,death,birth_simplex,death_simplex";

inline std::string diagram_csv(const PersistenceDiagram& dgm) {
  std::string out = std::string(kDiagramHeader) + '\n';
  for (const auto& p : dgm.points) {
    out += format_double(p.birth) + ',' + format_double(p.death) + ',' + std::to_string(p.birth_simplex) + ',' +
           std::to_string(p.death_simplex) + '\n';
  }
  return out;
}

inline PersistenceDiagram parse_diagram_csv(std::istream& in, int degree, const std::string& source = "diagram") {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::invalid_input, source + ": missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kDiagramHeader) throw Error(ErrorKind::invalid_input, source + ": unexpected header '" + line + "'");
  PersistenceDiagram dgm;
  dgm.degree = degree;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    const std::string where = source + ":" + std::to_string(line_no);
    if (fields.size() != 4) throw Error(ErrorKind::invalid_input, where + ": expected 4 columns");
    DiagramPoint p;
    p.birth = parse_double(fields[0], where);
    p.death = parse_double(fields[1], where);
    p.birth_simplex = static_cast<Index>(parse_double(fields[2], where));
    p.death_simplex = static_cast<Index>(parse_double(fields[3], where));
    dgm.points.push_back(p);
  }
  return dgm;
}

inline std::string points2_csv(const std::vector<Point2>& points) {
  std::string out = "birth,death\n";
  for (const auto& p : points) out += format_double(p[0]) + ',' + format_double(p[1]) + '\n';
  return out;
}

// ---- SVG ----------------------------------------------------------------------------

/// Scatter plot on a fixed 600 x 600 canvas with autoscaled axes.
class SvgScatter {
 public:
  static constexpr double kSize = 600.0;
  static constexpr double kMargin = 50.0;

  SvgScatter(std::string title, double xmin, double xmax, double ymin, double ymax, bool equal_aspect)
      : title_(std::move(title)) {
    if (!(xmax > xmin)) {
      xmin -= 0.5;
      xmax += 0.5;
    }
    if (!(ymax > ymin)) {
      ymin -= 0.5;
      ymax += 0.5;
    }
    if (equal_aspect) {
      const double span = std::max(xmax - xmin, ymax - ymin);
      const double cx = 0.5 * (xmin + xmax), cy = 0.5 * (ymin + ymax);
      xmin = cx - span / 2;
      xmax = cx + span / 2;
      ymin = cy - span / 2;
      ymax = cy + span / 2;
    }
    const double pad_x = 0.05 * (xmax - xmin), pad_y = 0.05 * (ymax - ymin);
    x0_ = xmin - pad_x;
    x1_ = xmax + pad_x;
    y0_ = ymin - pad_y;
    y1_ = ymax + pad_y;
  }

  double px(double x) const { return kMargin + (x - x0_) / (x1_ - x0_) * (kSize - 2 * kMargin); }
  double py(double y) const { return kSize - kMargin - (y - y0_) / (y1_ - y0_) * (kSize - 2 * kMargin); }

  void points(const std::vector<Point2>& pts, const char* color, double radius = 3.0) {
    for (const auto& p : pts)
      body_ += "<circle cx=\"" + num(px(p[0])) + "\" cy=\"" + num(py(p[1])) + "\" r=\"" + num(radius) +
               "\" fill=\"" + color + "\" fill-opacity=\"0.8\"/>\n";
  }

  /// The line y = x clipped to the plotting window.
  void diagonal() {
    const double lo = std::max(x0_, y0_), hi = std::min(x1_, y1_);
    if (!(hi > lo)) return;
    body_ += "<line x1=\"" + num(px(lo)) + "\" y1=\"" + num(py(lo)) + "\" x2=\"" + num(px(hi)) + "\" y2=\"" +
             num(py(hi)) + "\" stroke=\"#888\" stroke-dasharray=\"6,4\"/>\n";
  }

  std::string str(const char* xlabel, const char* ylabel) const {
    std::string out =
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"600\" viewBox=\"0 0 600 600\">\n"
        "<rect width=\"600\" height=\"600\" fill=\"white\"/>\n";
    const double lo = kMargin, hi = kSize - kMargin;
    out += "<rect x=\"" + num(lo) + "\" y=\"" + num(lo) + "\" width=\"" + num(hi - lo) + "\" height=\"" + num(hi - lo) +
           "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
      const double fx = x0_ + (x1_ - x0_) * i / 4.0;
      const double fy = y0_ + (y1_ - y0_) * i / 4.0;
      out += "<text x=\"" + num(px(fx)) + "\" y=\"" + num(hi + 18) + "\" font-size=\"11\" text-anchor=\"middle\">" +
             num(fx) + "</text>\n";
      out += "<text x=\"" + num(lo - 6) + "\" y=\"" + num(py(fy) + 4) + "\" font-size=\"11\" text-anchor=\"end\">" +
             num(fy) + "</text>\n";
    }
    out += "<text x=\"300\" y=\"30\" font-size=\"16\" text-anchor=\"middle\">" + title_ + "</text>\n";
    out += "<text x=\"300\" y=\"590\" font-size=\"13\" text-anchor=\"middle\">" + std::string(xlabel) + "</text>\n";
    out += "<text x=\"14\" y=\"300\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 14 300)\">" +
           std::string(ylabel) + "</text>\n";
    out += body_;
    out += "</svg>\n";
    return out;
  }

 private:
  static std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
  }

  std::string title_;
  double x0_ = 0, x1_ = 1, y0_ = 0, y1_ = 1;
  std::string body_;
};

inline std::string cloud_svg(const PointCloud& cloud, const std::string& title) {
  std::vector<Point2> pts;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto p = cloud.point(i);
    pts.push_back({p[0], p.size() > 1 ? p[1] : 0.0});
  }
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  if (!pts.empty()) {
    xmin = xmax = pts[0][0];
    ymin = ymax = pts[0][1];
  }
  for (const auto& p : pts) {
    xmin = std::min(xmin, p[0]);
    xmax = std::max(xmax, p[0]);
    ymin = std::min(ymin, p[1]);
    ymax = std::max(ymax, p[1]);
  }
  SvgScatter plot(title, xmin, xmax, ymin, ymax, true);
  plot.points(pts, "#1f77b4");
  return plot.str("x", "y");
}

/// Diagram points in blue, targets (if any) in red, and the diagonal.
inline std::string diagram_svg(const PersistenceDiagram& dgm, const std::vector<Point2>& targets, const std::string& title) {
  std::vector<Point2> pts;
  for (const auto& p : dgm.points) pts.push_back({p.birth, p.death});
  double hi = 0.0;
  for (const auto& p : pts) hi = std::max({hi, p[0], p[1]});
  for (const auto& p : targets) hi = std::max({hi, p[0], p[1]});
  if (!(hi > 0.0)) hi = 1.0;
  SvgScatter plot(title, 0.0, hi, 0.0, hi, true);
  plot.diagonal();
  plot.points(targets, "#d62728", 2.5);
  plot.points(pts, "#1f77b4", 3.0);
  return plot.str("birth", "death");
}

}  // namespace phflow::io
