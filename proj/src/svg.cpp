#include "consensus/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "consensus/errors.hpp"

namespace consensus::svg {

namespace {

const char* const kPalette[] = {"#1b6ca8", "#c0392b", "#27ae60", "#8e44ad",
                                "#d35400", "#16a085", "#7f8c8d", "#2c3e50"};
constexpr int kPaletteSize = 8;
constexpr double kMarginLeft = 64, kMarginRight = 16, kMarginTop = 40, kMarginBottom = 44;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

struct Frame {
  double x0, x1, y0, y1;  // data ranges
  double px0, px1, py0, py1;  // pixel ranges (py0 is the bottom)

  double px(double x) const { return px0 + (x - x0) / (x1 - x0) * (px1 - px0); }
  double py(double y) const { return py0 - (y - y0) / (y1 - y0) * (py0 - py1); }
};

void open_document(std::ostringstream& out, const PlotOptions& opts) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opts.width << "\" height=\""
      << opts.height << "\" viewBox=\"0 0 " << opts.width << " " << opts.height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  if (!opts.title.empty())
    out << "<text x=\"" << opts.width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"15\">" << opts.title << "</text>\n";
}

void draw_axes(std::ostringstream& out, const Frame& f, const std::string& x_name,
               const std::string& y_name, bool log_y) {
  out << "<g stroke=\"#cccccc\" stroke-width=\"1\">\n";
  for (int k = 0; k <= 4; ++k) {
    const double gx = f.px0 + (f.px1 - f.px0) * k / 4.0;
    const double gy = f.py0 - (f.py0 - f.py1) * k / 4.0;
    out << "<line x1=\"" << num(gx) << "\" y1=\"" << num(f.py1) << "\" x2=\"" << num(gx)
        << "\" y2=\"" << num(f.py0) << "\"/>\n";
    out << "<line x1=\"" << num(f.px0) << "\" y1=\"" << num(gy) << "\" x2=\"" << num(f.px1)
        << "\" y2=\"" << num(gy) << "\"/>\n";
  }
  out << "</g>\n";
  out << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333333\">\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = f.x0 + (f.x1 - f.x0) * k / 4.0;
    const double yv = f.y0 + (f.y1 - f.y0) * k / 4.0;
    out << "<text x=\"" << num(f.px(xv)) << "\" y=\"" << num(f.py0 + 16)
        << "\" text-anchor=\"middle\">" << label(xv) << "</text>\n";
    out << "<text x=\"" << num(f.px0 - 6) << "\" y=\"" << num(f.py(yv) + 4)
        << "\" text-anchor=\"end\">" << (log_y ? "1e" + label(yv) : label(yv))
        << "</text>\n";
  }
  out << "<text x=\"" << num((f.px0 + f.px1) / 2) << "\" y=\"" << num(f.py0 + 34)
      << "\" text-anchor=\"middle\">" << x_name << "</text>\n";
  out << "<text x=\"" << num(f.px0 - 50) << "\" y=\"" << num(f.py1 - 8) << "\">" << y_name
      << "</text>\n";
  out << "</g>\n";
}

void draw_polyline(std::ostringstream& out, const Frame& f,
                   const std::vector<std::pair<double, double>>& points, const char* color) {
  out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
  for (const auto& [x, y] : points) out << num(f.px(x)) << "," << num(f.py(y)) << " ";
  out << "\"/>\n";
}

void draw_legend(std::ostringstream& out, const PlotOptions& opts,
                 const std::vector<std::string>& names) {
  out << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  double x = kMarginLeft + 8;
  for (size_t k = 0; k < names.size(); ++k) {
    const char* color = kPalette[k % kPaletteSize];
    out << "<rect x=\"" << num(x) << "\" y=\"" << num(kMarginTop - 10) << "\" width=\"10\" "
        << "height=\"10\" fill=\"" << color << "\"/>\n";
    out << "<text x=\"" << num(x + 14) << "\" y=\"" << num(kMarginTop) << "\">" << names[k]
        << "</text>\n";
    x += 14 + 9.0 * static_cast<double>(names[k].size()) + 14;
  }
  out << "</g>\n";
  (void)opts;
}

Frame make_frame(const PlotOptions& opts, double x0, double x1, double y0, double y1) {
  if (!(x1 > x0)) x1 = x0 + 1;
  if (!(y1 > y0)) {
    y0 -= 1;
    y1 += 1;
  }
  return Frame{x0, x1, y0, y1, kMarginLeft, opts.width - kMarginRight,
               opts.height - kMarginBottom, kMarginTop + 8};
}

}  // namespace

std::string render_states(const Trajectory<double>& traj, const PlotOptions& opts) {
  if (traj.samples.empty()) throw InvariantViolation("svg: trajectory has no samples");
  const Eigen::Index n = traj.samples.front().x.size();
  double y_min = traj.samples.front().x.minCoeff();
  double y_max = traj.samples.front().x.maxCoeff();
  for (const auto& s : traj.samples) {
    if (!s.x.allFinite()) continue;
    y_min = std::min(y_min, s.x.minCoeff());
    y_max = std::max(y_max, s.x.maxCoeff());
  }

  const Frame f = make_frame(opts, traj.samples.front().t, traj.samples.back().t, y_min, y_max);
  std::ostringstream out;
  open_document(out, opts);
  draw_axes(out, f, "t", "x", false);
  std::vector<std::string> names;
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<std::pair<double, double>> points;
    points.reserve(traj.samples.size());
    for (const auto& s : traj.samples)
      if (std::isfinite(s.x(i))) points.emplace_back(s.t, s.x(i));
    draw_polyline(out, f, points, kPalette[i % kPaletteSize]);
    names.push_back("x_" + std::to_string(i + 1));
  }
  draw_legend(out, opts, names);
  out << "</svg>\n";
  return out.str();
}

std::string render_disagreement_pair(const Trajectory<double>& a, const std::string& label_a,
                                     const Trajectory<double>& b, const std::string& label_b,
                                     const PlotOptions& opts) {
  if (a.samples.empty() || b.samples.empty())
    throw InvariantViolation("svg: trajectory has no samples");

  // Log scale with a floor so fully converged stretches stay drawable.
  const double floor_value = 1e-16;
  auto log_points = [&](const Trajectory<double>& t) {
    std::vector<std::pair<double, double>> points;
    points.reserve(t.samples.size());
    for (const auto& s : t.samples)
      if (std::isfinite(s.disagreement))
        points.emplace_back(s.t, std::log10(std::max(s.disagreement, floor_value)));
    return points;
  };
  const auto pa = log_points(a), pb = log_points(b);

  double x1 = 0, y0 = 0, y1 = -300;
  for (const auto* pts : {&pa, &pb})
    for (const auto& [x, y] : *pts) {
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }

  const Frame f = make_frame(opts, 0, x1, y0, y1);
  std::ostringstream out;
  open_document(out, opts);
  draw_axes(out, f, "t", "disagreement", true);
  draw_polyline(out, f, pa, kPalette[0]);
  draw_polyline(out, f, pb, kPalette[1]);
  draw_legend(out, opts, {label_a, label_b});
  out << "</svg>\n";
  return out.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << content;
}

}  // namespace consensus::svg
