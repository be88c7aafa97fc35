#include "pcd/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include <json.hpp>

#include "pcd/error.hpp"
#include "pcd/io.hpp"

namespace pcd {
namespace {

using nlohmann::json;

json point_json(const Point2& p) { return json::array({p.x(), p.y()}); }

Point2 point_from(const json& j) {
  require(j.is_array() && j.size() == 2, ErrorCode::Configuration,
          "plot data: points must be [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

// Fixed two-decimal formatting keeps the SVG byte-stable.
std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s = buf;
  if (s == "-0.00") s = "0.00";
  return s;
}

constexpr double kSize = 480.0;
constexpr double kPad = 40.0;
constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd",
                                    "#8c564b", "#e377c2", "#17becf", "#bcbd22"};

class Svg {
 public:
  Svg(double width, double height) {
    out_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) +
            "\" height=\"" + num(height) + "\" viewBox=\"0 0 " + num(width) + " " +
            num(height) + "\">\n";
    out_ += "<rect x=\"0\" y=\"0\" width=\"" + num(width) + "\" height=\"" + num(height) +
            "\" fill=\"white\"/>\n";
  }
  void line(double x1, double y1, double x2, double y2, const std::string& stroke,
            double width = 1.0) {
    out_ += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) +
            "\" y2=\"" + num(y2) + "\" stroke=\"" + stroke + "\" stroke-width=\"" +
            num(width) + "\"/>\n";
  }
  void rect(double x, double y, double w, double h, const std::string& fill,
            const std::string& extra = "") {
    out_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) +
            "\" height=\"" + num(h) + "\" fill=\"" + fill + "\"" + extra + "/>\n";
  }
  void circle(double cx, double cy, double r, const std::string& fill,
              const std::string& extra = "") {
    out_ += "<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"" + num(r) +
            "\" fill=\"" + fill + "\"" + extra + "/>\n";
  }
  void polyline(const std::vector<Point2>& pts, const std::string& stroke) {
    out_ += "<polyline fill=\"none\" stroke=\"" + stroke +
            "\" stroke-width=\"1.2\" stroke-opacity=\"0.7\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i) out_ += ' ';
      out_ += num(pts[i].x()) + "," + num(pts[i].y());
    }
    out_ += "\"/>\n";
  }
  void cross(double x, double y, double s) {
    out_ += "<g class=\"collision\">";
    out_ += "<line x1=\"" + num(x - s) + "\" y1=\"" + num(y - s) + "\" x2=\"" + num(x + s) +
            "\" y2=\"" + num(y + s) + "\" stroke=\"red\" stroke-width=\"2.00\"/>";
    out_ += "<line x1=\"" + num(x - s) + "\" y1=\"" + num(y + s) + "\" x2=\"" + num(x + s) +
            "\" y2=\"" + num(y - s) + "\" stroke=\"red\" stroke-width=\"2.00\"/>";
    out_ += "</g>\n";
  }
  void star(double x, double y, double s) {
    out_ += "<polygon class=\"velocity-violation\" fill=\"blue\" points=\"";
    for (int k = 0; k < 10; ++k) {
      const double r = (k % 2 == 0) ? s : 0.45 * s;
      const double a = -std::numbers::pi / 2 + k * std::numbers::pi / 5;
      if (k) out_ += ' ';
      out_ += num(x + r * std::cos(a)) + "," + num(y + r * std::sin(a));
    }
    out_ += "\"/>\n";
  }
  void text(double x, double y, const std::string& s, const std::string& anchor = "middle") {
    out_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) +
            "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"" + anchor + "\">" +
            s + "</text>\n";
  }
  std::string finish() { return out_ + "</svg>\n"; }

 private:
  std::string out_;
};

void check_navigation(const PlotData& d) {
  require(d.half_width > 0.0, ErrorCode::Configuration, "plot: workspace must be non-empty");
  for (const auto& tuple : d.tuples)
    for (const auto& traj : tuple)
      require(traj.size() % 2 == 0, ErrorCode::DimensionMismatch,
              "plot: trajectories must be planar (even flattened length)");
}

std::string render_navigation(const PlotData& d) {
  check_navigation(d);
  const double w = d.half_width;
  const double scale = (kSize - 2 * kPad) / (2 * w);
  auto X = [&](double x) { return kPad + (x + w) * scale; };
  auto Y = [&](double y) { return kSize - kPad - (y + w) * scale; };

  Svg svg(kSize, kSize);
  svg.rect(kPad, kPad, kSize - 2 * kPad, kSize - 2 * kPad, "none",
           " stroke=\"black\" stroke-width=\"1.00\"");
  for (double t : {-w, 0.0, w}) {
    svg.line(X(t), kSize - kPad, X(t), kSize - kPad + 4, "black");
    svg.text(X(t), kSize - kPad + 16, num(t));
    svg.line(kPad - 4, Y(t), kPad, Y(t), "black");
    svg.text(kPad - 6, Y(t) + 4, num(t), "end");
  }
  svg.text(kSize / 2, 20, "gamma = " + num(d.gamma));
  for (const auto& c : d.obstacles)
    svg.circle(X(c.center.x()), Y(c.center.y()), c.radius * scale, "#bbbbbb");

  SignedDistanceField field(d.obstacles);
  const double limit = d.v_max * d.dt * (1.0 + 1e-6);
  const double mark = std::max(3.0, d.robot_radius * scale);
  for (const auto& tuple : d.tuples) {
    for (std::size_t r = 0; r < tuple.size(); ++r) {
      std::vector<Point2> pts;
      if (r < d.starts.size()) pts.push_back({X(d.starts[r].x()), Y(d.starts[r].y())});
      for (Eigen::Index h = 0; h < horizon(tuple[r]); ++h) {
        const Point2 p = waypoint(tuple[r], h);
        pts.push_back({X(p.x()), Y(p.y())});
      }
      svg.polyline(pts, kPalette[r % std::size(kPalette)]);
    }
    for (std::size_t r = 0; r < tuple.size(); ++r) {
      for (Eigen::Index h = 0; h < horizon(tuple[r]); ++h) {
        const Point2 p = waypoint(tuple[r], h);
        bool collide = field.distance(p) <= d.robot_radius;
        for (std::size_t q = 0; q < tuple.size() && !collide; ++q)
          if (q != r && h < horizon(tuple[q]) &&
              (waypoint(tuple[q], h) - p).norm() <= 2 * d.robot_radius)
            collide = true;
        if (collide) svg.cross(X(p.x()), Y(p.y()), mark);
        Point2 prev;
        if (h > 0) prev = waypoint(tuple[r], h - 1);
        else if (r < d.starts.size()) prev = d.starts[r];
        else continue;
        if ((p - prev).norm() > limit) svg.star(X(p.x()), Y(p.y()), mark + 1);
      }
    }
  }
  for (std::size_t r = 0; r < d.starts.size(); ++r)
    svg.circle(X(d.starts[r].x()), Y(d.starts[r].y()), 4, "#2ca02c",
               " stroke=\"black\" stroke-width=\"0.50\"");
  for (std::size_t r = 0; r < d.goals.size(); ++r)
    svg.rect(X(d.goals[r].x()) - 4, Y(d.goals[r].y()) - 4, 8, 8, "#9467bd",
             " stroke=\"black\" stroke-width=\"0.50\"");
  return svg.finish();
}

std::string render_corridor(const PlotData& d) {
  require(d.corridor_length > 0.0 && d.block_lengths.size() == 2, ErrorCode::Configuration,
          "plot: corridor needs a positive length and two blocks");
  constexpr int kBins = 36;
  const double L = d.corridor_length;
  const double panel = (kSize - 3 * kPad) / 2;
  const double scale = (kSize - 2 * kPad) / L;
  auto X = [&](double x) { return kPad + x * scale; };

  Svg svg(kSize, kSize);
  svg.text(kSize / 2, 20, "gamma = " + num(d.gamma));
  const std::vector<double>* series[2] = {&d.first, &d.second};
  for (int b = 0; b < 2; ++b) {
    const double top = kPad + b * (panel + kPad);
    const double bottom = top + panel;
    const double half = 0.5 * d.block_lengths[b];
    svg.rect(X(half), top, (L - 2 * half) * scale, panel, "#eeeeee");
    svg.rect(kPad, top, kSize - 2 * kPad, panel, "none",
             " stroke=\"black\" stroke-width=\"1.00\"");
    svg.line(X(0), bottom, X(L), bottom, "red", 2.0);
    for (double t : {0.0, 0.5 * L, L}) {
      svg.line(X(t), bottom, X(t), bottom + 4, "black");
      svg.text(X(t), bottom + 16, num(t));
    }
    std::vector<int> counts(kBins, 0);
    for (double v : *series[b]) {
      const int k = static_cast<int>(std::floor(v / L * kBins));
      if (k >= 0 && k < kBins) ++counts[k];
      else if (v == L) ++counts[kBins - 1];
    }
    const int peak = std::max(1, *std::max_element(counts.begin(), counts.end()));
    const double bw = L / kBins * scale;
    for (int k = 0; k < kBins; ++k) {
      if (counts[k] == 0) continue;
      const double h = (panel - 10) * counts[k] / peak;
      svg.rect(X(k * L / kBins), bottom - h, bw, h, kPalette[b], " fill-opacity=\"0.8\"");
    }
    svg.text(kPad + 4, top + 14, b == 0 ? "block 1" : "block 2", "start");
  }
  return svg.finish();
}

}  // namespace

std::string plot_data_to_json(const PlotData& d) {
  json j;
  j["gamma"] = d.gamma;
  if (d.kind == PlotData::Kind::Corridor) {
    j["kind"] = "corridor";
    j["corridor_length"] = d.corridor_length;
    j["block_lengths"] = d.block_lengths;
    j["first"] = d.first;
    j["second"] = d.second;
    return j.dump(1) + "\n";
  }
  j["kind"] = "navigation";
  j["half_width"] = d.half_width;
  j["robot_radius"] = d.robot_radius;
  j["v_max"] = d.v_max;
  j["dt"] = d.dt;
  j["obstacles"] = json::array();
  for (const auto& c : d.obstacles)
    j["obstacles"].push_back(json::array({c.center.x(), c.center.y(), c.radius}));
  j["starts"] = json::array();
  for (const auto& p : d.starts) j["starts"].push_back(point_json(p));
  j["goals"] = json::array();
  for (const auto& p : d.goals) j["goals"].push_back(point_json(p));
  j["tuples"] = json::array();
  for (const auto& tuple : d.tuples) {
    json t = json::array();
    for (const auto& traj : tuple)
      t.push_back(std::vector<double>(traj.data(), traj.data() + traj.size()));
    j["tuples"].push_back(std::move(t));
  }
  return j.dump(1) + "\n";
}

PlotData plot_data_from_json(const std::string& text) {
  PlotData d;
  try {
    const json j = json::parse(text);
    const std::string kind = j.at("kind").get<std::string>();
    d.gamma = j.value("gamma", 0.0);
    if (kind == "corridor") {
      d.kind = PlotData::Kind::Corridor;
      d.corridor_length = j.at("corridor_length").get<double>();
      d.block_lengths = j.at("block_lengths").get<std::vector<double>>();
      d.first = j.at("first").get<std::vector<double>>();
      d.second = j.at("second").get<std::vector<double>>();
      return d;
    }
    require(kind == "navigation", ErrorCode::Configuration,
            "plot data: unknown kind '" + kind + "'");
    d.kind = PlotData::Kind::Navigation;
    d.half_width = j.at("half_width").get<double>();
    d.robot_radius = j.at("robot_radius").get<double>();
    d.v_max = j.at("v_max").get<double>();
    d.dt = j.at("dt").get<double>();
    for (const auto& o : j.at("obstacles")) {
      require(o.is_array() && o.size() == 3, ErrorCode::Configuration,
              "plot data: obstacles must be [x, y, radius]");
      d.obstacles.push_back({{o[0].get<double>(), o[1].get<double>()}, o[2].get<double>()});
    }
    for (const auto& p : j.at("starts")) d.starts.push_back(point_from(p));
    for (const auto& p : j.at("goals")) d.goals.push_back(point_from(p));
    for (const auto& t : j.at("tuples")) {
      std::vector<Eigen::VectorXd> tuple;
      for (const auto& traj : t) {
        const auto v = traj.get<std::vector<double>>();
        tuple.push_back(Eigen::Map<const Eigen::VectorXd>(v.data(), Eigen::Index(v.size())));
      }
      d.tuples.push_back(std::move(tuple));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::Configuration, std::string("plot data: ") + e.what());
  }
  return d;
}

std::string render_svg(const PlotData& data) {
  return data.kind == PlotData::Kind::Corridor ? render_corridor(data)
                                               : render_navigation(data);
}

void emit_plot(const PlotData& data, const std::filesystem::path& path) {
  write_file_atomic(path, render_svg(data));
}

}  // namespace pcd
