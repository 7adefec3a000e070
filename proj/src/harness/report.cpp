#include "gcb/harness/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "gcb/errors.hpp"
#include "gcb/harness/config.hpp"

namespace gcb::harness {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  return f;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

/// Minimal SVG canvas with a linear plot area.
class Svg {
 public:
  Svg(double x0, double x1, double y0, double y1) : x0_(x0), x1_(x1 > x0 ? x1 : x0 + 1), y0_(y0), y1_(y1 > y0 ? y1 : y0 + 1) {}

  double px(double x) const { return kLeft + (x - x0_) / (x1_ - x0_) * kPlotW; }
  double py(double y) const { return kTop + kPlotH - (y - y0_) / (y1_ - y0_) * kPlotH; }

  void polyline(const std::vector<double>& xs, const std::vector<double>& ys, const std::string& colour,
                const char* dash = nullptr) {
    body_ << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\"";
    if (dash) body_ << " stroke-dasharray=\"" << dash << "\"";
    body_ << " points=\"";
    for (std::size_t k = 0; k < xs.size(); ++k)
      if (std::isfinite(ys[k])) body_ << short_num(px(xs[k])) << ',' << short_num(py(ys[k])) << ' ';
    body_ << "\"/>\n";
  }

  void band(const std::vector<double>& xs, const std::vector<double>& lo, const std::vector<double>& hi,
            const std::string& colour) {
    body_ << "<polygon fill=\"" << colour << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
    for (std::size_t k = 0; k < xs.size(); ++k) body_ << short_num(px(xs[k])) << ',' << short_num(py(hi[k])) << ' ';
    for (std::size_t k = xs.size(); k-- > 0;) body_ << short_num(px(xs[k])) << ',' << short_num(py(lo[k])) << ' ';
    body_ << "\"/>\n";
  }

  void marker(double x, double y, double se, const std::string& colour) {
    body_ << "<line x1=\"" << short_num(px(x)) << "\" y1=\"" << short_num(py(y - se)) << "\" x2=\""
          << short_num(px(x)) << "\" y2=\"" << short_num(py(y + se)) << "\" stroke=\"" << colour << "\"/>\n";
    body_ << "<circle cx=\"" << short_num(px(x)) << "\" cy=\"" << short_num(py(y)) << "\" r=\"3\" fill=\"" << colour
          << "\"/>\n";
  }

  void legend(const std::string& text, const std::string& colour, const char* dash = nullptr) {
    const double y = kTop + 14.0 * static_cast<double>(legend_rows_++) + 8;
    const double x = kLeft + kPlotW + 12;
    body_ << "<line x1=\"" << x << "\" y1=\"" << y << "\" x2=\"" << x + 20 << "\" y2=\"" << y << "\" stroke=\""
          << colour << "\" stroke-width=\"1.5\"";
    if (dash) body_ << " stroke-dasharray=\"" << dash << "\"";
    body_ << "/>\n";
    body_ << "<text x=\"" << x + 26 << "\" y=\"" << y + 4 << "\" font-size=\"11\">" << text << "</text>\n";
  }

  void write(const std::filesystem::path& path, const std::string& title, const std::string& xlabel,
             const std::string& ylabel, const std::vector<double>& xticks) const {
    auto f = open_out(path);
    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\">\n";
    f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    f << "<text x=\"" << kLeft << "\" y=\"20\" font-size=\"13\">" << title << "</text>\n";
    f << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kPlotW << "\" height=\"" << kPlotH
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double t : xticks) {
      f << "<text x=\"" << short_num(px(t)) << "\" y=\"" << kTop + kPlotH + 16
        << "\" font-size=\"10\" text-anchor=\"middle\">" << short_num(t) << "</text>\n";
    }
    for (int k = 0; k <= 4; ++k) {
      const double v = y0_ + (y1_ - y0_) * k / 4.0;
      f << "<text x=\"" << kLeft - 6 << "\" y=\"" << short_num(py(v) + 3)
        << "\" font-size=\"10\" text-anchor=\"end\">" << short_num(v) << "</text>\n";
    }
    f << "<text x=\"" << kLeft + kPlotW / 2 << "\" y=\"" << kHeight - 8 << "\" font-size=\"12\" text-anchor=\"middle\">"
      << xlabel << "</text>\n";
    f << "<text transform=\"translate(14," << kTop + kPlotH / 2 << ") rotate(-90)\" font-size=\"12\" "
      << "text-anchor=\"middle\">" << ylabel << "</text>\n";
    f << body_.str() << "</svg>\n";
    if (!f) throw IoError("write failed: " + path.string());
  }

 private:
  static constexpr double kWidth = 1000, kHeight = 440, kLeft = 70, kTop = 34, kPlotW = 520, kPlotH = 350;
  double x0_, x1_, y0_, y1_;
  std::ostringstream body_;
  int legend_rows_ = 0;
};

std::string label(const PointResult& p) {
  std::ostringstream s;
  s << to_string(p.summary.agent) << " d=" << p.summary.d << " L=" << p.summary.L << " T=" << p.summary.T << " ["
    << p.hash.substr(0, 8) << "]";
  return s.str();
}

std::vector<double> ticks(double lo, double hi) {
  std::vector<double> out;
  for (int k = 0; k <= 4; ++k) out.push_back(lo + (hi - lo) * k / 4.0);
  return out;
}

}  // namespace

void write_traces_csv(std::ostream& out, const std::string& hash, const std::vector<RegretTrace>& traces,
                      bool header) {
  if (header) out << "config_hash,seed,replicate,t,a_vec,reward,inst_regret,cum_regret\n";
  for (const auto& tr : traces) {
    for (std::size_t t = 0; t < tr.reward.size(); ++t) {
      out << hash << ',' << tr.seed << ',' << tr.replicate << ',' << t + 1 << ',';
      const auto& a = tr.arm_values[t];
      for (std::size_t k = 0; k < a.size(); ++k) out << (k ? ";" : "") << num(a[k]);
      out << ',' << num(tr.reward[t]) << ',' << num(tr.inst_regret[t]) << ',' << num(tr.cum_regret[t]) << '\n';
    }
  }
}

void write_summary_csv(std::ostream& out, const std::vector<PointResult>& points) {
  out << "config_hash,family,agent,d,L,T,replicates,mean_regret,se_regret,slope,bound_upper,bound_lower\n";
  for (const auto& p : points) {
    const auto& s = p.summary;
    out << p.hash << ',' << to_string(s.family) << ',' << to_string(s.agent) << ',' << s.d << ',' << s.L << ','
        << s.T << ',' << s.replicates << ',' << num(s.mean_final) << ',' << num(s.se_final) << ',' << num(s.slope)
        << ',' << num(s.bound_upper) << ',' << num(s.bound_lower) << '\n';
  }
}

void plot_regret_svg(const std::filesystem::path& path, const std::vector<PointResult>& points) {
  if (points.empty()) throw IoError("nothing to plot: empty summary");
  double tmax = 1, ymax = 0;
  for (const auto& p : points) {
    const auto& s = p.summary;
    tmax = std::max(tmax, static_cast<double>(s.mean_curve.size()));
    for (std::size_t t = 0; t < s.mean_curve.size(); ++t) ymax = std::max(ymax, s.mean_curve[t] + s.se_curve[t]);
  }
  if (ymax <= 0) ymax = 1;
  Svg svg(0, tmax, 0, ymax * 1.05);
  std::size_t colour = 0;
  for (const auto& p : points) {
    const auto& s = p.summary;
    const std::string c = kPalette[colour++ % std::size(kPalette)];
    const std::size_t T = s.mean_curve.size();
    // Thin long curves to about 400 vertices.
    const std::size_t stride = std::max<std::size_t>(1, T / 400);
    std::vector<double> xs, m, lo, hi;
    for (std::size_t t = 0; t < T; t += stride) {
      xs.push_back(static_cast<double>(t + 1));
      m.push_back(s.mean_curve[t]);
      lo.push_back(std::max(0.0, s.mean_curve[t] - s.se_curve[t]));
      hi.push_back(s.mean_curve[t] + s.se_curve[t]);
    }
    if (T && (T - 1) % stride) {
      xs.push_back(static_cast<double>(T));
      m.push_back(s.mean_curve.back());
      lo.push_back(std::max(0.0, s.mean_curve.back() - s.se_curve.back()));
      hi.push_back(s.mean_curve.back() + s.se_curve.back());
    }
    svg.band(xs, lo, hi, c);
    svg.polyline(xs, m, c);
    svg.legend(label(p), c);
    // The bounds describe the confidence-set algorithms, not the baselines.
    const bool own = s.agent == AgentKind::GcbTs || s.agent == AgentKind::GcbUcb;
    if (own && !s.bound_t.empty() && s.mean_final > 0) {
      std::vector<double> bt(s.bound_t.begin(), s.bound_t.end());
      auto overlay = [&](const std::vector<double>& curve, const char* name, const char* dash) {
        if (curve.empty() || !std::isfinite(curve.back()) || curve.back() <= 0) return;
        std::vector<double> ys;
        for (double v : curve) ys.push_back(v / curve.back() * s.mean_final);
        svg.polyline(bt, ys, c, dash);
        svg.legend(std::string(name) + " (shape, scaled to R(T))", c, dash);
      };
      overlay(s.bound_upper_curve, "upper bound", "6,4");
      overlay(s.bound_lower_curve, "lower bound", "2,3");
    }
  }
  svg.write(path, "Cumulative regret, config " + points.front().hash.substr(0, 12), "t", "R(t)", ticks(0, tmax));
}

void plot_scaling_svg(const std::filesystem::path& path, const std::vector<PointResult>& points, ScalingAxis axis) {
  if (points.empty()) throw IoError("nothing to plot: empty summary");
  // One series per (agent, T, other axis value).
  std::map<std::string, std::vector<const PointResult*>> series;
  double xmin = 1e300, xmax = -1e300, ymax = 0;
  for (const auto& p : points) {
    const auto& s = p.summary;
    std::ostringstream key;
    key << to_string(s.agent) << " T=" << s.T << (axis == ScalingAxis::D ? " L=" : " d=")
        << (axis == ScalingAxis::D ? s.L : s.d);
    series[key.str()].push_back(&p);
    const double x = axis == ScalingAxis::D ? s.d : s.L;
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymax = std::max(ymax, s.mean_final + s.se_final);
  }
  if (ymax <= 0) ymax = 1;
  const double pad = std::max(0.5, 0.05 * (xmax - xmin));
  Svg svg(xmin - pad, xmax + pad, 0, ymax * 1.05);
  std::size_t colour = 0;
  for (auto& [name, pts] : series) {
    const std::string c = kPalette[colour++ % std::size(kPalette)];
    std::sort(pts.begin(), pts.end(), [&](auto* a, auto* b) {
      return axis == ScalingAxis::D ? a->summary.d < b->summary.d : a->summary.L < b->summary.L;
    });
    std::vector<double> xs, ys;
    for (const auto* p : pts) {
      const double x = axis == ScalingAxis::D ? p->summary.d : p->summary.L;
      xs.push_back(x);
      ys.push_back(p->summary.mean_final);
      svg.marker(x, p->summary.mean_final, p->summary.se_final, c);
    }
    svg.polyline(xs, ys, c);
    svg.legend(name, c);
  }
  std::vector<double> xt;
  for (const auto& p : points) {
    const double x = axis == ScalingAxis::D ? p.summary.d : p.summary.L;
    if (std::find(xt.begin(), xt.end(), x) == xt.end()) xt.push_back(x);
  }
  const char* axis_name = axis == ScalingAxis::D ? "d" : "L";
  svg.write(path, std::string("R(T) against ") + axis_name + ", config " + points.front().hash.substr(0, 12), axis_name,
            "R(T)", xt);
}

std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig& base) {
  const std::vector<int> Ts = base.sweep_T.empty() ? std::vector<int>{base.horizon} : base.sweep_T;
  const std::vector<int> ds = base.sweep_d.empty() ? std::vector<int>{base.scm.d} : base.sweep_d;
  const std::vector<int> Ls = base.sweep_L.empty() ? std::vector<int>{base.scm.L} : base.sweep_L;
  const std::vector<AgentKind> as = base.sweep_agent.empty() ? std::vector<AgentKind>{base.agent} : base.sweep_agent;
  std::vector<ExperimentConfig> out;
  for (int T : Ts)
    for (int d : ds)
      for (int L : Ls)
        for (AgentKind a : as) {
          ExperimentConfig c = base;
          c.horizon = T;
          c.scm.d = d;
          c.scm.L = L;
          c.agent = a;
          c.sweep_T.clear();
          c.sweep_d.clear();
          c.sweep_L.clear();
          c.sweep_agent.clear();
          c.validate();
          out.push_back(std::move(c));
        }
  return out;
}

RunSummary run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  RunSummary result;
  result.out_dir = cfg.out_dir;
  std::error_code ec;
  std::filesystem::create_directories(result.out_dir, ec);
  if (ec) throw IoError("cannot create " + result.out_dir.string() + ": " + ec.message());
  {
    auto f = open_out(result.out_dir / "config.yaml");
    f << to_yaml(cfg);
  }

  auto traces = open_out(result.out_dir / "traces.csv");
  bool header = true;
  for (const auto& point : expand_sweep(cfg)) {
    if (stop_requested()) {
      result.interrupted = true;
      break;
    }
    PointResult p{point, config_hash(point), run_replicates(point), {}};
    if (static_cast<int>(p.traces.size()) < point.replicates) result.interrupted = true;
    if (p.traces.empty()) break;
    p.summary = summarize(point, p.traces);
    write_traces_csv(traces, p.hash, p.traces, header);
    header = false;
    traces.flush();
    result.points.push_back(std::move(p));
    if (result.interrupted) break;
  }
  if (header) write_traces_csv(traces, "", {}, true);
  if (!traces) throw IoError("write failed: traces.csv");

  {
    auto f = open_out(result.out_dir / "summary.csv");
    write_summary_csv(f, result.points);
    if (!f) throw IoError("write failed: summary.csv");
  }
  if (cfg.plots && !result.points.empty()) {
    plot_regret_svg(result.out_dir / "regret.svg", result.points);
    if (cfg.sweep_d.size() > 1) plot_scaling_svg(result.out_dir / "regret_vs_d.svg", result.points, ScalingAxis::D);
    if (cfg.sweep_L.size() > 1) plot_scaling_svg(result.out_dir / "regret_vs_L.svg", result.points, ScalingAxis::L);
  }
  return result;
}

}  // namespace gcb::harness
