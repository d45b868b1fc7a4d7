#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "crfmnes/harness.hpp"

namespace crfmnes::harness {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 170.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

constexpr const char* kColors[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e",
                                   "#8c564b"};

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string num(double x) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.setf(std::ios::fixed);
  os.precision(2);
  os << x;
  return os.str();
}

}  // namespace

std::string render_svg(std::span<const MetricRow> rows) {
  if (rows.empty()) throw std::invalid_argument("render_svg: no rows to plot");

  std::vector<std::string> series_order;
  std::map<std::string, std::vector<const MetricRow*>> series;
  double lam_min = 1e300, lam_max = -1e300;
  double log_min = 1e300, log_max = -1e300;
  for (const MetricRow& r : rows) {
    const std::string key = r.function + " (d=" + std::to_string(r.d) + ")";
    auto [it, inserted] = series.try_emplace(key);
    if (inserted) series_order.push_back(key);
    it->second.push_back(&r);
    lam_min = std::min(lam_min, static_cast<double>(r.lambda));
    lam_max = std::max(lam_max, static_cast<double>(r.lambda));
    if (r.sp_metric && *r.sp_metric > 0.0) {
      log_min = std::min(log_min, std::log10(*r.sp_metric));
      log_max = std::max(log_max, std::log10(*r.sp_metric));
    }
  }
  if (log_min > log_max) {
    log_min = 0.0;
    log_max = 1.0;
  }
  double y_lo = std::floor(log_min);
  double y_hi = std::ceil(log_max);
  if (y_hi <= y_lo) y_hi = y_lo + 1.0;
  double x_pad = (lam_max - lam_min) * 0.08;
  if (x_pad <= 0.0) x_pad = std::max(1.0, lam_min * 0.1);
  const double x_lo = lam_min - x_pad;
  const double x_hi = lam_max + x_pad;

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  // Failure markers sit in a band above the data area.
  const double band = 18.0;
  auto px = [&](double lambda) { return kLeft + (lambda - x_lo) / (x_hi - x_lo) * plot_w; };
  auto py = [&](double value) {
    return kTop + band + (y_hi - std::log10(value)) / (y_hi - y_lo) * (plot_h - band);
  };

  std::ostringstream svg;
  svg.imbue(std::locale::classic());
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\""
      << num(kHeight) << "\" viewBox=\"0 0 " << num(kWidth) << ' ' << num(kHeight) << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << num(kWidth) << "\" height=\"" << num(kHeight)
      << "\" fill=\"white\"/>\n"
      << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(plot_w)
      << "\" height=\"" << num(plot_h) << "\" fill=\"none\" stroke=\"black\"/>\n";

  svg << "<g class=\"y-axis\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (double k = y_lo; k <= y_hi + 1e-9; k += 1.0) {
    const double y = py(std::pow(10.0, k));
    svg << "<line x1=\"" << num(kLeft - 5) << "\" y1=\"" << num(y) << "\" x2=\""
        << num(kLeft + plot_w) << "\" y2=\"" << num(y) << "\" stroke=\"#dddddd\"/>\n"
        << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(y + 4)
        << "\" text-anchor=\"end\">1e" << static_cast<int>(k) << "</text>\n";
  }
  svg << "</g>\n";

  std::set<std::size_t> lambdas;
  for (const MetricRow& r : rows) lambdas.insert(r.lambda);
  svg << "<g class=\"x-axis\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (std::size_t lambda : lambdas) {
    const double x = px(static_cast<double>(lambda));
    svg << "<line x1=\"" << num(x) << "\" y1=\"" << num(kTop + plot_h) << "\" x2=\"" << num(x)
        << "\" y2=\"" << num(kTop + plot_h + 5) << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << num(x) << "\" y=\"" << num(kTop + plot_h + 18)
        << "\" text-anchor=\"middle\">" << lambda << "</text>\n";
  }
  svg << "</g>\n";

  svg << "<text x=\"" << num(kLeft + plot_w / 2) << "\" y=\"" << num(kHeight - 15)
      << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">"
         "population size</text>\n"
      << "<text x=\"18\" y=\"" << num(kTop + plot_h / 2)
      << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
         "transform=\"rotate(-90 18 "
      << num(kTop + plot_h / 2) << ")\">evaluations / success rate</text>\n";

  for (std::size_t s = 0; s < series_order.size(); ++s) {
    const char* color = kColors[s % std::size(kColors)];
    const auto& pts = series.at(series_order[s]);
    svg << "<g class=\"series\" data-name=\"" << xml_escape(series_order[s]) << "\">\n";

    std::string path;
    for (const MetricRow* r : pts) {
      if (!r->sp_metric) continue;
      path += path.empty() ? "M" : " L";
      path += num(px(static_cast<double>(r->lambda))) + "," + num(py(*r->sp_metric));
    }
    if (!path.empty())
      svg << "<path d=\"" << path << "\" fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"1.5\"/>\n";

    for (const MetricRow* r : pts) {
      const double x = px(static_cast<double>(r->lambda));
      if (r->sp_metric) {
        svg << "<circle class=\"point\" cx=\"" << num(x) << "\" cy=\"" << num(py(*r->sp_metric))
            << "\" r=\"4\" fill=\"" << color << "\"><title>lambda=" << r->lambda
            << " sp=" << format_double(*r->sp_metric) << " rate=" << format_double(r->success_rate)
            << "</title></circle>\n";
      } else {
        const double y = kTop + band / 2;
        svg << "<g class=\"failure\" stroke=\"" << color << "\" stroke-width=\"2\"><title>lambda="
            << r->lambda << " no successful trial</title>"
            << "<line x1=\"" << num(x - 5) << "\" y1=\"" << num(y - 5) << "\" x2=\"" << num(x + 5)
            << "\" y2=\"" << num(y + 5) << "\"/>"
            << "<line x1=\"" << num(x - 5) << "\" y1=\"" << num(y + 5) << "\" x2=\"" << num(x + 5)
            << "\" y2=\"" << num(y - 5) << "\"/></g>\n";
      }
    }
    svg << "</g>\n";

    const double ly = kTop + 14.0 + 18.0 * static_cast<double>(s);
    svg << "<g class=\"legend\" font-family=\"sans-serif\" font-size=\"11\">"
        << "<circle cx=\"" << num(kLeft + plot_w + 16) << "\" cy=\"" << num(ly - 4)
        << "\" r=\"4\" fill=\"" << color << "\"/>"
        << "<text x=\"" << num(kLeft + plot_w + 26) << "\" y=\"" << num(ly) << "\">"
        << xml_escape(series_order[s]) << "</text></g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void emit_plot(std::span<const MetricRow> rows, const std::filesystem::path& path) {
  const std::string svg = render_svg(rows);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << svg;
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace crfmnes::harness
