#include "moddisc/svg.hpp"

#include <algorithm>
#include <cstdio>

#include "moddisc/error.hpp"

namespace moddisc {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 200.0;
constexpr double kLeft = 40.0;
constexpr double kRight = 10.0;
constexpr double kTop = 20.0;
constexpr double kBottom = 25.0;

std::string fmt(const char* f, double a, double b) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string plot_svg(const std::vector<std::pair<std::string, ModSignal>>& curves) {
  if (curves.empty()) throw ConfigError("plot: no curves given");
  const double total_h = kHeight * static_cast<double>(curves.size());
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 " +
                    fmt("%.0f", total_h, 0) + "\" width=\"800\" height=\"" + fmt("%.0f", total_h, 0) +
                    "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const auto& [name, sig] = curves[c];
    if (sig.values.empty()) throw ValidationError("plot: curve '" + name + "' is empty");
    const double y0 = kHeight * static_cast<double>(c);
    const double duration = sig.duration();
    svg += "<g transform=\"translate(0," + fmt("%.0f", y0, 0) + ")\">\n";
    svg += "<rect x=\"" + fmt("%.1f", kLeft, 0) + "\" y=\"" + fmt("%.1f", kTop, 0) + "\" width=\"" +
           fmt("%.1f", pw, 0) + "\" height=\"" + fmt("%.1f", ph, 0) +
           "\" fill=\"none\" stroke=\"#888\"/>\n";
    svg += "<text x=\"" + fmt("%.1f", kLeft, 0) + "\" y=\"14\">" + escape(name) + "</text>\n";
    for (double v : {0.0, 0.5, 1.0}) {
      const double y = kTop + (1.0 - v) * ph;
      svg += "<text x=\"4\" y=\"" + fmt("%.1f", y + 4.0, 0) + "\">" + fmt("%.1f", v, 0) + "</text>\n";
    }
    for (int i = 0; i <= 4; ++i) {
      const double frac = i / 4.0;
      svg += "<text x=\"" + fmt("%.1f", kLeft + frac * pw - 8.0, 0) + "\" y=\"" +
             fmt("%.1f", kTop + ph + 16.0, 0) + "\">" + fmt("%.2fs", frac * duration, 0) + "</text>\n";
    }
    svg += "<path fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.2\" d=\"";
    const std::size_t n = sig.values.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double x = kLeft + (n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0) * pw;
      const double y = kTop + (1.0 - std::clamp(sig.values[i], 0.0, 1.0)) * ph;
      svg += (i == 0 ? "M" : " L") + fmt("%.2f,%.2f", x, y);
    }
    svg += "\"/>\n</g>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace moddisc
