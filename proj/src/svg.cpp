#include "dfc/svg.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace dfc {

namespace {

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

// round a span limit outward to a tidy tick value
double nice_num(double v) {
    if (v == 0.0) return 0.0;
    const double mag = std::pow(10.0, std::floor(std::log10(std::abs(v))));
    return std::ceil(std::abs(v) / mag) * mag * (v < 0 ? -1.0 : 1.0);
}

}  // namespace

void write_svg_plot(const std::string& path, const std::string& title,
                    const Vector& x, const std::vector<PlotSeries>& series) {
    if (x.size() < 2 || series.empty()) return;

    const double width = 720, height = 420;
    const double ml = 70, mr = 20, mt = 40, mb = 50;

    double ymin = std::numeric_limits<double>::max(), ymax = std::numeric_limits<double>::lowest();
    for (const auto& s : series) {
        ymin = std::min(ymin, s.y.minCoeff());
        ymax = std::max(ymax, s.y.maxCoeff());
    }
    if (ymin == ymax) { ymin -= 1.0; ymax += 1.0; }
    const double pad = 0.05 * (ymax - ymin);
    ymin = nice_num(ymin - pad);
    ymax = nice_num(ymax + pad);
    const double xmin = x[0], xmax = x[x.size() - 1];

    auto px = [&](double v) { return ml + (v - xmin) / (xmax - xmin) * (width - ml - mr); };
    auto py = [&](double v) { return height - mb - (v - ymin) / (ymax - ymin) * (height - mt - mb); };

    std::ofstream out(path + ".tmp");
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.precision(6);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
        << "' viewBox='0 0 " << width << " " << height << "'>\n"
        << "<rect width='100%' height='100%' fill='white'/>\n"
        << "<text x='" << width / 2 << "' y='22' text-anchor='middle' font-family='sans-serif' "
           "font-size='15'>" << title << "</text>\n"
        << "<rect x='" << ml << "' y='" << mt << "' width='" << width - ml - mr << "' height='"
        << height - mt - mb << "' fill='none' stroke='#444'/>\n";

    const int ticks = 5;
    for (int i = 0; i <= ticks; ++i) {
        const double tv = xmin + (xmax - xmin) * i / ticks;
        out << "<line x1='" << px(tv) << "' y1='" << height - mb << "' x2='" << px(tv) << "' y2='"
            << height - mb + 5 << "' stroke='#444'/>\n"
            << "<text x='" << px(tv) << "' y='" << height - mb + 20
            << "' text-anchor='middle' font-family='sans-serif' font-size='11'>" << tv
            << "</text>\n";
        const double yv = ymin + (ymax - ymin) * i / ticks;
        out << "<line x1='" << ml - 5 << "' y1='" << py(yv) << "' x2='" << ml << "' y2='" << py(yv)
            << "' stroke='#444'/>\n"
            << "<text x='" << ml - 8 << "' y='" << py(yv) + 4
            << "' text-anchor='end' font-family='sans-serif' font-size='11'>" << yv << "</text>\n";
        out << "<line x1='" << ml << "' y1='" << py(yv) << "' x2='" << width - mr << "' y2='"
            << py(yv) << "' stroke='#ddd' stroke-width='0.5'/>\n";
    }

    for (size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        out << "<polyline fill='none' stroke='" << kColors[si % 6] << "' stroke-width='1.5' points='";
        const int stride = std::max<int>(1, static_cast<int>(x.size()) / 2000);
        for (int i = 0; i < x.size(); i += stride) out << px(x[i]) << ',' << py(s.y[i]) << ' ';
        out << px(x[x.size() - 1]) << ',' << py(s.y[x.size() - 1]);
        out << "'/>\n";
        out << "<text x='" << width - mr - 8 << "' y='" << mt + 16 + 16 * si
            << "' text-anchor='end' font-family='sans-serif' font-size='12' fill='"
            << kColors[si % 6] << "'>" << s.name << "</text>\n";
    }
    out << "</svg>\n";
    out.close();
    std::filesystem::rename(path + ".tmp", path);
}

}  // namespace dfc
