#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace reso::cli {

namespace {

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

void write_scatter_svg(std::ostream& out, const std::vector<ScatterSeries>& series, const std::string& title) {
    constexpr double W = 640, H = 480, L = 70, R = 170, T = 40, B = 50;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series)
        for (const auto& p : s.points) {
            xmin = std::min(xmin, p.real());
            xmax = std::max(xmax, p.real());
            ymin = std::min(ymin, p.imag());
            ymax = std::max(ymax, p.imag());
        }
    if (xmin > xmax) xmin = 0, xmax = 1, ymin = -1, ymax = 0;
    auto pad = [](double& lo, double& hi) {
        const double span = hi - lo;
        const double m = span > 0 ? 0.08 * span : std::max(1e-3, 0.05 * std::abs(lo));
        lo -= m;
        hi += m;
    };
    pad(xmin, xmax);
    pad(ymin, ymax);
    auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };
    out.precision(6);
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << W << "\" height=\"" << H << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
        << escape(title) << "</text>\n";
    // frame and ticks
    out << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double x = xmin + (xmax - xmin) * i / 4.0, y = ymin + (ymax - ymin) * i / 4.0;
        out << "<text x=\"" << px(x) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
            << "font-size=\"10\">" << x << "</text>\n";
        out << "<text x=\"" << L - 6 << "\" y=\"" << py(y) + 3 << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
            << "font-size=\"10\">" << y << "</text>\n";
    }
    out << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"12\">Re kappa</text>\n";
    out << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" transform=\"rotate(-90 16 " << (T + H - B) / 2
        << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">Im kappa</text>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        for (const auto& p : s.points)
            out << "<circle cx=\"" << px(p.real()) << "\" cy=\"" << py(p.imag()) << "\" r=\"4\" "
                << (s.hollow ? "fill=\"none\" stroke=\"" + s.color + "\"" : "fill=\"" + s.color + "\"") << "/>\n";
        const double ly = T + 14 + 18.0 * static_cast<double>(k);
        out << "<circle cx=\"" << W - R + 16 << "\" cy=\"" << ly - 4 << "\" r=\"4\" "
            << (s.hollow ? "fill=\"none\" stroke=\"" + s.color + "\"" : "fill=\"" + s.color + "\"") << "/>\n";
        out << "<text x=\"" << W - R + 26 << "\" y=\"" << ly << "\" font-family=\"sans-serif\" font-size=\"11\">"
            << escape(s.label) << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace reso::cli
