#include "binfilt/io.hpp"

#include "binfilt/util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace binfilt {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    // prefer the shortest representation that round-trips
    for (int prec = 1; prec <= 16; ++prec) {
        char cand[64];
        std::snprintf(cand, sizeof(cand), "%.*g", prec, v);
        double back = std::strtod(cand, nullptr);
        if (back == v) return cand;
    }
    return buf;
}

std::string to_csv(const std::vector<std::string>& header,
                   const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream out;
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << "\n";
    }
    return out.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgument("cannot open for writing: " + path);
    out << content;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void save_filtration(const std::string& path, const Filtration& f) {
    write_file(path, f.to_json().dump(2) + "\n");
}

Filtration load_filtration(const std::string& path) {
    return Filtration::from_json(nlohmann::json::parse(read_file(path)));
}

std::uint64_t json_hash(const nlohmann::json& j) { return fnv1a64(j.dump()); }

std::string svg_line_chart(const std::string& title, const std::vector<PlotSeries>& series,
                           bool logx, bool logy) {
    const double W = 640, H = 420, ML = 70, MR = 20, MT = 40, MB = 50;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    auto tx = [&](double x) { return logx ? std::log10(std::max(x, 1e-300)) : x; };
    auto ty = [&](double y) { return logy ? std::log10(std::max(y, 1e-300)) : y; };
    for (const PlotSeries& s : series)
        for (auto [x, y] : s.points) {
            xmin = std::min(xmin, tx(x));
            xmax = std::max(xmax, tx(x));
            ymin = std::min(ymin, ty(y));
            ymax = std::max(ymax, ty(y));
        }
    if (xmin > xmax) {
        xmin = 0;
        xmax = 1;
    }
    if (ymin > ymax) {
        ymin = 0;
        ymax = 1;
    }
    if (xmax - xmin < 1e-12) xmax = xmin + 1;
    if (ymax - ymin < 1e-12) ymax = ymin + 1;
    auto px = [&](double x) { return ML + (tx(x) - xmin) / (xmax - xmin) * (W - ML - MR); };
    auto py = [&](double y) { return H - MB - (ty(y) - ymin) / (ymax - ymin) * (H - MT - MB); };

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << title
        << "</text>\n";
    out << "<line x1=\"" << ML << "\" y1=\"" << H - MB << "\" x2=\"" << W - MR << "\" y2=\""
        << H - MB << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ML << "\" y1=\"" << MT << "\" x2=\"" << ML << "\" y2=\"" << H - MB
        << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        double fx = xmin + (xmax - xmin) * t / 4.0;
        double fy = ymin + (ymax - ymin) * t / 4.0;
        double lx = logx ? std::pow(10, fx) : fx;
        double ly = logy ? std::pow(10, fy) : fy;
        out << "<text x=\"" << ML + (W - ML - MR) * t / 4.0 << "\" y=\"" << H - MB + 18
            << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt_double(lx).substr(0, 8)
            << "</text>\n";
        out << "<text x=\"" << ML - 6 << "\" y=\"" << H - MB - (H - MT - MB) * t / 4.0 + 4
            << "\" text-anchor=\"end\" font-size=\"11\">" << fmt_double(ly).substr(0, 8)
            << "</text>\n";
    }
    int ci = 0;
    for (const PlotSeries& s : series) {
        const char* color = colors[ci++ % 6];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (auto [x, y] : s.points) out << px(x) << "," << py(y) << " ";
        out << "\"/>\n";
        out << "<text x=\"" << W - MR - 8 << "\" y=\"" << MT + 16 * ci
            << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << color << "\">" << s.label
            << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace binfilt
