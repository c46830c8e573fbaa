#pragma once

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include "dramdse/harness/curves.hpp"

namespace dramdse::harness {

namespace detail {

inline std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

inline std::string coord(double v) { return fmt("%.2f", v); }

inline std::string escape_xml(const std::string& s)
{
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

inline const char* mode_color(const std::string& mode, std::size_t fallback)
{
    if (mode == "marl_ppo") return "#1f77b4";
    if (mode == "sarl_ppo") return "#ff7f0e";
    if (mode == "sarl_sac") return "#2ca02c";
    if (mode == "tdm_ppo") return "#d62728";
    static const char* other[] = {"#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
    return other[fallback % 4];
}

template <typename T>
void push_unique(std::vector<T>& v, const T& x)
{
    if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
}

} // namespace detail

/// SVG of a curves table: one panel per (trace, objective), one line per
/// formulation at its best learning rate, mean across seeds with a shaded
/// 95% interval band. A series with a single point is drawn as a marker.
/// Output depends only on the input rows.
inline std::string plot_curves(const std::vector<CurveRow>& rows)
{
    if (rows.empty()) throw Error(ErrorKind::ParseError, "curves table has no rows");
    using detail::coord;
    const auto groups = group_curves(rows);
    const auto summary = summarize(rows);
    std::vector<std::string> traces, objectives;
    for (const auto& g : groups) {
        detail::push_unique(traces, g.trace);
        detail::push_unique(objectives, g.objective);
    }
    constexpr double kW = 440, kH = 300, kLeft = 64, kRight = 16, kTop = 34, kBottom = 44;
    const double width = kW * static_cast<double>(objectives.size());
    const double height = kH * static_cast<double>(traces.size());

    std::string svg = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + coord(width) + "\" height=\"" + coord(height) +
           "\" viewBox=\"0 0 " + coord(width) + " " + coord(height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    for (std::size_t ti = 0; ti < traces.size(); ++ti)
        for (std::size_t oi = 0; oi < objectives.size(); ++oi) {
            const double ox = kW * static_cast<double>(oi), oy = kH * static_cast<double>(ti);
            struct Line {
                std::string mode;
                std::vector<SeriesPoint> pts;
            };
            std::vector<Line> lines;
            for (std::size_t gi = 0; gi < groups.size(); ++gi) {
                const auto& g = groups[gi];
                if (g.trace != traces[ti] || g.objective != objectives[oi]) continue;
                lines.push_back({g.mode, series(g, summary[gi].best_learning_rate)});
            }
            if (lines.empty()) continue;
            double xmax = 0, ymin = 0, ymax = 0;
            bool first = true;
            for (const auto& l : lines)
                for (const auto& p : l.pts) {
                    xmax = std::max(xmax, static_cast<double>(p.step));
                    ymin = first ? p.across_seeds.low : std::min(ymin, p.across_seeds.low);
                    ymax = first ? p.across_seeds.high : std::max(ymax, p.across_seeds.high);
                    first = false;
                }
            if (xmax <= 0) xmax = 1;
            if (ymax - ymin < 1e-12) {
                ymin -= 1;
                ymax += 1;
            } else {
                const double pad = 0.05 * (ymax - ymin);
                ymin -= pad;
                ymax += pad;
            }
            const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
            auto X = [&](double v) { return ox + kLeft + v / xmax * pw; };
            auto Y = [&](double v) { return oy + kTop + (1.0 - (v - ymin) / (ymax - ymin)) * ph; };

            svg += "<g>\n";
            svg += "<text x=\"" + coord(ox + kW / 2) + "\" y=\"" + coord(oy + 18) + "\" text-anchor=\"middle\" font-size=\"13\">" +
                   detail::escape_xml(traces[ti] + " / " + objectives[oi]) + "</text>\n";
            svg += "<rect x=\"" + coord(ox + kLeft) + "\" y=\"" + coord(oy + kTop) + "\" width=\"" + coord(pw) +
                   "\" height=\"" + coord(ph) + "\" fill=\"none\" stroke=\"#333\"/>\n";
            for (int k = 0; k <= 4; ++k) {
                const double xv = xmax * k / 4.0, yv = ymin + (ymax - ymin) * k / 4.0;
                svg += "<text x=\"" + coord(X(xv)) + "\" y=\"" + coord(oy + kTop + ph + 14) +
                       "\" text-anchor=\"middle\">" + detail::fmt("%g", xv) + "</text>\n";
                svg += "<text x=\"" + coord(ox + kLeft - 4) + "\" y=\"" + coord(Y(yv) + 4) + "\" text-anchor=\"end\">" +
                       detail::fmt("%.3g", yv) + "</text>\n";
            }
            svg += "<text x=\"" + coord(ox + kLeft + pw / 2) + "\" y=\"" + coord(oy + kH - 8) +
                   "\" text-anchor=\"middle\">environment steps</text>\n";
            svg += "<text transform=\"translate(" + coord(ox + 14) + " " + coord(oy + kTop + ph / 2) +
                   ") rotate(-90)\" text-anchor=\"middle\">mean episode return</text>\n";

            for (std::size_t li = 0; li < lines.size(); ++li) {
                const auto& l = lines[li];
                const char* color = detail::mode_color(l.mode, li);
                if (l.pts.size() == 1) {
                    const auto& p = l.pts.front();
                    svg += "<line x1=\"" + coord(X(static_cast<double>(p.step))) + "\" y1=\"" + coord(Y(p.across_seeds.low)) +
                           "\" x2=\"" + coord(X(static_cast<double>(p.step))) + "\" y2=\"" + coord(Y(p.across_seeds.high)) +
                           "\" stroke=\"" + color + "\"/>\n";
                    svg += "<circle cx=\"" + coord(X(static_cast<double>(p.step))) + "\" cy=\"" +
                           coord(Y(p.across_seeds.mean)) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
                } else {
                    std::string band, line;
                    for (const auto& p : l.pts) band += coord(X(static_cast<double>(p.step))) + "," + coord(Y(p.across_seeds.high)) + " ";
                    for (auto it = l.pts.rbegin(); it != l.pts.rend(); ++it)
                        band += coord(X(static_cast<double>(it->step))) + "," + coord(Y(it->across_seeds.low)) + " ";
                    for (const auto& p : l.pts) line += coord(X(static_cast<double>(p.step))) + "," + coord(Y(p.across_seeds.mean)) + " ";
                    band.pop_back();
                    line.pop_back();
                    svg += "<polygon points=\"" + band + "\" fill=\"" + color + "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
                    svg += "<polyline points=\"" + line + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\"/>\n";
                }
                const double ly = oy + kTop + 12 + 14 * static_cast<double>(li);
                svg += "<rect x=\"" + coord(ox + kLeft + 8) + "\" y=\"" + coord(ly - 8) + "\" width=\"10\" height=\"10\" fill=\"" +
                       color + "\"/>\n";
                svg += "<text x=\"" + coord(ox + kLeft + 22) + "\" y=\"" + coord(ly) + "\">" + detail::escape_xml(l.mode) + "</text>\n";
            }
            svg += "</g>\n";
        }
    svg += "</svg>\n";
    return svg;
}

} // namespace dramdse::harness
