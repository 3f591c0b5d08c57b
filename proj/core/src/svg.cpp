#include "svg.hpp"

#include <array>
#include <fmt/format.h>

namespace bridgewatch::detail {

std::string xml_escape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&#39;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num2(double v) {
    std::string s = fmt::format("{:.2f}", v);
    if (s == "-0.00") {
        s = "0.00";
    }
    return s;
}

std::string_view palette(std::size_t i) {
    static constexpr std::array<std::string_view, 10> colors = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2",
                                                                "#59a14f", "#edc948", "#b07aa1", "#ff9da7",
                                                                "#9c755f", "#bab0ac"};
    return colors[i % colors.size()];
}

Svg::Svg(std::string_view title) {
    out_ = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
        "font-family=\"sans-serif\">\n",
        kSvgWidth, kSvgHeight);
    out_ += fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n", kSvgWidth, kSvgHeight);
    text(kSvgWidth / 2.0, 28, title, 18, "middle", "title");
}

void Svg::rect(double x, double y, double w, double h, std::string_view fill, std::string_view cls) {
    out_ += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"", num2(x), num2(y), num2(w),
                        num2(h), fill);
    if (!cls.empty()) {
        out_ += fmt::format(" class=\"{}\"", cls);
    }
    out_ += "/>\n";
}

void Svg::line(double x1, double y1, double x2, double y2, std::string_view stroke, double width,
               std::string_view dash) {
    out_ += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"{}\"", num2(x1),
                        num2(y1), num2(x2), num2(y2), stroke, num2(width));
    if (!dash.empty()) {
        out_ += fmt::format(" stroke-dasharray=\"{}\"", dash);
    }
    out_ += "/>\n";
}

void Svg::text(double x, double y, std::string_view s, int size, std::string_view anchor, std::string_view cls) {
    out_ += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"{}\" text-anchor=\"{}\"", num2(x), num2(y), size, anchor);
    if (!cls.empty()) {
        out_ += fmt::format(" class=\"{}\"", cls);
    }
    out_ += fmt::format(">{}</text>\n", xml_escape(s));
}

void Svg::polyline(const std::string& points, std::string_view stroke, double width) {
    out_ += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{}\"/>\n", points, stroke,
                        num2(width));
}

void Svg::open_group(std::string_view cls) { out_ += fmt::format("<g class=\"{}\">\n", cls); }

void Svg::close_group() { out_ += "</g>\n"; }

void Svg::raw(std::string_view s) { out_ += s; }

std::string Svg::finish() {
    out_ += "</svg>\n";
    return std::move(out_);
}

}  // namespace bridgewatch::detail
