// Minimal SVG builder. Coordinates are printed with two decimals so output
// is stable across platforms.
#pragma once

#include <string>
#include <string_view>

namespace bridgewatch::detail {

inline constexpr int kSvgWidth = 960;
inline constexpr int kSvgHeight = 540;

std::string xml_escape(std::string_view s);
std::string num2(double v);

/// Fixed categorical palette indexed modulo its size.
std::string_view palette(std::size_t i);

class Svg {
public:
    explicit Svg(std::string_view title);

    void rect(double x, double y, double w, double h, std::string_view fill, std::string_view cls = {});
    void line(double x1, double y1, double x2, double y2, std::string_view stroke, double width = 1.0,
              std::string_view dash = {});
    void text(double x, double y, std::string_view s, int size = 12, std::string_view anchor = "start",
              std::string_view cls = {});
    void polyline(const std::string& points, std::string_view stroke, double width = 1.5);
    void open_group(std::string_view cls);
    void close_group();
    /// Raw element text, already escaped.
    void raw(std::string_view s);

    std::string finish();

private:
    std::string out_;
};

}  // namespace bridgewatch::detail
