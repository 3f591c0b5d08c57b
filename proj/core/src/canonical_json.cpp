#include "canonical_json.hpp"

#include <cmath>
#include <fmt/format.h>

namespace bridgewatch::detail {

std::string fixed6(double v) {
    if (!std::isfinite(v)) {
        return "null";
    }
    std::string s = fmt::format("{:.6f}", v);
    if (s == "-0.000000") {
        s = "0.000000";
    }
    return s;
}

namespace {

void write(const json& v, int depth, std::string& out) {
    const std::string pad(static_cast<std::size_t>(depth + 1) * 2, ' ');
    const std::string close_pad(static_cast<std::size_t>(depth) * 2, ' ');
    switch (v.type()) {
        case json::value_t::object: {
            if (v.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = v.begin(); it != v.end(); ++it) {
                if (!first) {
                    out += ",\n";
                }
                first = false;
                out += pad;
                out += json(it.key()).dump();
                out += ": ";
                write(it.value(), depth + 1, out);
            }
            out += "\n" + close_pad + "}";
            return;
        }
        case json::value_t::array: {
            if (v.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            bool first = true;
            for (const json& item : v) {
                if (!first) {
                    out += ",\n";
                }
                first = false;
                out += pad;
                write(item, depth + 1, out);
            }
            out += "\n" + close_pad + "]";
            return;
        }
        case json::value_t::number_float:
            out += fixed6(v.get<double>());
            return;
        default:
            out += v.dump();
            return;
    }
}

}  // namespace

std::string canonical_dump(const json& value) {
    std::string out;
    write(value, 0, out);
    out += "\n";
    return out;
}

}  // namespace bridgewatch::detail
