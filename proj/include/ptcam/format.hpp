#pragma once

#include <charconv>
#include <cmath>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

namespace ptcam
{
/// Shortest decimal that parses back to the same double.
inline std::string format_double(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

using CsvCell = std::variant<double, std::string>;

struct CsvTable
{
    std::vector<std::string> header;
    std::vector<std::vector<CsvCell>> rows;

    void write(std::ostream& os) const
    {
        for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
        os << '\n';
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i) os << ',';
                if (const auto* d = std::get_if<double>(&row[i])) {
                    os << format_double(*d);
                } else {
                    os << std::get<std::string>(row[i]);
                }
            }
            os << '\n';
        }
    }
};
} // namespace ptcam
