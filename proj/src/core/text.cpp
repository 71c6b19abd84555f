#include "core/text.hpp"

#include <charconv>
#include <stdexcept>
#include <system_error>

namespace biodiff {

std::string format_double(double value)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

std::string format_int(std::int64_t value)
{
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

namespace {

[[noreturn]] void bad_token(std::string_view token, std::string_view what)
{
    throw std::invalid_argument("invalid number '" + std::string(token) + "' for " +
                                std::string(what));
}

} // namespace

double parse_double(std::string_view token, std::string_view what)
{
    const std::string t = trim(token);
    double value = 0.0;
    auto res = std::from_chars(t.data(), t.data() + t.size(), value);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size() || t.empty())
        bad_token(token, what);
    return value;
}

std::int64_t parse_int(std::string_view token, std::string_view what)
{
    const std::string t = trim(token);
    std::int64_t value = 0;
    auto res = std::from_chars(t.data(), t.data() + t.size(), value);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size() || t.empty())
        bad_token(token, what);
    return value;
}

std::vector<std::string> split_csv_line(std::string_view line)
{
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.emplace_back(line.substr(start));
            break;
        }
        fields.emplace_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

std::string trim(std::string_view s)
{
    const char* ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    return std::string(s.substr(b, e - b + 1));
}

} // namespace biodiff
