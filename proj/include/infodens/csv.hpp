#ifndef INFODENS_CSV_HPP
#define INFODENS_CSV_HPP

// Streaming CSV: one header, rows written as they arrive, 17 significant
// digits, '\n' line ends, RFC-4180 quoting when a field needs it.

#include "infodens/errors.hpp"

#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace infodens::csv {

inline std::string format_number(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string quote(std::string_view field)
{
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
        return std::string(field);
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

using Field = std::variant<double, long long, std::string>;

class Writer {
public:
    Writer(std::ostream& os, std::vector<std::string> header) : os_(os), columns_(header.size())
    {
        if (header.empty()) {
            throw InputError("CSV header must not be empty");
        }
        write_fields(header);
    }

    std::size_t columns() const noexcept { return columns_; }

    void row(const std::vector<Field>& fields)
    {
        if (fields.size() != columns_) {
            throw InputError("CSV row width does not match header");
        }
        std::vector<std::string> text;
        text.reserve(fields.size());
        for (const auto& f : fields) {
            if (const auto* d = std::get_if<double>(&f)) {
                text.push_back(format_number(*d));
            } else if (const auto* i = std::get_if<long long>(&f)) {
                text.push_back(std::to_string(*i));
            } else {
                text.push_back(std::get<std::string>(f));
            }
        }
        write_fields(text);
    }

private:
    void write_fields(const std::vector<std::string>& fields)
    {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) {
                os_ << ',';
            }
            os_ << quote(fields[i]);
        }
        os_ << '\n';
        if (!os_) {
            throw InputError("failed to write CSV output");
        }
    }

    std::ostream& os_;
    std::size_t columns_;
};

} // namespace infodens::csv

#endif // INFODENS_CSV_HPP
