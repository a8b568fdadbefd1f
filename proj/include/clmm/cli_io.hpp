#pragma once

// Tick-snapshot ingestion and CSV / SVG emission.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>
#include <stdexcept>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "clmm/errors.hpp"
#include "clmm/liquidity_measure.hpp"

namespace clmm::io {

using json = nlohmann::json;

class ParseError : public ValidationError {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : ValidationError(what), line_(line), column_(column) {}
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

struct TickSnapshot {
    double base = 1.0001;
    std::vector<std::int64_t> ticks;
    std::vector<double> liquidity;  // level on [base^ticks[i], base^ticks[i+1])
};

namespace detail {

struct TextPosition {
    std::size_t line = 1;
    std::size_t column = 1;
};

inline TextPosition locate(std::string_view text, std::size_t offset) {
    TextPosition pos;
    offset = std::min(offset, text.size());
    for (std::size_t i = 0; i < offset; ++i) {
        if (text[i] == '\n') {
            ++pos.line;
            pos.column = 1;
        } else {
            ++pos.column;
        }
    }
    return pos;
}

// Forward iterator over the text that reports how far the parser has read.
struct CountingIterator {
    using iterator_category = std::input_iterator_tag;
    using value_type = char;
    using difference_type = std::ptrdiff_t;
    using pointer = const char*;
    using reference = const char&;

    const char* at = nullptr;
    std::size_t* consumed = nullptr;

    reference operator*() const { return *at; }
    CountingIterator& operator++() {
        ++at;
        if (consumed) ++*consumed;
        return *this;
    }
    CountingIterator operator++(int) {
        CountingIterator old = *this;
        ++*this;
        return old;
    }
    bool operator==(const CountingIterator& o) const { return at == o.at; }
    bool operator!=(const CountingIterator& o) const { return at != o.at; }
};

// Records where each tick entry starts: arrays nested directly in the
// top-level "ticks" array, or in a bare top-level array.
struct TickLocator {
    const std::size_t* consumed = nullptr;
    std::vector<std::size_t> entry_offsets;
    int depth = 0;
    bool in_ticks = false;
    bool top_is_array = false;
    std::string last_key;

    // a scalar or object sitting where a [tick, liquidity] pair belongs
    bool scalar() {
        if ((top_is_array && depth == 1) || (in_ticks && depth == 2)) entry_offsets.push_back(*consumed > 0 ? *consumed - 1 : 0);
        return true;
    }
    bool null() { return scalar(); }
    bool boolean(bool) { return scalar(); }
    bool number_integer(json::number_integer_t) { return scalar(); }
    bool number_unsigned(json::number_unsigned_t) { return scalar(); }
    bool number_float(json::number_float_t, const std::string&) { return scalar(); }
    bool string(std::string&) { return scalar(); }
    bool binary(json::binary_t&) { return scalar(); }
    bool start_object(std::size_t) {
        scalar();
        ++depth;
        return true;
    }
    bool end_object() {
        --depth;
        return true;
    }
    bool key(std::string& k) {
        if (depth == 1) last_key = k;
        return true;
    }
    bool start_array(std::size_t) {
        ++depth;
        if (depth == 1) top_is_array = true;
        if (depth == 2 && !top_is_array && last_key == "ticks") in_ticks = true;
        const bool entry = (top_is_array && depth == 2) || (in_ticks && depth == 3);
        if (entry) entry_offsets.push_back(*consumed > 0 ? *consumed - 1 : 0);
        return true;
    }
    bool end_array() {
        if (depth == 2 && in_ticks) in_ticks = false;
        --depth;
        return true;
    }
    bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception&) { return false; }
};

}  // namespace detail

// Parses {"base": number, "ticks": [[int, number], ...]} (or a bare tick
// array with the default base). Errors carry the line and column.
inline TickSnapshot parse_tick_snapshot(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        const auto pos = detail::locate(text, e.byte > 0 ? e.byte - 1 : 0);
        throw ParseError("tick snapshot: malformed JSON at line " + std::to_string(pos.line) + ", column " +
                             std::to_string(pos.column) + ": " + e.what(),
                         pos.line, pos.column);
    }

    std::size_t consumed = 0;
    detail::TickLocator locator;
    locator.consumed = &consumed;
    json::sax_parse(detail::CountingIterator{text.data(), &consumed}, detail::CountingIterator{text.data() + text.size()},
                    &locator);

    auto fail = [&](const std::string& where, std::size_t entry, const std::string& what) -> ParseError {
        const std::size_t offset = entry < locator.entry_offsets.size() ? locator.entry_offsets[entry] : 0;
        const auto pos = detail::locate(text, offset);
        return ParseError("tick snapshot: " + where + " (line " + std::to_string(pos.line) + ", column " +
                              std::to_string(pos.column) + "): " + what,
                          pos.line, pos.column);
    };
    const std::size_t no_entry = std::numeric_limits<std::size_t>::max();

    TickSnapshot snap;
    const json* ticks = &doc;
    if (doc.is_object()) {
        if (doc.contains("base")) {
            if (!doc["base"].is_number()) throw fail("base", no_entry, "must be a number");
            snap.base = doc["base"].get<double>();
            if (!(snap.base > 1.0) || !std::isfinite(snap.base)) throw fail("base", no_entry, "must be > 1");
        }
        if (!doc.contains("ticks")) throw fail("ticks", no_entry, "missing");
        ticks = &doc["ticks"];
    }
    if (!ticks->is_array()) throw fail("ticks", no_entry, "must be an array of [tick, liquidity] pairs");

    for (std::size_t i = 0; i < ticks->size(); ++i) {
        const json& entry = (*ticks)[i];
        const std::string where = "ticks[" + std::to_string(i) + "]";
        if (!entry.is_array() || entry.size() != 2) throw fail(where, i, "expected [tick, liquidity]");
        if (!entry[0].is_number_integer()) throw fail(where, i, "tick index must be an integer");
        if (!entry[1].is_number()) throw fail(where, i, "liquidity must be a number");
        const auto tick = entry[0].get<std::int64_t>();
        const double level = entry[1].get<double>();
        if (!(level >= 0.0) || !std::isfinite(level)) throw fail(where, i, "liquidity must be finite and >= 0");
        if (!snap.ticks.empty() && tick == snap.ticks.back()) {
            throw fail(where, i, "duplicate tick index " + std::to_string(tick));
        }
        if (!snap.ticks.empty() && tick < snap.ticks.back()) {
            throw fail(where, i, "tick index " + std::to_string(tick) + " is not above " + std::to_string(snap.ticks.back()));
        }
        snap.ticks.push_back(tick);
        snap.liquidity.push_back(level);
    }
    return snap;
}

// Level i applies on [base^tick_i, base^tick_{i+1}); the last level applies
// above the last tick, zero below the first.
inline LiquidityProfile profile_from_snapshot(const TickSnapshot& snap) {
    if (snap.ticks.empty()) return LiquidityProfile{};
    std::vector<double> breaks;
    std::vector<double> levels{0.0};
    for (std::size_t i = 0; i < snap.ticks.size(); ++i) {
        const double price = std::pow(snap.base, static_cast<double>(snap.ticks[i]));
        if (!(price > 0.0) || !std::isfinite(price)) {
            throw ValidationError("tick " + std::to_string(snap.ticks[i]) + " maps outside the representable price range");
        }
        if (!breaks.empty() && !(price > breaks.back())) {
            throw ValidationError("ticks " + std::to_string(snap.ticks[i - 1]) + " and " + std::to_string(snap.ticks[i]) +
                                  " map to the same price");
        }
        breaks.push_back(price);
        levels.push_back(snap.liquidity[i]);
    }
    return LiquidityProfile::from_steps(std::move(breaks), std::move(levels));
}

inline LiquidityProfile ingest_ticks(std::string_view text) { return profile_from_snapshot(parse_tick_snapshot(text)); }

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline LiquidityProfile ingest_ticks_file(const std::filesystem::path& path) {
    try {
        return ingest_ticks(read_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what(), e.line(), e.column());
    }
}

// ---------------------------------------------------------------- CSV

// Shortest representation that parses back to the same double.
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

using Cell = std::variant<double, std::int64_t, std::string>;

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(std::vector<Cell> row) {
        if (row.size() != header_.size()) {
            throw std::logic_error("CSV row has " + std::to_string(row.size()) + " cells, header has " +
                                   std::to_string(header_.size()));
        }
        rows_.push_back(std::move(row));
    }

    const std::vector<std::string>& header() const { return header_; }
    std::size_t size() const { return rows_.size(); }

    std::string str() const {
        std::string out;
        append_line(out, header_);
        for (const auto& row : rows_) {
            std::vector<std::string> cells;
            cells.reserve(row.size());
            for (const auto& c : row) cells.push_back(render(c));
            append_line(out, cells);
        }
        return out;
    }

    void write(const std::filesystem::path& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        out << str();
        if (!out) throw std::runtime_error("write failed: " + path.string());
    }

private:
    static std::string render(const Cell& c) {
        if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
        if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
        return quote(std::get<std::string>(c));
    }

    static std::string quote(const std::string& s) {
        if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
        std::string q = "\"";
        for (char ch : s) {
            if (ch == '"') q += '"';
            q += ch;
        }
        return q + "\"";
    }

    static void append_line(std::string& out, const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    }

    std::vector<std::string> header_;
    std::vector<std::vector<Cell>> rows_;
};

// ---------------------------------------------------------------- SVG

struct Series {
    std::string name;
    std::vector<double> y;
};

// Plain line chart over a shared x axis; non-finite points are skipped.
inline std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::vector<double>& x,
                                  const std::vector<Series>& series) {
    constexpr double width = 720, height = 440, left = 70, right = 160, top = 40, bottom = 50;
    for (const auto& s : series) {
        if (s.y.size() != x.size()) {
            throw std::invalid_argument("series '" + s.name + "' has " + std::to_string(s.y.size()) + " points, x has " +
                                        std::to_string(x.size()));
        }
    }
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
    for (double v : x) {
        if (std::isfinite(v)) {
            xmin = std::min(xmin, v);
            xmax = std::max(xmax, v);
        }
    }
    for (const auto& s : series) {
        for (double v : s.y) {
            if (std::isfinite(v)) {
                ymin = std::min(ymin, v);
                ymax = std::max(ymax, v);
            }
        }
    }
    if (!(xmax > xmin)) {
        xmin = std::isfinite(xmin) ? xmin - 1 : 0;
        xmax = xmin + 2;
    }
    if (!(ymax > ymin)) {
        ymin = std::isfinite(ymin) ? ymin - 1 : 0;
        ymax = ymin + 2;
    }
    const double plot_w = width - left - right, plot_h = height - top - bottom;
    auto sx = [&](double v) { return left + (v - xmin) / (xmax - xmin) * plot_w; };
    auto sy = [&](double v) { return top + (ymax - v) / (ymax - ymin) * plot_h; };
    auto esc = [](const std::string& s) {
        std::string o;
        for (char c : s) {
            switch (c) {
                case '<': o += "&lt;"; break;
                case '>': o += "&gt;"; break;
                case '&': o += "&amp;"; break;
                default: o += c;
            }
        }
        return o;
    };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << esc(title) << "</text>\n";
    svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\"" << plot_h
        << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = xmin + (xmax - xmin) * i / 4.0, fy = ymin + (ymax - ymin) * i / 4.0;
        svg << "<text x=\"" << sx(fx) << "\" y=\"" << top + plot_h + 16 << "\" text-anchor=\"middle\">"
            << format_number(std::round(fx * 1e6) / 1e6) << "</text>\n";
        svg << "<text x=\"" << left - 6 << "\" y=\"" << sy(fy) + 4 << "\" text-anchor=\"end\">"
            << format_number(std::round(fy * 1e6) / 1e6) << "</text>\n";
    }
    svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\">" << esc(x_label)
        << "</text>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const char* color = colors[k % std::size(colors)];
        svg << "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" << color << "\" points=\"";
        const std::size_t n = std::min(x.size(), series[k].y.size());
        for (std::size_t i = 0; i < n; ++i) {
            if (std::isfinite(x[i]) && std::isfinite(series[k].y[i])) svg << sx(x[i]) << ',' << sy(series[k].y[i]) << ' ';
        }
        svg << "\"/>\n";
        const double ly = top + 14 + 18 * static_cast<double>(k);
        svg << "<line x1=\"" << left + plot_w + 12 << "\" y1=\"" << ly << "\" x2=\"" << left + plot_w + 32 << "\" y2=\""
            << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << left + plot_w + 38 << "\" y=\"" << ly + 4 << "\">" << esc(series[k].name) << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

}  // namespace clmm::io
