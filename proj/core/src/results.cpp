#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "seqmark/harness.hpp"

namespace seqmark {

ResultTable::ResultTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void ResultTable::add_row(std::vector<std::string> row) {
    if (row.size() != columns_.size()) {
        throw Error(ErrorKind::LengthMismatch, "row width differs from the header");
    }
    rows_.push_back(std::move(row));
}

void ResultTable::append(const ResultTable& other) {
    if (columns_.empty() && rows_.empty()) columns_ = other.columns_;
    if (other.columns_ != columns_) {
        throw Error(ErrorKind::LengthMismatch, "cannot append tables with different headers");
    }
    rows_.insert(rows_.end(), other.rows_.begin(), other.rows_.end());
}

std::optional<std::size_t> ResultTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        if (columns_[i] == name) return i;
    }
    return std::nullopt;
}

std::optional<double> ResultTable::lookup(const std::string& metric,
                                          const std::map<std::string, std::string>& where) const {
    const auto mcol = column_index("metric");
    const auto vcol = column_index("value");
    if (!mcol || !vcol) return std::nullopt;
    std::vector<std::pair<std::size_t, std::string>> keys;
    for (const auto& [k, v] : where) {
        const auto c = column_index(k);
        if (!c) return std::nullopt;
        keys.emplace_back(*c, v);
    }
    for (const auto& row : rows_) {
        if (row[*mcol] != metric) continue;
        bool ok = true;
        for (const auto& [c, v] : keys) ok = ok && row[c] == v;
        if (ok) return std::stod(row[*vcol]);
    }
    return std::nullopt;
}

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    if (value == 0.0) return "0";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

namespace {

void write_cell(std::ostream& out, const std::string& cell) {
    if (cell.find_first_of(",\"\n\r") == std::string::npos) {
        out << cell;
        return;
    }
    out << '"';
    for (char c : cell) {
        if (c == '"') out << '"';
        out << c;
    }
    out << '"';
}

void write_row(std::ostream& out, const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out << ',';
        write_cell(out, row[i]);
    }
    out << '\n';
}

// One CSV record; false at end of input.
bool read_record(std::istream& in, std::vector<std::string>& out) {
    out.clear();
    if (in.peek() == std::char_traits<char>::eof()) return false;
    std::string cell;
    bool quoted = false;
    char c;
    while (in.get(c)) {
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    cell += '"';
                } else {
                    quoted = false;
                }
            } else {
                cell += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cell));
            cell.clear();
        } else if (c == '\n') {
            break;
        } else if (c != '\r') {
            cell += c;
        }
    }
    if (quoted) throw Error(ErrorKind::Parse, "unterminated quoted CSV cell");
    out.push_back(std::move(cell));
    return true;
}

}  // namespace

void write_csv(const ResultTable& table, std::ostream& out) {
    write_row(out, table.columns());
    for (const auto& r : table.rows()) write_row(out, r);
}

ResultTable read_csv(std::istream& in) {
    std::vector<std::string> rec;
    if (!read_record(in, rec)) throw Error(ErrorKind::Parse, "CSV has no header");
    ResultTable table(rec);
    while (read_record(in, rec)) {
        if (rec.size() == 1 && rec[0].empty()) continue;
        table.add_row(rec);
    }
    return table;
}

void emit_results(const ResultTable& table, const std::filesystem::path& csv_path,
                  const std::optional<std::filesystem::path>& long_path, const PlotSpec& plot) {
    {
        std::ofstream out(csv_path, std::ios::binary);
        if (!out) throw Error(ErrorKind::Io, "cannot write " + csv_path.string());
        write_csv(table, out);
        if (!out) throw Error(ErrorKind::Io, "failed writing " + csv_path.string());
    }
    if (!long_path) return;
    const auto x = table.column_index(plot.x_column);
    const auto y = table.column_index("value");
    if (!table.empty() && (!x || !y)) {
        throw Error(ErrorKind::InvalidArgument, "plot column '" + plot.x_column + "' not found");
    }
    std::vector<std::size_t> series;
    for (const auto& s : plot.series_columns) {
        const auto c = table.column_index(s);
        if (!c) throw Error(ErrorKind::InvalidArgument, "series column '" + s + "' not found");
        series.push_back(*c);
    }
    ResultTable plot_table({"x", "y", "series"});
    for (const auto& r : table.rows()) {
        std::string name;
        for (std::size_t k = 0; k < series.size(); ++k) {
            if (k) name += ';';
            name += plot.series_columns[k] + "=" + r[series[k]];
        }
        plot_table.add_row({r[*x], r[*y], name});
    }
    std::ofstream out(*long_path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + long_path->string());
    write_csv(plot_table, out);
    if (!out) throw Error(ErrorKind::Io, "failed writing " + long_path->string());
}

}  // namespace seqmark
