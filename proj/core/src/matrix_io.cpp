#include <charconv>
#include <fstream>
#include <istream>
#include <string>

#include "seqmark/harness.hpp"

namespace seqmark {

std::vector<Sequence> parse_matrix(std::istream& in, unsigned states, const std::string& source) {
    std::vector<Sequence> rows;
    std::string line;
    std::size_t row = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::vector<State> values;
        std::size_t col = 0;
        std::size_t start = 0;
        while (true) {
            ++col;
            const auto end = std::min(line.find(',', start), line.size());
            auto a = start, b = end;
            while (a < b && (line[a] == ' ' || line[a] == '\t')) ++a;
            while (b > a && (line[b - 1] == ' ' || line[b - 1] == '\t')) --b;
            unsigned v = 0;
            const auto [ptr, ec] = std::from_chars(line.data() + a, line.data() + b, v);
            const auto where = source + ":" + std::to_string(row) + ":" + std::to_string(col);
            if (a == b || ec != std::errc{} || ptr != line.data() + b) {
                throw Error(ErrorKind::Parse, where + ": expected a non-negative integer");
            }
            if (v >= states) {
                throw Error(ErrorKind::OutOfRange, where + ": state " + std::to_string(v) +
                                                       " outside [0, " +
                                                       std::to_string(states - 1) + "]");
            }
            values.push_back(static_cast<State>(v));
            if (end == line.size()) break;
            start = end + 1;
        }
        if (width == 0) width = values.size();
        if (values.size() != width) {
            throw Error(ErrorKind::Parse, source + ":" + std::to_string(row) + ": expected " +
                                              std::to_string(width) + " values, found " +
                                              std::to_string(values.size()));
        }
        rows.emplace_back(std::move(values), states);
    }
    if (rows.empty()) throw Error(ErrorKind::Parse, source + ": no records");
    return rows;
}

std::vector<Sequence> load_matrix(const std::filesystem::path& path, unsigned states) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
    return parse_matrix(in, states, path.string());
}

void save_matrix(std::span<const Sequence> rows, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (i) out << ',';
            out << static_cast<unsigned>(r[i]);
        }
        out << '\n';
    }
    if (!out) throw Error(ErrorKind::Io, "failed writing " + path.string());
}

}  // namespace seqmark
