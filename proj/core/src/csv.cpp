#include "hotspot/csv.hpp"

#include <algorithm>
#include <fstream>
#include <istream>

#include "hotspot/error.hpp"

namespace hotspot {

std::optional<std::size_t> CsvTable::column(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
}

namespace {

// Splits one record; `line` may be extended from `in` when a quoted field spans lines.
std::vector<std::string> split_record(std::string line, std::istream& in, std::size_t& lineno,
                                      const std::string& source) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    std::size_t i = 0;
    for (;;) {
        if (i == line.size()) {
            if (!quoted) break;
            std::string more;
            if (!std::getline(in, more)) {
                throw InvalidInput("cli", source + ":" + std::to_string(lineno) + ": unterminated quoted field");
            }
            ++lineno;
            if (!more.empty() && more.back() == '\r') more.pop_back();
            line += '\n';
            line += more;
        }
        const char c = line[i++];
        if (quoted) {
            if (c == '"') {
                if (i < line.size() && line[i] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

}  // namespace

CsvTable read_csv(std::istream& in, const std::string& source) {
    CsvTable t;
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!have_header && lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        if (line.empty()) continue;
        const std::size_t start = lineno;
        auto fields = split_record(line, in, lineno, source);
        if (!have_header) {
            for (auto& f : fields) {
                if (std::count(fields.begin(), fields.end(), f) > 1) {
                    throw InvalidInput("cli", source + ": duplicate column '" + f + "'");
                }
            }
            t.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != t.header.size()) {
            throw InvalidInput("cli", source + ":" + std::to_string(start) + ": expected " +
                                          std::to_string(t.header.size()) + " fields, found " +
                                          std::to_string(fields.size()));
        }
        t.rows.push_back(std::move(fields));
    }
    if (!have_header) throw InvalidInput("cli", source + ": empty file (no header row)");
    return t;
}

CsvTable read_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cli", "cannot open '" + path + "'");
    return read_csv(in, path);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace hotspot
