#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hotspot {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;  // each row has header.size() fields

    // Column index of `name`, or nullopt.
    std::optional<std::size_t> column(const std::string& name) const;
};

// Comma-separated with a header row; fields may be double-quoted ("" escapes a
// quote). Blank lines are skipped, a trailing CR is dropped. Rows with the
// wrong field count throw InvalidInput naming the line. `source` names the
// input in messages.
CsvTable read_csv(std::istream& in, const std::string& source);
CsvTable read_csv_file(const std::string& path);

// Quotes the field if it contains a comma, quote or newline.
std::string csv_field(const std::string& s);

}  // namespace hotspot
