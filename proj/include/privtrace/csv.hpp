#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace privtrace {

/// RFC-4180-style CSV: comma separated, optional double-quoting with ""
/// escapes, CRLF or LF line ends, UTF-8 passed through. The first record is
/// the header row. Throws std::runtime_error with a line number on malformed
/// quoting.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvTable parse_csv(std::string_view text);
CsvTable read_csv_file(const std::string& path);

}  // namespace privtrace
