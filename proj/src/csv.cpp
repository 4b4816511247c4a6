#include "privtrace/csv.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace privtrace {

CsvTable parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    int line = 1;

    const auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    const auto end_record = [&] {
        if (field_started || !record.empty()) {
            end_field();
            records.push_back(std::move(record));
            record.clear();
        }
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line;
                field += c;
            }
            continue;
        }
        switch (c) {
            case '"':
                if (!field.empty())
                    throw std::runtime_error("csv line " + std::to_string(line) +
                                             ": quote inside unquoted field");
                quoted = true;
                field_started = true;
                break;
            case ',':
                field_started = true;
                end_field();
                field_started = true;  // the next field exists even if empty
                break;
            case '\r':
                break;
            case '\n':
                end_record();
                ++line;
                break;
            default:
                field_started = true;
                field += c;
        }
    }
    if (quoted)
        throw std::runtime_error("csv line " + std::to_string(line) + ": unterminated quote");
    end_record();

    if (records.empty()) throw std::runtime_error("csv: missing header row");
    CsvTable out;
    out.header = std::move(records.front());
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != out.header.size())
            throw std::runtime_error("csv row " + std::to_string(r + 1) + ": has " +
                                     std::to_string(records[r].size()) + " fields, header has " +
                                     std::to_string(out.header.size()));
        out.rows.push_back(std::move(records[r]));
    }
    return out;
}

CsvTable read_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open csv file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str());
}

}  // namespace privtrace
