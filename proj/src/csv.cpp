#include "varskip/csv.hpp"

#include <fstream>

#include "varskip/error.hpp"

namespace varskip {

std::vector<std::vector<std::string>> parse_csv(std::istream& in) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;  // distinguishes trailing empty line from empty field

    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(record));
        record.clear();
    };

    char ch;
    while (in.get(ch)) {
        if (in_quotes) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    in.get(ch);
                    field += '"';
                } else {
                    in_quotes = false;
                }
            } else {
                field += ch;
            }
            continue;
        }
        switch (ch) {
            case '"':
                in_quotes = true;
                field_started = true;
                break;
            case ',':
                end_field();
                field_started = true;  // a comma implies a following field
                break;
            case '\r':
                if (in.peek() == '\n') in.get(ch);
                end_record();
                break;
            case '\n':
                end_record();
                break;
            default:
                field += ch;
                field_started = true;
                break;
        }
    }
    if (in_quotes) fail_invalid("unterminated quoted field at end of CSV input");
    if (field_started || !field.empty() || !record.empty()) end_record();
    return records;
}

Table ingest_csv(const std::string& path, const std::vector<std::string>& columns,
                 const std::string& table_name) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_io("cannot open '" + path + "'");
    auto records = parse_csv(in);
    if (records.empty()) fail_invalid("'" + path + "': no header row");

    const std::vector<std::string>& header = records[0];
    std::vector<size_t> selected;
    std::vector<std::string> names = columns;
    if (names.empty())
        names.assign(header.begin(), header.end());
    for (const std::string& want : names) {
        size_t j = 0;
        for (; j < header.size(); ++j)
            if (header[j] == want) break;
        if (j == header.size()) fail_invalid("'" + path + "': no column named '" + want + "'");
        selected.push_back(j);
    }

    if (records.size() == 1) fail_invalid("'" + path + "': empty table");

    std::vector<std::vector<std::string>> raw_cols(selected.size());
    for (size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.size() != header.size())
            fail_invalid("'" + path + "' row " + std::to_string(r) + ": " +
                         std::to_string(rec.size()) + " fields, header has " +
                         std::to_string(header.size()));
        for (size_t c = 0; c < selected.size(); ++c) raw_cols[c].push_back(rec[selected[c]]);
    }

    std::vector<Column> cols(selected.size());
    for (size_t c = 0; c < selected.size(); ++c) {
        cols[c].name = names[c];
        cols[c].vocab = Vocab::build(raw_cols[c]);
    }

    size_t n_rows = records.size() - 1;
    std::vector<int32_t> cells(n_rows * selected.size());
    for (size_t r = 0; r < n_rows; ++r)
        for (size_t c = 0; c < selected.size(); ++c) {
            auto idx = cols[c].vocab.find(raw_cols[c][r]);
            if (!idx)  // cannot happen: vocab was built from these values
                fail_runtime("internal: vocab lookup failed during ingest");
            cells[r * selected.size() + c] = *idx;
        }

    std::string name = table_name.empty() ? path : table_name;
    return Table(std::move(name), std::move(cols), std::move(cells));
}

}  // namespace varskip
