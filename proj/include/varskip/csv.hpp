#pragma once

#include <istream>
#include <string>
#include <vector>

#include "varskip/table.hpp"

namespace varskip {

// RFC-4180 records: quoted fields, doubled quotes, CRLF or LF, embedded
// newlines inside quotes. Returns one vector of fields per record.
std::vector<std::vector<std::string>> parse_csv(std::istream& in);

// Read a headered CSV and dictionary-encode the selected columns (all
// columns when `columns` is empty). Order of `columns` is preserved in the
// resulting table.
Table ingest_csv(const std::string& path, const std::vector<std::string>& columns = {},
                 const std::string& table_name = "");

}  // namespace varskip
