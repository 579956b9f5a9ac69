#include "varskip/table.hpp"

#include "varskip/binio.hpp"
#include "varskip/error.hpp"

namespace varskip {

namespace {
constexpr char kTableMagic[4] = {'V', 'S', 'T', 'B'};
constexpr uint32_t kTableVersion = 1;
}  // namespace

Table::Table(std::string name, std::vector<Column> columns, std::vector<int32_t> cells)
    : name_(std::move(name)), columns_(std::move(columns)), cells_(std::move(cells)) {
    if (columns_.empty()) fail_invalid("table '" + name_ + "' has no columns");
    if (cells_.size() % columns_.size() != 0)
        fail_invalid("cell count not a multiple of column count");
    n_rows_ = static_cast<int64_t>(cells_.size() / columns_.size());
    if (n_rows_ == 0) fail_invalid("empty table");
    validate();
}

void Table::validate() const {
    for (int32_t c = 0; c < n_cols(); ++c) {
        int32_t vs = columns_[static_cast<size_t>(c)].vocab.size();
        if (vs < 1) fail_invalid("column '" + columns_[static_cast<size_t>(c)].name + "' has empty vocab");
        for (int64_t r = 0; r < n_rows_; ++r) {
            int32_t v = cell(r, c);
            if (v < 0 || v >= vs)
                fail_invalid("cell (" + std::to_string(r) + ", " + std::to_string(c) +
                             ") index " + std::to_string(v) + " outside vocab of size " +
                             std::to_string(vs));
        }
    }
}

int32_t Table::column_index(const std::string& name) const {
    for (int32_t c = 0; c < n_cols(); ++c)
        if (columns_[static_cast<size_t>(c)].name == name) return c;
    fail_invalid("no column named '" + name + "' in table '" + name_ + "'");
}

std::vector<int32_t> Table::encode_row(const std::vector<std::string>& raw) const {
    if (raw.size() != columns_.size())
        fail_invalid("row has " + std::to_string(raw.size()) + " values, table has " +
                     std::to_string(columns_.size()) + " columns");
    std::vector<int32_t> out(raw.size());
    for (size_t c = 0; c < raw.size(); ++c) {
        auto idx = columns_[c].vocab.find(raw[c]);
        if (!idx)
            fail_invalid("value '" + raw[c] + "' not in vocab of column '" + columns_[c].name + "'");
        out[c] = *idx;
    }
    return out;
}

std::vector<std::string> Table::decode_row(std::span<const int32_t> indices) const {
    if (indices.size() != columns_.size())
        fail_invalid("index vector length does not match column count");
    std::vector<std::string> out(indices.size());
    for (size_t c = 0; c < indices.size(); ++c) out[c] = columns_[c].vocab.decode(indices[c]);
    return out;
}

void Table::save(const std::string& path, const std::string& meta) const {
    BinWriter w(path);
    write_magic(w, kTableMagic, kTableVersion);
    w.str(meta);
    w.str(name_);
    w.u32(static_cast<uint32_t>(columns_.size()));
    w.u64(static_cast<uint64_t>(n_rows_));
    for (const Column& col : columns_) {
        w.str(col.name);
        w.u32(static_cast<uint32_t>(col.vocab.size()));
        for (const std::string& v : col.vocab.values()) w.str(v);
    }
    w.u32_array(reinterpret_cast<const uint32_t*>(cells_.data()), cells_.size());
    w.finish();
}

Table Table::load(const std::string& path) {
    BinReader r(path);
    r.expect_magic(kTableMagic, kTableVersion, "table cache");
    (void)r.str();  // provenance note, not part of the table
    std::string name = r.str();
    uint32_t n_cols = r.u32();
    uint64_t n_rows = r.u64();
    if (n_cols == 0 || n_rows == 0) fail_io("'" + path + "' holds an empty table");
    std::vector<Column> columns;
    columns.reserve(n_cols);
    for (uint32_t c = 0; c < n_cols; ++c) {
        Column col;
        col.name = r.str();
        uint32_t vs = r.u32();
        std::vector<std::string> vals(vs);
        for (uint32_t i = 0; i < vs; ++i) vals[i] = r.str();
        col.vocab = Vocab::build(vals);
        if (col.vocab.values() != vals)
            fail_io("'" + path + "' vocab for column '" + col.name + "' is not in canonical order");
        columns.push_back(std::move(col));
    }
    std::vector<int32_t> cells(static_cast<size_t>(n_rows) * n_cols);
    r.u32_array(reinterpret_cast<uint32_t*>(cells.data()), cells.size());
    return Table(std::move(name), std::move(columns), std::move(cells));
}

}  // namespace varskip
