#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "varskip/vocab.hpp"

namespace varskip {

struct Column {
    std::string name;
    Vocab vocab;
};

// Dictionary-encoded table: M rows × n columns of value indices. Immutable
// after construction; MASK indices never appear in stored cells.
class Table {
public:
    Table() = default;
    Table(std::string name, std::vector<Column> columns, std::vector<int32_t> cells);

    const std::string& name() const { return name_; }
    int64_t n_rows() const { return n_rows_; }
    int32_t n_cols() const { return static_cast<int32_t>(columns_.size()); }

    const std::vector<Column>& columns() const { return columns_; }
    const Column& column(int32_t c) const { return columns_[static_cast<size_t>(c)]; }
    // Index of a column by name; error when absent.
    int32_t column_index(const std::string& name) const;

    int32_t cell(int64_t r, int32_t c) const { return cells_[static_cast<size_t>(r) * columns_.size() + static_cast<size_t>(c)]; }
    std::span<const int32_t> row(int64_t r) const {
        return {cells_.data() + static_cast<size_t>(r) * columns_.size(), columns_.size()};
    }
    const std::vector<int32_t>& cells() const { return cells_; }

    std::vector<int32_t> encode_row(const std::vector<std::string>& raw) const;
    std::vector<std::string> decode_row(std::span<const int32_t> indices) const;

    // Versioned binary cache. `meta` is a free-form provenance note (e.g.
    // the generating config); stored but never interpreted.
    void save(const std::string& path, const std::string& meta = {}) const;
    static Table load(const std::string& path);

private:
    void validate() const;

    std::string name_;
    std::vector<Column> columns_;
    std::vector<int32_t> cells_;
    int64_t n_rows_ = 0;
};

}  // namespace varskip
