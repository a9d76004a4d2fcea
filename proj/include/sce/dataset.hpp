#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sce/error.hpp"

namespace sce {

struct DatasetColumn {
    std::string name;
    std::vector<std::string> states;  // declared labels; cells index into this
};

// Column-per-variable table of categorical observations. Cells are stored as
// dense state indices; labels live on the columns.
class Dataset {
public:
    Dataset(std::vector<DatasetColumn> columns, std::vector<std::vector<int>> cells);

    std::size_t row_count() const { return rows_; }
    std::size_t column_count() const { return columns_.size(); }
    const std::vector<DatasetColumn>& columns() const { return columns_; }
    const DatasetColumn& column(int i) const { return columns_[static_cast<std::size_t>(i)]; }

    int column_index(const std::string& name) const;  // throws UnknownNode

    // cells(col)[row] is the state index of that observation
    const std::vector<int>& cells(int col) const { return cells_[static_cast<std::size_t>(col)]; }

    const std::string& label(int col, std::size_t row) const {
        return columns_[static_cast<std::size_t>(col)].states
            [static_cast<std::size_t>(cells_[static_cast<std::size_t>(col)][row])];
    }

private:
    std::vector<DatasetColumn> columns_;
    std::vector<std::vector<int>> cells_;  // column-major
    std::size_t rows_;
};

// Real-valued series on strictly increasing day indices; no NaN values.
struct TimeSeries {
    std::vector<double> timestamps;
    std::vector<double> values;

    void validate() const;
};

}  // namespace sce
