#include "sce/dataset.hpp"

#include <cmath>

namespace sce {

Dataset::Dataset(std::vector<DatasetColumn> columns, std::vector<std::vector<int>> cells)
    : columns_(std::move(columns)), cells_(std::move(cells)) {
    if (columns_.empty()) fail(Errc::validation_error, "dataset with no columns");
    if (cells_.size() != columns_.size())
        fail(Errc::validation_error, "dataset cell columns do not match declared columns");
    rows_ = cells_[0].size();
    if (rows_ == 0) fail(Errc::validation_error, "dataset with no rows");
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        if (cells_[c].size() != rows_) fail(Errc::validation_error, "ragged dataset columns");
        const int card = static_cast<int>(columns_[c].states.size());
        for (int v : cells_[c])
            if (v < 0 || v >= card)
                fail(Errc::validation_error,
                     "cell out of range in column '" + columns_[c].name + "'");
    }
}

int Dataset::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i)
        if (columns_[i].name == name) return static_cast<int>(i);
    fail(Errc::unknown_node, "'" + name + "' is not a dataset column");
}

void TimeSeries::validate() const {
    if (timestamps.size() != values.size())
        fail(Errc::validation_error, "time series timestamp/value length mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (std::isnan(values[i])) fail(Errc::validation_error, "NaN in time series");
        if (i > 0 && timestamps[i] <= timestamps[i - 1])
            fail(Errc::validation_error, "time series timestamps must strictly increase");
    }
}

}  // namespace sce
