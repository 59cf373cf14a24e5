// dataset.hpp
//
// Data ingestion and manipulation: immutable column tables loaded from CSV,
// lagged-column construction for conditioning sets, and ordered row splits
// for sub-sample stability checks.
//
// CSV dialect: UTF-8, comma delimiter, '.' decimal point, mandatory header,
// numeric cells only. Missing values are rejected, not imputed.

#ifndef PROBRED_DATASET_HPP
#define PROBRED_DATASET_HPP

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "probred/common.hpp"

namespace probred {

struct Column {
    std::string name;
    std::vector<double> values;
};

/// Immutable table of named numeric columns. All columns share the row count,
/// every value is finite, names are unique, and n >= 1. `time_ordered` records
/// whether the row index is a meaningful time ordering.
class DataTable {
public:
    DataTable(std::vector<Column> columns, bool time_ordered = true)
        : columns_(std::move(columns)), time_ordered_(time_ordered) {
        detail::require(!columns_.empty(), "table must have at least one column");
        n_ = columns_.front().values.size();
        detail::require(n_ >= 1, "table must have at least one row");
        for (std::size_t c = 0; c < columns_.size(); ++c) {
            const Column& col = columns_[c];
            detail::require(!col.name.empty(), "column name must be non-empty");
            if (col.values.size() != n_)
                throw Error("column '" + col.name + "' has " +
                            std::to_string(col.values.size()) + " rows, expected " +
                            std::to_string(n_));
            for (std::size_t i = 0; i < n_; ++i)
                if (!std::isfinite(col.values[i]))
                    throw Error("column '" + col.name + "' has a non-finite value at row " +
                                std::to_string(i + 1));
            for (std::size_t d = c + 1; d < columns_.size(); ++d)
                if (columns_[d].name == col.name)
                    throw Error("duplicate column name '" + col.name + "'");
        }
    }

    std::size_t n() const { return n_; }
    std::size_t column_count() const { return columns_.size(); }
    bool time_ordered() const { return time_ordered_; }
    const std::vector<Column>& columns() const { return columns_; }

    bool has_column(const std::string& name) const {
        return std::any_of(columns_.begin(), columns_.end(),
                           [&](const Column& c) { return c.name == name; });
    }

    const std::vector<double>& values(const std::string& name) const {
        for (const Column& c : columns_)
            if (c.name == name) return c.values;
        throw Error("no column named '" + name + "'");
    }

private:
    std::vector<Column> columns_;
    bool time_ordered_;
    std::size_t n_;
};

/// Names the response and regressor columns of a model. `regressors` may be
/// empty for univariate models.
struct VariableRoles {
    std::string response;
    std::vector<std::string> regressors;
};

/// Checks the roles against a concrete table: named columns must exist and the
/// response must not double as a regressor.
inline void validate_roles(const DataTable& table, const VariableRoles& roles) {
    if (!table.has_column(roles.response))
        throw Error("response column '" + roles.response + "' not found in table");
    for (const std::string& r : roles.regressors) {
        if (r == roles.response)
            throw Error("response column '" + roles.response + "' cannot also be a regressor");
        if (!table.has_column(r)) throw Error("regressor column '" + r + "' not found in table");
    }
}

namespace detail {

// Parses one full cell as a decimal number; rejects partial parses ("1.2x").
inline bool parse_cell(const std::string& cell, double& out) {
    std::size_t begin = cell.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return false;
    const std::size_t end = cell.find_last_not_of(" \t\r");
    const std::string token = cell.substr(begin, end - begin + 1);
    const char* start = token.c_str();
    char* stop = nullptr;
    out = std::strtod(start, &stop);
    return stop == start + token.size() && stop != start;
}

inline std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

inline std::string trimmed(const std::string& s) {
    const std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Loads a CSV file: header row then numeric records. Errors name the
/// offending row (1-based, counting data rows) and column.
inline DataTable load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw Error("empty file: " + path);

    std::vector<Column> columns;
    for (const std::string& raw : detail::split_line(line)) {
        const std::string name = detail::trimmed(raw);
        if (name.empty()) throw Error("empty column name in header of " + path);
        for (const Column& c : columns)
            if (c.name == name) throw Error("duplicate header '" + name + "' in " + path);
        columns.push_back(Column{name, {}});
    }

    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (detail::trimmed(line).empty()) continue;  // ignore trailing blank lines
        ++row;
        const std::vector<std::string> cells = detail::split_line(line);
        if (cells.size() != columns.size())
            throw Error("row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                        " cells, expected " + std::to_string(columns.size()));
        for (std::size_t c = 0; c < cells.size(); ++c) {
            double v = 0.0;
            if (!detail::parse_cell(cells[c], v))
                throw Error("non-numeric cell '" + detail::trimmed(cells[c]) + "' at row " +
                            std::to_string(row) + ", column '" + columns[c].name + "'");
            columns[c].values.push_back(v);
        }
    }
    if (row == 0) throw Error("no rows in " + path);
    return DataTable(std::move(columns), /*time_ordered=*/true);
}

/// Writes a table back to CSV with 17 significant digits, enough for an exact
/// double round trip through load_csv.
inline void write_csv(const DataTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write file: " + path);
    out.precision(17);
    for (std::size_t c = 0; c < table.column_count(); ++c)
        out << (c ? "," : "") << table.columns()[c].name;
    out << '\n';
    for (std::size_t i = 0; i < table.n(); ++i) {
        for (std::size_t c = 0; c < table.column_count(); ++c)
            out << (c ? "," : "") << table.columns()[c].values[i];
        out << '\n';
    }
}

/// Appends lagged copies column_lag1 … column_lagp of one column and trims the
/// table to the n - max_lag complete rows. Row order is preserved.
inline DataTable add_lags(const DataTable& table, const std::string& column, int max_lag) {
    if (!table.time_ordered()) throw Error("add_lags requires a time-ordered table");
    if (max_lag < 1) throw Error("max_lag must be >= 1");
    const std::vector<double>& base = table.values(column);
    const std::size_t n = table.n();
    if (static_cast<std::size_t>(max_lag) >= n)
        throw Error("max_lag " + std::to_string(max_lag) + " leaves no complete rows (n = " +
                    std::to_string(n) + ")");

    const std::size_t m = n - static_cast<std::size_t>(max_lag);
    std::vector<Column> out;
    for (const Column& c : table.columns()) {
        Column trimmedCol{c.name, {}};
        trimmedCol.values.assign(c.values.end() - static_cast<std::ptrdiff_t>(m),
                                 c.values.end());
        out.push_back(std::move(trimmedCol));
    }
    for (int lag = 1; lag <= max_lag; ++lag) {
        Column lagged{column + "_lag" + std::to_string(lag), {}};
        for (std::size_t i = 0; i < m; ++i)
            lagged.values.push_back(base[i + static_cast<std::size_t>(max_lag - lag)]);
        out.push_back(std::move(lagged));
    }
    return DataTable(std::move(out), table.time_ordered());
}

/// Splits rows into (first floor(fraction*n), rest), both in original order.
/// Each part must keep at least two rows.
inline std::pair<DataTable, DataTable> split_rows(const DataTable& table, double fraction) {
    detail::require(fraction > 0.0 && fraction < 1.0, "split fraction must lie in (0,1)");
    const std::size_t n = table.n();
    const std::size_t n1 = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
    const std::size_t n2 = n - n1;
    if (n1 < 2 || n2 < 2)
        throw Error("degenerate split: parts of " + std::to_string(n1) + " and " +
                    std::to_string(n2) + " rows (need >= 2 each)");

    std::vector<Column> first, second;
    for (const Column& c : table.columns()) {
        first.push_back(Column{c.name, {c.values.begin(), c.values.begin() +
                                            static_cast<std::ptrdiff_t>(n1)}});
        second.push_back(Column{c.name, {c.values.begin() + static_cast<std::ptrdiff_t>(n1),
                                         c.values.end()}});
    }
    return {DataTable(std::move(first), table.time_ordered()),
            DataTable(std::move(second), table.time_ordered())};
}

}  // namespace probred

#endif  // PROBRED_DATASET_HPP
