#pragma once

#include <glamer/csv.hpp>

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace glamer {

enum class ColumnKind { continuous, categorical };

std::string_view to_string(ColumnKind kind);

struct Column
{
    std::string name;
    ColumnKind kind = ColumnKind::continuous;
    // Categorical only. levels[0] is the reference level.
    std::vector<std::string> levels;
    // True when the level list was omitted in the schema file and filled from data.
    bool levels_inferred = false;
};

struct Schema
{
    std::vector<Column> columns;

    /// Canonical text form, parseable by parse_schema.
    std::string to_text() const;
    /// FNV-1a 64 over to_text(), as 16 hex digits.
    std::string fingerprint() const;
    const Column* find(std::string_view name) const;
};

/// Grammar: one column per line, `name,kind[,level1|level2|...]`.
/// Lines starting with `#` and blank lines are ignored. A categorical
/// column with no level list is left for resolve_schema to infer.
Schema parse_schema(std::string_view text);

/// Fills omitted level lists from the data in lexicographic order and
/// checks every categorical column ends up with at least two levels.
Schema resolve_schema(Schema schema, const Table& data);

/// One penalized block of the design. Factor blocks own `levels`
/// (reference at index 0, so column start+j-1 encodes levels[j]);
/// continuous blocks have size 1 and no levels.
struct Group
{
    std::string name;
    ColumnKind kind = ColumnKind::continuous;
    Eigen::Index start = 0;
    Eigen::Index size = 0;
    std::vector<std::string> levels;

    bool is_factor() const { return kind == ColumnKind::categorical; }
    /// Number of levels including the reference (continuous: 2, i.e. absent/present).
    int n_levels() const { return static_cast<int>(size) + 1; }
};

/// Dummy-encoded design. Column 0 is the intercept.
struct DesignMatrix
{
    Eigen::MatrixXd X;
    std::vector<Group> groups;

    Eigen::Index n() const { return X.rows(); }
    Eigen::Index p() const { return X.cols(); }
    std::size_t r() const { return groups.size(); }

    /// "name" for continuous columns, "name=level" for dummies.
    std::string column_label(Eigen::Index col) const;
};

/// Raw per-column values handed to assemble_design: level codes for
/// categorical columns, numbers for continuous ones.
struct ColumnData
{
    std::vector<int> codes;
    std::vector<double> values;
};

DesignMatrix assemble_design(const Schema& schema, const std::vector<ColumnData>& columns);

/// Encodes the schema's columns of `data` (other columns are ignored).
/// Throws DataError on unseen levels, non-numeric or missing cells.
DesignMatrix encode(const Table& data, const Schema& schema);

/// Level name per factor group for row i (all-zero block => reference).
std::vector<std::string> decode_levels(const DesignMatrix& design, Eigen::Index row);

/// Numeric column as a vector. Throws DataError on missing/non-numeric cells.
Eigen::VectorXd extract_numeric(const Table& data, std::string_view column);

/// Diagonal of W, stored with one slot per design column; slot 0 (intercept)
/// is fixed at 1 and never used.
struct WeightMatrix
{
    Eigen::VectorXd w;
    double q = 1.0;
};

/// w_{j,k} = ||x_{j,k}||^q. Throws DataError naming any all-zero column.
WeightMatrix default_weights(const DesignMatrix& design, double q = 1.0);

struct NormSummary
{
    double x_max = 0.0;      // x_M
    double x_min = 0.0;      // x_m
    double x_weighted = 0.0; // x_W
};

NormSummary norm_summary(const DesignMatrix& design, const WeightMatrix& weights);

double parse_double(std::string_view cell, std::string_view context);

} // namespace glamer

namespace glamer {

/// Schema describing the groups of an encoded design (levels as encoded).
Schema schema_of(const DesignMatrix& design);

/// Design restricted to the given rows (groups unchanged).
DesignMatrix subset_rows(const DesignMatrix& design, const std::vector<Eigen::Index>& rows);

} // namespace glamer
