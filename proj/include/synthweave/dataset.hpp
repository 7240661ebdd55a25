#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "synthweave/rng.hpp"

namespace synthweave {

enum class ColumnKind : std::uint8_t { Numeric, Categorical };
enum class TaskKind : std::uint8_t { None, Classification, Regression };

struct ColumnSpec {
    std::string name;
    ColumnKind kind = ColumnKind::Numeric;
    bool operator==(const ColumnSpec&) const = default;
};

/// Ordered column layout plus the optional learning task.
struct Schema {
    std::vector<ColumnSpec> columns;
    std::optional<std::string> target;
    TaskKind task = TaskKind::None;

    std::size_t column_count() const { return columns.size(); }
    std::optional<std::size_t> index_of(std::string_view name) const;

    /// Enforces: unique non-empty names; target (if any) names an existing
    /// column; a Regression target is Numeric. Throws std::invalid_argument.
    void validate() const;

    bool operator==(const Schema&) const = default;
};

/// One table cell: a finite number, an interned category id, or missing.
class Cell {
  public:
    Cell() : tag_(Tag::Missing) {}

    static Cell missing() { return Cell{}; }
    static Cell number(double v);  // throws on non-finite v
    static Cell category(std::int32_t id);

    bool is_missing() const { return tag_ == Tag::Missing; }
    bool is_number() const { return tag_ == Tag::Number; }
    bool is_category() const { return tag_ == Tag::Category; }

    double num() const { return num_; }
    std::int32_t cat() const { return cat_; }

    bool operator==(const Cell&) const = default;

  private:
    enum class Tag : std::uint8_t { Missing, Number, Category };
    Tag tag_;
    double num_ = 0.0;
    std::int32_t cat_ = -1;
};

using Row = std::vector<Cell>;

/// Immutable-after-construction tabular dataset. Categorical cells store
/// ids into a per-column dictionary that is kept sorted, so id order equals
/// token order and two tables built from the same token set agree on ids.
class Table {
  public:
    Table() = default;
    Table(Schema schema, std::vector<std::vector<std::string>> categories);

    const Schema& schema() const { return schema_; }
    std::size_t n_rows() const { return rows_.size(); }
    std::size_t n_cols() const { return schema_.column_count(); }

    const Row& row(std::size_t i) const { return rows_[i]; }
    const std::vector<Row>& rows() const { return rows_; }

    /// Validates width and category-id range, then appends.
    void add_row(Row r);

    const std::vector<std::string>& categories(std::size_t col) const { return categories_[col]; }
    const std::string& category_name(std::size_t col, std::int32_t id) const;
    std::optional<std::int32_t> category_id(std::size_t col, std::string_view token) const;

    /// Fresh table with this table's schema and dictionaries but no rows.
    Table empty_like() const { return Table(schema_, categories_); }

    bool operator==(const Table&) const = default;

  private:
    Schema schema_;
    std::vector<Row> rows_;
    std::vector<std::vector<std::string>> categories_;
};

/// Convenience builder for tests and generators: cells given as strings
/// ("" or "NA" = missing), categorical dictionaries built sorted.
Table make_table(const Schema& schema, const std::vector<std::vector<std::string>>& cells);

/// Re-encodes both tables onto shared (union) category dictionaries so
/// category ids are comparable across them. Schemas must match by name/kind.
std::pair<Table, Table> unify_categories(const Table& a, const Table& b);

// ---------------------------------------------------------------------------
// CSV + schema sidecar I/O
//
// Dialect: comma separator, '"'-quoted fields with "" escaping, '.' decimal
// point, UTF-8, first line is the header. Missing cells are written as the
// empty field; an *unquoted* literal NA also reads as missing (a quoted "NA"
// is the category token NA).
// ---------------------------------------------------------------------------

/// Loads a CSV. Without a schema hint a column is Numeric iff every
/// non-missing cell parses completely as a finite number, else Categorical.
/// Errors (unreadable file, empty file, ragged row with its 1-based line
/// number) are reported as std::runtime_error.
Table load_csv(const std::string& path, const std::optional<Schema>& schema_hint = std::nullopt);

void save_csv(const Table& table, const std::string& path);

/// Sidecar format: one `name,kind` line per column (kind: numeric |
/// categorical), then optional `target=<name>` and
/// `task=<classification|regression|none>` lines.
Schema load_schema_sidecar(const std::string& path);
void save_schema_sidecar(const Schema& schema, const std::string& path);

// ---------------------------------------------------------------------------
// Splitting, normalization, distance
// ---------------------------------------------------------------------------

/// Deterministic shuffled split: |train| = round(train_fraction * n).
/// Same seed, same split. Throws if the fraction is outside (0,1).
std::pair<Table, Table> split_train_test(const Table& t, double train_fraction, std::uint64_t seed);

/// Per-numeric-column min/max for [0,1] normalization. Constant columns
/// (max == min) map every value to 0. Asking for a categorical column's
/// normalization is an error.
class Scaler {
  public:
    struct Range {
        double min = 0.0;
        double max = 0.0;
        bool constant = true;
        bool numeric = false;
    };

    const Range& range(std::size_t col) const { return ranges_[col]; }
    bool is_constant(std::size_t col) const { return ranges_[col].constant; }

    double normalized_value(std::size_t col, double raw) const {
        const Range& r = ranges_[col];
        if (!r.numeric)
            throw std::invalid_argument("scaler: column is not numeric");
        if (r.constant) return 0.0;
        return (raw - r.min) / (r.max - r.min);
    }

    friend Scaler fit_scaler(const Table& t);

  private:
    std::vector<Range> ranges_;
};

Scaler fit_scaler(const Table& t);

/// Minkowski row distance with per-feature deltas in [0,1]:
/// numeric -> |normalized difference|, categorical -> 0/1 mismatch,
/// exactly one side missing -> 1, both missing -> 0.
double row_distance(const Row& a, const Row& b, const Schema& schema, const Scaler& scaler,
                    double p);

/// Bound row-distance callable for the kernel helpers.
struct RowDistance {
    const Schema* schema;
    const Scaler* scaler;
    double p = 2.0;

    double operator()(const Row& a, const Row& b) const {
        return row_distance(a, b, *schema, *scaler, p);
    }
};

}  // namespace synthweave
