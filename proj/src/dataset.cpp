#include "synthweave/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace synthweave {

namespace {

std::string kind_name(ColumnKind k) {
    return k == ColumnKind::Numeric ? "numeric" : "categorical";
}

/// Full-token parse of a finite double; rejects trailing garbage, NaN, inf.
std::optional<double> parse_finite(std::string_view token) {
    if (token.empty()) return std::nullopt;
    double value = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) return std::nullopt;
    if (!std::isfinite(value)) return std::nullopt;
    return value;
}

struct RawField {
    std::string text;
    bool quoted = false;
};

/// One CSV record; handles quoted fields with "" escapes and embedded
/// newlines. Returns false at EOF. `line` tracks the physical line where
/// the record starts (1-based) for error reporting.
bool read_record(std::istream& in, std::vector<RawField>& out, std::size_t& line) {
    out.clear();
    int c = in.get();
    if (c == EOF) return false;
    RawField field;
    bool in_quotes = false;
    bool any = false;
    while (true) {
        if (c == EOF) break;
        any = true;
        if (in_quotes) {
            if (c == '"') {
                int nxt = in.peek();
                if (nxt == '"') {
                    field.text.push_back('"');
                    in.get();
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field.text.push_back(static_cast<char>(c));
            }
        } else if (c == '"' && field.text.empty() && !field.quoted) {
            in_quotes = true;
            field.quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(field));
            field = RawField{};
        } else if (c == '\n') {
            ++line;
            break;
        } else if (c == '\r') {
            // swallow; \r\n handled by the following \n
        } else {
            field.text.push_back(static_cast<char>(c));
        }
        c = in.get();
    }
    if (!any) return false;
    out.push_back(std::move(field));
    return true;
}

bool is_missing_field(const RawField& f) {
    return !f.quoted && (f.text.empty() || f.text == "NA");
}

std::string csv_escape(const std::string& field) {
    const bool needs_quote = field.empty() ? false
                                           : field == "NA" ||
                                                 field.find_first_of(",\"\n\r") != std::string::npos;
    if (!needs_quote) return field;
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out += "\"\"";
        else out.push_back(ch);
    }
    out += "\"";
    return out;
}

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

// --- Schema ----------------------------------------------------------------

std::optional<std::size_t> Schema::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i].name == name) return i;
    return std::nullopt;
}

void Schema::validate() const {
    std::set<std::string> seen;
    for (const auto& c : columns) {
        if (c.name.empty()) throw std::invalid_argument("schema: empty column name");
        if (!seen.insert(c.name).second)
            throw std::invalid_argument("schema: duplicate column name '" + c.name + "'");
    }
    if (task != TaskKind::None) {
        if (!target) throw std::invalid_argument("schema: task set but no target column");
        auto idx = index_of(*target);
        if (!idx) throw std::invalid_argument("schema: target '" + *target + "' not a column");
        if (task == TaskKind::Regression && columns[*idx].kind != ColumnKind::Numeric)
            throw std::invalid_argument("schema: regression target must be numeric");
    } else if (target && !index_of(*target)) {
        throw std::invalid_argument("schema: target '" + *target + "' not a column");
    }
}

// --- Cell / Table ------------------------------------------------------------

Cell Cell::number(double v) {
    if (!std::isfinite(v)) throw std::invalid_argument("cell: numeric value must be finite");
    Cell c;
    c.tag_ = Tag::Number;
    c.num_ = v;
    return c;
}

Cell Cell::category(std::int32_t id) {
    if (id < 0) throw std::invalid_argument("cell: category id must be >= 0");
    Cell c;
    c.tag_ = Tag::Category;
    c.cat_ = id;
    return c;
}

Table::Table(Schema schema, std::vector<std::vector<std::string>> categories)
    : schema_(std::move(schema)), categories_(std::move(categories)) {
    schema_.validate();
    if (categories_.size() != schema_.column_count())
        throw std::invalid_argument("table: dictionary count must match column count");
}

void Table::add_row(Row r) {
    if (r.size() != n_cols()) throw std::invalid_argument("table: row width mismatch");
    for (std::size_t c = 0; c < r.size(); ++c) {
        const auto kind = schema_.columns[c].kind;
        if (r[c].is_number() && kind != ColumnKind::Numeric)
            throw std::invalid_argument("table: numeric cell in categorical column");
        if (r[c].is_category()) {
            if (kind != ColumnKind::Categorical)
                throw std::invalid_argument("table: categorical cell in numeric column");
            if (static_cast<std::size_t>(r[c].cat()) >= categories_[c].size())
                throw std::invalid_argument("table: category id out of range");
        }
    }
    rows_.push_back(std::move(r));
}

const std::string& Table::category_name(std::size_t col, std::int32_t id) const {
    return categories_[col].at(static_cast<std::size_t>(id));
}

std::optional<std::int32_t> Table::category_id(std::size_t col, std::string_view token) const {
    const auto& dict = categories_[col];
    auto it = std::lower_bound(dict.begin(), dict.end(), token);
    if (it == dict.end() || *it != token) return std::nullopt;
    return static_cast<std::int32_t>(it - dict.begin());
}

Table make_table(const Schema& schema, const std::vector<std::vector<std::string>>& cells) {
    std::vector<std::vector<std::string>> dicts(schema.column_count());
    for (std::size_t c = 0; c < schema.column_count(); ++c) {
        if (schema.columns[c].kind != ColumnKind::Categorical) continue;
        std::set<std::string> uniq;
        for (const auto& row : cells) {
            if (row.size() != schema.column_count())
                throw std::invalid_argument("make_table: row width mismatch");
            const auto& tok = row[c];
            if (tok.empty() || tok == "NA") continue;
            uniq.insert(tok);
        }
        dicts[c].assign(uniq.begin(), uniq.end());
    }
    Table t(schema, std::move(dicts));
    for (const auto& row : cells) {
        Row r;
        r.reserve(row.size());
        for (std::size_t c = 0; c < row.size(); ++c) {
            const auto& tok = row[c];
            if (tok.empty() || tok == "NA") {
                r.push_back(Cell::missing());
            } else if (schema.columns[c].kind == ColumnKind::Numeric) {
                auto v = parse_finite(tok);
                if (!v) throw std::invalid_argument("make_table: non-numeric token '" + tok + "'");
                r.push_back(Cell::number(*v));
            } else {
                r.push_back(Cell::category(*t.category_id(c, tok)));
            }
        }
        t.add_row(std::move(r));
    }
    return t;
}

std::pair<Table, Table> unify_categories(const Table& a, const Table& b) {
    if (a.schema().columns != b.schema().columns)
        throw std::invalid_argument("unify_categories: schemas differ");
    const std::size_t cols = a.n_cols();
    std::vector<std::vector<std::string>> merged(cols);
    for (std::size_t c = 0; c < cols; ++c) {
        if (a.schema().columns[c].kind != ColumnKind::Categorical) continue;
        std::set<std::string> uniq(a.categories(c).begin(), a.categories(c).end());
        uniq.insert(b.categories(c).begin(), b.categories(c).end());
        merged[c].assign(uniq.begin(), uniq.end());
    }
    auto remap = [&](const Table& src) {
        Table out(src.schema(), merged);
        for (const auto& row : src.rows()) {
            Row r = row;
            for (std::size_t c = 0; c < cols; ++c) {
                if (!r[c].is_category()) continue;
                const auto& tok = src.category_name(c, r[c].cat());
                auto it = std::lower_bound(merged[c].begin(), merged[c].end(), tok);
                r[c] = Cell::category(static_cast<std::int32_t>(it - merged[c].begin()));
            }
            out.add_row(std::move(r));
        }
        return out;
    };
    return {remap(a), remap(b)};
}

// --- CSV -----------------------------------------------------------------

Table load_csv(const std::string& path, const std::optional<Schema>& schema_hint) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_csv: cannot open '" + path + "'");

    std::size_t line = 1;
    std::vector<RawField> header;
    if (!read_record(in, header, line))
        throw std::runtime_error("load_csv: '" + path + "' is empty");

    const std::size_t cols = header.size();
    struct RawRecord {
        std::vector<RawField> fields;
        std::size_t line;
    };
    std::vector<RawRecord> records;
    std::vector<RawField> fields;
    while (true) {
        const std::size_t start_line = line;
        if (!read_record(in, fields, line)) break;
        if (fields.size() == 1 && is_missing_field(fields[0]) && in.eof() && fields[0].text.empty())
            break;  // trailing newline artifact
        if (fields.size() != cols)
            throw std::runtime_error("load_csv: ragged row at line " + std::to_string(start_line) +
                                     " (" + std::to_string(fields.size()) + " fields, expected " +
                                     std::to_string(cols) + ")");
        records.push_back({std::move(fields), start_line});
        fields.clear();
    }

    Schema schema;
    if (schema_hint) {
        schema = *schema_hint;
        if (schema.column_count() != cols)
            throw std::runtime_error("load_csv: schema hint has " +
                                     std::to_string(schema.column_count()) + " columns, file has " +
                                     std::to_string(cols));
        for (std::size_t c = 0; c < cols; ++c) {
            if (schema.columns[c].name != header[c].text)
                throw std::runtime_error("load_csv: header '" + header[c].text +
                                         "' does not match schema column '" +
                                         schema.columns[c].name + "'");
        }
    } else {
        schema.columns.resize(cols);
        for (std::size_t c = 0; c < cols; ++c) {
            schema.columns[c].name = header[c].text;
            bool numeric = true;
            for (const auto& rec : records) {
                const auto& f = rec.fields[c];
                if (is_missing_field(f)) continue;
                if (!parse_finite(f.text)) {
                    numeric = false;
                    break;
                }
            }
            schema.columns[c].kind = numeric ? ColumnKind::Numeric : ColumnKind::Categorical;
        }
    }
    schema.validate();

    std::vector<std::vector<std::string>> dicts(cols);
    for (std::size_t c = 0; c < cols; ++c) {
        if (schema.columns[c].kind != ColumnKind::Categorical) continue;
        std::set<std::string> uniq;
        for (const auto& rec : records)
            if (!is_missing_field(rec.fields[c])) uniq.insert(rec.fields[c].text);
        dicts[c].assign(uniq.begin(), uniq.end());
    }

    Table t(schema, std::move(dicts));
    for (const auto& rec : records) {
        Row r;
        r.reserve(cols);
        for (std::size_t c = 0; c < cols; ++c) {
            const auto& f = rec.fields[c];
            if (is_missing_field(f)) {
                r.push_back(Cell::missing());
            } else if (schema.columns[c].kind == ColumnKind::Numeric) {
                auto v = parse_finite(f.text);
                if (!v)
                    throw std::runtime_error("load_csv: line " + std::to_string(rec.line) +
                                             ": '" + f.text + "' is not a finite number (column " +
                                             schema.columns[c].name + ")");
                r.push_back(Cell::number(*v));
            } else {
                r.push_back(Cell::category(*t.category_id(c, f.text)));
            }
        }
        t.add_row(std::move(r));
    }
    return t;
}

void save_csv(const Table& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_csv: cannot open '" + path + "' for writing");
    const auto& cols = table.schema().columns;
    for (std::size_t c = 0; c < cols.size(); ++c) {
        if (c) out << ',';
        out << csv_escape(cols[c].name);
    }
    out << '\n';
    for (const auto& row : table.rows()) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << ',';
            const Cell& cell = row[c];
            if (cell.is_missing()) continue;
            if (cell.is_number()) out << format_number(cell.num());
            else out << csv_escape(table.category_name(c, cell.cat()));
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("save_csv: write failed for '" + path + "'");
}

Schema load_schema_sidecar(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("schema sidecar: cannot open '" + path + "'");
    Schema schema;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        if (raw.empty() || raw[0] == '#') continue;
        if (raw.rfind("target=", 0) == 0) {
            schema.target = raw.substr(7);
            continue;
        }
        if (raw.rfind("task=", 0) == 0) {
            const std::string v = raw.substr(5);
            if (v == "classification") schema.task = TaskKind::Classification;
            else if (v == "regression") schema.task = TaskKind::Regression;
            else if (v == "none") schema.task = TaskKind::None;
            else
                throw std::runtime_error("schema sidecar: unknown task '" + v + "' at line " +
                                         std::to_string(line_no));
            continue;
        }
        const auto comma = raw.rfind(',');
        if (comma == std::string::npos)
            throw std::runtime_error("schema sidecar: expected 'name,kind' at line " +
                                     std::to_string(line_no));
        const std::string name = raw.substr(0, comma);
        const std::string kind = raw.substr(comma + 1);
        ColumnKind k;
        if (kind == "numeric") k = ColumnKind::Numeric;
        else if (kind == "categorical") k = ColumnKind::Categorical;
        else
            throw std::runtime_error("schema sidecar: unknown kind '" + kind + "' at line " +
                                     std::to_string(line_no));
        schema.columns.push_back({name, k});
    }
    schema.validate();
    return schema;
}

void save_schema_sidecar(const Schema& schema, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("schema sidecar: cannot open '" + path + "' for writing");
    for (const auto& c : schema.columns) out << c.name << ',' << kind_name(c.kind) << '\n';
    if (schema.target) out << "target=" << *schema.target << '\n';
    if (schema.task == TaskKind::Classification) out << "task=classification\n";
    else if (schema.task == TaskKind::Regression) out << "task=regression\n";
}

// --- split / scaler / distance ------------------------------------------------

std::pair<Table, Table> split_train_test(const Table& t, double train_fraction,
                                         std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("split_train_test: fraction must lie in (0,1)");
    if (t.n_rows() < 2) throw std::invalid_argument("split_train_test: need at least 2 rows");

    const std::size_t n = t.n_rows();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    for (std::size_t i = n - 1; i > 0; --i)
        std::swap(order[i], order[rng.next_index(i + 1)]);

    const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    Table train = t.empty_like();
    Table test = t.empty_like();
    for (std::size_t i = 0; i < n; ++i)
        (i < n_train ? train : test).add_row(t.row(order[i]));
    return {train, test};
}

Scaler fit_scaler(const Table& t) {
    Scaler s;
    s.ranges_.resize(t.n_cols());
    for (std::size_t c = 0; c < t.n_cols(); ++c) {
        if (t.schema().columns[c].kind != ColumnKind::Numeric) continue;
        bool seen = false;
        double lo = 0.0, hi = 0.0;
        for (const auto& row : t.rows()) {
            if (!row[c].is_number()) continue;
            const double v = row[c].num();
            if (!seen) {
                lo = hi = v;
                seen = true;
            } else {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
        s.ranges_[c] = {lo, hi, !seen || lo == hi, true};
    }
    return s;
}

double row_distance(const Row& a, const Row& b, const Schema& schema, const Scaler& scaler,
                    double p) {
    if (!(p > 0.0)) throw std::invalid_argument("row_distance: p must be > 0");
    const std::size_t cols = schema.column_count();
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
        const Cell& x = a[c];
        const Cell& y = b[c];
        double delta;
        if (x.is_missing() || y.is_missing()) {
            delta = (x.is_missing() && y.is_missing()) ? 0.0 : 1.0;
        } else if (schema.columns[c].kind == ColumnKind::Numeric) {
            delta = std::fabs(scaler.normalized_value(c, x.num()) -
                              scaler.normalized_value(c, y.num()));
        } else {
            delta = x.cat() == y.cat() ? 0.0 : 1.0;
        }
        if (delta == 0.0) continue;
        if (p == 2.0) acc += delta * delta;
        else if (p == 1.0) acc += delta;
        else acc += std::pow(delta, p);
    }
    if (acc == 0.0) return 0.0;
    if (p == 2.0) return std::sqrt(acc);
    if (p == 1.0) return acc;
    return std::pow(acc, 1.0 / p);
}

}  // namespace synthweave
