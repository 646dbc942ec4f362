#include "lmx/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "lmx/errors.hpp"
#include "lmx/rng.hpp"

namespace lmx {

const Column& DataTable::column(const std::string& name) const {
    for (const auto& c : columns)
        if (c.name == name) return c;
    throw SpecError("no such column: " + name);
}

bool DataTable::has_column(const std::string& name) const {
    return std::any_of(columns.begin(), columns.end(),
                       [&](const Column& c) { return c.name == name; });
}

namespace {

std::vector<std::vector<std::string>> tokenize_csv(const std::string& text,
                                                   const std::string& origin) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string cell;
    bool in_quotes = false;
    bool row_started = false;
    auto push_cell = [&] {
        row.push_back(cell);
        cell.clear();
    };
    auto push_row = [&] {
        push_cell();
        rows.push_back(std::move(row));
        row.clear();
        row_started = false;
    };
    for (size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        if (in_quotes) {
            if (ch == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cell += ch;
            }
            continue;
        }
        switch (ch) {
            case '"':
                in_quotes = true;
                row_started = true;
                break;
            case ',':
                push_cell();
                row_started = true;
                break;
            case '\r':
                break;
            case '\n':
                if (row_started || !cell.empty() || !row.empty()) push_row();
                break;
            default:
                cell += ch;
                row_started = true;
        }
    }
    if (in_quotes) throw IngestError(origin + ": unterminated quote");
    if (row_started || !cell.empty() || !row.empty()) push_row();
    return rows;
}

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

bool parse_number(const std::string& raw, double& out) {
    const std::string s = trim(raw);
    if (s.empty()) return false;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    // "inf"/"nan" text must not smuggle non-finite values into a fit.
    return ec == std::errc() && ptr == end && std::isfinite(out);
}

}  // namespace

DataTable parse_csv(const std::string& text, const std::string& origin) {
    const auto rows = tokenize_csv(text, origin);
    if (rows.empty()) throw IngestError(origin + ": empty file");
    const auto& header = rows[0];
    std::set<std::string> seen;
    for (const auto& name : header) {
        if (!seen.insert(trim(name)).second)
            throw IngestError(origin + ": duplicate header " + trim(name));
    }
    const long n_cols = static_cast<long>(header.size());
    const long n_rows = static_cast<long>(rows.size()) - 1;
    if (n_rows == 0) throw IngestError(origin + ": no data rows");

    std::vector<std::vector<std::string>> cells(n_cols, std::vector<std::string>(n_rows));
    for (long r = 0; r < n_rows; ++r) {
        const auto& line = rows[r + 1];
        if (static_cast<long>(line.size()) != n_cols)
            throw IngestError(origin + ": row " + std::to_string(r + 1) + " has " +
                                  std::to_string(line.size()) + " cells, expected " +
                                  std::to_string(n_cols),
                              r + 1);
        for (long c = 0; c < n_cols; ++c) {
            const std::string v = trim(line[c]);
            if (v.empty())
                throw IngestError(origin + ": missing cell at row " + std::to_string(r + 1) +
                                      ", column " + trim(header[c]),
                                  r + 1, c);
            cells[c][r] = v;
        }
    }

    DataTable table;
    table.n_rows = n_rows;
    for (long c = 0; c < n_cols; ++c) {
        Column col;
        col.name = trim(header[c]);
        std::vector<double> numeric(n_rows);
        bool all_numeric = true;
        for (long r = 0; r < n_rows; ++r) {
            if (!parse_number(cells[c][r], numeric[r])) {
                all_numeric = false;
                break;
            }
        }
        if (all_numeric) {
            col.data = NumericColumn{std::move(numeric)};
        } else {
            CategoricalColumn cat;
            cat.codes.resize(n_rows);
            std::map<std::string, int> level_of;
            for (long r = 0; r < n_rows; ++r) {
                auto it = level_of.find(cells[c][r]);
                if (it == level_of.end()) {
                    it = level_of.emplace(cells[c][r], static_cast<int>(cat.levels.size())).first;
                    cat.levels.push_back(cells[c][r]);
                }
                cat.codes[r] = it->second;
            }
            col.data = std::move(cat);
        }
        table.columns.push_back(std::move(col));
    }
    return table;
}

DataTable load_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), path);
}

namespace {

VectorXd numeric_values(const DataTable& table, const std::string& name) {
    const Column& col = table.column(name);
    if (!col.is_numeric()) throw SpecError("column is not numeric: " + name);
    const auto& v = std::get<NumericColumn>(col.data).values;
    return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

struct BuiltColumns {
    std::vector<std::string> names;
    std::vector<VectorXd> values;
};

void append_term(const DataTable& table, const Term& term, BuiltColumns& out);

// Interaction operand: a numeric column, or recursively a declared term.
BuiltColumns build_operand(const DataTable& table, const std::string& name) {
    BuiltColumns out;
    const Column& col = table.column(name);
    if (col.is_numeric()) {
        out.names.push_back(name);
        out.values.push_back(numeric_values(table, name));
        return out;
    }
    Term dummy;
    dummy.kind = Term::Kind::Dummy;
    dummy.name = name;
    append_term(table, dummy, out);
    return out;
}

void append_term(const DataTable& table, const Term& term, BuiltColumns& out) {
    switch (term.kind) {
        case Term::Kind::Numeric: {
            out.names.push_back(term.name);
            out.values.push_back(numeric_values(table, term.name));
            return;
        }
        case Term::Kind::Dummy: {
            const Column& col = table.column(term.name);
            if (col.is_numeric()) throw SpecError("dummy term on numeric column: " + term.name);
            const auto& cat = std::get<CategoricalColumn>(col.data);
            const std::string ref = term.reference.value_or(cat.levels.front());
            const auto it = std::find(cat.levels.begin(), cat.levels.end(), ref);
            if (it == cat.levels.end())
                throw SpecError("reference level " + ref + " absent from " + term.name);
            const int ref_code = static_cast<int>(it - cat.levels.begin());
            for (int lvl = 0; lvl < static_cast<int>(cat.levels.size()); ++lvl) {
                if (lvl == ref_code) continue;
                VectorXd v(table.n_rows);
                for (long r = 0; r < table.n_rows; ++r) v(r) = cat.codes[r] == lvl ? 1.0 : 0.0;
                out.names.push_back(term.name + ":" + cat.levels[lvl]);
                out.values.push_back(std::move(v));
            }
            return;
        }
        case Term::Kind::Interaction: {
            const BuiltColumns left = build_operand(table, term.left);
            const BuiltColumns right = build_operand(table, term.right);
            for (size_t i = 0; i < left.values.size(); ++i)
                for (size_t j = 0; j < right.values.size(); ++j) {
                    out.names.push_back(left.names[i] + "*" + right.names[j]);
                    out.values.push_back(left.values[i].cwiseProduct(right.values[j]));
                }
            return;
        }
    }
}

}  // namespace

ModelMatrix build_design(const DataTable& table, const DesignSpec& spec) {
    for (const auto& term : spec.terms) {
        if (term.name == spec.response || term.left == spec.response ||
            term.right == spec.response)
            throw SpecError("response appears among the terms: " + spec.response);
    }
    BuiltColumns built;
    if (spec.intercept) {
        built.names.push_back("(Intercept)");
        built.values.push_back(VectorXd::Ones(table.n_rows));
    }
    for (const auto& term : spec.terms) append_term(table, term, built);

    std::set<std::string> seen;
    for (const auto& name : built.names)
        if (!seen.insert(name).second) throw SpecError("duplicate design column: " + name);

    ModelMatrix mm;
    mm.has_intercept = spec.intercept;
    mm.column_names = built.names;
    mm.Y = numeric_values(table, spec.response);
    mm.X.resize(table.n_rows, static_cast<Eigen::Index>(built.values.size()));
    for (size_t j = 0; j < built.values.size(); ++j) {
        if (built.values[j].isZero(0.0)) throw SpecError("all-zero design column: " + built.names[j]);
        mm.X.col(static_cast<Eigen::Index>(j)) = built.values[j];
    }
    if (spec.weights) {
        VectorXd w = numeric_values(table, *spec.weights);
        if ((w.array() <= 0.0).any()) throw SpecError("nonpositive weight in " + *spec.weights);
        mm.weights = std::move(w);
    }
    if (spec.cluster) {
        const Column& col = table.column(*spec.cluster);
        std::vector<std::string> ids(table.n_rows);
        if (col.is_numeric()) {
            const auto& v = std::get<NumericColumn>(col.data).values;
            for (long r = 0; r < table.n_rows; ++r) {
                std::ostringstream os;
                os << v[r];
                ids[r] = os.str();
            }
        } else {
            const auto& cat = std::get<CategoricalColumn>(col.data);
            for (long r = 0; r < table.n_rows; ++r) ids[r] = cat.levels[cat.codes[r]];
        }
        mm.cluster_ids = std::move(ids);
    }
    if (spec.event) {
        VectorXd e = numeric_values(table, *spec.event);
        for (Eigen::Index i = 0; i < e.size(); ++i)
            if (e(i) != 0.0 && e(i) != 1.0) throw SpecError("event column must be 0/1");
        mm.event = std::move(e);
    }
    return mm;
}

std::pair<ModelMatrix, Standardization> standardize(const ModelMatrix& mm) {
    const long n = mm.n();
    std::vector<long> keep;
    for (long j = 0; j < mm.p(); ++j)
        if (!(mm.has_intercept && j == 0)) keep.push_back(j);

    Standardization s;
    s.response_mean = mm.Y.mean();
    s.column_means.resize(static_cast<Eigen::Index>(keep.size()));
    s.column_scales.resize(static_cast<Eigen::Index>(keep.size()));

    ModelMatrix out;
    out.has_intercept = false;
    out.Y = mm.Y.array() - s.response_mean;
    out.weights = mm.weights;
    out.cluster_ids = mm.cluster_ids;
    out.event = mm.event;
    out.X.resize(n, static_cast<Eigen::Index>(keep.size()));
    for (size_t jj = 0; jj < keep.size(); ++jj) {
        const long j = keep[jj];
        const VectorXd col = mm.X.col(j);
        const double mean = col.mean();
        // Divisor n, not n-1.
        const double scale = std::sqrt((col.array() - mean).square().sum() / n);
        if (scale < 1e-12 * std::max(1.0, std::fabs(mean)))
            throw DegenerateColumnError(mm.column_names[j]);
        s.column_means(static_cast<Eigen::Index>(jj)) = mean;
        s.column_scales(static_cast<Eigen::Index>(jj)) = scale;
        out.X.col(static_cast<Eigen::Index>(jj)) = (col.array() - mean) / scale;
        out.column_names.push_back(mm.column_names[j]);
    }
    return {std::move(out), std::move(s)};
}

VectorXd destandardize_fitted(const MatrixXd& X_orig, const VectorXd& beta_std,
                              const Standardization& s, bool had_intercept) {
    const long offset = had_intercept ? 1 : 0;
    VectorXd fitted = VectorXd::Constant(X_orig.rows(), s.response_mean);
    for (Eigen::Index j = 0; j < beta_std.size(); ++j) {
        fitted += (X_orig.col(j + offset).array() - s.column_means(j)).matrix() *
                  (beta_std(j) / s.column_scales(j));
    }
    return fitted;
}

std::vector<std::vector<long>> kfold_indices(long n, long k, std::uint64_t seed) {
    if (k < 2 || k > n) throw SpecError("kfold: need 2 <= K <= n");
    std::vector<long> perm(n);
    for (long i = 0; i < n; ++i) perm[i] = i;
    Rng rng(seed);
    // Fisher-Yates.
    for (long i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.uniform_int(i + 1)]);
    std::vector<std::vector<long>> folds(k);
    for (long i = 0; i < n; ++i) folds[i % k].push_back(perm[i]);
    return folds;
}

}  // namespace lmx
