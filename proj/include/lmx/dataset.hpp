#ifndef LMX_DATASET_HPP
#define LMX_DATASET_HPP

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lmx/linalg.hpp"

namespace lmx {

// A column is numeric, or categorical with integer codes into `levels`
// (levels ordered by first appearance in the file).
struct NumericColumn {
    std::vector<double> values;
};

struct CategoricalColumn {
    std::vector<int> codes;
    std::vector<std::string> levels;
};

struct Column {
    std::string name;
    std::variant<NumericColumn, CategoricalColumn> data;
    bool is_numeric() const { return std::holds_alternative<NumericColumn>(data); }
};

struct DataTable {
    std::vector<Column> columns;
    long n_rows = 0;

    const Column& column(const std::string& name) const;
    bool has_column(const std::string& name) const;
};

// Model terms: a numeric column, a dummy expansion of a categorical
// column omitting the reference level, or an elementwise product.
struct Term {
    enum class Kind { Numeric, Dummy, Interaction };
    Kind kind = Kind::Numeric;
    std::string name;                        // numeric / dummy column
    std::optional<std::string> reference;    // dummy: reference level (default first)
    std::string left, right;                 // interaction operands (numeric columns or declared terms)
};

struct DesignSpec {
    std::string response;
    std::vector<Term> terms;
    bool intercept = true;
    std::optional<std::string> weights;
    std::optional<std::string> cluster;
    std::optional<std::string> event;  // survival indicator column
};

struct ModelMatrix {
    MatrixXd X;
    std::vector<std::string> column_names;
    VectorXd Y;
    std::optional<VectorXd> weights;
    std::optional<std::vector<std::string>> cluster_ids;
    std::optional<VectorXd> event;
    bool has_intercept = false;

    long n() const { return X.rows(); }
    long p() const { return X.cols(); }
};

// Back-transform record for standardized fits: each covariate column is
// centered and scaled to n^{-1} sum x^2 = 1 (divisor n, not n-1), and
// the response is centered.
struct Standardization {
    VectorXd column_means;
    VectorXd column_scales;
    double response_mean = 0.0;
};

// CSV ingestion: comma separated, double-quote escaping, header row
// required, UTF-8, decimal point only. A column parses as numeric only
// when every cell does; otherwise it is categorical with levels in
// first-appearance order. Missing cells are rejected.
DataTable load_csv(const std::string& path);
DataTable parse_csv(const std::string& text, const std::string& origin = "<memory>");

ModelMatrix build_design(const DataTable& table, const DesignSpec& spec);

std::pair<ModelMatrix, Standardization> standardize(const ModelMatrix& mm);

// Fitted values on the original scale from coefficients on the
// standardized scale.
VectorXd destandardize_fitted(const MatrixXd& X_orig, const VectorXd& beta_std,
                              const Standardization& s, bool had_intercept);

// Deterministic K-fold partition of {0, ..., n-1}; fold sizes differ by
// at most one.
std::vector<std::vector<long>> kfold_indices(long n, long k, std::uint64_t seed);

}  // namespace lmx

#endif
