#ifndef LMX_REPORT_HPP
#define LMX_REPORT_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace lmx {

struct CoefficientRow {
    std::string name;
    double estimate = 0.0;
    double se = 0.0;
    double statistic = 0.0;
    double p_value = 0.0;
    std::string stat_kind = "t";  // "t" or "z"
};

// The one report shape every CLI subcommand renders. JSON output is
// byte-stable for identical inputs: canonical (alphabetical) key order
// and values rounded to 10 significant digits before serialization.
// NaN is serialized as null.
struct Report {
    std::string model_kind;
    std::vector<CoefficientRow> coefficients;
    std::string covariance_kind;
    std::map<std::string, double> fit_stats;
    std::optional<nlohmann::json> diagnostics;
    std::vector<std::string> warnings;
};

enum class ReportFormat { Json, Text };

ReportFormat parse_format(const std::string& name);

// Round to 10 significant decimal digits; NaN/Inf pass through for the
// serializer to map to null.
double round_sig10(double x);

// NaN-safe JSON value at 10 significant digits.
nlohmann::json json_number(double x);

std::string emit_report(const Report& report, ReportFormat format);

// Machine-readable error payload (always valid JSON under --format json).
std::string emit_error(const std::string& kind, const std::string& message,
                       ReportFormat format);

}  // namespace lmx

#endif
