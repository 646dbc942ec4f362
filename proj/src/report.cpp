#include "lmx/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "lmx/errors.hpp"

namespace lmx {

ReportFormat parse_format(const std::string& name) {
    if (name == "json") return ReportFormat::Json;
    if (name == "text") return ReportFormat::Text;
    throw SpecError("unknown format: " + name);
}

double round_sig10(double x) {
    if (!std::isfinite(x) || x == 0.0) return x;
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9e", x);
    return std::strtod(buf, nullptr);
}

nlohmann::json json_number(double x) {
    if (std::isnan(x)) return nullptr;
    return round_sig10(x);
}

namespace {

std::string format_number(double x) {
    if (std::isnan(x)) return "NA";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", x);
    return buf;
}

}  // namespace

std::string emit_report(const Report& report, ReportFormat format) {
    if (format == ReportFormat::Json) {
        nlohmann::json j;
        j["model_kind"] = report.model_kind;
        if (!report.covariance_kind.empty()) j["covariance_kind"] = report.covariance_kind;
        nlohmann::json coefs = nlohmann::json::array();
        for (const auto& row : report.coefficients) {
            nlohmann::json c;
            c["name"] = row.name;
            c["estimate"] = json_number(row.estimate);
            c["se"] = json_number(row.se);
            c["statistic"] = json_number(row.statistic);
            c["p_value"] = json_number(row.p_value);
            coefs.push_back(std::move(c));
        }
        j["coefficients"] = std::move(coefs);
        nlohmann::json stats;
        for (const auto& [key, value] : report.fit_stats) stats[key] = json_number(value);
        j["fit_stats"] = std::move(stats);
        if (report.diagnostics && !report.diagnostics->empty())
            j["diagnostics"] = *report.diagnostics;
        if (!report.warnings.empty()) j["warnings"] = report.warnings;
        return j.dump(2) + "\n";
    }

    std::ostringstream out;
    out << report.model_kind;
    if (!report.covariance_kind.empty()) out << "  (se: " << report.covariance_kind << ")";
    out << "\n\n";
    if (!report.coefficients.empty()) {
        const std::string stat_head =
            report.coefficients.front().stat_kind == "z" ? "z value" : "t value";
        char line[160];
        std::snprintf(line, sizeof(line), "%-18s %12s %12s %10s %12s\n", "", "Estimate",
                      "Std. Error", stat_head.c_str(), "Pr(>|stat|)");
        out << line;
        for (const auto& row : report.coefficients) {
            std::snprintf(line, sizeof(line), "%-18s %12s %12s %10s %12s\n", row.name.c_str(),
                          format_number(row.estimate).c_str(), format_number(row.se).c_str(),
                          format_number(row.statistic).c_str(),
                          format_number(row.p_value).c_str());
            out << line;
        }
        out << "\n";
    }
    for (const auto& [key, value] : report.fit_stats)
        out << key << ": " << format_number(value) << "\n";
    if (report.diagnostics && !report.diagnostics->empty())
        out << "diagnostics: " << report.diagnostics->dump() << "\n";
    for (const auto& w : report.warnings) out << "warning: " << w << "\n";
    return out.str();
}

std::string emit_error(const std::string& kind, const std::string& message,
                       ReportFormat format) {
    if (format == ReportFormat::Json) {
        nlohmann::json j;
        j["error"] = {{"kind", kind}, {"message", message}};
        return j.dump(2) + "\n";
    }
    return "error (" + kind + "): " + message + "\n";
}

}  // namespace lmx
