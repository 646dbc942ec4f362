#include "lmx/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <map>
#include <sstream>

#include "lmx/dataset.hpp"
#include "lmx/diagnostics.hpp"
#include "lmx/dist.hpp"
#include "lmx/errors.hpp"
#include "lmx/gee.hpp"
#include "lmx/glm.hpp"
#include "lmx/quantile.hpp"
#include "lmx/report.hpp"
#include "lmx/shrinkage.hpp"
#include "lmx/simulate.hpp"
#include "lmx/survival.hpp"

namespace lmx::cli {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (std::getline(in, tok, sep))
        if (!tok.empty()) out.push_back(tok);
    return out;
}

struct CommonOpts {
    std::string data_path;
    std::string response;
    std::string covariates;  // comma separated
    std::vector<std::string> dummies;       // col:ref
    std::vector<std::string> interactions;  // a:b
    bool no_intercept = false;
    std::string weights;
    std::string cluster;
    std::string se_kind = "classic";
    std::string family = "logit";
    double tau = 0.5;
    double lambda = -1.0;
    long cv_k = 0;
    double alpha = 0.0;
    double level = 0.95;
    std::uint64_t seed = 0;
    std::string format = "text";
};

void add_common_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--data", o.data_path, "CSV input path");
    cmd->add_option("--response", o.response, "response column");
    cmd->add_option("--covariates", o.covariates, "comma-separated covariate columns");
    cmd->add_option("--dummy", o.dummies, "categorical term col:reference");
    cmd->add_option("--interaction", o.interactions, "interaction term a:b");
    cmd->add_flag("--no-intercept", o.no_intercept, "drop the intercept column");
    cmd->add_option("--weights", o.weights, "weight column");
    cmd->add_option("--cluster", o.cluster, "cluster id column");
    cmd->add_option("--se", o.se_kind, "classic|hc0..hc4|cluster|sandwich|boot|powell");
    cmd->add_option("--family", o.family, "logit|probit|cloglog|cauchit|poisson|negbin|linear");
    cmd->add_option("--tau", o.tau, "quantile level");
    cmd->add_option("--lambda", o.lambda, "penalty value");
    cmd->add_option("--cv", o.cv_k, "K-fold cross-validation");
    cmd->add_option("--alpha", o.alpha, "elastic-net mix (0 = lasso, 1 = ridge)");
    cmd->add_option("--level", o.level, "confidence level");
    cmd->add_option("--seed", o.seed, "random seed");
    cmd->add_option("--format", o.format, "json|text");
}

DesignSpec design_from(const CommonOpts& o, const DataTable& table) {
    DesignSpec spec;
    spec.response = o.response;
    spec.intercept = !o.no_intercept;
    if (!o.weights.empty()) spec.weights = o.weights;
    if (!o.cluster.empty()) spec.cluster = o.cluster;

    std::map<std::string, std::string> dummy_ref;
    for (const auto& d : o.dummies) {
        const auto parts = split(d, ':');
        if (parts.size() == 2)
            dummy_ref[parts[0]] = parts[1];
        else if (parts.size() == 1)
            dummy_ref[parts[0]] = "";
        else
            throw SpecError("bad --dummy, expected col:ref: " + d);
    }

    std::vector<std::string> listed = split(o.covariates, ',');
    for (const auto& name : listed) {
        Term term;
        const Column& col = table.column(name);
        if (col.is_numeric() && !dummy_ref.count(name)) {
            term.kind = Term::Kind::Numeric;
            term.name = name;
        } else {
            term.kind = Term::Kind::Dummy;
            term.name = name;
            auto it = dummy_ref.find(name);
            if (it != dummy_ref.end() && !it->second.empty()) term.reference = it->second;
            dummy_ref.erase(name);
        }
        spec.terms.push_back(term);
    }
    // Dummies not listed under --covariates still enter the design.
    for (const auto& [name, ref] : dummy_ref) {
        Term term;
        term.kind = Term::Kind::Dummy;
        term.name = name;
        if (!ref.empty()) term.reference = ref;
        spec.terms.push_back(term);
    }
    for (const auto& inter : o.interactions) {
        const auto parts = split(inter, ':');
        if (parts.size() != 2) throw SpecError("bad --interaction, expected a:b: " + inter);
        Term term;
        term.kind = Term::Kind::Interaction;
        term.left = parts[0];
        term.right = parts[1];
        spec.terms.push_back(term);
    }
    return spec;
}

ModelMatrix load_design(const CommonOpts& o) {
    if (o.data_path.empty()) throw SpecError("--data is required");
    if (o.response.empty()) throw SpecError("--response is required");
    const DataTable table = load_csv(o.data_path);
    return build_design(table, design_from(o, table));
}

void coefficient_rows(Report& report, const std::vector<std::string>& names,
                      const VectorXd& beta, const VectorXd& se, bool t_stats, double df) {
    for (long j = 0; j < beta.size(); ++j) {
        CoefficientRow row;
        row.name = names[j];
        row.estimate = beta(j);
        row.se = se(j);
        row.statistic = se(j) > 0 ? beta(j) / se(j) : std::numeric_limits<double>::quiet_NaN();
        row.stat_kind = t_stats ? "t" : "z";
        if (std::isnan(row.statistic))
            row.p_value = std::numeric_limits<double>::quiet_NaN();
        else
            row.p_value = t_stats ? dist::t_two_sided_p(row.statistic, df)
                                  : dist::normal_two_sided_p(row.statistic);
        report.coefficients.push_back(row);
    }
}

CovEstimate::Kind parse_hc(const std::string& kind) {
    if (kind == "hc0") return CovEstimate::Kind::HC0;
    if (kind == "hc1") return CovEstimate::Kind::HC1;
    if (kind == "hc2") return CovEstimate::Kind::HC2;
    if (kind == "hc3") return CovEstimate::Kind::HC3;
    if (kind == "hc4") return CovEstimate::Kind::HC4;
    throw SpecError("unknown --se kind: " + kind);
}

Report run_fit(const CommonOpts& o) {
    const ModelMatrix mm = load_design(o);
    const OlsFit fit = fit_ols(mm);
    Report report;
    report.model_kind = "ols";
    report.covariance_kind = o.se_kind;
    VectorXd se;
    bool t_stats = false;
    if (o.se_kind == "classic") {
        se = classic_covariance(fit).se;
        t_stats = true;
    } else if (o.se_kind == "cluster") {
        if (!mm.cluster_ids) throw SpecError("--se cluster needs --cluster");
        const PanelData panel = make_panel(mm, GlmFamily::linear());
        GeeFit gee;
        gee.beta = fit.beta;
        se = lz_cov(gee, panel).se;
    } else {
        se = hc_covariance(fit, parse_hc(o.se_kind)).se;
    }
    coefficient_rows(report, fit.column_names, fit.beta, se, t_stats,
                     static_cast<double>(fit.df_residual));
    report.fit_stats["n"] = static_cast<double>(fit.n());
    report.fit_stats["p"] = static_cast<double>(fit.p());
    report.fit_stats["df_residual"] = static_cast<double>(fit.df_residual);
    report.fit_stats["sigma2"] = fit.sigma2_hat;
    if (fit.has_intercept) {
        report.fit_stats["r2"] = fit.r2;
        report.fit_stats["adj_r2"] = fit.adj_r2;
    }
    return report;
}

Report run_wls(const CommonOpts& o) {
    const ModelMatrix mm = load_design(o);
    const WlsFit fit = wls_fit(mm);
    Report report;
    report.model_kind = "wls";
    const bool sandwich = o.se_kind == "sandwich" || o.se_kind == "wls_sandwich";
    report.covariance_kind = sandwich ? "wls_sandwich" : "classic";
    VectorXd se;
    if (sandwich)
        se = wls_sandwich(fit).se;
    else
        se = (fit.sigma2_w * fit.xtwx_inv).diagonal().cwiseSqrt();
    coefficient_rows(report, fit.column_names, fit.beta_w, se, !sandwich,
                     static_cast<double>(fit.n() - fit.p()));
    report.fit_stats["n"] = static_cast<double>(fit.n());
    report.fit_stats["p"] = static_cast<double>(fit.p());
    report.fit_stats["sigma2_weighted"] = fit.sigma2_w;
    return report;
}

Report run_diagnose(const CommonOpts& o) {
    const ModelMatrix mm = load_design(o);
    const OlsFit fit = fit_ols(mm);
    const LooResult loo = loo_all(fit);
    const InfluenceReport infl = influence(fit);
    const CovEstimate jack = jackknife_cov(fit);

    Report report;
    report.model_kind = "ols-diagnostics";
    report.covariance_kind = "jackknife";
    coefficient_rows(report, fit.column_names, fit.beta, jack.se, false, 0.0);
    report.fit_stats["n"] = static_cast<double>(fit.n());
    report.fit_stats["p"] = static_cast<double>(fit.p());
    report.fit_stats["sigma2"] = fit.sigma2_hat;
    report.fit_stats["press"] = loo.press;
    report.fit_stats["gcv"] = loo.gcv;

    nlohmann::json diag;
    auto vec_json = [](const VectorXd& v) {
        nlohmann::json arr = nlohmann::json::array();
        for (long i = 0; i < v.size(); ++i) arr.push_back(json_number(v(i)));
        return arr;
    };
    diag["leverage"] = vec_json(fit.leverage);
    diag["standardized"] = vec_json(infl.standardized);
    diag["studentized"] = vec_json(infl.studentized);
    diag["cook"] = vec_json(infl.cook);
    diag["pred_residuals"] = vec_json(loo.pred_residuals);
    report.diagnostics = std::move(diag);
    return report;
}

Report run_ridge(const CommonOpts& o) {
    const ModelMatrix mm = load_design(o);
    auto [mm_std, st] = standardize(mm);
    std::vector<double> lambdas;
    if (o.lambda >= 0.0) lambdas.push_back(o.lambda);
    for (long g = 0; g < 100; ++g) lambdas.push_back(1e-3 * std::pow(10.0, 6.0 * g / 99.0));
    const RidgePath path = ridge_path(mm_std, lambdas);

    Report report;
    report.model_kind = "ridge";
    double lam;
    RidgeTuning tuning;
    bool have_tuning = false;
    if (mm_std.n() > mm_std.p()) {
        const OlsFit fit0 = fit_ols(mm_std.X, mm_std.Y, mm_std.column_names);
        tuning = ridge_tune(path, fit0);
        have_tuning = true;
    } else {
        tuning.gcv_lambda = ridge_gcv_lambda(path);
    }
    lam = (o.lambda >= 0.0) ? o.lambda : tuning.gcv_lambda;
    long idx = 0;
    for (size_t l = 0; l < lambdas.size(); ++l)
        if (lambdas[l] == lam) idx = static_cast<long>(l);

    // Back-transform to original scale.
    const VectorXd beta_std = path.coefs.col(idx);
    double intercept = st.response_mean;
    VectorXd beta_orig(beta_std.size());
    for (long j = 0; j < beta_std.size(); ++j) {
        beta_orig(j) = beta_std(j) / st.column_scales(j);
        intercept -= beta_orig(j) * st.column_means(j);
    }
    CoefficientRow row;
    row.name = "(Intercept)";
    row.estimate = intercept;
    row.se = row.statistic = row.p_value = std::numeric_limits<double>::quiet_NaN();
    report.coefficients.push_back(row);
    for (long j = 0; j < beta_orig.size(); ++j) {
        CoefficientRow r;
        r.name = mm_std.column_names[j];
        r.estimate = beta_orig(j);
        r.se = r.statistic = r.p_value = std::numeric_limits<double>::quiet_NaN();
        report.coefficients.push_back(r);
    }
    report.fit_stats["lambda"] = lam;
    report.fit_stats["df"] = path.df(idx);
    report.fit_stats["gcv"] = path.gcv(idx);
    report.fit_stats["press"] = path.press(idx);
    report.fit_stats["gcv_lambda"] = tuning.gcv_lambda;
    if (have_tuning) {
        report.fit_stats["hkb_lambda"] = tuning.hkb_lambda;
        report.fit_stats["lw_lambda"] = tuning.lw_lambda;
    }
    return report;
}

Report run_lasso(const CommonOpts& o) {
    const ModelMatrix mm = load_design(o);
    Report report;
    report.model_kind = o.alpha == 0.0 ? "lasso" : "elastic-net";
    report.fit_stats["alpha"] = o.alpha;

    auto [mm_std, st] = standardize(mm);
    const std::vector<std::string>& names = mm_std.column_names;
    const VectorXd& means = st.column_means;
    const VectorXd& scales = st.column_scales;

    VectorXd beta_std;
    if (o.cv_k >= 2) {
        const CvResult cv = cv_path(mm, o.alpha, o.cv_k, o.seed);
        report.fit_stats["lambda_min"] = cv.lambda_min;
        report.fit_stats["cv_error_min"] = cv.cv_errors.minCoeff();
        report.fit_stats["lambda"] = cv.lambda_min;
        long idx = 0;
        for (size_t l = 0; l < cv.path.lambdas.size(); ++l)
            if (cv.path.lambdas[l] == cv.lambda_min) idx = static_cast<long>(l);
        beta_std = cv.path.coefs.col(idx);
    } else {
        if (o.lambda < 0.0) throw SpecError("lasso: give --lambda or --cv");
        report.fit_stats["lambda"] = o.lambda;
        beta_std = enet_cd(mm_std.X, mm_std.Y, o.lambda, o.alpha);
    }
    double intercept = st.response_mean;
    long nonzero = 0;
    VectorXd beta_orig(beta_std.size());
    for (long j = 0; j < beta_std.size(); ++j) {
        beta_orig(j) = beta_std(j) / scales(j);
        intercept -= beta_orig(j) * means(j);
        if (beta_std(j) != 0.0) ++nonzero;
    }
    CoefficientRow row;
    row.name = "(Intercept)";
    row.estimate = intercept;
    row.se = row.statistic = row.p_value = std::numeric_limits<double>::quiet_NaN();
    report.coefficients.push_back(row);
    for (long j = 0; j < beta_orig.size(); ++j) {
        CoefficientRow r;
        r.name = names[j];
        r.estimate = beta_orig(j);
        r.se = r.statistic = r.p_value = std::numeric_limits<double>::quiet_NaN();
        report.coefficients.push_back(r);
    }
    report.fit_stats["nonzero"] = static_cast<double>(nonzero);
    return report;
}

Report run_glm(const CommonOpts& o) {
    const ModelMatrix mm = load_design(o);
    const GlmFamily family = parse_family(o.family);
    const GlmFit fit = glm_fit(family, mm);
    Report report;
    report.model_kind = "glm:" + o.family;
    const bool sandwich = o.se_kind == "sandwich";
    report.covariance_kind = sandwich ? "sandwich" : "model";
    const VectorXd se = sandwich ? glm_sandwich(fit).se : glm_model_cov(fit).se;
    coefficient_rows(report, fit.column_names, fit.beta, se, false, 0.0);
    report.fit_stats["n"] = static_cast<double>(fit.n());
    report.fit_stats["p"] = static_cast<double>(fit.p());
    report.fit_stats["deviance"] = fit.deviance;
    report.fit_stats["null_deviance"] = fit.null_deviance;
    report.fit_stats["aic"] = fit.aic;
    report.fit_stats["iterations"] = static_cast<double>(fit.iterations);
    if (!std::isnan(fit.null_deviance)) {
        const DevianceReport dev = deviance_aic(fit);
        report.fit_stats["lr_statistic"] = dev.lr_test.statistic;
        report.fit_stats["lr_p_value"] = dev.lr_test.p_value;
    }
    if (fit.theta) report.fit_stats["theta"] = *fit.theta;
    if (fit.theta_se) report.fit_stats["theta_se"] = *fit.theta_se;
    if (fit.poisson_fallback) report.warnings.push_back("theta at cap; Poisson limit fit");
    return report;
}

Report run_gee_with(const CommonOpts& o, const std::string& corstr) {
    const ModelMatrix mm = load_design(o);
    if (!mm.cluster_ids) throw SpecError("gee: --cluster is required");
    std::string fam = o.family;
    if (fam == "identity" || fam == "identity-linear") fam = "linear";
    const PanelData panel = make_panel(mm, parse_family(fam));
    const CorStructure cs =
        corstr == "exchangeable" ? CorStructure::Exchangeable : CorStructure::Independence;
    const GeeFit fit = gee_fit(panel, cs);
    Report report;
    report.model_kind = "gee:" + fam + ":" + corstr;
    report.covariance_kind = "cluster";
    const VectorXd se = fit.robust_cov.diagonal().cwiseSqrt();
    coefficient_rows(report, mm.column_names, fit.beta, se, false, 0.0);
    report.fit_stats["n"] = static_cast<double>(mm.n());
    report.fit_stats["n_clusters"] = static_cast<double>(panel.clusters.size());
    report.fit_stats["iterations"] = static_cast<double>(fit.iterations);
    if (fit.rho) report.fit_stats["rho"] = *fit.rho;
    if (fit.rho_clamped) report.warnings.push_back("rho clamped to the feasible bound");
    const VectorXd naive_se = fit.naive_cov.diagonal().cwiseSqrt();
    nlohmann::json diag;
    nlohmann::json arr = nlohmann::json::array();
    for (long j = 0; j < naive_se.size(); ++j) arr.push_back(json_number(naive_se(j)));
    diag["naive_se"] = arr;
    report.diagnostics = diag;
    return report;
}

Report run_rq(const CommonOpts& o) {
    const ModelMatrix mm = load_design(o);
    const QuantFit fit = rq_fit(mm, o.tau);
    Report report;
    report.model_kind = "rq";
    VectorXd se;
    if (o.se_kind == "boot") {
        report.covariance_kind = "bootstrap";
        se = rq_bootstrap_cov(mm.X, mm.Y, o.tau, 200, o.seed).se;
    } else {
        report.covariance_kind = "powell";
        se = rq_powell_cov(fit, mm.X, mm.Y).se;
    }
    coefficient_rows(report, mm.column_names, fit.beta, se, false, 0.0);
    report.fit_stats["n"] = static_cast<double>(mm.n());
    report.fit_stats["tau"] = o.tau;
    report.fit_stats["objective"] = fit.objective;
    return report;
}

struct SurvOpts {
    std::string time_col;
    std::string event_col;
    std::string group_col;
    std::string ci_kind = "log";
    std::string ties = "efron";
};

struct SurvInput {
    SurvData data;
    std::vector<std::string> covariate_names;
};

SurvInput load_survival(const CommonOpts& o, const SurvOpts& s, bool with_covariates) {
    if (o.data_path.empty()) throw SpecError("--data is required");
    const DataTable table = load_csv(o.data_path);
    SurvData data;
    const auto numeric = [&](const std::string& name) {
        const Column& col = table.column(name);
        if (!col.is_numeric()) throw SpecError("column is not numeric: " + name);
        const auto& v = std::get<NumericColumn>(col.data).values;
        return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())).eval();
    };
    data.time = numeric(s.time_col);
    data.event = numeric(s.event_col);
    if (!s.group_col.empty()) {
        const Column& col = table.column(s.group_col);
        data.group.resize(table.n_rows);
        if (col.is_numeric()) {
            const auto& v = std::get<NumericColumn>(col.data).values;
            for (long i = 0; i < table.n_rows; ++i) {
                std::ostringstream os;
                os << v[i];
                data.group[i] = os.str();
            }
        } else {
            const auto& cat = std::get<CategoricalColumn>(col.data);
            for (long i = 0; i < table.n_rows; ++i) data.group[i] = cat.levels[cat.codes[i]];
        }
    }
    SurvInput input;
    if (with_covariates) {
        CommonOpts oc = o;
        oc.no_intercept = true;
        oc.response = s.time_col;
        DesignSpec spec = design_from(oc, table);
        ModelMatrix mm = build_design(table, spec);
        data.X = std::move(mm.X);
        input.covariate_names = std::move(mm.column_names);
    }
    input.data = std::move(data);
    return input;
}

Report run_surv_km(const CommonOpts& o, const SurvOpts& s) {
    const SurvData data = load_survival(o, s, false).data;
    const KmCurve km = km_fit(data, o.level);
    Report report;
    report.model_kind = "km";
    report.fit_stats["n"] = static_cast<double>(data.time.size());
    report.fit_stats["events"] = data.event.sum();
    report.fit_stats["level"] = o.level;
    nlohmann::json diag;
    nlohmann::json rows = nlohmann::json::array();
    for (size_t k = 0; k < km.times.size(); ++k) {
        nlohmann::json row;
        row["time"] = json_number(km.times[k]);
        row["n_risk"] = km.n_risk[k];
        row["n_event"] = km.n_event[k];
        row["surv"] = json_number(km.surv[k]);
        const auto& ci = (s.ci_kind == "loglog") ? km.ci_loglog[k] : km.ci_log[k];
        row["lo"] = json_number(ci.first);
        row["hi"] = json_number(ci.second);
        rows.push_back(std::move(row));
    }
    diag["curve"] = std::move(rows);
    diag["ci_kind"] = s.ci_kind;
    report.diagnostics = std::move(diag);
    return report;
}

Report run_surv_logrank(const CommonOpts& o, const SurvOpts& s) {
    if (s.group_col.empty()) throw SpecError("logrank: --group is required");
    const SurvData data = load_survival(o, s, false).data;
    const TestResult t = logrank_test(data);
    Report report;
    report.model_kind = "logrank";
    report.fit_stats["chisq"] = t.statistic;
    report.fit_stats["df"] = t.df1;
    report.fit_stats["p_value"] = t.p_value;
    return report;
}

Report run_surv_cox(const CommonOpts& o, const SurvOpts& s) {
    const SurvInput input = load_survival(o, s, true);
    const SurvData& data = input.data;
    const CoxTies ties = (s.ties == "breslow") ? CoxTies::Breslow : CoxTies::Efron;
    const CoxFit fit = cox_fit(data, ties);
    Report report;
    report.model_kind = "cox";
    report.covariance_kind = "model";
    const MatrixXd cov =
        fit.information.ldlt().solve(MatrixXd::Identity(fit.beta.size(), fit.beta.size()));
    const VectorXd se = cov.diagonal().cwiseSqrt();
    coefficient_rows(report, input.covariate_names, fit.beta, se, false, 0.0);
    report.fit_stats["n"] = static_cast<double>(data.time.size());
    report.fit_stats["events"] = data.event.sum();
    report.fit_stats["loglik"] = fit.loglik;
    report.fit_stats["score_test"] = fit.score_test.statistic;
    report.fit_stats["score_test_p"] = fit.score_test.p_value;
    report.fit_stats["iterations"] = static_cast<double>(fit.iterations);
    return report;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    // The error path must honor --format json, so scan for it up front.
    ReportFormat err_format = ReportFormat::Text;
    for (size_t i = 0; i + 1 < args.size(); ++i)
        if (args[i] == "--format" && args[i + 1] == "json") err_format = ReportFormat::Json;

    CLI::App app{"regression and inference toolkit"};
    app.require_subcommand(1);

    CommonOpts o;
    SurvOpts s;
    std::string sim_suite;
    SimParams sim_params;
    std::string gee_corstr = "independence";

    CLI::App* c_fit = app.add_subcommand("fit", "ordinary least squares");
    CLI::App* c_wls = app.add_subcommand("wls", "weighted least squares");
    CLI::App* c_diag = app.add_subcommand("diagnose", "leave-one-out diagnostics");
    CLI::App* c_ridge = app.add_subcommand("ridge", "ridge regression");
    CLI::App* c_lasso = app.add_subcommand("lasso", "lasso / elastic net");
    CLI::App* c_glm = app.add_subcommand("glm", "generalized linear models");
    CLI::App* c_gee = app.add_subcommand("gee", "generalized estimating equations");
    CLI::App* c_rq = app.add_subcommand("rq", "quantile regression");
    CLI::App* c_surv = app.add_subcommand("surv", "survival analysis");
    CLI::App* c_sim = app.add_subcommand("simulate", "built-in simulation suites");
    for (CLI::App* cmd : {c_fit, c_wls, c_diag, c_ridge, c_lasso, c_glm, c_gee, c_rq})
        add_common_flags(cmd, o);
    c_gee->add_option("--corstr", gee_corstr, "independence|exchangeable");

    CLI::App* c_km = c_surv->add_subcommand("km", "Kaplan-Meier curve");
    CLI::App* c_logrank = c_surv->add_subcommand("logrank", "two-sample log-rank test");
    CLI::App* c_cox = c_surv->add_subcommand("cox", "Cox proportional hazards");
    c_surv->require_subcommand(1);
    for (CLI::App* cmd : {c_km, c_logrank, c_cox}) {
        add_common_flags(cmd, o);
        cmd->add_option("--time", s.time_col, "time column");
        cmd->add_option("--event", s.event_col, "event indicator column");
        cmd->add_option("--group", s.group_col, "group column");
    }
    c_km->add_option("--ci", s.ci_kind, "log|loglog");
    c_cox->add_option("--ties", s.ties, "efron|breslow");

    add_common_flags(c_sim, o);
    c_sim->add_option("--suite", sim_suite, "suite name")->required();
    c_sim->add_option("--n", sim_params.n, "sample size");
    c_sim->add_option("--p", sim_params.p, "covariate count");
    c_sim->add_option("--reps", sim_params.reps, "replications");

    std::vector<std::string> argv_copy(args);
    try {
        std::vector<const char*> argv;
        argv.push_back("lmx");
        for (const auto& a : argv_copy) argv.push_back(a.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        out << emit_error("usage", e.what(), err_format);
        err << app.help();
        return 1;
    }

    const ReportFormat format = [&] {
        try {
            return parse_format(o.format);
        } catch (...) {
            return ReportFormat::Text;
        }
    }();

    try {
        Report report;
        if (*c_fit)
            report = run_fit(o);
        else if (*c_wls)
            report = run_wls(o);
        else if (*c_diag)
            report = run_diagnose(o);
        else if (*c_ridge)
            report = run_ridge(o);
        else if (*c_lasso)
            report = run_lasso(o);
        else if (*c_glm)
            report = run_glm(o);
        else if (*c_gee)
            report = run_gee_with(o, gee_corstr);
        else if (*c_rq)
            report = run_rq(o);
        else if (*c_surv) {
            if (*c_km)
                report = run_surv_km(o, s);
            else if (*c_logrank)
                report = run_surv_logrank(o, s);
            else
                report = run_surv_cox(o, s);
        } else if (*c_sim) {
            sim_params.seed = o.seed;
            report = simulate(sim_suite, sim_params);
            report.fit_stats["seed"] = static_cast<double>(o.seed);
        }
        out << emit_report(report, format);
        return 0;
    } catch (const UserError& e) {
        out << emit_error("user", e.what(), format);
        return 1;
    } catch (const NumericError& e) {
        out << emit_error("numeric", e.what(), format);
        return 2;
    } catch (const std::exception& e) {
        out << emit_error("internal", e.what(), format);
        return 2;
    }
}

}  // namespace lmx::cli
