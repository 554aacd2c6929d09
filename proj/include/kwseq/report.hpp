#pragma once

#include <cmath>
#include <iomanip>
#include <locale>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "kwseq/baselines.hpp"
#include "kwseq/plan_io.hpp"
#include "kwseq/solve.hpp"

namespace kwseq {

/// Six significant digits, '.' as decimal point whatever the global locale.
/// Magnitudes below 1e-3 use scientific notation.
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os.imbue(std::locale::classic());
    if (v != 0.0 && std::abs(v) < 1e-3) {
        os << std::scientific << std::setprecision(5) << v;
    } else {
        os << std::setprecision(6) << v;
    }
    return os.str();
}

inline std::string join_csv(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += fields[i];
    }
    return out;
}

inline PlanDocument make_document(const SolveReport& r) {
    PlanCharacteristics c;
    c.alpha = r.alpha_achieved;
    c.beta = r.beta_achieved;
    c.asn_at_star = r.asn_at_star;
    c.q99 = r.q99;
    c.delta = r.delta;
    c.lagrangian_value = r.plan.lagrangian_value();
    return {r.plan, c, std::string(to_string(r.status))};
}

struct SprtColumns {
    SprtMatch match;
    SprtCharacteristics at_star;
};

/// Everything printed in one row of a comparison table.
struct TableRow {
    double level;
    SolveReport solved;
    FixedSampleTest fss;
    std::optional<SprtColumns> sprt;
    EfficiencyRatios ratios;
};

/// Solves at alpha = beta = level and evaluates the SPRT and FSS baselines.
/// The SPRT part is skipped for symmetric hypotheses, where no SPRT meets
/// equal nominal errors except at isolated levels.
inline TableRow table_row(const Hypotheses& hyp, double level, Method method = Method::Option1,
                          double rel_tol = 1e-3) {
    SolveTarget target{hyp, level, level};
    target.rel_tol = rel_tol;
    std::optional<SolveReport> solved;
    try {
        solved = solve_kw(target, method);
    } catch (const SolveNotConverged& e) {
        solved = e.best();
    }
    const auto fss = fss_exact(hyp, level, level);
    std::optional<SprtColumns> sprt;
    if (!hyp.symmetric()) {
        auto m = sprt_match(hyp, level, level, rel_tol);
        auto ch = sprt_characteristics(m.design, solved->theta_star);
        sprt = SprtColumns{std::move(m), std::move(ch)};
    }
    std::optional<std::pair<double, int>> w;
    if (sprt) w = std::make_pair(sprt->at_star.asn, sprt->at_star.q99);
    const auto ratios = efficiency_ratios(fss.n, solved->asn_at_star, solved->q99, w);
    return {level, std::move(*solved), fss, std::move(sprt), ratios};
}

inline const std::vector<std::string>& table_columns() {
    static const std::vector<std::string> cols{"level",    "theta_star", "lambda0",   "lambda1",  "H",        "N_star",
                                               "delta",    "Q99",        "sprt_logA", "sprt_logB", "sprt_N",  "sprt_Q99",
                                               "FSS",      "R",          "QR",        "R_W",      "QR_W"};
    return cols;
}

/// sprt_logA is the lower (acceptance) endpoint, sprt_logB the upper one.
inline std::string table_csv_row(const TableRow& r) {
    const auto& s = r.solved;
    std::vector<std::string> f{format_number(r.level),    format_number(s.theta_star), format_number(s.lambda0),
                               format_number(s.lambda1),  std::to_string(s.effective_horizon),
                               format_number(s.asn_at_star), format_number(s.delta), std::to_string(s.q99)};
    if (r.sprt) {
        f.push_back(format_number(r.sprt->match.design.log_b));
        f.push_back(format_number(r.sprt->match.design.log_a));
        f.push_back(format_number(r.sprt->at_star.asn));
        f.push_back(std::to_string(r.sprt->at_star.q99));
    } else {
        f.insert(f.end(), 4, "");
    }
    f.push_back(std::to_string(r.fss.n));
    f.push_back(format_number(r.ratios.r_plan));
    f.push_back(format_number(r.ratios.qr_plan));
    f.push_back(r.ratios.r_sprt ? format_number(*r.ratios.r_sprt) : "");
    f.push_back(r.ratios.qr_sprt ? format_number(*r.ratios.qr_sprt) : "");
    return join_csv(f);
}

inline const std::vector<std::string>& grid_columns() {
    static const std::vector<std::string> cols{"log_lambda0", "log_lambda1", "alpha", "beta", "N_star", "N_theta0",
                                               "N_theta1",    "delta",       "FSS_approx", "R", "R0", "R1"};
    return cols;
}

inline std::string grid_csv_row(const GridRecord& g) {
    return join_csv({format_number(g.log_lambda0), format_number(g.log_lambda1), format_number(g.alpha),
                     format_number(g.beta), format_number(g.asn_star), format_number(g.asn_theta0),
                     format_number(g.asn_theta1), format_number(g.delta), format_number(g.fss_approx),
                     format_number(g.r), format_number(g.r0), format_number(g.r1)});
}

}  // namespace kwseq
