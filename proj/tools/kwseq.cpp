// kwseq: solve, evaluate and tabulate optimal sequential tests for a Bernoulli proportion.

#include <cstdio>
#include <iostream>
#include <locale>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "kwseq/kwseq.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_usage = 2;
constexpr int exit_not_converged = 3;

const CLI::Validator open_unit_interval(
    [](std::string& in) -> std::string {
        double v = 0.0;
        try {
            std::size_t used = 0;
            v = std::stod(in, &used);
            if (used != in.size()) return "value " + in + " is not a number";
        } catch (const std::exception&) {
            return "value " + in + " is not a number";
        }
        if (!(v > 0.0 && v < 1.0)) return "value " + in + " must lie strictly between 0 and 1";
        return {};
    },
    "in (0,1)", "OPEN_UNIT");

struct SolveArgs {
    double theta0 = 0.0, theta1 = 0.0, alpha = 0.0, beta = 0.0;
    std::string method = "option1";
    double rel_tol = 1e-3;
    std::string out;
};

struct EvalArgs {
    std::string plan;
    std::vector<double> thetas;
    long long simulate = 0;
    std::uint64_t seed = 1;
};

struct TableArgs {
    double theta0 = 0.0, theta1 = 0.0;
    std::vector<double> levels{0.1, 0.05, 0.025, 0.01, 0.005, 0.001, 0.0005};
    std::string method = "option1";
};

struct GridArgs {
    double theta0 = 0.0, theta1 = 0.0;
    int points = 25;
    double log_min = 6.0, log_max = 13.0;
    unsigned jobs = 1;
};

kwseq::Method parse_method(const std::string& m) {
    return m == "option2" ? kwseq::Method::Option2 : kwseq::Method::Option1;
}

void print_line(const std::string& s) { std::cout << s << '\n'; }

int run_solve(const SolveArgs& a) {
    kwseq::SolveTarget target{kwseq::Hypotheses(a.theta0, a.theta1), a.alpha, a.beta};
    target.rel_tol = a.rel_tol;
    int code = exit_ok;
    std::optional<kwseq::SolveReport> report;
    try {
        report = kwseq::solve_kw(target, parse_method(a.method));
    } catch (const kwseq::SolveNotConverged& e) {
        std::cerr << "kwseq: " << e.what() << '\n';
        report = e.best();
        code = exit_not_converged;
    }
    const auto& r = *report;
    print_line("theta_star,lambda0,lambda1,H,N_star,delta,Q99,alpha,beta,status");
    print_line(kwseq::join_csv({kwseq::format_number(r.theta_star), kwseq::format_number(r.lambda0),
                                kwseq::format_number(r.lambda1), std::to_string(r.effective_horizon),
                                kwseq::format_number(r.asn_at_star), kwseq::format_number(r.delta),
                                std::to_string(r.q99), kwseq::format_number(r.alpha_achieved),
                                kwseq::format_number(r.beta_achieved), kwseq::to_string(r.status)}));
    if (!a.out.empty()) kwseq::write_plan_file(a.out, kwseq::make_document(r));
    return code;
}

int run_eval(const EvalArgs& a) {
    kwseq::PlanDocument doc = [&] {
        try {
            return kwseq::read_plan_file(a.plan);
        } catch (const kwseq::PlanFormatError& e) {
            throw CLI::ValidationError("--plan", e.what());
        }
    }();
    std::vector<std::string> header{"theta", "OC", "ASN"};
    if (a.simulate > 0) header.insert(header.end(), {"OC_sim", "OC_se", "ASN_sim", "ASN_se"});
    print_line(kwseq::join_csv(header));
    for (double t : a.thetas) {
        std::vector<std::string> f{kwseq::format_number(t), kwseq::format_number(kwseq::oc(doc.plan, t)),
                                   kwseq::format_number(kwseq::asn(doc.plan, t))};
        if (a.simulate > 0) {
            const auto sim = kwseq::simulate(doc.plan, t, a.simulate, a.seed);
            f.insert(f.end(), {kwseq::format_number(sim.oc_hat), kwseq::format_number(sim.oc_se),
                               kwseq::format_number(sim.asn_hat), kwseq::format_number(sim.asn_se)});
        }
        print_line(kwseq::join_csv(f));
    }
    return exit_ok;
}

int run_table(const TableArgs& a) {
    const kwseq::Hypotheses hyp(a.theta0, a.theta1);
    if (hyp.symmetric()) {
        std::cerr << "note: symmetric hypotheses; SPRT columns are left empty\n";
    }
    print_line(kwseq::join_csv(kwseq::table_columns()));
    int code = exit_ok;
    for (double level : a.levels) {
        const auto row = kwseq::table_row(hyp, level, parse_method(a.method));
        if (row.solved.status == kwseq::SolveStatus::NotConverged) code = exit_not_converged;
        print_line(kwseq::table_csv_row(row));
        std::cout.flush();
    }
    return code;
}

int run_grid(const GridArgs& a) {
    const kwseq::Hypotheses hyp(a.theta0, a.theta1);
    const auto rows = kwseq::grid_sweep(hyp, a.log_min, a.log_max, a.points, a.jobs);
    print_line(kwseq::join_csv(kwseq::grid_columns()));
    for (const auto& g : rows) print_line(kwseq::grid_csv_row(g));
    return exit_ok;
}

void add_hypotheses(CLI::App* cmd, double& theta0, double& theta1) {
    cmd->add_option("--theta0", theta0, "null success probability")->required()->check(open_unit_interval);
    cmd->add_option("--theta1", theta1, "alternative success probability, above theta0")
        ->required()
        ->check(open_unit_interval);
}

}  // namespace

int main(int argc, char** argv) {
    std::locale::global(std::locale::classic());
    CLI::App app{"Optimal sequential tests for a Bernoulli proportion"};
    app.require_subcommand(1);

    SolveArgs sa;
    auto* solve = app.add_subcommand("solve", "find the optimal test for nominal error probabilities");
    add_hypotheses(solve, sa.theta0, sa.theta1);
    solve->add_option("--alpha", sa.alpha, "nominal type I error")->required()->check(open_unit_interval);
    solve->add_option("--beta", sa.beta, "nominal type II error")->required()->check(open_unit_interval);
    solve->add_option("--method", sa.method, "horizon handling")
        ->check(CLI::IsMember({"option1", "option2"}))
        ->capture_default_str();
    solve->add_option("--rel-tol", sa.rel_tol, "relative tolerance on the error pair")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    solve->add_option("--out", sa.out, "write the plan document here");

    EvalArgs ea;
    auto* eval = app.add_subcommand("eval", "exact characteristics of a stored plan");
    eval->add_option("--plan", ea.plan, "plan document")->required();
    eval->add_option("--theta", ea.thetas, "comma-separated parameter values")
        ->required()
        ->delimiter(',')
        ->check(CLI::Range(0.0, 1.0));
    eval->add_option("--simulate", ea.simulate, "Monte Carlo replications")->check(CLI::NonNegativeNumber);
    eval->add_option("--seed", ea.seed, "Monte Carlo seed")->capture_default_str();

    TableArgs ta;
    auto* table = app.add_subcommand("table", "comparison table over error levels");
    add_hypotheses(table, ta.theta0, ta.theta1);
    table->add_option("--levels", ta.levels, "comma-separated alpha = beta levels")
        ->delimiter(',')
        ->check(open_unit_interval);
    table->add_option("--method", ta.method, "horizon handling")
        ->check(CLI::IsMember({"option1", "option2"}))
        ->capture_default_str();

    GridArgs ga;
    auto* grid = app.add_subcommand("grid", "sweep of the Lagrange multipliers on a log grid");
    add_hypotheses(grid, ga.theta0, ga.theta1);
    grid->add_option("--points", ga.points, "points per axis")->check(CLI::Range(2, 1000))->capture_default_str();
    grid->add_option("--log-min", ga.log_min, "smallest ln lambda")->capture_default_str();
    grid->add_option("--log-max", ga.log_max, "largest ln lambda")->capture_default_str();
    grid->add_option("--jobs", ga.jobs, "worker threads")
        ->check(CLI::Range(1u, std::max(1u, 4 * std::thread::hardware_concurrency())))
        ->capture_default_str();

    try {
        app.parse(argc, argv);
        if (*solve || *table || *grid) {
            const double t0 = *solve ? sa.theta0 : *table ? ta.theta0 : ga.theta0;
            const double t1 = *solve ? sa.theta1 : *table ? ta.theta1 : ga.theta1;
            if (!(t0 < t1)) throw CLI::ValidationError("--theta1", "must exceed --theta0");
        }
        if (*grid && !(ga.log_min > 0.0 && ga.log_min < ga.log_max)) {
            throw CLI::ValidationError("--log-min", "need 0 < --log-min < --log-max");
        }
        if (*solve) return run_solve(sa);
        if (*eval) return run_eval(ea);
        if (*table) return run_table(ta);
        return run_grid(ga);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "kwseq: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "kwseq: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::domain_error& e) {
        std::cerr << "kwseq: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "kwseq: " << e.what() << '\n';
        return 1;
    }
}
