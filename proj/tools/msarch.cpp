// msarch: ingest prices, simulate, calibrate, analyze and detect restarts.

#include "msarch/commands.hpp"
#include "msarch/errors.hpp"

#include "CLI11.hpp"

#include <iostream>

using namespace msarch;

namespace {

enum Exit { Ok = 0, Validation = 2, Numeric = 3, Io = 4 };

int exit_code(ErrorKind k) {
    switch (k) {
        case ErrorKind::Validation: return Validation;
        case ErrorKind::Numeric: return Numeric;
        case ErrorKind::Io: return Io;
    }
    return Numeric;
}

struct InlineParams {
    std::string file;
    std::optional<double> D, nu, alpha, beta, sigma0;
    std::optional<int> M;

    void attach(CLI::App* app) {
        app->add_option("--params", file, "parameter JSON; inline flags override it");
        app->add_option("--D", D, "scaling exponent");
        app->add_option("--nu", nu, "restart probability");
        app->add_option("--alpha", alpha, "inverse-gamma shape (complete model)");
        app->add_option("--beta", beta, "inverse-gamma scale (complete model)");
        app->add_option("--sigma0", sigma0, "constant volatility (null model)");
        app->add_option("--M", M, "memory order");
    }

    ModelParams resolve() const {
        ParamsDocument doc;
        if (!file.empty()) {
            doc = read_params(file);
        } else if (!D || !nu || !M || (!sigma0 && !(alpha && beta))) {
            throw PreconditionViolation("give --params or --D, --nu, --M and either --alpha/--beta or --sigma0");
        }
        if (D) doc.D = *D;
        if (nu) doc.nu = *nu;
        if (M) doc.M = *M;
        if (sigma0) {
            doc.kind = ModelKind::Null;
            doc.sigma0 = sigma0;
            doc.alpha.reset();
            doc.beta.reset();
        }
        if (alpha || beta) {
            doc.kind = ModelKind::Complete;
            if (alpha) doc.alpha = alpha;
            if (beta) doc.beta = beta;
            doc.sigma0.reset();
        }
        return doc.params();
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multifractal restart model toolkit"};
    app.require_subcommand(1);

    IngestConfig ingest;
    std::string ingest_summary;
    auto* c_ingest = app.add_subcommand("ingest", "daily closes -> mean-removed log returns");
    c_ingest->add_option("prices", ingest.prices, "CSV with date,close")->required();
    c_ingest->add_option("-o,--out", ingest.out, "returns CSV")->required();
    c_ingest->add_option("--summary", ingest_summary, "summary JSON (default <out>.summary.json)");

    SimulateConfig sim;
    InlineParams sim_params;
    auto* c_sim = app.add_subcommand("simulate", "sample a return path");
    sim_params.attach(c_sim);
    c_sim->add_option("-T,--length", sim.T, "number of steps")->required();
    c_sim->add_option("--seed", sim.seed.seed, "master seed")->required();
    c_sim->add_option("--stream", sim.seed.stream, "stream id");
    c_sim->add_option("-o,--out", sim.out, "output CSV (t,i,y,x)")->required();

    CalibrateConfig cal;
    std::string model = "complete";
    auto* c_cal = app.add_subcommand("calibrate", "fit D, nu and the volatility law");
    c_cal->add_option("returns", cal.returns, "returns CSV")->required();
    c_cal->add_option("-o,--out", cal.out, "parameter JSON")->required();
    c_cal->add_option("--model", model, "complete or null")->check(CLI::IsMember({"complete", "null"}));
    c_cal->add_option("--M", cal.spec.M, "memory order and curve length");
    c_cal->add_option("--q", cal.spec.Q, "moment orders");
    c_cal->add_option("--D-range", [&](const CLI::results_t& r) {
        cal.spec.bounds.D_lo = std::stod(r.at(0));
        cal.spec.bounds.D_hi = std::stod(r.at(1));
        return true;
    }, "lower and upper bound for D")->expected(2);
    c_cal->add_option("--nu-range", [&](const CLI::results_t& r) {
        cal.spec.bounds.nu_lo = std::stod(r.at(0));
        cal.spec.bounds.nu_hi = std::stod(r.at(1));
        return true;
    }, "lower and upper bound for nu")->expected(2);
    c_cal->add_option("--alpha-max", cal.spec.bounds.alpha_hi, "upper bound for alpha");

    AnalyzeConfig an;
    std::string an_params;
    auto* c_an = app.add_subcommand("analyze", "empirical statistics with optional theory overlays");
    c_an->add_option("returns", an.returns, "returns CSV")->required();
    c_an->add_option("--params", an_params, "parameter JSON for theory columns");
    c_an->add_option("-o,--out-dir", an.out_dir, "output directory")->required();
    c_an->add_option("--max-lag", an.max_lag, "largest lag of the moment and autocorrelation tables");
    c_an->add_option("--q", an.moment_orders, "moment orders");
    c_an->add_option("--hurst-q", an.hurst_orders, "orders for the Hurst fits");
    c_an->add_option("--hurst-window", an.hurst_window, "largest lag in the Hurst fits");
    c_an->add_option("--mug-grid", an.mug_grid, "horizons of the mug shot");

    RestartsConfig rs;
    std::string rs_truth;
    int rs_window = 0;
    auto* c_rs = app.add_subcommand("restarts", "restart posterior, detection and reconstruction");
    c_rs->add_option("returns", rs.returns, "returns CSV")->required();
    c_rs->add_option("--params", rs.params, "parameter JSON")->required();
    c_rs->add_option("-o,--out-dir", rs.out_dir, "output directory")->required();
    c_rs->add_option("--tau", rs.tau, "half width of the posterior window");
    c_rs->add_option("--vol-window", rs_window, "window of the volatility estimates (default M)");
    c_rs->add_option("--truth", rs_truth, "simulate output to score recovery against");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? Ok : Validation;
    }

    try {
        if (c_ingest->parsed()) {
            if (!ingest_summary.empty()) ingest.summary = ingest_summary;
            const auto s = cmd_ingest(ingest);
            std::cout << "T=" << s.T << " drift=" << format_double(s.drift) << " std=" << format_double(s.std) << "\n";
        } else if (c_sim->parsed()) {
            sim.params = sim_params.resolve();
            cmd_simulate(sim);
        } else if (c_cal->parsed()) {
            cal.spec.kind = model == "null" ? ModelKind::Null : ModelKind::Complete;
            const auto doc = cmd_calibrate(cal);
            std::cout << params_to_json(doc);
        } else if (c_an->parsed()) {
            if (!an_params.empty()) an.params = an_params;
            for (const auto& f : cmd_analyze(an)) std::cout << f.string() << "\n";
        } else if (c_rs->parsed()) {
            if (rs_window > 0) rs.vol_window = rs_window;
            if (!rs_truth.empty()) rs.truth = rs_truth;
            const auto rep = cmd_restarts(rs);
            for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
            std::cout << "selected=" << rep.selected << " threshold=" << format_double(rep.threshold);
            if (rep.exact_recovery) std::cout << " exact=" << format_double(*rep.exact_recovery);
            if (rep.near_recovery) std::cout << " within2=" << format_double(*rep.near_recovery);
            std::cout << "\n";
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return Io;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return Numeric;
    }
    return Ok;
}
