#include "msarch/commands.hpp"

#include "msarch/empirics.hpp"
#include "msarch/errors.hpp"
#include "msarch/restarts.hpp"
#include "msarch/simulate.hpp"
#include "msarch/stats.hpp"
#include "msarch/theory.hpp"

#include "json.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>

namespace msarch {

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string fmt(double v) { return format_double(v); }
std::string fmt(std::size_t v) { return std::to_string(v); }
std::string fmt(int v) { return std::to_string(v); }

ReturnSeries load_returns(const fs::path& path) {
    ReturnSeries x;
    x.values = read_series(path, "x");
    if (x.values.empty()) throw ParseError("no returns in " + path.string(), 2);
    return x;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

template <class F>
void try_theory(F&& f) {
    // theory columns are skipped where the requested moment does not exist
    try {
        f();
    } catch (const MomentDiverges&) {
    } catch (const UnsupportedMixture&) {
    }
}

// Density of S = sqrt(mean of w squared normals with standard deviation s0).
double point_vol_pdf(double s, int w, double s0) {
    if (s <= 0.0) return 0.0;
    const boost::math::chi_squared_distribution<double> chi(w);
    const double u = w * s * s / (s0 * s0);
    return boost::math::pdf(chi, u) * 2.0 * w * s / (s0 * s0);
}

}  // namespace

SeriesSummary cmd_ingest(const IngestConfig& cfg) {
    const auto rows = read_prices_csv(cfg.prices);
    std::vector<double> prices;
    prices.reserve(rows.size());
    for (const auto& r : rows) prices.push_back(r.close);
    const ReturnSeries x = log_returns(prices);

    SeriesSummary s;
    s.T = x.size();
    s.mean_removed = x.mean_removed;
    s.drift = (std::log(prices.back()) - std::log(prices.front())) / static_cast<double>(s.T);
    long double ss = 0.0L;
    for (double v : x.values) ss += static_cast<long double>(v) * v;
    s.std = static_cast<double>(std::sqrt(ss / static_cast<long double>(s.T)));

    Table t;
    t.header = {"x"};
    for (double v : x.values) t.rows.push_back({fmt(v)});
    write_csv(cfg.out, t);
    fs::path side = cfg.summary ? *cfg.summary : fs::path(cfg.out.string() + ".summary.json");
    write_text_atomic(side, summary_to_json(s));
    return s;
}

void cmd_simulate(const SimulateConfig& cfg) {
    cfg.params.validate();
    if (cfg.T == 0) throw PreconditionViolation("T must be positive");
    const SimulatedPath path = sample_returns(cfg.params, cfg.T, cfg.seed);
    Table t;
    t.header = {"t", "i", "y", "x"};
    t.rows.reserve(cfg.T);
    for (std::size_t k = 0; k < cfg.T; ++k)
        t.rows.push_back({fmt(k + 1), std::to_string(path.i[k]), fmt(path.y[k]), fmt(path.x[k])});
    write_csv(cfg.out, t);
}

ParamsDocument cmd_calibrate(const CalibrateConfig& cfg) {
    const ReturnSeries x = load_returns(cfg.returns);
    const CalibrationResult r = calibrate(x, cfg.spec);
    ParamsDocument doc = ParamsDocument::from(r, cfg.spec.M);
    for (const auto& res : r.residuals) {
        double sm = 0.0, sr = 0.0;
        for (double v : res.moment) sm += v * v;
        for (double v : res.acf) sr += v * v;
        doc.diagnostics.emplace_back("moment_residual_q" + fmt(res.q), sm);
        doc.diagnostics.emplace_back("acf_residual_q" + fmt(res.q), sr);
    }
    write_params(cfg.out, doc);
    return doc;
}

std::vector<fs::path> cmd_analyze(const AnalyzeConfig& cfg) {
    const ReturnSeries x = load_returns(cfg.returns);
    const std::size_t T = x.size();
    std::optional<ModelParams> params;
    if (cfg.params) params = read_params(*cfg.params).params();
    ensure_dir(cfg.out_dir);
    std::vector<fs::path> files;

    const int lag = std::max(1, std::min<int>(cfg.max_lag, static_cast<int>(T)));
    const int theory_lag = params ? std::min(lag, params->M + 1) : 0;

    Table moments{{"series", "q", "t", "value"}, {}};
    Table acfs{{"series", "q", "t", "value"}, {}};
    for (double q : cfg.moment_orders) {
        const auto m = empirical_moment_curve(x.values, q, lag);
        for (int t = 1; t <= lag; ++t) moments.add_row({"empirical", fmt(q), fmt(t), fmt(m.values[t - 1])});
        const auto r = empirical_acf_curve(x.values, q, lag);
        for (int t = 1; t <= lag; ++t) acfs.add_row({"empirical", fmt(q), fmt(t), fmt(r.values[t - 1])});
        if (!params) continue;
        try_theory([&] {
            if (const auto* ig = std::get_if<InverseGamma>(&params->mixture); ig && q >= ig->alpha)
                throw MomentDiverges("E|X|^q needs q < alpha");
            const auto mt = moment_ratio_curve(q, theory_lag, params->D, params->nu, 1e-9);
            for (int t = 1; t <= theory_lag; ++t) moments.add_row({"theory", fmt(q), fmt(t), fmt(mt.values[t - 1])});
        });
        try_theory([&] {
            const auto rt = acf_returns_curve(q, theory_lag, *params);
            for (int t = 1; t <= theory_lag; ++t) acfs.add_row({"theory", fmt(q), fmt(t), fmt(rt.values[t - 1])});
        });
    }
    files.push_back(cfg.out_dir / "moments.csv");
    write_csv(files.back(), moments);
    files.push_back(cfg.out_dir / "acf.csv");
    write_csv(files.back(), acfs);

    Table hurst{{"series", "q", "H", "eps"}, {}};
    const int hw = std::min<int>(cfg.hurst_window, static_cast<int>(T / 10));
    if (hw >= 2) {
        for (double q : cfg.hurst_orders) {
            const auto fit = empirical_hurst(x.values, q, hw);
            hurst.add_row({"empirical", fmt(q), fmt(fit.H), fmt(fit.eps)});
        }
        if (params) {
            const int tw = std::min(hw, params->M + 1);
            for (double q : cfg.hurst_orders)
                try_theory([&] {
                    if (const auto* ig = std::get_if<InverseGamma>(&params->mixture); ig && q >= ig->alpha)
                        throw MomentDiverges("E|X|^q needs q < alpha");
                    const auto fit = hurst_fit(moment_ratio_curve(q, tw, params->D, params->nu, 1e-9), tw);
                    hurst.add_row({"theory", fmt(q), fmt(fit.H), fmt(fit.eps)});
                });
        }
    }
    files.push_back(cfg.out_dir / "hurst.csv");
    write_csv(files.back(), hurst);

    Table hist{{"series", "x", "value", "se"}, {}};
    const Histogram h = freedman_diaconis_histogram(x.values);
    for (std::size_t k = 0; k < h.bins(); ++k) {
        const double c = 0.5 * (h.edges[k] + h.edges[k + 1]);
        hist.add_row({"empirical", fmt(c), fmt(h.density(k)), fmt(h.density_se(k))});
    }
    if (params)
        for (std::size_t k = 0; k < h.bins(); ++k) {
            const double c = 0.5 * (h.edges[k] + h.edges[k + 1]);
            hist.add_row({"theory", fmt(c), fmt(marginal_pdf(c, *params, 1e-10).value), "NA"});
        }
    files.push_back(cfg.out_dir / "histogram.csv");
    write_csv(files.back(), hist);

    std::vector<int> grid;
    for (int g : cfg.mug_grid)
        if (g >= 1 && 2 * static_cast<std::size_t>(g) <= T) grid.push_back(g);
    Table mug{{"t_h", "t_r", "value"}, {}};
    if (!grid.empty()) {
        const MugShotGrid g = mug_shot(x.values, grid, grid);
        for (std::size_t a = 0; a < grid.size(); ++a)
            for (std::size_t b = 0; b < grid.size(); ++b) {
                const auto v = g.at(a, b);
                mug.add_row({fmt(grid[a]), fmt(grid[b]), v ? fmt(*v) : "NA"});
            }
    }
    files.push_back(cfg.out_dir / "mugshot.csv");
    write_csv(files.back(), mug);
    return files;
}

RestartsReport cmd_restarts(const RestartsConfig& cfg) {
    const ReturnSeries x = load_returns(cfg.returns);
    const ModelParams params = read_params(cfg.params).params();
    const int window = cfg.vol_window.value_or(params.M);
    if (window < 1 || window > params.M + 1) throw PreconditionViolation("volatility window must lie in 1..M+1");

    const RestartDiagnostics d = detect_restarts(x.values, params, cfg.tau);
    RestartsReport rep;
    rep.selected = d.restart_times.size();
    rep.threshold = d.threshold;
    if (restart_budget(params.nu, x.size()) == 0)
        rep.warnings.push_back("nu T = " + fmt(params.nu * static_cast<double>(x.size())) +
                               " < 1: no restarts selected");

    ensure_dir(cfg.out_dir);
    Table post{{"t", "posterior"}, {}};
    for (std::size_t t = 0; t < d.posterior.size(); ++t) post.add_row({fmt(t + 1), fmt(d.posterior[t])});
    rep.files.push_back(cfg.out_dir / "posterior.csv");
    write_csv(rep.files.back(), post);

    Table times{{"t"}, {}};
    for (std::size_t t : d.restart_times) times.add_row({fmt(t + 1)});
    rep.files.push_back(cfg.out_dir / "restarts.csv");
    write_csv(rep.files.back(), times);

    Table rec{{"t", "i", "y"}, {}};
    for (std::size_t t = 0; t < d.y_path.size(); ++t)
        rec.add_row({fmt(t + 1), std::to_string(d.i_path[t]), fmt(d.y_path[t])});
    rep.files.push_back(cfg.out_dir / "reconstruction.csv");
    write_csv(rep.files.back(), rec);

    Table vol{{"s", "density", "se", "theory"}, {}};
    if (d.y_path.size() >= static_cast<std::size_t>(std::max(window, 4))) {
        const auto S = longmem_vol_samples(d.y_path, window, params.M);
        const double top = *std::max_element(S.begin(), S.end());
        if (S.size() >= 4 && top > 0.0) {
            const Histogram h = freedman_diaconis_histogram(S, 0.0, top);
            for (std::size_t k = 0; k < h.bins(); ++k) {
                const double c = 0.5 * (h.edges[k] + h.edges[k + 1]);
                double th;
                if (const auto* ig = std::get_if<InverseGamma>(&params.mixture))
                    th = longmem_vol_pdf(c, window, ig->alpha, ig->beta);
                else
                    th = point_vol_pdf(c, window, std::get<PointVol>(params.mixture).sigma0);
                vol.add_row({fmt(c), fmt(h.density(k)), fmt(h.density_se(k)), fmt(th)});
            }
        }
    }
    rep.files.push_back(cfg.out_dir / "volatility.csv");
    write_csv(rep.files.back(), vol);

    if (cfg.truth) {
        const Table truth = read_csv(*cfg.truth);
        const std::size_t col = truth.column("i");
        if (truth.rows.size() != x.size()) throw PreconditionViolation("truth file length differs from the returns");
        std::vector<std::int64_t> path;
        for (std::size_t k = 0; k < truth.rows.size(); ++k) {
            try {
                path.push_back(std::stoll(truth.rows[k][col]));
            } catch (const std::exception&) {
                throw ParseError("malformed index \"" + truth.rows[k][col] + "\"", static_cast<long>(k + 2));
            }
        }
        const auto true_times = restart_times_of(path);
        rep.exact_recovery = restart_recovery(d.restart_times, true_times, 0);
        rep.near_recovery = restart_recovery(d.restart_times, true_times, 2);
    }

    ojson j;
    j["T"] = x.size();
    j["tau"] = cfg.tau;
    j["selected"] = rep.selected;
    if (std::isnan(rep.threshold))
        j["threshold"] = nullptr;
    else
        j["threshold"] = rep.threshold;
    j["volatility_window"] = window;
    if (rep.exact_recovery) j["exact_recovery"] = *rep.exact_recovery;
    if (rep.near_recovery) j["recovery_within_2"] = *rep.near_recovery;
    j["warnings"] = rep.warnings;
    rep.files.push_back(cfg.out_dir / "restarts.json");
    write_text_atomic(rep.files.back(), j.dump(2) + "\n");
    return rep;
}

}  // namespace msarch
