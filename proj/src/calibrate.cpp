#include "msarch/calibrate.hpp"

#include "msarch/errors.hpp"
#include "msarch/nelder_mead.hpp"
#include "msarch/parallel.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <tuple>

namespace msarch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double quantize_D(double D) { return std::round(D * 1e6) / 1e6; }
double quantize_nu(double nu) { return std::exp(std::round(std::log(nu) * 1e6) / 1e6); }

// Per q: the theoretical moment ratios and the modulation stats, both alpha-free.
struct TheoryEntry {
    std::vector<std::vector<double>> moments;
    std::vector<ModulationStats> stats;
};

using CacheKey = std::tuple<int, double, std::vector<double>, double, double>;

struct TheoryCache {
    std::mutex lock;
    std::map<CacheKey, std::shared_ptr<const TheoryEntry>> entries;
};

TheoryCache& cache() {
    static TheoryCache c;
    return c;
}

std::shared_ptr<const TheoryEntry> theory_entry(double D, double nu, const ObjectiveSpec& spec) {
    const CacheKey key{spec.M, spec.eps, spec.Q, D, nu};
    {
        std::lock_guard<std::mutex> g(cache().lock);
        auto it = cache().entries.find(key);
        if (it != cache().entries.end()) return it->second;
    }
    auto entry = std::make_shared<TheoryEntry>();
    for (double q : spec.Q) {
        entry->moments.push_back(moment_ratio_curve(q, spec.M, D, nu, spec.eps).values);
        entry->stats.push_back(modulation_stats(q, spec.M, D, nu, spec.eps));
    }
    std::lock_guard<std::mutex> g(cache().lock);
    return cache().entries.emplace(key, std::move(entry)).first->second;
}

VolatilityMixture unit_mixture(const ObjectiveSpec& spec, double alpha) {
    if (spec.kind == ModelKind::Null) return PointVol{1.0};
    return InverseGamma{alpha, 1.0};
}

void check_curves(const std::vector<MomentCurve>& m_emp, const std::vector<AcfCurve>& r_emp, const ObjectiveSpec& spec) {
    if (m_emp.size() != spec.Q.size() || r_emp.size() != spec.Q.size())
        throw PreconditionViolation("one empirical curve per moment order is required");
    for (std::size_t k = 0; k < spec.Q.size(); ++k)
        if (m_emp[k].values.size() < static_cast<std::size_t>(spec.M) ||
            r_emp[k].values.size() < static_cast<std::size_t>(spec.M))
            throw PreconditionViolation("empirical curves must cover t = 1..M");
}

std::vector<CurveResiduals> residuals_at(const TheoryEntry& th, double alpha, const std::vector<MomentCurve>& m_emp,
                                         const std::vector<AcfCurve>& r_emp, const ObjectiveSpec& spec) {
    const VolatilityMixture mix = unit_mixture(spec, alpha);
    std::vector<CurveResiduals> out;
    for (std::size_t k = 0; k < spec.Q.size(); ++k) {
        CurveResiduals res;
        res.q = spec.Q[k];
        const AcfCurve r_th = acf_returns_curve(th.stats[k], mix);
        for (int t = 0; t < spec.M; ++t) {
            const double m = th.moments[k][t];
            res.moment.push_back((m - m_emp[k].values[t]) / m);
            const double r = r_th.values[t];
            res.acf.push_back(r != 0.0 ? (r - r_emp[k].values[t]) / r : kInf);
        }
        out.push_back(std::move(res));
    }
    return out;
}

double sum_squares(const std::vector<CurveResiduals>& res) {
    double s = 0.0;
    for (const auto& r : res) {
        for (double v : r.moment) s += v * v;
        for (double v : r.acf) s += v * v;
    }
    return std::isnan(s) ? kInf : s;
}

double mean_abs_power(const std::vector<double>& x, double q) {
    long double s = 0.0L;
    for (double v : x) s += std::pow(std::abs(v), q);
    return static_cast<double>(s / static_cast<long double>(x.size()));
}

// Least-squares scale for e_q(s) = unit_q s^q against observed e_q.
double fit_scale(const std::vector<double>& unit, const std::vector<double>& observed, const std::vector<double>& Q) {
    std::vector<double> log_single;
    for (std::size_t k = 0; k < Q.size(); ++k) {
        if (!(observed[k] > 0.0)) throw ZeroVariance("mean |x|^q vanishes");
        log_single.push_back(std::log(observed[k] / unit[k]) / Q[k]);
    }
    if (Q.size() == 1) return std::exp(log_single[0]);
    const auto [lo, hi] = std::minmax_element(log_single.begin(), log_single.end());
    if (*hi - *lo < 1e-14) return std::exp(*lo);
    auto cost = [&](double z) {
        double s = 0.0;
        for (std::size_t k = 0; k < Q.size(); ++k) {
            const double d = 1.0 - observed[k] / (unit[k] * std::exp(Q[k] * z));
            s += d * d;
        }
        return s;
    };
    const auto best = boost::math::tools::brent_find_minima(cost, *lo, *hi, 52);
    return std::exp(best.first);
}

// Box coordinate <-> unconstrained coordinate.
struct Axis {
    double lo, hi;
    bool logarithmic;

    double frac(double v) const {
        return logarithmic ? (std::log(v) - std::log(lo)) / (std::log(hi) - std::log(lo)) : (v - lo) / (hi - lo);
    }
    double to_free(double v) const {
        const double f = std::clamp(frac(v), 1e-4, 1.0 - 1e-4);
        return std::log(f / (1.0 - f));
    }
    double from_free(double u) const {
        const double f = 1.0 / (1.0 + std::exp(-u));
        const double v = logarithmic ? std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo))) : lo + f * (hi - lo);
        return std::clamp(v, lo, hi);
    }
    double grid(int k, int n) const {
        const double f = static_cast<double>(k) / (n - 1);
        return logarithmic ? std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo))) : lo + f * (hi - lo);
    }
};

}  // namespace

double ObjectiveSpec::max_q() const { return *std::max_element(Q.begin(), Q.end()); }

double ObjectiveSpec::alpha_lo() const { return bounds.alpha_lo.value_or(2.0 * max_q() + 0.5); }

void ObjectiveSpec::validate() const {
    if (M < 1) throw PreconditionViolation("M must be at least 1");
    if (Q.empty()) throw PreconditionViolation("Q must not be empty");
    for (double q : Q)
        if (!(q > 0.0) || !std::isfinite(q)) throw PreconditionViolation("moment orders must be positive");
    if (!(eps > 0.0)) throw PreconditionViolation("eps must be positive");
    const auto& b = bounds;
    if (!(b.D_lo > 0.0 && b.D_lo < b.D_hi && b.D_hi <= 0.5))
        throw PreconditionViolation("D bounds must satisfy 0 < lo < hi <= 0.5");
    if (!(b.nu_lo > 0.0 && b.nu_lo < b.nu_hi && b.nu_hi <= 1.0))
        throw PreconditionViolation("nu bounds must satisfy 0 < lo < hi <= 1");
    if (kind == ModelKind::Complete && !(alpha_lo() > 0.0 && alpha_lo() < b.alpha_hi))
        throw PreconditionViolation("alpha bounds must satisfy 0 < lo < hi");
}

ModelParams CalibrationResult::params(int M) const {
    ModelParams p;
    p.D = theta_hat.D;
    p.nu = theta_hat.nu;
    p.M = M;
    const double s = scale.value_or(1.0);
    if (kind == ModelKind::Null)
        p.mixture = PointVol{s};
    else
        p.mixture = InverseGamma{theta_hat.alpha, s};
    return p;
}

EmpiricalCurves empirical_curves(const ReturnSeries& x, const ObjectiveSpec& spec) {
    spec.validate();
    EmpiricalCurves c;
    for (double q : spec.Q) {
        c.moments.push_back(empirical_moment_curve(x.values, q, spec.M));
        c.acfs.push_back(empirical_acf_curve(x.values, q, spec.M));
    }
    return c;
}

double gmm_objective(const Theta& theta, const std::vector<MomentCurve>& m_emp, const std::vector<AcfCurve>& r_emp,
                     const ObjectiveSpec& spec) {
    return sum_squares(gmm_residuals(theta, EmpiricalCurves{m_emp, r_emp}, spec));
}

std::vector<CurveResiduals> gmm_residuals(const Theta& theta, const EmpiricalCurves& emp, const ObjectiveSpec& spec) {
    spec.validate();
    check_curves(emp.moments, emp.acfs, spec);
    if (!(theta.D > 0.0 && theta.D <= 0.5)) throw PreconditionViolation("D must lie in (0, 1/2]");
    if (!(theta.nu > 0.0 && theta.nu <= 1.0)) throw PreconditionViolation("nu must lie in (0, 1]");
    const auto entry = theory_entry(quantize_D(theta.D), std::min(1.0, quantize_nu(theta.nu)), spec);
    return residuals_at(*entry, theta.alpha, emp.moments, emp.acfs, spec);
}

CalibrationResult calibrate_theta(const ReturnSeries& x, const ObjectiveSpec& spec) {
    spec.validate();
    if (x.size() < 50 * static_cast<std::size_t>(spec.M))
        throw PreconditionViolation("calibration needs T >= 50 M (T = " + std::to_string(x.size()) +
                                    ", M = " + std::to_string(spec.M) + ")");
    const EmpiricalCurves emp = empirical_curves(x, spec);
    const bool complete = spec.kind == ModelKind::Complete;
    const Axis axD{spec.bounds.D_lo, spec.bounds.D_hi, false};
    const Axis axNu{spec.bounds.nu_lo, spec.bounds.nu_hi, true};
    const Axis axAlpha{complete ? spec.alpha_lo() : 1.0, complete ? spec.bounds.alpha_hi : 2.0, true};
    constexpr int kGrid = 10;

    std::mutex count_lock;
    std::size_t evaluations = 0, infeasible = 0;
    auto tally = [&](std::size_t evals, std::size_t bad) {
        std::lock_guard<std::mutex> g(count_lock);
        evaluations += evals;
        infeasible += bad;
    };

    struct Profiled {
        double value = kInf;
        double alpha = kInf;
    };
    // alpha only enters through the endogenous moments, so it is minimized out
    // for each (D, nu): grid scan, then Brent in log alpha around the best node
    auto profile = [&](double D, double nu) {
        Profiled best;
        std::shared_ptr<const TheoryEntry> entry;
        try {
            entry = theory_entry(D, nu, spec);
        } catch (const BudgetExceeded&) {
        } catch (const MomentDiverges&) {
        }
        if (!entry) {
            tally(1, 1);
            return best;
        }
        std::size_t evals = 0, bad = 0;
        auto at = [&](double alpha) {
            ++evals;
            try {
                return sum_squares(residuals_at(*entry, alpha, emp.moments, emp.acfs, spec));
            } catch (const MomentDiverges&) {
            } catch (const DegenerateModulation&) {
            }
            ++bad;
            return kInf;
        };
        if (!complete) {
            best.value = at(kInf);
            tally(evals, bad);
            return best;
        }
        int k_best = 0;
        std::vector<double> scan(kGrid);
        for (int k = 0; k < kGrid; ++k) {
            scan[k] = at(axAlpha.grid(k, kGrid));
            if (scan[k] < scan[k_best]) k_best = k;
        }
        best = {scan[k_best], axAlpha.grid(k_best, kGrid)};
        if (std::isfinite(best.value)) {
            const double lo = std::log(axAlpha.grid(std::max(0, k_best - 1), kGrid));
            const double hi = std::log(axAlpha.grid(std::min(kGrid - 1, k_best + 1), kGrid));
            std::uintmax_t iters = 100;
            const auto r = boost::math::tools::brent_find_minima([&](double z) { return at(std::exp(z)); }, lo, hi, 40,
                                                                 iters);
            if (r.second < best.value) best = {r.second, std::exp(r.first)};
        }
        tally(evals, bad);
        return best;
    };

    std::vector<Profiled> grid(kGrid * kGrid);
    parallel_for(grid.size(), [&](std::size_t cell) {
        grid[cell] = profile(quantize_D(axD.grid(static_cast<int>(cell / kGrid), kGrid)),
                             quantize_nu(axNu.grid(static_cast<int>(cell % kGrid), kGrid)));
    });
    std::vector<std::size_t> order(grid.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return grid[a].value < grid[b].value; });
    if (!std::isfinite(grid[order[0]].value))
        throw NoFeasiblePoint("every grid point violates the moment-existence constraints");

    auto decode = [&](const std::vector<double>& u) {
        return std::pair{quantize_D(axD.from_free(u[0])), quantize_nu(axNu.from_free(u[1]))};
    };
    auto free_objective = [&](const std::vector<double>& u) {
        const auto [D, nu] = decode(u);
        return profile(D, nu).value;
    };

    NelderMeadResult best;
    best.value = kInf;
    for (std::size_t s = 0; s < 3 && s < order.size(); ++s) {
        const std::size_t cell = order[s];
        if (!std::isfinite(grid[cell].value)) break;
        std::vector<double> u{axD.to_free(axD.grid(static_cast<int>(cell / kGrid), kGrid)),
                              axNu.to_free(axNu.grid(static_cast<int>(cell % kGrid), kGrid))};
        const NelderMeadResult r = nelder_mead(free_objective, u);
        if (r.value < best.value) best = r;
    }
    if (!std::isfinite(best.value)) throw NoFeasiblePoint("local refinement found no feasible point");

    CalibrationResult out;
    out.kind = spec.kind;
    const auto [D, nu] = decode(best.x);
    const Profiled p = profile(D, nu);
    out.theta_hat = Theta{D, nu, p.alpha};
    out.objective_value = p.value;
    out.converged = best.converged;
    out.evaluations = evaluations;
    out.infeasible_probes = infeasible;
    out.residuals = residuals_at(*theory_entry(D, nu, spec), p.alpha, emp.moments, emp.acfs, spec);
    return out;
}

double calibrate_beta(const ReturnSeries& x, const Theta& theta, const std::vector<double>& Q) {
    if (Q.empty()) throw PreconditionViolation("Q must not be empty");
    std::vector<double> unit, observed;
    for (double q : Q) {
        if (q >= theta.alpha) throw MomentDiverges("E|X|^q needs q < alpha");
        unit.push_back(a_power_moment(q, theta.nu, theta.D).value * endo_abs_moment(q, InverseGamma{theta.alpha, 1.0}));
        observed.push_back(mean_abs_power(x.values, q));
    }
    return fit_scale(unit, observed, Q);
}

double calibrate_sigma0(const ReturnSeries& x, double D, double nu, const std::vector<double>& Q) {
    if (Q.empty()) throw PreconditionViolation("Q must not be empty");
    std::vector<double> unit, observed;
    for (double q : Q) {
        unit.push_back(a_power_moment(q, nu, D).value * endo_abs_moment(q, PointVol{1.0}));
        observed.push_back(mean_abs_power(x.values, q));
    }
    return fit_scale(unit, observed, Q);
}

CalibrationResult calibrate(const ReturnSeries& x, const ObjectiveSpec& spec) {
    CalibrationResult r = calibrate_theta(x, spec);
    r.scale = spec.kind == ModelKind::Complete ? calibrate_beta(x, r.theta_hat, spec.Q)
                                               : calibrate_sigma0(x, r.theta_hat.D, r.theta_hat.nu, spec.Q);
    return r;
}

void clear_theory_cache() {
    std::lock_guard<std::mutex> g(cache().lock);
    cache().entries.clear();
}

}  // namespace msarch
