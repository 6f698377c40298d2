#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <stdexcept>

#include "optotherm/dynamics.hpp"
#include "optotherm/errors.hpp"
#include "optotherm/gaussian.hpp"
#include "optotherm/metrology.hpp"
#include "optotherm/wigner.hpp"

#ifndef OPTOTHERM_VERSION
#define OPTOTHERM_VERSION "unknown"
#endif

namespace optotherm::cli {
namespace {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Every parameter flag, as --<key>. All are read as strings so that "auto"
// and multiples of pi can be handled uniformly.
const std::vector<std::pair<std::string, std::string>> kParameters = {
    {"alpha", "coherent amplitude"},
    {"nbar", "mean phonon number"},
    {"temperature", "oscillator temperature in K (with --omega, instead of --nbar)"},
    {"omega", "mechanical frequency in rad/s"},
    {"g", "coupling g0/Omega, or auto for g_max at --ref-nbar"},
    {"tau", "interaction time Omega t (accepts pi, pi/10, 2pi)"},
    {"chi", "Kerr strength, or auto for 2 pi g^2"},
    {"phi-lo", "local-oscillator phase, or auto for the F_C-optimal phase"},
    {"ref-nbar", "nbar at which --g auto maximizes F_Q"},
    {"n-max", "optical Fock cutoff, or auto for ceil(alpha^2 + 8 alpha + 10)"},
    {"quad-points", "homodyne quadrature points (checked against twice as many)"},
    {"g-lo", "lower end of the g range"},
    {"g-hi", "upper end of the g range"},
    {"g-points", "points in the g range"},
    {"tau-lo", "lower end of the tau range"},
    {"tau-hi", "upper end of the tau range"},
    {"tau-points", "points in the tau range"},
    {"nbar-lo", "lower end of the nbar range"},
    {"nbar-hi", "upper end of the nbar range"},
    {"nbar-points", "points in the nbar range"},
    {"chi-hi", "upper end of the chi range, or auto for 2 pi g^2"},
    {"chi-points", "points in the chi range"},
    {"phi-points", "local-oscillator phases (grid for auto, sweep for phi-sweep)"},
    {"grid-points", "Wigner grid points per axis"},
    {"theta-points", "homodyne angles in the Gaussian comparison"},
    {"samples", "homodyne outcomes per seed (M)"},
    {"seed", "first seed"},
    {"seeds", "number of seeds"},
    {"prior-lo", "lower end of the flat nbar prior"},
    {"prior-hi", "upper end of the flat nbar prior"},
    {"prior-points", "posterior grid points"},
};

// shortest round-trip form: values in the CSV and echoed configs are exact
std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\"");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\"");
    return s.substr(b, e - b + 1);
}

std::optional<double> parse_real(const std::string& text) {
    const std::string s = trim(text);
    if (s.empty()) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() + s.size()) {
        if (!std::isfinite(v)) return std::nullopt;
        return v;
    }
    // k*pi/d with optional k and d
    static const std::regex pi_form(R"(^([-+]?(?:[0-9]+\.?[0-9]*|\.[0-9]+)(?:[eE][-+]?[0-9]+)?)?\s*\*?\s*pi\s*(?:/\s*([0-9]+\.?[0-9]*))?$)");
    std::smatch m;
    if (!std::regex_match(s, m, pi_form)) return std::nullopt;
    double v2 = kPi;
    if (m[1].matched) v2 *= std::stod(m[1].str());
    if (m[2].matched) {
        const double d = std::stod(m[2].str());
        if (d == 0.0) return std::nullopt;
        v2 /= d;
    }
    return v2;
}

struct Axis {
    double lo = 0.0;
    double hi = 0.0;
    int points = 1;

    double at(int i) const { return points == 1 ? lo : lo + (hi - lo) * i / (points - 1); }
};

struct Thermal {
    double nbar = 0.0;
    std::optional<double> dnbar_dT;  // set when the run was specified by temperature
};

// Resolves parameters for one command, records every resolved value for the
// header and rejects flags the command does not read.
class Params {
public:
    Params(std::string command, const std::map<std::string, std::optional<std::string>>& raw)
        : command_(std::move(command)), raw_(raw) {}

    bool given(const std::string& key) const { return raw_.at(key).has_value(); }

    double real(const std::string& key, double fallback) {
        used_.insert(key);
        double v = fallback;
        if (given(key)) {
            const auto parsed = parse_real(*raw_.at(key));
            if (!parsed) throw ConfigError("--" + key + ": expected a number, got '" + *raw_.at(key) + "'");
            v = *parsed;
        }
        config(key, fmt(v));
        return v;
    }

    // nullopt means auto
    std::optional<double> real_or_auto(const std::string& key, std::optional<double> fallback) {
        used_.insert(key);
        if (given(key) && trim(*raw_.at(key)) == "auto") {
            config(key, "auto");
            return std::nullopt;
        }
        if (!given(key) && !fallback) {
            config(key, "auto");
            return std::nullopt;
        }
        return real(key, fallback.value_or(0.0));
    }

    int integer(const std::string& key, int fallback, int min_value) {
        used_.insert(key);
        int v = fallback;
        if (given(key)) {
            const std::string s = trim(*raw_.at(key));
            std::size_t pos = 0;
            try {
                v = std::stoi(s, &pos);
            } catch (const std::exception&) {
                pos = 0;
            }
            if (s.empty() || pos != s.size()) throw ConfigError("--" + key + ": expected an integer, got '" + s + "'");
        }
        if (v < min_value) throw ConfigError("--" + key + " must be >= " + std::to_string(min_value));
        config(key, std::to_string(v));
        return v;
    }

    Axis axis(const std::string& name, double lo, double hi, int points) {
        Axis a{real(name + "-lo", lo), real(name + "-hi", hi), integer(name + "-points", points, 1)};
        if (a.hi < a.lo) throw ConfigError("--" + name + "-hi must be >= --" + name + "-lo");
        return a;
    }

    Thermal thermal(double fallback_nbar) {
        Thermal t;
        if (given("temperature") || given("omega")) {
            if (given("nbar")) throw ConfigError("give either --nbar or --temperature with --omega, not both");
            if (!given("temperature") || !given("omega"))
                throw ConfigError("--temperature and --omega must be given together");
            const double kelvin = real("temperature", 0.0);
            const double omega = real("omega", 0.0);
            t.nbar = nbar_from_temperature(kelvin, omega);
            t.dnbar_dT = dnbar_dtemperature(kelvin, omega);
            resolved("nbar", fmt(t.nbar));
            resolved("dnbar_dT", fmt(*t.dnbar_dT));
            return t;
        }
        t.nbar = real("nbar", fallback_nbar);
        return t;
    }

    FockCutoff cutoff(double alpha) {
        const auto n = real_or_auto("n-max", std::nullopt);
        if (!n) {
            const FockCutoff c = FockCutoff::for_coherent(alpha);
            cutoff_line("n_max = " + std::to_string(c.n_max()) + " (ceil(alpha^2 + 8 alpha + 10))");
            return c;
        }
        if (*n != std::floor(*n) || *n < 0) throw ConfigError("--n-max must be a non-negative integer");
        const FockCutoff c(static_cast<int>(*n));
        cutoff_line("n_max = " + std::to_string(c.n_max()));
        return c;
    }

    // g_max at --ref-nbar when --g auto (the default)
    double coupling(double alpha, double tau, double fallback_ref_nbar, std::optional<FockCutoff> cut) {
        const auto g = real_or_auto("g", std::nullopt);
        if (g) return *g;
        const double ref = real("ref-nbar", fallback_ref_nbar);
        GmaxOptions opts;
        opts.cutoff = cut;
        const double gm = find_gmax(alpha, ref, tau, opts).g_max;
        resolved("g", fmt(gm));
        return gm;
    }

    double kerr(double g, std::optional<double> fallback) {
        const auto chi = real_or_auto("chi", fallback);
        if (chi) return *chi;
        const double c = KerrStrength::cancelling(g).chi;
        resolved("chi", fmt(c));
        return c;
    }

    QuadratureSpec quadrature() {
        QuadratureSpec q;
        q.points = integer("quad-points", q.points, 3);
        numerics("homodyne = trapezoid on [-L, L], L = sqrt(2 <n>) + 8, " + std::to_string(q.points) +
                 " points checked against " + std::to_string(2 * q.points - 1) +
                 " (value from the finer grid), rel_tol = " + fmt(q.rel_tol));
        return q;
    }

    void config(const std::string& key, const std::string& value) { header_.push_back("# config: " + key + " = " + value); }
    void resolved(const std::string& key, const std::string& value) {
        header_.push_back("# resolved: " + key + " = " + value);
    }
    void cutoff_line(const std::string& text) { header_.push_back("# cutoff: " + text); }
    void numerics(const std::string& text) { header_.push_back("# numerics: " + text); }

    void finish() const {
        for (const auto& [key, value] : raw_) {
            if (value && !used_.count(key)) throw ConfigError("--" + key + " does not apply to " + command_);
        }
    }

    const std::vector<std::string>& header() const { return header_; }

private:
    std::string command_;
    const std::map<std::string, std::optional<std::string>>& raw_;
    std::set<std::string> used_;
    std::vector<std::string> header_;
};

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> footer;  // written as '#' lines after the body
};

// Runs body(i) for i < n across threads; rethrows the first failure.
void parallel_for(int n, const std::function<void(int)>& body) {
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) {
        try {
            body(i);
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
}

std::string sld_numerics() {
    return "fisher = " + to_string(FisherMethod::sld_spectral) + ", derivative = " +
           to_string(DerivativeScheme::analytic) + ", eigenvalue_floor = " + fmt(QfiOptions{}.eigenvalue_floor);
}

Table qfi_map(Params& p) {
    const double alpha = p.real("alpha", 2.0);
    const Thermal th = p.thermal(1.0);
    const double chi = p.real("chi", 0.0);
    const FockCutoff cut = p.cutoff(alpha);
    const Axis g = p.axis("g", 0.0, 2.0, 60);
    const Axis tau = p.axis("tau", 0.0, 2 * kPi, 60);
    p.finish();

    const int cells = g.points * tau.points;
    std::vector<FisherResult> fq(cells);
    parallel_for(cells, [&](int i) {
        fq[i] = qfi(ProbeModel(alpha, g.at(i / tau.points), tau.at(i % tau.points), chi, cut), th.nbar);
    });

    Table t;
    t.columns = {"g", "tau", "fq"};
    if (th.dnbar_dT) t.columns.push_back("ft");
    int excluded = 0;
    for (int i = 0; i < cells; ++i) {
        excluded = std::max(excluded, fq[i].numerics.excluded_pairs);
        std::vector<std::string> row = {fmt(g.at(i / tau.points)), fmt(tau.at(i % tau.points)), fmt(fq[i].value)};
        if (th.dnbar_dT) row.push_back(fmt(fq[i].value * *th.dnbar_dT * *th.dnbar_dT));
        t.rows.push_back(std::move(row));
    }
    p.numerics(sld_numerics() + ", max excluded pairs = " + std::to_string(excluded));
    return t;
}

GmaxOptions gmax_options(Params& p, FockCutoff cut) {
    GmaxOptions opts;
    opts.g_lo = p.real("g-lo", opts.g_lo);
    opts.g_hi = p.real("g-hi", opts.g_hi);
    opts.scan_points = p.integer("g-points", opts.scan_points, 3);
    if (!(opts.g_hi > opts.g_lo)) throw ConfigError("--g-hi must be > --g-lo");
    opts.cutoff = cut;
    p.numerics("g_max = scan of " + std::to_string(opts.scan_points) + " points then golden section to g_tol = " +
               fmt(opts.g_tol) + "; " + sld_numerics());
    return opts;
}

Table qfi_vs_nbar(Params& p) {
    const double alpha = p.real("alpha", 2.0);
    const double tau = p.real("tau", kPi);
    const FockCutoff cut = p.cutoff(alpha);
    const Axis nbar = p.axis("nbar", 0.0, 1.5, 16);
    const GmaxOptions opts = gmax_options(p, cut);
    p.finish();

    std::vector<GmaxResult> res(nbar.points);
    parallel_for(nbar.points, [&](int i) { res[i] = find_gmax(alpha, nbar.at(i), tau, opts); });

    Table t;
    t.columns = {"nbar", "g_max", "fq_max", "fq_limit"};
    int boundary = 0;
    for (int i = 0; i < nbar.points; ++i) {
        const double n = nbar.at(i);
        boundary += res[i].on_boundary ? 1 : 0;
        t.rows.push_back({fmt(n), fmt(res[i].g_max), fmt(res[i].fq_max), fmt(2.0 / ((1 + 2 * n) * (1 + 2 * n)))});
    }
    p.numerics("g_max on the range boundary in " + std::to_string(boundary) + " rows");
    return t;
}

Table gmax(Params& p) {
    const double alpha = p.real("alpha", 2.0);
    const Thermal th = p.thermal(1.0);
    const double tau = p.real("tau", kPi);
    const FockCutoff cut = p.cutoff(alpha);
    const GmaxOptions opts = gmax_options(p, cut);
    p.finish();

    const GmaxResult r = find_gmax(alpha, th.nbar, tau, opts);
    Table t;
    t.columns = {"alpha", "nbar", "tau", "g_max", "fq_max", "on_boundary"};
    std::vector<std::string> row = {fmt(alpha), fmt(th.nbar), fmt(tau), fmt(r.g_max), fmt(r.fq_max),
                                    r.on_boundary ? "1" : "0"};
    if (th.dnbar_dT) {
        t.columns.push_back("ft_max");
        row.push_back(fmt(r.fq_max * *th.dnbar_dT * *th.dnbar_dT));
    }
    t.rows.push_back(std::move(row));
    return t;
}

Table fisher_ratio_map(Params& p) {
    const double alpha = p.real("alpha", 3.0);
    const double tau = p.real("tau", kPi);
    const FockCutoff cut = p.cutoff(alpha);
    const double g = p.coupling(alpha, tau, 0.25, cut);
    auto chi_hi = p.real_or_auto("chi-hi", std::nullopt);
    if (!chi_hi) {
        chi_hi = KerrStrength::cancelling(g).chi;
        p.resolved("chi-hi", fmt(*chi_hi));
    }
    const int chi_points = p.integer("chi-points", 11, 1);
    const Axis nbar = p.axis("nbar", 0.05, 1.5, 30);
    const auto phi = p.real_or_auto("phi-lo", std::nullopt);
    PhiOptions opts;
    opts.points = p.integer("phi-points", opts.points, 3);
    opts.quadrature = p.quadrature();
    p.finish();
    if (!phi) p.numerics("phi_star = grid of " + std::to_string(opts.points) + " phases on [0, pi) with parabolic refinement");

    const Axis chi{0.0, *chi_hi, chi_points};
    const int cells = chi.points * nbar.points;
    std::vector<PhiOptimum> res(cells);
    parallel_for(cells, [&](int i) {
        const ProbeModel model(alpha, g, tau, chi.at(i / nbar.points), cut);
        const double n = nbar.at(i % nbar.points);
        if (!phi) {
            res[i] = optimal_phi_lo(model, n, opts);
            return;
        }
        res[i].phi_star = *phi;
        res[i].fc = cfi_homodyne(model, n, {*phi}, opts.quadrature).value;
        res[i].fq = qfi(model, n).value;
        res[i].ratio = res[i].fc / res[i].fq;
    });

    Table t;
    t.columns = {"chi", "nbar", "ratio", "phi_star"};
    for (int i = 0; i < cells; ++i) {
        t.rows.push_back({fmt(chi.at(i / nbar.points)), fmt(nbar.at(i % nbar.points)), fmt(res[i].ratio),
                          fmt(res[i].phi_star)});
    }
    return t;
}

Table phi_sweep(Params& p) {
    const double alpha = p.real("alpha", 3.0);
    const double tau = p.real("tau", kPi);
    const FockCutoff cut = p.cutoff(alpha);
    const double g = p.coupling(alpha, tau, 0.25, cut);
    const double chi = p.kerr(g, std::nullopt);
    const Axis nbar = p.axis("nbar", 0.25, 1.0, 4);
    const int phi_points = p.integer("phi-points", 91, 1);
    const QuadratureSpec quad = p.quadrature();
    p.finish();

    const ProbeModel model(alpha, g, tau, chi, cut);
    const Axis phi{0.0, kPi, phi_points};
    std::vector<double> fq(nbar.points);
    for (int i = 0; i < nbar.points; ++i) fq[i] = qfi(model, nbar.at(i)).value;
    const int cells = nbar.points * phi.points;
    std::vector<double> fc(cells);
    parallel_for(cells, [&](int i) {
        fc[i] = cfi_homodyne(model, nbar.at(i / phi.points), {phi.at(i % phi.points)}, quad).value;
    });

    Table t;
    t.columns = {"nbar", "phi_lo", "fc", "fq", "ratio"};
    for (int i = 0; i < cells; ++i) {
        const double q = fq[i / phi.points];
        t.rows.push_back({fmt(nbar.at(i / phi.points)), fmt(phi.at(i % phi.points)), fmt(fc[i]), fmt(q), fmt(fc[i] / q)});
    }
    return t;
}

Table wigner(Params& p) {
    const double alpha = p.real("alpha", 3.0);
    const Thermal th = p.thermal(0.25);
    const double tau = p.real("tau", kPi);
    const FockCutoff cut = p.cutoff(alpha);
    const double g = p.coupling(alpha, tau, th.nbar, cut);
    const double chi = p.kerr(g, std::nullopt);
    const int points = p.integer("grid-points", 101, 2);
    p.finish();

    const WignerGridSpec spec = WignerGridSpec::for_coherent(alpha, points);
    p.numerics("wigner = Laguerre kernels on [" + fmt(spec.q_min) + ", " + fmt(spec.q_max) + "]^2, " +
               std::to_string(points) + " x " + std::to_string(points) + "; pre = no Kerr, post = chi");
    const DephasingFamily fam = ProbeModel(alpha, g, tau, 0.0, cut).family();
    Table t;
    t.columns = {"variant", "q", "p", "W"};
    for (const auto& [name, kerr] : {std::pair<std::string, double>{"pre", 0.0}, {"post", chi}}) {
        const PhaseSpaceGrid grid = wigner_grid(fam.with_kerr(KerrStrength{kerr}).at(th.nbar), spec);
        for (int i = 0; i < grid.q.size(); ++i) {
            for (int j = 0; j < grid.p.size(); ++j) {
                t.rows.push_back({name, fmt(grid.q[i]), fmt(grid.p[j]), fmt(grid.values(i, j))});
            }
        }
        t.footer.push_back("# summary: variant = " + name + ", chi = " + fmt(kerr) + ", min_W = " +
                           fmt(wigner_min(grid)) + ", normalization = " + fmt(grid.normalization));
    }
    return t;
}

Table gaussian(Params& p) {
    const double g = p.real("g", 0.1);
    const double alpha = p.real("alpha", 3.0);
    const Thermal th = p.thermal(0.5);
    const double tau = p.real("tau", kPi);
    const int thetas = p.integer("theta-points", 8, 1);
    p.finish();

    auto rel = [](double closed, double numeric) { return std::abs(numeric - closed) / std::max(std::abs(closed), 1e-300); };
    Table t;
    t.columns = {"quantity", "theta", "numeric", "closed_form", "abs_dev", "rel_dev"};
    auto add = [&](const std::string& name, const std::string& theta, double numeric, double closed) {
        t.rows.push_back({name, theta, fmt(numeric), fmt(closed), fmt(std::abs(numeric - closed)), fmt(rel(closed, numeric))});
    };

    const Matrix2 sl = evolve_covariance(initial_covariance(th.nbar), g, alpha, tau).optical().cov();
    const Matrix2 closed = sigma_L_closed_form(g, alpha, th.nbar, tau);
    const double scale = std::max(1.0, closed.cwiseAbs().maxCoeff());
    add("sigma_L_11", "", sl(0, 0), closed(0, 0));
    add("sigma_L_12", "", sl(0, 1), closed(0, 1));
    add("sigma_L_22", "", sl(1, 1), closed(1, 1));
    const double sigma_dev = (sl - closed).cwiseAbs().maxCoeff() / scale;

    const double fq = gaussian_qfi(g, alpha, th.nbar, tau).value;
    const double fq_closed = gaussian_qfi_closed_form(g, alpha, th.nbar, tau);
    add("qfi", "", fq, fq_closed);

    p.numerics("sigma_L = S sigma0 S^T with S = exp(omega H_lin tau); homodyne = general-dyne at z = 1e-6, "
               "extrapolated from z = 1e-6 and 1e-7");
    t.footer.push_back("# summary: max_sigma_dev = " + fmt(sigma_dev) + " (relative to max(1, |sigma_L|)), qfi_rel_dev = " +
                       fmt(rel(fq_closed, fq)));
    if (std::abs(tau - kPi) > 1e-12) {
        t.footer.push_back("# summary: homodyne closed form holds at tau = pi only; no homodyne rows");
        return t;
    }
    double worst = 0.0;
    const Matrix2 ds = sigma_L_derivative(g, alpha, tau);
    for (int k = 0; k < thetas; ++k) {
        const double theta = (k + 0.5) * kPi / thetas;
        const double closed_cfi = homodyne_cfi_closed_form(g, alpha, th.nbar, theta);
        const HomodyneLimit lim = homodyne_cfi_limit(sl, ds, theta);
        add("homodyne_cfi", fmt(theta), lim.value, closed_cfi);
        add("homodyne_cfi_extrapolated", fmt(theta), lim.extrapolated, closed_cfi);
        worst = std::max(worst, rel(closed_cfi, lim.value));
    }
    t.footer.push_back("# summary: max_homodyne_rel_dev = " + fmt(worst) + " (z = 1e-6)");
    return t;
}

Table estimate(Params& p) {
    const double alpha = p.real("alpha", 3.0);
    const Thermal th = p.thermal(0.25);
    const double tau = p.real("tau", kPi);
    const FockCutoff cut = p.cutoff(alpha);
    const double g = p.coupling(alpha, tau, th.nbar, cut);
    const double chi = p.kerr(g, std::nullopt);
    const int samples = p.integer("samples", 10000, 0);
    const int first_seed = p.integer("seed", 1000, 0);
    const int seeds = p.integer("seeds", 50, 1);
    const PriorRange prior{p.real("prior-lo", 0.0), p.real("prior-hi", 1.5)};
    const int grid = p.integer("prior-points", 1201, 3);
    const QuadratureSpec quad = p.quadrature();
    const ProbeModel model(alpha, g, tau, chi, cut);
    auto phi = p.real_or_auto("phi-lo", 0.0);
    p.finish();
    if (!(prior.hi > prior.lo)) throw ConfigError("--prior-hi must be > --prior-lo");
    if (!phi) {
        PhiOptions opts;
        opts.quadrature = quad;
        phi = optimal_phi_lo(model, th.nbar, opts).phi_star;
        p.resolved("phi-lo", fmt(*phi));
    }
    p.numerics("estimator = flat prior on [prior-lo, prior-hi], posterior mean and posterior variance on " +
               std::to_string(grid) + " points; sampling = inverse CDF, mt19937_64");

    const HomodyneSetting lo{*phi};
    const DephasingFamily fam = model.family();
    const ProbeState rho = fam.at(th.nbar);
    const double fc = cfi_homodyne(model, th.nbar, lo, quad).value;
    std::vector<EstimationRun> runs(seeds);
    parallel_for(seeds, [&](int s) {
        runs[s] = bayesian_estimate(sample_homodyne(rho, lo, samples, first_seed + s), fam, lo, prior, grid);
        runs[s].samples.clear();
    });

    Table t;
    t.columns = {"seed", "M", "estimate", "variance", "cfi", "product"};
    double sum = 0.0;
    double sum_est = 0.0;
    int warnings = 0;
    for (int s = 0; s < seeds; ++s) {
        const double product = samples * runs[s].variance * fc;
        sum += product;
        sum_est += runs[s].estimate;
        warnings += runs[s].boundary_warning ? 1 : 0;
        t.rows.push_back({std::to_string(first_seed + s), std::to_string(samples), fmt(runs[s].estimate),
                          fmt(runs[s].variance), fmt(fc), fmt(product)});
    }
    t.footer.push_back("# summary: mean_product = " + fmt(sum / seeds) + ", mean_estimate = " + fmt(sum_est / seeds) +
                       ", boundary_warnings = " + std::to_string(warnings));
    return t;
}

struct Command {
    std::string name;
    std::string description;
    std::function<Table(Params&)> body;
};

const std::vector<Command>& commands() {
    static const std::vector<Command> list = {
        {"qfi-map", "F_Q over a (g, tau) grid; columns g,tau,fq", qfi_map},
        {"qfi-vs-nbar", "g_max and optimized F_Q per nbar; columns nbar,g_max,fq_max,fq_limit", qfi_vs_nbar},
        {"gmax", "coupling maximizing F_Q at one (alpha, nbar, tau)", gmax},
        {"fisher-ratio-map", "F_C/F_Q over (chi, nbar) at fixed g; columns chi,nbar,ratio,phi_star", fisher_ratio_map},
        {"phi-sweep", "homodyne F_C against the local-oscillator phase; columns nbar,phi_lo,fc,fq,ratio", phi_sweep},
        {"wigner", "Wigner function before and after the Kerr medium; columns variant,q,p,W", wigner},
        {"gaussian", "linearized Gaussian model, numeric against closed forms", gaussian},
        {"estimate", "Monte Carlo homodyne experiment with a Bayesian estimator; columns seed,M,estimate,variance,cfi,product",
         estimate},
    };
    return list;
}

std::string timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
    return buf;
}

std::string render(const std::string& command, const Params& p, const Table& t) {
    std::ostringstream s;
    s << "# optotherm " << OPTOTHERM_VERSION << "\n";
    s << "# command: " << command << "\n";
    s << "# timestamp: " << timestamp() << "\n";
    for (const auto& line : p.header()) s << line << "\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i) s << (i ? "," : "") << t.columns[i];
    s << "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) s << (i ? "," : "") << row[i];
        s << "\n";
    }
    for (const auto& line : t.footer) s << line << "\n";
    return s.str();
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app("Thermometry of a mechanical oscillator probed by light.", "optotherm");
    app.require_subcommand(1, 1);
    app.fallthrough();
    app.set_config("--config", "", "key = value file; flags on the command line override it");
    app.allow_config_extras(CLI::config_extras_mode::error);

    std::string out_path;
    app.add_option("--out", out_path, "CSV output path (default stdout)");
    std::map<std::string, std::optional<std::string>> raw;
    for (const auto& [key, help] : kParameters) {
        raw[key];
        app.add_option("--" + key, raw[key], help);
    }
    for (const Command& c : commands()) app.add_subcommand(c.name, c.description)->fallthrough();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return kOk;
        }
        err << "optotherm: " << e.what() << "\n";
        return kConfigError;
    }

    const CLI::App* sub = app.get_subcommands().front();
    const auto& list = commands();
    const auto cmd = std::find_if(list.begin(), list.end(), [&](const Command& c) { return c.name == sub->get_name(); });

    try {
        Params params(cmd->name, raw);
        const Table table = cmd->body(params);
        const std::string text = render(cmd->name, params, table);
        if (out_path.empty()) {
            out << text;
        } else {
            std::ofstream file(out_path);
            if (!file) throw ConfigError("cannot open --out " + out_path);
            file << text;
        }
        return kOk;
    } catch (const ConfigError& e) {
        err << "optotherm: config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const DomainError& e) {
        err << "optotherm: config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const PrecisionError& e) {
        err << "optotherm: numerical precision failure: " << e.what() << "\n";
        return kPrecisionError;
    } catch (const TruncationError& e) {
        err << "optotherm: cutoff insufficient: " << e.what() << "\n";
        return kCutoffError;
    } catch (const std::exception& e) {
        err << "optotherm: internal error: " << e.what() << "\n";
        return kInternalError;
    }
}

} // namespace optotherm::cli
