// cmag-wkb: WKB pseudomode experiments for complex magnetic potentials.
//
// Exit codes: 0 success, 2 configuration error, 3 base point rejected,
// 4 series identity failure, 5 quadrature refused.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <cmag/errors.hpp>
#include <cmag/fieldmodel.hpp>
#include <cmag/numop.hpp>
#include <cmag/parallel.hpp>
#include <cmag/pseudomode.hpp>
#include <cmag/serialize.hpp>
#include <cmag/wkb.hpp>

namespace fs = std::filesystem;
using namespace cmag;

namespace
{

enum Exit { kOk = 0, kConfig = 2, kGamma = 3, kIdentity = 4, kQuadrature = 5 };

std::string trim(std::string s)
{
    s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
    return s;
}

// Decimal, or [sign][coef][*]pi[/den].
double parse_angle(const std::string &text)
{
    const std::string s = trim(text);
    static const std::regex re(R"(^([+-]?)(\d*\.?\d*)\*?pi(?:/(\d*\.?\d+))?$)");
    std::smatch m;
    if (std::regex_match(s, m, re)) {
        double v = M_PI;
        if (m[2].length() > 0) {
            v *= std::stod(m[2].str());
        }
        if (m[3].matched) {
            v /= std::stod(m[3].str());
        }
        return m[1].str() == "-" ? -v : v;
    }
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception &) {
        pos = 0;
    }
    if (pos == 0 || pos != s.size()) {
        throw ConfigError("cannot parse number '" + text + "'");
    }
    return v;
}

std::vector<std::string> split(const std::string &s, char sep)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, sep)) {
        out.push_back(part);
    }
    return out;
}

Point parse_point(const std::string &s)
{
    const auto p = split(s, ',');
    if (p.size() != 2) {
        throw ConfigError("expected a point 'x1,x2', got '" + s + "'");
    }
    return {parse_angle(p[0]), parse_angle(p[1])};
}

double parse_real_strict(const std::string &s, const std::string &whole)
{
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception &) {
        pos = 0;
    }
    if (pos == 0 || pos != s.size()) {
        throw ConfigError("cannot parse complex number '" + whole + "'");
    }
    return v;
}

// "1", "-0.5", "i", "-2i", "1+i", "1-2.5i", "1e-3+2e-1i"
cplx parse_complex(const std::string &text)
{
    const std::string s = trim(text);
    if (s.empty()) {
        throw ConfigError("empty complex number");
    }
    if (s.back() != 'i') {
        return {parse_real_strict(s, text), 0.0};
    }
    const std::string body = s.substr(0, s.size() - 1);
    std::size_t split_at = std::string::npos;
    for (std::size_t k = body.size(); k-- > 1;) {
        if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
            split_at = k;
            break;
        }
    }
    const std::string re = split_at == std::string::npos ? "" : body.substr(0, split_at);
    std::string im = split_at == std::string::npos ? body : body.substr(split_at);
    if (im.empty() || im == "+") {
        im = "1";
    } else if (im == "-") {
        im = "-1";
    }
    return {re.empty() ? 0.0 : parse_real_strict(re, text), parse_real_strict(im, text)};
}

struct Sweep {
    double hmax = 0.1, hmin = 0.003;
    int count = 8;
    std::vector<double> values() const
    {
        std::vector<double> v;
        for (int k = 0; k < count; ++k) {
            v.push_back(count == 1 ? hmax : hmax * std::pow(hmin / hmax, static_cast<double>(k) / (count - 1)));
        }
        return v;
    }
};

Sweep parse_sweep(const std::string &s)
{
    const auto p = split(s, ':');
    Sweep w;
    if (p.size() != 3) {
        throw ConfigError("expected h sweep 'hmax:hmin:count', got '" + s + "'");
    }
    w.hmax = parse_angle(p[0]);
    w.hmin = parse_angle(p[1]);
    w.count = std::stoi(p[2]);
    return w;
}

Region parse_region(const std::string &s)
{
    const auto p = split(s, ':');
    if (p.size() != 4) {
        throw ConfigError("expected region 'x1min:x1max:x2min:x2max', got '" + s + "'");
    }
    return {parse_angle(p[0]), parse_angle(p[1]), parse_angle(p[2]), parse_angle(p[3])};
}

json complex_json(const std::string &s)
{
    const cplx c = parse_complex(s);
    return json::array({c.real(), c.imag()});
}

json load_json(const std::string &path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open '" + path + "'");
    }
    try {
        return json::parse(in);
    } catch (const json::exception &e) {
        throw ConfigError("'" + path + "': " + e.what());
    }
}

void write_text(const fs::path &p, const std::string &text)
{
    std::ofstream out(p, std::ios::binary);
    if (!out) {
        throw ConfigError("cannot write '" + p.string() + "'");
    }
    out << text;
}

// Options shared by every subcommand; unset flags leave the file's values alone.
struct Common {
    std::string config;
    std::string builtin, field_file, a, b, c, alpha, x0;
    std::optional<double> trusted_radius, gamma_tol;
    int workers = 0;

    void add(CLI::App *app)
    {
        app->add_option("--config", config, "JSON configuration file; flags override it");
        app->add_option("--builtin", builtin, "oscillating | miller_simon | exponential | polynomial");
        app->add_option("--field-file", field_file, "JSON field definition");
        app->add_option("--a", a, "polynomial field: a (complex, e.g. 1+2i)");
        app->add_option("--b", b, "polynomial field: b (complex)");
        app->add_option("--c", c, "c parameter of polynomial, miller_simon or exponential fields");
        app->add_option("--alpha", alpha, "miller_simon exponent");
        app->add_option("--trusted-radius", trusted_radius, "radius on which the field's Taylor data are used");
        app->add_option("--x0", x0, "base point 'x1,x2'; pi fractions such as pi/3 are accepted");
        app->add_option("--workers", workers, "worker threads (default: CMAG_WORKERS or 1)");
        app->add_option("--gamma-tol", gamma_tol,
                        "tolerance of the Gamma conditions (default 1e-9); decimal base points need about 1e-4");
    }

    json merged() const
    {
        json cfg = config.empty() ? json::object() : load_json(config);
        json &field = cfg["field"];
        if (!field.is_object()) {
            field = json::object();
        }
        if (!field_file.empty()) {
            field = load_json(field_file);
        }
        if (!builtin.empty()) {
            if (field.value("builtin", std::string()) != builtin) {
                field = json::object();
            }
            field["builtin"] = builtin;
        }
        if (!a.empty()) {
            field["a"] = complex_json(a);
        }
        if (!b.empty()) {
            field["b"] = complex_json(b);
        }
        if (!c.empty()) {
            const cplx v = parse_complex(c);
            field["c"] = field.value("builtin", std::string()) == "exponential" ? json(v.real())
                                                                                : json::array({v.real(), v.imag()});
        }
        if (!alpha.empty()) {
            field["alpha"] = parse_angle(alpha);
        }
        if (trusted_radius) {
            field["trusted_radius"] = *trusted_radius;
        }
        if (!x0.empty()) {
            cfg["x0"] = x0;
        }
        if (workers > 0) {
            cfg["workers"] = workers;
        }
        if (gamma_tol) {
            cfg["gamma_tol"] = *gamma_tol;
        }
        return cfg;
    }
};

Point point_from(const json &cfg, const char *key, Point dflt)
{
    if (!cfg.contains(key)) {
        return dflt;
    }
    const auto &v = cfg.at(key);
    if (v.is_string()) {
        return parse_point(v.get<std::string>());
    }
    if (v.is_array() && v.size() == 2) {
        auto one = [](const json &e) { return e.is_string() ? parse_angle(e.get<std::string>()) : e.get<double>(); };
        return {one(v[0]), one(v[1])};
    }
    throw ConfigError(std::string("bad '") + key + "': " + v.dump());
}

int workers_from(const json &cfg)
{
    return cfg.contains("workers") ? std::clamp(cfg.at("workers").get<int>(), 1, 256) : worker_count();
}

FieldPtr field_of(const json &cfg)
{
    if (!cfg.contains("field") || cfg.at("field").empty()) {
        throw ConfigError("no field given (use --builtin, --field-file or a 'field' entry)");
    }
    return field_from_json(cfg.at("field"));
}

void print_gamma_failure(const GammaReport &g)
{
    std::cerr << "x0 = (" << g.x[0] << ", " << g.x[1] << ") is not admissible:";
    for (const auto &f : g.failed_conditions) {
        std::cerr << ' ' << f;
    }
    std::cerr << "\n  Q = (" << g.Q1 << ", " << g.Q2 << ", " << g.Q3 << "), det = " << g.det2
              << ", |Im A| = " << g.imA_norm << ", B = " << g.B0 << ", d_zbar B = " << g.dzbarB << '\n';
}

// ----- run -----

struct RunFlags {
    Common common;
    std::optional<int> D, N, fd_n;
    std::optional<double> m, delta, quad_ppsh, h0;
    std::optional<int> quad_min, seed;
    bool adaptive = false, strict_phase = false;
    std::string h, out;
};

int cmd_run(const RunFlags &f)
{
    json cfg = f.common.merged();
    if (f.D) cfg["D"] = *f.D;
    if (f.N) cfg["N"] = *f.N;
    if (f.adaptive) cfg["adaptive"] = true;
    if (f.m) cfg["m"] = *f.m;
    if (f.delta) cfg["delta"] = *f.delta;
    if (!f.h.empty()) cfg["h"] = f.h;
    if (f.quad_min) cfg["quadrature"]["min_points"] = *f.quad_min;
    if (f.quad_ppsh) cfg["quadrature"]["points_per_sqrt_h"] = *f.quad_ppsh;
    if (f.fd_n) cfg["fd_n"] = *f.fd_n;
    if (!f.out.empty()) cfg["out"] = f.out;
    if (f.seed) cfg["seed"] = *f.seed;

    const int workers = workers_from(cfg);
    const auto field = field_of(cfg);
    const Point x0 = point_from(cfg, "x0", {0.0, 0.0});
    const int D = cfg.value("D", 24);
    const bool adaptive = cfg.value("adaptive", false);
    const int N = cfg.value("N", 1);
    Sweep sweep;
    if (cfg.contains("h")) {
        const auto &hv = cfg.at("h");
        if (hv.is_string()) {
            sweep = parse_sweep(hv.get<std::string>());
        } else {
            sweep.hmax = hv.at("h_max").get<double>();
            sweep.hmin = hv.at("h_min").get<double>();
            sweep.count = hv.at("count").get<int>();
        }
    }
    if (!(sweep.hmin > 0.0) || !(sweep.hmin < sweep.hmax) || sweep.count < 1) {
        throw ConfigError("h sweep needs 0 < h_min < h_max and count >= 1");
    }
    const fs::path out = cfg.value("out", std::string("cmag-out"));

    const auto spec = make_field_spec(field, x0, D);
    const auto gamma = compute_Q(spec, cfg.value("gamma_tol", kGammaTol));
    if (!gamma.in_gamma) {
        print_gamma_failure(gamma);
        return kGamma;
    }
    // adaptive runs need room for the clipped N; keep the budget at what D allows
    const int Nsolve = adaptive ? max_transport_order(D) : N;
    if (N < 0) {
        throw ConfigError("N must be >= 0");
    }
    // throws IdentityFailure before any quadrature
    const auto sol = std::make_shared<const WKBSolution>(solve_wkb(spec.Btilde, Nsolve));

    PseudomodeConfig pc;
    pc.rule.adaptive = adaptive;
    pc.rule.N = N;
    pc.rule.m = cfg.value("m", 0.0);
    pc.delta = cfg.value("delta", -1.0);
    pc.allow_indefinite = !cfg.value("strict_phase", f.strict_phase);
    Pseudomode pm(spec, sol, pc);
    if (pm.indefinite()) {
        const auto q = pm.phase_quadratic();
        std::cerr << "warning: Re P is not positive definite at x0 (quadratic part " << q[0] << " u^2 - 2 (" << q[1]
                  << ") u v + " << q[2] << " v^2); u_h does not localize and the residual is cutoff dominated\n";
    }

    QuadConfig quad;
    if (cfg.contains("quadrature")) {
        quad.min_points = cfg["quadrature"].value("min_points", quad.min_points);
        quad.points_per_sqrt_h = cfg["quadrature"].value("points_per_sqrt_h", quad.points_per_sqrt_h);
    }
    const auto hs = sweep.values();
    std::vector<ResidualReport> reports(hs.size());
    for (double h : hs) {
        bool clipped = false;
        pm.N_used(h, &clipped);
        if (clipped) {
            std::cerr << "warning: adaptive N(h = " << h << ") exceeds the degree budget; clipped\n";
        }
    }
    parallel_for(
        hs.size(), [&](std::size_t k) { reports[k] = residual_series_exact(pm, hs[k], -1, 1, quad); }, workers);
    const int fd_n = cfg.value("fd_n", 0);
    if (fd_n > 0) {
        std::vector<ResidualReport> fd(hs.size());
        for (std::size_t k = 0; k < hs.size(); ++k) {
            fd[k] = residual_finite_difference(pm, hs[k], fd_n, -1, workers);
        }
        reports.insert(reports.end(), fd.begin(), fd.end());
    }

    fs::create_directories(out);
    std::ostringstream csv;
    write_reports_csv(csv, reports);
    write_text(out / "reports.csv", csv.str());
    write_text(out / "gamma.json", to_json(gamma).dump(2) + "\n");
    write_text(out / "wkb.json", to_json(*sol).dump(1) + "\n");
    const auto bf = fit_growth(*sol, 0.25 * pm.analytic_radius(), 0.25 * pm.analytic_radius());
    write_text(out / "boundfit.json", to_json(bf).dump(2) + "\n");

    json summary;
    summary["x0"] = json::array({x0[0], x0[1]});
    summary["mu"] = to_json(sol->mu);
    summary["N_solved"] = sol->N;
    summary["cutoff"] = {{"r_in", pm.cutoff().r_in},     {"r_out", pm.cutoff().r_out}, {"delta", pm.cutoff().delta},
                         {"M1", pm.cutoff().M1},         {"M2", pm.cutoff().M2},       {"indefinite", pm.indefinite()},
                         {"radius", pm.analytic_radius()}};
    summary["m_used"] = pm.m_used();
    std::vector<ResidualReport> series(reports.begin(), reports.begin() + static_cast<std::ptrdiff_t>(hs.size()));
    for (auto model : {DecayModel::power, DecayModel::stretched}) {
        const char *key = model == DecayModel::power ? "fit_power" : "fit_stretched";
        try {
            const auto fit = fit_decay(series, model);
            summary[key] = {{"slope", fit.slope}, {"C", fit.C}, {"intercept", fit.intercept}, {"r2", fit.r2}};
        } catch (const PreconditionError &e) {
            summary[key] = {{"skipped", e.what()}};
        }
    }
    bool identities_ok = true;
    for (const auto &c : sol->checks) {
        identities_ok = identities_ok && c.ok;
    }
    summary["identities_ok"] = identities_ok;
    write_text(out / "summary.json", summary.dump(2) + "\n");

    std::cout << csv.str();
    if (summary["fit_power"].contains("slope")) {
        std::cout << "# power-law slope " << format_double(summary["fit_power"]["slope"].get<double>()) << '\n';
    }
    return identities_ok ? kOk : kIdentity;
}

// ----- gamma-scan -----

struct ScanFlags {
    Common common;
    std::string region, out;
    std::optional<int> n;
};

int cmd_gamma_scan(const ScanFlags &f)
{
    json cfg = f.common.merged();
    const auto field = field_of(cfg);
    Region r{-2 * M_PI, 2 * M_PI, -2 * M_PI, 2 * M_PI};
    if (!f.region.empty()) {
        r = parse_region(f.region);
    } else if (cfg.contains("region")) {
        r = parse_region(cfg.at("region").get<std::string>());
    }
    const int n = f.n ? *f.n : cfg.value("n", 257);
    if (n < 2) {
        throw ConfigError("gamma-scan needs at least 2 points per axis");
    }
    if (cfg.contains("gamma_tol")) {
        throw ConfigError("gamma-scan uses the fixed tolerance 1e-9");
    }
    const auto raster = gamma_scan(*field, r, n, n, workers_from(cfg));
    std::ostringstream os;
    os << "# cmag-wkb v1\nx1,x2,in_gamma,Q1,Q2,Q3,det2,failed\n";
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const auto &g = raster.at(i, j);
            const auto p = raster.point(i, j);
            std::string failed;
            for (const auto &c : g.failed_conditions) {
                failed += (failed.empty() ? "" : ";") + c;
            }
            os << format_double(p[0]) << ',' << format_double(p[1]) << ',' << (g.in_gamma ? 1 : 0) << ','
               << format_double(g.Q1) << ',' << format_double(g.Q2) << ',' << format_double(g.Q3) << ','
               << format_double(g.det2) << ',' << failed << '\n';
        }
    }
    const std::string out = f.out.empty() ? cfg.value("out", std::string()) : f.out;
    if (out.empty()) {
        std::cout << os.str();
    } else {
        write_text(out, os.str());
    }
    std::cerr << raster.count_in_gamma() << " of " << n * n << " samples in Gamma\n";
    return kOk;
}

// ----- check-conditions -----

struct CondFlags {
    Common common;
    std::optional<double> h, epsilon, epsilon1, epsilon2, C;
    std::optional<int> density;
    std::string region, radii, out;
};

int cmd_check_conditions(const CondFlags &f)
{
    json cfg = f.common.merged();
    const auto field = field_of(cfg);
    ConditionCheckConfig cc;
    cc.h = f.h ? *f.h : cfg.value("h", cc.h);
    // C1 admits epsilon in (0, 1), C2 in (0, 1/2)
    double eps1 = cfg.value("epsilon1", cfg.value("epsilon", 0.9));
    double eps2 = cfg.value("epsilon2", cfg.value("epsilon", 0.45));
    if (f.epsilon) {
        eps1 = eps2 = *f.epsilon;
    }
    eps1 = f.epsilon1 ? *f.epsilon1 : eps1;
    eps2 = f.epsilon2 ? *f.epsilon2 : eps2;
    if (f.C || cfg.contains("C")) {
        cc.has_C = true;
        cc.C_const = f.C ? *f.C : cfg.at("C").get<double>();
    }
    cc.density = f.density ? *f.density : cfg.value("density", cc.density);
    if (!f.region.empty()) {
        cc.region = parse_region(f.region);
    } else if (cfg.contains("region")) {
        cc.region = parse_region(cfg.at("region").get<std::string>());
    }
    std::vector<double> radii{1, 2, 4, 8, 16};
    const std::string rs = !f.radii.empty() ? f.radii : cfg.value("radii", std::string());
    if (!rs.empty()) {
        radii.clear();
        for (const auto &p : split(rs, ',')) {
            radii.push_back(parse_angle(p));
        }
    }
    json j;
    j["field"] = field->name();
    cc.epsilon = eps1;
    j["C1"] = to_json(check_C_any_sign(*field, cc, Condition::C1));
    cc.epsilon = eps2;
    j["C2"] = to_json(check_C_any_sign(*field, cc, Condition::C2));
    j["hypotheses"] = to_json(check_H(*field, radii));
    const std::string text = j.dump(2) + "\n";
    const std::string out = f.out.empty() ? cfg.value("out", std::string()) : f.out;
    if (out.empty()) {
        std::cout << text;
    } else {
        write_text(out, text);
    }
    std::cerr << "C1 " << (j["C1"]["pass"].get<bool>() ? "pass" : "fail") << ", C2 "
              << (j["C2"]["pass"].get<bool>() ? "pass" : "fail") << ", H1 "
              << (j["hypotheses"]["H1"]["diverges"].get<bool>() ? "holds" : "fails") << ", H2 "
              << (j["hypotheses"]["H2"]["diverges"].get<bool>() ? "holds" : "fails") << '\n';
    return kOk;
}

// ----- bound-fit -----

struct FitFlags {
    Common common;
    std::optional<int> D, N;
    std::optional<double> R1, R2;
    std::string out;
};

int cmd_bound_fit(const FitFlags &f)
{
    json cfg = f.common.merged();
    const auto field = field_of(cfg);
    const Point x0 = point_from(cfg, "x0", {0.0, 0.0});
    const int D = f.D ? *f.D : cfg.value("D", 24);
    const int N = f.N ? *f.N : cfg.value("N", std::min(6, max_transport_order(D)));
    const auto spec = make_field_spec(field, x0, D);
    const auto gamma = compute_Q(spec, cfg.value("gamma_tol", kGammaTol));
    if (!gamma.in_gamma) {
        print_gamma_failure(gamma);
        return kGamma;
    }
    const auto sol = solve_wkb(spec.Btilde, N);
    const double R = 0.25 * std::min(spec.analytic_radius, 1.0);
    const auto fit = fit_growth(sol, f.R1 ? *f.R1 : cfg.value("R1", R), f.R2 ? *f.R2 : cfg.value("R2", R));
    const std::string text = to_json(fit).dump(2) + "\n";
    const std::string out = f.out.empty() ? cfg.value("out", std::string()) : f.out;
    if (out.empty()) {
        std::cout << text;
    } else {
        write_text(out, text);
    }
    return kOk;
}

template <class Fn> int guarded(Fn fn)
{
    try {
        return fn();
    } catch (const ConfigError &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const GammaRejection &e) {
        std::cerr << "rejected: " << e.what() << '\n';
        return kGamma;
    } catch (const IdentityFailure &e) {
        std::cerr << "identity failure: " << e.what() << '\n';
        return kIdentity;
    } catch (const QuadratureRefusal &e) {
        std::cerr << "quadrature: " << e.what() << '\n';
        return kQuadrature;
    } catch (const json::exception &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const std::invalid_argument &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"WKB pseudomodes for magnetic Laplacians with complex potentials"};
    app.require_subcommand(1);
    app.set_help_flag("--help", "Print this help message and exit");

    RunFlags rf;
    auto *run = app.add_subcommand("run", "WKB construction, pseudomode and residual h-sweep");
    run->set_help_flag("--help", "Print this help message and exit");
    rf.common.add(run);
    run->add_option("--D", rf.D, "degree cap of the series (default 24)");
    run->add_option("--N", rf.N, "fixed transport order (default 1)");
    run->add_flag("--adaptive", rf.adaptive, "N(h) = floor((e m h)^(-1/7))");
    run->add_option("--m", rf.m, "growth constant for --adaptive (default: fitted)");
    run->add_option("--h", rf.h, "geometric sweep hmax:hmin:count (default 0.1:0.003:8)");
    run->add_option("--delta", rf.delta, "cutoff radius (default: automatic)");
    run->add_option("--quad-min-points", rf.quad_min, "minimum Gauss-Legendre points per axis");
    run->add_option("--quad-points-per-sqrt-h", rf.quad_ppsh, "points per axis per sqrt(h) and unit length");
    run->add_option("--fd-n", rf.fd_n, "also evaluate the finite-difference residual on an n x n grid");
    run->add_flag("--strict-phase", rf.strict_phase, "reject x0 when Re P is not positive definite");
    run->add_option("--seed", rf.seed, "random seed (recorded; the run itself is deterministic)");
    run->add_option("--out", rf.out, "output directory (default cmag-out)");

    ScanFlags sf;
    auto *scan = app.add_subcommand("gamma-scan", "Gamma membership raster (CSV)");
    sf.common.add(scan);
    scan->add_option("--region", sf.region, "x1min:x1max:x2min:x2max (default -2pi:2pi:-2pi:2pi)");
    scan->add_option("--n", sf.n, "points per axis (default 257)");
    scan->add_option("--out", sf.out, "CSV path (default stdout)");

    CondFlags cf;
    auto *cond = app.add_subcommand("check-conditions", "sampled checks of C1, C2 and H1-H3");
    cond->set_help_flag("--help", "Print this help message and exit");
    cf.common.add(cond);
    cond->add_option("--h", cf.h, "semiclassical parameter (default 1)");
    cond->add_option("--epsilon", cf.epsilon, "epsilon for both conditions");
    cond->add_option("--epsilon1", cf.epsilon1, "epsilon for C1, in (0, 1) (default 0.9)");
    cond->add_option("--epsilon2", cf.epsilon2, "epsilon for C2, in (0, 1/2) (default 0.45)");
    cond->add_option("--C", cf.C, "explicit constant (default: search over growing discs)");
    cond->add_option("--density", cf.density, "samples per axis (default 101)");
    cond->add_option("--region", cf.region, "x1min:x1max:x2min:x2max (default -4:4:-4:4)");
    cond->add_option("--radii", cf.radii, "circle radii for H1-H3 (default 1,2,4,8,16)");
    cond->add_option("--out", cf.out, "JSON path (default stdout)");

    FitFlags ff;
    auto *fit = app.add_subcommand("bound-fit", "growth of the transport amplitudes");
    ff.common.add(fit);
    fit->add_option("--D", ff.D, "degree cap (default 24)");
    fit->add_option("--N", ff.N, "transport order (default min(6, budget))");
    fit->add_option("--R1", ff.R1, "z radius of the polydisc");
    fit->add_option("--R2", ff.R2, "w radius of the polydisc");
    fit->add_option("--out", ff.out, "JSON path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kConfig;
    }
    if (run->parsed()) {
        return guarded([&] { return cmd_run(rf); });
    }
    if (scan->parsed()) {
        return guarded([&] { return cmd_gamma_scan(sf); });
    }
    if (cond->parsed()) {
        return guarded([&] { return cmd_check_conditions(cf); });
    }
    return guarded([&] { return cmd_bound_fit(ff); });
}
