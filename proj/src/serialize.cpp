#include <cmag/serialize.hpp>

#include <cmath>
#include <limits>

#include <cmag/errors.hpp>

namespace cmag
{

namespace
{

json real_json(double x)
{
    return std::isfinite(x) ? json(x) : json(nullptr);
}

double real_from(const json &j)
{
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

json point_json(const Point &p)
{
    return json::array({real_json(p[0]), real_json(p[1])});
}

json doubles(const std::vector<double> &v)
{
    json a = json::array();
    for (double x : v) {
        a.push_back(real_json(x));
    }
    return a;
}

cplx param(const json &j, const char *key, cplx dflt)
{
    if (!j.contains(key)) {
        return dflt;
    }
    return cplx_from_json(j.at(key));
}

} // namespace

json to_json(cplx c)
{
    return json::array({real_json(c.real()), real_json(c.imag())});
}

cplx cplx_from_json(const json &j)
{
    if (j.is_number()) {
        return {j.get<double>(), 0.0};
    }
    if (j.is_array() && j.size() == 2) {
        return {real_from(j[0]), real_from(j[1])};
    }
    throw ConfigError("expected a number or [re, im], got " + j.dump());
}

json to_json(const UniSeries &a)
{
    json c = json::array();
    for (int k = 0; k <= a.cap(); ++k) {
        c.push_back(to_json(a[k]));
    }
    return {{"cap", a.cap()}, {"coeffs", c}};
}

UniSeries uniseries_from_json(const json &j)
{
    const int cap = j.at("cap").get<int>();
    const auto &c = j.at("coeffs");
    if (static_cast<int>(c.size()) != cap + 1) {
        throw ConfigError("series: coefficient count does not match cap");
    }
    UniSeries a(cap);
    for (int k = 0; k <= cap; ++k) {
        a.at(k) = cplx_from_json(c[static_cast<std::size_t>(k)]);
    }
    return a;
}

json to_json(const BiSeries &a)
{
    json terms = json::array();
    for (const auto &t : a.terms()) {
        if (t.value != cplx{}) {
            terms.push_back({t.alpha, t.beta, real_json(t.value.real()), real_json(t.value.imag())});
        }
    }
    return {{"cap", a.cap()},
            {"center", json::array({to_json(a.center()[0]), to_json(a.center()[1])})},
            {"truncated", a.truncation_flag()},
            {"terms", terms}};
}

BiSeries biseries_from_json(const json &j)
{
    const int cap = j.at("cap").get<int>();
    BiSeries::Center center{};
    if (j.contains("center")) {
        center = {cplx_from_json(j["center"][0]), cplx_from_json(j["center"][1])};
    }
    BiSeries a(cap, center);
    for (const auto &t : j.at("terms")) {
        const int al = t.at(0).get<int>(), be = t.at(1).get<int>();
        if (al < 0 || be < 0 || al + be > cap) {
            throw ConfigError("series: term outside the cap");
        }
        a.at(al, be) = {real_from(t.at(2)), real_from(t.at(3))};
    }
    a.set_truncation_flag(j.value("truncated", false));
    return a;
}

json to_json(const WKBSolution &sol)
{
    json amps = json::array(), As = json::array(), Ks = json::array(), checks = json::array();
    for (const auto &a : sol.amplitudes) {
        amps.push_back(to_json(a));
    }
    for (const auto &a : sol.A) {
        As.push_back(to_json(a));
    }
    for (const auto &k : sol.K) {
        Ks.push_back(to_json(k));
    }
    for (const auto &c : sol.checks) {
        checks.push_back({{"name", c.name},
                          {"j", c.j},
                          {"max_coeff", real_json(c.max_coeff)},
                          {"worst_degree", c.worst_degree},
                          {"majorant", real_json(c.scale)},
                          {"ok", c.ok}});
    }
    return {{"mu", to_json(sol.mu)},
            {"N", sol.N},
            {"trusted_radii", json::array({real_json(sol.trusted_radii[0]), real_json(sol.trusted_radii[1])})},
            {"Btilde", to_json(sol.Btilde)},
            {"phi", to_json(sol.phi)},
            {"w_curve", to_json(sol.w_curve)},
            {"f", to_json(sol.f)},
            {"S", to_json(sol.S)},
            {"V", to_json(sol.V)},
            {"F", to_json(sol.F)},
            {"J", to_json(sol.J)},
            {"p", to_json(sol.p)},
            {"q", to_json(sol.q)},
            {"A0", to_json(sol.A0)},
            {"A", As},
            {"K", Ks},
            {"amplitudes", amps},
            {"checks", checks}};
}

WKBSolution wkb_from_json(const json &j)
{
    WKBSolution s;
    s.mu = cplx_from_json(j.at("mu"));
    s.N = j.at("N").get<int>();
    s.trusted_radii = {real_from(j.at("trusted_radii")[0]), real_from(j.at("trusted_radii")[1])};
    s.Btilde = biseries_from_json(j.at("Btilde"));
    s.phi = biseries_from_json(j.at("phi"));
    s.w_curve = uniseries_from_json(j.at("w_curve"));
    s.f = uniseries_from_json(j.at("f"));
    s.S = biseries_from_json(j.at("S"));
    s.V = biseries_from_json(j.at("V"));
    s.F = biseries_from_json(j.at("F"));
    s.J = biseries_from_json(j.at("J"));
    s.p = uniseries_from_json(j.at("p"));
    s.q = uniseries_from_json(j.at("q"));
    s.A0 = uniseries_from_json(j.at("A0"));
    for (const auto &a : j.at("A")) {
        s.A.push_back(uniseries_from_json(a));
    }
    for (const auto &k : j.at("K")) {
        s.K.push_back(biseries_from_json(k));
    }
    for (const auto &a : j.at("amplitudes")) {
        s.amplitudes.push_back(biseries_from_json(a));
    }
    for (const auto &c : j.at("checks")) {
        IdentityCheck ic;
        ic.name = c.at("name").get<std::string>();
        ic.j = c.at("j").get<int>();
        ic.max_coeff = real_from(c.at("max_coeff"));
        ic.worst_degree = c.at("worst_degree").get<int>();
        ic.scale = real_from(c.at("majorant"));
        ic.ok = c.at("ok").get<bool>();
        s.checks.push_back(ic);
    }
    return s;
}

json to_json(const BoundFit &fit)
{
    return {{"m_fitted", real_json(fit.m_fitted)},
            {"per_j_norms", doubles(fit.per_j_norms)},
            {"polydisc", json::array({real_json(fit.polydisc[0]), real_json(fit.polydisc[1])})},
            {"sigma", real_json(fit.sigma)},
            {"m_sigma", real_json(fit.m_sigma)}};
}

json to_json(const GammaReport &r)
{
    return {{"x", point_json(r.x)},
            {"Q1", real_json(r.Q1)},
            {"Q2", real_json(r.Q2)},
            {"Q3", real_json(r.Q3)},
            {"det2", real_json(r.det2)},
            {"imA_norm", real_json(r.imA_norm)},
            {"B", to_json(r.B0)},
            {"dzB", to_json(r.dzB)},
            {"dzbarB", to_json(r.dzbarB)},
            {"in_gamma", r.in_gamma},
            {"failed_conditions", r.failed_conditions}};
}

json to_json(const ConditionVerdict &v)
{
    return {{"condition", v.which == Condition::C1 ? "C1" : "C2"},
            {"sign", v.sign},
            {"pass", v.pass},
            {"min_slack", real_json(v.min_slack)},
            {"worst", point_json(v.worst)},
            {"C_used", real_json(v.C_used)},
            {"radii", doubles(v.radii)},
            {"required_C", doubles(v.required_C)},
            {"note", v.note}};
}

json to_json(const TrendVerdict &v)
{
    return {{"hypothesis", v.hypothesis},
            {"diverges", v.diverges},
            {"radii", doubles(v.radii)},
            {"min_values", doubles(v.min_values)},
            {"growth_exponent", real_json(v.growth_exponent)},
            {"sign", v.sign}};
}

json to_json(const HypothesisReport &r)
{
    return {{"H1", to_json(r.H1)}, {"H2", to_json(r.H2)}, {"H3", to_json(r.H3)}};
}

Poly2 poly_from_json(const json &j)
{
    Poly2 p;
    if (!j.is_array()) {
        throw ConfigError("polynomial: expected a list of [i, j, re, im] records");
    }
    for (const auto &t : j) {
        if (!t.is_array() || (t.size() != 3 && t.size() != 4)) {
            throw ConfigError("polynomial: bad record " + t.dump());
        }
        const int a = t[0].get<int>(), b = t[1].get<int>();
        if (a < 0 || b < 0) {
            throw ConfigError("polynomial: negative exponent");
        }
        const double im = t.size() == 4 ? t[3].get<double>() : 0.0;
        p += Poly2::monomial(a, b, cplx(t[2].get<double>(), im));
    }
    return p;
}

FieldPtr field_from_json(const json &j)
{
    FieldPtr f;
    try {
        if (j.contains("builtin")) {
            const auto name = j.at("builtin").get<std::string>();
            if (name == "oscillating") {
                f = make_oscillating(j.value("trusted_radius", 1.0));
            } else if (name == "miller_simon") {
                f = make_miller_simon(param(j, "c", {1.0, 1.0}), j.value("alpha", 1.0));
            } else if (name == "exponential") {
                f = make_exponential(j.value("c", 1.0), j.value("trusted_radius", 1.0));
            } else if (name == "polynomial") {
                Poly2 R;
                const bool hasR = j.contains("R");
                if (hasR) {
                    R = poly_from_json(j.at("R"));
                }
                f = make_polynomial_field(param(j, "a", 1.0), param(j, "b", 0.0), param(j, "c", 1.0),
                                          hasR ? &R : nullptr);
            } else {
                throw ConfigError("unknown builtin field '" + name + "'");
            }
        } else if (j.contains("A1") || j.contains("A2")) {
            const Poly2 A1 = j.contains("A1") ? poly_from_json(j.at("A1")) : Poly2{};
            const Poly2 A2 = j.contains("A2") ? poly_from_json(j.at("A2")) : Poly2{};
            f = make_polynomial_potential(A1, A2, j.value("name", std::string("user_polynomial")));
        } else {
            throw ConfigError("field definition needs 'builtin' or 'A1'/'A2'");
        }
        if (j.contains("gauge")) {
            f = make_gauge_shifted(f, poly_from_json(j.at("gauge")));
        }
    } catch (const json::exception &e) {
        throw ConfigError(std::string("field definition: ") + e.what());
    }
    return f;
}

} // namespace cmag
