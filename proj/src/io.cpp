#include "hopfns/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace hopfns {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw SchemaError(path + ": " + what);
}

double num(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    const double x = j.get<double>();
    if (!std::isfinite(x)) fail(path, "non-finite number");
    return x;
}

std::vector<double> vec(const json& j, const std::string& path, std::size_t n) {
    if (!j.is_array()) fail(path, "expected an array");
    if (n != 0 && j.size() != n) fail(path, "expected " + std::to_string(n) + " entries");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(num(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

Eigen::MatrixXd mat(const json& j, const std::string& path, int rows, int cols) {
    if (!j.is_array() || (rows > 0 && static_cast<int>(j.size()) != rows))
        fail(path, "expected " + std::to_string(rows) + " rows");
    const int n = static_cast<int>(j.size());
    Eigen::MatrixXd m(n, cols > 0 ? cols : n);
    for (int i = 0; i < n; ++i) {
        const auto row = vec(j[i], path + "[" + std::to_string(i) + "]", m.cols());
        for (int k = 0; k < m.cols(); ++k) m(i, k) = row[k];
    }
    return m;
}

SlopePair slope(const json& j, const std::string& path) {
    const auto v = vec(j, path, 2);
    return {v[0], v[1]};
}

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
    if (!j.is_object()) fail(path, "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) fail(path + "." + it.key(), "unknown key");
}

NonsmoothQuadCoeffs parse_quad(const json& j) {
    check_keys(j, "quad", {"a", "b", "slopes"});
    NonsmoothQuadCoeffs q;
    if (j.contains("a")) {
        const auto m = mat(j["a"], "quad.a", 2, 2);
        for (int i = 0; i < 2; ++i)
            for (int k = 0; k < 2; ++k) q.a[i][k] = m(i, k);
    }
    if (j.contains("b")) {
        const auto m = mat(j["b"], "quad.b", 2, 2);
        for (int i = 0; i < 2; ++i)
            for (int k = 0; k < 2; ++k) q.b[i][k] = m(i, k);
    }
    if (j.contains("slopes")) {
        const json& s = j["slopes"];
        if (!s.is_array() || s.size() != 8) fail("quad.slopes", "expected 8 slope pairs");
        for (int k = 0; k < 4; ++k) {
            q.alpha[k] = slope(s[k], "quad.slopes[" + std::to_string(k) + "]");
            q.beta[k] = slope(s[k + 4], "quad.slopes[" + std::to_string(k + 4) + "]");
        }
    }
    return q;
}

SmoothCoeffs parse_smooth(const json& j) {
    check_keys(j, "smooth", {"quadratic", "cubic"});
    SmoothCoeffs s;
    if (j.contains("quadratic")) {
        const auto v = vec(j["quadratic"], "smooth.quadratic", 6);
        s.a1 = v[0], s.a2 = v[1], s.a3 = v[2], s.b1 = v[3], s.b2 = v[4], s.b3 = v[5];
    }
    if (j.contains("cubic")) {
        const auto v = vec(j["cubic"], "smooth.cubic", 8);
        for (int k = 0; k < 4; ++k) {
            s.ca[k] = v[k];
            s.cb[k] = v[k + 4];
        }
    }
    return s;
}

ModulusTerm parse_h(const json& j, const json* slopes, const std::string& path) {
    ModulusTerm h;
    const auto m = mat(j, path, 2, 2);
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k) h.h[i][k] = m(i, k);
    if (slopes) {
        if (!slopes->is_array() || slopes->size() != 4) fail(path + "_slopes", "expected 4 slope pairs");
        for (int k = 0; k < 4; ++k) h.slopes[k] = slope((*slopes)[k], path + "_slopes[" + std::to_string(k) + "]");
    }
    return h;
}

json quad_json(const NonsmoothQuadCoeffs& q) {
    json slopes = json::array();
    for (int k = 0; k < 4; ++k) slopes.push_back({q.alpha[k].p_minus, q.alpha[k].p_plus});
    for (int k = 0; k < 4; ++k) slopes.push_back({q.beta[k].p_minus, q.beta[k].p_plus});
    return {{"a", {{q.a[0][0], q.a[0][1]}, {q.a[1][0], q.a[1][1]}}},
            {"b", {{q.b[0][0], q.b[0][1]}, {q.b[1][0], q.b[1][1]}}},
            {"slopes", slopes}};
}

json smooth_json(const SmoothCoeffs& s) {
    return {{"quadratic", {s.a1, s.a2, s.a3, s.b1, s.b2, s.b3}},
            {"cubic", {s.ca[0], s.ca[1], s.ca[2], s.ca[3], s.cb[0], s.cb[1], s.cb[2], s.cb[3]}}};
}

json h_json(const ModulusTerm& h) {
    return {{h.h[0][0], h.h[0][1]}, {h.h[1][0], h.h[1][1]}};
}

json h_slopes_json(const ModulusTerm& h) {
    json s = json::array();
    for (const auto& p : h.slopes) s.push_back({p.p_minus, p.p_plus});
    return s;
}

json matrix_json(const Eigen::MatrixXd& m) {
    json out = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
        out.push_back(row);
    }
    return out;
}

json vector_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

json opt_num(const std::optional<double>& x) {
    return x ? json(*x) : json(nullptr);
}

Eigen::VectorXd evec(const json& j, const std::string& path, int m) {
    const auto v = vec(j, path, m);
    return Eigen::Map<const Eigen::VectorXd>(v.data(), m);
}

void parse_transverse(const json& j, SystemND& s) {
    const int m = s.transverse_dim();
    check_keys(j, "transverse", {"Q", "C3", "C4", "c5", "c6", "c7", "c8", "c9", "h", "h_slopes"});
    if (j.contains("Q")) {
        if (!j["Q"].is_array() || static_cast<int>(j["Q"].size()) != m) fail("transverse.Q", "expected m matrices");
        for (int i = 0; i < m; ++i) s.Q[i] = mat(j["Q"][i], "transverse.Q[" + std::to_string(i) + "]", m, m);
    }
    if (j.contains("C3")) s.C3 = mat(j["C3"], "transverse.C3", m, m);
    if (j.contains("C4")) s.C4 = mat(j["C4"], "transverse.C4", m, m);
    if (j.contains("c5")) s.c5 = evec(j["c5"], "transverse.c5", m);
    if (j.contains("c6")) s.c6 = evec(j["c6"], "transverse.c6", m);
    if (j.contains("c7")) s.c7 = evec(j["c7"], "transverse.c7", m);
    if (j.contains("c8")) s.c8 = evec(j["c8"], "transverse.c8", m);
    if (j.contains("c9")) s.c9 = evec(j["c9"], "transverse.c9", m);
    if (j.contains("h")) {
        if (!j["h"].is_array() || static_cast<int>(j["h"].size()) != m) fail("transverse.h", "expected m 2x2 blocks");
        const json* sl = j.contains("h_slopes") ? &j["h_slopes"] : nullptr;
        if (sl && (!sl->is_array() || static_cast<int>(sl->size()) != m))
            fail("transverse.h_slopes", "expected m slope lists");
        for (int i = 0; i < m; ++i)
            s.h[i] = parse_h(j["h"][i], sl ? &(*sl)[i] : nullptr, "transverse.h[" + std::to_string(i) + "]");
    }
}

}  // namespace

Descriptor parse_descriptor(const json& j) {
    if (!j.is_object()) fail("$", "descriptor must be an object");
    if (!j.contains("kind") || !j["kind"].is_string()) fail("kind", "missing or not a string");
    Descriptor d;
    d.kind = j["kind"].get<std::string>();

    auto read_common = [&](double& mu, double& omega, NonsmoothQuadCoeffs& q, SmoothCoeffs& s) {
        if (j.contains("mu")) mu = num(j["mu"], "mu");
        if (j.contains("omega")) omega = num(j["omega"], "omega");
        if (j.contains("quad")) q = parse_quad(j["quad"]);
        if (j.contains("smooth")) s = parse_smooth(j["smooth"]);
    };

    try {
        if (d.kind == "planar-nf") {
            check_keys(j, "$", {"kind", "mu", "omega", "quad", "smooth", "linear"});
            PlanarSystem& p = d.planar;
            read_common(p.mu, p.omega, p.quad, p.smooth);
            if (j.contains("linear")) {
                const auto m = mat(j["linear"], "linear", 2, 2);
                if (m(0, 0) != m(1, 1) || m(0, 1) != -m(1, 0)) fail("linear", "not of the form (mu, -omega; omega, mu)");
                if (j.contains("mu") && p.mu != m(0, 0)) fail("mu", "conflicts with linear");
                if (j.contains("omega") && p.omega != m(1, 0)) fail("omega", "conflicts with linear");
                p.mu = m(0, 0);
                p.omega = m(1, 0);
            }
            p.validate();
        } else if (d.kind == "planar-general") {
            check_keys(j, "$", {"kind", "mu", "quad", "smooth", "linear"});
            PlanarSystem& p = d.planar;
            p.normal_form = false;
            double unused = 1;
            read_common(p.mu, unused, p.quad, p.smooth);
            if (!j.contains("linear")) fail("linear", "required for planar-general");
            const auto m = mat(j["linear"], "linear", 2, 2);
            p.base = {{{m(0, 0), m(0, 1)}, {m(1, 0), m(1, 1)}}};
            p.validate();
            p.omega = p.frequency();
        } else if (d.kind == "3d") {
            check_keys(j, "$", {"kind", "mu", "omega", "quad", "smooth", "c", "h", "h_slopes"});
            System3D& s = d.sys3;
            read_common(s.mu, s.omega, s.quad, s.smooth);
            if (j.contains("c")) {
                const auto c = vec(j["c"], "c", 9);
                std::copy(c.begin(), c.end(), s.c.begin());
            }
            if (j.contains("h")) s.h = parse_h(j["h"], j.contains("h_slopes") ? &j["h_slopes"] : nullptr, "h");
            else if (j.contains("h_slopes")) fail("h_slopes", "given without h");
            s.validate();
        } else if (d.kind == "nd") {
            check_keys(j, "$", {"kind", "mu", "omega", "quad", "smooth", "linear", "transverse"});
            if (!j.contains("linear")) fail("linear", "required for nd (transverse matrix)");
            const Eigen::MatrixXd A = mat(j["linear"], "linear", 0, 0);
            if (A.rows() < 1) fail("linear", "empty transverse matrix");
            d.nd = SystemND::zeros(static_cast<int>(A.rows()));
            d.nd.A = A;
            read_common(d.nd.mu, d.nd.omega, d.nd.quad, d.nd.smooth);
            if (j.contains("transverse")) parse_transverse(j["transverse"], d.nd);
            d.nd.validate();
        } else if (d.kind == "shimmy") {
            std::set<std::string> keys = {"kind", "c"};
            for (int i = 1; i <= 7; ++i) keys.insert("c" + std::to_string(i));
            check_keys(j, "$", keys);
            double c[7] = {0, 0, 0, 0, 0, 0, 0};
            if (j.contains("c")) {
                const auto v = vec(j["c"], "c", 7);
                std::copy(v.begin(), v.end(), c);
            }
            for (int i = 1; i <= 7; ++i) {
                const std::string k = "c" + std::to_string(i);
                if (!j.contains(k)) continue;
                if (j.contains("c")) fail(k, "given together with c");
                c[i - 1] = num(j[k], k);
            }
            d.shimmy = {c[0], c[1], c[2], c[3], c[4], c[5], c[6]};
            d.shimmy.validate();
        } else {
            fail("kind", "unknown kind '" + d.kind + "'");
        }
    } catch (const DomainError& e) {
        fail("$", e.what());
    }
    return d;
}

Descriptor parse_descriptor_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        fail("$", std::string("invalid JSON: ") + e.what());
    }
    return parse_descriptor(j);
}

Descriptor load_descriptor(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(path, "cannot open");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_descriptor_text(ss.str());
}

json to_json(const Descriptor& d) {
    json j;
    j["kind"] = d.kind;
    if (d.kind == "planar-nf") {
        j["mu"] = d.planar.mu;
        j["omega"] = d.planar.omega;
        j["quad"] = quad_json(d.planar.quad);
        j["smooth"] = smooth_json(d.planar.smooth);
    } else if (d.kind == "planar-general") {
        const Mat2& m = d.planar.base;
        j["linear"] = {{m[0][0], m[0][1]}, {m[1][0], m[1][1]}};
        j["mu"] = d.planar.mu;
        j["quad"] = quad_json(d.planar.quad);
        j["smooth"] = smooth_json(d.planar.smooth);
    } else if (d.kind == "3d") {
        const System3D& s = d.sys3;
        j["mu"] = s.mu;
        j["omega"] = s.omega;
        j["c"] = s.c;
        j["h"] = h_json(s.h);
        j["h_slopes"] = h_slopes_json(s.h);
        j["quad"] = quad_json(s.quad);
        j["smooth"] = smooth_json(s.smooth);
    } else if (d.kind == "nd") {
        const SystemND& s = d.nd;
        j["mu"] = s.mu;
        j["omega"] = s.omega;
        j["linear"] = matrix_json(s.A);
        json t;
        t["Q"] = json::array();
        for (const auto& q : s.Q) t["Q"].push_back(matrix_json(q));
        t["C3"] = matrix_json(s.C3);
        t["C4"] = matrix_json(s.C4);
        t["c5"] = vector_json(s.c5);
        t["c6"] = vector_json(s.c6);
        t["c7"] = vector_json(s.c7);
        t["c8"] = vector_json(s.c8);
        t["c9"] = vector_json(s.c9);
        t["h"] = json::array();
        t["h_slopes"] = json::array();
        for (const auto& h : s.h) {
            t["h"].push_back(h_json(h));
            t["h_slopes"].push_back(h_slopes_json(h));
        }
        j["transverse"] = t;
        j["quad"] = quad_json(s.quad);
        j["smooth"] = smooth_json(s.smooth);
    } else if (d.kind == "shimmy") {
        const ShimmyParams& p = d.shimmy;
        j["c"] = {p.c1, p.c2, p.c3, p.c4, p.c5, p.c6, p.c7};
    }
    return j;
}

json to_json(const CoefficientReport& r) {
    json e = json::object();
    for (const auto& [name, v] : r.entries) {
        e[name] = {{"value", v.value},
                   {"method", v.method},
                   {"cross_check", opt_num(v.cross_check)},
                   {"abs_diff", v.cross_check ? json(v.abs_diff()) : json(nullptr)}};
    }
    return {{"kind", r.kind}, {"mu", r.mu},     {"omega", r.omega},
            {"norm", r.norm}, {"default_slopes", r.default_slopes}, {"entries", e},
            {"flags", r.flags}};
}

json to_json(const AveragedNormalForm& nf) {
    auto pair = [](double c, double q) { return json{{"value", c}, {"quadrature", q}, {"abs_diff", std::abs(c - q)}}; };
    return {{"linear", pair(nf.linear, nf.linear_quad)},
            {"quadratic", pair(nf.quadratic, nf.quadratic_quad)},
            {"cubic", pair(nf.cubic, nf.cubic_quad)},
            {"cubic_closed_form", nf.cubic_closed},
            {"equilibrium", opt_num(averaged_equilibrium(nf))}};
}

json to_json(const Prediction& p) {
    return {{"kind", to_string(p.kind)},
            {"order", to_string(p.order)},
            {"criticality", p.criticality},
            {"r0_of_mu", p.r0_of_mu},
            {"mu_side", p.mu_side},
            {"carrier", p.carrier},
            {"mu_max", p.mu_max},
            {"route", p.route}};
}

json to_json(const Orbit& o) {
    return {{"mu", o.mu},
            {"r0", o.r0},
            {"period", o.period},
            {"floquet", o.floquet},
            {"stability", to_string(o.stability)},
            {"transverse", o.transverse}};
}

json to_json(const Branch& b) {
    json pts = json::array();
    for (const auto& o : b.points) pts.push_back(to_json(o));
    json fails = json::array();
    for (const auto& [mu, why] : b.failures) fails.push_back({{"mu", mu}, {"reason", why}});
    return {{"kind", to_string(b.kind)}, {"slope", b.slope}, {"points", pts}, {"failures", fails}};
}

json to_json(const ShimmyAnalysis& a) {
    const auto& e = a.eigen;
    auto v3 = [](const Eigen::Vector3d& v) { return json{v(0), v(1), v(2)}; };
    json T = json::array();
    for (int i = 0; i < 3; ++i) T.push_back({a.T(i, 0), a.T(i, 1), a.T(i, 2)});
    return {{"eigen", {{"mu", e.mu}, {"omega", e.omega}, {"lambda3", e.lambda3}}},
            {"u", v3(e.u())},
            {"v", v3(e.v())},
            {"s3", v3(e.s3)},
            {"T", T},
            {"detT", a.detT},
            {"d_tilde", a.d_tilde},
            {"theta_tilde", a.theta_tilde},
            {"s3_third", a.s3_third},
            {"c4", a.c4},
            {"T_tilde", a.T_tilde},
            {"h", a.h},
            {"chi2_integral", a.chi2_integral},
            {"literal_product", a.literal_product},
            {"vertical_product", a.vertical_product},
            {"block_residual", a.block_residual},
            {"rotation_residual", a.rotation_residual},
            {"certificate", a.certificate},
            {"verdict", to_string(a.verdict)},
            {"slope", opt_num(a.slope)}};
}

json to_json(const ShimmySimulation& s) {
    auto side = [](const ShimmySideResult& r) {
        return json{{"mu", r.mu}, {"orbit", r.orbit}, {"amplitude", r.amplitude}};
    };
    return {{"neg", side(s.neg)}, {"pos", side(s.pos)}, {"verdict", to_string(s.verdict)}};
}

void check_report_json(const json& j) {
    check_keys(j, "report", {"kind", "mu", "omega", "norm", "default_slopes", "entries", "flags"});
    for (const char* k : {"kind", "mu", "omega", "norm", "default_slopes", "entries", "flags"})
        if (!j.contains(k)) fail(std::string("report.") + k, "missing");
    if (!j["kind"].is_string()) fail("report.kind", "expected a string");
    num(j["mu"], "report.mu");
    num(j["omega"], "report.omega");
    num(j["norm"], "report.norm");
    if (!j["entries"].is_object()) fail("report.entries", "expected an object");
    for (auto it = j["entries"].begin(); it != j["entries"].end(); ++it) {
        const std::string p = "report.entries." + it.key();
        check_keys(*it, p, {"value", "method", "cross_check", "abs_diff"});
        num((*it)["value"], p + ".value");
        const auto& m = (*it)["method"];
        if (!m.is_string() || (m != "closed-form" && m != "quadrature")) fail(p + ".method", "bad method tag");
        if (!(*it)["cross_check"].is_null()) num((*it)["cross_check"], p + ".cross_check");
    }
    if (!j["flags"].is_array()) fail("report.flags", "expected an array");
}

void check_shimmy_json(const json& j) {
    for (const char* k : {"eigen", "u", "v", "s3", "T", "detT", "d_tilde", "theta_tilde", "verdict"})
        if (!j.contains(k)) fail(std::string("shimmy.") + k, "missing");
    num(j["detT"], "shimmy.detT");
    num(j["d_tilde"], "shimmy.d_tilde");
    vec(j["u"], "shimmy.u", 3);
    vec(j["v"], "shimmy.v", 3);
    vec(j["s3"], "shimmy.s3", 3);
    mat(j["T"], "shimmy.T", 3, 3);
    const auto& v = j["verdict"];
    if (!v.is_string() || (v != "vertical" && v != "supercritical" && v != "subcritical" && v != "degenerate"))
        fail("shimmy.verdict", "bad verdict");
}

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", x);
    return buf;
}

std::string branch_csv(const Branch& b) {
    std::string out = "mu,r0,period,floquet,stability,u0\n";
    for (const auto& o : b.points) {
        out += fmt17(o.mu) + "," + fmt17(o.r0) + "," + fmt17(o.period) + "," + fmt17(o.floquet) + "," +
               to_string(o.stability) + ",";
        if (!o.transverse.empty()) out += fmt17(o.transverse[0]);
        out += "\n";
    }
    return out;
}

std::string diagram_csv(const std::vector<DiagramRow>& rows) {
    auto cell = [](const std::optional<double>& x) { return x ? fmt17(*x) : std::string(); };
    std::string out = "mu,r0_numeric,r0_predicted,rel_err\n";
    for (const auto& r : rows)
        out += fmt17(r.mu) + "," + cell(r.r0_numeric) + "," + cell(r.r0_predicted) + "," + cell(r.rel_err) + "\n";
    return out;
}

}  // namespace hopfns
