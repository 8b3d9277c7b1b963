#include "hopfns/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "hopfns/averaging.hpp"
#include "hopfns/coeffs.hpp"
#include "hopfns/dynamics.hpp"
#include "hopfns/predict.hpp"
#include "hopfns/quadrature.hpp"

namespace hopfns {

namespace {

using Clock = std::chrono::steady_clock;

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

CheckResult named(const std::string& id, const std::string& name) {
    CheckResult r;
    r.id = id;
    r.name = name;
    return r;
}

bool rel_ok(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max(std::abs(b), 1.0);
}

double log_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const int n = static_cast<int>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
    return g;
}

NonsmoothQuadCoeffs random_quad(std::mt19937_64& rng, bool random_slopes) {
    std::uniform_real_distribution<double> U(-2, 2);
    NonsmoothQuadCoeffs q;
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k) q.a[i][k] = U(rng), q.b[i][k] = U(rng);
    if (random_slopes)
        for (int k = 0; k < 4; ++k) {
            q.alpha[k] = {U(rng), U(rng)};
            q.beta[k] = {U(rng), U(rng)};
        }
    return q;
}

SmoothCoeffs random_smooth(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(-2, 2);
    SmoothCoeffs s;
    s.a1 = U(rng), s.a2 = U(rng), s.a3 = U(rng), s.b1 = U(rng), s.b2 = U(rng), s.b3 = U(rng);
    for (int k = 0; k < 4; ++k) s.ca[k] = U(rng), s.cb[k] = U(rng);
    return s;
}

// ---------------------------------------------------------------- criteria

CheckResult c1_closed_vs_quadrature(const VerifyOptions& o) {
    CheckResult r = named("1", "closed-form/quadrature agreement on 1000 planar draws");
    const auto t0 = Clock::now();
    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> W(0.5, 2.0);
    const char* names[] = {"sigma_hash", "sigma_tilde", "sigma_2", "S_q", "S_c", "cubic"};
    int bad = 0;
    double worst = 0;
    std::string worst_name;
    for (int i = 0; i < 1000; ++i) {
        PlanarSystem s;
        s.omega = W(rng);
        s.quad = random_quad(rng, false);
        s.smooth = random_smooth(rng);
        const auto rep = coefficient_report(s);
        PlanarSystem g = s;
        g.quad = random_quad(rng, true);
        const auto rep_g = coefficient_report(g);
        for (const char* n : names) {
            const auto& e = rep.entries.at(n);
            if (!e.cross_check) {
                ++bad;
                continue;
            }
            const double err = std::abs(e.value - *e.cross_check) / std::max(std::abs(*e.cross_check), 1.0);
            if (err > worst) worst = err, worst_name = n;
            if (!rel_ok(e.value, *e.cross_check, 1e-9)) ++bad;
        }
        const auto& e = rep_g.entries.at("sigma_tilde");
        const double err = std::abs(e.value - *e.cross_check) / std::max(std::abs(*e.cross_check), 1.0);
        if (err > worst) worst = err, worst_name = "sigma_tilde (general slopes)";
        if (!rel_ok(e.value, *e.cross_check, 1e-9)) ++bad;
    }
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    r.pass = bad == 0 && r.seconds < 30;
    r.detail = std::to_string(bad) + " mismatches, worst rel " + fmt("%.2e", worst) + " (" + worst_name + "), " +
               fmt("%.1f", r.seconds) + " s";
    return r;
}

CheckResult c2_reference_branches(const VerifyOptions&) {
    CheckResult r = named("2", "reference branches: sides and slope 3pi/8");
    const auto mags = log_grid(1e-3, 1e-2, 7);
    std::vector<double> grid;
    for (auto it = mags.rbegin(); it != mags.rend(); ++it) grid.push_back(-*it);
    for (double m : mags) grid.push_back(m);
    const double target = 3 * kPi / 8;
    bool ok = true;
    std::ostringstream d;
    for (int sup = 0; sup < 2; ++sup) {
        const PlanarSystem s = sup ? reference_supercritical() : reference_subcritical();
        const auto b = continue_branch(s, grid);
        const int side = sup ? 1 : -1;
        int wrong = 0, right = 0;
        for (const auto& p : b.points) (p.mu * side > 0 ? right : wrong)++;
        const double err = std::abs(std::abs(b.slope) - target) / target;
        const BranchKind want = sup ? BranchKind::supercritical : BranchKind::subcritical;
        const bool this_ok = b.kind == want && wrong == 0 && right == 7 && err < 0.05;
        ok = ok && this_ok;
        d << (sup ? "sigma#=-4: " : "sigma#=4: ") << to_string(b.kind) << ", " << right << "/7 on side, " << wrong
          << " off side, |slope| " << fmt("%.5f", std::abs(b.slope)) << " (err " << fmt("%.2f%%", 100 * err) << ")";
        if (!sup) d << "; ";
    }
    r.pass = ok;
    r.detail = d.str();
    return r;
}

CheckResult c3_second_order(const VerifyOptions&) {
    CheckResult r = named("3", "second-order branch: sqrt scaling and amplitude");
    const PlanarSystem s = sigma2_system();
    const double s2 = sigma_2(s.quad);
    const int side = s.omega * s2 > 0 ? 1 : -1;
    const auto mags = log_grid(1e-4, 1e-3, 5);
    std::vector<double> mus, rs;
    double worst = 0;
    int missing = 0;
    for (double m : mags) {
        const double mu = side * m;
        const auto o = find_orbit(s, mu);
        const auto pred = r0_second(s2, s.omega, mu);
        if (!o || !pred) {
            ++missing;
            continue;
        }
        worst = std::max(worst, std::abs(o->r0 - *pred) / *pred);
        mus.push_back(m);
        rs.push_back(o->r0);
    }
    const auto off = find_orbit(s, -side * 1e-3);
    const double slope = mus.size() >= 2 ? log_slope(mus, rs) : 0;
    r.pass = missing == 0 && worst < 0.10 && std::abs(slope - 0.5) <= 0.05;
    r.detail = "max rel err " + fmt("%.2f%%", 100 * worst) + ", log-log slope " + fmt("%.4f", slope) + ", " +
               std::to_string(missing) + " missing, orbit on wrong side: " + (off ? "yes" : "no");
    return r;
}

CheckResult c4_modulus_integrals(const VerifyOptions&) {
    CheckResult r = named("4", "piecewise quadrature of modulus integrals");
    const std::vector<double> K = {0, kPi / 2, kPi, 1.5 * kPi};
    auto I = [&](auto f) { return periodic_integral(f, K); };
    using std::abs, std::cos, std::sin;
    double worst = 0;
    worst = std::max(worst, abs(I([](double p) { return cos(p) * cos(p) * abs(cos(p)); }) - 8.0 / 3.0));
    const double c4 = I([](double p) { return std::pow(cos(p), 4); });
    const double c2 = I([](double p) { return cos(p) * cos(p); });
    worst = std::max(worst, abs(c4 - 0.75 * c2));
    const std::function<double(double)> odd[] = {
        [](double p) { return sin(p) * cos(p) * abs(cos(p)); },
        [](double p) { return sin(p) * cos(p) * abs(sin(p)); },
        [](double p) { return cos(p) * cos(p) * sin(p) * abs(cos(p)); },
        [](double p) { return sin(p) * sin(p) * cos(p) * abs(sin(p)); },
        [](double p) { return cos(p) * cos(p) * sin(p) * abs(sin(p)); },
        [](double p) { return std::pow(cos(p), 3) * sin(p); },
        [](double p) { return cos(p) * std::pow(sin(p), 3); },
    };
    for (const auto& f : odd) worst = std::max(worst, abs(I(f)));
    r.pass = worst <= 1e-12;
    r.detail = "max deviation " + fmt("%.2e", worst) + " over 9 identities";
    return r;
}

CheckResult c5_slaving(const VerifyOptions&) {
    CheckResult r = named("5", "3D hyperbolic slaving: transverse amplitude ~ r0^2");
    bool ok = true;
    std::ostringstream d;
    for (double c1 : {-1.0, -0.5}) {
        System3D s;
        const PlanarSystem p = reference_subcritical();
        s.quad = p.quad;
        s.omega = 1;
        s.c[0] = c1;
        s.c[4] = 1;
        s.h.h[0][0] = 0.5;
        std::vector<double> r0, u0;
        for (double m : log_grid(1e-3, 1e-2, 6)) {
            const auto orbits = solve_3d_bvp(s, -m);
            if (orbits.size() != 1 || orbits[0].transverse.empty()) continue;
            r0.push_back(orbits[0].r0);
            u0.push_back(std::abs(orbits[0].transverse[0]));
        }
        const double k = r0.size() >= 2 ? log_slope(r0, u0) : 0;
        const bool this_ok = r0.size() == 6 && std::abs(k - 2) <= 0.1;
        ok = ok && this_ok;
        d << "c1=" << c1 << ": slope " << fmt("%.4f", k) << " (" << r0.size() << "/6 orbits)";
        if (c1 == -1.0) d << "; ";
    }
    r.pass = ok;
    r.detail = d.str();
    return r;
}

struct TwoBranchCase {
    const char* label;
    double a11, b22, h21, c5;
};

CheckResult c6_two_branch(const VerifyOptions&) {
    CheckResult r = named("6", "3D c1=0 two-branch case on a panel of realizations");
    // gamma# = 2 h21 + c5 + pi h22 = 2, sigma# = -4, c2 = 1, omega = 1
    const TwoBranchCase panel[] = {
        {"h21=1,b22=-2", 0, -2, 1, 0},
        {"c5=2,b22=-2", 0, -2, 0, 2},
        {"h21=1,a11=-2", -2, 0, 1, 0},
        {"c5=2,a11=-2", -2, 0, 0, 2},
    };
    const double mu = 0.01;
    bool ok = true;
    std::ostringstream d;
    for (const auto& c : panel) {
        System3D s;
        s.omega = 1;
        s.c[1] = 1;
        s.c[4] = c.c5;
        s.h.h[1][0] = c.h21;
        s.quad.a[0][0] = c.a11;
        s.quad.b[1][1] = c.b22;
        const double sh = sigma_hash(s.quad), gh = 2 * c.h21 + c.c5;
        const auto pred = u0_two_branch(sh, gh, s.c[1], s.omega, mu);
        double geff = 0;
        try {
            geff = gamma_hash_effective(s);
        } catch (const std::exception&) {
        }
        const auto orbits = solve_3d_bvp(s, mu);
        bool case_ok = pred && orbits.size() == 2;
        double worst = 0;
        if (case_ok) {
            int pos = 0;
            for (const auto& o : orbits) {
                const double u = o.transverse.empty() ? 0 : o.transverse[0];
                pos += u > 0;
                worst = std::max(worst, std::abs(std::abs(u) - *pred) / *pred);
            }
            case_ok = pos == 1 && worst < 0.10;
        }
        System3D flipped = s;
        flipped.c[4] = -c.c5;
        flipped.h.h[1][0] = -c.h21;
        const auto none = solve_3d_bvp(flipped, mu);
        case_ok = case_ok && none.empty();
        ok = ok && case_ok;
        d << c.label << ": " << orbits.size() << " orbits";
        if (orbits.size() == 2) d << " (max u0 err " << fmt("%.1f%%", 100 * worst) << ")";
        d << ", flipped " << none.size() << ", gamma_eff " << fmt("%.3g", geff) << (case_ok ? " ok" : " FAIL") << "; ";
    }
    r.pass = ok;
    r.detail = d.str();
    r.detail.resize(r.detail.size() - 2);
    return r;
}

CheckResult c7_general_linear(const VerifyOptions& o) {
    CheckResult r = named("7", "general linear part: Lambda and carrier side");
    std::mt19937_64 rng(o.seed + 7);
    std::uniform_real_distribution<double> U(-2, 2);
    int lam_bad = 0, side_bad = 0, side_n = 0;
    double worst = 0;
    std::vector<Mat2> mats;
    while (mats.size() < 100) {
        const Mat2 m = {{{U(rng), U(rng)}, {U(rng), U(rng)}}};
        const double disc = -4 * m[0][1] * m[1][0] - (m[0][0] - m[1][1]) * (m[0][0] - m[1][1]);
        if (disc <= 0.25) continue;
        mats.push_back(m);
    }
    for (const auto& m : mats) {
        const double a = lambda_general(m), b = lambda_general_quadrature(m);
        worst = std::max(worst, std::abs(a - b) / std::max(std::abs(b), 1.0));
        if (!rel_ok(a, b, 1e-9)) ++lam_bad;
    }
    std::vector<double> grid = {-4e-3, -2e-3, 2e-3, 4e-3};
    for (int i = 0; i < 20; ++i) {
        Mat2 m = mats[i];
        const double tr = 0.5 * (m[0][0] + m[1][1]);
        m[0][0] -= tr;
        m[1][1] -= tr;
        PlanarSystem s;
        s.normal_form = false;
        s.base = m;
        s.omega = s.frequency();
        double carrier = 0;
        do {
            s.quad = random_quad(rng, i % 2 == 1);
            carrier = sigma_general(m, s.quad).carrier();
        } while (std::abs(carrier) < 0.5);
        const auto b = continue_branch(s, grid);
        const BranchKind want = carrier > 0 ? BranchKind::subcritical : BranchKind::supercritical;
        ++side_n;
        if (b.kind != want) ++side_bad;
    }
    r.pass = lam_bad == 0 && side_bad == 0;
    r.detail = "Lambda: " + std::to_string(lam_bad) + "/100 mismatches (worst rel " + fmt("%.2e", worst) +
               "); side: " + std::to_string(side_n - side_bad) + "/" + std::to_string(side_n) + " agree";
    return r;
}

CheckResult c8_smoothing(const VerifyOptions&) {
    CheckResult r = named("8", "smoothing weights: mismatch witness and sign agreement");
    NonsmoothQuadCoeffs q;
    q.a[0][0] = 1;
    q.a[0][1] = -2.5;
    const double eq = smoothed_sigma(q, {1, 1, 1, 1}), sh = sigma_hash(q);
    const bool witness = eq * sh < 0;
    int disagree = 0, n = 0;
    const std::array<double, 4> w = {2.0 / 3.0, 1, 1, 2.0 / 3.0};
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j)
            for (int k = 0; k < 10; ++k)
                for (int l = 0; l < 10; ++l) {
                    NonsmoothQuadCoeffs g;
                    g.a[0][0] = -2 + 4.0 * i / 9;
                    g.a[0][1] = -2 + 4.0 * j / 9;
                    g.b[1][0] = -2 + 4.0 * k / 9;
                    g.b[1][1] = -2 + 4.0 * l / 9;
                    const double a = smoothed_sigma(g, w), b = sigma_hash(g);
                    ++n;
                    if ((a > 0) != (b > 0) || (a < 0) != (b < 0)) ++disagree;
                }
    r.pass = witness && disagree == 0 && n == 10000;
    r.detail = "witness (1,-2.5,0,0): equal weights " + fmt("%g", eq) + " vs sigma# " + fmt("%g", sh) + "; " +
               std::to_string(disagree) + "/" + std::to_string(n) + " sign disagreements";
    return r;
}

CheckResult c9_shimmy(const VerifyOptions& o) {
    CheckResult r = named("9", "shimmy verdict vs time-domain simulation, c4 reversal");
    int agree = 0, flips = 0, nonvert = 0, flip_sim = 0;
    for (int i = 0; i < 20; ++i) {
        const ShimmyParams p = hopf_tuned_draw(o.seed + 1000 + i);
        const auto a = analyze_shimmy(p);
        const auto sim = simulate_shimmy(p);
        agree += sim.verdict == a.verdict;
        if (a.verdict == ShimmyVerdict::vertical) continue;
        ++nonvert;
        ShimmyParams n = p;
        n.c4 = -p.c4;
        const auto b = analyze_shimmy(n);
        const bool flipped = (a.verdict == ShimmyVerdict::supercritical && b.verdict == ShimmyVerdict::subcritical) ||
                             (a.verdict == ShimmyVerdict::subcritical && b.verdict == ShimmyVerdict::supercritical);
        flips += flipped;
        flip_sim += simulate_shimmy(n).verdict == b.verdict;
    }
    r.pass = agree == 20 && flips == nonvert && flip_sim == nonvert;
    r.detail = "verdict agrees " + std::to_string(agree) + "/20; c4 reversal flips " + std::to_string(flips) + "/" +
               std::to_string(nonvert) + ", reversed draws agree with simulation " + std::to_string(flip_sim) + "/" +
               std::to_string(nonvert);
    return r;
}

CheckResult c10_bautin(const VerifyOptions&) {
    CheckResult r = named("10", "Bautin fold locus");
    bool ok = true;
    std::ostringstream d;
    for (double eps : {0.01, 0.02, 0.05}) {
        PlanarSystem s = sigma2_system();
        s.quad.a[0][0] += eps;
        const double sh = sigma_hash(s.quad), s2 = sigma_2(s.quad);
        const double formula = bautin_fold(sh, s2, s.omega);
        const double expansion = bautin_fold_expansion(sh, s2, s.omega);
        double found = 0;
        try {
            found = locate_fold(s, 1e-3, 0.3, -0.05, 0.05).mu;
        } catch (const std::exception& e) {
            ok = false;
            d << "eps=" << eps << ": " << e.what() << "; ";
            continue;
        }
        const double err = std::abs(found - formula) / std::abs(formula);
        ok = ok && err < 0.2;
        d << "eps=" << eps << ": numeric " << fmt("%.4e", found) << ", formula " << fmt("%.4e", formula) << " (err "
          << fmt("%.0f%%", 100 * err) << "), expansion " << fmt("%.4e", expansion) << "; ";
    }
    r.pass = ok;
    r.detail = d.str();
    r.detail.resize(r.detail.size() - 2);
    return r;
}

// ---------------------------------------------------------------- properties

CheckResult prop(const char* id, const char* name, const std::function<std::string(bool&)>& body) {
    CheckResult r = named(id, name);
    const auto t0 = Clock::now();
    try {
        r.pass = true;
        r.detail = body(r.pass);
    } catch (const std::exception& e) {
        r.pass = false;
        r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return r;
}

}  // namespace

PlanarSystem reference_subcritical() {
    PlanarSystem s;
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k) s.quad.a[i][k] = s.quad.b[i][k] = 1;
    s.quad.b[1][0] = -1;
    return s;
}

PlanarSystem reference_supercritical() {
    PlanarSystem s = reference_subcritical();
    s.quad.b[1][1] = -3;
    return s;
}

PlanarSystem sigma2_system() {
    PlanarSystem s;
    s.quad.a[0][0] = 1;
    s.quad.b[0][0] = 1;
    s.quad.a[0][1] = -2;
    return s;
}

CheckResult run_criterion(int id, const VerifyOptions& opt) {
    using Fn = CheckResult (*)(const VerifyOptions&);
    static const Fn table[] = {c1_closed_vs_quadrature, c2_reference_branches, c3_second_order, c4_modulus_integrals,
                               c5_slaving, c6_two_branch, c7_general_linear, c8_smoothing,
                               c9_shimmy, c10_bautin};
    if (id < 1 || id > kCriteriaCount) throw DomainError("criterion id out of range");
    const auto t0 = Clock::now();
    CheckResult r;
    try {
        r = table[id - 1](opt);
    } catch (const std::exception& e) {
        r.id = std::to_string(id);
        r.name = "criterion " + r.id;
        r.pass = false;
        r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return r;
}

std::vector<CheckResult> run_criteria(const VerifyOptions& opt) {
    std::vector<CheckResult> out;
    for (int i = 1; i <= kCriteriaCount; ++i) out.push_back(run_criterion(i, opt));
    return out;
}

std::vector<CheckResult> run_properties(const VerifyOptions& opt) {
    std::vector<CheckResult> out;
    std::mt19937_64 rng(opt.seed + 99);
    std::uniform_real_distribution<double> U(-2, 2);

    out.push_back(prop("P1", "gen_abs positive homogeneity", [&](bool& ok) {
        int bad = 0;
        for (int i = 0; i < 1000; ++i) {
            const SlopePair s{U(rng), U(rng)};
            const double u = U(rng), l = std::abs(U(rng)) + 1e-3;
            if (std::abs(gen_abs(l * u, s) - l * gen_abs(u, s)) > 1e-14 * (1 + std::abs(u))) ++bad;
        }
        ok = bad == 0;
        return std::to_string(bad) + "/1000 violations";
    }));

    out.push_back(prop("P2", "sigma_tilde equals sigma# at default slopes", [&](bool& ok) {
        double worst = 0;
        for (int i = 0; i < 200; ++i) {
            const auto q = random_quad(rng, false);
            worst = std::max(worst, std::abs(sigma_tilde(q) - sigma_hash(q)));
        }
        ok = worst <= 1e-14;
        return "max diff " + fmt("%.1e", worst);
    }));

    out.push_back(prop("P3", "polar functions are 2pi-periodic", [&](bool& ok) {
        double worst = 0;
        for (int i = 0; i < 50; ++i) {
            PlanarSystem s;
            s.quad = random_quad(rng, true);
            s.smooth = random_smooth(rng);
            const auto p = polar_decompose(s);
            worst = std::max({worst, std::abs(p.chi2(0) - p.chi2(kTwoPi)), std::abs(p.Omega1(0) - p.Omega1(kTwoPi)),
                              std::abs(p.chi3(0) - p.chi3(kTwoPi)), std::abs(p.Omega2(0) - p.Omega2(kTwoPi))});
        }
        ok = worst <= 1e-12;
        return "max diff " + fmt("%.1e", worst);
    }));

    out.push_back(prop("P4", "averaged form closed vs quadrature", [&](bool& ok) {
        double worst = 0;
        for (int i = 0; i < 100; ++i) {
            PlanarSystem s;
            s.omega = 0.5 + std::abs(U(rng)) * 0.75;
            s.mu = 0.01 * U(rng);
            s.quad = random_quad(rng, false);
            s.smooth = random_smooth(rng);
            const auto nf = averaged_form(s);
            for (auto [a, b] : {std::pair{nf.linear, nf.linear_quad}, {nf.quadratic, nf.quadratic_quad},
                                {nf.cubic, nf.cubic_quad}})
                worst = std::max(worst, std::abs(a - b) / std::max(std::abs(b), 1.0));
        }
        ok = worst <= 1e-9;
        return "worst rel " + fmt("%.1e", worst);
    }));

    out.push_back(prop("P5", "bautin_fold even in sigma#, odd in sigma2", [&](bool& ok) {
        int bad = 0;
        for (int i = 0; i < 200; ++i) {
            const double a = U(rng), b = U(rng) + (U(rng) > 0 ? 3 : -3), w = 0.5 + std::abs(U(rng));
            const double f = bautin_fold(a, b, w);
            if (f != bautin_fold(-a, b, w) || f != -bautin_fold(a, -b, w)) ++bad;
        }
        ok = bad == 0;
        return std::to_string(bad) + "/200 violations";
    }));

    out.push_back(prop("P6", "predictions never negative", [&](bool& ok) {
        int bad = 0;
        for (int i = 0; i < 1000; ++i) {
            const double s = U(rng) + (U(rng) > 0 ? 2.5 : -2.5), mu = 0.01 * U(rng);
            if (auto r = r0_first(s, mu); r && *r < 0) ++bad;
            if (auto r = r0_second(s, 1 + std::abs(U(rng)), mu); r && *r < 0) ++bad;
        }
        ok = bad == 0;
        return std::to_string(bad) + " negative radii";
    }));

    out.push_back(prop("P7", "shimmy verdict invariant under eigenvector rescaling", [&](bool& ok) {
        int bad = 0;
        for (int i = 0; i < 10; ++i) {
            const auto p = hopf_tuned_draw(opt.seed + 500 + i);
            const auto a = analyze_shimmy(p);
            ShimmyEigen e = a.eigen;
            e.s1 *= std::complex<double>(U(rng), U(rng) + 3);
            e.s3 *= U(rng) > 0 ? -2.5 : 0.4;
            auto b = normalize(p, e);
            classify_shimmy(b);
            if (b.verdict != a.verdict) ++bad;
        }
        ok = bad == 0;
        return std::to_string(bad) + "/10 changed";
    }));

    out.push_back(prop("P8", "shimmy block form T^-1 J T = A", [&](bool& ok) {
        double worst = 0;
        for (int i = 0; i < 20; ++i) worst = std::max(worst, analyze_shimmy(hopf_tuned_draw(opt.seed + 700 + i)).block_residual);
        ok = worst <= 1e-10;
        return "max residual " + fmt("%.1e", worst);
    }));

    return out;
}

std::string format_line(const CheckResult& r) {
    return std::string(r.pass ? "PASS" : "FAIL") + "  [" + r.id + "] " + r.name + " :: " + r.detail + " (" +
           fmt("%.2f", r.seconds) + " s)";
}

}  // namespace hopfns
