#include "hopfns/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "hopfns/coeffs.hpp"
#include "hopfns/roots.hpp"

namespace hopfns {

namespace {

// Dormand-Prince 5(4)
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

struct Dp45 {
    explicit Dp45(int n) : n(n), k2(n), k3(n), k4(n), k5(n), k6(n), tmp(n) {}

    // one step from (t, y) with f(t, y) = k1; yn = 5th-order solution, k7 = f(t+h, yn)
    template <class F>
    void step(F& f, double t, const double* y, const double* k1, double h, double* yn, double* k7,
              double* err) {
        for (int i = 0; i < n; ++i) tmp[i] = y[i] + h * a21 * k1[i];
        f(t + c2 * h, tmp.data(), k2.data());
        for (int i = 0; i < n; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        f(t + c3 * h, tmp.data(), k3.data());
        for (int i = 0; i < n; ++i) tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        f(t + c4 * h, tmp.data(), k4.data());
        for (int i = 0; i < n; ++i)
            tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        f(t + c5 * h, tmp.data(), k5.data());
        for (int i = 0; i < n; ++i)
            tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        f(t + h, tmp.data(), k6.data());
        for (int i = 0; i < n; ++i)
            yn[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
        f(t + h, yn, k7);
        for (int i = 0; i < n; ++i)
            err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    }

    int n;
    std::vector<double> k2, k3, k4, k5, k6, tmp;
};

double error_norm(const std::vector<double>& err, const std::vector<double>& y,
                  const std::vector<double>& yn, double rtol, double atol) {
    double e = 0;
    for (size_t i = 0; i < err.size(); ++i) {
        const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(yn[i]));
        e = std::max(e, std::abs(err[i]) / sc);
    }
    return e;
}

bool finite_all(const std::vector<double>& y) {
    return std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); });
}

Stability stability_of(double f) {
    const double a = std::abs(f);
    if (a < 1.0) return Stability::stable;
    if (a > 1.0) return Stability::unstable;
    return Stability::neutral;
}

}  // namespace

std::string to_string(Stability s) {
    switch (s) {
        case Stability::stable: return "stable";
        case Stability::unstable: return "unstable";
        default: return "neutral";
    }
}

std::string to_string(BranchKind k) {
    switch (k) {
        case BranchKind::supercritical: return "supercritical";
        case BranchKind::subcritical: return "subcritical";
        case BranchKind::vertical: return "vertical";
        case BranchKind::two_branch_3d: return "two-branch-3d";
        default: return "none";
    }
}

// ---------------------------------------------------------------- AngleFlow

void AngleFlow::init_planar(const Mat2& L, const NonsmoothQuadCoeffs& q, const SmoothCoeffs& s) {
    L_ = L;
    quad_ = q;
    smooth_ = s;
    has_smooth_ = !s.is_zero();
    const double b = L[1][1] - L[0][0];
    if (b * b + 4 * L[1][0] * L[0][1] >= 0) throw DomainError("angular speed vanishes");
    dir_ = L[1][0] > 0 ? 1 : -1;
    kinks_ = {0.0, kPi / 2, kPi, 1.5 * kPi};
}

AngleFlow::AngleFlow(const PlanarSystem& sys) {
    sys.validate();
    mu_ = sys.mu;
    init_planar(sys.linear(), sys.quad, sys.smooth);
}

AngleFlow::AngleFlow(const System3D& sys) : AngleFlow(SystemND::from_3d(sys)) {}

AngleFlow::AngleFlow(const SystemND& sys) {
    sys.validate();
    mu_ = sys.mu;
    init_planar({{{sys.mu, -sys.omega}, {sys.omega, sys.mu}}}, sys.quad, sys.smooth);
    m_ = sys.transverse_dim();
    const int m = m_;
    A_.resize(m * m);
    C3_.resize(m * m);
    C4_.resize(m * m);
    Q_.resize(m * m * m);
    c5_.resize(m);
    c6_.resize(m);
    c7_.resize(m);
    c8_.resize(m);
    c9_.resize(m);
    for (int i = 0; i < m; ++i) {
        c5_[i] = sys.c5(i);
        c6_[i] = sys.c6(i);
        c7_[i] = sys.c7(i);
        c8_[i] = sys.c8(i);
        c9_[i] = sys.c9(i);
        for (int j = 0; j < m; ++j) {
            A_[i * m + j] = sys.A(i, j);
            C3_[i * m + j] = sys.C3(i, j);
            C4_[i * m + j] = sys.C4(i, j);
            for (int k = 0; k < m; ++k) Q_[(i * m + j) * m + k] = sys.Q[i](j, k);
        }
    }
    h_ = sys.h;
}

double AngleFlow::phidot(double phi, const double* y) const {
    std::vector<double> dy(dim());
    rhs(phi, y, dy.data());
    return 1.0 / dy[m_ + 1];
}

void AngleFlow::rhs(double phi, const double* y, double* dy) const {
    const double c = std::cos(phi), s = std::sin(phi);
    const double r = y[m_];
    double b00 = L_[0][0], b01 = L_[0][1], b10 = L_[1][0], b11 = L_[1][1];
    for (int i = 0; i < m_; ++i) {
        b00 += c6_[i] * y[i];
        b01 += c7_[i] * y[i];
        b10 += c8_[i] * y[i];
        b11 += c9_[i] * y[i];
    }
    const double bx = b00 * c + b01 * s, by = b10 * c + b11 * s;
    const double mr = c * bx + s * by;
    const double wr = c * by - s * bx;

    Vec2 n2 = eval_nonsmooth(quad_, c, s);
    double chi2 = 0, om1 = 0, chi3 = 0, om2 = 0;
    if (has_smooth_) {
        const Vec2 q = eval_smooth_quadratic(smooth_, c, s);
        const Vec2 k = eval_cubic(smooth_, c, s);
        n2[0] += q[0];
        n2[1] += q[1];
        chi3 = c * k[0] + s * k[1];
        om2 = c * k[1] - s * k[0];
    }
    chi2 = c * n2[0] + s * n2[1];
    om1 = c * n2[1] - s * n2[0];

    const double rdot = r * (mr + r * chi2 + r * r * chi3);
    const double phid = wr + r * om1 + r * r * om2;
    if (!(phid * dir_ > 0)) throw NumericalError("angular speed vanished");
    const double inv = 1.0 / phid;

    const int m = m_;
    for (int i = 0; i < m; ++i) {
        double a = 0, q = 0, l3 = 0, l4 = 0;
        for (int j = 0; j < m; ++j) {
            a += A_[i * m + j] * y[j];
            l3 += C3_[i * m + j] * y[j];
            l4 += C4_[i * m + j] * y[j];
            double qj = 0;
            for (int k = 0; k < m; ++k) qj += Q_[(i * m + j) * m + k] * y[k];
            q += y[j] * qj;
        }
        const double ud = a + q + r * (c * l3 + s * l4) + r * r * (c5_[i] * c * s + h_[i].eval(c, s));
        dy[i] = ud * inv;
    }
    dy[m] = rdot * inv;
    dy[m + 1] = inv;
}

// ---------------------------------------------------------------- angle integration

Trajectory integrate_phi(const AngleFlow& flow, const std::vector<double>& y0, double phi0,
                         double phi1, const IntegratorOptions& opt) {
    const int n = flow.dim();
    if (static_cast<int>(y0.size()) != n) throw DomainError("state dimension mismatch");
    if (y0[flow.dim_u()] < 0) throw DomainError("r0 must be nonnegative");
    Trajectory tr;
    const double dir = phi1 >= phi0 ? 1.0 : -1.0;

    // segment ends: switching angles inside (phi0, phi1), then phi1
    std::vector<double> ends;
    {
        const double lo = std::min(phi0, phi1), hi = std::max(phi0, phi1);
        const double j0 = std::floor(lo / kTwoPi) - 1, j1 = std::ceil(hi / kTwoPi) + 1;
        for (double j = j0; j <= j1; ++j)
            for (double k : flow.kinks()) {
                const double a = k + kTwoPi * j;
                if (a > lo + 1e-13 && a < hi - 1e-13) ends.push_back(a);
            }
        std::sort(ends.begin(), ends.end());
        if (dir < 0) std::reverse(ends.begin(), ends.end());
        ends.push_back(phi1);
    }

    auto f = [&](double t, const double* y, double* dy) {
        ++tr.stats.rhs_evals;
        flow.rhs(t, y, dy);
    };
    const int ir = flow.dim_u();
    auto check = [&](const std::vector<double>& y) {
        if (!finite_all(y) || std::abs(y[ir]) > opt.r_max) throw NumericalError("radius escaped");
    };

    Dp45 rk(n);
    std::vector<double> y = y0, yn(n), k1(n), k7(n), err(n);
    double phi = phi0;
    f(phi, y.data(), k1.data());
    if (opt.record) {
        tr.s.push_back(phi);
        tr.x.push_back(y);
    }
    double h = dir * std::min(0.05, std::max(std::abs(phi1 - phi0), 1e-300));

    for (double e : ends) {
        if (opt.fixed_steps > 0) {
            const double hh = (e - phi) / opt.fixed_steps;
            for (int i = 0; i < opt.fixed_steps; ++i) {
                rk.step(f, phi, y.data(), k1.data(), hh, yn.data(), k7.data(), err.data());
                phi = i + 1 == opt.fixed_steps ? e : phi + hh;
                y.swap(yn);
                k1.swap(k7);
                ++tr.stats.accepted;
                check(y);
                if (opt.record) {
                    tr.s.push_back(phi);
                    tr.x.push_back(y);
                }
            }
            continue;
        }
        while (phi != e) {
            double hh = h;
            bool last = false;
            if (std::abs(e - phi) <= std::abs(hh) * (1 + 1e-12)) {
                hh = e - phi;
                last = true;
            }
            if (std::abs(hh) < 1e-14 * (1 + std::abs(phi))) throw NumericalError("step size underflow");
            if (tr.stats.accepted + tr.stats.rejected > opt.max_steps)
                throw NumericalError("step budget exhausted");
            rk.step(f, phi, y.data(), k1.data(), hh, yn.data(), k7.data(), err.data());
            const double en = finite_all(yn) ? error_norm(err, y, yn, opt.rtol, opt.atol)
                                             : std::numeric_limits<double>::infinity();
            if (en <= 1.0) {
                phi = last ? e : phi + hh;
                y.swap(yn);
                k1.swap(k7);
                ++tr.stats.accepted;
                check(y);
                if (opt.record) {
                    tr.s.push_back(phi);
                    tr.x.push_back(y);
                }
                const double fac = en == 0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
                if (!last || std::abs(hh * fac) > std::abs(h)) h = hh * fac;
            } else {
                ++tr.stats.rejected;
                const double fac = std::isfinite(en) ? std::clamp(0.9 * std::pow(en, -0.2), 0.1, 0.9) : 0.1;
                h = hh * fac;
            }
        }
    }
    if (!opt.record) {
        tr.s.push_back(phi);
        tr.x.push_back(y);
    }
    return tr;
}

Trajectory integrate_phi(const PlanarSystem& sys, double r0, double span, const IntegratorOptions& opt) {
    return integrate_phi(AngleFlow(sys), {r0, 0.0}, 0.0, span, opt);
}

Trajectory integrate_phi(const System3D& sys, double u0, double r0, double span,
                         const IntegratorOptions& opt) {
    return integrate_phi(AngleFlow(sys), {u0, r0, 0.0}, 0.0, span, opt);
}

std::vector<double> return_map(const AngleFlow& flow, const std::vector<double>& u0, double r0,
                               const IntegratorOptions& opt) {
    std::vector<double> y(u0);
    y.push_back(r0);
    y.push_back(0.0);
    return integrate_phi(flow, y, 0.0, kTwoPi, opt).x.back();
}

double poincare(const PlanarSystem& sys, double r0, const IntegratorOptions& opt) {
    if (r0 == 0.0) return 0.0;
    return return_map(AngleFlow(sys), {}, r0, opt)[0];
}

std::pair<double, double> poincare3(const System3D& sys, double u0, double r0, const IntegratorOptions& opt) {
    const auto y = return_map(AngleFlow(sys), {u0}, r0, opt);
    return {y[0], y[1]};
}

// ---------------------------------------------------------------- planar orbits

namespace {

std::pair<double, double> default_bracket(double sigma, double mu, double r_max, bool& predicted) {
    predicted = false;
    const double lo = 1e-6;
    if (std::abs(sigma) > 1e-9 && mu != 0.0) {
        const double hi = std::min(10 * std::abs(3 * kPi * mu / (2 * sigma)), 0.999 * r_max);
        if (hi > 10 * lo) {
            predicted = true;
            return {lo, hi};
        }
    }
    return {lo, 0.999 * r_max};
}

std::vector<double> geometric_grid(double lo, double hi, int n) {
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
    return g;
}

// first sign change of D along the grid; throws NonIsolatedOrbits when D is flat
std::optional<std::pair<double, double>> scan_sign_change(const std::function<double(double)>& D,
                                                           const std::vector<double>& grid,
                                                           double flat_tol, double& da, double& db) {
    double prev_r = 0, prev = 0;
    bool have = false, flat = true;
    for (double r : grid) {
        double d;
        try {
            d = D(r);
        } catch (const NumericalError&) {
            break;
        }
        if (std::abs(d) >= flat_tol) flat = false;
        if (have && (prev > 0) != (d > 0)) {
            da = prev;
            db = d;
            return std::make_pair(prev_r, r);
        }
        prev_r = r;
        prev = d;
        have = true;
    }
    if (have && flat) throw NonIsolatedOrbits();
    return std::nullopt;
}

}  // namespace

std::optional<Orbit> find_orbit(const PlanarSystem& sys, const OrbitOptions& opt) {
    const AngleFlow flow(sys);
    auto P = [&](double r) { return return_map(flow, {}, r, opt.integ); };
    auto D = [&](double r) { return (P(r)[0] - r) / r; };

    std::pair<double, double> br;
    if (opt.bracket) {
        br = *opt.bracket;
        if (!(br.first > 0 && br.first < br.second && br.second <= opt.integ.r_max))
            throw DomainError("bracket must satisfy 0 < r_lo < r_hi <= r_max");
    } else {
        bool predicted = false;
        double sigma = 0;
        if (sys.normal_form) sigma = sigma_tilde(sys.quad);
        br = default_bracket(sigma, sys.mu, opt.integ.r_max, predicted);
    }
    double da = 0, db = 0;
    const auto sc = scan_sign_change(D, geometric_grid(br.first, br.second, opt.sweep_points),
                                     opt.flat_tol, da, db);
    if (!sc) return std::nullopt;
    const double r = brent_root(D, sc->first, sc->second, da, db, opt.xtol * sc->second);

    Orbit o;
    o.mu = sys.mu;
    o.r0 = r;
    o.period = std::abs(P(r)[1]);
    const double h = std::min(std::max(1e-6, 1e-3 * r), 0.5 * r);
    const double slope = (P(r + h)[0] - P(r - h)[0]) / (2 * h);
    o.floquet = flow.direction() > 0 ? slope : 1.0 / slope;
    o.stability = stability_of(o.floquet);
    return o;
}

std::optional<Orbit> find_orbit(const PlanarSystem& sys, double mu, const OrbitOptions& opt) {
    PlanarSystem s = sys;
    s.mu = mu;
    return find_orbit(s, opt);
}

double branch_mu_of_r(const PlanarSystem& sys, double r, double mu_lo, double mu_hi, const IntegratorOptions& opt) {
    auto g = [&](double mu) {
        PlanarSystem s = sys;
        s.mu = mu;
        return poincare(s, r, opt) - r;
    };
    const double ga = g(mu_lo), gb = g(mu_hi);
    if (ga * gb > 0) throw NumericalError("no sign change in bracket");
    return brent_root(g, mu_lo, mu_hi, ga, gb, 1e-15);
}

FoldPoint locate_fold(const PlanarSystem& sys, double r_lo, double r_hi, double mu_lo, double mu_hi,
                      const IntegratorOptions& opt) {
    if (!(0 < r_lo && r_lo < r_hi)) throw DomainError("need 0 < r_lo < r_hi");
    const int n = 40;
    std::vector<double> r(n), m(n);
    for (int i = 0; i < n; ++i) {
        r[i] = r_lo * std::pow(r_hi / r_lo, static_cast<double>(i) / (n - 1));
        m[i] = branch_mu_of_r(sys, r[i], mu_lo, mu_hi, opt);
    }
    const auto imin = std::min_element(m.begin(), m.end()) - m.begin();
    const auto imax = std::max_element(m.begin(), m.end()) - m.begin();
    long k;
    double sign;
    if (imin > 0 && imin < n - 1) {
        k = imin;
        sign = 1;
    } else if (imax > 0 && imax < n - 1) {
        k = imax;
        sign = -1;
    } else {
        throw NumericalError("no fold in range");
    }
    const auto res = golden_min([&](double x) { return sign * branch_mu_of_r(sys, x, mu_lo, mu_hi, opt); },
                                r[k - 1], r[k + 1], 1e-10 * r[k]);
    return {sign * res.fx, res.x};
}

double fit_slope_origin(const std::vector<Orbit>& pts) {
    double num = 0, den = 0;
    for (const auto& o : pts) {
        num += o.mu * o.r0;
        den += o.mu * o.mu;
    }
    return den > 0 ? num / den : 0.0;
}

namespace {

template <class Finder>
Branch assemble_branch(const std::vector<double>& mu_grid, Finder&& find, bool allow_two) {
    Branch b;
    bool vertical = false;
    std::vector<double> grid = mu_grid;
    std::sort(grid.begin(), grid.end());
    bool two = false;
    for (double mu : grid) {
        if (mu == 0.0) {
            b.failures.emplace_back(mu, "grid point mu=0 skipped");
            continue;
        }
        try {
            auto pts = find(mu);
            if (pts.size() >= 2) two = true;
            for (auto& o : pts) b.points.push_back(o);
        } catch (const NonIsolatedOrbits& e) {
            vertical = true;
            b.failures.emplace_back(mu, e.what());
        } catch (const std::exception& e) {
            b.failures.emplace_back(mu, e.what());
        }
    }
    bool neg = false, pos = false;
    for (const auto& o : b.points) (o.mu < 0 ? neg : pos) = true;
    if (vertical)
        b.kind = BranchKind::vertical;
    else if (allow_two && two)
        b.kind = BranchKind::two_branch_3d;
    else if (neg && !pos)
        b.kind = BranchKind::subcritical;
    else if (pos && !neg)
        b.kind = BranchKind::supercritical;
    else
        b.kind = BranchKind::none;
    if (neg && pos && b.kind == BranchKind::none)
        b.failures.emplace_back(0.0, "orbits found on both sides of mu=0");
    b.slope = fit_slope_origin(b.points);
    return b;
}

}  // namespace

Branch continue_branch(const PlanarSystem& sys, const std::vector<double>& mu_grid, const OrbitOptions& opt) {
    Branch b = assemble_branch(
        mu_grid,
        [&](double mu) {
            std::vector<Orbit> v;
            if (auto o = find_orbit(sys, mu, opt)) v.push_back(*o);
            return v;
        },
        false);
    if (b.points.empty() && b.kind == BranchKind::none) {
        // a family at mu = 0 alone
        try {
            find_orbit(sys, 0.0, opt);
        } catch (const NonIsolatedOrbits&) {
            b.kind = BranchKind::vertical;
        } catch (const std::exception&) {
        }
    }
    return b;
}

Branch continue_branch(const System3D& sys, const std::vector<double>& mu_grid, const OrbitOptions& opt) {
    return assemble_branch(
        mu_grid,
        [&](double mu) { return solve_3d_bvp(sys, mu, opt); },
        true);
}

// ---------------------------------------------------------------- transverse systems

int resonant_kernel_dim(const Eigen::MatrixXd& A, double omega, double tol) {
    const int m = static_cast<int>(A.rows());
    if (m == 0) return 0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(A);
    int k = 0;
    for (int i = 0; i < m; ++i) {
        const std::complex<double> z = std::exp(kTwoPi * es.eigenvalues()(i) / std::abs(omega)) - 1.0;
        if (std::abs(z) < tol) ++k;
    }
    return k;
}

namespace {

class ReturnMapND {
public:
    ReturnMapND(const SystemND& sys, const IntegratorOptions& opt) : flow_(sys), opt_(opt), m_(sys.transverse_dim()) {}

    // (u', r', t)
    std::vector<double> operator()(const Eigen::VectorXd& u, double r) const {
        std::vector<double> u0(u.data(), u.data() + m_);
        return return_map(flow_, u0, r, opt_);
    }
    Eigen::VectorXd residual_u(const Eigen::VectorXd& u, double r) const {
        const auto y = (*this)(u, r);
        Eigen::VectorXd R(m_);
        for (int i = 0; i < m_; ++i) R(i) = y[i] - u(i);
        return R;
    }
    int m() const { return m_; }
    const AngleFlow& flow() const { return flow_; }

private:
    AngleFlow flow_;
    IntegratorOptions opt_;
    int m_;
};

constexpr double kFdU = 1e-7;

// Newton on restricted residual: unknowns u = base + B w, equations G^T R(u)
Eigen::VectorXd solve_restricted(const ReturnMapND& P, double r, const Eigen::VectorXd& base,
                                 const Eigen::MatrixXd& B, const Eigen::MatrixXd& G, Eigen::VectorXd w) {
    const int k = static_cast<int>(B.cols());
    if (k == 0) return base;
    for (int it = 0; it < 20; ++it) {
        const Eigen::VectorXd u = base + B * w;
        const Eigen::VectorXd R = G.transpose() * P.residual_u(u, r);
        Eigen::MatrixXd J(k, k);
        for (int j = 0; j < k; ++j) {
            Eigen::VectorXd wj = w;
            wj(j) += kFdU;
            J.col(j) = (G.transpose() * P.residual_u(base + B * wj, r) - R) / kFdU;
        }
        const Eigen::VectorXd dw = J.fullPivLu().solve(-R);
        w += dw;
        if (dw.norm() <= 1e-15 + 1e-11 * w.norm()) break;
    }
    return base + B * w;
}

Orbit make_orbit(const ReturnMapND& P, double mu, const Eigen::VectorXd& u, double r) {
    const int m = P.m();
    Orbit o;
    o.mu = mu;
    o.r0 = r;
    o.transverse.assign(u.data(), u.data() + m);
    o.period = std::abs(P(u, r)[m + 1]);
    Eigen::MatrixXd J(m + 1, m + 1);
    const double hr = std::min(std::max(1e-6, 1e-3 * r), 0.5 * r);
    for (int j = 0; j <= m; ++j) {
        Eigen::VectorXd up = u, um = u;
        double rp = r, rm = r, h = kFdU;
        if (j < m) {
            up(j) += h;
            um(j) -= h;
        } else {
            h = hr;
            rp += h;
            rm -= h;
        }
        const auto yp = P(up, rp), ym = P(um, rm);
        for (int i = 0; i <= m; ++i) J(i, j) = (yp[i] - ym[i]) / (2 * h);
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(J);
    std::complex<double> best = 0;
    for (int i = 0; i <= m; ++i) {
        std::complex<double> z = es.eigenvalues()(i);
        if (P.flow().direction() < 0) z = 1.0 / z;
        if (std::abs(z) > std::abs(best)) best = z;
    }
    o.floquet = std::abs(best) * (best.real() < 0 ? -1.0 : 1.0);
    o.stability = stability_of(o.floquet);
    return o;
}

std::vector<Orbit> hyperbolic_orbits(const SystemND& sys, const OrbitOptions& opt) {
    const int m = sys.transverse_dim();
    const ReturnMapND P(sys, opt.integ);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(m, m);
    Eigen::VectorXd guess = Eigen::VectorXd::Zero(m);
    auto u_star = [&](double r) {
        guess = solve_restricted(P, r, Eigen::VectorXd::Zero(m), I, I, guess);
        return guess;
    };
    auto D = [&](double r) {
        const Eigen::VectorXd u = u_star(r);
        return (P(u, r)[m] - r) / r;
    };
    bool predicted = false;
    const auto br = opt.bracket ? *opt.bracket
                                : default_bracket(sigma_tilde(sys.quad), sys.mu, opt.integ.r_max, predicted);
    double da = 0, db = 0;
    const auto sc = scan_sign_change(D, geometric_grid(br.first, br.second, opt.sweep_points), opt.flat_tol, da, db);
    if (!sc) return {};
    guess.setZero();
    const double r = brent_root(D, sc->first, sc->second, da, db, opt.xtol * sc->second);
    return {make_orbit(P, sys.mu, u_star(r), r)};
}

std::vector<Orbit> kernel_orbits(const SystemND& sys, const OrbitOptions& opt_in) {
    OrbitOptions opt = opt_in;
    opt.integ.rtol = std::min(opt.integ.rtol, 1e-12);
    opt.integ.atol = std::min(opt.integ.atol, 1e-16);
    const int m = sys.transverse_dim();
    const ReturnMapND P(sys, opt.integ);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.A, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd e = svd.matrixV().col(m - 1);
    const Eigen::VectorXd l = svd.matrixU().col(m - 1);
    const Eigen::MatrixXd F = svd.matrixV().leftCols(m - 1);
    const Eigen::MatrixXd G = svd.matrixU().leftCols(m - 1);

    Eigen::VectorXd wguess = Eigen::VectorXd::Zero(m - 1);
    auto u_of = [&](double kappa, double r) {
        const Eigen::VectorXd u = solve_restricted(P, r, kappa * e, F, G, wguess);
        if (m > 1) wguess = F.transpose() * (u - kappa * e);
        return u;
    };
    auto E1 = [&](double kappa, double r) { return l.dot(P.residual_u(u_of(kappa, r), r)); };
    auto Er = [&](double kappa, double r) { return (P(u_of(kappa, r), r)[m] - r) / r; };

    // roots of E1 in kappa on [-K, K], ordered
    auto kappa_roots = [&](double r) {
        const double K = 2 * r;
        auto f = [&](double k) { return E1(k, r); };
        const double fl = f(-K), fr = f(K), f0 = f(0.0);
        const double s = (fl + fr - 2 * f0) > 0 ? 1.0 : -1.0;
        const MinResult v = golden_min([&](double k) { return s * f(k); }, -K, K, 1e-9 * K);
        const double fv = s * v.fx;
        std::vector<std::optional<double>> out(2);
        if ((fl > 0) != (fv > 0)) out[0] = brent_root(f, -K, v.x, fl, fv, 1e-13 * K);
        if ((fr > 0) != (fv > 0)) out[1] = brent_root(f, v.x, K, fv, fr, 1e-13 * K);
        return out;
    };

    bool predicted = false;
    const auto br = opt.bracket ? *opt.bracket
                                : default_bracket(sigma_tilde(sys.quad), sys.mu, opt.integ.r_max, predicted);
    const auto grid = geometric_grid(std::max(br.first, 1e-3 * br.second), br.second, 24);

    std::vector<Orbit> out;
    for (int b = 0; b < 2; ++b) {
        auto g = [&](double r) -> double {
            const auto ks = kappa_roots(r);
            if (!ks[b]) throw NumericalError("branch undefined");
            return Er(*ks[b], r);
        };
        double prev_r = 0, prev = 0;
        bool have = false;
        for (double r : grid) {
            double d;
            try {
                d = g(r);
            } catch (const NumericalError&) {
                have = false;
                continue;
            }
            if (have && (prev > 0) != (d > 0)) {
                double r0;
                try {
                    r0 = brent_root(g, prev_r, r, prev, d, opt.xtol * r);
                } catch (const NumericalError&) {
                    break;
                }
                const double k = *kappa_roots(r0)[b];
                out.push_back(make_orbit(P, sys.mu, u_of(k, r0), r0));
                break;
            }
            prev_r = r;
            prev = d;
            have = true;
        }
    }
    std::sort(out.begin(), out.end(), [](const Orbit& a, const Orbit& c) { return a.transverse < c.transverse; });
    return out;
}

}  // namespace

std::vector<Orbit> solve_nd_bvp(const SystemND& sys, const OrbitOptions& opt) {
    sys.validate();
    const int kd = resonant_kernel_dim(sys.A, sys.omega);
    if (kd > 1) throw DomainError("kernel dimension > 1 unsupported");
    if (kd == 1) return kernel_orbits(sys, opt);
    return hyperbolic_orbits(sys, opt);
}

std::vector<Orbit> solve_3d_bvp(const System3D& sys, const OrbitOptions& opt) {
    return solve_nd_bvp(SystemND::from_3d(sys), opt);
}

std::vector<Orbit> solve_3d_bvp(const System3D& sys, double mu, const OrbitOptions& opt) {
    System3D s = sys;
    s.mu = mu;
    return solve_3d_bvp(s, opt);
}

Monodromy monodromy_nd(const SystemND& sys_in, double mu, const Eigen::VectorXd& u0, double r0,
                       const IntegratorOptions& opt) {
    SystemND sys = sys_in;
    sys.mu = mu;
    sys.validate();
    const int m = sys.transverse_dim();
    if (u0.size() != m) throw DomainError("u0 dimension mismatch");
    Monodromy md;
    md.kernel_dim = resonant_kernel_dim(sys.A, sys.omega);
    if (md.kernel_dim > 1) throw DomainError("kernel dimension > 1 unsupported");
    md.near_singular = md.kernel_dim > 0;
    const ReturnMapND P(sys, opt);
    const auto y = P(u0, r0);
    md.residual.resize(m + 1);
    for (int i = 0; i < m; ++i) md.residual(i) = y[i] - u0(i);
    md.residual(m) = y[m] - r0;
    md.jacobian.resize(m, m);
    const double h = std::cbrt(opt.atol) * std::max(1.0, u0.norm());
    for (int j = 0; j < m; ++j) {
        Eigen::VectorXd up = u0, um = u0;
        up(j) += h;
        um(j) -= h;
        const auto yp = P(up, r0), ym = P(um, r0);
        for (int i = 0; i < m; ++i) md.jacobian(i, j) = (yp[i] - ym[i]) / (2 * h);
    }
    return md;
}

// ---------------------------------------------------------------- time domain

TimeResult integrate_time(const OdeRhs& f_in, std::vector<double> x0, double t_end,
                          const std::vector<EventFn>& switches, const std::optional<SectionEvent>& section,
                          const TimeOptions& opt) {
    const int n = static_cast<int>(x0.size());
    TimeResult res;
    std::vector<double> xa(n), dxa(n);
    auto f = [&](double t, const double* x, double* dx) {
        ++res.stats.rhs_evals;
        xa.assign(x, x + n);
        f_in(t, xa, dxa);
        std::copy(dxa.begin(), dxa.end(), dx);
    };
    Dp45 rk(n);
    std::vector<double> x = std::move(x0), xn(n), k1(n), k7(n), err(n), xs(n), ks(n), es(n);
    double t = 0, h = std::min(opt.h_max, 1e-3);
    f(t, x.data(), k1.data());

    auto eval_sw = [&](const std::vector<double>& y, std::vector<double>& g) {
        g.resize(switches.size());
        for (size_t i = 0; i < switches.size(); ++i) g[i] = switches[i](y);
    };
    std::vector<double> g_old, g_new;
    eval_sw(x, g_old);
    double s_old = section ? section->g(x) : 0.0;

    while (t < t_end) {
        if (res.stats.accepted + res.stats.rejected > opt.max_steps) throw NumericalError("step budget exhausted");
        const double hh = std::min(h, t_end - t);
        if (hh < 1e-15 * (1 + t)) throw NumericalError("step size underflow");
        rk.step(f, t, x.data(), k1.data(), hh, xn.data(), k7.data(), err.data());
        const double en = finite_all(xn) ? error_norm(err, x, xn, opt.rtol, opt.atol)
                                         : std::numeric_limits<double>::infinity();
        if (en > 1.0) {
            ++res.stats.rejected;
            h = hh * (std::isfinite(en) ? std::clamp(0.9 * std::pow(en, -0.2), 0.1, 0.9) : 0.1);
            continue;
        }
        const double fac = en == 0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);

        eval_sw(xn, g_new);
        const double s_new = section ? section->g(xn) : 0.0;
        auto section_fires = [&](double so, double sn, double tn, const std::vector<double>& xe) {
            if (!section || tn < section->t_min) return false;
            const bool up = so < 0 && sn > 0, down = so > 0 && sn < 0;
            const bool dir_ok = section->direction > 0 ? up : section->direction < 0 ? down : (up || down);
            return dir_ok && (!section->accept || section->accept(xe) > 0);
        };

        // earliest crossing in the step
        double theta_min = 2.0;
        int which = -2;
        auto locate = [&](const std::function<double(const std::vector<double>&)>& g, double go) {
            auto gt = [&](double th) {
                rk.step(f, t, x.data(), k1.data(), th * hh, xs.data(), ks.data(), es.data());
                return g(xs);
            };
            double lo = 0, hi = 1, flo = go, fhi = g(xn);
            int side = 0;
            for (int it = 0; it < 100 && hi - lo > 1e-14; ++it) {
                double th = (lo * fhi - hi * flo) / (fhi - flo);
                if (!(th > lo && th < hi)) th = 0.5 * (lo + hi);
                const double ft = gt(th);
                if ((ft > 0) == (flo > 0)) {
                    lo = th;
                    flo = ft;
                    if (side == -1) fhi *= 0.5;
                    side = -1;
                } else {
                    hi = th;
                    fhi = ft;
                    if (side == 1) flo *= 0.5;
                    side = 1;
                }
            }
            return hi;
        };
        for (size_t i = 0; i < switches.size(); ++i)
            if ((g_old[i] > 0 && g_new[i] < 0) || (g_old[i] < 0 && g_new[i] > 0)) {
                const double th = locate(switches[i], g_old[i]);
                if (th < theta_min) {
                    theta_min = th;
                    which = static_cast<int>(i);
                }
            }
        if (section && section_fires(s_old, s_new, t + hh, xn)) {
            const double th = locate(section->g, s_old);
            if (th <= theta_min) {
                theta_min = th;
                which = -1;
            }
        }

        if (which == -2) {
            t += hh;
            x.swap(xn);
            k1.swap(k7);
            g_old = g_new;
            s_old = s_new;
        } else {
            rk.step(f, t, x.data(), k1.data(), theta_min * hh, xs.data(), ks.data(), es.data());
            t += theta_min * hh;
            x = xs;
            f(t, x.data(), k1.data());
            eval_sw(x, g_old);
            s_old = section ? section->g(x) : 0.0;
            if (which == -1) {
                ++res.stats.accepted;
                res.hit = true;
                res.t = t;
                res.x = x;
                return res;
            }
        }
        ++res.stats.accepted;
        for (double v : x)
            if (!std::isfinite(v) || std::abs(v) > opt.escape) throw NumericalError("state escaped");
        h = std::min(hh * fac, opt.h_max);
    }
    res.t = t;
    res.x = x;
    return res;
}

double poincare_time_domain(const PlanarSystem& sys, double r0, const TimeOptions& opt) {
    sys.validate();
    const Mat2 L = sys.linear();
    const double w = sys.frequency();
    const int dir = L[1][0] > 0 ? 1 : -1;
    OdeRhs f = [&](double, const std::vector<double>& x, std::vector<double>& dx) {
        const Vec2 d = eval_planar_rhs(sys, x[0], x[1]);
        dx[0] = d[0];
        dx[1] = d[1];
    };
    std::vector<EventFn> sw = {[](const std::vector<double>& x) { return x[0]; },
                               [](const std::vector<double>& x) { return x[1]; }};
    SectionEvent sec;
    sec.g = [](const std::vector<double>& x) { return x[1]; };
    sec.direction = dir;
    sec.t_min = 0.25 * kTwoPi / std::abs(w);
    sec.accept = [](const std::vector<double>& x) { return x[0]; };
    const auto res = integrate_time(f, {r0, 0.0}, 100 * kTwoPi / std::abs(w), sw, sec, opt);
    if (!res.hit) throw NumericalError("no return to section");
    return res.x[0];
}

}  // namespace hopfns
