#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hopfns/core.hpp"

namespace hopfns {

struct IntegratorOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double r_max = 0.5;
    int fixed_steps = 0;  // > 0: that many equal DP5 steps per switching segment
    bool record = false;
    long max_steps = 2000000;
};

struct IntegratorStats {
    long accepted = 0;
    long rejected = 0;
    long rhs_evals = 0;
};

struct Trajectory {
    std::vector<double> s;               // angle or time
    std::vector<std::vector<double>> x;  // state at s
    IntegratorStats stats;
};

// Angle-parametrized cylinder system. State y = (u_1..u_m, r, t).
class AngleFlow {
public:
    explicit AngleFlow(const PlanarSystem& sys);
    explicit AngleFlow(const System3D& sys);
    explicit AngleFlow(const SystemND& sys);

    int dim_u() const { return m_; }
    int dim() const { return m_ + 2; }
    int direction() const { return dir_; }
    double mu() const { return mu_; }
    const std::vector<double>& kinks() const { return kinks_; }

    // phi' at state y (throws when it vanishes)
    double phidot(double phi, const double* y) const;
    void rhs(double phi, const double* y, double* dy) const;

private:
    void init_planar(const Mat2& L, const NonsmoothQuadCoeffs& q, const SmoothCoeffs& s);

    int m_ = 0;
    int dir_ = 1;
    double mu_ = 0;
    Mat2 L_{};
    NonsmoothQuadCoeffs quad_;
    SmoothCoeffs smooth_;
    bool has_smooth_ = false;
    std::vector<double> kinks_;
    // transverse data, row-major m x m
    std::vector<double> A_, Q_, C3_, C4_, c5_, c6_, c7_, c8_, c9_;
    std::vector<ModulusTerm> h_;
};

Trajectory integrate_phi(const AngleFlow& flow, const std::vector<double>& y0, double phi0,
                         double phi1, const IntegratorOptions& opt = {});
Trajectory integrate_phi(const PlanarSystem& sys, double r0, double span,
                         const IntegratorOptions& opt = {});
Trajectory integrate_phi(const System3D& sys, double u0, double r0, double span,
                         const IntegratorOptions& opt = {});

// radius after one turn
double poincare(const PlanarSystem& sys, double r0, const IntegratorOptions& opt = {});
std::pair<double, double> poincare3(const System3D& sys, double u0, double r0,
                                    const IntegratorOptions& opt = {});
// (u, r, elapsed time) after one turn
std::vector<double> return_map(const AngleFlow& flow, const std::vector<double>& u0, double r0,
                               const IntegratorOptions& opt = {});

enum class Stability { stable, unstable, neutral };
std::string to_string(Stability s);

struct Orbit {
    double mu = 0;
    double r0 = 0;
    double period = 0;
    double floquet = 0;
    Stability stability = Stability::neutral;
    std::vector<double> transverse;
};

class NonIsolatedOrbits : public NumericalError {
public:
    NonIsolatedOrbits() : NumericalError("non-isolated orbits") {}
};

struct OrbitOptions {
    IntegratorOptions integ;
    std::optional<std::pair<double, double>> bracket;
    int sweep_points = 48;
    double xtol = 1e-15;
    double flat_tol = 1e-9;  // |D| below this on the whole bracket means non-isolated
};

// planar orbit at sys.mu
std::optional<Orbit> find_orbit(const PlanarSystem& sys, const OrbitOptions& opt = {});
std::optional<Orbit> find_orbit(const PlanarSystem& sys, double mu, const OrbitOptions& opt = {});

enum class BranchKind { supercritical, subcritical, vertical, two_branch_3d, none };
std::string to_string(BranchKind k);

struct Branch {
    std::vector<Orbit> points;
    BranchKind kind = BranchKind::none;
    double slope = 0;  // dr0/dmu through the origin
    std::vector<std::pair<double, std::string>> failures;
};

Branch continue_branch(const PlanarSystem& sys, const std::vector<double>& mu_grid,
                       const OrbitOptions& opt = {});
Branch continue_branch(const System3D& sys, const std::vector<double>& mu_grid,
                       const OrbitOptions& opt = {});

struct FoldPoint {
    double mu = 0;
    double r0 = 0;
};

// mu(r) solving P(r; mu) = r for mu in [mu_lo, mu_hi]
double branch_mu_of_r(const PlanarSystem& sys, double r, double mu_lo, double mu_hi,
                      const IntegratorOptions& opt = {});
// interior extremum of mu(r) over a geometric r-grid on [r_lo, r_hi]
FoldPoint locate_fold(const PlanarSystem& sys, double r_lo, double r_hi, double mu_lo, double mu_hi,
                      const IntegratorOptions& opt = {});

// slope of r0 against mu by least squares through the origin
double fit_slope_origin(const std::vector<Orbit>& pts);

std::vector<Orbit> solve_3d_bvp(const System3D& sys, const OrbitOptions& opt = {});
std::vector<Orbit> solve_3d_bvp(const System3D& sys, double mu, const OrbitOptions& opt = {});
std::vector<Orbit> solve_nd_bvp(const SystemND& sys, const OrbitOptions& opt = {});

struct Monodromy {
    Eigen::MatrixXd jacobian;  // d u(2pi) / d u0
    Eigen::VectorXd residual;  // (u(2pi) - u0, r(2pi) - r0)
    int kernel_dim = 0;        // of exp(2pi A/omega) - I
    bool near_singular = false;
};

Monodromy monodromy_nd(const SystemND& sys, double mu, const Eigen::VectorXd& u0, double r0,
                       const IntegratorOptions& opt = {});

// kernel dimension of exp(2 pi A / omega) - I
int resonant_kernel_dim(const Eigen::MatrixXd& A, double omega, double tol = 1e-8);

// Cartesian time-domain integration with switching and section events
using OdeRhs = std::function<void(double t, const std::vector<double>& x, std::vector<double>& dx)>;
using EventFn = std::function<double(const std::vector<double>& x)>;

struct SectionEvent {
    EventFn g;
    int direction = 1;  // +1: g increasing, -1: decreasing, 0: both
    double t_min = 0;
    EventFn accept;  // optional; the crossing counts only where accept(x) > 0
};

struct TimeOptions {
    double rtol = 1e-11;
    double atol = 1e-14;
    double h_max = 0.05;
    long max_steps = 5000000;
    double escape = 1e6;
};

struct TimeResult {
    bool hit = false;
    double t = 0;
    std::vector<double> x;
    IntegratorStats stats;
};

TimeResult integrate_time(const OdeRhs& f, std::vector<double> x0, double t_end,
                          const std::vector<EventFn>& switches,
                          const std::optional<SectionEvent>& section, const TimeOptions& opt = {});

// radius at the next crossing of the positive v-axis, from (r0, 0)
double poincare_time_domain(const PlanarSystem& sys, double r0, const TimeOptions& opt = {});

}  // namespace hopfns
