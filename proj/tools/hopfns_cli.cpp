#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hopfns/io.hpp"
#include "hopfns/verify.hpp"

using namespace hopfns;

namespace {

struct MuGrid {
    double min = -0.01, max = 0.01;
    int count = 20;
};

struct Config {
    std::string input, output, format, prediction;
    MuGrid grid;
    double rtol = 1e-10, atol = 1e-12;
    std::uint64_t seed = VerifyOptions{}.seed;
    int only = 0;
    bool properties_only = false, simulate = false;
};

// count points evenly spaced on [min, max], mu = 0 dropped
std::vector<double> mu_grid(const MuGrid& g) {
    if (g.count < 2) throw SchemaError("--mu-count must be at least 2");
    if (!(g.min < g.max)) throw SchemaError("--mu-min must be below --mu-max");
    std::vector<double> out;
    for (int i = 0; i < g.count; ++i) {
        const double mu = g.min + (g.max - g.min) * i / (g.count - 1);
        if (std::abs(mu) <= 1e-15 * std::max(std::abs(g.min), std::abs(g.max))) continue;
        out.push_back(mu);
    }
    if (out.empty()) throw SchemaError("mu grid is empty after excluding 0");
    return out;
}

void emit(const Config& c, const std::string& text) {
    if (c.output.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(c.output, std::ios::binary);
    if (!out) throw SchemaError(c.output + ": cannot write");
    out << text;
}

std::string dump(const json& j) {
    return j.dump(2) + "\n";
}

IntegratorOptions integ(const Config& c) {
    IntegratorOptions o;
    o.rtol = c.rtol;
    o.atol = c.atol;
    return o;
}

OrbitOptions orbit_opts(const Config& c) {
    OrbitOptions o;
    o.integ = integ(c);
    return o;
}

CoefficientReport report_for(const Descriptor& d) {
    if (d.is_planar()) return coefficient_report(d.planar);
    if (d.kind == "3d") return coefficient_report(d.sys3);
    throw SchemaError("kind '" + d.kind + "' has no coefficient report");
}

std::optional<Prediction> predict_for(const Descriptor& d) {
    try {
        return classify(report_for(d));
    } catch (const NumericalError&) {
        return std::nullopt;
    }
}

int cmd_coeffs(const Config& c) {
    const Descriptor d = load_descriptor(c.input);
    emit(c, dump(to_json(report_for(d))));
    return 0;
}

int cmd_averaged(const Config& c) {
    const Descriptor d = load_descriptor(c.input);
    if (d.kind != "planar-nf") throw SchemaError("averaged requires kind planar-nf");
    emit(c, dump(to_json(averaged_form(d.planar))));
    return 0;
}

Branch branch_for(const Descriptor& d, const std::vector<double>& grid, const OrbitOptions& o) {
    if (d.is_planar()) return continue_branch(d.planar, grid, o);
    if (d.kind == "3d") return continue_branch(d.sys3, grid, o);
    if (d.kind == "nd") {
        Branch b;
        for (double mu : grid) {
            SystemND s = d.nd;
            s.mu = mu;
            try {
                for (const auto& orb : solve_nd_bvp(s, o)) b.points.push_back(orb);
            } catch (const NumericalError& e) {
                b.failures.emplace_back(mu, e.what());
            }
        }
        int neg = 0, pos = 0;
        for (const auto& p : b.points) (p.mu < 0 ? neg : pos)++;
        if (neg && !pos) b.kind = BranchKind::subcritical;
        if (pos && !neg) b.kind = BranchKind::supercritical;
        b.slope = fit_slope_origin(b.points);
        return b;
    }
    throw SchemaError("kind '" + d.kind + "' has no branch; use the shimmy command");
}

std::vector<DiagramRow> comparison(const Branch& b, const std::optional<Prediction>& p, const Descriptor& d,
                                   const std::vector<double>& grid) {
    std::vector<DiagramRow> rows;
    // predictions refer to normal-form coordinates; general linear parts have no direct radius comparison
    const bool comparable = p && d.kind != "planar-general" && p->kind != PredictionKind::vertical;
    for (double mu : grid) {
        std::optional<double> pred;
        if (comparable) pred = p->r0(mu);
        bool any = false;
        for (const auto& o : b.points) {
            if (o.mu != mu) continue;
            any = true;
            DiagramRow r{mu, o.r0, pred, std::nullopt};
            if (pred && *pred > 0) r.rel_err = std::abs(o.r0 - *pred) / *pred;
            rows.push_back(r);
        }
        if (!any) rows.push_back({mu, std::nullopt, pred, std::nullopt});
    }
    return rows;
}

json rows_json(const std::vector<DiagramRow>& rows) {
    json out = json::array();
    auto o = [](const std::optional<double>& x) { return x ? json(*x) : json(nullptr); };
    for (const auto& r : rows)
        out.push_back({{"mu", r.mu}, {"r0_numeric", o(r.r0_numeric)}, {"r0_predicted", o(r.r0_predicted)},
                       {"rel_err", o(r.rel_err)}});
    return out;
}

int cmd_branch(const Config& c) {
    const Descriptor d = load_descriptor(c.input);
    const auto grid = mu_grid(c.grid);
    const Branch b = branch_for(d, grid, orbit_opts(c));
    const auto p = d.kind == "nd" ? std::nullopt : predict_for(d);
    const auto rows = comparison(b, p, d, grid);
    double max_err = 0;
    for (const auto& r : rows)
        if (r.rel_err) max_err = std::max(max_err, *r.rel_err);
    json pj = {{"prediction", p ? to_json(*p) : json(nullptr)},
               {"branch_kind", to_string(b.kind)},
               {"slope_numeric", b.slope},
               {"slope_predicted", p && p->order == PredictionOrder::first && !p->r0_of_mu.empty() &&
                                           d.kind != "planar-general"
                                       ? json(p->r0_of_mu[0])
                                       : json(nullptr)},
               {"max_rel_err", max_err},
               {"comparison", rows_json(rows)}};
    if (c.format == "csv") {
        emit(c, branch_csv(b));
        if (!c.prediction.empty()) {
            std::ofstream out(c.prediction, std::ios::binary);
            if (!out) throw SchemaError(c.prediction + ": cannot write");
            out << dump(pj);
        }
    } else {
        pj["branch"] = to_json(b);
        emit(c, dump(pj));
    }
    return 0;
}

int cmd_diagram(const Config& c) {
    const Descriptor d = load_descriptor(c.input);
    const auto grid = mu_grid(c.grid);
    const Branch b = branch_for(d, grid, orbit_opts(c));
    const auto p = d.kind == "nd" ? std::nullopt : predict_for(d);
    const auto rows = comparison(b, p, d, grid);
    emit(c, c.format == "json" ? dump(rows_json(rows)) : diagram_csv(rows));
    return 0;
}

int cmd_shimmy(const Config& c) {
    const Descriptor d = load_descriptor(c.input);
    if (d.kind != "shimmy") throw SchemaError("shimmy requires kind shimmy");
    const auto a = analyze_shimmy(d.shimmy);
    json j = to_json(a);
    j["hopf_c1"] = hopf_tune(d.shimmy);
    if (c.simulate) {
        ShimmyParams tuned = d.shimmy;
        const auto roots = hopf_tune(tuned);
        if (roots.empty()) throw NumericalError("no Hopf-tuned c1");
        double best = roots[0];
        for (double r : roots)
            if (std::abs(r - tuned.c1) < std::abs(best - tuned.c1)) best = r;
        tuned.c1 = best;
        j["simulation"] = to_json(simulate_shimmy(tuned));
        j["simulation"]["c1"] = best;
    }
    emit(c, dump(j));
    return 0;
}

int cmd_verify(const Config& c) {
    VerifyOptions o;
    o.seed = c.seed;
    std::vector<CheckResult> res;
    if (c.only == 0) res = run_properties(o);
    if (!c.properties_only) {
        if (c.only != 0)
            res.push_back(run_criterion(c.only, o));
        else
            for (const auto& r : run_criteria(o)) res.push_back(r);
    }
    bool ok = true;
    for (const auto& r : res) ok = ok && r.pass;
    if (c.format == "json") {
        json j = json::array();
        for (const auto& r : res)
            j.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail}, {"seconds", r.seconds}});
        emit(c, dump({{"pass", ok}, {"results", j}}));
    } else {
        std::string text;
        for (const auto& r : res) text += format_line(r) + "\n";
        emit(c, text);
    }
    return ok ? 0 : 1;
}

void error_json(const char* kind, const std::string& msg) {
    std::cerr << json{{"error", kind}, {"message", msg}}.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hopf bifurcation toolkit for systems with second-order modulus terms"};
    app.require_subcommand(1);
    Config c;

    auto add_io = [&](CLI::App* s, bool needs_input) {
        auto* in = s->add_option("--input,-i", c.input, "system descriptor (JSON)");
        if (needs_input) in->required();
        s->add_option("--output,-o", c.output, "output path (default: stdout)");
    };
    auto add_grid = [&](CLI::App* s) {
        s->add_option("--mu-min", c.grid.min, "lower end of the mu grid");
        s->add_option("--mu-max", c.grid.max, "upper end of the mu grid");
        s->add_option("--mu-count", c.grid.count, "grid points before removing mu = 0");
        s->add_option("--rtol", c.rtol, "integrator relative tolerance")->check(CLI::PositiveNumber);
        s->add_option("--atol", c.atol, "integrator absolute tolerance")->check(CLI::PositiveNumber);
    };

    auto* coeffs = app.add_subcommand("coeffs", "coefficient report (closed form and quadrature)");
    add_io(coeffs, true);
    auto* averaged = app.add_subcommand("averaged", "averaged radial normal form");
    add_io(averaged, true);
    auto* branch = app.add_subcommand("branch", "continue the orbit branch over a mu grid");
    add_io(branch, true);
    add_grid(branch);
    std::string branch_fmt = "json", diagram_fmt = "csv", verify_fmt = "text";
    branch->add_option("--format", branch_fmt, "json (default) or csv")->check(CLI::IsMember({"json", "csv"}));
    branch->add_option("--prediction", c.prediction, "with --format csv: write the prediction JSON here");
    auto* diagram = app.add_subcommand("diagram", "mu sweep: numeric vs predicted radius");
    add_io(diagram, true);
    add_grid(diagram);
    diagram->add_option("--format", diagram_fmt, "csv (default) or json")->check(CLI::IsMember({"json", "csv"}));
    auto* shimmy = app.add_subcommand("shimmy", "shimmying-wheel criticality analysis");
    add_io(shimmy, true);
    shimmy->add_flag("--simulate", c.simulate, "cross-check by time-domain simulation at the nearest Hopf point");
    auto* verify = app.add_subcommand("verify", "property suite and acceptance criteria");
    add_io(verify, false);
    verify->add_option("--seed", c.seed, "seed for randomized checks");
    verify->add_option("--only", c.only, "single acceptance criterion")->check(CLI::Range(1, kCriteriaCount));
    verify->add_flag("--properties-only", c.properties_only, "skip the acceptance criteria");
    verify->add_option("--format", verify_fmt, "text (default) or json")->check(CLI::IsMember({"text", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        error_json("usage", e.what());
        return 2;
    }

    try {
        if (*coeffs) return cmd_coeffs(c);
        if (*averaged) return cmd_averaged(c);
        if (*branch) {
            c.format = branch_fmt;
            return cmd_branch(c);
        }
        if (*diagram) {
            c.format = diagram_fmt;
            return cmd_diagram(c);
        }
        if (*shimmy) return cmd_shimmy(c);
        if (*verify) {
            c.format = verify_fmt;
            return cmd_verify(c);
        }
    } catch (const SchemaError& e) {
        error_json("schema", e.what());
        return 2;
    } catch (const DomainError& e) {
        error_json("schema", e.what());
        return 2;
    } catch (const NumericalError& e) {
        error_json("numerical", e.what());
        return 3;
    } catch (const std::exception& e) {
        error_json("numerical", e.what());
        return 3;
    }
    return 0;
}
