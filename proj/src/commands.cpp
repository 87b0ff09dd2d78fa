#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace kgconc::app {

using json = nlohmann::ordered_json;

namespace {

/// Threshold evaluated by a command. All of them are recorded; failures only change the exit status
/// under --assert.
struct Check {
    std::string name;
    double value;
    double threshold;
    bool pass;
};

struct Result {
    json report = json::object();
    std::vector<std::pair<std::string, std::string>> csv;  ///< file name, contents
    std::vector<Check> checks;

    void check_le(const std::string& name, double value, double threshold)
    {
        checks.push_back({name, value, threshold, value <= threshold});
    }
    void check_true(const std::string& name, bool ok) { checks.push_back({name, ok ? 1.0 : 0.0, 1.0, ok}); }
};

/// Small CSV builder with full double precision.
class Csv {
public:
    explicit Csv(const std::vector<std::string>& columns)
    {
        os_ << std::setprecision(17);
        for (std::size_t i = 0; i < columns.size(); ++i) os_ << (i ? "," : "") << columns[i];
        os_ << '\n';
    }
    template <class... T>
    void row(const T&... v)
    {
        std::size_t i = 0;
        ((os_ << (i++ ? "," : "") << v), ...);
        os_ << '\n';
    }
    std::string str() const { return os_.str(); }

private:
    std::ostringstream os_;
};

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

Trajectory trajectory_of(const RunConfig& cfg) { return cfg.trajectory.build(cfg.phys.c); }

const Nonlinearity& require_nonlinear(const RunConfig& cfg, const Nonlinearity& nl, const std::string& what)
{
    require(cfg.mode == Mode::nonlinear, ErrorKind::config, what + " needs mode = nonlinear");
    return nl;
}

std::string mode_name(Mode m) { return to_string(m); }

std::string zeta_tag(double zeta)
{
    std::ostringstream os;
    os << "[zeta=" << zeta << "]";
    return os.str();
}

// ---------------------------------------------------------------------------------------------

Result cmd_rest_state(const RunConfig& cfg)
{
    const auto nlin = cfg.nonlinearity();
    const auto& nl = require_nonlinear(cfg, nlin, "rest-state");
    const auto& p = cfg.phys;
    Result res;
    Csv table({"nodes", "xi", "theta0", "l2_norm", "grad_norm2", "r_trunc", "shots", "residual", "omega", "omega0",
               "theta", "energy", "charge_norm"});
    std::vector<RestState> states;
    json rows = json::array();
    for (int n = 0; n < cfg.rest.states; ++n) {
        states.push_back(solve_rest_state(nl, n, cfg.rest.solver));
        const auto& rs = states.back();
        const auto o = rest_observables(rs, p.a, p.a_c(), p.chi, p.m, p.c);
        const double resid = rest_residual(rs, nl);
        table.row(rs.node_count, rs.xi, rs.theta0, rs.l2_norm, rs.grad_norm2, rs.r_trunc, rs.shots, resid, o.omega,
                  o.omega0, o.theta, o.energy, o.charge_norm);
        rows.push_back({{"nodes", rs.node_count}, {"xi", rs.xi}, {"theta0", rs.theta0}, {"l2_norm", rs.l2_norm},
                        {"r_trunc", rs.r_trunc}, {"shots", rs.shots}, {"residual", resid}, {"omega", o.omega},
                        {"omega0", o.omega0}, {"theta", o.theta}, {"energy", o.energy},
                        {"charge_norm", o.charge_norm}});
        res.check_le("residual[" + std::to_string(n) + "]", resid, cfg.rest.residual_max);
        if (!cfg.rest.expect_xi.empty())
            res.check_le("xi[" + std::to_string(n) + "]", std::fabs(rs.xi - cfg.rest.expect_xi[std::size_t(n)]),
                         cfg.rest.xi_tol);
    }
    std::vector<std::string> cols{"r"};
    for (int n = 0; n < cfg.rest.states; ++n) cols.push_back("psi_" + std::to_string(n));
    std::ostringstream prof;
    prof << std::setprecision(17);
    for (std::size_t i = 0; i < cols.size(); ++i) prof << (i ? "," : "") << cols[i];
    prof << '\n';
    for (std::size_t i = 0; i < states.front().r.size(); ++i) {
        prof << states.front().r[i];
        for (const auto& rs : states) prof << ',' << rs.profile[i];
        prof << '\n';
    }
    res.report["family"] = to_string(cfg.family);
    res.report["states"] = rows;
    res.csv.emplace_back("rest_states.csv", table.str());
    res.csv.emplace_back("rest_profiles.csv", prof.str());
    return res;
}

// ---------------------------------------------------------------------------------------------

FieldFrame boost_frame(const BoostSpec& spec, const RunConfig& cfg, double h, double ht, std::size_t nt)
{
    const auto& b = cfg.boost;
    const double a = cfg.phys.a, half = b.half_width * a;
    const auto n = std::size_t(std::lround(2.0 * half / (h * a))) + 1;
    std::array<Axis, 3> ax{centered_axis(half, n), Axis{}, Axis{}};
    if (b.dim == 3) ax[1] = ax[2] = ax[0];
    return boosted_field(spec, b.dim, Axis{0.0, ht * a / cfg.phys.c, nt}, ax, cfg.phys);
}

Result cmd_boost(const RunConfig& cfg)
{
    const auto nlin = cfg.nonlinearity();
    const auto& nl = require_nonlinear(cfg, nlin, "boost");
    const auto& p = cfg.phys;
    const auto& b = cfg.boost;
    const auto rs = solve_rest_state(nl, 0, cfg.rest.solver);
    const auto spec = make_boost(rs, {b.beta * p.c, 0.0, 0.0}, p);
    const auto ro = rest_observables(rs, p.a, p.a_c(), p.chi, p.m, p.c);
    const auto fo = free_observables(spec, ro.theta, p.m, p.c);

    const auto f = boost_frame(spec, cfg, b.h, b.h * b.ht_ratio, b.time_samples);
    const auto dg = densities(f, nl);
    const std::size_t mid = f.t.n / 2;
    const auto tot = totals(dg, mid);
    const double v = b.beta * p.c;

    Result res;
    auto rel = [](double num, double ref) { return ref != 0.0 ? std::fabs(num / ref - 1.0) : std::fabs(num); };
    Csv t({"quantity", "numeric", "closed_form", "rel_err"});
    const std::vector<std::tuple<std::string, double, double>> q{
        {"charge", tot.charge, p.q}, {"energy", tot.energy, fo.energy},
        {"momentum_x", tot.momentum[0], fo.momentum[0]}, {"current_x", tot.current[0], p.q * v}};
    json totals_json = json::object();
    for (const auto& [name, num, ref] : q) {
        t.row(name, num, ref, rel(num, ref));
        totals_json[name] = {{"numeric", num}, {"closed_form", ref}, {"rel_err", rel(num, ref)}};
        res.check_le(name + "_rel_err", rel(num, ref), b.tolerance);
    }
    res.check_true("einstein_relation_exact", fo.energy == fo.mass * p.c * p.c);

    // Second-order contract: halving every spacing divides each residual by about four.
    Csv cons({"h", "continuity", "energy", "momentum"});
    const auto r1 = conservation_residuals(f, nl);
    cons.row(b.h, r1.continuity, r1.energy, r1.momentum);
    json cj = {{"h", b.h}, {"continuity", r1.continuity}, {"energy", r1.energy}, {"momentum", r1.momentum}};
    if (b.dim == 1) {
        const auto r2 = conservation_residuals(
            boost_frame(spec, cfg, b.h / 2, b.h * b.ht_ratio / 2, 2 * b.time_samples - 1), nl);
        cons.row(b.h / 2, r2.continuity, r2.energy, r2.momentum);
        const double ratios[3] = {r1.continuity / r2.continuity, r1.energy / r2.energy, r1.momentum / r2.momentum};
        const char* names[3] = {"continuity", "energy", "momentum"};
        cj["ratios"] = json::object();
        for (int i = 0; i < 3; ++i) {
            cj["ratios"][names[i]] = ratios[i];
            res.checks.push_back({std::string("order_") + names[i], ratios[i], b.order_lo,
                                  ratios[i] >= b.order_lo && ratios[i] <= b.order_hi});
        }
    }

    res.report["beta"] = b.beta;
    res.report["dim"] = b.dim;
    res.report["gamma"] = kinematics(spec, p.c).gamma;
    res.report["theta"] = ro.theta;
    res.report["mass"] = fo.mass;
    res.report["rest_mass"] = fo.rest_mass;
    res.report["totals"] = totals_json;
    res.report["conservation"] = cj;
    res.csv.emplace_back("boost_totals.csv", t.str());
    res.csv.emplace_back("boost_conservation.csv", cons.str());
    std::ostringstream d, fld;
    write_density_csv(d, dg, mid);
    write_field_csv(fld, f);
    res.csv.emplace_back("boost_densities.csv", d.str());
    res.csv.emplace_back("boost_field.csv", fld.str());
    return res;
}

// ---------------------------------------------------------------------------------------------

json row_json(const NewtonEinsteinRow& ne)
{
    return {{"energy_dev", finite_or_null(ne.energy_dev)},       {"charge_dev", finite_or_null(ne.charge_dev)},
            {"ergo_dev", finite_or_null(ne.ergo_dev)},           {"newton", finite_or_null(ne.newton)},
            {"m0_mean", finite_or_null(ne.m0_mean)},             {"m0_flatness", finite_or_null(ne.m0_flatness)},
            {"energy_defect", finite_or_null(ne.energy_defect)}, {"charge_drift", finite_or_null(ne.charge_drift)},
            {"flux_bound", finite_or_null(ne.flux_bound)},       {"rho_crosscheck", finite_or_null(ne.rho_crosscheck)}};
}

json row_json(const ConcentrationRow& c)
{
    return {{"interior", c.interior},
            {"boundary", c.boundary},
            {"energy_min", c.energy_min},
            {"potential_bound", c.potential_bound},
            {"potential_gap", c.potential_gap}};
}

json verdict_json(const ConcentrationReport& r)
{
    return {{"bounded", r.bounded},
            {"boundary_decay", r.boundary_decay},
            {"energy_floor", r.energy_floor},
            {"potential_bounded", r.potential_bounded},
            {"potential_converges", r.potential_converges},
            {"all", r.all()}};
}

Result cmd_accelerate(const RunConfig& cfg)
{
    const auto nl = cfg.nonlinearity();
    const auto tr = trajectory_of(cfg);
    const auto sc = cfg.sweep_config();
    const auto sp = scale_point(cfg.zetas.front(), cfg.one_plus, cfg.two_plus, cfg.delta, cfg.phys.m, cfg.phys.c, cfg.mode);
    const auto ctx = make_context(tr, sp, cfg.grid.t_lo, cfg.grid.t_hi, cfg.gamma0, cfg.numerics, cfg.phys.q);
    const auto sol = assemble_field(ctx, cfg.grid, sc.phi0);

    const auto kg = kg_residual(sol, nl);
    const auto kg_cut = cfg.ablation ? kg_residual(sol, nl, false) : ResidualNorms{nan_value, nan_value};
    const double shape = shape_deviation(sol);
    const auto obs = restricted_quantities(sol);
    const auto ne = newton_einstein_row(obs, tr, sp.m, cfg.phys.q);
    const auto conc = concentration_row(sol);
    double sup_phi = 0.0, sup_phib = 0.0, slope_max = 0.0;
    const double unit = sol.par.m * sol.par.c * sol.par.c / sol.par.q;
    for (std::size_t k = 0; k < sol.patches.size(); ++k) {
        const auto& pa = sol.patches[k];
        for (double v : pa.phi[pa.center()]) sup_phi = std::max(sup_phi, std::fabs(v));
        for (double v : reduced_potential(sol, k)[2]) sup_phib = std::max(sup_phib, unit * std::fabs(v));
        slope_max = std::max(slope_max, std::fabs(sol.phi_slope[k]));
    }

    Result res;
    res.report["trajectory"] = tr.describe();
    res.report["mode"] = mode_name(cfg.mode);
    res.report["zeta"] = sp.zeta;
    res.report["a"] = sp.a;
    res.report["theta_bar"] = sp.theta_bar;
    res.report["R"] = sp.R;
    res.report["sup_Phi"] = sup_phi;
    res.report["sup_phi_b"] = sup_phib;
    res.report["phi_ac_slope_max"] = slope_max;
    res.report["kg_residual"] = {{"linf", kg.linf}, {"l2", kg.l2}};
    res.report["kg_residual_ablated"] = {{"linf", finite_or_null(kg_cut.linf)}, {"l2", finite_or_null(kg_cut.l2)}};
    res.report["shape_deviation"] = shape;
    res.report["eminmc"] = obs.eminmc;
    res.report["newton_einstein"] = row_json(ne);
    res.report["concentration"] = row_json(conc);
    res.check_le("kg_residual_linf", kg.linf, cfg.kg_residual_max);
    res.check_le("shape_deviation", shape, cfg.shape_max);

    Csv o({"t", "r_hat", "ergocenter", "energy", "charge", "grad_phi", "boundary_flux", "ergo_identity", "s_phase"});
    for (std::size_t k = 0; k < obs.t.size(); ++k)
        o.row(obs.t[k], obs.r_hat[k], obs.ergocenter[k], obs.energy[k], obs.charge[k], obs.grad_phi[k],
              obs.boundary_flux[k], obs.ergo_identity[k], sol.s_phase[k]);
    std::ostringstream fld;
    write_assembled_csv(fld, sol);
    res.csv.emplace_back("accelerate_observables.csv", o.str());
    res.csv.emplace_back("accelerate_field.csv", fld.str());
    return res;
}

// ---------------------------------------------------------------------------------------------

Result cmd_sweep(const RunConfig& cfg)
{
    const auto nl = cfg.nonlinearity();
    const auto tr = trajectory_of(cfg);
    const auto rep = convergence_sweep(tr, cfg.zetas, cfg.sweep_config(), nl);

    Result res;
    Csv t({"zeta", "a", "theta_bar", "R", "ok", "sup_Phi", "sup_phi_b", "kg_linf", "kg_l2", "kg_ablated_linf", "shape",
           "energy_dev", "charge_dev", "ergo_dev", "newton", "m0_mean", "m0_flatness", "energy_defect", "charge_drift",
           "flux_bound", "rho_crosscheck", "eminmc", "interior", "boundary", "energy_min", "potential_bound",
           "potential_gap"});
    json rows = json::array();
    std::vector<double> edev, newton;
    for (const auto& r : rep.rows) {
        const auto& ne = r.ne;
        const auto& c = r.conc;
        t.row(r.sp.zeta, r.sp.a, r.sp.theta_bar, r.sp.R, int(r.ok()), r.sup_phi, r.sup_phib, r.kg.linf, r.kg.l2,
              r.kg_ablated.linf, r.shape, ne.energy_dev, ne.charge_dev, ne.ergo_dev, ne.newton, ne.m0_mean,
              ne.m0_flatness, ne.energy_defect, ne.charge_drift, ne.flux_bound, ne.rho_crosscheck, r.eminmc, c.interior,
              c.boundary, c.energy_min, c.potential_bound, c.potential_gap);
        json j = {{"zeta", r.sp.zeta}, {"a", r.sp.a}, {"theta_bar", r.sp.theta_bar}, {"R", r.sp.R}, {"ok", r.ok()}};
        if (!r.ok()) {
            j["error"] = r.error;
            res.check_true("row_ok" + zeta_tag(r.sp.zeta), false);
        } else {
            j["sup_Phi"] = r.sup_phi;
            j["sup_phi_b"] = r.sup_phib;
            j["kg_residual"] = {{"linf", r.kg.linf}, {"l2", r.kg.l2}};
            j["kg_ablated_linf"] = finite_or_null(r.kg_ablated.linf);
            j["shape_deviation"] = r.shape;
            j["eminmc"] = r.eminmc;
            j["newton_einstein"] = row_json(ne);
            j["concentration"] = row_json(c);
            res.check_le("kg_residual_linf" + zeta_tag(r.sp.zeta), r.kg.linf, cfg.kg_residual_max);
            res.check_le("ergo_dev_over_2R" + zeta_tag(r.sp.zeta), ne.ergo_dev / (2.0 * r.sp.R), 1.0);
            edev.push_back(ne.energy_dev);
            newton.push_back(ne.newton);
        }
        rows.push_back(j);
    }
    const auto& s = rep.slopes;
    res.report["trajectory"] = rep.trajectory;
    res.report["mode"] = mode_name(rep.mode);
    res.report["rows"] = rows;
    res.report["slopes"] = {{"phi_vs_zeta", finite_or_null(s.phi_vs_zeta)},
                            {"phib_vs_zeta", finite_or_null(s.phib_vs_zeta)},
                            {"ergo_vs_R", finite_or_null(s.ergo_vs_R)},
                            {"energy_vs_zeta", finite_or_null(s.energy_vs_zeta)},
                            {"newton_vs_zeta", finite_or_null(s.newton_vs_zeta)}};
    res.report["energy_inf_t0"] = finite_or_null(rep.energy_inf_t0);
    res.report["rho_inf"] = finite_or_null(rep.rho_inf);
    res.report["concentration"] = rep.concentration ? verdict_json(*rep.concentration) : json(nullptr);
    if (edev.size() >= 2) {
        res.check_true("energy_dev_decreasing", numeric::strictly_decreasing(edev));
        res.check_true("newton_decreasing", numeric::strictly_decreasing(newton));
    }
    res.check_true("concentration", rep.concentration && rep.concentration->all());
    res.csv.emplace_back("sweep_rows.csv", t.str());
    return res;
}

// ---------------------------------------------------------------------------------------------

Result cmd_verify(const RunConfig& cfg)
{
    require(!cfg.verify.input.empty(), ErrorKind::config, "[verify] input is required");
    std::ifstream in(cfg.verify.input);
    require(bool(in), ErrorKind::config, "cannot open field export '" + cfg.verify.input + "'");
    const auto f = read_field_csv(in, cfg.verify.dim, cfg.phys);
    const auto nl = cfg.nonlinearity();
    const auto r = conservation_residuals(f, nl);
    const auto dg = densities(f, nl);
    const auto first = totals(dg, 1), last = totals(dg, f.t.n - 2);

    Result res;
    Csv t({"quantity", "value"});
    const std::vector<std::pair<std::string, double>> q{{"continuity", r.continuity},
                                                        {"energy", r.energy},
                                                        {"momentum", r.momentum},
                                                        {"charge_drift", last.charge - first.charge},
                                                        {"energy_drift", last.energy - first.energy}};
    for (const auto& [name, v] : q) {
        t.row(name, v);
        res.report[name] = v;
    }
    res.report["samples"] = {{"t", f.t.n}, {"x", f.x[0].n}, {"y", f.x[1].n}, {"z", f.x[2].n}};
    res.check_le("continuity", r.continuity, cfg.verify.residual_max);
    res.check_le("energy", r.energy, cfg.verify.residual_max);
    res.check_le("momentum", r.momentum, cfg.verify.residual_max);
    res.csv.emplace_back("verify.csv", t.str());
    return res;
}

// ---------------------------------------------------------------------------------------------

Result cmd_check_family(const RunConfig& cfg)
{
    const auto& fc = cfg.family_check;
    const auto gs = make_ground_state(fc.profile, fc.p);
    const auto nl = nonlinearity_from_ground_state(gs, Mode::nonlinear, cfg.holder_alpha);
    const auto fam = synthetic_family(gs, fc.N, fc.alpha, fc.thetas, fc.a_power, fc.zeta_over_a);
    const auto rows = synthetic_rows(fam, nl, fc.beta_max, cfg.phys.m * cfg.phys.c * cfg.phys.c);
    const auto rep = concentration_checks(rows, to_string(fc.profile));
    const bool anthen = anthen_holds(fam);

    Result res;
    Csv t({"theta", "a", "zeta", "interior", "boundary", "energy_min", "anthen"});
    json jr = json::array();
    for (const auto& r : rows) {
        t.row(r.theta, r.a, r.zeta, r.interior, r.boundary, r.energy_min, r.anthen);
        auto j = row_json(r);
        j["theta"] = r.theta;
        j["a"] = r.a;
        j["zeta"] = r.zeta;
        j["anthen"] = r.anthen;
        jr.push_back(j);
    }
    res.report["profile"] = to_string(fc.profile);
    res.report["N"] = fc.N;
    res.report["alpha"] = fc.alpha;
    res.report["a_power"] = fc.a_power;
    res.report["anthen_holds"] = anthen;
    res.report["verdicts"] = verdict_json(rep);
    res.report["rows"] = jr;
    res.report["expect"] = fc.expect_pass ? "pass" : "fail";
    if (fc.expect_pass)
        res.check_true("family_passes", rep.all() && anthen);
    else
        res.check_true("boundary_decay_fails", !rep.boundary_decay && !anthen);
    res.csv.emplace_back("family_rows.csv", t.str());
    return res;
}

using Handler = Result (*)(const RunConfig&);

const std::map<std::string, Handler>& handlers()
{
    static const std::map<std::string, Handler> h{
        {"rest-state", cmd_rest_state}, {"boost", cmd_boost},   {"accelerate", cmd_accelerate},
        {"sweep", cmd_sweep},           {"verify", cmd_verify}, {"check-family", cmd_check_family}};
    return h;
}

void write_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream os(path, std::ios::binary);
    os << text;
    if (!os) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

const std::vector<std::string>& command_names()
{
    static const std::vector<std::string> names{"rest-state", "boost", "accelerate", "sweep", "verify", "check-family"};
    return names;
}

int run_command(const std::string& name, const RunConfig& cfg, const OutputOptions& out, std::ostream& log)
{
    const auto it = handlers().find(name);
    if (it == handlers().end()) {
        log << "error: unknown subcommand '" << name << "'\n";
        return exit_config;
    }
    Result res;
    try {
        res = it->second(cfg);
    } catch (const Error& e) {
        log << "error (" << kind_name(e.kind()) << "): " << e.what() << '\n';
        return e.kind() == ErrorKind::config ? exit_config : exit_construction;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return exit_internal;
    }

    json checks = json::array();
    bool all = true;
    for (const auto& c : res.checks) {
        checks.push_back({{"name", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"pass", c.pass}});
        all = all && c.pass;
    }
    json doc = {{"command", name}, {"config", std::filesystem::path(cfg.source).filename().string()}};
    doc.update(res.report);
    doc["checks"] = checks;
    doc["pass"] = all;

    try {
        std::filesystem::create_directories(out.dir);
        std::string stem = name;
        std::replace(stem.begin(), stem.end(), '-', '_');
        if (out.json) write_file(out.dir / (stem + ".json"), doc.dump(2) + "\n");
        if (out.csv)
            for (const auto& [file, text] : res.csv) write_file(out.dir / file, text);
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return exit_internal;
    }

    for (const auto& c : res.checks)
        log << (c.pass ? "  ok    " : "  FAIL  ") << c.name << " = " << c.value << " (threshold " << c.threshold
            << ")\n";
    log << name << ": " << (all ? "all checks passed" : "some checks failed") << '\n';
    return (out.assert_mode && !all) ? exit_assert : exit_ok;
}

// ---------------------------------------------------------------------------------------------

void write_field_csv(std::ostream& os, const FieldFrame& f)
{
    os << "t,x,y,z,re_psi,im_psi,phi\n" << std::setprecision(17);
    for (std::size_t it = 0; it < f.t.n; ++it)
        for (std::size_t i = 0; i < f.x[0].n; ++i)
            for (std::size_t j = 0; j < f.x[1].n; ++j)
                for (std::size_t k = 0; k < f.x[2].n; ++k) {
                    const std::size_t idx = f.index(it, i, j, k);
                    os << f.t.at(it) << ',' << f.x[0].at(i) << ',' << (f.dim == 3 ? f.x[1].at(j) : 0.0) << ','
                       << (f.dim == 3 ? f.x[2].at(k) : 0.0) << ',' << f.psi[idx].real() << ',' << f.psi[idx].imag()
                       << ',' << f.phi[idx] << '\n';
                }
}

namespace {

/// Uniform axis through sorted distinct coordinates; rejects irregular spacing.
Axis axis_from(std::vector<double> v, const char* name)
{
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end(), [](double a, double b) { return std::fabs(a - b) <= 1e-12 * (1 + std::fabs(a)); }),
            v.end());
    if (v.size() == 1) return Axis{v[0], 1.0, 1};
    const double h = (v.back() - v.front()) / double(v.size() - 1);
    for (std::size_t i = 0; i < v.size(); ++i)
        require(std::fabs(v[i] - (v.front() + h * double(i))) <= 1e-9 * h, ErrorKind::shape,
                std::string("field export: ") + name + " samples are not uniform");
    return Axis{v.front(), h, v.size()};
}

}  // namespace

FieldFrame read_field_csv(std::istream& is, int dim, const PhysParams& par)
{
    std::string line;
    require(bool(std::getline(is, line)), ErrorKind::shape, "field export is empty");
    require(line.rfind("t,x,y,z,re_psi,im_psi,phi", 0) == 0, ErrorKind::shape, "field export: unexpected header");
    std::vector<std::array<double, 7>> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::array<double, 7> r{};
        std::istringstream ls(line);
        for (int c = 0; c < 7; ++c) {
            std::string tok;
            require(bool(std::getline(ls, tok, ',')), ErrorKind::shape, "field export: short row");
            try {
                r[std::size_t(c)] = std::stod(tok);
            } catch (const std::exception&) {
                fail(ErrorKind::shape, "field export: not a number: '" + tok + "'");
            }
        }
        rows.push_back(r);
    }
    std::array<std::vector<double>, 4> coord;
    for (const auto& r : rows)
        for (int c = 0; c < 4; ++c) coord[std::size_t(c)].push_back(r[std::size_t(c)]);
    const Axis t = axis_from(coord[0], "t");
    std::array<Axis, 3> x{axis_from(coord[1], "x"), axis_from(coord[2], "y"), axis_from(coord[3], "z")};
    if (dim == 1) {
        require(x[1].n == 1 && x[2].n == 1, ErrorKind::shape, "field export: 1D frames need constant y and z");
        x[1] = x[2] = Axis{};
    }
    auto f = make_frame(dim, t, x, par);
    require(rows.size() == f.size(), ErrorKind::shape, "field export: row count does not fill the grid");
    auto at = [](const Axis& a, double v) { return std::size_t(std::lround((v - a.lo) / a.h)); };
    for (const auto& r : rows) {
        const std::size_t idx = f.index(at(t, r[0]), at(x[0], r[1]), dim == 3 ? at(x[1], r[2]) : 0,
                                        dim == 3 ? at(x[2], r[3]) : 0);
        f.psi[idx] = cplx(r[4], r[5]);
        f.phi[idx] = r[6];
    }
    f.validate();
    return f;
}

}  // namespace kgconc::app
