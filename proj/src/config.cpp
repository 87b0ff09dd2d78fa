#include "config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <filesystem>
#include <map>
#include <set>
#include <sstream>

namespace kgconc::app {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>> known_keys{
    {"physics", {"m", "c", "q", "chi", "a"}},
    {"nonlinearity", {"family", "p", "mode", "alpha"}},
    {"rest", {"states", "r_max", "grid", "shoot_radius", "expect_xi", "xi_tol", "residual_max"}},
    {"boost", {"beta", "dim", "h", "ht_ratio", "time_samples", "half_width", "tolerance", "order_lo", "order_hi"}},
    {"trajectory", {"kind", "beta0", "beta1", "k", "coeffs", "r0"}},
    {"scale", {"zeta", "one_plus", "two_plus", "delta", "gamma0"}},
    {"window", {"t_lo", "t_hi", "time_samples", "z_per_unit", "patch_half"}},
    {"numerics",
     {"ode_rel_tol", "ode_abs_tol", "ode_initial_step", "ode_min_step", "ode_max_steps", "event_tol", "h_tau_factor",
      "quad_rel_tol", "root_tol", "fan_size", "fan_margin"}},
    {"potential", {"phi0"}},
    {"checks", {"ablation", "kg_residual_max", "shape_max"}},
    {"family", {"profile", "p", "N", "alpha", "thetas", "a_power", "zeta_over_a", "beta_max", "expect"}},
    {"verify", {"input", "dim", "residual_max"}},
};

[[noreturn]] void bad(const std::string& msg) { fail(ErrorKind::config, msg); }

std::vector<double> parse_list(const std::string& key, const std::string& text)
{
    std::string s = text;
    for (char& ch : s)
        if (ch == ',' || ch == ';') ch = ' ';
    std::istringstream is(s);
    std::vector<double> out;
    std::string tok;
    while (is >> tok) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != tok.size()) bad(key + ": not a number: '" + tok + "'");
        out.push_back(v);
    }
    return out;
}

/// Typed reader over one section; missing keys keep the default.
class Section {
public:
    Section(const pt::ptree& root, std::string name) : name_(std::move(name))
    {
        if (auto c = root.get_child_optional(name_)) node_ = &*c;
    }

    template <class T>
    void get(const std::string& key, T& out) const
    {
        const auto s = raw(key);
        if (!s) return;
        if constexpr (std::is_same_v<T, std::string>) {
            out = *s;
        } else if constexpr (std::is_same_v<T, bool>) {
            if (*s == "true" || *s == "1" || *s == "yes" || *s == "on")
                out = true;
            else if (*s == "false" || *s == "0" || *s == "no" || *s == "off")
                out = false;
            else
                bad(where(key) + ": expected a boolean, got '" + *s + "'");
        } else {
            const auto v = parse_list(where(key), *s);
            if (v.size() != 1) bad(where(key) + ": expected one number, got '" + *s + "'");
            if constexpr (std::is_integral_v<T>) {
                if (v[0] != std::floor(v[0]) || v[0] < double(std::numeric_limits<T>::min()) ||
                    v[0] > double(std::numeric_limits<T>::max()))
                    bad(where(key) + ": expected an integer, got '" + *s + "'");
                out = T(v[0]);
            } else {
                out = v[0];
            }
        }
    }

    void list(const std::string& key, std::vector<double>& out) const
    {
        if (const auto s = raw(key)) {
            out = parse_list(where(key), *s);
            if (out.empty()) bad(where(key) + ": empty list");
        }
    }

private:
    std::optional<std::string> raw(const std::string& key) const
    {
        if (!node_) return std::nullopt;
        const auto v = node_->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
        if (!v) return std::nullopt;
        std::string s = *v;
        s.erase(0, s.find_first_not_of(" \t"));
        s.erase(s.find_last_not_of(" \t") + 1);
        return s;
    }
    std::string where(const std::string& key) const { return "[" + name_ + "] " + key; }

    std::string name_;
    const pt::ptree* node_ = nullptr;
};

Family parse_family(const std::string& key, const std::string& s)
{
    if (s == "gaussian" || s == "logarithmic") return Family::gaussian;
    if (s == "power_law") return Family::power_law;
    if (s == "exponential") return Family::exponential;
    bad(key + ": unknown family '" + s + "' (gaussian, power_law, exponential)");
}

void check(bool ok, const std::string& msg)
{
    if (!ok) bad(msg);
}

}  // namespace

Trajectory TrajectorySpec::build(double c) const
{
    if (kind == "constant") return Trajectory::constant(beta0, c, r0);
    if (kind == "tanh") return Trajectory::tanh_profile(beta0, beta1, k, c, r0);
    if (kind == "polynomial") return Trajectory::polynomial(coeffs, c, r0);
    bad("[trajectory] kind: unknown '" + kind + "' (constant, tanh, polynomial)");
}

SweepConfig RunConfig::sweep_config() const
{
    SweepConfig s;
    s.one_plus = one_plus;
    s.two_plus = two_plus;
    s.delta = delta;
    s.m = phys.m;
    s.c = phys.c;
    s.q = phys.q;
    s.mode = mode;
    s.gamma0 = gamma0;
    s.grid = grid;
    s.opt = numerics;
    s.ablation = ablation;
    if (!(phi0.size() == 1 && phi0[0] == 0.0)) {
        s.phi0 = [c = phi0](double t) {
            double v = 0.0;
            for (std::size_t i = c.size(); i-- > 0;) v = v * t + c[i];
            return v;
        };
    }
    return s;
}

RunConfig load_config(const std::string& path)
{
    pt::ptree root;
    try {
        pt::read_ini(path, root);
    } catch (const pt::ini_parser_error& e) {
        bad("cannot read config: " + std::string(e.what()));
    }
    for (const auto& [sec, node] : root) {
        const auto it = known_keys.find(sec);
        if (it == known_keys.end()) bad("unknown section [" + sec + "]");
        if (node.empty() && !node.data().empty()) bad("key '" + sec + "' outside any section");
        for (const auto& kv : node)
            if (!it->second.count(kv.first)) bad("unknown key '" + kv.first + "' in [" + sec + "]");
    }

    RunConfig cfg;
    cfg.source = path;

    const Section phys(root, "physics");
    phys.get("m", cfg.phys.m);
    phys.get("c", cfg.phys.c);
    phys.get("q", cfg.phys.q);
    phys.get("chi", cfg.phys.chi);
    phys.get("a", cfg.phys.a);

    const Section nl(root, "nonlinearity");
    std::string s;
    nl.get("family", s);
    if (!s.empty()) cfg.family = parse_family("[nonlinearity] family", s);
    nl.get("p", cfg.family_p);
    s.clear();
    nl.get("mode", s);
    if (s == "linear")
        cfg.mode = Mode::linear;
    else if (!s.empty() && s != "nonlinear")
        bad("[nonlinearity] mode: expected nonlinear or linear, got '" + s + "'");
    nl.get("alpha", cfg.holder_alpha);

    const Section rest(root, "rest");
    rest.get("states", cfg.rest.states);
    rest.get("r_max", cfg.rest.solver.r_max);
    rest.get("grid", cfg.rest.solver.grid);
    rest.get("shoot_radius", cfg.rest.solver.shoot_radius);
    rest.list("expect_xi", cfg.rest.expect_xi);
    rest.get("xi_tol", cfg.rest.xi_tol);
    rest.get("residual_max", cfg.rest.residual_max);

    const Section bo(root, "boost");
    bo.get("beta", cfg.boost.beta);
    bo.get("dim", cfg.boost.dim);
    bo.get("h", cfg.boost.h);
    bo.get("ht_ratio", cfg.boost.ht_ratio);
    bo.get("time_samples", cfg.boost.time_samples);
    bo.get("half_width", cfg.boost.half_width);
    bo.get("tolerance", cfg.boost.tolerance);
    bo.get("order_lo", cfg.boost.order_lo);
    bo.get("order_hi", cfg.boost.order_hi);

    const Section tr(root, "trajectory");
    tr.get("kind", cfg.trajectory.kind);
    tr.get("beta0", cfg.trajectory.beta0);
    tr.get("beta1", cfg.trajectory.beta1);
    tr.get("k", cfg.trajectory.k);
    tr.list("coeffs", cfg.trajectory.coeffs);
    tr.get("r0", cfg.trajectory.r0);

    const Section sc(root, "scale");
    sc.list("zeta", cfg.zetas);
    sc.get("one_plus", cfg.one_plus);
    sc.get("two_plus", cfg.two_plus);
    sc.get("delta", cfg.delta);
    sc.get("gamma0", cfg.gamma0);

    const Section win(root, "window");
    win.get("t_lo", cfg.grid.t_lo);
    win.get("t_hi", cfg.grid.t_hi);
    win.get("time_samples", cfg.grid.time_samples);
    win.get("z_per_unit", cfg.grid.z_per_unit);
    win.get("patch_half", cfg.grid.patch_half);

    const Section nu(root, "numerics");
    nu.get("ode_rel_tol", cfg.numerics.ode.rel_tol);
    nu.get("ode_abs_tol", cfg.numerics.ode.abs_tol);
    nu.get("ode_initial_step", cfg.numerics.ode.initial_step);
    nu.get("ode_min_step", cfg.numerics.ode.min_step);
    nu.get("ode_max_steps", cfg.numerics.ode.max_steps);
    nu.get("event_tol", cfg.numerics.ode.event_tol);
    nu.get("h_tau_factor", cfg.numerics.h_tau_factor);
    nu.get("quad_rel_tol", cfg.numerics.quad_rel_tol);
    nu.get("root_tol", cfg.numerics.root_tol);
    nu.get("fan_size", cfg.numerics.fan_size);
    nu.get("fan_margin", cfg.numerics.fan_margin);

    Section(root, "potential").list("phi0", cfg.phi0);

    const Section ch(root, "checks");
    ch.get("ablation", cfg.ablation);
    ch.get("kg_residual_max", cfg.kg_residual_max);
    ch.get("shape_max", cfg.shape_max);

    const Section fa(root, "family");
    s.clear();
    fa.get("profile", s);
    if (!s.empty()) cfg.family_check.profile = parse_family("[family] profile", s);
    fa.get("p", cfg.family_check.p);
    fa.get("N", cfg.family_check.N);
    fa.get("alpha", cfg.family_check.alpha);
    fa.list("thetas", cfg.family_check.thetas);
    fa.get("a_power", cfg.family_check.a_power);
    fa.get("zeta_over_a", cfg.family_check.zeta_over_a);
    fa.get("beta_max", cfg.family_check.beta_max);
    s.clear();
    fa.get("expect", s);
    if (s == "fail")
        cfg.family_check.expect_pass = false;
    else if (!s.empty() && s != "pass")
        bad("[family] expect: expected pass or fail, got '" + s + "'");

    const Section ve(root, "verify");
    ve.get("input", cfg.verify.input);
    if (!cfg.verify.input.empty() && std::filesystem::path(cfg.verify.input).is_relative())
        cfg.verify.input = (std::filesystem::path(path).parent_path() / cfg.verify.input).string();
    ve.get("dim", cfg.verify.dim);
    ve.get("residual_max", cfg.verify.residual_max);

    validate(cfg);
    return cfg;
}

void validate(const RunConfig& cfg)
{
    const auto& p = cfg.phys;
    check(p.m > 0 && p.c > 0 && p.q > 0 && p.chi > 0 && p.a > 0, "[physics] m, c, q, chi and a must be positive");
    check(cfg.holder_alpha > 0 && cfg.holder_alpha < 1, "[nonlinearity] alpha must lie in (0, 1)");
    // Library gates (family exponents, exponents of the scale law, trajectory admissibility) are
    // re-raised as configuration errors.
    try {
        (void)cfg.ground_state();
        if (cfg.family_check.profile != Family::gaussian) (void)make_ground_state(cfg.family_check.profile, cfg.family_check.p);
        validate_exponents(cfg.one_plus, cfg.two_plus, cfg.delta);
        const auto tr = cfg.trajectory.build(p.c);
        check(cfg.grid.t_hi > cfg.grid.t_lo, "[window] t_hi must exceed t_lo");
        require_admissible(tr, cfg.grid.t_lo, cfg.grid.t_hi);
        (void)synthetic_family(make_ground_state(Family::gaussian), cfg.family_check.N, cfg.family_check.alpha,
                               cfg.family_check.thetas, cfg.family_check.a_power, cfg.family_check.zeta_over_a);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::config) throw;
        bad(e.what());
    }

    const auto& r = cfg.rest;
    check(r.states >= 1 && r.states <= 6, "[rest] states must lie in 1..6");
    check(r.solver.r_max > 0 && r.solver.grid >= 64 && r.solver.shoot_radius >= r.solver.r_max,
          "[rest] needs r_max > 0, grid >= 64 and shoot_radius >= r_max");
    check(r.xi_tol > 0 && r.residual_max > 0, "[rest] xi_tol and residual_max must be positive");
    check(r.expect_xi.empty() || int(r.expect_xi.size()) == r.states, "[rest] expect_xi needs one value per state");

    const auto& b = cfg.boost;
    check(std::fabs(b.beta) < 1, "[boost] |beta| must be below 1");
    check(b.dim == 1 || b.dim == 3, "[boost] dim must be 1 or 3");
    check(b.h > 0 && b.ht_ratio > 0 && b.half_width > 0, "[boost] h, ht_ratio and half_width must be positive");
    check(b.time_samples >= 3, "[boost] time_samples must be at least 3");
    check(b.tolerance > 0 && b.order_lo < b.order_hi, "[boost] tolerance must be positive and order_lo < order_hi");
    check(b.dim == 3 || cfg.mode == Mode::linear || cfg.family == Family::gaussian,
          "[boost] dim = 1 needs the gaussian (logarithmic) family");

    check(!cfg.zetas.empty(), "[scale] zeta list is empty");
    for (std::size_t i = 0; i < cfg.zetas.size(); ++i) {
        check(cfg.zetas[i] > 0 && cfg.zetas[i] < 1, "[scale] zeta values must lie in (0, 1)");
        check(i == 0 || cfg.zetas[i] < cfg.zetas[i - 1], "[scale] zeta values must strictly decrease");
    }
    check(cfg.gamma0 == 0.0 || cfg.gamma0 >= 1.0, "[scale] gamma0 must be 0 (off) or at least 1");

    check(cfg.grid.time_samples >= 5, "[window] time_samples must be at least 5");
    check(cfg.grid.z_per_unit >= 64, "[window] z_per_unit must be at least 64");
    check(cfg.grid.patch_half >= 4, "[window] patch_half must be at least 4");

    const auto& o = cfg.numerics;
    check(o.ode.rel_tol > 0 && o.ode.abs_tol > 0 && o.ode.initial_step > 0 && o.ode.min_step > 0 && o.ode.max_steps > 0 &&
              o.ode.event_tol > 0,
          "[numerics] ODE tolerances and step limits must be positive");
    check(o.h_tau_factor > 0 && o.quad_rel_tol > 0 && o.root_tol > 0, "[numerics] tolerances must be positive");
    check(o.fan_size >= 16 && o.fan_margin > 1, "[numerics] fan_size >= 16 and fan_margin > 1 required");
    check(cfg.kg_residual_max > 0 && cfg.shape_max > 0, "[checks] kg_residual_max and shape_max must be positive");

    const auto& f = cfg.family_check;
    check(f.beta_max >= 0 && f.beta_max < 1, "[family] beta_max must lie in [0, 1)");

    check(cfg.verify.dim == 1 || cfg.verify.dim == 3, "[verify] dim must be 1 or 3");
    check(cfg.verify.residual_max > 0, "[verify] residual_max must be positive");
}

}  // namespace kgconc::app
