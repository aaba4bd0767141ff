#include "qspec/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "qspec/darboux.hpp"
#include "qspec/oracle.hpp"

namespace qspec {

namespace {

using ojson = nlohmann::ordered_json;
constexpr double kPi = 3.14159265358979323846;

class Timer {
public:
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

private:
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

// uniform doubles from the raw 64-bit stream, identical on every standard library
class Rng {
public:
    explicit Rng(unsigned long long seed) : gen_(seed) {}
    double uniform(double lo, double hi) { return lo + (hi - lo) * double(gen_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 gen_;
};

ojson cjson(cplx z) { return ojson::array({z.real(), z.imag()}); }

double nearest(cplx z, const std::vector<cplx>& set) {
    double d = std::numeric_limits<double>::infinity();
    for (cplx w : set) d = std::min(d, std::abs(z - w));
    return d;
}

SpectrumOptions spectrum_options(const VerifyConfig& cfg) {
    SpectrumOptions o = cfg.spectrum;
    o.threads = cfg.threads;
    return o;
}

CriterionResult make(const char* id, const char* name, double limit = 0) {
    CriterionResult r;
    r.id = id;
    r.name = name;
    r.runtime_limit = limit;
    return r;
}

void finish(CriterionResult& r, bool numeric_pass, const Timer& t) {
    r.seconds = t.seconds();
    r.pass = numeric_pass && (r.runtime_limit <= 0 || r.seconds < r.runtime_limit);
}

double ratio_of(double coarse, double fine) { return fine > 0 ? coarse / fine : std::numeric_limits<double>::infinity(); }

cplx smallest_root(const SpectrumEngine& eng, cplx a, double cutoff) {
    FiberSolveResult f = eng.fiber_roots(a, cutoff);
    if (f.roots.empty()) throw std::runtime_error("empty fiber");
    auto it = std::min_element(f.roots.begin(), f.roots.end(),
                               [](const FiberRoot& x, const FiberRoot& y) { return std::abs(x.b) < std::abs(y.b); });
    return it->b;
}

struct Pipeline {
    ImmersionGrid g;
    ExtractedHolo eh;
    SpectrumEngine eng;
    ProlongedSection ps;
    DarbouxResult dr;
};

Pipeline pipeline(const VerifyConfig& cfg, int n, cplx a) {
    ImmersionGrid g = homogeneous_torus(kPi / 4, n, n, cfg.infinity_value);
    ExtractOptions xo;
    xo.N = cfg.N;
    ExtractedHolo eh = extract_holo(g, xo);
    SpectrumEngine eng(eh.hd, spectrum_options(cfg));
    cplx b = smallest_root(eng, a, cfg.cutoff);
    SpectrumSample s = eng.kernel_at({a, b});
    DarbouxOptions dopt;
    dopt.extract = xo;
    ProlongedSection ps = prolong(g, eh, section_from_kernel(eh, s, 0, dopt));
    DarbouxResult dr = darboux_transform(g, ps, dopt);
    return {std::move(g), std::move(eh), std::move(eng), std::move(ps), std::move(dr)};
}

CriterionResult c1_vacuum(const VerifyConfig& cfg) {
    CriterionResult r = make("1", "vacuum oracle equivalence", 5.0);
    r.relation = "<=";
    r.bound = 1e-10;
    Timer t;
    HomogeneousModel m{square_lattice(2 * kPi), 0, 0, std::nullopt};
    SpectrumEngine eng(m.holo(cfg.N), spectrum_options(cfg));
    std::vector<cplx> as;
    Rng rng(cfg.seed);
    for (int i = 0; i < cfg.vacuum_random_samples; ++i) as.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1));
    for (cplx a : {cplx(0, 0), cplx(0.5, 0), cplx(0, 0.5), cplx(-0.5, -0.5), cplx(0.5, -0.5)}) as.push_back(a);

    double worst = 0;
    int roots = 0, missing = 0, sheet_mismatch = 0, count_mismatch = 0;
    for (cplx a : as) {
        FiberSolveResult f = eng.fiber_roots(a, cfg.cutoff);
        OracleFiber wide = vacuum_fiber(m, a, cfg.cutoff, cfg.N + 2);
        OracleFiber inside = vacuum_fiber(m, a, cfg.cutoff, cfg.N);
        for (const FiberRoot& x : f.roots) worst = std::max(worst, nearest(x.b, wide.roots));
        std::vector<cplx> vals = f.values();
        for (cplx b : inside.roots)
            if (nearest(b, vals) > r.bound) ++missing;
        if (f.a_sheet != wide.a_sheet) ++sheet_mismatch;
        if (f.roots.size() != inside.roots.size()) ++count_mismatch;
        roots += int(f.roots.size());
    }
    r.measured = worst;
    r.details["samples"] = as.size();
    r.details["engine_roots"] = roots;
    r.details["missing_roots"] = missing;
    r.details["count_mismatches"] = count_mismatch;
    r.details["sheet_mismatches"] = sheet_mismatch;
    finish(r, worst <= r.bound && missing == 0 && sheet_mismatch == 0 && count_mismatch == 0, t);
    return r;
}

CriterionResult c2_homogeneous(const VerifyConfig& cfg) {
    CriterionResult r = make("2", "homogeneous oracle equivalence", 30.0);
    r.relation = "<=";
    r.bound = 1e-8;
    Timer t;
    Rng rng(cfg.seed + 1);
    const double margin = 0.8 * cfg.cutoff;
    const ModeIndex shifts[] = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
    double worst = 0;
    int compared = 0, unmatched = 0;
    ojson draws = ojson::array();
    for (int d = 0; d < cfg.homogeneous_draws; ++d) {
        cplx tau(rng.uniform(-0.5, 0.5), rng.uniform(0.8, 1.5));
        cplx c = std::polar(rng.uniform(0.05, 0.5), rng.uniform(0, 2 * kPi));
        cplx a(rng.uniform(-1, 1), rng.uniform(-1, 1));
        Lattice lat{cplx(2 * kPi, 0), 2 * kPi * tau};
        HomogeneousModel m{lat, c, 0, std::nullopt};
        if (d % 2 == 1) m.spin_shift = shifts[(d / 2) % 4];
        SpectrumEngine eng(m.holo(cfg.N), spectrum_options(cfg));
        FiberSolveResult f = eng.fiber_roots(a, cfg.cutoff);
        OracleFiber wide = homogeneous_fiber(m, a, cfg.cutoff, cfg.N + 2);
        OracleFiber inner = homogeneous_fiber(m, a, margin, cfg.N - 1);
        double dmax = 0;
        for (const FiberRoot& x : f.roots) {
            if (x.edge || std::abs(x.b) > margin) continue;
            dmax = std::max(dmax, nearest(x.b, wide.roots));
            ++compared;
        }
        std::vector<cplx> vals = f.values();
        for (cplx b : inner.roots) {
            double e = nearest(b, vals);
            if (e > r.bound) ++unmatched;
            dmax = std::max(dmax, e);
        }
        worst = std::max(worst, dmax);
        ojson row;
        row["tau"] = cjson(tau);
        row["c"] = cjson(c);
        row["a"] = cjson(a);
        row["spin_shift"] = m.spin_shift ? ojson::array({m.spin_shift->first, m.spin_shift->second}) : ojson();
        row["distance"] = dmax;
        draws.push_back(row);
    }
    r.measured = worst;
    r.details["compared"] = compared;
    r.details["unmatched_oracle_roots"] = unmatched;
    r.details["draws"] = draws;
    finish(r, worst <= r.bound && unmatched == 0 && compared > 0, t);
    return r;
}

const CollisionMarker* near_origin(const BranchSet& bs, CollisionKind kind, double radius) {
    const CollisionMarker* best = nullptr;
    for (const CollisionMarker& c : bs.collisions) {
        if (c.kind != kind) continue;
        double d = std::hypot(std::abs(c.a), std::abs(c.b));
        if (d <= radius && (!best || d < std::hypot(std::abs(best->a), std::abs(best->b)))) best = &c;
    }
    return best;
}

ojson collision_json(const CollisionMarker* c) {
    if (!c) return ojson();
    ojson j;
    j["a"] = cjson(c->a);
    j["b"] = cjson(c->b);
    j["kind"] = to_string(c->kind);
    j["gap"] = c->gap;
    j["local_branches"] = c->local_branches;
    j["origin"] = c->origin;
    return j;
}

Rect square_window(double w) { return {-w, w, -w, w}; }

CriterionResult c3_handle(const VerifyConfig& cfg) {
    CriterionResult r = make("3", "handle resolution", 10.0);
    r.relation = ">=";
    r.bound = std::abs(cfg.handle_c);
    Timer t;
    const Lattice lat = square_lattice(2 * kPi);
    const Rect win = square_window(cfg.handle_half_width);
    const double radius = 0.5 * cfg.handle_half_width;
    BranchSet vac = scan(constant_q(lat, 0, cfg.N), win, cfg.handle_samples, cfg.cutoff, spectrum_options(cfg));
    BranchSet hq = scan(constant_q(lat, cfg.handle_c, cfg.N), win, cfg.handle_samples, cfg.cutoff, spectrum_options(cfg));
    const CollisionMarker* dp = near_origin(vac, CollisionKind::DoublePoint, radius);
    const CollisionMarker* handle = near_origin(hq, CollisionKind::Handle, radius);
    const CollisionMarker* stray = near_origin(hq, CollisionKind::DoublePoint, radius);
    r.measured = handle ? handle->gap : 0;
    r.details["vacuum_double_point"] = collision_json(dp);
    r.details["handle"] = collision_json(handle);
    r.details["double_point_in_q_scan"] = stray != nullptr;
    bool ok = dp && handle && !stray && handle->local_branches == 2 && handle->gap >= r.bound;
    finish(r, ok, t);
    return r;
}

CriterionResult c4_rho(const VerifyConfig& cfg) {
    CriterionResult r = make("4", "rho symmetry of scanned samples");
    r.relation = "<=";
    r.bound = 1e-8;
    Timer t;
    const Lattice lat = square_lattice(2 * kPi);
    const SpectrumOptions so = spectrum_options(cfg);
    struct Case {
        const char* name;
        HoloData hd;
        Rect win;
        int samples;
    };
    std::vector<Case> cases;
    cases.push_back({"vacuum", constant_q(lat, 0, cfg.N), square_window(cfg.handle_half_width), cfg.handle_samples});
    cases.push_back({"constant_q", constant_q(lat, cfg.handle_c, cfg.N), square_window(cfg.generic_half_width),
                     cfg.generic_samples});
    ExtractOptions xo;
    xo.N = cfg.N;
    cases.push_back({"clifford", extract_holo(homogeneous_torus(kPi / 4, cfg.grid_coarse, cfg.grid_coarse, cfg.infinity_value), xo).hd,
                     square_window(cfg.clifford_scan_half_width), cfg.clifford_scan_samples});
    double worst = 0;
    bool all_checked = true;
    for (const Case& c : cases) {
        SpectrumEngine eng(c.hd, so);
        BranchSet bs = eng.scan(c.win, c.samples, cfg.cutoff);
        RhoClosureReport rep = rho_closure(eng, bs.samples, cfg.cutoff);
        worst = std::max(worst, rep.max_defect);
        all_checked = all_checked && rep.checked > 0;
        ojson row;
        row["samples"] = bs.samples.size();
        row["checked"] = rep.checked;
        row["via_sheet"] = rep.via_sheet;
        row["max_defect"] = rep.max_defect;
        r.details[c.name] = row;
    }
    r.measured = worst;
    finish(r, worst <= r.bound && all_checked, t);
    return r;
}

CriterionResult c5_willmore(const VerifyConfig& cfg) {
    CriterionResult r = make("5", "Clifford Willmore energy", 10.0);
    r.relation = "<=";
    r.bound = 0.01;
    Timer t;
    ImmersionGrid g = homogeneous_torus(kPi / 4, cfg.grid_fine, cfg.grid_fine, cfg.infinity_value);
    const double w_classical = classical_willmore(g);
    ExtractOptions xo;
    xo.N = cfg.N;
    const double w_bundle = willmore_energy(extract_holo(g, xo).hd);
    const double target = 2 * kPi * kPi;
    const double rel = std::abs(w_classical - target) / target;
    const double rel_identity = std::abs(w_classical - w_bundle) / target;
    r.measured = rel;
    r.details["classical"] = w_classical;
    r.details["bundle"] = w_bundle;
    r.details["two_pi_squared"] = target;
    r.details["identity_defect"] = rel_identity;
    r.details["identity_bound"] = 0.02;
    finish(r, rel <= r.bound && rel_identity <= 0.02, t);
    return r;
}

CriterionResult c6_trivial_kernel(const VerifyConfig& cfg) {
    CriterionResult r = make("6", "trivial representation kernel");
    r.relation = "==";
    r.bound = 4;
    Timer t;
    ImmersionGrid g = homogeneous_torus(kPi / 4, cfg.grid_fine, cfg.grid_fine, cfg.infinity_value);
    ExtractOptions xo;
    xo.N = cfg.N;
    SpectrumEngine eng(extract_holo(g, xo).hd, spectrum_options(cfg));
    SpectrumSample s = eng.kernel_at({0, 0});
    const double tol = cfg.spectrum.kernel_tol * eng.operator_scale(0);
    const double fifth = s.smallest.size() > 4 ? s.smallest[4] : 0;
    r.measured = s.kernel_dim;
    ojson sv = ojson::array();
    for (double x : s.smallest) sv.push_back(x);
    r.details["singular_values"] = sv;
    r.details["tolerance"] = tol;
    r.details["fifth_over_tolerance"] = fifth / tol;
    finish(r, s.kernel_dim == 4 && fifth >= 10 * tol, t);
    return r;
}

bool generic_point(const BranchPoint& p, const BranchSet& bs, double margin) {
    if (p.edge || p.flag != "ok" || std::abs(p.b) > margin) return false;
    for (const CollisionMarker& c : bs.collisions)
        if (std::hypot(std::abs(p.a - c.a), std::abs(p.b - c.b)) < bs.step) return false;
    for (const SheetMarker& s : bs.sheets)
        if (std::abs(p.a - s.a) < bs.step) return false;
    for (const BranchPoint& q : bs.samples)
        if (&q != &p && q.a == p.a && std::abs(q.b - p.b) < 0.5 * bs.step) return false;
    return true;
}

CriterionResult c7_generic_kernel(const VerifyConfig& cfg) {
    CriterionResult r = make("7", "generic kernel dimension");
    r.relation = "==";
    r.bound = cfg.generic_points;
    Timer t;
    SpectrumEngine eng(constant_q(square_lattice(2 * kPi), cfg.handle_c, cfg.N), spectrum_options(cfg));
    BranchSet bs = eng.scan(square_window(cfg.generic_half_width), cfg.generic_samples, cfg.cutoff);
    std::vector<const BranchPoint*> pool;
    for (const BranchPoint& p : bs.samples)
        if (generic_point(p, bs, 0.8 * cfg.cutoff)) pool.push_back(&p);
    int dim_one = 0, tested = 0;
    ojson pts = ojson::array();
    if (!pool.empty() && cfg.generic_points > 0) {
        const double stride = double(pool.size()) / cfg.generic_points;
        for (int k = 0; k < cfg.generic_points && k < int(pool.size()); ++k) {
            const BranchPoint& p = *pool[std::size_t(k * stride)];
            SpectrumSample s = eng.kernel_at({p.a, p.b});
            ++tested;
            if (s.kernel_dim == 1) ++dim_one;
            ojson row;
            row["a"] = cjson(p.a);
            row["b"] = cjson(p.b);
            row["kernel_dim"] = s.kernel_dim;
            pts.push_back(row);
        }
    }
    r.measured = dim_one;
    r.details["candidates"] = pool.size();
    r.details["tested"] = tested;
    r.details["points"] = pts;
    finish(r, tested == cfg.generic_points && dim_one == cfg.generic_points, t);
    return r;
}

CriterionResult c8_convergence(const VerifyConfig& cfg) {
    CriterionResult r = make("8", "Darboux pipeline convergence");
    r.relation = "in [3, 5]";
    r.bound = 3;
    Timer t;
    const cplx a(cfg.sample_re, cfg.sample_im);
    Pipeline lo = pipeline(cfg, cfg.grid_coarse, a);
    Pipeline hi = pipeline(cfg, cfg.grid_fine, a);
    if (lo.dr.cls != DarbouxClass::Regular || hi.dr.cls != DarbouxClass::Regular)
        throw std::runtime_error("sample transform is not regular");
    EnvelopeReport e0 = verify_envelope(lo.g, lo.eh, lo.dr), e1 = verify_envelope(hi.g, hi.eh, hi.dr);
    const std::pair<const char*, std::pair<double, double>> rows[] = {
        {"prolongation", {lo.ps.residual, hi.ps.residual}},
        {"conformality", {lo.dr.conformality_residual, hi.dr.conformality_residual}},
        {"invariance", {e0.invariance, e1.invariance}},
        {"touch_f", {e0.touch_f, e1.touch_f}},
        {"right_f", {e0.right_f, e1.right_f}},
        {"left_sharp", {e0.left_sharp, e1.left_sharp}},
    };
    bool ok = true;
    double lo_ratio = std::numeric_limits<double>::infinity(), hi_ratio = 0;
    ojson res;
    for (const auto& [name, v] : rows) {
        double q = ratio_of(v.first, v.second);
        lo_ratio = std::min(lo_ratio, q);
        hi_ratio = std::max(hi_ratio, q);
        ok = ok && q >= 3 && q <= 5;
        res[name] = {{"coarse", v.first}, {"fine", v.second}, {"ratio", q}};
    }
    const double separation = e1.right_sharp / e1.left_sharp;
    ok = ok && separation >= 1e3;
    r.measured = lo_ratio;
    r.details["b"] = cjson(hi.ps.omega.b);
    r.details["residuals"] = res;
    r.details["max_ratio"] = hi_ratio;
    r.details["right_sharp_fine"] = e1.right_sharp;
    r.details["right_over_left"] = separation;
    r.details["right_over_left_bound"] = 1e3;
    finish(r, ok, t);
    return r;
}

CriterionResult c9_isospectral(const VerifyConfig& cfg) {
    CriterionResult r = make("9", "Willmore preservation and isospectrality", 120.0);
    r.relation = "<=";
    r.bound = 1e-3;
    Timer t;
    Pipeline p = pipeline(cfg, cfg.grid_fine, cplx(cfg.sample_re, cfg.sample_im));
    if (p.dr.cls != DarbouxClass::Regular) throw std::runtime_error("sample transform is not regular");
    const double wf = classical_willmore(p.g), ws = classical_willmore(*p.dr.fsharp);
    const double wrel = std::abs(ws - wf) / wf;
    DarbouxOptions dopt;
    dopt.extract.N = cfg.N;
    const std::vector<cplx> probes = {{0.3, 0.1}, {0.5, 0}, {-0.2, 0.4}, {1.1, -0.3}, {-0.7, -0.6}};
    IsospectralReport iso = isospectral_check(p.eh, p.dr, probes, cfg.cutoff, dopt, spectrum_options(cfg));
    r.measured = iso.max_distance;
    ojson d = ojson::array();
    for (double x : iso.distances) d.push_back(x);
    r.details["probe_distances"] = d;
    r.details["compared"] = iso.compared;
    r.details["willmore_f"] = wf;
    r.details["willmore_sharp"] = ws;
    r.details["willmore_defect"] = wrel;
    r.details["willmore_bound"] = 0.02;
    finish(r, iso.max_distance <= r.bound && iso.compared > 0 && wrel <= 0.02, t);
    return r;
}

CriterionResult c10_bianchi(const VerifyConfig& cfg) {
    CriterionResult r = make("10", "Bianchi permutability");
    r.relation = "in [3, 5]";
    r.bound = 3;
    Timer t;
    const cplx a1(cfg.sample_re, cfg.sample_im), a2(cfg.second_re, cfg.second_im);
    DarbouxOptions dopt;
    dopt.extract.N = cfg.N;
    BianchiReport rep[2];
    ojson levels = ojson::array();
    for (int k = 0; k < 2; ++k) {
        const int n = k == 0 ? cfg.grid_coarse : cfg.grid_fine;
        Pipeline p1 = pipeline(cfg, n, a1);
        SpectrumSample s2 = p1.eng.kernel_at({a2, smallest_root(p1.eng, a2, cfg.cutoff)});
        ProlongedSection p2 = prolong(p1.g, p1.eh, section_from_kernel(p1.eh, s2, 0, dopt));
        rep[k] = bianchi_compose(p1.g, p1.ps, p2, dopt);
        levels.push_back({{"n", n},
                          {"residual_sharp", rep[k].residual_sharp},
                          {"residual_flat", rep[k].residual_flat},
                          {"gamma_chi", rep[k].gamma_chi},
                          {"class", to_string(rep[k].fhat.cls)}});
    }
    const double q1 = ratio_of(rep[0].residual_sharp, rep[1].residual_sharp);
    const double q2 = ratio_of(rep[0].residual_flat, rep[1].residual_flat);
    const double gchi = std::max(rep[0].gamma_chi, rep[1].gamma_chi);
    r.measured = std::min(q1, q2);
    r.details["levels"] = levels;
    r.details["ratio_sharp"] = q1;
    r.details["ratio_flat"] = q2;
    r.details["gamma_chi"] = gchi;
    r.details["gamma_chi_bound"] = 1e-8;
    auto in = [](double q) { return q >= 3 && q <= 5; };
    finish(r, in(q1) && in(q2) && gchi <= 1e-8, t);
    return r;
}

CriterionResult c11_pluecker(const VerifyConfig& cfg) {
    CriterionResult r = make("11", "Pluecker checker");
    r.relation = "==";
    r.bound = 0;
    Timer t;
    struct Row {
        int n, g, degL, ordH;
        double expected;
    };
    const Row rows[] = {{2, 1, 0, 2, 8 * kPi}, {1, 1, 0, 0, 0}, {1, 1, 0, 2, 8 * kPi}};
    bool ok = true;
    double worst = 0;
    ojson table = ojson::array();
    for (const Row& w : rows) {
        double v = pluecker_bound(w.n, w.g, w.degL, w.ordH);
        ok = ok && v == w.expected;
        worst = std::max(worst, std::abs(v - w.expected));
        table.push_back({{"n", w.n}, {"g", w.g}, {"degL", w.degL}, {"ordH", w.ordH}, {"value", v}});
    }
    // fixtures: chi(z)(z - z0)^k on the square torus, v = 0
    GridSpec gs{square_lattice(2 * kPi), 64, 64};
    const int i0 = 20, j0 = 30;
    const cplx z0 = gs.z(i0, j0);
    const HarmonicForm eta = dual_basis(gs.lat).at(1, 0);
    ojson orders = ojson::array();
    for (int k = 1; k <= 2; ++k) {
        MonodromySection s;
        s.grid = gs;
        s.u.resize(gs.size());
        s.v.assign(gs.size(), 0);
        for (int j = 0; j < gs.n1; ++j)
            for (int i = 0; i < gs.n0; ++i) {
                cplx z = gs.z(i, j);
                s.u[gs.at(i, j)] = std::exp(eta.a * z + eta.b * std::conj(z)) * std::pow(z - z0, k);
            }
        int ord = vanishing_order(s, i0, j0);
        ok = ok && ord == k;
        worst = std::max(worst, double(std::abs(ord - k)));
        orders.push_back({{"expected", k}, {"estimated", ord}});
    }
    (void)cfg;
    r.measured = worst;
    r.details["pluecker"] = table;
    r.details["vanishing_orders"] = orders;
    finish(r, ok, t);
    return r;
}

CriterionResult c12_end_limit(const VerifyConfig& cfg) {
    CriterionResult r = make("12", "end limit trend");
    r.relation = ">=";
    r.bound = 0.8;
    Timer t;
    ImmersionGrid g = homogeneous_torus(kPi / 4, cfg.grid_coarse, cfg.grid_coarse, cfg.infinity_value);
    DarbouxOptions dopt;
    dopt.extract.N = cfg.N;
    ExtractedHolo eh = extract_holo(g, dopt.extract);
    SpectrumEngine eng(eh.hd, spectrum_options(cfg));
    const double far = cfg.end_step * cfg.end_samples * 1.5 + 1;
    std::vector<SpectrumSample> samples;
    cplx prev;
    for (int k = 1; k <= cfg.end_samples; ++k) {
        const cplx a = std::polar(cfg.end_step * k, cfg.end_angle);
        FiberSolveResult f = eng.fiber_roots(a, far);
        if (f.roots.empty()) break;
        auto key = [&](const FiberRoot& x) { return k == 1 ? std::abs(x.b) : std::abs(x.b - prev); };
        auto it = std::min_element(f.roots.begin(), f.roots.end(),
                                   [&](const FiberRoot& x, const FiberRoot& y) { return key(x) < key(y); });
        prev = it->b;
        samples.push_back(eng.kernel_at({a, prev}));
    }
    FamilyReport fam = family_map(g, eh, samples, dopt, 1);
    ojson d = ojson::array();
    bool all_ok = true;
    for (const FamilyMember& m : fam.members) {
        all_ok = all_ok && m.ok;
        d.push_back(m.ok ? ojson(m.distance_to_f) : ojson(m.error));
    }
    r.measured = fam.decreasing_fraction;
    r.details["samples"] = fam.members.size();
    r.details["distances"] = d;
    finish(r, all_ok && int(fam.members.size()) >= 8 && fam.decreasing_fraction >= r.bound, t);
    return r;
}

CriterionResult t1_truncation(const VerifyConfig& cfg) {
    CriterionResult r = make("T1", "truncation convergence");
    r.relation = "<=";
    r.bound = 1e-8;
    Timer t;
    HoloData hd = constant_q(square_lattice(2 * kPi), cfg.handle_c, cfg.N);
    hd.qcoeffs[{1, 0}] = cfg.truncation_perturbation;
    TruncationReport rep = truncation_convergence(hd, {{0.3, 0.1}, {-0.4, 0.2}, {0.1, -0.5}}, cfg.cutoff, spectrum_options(cfg));
    r.measured = rep.max_defect;
    r.details["compared"] = rep.compared;
    finish(r, rep.compared >= 1 && rep.max_defect <= r.bound, t);
    return r;
}

template <class F>
CriterionResult guarded(const char* id, const char* name, F&& fn, const VerifyConfig& cfg) {
    Timer t;
    try {
        return fn(cfg);
    } catch (const std::exception& e) {
        CriterionResult r = make(id, name);
        r.relation = "error";
        r.details["error"] = e.what();
        finish(r, false, t);
        return r;
    }
}

std::vector<CriterionResult> run_core(const VerifyConfig& cfg) {
    std::vector<CriterionResult> out;
    out.push_back(guarded("1", "vacuum oracle equivalence", c1_vacuum, cfg));
    out.push_back(guarded("2", "homogeneous oracle equivalence", c2_homogeneous, cfg));
    out.push_back(guarded("3", "handle resolution", c3_handle, cfg));
    out.push_back(guarded("4", "rho symmetry of scanned samples", c4_rho, cfg));
    out.push_back(guarded("5", "Clifford Willmore energy", c5_willmore, cfg));
    out.push_back(guarded("6", "trivial representation kernel", c6_trivial_kernel, cfg));
    out.push_back(guarded("7", "generic kernel dimension", c7_generic_kernel, cfg));
    out.push_back(guarded("8", "Darboux pipeline convergence", c8_convergence, cfg));
    out.push_back(guarded("9", "Willmore preservation and isospectrality", c9_isospectral, cfg));
    out.push_back(guarded("10", "Bianchi permutability", c10_bianchi, cfg));
    out.push_back(guarded("11", "Pluecker checker", c11_pluecker, cfg));
    out.push_back(guarded("12", "end limit trend", c12_end_limit, cfg));
    out.push_back(guarded("T1", "truncation convergence", t1_truncation, cfg));
    return out;
}

ojson criteria_body(const std::vector<CriterionResult>& cs) {
    ojson arr = ojson::array();
    for (const CriterionResult& c : cs) {
        ojson j;
        j["id"] = c.id;
        j["name"] = c.name;
        j["measured"] = c.measured;
        j["relation"] = c.relation;
        j["bound"] = c.bound;
        if (c.runtime_limit > 0) j["runtime_limit_s"] = c.runtime_limit;
        j["pass"] = c.pass;
        j["details"] = c.details;
        arr.push_back(j);
    }
    return arr;
}

}  // namespace

ojson config_to_json(const VerifyConfig& cfg) {
    ojson j;
    j["N"] = cfg.N;
    j["seed"] = cfg.seed;
    j["cutoff"] = cfg.cutoff;
    j["vacuum_random_samples"] = cfg.vacuum_random_samples;
    j["homogeneous_draws"] = cfg.homogeneous_draws;
    j["handle_c"] = cfg.handle_c;
    j["handle_half_width"] = cfg.handle_half_width;
    j["handle_samples"] = cfg.handle_samples;
    j["generic_half_width"] = cfg.generic_half_width;
    j["generic_samples"] = cfg.generic_samples;
    j["generic_points"] = cfg.generic_points;
    j["grid_coarse"] = cfg.grid_coarse;
    j["grid_fine"] = cfg.grid_fine;
    j["infinity_value"] = cfg.infinity_value;
    j["sample"] = ojson::array({cfg.sample_re, cfg.sample_im});
    j["second_sample"] = ojson::array({cfg.second_re, cfg.second_im});
    j["clifford_scan_samples"] = cfg.clifford_scan_samples;
    j["clifford_scan_half_width"] = cfg.clifford_scan_half_width;
    j["end_samples"] = cfg.end_samples;
    j["end_step"] = cfg.end_step;
    j["end_angle"] = cfg.end_angle;
    j["truncation_perturbation"] = cfg.truncation_perturbation;
    const SpectrumOptions& s = cfg.spectrum;
    j["spectrum"] = {{"fiber_tol", s.fiber_tol},         {"kernel_tol", s.kernel_tol},
                     {"collision_factor", s.collision_factor}, {"infinite_beta_tol", s.infinite_beta_tol},
                     {"pivot_tol", s.pivot_tol},         {"sheet_fraction", s.sheet_fraction},
                     {"sheet_probes", s.sheet_probes},   {"edge_tol", s.edge_tol},
                     {"handle_tol", s.handle_tol},       {"ls_radius", s.ls_radius},
                     {"svd_block_limit", s.svd_block_limit}};
    return j;
}

ojson VerifyReport::to_json(const VerifyConfig& cfg) const {
    ojson j;
    j["config"] = config_to_json(cfg);
    j["criteria"] = criteria_body(criteria);
    j["all_pass"] = all_pass;
    return j;
}

ojson VerifyReport::timings_json() const {
    ojson j = ojson::object();
    for (const CriterionResult& c : criteria) j[c.id] = c.seconds;
    return j;
}

VerifyReport run_verify(const VerifyConfig& cfg, bool with_determinism) {
    VerifyReport rep;
    rep.criteria = run_core(cfg);
    if (with_determinism) {
        Timer t;
        CriterionResult r = make("13", "determinism");
        r.relation = "==";
        r.bound = 1;
        const std::string first = criteria_body(rep.criteria).dump();
        const std::string second = criteria_body(run_core(cfg)).dump();
        r.measured = first == second ? 1 : 0;
        r.details["bytes"] = first.size();
        finish(r, first == second, t);
        rep.criteria.push_back(r);
    }
    rep.all_pass = std::all_of(rep.criteria.begin(), rep.criteria.end(), [](const CriterionResult& c) { return c.pass; });
    return rep;
}

}  // namespace qspec
