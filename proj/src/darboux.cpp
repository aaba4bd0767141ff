#include "qspec/darboux.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qspec/parallel.hpp"

namespace qspec {

namespace {

const cplx kIu(0, 1);

std::string cell(const GridSpec& g, std::size_t k) {
    return "(" + std::to_string(int(k) / g.n1) + "," + std::to_string(int(k) % g.n1) + ")";
}

CField truncated_q(const GridSpec& gs, const HoloData& hd) {
    ModeWindow w = hd.window();
    CVec c = CVec::Zero(w.count());
    for (const auto& [mn, v] : hd.qcoeffs) c(w.index(mn.first, mn.second)) = v;
    return fourier_synthesize(gs, w, c);
}

// component of w orthogonal to the quaternionic line p ℍ
double off_line(const Quat& p0, const Quat& p1, const Quat& w0, const Quat& w1) {
    double n2 = p0.norm2() + p1.norm2();
    Quat h = (p0.conj() * w0 + p1.conj() * w1) / n2;
    return std::sqrt((w0 - p0 * h).norm2() + (w1 - p1 * h).norm2());
}

// base: the surface f# is a transform of, in the standard coordinates (defaults to g itself)
DarbouxResult build_result(const ImmersionGrid& g, const ProlongedSection& ps, const DarbouxOptions& opt,
                           const std::vector<HPoint>* base = nullptr) {
    const GridSpec gs = g.spec();
    const std::size_t n = gs.size();
    DarbouxResult res;
    res.source = ps;

    // distances and chart choice in standard coordinates
    std::vector<HPoint> psi(n), fl(n);
    double pmax = 0, pmin = INFINITY;
    for (std::size_t k = 0; k < n; ++k) {
        psi[k] = g.chart.apply({ps.X[k], ps.Y[k]});
        fl[k] = g.point(k);
        pmax = std::max(pmax, ps.phi[k].norm());
        pmin = std::min(pmin, ps.phi[k].norm());
    }
    double spread = 0;
    res.min_distance = INFINITY;
    for (std::size_t k = 0; k < n; ++k) {
        spread = std::max(spread, hp1_distance(psi[k], psi[0]));
        double d = hp1_distance(psi[k], fl[k]);
        res.min_distance = std::min(res.min_distance, d);
        res.max_distance = std::max(res.max_distance, d);
    }
    if (spread < opt.constant_tol) {
        res.cls = DarbouxClass::Constant;
        res.constant_point = psi[0].normalized();
        return res;
    }
    if (pmin < opt.zero_tol * pmax) {
        res.cls = DarbouxClass::Singular;
        for (std::size_t k = 0; k < n; ++k)
            if (ps.phi[k].norm() < opt.zero_tol * pmax) res.zero_locus.emplace_back(int(k) / g.ny, int(k) % g.ny);
        return res;
    }

    // keep the working chart when its infinity stays away from f and f#, otherwise pick the best candidate
    const std::vector<HPoint> cands{g.infinity_point, {kOne, Quat{}}, {Quat{}, kOne}, {kOne, kOne}, {kOne, -kOne},
                                    {kOne, kI},       {kOne, -kI},    {kOne, kJ},     {kOne, -kJ},  {kOne, kK},
                                    {kOne, -kK}};
    int best = 0;
    double best_score = -1;
    for (int c = 0; c < int(cands.size()); ++c) {
        double score = INFINITY;
        for (std::size_t k = 0; k < n; ++k)
            score = std::min({score, hp1_distance(cands[c], psi[k]), hp1_distance(cands[c], fl[k])});
        if (c == 0 && score >= opt.chart_keep) { best = 0; break; }
        if (score > best_score) { best_score = score; best = c; }
    }
    Mat2H chart = g.chart;
    if (best != 0) chart = *inverse(frame_sending_to_infinity(cands[best]));
    Mat2H W = *inverse(chart);
    ImmersionGrid fs;
    fs.lat = g.lat;
    fs.nx = g.nx;
    fs.ny = g.ny;
    fs.chart = chart;
    fs.infinity_point = chart.col0();
    fs.values.resize(n);
    QField fnew(n);
    for (std::size_t k = 0; k < n; ++k) {
        auto v = hp1_chart(W.apply(psi[k]));
        auto u = hp1_chart(W.apply(base ? (*base)[k] : fl[k]));
        if (!v || !u) throw std::runtime_error("transform meets the chosen infinity at " + cell(gs, k));
        fs.values[k] = *v;
        fnew[k] = *u;
    }
    fs.validate();

    // predicted left normal of f#: (f - f#) R (f - f#)^-1 with R the right normal of the base in the same chart
    QDeriv dfn = spectral_deriv(gs, fnew);
    QField R = qdivl(dfn.dx, dfn.dy);
    QDeriv ds = central_deriv(gs, fs.values);
    double smax = max_norm(ds.dx), r = 0;
    for (std::size_t k = 0; k < n; ++k) {
        Quat d = fnew[k] - fs.values[k];
        Quat Np = d * R[k] * d.inv();
        r = std::max({r, (ds.dy[k] - Np * ds.dx[k]).norm(), (ds.dx[k] + Np * ds.dy[k]).norm()});
    }
    res.conformality_residual = r / smax;
    res.fsharp = std::move(fs);
    return res;
}

}  // namespace

const char* to_string(DarbouxClass c) {
    switch (c) {
        case DarbouxClass::Regular: return "regular";
        case DarbouxClass::Singular: return "singular";
        default: return "constant";
    }
}

MonodromySection section_from_kernel(const ExtractedHolo& eh, const HarmonicForm& omega, const CVec& kernel,
                                     const DarbouxOptions& opt) {
    const GridSpec& gs = eh.grid;
    ModeWindow w = eh.hd.window();
    const int M = w.count();
    if (kernel.size() != 2 * M) throw std::invalid_argument("kernel vector does not match the truncation window");
    MonodromySection ms;
    ms.grid = gs;
    ms.omega = omega;
    ms.u = fourier_synthesize(gs, w, kernel.head(M));
    ms.v = fourier_synthesize(gs, w, kernel.tail(M));
    const std::size_t n = gs.size();
    CField qt = truncated_q(gs, eh.hd);
    CDeriv du = spectral_deriv(gs, ms.u), dv = spectral_deriv(gs, ms.v);
    const cplx al = eh.hd.alpha;
    double scale = 0, r = 0;
    for (std::size_t k = 0; k < n; ++k) {
        scale = std::max(scale, std::hypot(std::abs(ms.u[k]), std::abs(ms.v[k])));
        cplx ru = 0.5 * (du.dx[k] + kIu * du.dy[k]) + (omega.b - std::conj(al)) * ms.u[k] - std::conj(qt[k]) * ms.v[k];
        cplx rv = 0.5 * (dv.dx[k] - kIu * dv.dy[k]) + (omega.a - al) * ms.v[k] + qt[k] * ms.u[k];
        r = std::max(r, std::hypot(std::abs(ru), std::abs(rv)));
    }
    if (!(scale > 0)) throw std::invalid_argument("zero kernel vector");
    ms.residual = r / scale;
    if (!(ms.residual <= opt.cross_tol))
        throw std::runtime_error("representations disagree: grid residual " + std::to_string(ms.residual));
    ms.phi.resize(n);
    for (std::size_t k = 0; k < n; ++k) ms.phi[k] = eh.frame[k] * Quat::from_split(ms.u[k], ms.v[k]);
    return ms;
}

MonodromySection section_from_kernel(const ExtractedHolo& eh, const SpectrumSample& s, int kernel_index,
                                     const DarbouxOptions& opt) {
    if (kernel_index < 0 || kernel_index >= int(s.kernel.size())) throw std::invalid_argument("sample has no such kernel vector");
    return section_from_kernel(eh, s.omega, s.kernel[kernel_index], opt);
}

ProlongedSection prolong(const ImmersionGrid& g, const ExtractedHolo& eh, const MonodromySection& ms) {
    const GridSpec gs = g.spec();
    const std::size_t n = gs.size();
    if (ms.phi.size() != n) throw std::invalid_argument("section and grid differ in size");
    const cplx wx = ms.omega.on_x(), wy = ms.omega.on_y();
    QDeriv dp = spectral_deriv(gs, ms.phi);
    ProlongedSection ps;
    ps.grid = gs;
    ps.omega = ms.omega;
    ps.phi = ms.phi;
    ps.X.resize(n);
    ps.Y.resize(n);
    ps.lambda.resize(n);
    const double fscale = max_norm(eh.tangent.dfx);
    for (std::size_t k = 0; k < n; ++k) {
        const Quat& fx = eh.tangent.dfx[k];
        if (fx.norm() < 1e-9 * fscale) throw NotImmersedError("not immersed at cell " + cell(gs, k));
        Quat Px = dp.dx[k] + ms.phi[k] * wx;
        Quat Py = dp.dy[k] + ms.phi[k] * wy;
        ps.lambda[k] = fx.inv() * ((Px - eh.tangent.N[k] * Py) * 0.5);
        ps.X[k] = ms.phi[k] - g.values[k] * ps.lambda[k];
        ps.Y[k] = -ps.lambda[k];
    }
    QDeriv dX = central_deriv(gs, ps.X), dY = central_deriv(gs, ps.Y);
    double scale = 0, r = 0;
    for (std::size_t k = 0; k < n; ++k) {
        scale = std::max(scale, std::sqrt(dX.dx[k].norm2() + dY.dx[k].norm2()));
        Quat rx = dX.dx[k] - g.values[k] * dY.dx[k] + ms.phi[k] * wx;
        Quat ry = dX.dy[k] - g.values[k] * dY.dy[k] + ms.phi[k] * wy;
        r = std::max({r, rx.norm(), ry.norm()});
    }
    ps.residual = scale > 0 ? r / scale : r;
    return ps;
}

DarbouxResult darboux_transform(const ImmersionGrid& g, const ProlongedSection& ps, const DarbouxOptions& opt) {
    return build_result(g, ps, opt);
}

EnvelopeReport verify_envelope(const ImmersionGrid& f, const ExtractedHolo& eh, const DarbouxResult& res) {
    if (res.cls != DarbouxClass::Regular) throw std::invalid_argument("envelope check needs a regular transform");
    const GridSpec gs = f.spec();
    const std::size_t n = gs.size();
    const ProlongedSection& ps = res.source;
    EnvelopeReport rep;
    QField Sa(n), Sb(n), Sc(n), Sd(n), Ba(n), Bb(n), Bc(n), Bd(n);
    for (std::size_t k = 0; k < n; ++k) {
        HPoint l{f.values[k], kOne}, m{ps.X[k], ps.Y[k]};
        Quat jm = ps.phi[k].inv() * eh.tangent.N[k] * ps.phi[k];
        Mat2H S = sphere_from_splitting(eh.tangent.R[k], l, jm, m, 1e-12);
        rep.s2 = std::max(rep.s2, square_plus_identity_residual(S));
        Sa[k] = S.a, Sb[k] = S.b, Sc[k] = S.c, Sd[k] = S.d;
        Ba[k] = f.values[k], Bb[k] = ps.X[k], Bc[k] = kOne, Bd[k] = ps.Y[k];
    }
    QField sa = cell_average(gs, Sa), sb = cell_average(gs, Sb), sc = cell_average(gs, Sc), sd = cell_average(gs, Sd);
    QField ba = cell_average(gs, Ba), bb = cell_average(gs, Bb), bc = cell_average(gs, Bc), bd = cell_average(gs, Bd);
    QDeriv dl = cell_deriv(gs, f.values), dX = cell_deriv(gs, ps.X), dY = cell_deriv(gs, ps.Y);
    for (std::size_t k = 0; k < n; ++k) {
        Mat2H B{ba[k], bb[k], bc[k], bd[k]};
        auto Bi = inverse(B);
        if (!Bi) throw std::runtime_error("splitting collapsed at cell " + cell(gs, k));
        Mat2H T = *Bi * Mat2H{sa[k], sb[k], sc[k], sd[k]} * B;
        // off-diagonal blocks weighted by the basis column lengths
        const double nl = std::sqrt(ba[k].norm2() + bc[k].norm2()), nm = std::sqrt(bb[k].norm2() + bd[k].norm2());
        rep.invariance = std::max({rep.invariance, T.b.norm() * nl / nm, T.c.norm() * nm / nl});
        // coordinates of the differentials in the averaged basis
        Quat bx = Bi->apply({dl.dx[k], Quat{}}).v1, by = Bi->apply({dl.dy[k], Quat{}}).v1;
        Quat ax = Bi->apply({dX.dx[k], dY.dx[k]}).v0, ay = Bi->apply({dX.dy[k], dY.dy[k]}).v0;
        const Quat &T11 = T.a, &T22 = T.d;
        auto rel = [](const Quat& r1, const Quat& r2, const Quat& s) { return std::max(r1.norm(), r2.norm()) / s.norm(); };
        rep.touch_f = std::max(rep.touch_f, rel(by - T22 * bx, -bx - T22 * by, bx));
        rep.right_f = std::max(rep.right_f, rel(by - bx * T11, -bx - by * T11, bx));
        rep.left_sharp = std::max(rep.left_sharp, rel(ay - T11 * ax, -ax - T11 * ay, ax));
        rep.right_sharp = std::max(rep.right_sharp, rel(ay - ax * T22, -ax - ay * T22, ax));
    }
    return rep;
}

BianchiReport bianchi_compose(const ImmersionGrid& f, const ProlongedSection& psharp, const ProlongedSection& pflat,
                              const DarbouxOptions& opt) {
    const GridSpec gs = f.spec();
    const std::size_t n = gs.size();
    for (std::size_t k = 0; k < n; ++k)
        if (hp1_distance(f.chart.apply({psharp.X[k], psharp.Y[k]}), f.chart.apply({pflat.X[k], pflat.Y[k]})) < 1e-8)
            throw std::invalid_argument("transforms coincide at " + cell(gs, k));
    // dpsi = l mu with l = (f, 1), so mu is the differential of the second component
    QDeriv ds = spectral_deriv(gs, psharp.Y), db = spectral_deriv(gs, pflat.Y);
    const HarmonicForm ws = psharp.omega, wb = pflat.omega;
    QField chi(n);
    double mumax = 0;
    for (std::size_t k = 0; k < n; ++k) mumax = std::max(mumax, (ds.dx[k] + psharp.Y[k] * ws.on_x()).norm());
    BianchiReport rep;
    for (std::size_t k = 0; k < n; ++k) {
        Quat mus = ds.dx[k] + psharp.Y[k] * ws.on_x();
        Quat mub = db.dx[k] + pflat.Y[k] * wb.on_x();
        if (mus.norm() < 1e-10 * mumax) throw std::runtime_error("differential degenerate at " + cell(gs, k));
        chi[k] = mus.inv() * mub;
        Quat muy_s = ds.dy[k] + psharp.Y[k] * ws.on_y();
        Quat muy_b = db.dy[k] + pflat.Y[k] * wb.on_y();
        rep.y_consistency = std::max(rep.y_consistency, (muy_s * chi[k] - muy_b).norm() / mub.norm());
    }
    ProlongedSection ph;
    ph.grid = gs;
    ph.omega = wb;
    ph.X.resize(n);
    ph.Y.resize(n);
    ph.phi.resize(n);
    ph.lambda.resize(n);
    QField X2(n), Y2(n);
    for (std::size_t k = 0; k < n; ++k) {
        ph.X[k] = pflat.X[k] - psharp.X[k] * chi[k];
        ph.Y[k] = pflat.Y[k] - psharp.Y[k] * chi[k];
        ph.phi[k] = ph.X[k] - f.values[k] * ph.Y[k];
        ph.lambda[k] = -ph.Y[k];
        Quat ci = chi[k].inv();
        X2[k] = ph.X[k] * ci;
        Y2[k] = ph.Y[k] * ci;
    }
    // fhat as a transform of f#: d(phi) + phi omega_flat must lie in the line of psi#
    auto residual = [&](const QField& X, const QField& Y, const HarmonicForm& w, const ProlongedSection& base) {
        QDeriv dx = central_deriv(gs, X), dy = central_deriv(gs, Y);
        double r = 0, s = 0;
        for (std::size_t k = 0; k < n; ++k) {
            s = std::max(s, std::sqrt(dx.dx[k].norm2() + dy.dx[k].norm2()));
            Quat wx0 = dx.dx[k] + X[k] * w.on_x(), wx1 = dy.dx[k] + Y[k] * w.on_x();
            Quat wy0 = dx.dy[k] + X[k] * w.on_y(), wy1 = dy.dy[k] + Y[k] * w.on_y();
            r = std::max({r, off_line(base.X[k], base.Y[k], wx0, wx1), off_line(base.X[k], base.Y[k], wy0, wy1)});
        }
        return r / s;
    };
    rep.residual_sharp = residual(ph.X, ph.Y, wb, psharp);
    rep.residual_flat = residual(X2, Y2, ws, pflat);

    // monodromy of chi along the glued edges, with the exponential factors evaluated explicitly
    MonodromyRep hs = monodromy_of(f.lat, ws), hb = monodromy_of(f.lat, wb);
    auto E = [](const HarmonicForm& w, cplx z) { return std::exp(w.a * z + w.b * std::conj(z)); };
    auto chi_true = [&](std::size_t k, cplx z) { return Quat::from_complex(1.0 / E(ws, z)) * chi[k] * E(wb, z); };
    for (int dir = 0; dir < 2; ++dir) {
        const int len = dir == 0 ? gs.n1 : gs.n0;
        const cplx gam = dir == 0 ? f.lat.gamma1 : f.lat.gamma2;
        const cplx h_s = dir == 0 ? hs.h1 : hs.h2, h_b = dir == 0 ? hb.h1 : hb.h2;
        for (int t = 0; t < len; ++t) {
            std::size_t k = dir == 0 ? gs.at(0, t) : gs.at(t, 0);
            cplx z = dir == 0 ? gs.z(0, t) : gs.z(t, 0);
            Quat lhs = chi_true(k, z + gam);
            Quat rhs = Quat::from_complex(1.0 / h_s) * chi_true(k, z) * h_b;
            rep.gamma_chi = std::max(rep.gamma_chi, (lhs - rhs).norm() / rhs.norm());
        }
    }
    std::vector<HPoint> base(n);
    for (std::size_t k = 0; k < n; ++k) base[k] = f.chart.apply({psharp.X[k], psharp.Y[k]});
    rep.fhat = build_result(f, ph, opt, &base);
    return rep;
}

IsospectralReport isospectral_check(const ExtractedHolo& eh_f, const DarbouxResult& res, const std::vector<cplx>& probe_as,
                                    double cutoff, const DarbouxOptions& opt, const SpectrumOptions& sopt) {
    if (res.cls != DarbouxClass::Regular || !res.fsharp) throw std::invalid_argument("isospectral check needs a regular transform");
    ExtractOptions eo = opt.extract;
    eo.N = eh_f.hd.N;
    ExtractedHolo es = extract_holo(*res.fsharp, eo);
    SpectrumEngine e1(eh_f.hd, sopt), e2(es.hd, sopt);
    IsospectralReport rep;
    for (cplx a : probe_as) {
        auto r1 = e1.fiber_roots(a, cutoff), r2 = e2.fiber_roots(a, cutoff);
        double d = 0;
        auto one_way = [&](const FiberSolveResult& x, const FiberSolveResult& y) {
            for (const auto& r : x.roots) {
                if (r.edge || std::abs(r.b) > 0.8 * cutoff) continue;
                double best = INFINITY;
                for (const auto& s : y.roots) best = std::min(best, std::abs(r.b - s.b));
                d = std::max(d, best);
                ++rep.compared;
            }
        };
        one_way(r1, r2);
        one_way(r2, r1);
        rep.distances.push_back(d);
        rep.max_distance = std::max(rep.max_distance, d);
    }
    return rep;
}

double max_line_distance(const Mat2H& chart, const QField& X0, const QField& Y0, const QField& X1, const QField& Y1) {
    double d = 0;
    for (std::size_t k = 0; k < X0.size(); ++k)
        d = std::max(d, hp1_distance(chart.apply({X0[k], Y0[k]}), chart.apply({X1[k], Y1[k]})));
    return d;
}

FamilyReport family_map(const ImmersionGrid& f, const ExtractedHolo& eh, const std::vector<SpectrumSample>& samples,
                        const DarbouxOptions& opt, int threads) {
    FamilyReport rep;
    rep.members.resize(samples.size());
    std::vector<std::optional<ProlongedSection>> sections(samples.size());
    parallel_for(int(samples.size()), threads, [&](int i) {
        FamilyMember& m = rep.members[i];
        m.omega = samples[i].omega;
        try {
            MonodromySection ms = section_from_kernel(eh, samples[i], 0, opt);
            ProlongedSection ps = prolong(f, eh, ms);
            DarbouxResult dr = darboux_transform(f, ps, opt);
            m.cls = dr.cls;
            m.prolongation_residual = ps.residual;
            m.distance_to_f = dr.max_distance;
            if (dr.cls == DarbouxClass::Regular) {
                m.conformality_residual = dr.conformality_residual;
                m.willmore = classical_willmore(*dr.fsharp);
                m.mesh = dr.fsharp;
            }
            sections[i] = std::move(ps);
            m.ok = true;
        } catch (const std::exception& e) {
            m.error = e.what();
        }
    });
    for (std::size_t i = 0; i < samples.size(); ++i)
        for (std::size_t j = i + 1; j < samples.size(); ++j) {
            HarmonicForm r = rho_conjugate(samples[i].omega);
            HarmonicForm d = reduce_mod_dual(f.lat, r - samples[j].omega);
            if (std::abs(d.a) + std::abs(d.b) > 1e-6 || !sections[i] || !sections[j]) continue;
            rep.rho_pairs.emplace_back(int(i), int(j),
                                       max_line_distance(f.chart, sections[i]->X, sections[i]->Y, sections[j]->X, sections[j]->Y));
        }
    int steps = 0, dec = 0;
    for (std::size_t i = 1; i < rep.members.size(); ++i) {
        if (!rep.members[i].ok || !rep.members[i - 1].ok) continue;
        ++steps;
        if (rep.members[i].distance_to_f < rep.members[i - 1].distance_to_f) ++dec;
    }
    rep.decreasing_fraction = steps ? double(dec) / steps : 0;
    return rep;
}

}  // namespace qspec
