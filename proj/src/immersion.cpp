#include "qspec/immersion.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace qspec {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2 * kPi;

Quat unit(const Quat& q) { return q / q.norm(); }

std::string cell(int i, int j) { return "(" + std::to_string(i) + "," + std::to_string(j) + ")"; }

// Parallel transport of a frame x with N x = x i along rows, then columns; holonomy phases spread linearly.
QField transport_frame(const GridSpec& g, const QField& N) {
    const int n0 = g.n0, n1 = g.n1;
    QField X(g.size());
    const Quat& N00 = N[0];
    Quat c = kOne - N00 * kI;
    Quat x0 = c.norm2() > 0.5 ? unit(c) : unit(kJ - N00 * kJ * kI);
    std::vector<Quat> row(n0 + 1);
    row[0] = x0;
    for (int k = 1; k <= n0; ++k)
        row[k] = rotation_between(N[g.at(k - 1, 0)], N[g.at(k, 0)]) * row[k - 1];
    Quat h = row[0].inv() * row[n0];
    double th = std::atan2(h.x, h.w);
    for (int k = 0; k < n0; ++k) X[g.at(k, 0)] = row[k] * std::exp(cplx(0, -th * k / n0));

    std::vector<double> ths(n0);
    std::vector<Quat> col(n1 + 1);
    for (int k = 0; k < n0; ++k) {
        col[0] = X[g.at(k, 0)];
        for (int l = 1; l <= n1; ++l) col[l] = rotation_between(N[g.at(k, l - 1)], N[g.at(k, l)]) * col[l - 1];
        Quat hk = col[0].inv() * col[n1];
        ths[k] = std::atan2(hk.x, hk.w);
        for (int l = 0; l < n1; ++l) X[g.at(k, l)] = col[l];
    }
    auto wrap = [](double d) { return d - kTwoPi * std::round(d / kTwoPi); };
    std::vector<double> un(n0);
    un[0] = ths[0];
    for (int k = 1; k < n0; ++k) un[k] = un[k - 1] + wrap(ths[k] - ths[k - 1]);
    double total = un[n0 - 1] + wrap(ths[0] - ths[n0 - 1]) - un[0];
    if (std::abs(total) > kPi)
        throw std::runtime_error("frame singularity: column holonomy winds " + std::to_string(total / kTwoPi) +
                                 " times; retry with a rotated chart");
    for (int k = 0; k < n0; ++k)
        for (int l = 0; l < n1; ++l) X[g.at(k, l)] = X[g.at(k, l)] * std::exp(cplx(0, -un[k] * l / n1));
    return X;
}

}  // namespace

void ImmersionGrid::validate() const {
    lat.validate();
    if (nx < 4 || ny < 4) throw std::invalid_argument("grid resolution too small");
    if (values.size() != std::size_t(nx) * ny) throw std::invalid_argument("grid value count mismatch");
    for (std::size_t k = 0; k < values.size(); ++k) {
        const Quat& v = values[k];
        if (!std::isfinite(v.w) || !std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z))
            throw std::invalid_argument("grid value at infinity " + cell(int(k) / ny, int(k) % ny));
    }
    if (hp1_distance(infinity_point, chart.col0()) > 1e-9) throw std::invalid_argument("infinity point inconsistent with chart");
}

ImmersionGrid make_grid(const Lattice& lat, int nx, int ny, const QField& standard_values, const Mat2H& chart) {
    auto ci = inverse(chart);
    if (!ci) throw std::invalid_argument("singular chart");
    ImmersionGrid g;
    g.lat = lat;
    g.nx = nx;
    g.ny = ny;
    g.chart = chart;
    g.infinity_point = chart.col0();
    g.values.resize(standard_values.size());
    for (std::size_t k = 0; k < standard_values.size(); ++k) {
        auto v = hp1_chart(ci->apply({standard_values[k], kOne}));
        if (!v) throw std::invalid_argument("grid value at the chart's infinity");
        g.values[k] = *v;
    }
    g.validate();
    return g;
}

ImmersionGrid homogeneous_torus(double theta, int nx, int ny, double infinity_value) {
    if (!(theta > 0 && theta < kPi / 2)) throw std::invalid_argument("theta outside (0, pi/2)");
    if (nx < 16 || ny < 16) throw std::invalid_argument("resolution must be >= 16 per direction");
    if (!(infinity_value > 1)) throw std::invalid_argument("infinity point must lie off the image");
    const double c = std::cos(theta), s = std::sin(theta);
    Lattice lat{cplx(kTwoPi * c, 0), cplx(0, kTwoPi * s)};
    GridSpec gs{lat, nx, ny};
    QField f(gs.size());
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
            cplx z = gs.z(i, j);
            f[gs.at(i, j)] = Quat::from_complex(c * std::exp(cplx(0, z.real() / c))) +
                             Quat::from_complex(s * std::exp(cplx(0, z.imag() / s))) * kJ;
        }
    Mat2H chart{Quat(infinity_value), kOne, kOne, Quat{}};
    return make_grid(lat, nx, ny, f, chart);
}

ImmersionGrid figure_eight_fixture(int nx, int ny) {
    Lattice lat = square_lattice(kTwoPi);
    GridSpec gs{lat, nx, ny};
    QField f(gs.size());
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
            double u = kTwoPi * i / nx, v = kTwoPi * j / ny;
            double r = 2 + std::sin(u);
            f[gs.at(i, j)] = {r * std::cos(v), r * std::sin(v), std::sin(u) * std::cos(u), 0};
        }
    return make_grid(lat, nx, ny, f, Mat2H::identity());
}

TangentData tangent_data(const ImmersionGrid& g, Deriv d) {
    GridSpec gs = g.spec();
    QDeriv df = d == Deriv::Spectral ? spectral_deriv(gs, g.values) : central_deriv(gs, g.values);
    TangentData t;
    t.dfx = std::move(df.dx);
    t.dfy = std::move(df.dy);
    double scale = std::max(max_norm(t.dfx), max_norm(t.dfy));
    for (std::size_t k = 0; k < gs.size(); ++k)
        if (t.dfx[k].norm() <= 1e-9 * scale || t.dfy[k].norm() <= 1e-9 * scale)
            throw NotImmersedError("branch point on grid at " + cell(int(k) / g.ny, int(k) % g.ny));
    QField fxi(gs.size());
    for (std::size_t k = 0; k < gs.size(); ++k) fxi[k] = t.dfx[k].inv();
    t.N = qmul(t.dfy, fxi);
    t.R = qdivl(t.dfx, t.dfy);
    for (std::size_t k = 0; k < gs.size(); ++k) {
        t.unit_residual = std::max({t.unit_residual, (t.N[k] * t.N[k] + kOne).norm(), (t.R[k] * t.R[k] + kOne).norm()});
        t.conformality_residual =
            std::max(t.conformality_residual, (t.dfx[k] + t.N[k] * t.dfy[k]).norm() / t.dfx[k].norm());
    }
    return t;
}

ExtractedHolo extract_holo(const ImmersionGrid& g, const ExtractOptions& opt) {
    g.validate();
    GridSpec gs = g.spec();
    const std::size_t n = gs.size();
    ExtractedHolo eh;
    eh.grid = gs;
    eh.tangent = tangent_data(g, Deriv::Spectral);
    const QField& N = eh.tangent.N;

    QField X = lowpass(gs, transport_frame(gs, N), std::min(g.nx, g.ny) / 8);
    QField e(n);
    double emax = 0;
    for (std::size_t k = 0; k < n; ++k) {
        e[k] = (X[k] - N[k] * X[k] * kI) * 0.5;
        emax = std::max(emax, e[k].norm());
    }
    eh.frame_min = INFINITY;
    std::size_t worst = 0;
    for (std::size_t k = 0; k < n; ++k)
        if (e[k].norm() < eh.frame_min) { eh.frame_min = e[k].norm(); worst = k; }
    if (eh.frame_min < opt.frame_tol * emax)
        throw std::runtime_error("frame singularity at " + cell(int(worst) / g.ny, int(worst) % g.ny));

    QDeriv de = spectral_deriv(gs, e);
    QField Ne = qmul(N, de.dy);
    for (std::size_t k = 0; k < n; ++k) Ne[k] = (de.dx[k] + Ne[k]) * 0.5;
    QField P = qdivl(e, Ne);
    CField beta(n), q(n);
    cplx b0 = 0;
    for (std::size_t k = 0; k < n; ++k) {
        beta[k] = P[k].c1();
        q[k] = P[k].c2();
        b0 += beta[k];
    }
    b0 /= double(n);

    // gauge g = exp(-h) with dbar h = beta - mean(beta) makes the connection coefficient constant
    DualBasis db = dual_basis(g.lat);
    std::map<ModeIndex, cplx> bh = fourier_coeffs(gs, beta, std::min(g.nx, g.ny) / 2 - 1);
    ModeWindow hw{std::min(g.nx, g.ny) / 2 - 1};
    CVec hc = CVec::Zero(hw.count());
    for (const auto& [mn, c] : bh)
        if (mn != ModeIndex{0, 0}) hc(hw.index(mn.first, mn.second)) = c / db.at(mn.first, mn.second).b;
    CField h = fourier_synthesize(gs, hw, hc);
    eh.frame.resize(n);
    eh.q.resize(n);
    double qsum = 0, qsq = 0;
    for (std::size_t k = 0; k < n; ++k) {
        cplx gk = std::exp(-h[k]);
        eh.q[k] = q[k] * gk / std::conj(gk);
        eh.frame[k] = e[k] * gk;
        qsum += std::abs(eh.q[k]);
        qsq += std::norm(eh.q[k]);
    }
    double mean = qsum / double(n);
    eh.q_rel_std = mean > 0 ? std::sqrt(std::max(0.0, qsq / double(n) - mean * mean)) / mean : 0;

    eh.hd.lat = g.lat;
    eh.hd.alpha = -std::conj(b0);
    eh.hd.N = opt.N;
    eh.hd.qcoeffs = fourier_coeffs(gs, eh.q, std::min(opt.q_modes, opt.N), opt.q_tol);

    // the constant sections (1,0), (0,1) of ℍ^2 project to 1 and -f; both must solve the truncated equations
    CVec qv = CVec::Zero(ModeWindow{opt.N}.count());
    ModeWindow qw{opt.N};
    for (const auto& [mn, c] : eh.hd.qcoeffs) qv(qw.index(mn.first, mn.second)) = c;
    CField qt = fourier_synthesize(gs, qw, qv);
    const cplx al = eh.hd.alpha;
    for (int which = 0; which < 2; ++which) {
        CField u(n), v(n);
        double scale = 0;
        for (std::size_t k = 0; k < n; ++k) {
            Quat psi = which == 0 ? kOne : -g.values[k];
            Quat c = eh.frame[k].inv() * psi;
            u[k] = c.c1();
            v[k] = c.c2();
            scale = std::max(scale, std::hypot(std::abs(u[k]), std::abs(v[k])));
        }
        CDeriv du = spectral_deriv(gs, u), dv = spectral_deriv(gs, v);
        double r = 0;
        for (std::size_t k = 0; k < n; ++k) {
            cplx ub = 0.5 * (du.dx[k] + cplx(0, 1) * du.dy[k]);
            cplx vd = 0.5 * (dv.dx[k] - cplx(0, 1) * dv.dy[k]);
            cplx ru = ub - std::conj(al) * u[k] - std::conj(qt[k]) * v[k];
            cplx rv = vd - al * v[k] + qt[k] * u[k];
            r = std::max(r, std::hypot(std::abs(ru), std::abs(rv)));
        }
        eh.reconstruction_residual = std::max(eh.reconstruction_residual, r / scale);
    }
    return eh;
}

double classical_willmore(const ImmersionGrid& g) {
    GridSpec gs = g.spec();
    QDeriv d1 = spectral_deriv(gs, g.values);
    QDeriv dxx = spectral_deriv(gs, d1.dx), dyy = spectral_deriv(gs, d1.dy);
    double total = 0;
    for (std::size_t k = 0; k < gs.size(); ++k) {
        const Quat &fx = d1.dx[k], &fy = d1.dy[k];
        Quat lap = dxx.dx[k] + dyy.dy[k];
        // Gram-Schmidt against the tangent plane
        double gxx = fx.norm2(), gxy = fx.w * fy.w + fx.x * fy.x + fx.y * fy.y + fx.z * fy.z, gyy = fy.norm2();
        double det = gxx * gyy - gxy * gxy;
        if (!(det > 1e-24 * (gxx + gyy) * (gxx + gyy))) throw std::runtime_error("degenerate metric");
        auto dot = [](const Quat& a, const Quat& b) { return a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z; };
        double px = dot(lap, fx), py = dot(lap, fy);
        double cx = (gyy * px - gxy * py) / det, cy = (gxx * py - gxy * px) / det;
        Quat perp = lap - fx * cx - fy * cy;
        double e2u = 0.5 * (gxx + gyy);
        total += 0.25 * perp.norm2() / e2u;
    }
    return total * g.lat.area() / double(gs.size());
}

EmbeddednessReport embeddedness_check(const ImmersionGrid& g, double fraction) {
    GridSpec gs = g.spec();
    const int nx = g.nx, ny = g.ny;
    std::vector<double> hloc(gs.size());
    double hmax = 0;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
            const Quat& v = g.values[gs.at(i, j)];
            double h = std::max({dist(v, g.values[gs.at(i + 1, j)]), dist(v, g.values[gs.at(i, j + 1)]),
                                 dist(v, g.values[gs.at(i - 1, j)]), dist(v, g.values[gs.at(i, j - 1)])});
            hloc[gs.at(i, j)] = h;
            hmax = std::max(hmax, h);
        }
    EmbeddednessReport rep;
    rep.min_ratio = INFINITY;
    if (hmax == 0) {
        rep.embedded = false;
        return rep;
    }
    struct Key {
        long long a[4];
        bool operator==(const Key& o) const { return std::equal(a, a + 4, o.a); }
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            std::size_t h = 1469598103934665603ull;
            for (long long x : k.a) h = (h ^ std::size_t(x)) * 1099511628211ull;
            return h;
        }
    };
    const double cellw = hmax;
    auto key_of = [&](const Quat& v) {
        return Key{{(long long)std::floor(v.w / cellw), (long long)std::floor(v.x / cellw),
                    (long long)std::floor(v.y / cellw), (long long)std::floor(v.z / cellw)}};
    };
    std::unordered_map<Key, std::vector<int>, KeyHash> buckets;
    for (std::size_t k = 0; k < gs.size(); ++k) buckets[key_of(g.values[k])].push_back(int(k));
    auto pdist = [&](int a, int b, int n) {
        int d = std::abs(a - b);
        return std::min(d, n - d);
    };
    for (std::size_t k = 0; k < gs.size(); ++k) {
        Key base = key_of(g.values[k]);
        const int i1 = int(k) / ny, j1 = int(k) % ny;
        for (int o = 0; o < 81; ++o) {
            Key nb = base;
            int r = o;
            for (int c = 0; c < 4; ++c, r /= 3) nb.a[c] += r % 3 - 1;
            auto it = buckets.find(nb);
            if (it == buckets.end()) continue;
            for (int m : it->second) {
                if (m <= int(k)) continue;
                const int i2 = m / ny, j2 = m % ny;
                if (std::max(pdist(i1, i2, nx), pdist(j1, j2, ny)) <= 2) continue;
                double ratio = dist(g.values[k], g.values[m]) / std::min(hloc[k], hloc[m]);
                if (ratio < rep.min_ratio) {
                    rep.min_ratio = ratio;
                    rep.i1 = i1, rep.j1 = j1, rep.i2 = i2, rep.j2 = j2;
                }
            }
        }
    }
    rep.embedded = !(rep.min_ratio < fraction);
    return rep;
}

QField values_in_chart(const ImmersionGrid& g, const Mat2H& target_chart) {
    auto ti = inverse(target_chart);
    if (!ti) throw std::invalid_argument("singular chart");
    Mat2H m = *ti * g.chart;
    QField out(g.values.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        auto v = hp1_chart(m.apply({g.values[k], kOne}));
        if (!v) throw std::runtime_error("point at the target chart's infinity");
        out[k] = *v;
    }
    return out;
}

std::string grid_to_json(const ImmersionGrid& g) {
    using nlohmann::json;
    auto q4 = [](const Quat& q) { return json::array({q.w, q.x, q.y, q.z}); };
    json j;
    j["lattice"] = {{"gamma1", {g.lat.gamma1.real(), g.lat.gamma1.imag()}},
                    {"gamma2", {g.lat.gamma2.real(), g.lat.gamma2.imag()}}};
    j["nx"] = g.nx;
    j["ny"] = g.ny;
    json vals = json::array();
    for (const auto& v : g.values) {
        vals.push_back(v.w);
        vals.push_back(v.x);
        vals.push_back(v.y);
        vals.push_back(v.z);
    }
    j["values"] = vals;
    j["chart"] = json::array({q4(g.chart.a), q4(g.chart.b), q4(g.chart.c), q4(g.chart.d)});
    j["infinity_point"] = json::array({q4(g.infinity_point.v0), q4(g.infinity_point.v1)});
    return j.dump();
}

ImmersionGrid grid_from_json(const std::string& text) {
    using nlohmann::json;
    json j = json::parse(text);
    auto q4 = [](const json& a) { return Quat{a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>(), a.at(3).get<double>()}; };
    ImmersionGrid g;
    const auto& l = j.at("lattice");
    g.lat.gamma1 = {l.at("gamma1").at(0).get<double>(), l.at("gamma1").at(1).get<double>()};
    g.lat.gamma2 = {l.at("gamma2").at(0).get<double>(), l.at("gamma2").at(1).get<double>()};
    g.nx = j.at("nx").get<int>();
    g.ny = j.at("ny").get<int>();
    const auto& vals = j.at("values");
    if (vals.size() != std::size_t(4) * g.nx * g.ny) throw std::invalid_argument("grid value count mismatch");
    g.values.resize(std::size_t(g.nx) * g.ny);
    for (std::size_t k = 0; k < g.values.size(); ++k)
        g.values[k] = {vals[4 * k].get<double>(), vals[4 * k + 1].get<double>(), vals[4 * k + 2].get<double>(),
                       vals[4 * k + 3].get<double>()};
    if (j.contains("chart")) {
        const auto& c = j.at("chart");
        g.chart = {q4(c.at(0)), q4(c.at(1)), q4(c.at(2)), q4(c.at(3))};
    }
    g.infinity_point = g.chart.col0();
    if (j.contains("infinity_point")) {
        const auto& p = j.at("infinity_point");
        g.infinity_point = {q4(p.at(0)), q4(p.at(1))};
    }
    g.validate();
    return g;
}

std::string grid_to_obj(const ImmersionGrid& g, int drop_axis, bool standard_chart) {
    if (drop_axis < 0 || drop_axis > 3) throw std::invalid_argument("drop_axis must be 0..3");
    GridSpec gs = g.spec();
    std::vector<std::array<double, 4>> pts(gs.size());
    bool use_std = standard_chart;
    for (std::size_t k = 0; k < gs.size() && use_std; ++k) {
        auto v = g.standard_value(k);
        if (!v || v->norm() > 1e6) use_std = false;
        else pts[k] = {v->w, v->x, v->y, v->z};
    }
    if (!use_std)
        for (std::size_t k = 0; k < gs.size(); ++k) pts[k] = {g.values[k].w, g.values[k].x, g.values[k].y, g.values[k].z};
    std::ostringstream os;
    os.precision(17);
    for (const auto& p : pts) {
        double r[3];
        for (int c = 0, o = 0; c < 4; ++c)
            if (c != drop_axis) r[o++] = p[c];
        os << "v " << r[0] << ' ' << r[2] << ' ' << r[1] << '\n';
    }
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            std::size_t a = gs.at(i, j) + 1, b = gs.at(i + 1, j) + 1, c = gs.at(i + 1, j + 1) + 1, d = gs.at(i, j + 1) + 1;
            os << "f " << a << ' ' << b << ' ' << c << '\n' << "f " << a << ' ' << c << ' ' << d << '\n';
        }
    return os.str();
}

}  // namespace qspec
