#include "qspec/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "qspec/parallel.hpp"

namespace qspec {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

bool lex_less(cplx x, cplx y) { return x.real() < y.real() || (x.real() == y.real() && x.imag() < y.imag()); }

double abs2(cplx a, cplx b) { return std::sqrt(std::norm(a) + std::norm(b)); }

}  // namespace

const char* to_string(CollisionKind k) {
    switch (k) {
        case CollisionKind::DoublePoint: return "double_point";
        case CollisionKind::Handle: return "handle";
        default: return "unresolved";
    }
}

std::vector<cplx> FiberSolveResult::values() const {
    std::vector<cplx> v;
    v.reserve(roots.size());
    for (const auto& r : roots) v.push_back(r.b);
    return v;
}

SpectrumEngine::SpectrumEngine(HoloData hd, SpectrumOptions opt) : hd_(std::move(hd)), opt_(opt) {
    hd_.validate();
    db_ = dual_basis(hd_.lat);
    win_ = hd_.window();
    bs_ = block_structure(hd_);
    const int M = win_.count();
    local_u_.assign(M, -1);
    local_v_.assign(M, -1);
    for (size_t b = 0; b < bs_.u_modes.size(); ++b) {
        for (size_t i = 0; i < bs_.u_modes[b].size(); ++i) local_u_[bs_.u_modes[b][i]] = int(i);
        for (size_t i = 0; i < bs_.v_modes[b].size(); ++i) local_v_[bs_.v_modes[b][i]] = int(i);
    }
}

double SpectrumEngine::operator_scale(cplx a) const {
    double qsum = 0;
    for (const auto& [k, c] : hd_.qcoeffs) qsum += std::abs(c);
    double r = 0;
    for (int k = 0; k < win_.count(); ++k) {
        auto [m, n] = win_.mode(k);
        HarmonicForm eta = db_.at(m, n);
        r = std::max(r, std::abs(eta.b - std::conj(hd_.alpha)));
        r = std::max(r, std::abs(eta.a + a - hd_.alpha));
    }
    return std::max(1.0, r + qsum);
}

CMat SpectrumEngine::block_matrix(int blk, const HarmonicForm& omega) const {
    const auto& U = bs_.u_modes[blk];
    const auto& V = bs_.v_modes[blk];
    const int nu = int(U.size()), nv = int(V.size());
    CMat w = CMat::Zero(nu + nv, nu + nv);
    for (int i = 0; i < nu; ++i) {
        auto [m, n] = win_.mode(U[i]);
        w(i, i) = db_.at(m, n).b + omega.b - std::conj(hd_.alpha);
        for (const auto& [kap, c] : hd_.qcoeffs)
            if (win_.contains(m + kap.first, n + kap.second))
                w(i, nu + local_v_[win_.index(m + kap.first, n + kap.second)]) -= std::conj(c);
    }
    for (int i = 0; i < nv; ++i) {
        auto [m, n] = win_.mode(V[i]);
        w(nu + i, nu + i) = db_.at(m, n).a + omega.a - hd_.alpha;
        for (const auto& [kap, c] : hd_.qcoeffs)
            if (win_.contains(m - kap.first, n - kap.second))
                w(nu + i, local_u_[win_.index(m - kap.first, n - kap.second)]) += c;
    }
    return w;
}

void SpectrumEngine::solve_block(int blk, cplx a, double scale, double cutoff, bool want_kernels,
                                 FiberSolveResult& out) const {
    const auto& U = bs_.u_modes[blk];
    const auto& V = bs_.v_modes[blk];
    const int nu = int(U.size()), nv = int(V.size());
    const double ftol = opt_.fiber_tol * scale;
    CMat m0 = block_matrix(blk, {a, 0});

    if (nu == 0) {
        double mn = m0.diagonal().cwiseAbs().minCoeff();
        if (mn < ftol) {
            out.a_sheet = true;
            for (int i = 0; i < nv; ++i)
                if (std::abs(m0(i, i)) < ftol) out.sheet_modes.push_back(win_.mode(V[i]));
        }
        return;
    }

    std::vector<std::pair<cplx, CVec>> cand;
    if (nv == 0) {
        for (int i = 0; i < nu; ++i) {
            CVec x = CVec::Zero(nu);
            x(i) = 1;
            cand.emplace_back(-m0(i, i), x);
        }
    } else {
        CVec B = m0.diagonal().tail(nv);
        const double minB = B.cwiseAbs().minCoeff();
        if (minB > opt_.pivot_tol * scale) {
            CMat A = m0.topLeftCorner(nu, nu);
            CMat Cb = m0.topRightCorner(nu, nv);
            CMat C = m0.bottomLeftCorner(nv, nu);
            CMat BinvC = B.cwiseInverse().asDiagonal() * C;
            CMat S = -(A - Cb * BinvC);
            linalg::Eig e = linalg::eig(S, true);
            for (Eigen::Index k = 0; k < e.values.size(); ++k) {
                CVec x(nu + nv);
                x.head(nu) = e.vectors.col(k);
                x.tail(nv) = -(BinvC * e.vectors.col(k));
                cand.emplace_back(e.values(k), x);
            }
        } else {
            // near a v-diagonal zero: test for an identically vanishing determinant first
            int small = 0;
            const int K = std::max(1, opt_.sheet_probes);
            for (int k = 0; k < K; ++k) {
                cplx bp = 0.5 * cutoff * std::exp(cplx(0, kTwoPi * (k + 0.377) / K));
                CMat w = m0;
                w.topLeftCorner(nu, nu).diagonal().array() += bp;
                if (linalg::singular_values(w)(0) < ftol) ++small;
            }
            if (small >= opt_.sheet_fraction * K) {
                out.a_sheet = true;
                for (int i = 0; i < nv; ++i)
                    if (std::abs(B(i)) <= opt_.pivot_tol * scale) out.sheet_modes.push_back(win_.mode(V[i]));
                return;
            }
            CMat E = CMat::Zero(nu + nv, nu + nv);
            E.topLeftCorner(nu, nu).setIdentity();
            linalg::GenEig g = linalg::gen_eig(m0, -E, true);
            for (Eigen::Index k = 0; k < g.alpha.size(); ++k) {
                if (std::abs(g.beta(k)) <= opt_.infinite_beta_tol * std::max(1.0, std::abs(g.alpha(k)))) continue;
                cand.emplace_back(g.alpha(k) / g.beta(k), g.vectors.col(k));
            }
        }
    }

    for (auto& [b, x] : cand) {
        if (!(std::abs(b) <= cutoff)) continue;
        CMat w = m0;
        w.topLeftCorner(nu, nu).diagonal().array() += b;
        double xn = x.norm();
        if (xn == 0) { ++out.rejected; continue; }
        x /= xn;
        FiberRoot r;
        r.b = b;
        r.block = blk;
        r.residual = (w * x).norm();
        r.sigma = (nu + nv) <= opt_.svd_block_limit ? linalg::singular_values(w)(0) : r.residual;
        if (!(r.sigma < ftol)) { ++out.rejected; continue; }
        double edge = 0;
        for (int i = 0; i < nu; ++i)
            if (win_.ring(U[i]) == win_.N) edge += std::norm(x(i));
        for (int i = 0; i < nv; ++i)
            if (win_.ring(V[i]) == win_.N) edge += std::norm(x(nu + i));
        r.edge = edge > opt_.edge_tol;
        if (want_kernels) {
            const int M = win_.count();
            r.kernel = CVec::Zero(2 * M);
            for (int i = 0; i < nu; ++i) r.kernel(U[i]) = x(i);
            for (int i = 0; i < nv; ++i) r.kernel(M + V[i]) = x(nu + i);
        }
        out.roots.push_back(std::move(r));
    }
}

FiberSolveResult SpectrumEngine::fiber_roots(cplx a, double cutoff, bool want_kernels) const {
    if (!(cutoff > 0)) throw std::invalid_argument("cutoff must be positive");
    FiberSolveResult out;
    out.a = a;
    out.norm = operator_scale(a);
    for (int blk = 0; blk < int(bs_.u_modes.size()); ++blk) {
        try {
            solve_block(blk, a, out.norm, cutoff, want_kernels, out);
        } catch (const SolverError& e) {
            throw SolverError(std::string(e.what()) + " at a=(" + std::to_string(a.real()) + "," +
                              std::to_string(a.imag()) + ")");
        }
    }
    std::stable_sort(out.roots.begin(), out.roots.end(), [](const FiberRoot& x, const FiberRoot& y) {
        return lex_less(x.b, y.b);
    });
    return out;
}

RVec SpectrumEngine::smallest_singular_values(const HarmonicForm& omega, int k) const {
    std::vector<double> all;
    for (int blk = 0; blk < int(bs_.u_modes.size()); ++blk) {
        RVec s = linalg::singular_values(block_matrix(blk, omega));
        all.insert(all.end(), s.data(), s.data() + s.size());
    }
    std::sort(all.begin(), all.end());
    k = std::min<int>(k, int(all.size()));
    RVec r(k);
    for (int i = 0; i < k; ++i) r(i) = all[i];
    return r;
}

double SpectrumEngine::sigma_min(const HarmonicForm& omega) const { return smallest_singular_values(omega, 1)(0); }

SpectrumSample SpectrumEngine::kernel_at(const HarmonicForm& omega) const {
    const double scale = operator_scale(omega.a) + std::abs(omega.b);
    const double ktol = opt_.kernel_tol * scale;
    const int M = win_.count();
    struct Cand { double s; int blk; int col; };
    std::vector<Cand> small;
    std::vector<linalg::Svd> svds(bs_.u_modes.size());
    std::vector<double> all;
    for (int blk = 0; blk < int(bs_.u_modes.size()); ++blk) {
        CMat w = block_matrix(blk, omega);
        RVec s = linalg::singular_values(w);
        all.insert(all.end(), s.data(), s.data() + s.size());
        if (s(0) < ktol) {
            svds[blk] = linalg::svd(w);
            for (Eigen::Index j = 0; j < svds[blk].s.size(); ++j)
                if (svds[blk].s(j) < ktol) small.push_back({svds[blk].s(j), blk, int(j)});
        }
    }
    std::sort(all.begin(), all.end());
    SpectrumSample out;
    out.omega = omega;
    out.sigma = all.empty() ? 0 : all.front();
    int k = std::min<int>(8, int(all.size()));
    out.smallest.resize(k);
    for (int i = 0; i < k; ++i) out.smallest(i) = all[i];
    if (!(out.sigma < ktol)) throw std::domain_error("not a spectrum point");
    std::stable_sort(small.begin(), small.end(), [](const Cand& x, const Cand& y) { return x.s < y.s; });
    for (const auto& c : small) {
        const auto& U = bs_.u_modes[c.blk];
        const auto& V = bs_.v_modes[c.blk];
        CVec x = CVec::Zero(2 * M);
        CVec v = svds[c.blk].v.col(c.col);
        for (size_t i = 0; i < U.size(); ++i) x(U[i]) = v(i);
        for (size_t i = 0; i < V.size(); ++i) x(M + V[i]) = v(U.size() + i);
        out.kernel.push_back(x);
    }
    out.kernel_dim = int(out.kernel.size());
    return out;
}

CollisionMarker SpectrumEngine::classify_site(cplx a0, cplx b0,
                                              std::optional<std::pair<ModeIndex, ModeIndex>> vu_modes,
                                              const std::string& origin) const {
    CollisionMarker cm;
    cm.a = a0;
    cm.b = b0;
    cm.origin = origin;
    const HarmonicForm site{a0, b0};

    // blocks carrying the two local coordinates
    std::vector<int> blocks;
    if (vu_modes) {
        int bv = bs_.block_of_v[win_.index(vu_modes->first.first, vu_modes->first.second)];
        int bu = bs_.block_of_u[win_.index(vu_modes->second.first, vu_modes->second.second)];
        blocks.push_back(bv);
        if (bu != bv) blocks.push_back(bu);
    } else {
        std::vector<std::pair<double, int>> sv;
        for (int blk = 0; blk < int(bs_.u_modes.size()); ++blk) {
            RVec s = linalg::singular_values(block_matrix(blk, site));
            for (Eigen::Index j = 0; j < std::min<Eigen::Index>(2, s.size()); ++j) sv.push_back({s(j), blk});
        }
        std::sort(sv.begin(), sv.end());
        for (size_t i = 0; i < std::min<size_t>(2, sv.size()); ++i)
            if (std::find(blocks.begin(), blocks.end(), sv[i].second) == blocks.end()) blocks.push_back(sv[i].second);
    }
    std::vector<int> offs;
    int dim = 0;
    for (int b : blocks) {
        offs.push_back(dim);
        dim += int(bs_.u_modes[b].size() + bs_.v_modes[b].size());
    }
    auto working = [&](const HarmonicForm& om) {
        CMat w = CMat::Zero(dim, dim);
        for (size_t i = 0; i < blocks.size(); ++i) {
            CMat bm = block_matrix(blocks[i], om);
            w.block(offs[i], offs[i], bm.rows(), bm.cols()) = bm;
        }
        return w;
    };
    if (dim < 2) return cm;

    // unitary coordinate change putting the two near-kernel directions first
    CMat Ul = CMat::Identity(dim, dim), Vr = CMat::Identity(dim, dim);
    if (vu_modes) {
        auto local_pos = [&](int blk, bool is_u, int global) {
            size_t i = std::find(blocks.begin(), blocks.end(), blk) - blocks.begin();
            int loc = is_u ? local_u_[global] : int(bs_.u_modes[blk].size()) + local_v_[global];
            return offs[i] + loc;
        };
        int gv = win_.index(vu_modes->first.first, vu_modes->first.second);
        int gu = win_.index(vu_modes->second.first, vu_modes->second.second);
        int pv = local_pos(bs_.block_of_v[gv], false, gv);
        int pu = local_pos(bs_.block_of_u[gu], true, gu);
        std::vector<int> order{pu, pv};
        for (int i = 0; i < dim; ++i)
            if (i != pu && i != pv) order.push_back(i);
        CMat P = CMat::Zero(dim, dim);
        for (int i = 0; i < dim; ++i) P(order[i], i) = 1;
        Ul = P;
        Vr = P;
    } else {
        linalg::Svd s = linalg::svd(working(site));
        Ul = s.u;
        Vr = s.v;
    }

    double r = opt_.ls_radius;
    if (!(r > 0)) r = 0.1 * std::min(std::abs(db_.eta1.a), std::abs(db_.eta2.a));

    const std::vector<cplx> pts{0, 1, -1, cplx(0, 1), cplx(0, -1)};
    Eigen::MatrixXcd A(25, 6);
    CVec F(25);
    int row = 0;
    for (cplx u : pts)
        for (cplx v : pts) {
            CMat w = Ul.adjoint() * working({a0 + r * u, b0 + r * v}) * Vr;
            CMat R = w.topLeftCorner(2, 2);
            if (dim > 2) {
                Eigen::PartialPivLU<CMat> lu(w.bottomRightCorner(dim - 2, dim - 2));
                R -= w.topRightCorner(2, dim - 2) * lu.solve(w.bottomLeftCorner(dim - 2, 2));
            }
            F(row) = R.determinant();
            A.row(row) << 1.0, u, v, u * u, u * v, v * v;
            ++row;
        }
    CVec c = A.colPivHouseholderQr().solve(F);
    double fn = F.norm();
    cm.fit_residual = fn > 0 ? (A * c - F).norm() / fn : 0;
    const cplx k = c(0), p = c(1), s = c(2), qa = c(3), qb = c(4), qc = c(5);
    const double qn = std::abs(qa) + std::abs(qb) + std::abs(qc);
    const cplx disc = qb * qb - 4.0 * qa * qc;
    if (qn == 0 || std::abs(disc) <= 1e-8 * qn * qn || cm.fit_residual > 0.05) return cm;
    // centre of the conic: H (u,v) = -(p,s) with H = [[2qa, qb],[qb, 2qc]]
    const cplx det = 4.0 * qa * qc - qb * qb;
    const cplx uc = (-(2.0 * qc) * p + qb * s) / det;
    const cplx vc = (qb * p - (2.0 * qa) * s) / det;
    if (abs2(uc, vc) > 2.0) return cm;
    const cplx kc = k + 0.5 * (p * uc + s * vc);
    cm.a = a0 + r * uc;
    cm.b = b0 + r * vc;
    cm.constant_term = std::abs(kc);
    cm.quad_scale = std::sqrt(std::abs(disc)) / (r * r);
    cm.local_branches = 2;
    cm.gap = 2.0 * std::sqrt(cm.constant_term / cm.quad_scale);
    cm.kind = cm.constant_term > opt_.handle_tol * cm.quad_scale ? CollisionKind::Handle : CollisionKind::DoublePoint;
    return cm;
}

namespace {

// Greedy nearest-neighbour assignment; returns -1 for unmatched, sets ambiguous when a
// second candidate is within twice the best distance.
std::vector<int> match_roots(const FiberSolveResult& prev, const FiberSolveResult& next, double jump, bool& ambiguous) {
    ambiguous = false;
    const size_t np = prev.roots.size(), nn = next.roots.size();
    std::vector<std::tuple<double, size_t, size_t>> pairs;
    for (size_t j = 0; j < nn; ++j) {
        double d1 = INFINITY, d2 = INFINITY;
        for (size_t i = 0; i < np; ++i) {
            double d = std::abs(next.roots[j].b - prev.roots[i].b);
            if (d < d1) { d2 = d1; d1 = d; } else if (d < d2) d2 = d;
            if (d < jump) pairs.emplace_back(d, i, j);
        }
        if (d1 < jump && d2 < 2 * d1 && d1 > 1e-12) ambiguous = true;
    }
    std::sort(pairs.begin(), pairs.end());
    std::vector<int> asg(nn, -1);
    std::vector<char> used(np, 0);
    for (auto& [d, i, j] : pairs)
        if (asg[j] < 0 && !used[i]) { asg[j] = int(i); used[i] = 1; }
    return asg;
}

}  // namespace

BranchSet SpectrumEngine::scan(const Rect& window, int samples, double cutoff) const {
    if (samples < 2) throw std::invalid_argument("scan needs samples >= 2");
    BranchSet bs;
    bs.cutoff = cutoff;
    const double dre = (window.re_max - window.re_min) / (samples - 1);
    const double dim = (window.im_max - window.im_min) / (samples - 1);
    bs.step = std::max(std::abs(dre), std::abs(dim));
    const double ctol = opt_.collision_factor * bs.step;

    std::vector<cplx> path;
    for (int r = 0; r < samples; ++r)
        for (int c = 0; c < samples; ++c) {
            int cc = (r % 2 == 0) ? c : samples - 1 - c;
            path.emplace_back(window.re_min + cc * dre, window.im_min + r * dim);
        }
    std::vector<FiberSolveResult> fibers(path.size());
    parallel_for(int(path.size()), opt_.threads, [&](int i) { fibers[i] = fiber_roots(path[i], cutoff); });

    // refine ambiguous segments by bisection
    struct Node { FiberSolveResult f; bool refined; };
    std::vector<Node> nodes;
    nodes.push_back({fibers[0], false});
    for (size_t i = 1; i < fibers.size(); ++i) {
        std::vector<Node> seg{{fibers[i - 1], false}, {fibers[i], false}};
        for (int depth = 0; depth < 4; ++depth) {
            bool any = false;
            std::vector<Node> next{seg[0]};
            for (size_t k = 1; k < seg.size(); ++k) {
                bool amb = false;
                match_roots(seg[k - 1].f, seg[k].f, ctol, amb);
                if (amb) {
                    any = true;
                    next.push_back({fiber_roots(0.5 * (seg[k - 1].f.a + seg[k].f.a), cutoff), true});
                }
                next.push_back(seg[k]);
            }
            seg.swap(next);
            if (!any) break;
        }
        for (size_t k = 1; k < seg.size(); ++k) nodes.push_back(seg[k]);
    }

    // sequential branch assignment
    int next_id = 0;
    std::vector<int> prev_ids;
    std::map<int, size_t> branch_pos;
    for (size_t n = 0; n < nodes.size(); ++n) {
        const auto& f = nodes[n].f;
        std::vector<int> ids(f.roots.size(), -1);
        if (n > 0) {
            bool amb = false;
            auto asg = match_roots(nodes[n - 1].f, f, ctol, amb);
            for (size_t j = 0; j < asg.size(); ++j)
                if (asg[j] >= 0) ids[j] = prev_ids[asg[j]];
        }
        for (size_t j = 0; j < f.roots.size(); ++j) {
            if (ids[j] < 0) ids[j] = next_id++;
            BranchPoint p;
            p.a = f.a;
            p.b = f.roots[j].b;
            p.sigma = f.roots[j].sigma;
            p.edge = f.roots[j].edge;
            p.branch = ids[j];
            p.flag = f.roots[j].edge ? "edge" : (nodes[n].refined ? "refined" : "ok");
            bs.samples.push_back(p);
            auto it = branch_pos.find(ids[j]);
            if (it == branch_pos.end()) {
                branch_pos[ids[j]] = bs.branches.size();
                bs.branches.push_back({ids[j], {p}});
            } else {
                bs.branches[it->second].pts.push_back(p);
            }
        }
        if (f.a_sheet) bs.sheets.push_back({f.a, f.sheet_modes});
        prev_ids = ids;
    }

    // collision sites
    std::vector<std::pair<cplx, cplx>> seen;
    auto fresh = [&](cplx a, cplx b) {
        for (auto& [sa, sb] : seen)
            if (abs2(a - sa, b - sb) < 0.5 * bs.step) return false;
        seen.emplace_back(a, b);
        return true;
    };
    const ModeWindow& w = win_;
    for (int kv = 0; kv < w.count(); ++kv) {
        auto mv = w.mode(kv);
        cplx a = hd_.alpha - db_.at(mv.first, mv.second).a;
        if (a.real() < window.re_min - 1e-12 || a.real() > window.re_max + 1e-12 || a.imag() < window.im_min - 1e-12 ||
            a.imag() > window.im_max + 1e-12)
            continue;
        for (int ku = 0; ku < w.count(); ++ku) {
            auto mu = w.mode(ku);
            cplx b = std::conj(hd_.alpha) - db_.at(mu.first, mu.second).b;
            if (std::abs(b) > cutoff) continue;
            if (!fresh(a, b)) continue;
            bs.collisions.push_back(classify_site(a, b, std::make_pair(mv, mu), "vacuum_lattice"));
        }
    }
    for (const auto& s : bs.sheets)
        for (const auto& p : bs.samples)
            if (p.a == s.a && fresh(p.a, p.b)) bs.collisions.push_back(classify_site(p.a, p.b, std::nullopt, "sheet_crossing"));
    // local minima of pairwise branch distance along the path
    std::map<std::pair<int, int>, std::vector<std::tuple<size_t, double, cplx, cplx>>> dist;
    {
        size_t idx = 0;
        for (size_t n = 0; n < nodes.size(); ++n) {
            size_t cnt = nodes[n].f.roots.size();
            for (size_t i = 0; i < cnt; ++i)
                for (size_t j = i + 1; j < cnt; ++j) {
                    const auto& p = bs.samples[idx + i];
                    const auto& q = bs.samples[idx + j];
                    double d = std::abs(p.b - q.b);
                    if (d < ctol) {
                        auto key = std::minmax(p.branch, q.branch);
                        dist[{key.first, key.second}].emplace_back(n, d, p.a, 0.5 * (p.b + q.b));
                    }
                }
            idx += cnt;
        }
    }
    for (auto& [key, seq] : dist) {
        for (size_t k = 1; k + 1 < seq.size(); ++k) {
            auto& [n0, d0, a0, b0] = seq[k - 1];
            auto& [n1, d1, a1, b1] = seq[k];
            auto& [n2, d2, a2, b2] = seq[k + 1];
            if (n1 != n0 + 1 || n2 != n1 + 1) continue;
            if (d1 < d0 && d1 < d2 && d1 < 2 * bs.step && fresh(a1, b1))
                bs.collisions.push_back(classify_site(a1, b1, std::nullopt, "branch_approach"));
        }
    }
    return bs;
}

FiberSolveResult fiber_roots(const HoloData& hd, cplx a, double cutoff, const SpectrumOptions& opt) {
    return SpectrumEngine(hd, opt).fiber_roots(a, cutoff);
}

BranchSet scan(const HoloData& hd, const Rect& window, int samples, double cutoff, const SpectrumOptions& opt) {
    return SpectrumEngine(hd, opt).scan(window, samples, cutoff);
}

SpectrumSample kernel_at(const HoloData& hd, const HarmonicForm& omega, const SpectrumOptions& opt) {
    return SpectrumEngine(hd, opt).kernel_at(omega);
}

RhoClosureReport rho_closure(const SpectrumEngine& eng, const std::vector<BranchPoint>& samples, double cutoff) {
    RhoClosureReport rep;
    for (const auto& p : samples) {
        if (p.edge || std::abs(p.a) > 0.8 * cutoff || std::abs(p.b) > 0.8 * cutoff) continue;
        FiberSolveResult f = eng.fiber_roots(std::conj(p.b), cutoff);
        ++rep.checked;
        if (f.a_sheet) {
            ++rep.via_sheet;
            continue;
        }
        double best = INFINITY;
        for (const auto& r : f.roots) best = std::min(best, std::abs(r.b - std::conj(p.a)));
        rep.max_defect = std::max(rep.max_defect, best);
    }
    return rep;
}

std::vector<VacuumCompareRow> vacuum_compare(const HoloData& hd, const std::vector<double>& radii, int angles,
                                             double cutoff, const SpectrumOptions& opt) {
    HoloData vac = hd;
    vac.qcoeffs.clear();
    SpectrumEngine e(hd, opt), ev(vac, opt);
    std::vector<VacuumCompareRow> rows;
    for (size_t k = 0; k + 1 < radii.size(); ++k) {
        VacuumCompareRow row;
        row.r_lo = radii[k];
        row.r_hi = radii[k + 1];
        for (int t = 0; t < angles; ++t) {
            double rad = 0.5 * (radii[k] + radii[k + 1]);
            cplx a = std::polar(rad, kTwoPi * (t + 0.25) / angles);
            auto f = e.fiber_roots(a, cutoff), g = ev.fiber_roots(a, cutoff);
            auto one_way = [&](const FiberSolveResult& x, const FiberSolveResult& y) {
                double d = 0;
                for (const auto& r : x.roots) {
                    if (r.edge || std::abs(r.b) > 0.8 * cutoff) continue;
                    double best = INFINITY;
                    for (const auto& s : y.roots) best = std::min(best, std::abs(r.b - s.b));
                    if (std::isfinite(best)) d = std::max(d, best);
                    ++row.compared;
                }
                return d;
            };
            row.distance = std::max({row.distance, one_way(f, g), one_way(g, f)});
        }
        rows.push_back(row);
    }
    return rows;
}

TruncationReport truncation_convergence(const HoloData& hd, const std::vector<cplx>& probes, double cutoff,
                                        const SpectrumOptions& opt) {
    HoloData big = hd;
    big.N = hd.N + 2;
    SpectrumEngine e(hd, opt), eb(big, opt);
    const ModeWindow w = hd.window();
    const int M = w.count();
    TruncationReport rep;
    for (cplx a : probes) {
        auto f = e.fiber_roots(a, cutoff, true);
        auto g = eb.fiber_roots(a, cutoff);
        for (const auto& r : f.roots) {
            double outer = 0;
            for (int k = 0; k < M; ++k)
                if (w.ring(k) > hd.N - 2) outer += std::norm(r.kernel(k)) + std::norm(r.kernel(M + k));
            if (outer > opt.edge_tol) continue;
            double best = INFINITY;
            for (const auto& s : g.roots) best = std::min(best, std::abs(r.b - s.b));
            rep.max_defect = std::max(rep.max_defect, best);
            ++rep.compared;
        }
    }
    return rep;
}

}  // namespace qspec
