#include "qspec/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>

#include <nlohmann/json.hpp>

namespace qspec {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

ojson cjson(cplx z) { return ojson::array({z.real(), z.imag()}); }

std::string g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
    if (!out) throw std::runtime_error("write failed: " + p.string());
}

void prepare(const fs::path& out) {
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw ConfigError("cannot create output directory " + out.string() + ": " + ec.message());
}

ojson collision_json(const CollisionMarker& c) {
    ojson j;
    j["a"] = cjson(c.a);
    j["b"] = cjson(c.b);
    j["kind"] = to_string(c.kind);
    j["gap"] = c.gap;
    j["local_branches"] = c.local_branches;
    j["constant_term"] = c.constant_term;
    j["quad_scale"] = c.quad_scale;
    j["fit_residual"] = c.fit_residual;
    j["origin"] = c.origin;
    return j;
}

}  // namespace

std::string spectrum_csv(const BranchSet& bs) {
    std::string s = "re_a,im_a,re_b,im_b,sigma_min,branch_id,flag\n";
    for (const BranchPoint& p : bs.samples) {
        s += g17(p.a.real()) + ',' + g17(p.a.imag()) + ',' + g17(p.b.real()) + ',' + g17(p.b.imag()) + ',' + g17(p.sigma) +
             ',' + std::to_string(p.branch) + ',' + p.flag + '\n';
    }
    return s;
}

int cmd_spectrum(const SpectrumRun& run, const fs::path& out, std::ostream& log) {
    prepare(out);
    HoloData hd = load_holo(run.source, run.N, run.extract);
    SpectrumEngine eng(hd, run.spectrum);
    BranchSet bs = eng.scan(run.window, run.samples, run.cutoff);

    ojson br;
    br["window"] = {{"re", {run.window.re_min, run.window.re_max}}, {"im", {run.window.im_min, run.window.im_max}}};
    br["samples_per_side"] = run.samples;
    br["cutoff"] = bs.cutoff;
    br["step"] = bs.step;
    br["N"] = hd.N;
    ojson branches = ojson::array();
    for (const Branch& b : bs.branches) {
        ojson pts = ojson::array();
        for (const BranchPoint& p : b.pts) pts.push_back({p.a.real(), p.a.imag(), p.b.real(), p.b.imag()});
        branches.push_back({{"id", b.id}, {"points", pts}});
    }
    br["branches"] = branches;
    ojson sheets = ojson::array();
    for (const SheetMarker& s : bs.sheets) {
        ojson modes = ojson::array();
        for (auto [m, n] : s.modes) modes.push_back({m, n});
        sheets.push_back({{"a", cjson(s.a)}, {"modes", modes}});
    }
    br["sheets"] = sheets;

    ojson col;
    ojson list = ojson::array();
    int handles = 0, doubles = 0;
    for (const CollisionMarker& c : bs.collisions) {
        list.push_back(collision_json(c));
        handles += c.kind == CollisionKind::Handle;
        doubles += c.kind == CollisionKind::DoublePoint;
    }
    col["collisions"] = list;

    write_file(out / "spectrum.csv", spectrum_csv(bs));
    write_file(out / "branches.json", br.dump(1) + "\n");
    write_file(out / "collisions.json", col.dump(1) + "\n");
    log << "samples " << bs.samples.size() << ", branches " << bs.branches.size() << ", collisions " << bs.collisions.size()
        << " (" << handles << " handle, " << doubles << " double point)\n";
    return kExitOk;
}

namespace {

SpectrumSample resolve_sample(const SpectrumEngine& eng, const DarbouxSampleSpec& s, double cutoff) {
    if (s.b) return eng.kernel_at({s.a, *s.b});
    FiberSolveResult f = eng.fiber_roots(s.a, cutoff);
    std::vector<FiberRoot> r = f.roots;
    std::stable_sort(r.begin(), r.end(), [](const FiberRoot& x, const FiberRoot& y) { return std::abs(x.b) < std::abs(y.b); });
    if (s.root >= int(r.size()))
        throw std::runtime_error("fiber at a = " + g17(s.a.real()) + "+" + g17(s.a.imag()) + "i has only " +
                                 std::to_string(r.size()) + " roots");
    return eng.kernel_at({s.a, r[s.root].b});
}

}  // namespace

int cmd_darboux(const DarbouxRun& run, const fs::path& out, std::ostream& log) {
    prepare(out);
    ImmersionGrid f = load_immersion(run.source);
    ExtractedHolo eh = extract_holo(f, run.darboux.extract);
    SpectrumEngine eng(eh.hd, run.spectrum);
    std::vector<SpectrumSample> samples;
    for (const DarbouxSampleSpec& s : run.samples) samples.push_back(resolve_sample(eng, s, run.cutoff));
    FamilyReport fam = family_map(f, eh, samples, run.darboux, run.threads);

    ojson rep;
    rep["willmore_f"] = classical_willmore(f);
    rep["willmore_bundle"] = willmore_energy(eh.hd);
    rep["extraction"] = {{"alpha", cjson(eh.hd.alpha)}, {"q_modes", eh.hd.qcoeffs.size()},
                         {"reconstruction_residual", eh.reconstruction_residual}};
    ojson members = ojson::array();
    bool all_ok = true;
    for (std::size_t i = 0; i < fam.members.size(); ++i) {
        const FamilyMember& m = fam.members[i];
        ojson j;
        j["index"] = i;
        j["a"] = cjson(m.omega.a);
        j["b"] = cjson(m.omega.b);
        j["kernel_dim"] = samples[i].kernel_dim;
        j["ok"] = m.ok;
        if (!m.ok) {
            j["error"] = m.error;
            all_ok = false;
        } else {
            j["class"] = to_string(m.cls);
            j["prolongation_residual"] = m.prolongation_residual;
            j["distance_to_f"] = m.distance_to_f;
            if (m.cls == DarbouxClass::Regular) {
                j["willmore"] = m.willmore;
                j["conformality_residual"] = m.conformality_residual;
                if (run.meshes && m.mesh) {
                    std::string name = "member_" + std::to_string(i) + ".obj";
                    write_file(out / name, grid_to_obj(*m.mesh, run.drop_axis));
                    j["mesh"] = name;
                }
            }
        }
        members.push_back(j);
    }
    rep["members"] = members;
    ojson pairs = ojson::array();
    for (auto [i, j, d] : fam.rho_pairs) pairs.push_back({{"i", i}, {"j", j}, {"distance", d}, {"identical", d <= run.pair_tol}});
    rep["rho_pairs"] = pairs;
    rep["decreasing_fraction"] = fam.decreasing_fraction;
    if (run.meshes) {
        write_file(out / "f.obj", grid_to_obj(f, run.drop_axis));
        rep["mesh_f"] = "f.obj";
    }
    write_file(out / "family.json", rep.dump(1) + "\n");
    for (const ojson& m : members) {
        log << "member " << m["index"].get<int>() << ": ";
        if (m["ok"].get<bool>()) log << m["class"].get<std::string>() << ", distance " << m["distance_to_f"].get<double>();
        else log << "failed: " << m["error"].get<std::string>();
        log << "\n";
    }
    return all_ok ? kExitOk : kExitSolver;
}

std::string format_criterion(const CriterionResult& c) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s  %-3s %-42s measured %.6g %s %.6g", c.pass ? "PASS" : "FAIL", c.id.c_str(),
                  c.name.c_str(), c.measured, c.relation.c_str(), c.bound);
    std::string s = buf;
    if (c.details.contains("error")) s += "  error: " + c.details["error"].get<std::string>();
    return s;
}

int cmd_verify(const VerifyConfig& cfg, const fs::path& out, std::ostream& log) {
    prepare(out);
    VerifyReport rep = run_verify(cfg);
    write_file(out / "verify_report.json", rep.to_json(cfg).dump(1) + "\n");
    write_file(out / "verify_timings.json", rep.timings_json().dump(1) + "\n");
    for (const CriterionResult& c : rep.criteria) log << format_criterion(c) << "\n";
    log << (rep.all_pass ? "all criteria pass" : "some criteria fail") << "\n";
    return rep.all_pass ? kExitOk : kExitFail;
}

int cmd_export_mesh(const MeshRun& run, const fs::path& out, std::ostream& log) {
    prepare(out);
    ImmersionGrid g = load_immersion(run.source);
    g.validate();
    write_file(out / (run.name + ".obj"), grid_to_obj(g, run.drop_axis, run.standard_chart));
    write_file(out / (run.name + ".json"), grid_to_json(g));
    log << "wrote " << run.name << ".obj (" << g.nx * g.ny << " vertices)\n";
    return kExitOk;
}

int run_guarded(const std::function<int()>& fn, std::ostream& err) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NotImmersedError& e) {
        err << "non-immersed grid: " << e.what() << "\n";
        return kExitNotImmersed;
    } catch (const std::exception& e) {
        err << "solver failure: " << e.what() << "\n";
        return kExitSolver;
    }
}

}  // namespace qspec
