#include "qspec/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qspec/oracle.hpp"

namespace qspec {

namespace {

using nlohmann::json;

// Reads keys from one JSON object and rejects anything it was not asked about.
class Reader {
public:
    Reader(const json& j, std::string ctx) : j_(j), ctx_(std::move(ctx)) {
        if (!j_.is_object()) fail("expected an object");
    }

    bool has(const char* key) const { return j_.contains(key); }
    const json& raw(const char* key) {
        seen_.insert(key);
        return j_.at(key);
    }
    std::string where(const char* key) const { return ctx_.empty() ? key : ctx_ + "." + key; }

    void get(const char* key, int& out) {
        if (!has(key)) return;
        const json& v = raw(key);
        if (!v.is_number_integer()) fail_key(key, "expected an integer");
        out = v.get<int>();
    }
    void get(const char* key, unsigned long long& out) {
        if (!has(key)) return;
        const json& v = raw(key);
        if (!v.is_number_unsigned()) fail_key(key, "expected a non-negative integer");
        out = v.get<unsigned long long>();
    }
    void get(const char* key, double& out) {
        if (!has(key)) return;
        const json& v = raw(key);
        if (!v.is_number()) fail_key(key, "expected a number");
        out = v.get<double>();
    }
    void get(const char* key, bool& out) {
        if (!has(key)) return;
        const json& v = raw(key);
        if (!v.is_boolean()) fail_key(key, "expected true or false");
        out = v.get<bool>();
    }
    void get(const char* key, std::string& out) {
        if (!has(key)) return;
        const json& v = raw(key);
        if (!v.is_string()) fail_key(key, "expected a string");
        out = v.get<std::string>();
    }
    void get(const char* key, cplx& out) {
        if (has(key)) out = to_cplx(raw(key), where(key));
    }
    void get(const char* key, std::optional<cplx>& out) {
        if (has(key)) out = to_cplx(raw(key), where(key));
    }

    void done() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError("unknown key '" + where(it.key().c_str()) + "'");
    }

    [[noreturn]] void fail(const std::string& msg) const { throw ConfigError((ctx_.empty() ? "config" : ctx_) + ": " + msg); }
    [[noreturn]] void fail_key(const char* key, const std::string& msg) const { throw ConfigError(where(key) + ": " + msg); }

    static cplx to_cplx(const json& v, const std::string& ctx) {
        if (v.is_number()) return {v.get<double>(), 0};
        if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
            return {v[0].get<double>(), v[1].get<double>()};
        throw ConfigError(ctx + ": expected a number or [re, im]");
    }

private:
    const json& j_;
    std::string ctx_;
    std::set<std::string> seen_;
};

json parse_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

Lattice read_lattice(const json& v, const std::string& ctx) {
    if (!v.is_array() || v.size() != 2) throw ConfigError(ctx + ": expected two generators [[re, im], [re, im]]");
    Lattice lat{Reader::to_cplx(v[0], ctx), Reader::to_cplx(v[1], ctx)};
    try {
        lat.validate();
    } catch (const std::exception& e) {
        throw ConfigError(ctx + ": " + e.what());
    }
    return lat;
}

ModeIndex read_mode(const json& v, const std::string& ctx) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer())
        throw ConfigError(ctx + ": expected [m, n]");
    return {v[0].get<int>(), v[1].get<int>()};
}

std::pair<double, double> read_range(const json& v, const std::string& ctx) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw ConfigError(ctx + ": expected [lo, hi]");
    double lo = v[0].get<double>(), hi = v[1].get<double>();
    if (!(lo < hi)) throw ConfigError(ctx + ": empty range");
    return {lo, hi};
}

SourceConfig read_source(const json& v, const std::string& ctx) {
    Reader r(v, ctx);
    SourceConfig s;
    std::string type;
    if (!r.has("type")) r.fail("missing 'type'");
    r.get("type", type);
    if (type == "constant_q") {
        s.kind = SourceConfig::Kind::ConstantQ;
        if (r.has("lattice")) s.lat = read_lattice(r.raw("lattice"), r.where("lattice"));
        r.get("c", s.c);
        r.get("alpha", s.alpha);
        if (r.has("spin_shift")) s.spin_shift = read_mode(r.raw("spin_shift"), r.where("spin_shift"));
    } else if (type == "holo" || type == "grid") {
        s.kind = type == "holo" ? SourceConfig::Kind::Holo : SourceConfig::Kind::Grid;
        if (!r.has("path")) r.fail("missing 'path'");
        r.get("path", s.path);
    } else if (type == "immersion") {
        s.kind = SourceConfig::Kind::Immersion;
        r.get("name", s.name);
        r.get("theta", s.theta);
        r.get("infinity_value", s.infinity_value);
        if (r.has("grid")) {
            const json& g = r.raw("grid");
            if (!g.is_array() || g.size() != 2 || !g[0].is_number_integer() || !g[1].is_number_integer())
                r.fail_key("grid", "expected [nx, ny]");
            s.nx = g[0].get<int>();
            s.ny = g[1].get<int>();
        }
        require(s.name == "clifford" || s.name == "homogeneous" || s.name == "figure_eight",
                ctx + ".name: expected clifford, homogeneous or figure_eight");
        require(s.nx >= 16 && s.ny >= 16, ctx + ".grid: resolution must be >= 16 per direction");
    } else {
        r.fail("unknown source type '" + type + "'");
    }
    r.done();
    return s;
}

void read_spectrum_options(const json& v, const std::string& ctx, SpectrumOptions& o) {
    Reader r(v, ctx);
    r.get("fiber_tol", o.fiber_tol);
    r.get("kernel_tol", o.kernel_tol);
    r.get("collision_factor", o.collision_factor);
    r.get("infinite_beta_tol", o.infinite_beta_tol);
    r.get("pivot_tol", o.pivot_tol);
    r.get("sheet_fraction", o.sheet_fraction);
    r.get("sheet_probes", o.sheet_probes);
    r.get("edge_tol", o.edge_tol);
    r.get("handle_tol", o.handle_tol);
    r.get("ls_radius", o.ls_radius);
    r.get("svd_block_limit", o.svd_block_limit);
    r.done();
    require(o.fiber_tol > 0 && o.kernel_tol > 0 && o.edge_tol > 0 && o.handle_tol >= 0, ctx + ": tolerances must be positive");
    require(o.collision_factor > 0 && o.sheet_probes >= 1 && o.svd_block_limit >= 1, ctx + ": invalid scan parameters");
}

void read_extract_options(const json& v, const std::string& ctx, ExtractOptions& o) {
    Reader r(v, ctx);
    r.get("q_modes", o.q_modes);
    r.get("q_tol", o.q_tol);
    r.get("frame_tol", o.frame_tol);
    r.done();
}

void read_darboux_options(const json& v, const std::string& ctx, DarbouxOptions& o) {
    Reader r(v, ctx);
    r.get("cross_tol", o.cross_tol);
    r.get("zero_tol", o.zero_tol);
    r.get("constant_tol", o.constant_tol);
    r.get("chart_keep", o.chart_keep);
    r.done();
}

void check_threads(int t) { require(t >= 1, "threads: must be >= 1"); }
void check_N(int N) { require(N >= 1 && N <= 64, "N: must be in 1..64"); }

}  // namespace

SpectrumRun parse_spectrum_config(const std::string& text) {
    json j = parse_text(text);
    Reader r(j, "");
    SpectrumRun run;
    if (!r.has("source")) r.fail("missing 'source'");
    run.source = read_source(r.raw("source"), "source");
    r.get("N", run.N);
    r.get("samples", run.samples);
    r.get("cutoff", run.cutoff);
    r.get("threads", run.threads);
    if (r.has("window")) {
        Reader w(r.raw("window"), "window");
        if (w.has("re")) std::tie(run.window.re_min, run.window.re_max) = read_range(w.raw("re"), "window.re");
        if (w.has("im")) std::tie(run.window.im_min, run.window.im_max) = read_range(w.raw("im"), "window.im");
        w.done();
    }
    if (r.has("spectrum")) read_spectrum_options(r.raw("spectrum"), "spectrum", run.spectrum);
    if (r.has("extract")) read_extract_options(r.raw("extract"), "extract", run.extract);
    r.done();
    check_N(run.N);
    check_threads(run.threads);
    require(run.samples >= 2, "samples: must be >= 2");
    require(run.cutoff > 0, "cutoff: must be positive");
    run.spectrum.threads = run.threads;
    run.extract.N = run.N;
    return run;
}

DarbouxRun parse_darboux_config(const std::string& text) {
    json j = parse_text(text);
    Reader r(j, "");
    DarbouxRun run;
    if (!r.has("source")) r.fail("missing 'source'");
    run.source = read_source(r.raw("source"), "source");
    require(run.source.has_immersion(), "source: darboux needs an immersion or grid source");
    r.get("N", run.N);
    r.get("cutoff", run.cutoff);
    r.get("pair_tol", run.pair_tol);
    r.get("drop_axis", run.drop_axis);
    r.get("meshes", run.meshes);
    r.get("threads", run.threads);
    if (!r.has("samples")) r.fail("missing 'samples'");
    const json& arr = r.raw("samples");
    require(arr.is_array() && !arr.empty(), "samples: expected a non-empty array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
        Reader s(arr[i], "samples[" + std::to_string(i) + "]");
        DarbouxSampleSpec spec;
        if (!s.has("a")) s.fail("missing 'a'");
        s.get("a", spec.a);
        s.get("b", spec.b);
        s.get("root", spec.root);
        s.done();
        require(spec.root >= 0, s.where("root") + ": must be >= 0");
        run.samples.push_back(spec);
    }
    if (r.has("spectrum")) read_spectrum_options(r.raw("spectrum"), "spectrum", run.spectrum);
    if (r.has("extract")) read_extract_options(r.raw("extract"), "extract", run.darboux.extract);
    if (r.has("darboux")) read_darboux_options(r.raw("darboux"), "darboux", run.darboux);
    r.done();
    check_N(run.N);
    check_threads(run.threads);
    require(run.cutoff > 0, "cutoff: must be positive");
    require(run.drop_axis >= 0 && run.drop_axis <= 3, "drop_axis: must be 0..3");
    run.spectrum.threads = run.threads;
    run.darboux.extract.N = run.N;
    return run;
}

VerifyConfig parse_verify_config(const std::string& text) {
    json j = parse_text(text);
    Reader r(j, "");
    VerifyConfig c;
    r.get("N", c.N);
    r.get("seed", c.seed);
    r.get("cutoff", c.cutoff);
    r.get("vacuum_random_samples", c.vacuum_random_samples);
    r.get("homogeneous_draws", c.homogeneous_draws);
    r.get("handle_c", c.handle_c);
    r.get("handle_half_width", c.handle_half_width);
    r.get("handle_samples", c.handle_samples);
    r.get("generic_half_width", c.generic_half_width);
    r.get("generic_samples", c.generic_samples);
    r.get("generic_points", c.generic_points);
    r.get("grid_coarse", c.grid_coarse);
    r.get("grid_fine", c.grid_fine);
    r.get("infinity_value", c.infinity_value);
    cplx s(c.sample_re, c.sample_im), t(c.second_re, c.second_im);
    r.get("sample", s);
    r.get("second_sample", t);
    c.sample_re = s.real(), c.sample_im = s.imag();
    c.second_re = t.real(), c.second_im = t.imag();
    r.get("clifford_scan_samples", c.clifford_scan_samples);
    r.get("clifford_scan_half_width", c.clifford_scan_half_width);
    r.get("end_samples", c.end_samples);
    r.get("end_step", c.end_step);
    r.get("end_angle", c.end_angle);
    r.get("truncation_perturbation", c.truncation_perturbation);
    r.get("threads", c.threads);
    if (r.has("spectrum")) read_spectrum_options(r.raw("spectrum"), "spectrum", c.spectrum);
    r.done();
    check_N(c.N);
    check_threads(c.threads);
    require(c.cutoff > 0, "cutoff: must be positive");
    require(c.grid_coarse >= 16 && c.grid_fine >= 16, "grid_coarse, grid_fine: must be >= 16");
    require(c.handle_samples >= 2 && c.generic_samples >= 2 && c.clifford_scan_samples >= 2, "scan sample counts must be >= 2");
    require(c.vacuum_random_samples >= 0 && c.homogeneous_draws >= 0 && c.generic_points >= 0 && c.end_samples >= 0,
            "sample counts must be >= 0");
    return c;
}

MeshRun parse_mesh_config(const std::string& text) {
    json j = parse_text(text);
    Reader r(j, "");
    MeshRun run;
    if (!r.has("source")) r.fail("missing 'source'");
    run.source = read_source(r.raw("source"), "source");
    require(run.source.has_immersion(), "source: export-mesh needs an immersion or grid source");
    r.get("drop_axis", run.drop_axis);
    r.get("standard_chart", run.standard_chart);
    r.get("name", run.name);
    r.done();
    require(run.drop_axis >= 0 && run.drop_axis <= 3, "drop_axis: must be 0..3");
    require(!run.name.empty() && run.name.find('/') == std::string::npos, "name: must be a plain file stem");
    return run;
}

std::string holo_to_json(const HoloData& hd) {
    auto c2 = [](cplx z) { return json::array({z.real(), z.imag()}); };
    nlohmann::ordered_json j;
    j["lattice"] = json::array({c2(hd.lat.gamma1), c2(hd.lat.gamma2)});
    j["alpha"] = c2(hd.alpha);
    j["N"] = hd.N;
    json q = json::array();
    for (const auto& [k, v] : hd.qcoeffs) q.push_back(json::array({k.first, k.second, v.real(), v.imag()}));
    j["q"] = q;
    return j.dump(1);
}

HoloData holo_from_json(const std::string& text) {
    json j = parse_text(text);
    Reader r(j, "holo");
    HoloData hd;
    if (r.has("lattice")) hd.lat = read_lattice(r.raw("lattice"), "holo.lattice");
    r.get("alpha", hd.alpha);
    r.get("N", hd.N);
    if (r.has("q")) {
        const json& q = r.raw("q");
        require(q.is_array(), "holo.q: expected [[m, n, re, im], ...]");
        for (const json& e : q) {
            require(e.is_array() && e.size() == 4 && e[0].is_number_integer() && e[1].is_number_integer() &&
                        e[2].is_number() && e[3].is_number(),
                    "holo.q: expected [[m, n, re, im], ...]");
            hd.qcoeffs[{e[0].get<int>(), e[1].get<int>()}] = {e[2].get<double>(), e[3].get<double>()};
        }
    }
    r.done();
    try {
        hd.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("holo: ") + e.what());
    }
    return hd;
}

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

ImmersionGrid load_immersion(const SourceConfig& s) {
    if (s.kind == SourceConfig::Kind::Grid) {
        try {
            return grid_from_json(read_file(s.path));
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError("grid '" + s.path + "': " + e.what());
        }
    }
    if (s.kind != SourceConfig::Kind::Immersion) throw ConfigError("source has no immersion");
    try {
        if (s.name == "figure_eight") return figure_eight_fixture(s.nx, s.ny);
        double theta = s.name == "clifford" ? 0.78539816339744830962 : s.theta;
        return homogeneous_torus(theta, s.nx, s.ny, s.infinity_value);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("source: ") + e.what());
    }
}

HoloData load_holo(const SourceConfig& s, int N, const ExtractOptions& extract) {
    switch (s.kind) {
    case SourceConfig::Kind::ConstantQ:
        return HomogeneousModel{s.lat, s.c, s.alpha, s.spin_shift}.holo(N);
    case SourceConfig::Kind::Holo: {
        HoloData hd = holo_from_json(read_file(s.path));
        hd.N = N;
        return hd;
    }
    default: {
        ExtractOptions xo = extract;
        xo.N = N;
        return extract_holo(load_immersion(s), xo).hd;
    }
    }
}

}  // namespace qspec
