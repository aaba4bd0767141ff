#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "qspec/cli.hpp"

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw qspec::ConfigError("cannot read config '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral curves and Darboux transforms of conformal tori"};
    app.require_subcommand(1);
    std::string config, out = "out";
    int threads = 0;
    auto add_common = [&](CLI::App* sub, bool config_required) {
        auto* opt = sub->add_option("--config", config, "JSON configuration")->check(CLI::ExistingFile);
        if (config_required) opt->required();
        sub->add_option("--out", out, "output directory")->capture_default_str();
        sub->add_option("--threads", threads, "worker threads (overrides the config)")->check(CLI::PositiveNumber);
    };
    auto* spectrum = app.add_subcommand("spectrum", "scan the spectral curve over a window of a");
    auto* darboux = app.add_subcommand("darboux", "Darboux transforms at selected spectrum points");
    auto* verify = app.add_subcommand("verify", "run the acceptance suite");
    auto* mesh = app.add_subcommand("export-mesh", "write an immersion as OBJ and grid JSON");
    add_common(spectrum, true);
    add_common(darboux, true);
    add_common(verify, false);
    add_common(mesh, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : qspec::kExitConfig;
    }

    return qspec::run_guarded(
        [&]() -> int {
            if (spectrum->parsed()) {
                qspec::SpectrumRun run = qspec::parse_spectrum_config(slurp(config));
                if (threads > 0) run.threads = run.spectrum.threads = threads;
                return qspec::cmd_spectrum(run, out, std::cout);
            }
            if (darboux->parsed()) {
                qspec::DarbouxRun run = qspec::parse_darboux_config(slurp(config));
                if (threads > 0) run.threads = run.spectrum.threads = threads;
                return qspec::cmd_darboux(run, out, std::cout);
            }
            if (verify->parsed()) {
                qspec::VerifyConfig cfg = config.empty() ? qspec::VerifyConfig{} : qspec::parse_verify_config(slurp(config));
                if (threads > 0) cfg.threads = threads;
                return qspec::cmd_verify(cfg, out, std::cout);
            }
            qspec::MeshRun run = qspec::parse_mesh_config(slurp(config));
            return qspec::cmd_export_mesh(run, out, std::cout);
        },
        std::cerr);
}
