#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>

#include "qspec/config.hpp"
#include "qspec/verify.hpp"

namespace qspec {

enum ExitCode { kExitOk = 0, kExitFail = 1, kExitConfig = 2, kExitSolver = 3, kExitNotImmersed = 4 };

// spectrum.csv, branches.json, collisions.json
int cmd_spectrum(const SpectrumRun& run, const std::filesystem::path& out, std::ostream& log);
// f.obj, member_<k>.obj per regular member, family.json
int cmd_darboux(const DarbouxRun& run, const std::filesystem::path& out, std::ostream& log);
// verify_report.json, verify_timings.json; one line per criterion on log
int cmd_verify(const VerifyConfig& cfg, const std::filesystem::path& out, std::ostream& log);
// <name>.obj and <name>.json
int cmd_export_mesh(const MeshRun& run, const std::filesystem::path& out, std::ostream& log);

std::string spectrum_csv(const BranchSet& bs);
std::string format_criterion(const CriterionResult& c);

// Maps exceptions to exit codes and prints the message on err.
int run_guarded(const std::function<int()>& fn, std::ostream& err);

}  // namespace qspec
