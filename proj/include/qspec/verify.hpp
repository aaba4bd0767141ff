#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

#include "qspec/spectrum.hpp"

namespace qspec {

struct VerifyConfig {
    int N = 8;
    unsigned long long seed = 20240601;
    double cutoff = 1.5;
    // vacuum oracle
    int vacuum_random_samples = 16;
    // homogeneous oracle
    int homogeneous_draws = 20;
    // handle scan
    double handle_c = 0.3;
    double handle_half_width = 0.25;
    int handle_samples = 11;
    // generic kernel scan
    double generic_half_width = 0.9;
    int generic_samples = 7;
    int generic_points = 10;
    // Clifford / Darboux
    int grid_coarse = 64;
    int grid_fine = 128;
    double infinity_value = 32.0;
    double sample_re = 0.3, sample_im = 0.1;
    double second_re = -0.2, second_im = 0.4;
    int clifford_scan_samples = 5;
    double clifford_scan_half_width = 0.5;
    // end limit
    int end_samples = 10;
    double end_step = 0.4;
    double end_angle = 0.3;
    // truncation check
    double truncation_perturbation = 0.05;
    SpectrumOptions spectrum;
    int threads = 1;
};

struct CriterionResult {
    std::string id, name;
    double measured = 0, bound = 0;
    std::string relation;  // how measured compares with bound
    bool pass = false;
    double seconds = 0;    // not part of the report body
    double runtime_limit = 0;
    nlohmann::ordered_json details = nlohmann::ordered_json::object();
};

struct VerifyReport {
    std::vector<CriterionResult> criteria;
    bool all_pass = false;

    nlohmann::ordered_json to_json(const VerifyConfig& cfg) const;
    nlohmann::ordered_json timings_json() const;
};

nlohmann::ordered_json config_to_json(const VerifyConfig& cfg);

// criteria 1-12 plus the truncation check; with_determinism adds criterion 13 (reruns the rest)
VerifyReport run_verify(const VerifyConfig& cfg, bool with_determinism = true);

}  // namespace qspec
