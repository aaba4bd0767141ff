#include <iostream>

#include "qspec/cli.hpp"

int main() {
    qspec::VerifyConfig cfg;
    qspec::VerifyReport rep = qspec::run_verify(cfg);
    for (const qspec::CriterionResult& c : rep.criteria) std::cout << qspec::format_criterion(c) << "\n";
    std::cout << (rep.all_pass ? "acceptance: all pass" : "acceptance: FAILED") << std::endl;
    return rep.all_pass ? 0 : 1;
}
