#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace modal {

struct CheckResult {
    std::string name;
    bool pass = false;
    double max_error = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

// Independent oracle checks for the core identities. Each check recomputes
// its expected values from scratch (direct sums, Monte-Carlo simulation,
// discretized posteriors, numeric integration) rather than reusing the
// library's own sequences.
CheckResult check_eta_recurrence();
CheckResult check_marginal_monte_carlo(std::uint64_t seed);
CheckResult check_terminal_coupling(std::uint64_t seed);
CheckResult check_bayes_grid();
CheckResult check_parameterization_equivalence(std::uint64_t seed);
CheckResult check_ddpm_formula_reduction(std::uint64_t seed);
CheckResult check_ddpm_sampler_reduction(std::uint64_t seed);
CheckResult check_simplex_geometry();
CheckResult check_simplex_constant_discrimination();
CheckResult check_eta_convention_discrimination();
CheckResult check_chi_square_closed_form();
CheckResult check_chi_square_integration();

// The full suite in a fixed order.
std::vector<CheckResult> run_verification(std::uint64_t seed);

}  // namespace modal
