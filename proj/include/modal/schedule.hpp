#pragma once

#include <string>
#include <vector>

#include "modal/common.hpp"

namespace modal {

enum class ScheduleKind { linear };

std::string to_string(ScheduleKind kind);
ScheduleKind schedule_kind_from_string(const std::string& s);

// alpha_bar[T] below this counts as a valid terminal approximation.
inline constexpr double kTerminalThreshold = 1e-4;

// Variance schedule plus the shift-normalizer sequence eta.
// Conventions: alpha_bars[0] = 1, etas[0] = 0, etas[1] = 1.
// betas/alphas hold steps 1..T at indices 0..T-1; use the accessors.
struct NoiseSchedule {
    int T = 0;
    double beta_min = 0.0;
    double beta_max = 0.0;
    ScheduleKind kind = ScheduleKind::linear;

    std::vector<double> betas;       // length T
    std::vector<double> alphas;      // length T, alphas[i] = 1 - betas[i]
    std::vector<double> alpha_bars;  // length T+1
    std::vector<double> etas;        // length T+1
    bool terminal_valid = false;

    double beta(int t) const;       // t in [1, T]
    double alpha(int t) const;      // t in [1, T]
    double alpha_bar(int t) const;  // t in [0, T]
    double eta(int t) const;        // t in [0, T]
};

// eta_t = 1 + sqrt(alpha_t) * eta_{t-1}, eta_0 = 0. Returns length T+1.
std::vector<double> eta_recurrence(const std::vector<double>& alphas);

// Running products alpha_bar_t = prod_{n<=t} alpha_n, alpha_bar_0 = 1. Length T+1.
std::vector<double> alpha_bar_products(const std::vector<double>& alphas);

// Direct evaluation eta_t = 1 + sum_{m=1}^{t-1} sqrt(prod_{n=m+1}^{t} alpha_n).
// O(t^2); kept as an independent cross-check of the recurrence.
double eta_closed_form(const NoiseSchedule& s, int t);

// Builds a schedule from explicit per-step betas (each in (0,1)).
NoiseSchedule schedule_from_betas(std::vector<double> betas,
                                  ScheduleKind kind = ScheduleKind::linear);

// Linear interpolation from beta_min to beta_max over T steps.
// T == 1 degenerates to the single beta beta_min.
NoiseSchedule build_schedule(int T, double beta_min, double beta_max,
                             ScheduleKind kind = ScheduleKind::linear);

}  // namespace modal
