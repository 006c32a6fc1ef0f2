#include "modal/schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace modal {

std::string to_string(ScheduleKind kind) {
    switch (kind) {
        case ScheduleKind::linear: return "linear";
    }
    throw std::invalid_argument("unknown schedule kind");
}

ScheduleKind schedule_kind_from_string(const std::string& s) {
    if (s == "linear") return ScheduleKind::linear;
    throw std::invalid_argument("unknown schedule kind: " + s);
}

namespace {

void check_t(int t, int lo, int hi, const char* what) {
    if (t < lo || t > hi) {
        throw std::out_of_range(std::string(what) + ": t out of range");
    }
}

}  // namespace

double NoiseSchedule::beta(int t) const {
    check_t(t, 1, T, "beta");
    return betas[static_cast<std::size_t>(t) - 1];
}

double NoiseSchedule::alpha(int t) const {
    check_t(t, 1, T, "alpha");
    return alphas[static_cast<std::size_t>(t) - 1];
}

double NoiseSchedule::alpha_bar(int t) const {
    check_t(t, 0, T, "alpha_bar");
    return alpha_bars[static_cast<std::size_t>(t)];
}

double NoiseSchedule::eta(int t) const {
    check_t(t, 0, T, "eta");
    return etas[static_cast<std::size_t>(t)];
}

std::vector<double> eta_recurrence(const std::vector<double>& alphas) {
    std::vector<double> etas(alphas.size() + 1);
    etas[0] = 0.0;
    for (std::size_t t = 1; t <= alphas.size(); ++t) {
        etas[t] = 1.0 + std::sqrt(alphas[t - 1]) * etas[t - 1];
    }
    return etas;
}

std::vector<double> alpha_bar_products(const std::vector<double>& alphas) {
    std::vector<double> bars(alphas.size() + 1);
    bars[0] = 1.0;
    for (std::size_t t = 1; t <= alphas.size(); ++t) {
        bars[t] = bars[t - 1] * alphas[t - 1];
    }
    return bars;
}

double eta_closed_form(const NoiseSchedule& s, int t) {
    check_t(t, 1, s.T, "eta_closed_form");
    double sum = 1.0;
    for (int m = 1; m <= t - 1; ++m) {
        double prod = 1.0;
        for (int n = m + 1; n <= t; ++n) prod *= s.alphas[static_cast<std::size_t>(n) - 1];
        sum += std::sqrt(prod);
    }
    return sum;
}

NoiseSchedule schedule_from_betas(std::vector<double> betas, ScheduleKind kind) {
    require(!betas.empty(), "schedule_from_betas: need at least one step");
    for (double b : betas) {
        require(b > 0.0 && b < 1.0, "schedule_from_betas: betas must lie in (0, 1)");
    }
    NoiseSchedule s;
    s.T = static_cast<int>(betas.size());
    s.kind = kind;
    s.beta_min = betas.front();
    s.beta_max = betas.back();
    s.betas = std::move(betas);
    s.alphas.resize(s.betas.size());
    for (std::size_t i = 0; i < s.betas.size(); ++i) s.alphas[i] = 1.0 - s.betas[i];
    s.alpha_bars = alpha_bar_products(s.alphas);
    s.etas = eta_recurrence(s.alphas);
    s.terminal_valid = s.alpha_bars.back() < kTerminalThreshold;
    return s;
}

NoiseSchedule build_schedule(int T, double beta_min, double beta_max, ScheduleKind kind) {
    require(T >= 1, "build_schedule: T must be >= 1");
    require(beta_min > 0.0 && beta_min < 1.0, "build_schedule: beta_min must lie in (0, 1)");
    require(beta_max > 0.0 && beta_max < 1.0, "build_schedule: beta_max must lie in (0, 1)");
    require(beta_min <= beta_max, "build_schedule: beta_min must not exceed beta_max");

    std::vector<double> betas(static_cast<std::size_t>(T));
    if (T == 1) {
        betas[0] = beta_min;
    } else {
        for (int i = 0; i < T; ++i) {
            betas[static_cast<std::size_t>(i)] =
                beta_min + (beta_max - beta_min) * static_cast<double>(i) /
                               static_cast<double>(T - 1);
        }
    }
    NoiseSchedule s = schedule_from_betas(std::move(betas), kind);
    s.beta_min = beta_min;
    s.beta_max = beta_max;
    return s;
}

}  // namespace modal
