#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "winfree/integrate.hpp"

namespace winfree::ode {

/// Autonomous field: writes F(theta) into out. out.size() == theta.size().
using VectorField = std::function<void(std::span<const double>, std::span<double>)>;

struct RawTrajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> phases;
    std::vector<std::vector<double>> velocities;
    std::uint64_t accepted = 0;
    std::uint64_t rejected = 0;
};

/// m theta'' + theta' = F(theta), m > 0. Steps are clamped so every multiple
/// of sample_interval (and t_end) is hit exactly; samples are recorded there.
RawTrajectory integrate_inertial(const VectorField& field, std::span<const double> phases0,
                                 std::span<const double> velocities0, double inertia, double t_end,
                                 const IntegratorOptions& options);

/// theta' = F(theta). Sample velocities are filled with F at the sample.
RawTrajectory integrate_first_order_field(const VectorField& field,
                                          std::span<const double> phases0, double t_end,
                                          const IntegratorOptions& options);

}  // namespace winfree::ode
