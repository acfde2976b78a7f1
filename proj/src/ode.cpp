#include "winfree/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

namespace winfree::ode {
namespace {

constexpr double kSafety = 0.9;
constexpr double kShrinkFloor = 0.2;
constexpr double kGrowCeil = 5.0;

// Kernel weights of one relaxation step, x = h/m:
//   decay = e^{-x}
//   phi   = 1 - e^{-x}                 weight of the left field value
//   w1    = 1 - phi/x                  velocity weight of the field increment
//   psi   = 1/2 - w1/x                 phase weight of the field increment (times h)
// The closed forms lose all digits as x -> 0, so switch to series there.
struct RelaxWeights {
    double decay;
    double phi;
    double w1;
    double psi;
};

RelaxWeights relax_weights(double x) {
    RelaxWeights w{};
    w.decay = std::exp(-x);
    w.phi = -std::expm1(-x);
    if (x < 1e-3) {
        w.w1 = x * (0.5 + x * (-1.0 / 6.0 + x * (1.0 / 24.0 + x * (-1.0 / 120.0 + x / 720.0))));
        w.psi = x * (1.0 / 6.0 +
                     x * (-1.0 / 24.0 + x * (1.0 / 120.0 + x * (-1.0 / 720.0 + x / 5040.0))));
    } else {
        w.w1 = 1.0 - w.phi / x;   // x may be inf: 1 - 0, fine
        w.psi = 0.5 - w.w1 / x;
    }
    return w;
}

// One step of the splitting scheme: the relaxation e^{-t/m} is integrated
// exactly against a field profile linear in time between f0 = F(theta) and
// F evaluated at a frozen-field prediction of the step's endpoint. Exact for
// constant F, endpoint-consistent as m -> 0.
void relaxation_step(const VectorField& field, double m, double h, std::span<const double> th,
                     std::span<const double> om, std::span<const double> f0, std::span<double> thp,
                     std::span<double> f1, std::span<double> th_out, std::span<double> om_out) {
    const std::size_t n = th.size();
    const RelaxWeights w = relax_weights(h / m);
    const double a = m * w.phi;
    for (std::size_t i = 0; i < n; ++i) {
        thp[i] = th[i] + h * f0[i] + a * (om[i] - f0[i]);
    }
    field(thp, f1);
    for (std::size_t i = 0; i < n; ++i) {
        const double df = f1[i] - f0[i];
        th_out[i] = thp[i] + h * w.psi * df;
        om_out[i] = w.decay * om[i] + w.phi * f0[i] + w.w1 * df;
    }
}

// Dormand-Prince 5(4) tableau.
constexpr double kA21 = 1.0 / 5.0;
constexpr double kA31 = 3.0 / 40.0, kA32 = 9.0 / 40.0;
constexpr double kA41 = 44.0 / 45.0, kA42 = -56.0 / 15.0, kA43 = 32.0 / 9.0;
constexpr double kA51 = 19372.0 / 6561.0, kA52 = -25360.0 / 2187.0, kA53 = 64448.0 / 6561.0,
                 kA54 = -212.0 / 729.0;
constexpr double kA61 = 9017.0 / 3168.0, kA62 = -355.0 / 33.0, kA63 = 46732.0 / 5247.0,
                 kA64 = 49.0 / 176.0, kA65 = -5103.0 / 18656.0;
constexpr double kB1 = 35.0 / 384.0, kB3 = 500.0 / 1113.0, kB4 = 125.0 / 192.0,
                 kB5 = -2187.0 / 6784.0, kB6 = 11.0 / 84.0;
constexpr double kE1 = 35.0 / 384.0 - 5179.0 / 57600.0, kE3 = 500.0 / 1113.0 - 7571.0 / 16695.0,
                 kE4 = 125.0 / 192.0 - 393.0 / 640.0, kE5 = -2187.0 / 6784.0 + 92097.0 / 339200.0,
                 kE6 = 11.0 / 84.0 - 187.0 / 2100.0, kE7 = -1.0 / 40.0;

struct Dp54Workspace {
    std::vector<double> k1, k2, k3, k4, k5, k6, k7, ytmp;

    explicit Dp54Workspace(std::size_t d)
        : k1(d), k2(d), k3(d), k4(d), k5(d), k6(d), k7(d), ytmp(d) {}
};

double dp54_trial(const VectorField& flat_field, const std::vector<double>& y, double h,
                  std::vector<double>& y_out, Dp54Workspace& ws, double rel, double abs) {
    const std::size_t d = y.size();
    flat_field(y, std::span(ws.k1));
    for (std::size_t i = 0; i < d; ++i) ws.ytmp[i] = y[i] + h * kA21 * ws.k1[i];
    flat_field(ws.ytmp, std::span(ws.k2));
    for (std::size_t i = 0; i < d; ++i) ws.ytmp[i] = y[i] + h * (kA31 * ws.k1[i] + kA32 * ws.k2[i]);
    flat_field(ws.ytmp, std::span(ws.k3));
    for (std::size_t i = 0; i < d; ++i) {
        ws.ytmp[i] = y[i] + h * (kA41 * ws.k1[i] + kA42 * ws.k2[i] + kA43 * ws.k3[i]);
    }
    flat_field(ws.ytmp, std::span(ws.k4));
    for (std::size_t i = 0; i < d; ++i) {
        ws.ytmp[i] =
            y[i] + h * (kA51 * ws.k1[i] + kA52 * ws.k2[i] + kA53 * ws.k3[i] + kA54 * ws.k4[i]);
    }
    flat_field(ws.ytmp, std::span(ws.k5));
    for (std::size_t i = 0; i < d; ++i) {
        ws.ytmp[i] = y[i] + h * (kA61 * ws.k1[i] + kA62 * ws.k2[i] + kA63 * ws.k3[i] +
                                 kA64 * ws.k4[i] + kA65 * ws.k5[i]);
    }
    flat_field(ws.ytmp, std::span(ws.k6));
    y_out.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
        y_out[i] = y[i] + h * (kB1 * ws.k1[i] + kB3 * ws.k3[i] + kB4 * ws.k4[i] + kB5 * ws.k5[i] +
                               kB6 * ws.k6[i]);
    }
    flat_field(y_out, std::span(ws.k7));
    double acc = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double e = h * (kE1 * ws.k1[i] + kE3 * ws.k3[i] + kE4 * ws.k4[i] + kE5 * ws.k5[i] +
                              kE6 * ws.k6[i] + kE7 * ws.k7[i]);
        const double sc = abs + rel * std::max(std::fabs(y[i]), std::fabs(y_out[i]));
        const double r = e / sc;
        acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(d));
}

struct DriveHooks {
    // advance y by h, write result into y_new, return scaled error norm
    std::function<double(const std::vector<double>&, double, std::vector<double>&)> trial;
    std::function<void(double, const std::vector<double>&)> record;
    std::function<EnsembleState(double, const std::vector<double>&)> snapshot;
};

// Shared accept/reject loop. Steps are clamped so sample targets (multiples of
// sample_interval, then t_end) are landed on exactly; sample times come from
// k * dt, never from accumulation.
void drive(std::vector<double>& y, double t0, double t_end, const IntegratorOptions& opt,
           double inv_order, const DriveHooks& hooks, std::uint64_t& accepted,
           std::uint64_t& rejected) {
    const double duration = t_end - t0;
    const double dt = opt.sample_interval;
    hooks.record(t0, y);
    auto target_at = [&](std::size_t idx) {
        const double target = static_cast<double>(idx) * dt;
        return (target >= duration * (1.0 - 1e-12)) ? duration : target;
    };
    double tau = 0.0;
    double h = std::min({opt.initial_step, opt.max_step, duration});
    std::vector<double> y_new(y.size());
    std::size_t k = 1;
    double target = target_at(k);
    bool capped = false;
    while (tau < duration) {
        double h_try = h;
        bool hit = false;
        if (h_try >= (target - tau) * (1.0 - 1e-10)) {
            h_try = target - tau;
            hit = true;
        }
        const double err = hooks.trial(y, h_try, y_new);
        if (std::isfinite(err) && err <= 1.0) {
            y.swap(y_new);
            ++accepted;
            if (hit) {
                tau = target;
                hooks.record(target == duration ? t_end : t0 + target, y);
                ++k;
                target = target_at(k);
            } else {
                tau += h_try;
            }
            double fac = (err == 0.0) ? kGrowCeil : kSafety * std::pow(err, -inv_order);
            fac = std::clamp(fac, kShrinkFloor, capped ? 1.0 : kGrowCeil);
            h = std::min(opt.max_step, h_try * fac);
            capped = false;
        } else {
            ++rejected;
            const double h_floor =
                32.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(t0 + tau));
            if (h_try <= h_floor) {
                throw IntegrationError("step size underflow at t = " + std::to_string(t0 + tau),
                                       hooks.snapshot(t0 + tau, y));
            }
            double fac = kShrinkFloor;
            if (std::isfinite(err)) {
                fac = std::clamp(kSafety * std::pow(err, -inv_order), kShrinkFloor, 0.9);
            }
            h = std::max(h_floor, h_try * fac);
            capped = true;
        }
    }
}

void check_common(std::span<const double> phases0, double t_end, const IntegratorOptions& opt) {
    if (phases0.empty()) throw std::invalid_argument("integrate: empty initial state");
    if (!std::isfinite(t_end)) throw std::invalid_argument("integrate: non-finite t_end");
    for (double v : phases0) {
        if (!std::isfinite(v)) throw std::invalid_argument("integrate: non-finite initial phase");
    }
    opt.validate(t_end);
}

}  // namespace

RawTrajectory integrate_inertial(const VectorField& field, std::span<const double> phases0,
                                 std::span<const double> velocities0, double inertia, double t_end,
                                 const IntegratorOptions& options) {
    check_common(phases0, t_end, options);
    if (velocities0.size() != phases0.size()) {
        throw std::invalid_argument("integrate: second-order run needs one velocity per phase");
    }
    for (double v : velocities0) {
        if (!std::isfinite(v)) throw std::invalid_argument("integrate: non-finite initial velocity");
    }
    if (!(inertia > 0.0)) throw std::domain_error("integrate: inertia must be > 0");

    const std::size_t n = phases0.size();
    RawTrajectory out;
    std::vector<double> y(2 * n);
    std::copy(phases0.begin(), phases0.end(), y.begin());
    std::copy(velocities0.begin(), velocities0.end(), y.begin() + static_cast<std::ptrdiff_t>(n));

    DriveHooks hooks;
    hooks.record = [&](double t, const std::vector<double>& state) {
        out.times.push_back(t);
        out.phases.emplace_back(state.begin(), state.begin() + static_cast<std::ptrdiff_t>(n));
        out.velocities.emplace_back(state.begin() + static_cast<std::ptrdiff_t>(n), state.end());
    };
    hooks.snapshot = [&](double t, const std::vector<double>& state) {
        EnsembleState s;
        s.time = t;
        s.phases.assign(state.begin(), state.begin() + static_cast<std::ptrdiff_t>(n));
        s.velocities.assign(state.begin() + static_cast<std::ptrdiff_t>(n), state.end());
        return s;
    };

    double inv_order = 1.0 / 3.0;  // step doubling on the order-2 scheme
    std::function<double(const std::vector<double>&, double, std::vector<double>&)> trial;

    if (options.method == Method::exponential_split) {
        struct Buffers {
            std::vector<double> f0, f0b, f1, thp, th_big, om_big, th_half, om_half;
            explicit Buffers(std::size_t d)
                : f0(d), f0b(d), f1(d), thp(d), th_big(d), om_big(d), th_half(d), om_half(d) {}
        };
        auto buf = std::make_shared<Buffers>(n);
        trial = [&field, inertia, n, buf, &options](const std::vector<double>& yc, double h,
                                                    std::vector<double>& y_out) {
            y_out.resize(2 * n);
            auto th = std::span(yc).subspan(0, n);
            auto om = std::span(yc).subspan(n, n);
            auto th_out = std::span(y_out).subspan(0, n);
            auto om_out = std::span(y_out).subspan(n, n);
            field(th, buf->f0);
            relaxation_step(field, inertia, h, th, om, buf->f0, buf->thp, buf->f1, buf->th_big,
                            buf->om_big);
            relaxation_step(field, inertia, 0.5 * h, th, om, buf->f0, buf->thp, buf->f1,
                            buf->th_half, buf->om_half);
            field(buf->th_half, buf->f0b);
            relaxation_step(field, inertia, 0.5 * h, buf->th_half, buf->om_half, buf->f0b, buf->thp,
                            buf->f1, th_out, om_out);
            double acc = 0.0;
            for (std::size_t i = 0; i < 2 * n; ++i) {
                const double big = (i < n) ? buf->th_big[i] : buf->om_big[i - n];
                const double e = (y_out[i] - big) / 3.0;
                const double sc = options.abs_tolerance +
                                  options.rel_tolerance *
                                      std::max(std::fabs(yc[i]), std::fabs(y_out[i]));
                const double r = e / sc;
                acc += r * r;
            }
            return std::sqrt(acc / static_cast<double>(2 * n));
        };
    } else {
        auto ws = std::make_shared<Dp54Workspace>(2 * n);
        auto fbuf = std::make_shared<std::vector<double>>(n);
        VectorField flat = [&field, inertia, n, fbuf](std::span<const double> yc,
                                                      std::span<double> dy) {
            auto th = yc.subspan(0, n);
            auto om = yc.subspan(n, n);
            field(th, std::span(*fbuf));
            for (std::size_t i = 0; i < n; ++i) {
                dy[i] = om[i];
                dy[n + i] = ((*fbuf)[i] - om[i]) / inertia;
            }
        };
        inv_order = 1.0 / 5.0;
        trial = [flat, ws, &options](const std::vector<double>& yc, double h,
                                     std::vector<double>& y_out) {
            return dp54_trial(flat, yc, h, y_out, *ws, options.rel_tolerance,
                              options.abs_tolerance);
        };
    }

    hooks.trial = std::move(trial);
    drive(y, 0.0, t_end, options, inv_order, hooks, out.accepted, out.rejected);
    return out;
}

RawTrajectory integrate_first_order_field(const VectorField& field, std::span<const double> phases0,
                                          double t_end, const IntegratorOptions& options) {
    check_common(phases0, t_end, options);
    const std::size_t n = phases0.size();
    RawTrajectory out;
    std::vector<double> y(phases0.begin(), phases0.end());

    // no relaxation scale in the first-order flow, so either method selection
    // runs the embedded RK pair
    auto ws = std::make_shared<Dp54Workspace>(n);
    DriveHooks hooks;
    hooks.trial = [&field, ws, &options](const std::vector<double>& yc, double h,
                                         std::vector<double>& y_out) {
        return dp54_trial(field, yc, h, y_out, *ws, options.rel_tolerance, options.abs_tolerance);
    };
    std::vector<double> fsample(n);
    hooks.record = [&](double t, const std::vector<double>& state) {
        out.times.push_back(t);
        out.phases.emplace_back(state.begin(), state.end());
        field(state, std::span(fsample));
        out.velocities.push_back(fsample);
    };
    hooks.snapshot = [&](double t, const std::vector<double>& state) {
        EnsembleState s;
        s.time = t;
        s.phases.assign(state.begin(), state.end());
        return s;
    };
    drive(y, 0.0, t_end, options, 1.0 / 5.0, hooks, out.accepted, out.rejected);
    return out;
}

}  // namespace winfree::ode
