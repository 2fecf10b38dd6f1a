#pragma once

// Validation oracle: matched-filter integration coefficients by numerical
// quadrature, written directly against the window/filter/pulse definitions
// and never against the closed-form overlap algebra it is meant to check.

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "mppnc/channel.hpp"
#include "mppnc/frontend.hpp"

namespace mppnc::oracle {

/// Matched-filter value at time t (relative to symbol start n-1), evaluated
/// formulaically from the taps.
inline cplx filter_value(const ChannelProfile& p, SamplingMethod m, int slot, double t) {
    cplx v(0.0, 0.0);
    if (m == SamplingMethod::Double) {
        if (slot == 0) {
            for (const Tap& tap : p.taps_a)
                if (t >= tap.delay && t < 1.0 + tap.delay) v += tap.weight();
        } else {
            for (const Tap& tap : p.taps_b) {
                const double d = p.delta + tap.delay;
                if (t >= d && t < 1.0 + d) v += tap.weight();
            }
        }
    } else {
        const Tap& tap = slot < 2 ? p.taps_a[static_cast<std::size_t>(slot)]
                                  : p.taps_b[static_cast<std::size_t>(slot - 2)];
        const double d = slot < 2 ? tap.delay : p.delta + tap.delay;
        if (t >= d && t < 1.0 + d) v = tap.weight();
    }
    return v;
}

inline std::pair<double, double> window(const ChannelProfile& p, SamplingMethod m, int slot) {
    if (m == SamplingMethod::Double) {
        return slot == 0 ? std::pair{0.0, p.delta} : std::pair{p.delta, 1.0};
    }
    const double edges[5] = {0.0, p.taps_a[1].delay, p.delta, p.delta + p.taps_b[1].delay, 1.0};
    return {edges[slot], edges[slot + 1]};
}

struct QuadratureSlot {
    double alpha = 0.0;
    double noise_factor = 0.0;
    // coefficient per (node, offset): [A or B][offset 0 or -1]
    std::array<std::array<cplx, 2>, 2> coeff{};

    cplx at(NodeId node, int offset) const {
        return coeff[static_cast<std::size_t>(node)][offset == 0 ? 0 : 1];
    }
};

/// Composite midpoint rule with `subintervals` points distributed over the
/// window, split at every pulse/filter edge first (the integrands are
/// piecewise constant, so the split is what buys the 1e-10 agreement).
inline std::vector<QuadratureSlot> quadrature_coefficients(const ChannelProfile& p,
                                                           SamplingMethod m,
                                                           long subintervals = 100000) {
    validate(p);
    const int spp = samples_per_symbol(m);
    std::vector<QuadratureSlot> out(static_cast<std::size_t>(spp));
    for (int slot = 0; slot < spp; ++slot) {
        const auto [w0, w1] = window(p, m, slot);
        const double w = w1 - w0;

        std::vector<double> pts = {w0, w1};
        auto note = [&](double t) {
            if (t > w0 && t < w1) pts.push_back(t);
        };
        for (const Tap& tap : p.taps_a) {
            for (int off : {0, -1}) {
                note(off + tap.delay);
                note(off + 1.0 + tap.delay);
            }
        }
        for (const Tap& tap : p.taps_b) {
            for (int off : {0, -1}) {
                note(off + p.delta + tap.delay);
                note(off + 1.0 + p.delta + tap.delay);
            }
        }
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

        QuadratureSlot& qs = out[static_cast<std::size_t>(slot)];
        for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
            const double a = pts[s], b = pts[s + 1];
            const long n = std::max(1L, std::lround(static_cast<double>(subintervals) * (b - a) / w));
            const double h = (b - a) / static_cast<double>(n);
            for (long i = 0; i < n; ++i) {
                const double t = a + (static_cast<double>(i) + 0.5) * h;
                const cplx f = filter_value(p, m, slot, t);
                qs.alpha += std::norm(f) * h;
                const cplx fc = std::conj(f) * h / w;
                for (int node = 0; node < 2; ++node) {
                    const auto& taps = node == 0 ? p.taps_a : p.taps_b;
                    const double base = node == 0 ? 0.0 : p.delta;
                    for (const Tap& tap : taps) {
                        const double d = base + tap.delay;
                        for (int off : {0, -1}) {
                            if (t >= off + d && t < off + 1.0 + d) {
                                qs.coeff[static_cast<std::size_t>(node)][off == 0 ? 0 : 1] +=
                                    tap.weight() * fc;
                            }
                        }
                    }
                }
            }
        }
        qs.noise_factor = qs.alpha / (w * w);
    }
    return out;
}

/// Largest absolute deviation between a closed-form table and the quadrature
/// oracle, across all slots, variable coefficients, and noise constants.
/// Variables absent from the table count with coefficient zero.
inline double max_abs_deviation(const CoefficientTable& t, const std::vector<QuadratureSlot>& q) {
    double worst = 0.0;
    for (std::size_t slot = 0; slot < q.size(); ++slot) {
        const auto& qs = q[slot];
        worst = std::max(worst, std::abs(qs.alpha - t.slots[slot].alpha));
        worst = std::max(worst, std::abs(qs.noise_factor - t.slots[slot].noise_factor));
        for (NodeId node : {NodeId::A, NodeId::B}) {
            for (int off : {0, -1}) {
                const cplx c = t.coeff_at(static_cast<int>(slot), node, off);
                worst = std::max(worst, std::abs(c - qs.at(node, off)));
            }
        }
    }
    return worst;
}

} // namespace mppnc::oracle
