#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "mppnc/channel.hpp"
#include "mppnc/errors.hpp"
#include "mppnc/modem.hpp"
#include "mppnc/rng.hpp"

namespace mppnc {

enum class SamplingMethod { Double, Quad };

inline int samples_per_symbol(SamplingMethod m) { return m == SamplingMethod::Double ? 2 : 4; }

/// Windows shorter than this are rejected rather than regularized.
inline constexpr double kEpsWindow = 1e-6;

/// One symbol variable feeding a sample: node X, symbol index n+offset.
struct Contributor {
    NodeId node = NodeId::A;
    int offset = 0; // 0 = current symbol n, -1 = previous symbol
    cplx coeff{};
};

/// Per-path breakdown of a contributor (inspection output).
struct TapContribution {
    NodeId node = NodeId::A;
    int offset = 0;
    int tap = 0;
    cplx coeff{};
};

/// One sampling window: its affine map from contributing symbols to the
/// noiseless matched-filter output, plus the noise-scaling constants.
struct SlotCoefficients {
    double w0 = 0.0, w1 = 0.0; // window relative to symbol start n-1
    double alpha = 0.0;        // integral of |matched filter|^2 over the window
    double noise_factor = 0.0; // alpha / W^2; per-component variance = noise_factor * N0/2
    std::vector<Contributor> contributors;
    std::vector<TapContribution> per_tap;

    double width() const { return w1 - w0; }
};

/// Matched-filter integration coefficients for one profile and method.
/// All coefficients are independent of the symbol index n, so one table
/// serves a whole frame (and a whole experiment).
struct CoefficientTable {
    SamplingMethod method = SamplingMethod::Double;
    ChannelProfile profile;
    std::vector<SlotCoefficients> slots;

    int samples_per_symbol() const { return mppnc::samples_per_symbol(method); }

    cplx coeff_at(int slot, NodeId node, int offset) const {
        for (const Contributor& c : slots[static_cast<std::size_t>(slot)].contributors) {
            if (c.node == node && c.offset == offset) return c.coeff;
        }
        return cplx(0.0, 0.0);
    }
    cplx per_tap_at(int slot, NodeId node, int offset, int tap) const {
        for (const TapContribution& c : slots[static_cast<std::size_t>(slot)].per_tap) {
            if (c.node == node && c.offset == offset && c.tap == tap) return c.coeff;
        }
        return cplx(0.0, 0.0);
    }

    // Double-sampling names (window 1 = A-matched, window 2 = B-matched).
    cplx rho_aa0() const { return coeff_at(0, NodeId::A, 0); }
    cplx rho_aa1() const { return coeff_at(0, NodeId::A, -1); }
    cplx rho_ab() const { return coeff_at(0, NodeId::B, -1); }
    cplx rho_bb0() const { return coeff_at(1, NodeId::B, 0); }
    cplx rho_bb1() const { return coeff_at(1, NodeId::B, -1); }
    cplx rho_ba() const { return coeff_at(1, NodeId::A, 0); }

    // Quadruple-sampling names, per path.
    cplx mu_aa0() const { return per_tap_at(0, NodeId::A, 0, 0); }
    cplx mu_aa1() const { return per_tap_at(0, NodeId::A, -1, 1); }
    cplx mu_ab0() const { return per_tap_at(0, NodeId::B, -1, 0); }
    cplx mu_ab1() const { return per_tap_at(0, NodeId::B, -1, 1); }
    cplx lambda_aa0() const { return per_tap_at(1, NodeId::A, 0, 0); }
    cplx lambda_aa1() const { return per_tap_at(1, NodeId::A, 0, 1); }
    cplx lambda_ab0() const { return per_tap_at(1, NodeId::B, -1, 0); }
    cplx lambda_ab1() const { return per_tap_at(1, NodeId::B, -1, 1); }
    cplx mu_ba0() const { return per_tap_at(2, NodeId::A, 0, 0); }
    cplx mu_ba1() const { return per_tap_at(2, NodeId::A, 0, 1); }
    cplx mu_bb0() const { return coeff_at(2, NodeId::B, 0); }
    cplx mu_bb1() const { return coeff_at(2, NodeId::B, -1); }
    cplx lambda_ba0() const { return per_tap_at(3, NodeId::A, 0, 0); }
    cplx lambda_ba1() const { return per_tap_at(3, NodeId::A, 0, 1); }
    cplx lambda_bb0() const { return per_tap_at(3, NodeId::B, 0, 0); }
    cplx lambda_bb1() const { return per_tap_at(3, NodeId::B, 0, 1); }
};

namespace detail {

/// Piecewise-constant matched filter on a window: value(t) = sum of steps
/// with step.time <= t.
struct StepFilter {
    struct Step {
        double time;
        cplx add;
    };
    std::vector<Step> steps;

    cplx value(double t) const {
        cplx v(0.0, 0.0);
        for (const Step& s : steps)
            if (s.time <= t) v += s.add;
        return v;
    }
};

struct PulseSource {
    NodeId node;
    int offset;
    int tap;
    cplx weight;
    double t0, t1; // support relative to symbol start n-1
};

/// Everything that makes up one sample: window, filter, contributing pulses.
struct SlotGeometry {
    double w0, w1;
    StepFilter filter;
    std::vector<PulseSource> pulses;
};

/// Geometry shared by the closed form, the quadrature oracle, and the
/// waveform oracle is limited to these window/filter/pulse definitions;
/// the integration routes differ.
inline std::vector<SlotGeometry> slot_geometry(const ChannelProfile& p, SamplingMethod m) {
    validate(p);
    const double delta = p.delta;
    std::vector<SlotGeometry> slots;

    auto node_delay = [&](NodeId node, const Tap& t) {
        return node == NodeId::A ? t.delay : delta + t.delay;
    };
    auto add_pulses = [&](SlotGeometry& g) {
        // Any symbol at offset 0 or -1 whose tap-delayed rectangle meets the
        // window contributes; offsets beyond that cannot reach it while
        // delay spreads stay within one symbol.
        for (NodeId node : {NodeId::A, NodeId::B}) {
            const auto& taps = node == NodeId::A ? p.taps_a : p.taps_b;
            for (int offset : {0, -1}) {
                for (std::size_t i = 0; i < taps.size(); ++i) {
                    const double d = node_delay(node, taps[i]);
                    const double t0 = offset + d;
                    const double t1 = offset + 1.0 + d;
                    if (t1 > g.w0 + 1e-12 && t0 < g.w1 - 1e-12) {
                        g.pulses.push_back({node, offset, static_cast<int>(i), taps[i].weight(), t0, t1});
                    }
                }
            }
        }
    };

    if (m == SamplingMethod::Double) {
        if (delta < kEpsWindow || 1.0 - delta < kEpsWindow)
            throw DegenerateWindowError("double sampling: window shorter than eps_window");
        SlotGeometry s0{0.0, delta, {}, {}};
        for (const Tap& t : p.taps_a)
            if (t.delay < delta) s0.filter.steps.push_back({t.delay, t.weight()});
        SlotGeometry s1{delta, 1.0, {}, {}};
        for (const Tap& t : p.taps_b)
            if (delta + t.delay < 1.0) s1.filter.steps.push_back({delta + t.delay, t.weight()});
        add_pulses(s0);
        add_pulses(s1);
        slots = {s0, s1};
    } else {
        if (p.taps_a.size() != 2 || p.taps_b.size() != 2)
            throw OrderingError("quadruple sampling requires exactly two taps per node");
        const double tau1 = p.taps_a[1].delay;
        const double l1 = p.taps_b[1].delay;
        if (!(tau1 < delta && delta + l1 < 1.0))
            throw OrderingError("quadruple sampling requires 0 < tau1 < delta < delta+l1 < 1");
        const double edges[5] = {0.0, tau1, delta, delta + l1, 1.0};
        for (int k = 0; k < 4; ++k) {
            if (edges[k + 1] - edges[k] < kEpsWindow)
                throw DegenerateWindowError("quadruple sampling: window shorter than eps_window");
        }
        // One filter per path, constant over its own window.
        const cplx fw[4] = {p.taps_a[0].weight(), p.taps_a[1].weight(), p.taps_b[0].weight(),
                            p.taps_b[1].weight()};
        for (int k = 0; k < 4; ++k) {
            SlotGeometry s{edges[k], edges[k + 1], {}, {}};
            s.filter.steps.push_back({edges[k], fw[k]});
            add_pulses(s);
            slots.push_back(s);
        }
    }
    return slots;
}

inline std::vector<double> segment_points(const SlotGeometry& g) {
    std::vector<double> pts = {g.w0, g.w1};
    for (const auto& s : g.filter.steps)
        if (s.time > g.w0 && s.time < g.w1) pts.push_back(s.time);
    for (const auto& pu : g.pulses) {
        if (pu.t0 > g.w0 && pu.t0 < g.w1) pts.push_back(pu.t0);
        if (pu.t1 > g.w0 && pu.t1 < g.w1) pts.push_back(pu.t1);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-12; }),
              pts.end());
    return pts;
}

} // namespace detail

/// Closed-form coefficients: with rectangular pulses every integral reduces
/// to complex-weighted interval overlaps, so we split the window at all
/// pulse/filter edges and sum exactly.
inline CoefficientTable compute_coefficients(const ChannelProfile& p, SamplingMethod m) {
    CoefficientTable table;
    table.method = m;
    table.profile = p;
    for (const detail::SlotGeometry& g : detail::slot_geometry(p, m)) {
        SlotCoefficients sc;
        sc.w0 = g.w0;
        sc.w1 = g.w1;
        const double w = g.w1 - g.w0;
        const std::vector<double> pts = detail::segment_points(g);

        struct Acc {
            cplx coeff{};
            double presence = 0.0; // gain-weighted overlap mass
        };
        std::vector<Acc> acc(g.pulses.size());
        for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
            const double len = pts[s + 1] - pts[s];
            const double mid = 0.5 * (pts[s] + pts[s + 1]);
            const cplx f = g.filter.value(mid);
            sc.alpha += std::norm(f) * len;
            for (std::size_t q = 0; q < g.pulses.size(); ++q) {
                const auto& pu = g.pulses[q];
                if (pu.t0 <= mid && mid < pu.t1) {
                    acc[q].coeff += pu.weight * std::conj(f) * len / w;
                    acc[q].presence += std::abs(pu.weight) * len;
                }
            }
        }
        if (sc.alpha < 1e-24)
            throw DegenerateWindowError("zero-energy matched filter (all contributing gains zero?)");
        sc.noise_factor = sc.alpha / (w * w);

        for (std::size_t q = 0; q < g.pulses.size(); ++q) {
            if (acc[q].presence <= 1e-12) continue;
            const auto& pu = g.pulses[q];
            sc.per_tap.push_back({pu.node, pu.offset, pu.tap, acc[q].coeff});
            auto it = std::find_if(sc.contributors.begin(), sc.contributors.end(),
                                   [&](const Contributor& c) {
                                       return c.node == pu.node && c.offset == pu.offset;
                                   });
            if (it == sc.contributors.end())
                sc.contributors.push_back({pu.node, pu.offset, acc[q].coeff});
            else
                it->coeff += acc[q].coeff;
        }
        // canonical order: current symbol before previous, node A before B
        std::sort(sc.contributors.begin(), sc.contributors.end(),
                  [](const Contributor& a, const Contributor& b) {
                      if (a.offset != b.offset) return a.offset > b.offset;
                      return a.node < b.node;
                  });
        table.slots.push_back(std::move(sc));
    }
    return table;
}

/// Discrete samples for one frame pair. `r` holds samples_per_symbol * N
/// values in sampling order (sample k = spp*(n-1)+slot). noise_var stays zero
/// until add_noise fills it.
struct SampleFrame {
    SamplingMethod method = SamplingMethod::Double;
    int frame_len = 0;
    std::vector<cplx> r;
    std::vector<double> noise_var;          // per sample, per real/imag component
    std::vector<double> slot_noise_factor;  // copied from the table
    double n0 = 0.0;

    int samples_per_symbol() const { return mppnc::samples_per_symbol(method); }
};

/// Noiseless matched-filter outputs: each sample is the affine combination
/// of its contributing symbols. Boundary symbols x[0] are the known zero
/// guard, so first-sample terms at offset -1 vanish.
inline SampleFrame direct_samples(const ChannelProfile& p, const CoefficientTable& t,
                                  const SymbolFrame& fa, const SymbolFrame& fb) {
    if (!(t.profile == p)) throw ValidationError("direct_samples: table/profile mismatch");
    if (fa.size() != fb.size()) throw ValidationError("direct_samples: frame length mismatch");
    const int n_sym = fa.size();
    const int spp = t.samples_per_symbol();
    SampleFrame s;
    s.method = t.method;
    s.frame_len = n_sym;
    s.r.assign(static_cast<std::size_t>(spp) * static_cast<std::size_t>(n_sym), cplx(0.0, 0.0));
    s.noise_var.assign(s.r.size(), 0.0);
    for (const SlotCoefficients& sc : t.slots) s.slot_noise_factor.push_back(sc.noise_factor);
    for (int n = 1; n <= n_sym; ++n) {
        for (int slot = 0; slot < spp; ++slot) {
            cplx v(0.0, 0.0);
            for (const Contributor& c : t.slots[static_cast<std::size_t>(slot)].contributors) {
                const int idx = n + c.offset;
                if (idx < 1) continue; // guard symbol
                const auto& f = c.node == NodeId::A ? fa : fb;
                v += c.coeff * f.symbols[static_cast<std::size_t>(idx - 1)];
            }
            s.r[static_cast<std::size_t>(spp * (n - 1) + slot)] = v;
        }
    }
    return s;
}

/// Complex Gaussian noise drawn directly at the matched-filter outputs with
/// the per-window variances; disjoint windows of white noise make samples
/// independent, so no fine-grid filtering is needed.
inline SampleFrame add_noise(const SampleFrame& s, double n0, RandomStream& rng) {
    if (!(n0 > 0.0)) throw ValidationError("add_noise: n0 must be positive");
    SampleFrame out = s;
    out.n0 = n0;
    const int spp = s.samples_per_symbol();
    for (std::size_t k = 0; k < out.r.size(); ++k) {
        const double var = s.slot_noise_factor[k % static_cast<std::size_t>(spp)] * n0 * 0.5;
        double z0, z1;
        rng.next_gaussian_pair(z0, z1);
        const double sd = std::sqrt(var);
        out.r[k] += cplx(sd * z0, sd * z1);
        out.noise_var[k] = var;
    }
    return out;
}

} // namespace mppnc
