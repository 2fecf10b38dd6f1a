#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "mppnc/errors.hpp"
#include "mppnc/modem.hpp"

namespace mppnc {

/// One propagation path. Delays are in symbol units; for node B the stored
/// delay excludes the inter-node offset delta (that lives on the profile).
struct Tap {
    double gain = 0.0;
    double delay = 0.0;
    double phase = 0.0;

    cplx weight() const { return std::polar(gain, phase); }
};

/// Tapped-delay-line description of both uplinks. Node A's first path is the
/// time reference; node B's first path arrives delta behind it.
///
/// Pulse convention: the transmit pulse is the unit rectangle, read so that
/// symbol n on a path with total delay d occupies [n-1+d, n+d). This is the
/// only reading consistent with sampling windows of the form
/// [n-1, n-1+delta) and [n-1+delta, n).
struct ChannelProfile {
    std::vector<Tap> taps_a;
    std::vector<Tap> taps_b;
    double delta = 0.5;
    double bandwidth_hz = 1e6; // metadata only; delays are already in symbol units

    /// Total received symbol energy per node (sum of squared gains),
    /// used by the harness for per-bit SNR equalization.
    double energy_a() const {
        double e = 0.0;
        for (const Tap& t : taps_a) e += t.gain * t.gain;
        return e;
    }
    double energy_b() const {
        double e = 0.0;
        for (const Tap& t : taps_b) e += t.gain * t.gain;
        return e;
    }

    bool operator==(const ChannelProfile& o) const {
        if (delta != o.delta || taps_a.size() != o.taps_a.size() || taps_b.size() != o.taps_b.size())
            return false;
        for (std::size_t i = 0; i < taps_a.size(); ++i) {
            if (taps_a[i].gain != o.taps_a[i].gain || taps_a[i].delay != o.taps_a[i].delay ||
                taps_a[i].phase != o.taps_a[i].phase)
                return false;
        }
        for (std::size_t j = 0; j < taps_b.size(); ++j) {
            if (taps_b[j].gain != o.taps_b[j].gain || taps_b[j].delay != o.taps_b[j].delay ||
                taps_b[j].phase != o.taps_b[j].phase)
                return false;
        }
        return true;
    }
};

/// Check every profile invariant; throws ValidationError with the first
/// violation found.
inline void validate(const ChannelProfile& p) {
    auto check_node = [&](const std::vector<Tap>& taps, double max_excess_delay, const char* who) {
        if (taps.empty() || taps.size() > 3)
            throw ValidationError(std::string(who) + ": tap count must be in [1,3]");
        if (taps[0].delay != 0.0)
            throw ValidationError(std::string(who) + ": first tap must have delay 0");
        for (std::size_t i = 0; i < taps.size(); ++i) {
            if (taps[i].gain < 0.0) throw ValidationError(std::string(who) + ": negative gain");
            if (i > 0) {
                if (taps[i].delay <= taps[i - 1].delay)
                    throw ValidationError(std::string(who) + ": delays must be strictly increasing");
                // small slack so boundary cases like l1 = 1 - delta survive roundoff
                if (taps[i].delay > max_excess_delay + 1e-12)
                    throw ValidationError(std::string(who) + ": delay spread exceeds limit");
            }
        }
    };
    if (!(p.delta > 0.0 && p.delta < 1.0)) throw ValidationError("delta must lie in (0,1)");
    check_node(p.taps_a, 1.0, "taps_a");
    check_node(p.taps_b, 1.0 - p.delta, "taps_b");
}

enum class ItuPreset { IndoorA, AltB };

/// ITU-R M.1225 indoor-office three-tap realizations at 1 MHz / 1 Mbaud.
/// Gains and delays are stored directly in symbol units; bandwidth_hz is
/// kept as metadata only. Phases are free per-experiment parameters.
inline ChannelProfile itu_profile(ItuPreset preset, double bandwidth_hz,
                                  const std::vector<double>& phases_a,
                                  const std::vector<double>& phases_b, double delta) {
    struct Raw {
        double gain, delay;
    };
    std::vector<Raw> a, b;
    if (preset == ItuPreset::IndoorA) {
        a = {{1.0, 0.0}, {0.7079, 0.05}, {0.3162, 0.11}};
        b = {{1.0, 0.0}, {0.6808, 0.10}, {0.4365, 0.20}};
    } else {
        a = {{1.0, 0.0}, {0.9487, 0.15}, {0.3162, 0.25}};
        b = {{1.0, 0.0}, {0.9644, 0.35}, {0.3873, 0.45}};
    }
    if (phases_a.size() != a.size() || phases_b.size() != b.size())
        throw ValidationError("phase list length must match tap count (3)");
    ChannelProfile p;
    p.delta = delta;
    p.bandwidth_hz = bandwidth_hz;
    for (std::size_t i = 0; i < a.size(); ++i) p.taps_a.push_back({a[i].gain, a[i].delay, phases_a[i]});
    for (std::size_t j = 0; j < b.size(); ++j) p.taps_b.push_back({b[j].gain, b[j].delay, phases_b[j]});
    validate(p);
    return p;
}

/// Keep the first k taps of each node. Gains are not renormalized; the
/// harness accounts for the lost power through per-bit SNR equalization.
inline ChannelProfile truncate_taps(const ChannelProfile& p, int k) {
    const int n = static_cast<int>(std::max(p.taps_a.size(), p.taps_b.size()));
    if (k < 1 || k > n) throw ValidationError("truncate_taps: k out of range");
    ChannelProfile q = p;
    if (static_cast<std::size_t>(k) < q.taps_a.size()) q.taps_a.resize(static_cast<std::size_t>(k));
    if (static_cast<std::size_t>(k) < q.taps_b.size()) q.taps_b.resize(static_cast<std::size_t>(k));
    validate(q);
    return q;
}

/// Fine-grid rendering of the noiseless received baseband signal. Cell c
/// covers [c/K, (c+1)/K); the stored value is the signal at the cell
/// midpoint. Spans [0, N+2) so the guard covers any admissible delay spread.
struct WaveformGrid {
    int oversampling = 0; // K, samples per symbol duration
    int frame_len = 0;    // N
    std::vector<cplx> samples;

    double cell_width() const { return 1.0 / oversampling; }
};

/// Superposition of both nodes' tap-delayed rectangles:
///   r(t) = sum_n sum_i xA[n] gAi e^{j phiAi} 1[t in [n-1+tauI, n+tauI)]
///        + sum_n sum_j xB[n] gBj e^{j thBj} 1[t in [n-1+delta+lj, n+delta+lj)]
/// evaluated at grid midpoints.
inline WaveformGrid render_waveform(const ChannelProfile& p, const SymbolFrame& fa,
                                    const SymbolFrame& fb, int oversampling) {
    validate(p);
    if (fa.size() != fb.size()) throw ValidationError("render_waveform: frame length mismatch");
    if (oversampling < 64) throw ValidationError("render_waveform: K must be >= 64");
    const int n_sym = fa.size();
    WaveformGrid g;
    g.oversampling = oversampling;
    g.frame_len = n_sym;
    g.samples.assign(static_cast<std::size_t>(oversampling) * static_cast<std::size_t>(n_sym + 2),
                     cplx(0.0, 0.0));
    const double h = g.cell_width();
    auto add_node = [&](const std::vector<Tap>& taps, double offset, const std::vector<cplx>& x) {
        for (const Tap& tap : taps) {
            const cplx w = tap.weight();
            for (int n = 1; n <= n_sym; ++n) {
                const double t0 = (n - 1) + tap.delay + offset;
                const double t1 = n + tap.delay + offset;
                // cells whose midpoint falls in [t0, t1)
                auto first = static_cast<long>(std::ceil(t0 / h - 0.5));
                auto last = static_cast<long>(std::ceil(t1 / h - 0.5)); // exclusive
                first = std::max(first, 0L);
                last = std::min(last, static_cast<long>(g.samples.size()));
                const cplx v = w * x[static_cast<std::size_t>(n - 1)];
                for (long c = first; c < last; ++c) g.samples[static_cast<std::size_t>(c)] += v;
            }
        }
    };
    add_node(p.taps_a, 0.0, fa.symbols);
    add_node(p.taps_b, p.delta, fb.symbols);
    return g;
}

} // namespace mppnc
