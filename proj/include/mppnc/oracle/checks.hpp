#pragma once

// Composed oracle cross-checks: closed form vs quadrature, direct samples vs
// waveform matched filtering, BP vs exhaustive MAP. Shared by the `validate`
// CLI subcommand and the test suites.

#include <cstdint>
#include <vector>

#include "mppnc/decoder_bp.hpp"
#include "mppnc/harness.hpp"
#include "mppnc/oracle/brute_force.hpp"
#include "mppnc/oracle/quadrature.hpp"
#include "mppnc/oracle/waveform_mf.hpp"
#include "mppnc/rng.hpp"

namespace mppnc::oracle {

/// Random valid profile. When `method` is Quad the window ordering
/// 0 < tau1 < delta < delta+l1 < 1 is enforced with margins; when
/// `grid` > 0 all delays and delta are quantized to multiples of 1/grid so
/// pulse edges are commensurate with a K=grid waveform grid.
inline ChannelProfile random_profile(RandomStream& rng, int taps_per_node, SamplingMethod method,
                                     long grid = 0) {
    auto quantize = [&](double v) {
        if (grid <= 0) return v;
        return std::round(v * static_cast<double>(grid)) / static_cast<double>(grid);
    };
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * rng.next_double(); };
    ChannelProfile p;
    p.delta = quantize(uniform(0.2, 0.8));
    auto gains = [&](int count) {
        std::vector<double> g = {uniform(0.6, 1.0)};
        for (int i = 1; i < count; ++i) g.push_back(uniform(0.2, 0.9));
        return g;
    };
    const std::vector<double> ga = gains(taps_per_node);
    const std::vector<double> gb = gains(taps_per_node);

    std::vector<double> da = {0.0}, db = {0.0};
    if (method == SamplingMethod::Quad) {
        da.push_back(quantize(uniform(0.05, p.delta - 0.05)));
        db.push_back(quantize(uniform(0.05, 1.0 - p.delta - 0.05)));
    } else {
        double prev = 0.0;
        for (int i = 1; i < taps_per_node; ++i) {
            prev = quantize(uniform(prev + 0.04, 0.9 - 0.1 * (taps_per_node - 1 - i)));
            da.push_back(prev);
        }
        prev = 0.0;
        for (int i = 1; i < taps_per_node; ++i) {
            prev = quantize(uniform(prev + 0.04, (1.0 - p.delta) - 0.02 * (taps_per_node - i)));
            db.push_back(prev);
        }
    }
    for (int i = 0; i < taps_per_node; ++i) {
        p.taps_a.push_back({ga[static_cast<std::size_t>(i)], da[static_cast<std::size_t>(i)],
                            uniform(0.0, 2.0 * std::numbers::pi)});
        p.taps_b.push_back({gb[static_cast<std::size_t>(i)], db[static_cast<std::size_t>(i)],
                            uniform(0.0, 2.0 * std::numbers::pi)});
    }
    validate(p);
    return p;
}

/// Max deviation of closed-form coefficients from the quadrature oracle.
inline double check_quadrature(const ChannelProfile& p, SamplingMethod m,
                               long subintervals = 100000) {
    const CoefficientTable t = compute_coefficients(p, m);
    return max_abs_deviation(t, quadrature_coefficients(p, m, subintervals));
}

/// Max deviation of noiseless direct_samples from matched-filter integration
/// of the rendered waveform grid, over one random frame.
inline double check_waveform(const ChannelProfile& p, SamplingMethod m, const Constellation& c,
                             int frame_len, int oversampling, std::uint64_t seed) {
    RandomStream rng(seed);
    auto random_bits = [&](int count) {
        std::vector<int> bits(static_cast<std::size_t>(count));
        for (auto& b : bits) b = rng.next_bit() ? 1 : 0;
        return bits;
    };
    const SymbolFrame fa = modulate(random_bits(frame_len * c.bits_per_symbol()), c, NodeId::A);
    const SymbolFrame fb = modulate(random_bits(frame_len * c.bits_per_symbol()), c, NodeId::B);
    const CoefficientTable t = compute_coefficients(p, m);
    const SampleFrame s = direct_samples(p, t, fa, fb);
    const WaveformGrid g = render_waveform(p, fa, fb, oversampling);
    const std::vector<cplx> ref = mf_samples(g, p, m);
    double worst = 0.0;
    for (std::size_t k = 0; k < ref.size(); ++k) worst = std::max(worst, std::abs(ref[k] - s.r[k]));
    return worst;
}

struct BpBruteComparison {
    double max_marginal_rel_err = 0.0;
    bool decisions_match = true;
    int decided_symbols = 0;
};

inline double rel_err(double a, double b, double floor = 1e-12) {
    const double m = std::max(std::abs(a), std::abs(b));
    if (m <= floor) return 0.0;
    return std::abs(a - b) / m;
}

/// One random BP-vs-exhaustive instance: fused marginals against enumeration
/// marginals, XOR decisions against the posterior XOR-MAP (compared only
/// when the brute-force margin exceeds `margin_floor`).
inline BpBruteComparison check_bp_small_n(const ChannelProfile& p, SamplingMethod m,
                                          const Constellation& c, int frame_len, double snr_db,
                                          std::uint64_t seed, double margin_floor = 1e-9) {
    RandomStream rng(seed);
    auto random_bits = [&](int count) {
        std::vector<int> bits(static_cast<std::size_t>(count));
        for (auto& b : bits) b = rng.next_bit() ? 1 : 0;
        return bits;
    };
    const SymbolFrame fa = modulate(random_bits(frame_len * c.bits_per_symbol()), c, NodeId::A);
    const SymbolFrame fb = modulate(random_bits(frame_len * c.bits_per_symbol()), c, NodeId::B);
    const CoefficientTable t = compute_coefficients(p, m);
    const double n0 = multipath_eb(p, c) / std::pow(10.0, snr_db / 10.0);
    SampleFrame s = direct_samples(p, t, fa, fb);
    s = add_noise(s, n0, rng);

    const BruteForceResult brute = brute_force_map(t, s, c);
    const TannerChain chain = build_chain(t, s, c);
    std::vector<BeliefVector> evidence;
    for (const EvidenceNode& e : chain.nodes)
        evidence.push_back(evidence_prob(e, s.r[static_cast<std::size_t>(e.sample_index)], c));
    const std::vector<BeliefVector> fused = forward_backward(chain, evidence);

    BpBruteComparison cmp;
    for (std::size_t k = 0; k < chain.nodes.size(); ++k) {
        for (std::size_t i = 0; i < fused[k].probs.size(); ++i) {
            cmp.max_marginal_rel_err = std::max(
                cmp.max_marginal_rel_err, rel_err(fused[k].probs[i], brute.node_marginals[k][i]));
        }
    }
    const std::vector<int> bp_labels = decide_xor_labels(chain, fused, c);
    for (int n = 0; n < frame_len; ++n) {
        if (brute.xor_margin[static_cast<std::size_t>(n)] > margin_floor) {
            ++cmp.decided_symbols;
            if (bp_labels[static_cast<std::size_t>(n)] != brute.xor_labels[static_cast<std::size_t>(n)])
                cmp.decisions_match = false;
        }
    }
    return cmp;
}

} // namespace mppnc::oracle
