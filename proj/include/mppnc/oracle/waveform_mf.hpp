#pragma once

// Validation oracle: matched-filter sampling applied to the fine-grid
// waveform rendering of the received signal. Cross-checks direct_samples
// end to end (pulse superposition, window placement, coefficients) without
// touching the closed-form path.

#include <vector>

#include "mppnc/channel.hpp"
#include "mppnc/frontend.hpp"
#include "mppnc/oracle/quadrature.hpp"

namespace mppnc::oracle {

/// One matched-filter output taken from the waveform grid:
///   (1/W) * integral over [n-1+w0, n-1+w1) of grid(t) * conj(filter(t)) dt
/// with the grid treated as constant per cell. Exact to roundoff when all
/// pulse edges are commensurate with the grid; O(1/K) otherwise.
inline cplx mf_sample(const WaveformGrid& g, const ChannelProfile& p, SamplingMethod m, int n,
                      int slot) {
    const auto [w0, w1] = window(p, m, slot);
    const double a = (n - 1) + w0;
    const double b = (n - 1) + w1;
    const double h = g.cell_width();
    const long c0 = static_cast<long>(std::floor(a / h));
    const long c1 = std::min(static_cast<long>(std::ceil(b / h)), static_cast<long>(g.samples.size()));
    cplx acc(0.0, 0.0);
    for (long c = std::max(c0, 0L); c < c1; ++c) {
        const double lo = std::max(a, static_cast<double>(c) * h);
        const double hi = std::min(b, static_cast<double>(c + 1) * h);
        if (hi <= lo) continue;
        const double mid = 0.5 * (lo + hi) - (n - 1); // filter time is window-relative
        acc += g.samples[static_cast<std::size_t>(c)] * std::conj(filter_value(p, m, slot, mid)) *
               (hi - lo);
    }
    return acc / (b - a);
}

/// Full frame of oracle samples in SampleFrame layout.
inline std::vector<cplx> mf_samples(const WaveformGrid& g, const ChannelProfile& p,
                                    SamplingMethod m) {
    const int spp = samples_per_symbol(m);
    std::vector<cplx> out;
    out.reserve(static_cast<std::size_t>(spp) * static_cast<std::size_t>(g.frame_len));
    for (int n = 1; n <= g.frame_len; ++n)
        for (int slot = 0; slot < spp; ++slot) out.push_back(mf_sample(g, p, m, n, slot));
    return out;
}

/// Indices of samples whose value reacts to flipping one transmit symbol;
/// used to cross-check the decoder's evidence variable sets.
inline std::vector<int> sensitive_samples(const ChannelProfile& p, SamplingMethod m,
                                          const SymbolFrame& fa, const SymbolFrame& fb,
                                          NodeId node, int symbol_index, cplx replacement,
                                          int oversampling = 4096, double tol = 1e-9) {
    SymbolFrame fa2 = fa, fb2 = fb;
    auto& tgt = node == NodeId::A ? fa2 : fb2;
    tgt.symbols[static_cast<std::size_t>(symbol_index - 1)] = replacement;
    const WaveformGrid g1 = render_waveform(p, fa, fb, oversampling);
    const WaveformGrid g2 = render_waveform(p, fa2, fb2, oversampling);
    const std::vector<cplx> s1 = mf_samples(g1, p, m);
    const std::vector<cplx> s2 = mf_samples(g2, p, m);
    std::vector<int> out;
    for (std::size_t k = 0; k < s1.size(); ++k)
        if (std::abs(s1[k] - s2[k]) > tol) out.push_back(static_cast<int>(k));
    return out;
}

} // namespace mppnc::oracle
