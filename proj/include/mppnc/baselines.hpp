#pragma once

#include <cmath>
#include <vector>

#include "mppnc/decoder_bp.hpp"
#include "mppnc/frontend.hpp"
#include "mppnc/modem.hpp"

namespace mppnc {

/// Synchronous single-path PNC received sequence: y[n] = x_A[n] + x_B[n] + w[n]
/// with complex AWGN of per-component variance noise_var.
struct SyncObservation {
    std::vector<cplx> y;
    double noise_var = 0.0;
};

/// Memoryless XOR-MAP over the superimposed AWGN observation: per symbol,
/// sum the pair likelihoods within each XOR class and take the argmax
/// (lowest label on exact ties). Serves as the lower-bound benchmark.
inline SymbolFrame decode_sync_pnc(const SyncObservation& o, const Constellation& c) {
    if (!(o.noise_var > 0.0)) throw ValidationError("decode_sync_pnc: noise variance must be positive");
    const double w = 1.0 / (2.0 * o.noise_var);
    SymbolFrame out;
    std::vector<double> cls(static_cast<std::size_t>(c.size()));
    for (const cplx y : o.y) {
        std::fill(cls.begin(), cls.end(), 0.0);
        double min_cost = std::numeric_limits<double>::infinity();
        std::vector<double> cost(static_cast<std::size_t>(c.size() * c.size()));
        for (int la = 0; la < c.size(); ++la)
            for (int lb = 0; lb < c.size(); ++lb) {
                const double v = w * std::norm(y - c.point(la) - c.point(lb));
                cost[static_cast<std::size_t>(la * c.size() + lb)] = v;
                min_cost = std::min(min_cost, v);
            }
        for (int la = 0; la < c.size(); ++la)
            for (int lb = 0; lb < c.size(); ++lb)
                cls[static_cast<std::size_t>(la ^ lb)] +=
                    std::exp(min_cost - cost[static_cast<std::size_t>(la * c.size() + lb)]);
        int best = 0;
        for (int x = 1; x < c.size(); ++x)
            if (cls[static_cast<std::size_t>(x)] > cls[static_cast<std::size_t>(best)]) best = x;
        out.symbols.push_back(c.point(best));
        for (int b : label_bits(best, c)) out.source_bits.push_back(b);
    }
    return out;
}

/// Disjoint MUD-XOR comparator: identical front end and message passing as
/// MP-PNC, but each user is hard-decided from its own marginal before the
/// XOR, so any BER difference comes from the decision rule alone.
inline SymbolFrame decode_mud_xor(const CoefficientTable& t, const SampleFrame& s,
                                  const Constellation& c) {
    const TannerChain chain = build_chain(t, s, c);
    std::vector<BeliefVector> evidence;
    evidence.reserve(chain.nodes.size());
    for (const EvidenceNode& e : chain.nodes)
        evidence.push_back(evidence_prob(e, s.r[static_cast<std::size_t>(e.sample_index)], c));
    const std::vector<BeliefVector> fused = forward_backward(chain, evidence);
    std::vector<int> la, lb;
    decide_users(chain, fused, c, la, lb);
    SymbolFrame out;
    for (std::size_t n = 0; n < la.size(); ++n) {
        const int x = la[n] ^ lb[n];
        out.symbols.push_back(c.point(x));
        for (int b : label_bits(x, c)) out.source_bits.push_back(b);
    }
    return out;
}

} // namespace mppnc
