#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "mppnc/errors.hpp"
#include "mppnc/frontend.hpp"
#include "mppnc/modem.hpp"

namespace mppnc {

/// One transmit symbol variable: x_node[index], index >= 1.
struct VarId {
    NodeId node = NodeId::A;
    int index = 0;

    bool operator==(const VarId& o) const { return node == o.node && index == o.index; }
};

/// Canonical variable order inside a belief: current symbol before older
/// ones, node A before node B. Matches the sample composition order
/// (x_A[n], x_B[n], x_A[n-1], x_B[n-1]).
inline bool var_before(const VarId& a, const VarId& b) {
    if (a.index != b.index) return a.index > b.index;
    return a.node < b.node;
}

/// Gaussian evidence for one received sample: which variables it contains,
/// their affine coefficients, and the per-component noise variance.
struct EvidenceNode {
    int sample_index = 0; // 0-based position in the SampleFrame
    std::vector<VarId> vars;
    std::vector<cplx> coeffs;
    double noise_var = 0.0;
};

/// Probability vector over the joint tuple space constellation^d of `vars`
/// (d up to 4, so up to 256 entries for QPSK; boundary nodes may have fewer
/// variables). Entries sum to 1 after normalization.
struct BeliefVector {
    std::vector<VarId> vars;
    std::vector<double> probs;
};

inline void normalize(std::vector<double>& probs) {
    double sum = 0.0;
    for (double v : probs) sum += v;
    if (!(sum > 0.0) || !std::isfinite(sum))
        throw DecodingFailure("belief/message underflowed to zero");
    for (double& v : probs) v /= sum;
}

/// Chain Tanner graph over the samples of one frame. Every evidence node
/// shares variables only with its immediate neighbours (the sample windows
/// are time-ordered and each variable's pulse footprint is an interval).
struct TannerChain {
    int frame_len = 0;
    int spp = 0;
    int m = 0; // constellation size
    std::vector<EvidenceNode> nodes;
    std::vector<std::vector<VarId>> shared;   // between node k and k+1
    std::vector<std::vector<int>> proj_left;  // node k tuple -> shared k index
    std::vector<std::vector<int>> proj_right; // node k+1 tuple -> shared k index

    int dim(int k) const { return static_cast<int>(nodes[static_cast<std::size_t>(k)].vars.size()); }
    int tuple_count(int k) const {
        int c = 1;
        for (int i = 0; i < dim(k); ++i) c *= m;
        return c;
    }
};

namespace detail {

/// Map from a node's tuple indices to indices over a variable subset.
/// Tuple digits run most-significant-first in canonical variable order.
inline std::vector<int> projection_table(const std::vector<VarId>& vars,
                                         const std::vector<VarId>& subset, int m) {
    int total = 1;
    for (std::size_t i = 0; i < vars.size(); ++i) total *= m;
    std::vector<int> digit_weight(vars.size(), 0);
    for (std::size_t j = 0; j < subset.size(); ++j) {
        int w = 1;
        for (std::size_t jj = j + 1; jj < subset.size(); ++jj) w *= m;
        auto it = std::find(vars.begin(), vars.end(), subset[j]);
        digit_weight[static_cast<std::size_t>(it - vars.begin())] = w;
    }
    std::vector<int> table(static_cast<std::size_t>(total));
    for (int t = 0; t < total; ++t) {
        int idx = 0, rem = t;
        for (std::size_t i = vars.size(); i-- > 0;) {
            const int digit = rem % m;
            rem /= m;
            idx += digit * digit_weight[i];
        }
        table[static_cast<std::size_t>(t)] = idx;
    }
    return table;
}

} // namespace detail

/// Build the chain for one sample frame: one evidence node per sample, with
/// variable sets taken from the table's affine maps (guard symbols with
/// index 0 drop out) and shared sets from adjacent overlap.
inline TannerChain build_chain(const CoefficientTable& t, const SampleFrame& s,
                               const Constellation& c) {
    if (s.method != t.method) throw ValidationError("build_chain: table/frame method mismatch");
    const int spp = t.samples_per_symbol();
    if (static_cast<int>(s.r.size()) != spp * s.frame_len)
        throw ValidationError("build_chain: sample count does not match frame length");
    TannerChain chain;
    chain.frame_len = s.frame_len;
    chain.spp = spp;
    chain.m = c.size();
    for (int n = 1; n <= s.frame_len; ++n) {
        for (int slot = 0; slot < spp; ++slot) {
            EvidenceNode node;
            node.sample_index = spp * (n - 1) + slot;
            for (const Contributor& cb : t.slots[static_cast<std::size_t>(slot)].contributors) {
                const int idx = n + cb.offset;
                if (idx < 1) continue;
                node.vars.push_back({cb.node, idx});
                node.coeffs.push_back(cb.coeff);
            }
            node.noise_var = s.noise_var[static_cast<std::size_t>(node.sample_index)];
            chain.nodes.push_back(std::move(node));
        }
    }
    // shared variables + projection tables
    for (std::size_t k = 0; k + 1 < chain.nodes.size(); ++k) {
        std::vector<VarId> sh;
        for (const VarId& v : chain.nodes[k].vars) {
            if (std::find(chain.nodes[k + 1].vars.begin(), chain.nodes[k + 1].vars.end(), v) !=
                chain.nodes[k + 1].vars.end())
                sh.push_back(v);
        }
        std::sort(sh.begin(), sh.end(), var_before);
        chain.proj_left.push_back(detail::projection_table(chain.nodes[k].vars, sh, chain.m));
        chain.proj_right.push_back(detail::projection_table(chain.nodes[k + 1].vars, sh, chain.m));
        chain.shared.push_back(std::move(sh));
    }
    // Markov sanity: a variable must occupy a contiguous run of nodes,
    // otherwise the chain factorization would be wrong.
    std::map<std::pair<int, int>, std::size_t> last_seen;
    for (std::size_t k = 0; k < chain.nodes.size(); ++k) {
        for (const VarId& v : chain.nodes[k].vars) {
            const auto key = std::pair{static_cast<int>(v.node), v.index};
            const auto it = last_seen.find(key);
            if (it != last_seen.end() && it->second + 1 < k)
                throw ValidationError("build_chain: variable span is not contiguous");
            last_seen[key] = k;
        }
    }
    return chain;
}

/// Noiseless predictions for every joint tuple of an evidence node.
inline std::vector<cplx> node_predictions(const EvidenceNode& e, const Constellation& c) {
    std::vector<cplx> pred = {cplx(0.0, 0.0)};
    for (std::size_t i = 0; i < e.vars.size(); ++i) {
        std::vector<cplx> next(pred.size() * static_cast<std::size_t>(c.size()));
        for (std::size_t t = 0; t < pred.size(); ++t)
            for (int lab = 0; lab < c.size(); ++lab)
                next[t * static_cast<std::size_t>(c.size()) + static_cast<std::size_t>(lab)] =
                    pred[t] + e.coeffs[i] * c.point(lab);
        pred = std::move(next);
    }
    return pred;
}

/// Evidence probabilities: for each joint tuple,
///   p ∝ exp(-(Re r - Re s)^2 / 2σ²) · exp(-(Im r - Im s)^2 / 2σ²)
/// with s the affine prediction. Stabilized by subtracting the smallest
/// quadratic cost before exponentiation (pure normalization, exact).
inline BeliefVector evidence_prob(const EvidenceNode& e, cplx r, const Constellation& c,
                                  const std::vector<cplx>* precomputed = nullptr) {
    if (!(e.noise_var > 0.0)) throw ValidationError("evidence_prob: noise variance must be positive");
    const std::vector<cplx> local = precomputed ? std::vector<cplx>() : node_predictions(e, c);
    const std::vector<cplx>& pred = precomputed ? *precomputed : local;
    const double w = 1.0 / (2.0 * e.noise_var);
    BeliefVector b;
    b.vars = e.vars;
    b.probs.resize(pred.size());
    double min_cost = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < pred.size(); ++t) {
        const double cost = w * std::norm(r - pred[t]);
        b.probs[t] = cost;
        min_cost = std::min(min_cost, cost);
    }
    for (double& v : b.probs) v = std::exp(min_cost - v);
    normalize(b.probs);
    return b;
}

/// One right-bound and one left-bound sum-product pass (the chain is a tree,
/// so a single pass each way is exact), then per-node fusion
/// evidence · incoming-left · incoming-right. Boundary nodes simply omit the
/// missing side. Messages are renormalized at every step.
inline std::vector<BeliefVector> forward_backward(const TannerChain& chain,
                                                  const std::vector<BeliefVector>& evidence) {
    const std::size_t count = chain.nodes.size();
    if (evidence.size() != count) throw ValidationError("forward_backward: evidence count mismatch");
    std::vector<std::vector<double>> fwd(count), bwd(count);

    auto shared_size = [&](std::size_t k) {
        std::size_t n = 1;
        for (std::size_t i = 0; i < chain.shared[k].size(); ++i) n *= static_cast<std::size_t>(chain.m);
        return n;
    };

    std::vector<double> work;
    for (std::size_t k = 0; k + 1 < count; ++k) {
        work = evidence[k].probs;
        if (k > 0) {
            for (std::size_t t = 0; t < work.size(); ++t)
                work[t] *= fwd[k - 1][static_cast<std::size_t>(chain.proj_right[k - 1][t])];
        }
        std::vector<double> msg(shared_size(k), 0.0);
        for (std::size_t t = 0; t < work.size(); ++t)
            msg[static_cast<std::size_t>(chain.proj_left[k][t])] += work[t];
        normalize(msg);
        fwd[k] = std::move(msg);
    }
    for (std::size_t k = count; k-- > 1;) {
        work = evidence[k].probs;
        if (k + 1 < count) {
            for (std::size_t t = 0; t < work.size(); ++t)
                work[t] *= bwd[k][static_cast<std::size_t>(chain.proj_left[k][t])];
        }
        std::vector<double> msg(shared_size(k - 1), 0.0);
        for (std::size_t t = 0; t < work.size(); ++t)
            msg[static_cast<std::size_t>(chain.proj_right[k - 1][t])] += work[t];
        normalize(msg);
        bwd[k - 1] = std::move(msg);
    }

    std::vector<BeliefVector> fused(count);
    for (std::size_t k = 0; k < count; ++k) {
        fused[k].vars = chain.nodes[k].vars;
        fused[k].probs = evidence[k].probs;
        if (k > 0) {
            for (std::size_t t = 0; t < fused[k].probs.size(); ++t)
                fused[k].probs[t] *= fwd[k - 1][static_cast<std::size_t>(chain.proj_right[k - 1][t])];
        }
        if (k + 1 < count) {
            for (std::size_t t = 0; t < fused[k].probs.size(); ++t)
                fused[k].probs[t] *= bwd[k][static_cast<std::size_t>(chain.proj_left[k][t])];
        }
        normalize(fused[k].probs);
    }
    return fused;
}

namespace detail {

/// Marginal over (x_A[n], x_B[n]) from the fused belief at the designated
/// pair node (the last sample of symbol period n always contains both).
inline std::vector<double> pair_marginal(const TannerChain& chain,
                                         const std::vector<BeliefVector>& fused, int n) {
    const std::size_t k = static_cast<std::size_t>(chain.spp * n - 1);
    const BeliefVector& b = fused[k];
    const int m = chain.m;
    auto pos_of = [&](VarId v) {
        auto it = std::find(b.vars.begin(), b.vars.end(), v);
        if (it == b.vars.end()) throw DecodingFailure("pair node missing expected variable");
        return static_cast<std::size_t>(it - b.vars.begin());
    };
    const std::size_t pa = pos_of({NodeId::A, n});
    const std::size_t pb = pos_of({NodeId::B, n});
    std::vector<double> out(static_cast<std::size_t>(m) * static_cast<std::size_t>(m), 0.0);
    const std::size_t d = b.vars.size();
    for (std::size_t t = 0; t < b.probs.size(); ++t) {
        std::size_t rem = t;
        int digit[4] = {0, 0, 0, 0};
        for (std::size_t i = d; i-- > 0;) {
            digit[i] = static_cast<int>(rem % static_cast<std::size_t>(m));
            rem /= static_cast<std::size_t>(m);
        }
        out[static_cast<std::size_t>(digit[pa] * m + digit[pb])] += b.probs[t];
    }
    return out;
}

} // namespace detail

/// ML network-coded decision: sum the pair marginal over equal-XOR classes
/// and take the argmax, breaking exact ties toward the lowest label.
inline std::vector<int> decide_xor_labels(const TannerChain& chain,
                                          const std::vector<BeliefVector>& fused,
                                          const Constellation& c) {
    std::vector<int> labels;
    labels.reserve(static_cast<std::size_t>(chain.frame_len));
    for (int n = 1; n <= chain.frame_len; ++n) {
        const std::vector<double> pm = detail::pair_marginal(chain, fused, n);
        std::vector<double> cls(static_cast<std::size_t>(c.size()), 0.0);
        for (int la = 0; la < c.size(); ++la)
            for (int lb = 0; lb < c.size(); ++lb)
                cls[static_cast<std::size_t>(la ^ lb)] += pm[static_cast<std::size_t>(la * c.size() + lb)];
        int best = 0;
        for (int x = 1; x < c.size(); ++x)
            if (cls[static_cast<std::size_t>(x)] > cls[static_cast<std::size_t>(best)]) best = x;
        labels.push_back(best);
    }
    return labels;
}

inline SymbolFrame decide_xor(const TannerChain& chain, const std::vector<BeliefVector>& fused,
                              const Constellation& c) {
    SymbolFrame f;
    for (int lab : decide_xor_labels(chain, fused, c)) {
        f.symbols.push_back(c.point(lab));
        for (int b : label_bits(lab, c)) f.source_bits.push_back(b);
    }
    return f;
}

/// Per-user hard decisions from the fused pair marginals (used by the
/// disjoint MUD-XOR baseline).
inline void decide_users(const TannerChain& chain, const std::vector<BeliefVector>& fused,
                         const Constellation& c, std::vector<int>& labels_a,
                         std::vector<int>& labels_b) {
    labels_a.clear();
    labels_b.clear();
    for (int n = 1; n <= chain.frame_len; ++n) {
        const std::vector<double> pm = detail::pair_marginal(chain, fused, n);
        std::vector<double> ma(static_cast<std::size_t>(c.size()), 0.0);
        std::vector<double> mb(static_cast<std::size_t>(c.size()), 0.0);
        for (int la = 0; la < c.size(); ++la)
            for (int lb = 0; lb < c.size(); ++lb) {
                const double v = pm[static_cast<std::size_t>(la * c.size() + lb)];
                ma[static_cast<std::size_t>(la)] += v;
                mb[static_cast<std::size_t>(lb)] += v;
            }
        int ba = 0, bb = 0;
        for (int l = 1; l < c.size(); ++l) {
            if (ma[static_cast<std::size_t>(l)] > ma[static_cast<std::size_t>(ba)]) ba = l;
            if (mb[static_cast<std::size_t>(l)] > mb[static_cast<std::size_t>(bb)]) bb = l;
        }
        labels_a.push_back(ba);
        labels_b.push_back(bb);
    }
}

/// Full MP-PNC decode of one sample frame into the XOR symbol sequence.
inline SymbolFrame decode(const CoefficientTable& t, const SampleFrame& s, const Constellation& c) {
    const TannerChain chain = build_chain(t, s, c);
    std::vector<BeliefVector> evidence;
    evidence.reserve(chain.nodes.size());
    for (const EvidenceNode& e : chain.nodes)
        evidence.push_back(evidence_prob(e, s.r[static_cast<std::size_t>(e.sample_index)], c));
    const std::vector<BeliefVector> fused = forward_backward(chain, evidence);
    return decide_xor(chain, fused, c);
}

} // namespace mppnc
