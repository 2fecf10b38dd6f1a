#pragma once

// Validation oracle: exhaustive joint-likelihood decoding over all M^(2N)
// transmit frames. Shares only the affine sample model (the coefficient
// table, itself validated against quadrature) with the BP decoder; the
// inference here is plain enumeration.

#include <cmath>
#include <limits>
#include <vector>

#include "mppnc/frontend.hpp"
#include "mppnc/modem.hpp"

namespace mppnc::oracle {

inline void normalize_or_zero(std::vector<double>& v) {
    double sum = 0.0;
    for (double x : v) sum += x;
    if (sum > 0.0)
        for (double& x : v) x /= sum;
}

struct BruteForceResult {
    // joint posterior over each sample's own variable tuple, canonical order
    std::vector<std::vector<double>> node_marginals;
    // P(x_A[n], x_B[n] | r), index la*M+lb, per symbol
    std::vector<std::vector<double>> pair_marginals;
    // XOR-class posterior per symbol
    std::vector<std::vector<double>> xor_posterior;
    std::vector<int> xor_labels;    // posterior XOR-MAP decisions
    std::vector<double> xor_margin; // (best - runner-up) / best
};

inline BruteForceResult brute_force_map(const CoefficientTable& table, const SampleFrame& s,
                                        const Constellation& c) {
    const int n_sym = s.frame_len;
    const int spp = table.samples_per_symbol();
    const int m = c.size();
    const std::size_t total_samples = static_cast<std::size_t>(spp) * static_cast<std::size_t>(n_sym);

    // Per-sample variable lists (current/previous symbol labels) and weight
    // tables normalized so each sample's best entry is 1.
    struct SampleModel {
        std::vector<int> var_node;   // 0=A, 1=B
        std::vector<int> var_index;  // symbol index >= 1
        std::vector<double> weight;  // exp(minCost - cost) over tuple space
    };
    std::vector<SampleModel> models(total_samples);
    for (int n = 1; n <= n_sym; ++n) {
        for (int slot = 0; slot < spp; ++slot) {
            const std::size_t k = static_cast<std::size_t>(spp * (n - 1) + slot);
            SampleModel& md = models[k];
            std::vector<cplx> coeffs;
            for (const Contributor& cb : table.slots[static_cast<std::size_t>(slot)].contributors) {
                if (n + cb.offset < 1) continue;
                md.var_node.push_back(cb.node == NodeId::A ? 0 : 1);
                md.var_index.push_back(n + cb.offset);
                coeffs.push_back(cb.coeff);
            }
            std::size_t count = 1;
            for (std::size_t i = 0; i < coeffs.size(); ++i) count *= static_cast<std::size_t>(m);
            const double w = 1.0 / (2.0 * s.noise_var[k]);
            const cplx r = s.r[k];
            std::vector<double> cost(count);
            double min_cost = std::numeric_limits<double>::infinity();
            for (std::size_t t = 0; t < count; ++t) {
                cplx pred(0.0, 0.0);
                std::size_t rem = t;
                for (std::size_t i = coeffs.size(); i-- > 0;) {
                    pred += coeffs[i] * c.point(static_cast<int>(rem % static_cast<std::size_t>(m)));
                    rem /= static_cast<std::size_t>(m);
                }
                cost[t] = w * std::norm(r - pred);
                min_cost = std::min(min_cost, cost[t]);
            }
            md.weight.resize(count);
            for (std::size_t t = 0; t < count; ++t) md.weight[t] = std::exp(min_cost - cost[t]);
        }
    }

    BruteForceResult res;
    res.node_marginals.resize(total_samples);
    for (std::size_t k = 0; k < total_samples; ++k)
        res.node_marginals[k].assign(models[k].weight.size(), 0.0);
    res.pair_marginals.assign(static_cast<std::size_t>(n_sym),
                              std::vector<double>(static_cast<std::size_t>(m * m), 0.0));

    std::vector<int> lab_a(static_cast<std::size_t>(n_sym) + 1, 0);
    std::vector<int> lab_b(static_cast<std::size_t>(n_sym) + 1, 0);
    std::vector<double> prefix(static_cast<std::size_t>(n_sym) + 1, 1.0);
    std::vector<std::size_t> tuple_idx(total_samples, 0);

    auto sample_tuple_index = [&](std::size_t k) {
        const SampleModel& md = models[k];
        std::size_t idx = 0;
        for (std::size_t i = 0; i < md.var_node.size(); ++i) {
            const int lab = md.var_node[i] == 0 ? lab_a[static_cast<std::size_t>(md.var_index[i])]
                                                : lab_b[static_cast<std::size_t>(md.var_index[i])];
            idx = idx * static_cast<std::size_t>(m) + static_cast<std::size_t>(lab);
        }
        return idx;
    };

    // depth-first enumeration over (x_A[n], x_B[n]) pairs
    auto recurse = [&](auto&& self, int n) -> void {
        if (n > n_sym) {
            const double w = prefix[static_cast<std::size_t>(n_sym)];
            for (std::size_t k = 0; k < total_samples; ++k)
                res.node_marginals[k][tuple_idx[k]] += w;
            for (int i = 1; i <= n_sym; ++i)
                res.pair_marginals[static_cast<std::size_t>(i - 1)]
                                  [static_cast<std::size_t>(lab_a[static_cast<std::size_t>(i)] * m +
                                                            lab_b[static_cast<std::size_t>(i)])] += w;
            return;
        }
        for (int la = 0; la < m; ++la) {
            lab_a[static_cast<std::size_t>(n)] = la;
            for (int lb = 0; lb < m; ++lb) {
                lab_b[static_cast<std::size_t>(n)] = lb;
                double w = prefix[static_cast<std::size_t>(n - 1)];
                for (int slot = 0; slot < spp; ++slot) {
                    const std::size_t k = static_cast<std::size_t>(spp * (n - 1) + slot);
                    tuple_idx[k] = sample_tuple_index(k);
                    w *= models[k].weight[tuple_idx[k]];
                }
                prefix[static_cast<std::size_t>(n)] = w;
                self(self, n + 1);
            }
        }
    };
    recurse(recurse, 1);

    for (auto& marg : res.node_marginals) normalize_or_zero(marg);
    for (auto& marg : res.pair_marginals) normalize_or_zero(marg);

    for (int n = 1; n <= n_sym; ++n) {
        const auto& pm = res.pair_marginals[static_cast<std::size_t>(n - 1)];
        std::vector<double> cls(static_cast<std::size_t>(m), 0.0);
        for (int la = 0; la < m; ++la)
            for (int lb = 0; lb < m; ++lb)
                cls[static_cast<std::size_t>(la ^ lb)] += pm[static_cast<std::size_t>(la * m + lb)];
        int best = 0;
        for (int x = 1; x < m; ++x)
            if (cls[static_cast<std::size_t>(x)] > cls[static_cast<std::size_t>(best)]) best = x;
        double second = 0.0;
        for (int x = 0; x < m; ++x)
            if (x != best) second = std::max(second, cls[static_cast<std::size_t>(x)]);
        res.xor_posterior.push_back(cls);
        res.xor_labels.push_back(best);
        res.xor_margin.push_back(cls[static_cast<std::size_t>(best)] > 0.0
                                     ? (cls[static_cast<std::size_t>(best)] - second) /
                                           cls[static_cast<std::size_t>(best)]
                                     : 0.0);
    }
    return res;
}

} // namespace mppnc::oracle
