#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mppnc/baselines.hpp"
#include "mppnc/channel.hpp"
#include "mppnc/decoder_bp.hpp"
#include "mppnc/errors.hpp"
#include "mppnc/frontend.hpp"
#include "mppnc/modem.hpp"
#include "mppnc/rng.hpp"

namespace mppnc {

enum class DecoderId { MpPnc, MudXor, SyncPnc };

inline const char* decoder_name(DecoderId d) {
    switch (d) {
        case DecoderId::MpPnc: return "mp_pnc";
        case DecoderId::MudXor: return "mud_xor";
        default: return "sync_pnc";
    }
}

/// Full description of one experiment: channel, front end, sweeps, Monte
/// Carlo budgets. delta and the per-node phase lists may carry several
/// values/cases; run_sweep expands them.
struct ExperimentConfig {
    ConstellationKind modulation = ConstellationKind::Qpsk;
    SamplingMethod method = SamplingMethod::Double;
    std::vector<Tap> taps_a, taps_b; // gains/delays (phases here are defaults)
    int truncate = 0;                // 0 = keep all taps
    std::vector<double> deltas = {0.5};
    std::vector<std::vector<double>> phases_a_cases, phases_b_cases;
    std::vector<double> snr_db;
    int frame_len = 128;
    long long min_bits = 100000;
    long long max_errors = 200;
    std::vector<DecoderId> decoders = {DecoderId::MpPnc};
    std::uint64_t seed = 1;

    Constellation constellation() const {
        return modulation == ConstellationKind::Bpsk ? Constellation::bpsk() : Constellation::qpsk();
    }

    int tap_count() const {
        int k = static_cast<int>(std::max(taps_a.size(), taps_b.size()));
        if (truncate > 0) k = std::min(k, truncate);
        return k;
    }

    int phase_case_count() const {
        return static_cast<int>(std::max(std::max(phases_a_cases.size(), phases_b_cases.size()),
                                         std::size_t{1}));
    }

    const std::vector<double>* phase_case(const std::vector<std::vector<double>>& cases,
                                          int idx) const {
        if (cases.empty()) return nullptr;
        return cases.size() == 1 ? &cases[0] : &cases[static_cast<std::size_t>(idx)];
    }

    /// Assemble the truncated, phase-rotated, validated profile for one
    /// (delta, phase-case) grid point.
    ChannelProfile profile_for(int delta_idx, int phase_idx) const {
        ChannelProfile p;
        p.taps_a = taps_a;
        p.taps_b = taps_b;
        p.delta = deltas[static_cast<std::size_t>(delta_idx)];
        if (truncate > 0) {
            if (static_cast<std::size_t>(truncate) < p.taps_a.size())
                p.taps_a.resize(static_cast<std::size_t>(truncate));
            if (static_cast<std::size_t>(truncate) < p.taps_b.size())
                p.taps_b.resize(static_cast<std::size_t>(truncate));
        }
        auto apply = [&](std::vector<Tap>& taps, const std::vector<double>* phases, const char* who) {
            if (!phases) return;
            if (phases->size() != taps.size())
                throw ConfigError(std::string(who) + ": phase case length does not match tap count");
            for (std::size_t i = 0; i < taps.size(); ++i) taps[i].phase = (*phases)[i];
        };
        apply(p.taps_a, phase_case(phases_a_cases, phase_idx), "phases_a");
        apply(p.taps_b, phase_case(phases_b_cases, phase_idx), "phases_b");
        validate(p);
        return p;
    }

    void check() const {
        if (taps_a.empty() || taps_b.empty())
            throw ConfigError("no channel taps configured (need profile or taps_a/taps_b)");
        if (snr_db.empty()) throw ConfigError("snr_db list must not be empty");
        for (std::size_t i = 1; i < snr_db.size(); ++i)
            if (!(snr_db[i] > snr_db[i - 1]))
                throw ConfigError("snr_db list must be strictly increasing");
        if (frame_len < 2) throw ConfigError("frame_len must be >= 2");
        if (min_bits < 10000) throw ConfigError("min_bits must be >= 10000");
        if (max_errors < 1) throw ConfigError("max_errors must be >= 1");
        if (decoders.empty()) throw ConfigError("decoder set must not be empty");
        for (double d : deltas)
            if (!(d > 0.0 && d < 1.0)) throw ConfigError("delta must lie in (0,1)");
        const std::size_t pc = static_cast<std::size_t>(phase_case_count());
        auto check_cases = [&](const std::vector<std::vector<double>>& cases, const char* who) {
            if (!cases.empty() && cases.size() != 1 && cases.size() != pc)
                throw ConfigError(std::string(who) + ": phase case counts do not match");
        };
        check_cases(phases_a_cases, "phases_a");
        check_cases(phases_b_cases, "phases_b");
    }
};

/// One sweep point for one decoder.
struct BerRecord {
    DecoderId decoder = DecoderId::MpPnc;
    double snr_db = 0.0;
    double delta = 0.0;
    std::vector<double> phases_a, phases_b;
    long long bits = 0;
    long long errors = 0;
    double ber = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

/// Wilson 95% score interval; contains the MLE and stays sane at zero
/// error counts.
inline std::pair<double, double> wilson_interval(long long errors, long long bits) {
    const double z = 1.959963984540054;
    const double n = static_cast<double>(bits);
    const double p = static_cast<double>(errors) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

/// True received energy of one unit-energy symbol through a node's tapped
/// delay line: the paths combine coherently, so the rectangle cross terms
///   2 g_i g_j cos(phi_i - phi_j) (1 - |tau_i - tau_j|)
/// contribute alongside the per-path powers.
inline double received_symbol_energy(const std::vector<Tap>& taps) {
    double e = 0.0;
    for (std::size_t i = 0; i < taps.size(); ++i) {
        for (std::size_t j = 0; j < taps.size(); ++j) {
            const double overlap = 1.0 - std::abs(taps[i].delay - taps[j].delay);
            if (overlap <= 0.0) continue;
            e += taps[i].gain * taps[j].gain * std::cos(taps[i].phase - taps[j].phase) * overlap;
        }
    }
    return e;
}

/// Received energy per information bit, totalled over both nodes' effective
/// pulses and averaged over the two users' bit streams:
///   E_b = (E_A + E_B) / (2 * bits_per_symbol),  E_X = integral |h_X(t)|^2 dt.
inline double multipath_eb(const ChannelProfile& p, const Constellation& c) {
    return (received_symbol_energy(p.taps_a) + received_symbol_energy(p.taps_b)) /
           (2.0 * c.bits_per_symbol());
}

/// Single-path AWGN benchmark energy per bit (unit gain per node).
inline double sync_eb(const Constellation& c) { return 1.0 / c.bits_per_symbol(); }

namespace detail {

struct PointAccum {
    long long bits = 0;
    long long errors = 0;
    bool done = false;
};

struct FrameErrors {
    long long mp = 0, mud = 0, sync = 0;
};

/// Stream purposes for counter-based derivation.
inline constexpr std::uint64_t kStreamBits = 1;
inline constexpr std::uint64_t kStreamNoise = 2;
inline constexpr std::uint64_t kStreamSyncNoise = 3;

inline int bit_errors(int lab_x, int lab_y, int bps) {
    int diff = lab_x ^ lab_y;
    int e = 0;
    while (diff) {
        e += diff & 1;
        diff >>= 1;
    }
    (void)bps;
    return e;
}

/// Per-point precomputed decode state shared by all frames.
struct PointContext {
    const ExperimentConfig* cfg = nullptr;
    Constellation c;
    const CoefficientTable* table = nullptr; // null when only sync runs
    ChannelProfile profile;
    int delta_idx = 0, phase_idx = 0, snr_idx = 0;
    double n0_mp = 0.0, n0_sync = 0.0;
    bool want_mp = false, want_mud = false, want_sync = false;
    TannerChain chain; // prototype chain (structure + variances) reused per frame
    std::vector<std::vector<cplx>> preds;
};

inline FrameErrors run_frame(const PointContext& ctx, long long frame_idx, bool need_bp,
                             bool need_sync) {
    const ExperimentConfig& cfg = *ctx.cfg;
    const Constellation& c = ctx.c;
    const int n_sym = cfg.frame_len;
    const int bps = c.bits_per_symbol();

    RandomStream bits_rng(derive_seed(cfg.seed, kStreamBits,
                                      static_cast<std::uint64_t>(ctx.delta_idx),
                                      static_cast<std::uint64_t>(ctx.phase_idx),
                                      static_cast<std::uint64_t>(ctx.snr_idx),
                                      static_cast<std::uint64_t>(frame_idx)));
    std::vector<int> bits_a(static_cast<std::size_t>(n_sym * bps));
    std::vector<int> bits_b(static_cast<std::size_t>(n_sym * bps));
    for (auto& b : bits_a) b = bits_rng.next_bit() ? 1 : 0;
    for (auto& b : bits_b) b = bits_rng.next_bit() ? 1 : 0;
    const SymbolFrame fa = modulate(bits_a, c, NodeId::A);
    const SymbolFrame fb = modulate(bits_b, c, NodeId::B);

    std::vector<int> labels_a(static_cast<std::size_t>(n_sym)), labels_b(static_cast<std::size_t>(n_sym));
    for (int n = 0; n < n_sym; ++n) {
        int la = 0, lb = 0;
        for (int b = 0; b < bps; ++b) {
            la = (la << 1) | bits_a[static_cast<std::size_t>(n * bps + b)];
            lb = (lb << 1) | bits_b[static_cast<std::size_t>(n * bps + b)];
        }
        labels_a[static_cast<std::size_t>(n)] = la;
        labels_b[static_cast<std::size_t>(n)] = lb;
    }

    FrameErrors out;
    if (need_bp) {
        SampleFrame s = direct_samples(ctx.profile, *ctx.table, fa, fb);
        RandomStream noise_rng(derive_seed(cfg.seed, kStreamNoise,
                                           static_cast<std::uint64_t>(ctx.delta_idx),
                                           static_cast<std::uint64_t>(ctx.phase_idx),
                                           static_cast<std::uint64_t>(ctx.snr_idx),
                                           static_cast<std::uint64_t>(frame_idx)));
        s = add_noise(s, ctx.n0_mp, noise_rng);

        std::vector<BeliefVector> evidence;
        evidence.reserve(ctx.chain.nodes.size());
        for (std::size_t k = 0; k < ctx.chain.nodes.size(); ++k) {
            const EvidenceNode& e = ctx.chain.nodes[k];
            evidence.push_back(
                evidence_prob(e, s.r[static_cast<std::size_t>(e.sample_index)], c, &ctx.preds[k]));
        }
        const std::vector<BeliefVector> fused = forward_backward(ctx.chain, evidence);
        if (ctx.want_mp) {
            const std::vector<int> xr = decide_xor_labels(ctx.chain, fused, c);
            for (int n = 0; n < n_sym; ++n)
                out.mp += bit_errors(xr[static_cast<std::size_t>(n)],
                                     labels_a[static_cast<std::size_t>(n)] ^
                                         labels_b[static_cast<std::size_t>(n)],
                                     bps);
        }
        if (ctx.want_mud) {
            std::vector<int> da, db;
            decide_users(ctx.chain, fused, c, da, db);
            for (int n = 0; n < n_sym; ++n)
                out.mud += bit_errors(da[static_cast<std::size_t>(n)] ^ db[static_cast<std::size_t>(n)],
                                      labels_a[static_cast<std::size_t>(n)] ^
                                          labels_b[static_cast<std::size_t>(n)],
                                      bps);
        }
    }
    if (need_sync) {
        RandomStream sync_rng(derive_seed(cfg.seed, kStreamSyncNoise,
                                          static_cast<std::uint64_t>(ctx.delta_idx),
                                          static_cast<std::uint64_t>(ctx.phase_idx),
                                          static_cast<std::uint64_t>(ctx.snr_idx),
                                          static_cast<std::uint64_t>(frame_idx)));
        SyncObservation obs;
        obs.noise_var = ctx.n0_sync * 0.5;
        obs.y.reserve(static_cast<std::size_t>(n_sym));
        const double sd = std::sqrt(obs.noise_var);
        for (int n = 0; n < n_sym; ++n) {
            double z0, z1;
            sync_rng.next_gaussian_pair(z0, z1);
            obs.y.push_back(fa.symbols[static_cast<std::size_t>(n)] +
                            fb.symbols[static_cast<std::size_t>(n)] + cplx(sd * z0, sd * z1));
        }
        const SymbolFrame xr = decode_sync_pnc(obs, c);
        for (int n = 0; n < n_sym; ++n)
            out.sync += bit_errors(c.label_of(xr.symbols[static_cast<std::size_t>(n)]),
                                   labels_a[static_cast<std::size_t>(n)] ^
                                       labels_b[static_cast<std::size_t>(n)],
                                   bps);
    }
    return out;
}

} // namespace detail

/// Monte Carlo sweep over (delta x phase-case x SNR x decoder). Trials use
/// counter-derived RNG streams and batch-boundary stopping, so the output is
/// byte-identical for any worker count. Each point runs until min_bits bits
/// are counted or max_errors bit errors are seen, whichever comes first
/// (evaluated on whole batches).
inline std::vector<BerRecord> run_sweep(const ExperimentConfig& cfg, int workers = 0) {
    cfg.check();
    if (workers <= 0) {
        workers = static_cast<int>(std::thread::hardware_concurrency());
        if (workers <= 0) workers = 1;
    }
    const Constellation c = cfg.constellation();
    const int bps = c.bits_per_symbol();
    const bool want_mp = std::find(cfg.decoders.begin(), cfg.decoders.end(), DecoderId::MpPnc) !=
                         cfg.decoders.end();
    const bool want_mud = std::find(cfg.decoders.begin(), cfg.decoders.end(), DecoderId::MudXor) !=
                          cfg.decoders.end();
    const bool want_sync = std::find(cfg.decoders.begin(), cfg.decoders.end(), DecoderId::SyncPnc) !=
                           cfg.decoders.end();

    std::vector<BerRecord> records;
    for (int di = 0; di < static_cast<int>(cfg.deltas.size()); ++di) {
        for (int pi = 0; pi < cfg.phase_case_count(); ++pi) {
            detail::PointContext ctx;
            ctx.cfg = &cfg;
            ctx.c = c;
            ctx.delta_idx = di;
            ctx.phase_idx = pi;
            ctx.want_mp = want_mp;
            ctx.want_mud = want_mud;
            ctx.want_sync = want_sync;
            ctx.profile = cfg.profile_for(di, pi);
            CoefficientTable table;
            if (want_mp || want_mud) {
                table = compute_coefficients(ctx.profile, cfg.method);
                ctx.table = &table;
            }
            const double eb_mp = multipath_eb(ctx.profile, c);
            const double eb_sy = sync_eb(c);

            for (int si = 0; si < static_cast<int>(cfg.snr_db.size()); ++si) {
                ctx.snr_idx = si;
                const double snr_lin = std::pow(10.0, cfg.snr_db[static_cast<std::size_t>(si)] / 10.0);
                ctx.n0_mp = eb_mp / snr_lin;
                ctx.n0_sync = eb_sy / snr_lin;

                if (ctx.table) {
                    // prototype chain: zero samples, correct per-slot variances
                    SymbolFrame za, zb;
                    za.symbols.assign(static_cast<std::size_t>(cfg.frame_len), c.point(0));
                    zb = za;
                    SampleFrame proto = direct_samples(ctx.profile, *ctx.table, za, zb);
                    for (std::size_t k = 0; k < proto.noise_var.size(); ++k)
                        proto.noise_var[k] =
                            proto.slot_noise_factor[k % static_cast<std::size_t>(
                                proto.samples_per_symbol())] *
                            ctx.n0_mp * 0.5;
                    ctx.chain = build_chain(*ctx.table, proto, c);
                    ctx.preds.clear();
                    for (const EvidenceNode& e : ctx.chain.nodes)
                        ctx.preds.push_back(node_predictions(e, c));
                }

                detail::PointAccum acc_mp, acc_mud, acc_sync;
                acc_mp.done = !want_mp;
                acc_mud.done = !want_mud;
                acc_sync.done = !want_sync;
                const long long frame_bits = static_cast<long long>(cfg.frame_len) * bps;
                const long long batch =
                    std::max<long long>(1, (65536 + frame_bits - 1) / frame_bits);
                long long next_frame = 0;

                while (!(acc_mp.done && acc_mud.done && acc_sync.done)) {
                    const bool need_bp = !acc_mp.done || !acc_mud.done;
                    const bool need_sync = !acc_sync.done;
                    std::vector<detail::FrameErrors> results(static_cast<std::size_t>(batch));
                    auto task = [&](int worker_id) {
                        for (long long f = worker_id; f < batch; f += workers)
                            results[static_cast<std::size_t>(f)] =
                                detail::run_frame(ctx, next_frame + f, need_bp, need_sync);
                    };
                    if (workers == 1) {
                        task(0);
                    } else {
                        std::vector<std::thread> pool;
                        pool.reserve(static_cast<std::size_t>(workers));
                        for (int wkr = 0; wkr < workers; ++wkr) pool.emplace_back(task, wkr);
                        for (auto& th : pool) th.join();
                    }
                    for (const auto& fe : results) {
                        if (!acc_mp.done) {
                            acc_mp.bits += frame_bits;
                            acc_mp.errors += fe.mp;
                        }
                        if (!acc_mud.done) {
                            acc_mud.bits += frame_bits;
                            acc_mud.errors += fe.mud;
                        }
                        if (!acc_sync.done) {
                            acc_sync.bits += frame_bits;
                            acc_sync.errors += fe.sync;
                        }
                    }
                    next_frame += batch;
                    auto update = [&](detail::PointAccum& a) {
                        if (!a.done && (a.bits >= cfg.min_bits || a.errors >= cfg.max_errors))
                            a.done = true;
                    };
                    update(acc_mp);
                    update(acc_mud);
                    update(acc_sync);
                }

                for (DecoderId d : cfg.decoders) {
                    const detail::PointAccum& a = d == DecoderId::MpPnc    ? acc_mp
                                                  : d == DecoderId::MudXor ? acc_mud
                                                                           : acc_sync;
                    BerRecord rec;
                    rec.decoder = d;
                    rec.snr_db = cfg.snr_db[static_cast<std::size_t>(si)];
                    rec.delta = cfg.deltas[static_cast<std::size_t>(di)];
                    for (const Tap& t : ctx.profile.taps_a) rec.phases_a.push_back(t.phase);
                    for (const Tap& t : ctx.profile.taps_b) rec.phases_b.push_back(t.phase);
                    rec.bits = a.bits;
                    rec.errors = a.errors;
                    rec.ber = static_cast<double>(a.errors) / static_cast<double>(a.bits);
                    const auto ci = wilson_interval(a.errors, a.bits);
                    rec.ci_low = ci.first;
                    rec.ci_high = ci.second;
                    records.push_back(std::move(rec));
                }
            }
        }
    }
    return records;
}

/// Sweep aliases: the swept axis is whatever the config carries several
/// values of; records are keyed by delta / phase columns either way.
inline std::vector<BerRecord> delta_sweep(const ExperimentConfig& cfg, int workers = 0) {
    return run_sweep(cfg, workers);
}
inline std::vector<BerRecord> phase_sweep(const ExperimentConfig& cfg, int workers = 0) {
    return run_sweep(cfg, workers);
}

namespace detail {

// shortest representation that parses back to the same double
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string format_phases(const std::vector<double>& ph) {
    std::string out;
    for (std::size_t i = 0; i < ph.size(); ++i) {
        if (i) out += ':';
        out += format_double(ph[i]);
    }
    return out.empty() ? std::string("-") : out;
}

} // namespace detail

/// CSV with the exact column set
/// decoder,snr_db,delta,phases_a,phases_b,bits,errors,ber,ci_low,ci_high.
inline void emit_csv(const std::vector<BerRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("emit_csv: cannot open " + path);
    out << "decoder,snr_db,delta,phases_a,phases_b,bits,errors,ber,ci_low,ci_high\n";
    for (const BerRecord& r : records) {
        out << decoder_name(r.decoder) << ',' << detail::format_double(r.snr_db) << ','
            << detail::format_double(r.delta) << ',' << detail::format_phases(r.phases_a) << ','
            << detail::format_phases(r.phases_b) << ',' << r.bits << ',' << r.errors << ','
            << detail::format_double(r.ber) << ',' << detail::format_double(r.ci_low) << ','
            << detail::format_double(r.ci_high) << '\n';
    }
}

/// gnuplot-friendly blocks (one per decoder, separated by two blank lines):
/// columns snr_db delta ber ci_low ci_high.
inline void emit_plotdata(const std::vector<BerRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("emit_plotdata: cannot open " + path);
    bool first = true;
    for (DecoderId d : {DecoderId::MpPnc, DecoderId::MudXor, DecoderId::SyncPnc}) {
        bool any = false;
        std::ostringstream block;
        for (const BerRecord& r : records) {
            if (r.decoder != d) continue;
            any = true;
            block << detail::format_double(r.snr_db) << ' ' << detail::format_double(r.delta) << ' '
                  << detail::format_double(r.ber) << ' ' << detail::format_double(r.ci_low) << ' '
                  << detail::format_double(r.ci_high) << '\n';
        }
        if (!any) continue;
        if (!first) out << "\n\n";
        out << "# decoder " << decoder_name(d) << "\n# snr_db delta ber ci_low ci_high\n"
            << block.str();
        first = false;
    }
}

/// Re-parse an emitted CSV (round-trip checks, plotting helpers).
inline std::vector<BerRecord> parse_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("parse_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw Error("parse_csv: empty file");
    std::vector<BerRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        if (fields.size() != 10) throw Error("parse_csv: malformed row");
        BerRecord r;
        r.decoder = fields[0] == "mp_pnc"    ? DecoderId::MpPnc
                    : fields[0] == "mud_xor" ? DecoderId::MudXor
                                             : DecoderId::SyncPnc;
        r.snr_db = std::stod(fields[1]);
        r.delta = std::stod(fields[2]);
        auto parse_ph = [](const std::string& s) {
            std::vector<double> out;
            if (s == "-") return out;
            std::stringstream ps(s);
            std::string tok;
            while (std::getline(ps, tok, ':')) out.push_back(std::stod(tok));
            return out;
        };
        r.phases_a = parse_ph(fields[3]);
        r.phases_b = parse_ph(fields[4]);
        r.bits = std::stoll(fields[5]);
        r.errors = std::stoll(fields[6]);
        r.ber = std::stod(fields[7]);
        r.ci_low = std::stod(fields[8]);
        r.ci_high = std::stod(fields[9]);
        records.push_back(std::move(r));
    }
    return records;
}

// ---------------------------------------------------------------------------
// Config file parsing: `key = value` lines, '#' comments. Numeric values
// accept pi expressions of the form [k]pi[/d] (e.g. pi/8, 2pi/3, -pi/2).
// ---------------------------------------------------------------------------

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline std::string lower(std::string s) {
    for (char& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return s;
}

inline double parse_real(const std::string& raw) {
    const std::string s = lower(trim(raw));
    if (s.empty()) throw ConfigError("empty numeric value");
    const std::size_t at = s.find("pi");
    auto to_double = [&](const std::string& t) {
        std::size_t used = 0;
        double v;
        try {
            v = std::stod(t, &used);
        } catch (const std::exception&) {
            throw ConfigError("bad numeric value: " + raw);
        }
        if (used != t.size()) throw ConfigError("bad numeric value: " + raw);
        return v;
    };
    if (at == std::string::npos) return to_double(s);
    const std::string pre = s.substr(0, at);
    const std::string post = s.substr(at + 2);
    double coef = 1.0;
    if (pre == "-")
        coef = -1.0;
    else if (!pre.empty())
        coef = to_double(pre);
    double div = 1.0;
    if (!post.empty()) {
        if (post[0] != '/') throw ConfigError("bad pi expression: " + raw);
        div = to_double(post.substr(1));
    }
    return coef * std::numbers::pi / div;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

inline std::vector<double> parse_real_list(const std::string& s) {
    std::vector<double> out;
    for (const std::string& tok : split(s, ','))
        if (!trim(tok).empty()) out.push_back(parse_real(tok));
    return out;
}

inline std::vector<Tap> parse_taps(const std::string& s) {
    std::vector<Tap> taps;
    for (const std::string& tok : split(s, ',')) {
        if (trim(tok).empty()) continue;
        const std::vector<std::string> parts = split(tok, ':');
        if (parts.size() < 2 || parts.size() > 3)
            throw ConfigError("tap must be gain:delay[:phase], got: " + tok);
        Tap t;
        t.gain = parse_real(parts[0]);
        t.delay = parse_real(parts[1]);
        t.phase = parts.size() == 3 ? parse_real(parts[2]) : 0.0;
        taps.push_back(t);
    }
    if (taps.empty()) throw ConfigError("empty tap list");
    return taps;
}

inline std::vector<std::vector<double>> parse_phase_cases(const std::string& s) {
    std::vector<std::vector<double>> cases;
    for (const std::string& grp : split(s, ';')) {
        if (trim(grp).empty()) continue;
        cases.push_back(parse_real_list(grp));
    }
    return cases;
}

} // namespace detail

inline void apply_config_line(ExperimentConfig& cfg, const std::string& key_raw,
                              const std::string& value_raw);

/// Parse `key = value` text into a config. Unknown keys are errors.
inline ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("expected key = value, got: " + line);
        apply_config_line(cfg, detail::lower(detail::trim(line.substr(0, eq))),
                          detail::trim(line.substr(eq + 1)));
    }
    return cfg;
}

inline ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

/// Stand-alone channel profile file (taps_a / taps_b / delta keys only),
/// the format named in the channel interface.
inline void load_profile_file(ExperimentConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open profile file: " + path);
    std::string line;
    while (std::getline(in, line)) {
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("profile file: expected key = value");
        const std::string key = detail::lower(detail::trim(line.substr(0, eq)));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key == "taps_a")
            cfg.taps_a = detail::parse_taps(value);
        else if (key == "taps_b")
            cfg.taps_b = detail::parse_taps(value);
        else if (key == "delta")
            cfg.deltas = {detail::parse_real(value)};
        else
            throw ConfigError("profile file: unknown key " + key);
    }
    if (cfg.taps_a.empty() || cfg.taps_b.empty())
        throw ConfigError("profile file must define taps_a and taps_b");
}

inline void apply_config_line(ExperimentConfig& cfg, const std::string& key,
                              const std::string& value) {
    if (key == "modulation") {
        const std::string v = detail::lower(value);
        if (v == "bpsk")
            cfg.modulation = ConstellationKind::Bpsk;
        else if (v == "qpsk")
            cfg.modulation = ConstellationKind::Qpsk;
        else
            throw ConfigError("modulation must be bpsk or qpsk");
    } else if (key == "method") {
        const std::string v = detail::lower(value);
        if (v == "double")
            cfg.method = SamplingMethod::Double;
        else if (v == "quad")
            cfg.method = SamplingMethod::Quad;
        else
            throw ConfigError("method must be double or quad");
    } else if (key == "profile") {
        const std::string v = detail::lower(value);
        if (v == "indoor_a" || v == "alt_b") {
            const ChannelProfile p =
                itu_profile(v == "indoor_a" ? ItuPreset::IndoorA : ItuPreset::AltB, 1e6,
                            {0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, 0.5);
            cfg.taps_a = p.taps_a;
            cfg.taps_b = p.taps_b;
        } else {
            load_profile_file(cfg, value);
        }
    } else if (key == "taps_a") {
        cfg.taps_a = detail::parse_taps(value);
    } else if (key == "taps_b") {
        cfg.taps_b = detail::parse_taps(value);
    } else if (key == "truncate") {
        cfg.truncate = static_cast<int>(detail::parse_real(value));
        if (cfg.truncate < 0 || cfg.truncate > 3) throw ConfigError("truncate must be in [0,3]");
    } else if (key == "delta") {
        cfg.deltas = detail::parse_real_list(value);
        if (cfg.deltas.empty()) throw ConfigError("delta list must not be empty");
    } else if (key == "phases_a") {
        cfg.phases_a_cases = detail::parse_phase_cases(value);
    } else if (key == "phases_b") {
        cfg.phases_b_cases = detail::parse_phase_cases(value);
    } else if (key == "snr_db") {
        cfg.snr_db = detail::parse_real_list(value);
    } else if (key == "frame_len") {
        cfg.frame_len = static_cast<int>(detail::parse_real(value));
    } else if (key == "min_bits") {
        cfg.min_bits = static_cast<long long>(detail::parse_real(value));
    } else if (key == "max_errors") {
        cfg.max_errors = static_cast<long long>(detail::parse_real(value));
    } else if (key == "decoders") {
        cfg.decoders.clear();
        for (const std::string& tok : detail::split(value, ',')) {
            const std::string v = detail::lower(detail::trim(tok));
            if (v.empty()) continue;
            if (v == "mp_pnc")
                cfg.decoders.push_back(DecoderId::MpPnc);
            else if (v == "mud_xor")
                cfg.decoders.push_back(DecoderId::MudXor);
            else if (v == "sync_pnc")
                cfg.decoders.push_back(DecoderId::SyncPnc);
            else
                throw ConfigError("unknown decoder: " + v);
        }
        if (cfg.decoders.empty()) throw ConfigError("decoder list must not be empty");
    } else if (key == "seed") {
        try {
            cfg.seed = std::stoull(value);
        } catch (const std::exception&) {
            throw ConfigError("bad seed: " + value);
        }
    } else {
        throw ConfigError("unknown config key: " + key);
    }
}

} // namespace mppnc
