// Command-line front end for the MP-PNC simulation toolkit.
//
// Subcommands:
//   sweep    - run the configured Monte Carlo BER sweep, write CSV
//   coeffs   - print the matched-filter coefficient table for inspection
//   validate - run the oracle cross-checks (quadrature, waveform, brute force)
//   decode   - single-point diagnostic decode
//
// Exit codes: 0 success, 1 config error, 2 decoding failure,
//             3 validation-oracle mismatch.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mppnc/mppnc.hpp"
#include "mppnc/oracle/checks.hpp"

namespace {

void print_complex(const char* name, mppnc::cplx v) {
    std::printf("  %-12s = %+.12g %+.12gi\n", name, v.real(), v.imag());
}

void print_table(const mppnc::CoefficientTable& t) {
    using namespace mppnc;
    std::printf("method: %s (%d samples per symbol)\n",
                t.method == SamplingMethod::Double ? "double" : "quad", t.samples_per_symbol());
    for (std::size_t slot = 0; slot < t.slots.size(); ++slot) {
        const SlotCoefficients& sc = t.slots[slot];
        std::printf("sample slot %zu: window [%.6g, %.6g), alpha = %.12g, noise variance = %.12g * N0/2\n",
                    slot + 1, sc.w0, sc.w1, sc.alpha, sc.noise_factor);
        for (const Contributor& cb : sc.contributors) {
            std::printf("  x_%c[n%s] : %+.12g %+.12gi\n", cb.node == NodeId::A ? 'A' : 'B',
                        cb.offset == 0 ? "" : "-1", cb.coeff.real(), cb.coeff.imag());
        }
    }
    const bool two_tap = t.profile.taps_a.size() == 2 && t.profile.taps_b.size() == 2;
    if (t.method == SamplingMethod::Double) {
        std::printf("rho family:\n");
        print_complex("rho_aa0", t.rho_aa0());
        print_complex("rho_aa1", t.rho_aa1());
        print_complex("rho_ab", t.rho_ab());
        print_complex("rho_bb0", t.rho_bb0());
        print_complex("rho_bb1", t.rho_bb1());
        print_complex("rho_ba", t.rho_ba());
    } else if (two_tap) {
        std::printf("mu/lambda families:\n");
        print_complex("mu_aa0", t.mu_aa0());
        print_complex("mu_aa1", t.mu_aa1());
        print_complex("mu_ab0", t.mu_ab0());
        print_complex("mu_ab1", t.mu_ab1());
        print_complex("lambda_aa0", t.lambda_aa0());
        print_complex("lambda_aa1", t.lambda_aa1());
        print_complex("lambda_ab0", t.lambda_ab0());
        print_complex("lambda_ab1", t.lambda_ab1());
        print_complex("mu_ba0", t.mu_ba0());
        print_complex("mu_ba1", t.mu_ba1());
        print_complex("mu_bb0", t.mu_bb0());
        print_complex("mu_bb1", t.mu_bb1());
        print_complex("lambda_ba0", t.lambda_ba0());
        print_complex("lambda_ba1", t.lambda_ba1());
        print_complex("lambda_bb0", t.lambda_bb0());
        print_complex("lambda_bb1", t.lambda_bb1());
    }
}

int run_validate(const mppnc::ExperimentConfig& cfg) {
    using namespace mppnc;
    const Constellation c = cfg.constellation();
    bool ok = true;

    // 1) closed-form coefficients vs quadrature
    {
        double worst = 0.0;
        const ChannelProfile p = cfg.profile_for(0, 0);
        worst = std::max(worst, oracle::check_quadrature(p, cfg.method));
        RandomStream rng(derive_seed(cfg.seed, 101));
        for (int i = 0; i < 100; ++i) {
            const SamplingMethod m = (i % 2 == 0) ? SamplingMethod::Double : SamplingMethod::Quad;
            const int taps = (m == SamplingMethod::Double && i % 4 == 0) ? 3 : 2;
            worst = std::max(worst, oracle::check_quadrature(oracle::random_profile(rng, taps, m), m));
        }
        const bool pass = worst <= 1e-10;
        ok = ok && pass;
        std::printf("[%s] quadrature vs closed-form coefficients: max deviation %.3g (tol 1e-10)\n",
                    pass ? "pass" : "FAIL", worst);
    }

    // 2) direct samples vs waveform matched filtering (grid-aligned profiles)
    {
        const long k = 1 << 14;
        double worst = 0.0;
        RandomStream rng(derive_seed(cfg.seed, 102));
        for (int i = 0; i < 10; ++i) {
            const SamplingMethod m = (i % 2 == 0) ? SamplingMethod::Double : SamplingMethod::Quad;
            const int taps = (m == SamplingMethod::Double && i % 4 == 0) ? 3 : 2;
            const ChannelProfile p = oracle::random_profile(rng, taps, m, k);
            worst = std::max(worst,
                             oracle::check_waveform(p, m, c, 8, static_cast<int>(k), rng.next_u64()));
        }
        const bool pass = worst <= 1e-6;
        ok = ok && pass;
        std::printf("[%s] direct samples vs waveform oracle: max deviation %.3g (tol 1e-6)\n",
                    pass ? "pass" : "FAIL", worst);
    }

    // 3) BP vs exhaustive MAP at small N
    {
        double worst = 0.0;
        bool decisions = true;
        RandomStream rng(derive_seed(cfg.seed, 103));
        for (int i = 0; i < 50; ++i) {
            const SamplingMethod m = (i % 2 == 0) ? SamplingMethod::Double : SamplingMethod::Quad;
            const ChannelProfile p = oracle::random_profile(rng, 2, m);
            const int n = 1 + static_cast<int>(rng.next_u64() % 4);
            const double snr = 12.0 * rng.next_double();
            const auto cmp = oracle::check_bp_small_n(p, m, c, n, snr, rng.next_u64());
            worst = std::max(worst, cmp.max_marginal_rel_err);
            decisions = decisions && cmp.decisions_match;
        }
        const bool pass = worst <= 1e-9 && decisions;
        ok = ok && pass;
        std::printf("[%s] BP vs brute-force MAP: max marginal rel. err %.3g (tol 1e-9), decisions %s\n",
                    pass ? "pass" : "FAIL", worst, decisions ? "match" : "MISMATCH");
    }
    return ok ? 0 : 3;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"MP-PNC multipath physical-layer network coding simulator"};
    app.require_subcommand(1);

    std::string config_path, out_path, plot_path;
    std::uint64_t seed_override = 0;
    bool have_seed = false;
    int workers = 0;
    double snr = 8.0;
    int frames = 100;

    CLI::App* sweep = app.add_subcommand("sweep", "run the configured BER sweep");
    sweep->add_option("--config", config_path, "experiment config file")->required();
    sweep->add_option("--out", out_path, "output CSV path")->required();
    sweep->add_option("--plot", plot_path, "optional gnuplot data path");
    sweep->add_option("--seed", seed_override, "master seed override")->each([&](const std::string&) {
        have_seed = true;
    });
    sweep->add_option("--workers", workers, "worker threads (default: hardware)");

    CLI::App* coeffs = app.add_subcommand("coeffs", "print the coefficient table");
    coeffs->add_option("--config", config_path, "experiment config file")->required();

    CLI::App* validate_cmd = app.add_subcommand("validate", "run oracle cross-checks");
    validate_cmd->add_option("--config", config_path, "experiment config file")->required();

    CLI::App* decode_cmd = app.add_subcommand("decode", "single-point diagnostic decode");
    decode_cmd->add_option("--config", config_path, "experiment config file")->required();
    decode_cmd->add_option("--snr", snr, "per-bit SNR in dB")->required();
    decode_cmd->add_option("--frames", frames, "number of frames")->required();
    decode_cmd->add_option("--workers", workers, "worker threads (default: hardware)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        mppnc::ExperimentConfig cfg = mppnc::parse_config(config_path);
        if (have_seed) cfg.seed = seed_override;

        if (sweep->parsed()) {
            const std::vector<mppnc::BerRecord> records = mppnc::run_sweep(cfg, workers);
            mppnc::emit_csv(records, out_path);
            if (!plot_path.empty()) mppnc::emit_plotdata(records, plot_path);
            std::printf("wrote %zu records to %s\n", records.size(), out_path.c_str());
            return 0;
        }
        if (coeffs->parsed()) {
            print_table(mppnc::compute_coefficients(cfg.profile_for(0, 0), cfg.method));
            return 0;
        }
        if (validate_cmd->parsed()) {
            return run_validate(cfg);
        }
        if (decode_cmd->parsed()) {
            cfg.snr_db = {snr};
            cfg.min_bits = std::max<long long>(
                10000, static_cast<long long>(frames) * cfg.frame_len *
                           cfg.constellation().bits_per_symbol());
            cfg.max_errors = std::numeric_limits<long long>::max();
            const auto records = mppnc::run_sweep(cfg, workers);
            std::printf("%-10s %8s %12s %10s %12s\n", "decoder", "snr_db", "bits", "errors", "ber");
            for (const auto& r : records)
                std::printf("%-10s %8.2f %12lld %10lld %12.4g\n", mppnc::decoder_name(r.decoder),
                            r.snr_db, r.bits, r.errors, r.ber);
            return 0;
        }
    } catch (const mppnc::DecodingFailure& e) {
        std::fprintf(stderr, "decoding failure: %s\n", e.what());
        return 2;
    } catch (const mppnc::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
