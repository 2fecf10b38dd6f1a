#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "mppnc/errors.hpp"

namespace mppnc {

using cplx = std::complex<double>;

enum class NodeId : std::uint8_t { A = 0, B = 1 };

enum class ConstellationKind { Bpsk, Qpsk };

/// Unit-energy constellation with Gray bit labels. The point at index i
/// carries the bit label i (MSB first), so XOR of labels is XOR of indices.
///
/// Energy convention: every point has |x|^2 = 1 for both BPSK and QPSK, i.e.
/// the QPSK amplitude is the BPSK amplitude (points chi/sqrt(2)); a QPSK
/// symbol carries two bits, so energy per bit is 1/bits_per_symbol and the
/// per-bit SNR bookkeeping lives entirely in the harness.
class Constellation {
  public:
    static Constellation bpsk() {
        Constellation c;
        c.kind_ = ConstellationKind::Bpsk;
        c.bits_per_symbol_ = 1;
        c.points_ = {cplx(1.0, 0.0), cplx(-1.0, 0.0)};
        return c;
    }

    static Constellation qpsk() {
        // Gray map: 00->(1+j)/s2, 01->(-1+j)/s2, 10->(1-j)/s2, 11->(-1-j)/s2.
        const double s = 1.0 / std::sqrt(2.0);
        Constellation c;
        c.kind_ = ConstellationKind::Qpsk;
        c.bits_per_symbol_ = 2;
        c.points_ = {cplx(s, s), cplx(-s, s), cplx(s, -s), cplx(-s, -s)};
        return c;
    }

    ConstellationKind kind() const { return kind_; }
    int bits_per_symbol() const { return bits_per_symbol_; }
    int size() const { return static_cast<int>(points_.size()); }
    const std::vector<cplx>& points() const { return points_; }
    cplx point(int label) const { return points_[static_cast<std::size_t>(label)]; }

    /// Label of an exact constellation point (tolerance absorbs arithmetic
    /// noise only). Throws ValidationError for anything else.
    int label_of(cplx s) const {
        for (int i = 0; i < size(); ++i) {
            if (std::abs(s - points_[static_cast<std::size_t>(i)]) < 1e-9) return i;
        }
        throw ValidationError("symbol is not a constellation point");
    }

    bool operator==(const Constellation& o) const { return kind_ == o.kind_; }

  private:
    ConstellationKind kind_ = ConstellationKind::Bpsk;
    int bits_per_symbol_ = 1;
    std::vector<cplx> points_;
};

/// One node's transmit frame: symbols plus the bits they encode.
struct SymbolFrame {
    NodeId node = NodeId::A;
    std::vector<cplx> symbols;
    std::vector<int> source_bits;

    int size() const { return static_cast<int>(symbols.size()); }
};

/// Gray-map a bit sequence onto constellation symbols, MSB of each label
/// first. Round-trips with demodulate().
inline SymbolFrame modulate(const std::vector<int>& bits, const Constellation& c,
                            NodeId node = NodeId::A) {
    const int bps = c.bits_per_symbol();
    if (bits.size() % static_cast<std::size_t>(bps) != 0) {
        throw ValidationError("bit count not divisible by bits_per_symbol");
    }
    SymbolFrame f;
    f.node = node;
    f.source_bits = bits;
    f.symbols.reserve(bits.size() / static_cast<std::size_t>(bps));
    for (std::size_t i = 0; i < bits.size(); i += static_cast<std::size_t>(bps)) {
        int label = 0;
        for (int b = 0; b < bps; ++b) label = (label << 1) | (bits[i + static_cast<std::size_t>(b)] & 1);
        f.symbols.push_back(c.point(label));
    }
    return f;
}

/// Bit label of a symbol (inverse of modulate, per symbol).
inline int demodulate(cplx s, const Constellation& c) { return c.label_of(s); }

inline std::vector<int> label_bits(int label, const Constellation& c) {
    std::vector<int> bits(static_cast<std::size_t>(c.bits_per_symbol()));
    for (int b = 0; b < c.bits_per_symbol(); ++b) {
        bits[static_cast<std::size_t>(b)] = (label >> (c.bits_per_symbol() - 1 - b)) & 1;
    }
    return bits;
}

/// Relay network-coding map: the point whose label is label(a) XOR label(b).
inline cplx xor_map(cplx a, cplx b, const Constellation& c) {
    return c.point(c.label_of(a) ^ c.label_of(b));
}

} // namespace mppnc
