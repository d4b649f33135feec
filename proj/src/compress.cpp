#include "amcsim/compress.hpp"

#include <stdexcept>

namespace amcsim {

namespace {

struct BitWriter {
    std::vector<uint8_t> bytes;
    unsigned bit_pos = 0;

    void write(uint64_t value, unsigned bits) {
        for (unsigned i = 0; i < bits; ++i) {
            if (bit_pos % 8 == 0)
                bytes.push_back(0);
            if ((value >> i) & 1)
                bytes.back() |= static_cast<uint8_t>(1u << (bit_pos % 8));
            ++bit_pos;
        }
    }
};

struct BitReader {
    const std::vector<uint8_t>& bytes;
    unsigned bit_pos = 0;

    uint64_t read(unsigned bits) {
        uint64_t value = 0;
        for (unsigned i = 0; i < bits; ++i) {
            unsigned byte = bit_pos / 8;
            if (byte >= bytes.size())
                throw CompressedDecodeError("payload truncated");
            if ((bytes[byte] >> (bit_pos % 8)) & 1)
                value |= uint64_t{1} << i;
            ++bit_pos;
        }
        return value;
    }
};

bool fits_signed(int64_t v, unsigned bits) {
    int64_t lo = -(int64_t{1} << (bits - 1));
    int64_t hi = (int64_t{1} << (bits - 1)) - 1;
    return v >= lo && v <= hi;
}

unsigned delta_bits(DeltaMode mode) {
    switch (mode) {
    case DeltaMode::d1: return 8;
    case DeltaMode::d2: return 16;
    case DeltaMode::d4: return 32;
    default: return 0;
    }
}

} // namespace

CompressedEntry compress(const std::vector<BlockAddress>& misses) {
    if (misses.empty())
        throw std::invalid_argument("cannot compress an empty miss list");
    if (misses.size() > kMaxMissesPerEntry)
        throw std::invalid_argument("entry holds at most " + std::to_string(kMaxMissesPerEntry) + " misses");
    CompressedEntry out;
    out.base = misses.front();
    out.count = static_cast<uint8_t>(misses.size());

    // Three delta widths tested in parallel, smallest fitting width wins;
    // raw is the fallback when even 4-byte deltas overflow.
    DeltaMode mode = DeltaMode::raw;
    for (DeltaMode cand : {DeltaMode::d1, DeltaMode::d2, DeltaMode::d4}) {
        bool ok = true;
        for (const auto& m : misses) {
            int64_t d = static_cast<int64_t>(m.value) - static_cast<int64_t>(out.base.value);
            if (!fits_signed(d, delta_bits(cand))) {
                ok = false;
                break;
            }
        }
        if (ok) {
            mode = cand;
            break;
        }
    }
    out.mode = mode;

    BitWriter w;
    if (mode == DeltaMode::raw) {
        for (const auto& m : misses)
            w.write(m.value, kBlockBits);
    } else {
        w.write(out.base.value, kBlockBits);
        unsigned bits = delta_bits(mode);
        for (const auto& m : misses) {
            int64_t d = static_cast<int64_t>(m.value) - static_cast<int64_t>(out.base.value);
            w.write(static_cast<uint64_t>(d) & ((bits == 64) ? ~uint64_t{0} : ((uint64_t{1} << bits) - 1)), bits);
        }
    }
    out.payload = std::move(w.bytes);
    return out;
}

std::vector<BlockAddress> decompress(const CompressedEntry& entry) {
    if (entry.count == 0)
        throw CompressedDecodeError("entry has zero miss count");
    unsigned expected_bytes = (entry.bit_size() + 7) / 8;
    if (entry.payload.size() != expected_bytes)
        throw CompressedDecodeError("payload size does not match mode/count");

    BitReader r{entry.payload};
    std::vector<BlockAddress> misses;
    misses.reserve(entry.count);
    if (entry.mode == DeltaMode::raw) {
        for (unsigned i = 0; i < entry.count; ++i)
            misses.emplace_back(r.read(kBlockBits));
        return misses;
    }
    uint64_t base = r.read(kBlockBits);
    if (base != entry.base.value)
        throw CompressedDecodeError("payload base does not match entry base");
    unsigned bits = delta_bits(entry.mode);
    for (unsigned i = 0; i < entry.count; ++i) {
        uint64_t raw = r.read(bits);
        // sign extend
        int64_t d = static_cast<int64_t>(raw << (64 - bits)) >> (64 - bits);
        misses.emplace_back(static_cast<uint64_t>(static_cast<int64_t>(base) + d) & kBlockMask);
    }
    return misses;
}

} // namespace amcsim
