#pragma once

#include "amcsim/address.hpp"

#include <cstdint>
#include <vector>

namespace amcsim {

inline constexpr unsigned kMaxMissesPerEntry = 20;

// A recorded correlation window: the triggering target-access deltas (one or
// two byte offsets from the target base) plus the ordered non-target misses
// observed inside the window.
struct CorrelationEntry {
    uint64_t trigger[2] = {0, 0};
    uint8_t trigger_count = 0; // 1 or 2
    uint64_t window_count = 0; // target access count tagging the window
    std::vector<BlockAddress> misses;

    void push_trigger(uint64_t delta) {
        if (trigger_count < 2) {
            trigger[trigger_count++] = delta;
        } else {
            trigger[0] = trigger[1];
            trigger[1] = delta;
        }
    }
    uint64_t latest_trigger() const { return trigger_count ? trigger[trigger_count - 1] : 0; }
    bool trigger_contains(uint64_t delta) const {
        for (uint8_t i = 0; i < trigger_count; ++i)
            if (trigger[i] == delta)
                return true;
        return false;
    }
};

enum class DeltaMode : uint8_t { d1 = 0, d2 = 1, d4 = 2, raw = 3 };

// Base-delta packed miss list. Delta modes store the 46-bit base followed by
// `count` signed deltas of 1/2/4 bytes (the first delta is always zero); raw
// stores `count` full 46-bit addresses. Deltas are little-endian two's
// complement; the whole payload is bit-packed LSB first and byte padded.
struct CompressedEntry {
    BlockAddress base{};
    DeltaMode mode = DeltaMode::d1;
    uint8_t count = 0;
    std::vector<uint8_t> payload; // byte-padded bit stream

    unsigned bit_size() const { return compressed_bit_size(mode, count); }
    size_t byte_size() const { return payload.size(); }

    static unsigned compressed_bit_size(DeltaMode mode, unsigned count) {
        switch (mode) {
        case DeltaMode::d1: return kBlockBits + count * 8;
        case DeltaMode::d2: return kBlockBits + count * 16;
        case DeltaMode::d4: return kBlockBits + count * 32;
        case DeltaMode::raw: return count * static_cast<unsigned>(kBlockBits);
        }
        return 0;
    }
};

// Picks the smallest delta width that can represent every miss relative to
// the first one; falls back to raw. All three widths are evaluated against
// the same range test the hardware's parallel subtract units would apply.
CompressedEntry compress(const std::vector<BlockAddress>& misses);

// Exact inverse of compress on the miss list.
std::vector<BlockAddress> decompress(const CompressedEntry& entry);

struct CompressedDecodeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace amcsim
