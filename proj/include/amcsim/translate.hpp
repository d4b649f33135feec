#pragma once

#include "amcsim/address.hpp"

namespace amcsim {

// Virtual-to-physical block mapping. Identity keeps pages contiguous;
// page_shuffled permutes 4KB frames with a seeded bijection while preserving
// in-page offsets, so prefetcher correctness can be checked against
// non-contiguous physical layouts.
struct Translator {
    enum class Mode : uint8_t { identity, page_shuffled };

    Mode mode = Mode::identity;
    uint64_t seed = 0;

    BlockAddress translate(VirtualAddress vaddr) const;
};

// 40-bit frame permutation (52-bit physical space, 4KB frames). Balanced
// 4-round Feistel network keyed from the seed; bijective by construction.
uint64_t shuffle_frame(uint64_t frame, uint64_t seed);

} // namespace amcsim
