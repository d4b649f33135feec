#include "amcsim/translate.hpp"

namespace amcsim {

namespace {

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

uint64_t shuffle_frame(uint64_t frame, uint64_t seed) {
    constexpr uint64_t half_mask = (uint64_t{1} << 20) - 1;
    uint64_t left = (frame >> 20) & half_mask;
    uint64_t right = frame & half_mask;
    for (int round = 0; round < 4; ++round) {
        uint64_t f = splitmix64(right ^ splitmix64(seed + static_cast<uint64_t>(round))) & half_mask;
        uint64_t next_right = left ^ f;
        left = right;
        right = next_right;
    }
    return (left << 20) | right;
}

BlockAddress Translator::translate(VirtualAddress vaddr) const {
    uint64_t phys = vaddr.value & kPhysMask;
    if (mode == Mode::identity)
        return BlockAddress{phys >> kBlockShift};
    uint64_t frame = phys >> kPageShift;
    uint64_t blocks_per_page = uint64_t{1} << (kPageShift - kBlockShift);
    uint64_t in_page_block = (phys >> kBlockShift) & (blocks_per_page - 1);
    return BlockAddress{shuffle_frame(frame, seed) * blocks_per_page + in_page_block};
}

} // namespace amcsim
