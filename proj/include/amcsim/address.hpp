#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace amcsim {

inline constexpr unsigned kBlockShift = 6;        // 64B cache blocks
inline constexpr unsigned kBlockBits = 46;        // 52-bit physical space, block granular
inline constexpr unsigned kPageShift = 12;        // 4KB pages
inline constexpr uint64_t kPhysMask = (uint64_t{1} << 52) - 1;
inline constexpr uint64_t kBlockMask = (uint64_t{1} << kBlockBits) - 1;

// Byte-granular virtual address, full 64-bit space.
struct VirtualAddress {
    uint64_t value = 0;

    constexpr VirtualAddress() = default;
    constexpr explicit VirtualAddress(uint64_t v) : value(v) {}

    friend constexpr bool operator==(VirtualAddress a, VirtualAddress b) { return a.value == b.value; }
    friend constexpr bool operator<(VirtualAddress a, VirtualAddress b) { return a.value < b.value; }
};

// 46-bit cache-block address: physical address with the 6-bit block offset removed.
struct BlockAddress {
    uint64_t value = 0;

    constexpr BlockAddress() = default;
    constexpr explicit BlockAddress(uint64_t v) : value(v & kBlockMask) {}

    friend constexpr bool operator==(BlockAddress a, BlockAddress b) { return a.value == b.value; }
    friend constexpr bool operator!=(BlockAddress a, BlockAddress b) { return a.value != b.value; }
    friend constexpr bool operator<(BlockAddress a, BlockAddress b) { return a.value < b.value; }
};

// A registered data-structure range: base virtual address plus element geometry.
// element_size must be a power of two no larger than a cache block.
struct RegionDescriptor {
    VirtualAddress base{};
    uint64_t element_count = 0;
    uint32_t element_size = 0;

    uint64_t byte_length() const { return element_count * element_size; }
    bool contains(VirtualAddress a) const {
        return a.value >= base.value && a.value - base.value < byte_length();
    }
    void validate() const {
        if (element_count == 0)
            throw std::invalid_argument("region element_count must be > 0");
        bool pow2 = element_size != 0 && (element_size & (element_size - 1)) == 0;
        if (!pow2 || element_size > 64)
            throw std::invalid_argument("region element_size must be a power of two <= 64, got " +
                                        std::to_string(element_size));
    }
};

enum class Region : uint8_t { target, frontier, other };

struct RegionMap {
    RegionDescriptor target{};
    RegionDescriptor frontier{};

    void validate() const;
};

// Total: every address gets exactly one label.
Region classify(const RegionMap& map, VirtualAddress vaddr);

inline BlockAddress block_of(uint64_t phys_byte_addr) {
    return BlockAddress{(phys_byte_addr & kPhysMask) >> kBlockShift};
}

} // namespace amcsim
