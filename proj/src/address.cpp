#include "amcsim/address.hpp"

namespace amcsim {

void RegionMap::validate() const {
    target.validate();
    frontier.validate();
    uint64_t t0 = target.base.value, t1 = t0 + target.byte_length();
    uint64_t f0 = frontier.base.value, f1 = f0 + frontier.byte_length();
    if (t0 < f1 && f0 < t1)
        throw std::invalid_argument("target and frontier regions overlap");
}

Region classify(const RegionMap& map, VirtualAddress vaddr) {
    if (map.target.contains(vaddr))
        return Region::target;
    if (map.frontier.contains(vaddr))
        return Region::frontier;
    return Region::other;
}

} // namespace amcsim
