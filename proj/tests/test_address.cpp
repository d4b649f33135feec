#include <doctest.h>

#include "amcsim/address.hpp"
#include "amcsim/translate.hpp"

#include <random>
#include <set>

using namespace amcsim;

namespace {

RegionMap small_map() {
    RegionMap map;
    map.target = {VirtualAddress{0x1000}, 8, 8};
    map.frontier = {VirtualAddress{0x2000}, 8, 1};
    map.validate();
    return map;
}

} // namespace

TEST_CASE("classify places addresses in exactly one region") {
    RegionMap map = small_map();
    CHECK(classify(map, VirtualAddress{0x1008}) == Region::target);
    CHECK(classify(map, VirtualAddress{0x0FFF}) == Region::other);
    CHECK(classify(map, VirtualAddress{0x2007}) == Region::frontier);
    CHECK(classify(map, VirtualAddress{0x1000}) == Region::target);
    CHECK(classify(map, VirtualAddress{0x1040}) == Region::other); // one past target end
    CHECK(classify(map, VirtualAddress{0x2008}) == Region::other);
}

TEST_CASE("classify is total over random addresses") {
    RegionMap map = small_map();
    std::mt19937_64 rng(11);
    for (int i = 0; i < 10000; ++i) {
        VirtualAddress a{rng()};
        int labels = 0;
        labels += classify(map, a) == Region::target;
        labels += classify(map, a) == Region::frontier;
        labels += classify(map, a) == Region::other;
        REQUIRE(labels == 1);
    }
}

TEST_CASE("overlapping regions are rejected") {
    RegionMap map;
    map.target = {VirtualAddress{0x1000}, 16, 8};
    map.frontier = {VirtualAddress{0x1040}, 8, 1};
    CHECK_THROWS_AS(map.validate(), std::invalid_argument);
}

TEST_CASE("region element size accepts powers of two up to a block") {
    RegionDescriptor r{VirtualAddress{0}, 4, 64};
    CHECK_NOTHROW(r.validate());
    r.element_size = 3;
    CHECK_THROWS_AS(r.validate(), std::invalid_argument);
    r.element_size = 128;
    CHECK_THROWS_AS(r.validate(), std::invalid_argument);
    r.element_size = 8;
    r.element_count = 0;
    CHECK_THROWS_AS(r.validate(), std::invalid_argument);
}

TEST_CASE("identity translation drops the block offset") {
    Translator t;
    CHECK(t.translate(VirtualAddress{0x0000}).value == 0x0);
    CHECK(t.translate(VirtualAddress{0x1040}).value == 0x41);
    // 52-bit physical wraparound
    CHECK(t.translate(VirtualAddress{uint64_t{1} << 52}).value == 0x0);
}

TEST_CASE("page shuffle keeps pages together and stays injective") {
    Translator t{Translator::Mode::page_shuffled, 7};

    // same 4KB page -> same output frame, offsets preserved
    BlockAddress a = t.translate(VirtualAddress{0x5000});
    BlockAddress b = t.translate(VirtualAddress{0x5040});
    BlockAddress c = t.translate(VirtualAddress{0x5FC0});
    CHECK((a.value >> 6) == (b.value >> 6));
    CHECK((a.value >> 6) == (c.value >> 6));
    CHECK(b.value - a.value == 1);
    CHECK(c.value - a.value == 63);

    // bijection over every page of a 1MB space
    std::set<uint64_t> frames;
    for (uint64_t page = 0; page < 256; ++page)
        frames.insert(shuffle_frame(page, 7));
    CHECK(frames.size() == 256);

    // block-level injectivity across the same span
    std::set<uint64_t> blocks;
    for (uint64_t addr = 0; addr < (1 << 20); addr += 64)
        blocks.insert(t.translate(VirtualAddress{addr}).value);
    CHECK(blocks.size() == (1 << 20) / 64);
}

TEST_CASE("page shuffle is deterministic per seed") {
    Translator a{Translator::Mode::page_shuffled, 9};
    Translator b{Translator::Mode::page_shuffled, 9};
    Translator c{Translator::Mode::page_shuffled, 10};
    bool all_equal = true, any_differs = false;
    for (uint64_t addr = 0; addr < (1 << 18); addr += 4096) {
        all_equal &= a.translate(VirtualAddress{addr}) == b.translate(VirtualAddress{addr});
        any_differs |= a.translate(VirtualAddress{addr}) != c.translate(VirtualAddress{addr});
    }
    CHECK(all_equal);
    CHECK(any_differs);
}
