#include <doctest.h>

#include "amcsim/trace.hpp"
#include "amcsim/workload.hpp"

#include <filesystem>

#include <random>

namespace fs = std::filesystem;

using namespace amcsim;

namespace {

std::vector<TraceEvent> random_trace(std::mt19937_64& rng, size_t accesses) {
    std::vector<TraceEvent> ev;
    ev.push_back(TraceEvent::directive(TraceEvent::Kind::init));
    ev.push_back(TraceEvent::region_directive(TraceEvent::Kind::addr_tbase,
                                              {VirtualAddress{0x1000}, 64, 8}));
    ev.push_back(TraceEvent::region_directive(TraceEvent::Kind::addr_fbase,
                                              {VirtualAddress{0x9000}, 512, 1}));
    for (size_t i = 0; i < accesses; ++i) {
        bool store = (rng() & 3) == 0;
        if (rng() & 1)
            ev.push_back(TraceEvent::access_pc(rng(), rng() & 0xFFFF, store));
        else
            ev.push_back(TraceEvent::access(rng(), store));
        if ((rng() & 15) == 0)
            ev.push_back(TraceEvent::directive(TraceEvent::Kind::update));
    }
    ev.push_back(TraceEvent::directive(TraceEvent::Kind::update));
    ev.push_back(TraceEvent::directive(TraceEvent::Kind::end));
    return ev;
}

} // namespace

TEST_CASE("directive-only trace round-trips") {
    std::vector<TraceEvent> ev{TraceEvent::directive(TraceEvent::Kind::init),
                               TraceEvent::directive(TraceEvent::Kind::end)};
    CHECK(trace_decode(trace_encode(ev)) == ev);
    CHECK(trace_from_jsonl(trace_to_jsonl(ev)) == ev);
}

TEST_CASE("random traces round-trip through both codecs") {
    std::mt19937_64 rng(3);
    for (int round = 0; round < 200; ++round) {
        auto ev = random_trace(rng, rng() % 40);
        CAPTURE(round);
        REQUIRE(trace_decode(trace_encode(ev)) == ev);
        REQUIRE(trace_from_jsonl(trace_to_jsonl(ev)) == ev);
    }
}

TEST_CASE("worked-example iteration-1 trace round-trips byte-exactly") {
    auto fx = worked_example_fixture();
    auto ev = fx.trace_iteration1();
    auto bytes = trace_encode(ev);
    auto again = trace_encode(trace_decode(bytes));
    CHECK(bytes == again);
    CHECK(trace_decode(bytes) == ev);
}

TEST_CASE("truncated stream reports the failing byte offset") {
    auto fx = worked_example_fixture();
    auto bytes = trace_encode(fx.trace_iteration1());
    bytes.resize(bytes.size() - 3);
    try {
        trace_decode(bytes);
        FAIL("decode accepted a truncated stream");
    } catch (const TraceDecodeError& e) {
        CHECK(e.byte_offset > 0);
        CHECK(e.byte_offset <= bytes.size());
        CHECK(std::string(e.what()).find("byte") != std::string::npos);
    }
}

TEST_CASE("unknown tags and malformed json are rejected") {
    std::vector<uint8_t> bytes(9, 0);
    bytes[0] = 1; // one record
    bytes[8] = 7; // unused directive tag
    CHECK_THROWS_AS(trace_decode(bytes), TraceDecodeError);
    bytes[8] = 0x80 | 2; // pc flag on a directive
    CHECK_THROWS_AS(trace_decode(bytes), TraceDecodeError);
    CHECK_THROWS_AS(trace_from_jsonl("{\"kind\":\"bogus\"}\n"), TraceDecodeError);
    CHECK_THROWS_AS(trace_from_jsonl("not json\n"), TraceDecodeError);
}

TEST_CASE("trace validation enforces the grammar") {
    auto fx = worked_example_fixture();
    CHECK_NOTHROW(validate_trace(fx.full_trace()));

    std::vector<TraceEvent> no_init{TraceEvent::access(0x100),
                                    TraceEvent::directive(TraceEvent::Kind::end)};
    CHECK_THROWS_AS(validate_trace(no_init), std::invalid_argument);

    std::vector<TraceEvent> no_end{TraceEvent::directive(TraceEvent::Kind::init)};
    CHECK_THROWS_AS(validate_trace(no_end), std::invalid_argument);

    auto late_region = fx.full_trace();
    late_region.insert(late_region.end() - 1, TraceEvent::region_directive(TraceEvent::Kind::addr_tbase,
                                                                           {VirtualAddress{0x0}, 1, 8}));
    CHECK_THROWS_AS(validate_trace(late_region), std::invalid_argument);
}

TEST_CASE("file save/load sniffs binary and jsonl") {
    auto fx = worked_example_fixture();
    auto ev = fx.full_trace();
    save_trace(ev, (fs::temp_directory_path() / "amcsim_trace_test.bin").string());
    save_trace(ev, (fs::temp_directory_path() / "amcsim_trace_test.jsonl").string());
    CHECK(load_trace((fs::temp_directory_path() / "amcsim_trace_test.bin").string()) == ev);
    CHECK(load_trace((fs::temp_directory_path() / "amcsim_trace_test.jsonl").string()) == ev);
}
