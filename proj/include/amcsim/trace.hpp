#pragma once

#include "amcsim/address.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace amcsim {

// One trace record: a memory access or a prefetcher directive, in program
// order. Directives stand in for the runtime interface calls: init registers
// the prefetcher, addr_tbase/addr_fbase publish the target and frontier
// ranges, update marks an iteration boundary, end tears everything down.
struct TraceEvent {
    enum class Kind : uint8_t {
        load = 0,
        store = 1,
        init = 2,
        addr_tbase = 3,
        addr_fbase = 4,
        update = 5,
        end = 6,
    };

    Kind kind = Kind::load;
    uint64_t vaddr = 0;   // accesses only
    uint64_t pc = 0;      // accesses only, optional
    bool has_pc = false;
    RegionDescriptor region{}; // addr_tbase / addr_fbase only

    bool is_access() const { return kind == Kind::load || kind == Kind::store; }

    static TraceEvent access(uint64_t vaddr, bool is_store = false) {
        TraceEvent e;
        e.kind = is_store ? Kind::store : Kind::load;
        e.vaddr = vaddr;
        return e;
    }
    static TraceEvent access_pc(uint64_t vaddr, uint64_t pc, bool is_store = false) {
        TraceEvent e = access(vaddr, is_store);
        e.pc = pc;
        e.has_pc = true;
        return e;
    }
    static TraceEvent directive(Kind k) {
        TraceEvent e;
        e.kind = k;
        return e;
    }
    static TraceEvent region_directive(Kind k, const RegionDescriptor& r) {
        TraceEvent e;
        e.kind = k;
        e.region = r;
        return e;
    }

    friend bool operator==(const TraceEvent& a, const TraceEvent& b) {
        if (a.kind != b.kind)
            return false;
        if (a.is_access())
            return a.vaddr == b.vaddr && a.has_pc == b.has_pc && (!a.has_pc || a.pc == b.pc);
        if (a.kind == Kind::addr_tbase || a.kind == Kind::addr_fbase)
            return a.region.base == b.region.base &&
                   a.region.element_count == b.region.element_count &&
                   a.region.element_size == b.region.element_size;
        return true;
    }
};

struct TraceDecodeError : std::runtime_error {
    size_t byte_offset;
    TraceDecodeError(size_t offset, const std::string& what)
        : std::runtime_error("trace decode error at byte " + std::to_string(offset) + ": " + what),
          byte_offset(offset) {}
};

// Binary form: u64 LE record count, then records of [tag byte | payload].
// Tag 0/1 = load/store (payload: 8B LE vaddr; tag|0x80 appends 8B LE pc),
// tags 2..6 = directives; addr_tbase/addr_fbase carry base(8B), count(8B),
// element_size(1B).
std::vector<uint8_t> trace_encode(const std::vector<TraceEvent>& events);
std::vector<TraceEvent> trace_decode(const std::vector<uint8_t>& bytes);

// JSON-lines form, one event per line; accepted interchangeably with binary.
std::string trace_to_jsonl(const std::vector<TraceEvent>& events);
std::vector<TraceEvent> trace_from_jsonl(const std::string& text);

void save_trace(const std::vector<TraceEvent>& events, const std::string& path);
std::vector<TraceEvent> load_trace(const std::string& path); // sniffs binary vs JSONL

// Well-formedness per the trace grammar: exactly one init before any access,
// region directives before the first update, exactly one trailing end.
void validate_trace(const std::vector<TraceEvent>& events);

} // namespace amcsim
