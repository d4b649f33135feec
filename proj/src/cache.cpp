#include "amcsim/cache.hpp"

#include <algorithm>
#include <stdexcept>

namespace amcsim {

void CacheConfig::validate() const {
    if (capacity_bytes == 0 || associativity == 0)
        throw std::invalid_argument("cache capacity and associativity must be nonzero");
    if (capacity_bytes % (uint64_t{64} * associativity) != 0)
        throw std::invalid_argument("cache capacity must be divisible by associativity * 64");
    uint64_t sets = set_count();
    if (sets == 0 || (sets & (sets - 1)) != 0)
        throw std::invalid_argument("cache set count must be a power of two");
}

Hierarchy::Hierarchy(CacheConfig l1, CacheConfig l2, unsigned memory_latency, unsigned mshr_entries)
    : memory_latency_(memory_latency), mshr_entries_(mshr_entries) {
    l1.validate();
    l2.validate();
    l1_.cfg = l1;
    l2_.cfg = l2;
    l1_.lines.resize(l1.set_count() * l1.associativity);
    l2_.lines.resize(l2.set_count() * l2.associativity);
}

Hierarchy::Line* Hierarchy::LevelState::find(uint64_t block) {
    uint64_t set = block & (cfg.set_count() - 1);
    Line* begin = &lines[set * cfg.associativity];
    for (unsigned w = 0; w < cfg.associativity; ++w)
        if (begin[w].valid && begin[w].tag == block)
            return &begin[w];
    return nullptr;
}

Hierarchy::Line& Hierarchy::LevelState::victim(uint64_t block) {
    uint64_t set = block & (cfg.set_count() - 1);
    Line* begin = &lines[set * cfg.associativity];
    Line* best = begin;
    for (unsigned w = 0; w < cfg.associativity; ++w) {
        if (!begin[w].valid)
            return begin[w];
        if (begin[w].last_touch < best->last_touch)
            best = &begin[w];
    }
    return *best;
}

void Hierarchy::drain_ready() {
    while (!inflight_.empty() && inflight_.front().ready_cycle <= clock_) {
        fill_l2(inflight_.front().block.value, true);
        inflight_.pop_front();
    }
}

void Hierarchy::fill_l1(uint64_t block) {
    Line& line = l1_.victim(block);
    line.tag = block;
    line.valid = true;
    line.prefetched = false;
    line.last_touch = ++lru_tick_;
}

void Hierarchy::fill_l2(uint64_t block, bool prefetched) {
    Line& line = l2_.victim(block);
    if (line.valid && line.prefetched)
        ++outcomes_.evicted_unused;
    line.tag = block;
    line.valid = true;
    line.prefetched = prefetched;
    line.last_touch = ++lru_tick_;
}

AccessOutcome Hierarchy::demand_access(BlockAddress block, bool is_store) {
    (void)is_store; // stores take the same lookup path; no write-back modeled
    drain_ready();
    ++demand_accesses_;
    AccessOutcome out;

    if (Line* l1 = l1_.find(block.value)) {
        l1->last_touch = ++lru_tick_;
        out.level_hit = AccessOutcome::Level::l1;
        out.latency_cycles = l1_.cfg.hit_latency;
    } else if (Line* l2 = l2_.find(block.value)) {
        l2->last_touch = ++lru_tick_;
        out.level_hit = AccessOutcome::Level::l2;
        out.latency_cycles = l1_.cfg.hit_latency + l2_.cfg.hit_latency;
        if (l2->prefetched) {
            l2->prefetched = false;
            ++outcomes_.consumed_timely;
            out.was_prefetched_hit = true;
        }
        fill_l1(block.value);
    } else {
        auto it = std::find_if(inflight_.begin(), inflight_.end(),
                               [&](const InFlight& f) { return f.block == block; });
        if (it != inflight_.end()) {
            // Demand wins the race: the access pays the residual fill time
            // and the prefetch counts as consumed late.
            uint64_t residual = it->ready_cycle - clock_;
            out.level_hit = AccessOutcome::Level::l2;
            out.latency_cycles = l1_.cfg.hit_latency + l2_.cfg.hit_latency + static_cast<unsigned>(residual);
            out.was_prefetched_hit = true;
            out.was_late_prefetch_hit = true;
            ++outcomes_.consumed_late;
            inflight_.erase(it);
            fill_l2(block.value, false);
            fill_l1(block.value);
        } else {
            out.level_hit = AccessOutcome::Level::memory;
            out.latency_cycles = l1_.cfg.hit_latency + l2_.cfg.hit_latency + memory_latency_;
            out.has_l2_miss = true;
            out.l2_miss_block = block;
            ++demand_l2_misses_;
            fill_l2(block.value, false);
            fill_l1(block.value);
        }
    }
    clock_ += out.latency_cycles;
    total_latency_ += out.latency_cycles;
    return out;
}

bool Hierarchy::issue_prefetch(BlockAddress block) {
    drain_ready();
    if (l2_.find(block.value) != nullptr) {
        ++rejected_duplicate_;
        return false;
    }
    for (const auto& f : inflight_) {
        if (f.block == block) {
            ++rejected_duplicate_;
            return false;
        }
    }
    if (inflight_.size() >= mshr_entries_) {
        ++dropped_overflow_;
        return false;
    }
    inflight_.push_back({block, clock_, clock_ + memory_latency_});
    ++accepted_;
    return true;
}

PrefetchOutcomes Hierarchy::finalize() {
    while (!inflight_.empty()) {
        fill_l2(inflight_.front().block.value, true);
        inflight_.pop_front();
    }
    for (const auto& line : l2_.lines)
        if (line.valid && line.prefetched)
            ++outcomes_.never_used;
    // never_used lines stay marked; finalize must not run twice
    for (auto& line : l2_.lines)
        line.prefetched = false;
    return outcomes_;
}

} // namespace amcsim
