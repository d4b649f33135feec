#pragma once

#include "amcsim/address.hpp"
#include "amcsim/trace.hpp"

#include <memory>
#include <string>
#include <vector>

namespace amcsim {

// L1 demand access as seen by a prefetcher, after region classification and
// address translation.
struct PrefetchAccess {
    VirtualAddress vaddr{};
    BlockAddress block{};
    uint64_t pc = 0;
    bool has_pc = false;
    bool is_store = false;
    Region region = Region::other;
    bool reached_l2 = false; // the access missed L1 (an L2 lookup happened)
    bool l2_missed = false;  // the L2 lookup went to memory
};

// Shared train/predict port. Triggers return prefetch candidates as block
// addresses; the cache model dedupes against residency and in-flight fills.
class Prefetcher {
public:
    virtual ~Prefetcher() = default;

    virtual std::vector<BlockAddress> on_access(const PrefetchAccess&) { return {}; }
    virtual std::vector<BlockAddress> on_l2_miss(BlockAddress, bool /*is_target*/) { return {}; }
    virtual void on_directive(const TraceEvent&) {}
    virtual std::string name() const = 0;
};

class NullPrefetcher final : public Prefetcher {
public:
    std::string name() const override { return "none"; }
};

// Issues candidates from each child in order; duplicates removed at the
// composite boundary.
class CompositePrefetcher final : public Prefetcher {
public:
    explicit CompositePrefetcher(std::vector<std::unique_ptr<Prefetcher>> children);

    std::vector<BlockAddress> on_access(const PrefetchAccess& a) override;
    std::vector<BlockAddress> on_l2_miss(BlockAddress block, bool is_target) override;
    void on_directive(const TraceEvent& e) override;
    std::string name() const override;

private:
    std::vector<std::unique_ptr<Prefetcher>> children_;
};

std::vector<BlockAddress> dedupe_candidates(std::vector<BlockAddress> candidates);

} // namespace amcsim
