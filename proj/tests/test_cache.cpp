#include "doctest.h"

#include <algorithm>
#include <list>
#include <map>

#include "rdsim/cache.hpp"
#include "rdsim/rng.hpp"

using namespace rdsim;

namespace {

CacheConfig cfg(std::uint64_t sets, std::uint64_t ways, CacheRole role = CacheRole::PrivateInclusive) {
    return CacheConfig{Geometry{64, sets, ways}, role, 1, 1};
}

CacheLine line(std::uint64_t tag, bool dirty = false, bool reuse = false) {
    return CacheLine{tag, true, dirty, reuse, 0, 0};
}

} // namespace

TEST_CASE("lookup examples") {
    PrivateCache c(cfg(2, 2));
    CHECK_FALSE(c.lookup(0, 5));
    c.insert(0, line(5));
    CHECK(c.lookup(0, 5));
    CHECK_FALSE(c.lookup(1, 5));
}

TEST_CASE("insert examples") {
    PrivateCache c(cfg(1, 2));
    CHECK_FALSE(c.insert(0, line(1)));
    CHECK_FALSE(c.insert(0, line(2)));
    auto ev = c.insert(0, line(3));
    REQUIRE(ev);
    CHECK(ev->tag == 1);

    PrivateCache d(cfg(1, 2));
    d.insert(0, line(1));
    d.insert(0, line(2));
    d.touch(0, *d.lookup(0, 1));
    ev = d.insert(0, line(3));
    REQUIRE(ev);
    CHECK(ev->tag == 2);
}

TEST_CASE("line mutators") {
    PrivateCache c(cfg(1, 2));
    c.insert(0, line(7));
    const auto w = *c.lookup(0, 7);
    c.mark_dirty(0, w);
    c.set_reuse(0, w, true);
    CHECK(c.line(0, w).reuse);
    const CacheLine gone = c.invalidate(0, w);
    CHECK(gone.dirty);
    CHECK(gone.reuse);
    CHECK_FALSE(c.lookup(0, 7));
    CHECK(c.valid_count() == 0);
}

TEST_CASE("contract violations") {
    PrivateCache c(cfg(1, 2));
    c.insert(0, line(7));
    CHECK_THROWS_AS(c.insert(0, line(7)), ContractViolation);
    CHECK_THROWS_AS(c.insert(0, CacheLine{}), ContractViolation);
    CHECK_THROWS_AS(c.touch(0, 1), ContractViolation);
    CHECK_THROWS_AS(c.mark_dirty(0, 1), ContractViolation);
    CHECK_THROWS_AS(c.invalidate(0, 1), ContractViolation);
    CHECK_THROWS_AS(c.touch(0, 9), ContractViolation);
}

TEST_CASE("shared role never stores a reuse bit") {
    SharedCache s(cfg(1, 2, CacheRole::SharedNonInclusive));
    s.insert(0, line(3, false, true));
    CHECK_FALSE(s.line(0, *s.lookup(0, 3)).reuse);
}

TEST_CASE("LRU matches a list reference model on random sequences") {
    Rng rng(17);
    for (int round = 0; round < 300; ++round) {
        const std::uint64_t ways = 1 + uniform_below(rng, 8);
        const std::uint64_t universe = ways + 1 + uniform_below(rng, 2 * ways);
        PrivateCache c(cfg(1, ways));
        std::list<std::uint64_t> ref; // front = MRU
        for (int step = 0; step < 400; ++step) {
            const std::uint64_t tag = uniform_below(rng, universe);
            auto it = std::find(ref.begin(), ref.end(), tag);
            const auto w = c.lookup(0, tag);
            REQUIRE(w.has_value() == (it != ref.end()));
            if (w && bernoulli(rng, 0.2)) {
                // Occasionally drop the line instead of touching it.
                c.invalidate(0, *w);
                ref.erase(it);
            } else if (w) {
                c.touch(0, *w);
                ref.erase(it);
                ref.push_front(tag);
            } else {
                const auto ev = c.insert(0, line(tag));
                if (ref.size() == ways) {
                    REQUIRE(ev);
                    REQUIRE(ev->tag == ref.back());
                    ref.pop_back();
                } else {
                    REQUIRE_FALSE(ev);
                }
                ref.push_front(tag);
            }
            REQUIRE(c.valid_count() == ref.size());
            // Ranks are the list positions.
            std::uint32_t rank = 0;
            for (auto t : ref) {
                REQUIRE(c.line(0, *c.lookup(0, t)).lru_rank == rank++);
            }
        }
    }
}

TEST_CASE("dirty lines only leave through invalidate or eviction") {
    Rng rng(23);
    PrivateCache c(cfg(4, 2));
    std::map<std::uint64_t, bool> dirty_ref; // block -> dirty, for resident blocks
    const Geometry g = c.geometry();
    for (int step = 0; step < 20000; ++step) {
        const BlockAddr b{uniform_below(rng, 32)};
        const std::uint64_t s = set_of(b, g);
        auto w = c.find(b);
        const int op = static_cast<int>(uniform_below(rng, 4));
        if (!w) {
            const auto ev = c.insert(s, line(tag_of(b, g)));
            if (ev) {
                const BlockAddr gone = block_from(ev->tag, s, g);
                REQUIRE(dirty_ref.at(gone.value) == ev->dirty);
                dirty_ref.erase(gone.value);
            }
            dirty_ref[b.value] = false;
        } else if (op == 0) {
            c.mark_dirty(s, *w);
            dirty_ref[b.value] = true;
        } else if (op == 1) {
            const CacheLine out = c.invalidate(s, *w);
            REQUIRE(dirty_ref.at(b.value) == out.dirty);
            dirty_ref.erase(b.value);
        } else {
            c.touch(s, *w);
        }
        REQUIRE(c.valid_count() <= c.sets() * c.ways());
        REQUIRE(c.valid_count() == dirty_ref.size());
    }
    for (const auto& [blk, d] : dirty_ref) {
        const BlockAddr b{blk};
        REQUIRE(c.line(set_of(b, g), *c.find(b)).dirty == d);
    }
}

TEST_CASE("snapshot lists ways in order with their bits") {
    PrivateCache c(cfg(2, 2));
    c.insert(1, line(4, true, false));
    c.insert(1, line(9, false, true));
    const auto j = c.snapshot();
    REQUIRE(j.size() == 1);
    CHECK(j[0]["set"] == 1);
    REQUIRE(j[0]["lines"].size() == 2);
    CHECK(j[0]["lines"][0]["tag"] == 4);
    CHECK(j[0]["lines"][0]["dirty"] == true);
    CHECK(j[0]["lines"][0]["lru"] == 1);
    CHECK(j[0]["lines"][1]["tag"] == 9);
    CHECK(j[0]["lines"][1]["reuse"] == true);
    CHECK(j[0]["lines"][1]["lru"] == 0);
}
