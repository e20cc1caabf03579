#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <map>
#include <numeric>
#include <vector>

#include "wsd/rng.hpp"

TEST_CASE("substreams are stable and independent of sibling names") {
    wsd::Rng root(42);
    wsd::Rng a1 = root.substream("folds");
    wsd::Rng a2 = root.substream("folds");
    wsd::Rng b = root.substream("svm");
    REQUIRE(a1.next_u64() == a2.next_u64());
    REQUIRE(a1.seed() != b.seed());

    // same name under different parents differs
    wsd::Rng other_root(43);
    REQUIRE(root.substream("folds").seed() != other_root.substream("folds").seed());
}

TEST_CASE("below produces full range and is deterministic") {
    wsd::Rng r(7);
    std::map<std::uint64_t, int> seen;
    for (int i = 0; i < 3000; ++i) seen[r.below(7)]++;
    REQUIRE(seen.size() == 7);
    REQUIRE(seen.begin()->first == 0);
    REQUIRE(seen.rbegin()->first == 6);

    wsd::Rng r1(99), r2(99);
    for (int i = 0; i < 100; ++i) REQUIRE(r1.below(1000) == r2.below(1000));
}

TEST_CASE("uniform stays in [0,1) and hits both halves") {
    wsd::Rng r(5);
    int low = 0, high = 0;
    for (int i = 0; i < 2000; ++i) {
        double u = r.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        (u < 0.5 ? low : high)++;
    }
    REQUIRE(low > 700);
    REQUIRE(high > 700);
}

TEST_CASE("shuffle is a permutation and seed-stable") {
    std::vector<int> v(50);
    std::iota(v.begin(), v.end(), 0);
    std::vector<int> w = v;
    wsd::Rng r1(11), r2(11);
    r1.shuffle(v);
    r2.shuffle(w);
    REQUIRE(v == w);
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> expect(50);
    std::iota(expect.begin(), expect.end(), 0);
    REQUIRE(sorted == expect);
}
