#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <set>

#include <tlsh/rng.hpp>

using namespace tlsh;

TEST_CASE("derive_seed reproduces frozen reference values", "[rng]") {
    // Reference values computed from an independent SplitMix64 implementation.
    CHECK(derive_seed(0, 0) == 0xe220a8397b1dcdafull);
    CHECK(derive_seed(0, 1) == 0x6e789e6aa1b965f4ull);
    CHECK(derive_seed(1, 0) == 0x910a2dec89025cc1ull);
    CHECK(derive_seed(42, 7) == 0xccf635ee9e9e2fa4ull);
    CHECK(derive_seed(0xdeadbeefull, 1ull << 32) == 0xdf0ad790901e109cull);
}

TEST_CASE("derived seeds do not collide over many tags", "[rng]") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t tag = 0; tag < 100000; ++tag) seen.insert(derive_seed(9, tag));
    CHECK(seen.size() == 100000);
}

TEST_CASE("uniform01 implements the documented transform", "[rng]") {
    // The contract: top 53 bits of one mt19937_64 draw, centered in the cell.
    std::mt19937_64 ref(42);
    Rng rng(42);
    for (int i = 0; i < 100; ++i) {
        double expect = (double(ref() >> 11) + 0.5) * 0x1.0p-53;
        CHECK(rng.uniform01() == expect);
    }
}

TEST_CASE("uniform01 stays strictly inside the unit interval", "[rng]") {
    Rng rng(7);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        double u = rng.uniform01();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK_THAT(sum / n, Catch::Matchers::WithinAbs(0.5, 0.01));
}

TEST_CASE("uniform respects its bounds", "[rng]") {
    Rng rng(11);
    for (int i = 0; i < 10000; ++i) {
        double v = rng.uniform(-3.0, 5.0);
        REQUIRE(v > -3.0);
        REQUIRE(v < 5.0);
    }
}

TEST_CASE("normal has the right first two moments", "[rng]") {
    Rng rng(13);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        double x = rng.normal();
        sum += x;
        sum2 += x * x;
    }
    CHECK_THAT(sum / n, Catch::Matchers::WithinAbs(0.0, 0.02));
    CHECK_THAT(sum2 / n, Catch::Matchers::WithinAbs(1.0, 0.03));
}

TEST_CASE("below is bounded and covers all buckets", "[rng]") {
    Rng rng(17);
    int counts[10] = {0};
    for (int i = 0; i < 10000; ++i) {
        std::uint64_t v = rng.below(10);
        REQUIRE(v < 10);
        ++counts[v];
    }
    for (int c : counts) CHECK(c > 0);
    for (int i = 0; i < 100; ++i) CHECK(rng.below(1) == 0);
}

TEST_CASE("identical seeds give identical streams", "[rng]") {
    Rng a(7), b(7);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    Rng c(7), d(8);
    bool all_equal = true;
    for (int i = 0; i < 10; ++i) all_equal = all_equal && c.next_u64() == d.next_u64();
    CHECK_FALSE(all_equal);
}
