#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "ri/green.hpp"
#include "ri/lattice.hpp"
#include "ri/rng.hpp"

using namespace ri;

TEST_CASE("box indexing round-trips and counts sites") {
    Box b{3, 2};
    CHECK(b.site_count() == 125);
    for (uint64_t i = 0; i < b.site_count(); ++i) {
        CHECK(b.index_of(b.point_at(i)) == i);
    }
    CHECK(b.point_at(b.origin_index()) == Point{});
    CHECK(b.boundary_sites().size() == 125 - 27);
}

TEST_CASE("boundary is exactly the outermost shell") {
    Box b{4, 3};
    for (const Point& p : b.boundary_sites()) {
        CHECK(sup_norm(p, 4) == 3);
    }
}

TEST_CASE("green_origin rejects recurrent dimensions") {
    CHECK_THROWS_AS(green_origin(2), std::invalid_argument);
    CHECK_THROWS_AS(green_origin(1), std::invalid_argument);
}

TEST_CASE("green_origin three dimensions") {
    double g = green_origin(3);
    CHECK(g > 1.51637);
    CHECK(g < 1.51640);
}

TEST_CASE("single-step distribution is uniform over the 2d neighbours") {
    for (int d : {3, 4}) {
        Rng rng(RngKey::root(23).child(static_cast<uint64_t>(d)));
        std::vector<uint64_t> count(static_cast<size_t>(2 * d), 0);
        const int n = 600000;
        for (int i = 0; i < n; ++i) {
            Point p{};
            srw_step(p, d, rng);
            for (int a = 0; a < d; ++a) {
                if (p.c[a] == 1) ++count[static_cast<size_t>(2 * a)];
                if (p.c[a] == -1) ++count[static_cast<size_t>(2 * a + 1)];
            }
        }
        double chi2 = 0, expect = static_cast<double>(n) / (2 * d);
        for (uint64_t k : count) chi2 += (k - expect) * (k - expect) / expect;
        // 1% critical values: chi2(5) = 15.086, chi2(7) = 18.475
        CHECK(chi2 < (d == 3 ? 15.086 : 18.475));
    }
}

TEST_CASE("walk_until_exit ends just outside the guard and visits the start") {
    Rng rng(RngKey::root(29).child(0));
    Box guard{3, 5};
    WalkPath path = walk_path_until_exit(Point{}, guard, rng);
    CHECK(path.visited.front() == Point{});
    CHECK(sup_norm(path.exit_site, 3) == 6);
    CHECK(path.steps == path.visited.size());  // every visit except the start pairs with a step
    for (const Point& p : path.visited) CHECK(guard.contains(p));
}

TEST_CASE("walk_until_exit honours the step cap") {
    Rng rng(RngKey::root(31).child(0));
    Box guard{3, 64};
    CHECK_THROWS_AS(walk_until_exit(Point{}, guard, rng, 10, [](const Point&) {}),
                    std::runtime_error);
}

TEST_CASE("mean exit time scales diffusively") {
    // E[steps to exit B_L] ~ L^2: successive ratios for L = 8,16,32 stay within
    // a factor 2 of the diffusive value 4.
    std::vector<double> mean_tau;
    for (int32_t L : {8, 16, 32}) {
        Box guard{3, L};
        Rng rng(RngKey::root(37).child(static_cast<uint64_t>(L)));
        const int n = 400;
        double s = 0;
        for (int i = 0; i < n; ++i) {
            WalkState w = walk_until_exit(Point{}, guard, rng, kDefaultStepCap, [](const Point&) {});
            s += static_cast<double>(w.steps);
        }
        mean_tau.push_back(s / n);
    }
    for (size_t i = 0; i + 1 < mean_tau.size(); ++i) {
        double ratio = mean_tau[i + 1] / mean_tau[i];
        CHECK(ratio > 2.0);
        CHECK(ratio < 8.0);
    }
}
