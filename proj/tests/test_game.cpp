#include <doctest.h>

#include <random>

#include "ccce/game.hpp"
#include "helpers.hpp"

using namespace ccce;

TEST_CASE("flat index examples") {
    CHECK(flat_index(std::vector<std::size_t>{0, 0}, std::vector<std::size_t>{2, 2}) == 0);
    CHECK(flat_index(std::vector<std::size_t>{1, 1}, std::vector<std::size_t>{2, 2}) == 3);
    CHECK(flat_index(std::vector<std::size_t>{1, 0, 2}, std::vector<std::size_t>{2, 2, 3}) == 8);
    CHECK_THROWS_AS(flat_index(std::vector<std::size_t>{2, 0}, std::vector<std::size_t>{2, 2}),
                    std::invalid_argument);
    CHECK_THROWS_AS(flat_index(std::vector<std::size_t>{0}, std::vector<std::size_t>{2, 2}),
                    std::invalid_argument);
}

TEST_CASE("flat index is a bijection on a 2x2x3 space") {
    const std::vector<std::size_t> counts{2, 2, 3};
    std::vector<int> seen(12, 0);
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b)
            for (std::size_t c = 0; c < 3; ++c) {
                const std::vector<std::size_t> coords{a, b, c};
                const auto f = flat_index(coords, counts);
                REQUIRE(f < 12);
                ++seen[f];
                CHECK(unflatten(f, counts) == coords);
            }
    for (int s : seen) CHECK(s == 1);
}

TEST_CASE("unflatten then flat_index is the identity on random spaces") {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 40; ++rep) {
        std::vector<std::size_t> counts;
        std::size_t size = 1;
        while (true) {
            const std::size_t c = std::uniform_int_distribution<std::size_t>(1, 7)(rng);
            if (size * c > 10000 || counts.size() == 6) break;
            counts.push_back(c);
            size *= c;
        }
        if (counts.empty()) counts.push_back(1);
        JointSpace space(counts);
        for (std::size_t f = 0; f < space.size(); ++f) {
            const auto coords = space.unflatten(f);
            REQUIRE(space.flat_index(coords) == f);
            for (std::size_t i = 0; i < counts.size(); ++i) REQUIRE(space.coord(f, i) == coords[i]);
        }
    }
}

TEST_CASE("for_each_with visits exactly the matching joint actions in order") {
    JointSpace space({3, 2, 4});
    for (std::size_t agent = 0; agent < 3; ++agent)
        for (std::size_t a = 0; a < space.count(agent); ++a) {
            std::vector<std::size_t> got;
            space.for_each_with(agent, a, [&](JointIndex x) { got.push_back(x); });
            std::vector<std::size_t> want;
            for (std::size_t x = 0; x < space.size(); ++x)
                if (space.coord(x, agent) == a) want.push_back(x);
            CHECK(got == want);
        }
}

TEST_CASE("invalid games are rejected") {
    CHECK_THROWS_AS(JointSpace(std::vector<std::size_t>{}), std::invalid_argument);
    CHECK_THROWS_AS(JointSpace({2, 0}), std::invalid_argument);
    CHECK_THROWS_AS(FiniteGame({2, 2}, {{1, 2, 3, 4}}), std::invalid_argument);
    CHECK_THROWS_AS(FiniteGame({2, 2}, {{1, 2, 3}, {1, 2, 3, 4}}), std::invalid_argument);
    CHECK_THROWS_AS(FiniteGame({2}, {{1, std::nan("")}}), std::invalid_argument);
    CHECK_THROWS_AS(FiniteGame({2}, {{1, 2}}, {{"a"}}), std::invalid_argument);
}

TEST_CASE("deviation cost on the intersection game") {
    const auto g = testing::intersection_game();
    const std::vector<std::size_t> s_other{0, 1};  // agent 1 plays S
    CHECK(g.deviation_cost(0, 0, 1, s_other) == doctest::Approx(-2.0));
    CHECK(g.deviation_cost(0, 1, 0, s_other) == doctest::Approx(2.0));
    CHECK_THROWS_AS(g.deviation_cost(0, 0, 0, s_other), std::invalid_argument);
    CHECK_THROWS_AS(g.deviation_cost(0, 0, 0, JointIndex{1}), std::invalid_argument);
}

TEST_CASE("deviation cost is antisymmetric") {
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 50; ++rep) {
        const auto g = testing::random_small_game(rng);
        for (std::size_t x = 0; x < g.joint_size(); ++x)
            for (std::size_t i = 0; i < g.num_agents(); ++i)
                for (std::size_t a = 0; a < g.num_actions(i); ++a)
                    for (std::size_t b = 0; b < g.num_actions(i); ++b) {
                        if (a == b) continue;
                        CHECK(g.deviation_cost(i, a, b, x) == -g.deviation_cost(i, b, a, x));
                    }
    }
}

TEST_CASE("joint distribution validation") {
    CHECK_THROWS_AS(JointDistribution({0.5, 0.4}), std::invalid_argument);
    CHECK_THROWS_AS(JointDistribution({1.1, -0.1}), std::invalid_argument);
    CHECK_THROWS_AS(JointDistribution({}), std::invalid_argument);
    CHECK_NOTHROW(JointDistribution({0.5, 0.5 + 5e-10}));
    const auto p = JointDistribution::point_mass(4, 2);
    CHECK(p[2] == 1.0);
    CHECK(p.support() == std::vector<JointIndex>{2});
    CHECK_THROWS_AS(JointDistribution::point_mass(4, 4), std::invalid_argument);
}

TEST_CASE("conditional expected deviation on the half/half device") {
    const auto g = testing::intersection_game();
    const JointDistribution z({0.0, 0.5, 0.5, 0.0});
    CHECK(conditional_expected_deviation(g, z, 0, 0, 1) == doctest::Approx(-2.0));
    CHECK(conditional_expected_deviation(g, z, 0, 1, 0) == doctest::Approx(-4.0));
    CHECK(weighted_deviation(g, z, 0, 0, 1) == doctest::Approx(-1.0));
    CHECK(marginal(g, z, 0, 0) == doctest::Approx(0.5));

    const JointDistribution only_s({0.0, 0.0, 0.0, 1.0});
    CHECK(conditional_expected_deviation(g, only_s, 0, 0, 1) == 0.0);
    CHECK(weighted_deviation(g, only_s, 0, 0, 1) == 0.0);
}

TEST_CASE("weighted deviation is linear in z") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 50; ++rep) {
        const auto g = testing::random_small_game(rng);
        const JointDistribution z1(testing::random_simplex(rng, g.joint_size()));
        const JointDistribution z2(testing::random_simplex(rng, g.joint_size()));
        const double a = std::uniform_real_distribution<double>(0, 1)(rng);
        std::vector<double> mix(g.joint_size());
        for (std::size_t x = 0; x < mix.size(); ++x) mix[x] = a * z1[x] + (1 - a) * z2[x];
        const JointDistribution zm(mix);
        for (std::size_t i = 0; i < g.num_agents(); ++i)
            for (std::size_t r = 0; r < g.num_actions(i); ++r)
                for (std::size_t s = 0; s < g.num_actions(i); ++s) {
                    if (r == s) continue;
                    const double lhs = weighted_deviation(g, zm, i, r, s);
                    const double rhs = a * weighted_deviation(g, z1, i, r, s) +
                                       (1 - a) * weighted_deviation(g, z2, i, r, s);
                    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12).scale(1.0));
                }
    }
}

TEST_CASE("game JSON round trip and errors") {
    const auto g = testing::intersection_game();
    const auto back = parse_game_json(game_to_json(g));
    CHECK(back.action_counts() == g.action_counts());
    CHECK(back.labels() == g.labels());
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t x = 0; x < 4; ++x) CHECK(back.cost(i, x) == g.cost(i, x));

    CHECK_NOTHROW(parse_game_json(R"({"agents":1,"action_counts":[2],"costs":[[0,1]]})"));
    CHECK_THROWS_AS(parse_game_json("{"), std::invalid_argument);
    CHECK_THROWS_AS(parse_game_json(R"({"agents":2,"action_counts":[2],"costs":[[0,1]]})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_game_json(R"({"agents":1,"action_counts":[2],"costs":[[0]]})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_game_json(R"({"agents":1,"costs":[[0,1]]})"), std::invalid_argument);
}
