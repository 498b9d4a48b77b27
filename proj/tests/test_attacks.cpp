#include <doctest.h>

#include <cmath>

#include "kets/attacks.hpp"
#include "kets/defenses.hpp"
#include "kets/errors.hpp"
#include "kets/rng.hpp"
#include "oracles.hpp"

using kets::UpdateVector;

namespace {

std::vector<UpdateVector> random_benign(std::size_t n, std::size_t dim, kets::Rng& rng) {
    std::vector<UpdateVector> out(n, UpdateVector(dim));
    for (auto& u : out)
        for (auto& x : u) x = rng.uniform(-1.0, 1.0);
    return out;
}

double max_pairwise_sq(const std::vector<UpdateVector>& us) {
    double best = 0.0;
    for (std::size_t i = 0; i < us.size(); ++i)
        for (std::size_t j = i + 1; j < us.size(); ++j) best = std::max(best, oracle::sq_dist(us[i], us[j]));
    return best;
}

double min_max_lhs(const UpdateVector& m, const std::vector<UpdateVector>& us) {
    double worst = 0.0;
    for (const auto& u : us) worst = std::max(worst, oracle::sq_dist(m, u));
    return worst;
}

double min_sum_bound(const std::vector<UpdateVector>& us) {
    double best = 0.0;
    for (const auto& u : us) {
        double total = 0.0;
        for (const auto& v : us) total += oracle::sq_dist(u, v);
        best = std::max(best, total);
    }
    return best;
}

double min_sum_lhs(const UpdateVector& m, const std::vector<UpdateVector>& us) {
    double total = 0.0;
    for (const auto& u : us) total += oracle::sq_dist(m, u);
    return total;
}

}  // namespace

TEST_SUITE("attacks") {

TEST_CASE("perturbation vectors") {
    CHECK(kets::perturbation_vector({{1, 0}, {1, 0}}, kets::PerturbationKind::unit) ==
          UpdateVector{-1, 0});
    CHECK(kets::perturbation_vector({{1, 1}, {1, 1}}, kets::PerturbationKind::std_dev) ==
          UpdateVector{0, 0});
    CHECK(kets::perturbation_vector({{0, 0}, {2, 0}}, kets::PerturbationKind::std_dev) ==
          UpdateVector{-1, 0});
    CHECK_THROWS_AS(kets::perturbation_vector({{1, 0}, {-1, 0}}, kets::PerturbationKind::unit),
                    kets::ZeroNormError);
}

TEST_CASE("gamma search grows unbounded when the constraint always holds") {
    const std::vector<UpdateVector> benign{{1, 0}, {0, 1}};
    const auto r = kets::gamma_search(benign, {-1, 0}, [](const UpdateVector&) { return true; }, 10.0, 0.01);
    CHECK(r.gamma >= 10.0);
    CHECK(r.gamma <= 20.0);
}

TEST_CASE("gamma search brackets a known threshold within tau") {
    const std::vector<UpdateVector> benign{{1.0}, {1.0}};
    // Candidate is mean + gamma * p with p = [-1]; feasible iff gamma <= 3.
    const auto constraint = [](const UpdateVector& candidate) { return candidate[0] >= 1.0 - 3.0; };
    const auto r = kets::gamma_search(benign, {-1.0}, constraint, 10.0, 0.01);
    CHECK(r.gamma >= 3.0 - 0.01);
    CHECK(r.gamma <= 3.0);
    CHECK(r.malicious[0] == doctest::Approx(1.0 - r.gamma));
}

TEST_CASE("gamma search returns the mean when only zero is feasible") {
    const std::vector<UpdateVector> benign{{2, 0}, {4, 0}};
    int calls = 0;
    const auto r = kets::gamma_search(
        benign, {-1, 0},
        [&calls](const UpdateVector&) {
            ++calls;
            return false;
        },
        10.0, 0.01);
    CHECK(r.gamma == 0.0);
    CHECK(r.malicious == UpdateVector{3, 0});
    CHECK(calls > 0);
}

TEST_CASE("min-max output satisfies its bound and sits near the boundary") {
    const std::vector<UpdateVector> benign{{1, 0}, {0, 1}};
    kets::AttackConfig cfg;
    const auto m = kets::min_max_attack(benign, kets::PerturbationKind::unit, cfg);

    const double bound = max_pairwise_sq(benign);
    CHECK(bound == doctest::Approx(2.0));
    CHECK(min_max_lhs(m, benign) <= bound);

    // One more tau along the perturbation direction breaks the constraint.
    const auto p = kets::perturbation_vector(benign, kets::PerturbationKind::unit);
    const auto pushed = kets::add(m, kets::scale(p, cfg.tau));
    CHECK(min_max_lhs(pushed, benign) > bound);
}

TEST_CASE("min-max on a collinear benign pair") {
    const std::vector<UpdateVector> benign{{1, 0}, {2, 0}};
    kets::AttackConfig cfg;
    const auto m = kets::min_max_attack(benign, kets::PerturbationKind::unit, cfg);
    CHECK(min_max_lhs(m, benign) <= max_pairwise_sq(benign));
    CHECK(m[1] == doctest::Approx(0.0));  // stays on the search ray

    // Feasibility boundary: gamma* = 0.5 for this instance.
    CHECK(1.5 - m[0] == doctest::Approx(0.5).epsilon(0.03));
}

TEST_CASE("identical benign updates force the mean") {
    const std::vector<UpdateVector> benign{{1, 2}, {1, 2}, {1, 2}};
    kets::AttackConfig cfg;
    CHECK(kets::min_max_attack(benign, kets::PerturbationKind::unit, cfg) == UpdateVector{1, 2});
    CHECK(kets::min_sum_attack(benign, kets::PerturbationKind::unit, cfg) == UpdateVector{1, 2});
}

TEST_CASE("min-sum output satisfies its bound with a tight boundary") {
    const std::vector<UpdateVector> benign{{1, 0}, {0, 1}};
    kets::AttackConfig cfg;
    const auto m = kets::min_sum_attack(benign, kets::PerturbationKind::unit, cfg);
    const double bound = min_sum_bound(benign);
    CHECK(bound == doctest::Approx(2.0));
    CHECK(min_sum_lhs(m, benign) <= bound);

    const auto p = kets::perturbation_vector(benign, kets::PerturbationKind::unit);
    CHECK(min_sum_lhs(kets::add(m, kets::scale(p, cfg.tau)), benign) > bound);
}

TEST_CASE("crafted updates respect their bounds on random instances") {
    kets::Rng rng(51);
    kets::AttackConfig cfg;
    for (int trial = 0; trial < 50; ++trial) {
        const auto benign = random_benign(3 + rng.below(6), 2 + rng.below(6), rng);
        const auto kind = trial % 2 == 0 ? kets::PerturbationKind::unit : kets::PerturbationKind::std_dev;

        const auto mm = kets::min_max_attack(benign, kind, cfg);
        CHECK(min_max_lhs(mm, benign) <= max_pairwise_sq(benign) * (1.0 + 1e-12));

        const auto ms = kets::min_sum_attack(benign, kind, cfg);
        CHECK(min_sum_lhs(ms, benign) <= min_sum_bound(benign) * (1.0 + 1e-12));
    }
}

TEST_CASE("search gamma lands within tau of the grid oracle") {
    kets::Rng rng(53);
    kets::AttackConfig cfg;
    for (int trial = 0; trial < 20; ++trial) {
        const auto benign = random_benign(4, 3, rng);
        const auto p = kets::perturbation_vector(benign, kets::PerturbationKind::unit);
        const auto base = kets::mean(benign);
        const double bound = max_pairwise_sq(benign);

        const auto feasible = [&](double g) {
            return min_max_lhs(kets::add(base, kets::scale(p, g)), benign) <= bound;
        };
        const double oracle_gamma = oracle::gamma_grid_search(feasible, 2.0 * cfg.gamma_init, 1e-4);
        const auto r = kets::gamma_search(benign, p, [&](const UpdateVector& c) {
            return min_max_lhs(c, benign) <= bound;
        }, cfg.gamma_init, cfg.tau);
        CHECK(std::abs(r.gamma - oracle_gamma) <= cfg.tau);
    }
}

TEST_CASE("min-sum gamma is usually no larger than min-max gamma") {
    // Instances mimic one round of benign updates: a shared descent
    // direction plus per-client noise, in a dimension well above the client
    // count. (In low dimension or for scattered clouds the sum constraint is
    // often the looser one.)
    kets::Rng rng(57);
    kets::AttackConfig cfg;
    int le = 0;
    const int trials = 100;
    for (int trial = 0; trial < trials; ++trial) {
        std::vector<UpdateVector> benign(5, UpdateVector(60));
        UpdateVector base(60);
        for (auto& x : base) x = rng.uniform(-1.0, 1.0);
        for (auto& u : benign) {
            for (std::size_t j = 0; j < u.size(); ++j) u[j] = base[j] + 0.3 * rng.normal();
        }
        const auto p = kets::perturbation_vector(benign, kets::PerturbationKind::unit);

        const double mm_bound = max_pairwise_sq(benign);
        const auto mm = kets::gamma_search(benign, p, [&](const UpdateVector& c) {
            return min_max_lhs(c, benign) <= mm_bound;
        }, cfg.gamma_init, cfg.tau);

        const double ms_bound = min_sum_bound(benign);
        const auto ms = kets::gamma_search(benign, p, [&](const UpdateVector& c) {
            return min_sum_lhs(c, benign) <= ms_bound;
        }, cfg.gamma_init, cfg.tau);

        if (ms.gamma <= mm.gamma + 1e-9) ++le;
    }
    CHECK(le >= trials * 95 / 100);
}

TEST_CASE("trim attack draws from the directed intervals") {
    // Positive mean, positive minimum: interval [min/b, min].
    const std::vector<UpdateVector> benign{{0.1}, {0.2}, {0.3}};
    const auto crafted = kets::trim_attack(benign, 2.0, 50, 7);
    REQUIRE(crafted.size() == 50);
    for (const auto& v : crafted) {
        CHECK(v[0] >= 0.05);
        CHECK(v[0] <= 0.1);
    }

    // Negative mean, negative maximum: interval [max/b, max].
    const std::vector<UpdateVector> negative{{-0.3}, {-0.1}};
    for (const auto& v : kets::trim_attack(negative, 2.0, 50, 11)) {
        CHECK(v[0] >= -0.1);
        CHECK(v[0] <= -0.05);
    }

    // Zero-mean coordinate stays zero.
    const std::vector<UpdateVector> zero{{0.0, 1.0}, {0.0, 2.0}};
    for (const auto& v : kets::trim_attack(zero, 2.0, 10, 13)) CHECK(v[0] == 0.0);
}

TEST_CASE("trim attack intervals hold for every coordinate on random instances") {
    kets::Rng rng(59);
    for (int trial = 0; trial < 30; ++trial) {
        const auto benign = random_benign(4, 5, rng);
        const double b = 2.0;
        const auto m = kets::mean(benign);
        const auto crafted = kets::trim_attack(benign, b, 3, 1000 + static_cast<std::uint64_t>(trial));
        for (const auto& v : crafted) {
            for (std::size_t j = 0; j < v.size(); ++j) {
                double cmin = benign[0][j], cmax = benign[0][j];
                for (const auto& u : benign) {
                    cmin = std::min(cmin, u[j]);
                    cmax = std::max(cmax, u[j]);
                }
                if (m[j] > 0.0) {
                    const double lo = cmin < 0.0 ? b * cmin : cmin / b;
                    CHECK(v[j] >= std::min(lo, cmin) - 1e-12);
                    CHECK(v[j] <= std::max(lo, cmin) + 1e-12);
                } else if (m[j] < 0.0) {
                    const double hi = cmax > 0.0 ? b * cmax : cmax / b;
                    CHECK(v[j] >= std::min(hi, cmax) - 1e-12);
                    CHECK(v[j] <= std::max(hi, cmax) + 1e-12);
                } else {
                    CHECK(v[j] == 0.0);
                }
            }
        }
    }
}

TEST_CASE("krum attack finds a candidate that krum selects") {
    const kets::KrumOracle oracle_fn = [](const UpdateVector& candidate, std::size_t copies,
                                          const std::vector<UpdateVector>& others) {
        kets::AggregationContext ctx;
        int id = 0;
        for (std::size_t i = 0; i < copies; ++i) {
            ctx.client_ids.push_back(id++);
            ctx.updates.push_back(candidate);
            ctx.dataset_sizes.push_back(1);
        }
        for (const auto& u : others) {
            ctx.client_ids.push_back(id++);
            ctx.updates.push_back(u);
            ctx.dataset_sizes.push_back(1);
        }
        ctx.assumed_attackers = copies;
        return kets::krum_select_id(ctx) < static_cast<int>(copies);
    };

    // Non-IID-style benign set: coordinates straddle the origin with a small
    // positive bias, so a point on the -sign(mean) ray can out-score the
    // cluster. Seed chosen so the search succeeds (verified by the oracle).
    kets::Rng rng(15);
    std::vector<UpdateVector> benign(6, UpdateVector(2));
    for (auto& u : benign) {
        for (auto& x : u) x = 0.15 + rng.normal();
    }
    const auto crafted = kets::krum_attack(benign, 1, oracle_fn, 10.0, 1e-5);
    CHECK(oracle_fn(crafted, 1, benign));

    // Against a tight cluster far from the origin, no candidate on the ray
    // ever wins with a single copy; the search must stop at the floor.
    std::vector<UpdateVector> cluster(6, UpdateVector(2));
    for (auto& u : cluster) {
        u[0] = 1.0 + rng.uniform(-0.01, 0.01);
        u[1] = 1.0 + rng.uniform(-0.01, 0.01);
    }
    const auto floored = kets::krum_attack(cluster, 1, oracle_fn, 10.0, 1e-5);
    CHECK_FALSE(oracle_fn(floored, 1, cluster));
    CHECK(floored[0] == doctest::Approx(-1e-5));
    CHECK(floored[1] == doctest::Approx(-1e-5));

    // An oracle that never accepts drives lambda to the floor.
    const auto stubborn = kets::krum_attack(
        cluster, 1, [](const UpdateVector&, std::size_t, const std::vector<UpdateVector>&) { return false; },
        10.0, 1e-5);
    CHECK(stubborn[0] == doctest::Approx(-1e-5));
    CHECK(stubborn[1] == doctest::Approx(-1e-5));

    // Zero coordinates of the sign vector stay zero.
    const std::vector<UpdateVector> symmetric{{1, 0.5}, {1, -0.5}};
    const auto zeroed = kets::krum_attack(
        symmetric, 1, [](const UpdateVector&, std::size_t, const std::vector<UpdateVector>&) { return true; },
        10.0, 1e-5);
    CHECK(zeroed[1] == 0.0);
}

TEST_CASE("sign flip negates and is an involution") {
    CHECK(kets::sign_flip_attack({1, -2, 0}) == UpdateVector{-1, 2, 0});
    CHECK(kets::sign_flip_attack(kets::sign_flip_attack({1, -2, 0.5})) == UpdateVector{1, -2, 0.5});
    const UpdateVector u{0.3, -0.7, 2.0};
    CHECK(kets::cosine_similarity(u, kets::sign_flip_attack(u)) == doctest::Approx(-1.0));
}

TEST_CASE("attack kind round-trips through strings") {
    for (const auto* name : {"none", "trim", "krum", "min_max", "min_sum", "sign_flip", "label_flip"}) {
        CHECK(kets::to_string(kets::attack_kind_from_string(name)) == name);
    }
    CHECK_THROWS_AS(kets::attack_kind_from_string("nope"), kets::ConfigError);
}

}  // TEST_SUITE
