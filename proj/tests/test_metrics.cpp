#include <catch2/catch_amalgamated.hpp>

#include "sudler/metrics.hpp"

using namespace sudler;

TEST_CASE("constant V matches 0.1615 and its convergence contract", "[metrics]") {
    double v6 = constant_V(1e-6);
    CHECK(v6 == Catch::Approx(0.1615).margin(5e-4));
    double v7 = constant_V(5e-7);
    CHECK(std::fabs(v7 - v6) < 1e-6);
    // the full-period integral vanishes classically
    CHECK(std::fabs(integral_log2sin(1.0, 1e-9)) <= 1e-8);
    CHECK(integral_log2sin(0.0, 1e-9) == 0.0);
}

TEST_CASE("theorem A constant", "[metrics]") {
    double c = theorem_a_constant();
    CHECK(c == Catch::Approx(0.2627).margin(5e-4));
    // algebraic form: doubling V would quarter it
    double v = constant_V(1e-8);
    const double pi = 3.14159265358979323846;
    CHECK(pi * pi / (1440.0 * (2 * v) * (2 * v)) == Catch::Approx(c / 4).epsilon(1e-12));
}

TEST_CASE("Khintchine-Levy reference and the golden exception", "[metrics]") {
    CHECK(khintchine_levy_reference() == Catch::Approx(1.18657).margin(2e-5));
    // Fibonacci growth: (log q_K)/K -> log phi = 0.4812..., not the a.e. value
    ConvergentTable t =
        ConvergentTable::expand(AlphaSpec::golden(), 500, ExpandOptions{true, false, 0});
    CHECK(khintchine_levy(t) == Catch::Approx(0.4812).margin(0.01));
    ConvergentTable shallow =
        ConvergentTable::expand(AlphaSpec::golden(), 1, ExpandOptions{true, false, 0});
    CHECK_THROWS_AS(khintchine_levy(shallow), OutOfRangeError);
}

TEST_CASE("trimmed sum ratio examples", "[metrics]") {
    ConvergentTable t =
        ConvergentTable::expand(AlphaSpec::golden(), 100, ExpandOptions{true, false, 0});
    double r = trimmed_sum_ratio(t);
    CHECK(r == Catch::Approx(99.0 / (100.0 * std::log(100.0) / std::log(2.0))).epsilon(1e-12));
    CHECK(r == Catch::Approx(0.149).margin(1e-3));
    CHECK(r >= 0.0);
}

TEST_CASE("bernstein count", "[metrics]") {
    ConvergentTable g =
        ConvergentTable::expand(AlphaSpec::golden(), 50, ExpandOptions{true, false, 0});
    CHECK(bernstein_count(g, PsiSpec::constant(1)) == 0); // no a_k exceeds 1

    std::vector<mpz_class> pre = {0};
    for (int i = 0; i < 24; ++i) pre.push_back(1);
    pre.push_back(10000);
    ConvergentTable d = ConvergentTable::expand(AlphaSpec::periodic_cf(pre, {mpz_class(1)}), 25,
                                                ExpandOptions{true, false, 0});
    PsiSpec ksq = PsiSpec::custom({{1.0, 1.0}, {100.0, 10000.0}}, false); // ~ k^2 on [1,100]
    // direct comparison: a_25 = 10^4 > 25^2 = 625
    CHECK(bernstein_count(d, PsiSpec::power(0.9)) >= 1);
    std::uint64_t small_count = bernstein_count(d, ksq);
    std::uint64_t big_count = bernstein_count(d, PsiSpec::constant(0.5));
    CHECK(small_count <= big_count); // enlarging psi never increases the count
}

TEST_CASE("find_good_K", "[metrics]") {
    ConvergentTable g =
        ConvergentTable::expand(AlphaSpec::golden(), 50, ExpandOptions{true, false, 0});
    CHECK(find_good_K(g, PsiSpec::constant(1), 10.0).empty()); // a_K = 1 never exceeds 1

    std::vector<mpz_class> pre = {0};
    for (int i = 0; i < 24; ++i) pre.push_back(1);
    pre.push_back(10000);
    ConvergentTable d = ConvergentTable::expand(AlphaSpec::periodic_cf(pre, {mpz_class(1)}), 30,
                                                ExpandOptions{true, false, 0});
    std::vector<int> ks = find_good_K(d, PsiSpec::power(0.9), 10.0);
    CHECK(std::find(ks.begin(), ks.end(), 25) != ks.end());
    // re-validate the output against the defining conditions
    for (int K : ks) {
        CHECK(mpz_cmp_d(d.a(K).get_mpz_t(), PsiSpec::power(0.9).eval(K)) > 0);
        CHECK(d.a(K) < mpz_class(K) * K);
        mpz_class partial = 0;
        for (int l = 1; l < K; ++l) partial += d.a(l);
        CHECK(partial.get_d() <= 10.0 * K * std::log(static_cast<double>(K)));
    }
}

TEST_CASE("max over period: degenerate and contract cases", "[metrics]") {
    ConvergentTable t = ConvergentTable::expand(AlphaSpec::golden(), 12);
    MaxOverPeriod trivial = max_over_period(t, 0); // q_0 = 1: only N = 0
    CHECK(trivial.max_log_p == 0.0L);

    MaxOverPeriod r = max_over_period(t, 12);
    // the max dominates every sampled prefix value
    FastAlpha fa = FastAlpha::from_table(t);
    for (std::uint64_t n : {1u, 10u, 100u, 200u}) {
        LogValue v = log_product_direct_fast(fa, n);
        CHECK(r.max_log_p >= v.value);
    }
    Budget tiny;
    tiny.max_terms = 5;
    CHECK_THROWS_AS(max_over_period(t, 12, 1, tiny), BudgetExceededError);
}

TEST_CASE("variance ratio: degenerate window and reference", "[metrics]") {
    ConvergentTable t = ConvergentTable::expand(AlphaSpec::golden(), 12);
    VarianceRatio r1 = variance_ratio(t, 1);
    CHECK(r1.degenerate); // max over N < 1 comes from N = 0 only
    CHECK(r1.reference == Catch::Approx(0.7248).margin(2e-3));

    VarianceRatio r = variance_ratio(t, 5000);
    CHECK_FALSE(r.degenerate);
    CHECK(r.ratio > 0);
}

TEST_CASE("c(t): endpoints and the closed-form oracle", "[metrics]") {
    CHECK(c_of_t(0.0) == 0.0);
    // oracle from u = 1/sqrt(x): c(t) = erfc(1/sqrt(2t))
    auto oracle = [](double t) { return std::erfc(1.0 / std::sqrt(2.0 * t)); };
    CHECK(c_of_t(1.0) == Catch::Approx(0.31731).margin(1e-5));
    for (double t : {0.1, 1.0, 10.0}) {
        CHECK(c_of_t(t) == Catch::Approx(oracle(t)).margin(1e-6));
    }
    CHECK(c_of_t(1e6) > 0.999);
    CHECK(c_of_t(1e6) < 1.0);
    // non-decreasing, into [0,1), matching the oracle on a 50-point log grid
    double prev = -1;
    for (int i = 0; i < 50; ++i) {
        double t = std::pow(10.0, -2.0 + 6.0 * i / 49.0);
        double c = c_of_t(t);
        CHECK(c >= prev);
        CHECK(c < 1.0);
        CHECK(c == Catch::Approx(oracle(t)).margin(1e-6));
        prev = c;
    }
    CHECK_THROWS_AS(c_of_t(-1.0), DomainError);
}

TEST_CASE("ensembles are deterministic per seed", "[metrics]") {
    EnsembleResult a = kl_ensemble(8, 60, 5);
    EnsembleResult b = kl_ensemble(8, 60, 5);
    CHECK(a.values == b.values);
    CHECK(a.median == b.median);
    EnsembleResult c = kl_ensemble(8, 60, 6);
    CHECK(a.values != c.values);

    EnsembleResult tr = trimmed_ensemble(6, 200, 11);
    CHECK(tr.values.size() == 6);
    for (double v : tr.values) CHECK(v > 0);
}
