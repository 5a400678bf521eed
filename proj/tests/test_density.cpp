#include <catch2/catch_amalgamated.hpp>

#include "sudler/density.hpp"

using namespace sudler;

TEST_CASE("psi families evaluate as written", "[density]") {
    CHECK(PsiSpec::constant(5).eval(100) == 5.0);
    CHECK(PsiSpec::power(0.9).eval(std::exp(1.0)) == Catch::Approx(std::exp(0.9)).epsilon(1e-12));
    CHECK(PsiSpec::power(0.9).eval(std::exp(1.0)) == Catch::Approx(2.4596).margin(2e-4));
    CHECK(PsiSpec::klogk(1).eval(10) == Catch::Approx(10 * std::log(10.0)).epsilon(1e-12));
    CHECK(PsiSpec::klogk(1).eval(10) == Catch::Approx(23.026).margin(1e-3));
    CHECK(PsiSpec::linear(2).eval(7) == 14.0);
    // monotone in k
    for (double k = 2; k < 50; k += 3)
        CHECK(PsiSpec::klogk(0.5).eval(k + 1) > PsiSpec::klogk(0.5).eval(k));
}

TEST_CASE("psi domain errors", "[density]") {
    CHECK_THROWS_AS(PsiSpec::klogk(1).eval(0.5), DomainError); // k log k < 0
    CHECK_THROWS_AS(PsiSpec::power(0.9).eval(-1), DomainError);
    PsiSpec c = PsiSpec::custom({{2.0, 3.0}, {10.0, 4.0}}, true);
    CHECK_THROWS_AS(c.eval(1.0), DomainError); // below table start
    CHECK(c.eval(6.0) == Catch::Approx(3.5));
    CHECK(c.eval(100.0) == 4.0);
    CHECK_THROWS_AS(PsiSpec::power(1.5), InvalidSpecError);
    CHECK_THROWS_AS(PsiSpec::custom({{2.0, 3.0}, {10.0, 1.0}}, true), InvalidSpecError);
}

TEST_CASE("psi grammar round-trips", "[density]") {
    for (const char* s : {"constant:5", "power:0.9", "linear:2", "klogk:1"}) {
        PsiSpec p = PsiSpec::parse(s);
        CHECK(PsiSpec::parse(p.render()).render() == p.render());
    }
    CHECK(PsiSpec::parse("klogk:1.0").divergent());
    CHECK_FALSE(PsiSpec::parse("custom:div=0:1=2,10=30").divergent());
    CHECK_THROWS_AS(PsiSpec::parse("powerish:1"), InvalidSpecError);
}

TEST_CASE("membership with an unreachable threshold", "[density]") {
    ConvergentTable t = ConvergentTable::expand(AlphaSpec::golden(), 12);
    PsiSpec huge = PsiSpec::constant(1e6);
    for (std::uint64_t n : {2u, 10u, 500u}) {
        Membership m = membership(t, n, huge);
        CHECK(m.status == MemberStatus::neither);
        CHECK_FALSE(m.indeterminate);
    }
    CHECK_THROWS_AS(membership(t, 1, huge), OutOfRangeError);
}

TEST_CASE("designed alpha: band members are in the lower set, mirrors upper", "[density]") {
    // [0; 1 x 9, 1000, (1)], K = 10: the Theorem 1 mechanism at desk scale
    ConvergentTable t = ConvergentTable::expand(designed_alpha(9, 1000), 10);
    int K = 10;
    REQUIRE(t.a(K) == 1000);
    MkSet mk = construct_MK(t, K, 0.05);
    PsiSpec psi = PsiSpec::power(0.9);
    int lower_hits = 0, upper_hits = 0, tested = 0;
    for (mpz_class b = mk.band_lo; b <= mk.band_hi; b += 90) {
        mpz_class n = b * t.q(K - 1) + 7;
        REQUIRE(mk.contains(n, t));
        Membership m = membership(t, detail::to_u64(n, "n"), psi);
        if (m.status == MemberStatus::lower) ++lower_hits;
        mpz_class mirror = t.q(K) - n - 1;
        Membership mm = membership(t, detail::to_u64(mirror, "mirror"), psi);
        if (mm.status == MemberStatus::upper) ++upper_hits;
        ++tested;
    }
    CHECK(lower_hits == tested);
    CHECK(upper_hits == tested);
}

TEST_CASE("scan window: trivial threshold and disjointness", "[density]") {
    ConvergentTable t = ConvergentTable::expand(AlphaSpec::golden(), 12);
    DensityReport r = scan_window(t, 2, 10, PsiSpec::constant(1e6));
    CHECK(r.upper_count == 0);
    CHECK(r.lower_count == 0);
    CHECK(r.total == 9);

    DensityReport r2 = scan_window(t, 2, 5000, PsiSpec::power(0.9));
    CHECK(r2.upper_count + r2.lower_count <= r2.total);
    CHECK(r2.m_lo == 2);
    CHECK(r2.m_hi == 5000);
    CHECK_THROWS_AS(scan_window(t, 1, 10, PsiSpec::power(0.9)), OutOfRangeError);
}

TEST_CASE("streaming scan equals pointwise evaluation at sampled N", "[density]") {
    ConvergentTable t = ConvergentTable::expand(sample_alpha(31, 512), 12);
    FastAlpha fa = FastAlpha::from_table(t);
    struct Sampler {
        std::vector<std::pair<std::uint64_t, long double>> got;
        void visit(std::uint64_t n, long double v, double) {
            if (n % 997 == 0) got.emplace_back(n, v);
        }
        void merge(Sampler&& o) {
            got.insert(got.end(), o.got.begin(), o.got.end());
        }
    } vis;
    scan_log_products(fa, 10000, vis);
    CertifiedEval cert(t);
    for (const auto& [n, v] : vis.got) {
        LogValue direct = cert.log_product(n);
        CHECK(std::fabs(static_cast<double>(v - direct.value)) < 1e-10);
    }
}

TEST_CASE("construct_MK: band below 1 is empty", "[density]") {
    ConvergentTable t = ConvergentTable::expand(AlphaSpec::golden(), 10); // a_K = 1
    CHECK_THROWS_AS(construct_MK(t, 10, 0.05), EmptySetError);
    CHECK_THROWS_AS(construct_MK(t, 10, 0.7), OutOfRangeError); // delta out of range
}

TEST_CASE("construct_MK: counts and membership for a large quotient", "[density]") {
    ConvergentTable t = ConvergentTable::expand(designed_alpha(9, 10000), 10);
    REQUIRE(t.a(10) == 10000);
    MkSet mk = construct_MK(t, 10, 0.05);
    CHECK(mk.band_lo == 500);
    CHECK(mk.band_hi == 4500);
    // every yielded N satisfies the defining inequalities via re-encoding
    for (mpz_class b = mk.band_lo; b <= mk.band_hi; b += 501) {
        mpz_class n = b * t.q(9) + 3;
        REQUIRE(n <= mk.half);
        OstrowskiDigits d = OstrowskiDigits::encode(n, t);
        CHECK(d.digit(9) == b);
        CHECK(mk.contains(n, t));
    }
    // block counting: full blocks of q_{K-1} per digit value, truncated
    mpz_class expect = 0;
    for (mpz_class b = mk.band_lo; b <= mk.band_hi; ++b) {
        mpz_class lo = b * t.q(9), hi = lo + t.q(9) - 1;
        if (hi > mk.half) hi = mk.half;
        if (hi >= lo) expect += hi - lo + 1;
    }
    CHECK(mk.count == expect);
    CHECK(mk.cardinality_ratio > 0.85); // -> 1 as delta -> 0 for large a_K
}

TEST_CASE("split and flip: fixed point at the even boundary", "[density]") {
    ConvergentTable t = ConvergentTable::expand(designed_alpha(3, 4), 4);
    REQUIRE(t.a(4) == 4);
    SplitFlipReport r = split_and_flip(t, t.q(4) - 1);
    CHECK(r.l0 == 4);
    CHECK(r.exhaustive);
    CHECK(r.flip_injective);
    CHECK(r.fixed_points > 0); // b_{l0-1} = 2 flips to itself
    CHECK(r.flip_rule_violations == 0);
}

TEST_CASE("split and flip: |M-| >= M/2 for every M below q_8", "[density]") {
    std::vector<mpz_class> pre = {0, 2, 1, 3, 1, 2, 1, 1};
    ConvergentTable full =
        ConvergentTable::expand(AlphaSpec::periodic_cf(pre, {mpz_class(2)}), 8);
    for (int K = 2; K <= 8; ++K) {
        ConvergentTable t = ConvergentTable::expand(full.alpha(), K);
        mpz_class step = t.q(K) / 37;
        if (step < 1) step = 1;
        for (mpz_class M = t.q(K - 1); M < t.q(K); M += step) {
            SplitFlipReport r = split_and_flip(t, M);
            INFO("K=" << K << " M=" << M);
            CHECK(r.minus_at_least_half);
            CHECK(2 * r.m_minus >= M);
            if (r.exhaustive) CHECK(r.flip_injective);
        }
    }
}

TEST_CASE("split and flip: DP counts match exhaustive tallies", "[density]") {
    std::vector<mpz_class> pre = {0, 3, 5};
    ConvergentTable t = ConvergentTable::expand(AlphaSpec::periodic_cf(pre, {mpz_class(4)}), 4);
    mpz_class M = t.q(4) - t.q(3) / 2;
    SplitFlipReport r = split_and_flip(t, M);
    mpz_class plus = 0, minus = 0;
    OstrowskiEnumerator en(t, 4);
    do {
        if (en.value() > M) break;
        mpz_class b = en.digits()[r.l0 - 1];
        if (2 * b >= r.a_l0) ++plus;
        if (2 * b <= r.a_l0) ++minus;
    } while (en.next());
    CHECK(r.m_plus == plus);
    CHECK(r.m_minus == minus);
}

TEST_CASE("flip is an involution on the flipped digit", "[density]") {
    std::vector<mpz_class> pre = {0, 1, 1, 9};
    ConvergentTable t = ConvergentTable::expand(AlphaSpec::periodic_cf(pre, {mpz_class(1)}), 4);
    int l0 = t.argmax_a(4);
    for (long b = 5; b <= 9; ++b) {
        std::vector<mpz_class> digits = {0, 0, 0, 0};
        digits[l0 - 1] = b;
        auto once = flip_digits(digits, l0, t.a(l0));
        auto twice = flip_digits(once, l0, t.a(l0));
        CHECK(twice[l0 - 1] == b);
    }
}

TEST_CASE("upper density profile: cumulative windows", "[density]") {
    ConvergentTable t = ConvergentTable::expand(sample_alpha(37, 512), 12);
    std::vector<std::uint64_t> cps = {10, 100, 1000};
    auto reports = upper_density_profile(t, PsiSpec::constant(1e6), cps);
    REQUIRE(reports.size() == 3);
    CHECK(reports[0].total == 9);    // [2,10]
    CHECK(reports[2].total == 999);  // [2,1000]
    for (const auto& r : reports) {
        CHECK(r.upper_count == 0);
        CHECK(r.lower_count == 0);
        CHECK(r.upper_fraction() <= 1.0 - r.lower_fraction());
    }
    CHECK_THROWS_AS(upper_density_profile(t, PsiSpec::constant(1), {100, 100}), UsageError);
}
