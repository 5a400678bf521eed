#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "sudler/contfrac.hpp"

using namespace sudler;

namespace {

std::vector<long> quotients(const ConvergentTable& t) {
    std::vector<long> a;
    for (int k = 1; k <= t.depth(); ++k) a.push_back(t.a(k).get_si());
    return a;
}

std::vector<long> denominators(const ConvergentTable& t) {
    std::vector<long> q;
    for (int k = 0; k <= t.depth(); ++k) q.push_back(t.q(k).get_si());
    return q;
}

} // namespace

TEST_CASE("golden ratio expansion", "[contfrac]") {
    ConvergentTable t = ConvergentTable::expand(AlphaSpec::golden(), 5);
    CHECK(t.a0() == 0);
    CHECK(quotients(t) == std::vector<long>{1, 1, 1, 1, 1});
    CHECK(denominators(t) == std::vector<long>{1, 1, 2, 3, 5, 8});
}

TEST_CASE("sqrt2 - 1 expansion", "[contfrac]") {
    ConvergentTable t =
        ConvergentTable::expand(AlphaSpec::parse("quadratic:d=2,a=-1,b=1,c=1"), 3);
    CHECK(quotients(t) == std::vector<long>{2, 2, 2});
    CHECK(denominators(t) == std::vector<long>{1, 2, 5, 12});
}

TEST_CASE("periodic cf [0;(1)] at depth 1", "[contfrac]") {
    ConvergentTable t = ConvergentTable::expand(AlphaSpec::parse("cf:0;(1)"), 1);
    CHECK(t.q(1) == 1);
    CHECK(t.p(1) == 1);
    // delta_1 = |phi - 1| with phi = (sqrt(5)-1)/2
    oracle::Mpfr want = oracle::delta_value(oracle::golden_value(), 1, 1);
    CHECK(std::fabs(static_cast<double>(t.delta(1).mid()) - want.d()) < 1e-15);
    CHECK(want.d() == Catch::Approx(0.3819660112501051).epsilon(1e-12));
}

TEST_CASE("delta accessor matches |q alpha - p|", "[contfrac]") {
    ConvergentTable t = ConvergentTable::expand(AlphaSpec::golden(), 10);
    oracle::Mpfr phi = oracle::golden_value();
    for (int k : {1, 2, 5, 10}) {
        oracle::Mpfr want = oracle::delta_value(phi, t.q(k), t.p(k));
        CHECK(std::fabs(static_cast<double>(t.delta(k).mid()) - want.d()) <
              t.delta(k).rad() + 1e-16);
    }
    CHECK(static_cast<double>(t.delta(1).mid()) == Catch::Approx(0.3819660112).epsilon(1e-9));
    CHECK(static_cast<double>(t.delta(2).mid()) == Catch::Approx(0.2360679774).epsilon(1e-9));
    CHECK_THROWS_AS(t.delta(11), OutOfRangeError);
    CHECK_THROWS_AS(t.delta(-1), OutOfRangeError);
}

TEST_CASE("table invariants across a corpus", "[contfrac]") {
    std::vector<AlphaSpec> corpus = {
        AlphaSpec::golden(),
        AlphaSpec::parse("quadratic:d=2,a=-1,b=1,c=1"),
        AlphaSpec::parse("quadratic:d=3,a=0,b=1,c=2"),
        AlphaSpec::parse("cf:0;2,(1,3)"),
        sample_alpha(1, 512),
        sample_alpha(7, 512),
    };
    for (const auto& a : corpus) {
        ConvergentTable t = ConvergentTable::expand(a, 8);
        TableCheck c = check_table(t);
        INFO(a.id());
        CHECK(c.recursions_ok);
        CHECK(c.q_increasing);
        CHECK(c.inequality_violations == 0);
        CHECK(c.unverifiable == 0);
        // delta strictly decreasing for k >= 1
        for (int k = 2; k <= t.depth(); ++k)
            CHECK(iv_cmp(t.delta(k), t.delta(k - 1)) < 0);
        // dual route: recurrence deltas vs direct |q_k alpha - p_k| intervals
        for (int k = 0; k <= t.depth(); ++k) {
            Ival direct = iv_abs(iv_sub(iv_mul_z(t.alpha_enclosure(), t.q(k)),
                                        Ival::exact_z(t.p(k), t.precision())));
            CHECK(iv_cmp(direct, t.delta(k)) == 0); // overlapping enclosures
        }
    }
}

TEST_CASE("a_{k+1} delta_k = delta_{k-1} - delta_{k+1} within error", "[contfrac]") {
    ConvergentTable t = ConvergentTable::expand(sample_alpha(13, 512), 10);
    for (int k = 1; k + 1 <= t.depth(); ++k) {
        Ival lhs = iv_mul_z(t.delta(k), t.a(k + 1));
        Ival rhs = iv_sub(t.delta(k - 1), t.delta(k + 1));
        CHECK(iv_cmp(lhs, rhs) == 0);
    }
}

TEST_CASE("re-expanding a decimal rendering reproduces the quotients", "[contfrac]") {
    AlphaSpec quad = AlphaSpec::parse("quadratic:d=7,a=1,b=1,c=3");
    ConvergentTable exact = ConvergentTable::expand(quad, 12);
    std::string digits = decimal_digits(quad, 60);
    ConvergentTable redone =
        ConvergentTable::expand(AlphaSpec::decimal(digits, 256), 12);
    CHECK(exact.a0() == redone.a0());
    for (int k = 1; k <= 12; ++k) CHECK(exact.a(k) == redone.a(k));
}

TEST_CASE("sampling is deterministic per seed", "[contfrac]") {
    AlphaSpec a1 = sample_alpha(42, 256);
    AlphaSpec a2 = sample_alpha(42, 256);
    mpz_class n1, d1, n2, d2;
    a1.rational_enclosure(n1, d1);
    a2.rational_enclosure(n2, d2);
    CHECK(n1 == n2);
    CHECK(d1 == d2);
    CHECK(n1 % 2 == 1); // forced low bit

    AlphaSpec b = sample_alpha(2, 256);
    mpz_class nb, db;
    b.rational_enclosure(nb, db);
    AlphaSpec c = sample_alpha(1, 256);
    mpz_class nc, dc;
    c.rational_enclosure(nc, dc);
    CHECK(nb != nc);
}

TEST_CASE("fraction of samples with a_1 = 1 is about one half", "[contfrac]") {
    // a_1 = 1 iff alpha in (1/2, 1), so the expected fraction is 1/2.
    int hits = 0;
    const int n = 1000;
    for (int i = 0; i < n; ++i) {
        ConvergentTable t = ConvergentTable::expand(sample_alpha(1000 + i, 128), 1,
                                                    ExpandOptions{true, false, 0});
        if (t.a(1) == 1) ++hits;
    }
    double frac = double(hits) / n;
    CHECK(frac == Catch::Approx(0.5).margin(0.05));
}

TEST_CASE("interval alpha runs out of certified quotients", "[contfrac]") {
    AlphaSpec shallow = AlphaSpec::decimal("0.61803", 64);
    CHECK_THROWS_AS(ConvergentTable::expand(shallow, 30), PrecisionExhaustedError);
    // [0.33, 0.34]: the reciprocal interval straddles 3, so a_1 is not
    // certifiable at this precision
    CHECK_THROWS_AS(ConvergentTable::expand(AlphaSpec::decimal("0.33", 64), 1),
                    PrecisionExhaustedError);
}

TEST_CASE("invalid specs are rejected", "[contfrac]") {
    CHECK_THROWS_AS(AlphaSpec::parse("quadratic:d=4,a=0,b=1,c=2"), InvalidSpecError); // square d
    CHECK_THROWS_AS(AlphaSpec::parse("quadratic:d=2,a=1,b=0,c=2"), InvalidSpecError);
    CHECK_THROWS_AS(AlphaSpec::parse("quadratic:d=2,a=1,b=1,c=0"), InvalidSpecError);
    CHECK_THROWS_AS(AlphaSpec::parse("cf:0;1,2"), InvalidSpecError); // no period
    CHECK_THROWS_AS(AlphaSpec::parse("cf:0;(0)"), InvalidSpecError); // zero quotient
    CHECK_THROWS_AS(AlphaSpec::parse("nonsense"), InvalidSpecError);
    CHECK_THROWS_AS(ConvergentTable::expand(AlphaSpec::golden(), 0), OutOfRangeError);
}

TEST_CASE("alpha grammar round-trips", "[contfrac]") {
    for (const char* s : {"quadratic:d=2,a=-1,b=1,c=1", "cf:0;1,2,(3,4)", "cf:0;(1)",
                          "dec:0.61803:bits=256", "random:seed=42:bits=512"}) {
        AlphaSpec a = AlphaSpec::parse(s);
        CHECK(a.render() == s);
        CHECK(AlphaSpec::parse(a.render()).render() == a.render());
    }
    // "golden" and the trailing-dots decimal marker normalize
    CHECK(AlphaSpec::parse("golden").render() == "cf:0;(1)");
    CHECK(AlphaSpec::parse("dec:0.61803...:bits=256").render() == "dec:0.61803:bits=256");
}
