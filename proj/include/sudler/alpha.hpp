#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "sudler/bigfloat.hpp"
#include "sudler/errors.hpp"

namespace sudler {

// (a + b*sqrt(d))/c with d a positive nonsquare, b != 0, c != 0.
struct QuadraticAlpha {
    mpz_class d, a, b, c;
};

// [a0; pre..., (period...) repeating].  preperiod[0] is a0 >= 0, all later
// entries and the whole period are >= 1.
struct PeriodicCfAlpha {
    std::vector<mpz_class> preperiod;
    std::vector<mpz_class> period;
};

// A truncated decimal rendering; the value is only known to lie in
// [digits, digits + ulp).
struct DecimalAlpha {
    std::string digits;
    long precision_bits = 64;
};

struct SampledAlpha {
    std::uint64_t seed = 0;
    long precision_bits = 64;
};

namespace detail {

inline bool is_perfect_square(const mpz_class& z) {
    return mpz_perfect_square_p(z.get_mpz_t()) != 0;
}

// Deterministic dyadic sample: the first `bits` bits of a seeded stream,
// with the lowest bit forced to 1 so the enclosure endpoints stay
// non-degenerate and the value stays inside (0,1).
inline mpz_class sample_mantissa(std::uint64_t seed, long bits) {
    if (bits < 64) throw InvalidSpecError("sampled alpha needs precision_bits >= 64");
    std::mt19937_64 rng(seed);
    mpz_class m = 0;
    long produced = 0;
    while (produced < bits) {
        std::uint64_t w = rng();
        long take = std::min<long>(64, bits - produced);
        m <<= take;
        m += mpz_class(static_cast<unsigned long>(w >> (64 - take)));
        produced += take;
    }
    mpz_setbit(m.get_mpz_t(), 0);
    return m;
}

// Parse "0.61803" (optionally with a trailing "..." marker) into
// num/10^L with L the number of fractional digits.
inline void parse_decimal_digits(std::string s, mpz_class& num, mpz_class& den) {
    if (s.size() >= 3 && s.compare(s.size() - 3, 3, "...") == 0) s.erase(s.size() - 3);
    if (s.empty()) throw InvalidSpecError("empty decimal digits");
    std::string intpart, fracpart;
    auto dot = s.find('.');
    if (dot == std::string::npos) {
        intpart = s;
    } else {
        intpart = s.substr(0, dot);
        fracpart = s.substr(dot + 1);
    }
    if (intpart.empty()) intpart = "0";
    for (char ch : intpart + fracpart)
        if (ch < '0' || ch > '9') throw InvalidSpecError("bad decimal digits: " + s);
    num = mpz_class(intpart + fracpart, 10);
    den = 1;
    for (std::size_t i = 0; i < fracpart.size(); ++i) den *= 10;
}

} // namespace detail

// Folds an eventually periodic continued fraction into a quadratic surd.
// The purely periodic tail y = [c1; c2, ...] solves a quadratic fixed-point
// equation; the preperiod then acts on y as a Moebius transform.
inline QuadraticAlpha fold_periodic_cf(const PeriodicCfAlpha& pc) {
    if (pc.preperiod.empty()) throw InvalidSpecError("periodic_cf needs a preperiod with a_0");
    if (pc.period.empty()) throw InvalidSpecError("periodic_cf needs a nonempty period");
    if (pc.preperiod[0] < 0) throw InvalidSpecError("periodic_cf: a_0 must be >= 0");
    for (std::size_t i = 1; i < pc.preperiod.size(); ++i)
        if (pc.preperiod[i] < 1) throw InvalidSpecError("periodic_cf: preperiod entries must be >= 1");
    for (const auto& e : pc.period)
        if (e < 1) throw InvalidSpecError("periodic_cf: period entries must be >= 1");

    // Period matrix: product of [[a,1],[1,0]] in period order (right
    // multiplication, matching how quotients are appended).
    mpz_class m00 = 1, m01 = 0, m10 = 0, m11 = 1;
    for (const auto& e : pc.period) {
        mpz_class n00 = m00 * e + m01, n10 = m10 * e + m11;
        m01 = m00;
        m11 = m10;
        m00 = n00;
        m10 = n10;
    }
    // y = (m00 y + m01)/(m10 y + m11), y > 1:
    //   m10 y^2 + (m11 - m00) y - m01 = 0.
    mpz_class u = m00 - m11;
    mpz_class D = (m11 - m00) * (m11 - m00) + 4 * m01 * m10;
    mpz_class w = 2 * m10;
    // y = (u + sqrt(D)) / w.

    // Preperiod convergents P_j/Q_j.
    mpz_class P = pc.preperiod[0], Pm = 1, Q = 1, Qm = 0;
    for (std::size_t i = 1; i < pc.preperiod.size(); ++i) {
        mpz_class nP = pc.preperiod[i] * P + Pm;
        mpz_class nQ = pc.preperiod[i] * Q + Qm;
        Pm = P;
        Qm = Q;
        P = nP;
        Q = nQ;
    }
    // x = (P y + Pm)/(Q y + Qm) with y = (u + sqrt(D))/w:
    //   x = (A + B sqrt(D)) / (C + E sqrt(D)).
    mpz_class A = P * u + Pm * w, B = P;
    mpz_class C = Q * u + Qm * w, E = Q;
    // Rationalize.
    QuadraticAlpha qa;
    qa.d = D;
    qa.a = A * C - B * E * D;
    qa.b = B * C - A * E;
    qa.c = C * C - E * E * D;
    if (qa.c == 0 || qa.b == 0 || detail::is_perfect_square(qa.d))
        throw InvalidSpecError("periodic_cf does not denote a quadratic irrational");
    if (qa.c < 0) {
        qa.a = -qa.a;
        qa.b = -qa.b;
        qa.c = -qa.c;
    }
    mpz_class g = gcd(gcd(qa.a, qa.b), qa.c);
    if (g > 1) {
        qa.a /= g;
        qa.b /= g;
        qa.c /= g;
    }
    return qa;
}

class AlphaSpec {
public:
    using Kind = std::variant<QuadraticAlpha, PeriodicCfAlpha, DecimalAlpha, SampledAlpha>;

    static AlphaSpec golden() {
        PeriodicCfAlpha pc;
        pc.preperiod = {mpz_class(0)};
        pc.period = {mpz_class(1)};
        return AlphaSpec(Kind(pc));
    }

    static AlphaSpec quadratic(const mpz_class& d, const mpz_class& a, const mpz_class& b,
                               const mpz_class& c) {
        QuadraticAlpha qa{d, a, b, c};
        validate(qa);
        return AlphaSpec(Kind(qa));
    }

    static AlphaSpec periodic_cf(std::vector<mpz_class> preperiod, std::vector<mpz_class> period) {
        PeriodicCfAlpha pc{std::move(preperiod), std::move(period)};
        fold_periodic_cf(pc); // validates
        return AlphaSpec(Kind(pc));
    }

    static AlphaSpec decimal(const std::string& digits, long precision_bits) {
        if (precision_bits <= 0) throw InvalidSpecError("decimal: precision_bits must be positive");
        DecimalAlpha da{digits, precision_bits};
        mpz_class num, den;
        detail::parse_decimal_digits(digits, num, den);
        return AlphaSpec(Kind(da));
    }

    static AlphaSpec sampled(std::uint64_t seed, long precision_bits) {
        SampledAlpha sa{seed, precision_bits};
        detail::sample_mantissa(seed, precision_bits); // validates bits
        return AlphaSpec(Kind(sa));
    }

    static AlphaSpec parse(const std::string& spec);
    std::string render() const;

    const Kind& kind() const { return kind_; }
    bool exact() const {
        return std::holds_alternative<QuadraticAlpha>(kind_) ||
               std::holds_alternative<PeriodicCfAlpha>(kind_);
    }

    // Quadratic form of an exact spec (folding periodic kinds).
    QuadraticAlpha as_quadratic() const {
        if (const auto* qa = std::get_if<QuadraticAlpha>(&kind_)) return *qa;
        if (const auto* pc = std::get_if<PeriodicCfAlpha>(&kind_)) return fold_periodic_cf(*pc);
        throw InvalidSpecError("alpha spec is not exact");
    }

    // Rational enclosure [num_lo/den, (num_lo+1)/den] of an inexact spec.
    void rational_enclosure(mpz_class& num_lo, mpz_class& den) const {
        if (const auto* da = std::get_if<DecimalAlpha>(&kind_)) {
            detail::parse_decimal_digits(da->digits, num_lo, den);
            return;
        }
        if (const auto* sa = std::get_if<SampledAlpha>(&kind_)) {
            num_lo = detail::sample_mantissa(sa->seed, sa->precision_bits);
            den = mpz_class(1) << static_cast<unsigned long>(sa->precision_bits);
            return;
        }
        throw InvalidSpecError("alpha spec is exact; no rational enclosure");
    }

    // Enclosure of the (unnormalized) represented value.
    Ival enclosure(mpfr_prec_t prec) const {
        if (exact()) {
            QuadraticAlpha qa = as_quadratic();
            Ival s = iv_sqrt_z(qa.d, prec + 8);
            Ival num = iv_add(Ival::exact_z(qa.a, prec + 8), iv_mul_z(s, qa.b));
            return iv_div_z(num, qa.c);
        }
        mpz_class num, den;
        rational_enclosure(num, den);
        Ival r(prec);
        mpfr_set_z(r.lo.raw(), num.get_mpz_t(), MPFR_RNDD);
        mpfr_div_z(r.lo.raw(), r.lo.raw(), den.get_mpz_t(), MPFR_RNDD);
        mpz_class num1 = num + 1;
        mpfr_set_z(r.hi.raw(), num1.get_mpz_t(), MPFR_RNDU);
        mpfr_div_z(r.hi.raw(), r.hi.raw(), den.get_mpz_t(), MPFR_RNDU);
        return r;
    }

    std::string id() const { return render(); }

private:
    explicit AlphaSpec(Kind k) : kind_(std::move(k)) {}

    static void validate(const QuadraticAlpha& qa) {
        if (qa.d <= 0 || detail::is_perfect_square(qa.d))
            throw InvalidSpecError("quadratic: d must be a positive nonsquare");
        if (qa.b == 0) throw InvalidSpecError("quadratic: b must be nonzero");
        if (qa.c == 0) throw InvalidSpecError("quadratic: c must be nonzero");
    }

    Kind kind_;
};

// sample_alpha from the spec: deterministic per seed.
inline AlphaSpec sample_alpha(std::uint64_t seed, long precision_bits) {
    return AlphaSpec::sampled(seed, precision_bits);
}

// ---- grammar ---------------------------------------------------------------
//
//   golden
//   quadratic:d=2,a=-1,b=1,c=1
//   cf:0;1,2,(3,4)
//   dec:0.61803...:bits=256
//   random:seed=42:bits=512

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

inline mpz_class parse_int(const std::string& s, const std::string& what) {
    if (s.empty()) throw InvalidSpecError("empty integer in " + what);
    for (std::size_t i = 0; i < s.size(); ++i) {
        char ch = s[i];
        if (!((ch >= '0' && ch <= '9') || (i == 0 && (ch == '-' || ch == '+'))))
            throw InvalidSpecError("bad integer '" + s + "' in " + what);
    }
    return mpz_class(s, 10);
}

inline long parse_long(const std::string& s, const std::string& what) {
    mpz_class z = parse_int(s, what);
    if (!z.fits_slong_p()) throw InvalidSpecError("integer out of range in " + what);
    return z.get_si();
}

} // namespace detail

inline AlphaSpec AlphaSpec::parse(const std::string& spec) {
    if (spec == "golden") return golden();
    auto starts = [&](const char* pre) { return spec.rfind(pre, 0) == 0; };
    if (starts("quadratic:")) {
        std::string body = spec.substr(10);
        mpz_class d, a, b, c;
        bool got_d = false, got_a = false, got_b = false, got_c = false;
        for (const auto& kv : detail::split(body, ',')) {
            auto eq = kv.find('=');
            if (eq == std::string::npos) throw InvalidSpecError("quadratic: expected key=value, got " + kv);
            std::string k = kv.substr(0, eq), v = kv.substr(eq + 1);
            mpz_class z = detail::parse_int(v, "quadratic:" + k);
            if (k == "d") d = z, got_d = true;
            else if (k == "a") a = z, got_a = true;
            else if (k == "b") b = z, got_b = true;
            else if (k == "c") c = z, got_c = true;
            else throw InvalidSpecError("quadratic: unknown key " + k);
        }
        if (!(got_d && got_a && got_b && got_c))
            throw InvalidSpecError("quadratic: need d, a, b, c");
        return quadratic(d, a, b, c);
    }
    if (starts("cf:")) {
        std::string body = spec.substr(3);
        auto semi = body.find(';');
        if (semi == std::string::npos) throw InvalidSpecError("cf: missing ';' after a_0");
        std::vector<mpz_class> pre, per;
        pre.push_back(detail::parse_int(body.substr(0, semi), "cf a_0"));
        std::string rest = body.substr(semi + 1);
        auto open = rest.find('(');
        std::string head = (open == std::string::npos) ? rest : rest.substr(0, open);
        if (open != std::string::npos) {
            auto close = rest.find(')', open);
            if (close == std::string::npos || close + 1 != rest.size())
                throw InvalidSpecError("cf: bad period parentheses");
            for (const auto& t : detail::split(rest.substr(open + 1, close - open - 1), ','))
                per.push_back(detail::parse_int(t, "cf period"));
        } else {
            throw InvalidSpecError("cf: a parenthesized period is required");
        }
        if (!head.empty()) {
            if (head.back() != ',') throw InvalidSpecError("cf: expected ',' before period");
            head.pop_back();
            if (!head.empty())
                for (const auto& t : detail::split(head, ','))
                    pre.push_back(detail::parse_int(t, "cf preperiod"));
        }
        return periodic_cf(std::move(pre), std::move(per));
    }
    if (starts("dec:")) {
        auto parts = detail::split(spec.substr(4), ':');
        if (parts.size() != 2 || parts[1].rfind("bits=", 0) != 0)
            throw InvalidSpecError("dec: expected dec:<digits>:bits=<n>");
        long bits = detail::parse_long(parts[1].substr(5), "dec bits");
        return decimal(parts[0], bits);
    }
    if (starts("random:")) {
        auto parts = detail::split(spec.substr(7), ':');
        if (parts.size() != 2 || parts[0].rfind("seed=", 0) != 0 || parts[1].rfind("bits=", 0) != 0)
            throw InvalidSpecError("random: expected random:seed=<s>:bits=<n>");
        mpz_class seed = detail::parse_int(parts[0].substr(5), "random seed");
        long bits = detail::parse_long(parts[1].substr(5), "random bits");
        if (seed < 0) throw InvalidSpecError("random: seed must be nonnegative");
        std::uint64_t s = 0;
        mpz_class tmp = seed;
        for (int i = 0; i < 64 && tmp > 0; i += 32) {
            s |= static_cast<std::uint64_t>(mpz_class(tmp & 0xffffffff).get_ui()) << i;
            tmp >>= 32;
        }
        return sampled(s, bits);
    }
    throw InvalidSpecError("unrecognized alpha spec: " + spec);
}

inline std::string AlphaSpec::render() const {
    std::ostringstream os;
    if (const auto* qa = std::get_if<QuadraticAlpha>(&kind_)) {
        os << "quadratic:d=" << qa->d << ",a=" << qa->a << ",b=" << qa->b << ",c=" << qa->c;
    } else if (const auto* pc = std::get_if<PeriodicCfAlpha>(&kind_)) {
        os << "cf:" << pc->preperiod[0] << ";";
        for (std::size_t i = 1; i < pc->preperiod.size(); ++i) os << pc->preperiod[i] << ",";
        os << "(";
        for (std::size_t i = 0; i < pc->period.size(); ++i) {
            if (i) os << ",";
            os << pc->period[i];
        }
        os << ")";
    } else if (const auto* da = std::get_if<DecimalAlpha>(&kind_)) {
        std::string d = da->digits;
        if (d.size() >= 3 && d.compare(d.size() - 3, 3, "...") == 0) d.erase(d.size() - 3);
        os << "dec:" << d << ":bits=" << da->precision_bits;
    } else if (const auto* sa = std::get_if<SampledAlpha>(&kind_)) {
        os << "random:seed=" << sa->seed << ":bits=" << sa->precision_bits;
    }
    return os.str();
}

// Decimal rendering of alpha with the given number of fractional digits,
// truncated toward zero; handy for round-trip expansion checks.
inline std::string decimal_digits(const AlphaSpec& alpha, int digits) {
    mpfr_prec_t p = static_cast<mpfr_prec_t>(digits * 3.33) + 64;
    Ival enc = alpha.enclosure(p);
    mpz_class den = 1;
    for (int i = 0; i < digits; ++i) den *= 10;
    Real t(p);
    mpfr_mul_z(t.raw(), enc.lo.raw(), den.get_mpz_t(), MPFR_RNDD);
    mpz_class scaled;
    mpfr_get_z(scaled.get_mpz_t(), t.raw(), MPFR_RNDD);
    mpz_class ip = scaled / den, fp = scaled % den;
    std::string frac = fp.get_str();
    frac.insert(frac.begin(), digits - frac.size(), '0');
    return ip.get_str() + "." + frac;
}

} // namespace sudler
