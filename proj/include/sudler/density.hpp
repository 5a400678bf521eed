#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "sudler/sudler.hpp"

namespace sudler {

// Monotone test function family.  Divergence of sum 1/psi(k) is analytic
// metadata per family, never inferred from values:
//   constant(c), power(s in (0,1]), linear(c), klogk(c) are all divergent;
//   custom tables carry a user-supplied flag.
class PsiSpec {
public:
    enum class Family { constant, power, linear, klogk, custom };

    static PsiSpec constant(double c) { return PsiSpec(Family::constant, c, true); }
    static PsiSpec power(double s) {
        if (!(s > 0 && s <= 1)) throw InvalidSpecError("psi power: exponent must be in (0,1]");
        return PsiSpec(Family::power, s, true);
    }
    static PsiSpec linear(double c) { return PsiSpec(Family::linear, c, true); }
    static PsiSpec klogk(double c) { return PsiSpec(Family::klogk, c, true); }
    static PsiSpec custom(std::vector<std::pair<double, double>> pts, bool divergent) {
        PsiSpec p(Family::custom, 0, divergent);
        std::sort(pts.begin(), pts.end());
        if (pts.empty()) throw InvalidSpecError("psi custom: empty table");
        for (std::size_t i = 0; i + 1 < pts.size(); ++i)
            if (pts[i + 1].second < pts[i].second)
                throw InvalidSpecError("psi custom: table must be non-decreasing");
        for (const auto& kv : pts)
            if (kv.second <= 0) throw InvalidSpecError("psi custom: values must be positive");
        p.table_ = std::move(pts);
        return p;
    }

    static PsiSpec parse(const std::string& s);
    std::string render() const;

    Family family() const { return family_; }
    double param() const { return param_; }
    bool divergent() const { return divergent_; }

    double eval(double k) const {
        double v = 0;
        switch (family_) {
        case Family::constant: v = param_; break;
        case Family::power:
            if (k <= 0) throw DomainError("psi power: k must be positive");
            v = std::pow(k, param_);
            break;
        case Family::linear: v = param_ * k; break;
        case Family::klogk: v = param_ * k * std::log(k); break;
        case Family::custom: {
            if (k < table_.front().first)
                throw DomainError("psi custom: k below the table domain");
            if (k >= table_.back().first) {
                v = table_.back().second;
            } else {
                auto it = std::upper_bound(table_.begin(), table_.end(),
                                           std::make_pair(k, std::numeric_limits<double>::max()));
                auto hi = *it;
                auto lo = *(it - 1);
                double w = (k - lo.first) / (hi.first - lo.first);
                v = lo.second + w * (hi.second - lo.second);
            }
            break;
        }
        }
        if (!(v > 0)) throw DomainError("psi is not positive at k=" + std::to_string(k));
        return v;
    }

    std::string id() const { return render(); }

private:
    PsiSpec(Family f, double p, bool d) : family_(f), param_(p), divergent_(d) {}
    Family family_;
    double param_;
    bool divergent_;
    std::vector<std::pair<double, double>> table_;
};

inline double psi_eval(const PsiSpec& psi, double k) { return psi.eval(k); }

inline PsiSpec PsiSpec::parse(const std::string& s) {
    auto colon = s.find(':');
    std::string fam = s.substr(0, colon == std::string::npos ? s.size() : colon);
    std::string arg = colon == std::string::npos ? "" : s.substr(colon + 1);
    auto num = [&](const std::string& v) {
        try {
            std::size_t pos = 0;
            double d = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("");
            return d;
        } catch (...) {
            throw InvalidSpecError("psi: bad number '" + v + "'");
        }
    };
    if (fam == "constant") return constant(num(arg));
    if (fam == "power") return power(num(arg));
    if (fam == "linear") return linear(num(arg));
    if (fam == "klogk") return klogk(num(arg));
    if (fam == "custom") {
        // custom:div=1:1=2,10=30
        auto parts = detail::split(arg, ':');
        if (parts.size() != 2 || parts[0].rfind("div=", 0) != 0)
            throw InvalidSpecError("psi custom: expected custom:div=<0|1>:<k=v,...>");
        bool div = parts[0].substr(4) == "1";
        std::vector<std::pair<double, double>> pts;
        for (const auto& kv : detail::split(parts[1], ',')) {
            auto eq = kv.find('=');
            if (eq == std::string::npos) throw InvalidSpecError("psi custom: expected k=v");
            pts.emplace_back(num(kv.substr(0, eq)), num(kv.substr(eq + 1)));
        }
        return custom(std::move(pts), div);
    }
    throw InvalidSpecError("unknown psi family: " + fam);
}

inline std::string PsiSpec::render() const {
    std::ostringstream os;
    os.precision(17);
    switch (family_) {
    case Family::constant: os << "constant:" << param_; break;
    case Family::power: os << "power:" << param_; break;
    case Family::linear: os << "linear:" << param_; break;
    case Family::klogk: os << "klogk:" << param_; break;
    case Family::custom:
        os << "custom:div=" << (divergent_ ? 1 : 0) << ":";
        for (std::size_t i = 0; i < table_.size(); ++i) {
            if (i) os << ",";
            os << table_[i].first << "=" << table_[i].second;
        }
        break;
    }
    return os.str();
}

// ---- membership in the two value-distribution sets --------------------------

enum class MemberStatus { upper, lower, neither };

struct Membership {
    MemberStatus status = MemberStatus::neither;
    bool indeterminate = false; // error bound straddles a threshold
};

inline Membership classify_membership(long double logP, double err, double psi_of_logN) {
    Membership m;
    double thr = psi_of_logN;
    if (static_cast<double>(logP) - err >= thr) {
        m.status = MemberStatus::upper;
    } else if (static_cast<double>(logP) + err <= -thr) {
        m.status = MemberStatus::lower;
    } else {
        m.status = MemberStatus::neither;
        if (static_cast<double>(logP) + err >= thr || static_cast<double>(logP) - err <= -thr)
            m.indeterminate = true;
    }
    return m;
}

inline Membership membership(const ConvergentTable& t, std::uint64_t N, const PsiSpec& psi,
                             Rigor rigor = Rigor::heuristic, const Budget& budget = {}) {
    if (N < 2) throw OutOfRangeError("membership: N must be >= 2");
    LogValue lp = log_product_direct(t, N, rigor, budget);
    double thr = psi.eval(std::log(static_cast<double>(N)));
    return classify_membership(lp.value, lp.abs_error, thr);
}

// ---- window scans ------------------------------------------------------------

struct DensityReport {
    std::uint64_t m_lo = 0, m_hi = 0;
    std::uint64_t upper_count = 0, lower_count = 0, indeterminate = 0, total = 0;
    std::string alpha_id, psi_id;

    double upper_fraction() const { return total ? double(upper_count) / total : 0.0; }
    double lower_fraction() const { return total ? double(lower_count) / total : 0.0; }
};

namespace detail {

// Chunked psi-threshold bracket: within a chunk of N values, psi(log N)
// lies between the bracket ends (psi is monotone), so the exact threshold
// is only evaluated when a value falls inside the bracket.
struct ThresholdBracket {
    const PsiSpec* psi;
    u64 limit;
    static constexpr u64 kChunk = 1 << 14;
    u64 chunk_end = 0;
    double thr_lo = 0, thr_hi = 0;

    ThresholdBracket(const PsiSpec& p, u64 lim) : psi(&p), limit(lim) {}

    Membership classify(u64 n, long double logP, double err) {
        if (n > chunk_end || chunk_end == 0) {
            chunk_end = std::min(limit, (n / kChunk + 1) * kChunk);
            thr_lo = psi->eval(std::log(static_cast<double>(n)));
            thr_hi = psi->eval(std::log(static_cast<double>(chunk_end)));
        }
        double v = static_cast<double>(logP);
        Membership m;
        if (v - err >= thr_hi)
            m.status = MemberStatus::upper;
        else if (v + err <= -thr_hi)
            m.status = MemberStatus::lower;
        else if (v + err < thr_lo && v - err > -thr_lo)
            m.status = MemberStatus::neither;
        else
            m = classify_membership(logP, err, psi->eval(std::log(static_cast<double>(n))));
        return m;
    }
};

struct Tally {
    u64 upper = 0, lower = 0, indeterminate = 0, total = 0;
    void count(const Membership& m) {
        ++total;
        switch (m.status) {
        case MemberStatus::upper: ++upper; break;
        case MemberStatus::lower: ++lower; break;
        case MemberStatus::neither:
            if (m.indeterminate) ++indeterminate;
            break;
        }
    }
    void add(const Tally& o) {
        upper += o.upper;
        lower += o.lower;
        indeterminate += o.indeterminate;
        total += o.total;
    }
};

struct WindowVisitor {
    ThresholdBracket bracket;
    u64 m_lo, m_hi;
    Tally tally;

    WindowVisitor(const PsiSpec& p, u64 lo, u64 hi) : bracket(p, hi), m_lo(lo), m_hi(hi) {}

    void visit(u64 n, long double logP, double err) {
        if (n < m_lo || n > m_hi || n < 2) return;
        tally.count(bracket.classify(n, logP, err));
    }
    void merge(WindowVisitor&& o) { tally.add(o.tally); }
};

} // namespace detail

inline DensityReport scan_window(const ConvergentTable& t, std::uint64_t m_lo, std::uint64_t m_hi,
                                 const PsiSpec& psi, int threads = 1, const Budget& budget = {}) {
    if (m_lo < 2) throw OutOfRangeError("scan_window: M_lo must be >= 2");
    if (m_hi < m_lo) throw OutOfRangeError("scan_window: M_hi must be >= M_lo");
    if (m_hi > budget.max_terms) throw BudgetExceededError("scan_window: M_hi exceeds budget");
    FastAlpha fa = FastAlpha::from_table(t);
    detail::WindowVisitor vis(psi, m_lo, m_hi);
    scan_log_products(fa, m_hi, vis, threads);
    DensityReport rep;
    rep.m_lo = m_lo;
    rep.m_hi = m_hi;
    rep.upper_count = vis.tally.upper;
    rep.lower_count = vis.tally.lower;
    rep.indeterminate = vis.tally.indeterminate;
    rep.total = vis.tally.total;
    rep.alpha_id = t.alpha().id();
    rep.psi_id = psi.id();
    return rep;
}

// Cumulative profile at increasing checkpoints: one report per window
// [2, M_i]; the running max of the lower-set fraction estimates the upper
// density of the lower set from below.
inline std::vector<DensityReport> upper_density_profile(const ConvergentTable& t,
                                                        const PsiSpec& psi,
                                                        const std::vector<std::uint64_t>& checkpoints,
                                                        int threads = 1, const Budget& budget = {}) {
    if (checkpoints.empty()) return {};
    for (std::size_t i = 0; i + 1 < checkpoints.size(); ++i)
        if (checkpoints[i + 1] <= checkpoints[i])
            throw UsageError("upper_density_profile: checkpoints must be strictly increasing");
    std::uint64_t m_max = checkpoints.back();
    if (m_max > budget.max_terms)
        throw BudgetExceededError("upper_density_profile: exceeds budget");

    struct ProfileVisitor {
        detail::ThresholdBracket bracket;
        const std::vector<std::uint64_t>* cps;
        std::vector<detail::Tally> segment; // per checkpoint segment (cps[i-1], cps[i]]

        ProfileVisitor(const PsiSpec& p, std::uint64_t m_max, const std::vector<std::uint64_t>& c)
            : bracket(p, m_max), cps(&c) {
            segment.resize(c.size());
        }
        void visit(std::uint64_t n, long double logP, double err) {
            if (n < 2) return;
            std::size_t s = std::lower_bound(cps->begin(), cps->end(), n) - cps->begin();
            if (s >= segment.size()) return;
            segment[s].count(bracket.classify(n, logP, err));
        }
        void merge(ProfileVisitor&& o) {
            for (std::size_t i = 0; i < segment.size(); ++i) segment[i].add(o.segment[i]);
        }
    };

    FastAlpha fa = FastAlpha::from_table(t);
    ProfileVisitor vis(psi, m_max, checkpoints);
    scan_log_products(fa, m_max, vis, threads);

    std::vector<DensityReport> out;
    detail::Tally cum;
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        cum.add(vis.segment[i]);
        DensityReport r;
        r.m_lo = 2;
        r.m_hi = checkpoints[i];
        r.upper_count = cum.upper;
        r.lower_count = cum.lower;
        r.indeterminate = cum.indeterminate;
        r.total = cum.total;
        r.alpha_id = t.alpha().id();
        r.psi_id = psi.id();
        out.push_back(r);
    }
    return out;
}

// ---- proof constructions -----------------------------------------------------

// M_K(delta) = { 1 <= N <= floor(q_K/2) : delta a_K <= b_{K-1}(N) <= (1/2 - delta) a_K }.
// Members form contiguous blocks of q_{K-1} integers per admissible top
// digit, truncated at floor(q_K/2).
struct MkSet {
    int K = 0;
    mpz_class band_lo, band_hi; // admissible b_{K-1} values, inclusive
    mpz_class half;             // floor(q_K / 2)
    mpz_class count;
    double cardinality_ratio = 0; // #M_K / floor(q_K/2)

    bool contains(const mpz_class& N, const ConvergentTable& t) const {
        if (N < 1 || N > half) return false;
        mpz_class b = N / t.q(K - 1);
        return b >= band_lo && b <= band_hi;
    }
};

inline MkSet construct_MK(const ConvergentTable& t, int K, double delta) {
    if (!(delta > 0 && delta < 0.5)) throw OutOfRangeError("construct_MK: delta must be in (0, 1/2)");
    if (K < 1 || K > t.depth()) throw OutOfRangeError("construct_MK: bad K");
    MkSet s;
    s.K = K;
    double aK = t.a(K).get_d();
    s.band_lo = mpz_class(static_cast<long>(std::ceil(delta * aK)));
    if (s.band_lo < 1) s.band_lo = 1;
    s.band_hi = mpz_class(static_cast<long>(std::floor((0.5 - delta) * aK)));
    s.half = t.q(K) / 2;
    if (s.band_hi < s.band_lo) throw EmptySetError("construct_MK: no admissible digit in the band");
    mpz_class cnt = 0;
    for (mpz_class b = s.band_lo; b <= s.band_hi; ++b) {
        mpz_class lo = b * t.q(K - 1);
        mpz_class hi = lo + t.q(K - 1) - 1; // N with b_{K-1} = b
        if (hi > s.half) hi = s.half;
        if (hi >= lo) cnt += hi - lo + 1;
    }
    s.count = cnt;
    s.cardinality_ratio = s.half > 0 ? cnt.get_d() / s.half.get_d() : 0.0;
    if (s.count == 0) throw EmptySetError("construct_MK: band contains no N <= q_K/2");
    return s;
}

// M+/M- split at digit index l0-1 with threshold a_{l0}/2, and the digit
// flip b -> a_{l0} - b on that index.  Counts come from the digit-DP;
// injectivity and the flip rules are verified by exhaustion when the
// range is small enough.
struct SplitFlipReport {
    int K = 0;
    int l0 = 0;
    mpz_class a_l0;
    mpz_class m_plus, m_minus;
    bool minus_at_least_half = false;
    // exhaustive-only fields
    bool exhaustive = false;
    bool flip_injective = true;
    std::uint64_t flip_rule_violations = 0;
    std::uint64_t fixed_points = 0;
};

inline std::vector<mpz_class> flip_digits(const std::vector<mpz_class>& b, int l0,
                                          const mpz_class& a_l0) {
    std::vector<mpz_class> out = b;
    out[l0 - 1] = a_l0 - b[l0 - 1];
    return out;
}

inline SplitFlipReport split_and_flip(const ConvergentTable& t, const mpz_class& M,
                                      std::uint64_t exhaustive_cap = 100000) {
    int K = t.depth();
    if (!(M >= t.q(K - 1) && M < t.q(K)))
        throw OutOfRangeError("split_and_flip: need q_{K-1} <= M < q_K for the table depth");
    SplitFlipReport rep;
    rep.K = K;
    rep.l0 = t.argmax_a(K);
    rep.a_l0 = t.a(rep.l0);

    // M- : b_{l0-1} <= a_{l0}/2  <=>  b <= floor(a/2)
    // M+ : b_{l0-1} >= a_{l0}/2  <=>  b >= ceil(a/2)
    mpz_class fl = rep.a_l0 / 2;
    mpz_class ce = (rep.a_l0 + 1) / 2;
    mpz_class total = M + 1; // N = 0..M
    rep.m_minus = count_le_with_digit_at_most(t, M, K, rep.l0 - 1, fl);
    rep.m_plus = total - count_le_with_digit_at_most(t, M, K, rep.l0 - 1, ce - 1);
    rep.minus_at_least_half = 2 * rep.m_minus >= M;

    if (M <= exhaustive_cap) {
        rep.exhaustive = true;
        std::set<mpz_class> images;
        OstrowskiEnumerator en(t, K);
        do {
            if (en.value() > M) break;
            const auto& b = en.digits();
            if (2 * b[rep.l0 - 1] < rep.a_l0) continue; // not in M+
            std::vector<mpz_class> fb = flip_digits(b, rep.l0, rep.a_l0);
            if (fb[rep.l0 - 1] == b[rep.l0 - 1]) ++rep.fixed_points;
            // validity of the flipped string
            bool ok = true;
            if (rep.l0 - 1 == 0) {
                if (fb[0] > t.a(1) - 1) ok = false;
            }
            if (fb[rep.l0 - 1] == t.a(rep.l0) && rep.l0 - 2 >= 0 && fb[rep.l0 - 2] != 0) ok = false;
            if (rep.l0 < K && fb[rep.l0] == t.a(rep.l0 + 1) && fb[rep.l0 - 1] != 0) ok = false;
            if (!ok) ++rep.flip_rule_violations;
            mpz_class img = 0;
            for (int l = 0; l < K; ++l) img += fb[l] * t.q(l);
            if (!images.insert(img).second) rep.flip_injective = false;
            if (img > M || 2 * fb[rep.l0 - 1] > rep.a_l0) rep.flip_injective = false;
        } while (en.next());
    }
    return rep;
}

// ---- designed-alpha presets ---------------------------------------------------

// [0; 1,...,1 (ones), big, (1 period)]: one huge partial quotient after a
// run of ones, golden tail.  This is the regime where the Theorem 1 / 2
// mechanisms are visible at desk scale.
inline AlphaSpec designed_alpha(int ones, const mpz_class& big) {
    std::vector<mpz_class> pre;
    pre.push_back(0);
    for (int i = 0; i < ones; ++i) pre.push_back(1);
    pre.push_back(big);
    return AlphaSpec::periodic_cf(std::move(pre), {mpz_class(1)});
}

// All partial quotients equal to `a`.
inline AlphaSpec uniform_alpha(const mpz_class& a) {
    return AlphaSpec::periodic_cf({mpz_class(0)}, {a});
}

} // namespace sudler
