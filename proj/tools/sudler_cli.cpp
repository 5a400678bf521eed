// Command-line entry point: cf, ostrowski, sudler, verify, density,
// metrics.  Every command is a pure function of its RunConfig; CSV/JSON
// outputs are bit-stable across runs and thread counts.

#include <CLI11.hpp>
#include <json.hpp>

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sudler/density.hpp"
#include "sudler/metrics.hpp"
#include "sudler/verify.hpp"

using json = nlohmann::json;
using namespace sudler;

namespace {

constexpr int kSchemaVersion = 1;

struct RunConfig {
    std::string command;
    std::string alpha;
    std::string psi;
    std::string check = "eps";
    std::string method = "direct";
    std::string rigor = "auto";
    std::string kind = "kl";
    std::string n = "0";
    std::string digits;
    std::string out;
    std::string checkpoints;
    long depth = 0;
    long from = 2;
    long to = 100;
    long m = 0;
    long limit = 10000;
    long budget = 2000000000L;
    long grid = 101;
    double delta_band = 0.05;
    double t_param = 1.0;
    double tol = 1e-6;
    double cbound = 10.0;
    int threads = 1;
    int count = 50;
    long precision_bits = 0;
    unsigned long long seed = 1;

    std::string render() const;
};

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_ld(long double v) {
    char buf[80];
    std::snprintf(buf, sizeof buf, "%.21Lg", v);
    return buf;
}

std::string RunConfig::render() const {
    std::ostringstream os;
    os << command;
    auto emit = [&](const char* flag, const std::string& v) {
        if (!v.empty()) os << " " << flag << " " << v;
    };
    emit("--alpha", alpha);
    emit("--psi", psi);
    if (command.rfind("verify", 0) == 0) emit("--check", check);
    if (command == "sudler eval") emit("--method", method);
    if (command == "sudler eval") emit("--n", n);
    if (depth > 0) emit("--depth", std::to_string(depth));
    if (command == "density scan" || command == "density profile") {
        emit("--from", std::to_string(from));
        emit("--to", std::to_string(to));
    }
    if (command == "density profile") emit("--checkpoints", checkpoints);
    if (command == "density mk") emit("--delta", fmt_double(delta_band));
    if (command == "density flip") emit("--m", std::to_string(m));
    if (command == "metrics ensemble") {
        emit("--kind", kind);
        emit("--n", std::to_string(count));
        emit("--seed", std::to_string(seed));
    }
    if (command == "metrics c-of-t") emit("--t", fmt_double(t_param));
    emit("--out", out);
    return os.str();
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::fputs(text.c_str(), stdout);
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw UsageError("cannot open output file: " + path);
    f << text;
}

Rigor pick_rigor(const RunConfig& cfg, unsigned long long n_scale) {
    if (cfg.rigor == "certified") return Rigor::certified;
    if (cfg.rigor == "fast") return Rigor::heuristic;
    if (cfg.rigor == "auto") return n_scale <= 100000 ? Rigor::certified : Rigor::heuristic;
    throw UsageError("--rigor must be certified, fast or auto");
}

Budget make_budget(const RunConfig& cfg) {
    Budget b;
    if (cfg.budget <= 0) throw UsageError("--budget must be positive");
    b.max_terms = static_cast<std::uint64_t>(cfg.budget);
    return b;
}

ExpandOptions expand_opts(const RunConfig& cfg) {
    ExpandOptions o;
    o.min_prec = cfg.precision_bits;
    return o;
}

ConvergentTable table_for(const RunConfig& cfg, int depth) {
    return ConvergentTable::expand(AlphaSpec::parse(cfg.alpha), depth, expand_opts(cfg));
}

// Smallest depth K with q_K > N, expanding in doubling steps.
ConvergentTable table_covering(const RunConfig& cfg, const mpz_class& N) {
    AlphaSpec a = AlphaSpec::parse(cfg.alpha);
    for (int K = 8; K <= 4096; K *= 2) {
        ConvergentTable t = ConvergentTable::expand(a, K, expand_opts(cfg));
        if (t.q(K) > N) {
            int k = K;
            while (k > 1 && t.q(k - 1) > N) --k;
            return ConvergentTable::expand(a, k, expand_opts(cfg));
        }
    }
    throw BudgetExceededError("N too large for automatic table depth");
}

json report_json(const InequalityReport& r) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["name"] = r.name;
    j["instances"] = r.instances_checked;
    j["violations"] = r.violations;
    j["worst_margin"] = r.worst_margin;
    if (r.fitted_constant)
        j["fitted_constant"] = *r.fitted_constant;
    else
        j["fitted_constant"] = nullptr;
    if (r.hypothesis_unmet) j["hypothesis_unmet"] = r.hypothesis_unmet;
    return j;
}

int cmd_cf(const RunConfig& cfg) {
    if (cfg.depth < 1) throw UsageError("cf: --depth must be >= 1");
    ConvergentTable t = table_for(cfg, static_cast<int>(cfg.depth));
    json j;
    j["schema_version"] = kSchemaVersion;
    j["alpha"] = t.alpha().id();
    j["a0"] = t.a0().get_str();
    json a = json::array(), p = json::array(), q = json::array(), d = json::array();
    for (int k = 1; k <= t.depth(); ++k) a.push_back(t.a(k).get_str());
    for (int k = 0; k <= t.depth(); ++k) {
        p.push_back(t.p(k).get_str());
        q.push_back(t.q(k).get_str());
        json dk;
        dk["mid"] = fmt_ld(t.delta(k).mid());
        dk["err"] = t.delta(k).rad();
        d.push_back(dk);
    }
    j["a"] = a;
    j["p"] = p;
    j["q"] = q;
    j["delta"] = d;
    write_text(cfg.out, j.dump(2) + "\n");
    return 0;
}

int cmd_ostrowski(const RunConfig& cfg, const std::string& sub) {
    if (cfg.depth < 1) throw UsageError("ostrowski: --depth must be >= 1");
    ConvergentTable t = table_for(cfg, static_cast<int>(cfg.depth));
    json j;
    j["schema_version"] = kSchemaVersion;
    if (sub == "encode") {
        mpz_class N(cfg.n);
        OstrowskiDigits d = OstrowskiDigits::encode(N, t);
        j["n"] = N.get_str();
        json digits = json::array();
        for (int l = 0; l < d.depth(); ++l) digits.push_back(d.digit(l).get_str());
        j["digits"] = digits;
    } else if (sub == "decode") {
        std::vector<mpz_class> b;
        for (const auto& s : sudler::detail::split(cfg.digits, ','))
            b.emplace_back(s, 10);
        OstrowskiDigits d(b, t);
        j["digits"] = cfg.digits;
        j["n"] = d.decode().get_str();
    } else if (sub == "enumerate") {
        OstrowskiEnumerator en(t, t.depth());
        json items = json::array();
        long long emitted = 0;
        do {
            if (emitted >= cfg.limit) break;
            json item;
            item["n"] = en.value().get_str();
            json digits = json::array();
            for (const auto& bd : en.digits()) digits.push_back(bd.get_str());
            item["digits"] = digits;
            items.push_back(item);
            ++emitted;
        } while (en.next());
        j["items"] = items;
    } else {
        throw UsageError("ostrowski: unknown subcommand");
    }
    write_text(cfg.out, j.dump() + "\n");
    return 0;
}

int cmd_sudler_eval(const RunConfig& cfg) {
    mpz_class N(cfg.n);
    if (N < 0) throw UsageError("sudler eval: --n must be nonnegative");
    ConvergentTable t = cfg.depth >= 1 ? table_for(cfg, static_cast<int>(cfg.depth))
                                       : table_covering(cfg, N);
    Budget budget = make_budget(cfg);
    std::uint64_t n64 = sudler::detail::to_u64(N, "N");
    Rigor rig = pick_rigor(cfg, n64);
    LogValue v;
    if (cfg.method == "direct") {
        v = log_product_direct(t, n64, rig, budget);
    } else if (cfg.method == "decomposed") {
        OstrowskiDigits d = OstrowskiDigits::encode(N, t);
        v = log_product_decomposed(d, rig, budget);
    } else {
        throw UsageError("--method must be direct or decomposed");
    }
    std::ostringstream os;
    os << "# schema_version=" << kSchemaVersion << "\n";
    os << "N,logP,err,method\n";
    os << N.get_str() << "," << fmt_ld(v.value) << "," << fmt_double(v.abs_error) << ","
       << cfg.method << "\n";
    write_text(cfg.out, os.str());
    return 0;
}

int cmd_verify(const RunConfig& cfg) {
    if (cfg.depth < 1) throw UsageError("verify: --depth must be >= 1");
    ConvergentTable t = table_for(cfg, static_cast<int>(cfg.depth));
    Budget budget = make_budget(cfg);
    InequalityReport rep;
    if (cfg.check == "eps") {
        mpz_class lim = t.q(t.depth());
        if (lim > cfg.limit) lim = cfg.limit;
        rep = check_epsilon_chain_exhaustive(t, lim);
    } else if (cfg.check == "vk") {
        rep.name = "vk";
        InequalityReport zero;
        for (int l = 1; l <= t.depth() - 1; ++l) {
            if (t.q(l) > budget.cot_cap) break;
            VkReport vr = check_vk_bounds(t, l, static_cast<int>(cfg.grid), -0.9, 0.9, budget);
            rep.merge(vr.monotone);
            if (vr.bound_x.fitted_constant) rep.fit(*vr.bound_x.fitted_constant);
        }
    } else if (cfg.check == "prop12") {
        rep.name = "prop12";
        mpz_class lim = t.q(t.depth());
        if (lim > cfg.limit) lim = cfg.limit;
        OstrowskiEnumerator en(t, t.depth());
        do {
            if (en.value() >= lim) break;
            OstrowskiDigits d(en.digits(), t);
            for (int l = 1; l < d.depth(); ++l)
                if (d.digit(l) >= 1 && t.q(l) <= budget.cot_cap)
                    rep.merge(check_prop12(d, l, cfg.cbound, Rigor::heuristic, budget));
        } while (en.next());
    } else if (cfg.check == "lemma4") {
        rep.name = "lemma4";
        mpz_class lim = t.q(t.depth());
        if (lim > cfg.limit) lim = cfg.limit;
        OstrowskiEnumerator en(t, t.depth());
        do {
            if (en.value() >= lim) break;
            if (en.value() == 0) continue;
            OstrowskiDigits d(en.digits(), t);
            rep.merge(check_upper_bound_lemma(d, Rigor::heuristic, budget));
        } while (en.next());
    } else {
        throw UsageError("--check must be eps, vk, prop12 or lemma4");
    }
    write_text(cfg.out, report_json(rep).dump(2) + "\n");
    return 0;
}

std::string density_csv_header() { return "M_lo,M_hi,upper_count,lower_count,indeterminate,total\n"; }

std::string density_csv_row(const DensityReport& r) {
    std::ostringstream os;
    os << r.m_lo << "," << r.m_hi << "," << r.upper_count << "," << r.lower_count << ","
       << r.indeterminate << "," << r.total << "\n";
    return os.str();
}

int cmd_density(const RunConfig& cfg, const std::string& sub) {
    Budget budget = make_budget(cfg);
    if (sub == "scan" || sub == "profile") {
        if (cfg.psi.empty()) throw UsageError("density: --psi is required");
        PsiSpec psi = PsiSpec::parse(cfg.psi);
        int depth = cfg.depth >= 1 ? static_cast<int>(cfg.depth) : 0;
        ConvergentTable t = depth ? table_for(cfg, depth) : table_covering(cfg, mpz_class(cfg.to));
        std::ostringstream os;
        os << "# schema_version=" << kSchemaVersion << "\n" << density_csv_header();
        if (sub == "scan") {
            DensityReport r = scan_window(t, cfg.from, cfg.to, psi, cfg.threads, budget);
            os << density_csv_row(r);
        } else {
            std::vector<std::uint64_t> cps;
            for (const auto& s : sudler::detail::split(cfg.checkpoints, ','))
                cps.push_back(std::stoull(s));
            for (const auto& r : upper_density_profile(t, psi, cps, cfg.threads, budget))
                os << density_csv_row(r);
        }
        write_text(cfg.out, os.str());
        return 0;
    }
    if (sub == "mk") {
        if (cfg.depth < 1) throw UsageError("density mk: --depth must be >= 1");
        ConvergentTable t = table_for(cfg, static_cast<int>(cfg.depth));
        MkSet s = construct_MK(t, t.depth(), cfg.delta_band);
        json j;
        j["schema_version"] = kSchemaVersion;
        j["k"] = s.K;
        j["band_lo"] = s.band_lo.get_str();
        j["band_hi"] = s.band_hi.get_str();
        j["count"] = s.count.get_str();
        j["cardinality_ratio"] = s.cardinality_ratio;
        write_text(cfg.out, j.dump(2) + "\n");
        return 0;
    }
    if (sub == "flip") {
        if (cfg.depth < 1) throw UsageError("density flip: --depth must be >= 1");
        ConvergentTable t = table_for(cfg, static_cast<int>(cfg.depth));
        SplitFlipReport r = split_and_flip(t, mpz_class(cfg.m));
        json j;
        j["schema_version"] = kSchemaVersion;
        j["l0"] = r.l0;
        j["a_l0"] = r.a_l0.get_str();
        j["m_plus"] = r.m_plus.get_str();
        j["m_minus"] = r.m_minus.get_str();
        j["minus_at_least_half"] = r.minus_at_least_half;
        j["exhaustive"] = r.exhaustive;
        if (r.exhaustive) {
            j["flip_injective"] = r.flip_injective;
            j["flip_rule_violations"] = r.flip_rule_violations;
            j["fixed_points"] = r.fixed_points;
        }
        write_text(cfg.out, j.dump(2) + "\n");
        return 0;
    }
    throw UsageError("density: unknown subcommand");
}

int cmd_metrics(const RunConfig& cfg, const std::string& sub) {
    Budget budget = make_budget(cfg);
    json j;
    j["schema_version"] = kSchemaVersion;
    if (sub == "constant-v") {
        j["value"] = constant_V(cfg.tol > 0 ? cfg.tol : 1e-8);
        write_text(cfg.out, j.dump(2) + "\n");
        return 0;
    }
    if (sub == "theorem-a") {
        j["value"] = theorem_a_constant();
        write_text(cfg.out, j.dump(2) + "\n");
        return 0;
    }
    if (sub == "c-of-t") {
        j["t"] = cfg.t_param;
        j["value"] = c_of_t(cfg.t_param, cfg.tol > 0 ? cfg.tol : 1e-9);
        write_text(cfg.out, j.dump(2) + "\n");
        return 0;
    }
    if (sub == "kl" || sub == "trimmed" || sub == "bernstein" || sub == "good-k") {
        if (cfg.depth < 1) throw UsageError("metrics: --depth must be >= 1");
        ConvergentTable t = ConvergentTable::expand(AlphaSpec::parse(cfg.alpha),
                                                    static_cast<int>(cfg.depth),
                                                    ExpandOptions{true, false, 0});
        if (sub == "kl") {
            j["value"] = khintchine_levy(t);
            j["reference"] = khintchine_levy_reference();
        } else if (sub == "trimmed") {
            j["value"] = trimmed_sum_ratio(t);
        } else if (sub == "bernstein") {
            j["count"] = bernstein_count(t, PsiSpec::parse(cfg.psi));
        } else {
            json ks = json::array();
            for (int k : find_good_K(t, PsiSpec::parse(cfg.psi), cfg.cbound)) ks.push_back(k);
            j["k"] = ks;
        }
        write_text(cfg.out, j.dump(2) + "\n");
        return 0;
    }
    if (sub == "max-period") {
        if (cfg.depth < 1) throw UsageError("metrics max-period: --depth must be >= 1");
        ConvergentTable t = table_for(cfg, static_cast<int>(cfg.depth));
        MaxOverPeriod r = max_over_period(t, t.depth(), cfg.threads, budget);
        j["max_log_p"] = fmt_ld(r.max_log_p);
        j["argmax"] = r.argmax;
        j["sum_a"] = r.sum_a;
        j["ratio"] = r.ratio;
        write_text(cfg.out, j.dump(2) + "\n");
        return 0;
    }
    if (sub == "variance") {
        if (cfg.depth < 1) throw UsageError("metrics variance: --depth must be >= 1");
        ConvergentTable t = table_for(cfg, static_cast<int>(cfg.depth));
        VarianceRatio r = variance_ratio(t, static_cast<std::uint64_t>(cfg.m), cfg.threads, budget);
        j["rms"] = r.rms;
        j["max_log_p"] = r.max_log_p;
        j["ratio"] = r.ratio;
        j["degenerate"] = r.degenerate;
        j["reference"] = r.reference;
        write_text(cfg.out, j.dump(2) + "\n");
        return 0;
    }
    if (sub == "ensemble") {
        if (cfg.depth < 1) throw UsageError("metrics ensemble: --depth must be >= 1");
        EnsembleResult r;
        if (cfg.kind == "kl")
            r = kl_ensemble(cfg.count, static_cast<int>(cfg.depth), cfg.seed, cfg.threads);
        else if (cfg.kind == "trimmed")
            r = trimmed_ensemble(cfg.count, static_cast<int>(cfg.depth), cfg.seed, cfg.threads);
        else
            throw UsageError("--kind must be kl or trimmed");
        std::ostringstream os;
        os << "# schema_version=" << kSchemaVersion << "\n";
        os << "index,seed,value\n";
        for (int i = 0; i < r.n; ++i)
            os << i << "," << (r.base_seed + i) << "," << fmt_double(r.values[i]) << "\n";
        write_text(cfg.out, os.str());
        json summary;
        summary["median"] = r.median;
        summary["n"] = r.n;
        summary["depth"] = r.depth;
        if (!cfg.out.empty()) std::fputs((summary.dump() + "\n").c_str(), stdout);
        return 0;
    }
    throw UsageError("metrics: unknown subcommand");
}

} // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    CLI::App app{"Sudler product laboratory"};
    app.require_subcommand(1);
    app.add_option("--threads", cfg.threads, "worker threads (output is thread-count invariant)");
    app.add_option("--precision-bits", cfg.precision_bits, "minimum working precision");

    auto add_common = [&](CLI::App* c) {
        c->add_option("--alpha", cfg.alpha, "alpha spec (golden|quadratic:..|cf:..|dec:..|random:..)");
        c->add_option("--depth", cfg.depth, "continued fraction depth K");
        c->add_option("--out", cfg.out, "output file (default stdout)");
        c->add_option("--budget", cfg.budget, "scan/evaluation budget");
        c->add_option("--rigor", cfg.rigor, "certified|fast|auto");
    };

    CLI::App* cf = app.add_subcommand("cf", "continued fraction table");
    add_common(cf);

    CLI::App* ost = app.add_subcommand("ostrowski", "Ostrowski numeration");
    CLI::App* ost_enc = ost->add_subcommand("encode");
    CLI::App* ost_dec = ost->add_subcommand("decode");
    CLI::App* ost_enum = ost->add_subcommand("enumerate");
    for (CLI::App* c : {ost_enc, ost_dec, ost_enum}) add_common(c);
    ost_enc->add_option("--n", cfg.n, "integer to encode")->check(CLI::Number);
    ost_dec->add_option("--digits", cfg.digits, "comma-separated digits b_0,b_1,...");
    ost_enum->add_option("--limit", cfg.limit, "maximum items to emit");

    CLI::App* sud = app.add_subcommand("sudler", "log P_N evaluation");
    CLI::App* sud_eval = sud->add_subcommand("eval");
    add_common(sud_eval);
    sud_eval->add_option("--n", cfg.n, "product length N")->check(CLI::Number);
    sud_eval->add_option("--method", cfg.method, "direct|decomposed");

    CLI::App* ver = app.add_subcommand("verify", "inequality checkers");
    add_common(ver);
    ver->add_option("--check", cfg.check, "eps|vk|prop12|lemma4");
    ver->add_option("--limit", cfg.limit, "exhaustive sweep cap");
    ver->add_option("--grid", cfg.grid, "vk grid size");
    ver->add_option("--cbound", cfg.cbound, "candidate constant");

    CLI::App* den = app.add_subcommand("density", "Theorem-A set scans");
    CLI::App* den_scan = den->add_subcommand("scan");
    CLI::App* den_prof = den->add_subcommand("profile");
    CLI::App* den_mk = den->add_subcommand("mk");
    CLI::App* den_flip = den->add_subcommand("flip");
    for (CLI::App* c : {den_scan, den_prof, den_mk, den_flip}) add_common(c);
    for (CLI::App* c : {den_scan, den_prof}) {
        c->add_option("--psi", cfg.psi, "psi spec (constant:c|power:s|linear:c|klogk:c|custom:..)");
        c->add_option("--from", cfg.from, "window start")->check(CLI::PositiveNumber);
        c->add_option("--to", cfg.to, "window end")->check(CLI::PositiveNumber);
    }
    den_prof->add_option("--checkpoints", cfg.checkpoints, "comma-separated increasing M values");
    den_mk->add_option("--delta", cfg.delta_band, "band parameter in (0, 1/2)");
    den_flip->add_option("--m", cfg.m, "window end M")->check(CLI::PositiveNumber);

    CLI::App* met = app.add_subcommand("metrics", "constants and metric statistics");
    std::vector<CLI::App*> met_subs;
    for (const char* name : {"constant-v", "theorem-a", "c-of-t", "kl", "trimmed", "bernstein",
                             "good-k", "max-period", "variance", "ensemble"})
        met_subs.push_back(met->add_subcommand(name));
    for (CLI::App* c : met_subs) add_common(c);
    met_subs[2]->add_option("--t", cfg.t_param, "argument t >= 0");
    for (CLI::App* c : {met_subs[0], met_subs[2]}) c->add_option("--tol", cfg.tol, "tolerance");
    for (CLI::App* c : {met_subs[5], met_subs[6]}) c->add_option("--psi", cfg.psi, "psi spec");
    met_subs[6]->add_option("--cbound", cfg.cbound, "trimmed-sum constant bound");
    met_subs[8]->add_option("--m", cfg.m, "window end M")->check(CLI::PositiveNumber);
    met_subs[9]->add_option("--kind", cfg.kind, "kl|trimmed");
    met_subs[9]->add_option("--n", cfg.count, "ensemble size")->check(CLI::PositiveNumber);
    met_subs[9]->add_option("--seed", cfg.seed, "base seed");

    bool dump_config = false;
    app.add_flag("--dump-config", dump_config, "print the canonical config line and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        json err;
        err["error"] = "UsageError";
        err["message"] = e.what();
        std::fputs((err.dump() + "\n").c_str(), stderr);
        return 2;
    }

    try {
        if (cfg.threads < 1) throw UsageError("--threads must be >= 1");
        std::string sub;
        if (*cf) {
            cfg.command = "cf";
        } else if (*ost) {
            for (const char* s : {"encode", "decode", "enumerate"})
                if (ost->get_subcommand(s)->parsed()) sub = s;
            if (sub.empty()) throw UsageError("ostrowski: need encode, decode or enumerate");
            cfg.command = "ostrowski " + sub;
        } else if (*sud) {
            cfg.command = "sudler eval";
        } else if (*ver) {
            cfg.command = "verify";
        } else if (*den) {
            for (const char* s : {"scan", "profile", "mk", "flip"})
                if (den->get_subcommand(s)->parsed()) sub = s;
            if (sub.empty()) throw UsageError("density: need scan, profile, mk or flip");
            cfg.command = "density " + sub;
        } else if (*met) {
            for (const char* s : {"constant-v", "theorem-a", "c-of-t", "kl", "trimmed", "bernstein",
                                  "good-k", "max-period", "variance", "ensemble"})
                if (met->get_subcommand(s)->parsed()) sub = s;
            if (sub.empty()) throw UsageError("metrics: unknown subcommand");
            cfg.command = "metrics " + sub;
        } else {
            throw UsageError("no subcommand given");
        }

        if (dump_config) {
            std::fputs((cfg.render() + "\n").c_str(), stdout);
            return 0;
        }
        if (*cf) return cmd_cf(cfg);
        if (*ost) return cmd_ostrowski(cfg, sub);
        if (*sud) return cmd_sudler_eval(cfg);
        if (*ver) return cmd_verify(cfg);
        if (*den) return cmd_density(cfg, sub);
        return cmd_metrics(cfg, sub);
    } catch (const std::exception& e) {
        json err;
        const std::exception* ep = &e;
        err["error"] = dynamic_cast<const UsageError*>(ep)                ? "UsageError"
                       : dynamic_cast<const PrecisionExhaustedError*>(ep) ? "PrecisionExhausted"
                       : dynamic_cast<const BudgetExceededError*>(ep)     ? "BudgetExceeded"
                       : dynamic_cast<const InvalidSpecError*>(ep)        ? "InvalidSpec"
                       : dynamic_cast<const SingularArgumentError*>(ep)   ? "SingularArgument"
                       : dynamic_cast<const InvalidDigitsError*>(ep)      ? "InvalidDigits"
                       : dynamic_cast<const OutOfRangeError*>(ep)         ? "OutOfRange"
                       : dynamic_cast<const EmptySetError*>(ep)           ? "EmptySet"
                       : dynamic_cast<const DomainError*>(ep)             ? "DomainError"
                                                                          : "Error";
        err["message"] = e.what();
        std::fputs((err.dump() + "\n").c_str(), stderr);
        return exit_code_for(e);
    }
}
