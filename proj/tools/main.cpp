#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include "symrank/chain_sim.hpp"
#include "symrank/concentration.hpp"
#include "symrank/parallel.hpp"
#include "symrank/report.hpp"
#include "symrank/rng.hpp"

namespace {

using namespace symrank;

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    const auto dots = s.find("..");
    if (dots != std::string::npos) {
        const int lo = std::stoi(s.substr(0, dots));
        const int hi = std::stoi(s.substr(dots + 2));
        if (hi < lo) throw std::invalid_argument("empty range '" + s + "'");
        for (int v = lo; v <= hi; ++v) out.push_back(v);
        return out;
    }
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
    if (out.empty()) throw std::invalid_argument("empty list '" + s + "'");
    return out;
}

struct Emitter {
    std::string output;  // empty -> stdout
    OutputFormat format = OutputFormat::Csv;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    void finish(const std::vector<AnyRecord>& records, RunManifest manifest) const {
        manifest.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const std::string table = render_table(records, format);
        const std::string mjson = manifest_to_json(manifest);
        if (output.empty()) {
            std::fputs(table.c_str(), stdout);
            std::fputs(mjson.c_str(), stderr);
        } else {
            write_file_atomic(output, table);
            write_file_atomic(output + ".manifest.json", mjson);
        }
    }
};

std::string fmt_u64(std::uint64_t v) { return std::to_string(v); }

int run_app(int argc, char** argv) {
    CLI::App app{"symrank: exact-arithmetic experiments on random symmetric 0/1 and +-1 matrices"};
    app.require_subcommand(1);

    // Shared option state (each subcommand binds the flags it uses).
    std::string n_spec, sizes_spec, dist_spec = "bernoulli01", output, format_spec = "csv";
    std::uint64_t seed = 0;
    bool seed_set = false;
    long long trials = 0;
    double epsilon = 0.1;
    int threads = 1;

    auto add_common = [&](CLI::App* cmd, bool with_dist = true) {
        cmd->add_option("--seed", seed, "master seed (required for randomized runs)")
            ->each([&](const std::string&) { seed_set = true; });
        cmd->add_option("--threads", threads, "worker threads (scheduling only; results identical)");
        cmd->add_option("--output", output, "output file (stdout when omitted)");
        cmd->add_option("--format", format_spec, "jsonl|csv");
        if (with_dist) {
            cmd->add_option("--dist", dist_spec, "bernoulli01|rademacher|custom:v:p,...");
        }
    };

    // survey
    auto* survey = app.add_subcommand("survey", "singularity probability / determinant growth survey");
    bool survey_exhaustive = false, no_logdet = false;
    add_common(survey);
    survey->add_option("--n", n_spec, "dimensions, e.g. 4,6,8 or 1..6")->required();
    survey->add_option("--trials", trials, "Monte Carlo trials per dimension");
    survey->add_flag("--exhaustive", survey_exhaustive, "enumerate all matrices exactly");
    survey->add_flag("--no-logdet", no_logdet, "skip the determinant growth statistic");

    // oracle
    auto* oracle = app.add_subcommand("oracle", "exhaustive ground-truth singular fractions");
    add_common(oracle);
    oracle->add_option("--n", n_spec, "dimensions, e.g. 1..6")->required();

    // chain
    auto* chain = app.add_subcommand("chain", "nested augmentation chains Q_1 in Q_2 in ...");
    int n_max = 10, classify_up_to = 16;
    long long n_chains = 1;
    std::string emit = "steps";
    add_common(chain);
    chain->add_option("--n-max", n_max, "chain length")->required();
    chain->add_option("--seeds", n_chains, "number of independent chains");
    chain->add_option("--epsilon", epsilon, "threshold exponent in (0,1)");
    chain->add_option("--classify-up-to", classify_up_to, "classify steps up to this dimension");
    chain->add_option("--emit", emit, "steps|increment-stats|x-decay");

    // classify
    auto* classify = app.add_subcommand("classify", "structural class frequencies of random Q_n");
    add_common(classify);
    classify->add_option("--n", n_spec, "dimensions")->required();
    classify->add_option("--trials", trials, "samples per dimension")->required();
    classify->add_option("--epsilon", epsilon, "threshold exponent in (0,1)");

    // concentration
    auto* conc = app.add_subcommand("concentration", "Littlewood-Offord concentration experiments");
    std::string family_name = "ones-offdiag";
    add_common(conc);
    conc->add_option("--family", family_name, "ones-offdiag|ones-linear|diagonal-only");
    conc->add_option("--sizes", sizes_spec, "form sizes, e.g. 4,8,16")->required();
    conc->add_option("--trials", trials, "Monte Carlo trials beyond the exact guard");

    // decoupling
    auto* dec = app.add_subcommand("decoupling", "decoupling inequality verification");
    std::string exhaustive_bits;
    int dec_k = 2;
    long long dec_events = 0;
    add_common(dec, /*with_dist=*/false);
    dec->add_option("--exhaustive-bits", exhaustive_bits,
                    "a,b: sweep all events on ({0,1}^a, {0,1}^b)");
    dec->add_option("--k", dec_k, "arity for random event spot checks (1-bit variables)");
    dec->add_option("--events", dec_events, "number of random events to check");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    Emitter emitter;
    emitter.output = output;
    emitter.format = parse_format(format_spec);

    const auto require_seed = [&](const char* cmd) {
        if (!seed_set) {
            throw std::invalid_argument(std::string(cmd) +
                                        ": --seed is required (no wall-clock default)");
        }
    };

    if (survey->parsed()) {
        const auto ns = parse_int_list(n_spec);
        const auto dist = EntryDistribution::parse(dist_spec);
        std::vector<SurveyRow> rows;
        if (survey_exhaustive) {
            for (int n : ns) rows.push_back(exhaustive_survey_row(n, dist));
        } else {
            require_seed("survey");
            if (trials < 1) throw std::invalid_argument("survey: --trials is required");
            rows = survey_singularity(ns, trials, dist, seed, threads, !no_logdet);
        }
        std::vector<AnyRecord> records(rows.begin(), rows.end());
        RunManifest m;
        m.command = "survey";
        m.config = {{"n", n_spec},
                    {"trials", std::to_string(trials)},
                    {"seed", seed_set ? fmt_u64(seed) : ""},
                    {"dist", dist.name()},
                    {"exhaustive", survey_exhaustive ? "1" : "0"},
                    {"logdet", no_logdet ? "0" : "1"},
                    {"threads", std::to_string(threads)},
                    {"format", format_spec}};
        for (const auto& r : rows) {
            m.total_trials += r.trials;
            m.summary.push_back({"p_hat_n" + std::to_string(r.n), rat_str(r.p_hat)});
        }
        emitter.finish(records, std::move(m));
        return 0;
    }

    if (oracle->parsed()) {
        const auto ns = parse_int_list(n_spec);
        const auto dist = EntryDistribution::parse(dist_spec);
        std::vector<AnyRecord> records;
        RunManifest m;
        m.command = "oracle";
        m.config = {{"n", n_spec}, {"dist", dist.name()}, {"format", format_spec}};
        for (int n : ns) {
            SurveyRow row = exhaustive_survey_row(n, dist);
            m.total_trials += row.trials;
            m.summary.push_back({"p_n" + std::to_string(n), rat_str(row.p_hat)});
            records.emplace_back(std::move(row));
        }
        emitter.finish(records, std::move(m));
        return 0;
    }

    if (chain->parsed()) {
        require_seed("chain");
        if (n_chains < 1) throw std::invalid_argument("chain: --seeds must be >= 1");
        const auto dist = EntryDistribution::parse(dist_spec);
        std::vector<ChainTrace> traces(n_chains);
        parallel_units(static_cast<std::uint64_t>(n_chains), threads, [&](std::uint64_t c) {
            traces[c] = run_chain(n_max, dist, derive_seed(seed, SeedDomain::ChainStep, c), epsilon,
                                  classify_up_to);
        });
        std::vector<AnyRecord> records;
        if (emit == "steps") {
            for (auto& r : chain_step_rows(traces)) records.emplace_back(std::move(r));
        } else if (emit == "increment-stats") {
            for (auto& r : inc_stat_rows(conditional_increment_stats(traces)))
                records.emplace_back(std::move(r));
        } else if (emit == "x-decay") {
            for (auto& r : x_decay_estimate(traces)) records.emplace_back(std::move(r));
        } else {
            throw std::invalid_argument("chain: unknown --emit '" + emit + "'");
        }
        RunManifest m;
        m.command = "chain";
        m.config = {{"n-max", std::to_string(n_max)},
                    {"seeds", std::to_string(n_chains)},
                    {"seed", fmt_u64(seed)},
                    {"dist", dist.name()},
                    {"epsilon", fmt_real(epsilon)},
                    {"classify-up-to", std::to_string(classify_up_to)},
                    {"emit", emit},
                    {"threads", std::to_string(threads)},
                    {"format", format_spec}};
        m.total_trials = n_chains;
        m.summary.push_back({"records", std::to_string(records.size())});
        emitter.finish(records, std::move(m));
        return 0;
    }

    if (classify->parsed()) {
        require_seed("classify");
        if (trials < 1) throw std::invalid_argument("classify: --trials must be >= 1");
        const auto ns = parse_int_list(n_spec);
        const auto dist = EntryDistribution::parse(dist_spec);
        std::vector<AnyRecord> records;
        RunManifest m;
        m.command = "classify";
        for (int n : ns) {
            const DegreeThreshold thr = compute_N(n, epsilon);
            constexpr long long kBlock = 1 << 10;
            const std::uint64_t blocks = static_cast<std::uint64_t>((trials + kBlock - 1) / kBlock);
            struct Partial {
                std::map<StructTag, long long> counts;
            };
            std::vector<Partial> partial(blocks);
            parallel_units(blocks, threads, [&](std::uint64_t b) {
                const long long lo = static_cast<long long>(b) * kBlock;
                const long long hi = std::min(trials, lo + kBlock);
                for (long long t = lo; t < hi; ++t) {
                    const std::uint64_t unit =
                        (static_cast<std::uint64_t>(n) << 40) ^ static_cast<std::uint64_t>(t);
                    const SymMatrix q =
                        sample_symmetric(n, dist, derive_seed(seed, SeedDomain::MatrixEntries, unit));
                    const RankCertificate cert = certify_rank(q, default_primes());
                    ++partial[b].counts[classify_with_rank(q, thr, cert.rank).tag];
                }
            });
            std::map<StructTag, long long> counts;
            for (const auto& p : partial)
                for (const auto& [tag, c] : p.counts) counts[tag] += c;
            const long long singular = counts[StructTag::SingularNormal] + counts[StructTag::SingularAbnormal];
            const long long nonsingular =
                counts[StructTag::NonsingularPerfect] + counts[StructTag::NonsingularImperfect];
            for (const StructTag tag : {StructTag::SingularNormal, StructTag::SingularAbnormal,
                                        StructTag::NonsingularPerfect, StructTag::NonsingularImperfect}) {
                const long long group = (tag == StructTag::SingularNormal || tag == StructTag::SingularAbnormal)
                                            ? singular
                                            : nonsingular;
                ClassifyRow row;
                row.n = n;
                row.cls = to_string(tag);
                row.count = counts[tag];
                row.group_total = group;
                row.freq = group > 0 ? static_cast<double>(counts[tag]) / static_cast<double>(group) : 0.0;
                row.se = group > 0 ? std::sqrt(std::max(0.0, row.freq * (1 - row.freq)) /
                                               static_cast<double>(group))
                                   : 0.0;
                records.emplace_back(std::move(row));
            }
            m.summary.push_back(
                {"singular_n" + std::to_string(n),
                 std::to_string(singular) + "/" + std::to_string(trials)});
        }
        m.config = {{"n", n_spec},          {"trials", std::to_string(trials)},
                    {"seed", fmt_u64(seed)}, {"dist", dist.name()},
                    {"epsilon", fmt_real(epsilon)}, {"threads", std::to_string(threads)},
                    {"format", format_spec}};
        m.total_trials = trials * static_cast<long long>(ns.size());
        emitter.finish(records, std::move(m));
        return 0;
    }

    if (conc->parsed()) {
        require_seed("concentration");
        const auto sizes = parse_int_list(sizes_spec);
        const auto dist = EntryDistribution::parse(dist_spec);
        const auto family = family_by_name(family_name);
        const auto reports = lo_experiment(family, sizes, trials, seed, dist, threads);
        std::vector<AnyRecord> records(reports.begin(), reports.end());
        RunManifest m;
        m.command = "concentration";
        m.config = {{"family", family_name},       {"sizes", sizes_spec},
                    {"trials", std::to_string(trials)}, {"seed", fmt_u64(seed)},
                    {"dist", dist.name()},         {"threads", std::to_string(threads)},
                    {"format", format_spec}};
        for (const auto& r : reports) {
            m.total_trials += r.trials;
            m.summary.push_back({"atom_m" + std::to_string(r.size), fmt_real(r.estimate)});
        }
        emitter.finish(records, std::move(m));
        return 0;
    }

    if (dec->parsed()) {
        std::vector<AnyRecord> records;
        RunManifest m;
        m.command = "decoupling";
        if (!exhaustive_bits.empty()) {
            const auto bits = parse_int_list(exhaustive_bits);
            if (bits.size() != 2) throw std::invalid_argument("--exhaustive-bits wants two values a,b");
            const int a = bits[0], b = bits[1];
            const int base_bits = a + b;
            // 2^(2^(a+b)) events: the full sweep is only enumerable up to 4 base bits.
            if (base_bits > 4) throw GuardError("decoupling sweep guarded at a+b <= 4 bits");
            const std::vector<FiniteVar> vars = {FiniteVar::uniform_bits(a), FiniteVar::uniform_bits(b)};
            const std::uint64_t n_events = std::uint64_t{1} << (std::uint64_t{1} << base_bits);
            long long violations = 0;
            double min_slack = std::numeric_limits<double>::infinity();
            constexpr std::uint64_t kBlock = 1 << 12;
            const std::uint64_t blocks = (n_events + kBlock - 1) / kBlock;
            std::vector<long long> viols(blocks, 0);
            std::vector<double> slack(blocks, std::numeric_limits<double>::infinity());
            parallel_units(blocks, threads, [&](std::uint64_t blk) {
                const std::uint64_t lo = blk * kBlock;
                const std::uint64_t hi = std::min(n_events, lo + kBlock);
                for (std::uint64_t ev = lo; ev < hi; ++ev) {
                    const auto res = decoupling_check(
                        vars, [&](std::span<const long long> z) -> bool {
                            const std::uint64_t idx = static_cast<std::uint64_t>(z[0]) +
                                                      (static_cast<std::uint64_t>(z[1]) << a);
                            return (ev >> idx) & 1;
                        });
                    if (!res.holds) ++viols[blk];
                    Rat lhs_pow = res.p_event;
                    for (int i = 0; i < res.k; ++i) lhs_pow *= lhs_pow;
                    slack[blk] = std::min(slack[blk], Rat(res.p_joint - lhs_pow).get_d());
                }
            });
            for (std::uint64_t blk = 0; blk < blocks; ++blk) {
                violations += viols[blk];
                min_slack = std::min(min_slack, slack[blk]);
            }
            DecouplingRow row{"exhaustive-bits " + std::to_string(a) + "x" + std::to_string(b), 2,
                              static_cast<long long>(n_events), violations, min_slack};
            records.emplace_back(row);
            m.config = {{"exhaustive-bits", exhaustive_bits},
                        {"threads", std::to_string(threads)},
                        {"format", format_spec}};
            m.total_trials = static_cast<long long>(n_events);
            m.summary.push_back({"events", std::to_string(n_events)});
            m.summary.push_back({"all_hold", violations == 0 ? "true" : "false"});
            std::fprintf(stderr, "%s %llu events hold\n", violations == 0 ? "all" : "NOT all",
                         static_cast<unsigned long long>(n_events));
        } else {
            require_seed("decoupling");
            if (dec_events < 1) throw std::invalid_argument("decoupling: --events must be >= 1");
            if (dec_k < 1 || dec_k > 6) throw std::invalid_argument("decoupling: --k must be in 1..6");
            std::vector<FiniteVar> vars(dec_k, FiniteVar::uniform_bits(1));
            const int base = 1 << dec_k;
            Rng rng(derive_seed(seed, SeedDomain::FormGen, 0));
            long long violations = 0;
            double min_slack = std::numeric_limits<double>::infinity();
            for (long long e = 0; e < dec_events; ++e) {
                const std::uint64_t mask = rng.below(std::uint64_t{1} << base);
                const auto res =
                    decoupling_check(vars, [&](std::span<const long long> z) -> bool {
                        std::uint64_t idx = 0;
                        for (int i = 0; i < dec_k; ++i) idx |= static_cast<std::uint64_t>(z[i]) << i;
                        return (mask >> idx) & 1;
                    });
                if (!res.holds) ++violations;
                Rat lhs_pow = res.p_event;
                for (int i = 0; i < res.k; ++i) lhs_pow *= lhs_pow;
                min_slack = std::min(min_slack, Rat(res.p_joint - lhs_pow).get_d());
            }
            DecouplingRow row{"random events k=" + std::to_string(dec_k), dec_k, dec_events,
                              violations, min_slack};
            records.emplace_back(row);
            m.config = {{"k", std::to_string(dec_k)},
                        {"events", std::to_string(dec_events)},
                        {"seed", fmt_u64(seed)},
                        {"format", format_spec}};
            m.total_trials = dec_events;
            m.summary.push_back({"all_hold", violations == 0 ? "true" : "false"});
        }
        emitter.finish(records, std::move(m));
        return 0;
    }

    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_app(argc, argv);
    } catch (const symrank::GuardError& e) {
        std::fprintf(stderr, "guard violation: %s\n", e.what());
        return 3;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
