#include "symrank/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "symrank/parallel.hpp"
#include "symrank/rng.hpp"

namespace symrank {

namespace {

using i128 = __int128;

Int int_from_i128(i128 v) {
    const bool neg = v < 0;
    unsigned __int128 u = neg ? static_cast<unsigned __int128>(-v) : static_cast<unsigned __int128>(v);
    Int hi(static_cast<unsigned long>(u >> 64));
    Int out = (hi << 64) + Int(static_cast<unsigned long>(u));
    return neg ? Int(-out) : out;
}

Rat rat_of(const Int& num, const Int& den) {
    Rat q(Rat(num) / Rat(den));
    q.canonicalize();
    return q;
}

/// Form with coefficients scaled to integers over a common denominator, with
/// an __int128 fast path validated against a precomputed magnitude bound.
struct CompiledForm {
    int nvars = 0;
    Int scale = 1;
    std::vector<std::vector<int>> idx;
    std::vector<Int> num;
    std::vector<long long> num_i64;
    bool i64_ok = false;

    static CompiledForm compile(const PolyForm& f, long long max_abs_atom) {
        CompiledForm c;
        c.nvars = f.nvars;
        for (const auto& [tuple, coeff] : f.terms) {
            mpz_lcm(c.scale.get_mpz_t(), c.scale.get_mpz_t(), coeff.get_den().get_mpz_t());
        }
        long double bound = 0;
        const long double atom_pow = std::pow(static_cast<long double>(std::max(1LL, max_abs_atom)),
                                              static_cast<long double>(f.degree));
        bool fits = true;
        for (const auto& [tuple, coeff] : f.terms) {
            Int n = coeff.get_num() * (c.scale / coeff.get_den());
            c.idx.push_back(tuple);
            fits = fits && n.fits_slong_p();
            if (fits) {
                c.num_i64.push_back(n.get_si());
                bound += std::fabs(static_cast<long double>(n.get_si())) * atom_pow;
            }
            c.num.push_back(std::move(n));
        }
        c.i64_ok = fits && bound < std::ldexp(1.0L, 120);
        if (!c.i64_ok) c.num_i64.clear();
        return c;
    }

    i128 eval_i128(std::span<const long long> z) const {
        i128 acc = 0;
        for (std::size_t t = 0; t < idx.size(); ++t) {
            i128 prod = num_i64[t];
            for (int v : idx[t]) {
                if (z[v] == 0) {
                    prod = 0;
                    break;
                }
                prod *= z[v];
            }
            acc += prod;
        }
        return acc;
    }

    Int eval_big(std::span<const long long> z) const {
        Int acc = 0;
        for (std::size_t t = 0; t < idx.size(); ++t) {
            Int prod = num[t];
            for (int v : idx[t]) prod *= to_int(z[v]);
            acc += prod;
        }
        return acc;
    }

    Int eval_scaled(std::span<const long long> z) const {
        if (i64_ok) return int_from_i128(eval_i128(z));
        return eval_big(z);
    }
};

long long max_abs_atom(const EntryDistribution& dist) {
    long long m = 0;
    for (const auto& a : dist.atoms()) m = std::max(m, std::llabs(a.value));
    return m;
}

/// Mixed-radix counter over atom indices; returns false after the last one.
bool advance(std::vector<int>& digits, int radix) {
    for (std::size_t i = 0; i < digits.size(); ++i) {
        if (++digits[i] < radix) return true;
        digits[i] = 0;
    }
    return false;
}

double binom_se(double p, long long trials) {
    return trials > 0 ? std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(trials)) : 0.0;
}

}  // namespace

PolyForm PolyForm::from_terms(int degree, int nvars,
                              std::vector<std::pair<std::vector<int>, Rat>> terms) {
    if (degree < 1) throw std::invalid_argument("degree must be >= 1");
    if (nvars < 0) throw std::invalid_argument("negative variable count");
    for (auto& [tuple, coeff] : terms) {
        if (static_cast<int>(tuple.size()) != degree) throw std::invalid_argument("tuple arity != degree");
        for (int v : tuple) {
            if (v < 0 || v >= nvars) throw std::invalid_argument("index out of range");
        }
    }
    std::sort(terms.begin(), terms.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < terms.size(); ++i) {
        if (terms[i].first == terms[i - 1].first) throw std::invalid_argument("duplicate index tuple");
    }
    PolyForm f;
    f.degree = degree;
    f.nvars = nvars;
    f.terms = std::move(terms);
    return f;
}

Rat PolyForm::eval(std::span<const long long> z) const {
    if (static_cast<int>(z.size()) != nvars) throw std::invalid_argument("eval: wrong arity");
    Rat acc = 0;
    for (const auto& [tuple, coeff] : terms) {
        Int prod = 1;
        for (int v : tuple) prod *= to_int(z[v]);
        acc += coeff * Rat(prod);
    }
    return acc;
}

Interval Interval::half_open(Rat left, Rat length) {
    if (length < 0) throw std::invalid_argument("interval length must be >= 0");
    return Interval{std::move(left), std::move(length)};
}

std::string Interval::str() const {
    if (length == 0) return "{" + rat_str(left) + "}";
    return "[" + rat_str(left) + "," + rat_str(left + length) + ")";
}

std::string to_string(Method m) {
    switch (m) {
        case Method::ExactDP:
            return "exact_dp";
        case Method::ExactEnum:
            return "exact_enum";
        case Method::MonteCarlo:
            return "monte_carlo";
    }
    return "?";
}

Rat atom_linear_exact(const LinearForm& f, const Interval& interval, const EntryDistribution& dist) {
    const int n = static_cast<int>(f.coeffs.size());
    if (n < 1) throw std::invalid_argument("linear form needs at least one coefficient");
    const bool integral = std::all_of(f.coeffs.begin(), f.coeffs.end(), is_integer);
    if (!integral && n > 24) {
        throw GuardError("atom_linear_exact: non-integer coefficients need n <= 24; use Monte Carlo");
    }
    Int scale = 1;
    for (const Rat& c : f.coeffs) mpz_lcm(scale.get_mpz_t(), scale.get_mpz_t(), c.get_den().get_mpz_t());
    std::vector<Int> coeff(n);
    for (int i = 0; i < n; ++i) coeff[i] = f.coeffs[i].get_num() * (scale / f.coeffs[i].get_den());

    // Dynamic program over achievable (scaled) sums.
    std::map<Int, Rat> states;
    states[Int(0)] = 1;
    for (int i = 0; i < n; ++i) {
        std::map<Int, Rat> next;
        for (const auto& [v, p] : states) {
            for (const auto& atom : dist.atoms()) {
                next[v + coeff[i] * to_int(atom.value)] += p * atom.prob;
            }
        }
        states.swap(next);
        if (states.size() > (std::size_t{1} << 22)) {
            throw GuardError("atom_linear_exact: sum distribution too large");
        }
    }
    Rat total = 0;
    for (const auto& [v, p] : states) {
        if (interval.contains(rat_of(v, scale))) total += p;
    }
    return total;
}

Rat erdos_bound(int k) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    Rat q(binomial(static_cast<unsigned>(k), static_cast<unsigned>(k / 2)), pow2(static_cast<unsigned>(k)));
    q.canonicalize();
    return q;
}

namespace detail {

ValueDist value_distribution(const PolyForm& f, const EntryDistribution& dist,
                             std::uint64_t outcome_guard) {
    const int n = f.nvars;
    const int radix = static_cast<int>(dist.atoms().size());
    const long double total_ld = std::pow(static_cast<long double>(radix), static_cast<long double>(n));
    if (total_ld > static_cast<long double>(outcome_guard)) {
        throw GuardError("value_distribution: outcome space exceeds enumeration guard");
    }
    const CompiledForm cf = CompiledForm::compile(f, max_abs_atom(dist));

    ValueDist out;
    out.scale = cf.scale;
    std::vector<int> digits(n, 0);
    std::vector<long long> z(n, n > 0 ? dist.atoms()[0].value : 0);
    if (dist.uniform()) {
        std::map<Int, long long> counts;
        long long total = 0;
        do {
            for (int i = 0; i < n; ++i) z[i] = dist.atoms()[digits[i]].value;
            ++counts[cf.eval_scaled(z)];
            ++total;
        } while (n > 0 && advance(digits, radix));
        for (const auto& [v, c] : counts) out.prob[v] = rat_of(to_int(c), to_int(total));
    } else {
        do {
            Rat p = 1;
            for (int i = 0; i < n; ++i) {
                z[i] = dist.atoms()[digits[i]].value;
                p *= dist.atoms()[digits[i]].prob;
            }
            out.prob[cf.eval_scaled(z)] += p;
        } while (n > 0 && advance(digits, radix));
    }
    return out;
}

}  // namespace detail

namespace {

struct McCounts {
    std::map<Int, long long> counts;
    long long trials = 0;
};

/// Seeded, block-parallel sampling of the scaled form value distribution.
/// Blocks are merged in index order; counts are integers, so the totals are
/// independent of scheduling.
McCounts mc_value_counts(const PolyForm& f, const EntryDistribution& dist, long long trials,
                         std::uint64_t seed, int threads, std::uint64_t stream_tag) {
    const CompiledForm cf = CompiledForm::compile(f, max_abs_atom(dist));
    constexpr long long kBlock = 1 << 14;
    const std::uint64_t blocks = static_cast<std::uint64_t>((trials + kBlock - 1) / kBlock);
    std::vector<McCounts> partial(blocks);
    parallel_units(blocks, threads, [&](std::uint64_t b) {
        const long long lo = static_cast<long long>(b) * kBlock;
        const long long hi = std::min(trials, lo + kBlock);
        Rng rng(derive_seed(seed, SeedDomain::MonteCarloBlock, (stream_tag << 32) ^ b));
        std::vector<long long> z(f.nvars);
        auto& mine = partial[b];
        for (long long t = lo; t < hi; ++t) {
            for (int i = 0; i < f.nvars; ++i) z[i] = dist.sample(rng);
            ++mine.counts[cf.eval_scaled(z)];
            ++mine.trials;
        }
    });
    McCounts out;
    for (const auto& p : partial) {
        out.trials += p.trials;
        for (const auto& [v, c] : p.counts) out.counts[v] += c;
    }
    return out;
}

}  // namespace

ConcentrationReport atom_poly(const PolyForm& f, const Interval& interval,
                              const EntryDistribution& dist, Method method, const MonteCarloMode& mc,
                              int threads) {
    ConcentrationReport rep;
    rep.form = "poly[deg=" + std::to_string(f.degree) + ",n=" + std::to_string(f.nvars) + "]";
    rep.interval = interval.str();
    rep.size = f.nvars;
    rep.method = method;
    rep.bound = std::numeric_limits<double>::quiet_NaN();
    switch (method) {
        case Method::ExactDP:
            throw std::invalid_argument("atom_poly: DP applies to linear forms only");
        case Method::ExactEnum: {
            const auto vd = detail::value_distribution(f, dist, std::uint64_t{1} << 24);
            Rat total = 0;
            for (const auto& [v, p] : vd.prob) {
                if (interval.contains(rat_of(v, vd.scale))) total += p;
            }
            rep.exact = true;
            rep.prob = total;
            rep.estimate = total.get_d();
            return rep;
        }
        case Method::MonteCarlo: {
            if (mc.trials < 1) throw std::invalid_argument("atom_poly: Monte Carlo needs trials >= 1");
            const CompiledForm cf = CompiledForm::compile(f, max_abs_atom(dist));
            constexpr long long kBlock = 1 << 14;
            const std::uint64_t blocks = static_cast<std::uint64_t>((mc.trials + kBlock - 1) / kBlock);
            std::vector<long long> hits(blocks, 0);
            parallel_units(blocks, threads, [&](std::uint64_t b) {
                const long long lo = static_cast<long long>(b) * kBlock;
                const long long hi = std::min(mc.trials, lo + kBlock);
                Rng rng(derive_seed(mc.seed, SeedDomain::MonteCarloBlock, b));
                std::vector<long long> z(f.nvars);
                long long h = 0;
                for (long long t = lo; t < hi; ++t) {
                    for (int i = 0; i < f.nvars; ++i) z[i] = dist.sample(rng);
                    if (interval.contains(rat_of(cf.eval_scaled(z), cf.scale))) ++h;
                }
                hits[b] = h;
            });
            const long long total = std::accumulate(hits.begin(), hits.end(), 0LL);
            rep.exact = false;
            rep.trials = mc.trials;
            rep.estimate = static_cast<double>(total) / static_cast<double>(mc.trials);
            rep.stderr_ = binom_se(rep.estimate, mc.trials);
            return rep;
        }
    }
    throw std::logic_error("unreachable");
}

double quad_lo_bound(int s_size, std::span<const int> d_values, double c) {
    if (s_size < 1) throw std::invalid_argument("quad_lo_bound: |S| must be >= 1");
    if (static_cast<int>(d_values.size()) != s_size) {
        throw std::invalid_argument("quad_lo_bound: d_values must have |S| entries");
    }
    double sum = 0;
    for (int d : d_values) {
        if (d < 1) throw std::invalid_argument("quad_lo_bound: every d_i must be >= 1");
        sum += 1.0 / std::sqrt(static_cast<double>(d));
    }
    const double s = static_cast<double>(s_size);
    return c * std::pow(1.0 / std::sqrt(s) + sum / s, 0.25);
}

Rat poly_lo_exponent(int k) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    const unsigned e = static_cast<unsigned>((static_cast<long long>(k) * k + k) / 2);
    Rat q(Int(1), pow2(e));
    q.canonicalize();
    return q;
}

FiniteVar FiniteVar::uniform_bits(int bits) {
    if (bits < 0 || bits > 20) throw std::invalid_argument("uniform_bits: bits out of range");
    FiniteVar v;
    const long long n = 1LL << bits;
    for (long long x = 0; x < n; ++x) v.atoms.push_back({x, Rat(Rat(1) / to_rat(n))});
    for (auto& a : v.atoms) a.second.canonicalize();
    return v;
}

void FiniteVar::validate() const {
    if (atoms.empty()) throw std::invalid_argument("variable with empty support");
    Rat sum = 0;
    for (const auto& [v, p] : atoms) {
        if (p <= 0) throw std::invalid_argument("atom probabilities must be positive");
        sum += p;
    }
    if (sum != 1) throw std::invalid_argument("atom probabilities must sum to 1");
}

double DecouplingResult::rhs_root() const {
    return std::pow(p_joint.get_d(), 1.0 / std::ldexp(1.0, k));
}

DecouplingResult decoupling_check(std::span<const FiniteVar> vars,
                                  const std::function<bool(std::span<const long long>)>& event,
                                  std::uint64_t outcome_guard) {
    const int k = static_cast<int>(vars.size());
    if (k < 1 || k > 16) throw std::invalid_argument("decoupling_check: arity out of range");
    for (const auto& v : vars) v.validate();

    std::uint64_t base = 1;
    std::vector<std::uint64_t> stride(k);
    for (int i = 0; i < k; ++i) {
        stride[i] = base;
        const std::uint64_t s = vars[i].atoms.size();
        if (base > outcome_guard / s) throw GuardError("decoupling_check: outcome space exceeds guard");
        base *= s;
    }
    if (base > (std::uint64_t{1} << 20) || base * base > outcome_guard) {
        throw GuardError("decoupling_check: replicated outcome space exceeds guard");
    }

    // Tabulate the event and outcome probabilities over the base space.
    std::vector<char> table(base);
    std::vector<Rat> pr(base);
    std::vector<long long> z(k);
    for (std::uint64_t o = 0; o < base; ++o) {
        Rat p = 1;
        std::uint64_t rem = o;
        for (int i = 0; i < k; ++i) {
            const auto& atom = vars[i].atoms[rem % vars[i].atoms.size()];
            rem /= vars[i].atoms.size();
            z[i] = atom.first;
            p *= atom.second;
        }
        table[o] = event(z) ? 1 : 0;
        pr[o] = p;
    }

    DecouplingResult res;
    res.k = k;
    res.p_event = 0;
    for (std::uint64_t o = 0; o < base; ++o) {
        if (table[o]) res.p_event += pr[o];
    }

    // Enumerate (originals, primes) pairs; the conjunction ranges over all
    // 2^k subset selections between the two copies.
    std::vector<std::vector<int>> digits(base, std::vector<int>(k));
    for (std::uint64_t o = 0; o < base; ++o) {
        std::uint64_t rem = o;
        for (int i = 0; i < k; ++i) {
            digits[o][i] = static_cast<int>(rem % vars[i].atoms.size());
            rem /= vars[i].atoms.size();
        }
    }
    res.p_joint = 0;
    const std::uint64_t selections = std::uint64_t{1} << k;
    for (std::uint64_t o = 0; o < base; ++o) {
        for (std::uint64_t o2 = 0; o2 < base; ++o2) {
            bool all = true;
            for (std::uint64_t sel = 0; sel < selections && all; ++sel) {
                std::uint64_t mixed = 0;
                for (int i = 0; i < k; ++i) {
                    mixed += stride[i] *
                             static_cast<std::uint64_t>(((sel >> i) & 1) ? digits[o][i] : digits[o2][i]);
                }
                all = table[mixed] != 0;
            }
            if (all) res.p_joint += pr[o] * pr[o2];
        }
    }

    Rat lhs_pow = res.p_event;
    for (int i = 0; i < k; ++i) lhs_pow *= lhs_pow;  // p_event^(2^k)
    res.holds = lhs_pow <= res.p_joint;
    return res;
}

PolyForm all_ones_offdiag_form(int m) {
    std::vector<std::pair<std::vector<int>, Rat>> terms;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            if (i != j) terms.push_back({{i, j}, Rat(1)});
    return PolyForm::from_terms(2, m, std::move(terms));
}

PolyForm all_ones_linear_form(int k) {
    std::vector<std::pair<std::vector<int>, Rat>> terms;
    for (int i = 0; i < k; ++i) terms.push_back({{i}, Rat(1)});
    return PolyForm::from_terms(1, k, std::move(terms));
}

PolyForm diagonal_only_form(int m) {
    std::vector<std::pair<std::vector<int>, Rat>> terms;
    for (int i = 0; i < m; ++i) terms.push_back({{i, i}, Rat(1)});
    return PolyForm::from_terms(2, m, std::move(terms));
}

FormFamily family_by_name(const std::string& name) {
    if (name == "ones-offdiag") return {name, all_ones_offdiag_form};
    if (name == "ones-linear") return {name, all_ones_linear_form};
    if (name == "diagonal-only") return {name, diagonal_only_form};
    throw std::invalid_argument("unknown form family '" + name + "'");
}

namespace {

/// Greedy partition mirroring the proof of the quadratic corollary: U_1 is
/// the top half of the rows by large-coefficient degree, S the rows of U_1
/// with at least one large coefficient into U_2.
struct QuadHypothesis {
    bool met = false;
    int s_size = 0;
    std::vector<int> d_values;
};

QuadHypothesis quad_hypothesis(const PolyForm& f) {
    QuadHypothesis h;
    if (f.degree != 2) return h;
    const int n = f.nvars;
    std::vector<std::vector<char>> large(n, std::vector<char>(n, 0));
    for (const auto& [tuple, coeff] : f.terms) {
        if (tuple[0] != tuple[1] && (coeff >= 1 || coeff <= -1)) large[tuple[0]][tuple[1]] = 1;
    }
    std::vector<int> deg(n, 0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) deg[i] += large[i][j];
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return deg[a] > deg[b]; });
    std::vector<int> u;
    for (int i : order)
        if (deg[i] >= 1) u.push_back(i);
    if (u.empty()) return h;
    const int half = (static_cast<int>(u.size()) + 1) / 2;
    std::vector<char> in_u1(n, 0);
    for (int t = 0; t < half; ++t) in_u1[u[t]] = 1;
    for (int t = 0; t < half; ++t) {
        const int i = u[t];
        int d = 0;
        for (int j = 0; j < n; ++j)
            if (!in_u1[j] && large[i][j]) ++d;
        if (d >= 1) {
            ++h.s_size;
            h.d_values.push_back(d);
        }
    }
    h.met = h.s_size >= 1;
    return h;
}

int linear_large_count(const PolyForm& f) {
    int k = 0;
    for (const auto& [tuple, coeff] : f.terms) {
        if (coeff >= 1 || coeff <= -1) ++k;
    }
    return k;
}

}  // namespace

std::vector<ConcentrationReport> lo_experiment(const FormFamily& family, std::span<const int> sizes,
                                               long long trials, std::uint64_t seed,
                                               const EntryDistribution& dist, int threads,
                                               std::uint64_t exact_guard) {
    std::vector<ConcentrationReport> out;
    std::vector<double> shapes;
    for (const int m : sizes) {
        const PolyForm f = family.make(m);
        ConcentrationReport rep;
        rep.form = family.name + "[m=" + std::to_string(m) + "]";
        rep.interval = "max-atom";
        rep.size = m;

        const long double outcomes = std::pow(static_cast<long double>(dist.atoms().size()),
                                              static_cast<long double>(f.nvars));
        if (outcomes <= static_cast<long double>(exact_guard)) {
            const auto vd = detail::value_distribution(f, dist, exact_guard);
            rep.method = Method::ExactEnum;
            rep.exact = true;
            Rat best = 0;
            Int best_v = 0;
            for (const auto& [v, p] : vd.prob) {
                if (p > best) {
                    best = p;
                    best_v = v;
                }
            }
            rep.prob = best;
            rep.estimate = best.get_d();
            rep.atom_value = rat_str(rat_of(best_v, vd.scale));
        } else {
            const auto counts = mc_value_counts(f, dist, trials, seed, threads,
                                                static_cast<std::uint64_t>(m));
            rep.method = Method::MonteCarlo;
            rep.trials = counts.trials;
            long long best = -1;
            Int best_v = 0;
            for (const auto& [v, c] : counts.counts) {
                if (c > best) {
                    best = c;
                    best_v = v;
                }
            }
            const CompiledForm cf = CompiledForm::compile(f, max_abs_atom(dist));
            rep.estimate = static_cast<double>(best) / static_cast<double>(counts.trials);
            rep.stderr_ = binom_se(rep.estimate, counts.trials);
            rep.atom_value = rat_str(rat_of(best_v, cf.scale));
        }

        double shape = std::numeric_limits<double>::quiet_NaN();
        if (f.degree == 1) {
            const int k = linear_large_count(f);
            rep.hypothesis_met = k >= 1;
            if (rep.hypothesis_met) shape = erdos_bound(k).get_d();
        } else if (f.degree == 2) {
            const auto h = quad_hypothesis(f);
            rep.hypothesis_met = h.met;
            if (h.met) shape = quad_lo_bound(h.s_size, h.d_values, 1.0);
        } else {
            const int count = linear_large_count(f);
            const double denom = std::pow(static_cast<double>(f.nvars), f.degree - 1);
            const double m_eff = denom > 0 ? count / denom : 0;
            rep.hypothesis_met = m_eff >= 1;
            if (rep.hypothesis_met) {
                shape = std::pow(m_eff, -poly_lo_exponent(f.degree).get_d());
            }
        }
        shapes.push_back(shape);
        rep.bound = shape;  // rescaled below once the fit constant is known
        out.push_back(std::move(rep));
    }

    // Fit the bound constant at the first size whose hypothesis is met.
    double fit_c = 1.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i].hypothesis_met && std::isfinite(shapes[i]) && shapes[i] > 0) {
            fit_c = out[i].estimate / shapes[i];
            break;
        }
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i].hypothesis_met) out[i].bound = fit_c * shapes[i];
    }
    return out;
}

}  // namespace symrank
