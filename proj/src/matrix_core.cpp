#include "symrank/matrix_core.hpp"

#include <algorithm>
#include <sstream>

namespace symrank {

EntryDistribution::EntryDistribution(Tag tag, std::vector<Atom> atoms) : tag_(tag), atoms_(std::move(atoms)) {
    if (atoms_.size() < 2) throw std::invalid_argument("distribution needs at least two atoms");
    Rat sum = 0;
    Int den_lcm = 1;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        if (atoms_[i].prob <= 0) throw std::invalid_argument("atom probabilities must be positive");
        for (std::size_t j = i + 1; j < atoms_.size(); ++j) {
            if (atoms_[i].value == atoms_[j].value) throw std::invalid_argument("duplicate atom value");
        }
        sum += atoms_[i].prob;
        mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), atoms_[i].prob.get_den().get_mpz_t());
    }
    if (sum != 1) throw std::invalid_argument("atom probabilities must sum exactly to 1");
    if (!den_lcm.fits_ulong_p()) throw std::invalid_argument("probability denominators too large to sample exactly");
    common_den_ = den_lcm.get_ui();
    std::uint64_t cum = 0;
    for (const Atom& a : atoms_) {
        Int num = a.prob.get_num() * (den_lcm / a.prob.get_den());
        cum += num.get_ui();
        cum_num_.push_back(cum);
    }
    uniform_ = std::all_of(atoms_.begin(), atoms_.end(),
                           [&](const Atom& a) { return a.prob == atoms_.front().prob; });
}

EntryDistribution EntryDistribution::bernoulli01() {
    return EntryDistribution(Tag::Bernoulli01, {{0, make_rat(1, 2)}, {1, make_rat(1, 2)}});
}

EntryDistribution EntryDistribution::rademacher() {
    return EntryDistribution(Tag::Rademacher, {{-1, make_rat(1, 2)}, {1, make_rat(1, 2)}});
}

EntryDistribution EntryDistribution::custom(std::vector<Atom> atoms) {
    return EntryDistribution(Tag::Custom, std::move(atoms));
}

EntryDistribution EntryDistribution::parse(const std::string& spec) {
    if (spec == "bernoulli01") return bernoulli01();
    if (spec == "rademacher") return rademacher();
    const std::string prefix = "custom:";
    if (spec.rfind(prefix, 0) == 0) {
        std::vector<Atom> atoms;
        std::stringstream ss(spec.substr(prefix.size()));
        std::string item;
        while (std::getline(ss, item, ',')) {
            auto colon = item.find(':');
            if (colon == std::string::npos) throw std::invalid_argument("bad atom '" + item + "', want v:p");
            long long v = std::stoll(item.substr(0, colon));
            atoms.push_back({v, parse_rat(item.substr(colon + 1))});
        }
        return custom(std::move(atoms));
    }
    throw std::invalid_argument("unknown distribution '" + spec + "'");
}

std::string EntryDistribution::name() const {
    switch (tag_) {
        case Tag::Bernoulli01:
            return "bernoulli01";
        case Tag::Rademacher:
            return "rademacher";
        case Tag::Custom: {
            std::string s = "custom:";
            for (std::size_t i = 0; i < atoms_.size(); ++i) {
                if (i) s += ",";
                s += std::to_string(atoms_[i].value) + ":" + rat_str(atoms_[i].prob);
            }
            return s;
        }
    }
    return "?";
}

Rat EntryDistribution::max_atom() const {
    Rat m = atoms_.front().prob;
    for (const Atom& a : atoms_) m = std::max(m, a.prob);
    return m;
}

bool EntryDistribution::is_atom(long long v) const {
    return std::any_of(atoms_.begin(), atoms_.end(), [&](const Atom& a) { return a.value == v; });
}

long long EntryDistribution::sample(Rng& rng) const {
    const std::uint64_t r = rng.below(common_den_);
    for (std::size_t i = 0; i < cum_num_.size(); ++i) {
        if (r < cum_num_[i]) return atoms_[i].value;
    }
    return atoms_.back().value;  // unreachable: cum_num_ ends at common_den_
}

Rat rho_of(const EntryDistribution& dist) { return dist.max_atom(); }

SymMatrix SymMatrix::from_rows(const std::vector<std::vector<long long>>& rows) {
    const int n = static_cast<int>(rows.size());
    SymMatrix m(n);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(rows[i].size()) != n) throw std::invalid_argument("ragged rows");
        for (int j = 0; j < n; ++j) {
            if (rows[j][i] != rows[i][j]) throw std::invalid_argument("rows are not symmetric");
            m.e_[static_cast<std::size_t>(i) * n + j] = rows[i][j];
        }
    }
    return m;
}

bool SymMatrix::is_symmetric() const {
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < i; ++j)
            if (at(i, j) != at(j, i)) return false;
    return true;
}

SymMatrix sample_symmetric(int n, const EntryDistribution& dist, std::uint64_t seed) {
    return sample_symmetric(n, dist, dist, seed);
}

SymMatrix sample_symmetric(int n, const EntryDistribution& offdiag, const EntryDistribution& diag,
                           std::uint64_t seed) {
    if (n < 0) throw std::invalid_argument("negative dimension");
    SymMatrix m(n);
    Rng rng(seed);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            m.set_sym(i, j, (i == j ? diag : offdiag).sample(rng));
        }
    }
    return m;
}

AugmentationVector sample_augmentation(int n, const EntryDistribution& dist, std::uint64_t seed) {
    if (n < 0) throw std::invalid_argument("negative dimension");
    AugmentationVector v;
    v.border.resize(n);
    Rng rng(seed);
    for (int i = 0; i < n; ++i) v.border[i] = dist.sample(rng);
    v.corner = dist.sample(rng);
    return v;
}

SymMatrix augment(const SymMatrix& a, const AugmentationVector& v) {
    const int n = a.dim();
    if (static_cast<int>(v.border.size()) != n) {
        throw std::invalid_argument("border length does not match matrix dimension");
    }
    SymMatrix out(n + 1);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) out.set_sym(i, j, a.at(i, j));
        out.set_sym(i, n, v.border[i]);
    }
    out.set_sym(n, n, v.corner);
    return out;
}

}  // namespace symrank
