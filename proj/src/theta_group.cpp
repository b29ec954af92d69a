#include "thetamult/theta_group.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace thetamult {

std::string GroupElement::to_string() const {
    std::string out = "(";
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(c[i]);
    }
    out += ")";
    return out;
}

namespace {

int positive_mod(long long v, int m) {
    long long r = v % m;
    if (r < 0) r += m;
    return static_cast<int>(r);
}

void check_genus(const PolarizationType& D, const GroupElement& x) {
    if (static_cast<int>(x.c.size()) != D.genus())
        throw Error("group element length " + std::to_string(x.c.size()) +
                    " does not match genus " + std::to_string(D.genus()));
}

// Lexicographic product enumeration over per-coordinate candidate lists.
std::vector<GroupElement> product_enumeration(const std::vector<std::vector<int>>& choices) {
    std::vector<GroupElement> out;
    std::size_t total = 1;
    for (const auto& ch : choices) total *= ch.size();
    out.reserve(total);
    std::vector<std::size_t> idx(choices.size(), 0);
    while (true) {
        GroupElement e;
        e.c.resize(choices.size());
        for (std::size_t i = 0; i < choices.size(); ++i) e.c[i] = choices[i][idx[i]];
        out.push_back(std::move(e));
        std::size_t pos = choices.size();
        while (pos > 0) {
            --pos;
            if (++idx[pos] < choices[pos].size()) break;
            idx[pos] = 0;
            if (pos == 0) return out;
        }
    }
}

} // namespace

GroupElement reduce_element(const PolarizationType& D, const std::vector<long long>& raw) {
    if (static_cast<int>(raw.size()) != D.genus())
        throw Error("raw vector length does not match genus");
    GroupElement e;
    e.c.resize(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i)
        e.c[i] = positive_mod(raw[i], 2 * D.divisor(static_cast<int>(i)));
    return e;
}

GroupElement add(const PolarizationType& D, const GroupElement& a, const GroupElement& b) {
    check_genus(D, a);
    check_genus(D, b);
    std::vector<long long> raw(a.c.size());
    for (std::size_t i = 0; i < a.c.size(); ++i)
        raw[i] = static_cast<long long>(a.c[i]) + b.c[i];
    return reduce_element(D, raw);
}

GroupElement subtract(const PolarizationType& D, const GroupElement& a, const GroupElement& b) {
    check_genus(D, a);
    check_genus(D, b);
    std::vector<long long> raw(a.c.size());
    for (std::size_t i = 0; i < a.c.size(); ++i)
        raw[i] = static_cast<long long>(a.c[i]) - b.c[i];
    return reduce_element(D, raw);
}

GroupElement negate(const PolarizationType& D, const GroupElement& a) {
    check_genus(D, a);
    std::vector<long long> raw(a.c.size());
    for (std::size_t i = 0; i < a.c.size(); ++i) raw[i] = -static_cast<long long>(a.c[i]);
    return reduce_element(D, raw);
}

bool in_2K1(const GroupElement& x) {
    for (int ci : x.c)
        if (ci % 2 != 0) return false;
    return true;
}

bool in_Z2prime(const PolarizationType& D, const GroupElement& x) {
    for (int i = 0; i < D.genus(); ++i) {
        const int d = D.divisor(i);
        if (x.c[static_cast<std::size_t>(i)] == 0) continue;
        if (d % 2 == 1) return false;                       // odd coordinate must be 0
        if (x.c[static_cast<std::size_t>(i)] != d) return false;
    }
    return true;
}

std::vector<GroupElement> enumerate_K1(const PolarizationType& D, long long size_cap) {
    long long total = D.section_count_level2();
    if (total > size_cap)
        throw SizeLimitError("K(L^2)_1 has " + std::to_string(total) +
                             " elements, above the cap " + std::to_string(size_cap));
    std::vector<std::vector<int>> choices(static_cast<std::size_t>(D.genus()));
    for (int i = 0; i < D.genus(); ++i) {
        for (int v = 0; v < 2 * D.divisor(i); ++v) choices[static_cast<std::size_t>(i)].push_back(v);
    }
    return product_enumeration(choices);
}

std::vector<GroupElement> subgroup_2K1(const PolarizationType& D) {
    std::vector<std::vector<int>> choices(static_cast<std::size_t>(D.genus()));
    for (int i = 0; i < D.genus(); ++i) {
        for (int v = 0; v < 2 * D.divisor(i); v += 2) choices[static_cast<std::size_t>(i)].push_back(v);
    }
    return product_enumeration(choices);
}

std::vector<GroupElement> subgroup_Z2(const PolarizationType& D) {
    std::vector<std::vector<int>> choices(static_cast<std::size_t>(D.genus()));
    for (int i = 0; i < D.genus(); ++i) {
        choices[static_cast<std::size_t>(i)] = {0, D.divisor(i)};
    }
    return product_enumeration(choices);
}

std::vector<GroupElement> subgroup_Z2prime(const PolarizationType& D) {
    std::vector<std::vector<int>> choices(static_cast<std::size_t>(D.genus()));
    for (int i = 0; i < D.genus(); ++i) {
        if (D.divisor(i) % 2 == 0)
            choices[static_cast<std::size_t>(i)] = {0, D.divisor(i)};
        else
            choices[static_cast<std::size_t>(i)] = {0};
    }
    return product_enumeration(choices);
}

std::vector<GroupElement> complement_W(const PolarizationType& D) {
    std::vector<std::vector<int>> choices(static_cast<std::size_t>(D.genus()));
    for (int i = 0; i < D.genus(); ++i) {
        if (D.divisor(i) % 2 == 1)
            choices[static_cast<std::size_t>(i)] = {0, D.divisor(i)};
        else
            choices[static_cast<std::size_t>(i)] = {0};
    }
    return product_enumeration(choices);
}

std::vector<GroupElement> transversal_U(const PolarizationType& D) {
    std::vector<std::vector<int>> choices(static_cast<std::size_t>(D.genus()));
    for (int i = 0; i < D.genus(); ++i) {
        for (int v = 0; v < D.divisor(i); ++v) choices[static_cast<std::size_t>(i)].push_back(v);
    }
    return product_enumeration(choices);
}

GroupElement halve(const PolarizationType& D, const GroupElement& x) {
    check_genus(D, x);
    GroupElement u;
    u.c.resize(x.c.size());
    for (std::size_t i = 0; i < x.c.size(); ++i) {
        if (x.c[i] % 2 != 0)
            throw NotHalvableError("coordinate " + std::to_string(i) + " of " + x.to_string() +
                                   " is odd");
        u.c[i] = x.c[i] / 2;
    }
    return u;
}

CharacterRho::CharacterRho(const PolarizationType& D, std::vector<int> signs)
    : signs_(std::move(signs)) {
    for (int i = 0; i < D.genus(); ++i) {
        divisors_.push_back(D.divisor(i));
        if (D.divisor(i) % 2 == 0) even_coords_.push_back(i);
    }
    if (signs_.size() != even_coords_.size())
        throw Error("character needs one sign per even divisor");
    for (int s : signs_)
        if (s != 1 && s != -1) throw Error("character signs must be +-1");
}

int CharacterRho::value(const GroupElement& z) const {
    if (z.c.size() != divisors_.size()) throw Error("character argument has wrong genus");
    int v = 1;
    for (std::size_t i = 0; i < z.c.size(); ++i) {
        const int d = divisors_[i];
        const int ci = z.c[i];
        if (ci == 0) continue;
        if (d % 2 == 1 || ci != d)
            throw Error("element " + z.to_string() + " is not in Z_2'");
        const auto pos = std::find(even_coords_.begin(), even_coords_.end(), static_cast<int>(i));
        v *= signs_[static_cast<std::size_t>(pos - even_coords_.begin())];
    }
    return v;
}

bool CharacterRho::trivial() const {
    return std::all_of(signs_.begin(), signs_.end(), [](int s) { return s == 1; });
}

std::string CharacterRho::to_string() const {
    std::string out = "[";
    for (std::size_t i = 0; i < signs_.size(); ++i) {
        if (i) out += ",";
        out += (signs_[i] == 1 ? "+" : "-");
    }
    out += "]";
    return out;
}

std::vector<CharacterRho> characters_of_Z2prime(const PolarizationType& D) {
    int n_even = D.genus() - D.odd_count();
    std::vector<CharacterRho> out;
    out.reserve(1u << n_even);
    for (long long mask = 0; mask < (1LL << n_even); ++mask) {
        std::vector<int> signs(static_cast<std::size_t>(n_even), 1);
        for (int b = 0; b < n_even; ++b)
            if (mask & (1LL << b)) signs[static_cast<std::size_t>(b)] = -1;
        out.emplace_back(D, std::move(signs));
    }
    return out;
}

namespace {

GroupElement z2prime_class_rep(const PolarizationType& D, const GroupElement& t,
                               const std::vector<GroupElement>& z2p) {
    GroupElement best = t;
    for (const auto& z : z2p) {
        GroupElement cand = add(D, t, z);
        if (cand < best) best = cand;
    }
    return best;
}

} // namespace

PsiPairing psi_pairing(const PolarizationType& D) {
    const auto twoK1 = subgroup_2K1(D);
    const auto z2p = subgroup_Z2prime(D);

    // Diagonal Z_2' orbits of ordered pairs, keyed by lex-min orbit member.
    std::set<std::pair<GroupElement, GroupElement>> seen;
    std::map<std::pair<GroupElement, GroupElement>, PsiPairingEntry> keys;
    PsiPairing result;

    for (const auto& x1 : twoK1) {
        for (const auto& x2 : twoK1) {
            std::pair<GroupElement, GroupElement> orbit_rep{x1, x2};
            for (const auto& z : z2p) {
                std::pair<GroupElement, GroupElement> cand{add(D, x1, z), add(D, x2, z)};
                if (cand < orbit_rep) orbit_rep = cand;
            }
            if (!seen.insert(orbit_rep).second) continue;

            const GroupElement y1 = halve(D, add(D, x1, x2));
            const GroupElement y2 = subtract(D, y1, x2);
            PsiPairingEntry entry;
            entry.y = y1;  // canonical halve lies in U
            entry.t = z2prime_class_rep(D, y2, z2p);
            entry.x1 = orbit_rep.first;
            entry.x2 = orbit_rep.second;

            auto key = std::make_pair(entry.y, entry.t);
            if (keys.count(key)) {
                throw InjectivityOfPsiFailedError(
                    "pairs " + keys[key].x1.to_string() + "x" + keys[key].x2.to_string() + " and " +
                    entry.x1.to_string() + "x" + entry.x2.to_string() +
                    " map to the same key (y=" + entry.y.to_string() + ", t=" +
                    entry.t.to_string() + ")");
            }
            keys[key] = entry;
        }
    }

    result.domain_size = seen.size();
    for (auto& kv : keys) result.table.push_back(kv.second);

    const long long n = D.section_count();
    const long long expected = n * n / (1LL << (D.genus() - D.odd_count()));
    result.bijective = (static_cast<long long>(result.domain_size) == expected) &&
                       (keys.size() == seen.size());
    if (!result.bijective) {
        throw InjectivityOfPsiFailedError("orbit count " + std::to_string(result.domain_size) +
                                          " does not match expected " + std::to_string(expected));
    }
    return result;
}

} // namespace thetamult
