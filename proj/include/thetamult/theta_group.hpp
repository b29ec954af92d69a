#pragma once

// Finite combinatorics of the kernel group K = K(L^2)_1 = (+)_i Z_{2 d_i}.
//
// Elements are stored as integer vectors c with 0 <= c_i < 2 d_i; the group
// element is x = (2D)^{-1} c, its theta characteristic.  Subgroups used by
// the multiplication-map machinery:
//   2K_1   = { c : all c_i even },               order prod d_i
//   Z_2    = { D eps : eps in {0,1}^g },         order 2^g   (2-torsion)
//   Z_2'   = Z_2 cap 2K_1,                       order 2^{g-s}
//   W      = coordinate complement of Z_2' in Z_2, order 2^s
//   U      = transversal of Z_2 in K_1, c_i in {0..d_i-1}, order prod d_i
// with s = number of odd divisors.  All enumerations are lexicographic, all
// representatives canonical, so downstream matrices are deterministic.

#include <cstdint>
#include <string>
#include <vector>

#include "thetamult/av_core.hpp"

namespace thetamult {

struct GroupElement {
    std::vector<int> c;

    bool operator==(const GroupElement& o) const { return c == o.c; }
    bool operator<(const GroupElement& o) const { return c < o.c; }
    std::string to_string() const;
};

inline constexpr long long kDefaultEnumerationCap = 1'000'000;

GroupElement reduce_element(const PolarizationType& D, const std::vector<long long>& raw);
GroupElement add(const PolarizationType& D, const GroupElement& a, const GroupElement& b);
GroupElement subtract(const PolarizationType& D, const GroupElement& a, const GroupElement& b);
GroupElement negate(const PolarizationType& D, const GroupElement& a);

bool in_2K1(const GroupElement& x);
bool in_Z2prime(const PolarizationType& D, const GroupElement& x);

std::vector<GroupElement> enumerate_K1(const PolarizationType& D,
                                       long long size_cap = kDefaultEnumerationCap);
std::vector<GroupElement> subgroup_2K1(const PolarizationType& D);
std::vector<GroupElement> subgroup_Z2(const PolarizationType& D);
std::vector<GroupElement> subgroup_Z2prime(const PolarizationType& D);
std::vector<GroupElement> complement_W(const PolarizationType& D);
std::vector<GroupElement> transversal_U(const PolarizationType& D);

// Canonical u with 2u = x (u_i = c_i / 2); the full preimage is u + Z_2.
// NotHalvableError if some coordinate is odd.
GroupElement halve(const PolarizationType& D, const GroupElement& x);

// Character of Z_2', described by a sign per even-divisor coordinate.
class CharacterRho {
public:
    CharacterRho(const PolarizationType& D, std::vector<int> signs);

    // +-1; z must lie in Z_2'.
    int value(const GroupElement& z) const;

    const std::vector<int>& signs() const { return signs_; }
    bool trivial() const;
    std::string to_string() const;

private:
    std::vector<int> signs_;       // one per even-divisor coordinate
    std::vector<int> even_coords_;
    std::vector<int> divisors_;
};

std::vector<CharacterRho> characters_of_Z2prime(const PolarizationType& D);

// The pairing between ordered section-index pairs and (coset, difference
// class) keys.  For (x1,x2) in 2K_1 x 2K_1 we take y1 with 2 y1 = x1 + x2
// (canonical halve, so y1 lies in U), y2 = y1 - x2, and record
//   y = y1 (the U representative of the coset of any halve),
//   t = y2 reduced to the lexicographically smallest element of y2 + Z_2'.
// This key is constant on diagonal-Z_2' orbits of pairs; psi_pairing checks
// by enumeration that distinct orbits get distinct keys and that the count
// equals (prod d_i)^2 / 2^{g-s}.
struct PsiPairingEntry {
    GroupElement y;
    GroupElement t;
    GroupElement x1, x2;  // representative ordered pair
};

struct PsiPairing {
    std::vector<PsiPairingEntry> table;
    std::size_t domain_size = 0;  // number of diagonal orbits
    bool bijective = false;
};

// InjectivityOfPsiFailedError when two orbits collide on the same key.
PsiPairing psi_pairing(const PolarizationType& D);

} // namespace thetamult
