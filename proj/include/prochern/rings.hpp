#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "prochern/errors.hpp"

namespace prochern::rings {

using Int = boost::multiprecision::cpp_int;

// ---------------------------------------------------------------------------
// Rat: exact rational, canonical form (reduced, positive denominator).
// ---------------------------------------------------------------------------
class Rat {
public:
  Rat() : num_(0), den_(1) {}
  Rat(Int n) : num_(std::move(n)), den_(1) {} // NOLINT: implicit from Int
  Rat(long long n) : num_(n), den_(1) {}      // NOLINT
  Rat(Int n, Int d);

  const Int& num() const { return num_; }
  const Int& den() const { return den_; }
  bool is_zero() const { return num_ == 0; }

  Rat operator-() const;
  friend Rat operator+(const Rat& a, const Rat& b);
  friend Rat operator-(const Rat& a, const Rat& b);
  friend Rat operator*(const Rat& a, const Rat& b);
  friend Rat operator/(const Rat& a, const Rat& b); // throws DomainError on /0
  friend bool operator==(const Rat& a, const Rat& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const Rat& a, const Rat& b) { return !(a == b); }
  friend bool operator<(const Rat& a, const Rat& b) {
    return a.num_ * b.den_ < b.num_ * a.den_;
  }

  Rat abs() const { return num_ < 0 ? -*this : *this; }

  // Canonical rendering "num/den", denominator always printed.
  std::string str() const;

private:
  Int num_;
  Int den_; // > 0, coprime to num_
};

// base^exp as an exact rational; exp may be negative (base must be nonzero).
Rat int_pow(const Int& base, long long exp);

// ---------------------------------------------------------------------------
// AtomTable: the declared atomic variety classes and their Euler numbers.
// `L` is always present with euler 1; the unit class `1` is not a variable.
// ---------------------------------------------------------------------------
class AtomTable;
using AtomTablePtr = std::shared_ptr<const AtomTable>;

class AtomTable {
public:
  struct Entry {
    std::string symbol;
    Int euler;
  };

  // Validates uniqueness, inserts L (euler 1) if absent, rejects `1` as a
  // symbol and rejects L with euler != 1.
  static AtomTablePtr make(std::vector<Entry> entries);

  const std::vector<Entry>& entries() const { return entries_; }
  bool contains(const std::string& symbol) const;
  // Euler number of an atom; DomainError for unknown symbols.
  const Int& euler(const std::string& symbol) const;

  friend bool operator==(const AtomTable& a, const AtomTable& b);

private:
  explicit AtomTable(std::vector<Entry> entries) : entries_(std::move(entries)) {}
  std::vector<Entry> entries_;
};

bool same_table(const AtomTablePtr& a, const AtomTablePtr& b);
void require_same_table(const AtomTablePtr& a, const AtomTablePtr& b,
                        const char* what);

// ---------------------------------------------------------------------------
// Monomial: finite multiset of atom symbols.  Factors are kept sorted by
// symbol; monomials compare lexicographically on the (symbol, exponent)
// sequence, which puts the empty monomial (the unit) first.
// ---------------------------------------------------------------------------
class Monomial {
public:
  Monomial() = default;
  // Builds from possibly unsorted, possibly repeated factors; exponents must
  // be positive after merging.
  static Monomial make(std::vector<std::pair<std::string, int>> factors);
  static Monomial atom(const std::string& symbol) { return make({{symbol, 1}}); }

  const std::vector<std::pair<std::string, int>>& factors() const { return factors_; }
  bool is_unit() const { return factors_.empty(); }
  int degree() const;

  Monomial operator*(const Monomial& other) const;
  friend bool operator==(const Monomial& a, const Monomial& b) {
    return a.factors_ == b.factors_;
  }
  friend bool operator<(const Monomial& a, const Monomial& b) {
    return a.factors_ < b.factors_;
  }

  std::string str() const; // "E*L^2"; the unit renders as "1"

private:
  std::vector<std::pair<std::string, int>> factors_;
};

// ---------------------------------------------------------------------------
// GClass: element of the modeled Grothendieck ring, a polynomial over Z in
// the declared atoms.  Canonical form: sorted monomials, no zero coefficient.
// ---------------------------------------------------------------------------
class GClass {
public:
  GClass() = default; // zero over no table; usable only after assignment

  static GClass zero(AtomTablePtr table);
  static GClass unit(AtomTablePtr table) { return constant(std::move(table), 1); }
  static GClass constant(AtomTablePtr table, Int c);
  static GClass atom(AtomTablePtr table, const std::string& symbol);
  static GClass of_monomial(AtomTablePtr table, Monomial m, Int c = 1);

  const AtomTablePtr& table() const { return table_; }
  const std::map<Monomial, Int>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_unit() const;
  // True when the class is a single monomial with coefficient one.
  bool is_plain_monomial() const;

  GClass operator+(const GClass& b) const;
  GClass operator-(const GClass& b) const;
  GClass operator-() const;
  GClass operator*(const GClass& b) const;
  GClass scale(const Int& c) const;
  GClass pow(unsigned e) const;

  friend bool operator==(const GClass& a, const GClass& b);
  friend bool operator!=(const GClass& a, const GClass& b) { return !(a == b); }

  // Total order used to keep localization denominators canonical.
  static int compare(const GClass& a, const GClass& b);

  std::string str() const;

private:
  AtomTablePtr table_;
  std::map<Monomial, Int> terms_;
};

inline GClass gclass_add(const GClass& a, const GClass& b) { return a + b; }
inline GClass gclass_mul(const GClass& a, const GClass& b) { return a * b; }
inline bool gclass_eq(const GClass& a, const GClass& b) { return a == b; }

// The ring morphism sending each atom to its declared Euler number.  Every
// symbol of `a` must appear in `table`.
Int chi_hom(const GClass& a, const AtomTable& table);
inline Int chi_hom(const GClass& a) { return chi_hom(a, *a.table()); }

// ---------------------------------------------------------------------------
// MultSet: a finitely generated multiplicative set of declared denominator
// classes.  Generators are nonzero; the unit is dropped.  Localizing at a
// finite generator list sidesteps zero-divisor questions that would arise
// with the full non-zero-divisor set.
// ---------------------------------------------------------------------------
class MultSet {
public:
  static std::shared_ptr<const MultSet> make(std::vector<GClass> generators);
  const std::vector<GClass>& generators() const { return gens_; }
  bool contains(const GClass& g) const;

private:
  explicit MultSet(std::vector<GClass> gens) : gens_(std::move(gens)) {}
  std::vector<GClass> gens_;
};

using MultSetPtr = std::shared_ptr<const MultSet>;

// ---------------------------------------------------------------------------
// LocClass: numerator / monomial-in-F fraction.  Equality is by
// cross-multiplication, sound because the model ring is a domain.
// ---------------------------------------------------------------------------
class LocClass {
public:
  LocClass() = default;
  // Denominator exponent list; generators are deduplicated, unit generators
  // dropped, zero generators rejected.
  static LocClass make(GClass num,
                       std::vector<std::pair<GClass, unsigned>> den = {});
  // Same, but every denominator generator must belong to `declared`.
  static LocClass make_in(GClass num,
                          std::vector<std::pair<GClass, unsigned>> den,
                          const MultSet& declared);

  const GClass& num() const { return num_; }
  const std::vector<std::pair<GClass, unsigned>>& den() const { return den_; }
  bool den_is_unit() const { return den_.empty(); }
  GClass den_expanded() const;
  bool is_zero() const { return num_.is_zero(); }

  // Multiply by generator^exp (exp may be negative: multiplies numerator).
  LocClass shift_by(const GClass& generator, int exp) const;

  std::string str() const;

private:
  GClass num_;
  std::vector<std::pair<GClass, unsigned>> den_;
};

LocClass loc_add(const LocClass& a, const LocClass& b);
LocClass loc_mul(const LocClass& a, const LocClass& b);
bool loc_eq(const LocClass& a, const LocClass& b);

// ---------------------------------------------------------------------------
// LimitTermSeq: finite element of the inductive limit of Z --p--> Z chains,
// with either one multiplier p for every step or a per-step list p_1, p_2...
// ---------------------------------------------------------------------------
struct LimitTermSeq {
  // (level k >= 1, integer value m_k)
  std::vector<std::pair<int, Int>> terms;
  // Single p, or the list (p_1, p_2, ...); p_0 := 1 is implicit.
  std::variant<Int, std::vector<Int>> multipliers = Int(1);
  // Shift w of the non-canonical isomorphism Phi_w.
  int shift = 0;
};

// Phi_w(sum_k rho^k(m_k)) = sum_k m_k / p^(k-1+w).  Requires the single
// multiplier form; p = 0 raises ZeroMultiplierError.
Rat phi_w(const LimitTermSeq& s);

// Psi(sum_n rho^n(r_n)) = sum_n r_n / (p_0 p_1 ... p_{n-1}) with p_0 := 1.
// A single multiplier is treated as a constant list.
Rat psi_limit(const LimitTermSeq& s);

} // namespace prochern::rings
