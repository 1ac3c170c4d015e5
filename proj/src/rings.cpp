#include "prochern/rings.hpp"

#include <algorithm>
#include <sstream>

namespace prochern::rings {

namespace {

Int gcd(Int a, Int b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    Int t = a % b;
    a = std::move(b);
    b = std::move(t);
  }
  return a;
}

} // namespace

// --- Rat -------------------------------------------------------------------

Rat::Rat(Int n, Int d) {
  if (d == 0) throw DomainError("rational with zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  Int g = gcd(n, d);
  if (g > 1) {
    n /= g;
    d /= g;
  }
  num_ = std::move(n);
  den_ = std::move(d);
}

Rat Rat::operator-() const {
  Rat r;
  r.num_ = -num_;
  r.den_ = den_;
  return r;
}

Rat operator+(const Rat& a, const Rat& b) {
  return Rat(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
}

Rat operator-(const Rat& a, const Rat& b) {
  return Rat(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
}

Rat operator*(const Rat& a, const Rat& b) {
  return Rat(a.num_ * b.num_, a.den_ * b.den_);
}

Rat operator/(const Rat& a, const Rat& b) {
  if (b.is_zero()) throw DomainError("division by zero rational");
  return Rat(a.num_ * b.den_, a.den_ * b.num_);
}

std::string Rat::str() const {
  std::ostringstream os;
  os << num_ << "/" << den_;
  return os.str();
}

Rat int_pow(const Int& base, long long exp) {
  if (exp == 0) return Rat(1);
  if (base == 0) {
    if (exp < 0) throw DomainError("negative power of zero");
    return Rat(0);
  }
  Int p = 1;
  long long e = exp < 0 ? -exp : exp;
  Int b = base;
  while (e > 0) {
    if (e & 1) p *= b;
    b *= b;
    e >>= 1;
  }
  return exp < 0 ? Rat(Int(1), p) : Rat(p);
}

// --- AtomTable ---------------------------------------------------------------

AtomTablePtr AtomTable::make(std::vector<Entry> entries) {
  bool has_L = false;
  for (size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    if (e.symbol.empty()) throw DomainError("empty atom symbol");
    if (e.symbol == "1")
      throw DomainError("'1' is the ring unit, not an atom");
    for (size_t j = 0; j < i; ++j)
      if (entries[j].symbol == e.symbol)
        throw DomainError("duplicate atom symbol: " + e.symbol);
    if (e.symbol == "L") {
      if (e.euler != 1) throw DomainError("euler(L) must be 1");
      has_L = true;
    }
  }
  if (!has_L) entries.push_back({"L", Int(1)});
  return AtomTablePtr(new AtomTable(std::move(entries)));
}

bool AtomTable::contains(const std::string& symbol) const {
  for (const auto& e : entries_)
    if (e.symbol == symbol) return true;
  return false;
}

const Int& AtomTable::euler(const std::string& symbol) const {
  for (const auto& e : entries_)
    if (e.symbol == symbol) return e.euler;
  throw DomainError("unknown atom symbol: " + symbol);
}

bool operator==(const AtomTable& a, const AtomTable& b) {
  if (a.entries_.size() != b.entries_.size()) return false;
  for (size_t i = 0; i < a.entries_.size(); ++i)
    if (a.entries_[i].symbol != b.entries_[i].symbol ||
        a.entries_[i].euler != b.entries_[i].euler)
      return false;
  return true;
}

bool same_table(const AtomTablePtr& a, const AtomTablePtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}

void require_same_table(const AtomTablePtr& a, const AtomTablePtr& b,
                        const char* what) {
  if (!same_table(a, b))
    throw MismatchError(std::string("mismatched atom tables in ") + what);
}

// --- Monomial ----------------------------------------------------------------

Monomial Monomial::make(std::vector<std::pair<std::string, int>> factors) {
  std::sort(factors.begin(), factors.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  Monomial m;
  for (auto& [sym, exp] : factors) {
    if (exp == 0) continue;
    if (exp < 0) throw DomainError("negative exponent in monomial");
    if (!m.factors_.empty() && m.factors_.back().first == sym)
      m.factors_.back().second += exp;
    else
      m.factors_.emplace_back(sym, exp);
  }
  return m;
}

int Monomial::degree() const {
  int d = 0;
  for (const auto& [sym, exp] : factors_) d += exp;
  return d;
}

Monomial Monomial::operator*(const Monomial& other) const {
  std::vector<std::pair<std::string, int>> merged = factors_;
  merged.insert(merged.end(), other.factors_.begin(), other.factors_.end());
  return make(std::move(merged));
}

std::string Monomial::str() const {
  if (factors_.empty()) return "1";
  std::string out;
  for (size_t i = 0; i < factors_.size(); ++i) {
    if (i) out += "*";
    out += factors_[i].first;
    if (factors_[i].second != 1)
      out += "^" + std::to_string(factors_[i].second);
  }
  return out;
}

// --- GClass ------------------------------------------------------------------

GClass GClass::zero(AtomTablePtr table) {
  GClass g;
  g.table_ = std::move(table);
  return g;
}

GClass GClass::constant(AtomTablePtr table, Int c) {
  GClass g = zero(std::move(table));
  if (c != 0) g.terms_.emplace(Monomial{}, std::move(c));
  return g;
}

GClass GClass::atom(AtomTablePtr table, const std::string& symbol) {
  if (!table->contains(symbol))
    throw DomainError("unknown atom symbol: " + symbol);
  GClass g = zero(std::move(table));
  g.terms_.emplace(Monomial::atom(symbol), Int(1));
  return g;
}

GClass GClass::of_monomial(AtomTablePtr table, Monomial m, Int c) {
  for (const auto& [sym, exp] : m.factors())
    if (!table->contains(sym))
      throw DomainError("unknown atom symbol: " + sym);
  GClass g = zero(std::move(table));
  if (c != 0) g.terms_.emplace(std::move(m), std::move(c));
  return g;
}

bool GClass::is_unit() const {
  return terms_.size() == 1 && terms_.begin()->first.is_unit() &&
         terms_.begin()->second == 1;
}

bool GClass::is_plain_monomial() const {
  return terms_.size() == 1 && terms_.begin()->second == 1;
}

GClass GClass::operator+(const GClass& b) const {
  require_same_table(table_, b.table_, "gclass_add");
  GClass out = *this;
  for (const auto& [m, c] : b.terms_) {
    auto it = out.terms_.find(m);
    if (it == out.terms_.end()) {
      out.terms_.emplace(m, c);
    } else {
      it->second += c;
      if (it->second == 0) out.terms_.erase(it);
    }
  }
  return out;
}

GClass GClass::operator-() const {
  GClass out = *this;
  for (auto& [m, c] : out.terms_) c = -c;
  return out;
}

GClass GClass::operator-(const GClass& b) const { return *this + (-b); }

GClass GClass::operator*(const GClass& b) const {
  require_same_table(table_, b.table_, "gclass_mul");
  GClass out = zero(table_);
  for (const auto& [ma, ca] : terms_) {
    for (const auto& [mb, cb] : b.terms_) {
      Monomial m = ma * mb;
      Int c = ca * cb;
      auto it = out.terms_.find(m);
      if (it == out.terms_.end()) {
        out.terms_.emplace(std::move(m), std::move(c));
      } else {
        it->second += c;
        if (it->second == 0) out.terms_.erase(it);
      }
    }
  }
  return out;
}

GClass GClass::scale(const Int& c) const {
  GClass out = zero(table_);
  if (c == 0) return out;
  for (const auto& [m, coeff] : terms_) out.terms_.emplace(m, coeff * c);
  return out;
}

GClass GClass::pow(unsigned e) const {
  GClass out = unit(table_);
  for (unsigned i = 0; i < e; ++i) out = out * *this;
  return out;
}

bool operator==(const GClass& a, const GClass& b) {
  require_same_table(a.table_, b.table_, "gclass_eq");
  return a.terms_ == b.terms_;
}

int GClass::compare(const GClass& a, const GClass& b) {
  auto ia = a.terms_.begin(), ib = b.terms_.begin();
  for (; ia != a.terms_.end() && ib != b.terms_.end(); ++ia, ++ib) {
    if (ia->first < ib->first) return -1;
    if (ib->first < ia->first) return 1;
    if (ia->second < ib->second) return -1;
    if (ib->second < ia->second) return 1;
  }
  if (ia != a.terms_.end()) return 1;
  if (ib != b.terms_.end()) return -1;
  return 0;
}

std::string GClass::str() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [m, c] : terms_) {
    Int a = c < 0 ? Int(-c) : c;
    if (first) {
      if (c < 0) os << "-";
      first = false;
    } else {
      os << (c < 0 ? " - " : " + ");
    }
    if (m.is_unit()) {
      os << a;
    } else {
      if (a != 1) os << a << "*";
      os << m.str();
    }
  }
  return os.str();
}

Int chi_hom(const GClass& a, const AtomTable& table) {
  Int total = 0;
  for (const auto& [m, c] : a.terms()) {
    Int v = c;
    for (const auto& [sym, exp] : m.factors()) {
      const Int& e = table.euler(sym);
      for (int i = 0; i < exp; ++i) v *= e;
    }
    total += v;
  }
  return total;
}

// --- MultSet -----------------------------------------------------------------

MultSetPtr MultSet::make(std::vector<GClass> generators) {
  std::vector<GClass> gens;
  for (auto& g : generators) {
    if (g.is_zero())
      throw DomainError("zero polynomial declared as denominator atom");
    if (g.is_unit()) continue;
    bool dup = false;
    for (const auto& h : gens)
      if (h == g) dup = true;
    if (!dup) gens.push_back(std::move(g));
  }
  std::sort(gens.begin(), gens.end(), [](const GClass& a, const GClass& b) {
    return GClass::compare(a, b) < 0;
  });
  return MultSetPtr(new MultSet(std::move(gens)));
}

bool MultSet::contains(const GClass& g) const {
  if (g.is_unit()) return true;
  for (const auto& h : gens_)
    if (h == g) return true;
  return false;
}

// --- LocClass ----------------------------------------------------------------

LocClass LocClass::make(GClass num,
                        std::vector<std::pair<GClass, unsigned>> den) {
  LocClass out;
  out.num_ = std::move(num);
  std::sort(den.begin(), den.end(), [](const auto& a, const auto& b) {
    return GClass::compare(a.first, b.first) < 0;
  });
  for (auto& [g, e] : den) {
    if (g.is_zero())
      throw DomainError("zero polynomial declared as denominator atom");
    if (e == 0 || g.is_unit()) continue;
    if (!out.den_.empty() && out.den_.back().first == g)
      out.den_.back().second += e;
    else
      out.den_.emplace_back(std::move(g), e);
  }
  return out;
}

LocClass LocClass::make_in(GClass num,
                           std::vector<std::pair<GClass, unsigned>> den,
                           const MultSet& declared) {
  for (const auto& [g, e] : den)
    if (!g.is_unit() && !declared.contains(g))
      throw DomainError("denominator atom not declared in the multiplicative set: " +
                        g.str());
  return make(std::move(num), std::move(den));
}

GClass LocClass::den_expanded() const {
  GClass d = GClass::unit(num_.table());
  for (const auto& [g, e] : den_) d = d * g.pow(e);
  return d;
}

LocClass LocClass::shift_by(const GClass& generator, int exp) const {
  if (exp == 0) return *this;
  if (generator.is_zero())
    throw DomainError("zero polynomial declared as denominator atom");
  if (generator.is_unit()) return *this;
  if (exp > 0) {
    auto den = den_;
    den.emplace_back(generator, static_cast<unsigned>(exp));
    return make(num_, std::move(den));
  }
  return make(num_ * generator.pow(static_cast<unsigned>(-exp)), den_);
}

std::string LocClass::str() const {
  if (den_.empty()) return num_.str();
  std::string out = "(" + num_.str() + ")/(";
  for (size_t i = 0; i < den_.size(); ++i) {
    const auto& [g, e] = den_[i];
    if (i) out += "*";
    // A bare atom prints without parens; anything else is wrapped so the
    // exponent cannot be misread.
    const bool bare = g.is_plain_monomial() &&
                      g.terms().begin()->first.factors().size() == 1 &&
                      g.terms().begin()->first.factors()[0].second == 1;
    out += bare ? g.str() : "(" + g.str() + ")";
    if (e != 1) out += "^" + std::to_string(e);
  }
  out += ")";
  return out;
}

namespace {

// Exponent of `g` in the denominator of `x` (0 when absent).
unsigned den_exp(const LocClass& x, const GClass& g) {
  for (const auto& [h, e] : x.den())
    if (h == g) return e;
  return 0;
}

} // namespace

LocClass loc_add(const LocClass& a, const LocClass& b) {
  require_same_table(a.num().table(), b.num().table(), "loc_add");
  // Common denominator: generator-wise max of exponents.
  std::vector<std::pair<GClass, unsigned>> common = a.den();
  for (const auto& [g, e] : b.den()) {
    bool found = false;
    for (auto& [h, f] : common)
      if (h == g) {
        f = std::max(f, e);
        found = true;
      }
    if (!found) common.emplace_back(g, e);
  }
  GClass num_a = a.num();
  GClass num_b = b.num();
  for (const auto& [g, e] : common) {
    unsigned ea = den_exp(a, g), eb = den_exp(b, g);
    if (e > ea) num_a = num_a * g.pow(e - ea);
    if (e > eb) num_b = num_b * g.pow(e - eb);
  }
  return LocClass::make(num_a + num_b, std::move(common));
}

LocClass loc_mul(const LocClass& a, const LocClass& b) {
  require_same_table(a.num().table(), b.num().table(), "loc_mul");
  std::vector<std::pair<GClass, unsigned>> den = a.den();
  den.insert(den.end(), b.den().begin(), b.den().end());
  return LocClass::make(a.num() * b.num(), std::move(den));
}

bool loc_eq(const LocClass& a, const LocClass& b) {
  require_same_table(a.num().table(), b.num().table(), "loc_eq");
  return a.num() * b.den_expanded() == b.num() * a.den_expanded();
}

// --- Limit arithmetic ---------------------------------------------------------

Rat phi_w(const LimitTermSeq& s) {
  const Int* p = std::get_if<Int>(&s.multipliers);
  if (!p) throw DomainError("phi_w needs the single-multiplier form");
  if (*p == 0)
    throw ZeroMultiplierError("p = 0: the inductive limit collapses to 0");
  Rat total(0);
  for (const auto& [level, value] : s.terms) {
    if (level < 1) throw DomainError("term level must be positive");
    total = total + Rat(value) * int_pow(*p, -(static_cast<long long>(level) - 1 + s.shift));
  }
  return total;
}

Rat psi_limit(const LimitTermSeq& s) {
  std::vector<Int> ps;
  if (const Int* p = std::get_if<Int>(&s.multipliers)) {
    if (*p == 0)
      throw ZeroMultiplierError("p = 0: the inductive limit collapses to 0");
    int top = 0;
    for (const auto& [level, value] : s.terms) top = std::max(top, level);
    ps.assign(static_cast<size_t>(std::max(top - 1, 0)), *p);
  } else {
    ps = std::get<std::vector<Int>>(s.multipliers);
    for (const auto& multiplier : ps)
      if (multiplier == 0)
        throw ZeroMultiplierError("p_n = 0: the inductive limit collapses to 0");
  }
  Rat total(0);
  for (const auto& [level, value] : s.terms) {
    if (level < 1) throw DomainError("term level must be positive");
    // denominator p_0 p_1 ... p_{level-1} with p_0 := 1
    Int den = 1;
    for (int k = 1; k <= level - 1; ++k) {
      if (static_cast<size_t>(k) > ps.size())
        throw DomainError("multiplier list too short for term level " +
                          std::to_string(level));
      den *= ps[static_cast<size_t>(k - 1)];
    }
    total = total + Rat(value, den);
  }
  return total;
}

} // namespace prochern::rings
