#include <algorithm>
#include <sstream>

#include "prochern/dsl.hpp"

namespace prochern::dsl {

using geom::ConstructibleSet;
using geom::MorphismModel;
using geom::Stratum;
using geom::VarietyModel;
using prosys::Tower;
using rings::AtomTable;
using rings::Monomial;

// --- lexer ------------------------------------------------------------------------

namespace {

struct Token {
  enum class Type {
    Ident,
    Number,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Semi,
    Comma,
    Colon,
    Arrow,
    Eq,
    Caret,
    Star,
    Plus,
    Minus,
    Slash,
    Newline,
    End
  };
  Type type = Type::End;
  std::string text;
  SourceLoc loc;
};

const char* token_desc(Token::Type t) {
  switch (t) {
    case Token::Type::Ident: return "identifier";
    case Token::Type::Number: return "integer";
    case Token::Type::LBrace: return "'{'";
    case Token::Type::RBrace: return "'}'";
    case Token::Type::LParen: return "'('";
    case Token::Type::RParen: return "')'";
    case Token::Type::Semi: return "';'";
    case Token::Type::Comma: return "','";
    case Token::Type::Colon: return "':'";
    case Token::Type::Arrow: return "'->'";
    case Token::Type::Eq: return "'='";
    case Token::Type::Caret: return "'^'";
    case Token::Type::Star: return "'*'";
    case Token::Type::Plus: return "'+'";
    case Token::Type::Minus: return "'-'";
    case Token::Type::Slash: return "'/'";
    case Token::Type::Newline: return "end of line";
    case Token::Type::End: return "end of input";
  }
  return "token";
}

bool ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool ident_char(char c) {
  return ident_start(c) || (c >= '0' && c <= '9') || c == '.';
}

// Newlines separate statements except inside brackets, where they act as
// whitespace.
std::vector<Token> lex(std::string_view text) {
  std::vector<Token> out;
  int line = 1, col = 1, depth = 0;
  size_t i = 0;
  auto push = [&](Token::Type t, std::string s, int l, int c) {
    out.push_back({t, std::move(s), {l, c}});
  };
  while (i < text.size()) {
    const char c = text[i];
    const int l = line, cl = col;
    if (c == '\n') {
      if (depth == 0 && !out.empty() && out.back().type != Token::Type::Newline)
        push(Token::Type::Newline, "\n", l, cl);
      ++i;
      ++line;
      col = 1;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      ++col;
      continue;
    }
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    if (ident_start(c)) {
      size_t j = i;
      while (j < text.size() && ident_char(text[j])) ++j;
      push(Token::Type::Ident, std::string(text.substr(i, j - i)), l, cl);
      col += static_cast<int>(j - i);
      i = j;
      continue;
    }
    if (c >= '0' && c <= '9') {
      size_t j = i;
      while (j < text.size() && text[j] >= '0' && text[j] <= '9') ++j;
      push(Token::Type::Number, std::string(text.substr(i, j - i)), l, cl);
      col += static_cast<int>(j - i);
      i = j;
      continue;
    }
    auto single = [&](Token::Type t) {
      push(t, std::string(1, c), l, cl);
      ++i;
      ++col;
    };
    switch (c) {
      case '{': ++depth; single(Token::Type::LBrace); break;
      case '}': depth = std::max(0, depth - 1); single(Token::Type::RBrace); break;
      case '(': ++depth; single(Token::Type::LParen); break;
      case ')': depth = std::max(0, depth - 1); single(Token::Type::RParen); break;
      case ';': single(Token::Type::Semi); break;
      case ',': single(Token::Type::Comma); break;
      case ':': single(Token::Type::Colon); break;
      case '=': single(Token::Type::Eq); break;
      case '^': single(Token::Type::Caret); break;
      case '*': single(Token::Type::Star); break;
      case '+': single(Token::Type::Plus); break;
      case '/': single(Token::Type::Slash); break;
      case '-':
        if (i + 1 < text.size() && text[i + 1] == '>') {
          push(Token::Type::Arrow, "->", l, cl);
          i += 2;
          col += 2;
        } else {
          single(Token::Type::Minus);
        }
        break;
      default:
        throw ParseError({l, cl}, std::string("unexpected character '") + c + "'");
    }
  }
  if (!out.empty() && out.back().type != Token::Type::Newline)
    push(Token::Type::Newline, "\n", line, col);
  push(Token::Type::End, "", line, col);
  return out;
}

// --- token cursor -------------------------------------------------------------------

class Cursor {
public:
  explicit Cursor(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  const Token& peek() const { return tokens_[pos_]; }
  const Token& get() {
    const Token& t = tokens_[pos_];
    if (pos_ + 1 < tokens_.size()) ++pos_;
    return t;
  }
  bool at(Token::Type t) const { return peek().type == t; }
  bool at_ident(const char* word) const {
    return peek().type == Token::Type::Ident && peek().text == word;
  }
  bool accept(Token::Type t) {
    if (!at(t)) return false;
    get();
    return true;
  }
  bool accept_ident(const char* word) {
    if (!at_ident(word)) return false;
    get();
    return true;
  }
  Token expect(Token::Type t) {
    if (!at(t))
      throw ParseError(peek().loc, std::string("expected ") + token_desc(t) +
                                       ", found " + token_desc(peek().type));
    return get();
  }
  std::string expect_ident() { return expect(Token::Type::Ident).text; }
  void expect_word(const char* word) {
    const Token tk = peek();
    if (!accept_ident(word))
      throw ParseError(tk.loc, std::string("expected '") + word + "'");
  }
  Int expect_number() { return Int(expect(Token::Type::Number).text); }
  Int expect_int() {
    const bool neg = accept(Token::Type::Minus);
    Int v = expect_number();
    if (neg) v = -v;
    return v;
  }
  int expect_small_int(long long lo, long long hi) {
    const Token tk = peek();
    const Int v = expect_int();
    if (v < lo || v > hi)
      throw ParseError(tk.loc, "integer out of range [" + std::to_string(lo) +
                                   ", " + std::to_string(hi) + "]");
    return static_cast<int>(v);
  }
  void end_statement() {
    if (!accept(Token::Type::Newline) && !at(Token::Type::End))
      throw ParseError(peek().loc, std::string("unexpected ") +
                                       token_desc(peek().type) +
                                       " at end of statement");
  }
  void skip_newlines() {
    while (accept(Token::Type::Newline)) {
    }
  }
  bool done() const { return at(Token::Type::End); }

private:
  std::vector<Token> tokens_;
  size_t pos_ = 0;
};

// --- expression parsing ----------------------------------------------------------------

// CLASSEXPR: term (('+'|'-') term)*, term: element ('*' element)*,
// element: NUMBER | IDENT ['^' NUMBER].
GClass parse_classexpr(Cursor& cur, const AtomTablePtr& table) {
  auto parse_term = [&]() {
    GClass acc = GClass::unit(table);
    for (;;) {
      const Token tk = cur.peek();
      if (tk.type == Token::Type::Number) {
        cur.get();
        acc = acc.scale(Int(tk.text));
      } else if (tk.type == Token::Type::Ident) {
        cur.get();
        if (!table->contains(tk.text))
          throw ParseError(tk.loc, "unknown atom symbol: " + tk.text);
        int exp = 1;
        if (cur.accept(Token::Type::Caret)) exp = cur.expect_small_int(0, 1 << 10);
        acc = acc * GClass::of_monomial(table, Monomial::make({{tk.text, exp}}));
      } else {
        throw ParseError(tk.loc, "expected a class term");
      }
      if (!cur.accept(Token::Type::Star)) break;
    }
    return acc;
  };
  GClass out = GClass::zero(table);
  bool neg = cur.accept(Token::Type::Minus);
  for (;;) {
    GClass t = parse_term();
    out = neg ? out - t : out + t;
    if (cur.accept(Token::Type::Plus))
      neg = false;
    else if (cur.accept(Token::Type::Minus))
      neg = true;
    else
      break;
  }
  return out;
}

Rat parse_rat_expr(Cursor& cur) {
  const Int num = cur.expect_int();
  if (cur.accept(Token::Type::Slash)) {
    const Token tk = cur.peek();
    const Int den = cur.expect_number();
    if (den == 0) throw ParseError(tk.loc, "zero denominator");
    return Rat(num, den);
  }
  return Rat(num);
}

// --- statement parsing -------------------------------------------------------------------

class Parser {
public:
  explicit Parser(std::string_view text) : text_(text), cur_(lex(text)) {}

  Document run() {
    collect_atoms();
    cur_ = Cursor(lex(text_));
    cur_.skip_newlines();
    while (!cur_.done()) {
      const Token head = cur_.peek();
      if (head.type != Token::Type::Ident)
        throw ParseError(head.loc, "expected a declaration keyword");
      const std::string kw = head.text;
      try {
        if (kw == "atom") skip_atom();
        else if (kw == "variety") parse_variety();
        else if (kw == "morphism") parse_morphism();
        else if (kw == "tower") parse_tower();
        else if (kw == "profn") parse_profn();
        else if (kw == "cyl") parse_cyl();
        else if (kw == "query") parse_query();
        else if (kw == "check") parse_check();
        else
          throw ParseError(head.loc, "unknown declaration '" + kw + "'");
      } catch (const ParseError&) {
        throw;
      } catch (const Error& e) {
        // Construction errors become diagnostics at the statement head.
        throw ParseError(head.loc, e.what());
      }
      cur_.skip_newlines();
    }
    return std::move(doc_);
  }

private:
  // First pass: the atom table must exist before any class is parsed.
  void collect_atoms() {
    std::vector<AtomTable::Entry> entries;
    cur_.skip_newlines();
    while (!cur_.done()) {
      if (cur_.at_ident("atom")) {
        const Token head = cur_.get();
        const std::string name = cur_.expect_ident();
        cur_.expect_word("euler");
        const Int euler = cur_.expect_int();
        cur_.end_statement();
        try {
          entries.push_back({name, euler});
          AtomTable::make(entries); // validate incrementally
        } catch (const Error& e) {
          throw ParseError(head.loc, e.what());
        }
        doc_.atoms.push_back({name, euler});
        doc_.order.emplace_back(Document::DeclKind::Atom, doc_.atoms.size() - 1);
        continue;
      }
      // Skip to the next statement boundary.
      while (!cur_.done() && !cur_.accept(Token::Type::Newline)) cur_.get();
      cur_.skip_newlines();
    }
    doc_.table = AtomTable::make(std::move(entries));
  }

  void skip_atom() {
    cur_.get(); // atom
    cur_.expect_ident();
    cur_.expect_word("euler");
    cur_.expect_int();
    cur_.end_statement();
  }

  void check_fresh(const std::string& name, SourceLoc loc) {
    if (doc_.find_variety(name) || doc_.find_morphism(name) ||
        doc_.find_tower(name) || doc_.find_profn(name) || doc_.find_cyl(name))
      throw ParseError(loc, "name '" + name + "' is already declared");
  }

  void parse_variety() {
    cur_.get();
    const Token name_tk = cur_.peek();
    const std::string name = cur_.expect_ident();
    check_fresh(name, name_tk.loc);
    cur_.expect(Token::Type::LBrace);
    std::vector<Stratum> strata;
    while (!cur_.accept(Token::Type::RBrace)) {
      cur_.expect_word("stratum");
      const std::string sid = cur_.expect_ident();
      cur_.expect_word("class");
      GClass cls = parse_classexpr(cur_, doc_.table);
      strata.push_back({sid, std::move(cls)});
      if (!cur_.accept(Token::Type::Semi)) {
        cur_.expect(Token::Type::RBrace);
        break;
      }
    }
    doc_.varieties.push_back({name, VarietyModel::make(name, doc_.table, strata)});
    doc_.order.emplace_back(Document::DeclKind::Variety, doc_.varieties.size() - 1);
    cur_.end_statement();
  }

  ModelPtr resolve_variety(const std::string& name, SourceLoc loc) {
    if (const auto* v = doc_.find_variety(name)) return v->model;
    throw ParseError(loc, "unknown variety '" + name + "'");
  }

  void parse_morphism() {
    cur_.get();
    const Token name_tk = cur_.peek();
    const std::string name = cur_.expect_ident();
    check_fresh(name, name_tk.loc);
    cur_.expect(Token::Type::Colon);
    const Token src_tk = cur_.peek();
    const std::string src = cur_.expect_ident();
    cur_.expect(Token::Type::Arrow);
    const Token dst_tk = cur_.peek();
    const std::string dst = cur_.expect_ident();
    const ModelPtr source = resolve_variety(src, src_tk.loc);
    const ModelPtr target = resolve_variety(dst, dst_tk.loc);

    cur_.expect(Token::Type::LBrace);
    std::vector<std::optional<std::pair<size_t, GClass>>> entries(source->size());
    while (!cur_.accept(Token::Type::RBrace)) {
      cur_.expect_word("map");
      const Token stk = cur_.peek();
      const std::string s = cur_.expect_ident();
      cur_.expect(Token::Type::Arrow);
      const Token ttk = cur_.peek();
      const std::string t = cur_.expect_ident();
      cur_.expect_word("fiber");
      GClass f = parse_classexpr(cur_, doc_.table);
      const auto si = source->find(s);
      if (!si) throw ParseError(stk.loc, "unknown source stratum '" + s + "'");
      const auto ti = target->find(t);
      if (!ti) throw ParseError(ttk.loc, "unknown target stratum '" + t + "'");
      if (entries[*si])
        throw ParseError(stk.loc, "stratum '" + s + "' mapped twice");
      entries[*si] = {{*ti, std::move(f)}};
      if (!cur_.accept(Token::Type::Semi)) {
        cur_.expect(Token::Type::RBrace);
        break;
      }
    }
    const bool strict = cur_.accept_ident("strict");
    std::vector<size_t> map(source->size());
    std::vector<GClass> fiber;
    for (size_t s = 0; s < entries.size(); ++s) {
      if (!entries[s])
        throw ParseError(name_tk.loc, "stratum '" + source->strata()[s].id +
                                          "' has no map entry");
      map[s] = entries[s]->first;
      fiber.push_back(entries[s]->second);
    }
    doc_.morphisms.push_back(
        {name, src, dst,
         MorphismModel::make(source, target, std::move(map), std::move(fiber),
                             strict),
         strict});
    doc_.order.emplace_back(Document::DeclKind::Morphism, doc_.morphisms.size() - 1);
    cur_.end_statement();
  }

  void parse_tower() {
    cur_.get();
    const Token name_tk = cur_.peek();
    const std::string name = cur_.expect_ident();
    check_fresh(name, name_tk.loc);
    cur_.expect(Token::Type::Eq);
    const Token kind_tk = cur_.peek();
    const std::string kind = cur_.expect_ident();
    TowerDecl decl;
    decl.name = name;
    if (kind == "product") {
      decl.kind = TowerDecl::Kind::Product;
      cur_.expect(Token::Type::LParen);
      const Token vtk = cur_.peek();
      decl.variety = cur_.expect_ident();
      cur_.expect(Token::Type::RParen);
      decl.tower = Tower::product(resolve_variety(decl.variety, vtk.loc));
    } else if (kind == "bundle") {
      decl.kind = TowerDecl::Kind::Bundle;
      cur_.expect(Token::Type::LParen);
      const Token vtk = cur_.peek();
      decl.variety = cur_.expect_ident();
      cur_.expect(Token::Type::Semi);
      decl.fibers.push_back(parse_classexpr(cur_, doc_.table));
      while (cur_.accept(Token::Type::Comma))
        decl.fibers.push_back(parse_classexpr(cur_, doc_.table));
      decl.periodic = cur_.accept_ident("periodic");
      cur_.expect(Token::Type::RParen);
      decl.tower = Tower::bundle(resolve_variety(decl.variety, vtk.loc),
                                 decl.fibers, decl.periodic);
    } else if (kind == "arcs") {
      decl.kind = TowerDecl::Kind::Arcs;
      cur_.expect(Token::Type::LParen);
      const Token vtk = cur_.peek();
      decl.variety = cur_.expect_ident();
      cur_.expect(Token::Type::Comma);
      cur_.expect_word("dim");
      cur_.expect(Token::Type::Eq);
      decl.dim = cur_.expect_small_int(1, 1 << 10);
      cur_.expect(Token::Type::RParen);
      decl.tower = arcs::arc_tower(resolve_variety(decl.variety, vtk.loc), decl.dim);
    } else if (kind == "steps") {
      decl.kind = TowerDecl::Kind::Steps;
      cur_.expect(Token::Type::LParen);
      std::vector<MorphPtr> steps;
      do {
        const Token mtk = cur_.peek();
        const std::string mname = cur_.expect_ident();
        const auto* m = doc_.find_morphism(mname);
        if (!m) throw ParseError(mtk.loc, "unknown morphism '" + mname + "'");
        decl.morphs.push_back(mname);
        steps.push_back(m->morphism);
      } while (cur_.accept(Token::Type::Comma));
      cur_.expect(Token::Type::RParen);
      // The k-th listed morphism maps level k+1 onto level k.
      decl.tower = Tower::from_steps(std::move(steps));
    } else {
      throw ParseError(kind_tk.loc, "unknown tower generator '" + kind + "'");
    }
    doc_.towers.push_back(std::move(decl));
    doc_.order.emplace_back(Document::DeclKind::Tower, doc_.towers.size() - 1);
    cur_.end_statement();
  }

  TowerPtr resolve_tower(const std::string& name, SourceLoc loc) {
    if (const auto* t = doc_.find_tower(name)) return t->tower;
    throw ParseError(loc, "unknown tower '" + name + "'");
  }

  void parse_profn() {
    cur_.get();
    const Token name_tk = cur_.peek();
    const std::string name = cur_.expect_ident();
    check_fresh(name, name_tk.loc);
    cur_.expect_word("on");
    const Token ttk = cur_.peek();
    const std::string tower_name = cur_.expect_ident();
    TowerPtr tower = resolve_tower(tower_name, ttk.loc);
    cur_.expect_word("level");
    const int level = cur_.expect_small_int(0, 1 << 10);
    const ModelPtr model = tower->model(level);

    ProfnDecl decl;
    decl.name = name;
    decl.tower = tower_name;
    decl.level = level;
    std::vector<Int> values(model->size(), Int(0));
    cur_.expect(Token::Type::LBrace);
    while (!cur_.accept(Token::Type::RBrace)) {
      const Token stk = cur_.peek();
      const std::string sid = cur_.expect_ident();
      cur_.expect(Token::Type::Colon);
      const Int v = cur_.expect_int();
      const auto si = model->find(sid);
      if (!si) throw ParseError(stk.loc, "unknown stratum '" + sid + "'");
      values[*si] = v;
      if (v != 0) decl.values.emplace_back(sid, v);
      if (!cur_.accept(Token::Type::Comma)) {
        cur_.expect(Token::Type::RBrace);
        break;
      }
    }
    decl.fn = ProFunction(tower, level,
                          geom::ConstructibleFunction(model, std::move(values)));
    doc_.profns.push_back(std::move(decl));
    doc_.order.emplace_back(Document::DeclKind::Profn, doc_.profns.size() - 1);
    cur_.end_statement();
  }

  void parse_cyl() {
    cur_.get();
    const Token name_tk = cur_.peek();
    const std::string name = cur_.expect_ident();
    check_fresh(name, name_tk.loc);
    cur_.expect_word("on");
    const Token ttk = cur_.peek();
    const std::string tower_name = cur_.expect_ident();
    TowerPtr tower = resolve_tower(tower_name, ttk.loc);
    cur_.expect_word("level");
    const int level = cur_.expect_small_int(0, 1 << 10);
    const ModelPtr model = tower->model(level);

    CylDecl decl;
    decl.name = name;
    decl.tower = tower_name;
    decl.level = level;
    cur_.expect(Token::Type::LBrace);
    if (cur_.accept_ident("all")) {
      decl.all = true;
      cur_.expect(Token::Type::RBrace);
    } else {
      while (!cur_.accept(Token::Type::RBrace)) {
        const Token stk = cur_.peek();
        const std::string sid = cur_.expect_ident();
        if (!model->find(sid))
          throw ParseError(stk.loc, "unknown stratum '" + sid + "'");
        decl.strata.push_back(sid);
        if (!cur_.accept(Token::Type::Comma)) {
          cur_.expect(Token::Type::RBrace);
          break;
        }
      }
    }
    decl.cyl = CylinderSet(tower, level,
                           decl.all ? ConstructibleSet::whole(model)
                                    : ConstructibleSet::of_ids(model, decl.strata));
    doc_.cyls.push_back(std::move(decl));
    doc_.order.emplace_back(Document::DeclKind::Cyl, doc_.cyls.size() - 1);
    cur_.end_statement();
  }

  FnExpr parse_fnexpr() {
    const Token tk = cur_.peek();
    const std::string head = cur_.expect_ident();
    FnExpr out;
    if (head == "one" && cur_.accept(Token::Type::LParen)) {
      out.kind = FnExpr::Kind::OneOf;
      const Token ntk = cur_.peek();
      out.name = cur_.expect_ident();
      cur_.expect(Token::Type::RParen);
      if (!doc_.find_tower(out.name) && !doc_.find_variety(out.name))
        throw ParseError(ntk.loc, "'" + out.name + "' is not a tower or variety");
      return out;
    }
    if (head == "ind" && cur_.accept(Token::Type::LParen)) {
      out.kind = FnExpr::Kind::Indicator;
      const Token ntk = cur_.peek();
      out.name = cur_.expect_ident();
      cur_.expect(Token::Type::RParen);
      if (!doc_.find_cyl(out.name))
        throw ParseError(ntk.loc, "unknown cylinder '" + out.name + "'");
      return out;
    }
    out.kind = FnExpr::Kind::Named;
    out.name = head;
    if (!doc_.find_profn(out.name))
      throw ParseError(tk.loc, "unknown profn '" + out.name + "'");
    return out;
  }

  CylExpr parse_cylexpr() {
    const Token tk = cur_.peek();
    const std::string head = cur_.expect_ident();
    CylExpr out;
    if (head == "cyl" && cur_.accept(Token::Type::LParen)) {
      out.kind = CylExpr::Kind::Inline;
      const Token ttk = cur_.peek();
      out.tower = cur_.expect_ident();
      TowerPtr tower = resolve_tower(out.tower, ttk.loc);
      cur_.expect(Token::Type::Comma);
      out.level = cur_.expect_small_int(0, 1 << 10);
      const ModelPtr model = tower->model(out.level);
      cur_.expect(Token::Type::Comma);
      if (cur_.accept_ident("all")) {
        out.all = true;
      } else {
        cur_.expect(Token::Type::LBrace);
        while (!cur_.accept(Token::Type::RBrace)) {
          const Token stk = cur_.peek();
          const std::string sid = cur_.expect_ident();
          if (!model->find(sid))
            throw ParseError(stk.loc, "unknown stratum '" + sid + "'");
          out.strata.push_back(sid);
          if (!cur_.accept(Token::Type::Comma)) {
            cur_.expect(Token::Type::RBrace);
            break;
          }
        }
      }
      cur_.expect(Token::Type::RParen);
      return out;
    }
    out.kind = CylExpr::Kind::Named;
    out.name = head;
    if (!doc_.find_cyl(out.name))
      throw ParseError(tk.loc, "unknown cylinder '" + out.name + "'");
    return out;
  }

  WeightSpec parse_weight() {
    WeightSpec out;
    const Token tk = cur_.peek();
    const std::string kind = cur_.expect_ident();
    if (kind == "identity") {
      out.kind = WeightSpec::Kind::Identity;
    } else if (kind == "square") {
      out.kind = WeightSpec::Kind::Square;
    } else if (kind == "const") {
      out.kind = WeightSpec::Kind::Const;
      out.constant = parse_rat_expr(cur_);
    } else if (kind == "table") {
      out.kind = WeightSpec::Kind::Table;
      cur_.expect(Token::Type::LBrace);
      while (!cur_.accept(Token::Type::RBrace)) {
        const Int key = cur_.expect_int();
        cur_.expect(Token::Type::Colon);
        out.table.emplace_back(key, parse_rat_expr(cur_));
        if (!cur_.accept(Token::Type::Comma)) {
          cur_.expect(Token::Type::RBrace);
          break;
        }
      }
    } else {
      throw ParseError(tk.loc, "unknown weight '" + kind + "'");
    }
    return out;
  }

  ClassWeightSpec parse_class_weight() {
    ClassWeightSpec out;
    const Token tk = cur_.peek();
    const std::string kind = cur_.expect_ident();
    if (kind == "identity") {
      out.kind = ClassWeightSpec::Kind::Identity;
    } else if (kind == "const") {
      out.kind = ClassWeightSpec::Kind::Const;
      out.constant = parse_classexpr(cur_, doc_.table);
    } else if (kind == "table") {
      out.kind = ClassWeightSpec::Kind::Table;
      cur_.expect(Token::Type::LBrace);
      while (!cur_.accept(Token::Type::RBrace)) {
        const Int key = cur_.expect_int();
        cur_.expect(Token::Type::Colon);
        out.table.emplace_back(key, parse_classexpr(cur_, doc_.table));
        if (!cur_.accept(Token::Type::Comma)) {
          cur_.expect(Token::Type::RBrace);
          break;
        }
      }
    } else {
      throw ParseError(tk.loc, "unknown weight '" + kind + "'");
    }
    return out;
  }

  IntSystemSpec parse_int_system() {
    IntSystemSpec out;
    if (cur_.accept_ident("fibers")) {
      out.fibers = true;
      return out;
    }
    out.fibers = false;
    cur_.expect(Token::Type::LParen);
    do {
      out.values.push_back(cur_.expect_int());
    } while (cur_.accept(Token::Type::Comma));
    cur_.expect(Token::Type::RParen);
    out.periodic = cur_.accept_ident("periodic");
    return out;
  }

  ClassSystemSpec parse_class_system() {
    ClassSystemSpec out;
    if (cur_.accept_ident("fibers")) {
      out.fibers = true;
      return out;
    }
    out.fibers = false;
    cur_.expect(Token::Type::LParen);
    do {
      out.values.push_back(parse_classexpr(cur_, doc_.table));
    } while (cur_.accept(Token::Type::Comma));
    cur_.expect(Token::Type::RParen);
    out.periodic = cur_.accept_ident("periodic");
    return out;
  }

  void parse_query() {
    cur_.get();
    const Token op_tk = cur_.peek();
    const std::string op = cur_.expect_ident();
    Query q;
    if (op == "chi" || op == "gamma") {
      q.kind = op == "chi" ? Query::Kind::Chi : Query::Kind::Gamma;
      q.fn = parse_fnexpr();
    } else if (op == "chipro" || op == "gammapro") {
      q.kind = op == "chipro" ? Query::Kind::ChiPro : Query::Kind::GammaPro;
      q.fn = parse_fnexpr();
      if (cur_.accept_ident("w")) q.w = cur_.expect_small_int(-64, 64);
    } else if (op == "measure") {
      q.kind = Query::Kind::Measure;
      q.cyl = parse_cylexpr();
    } else if (op == "integrate") {
      const Token which_tk = cur_.peek();
      const std::string which = cur_.expect_ident();
      if (which == "chi") {
        q.kind = Query::Kind::IntegrateChi;
        q.fn = parse_fnexpr();
        cur_.expect_word("f");
        cur_.expect(Token::Type::Eq);
        q.weight = parse_weight();
        if (cur_.accept_ident("p")) {
          cur_.expect(Token::Type::Eq);
          q.p = parse_int_system();
        }
      } else if (which == "gamma") {
        q.kind = Query::Kind::IntegrateGamma;
        q.fn = parse_fnexpr();
        cur_.expect_word("f");
        cur_.expect(Token::Type::Eq);
        q.class_weight = parse_class_weight();
        if (cur_.accept_ident("F")) {
          cur_.expect(Token::Type::Eq);
          q.classes = parse_class_system();
        }
      } else {
        throw ParseError(which_tk.loc, "integrate expects 'chi' or 'gamma'");
      }
    } else {
      throw ParseError(op_tk.loc, "unknown query '" + op + "'");
    }
    // ProFunction-shaped queries need a profn-shaped target.
    if ((q.kind == Query::Kind::ChiPro || q.kind == Query::Kind::GammaPro ||
         q.kind == Query::Kind::IntegrateChi ||
         q.kind == Query::Kind::IntegrateGamma) &&
        q.fn.kind == FnExpr::Kind::OneOf && !doc_.find_tower(q.fn.name))
      throw ParseError(op_tk.loc, "'" + q.fn.name + "' is not a tower");
    doc_.queries.push_back(std::move(q));
    doc_.order.emplace_back(Document::DeclKind::Query, doc_.queries.size() - 1);
    cur_.end_statement();
  }

  void parse_check_options(Check& c) {
    for (;;) {
      if (cur_.accept_ident("depth")) {
        c.depth = cur_.expect_small_int(1, 64);
      } else if (cur_.accept_ident("seed")) {
        c.seed = static_cast<std::uint64_t>(cur_.expect_small_int(0, 1 << 30));
      } else if (cur_.accept_ident("horizon")) {
        c.horizon = cur_.expect_small_int(1, 256);
      } else {
        break;
      }
    }
  }

  void parse_check() {
    cur_.get();
    const Token op_tk = cur_.peek();
    const std::string op = cur_.expect_ident();
    Check c;
    if (op == "projection_formula") {
      c.kind = Check::Kind::ProjectionFormula;
    } else if (op == "naturality") {
      c.kind = Check::Kind::Naturality;
      const Token mtk = cur_.peek();
      c.morph = cur_.expect_ident();
      if (!doc_.find_morphism(c.morph))
        throw ParseError(mtk.loc, "unknown morphism '" + c.morph + "'");
      cur_.expect_word("over");
      const Token ttk = cur_.peek();
      c.tower = cur_.expect_ident();
      resolve_tower(c.tower, ttk.loc);
    } else if (op == "system" || op == "diagrams") {
      c.kind = op == "system" ? Check::Kind::System : Check::Kind::Diagrams;
      const Token ttk = cur_.peek();
      c.tower = cur_.expect_ident();
      resolve_tower(c.tower, ttk.loc);
    } else if (op == "stability") {
      const Token which_tk = cur_.peek();
      const std::string which = cur_.expect_ident();
      const Token ptk = cur_.peek();
      c.profn = cur_.expect_ident();
      if (!doc_.find_profn(c.profn))
        throw ParseError(ptk.loc, "unknown profn '" + c.profn + "'");
      if (which == "chi") {
        c.kind = Check::Kind::StabilityChi;
        if (cur_.accept_ident("p")) {
          cur_.expect(Token::Type::Eq);
          c.p = parse_int_system();
        }
      } else if (which == "gamma") {
        c.kind = Check::Kind::StabilityGamma;
        if (cur_.accept_ident("F")) {
          cur_.expect(Token::Type::Eq);
          c.classes = parse_class_system();
        }
      } else {
        throw ParseError(which_tk.loc, "stability expects 'chi' or 'gamma'");
      }
    } else {
      throw ParseError(op_tk.loc, "unknown check '" + op + "'");
    }
    parse_check_options(c);
    doc_.checks.push_back(std::move(c));
    doc_.order.emplace_back(Document::DeclKind::Check, doc_.checks.size() - 1);
    cur_.end_statement();
  }

  std::string text_;
  Cursor cur_;
  Document doc_;
};

} // namespace

// --- document lookups ---------------------------------------------------------------

const VarietyDecl* Document::find_variety(const std::string& name) const {
  for (const auto& d : varieties)
    if (d.name == name) return &d;
  return nullptr;
}
const MorphismDecl* Document::find_morphism(const std::string& name) const {
  for (const auto& d : morphisms)
    if (d.name == name) return &d;
  return nullptr;
}
const TowerDecl* Document::find_tower(const std::string& name) const {
  for (const auto& d : towers)
    if (d.name == name) return &d;
  return nullptr;
}
const ProfnDecl* Document::find_profn(const std::string& name) const {
  for (const auto& d : profns)
    if (d.name == name) return &d;
  return nullptr;
}
const CylDecl* Document::find_cyl(const std::string& name) const {
  for (const auto& d : cyls)
    if (d.name == name) return &d;
  return nullptr;
}

Document parse(std::string_view text) { return Parser(text).run(); }

// --- rendering ------------------------------------------------------------------------

namespace {

std::string render_int_system(const IntSystemSpec& s) {
  if (s.fibers) return "fibers";
  std::string out = "(";
  for (size_t i = 0; i < s.values.size(); ++i) {
    if (i) out += ", ";
    out += s.values[i].str();
  }
  out += ")";
  if (s.periodic) out += " periodic";
  return out;
}

std::string render_class_system(const ClassSystemSpec& s) {
  if (s.fibers) return "fibers";
  std::string out = "(";
  for (size_t i = 0; i < s.values.size(); ++i) {
    if (i) out += ", ";
    out += s.values[i].str();
  }
  out += ")";
  if (s.periodic) out += " periodic";
  return out;
}

std::string render_fnexpr(const FnExpr& f) {
  switch (f.kind) {
    case FnExpr::Kind::Named: return f.name;
    case FnExpr::Kind::OneOf: return "one(" + f.name + ")";
    case FnExpr::Kind::Indicator: return "ind(" + f.name + ")";
  }
  return f.name;
}

std::string render_cylexpr(const CylExpr& c) {
  if (c.kind == CylExpr::Kind::Named) return c.name;
  std::string out = "cyl(" + c.tower + ", " + std::to_string(c.level) + ", ";
  if (c.all) {
    out += "all";
  } else {
    out += "{";
    for (size_t i = 0; i < c.strata.size(); ++i) {
      if (i) out += ", ";
      out += c.strata[i];
    }
    out += "}";
  }
  return out + ")";
}

std::string render_weight(const WeightSpec& w) {
  switch (w.kind) {
    case WeightSpec::Kind::Identity: return "identity";
    case WeightSpec::Kind::Square: return "square";
    case WeightSpec::Kind::Const: return "const " + w.constant.str();
    case WeightSpec::Kind::Table: {
      std::string out = "table { ";
      for (size_t i = 0; i < w.table.size(); ++i) {
        if (i) out += ", ";
        out += w.table[i].first.str() + " : " + w.table[i].second.str();
      }
      return out + " }";
    }
  }
  return "identity";
}

std::string render_class_weight(const ClassWeightSpec& w) {
  switch (w.kind) {
    case ClassWeightSpec::Kind::Identity: return "identity";
    case ClassWeightSpec::Kind::Const: return "const " + w.constant->str();
    case ClassWeightSpec::Kind::Table: {
      std::string out = "table { ";
      for (size_t i = 0; i < w.table.size(); ++i) {
        if (i) out += ", ";
        out += w.table[i].first.str() + " : " + w.table[i].second.str();
      }
      return out + " }";
    }
  }
  return "identity";
}

} // namespace

std::string query_name(const Query& q) {
  switch (q.kind) {
    case Query::Kind::Chi: return "chi " + render_fnexpr(q.fn);
    case Query::Kind::Gamma: return "gamma " + render_fnexpr(q.fn);
    case Query::Kind::ChiPro:
      return "chipro " + render_fnexpr(q.fn) +
             (q.w ? " w " + std::to_string(q.w) : "");
    case Query::Kind::GammaPro:
      return "gammapro " + render_fnexpr(q.fn) +
             (q.w ? " w " + std::to_string(q.w) : "");
    case Query::Kind::Measure: return "measure " + render_cylexpr(q.cyl);
    case Query::Kind::IntegrateChi:
      return "integrate chi " + render_fnexpr(q.fn) + " f=" +
             render_weight(q.weight) + " p=" + render_int_system(q.p);
    case Query::Kind::IntegrateGamma:
      return "integrate gamma " + render_fnexpr(q.fn) + " f=" +
             render_class_weight(q.class_weight) + " F=" +
             render_class_system(q.classes);
  }
  return "";
}

std::string check_name(const Check& c) {
  std::string out;
  switch (c.kind) {
    case Check::Kind::ProjectionFormula: out = "projection_formula"; break;
    case Check::Kind::Naturality:
      out = "naturality " + c.morph + " over " + c.tower;
      break;
    case Check::Kind::System: out = "system " + c.tower; break;
    case Check::Kind::Diagrams: out = "diagrams " + c.tower; break;
    case Check::Kind::StabilityChi:
      out = "stability chi " + c.profn + " p=" + render_int_system(c.p);
      break;
    case Check::Kind::StabilityGamma:
      out = "stability gamma " + c.profn + " F=" + render_class_system(c.classes);
      break;
  }
  if (c.depth) out += " depth " + std::to_string(*c.depth);
  if (c.horizon) out += " horizon " + std::to_string(*c.horizon);
  if (c.seed) out += " seed " + std::to_string(*c.seed);
  return out;
}

std::string render(const Document& doc) {
  std::ostringstream os;
  for (const auto& [kind, idx] : doc.order) {
    switch (kind) {
      case Document::DeclKind::Atom: {
        const auto& a = doc.atoms[idx];
        os << "atom " << a.name << " euler " << a.euler << "\n";
        break;
      }
      case Document::DeclKind::Variety: {
        const auto& v = doc.varieties[idx];
        os << "variety " << v.name << " { ";
        const auto& strata = v.model->strata();
        for (size_t i = 0; i < strata.size(); ++i) {
          if (i) os << "; ";
          os << "stratum " << strata[i].id << " class " << strata[i].cls.str();
        }
        os << " }\n";
        break;
      }
      case Document::DeclKind::Morphism: {
        const auto& m = doc.morphisms[idx];
        os << "morphism " << m.name << " : " << m.source << " -> " << m.target
           << " { ";
        const auto& src = m.morphism->source()->strata();
        const auto& dst = m.morphism->target()->strata();
        for (size_t s = 0; s < src.size(); ++s) {
          if (s) os << "; ";
          os << "map " << src[s].id << " -> " << dst[m.morphism->map_of(s)].id
             << " fiber " << m.morphism->fiber()[s].str();
        }
        os << " }";
        if (m.strict) os << " strict";
        os << "\n";
        break;
      }
      case Document::DeclKind::Tower: {
        const auto& t = doc.towers[idx];
        os << "tower " << t.name << " = ";
        switch (t.kind) {
          case TowerDecl::Kind::Product:
            os << "product(" << t.variety << ")";
            break;
          case TowerDecl::Kind::Bundle: {
            os << "bundle(" << t.variety << "; ";
            for (size_t i = 0; i < t.fibers.size(); ++i) {
              if (i) os << ", ";
              os << t.fibers[i].str();
            }
            if (t.periodic) os << " periodic";
            os << ")";
            break;
          }
          case TowerDecl::Kind::Arcs:
            os << "arcs(" << t.variety << ", dim=" << t.dim << ")";
            break;
          case TowerDecl::Kind::Steps: {
            os << "steps(";
            for (size_t i = 0; i < t.morphs.size(); ++i) {
              if (i) os << ", ";
              os << t.morphs[i];
            }
            os << ")";
            break;
          }
        }
        os << "\n";
        break;
      }
      case Document::DeclKind::Profn: {
        const auto& p = doc.profns[idx];
        os << "profn " << p.name << " on " << p.tower << " level " << p.level
           << " { ";
        for (size_t i = 0; i < p.values.size(); ++i) {
          if (i) os << ", ";
          os << p.values[i].first << " : " << p.values[i].second;
        }
        os << " }\n";
        break;
      }
      case Document::DeclKind::Cyl: {
        const auto& c = doc.cyls[idx];
        os << "cyl " << c.name << " on " << c.tower << " level " << c.level
           << " { ";
        if (c.all) {
          os << "all";
        } else {
          for (size_t i = 0; i < c.strata.size(); ++i) {
            if (i) os << ", ";
            os << c.strata[i];
          }
        }
        os << " }\n";
        break;
      }
      case Document::DeclKind::Query:
        os << "query " << query_name(doc.queries[idx]) << "\n";
        break;
      case Document::DeclKind::Check:
        os << "check " << check_name(doc.checks[idx]) << "\n";
        break;
    }
  }
  return os.str();
}

// --- structural document equality --------------------------------------------------------

namespace {

template <typename T, typename Eq>
bool vec_equal(const std::vector<T>& a, const std::vector<T>& b, Eq eq) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!eq(a[i], b[i])) return false;
  return true;
}

bool class_list_equal(const std::vector<GClass>& a, const std::vector<GClass>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!(a[i] == b[i])) return false;
  return true;
}

} // namespace

bool document_equal(const Document& a, const Document& b) {
  if (!(*a.table == *b.table)) return false;
  if (a.order.size() != b.order.size()) return false;
  for (size_t i = 0; i < a.order.size(); ++i)
    if (a.order[i].first != b.order[i].first) return false;
  if (!vec_equal(a.atoms, b.atoms, [](const AtomDecl& x, const AtomDecl& y) {
        return x.name == y.name && x.euler == y.euler;
      }))
    return false;
  if (!vec_equal(a.varieties, b.varieties,
                 [](const VarietyDecl& x, const VarietyDecl& y) {
                   return x.name == y.name && geom::model_equal(x.model, y.model);
                 }))
    return false;
  if (!vec_equal(a.morphisms, b.morphisms,
                 [](const MorphismDecl& x, const MorphismDecl& y) {
                   return x.name == y.name && x.source == y.source &&
                          x.target == y.target && x.strict == y.strict &&
                          geom::morphism_equal(x.morphism, y.morphism);
                 }))
    return false;
  if (!vec_equal(a.towers, b.towers, [](const TowerDecl& x, const TowerDecl& y) {
        return x.name == y.name && x.kind == y.kind && x.variety == y.variety &&
               class_list_equal(x.fibers, y.fibers) && x.periodic == y.periodic &&
               x.dim == y.dim && x.morphs == y.morphs;
      }))
    return false;
  if (!vec_equal(a.profns, b.profns, [](const ProfnDecl& x, const ProfnDecl& y) {
        return x.name == y.name && x.tower == y.tower && x.level == y.level &&
               x.values == y.values;
      }))
    return false;
  if (!vec_equal(a.cyls, b.cyls, [](const CylDecl& x, const CylDecl& y) {
        return x.name == y.name && x.tower == y.tower && x.level == y.level &&
               x.all == y.all && x.strata == y.strata;
      }))
    return false;
  if (!vec_equal(a.queries, b.queries, [](const Query& x, const Query& y) {
        return query_name(x) == query_name(y);
      }))
    return false;
  if (!vec_equal(a.checks, b.checks, [](const Check& x, const Check& y) {
        return check_name(x) == check_name(y);
      }))
    return false;
  return true;
}

// --- standalone value parsers --------------------------------------------------------------

namespace {

void expect_value_end(Cursor& cur) {
  cur.skip_newlines();
  if (!cur.done())
    throw ParseError(cur.peek().loc, "trailing input after value");
}

} // namespace

GClass parse_gclass(std::string_view text, const AtomTablePtr& table) {
  Cursor cur(lex(text));
  cur.skip_newlines();
  GClass out = parse_classexpr(cur, table);
  expect_value_end(cur);
  return out;
}

Rat parse_rat(std::string_view text) {
  Cursor cur(lex(text));
  cur.skip_newlines();
  Rat out = parse_rat_expr(cur);
  expect_value_end(cur);
  return out;
}

LocClass parse_locclass(std::string_view text, const AtomTablePtr& table) {
  Cursor cur(lex(text));
  cur.skip_newlines();
  if (!cur.at(Token::Type::LParen)) {
    GClass num = parse_classexpr(cur, table);
    expect_value_end(cur);
    return LocClass::make(std::move(num));
  }
  cur.expect(Token::Type::LParen);
  GClass num = parse_classexpr(cur, table);
  cur.expect(Token::Type::RParen);
  cur.expect(Token::Type::Slash);
  cur.expect(Token::Type::LParen);
  std::vector<std::pair<GClass, unsigned>> den;
  do {
    GClass gen;
    if (cur.accept(Token::Type::LParen)) {
      gen = parse_classexpr(cur, table);
      cur.expect(Token::Type::RParen);
    } else {
      const Token tk = cur.peek();
      const std::string sym = cur.expect_ident();
      if (!table->contains(sym))
        throw ParseError(tk.loc, "unknown atom symbol: " + sym);
      gen = GClass::atom(table, sym);
    }
    unsigned exp = 1;
    if (cur.accept(Token::Type::Caret))
      exp = static_cast<unsigned>(cur.expect_small_int(1, 1 << 10));
    den.emplace_back(std::move(gen), exp);
  } while (cur.accept(Token::Type::Star));
  cur.expect(Token::Type::RParen);
  expect_value_end(cur);
  return LocClass::make(std::move(num), std::move(den));
}

} // namespace prochern::dsl
