#include "rbac/dsl.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <variant>

#include "rbac/decision.hpp"
#include "rbac/sod.hpp"

namespace rbac {

std::string_view to_string(ParseErrorCode code) {
  switch (code) {
    case ParseErrorCode::kLex: return "LEX";
    case ParseErrorCode::kSyntax: return "SYNTAX";
    case ParseErrorCode::kDuplicateDecl: return "DUPLICATE_DECL";
    case ParseErrorCode::kUnknownRef: return "UNKNOWN_REF";
    case ParseErrorCode::kCycle: return "CYCLE";
    case ParseErrorCode::kModeConflict: return "MODE_CONFLICT";
    case ParseErrorCode::kRestrictionWidens: return "RESTRICTION_WIDENS";
    case ParseErrorCode::kStaticSod: return "STATIC_SOD";
  }
  return "SYNTAX";
}

std::string format_error(const ParseError& e) {
  return std::to_string(e.span.line) + ":" + std::to_string(e.span.column) + ": " +
         std::string(to_string(e.code)) + ": " + e.message;
}

std::string_view span_text(std::string_view source, const SourceSpan& span) {
  std::size_t line = 1;
  std::size_t pos = 0;
  while (line < span.line) {
    pos = source.find('\n', pos);
    if (pos == std::string_view::npos) return {};
    ++pos;
    ++line;
  }
  const std::size_t start = pos + span.column - 1;
  if (span.column == 0 || start > source.size()) return {};
  return source.substr(start, std::min(span.length, source.size() - start));
}

namespace {

// --- lexing ----------------------------------------------------------------------

enum class Tok { kIdent, kComma, kColon };

struct Token {
  Tok kind;
  std::string text;
  SourceSpan span;
};

bool is_ident_char(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
         c == '_';
}

// Length of the well-formed UTF-8 sequence at `s[i]`, or 0.
std::size_t utf8_length(std::string_view s, std::size_t i) {
  const auto b = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
  const unsigned char c = b(i);
  if (c < 0x80) return 1;
  std::size_t n = 0;
  unsigned char lo = 0x80, hi = 0xBF;
  if (c >= 0xC2 && c <= 0xDF) {
    n = 2;
  } else if (c >= 0xE0 && c <= 0xEF) {
    n = 3;
    if (c == 0xE0) lo = 0xA0;
    if (c == 0xED) hi = 0x9F;
  } else if (c >= 0xF0 && c <= 0xF4) {
    n = 4;
    if (c == 0xF0) lo = 0x90;
    if (c == 0xF4) hi = 0x8F;
  } else {
    return 0;
  }
  if (i + n > s.size()) return 0;
  if (b(i + 1) < lo || b(i + 1) > hi) return 0;
  for (std::size_t k = 2; k < n; ++k) {
    if (b(i + k) < 0x80 || b(i + k) > 0xBF) return 0;
  }
  return n;
}

struct Line {
  std::size_t number;
  std::vector<Token> tokens;
};

// Splits `source` into token lines. A line with a lexical error contributes
// the error and no tokens.
std::vector<Line> lex(std::string_view source, std::vector<ParseError>& errors) {
  std::vector<Line> lines;
  std::size_t start = 0;
  std::size_t number = 1;
  while (start <= source.size()) {
    std::size_t end = source.find('\n', start);
    if (end == std::string_view::npos) end = source.size();
    const std::string_view text = source.substr(start, end - start);

    Line line{number, {}};
    bool bad = false;
    bool in_comment = false;
    std::size_t i = 0;
    while (i < text.size()) {
      const unsigned char c = static_cast<unsigned char>(text[i]);
      const SourceSpan at{number, i + 1, 1};
      if (c >= 0x80) {
        const std::size_t n = utf8_length(text, i);
        if (n == 0) {
          errors.push_back({at, ParseErrorCode::kLex, "invalid UTF-8 byte sequence"});
          bad = true;
          break;
        }
        if (!in_comment) {
          errors.push_back({{number, i + 1, n}, ParseErrorCode::kLex, "unexpected non-ASCII character"});
          bad = true;
          break;
        }
        i += n;
        continue;
      }
      if (in_comment) {
        ++i;
        continue;
      }
      if (c == '#') {
        in_comment = true;
        ++i;
      } else if (c == ' ' || c == '\t' || c == '\r') {
        ++i;
      } else if (c == ',') {
        line.tokens.push_back({Tok::kComma, ",", at});
        ++i;
      } else if (c == ':') {
        line.tokens.push_back({Tok::kColon, ":", at});
        ++i;
      } else if (is_ident_char(c)) {
        std::size_t j = i;
        while (j < text.size() && is_ident_char(static_cast<unsigned char>(text[j]))) ++j;
        const SourceSpan span{number, i + 1, j - i};
        if (j - i > kMaxIdentifierLength) {
          errors.push_back({span, ParseErrorCode::kLex,
                            "identifier longer than " + std::to_string(kMaxIdentifierLength) + " characters"});
          bad = true;
          break;
        }
        line.tokens.push_back({Tok::kIdent, std::string(text.substr(i, j - i)), span});
        i = j;
      } else {
        std::string shown = (c >= 0x20 && c < 0x7F) ? std::string(1, static_cast<char>(c))
                                                     : "\\x" + std::to_string(static_cast<int>(c));
        errors.push_back({at, ParseErrorCode::kLex, "unexpected character '" + shown + "'"});
        bad = true;
        break;
      }
    }
    if (!bad && !line.tokens.empty()) lines.push_back(std::move(line));
    start = end + 1;
    ++number;
  }
  return lines;
}

// --- statements ------------------------------------------------------------------

struct Ref {
  std::string text;
  SourceSpan span;
};

struct ModeRef {
  AccessMode mode;
  SourceSpan span;
};

struct HeaderStmt {
  Ref keyword;
  Ref name;
  PolicyMode mode;
  bool single_active_role;
};
struct UserStmt { Ref id; };
struct ObjectStmt { Ref id; };
struct BindingStmt {
  Ref object;
  std::vector<ModeRef> modes;
};
struct TransactionStmt {
  Ref id;
  Ref procedure;
  std::vector<BindingStmt> bindings;
};
struct RoleStmt {
  Ref id;
  std::vector<Ref> allocates;
  std::vector<Ref> contains;
  std::vector<Ref> members;
};
struct StaticStmt {
  Ref id;
  std::vector<Ref> roles;
  int max = 1;
};
struct DynamicStmt {
  Ref id;
  std::vector<Ref> transactions;
  std::uint64_t since = 0;
};
struct RestrictStmt {
  Ref user;
  std::vector<Ref> transactions;
};
struct AccessStmt {
  Ref keyword;
  Ref role;
  Ref transaction;
  Ref object;
  AccessMode mode;
};

using Stmt = std::variant<HeaderStmt, UserStmt, ObjectStmt, TransactionStmt, RoleStmt, StaticStmt,
                          DynamicStmt, RestrictStmt, AccessStmt>;

struct SyntaxError {
  ParseError error;
};

class LineParser {
 public:
  explicit LineParser(const Line& line) : line_(line) {}

  Stmt parse() {
    const Ref kw = ident("a statement keyword");
    const std::string& k = kw.text;
    Stmt out;
    if (k == "policy") {
      out = header(kw);
    } else if (k == "user") {
      out = UserStmt{ident("a user id")};
    } else if (k == "object") {
      out = ObjectStmt{ident("an object id")};
    } else if (k == "transaction") {
      out = transaction();
    } else if (k == "role") {
      out = role();
    } else if (k == "static-sod") {
      out = static_sod();
    } else if (k == "dynamic-sod") {
      out = dynamic_sod();
    } else if (k == "restrict") {
      out = restrict();
    } else if (k == "access") {
      out = access(kw);
    } else {
      fail(kw.span, "unknown statement '" + k + "'");
    }
    if (!at_end()) fail(peek().span, "unexpected '" + peek().text + "' at end of statement");
    return out;
  }

 private:
  bool at_end() const { return pos_ >= line_.tokens.size(); }
  const Token& peek() const { return line_.tokens[pos_]; }

  SourceSpan end_span() const {
    const Token& last = line_.tokens.back();
    return {line_.number, last.span.column + last.span.length, 0};
  }

  [[noreturn]] void fail(SourceSpan span, std::string message) const {
    throw SyntaxError{{span, ParseErrorCode::kSyntax, std::move(message)}};
  }

  Ref ident(const char* what) {
    if (at_end()) fail(end_span(), std::string("expected ") + what + " at end of line");
    const Token& t = peek();
    if (t.kind != Tok::kIdent) fail(t.span, std::string("expected ") + what + ", found '" + t.text + "'");
    ++pos_;
    return {t.text, t.span};
  }

  bool accept_word(std::string_view word) {
    if (!at_end() && peek().kind == Tok::kIdent && peek().text == word) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect_word(std::string_view word) {
    if (at_end()) fail(end_span(), "expected '" + std::string(word) + "' at end of line");
    if (!accept_word(word)) {
      fail(peek().span, "expected '" + std::string(word) + "', found '" + peek().text + "'");
    }
  }

  bool accept(Tok kind) {
    if (!at_end() && peek().kind == kind) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::vector<Ref> list(const char* what) {
    std::vector<Ref> out{ident(what)};
    while (accept(Tok::kComma)) out.push_back(ident(what));
    return out;
  }

  std::uint64_t number(const char* what) {
    const Ref r = ident(what);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(r.text.data(), r.text.data() + r.text.size(), v);
    if (ec != std::errc{} || ptr != r.text.data() + r.text.size()) {
      fail(r.span, std::string("expected ") + what + ", found '" + r.text + "'");
    }
    return v;
  }

  ModeRef mode() {
    const Ref r = ident("an access mode");
    auto m = parse_access_mode(r.text);
    if (!m) fail(r.span, "unknown access mode '" + r.text + "' (read, write, append, execute)");
    return {*m, r.span};
  }

  HeaderStmt header(const Ref& kw) {
    HeaderStmt h{kw, ident("a policy name"), PolicyMode::kBoundTransaction, false};
    expect_word("mode");
    const Ref m = ident("bound or rule4");
    if (m.text == "bound") {
      h.mode = PolicyMode::kBoundTransaction;
    } else if (m.text == "rule4") {
      h.mode = PolicyMode::kRule4;
    } else {
      fail(m.span, "policy mode must be bound or rule4, found '" + m.text + "'");
    }
    h.single_active_role = accept_word("single-active-role");
    return h;
  }

  TransactionStmt transaction() {
    TransactionStmt t{ident("a transaction id"), {}, {}};
    expect_word("proc");
    t.procedure = ident("a procedure id");
    if (accept_word("binds")) {
      do {
        BindingStmt b{ident("an object id"), {}};
        if (!accept(Tok::kColon)) {
          fail(at_end() ? end_span() : peek().span, "expected ':' after bound object " + b.object.text);
        }
        b.modes.push_back(mode());
        while (accept(Tok::kComma)) b.modes.push_back(mode());
        t.bindings.push_back(std::move(b));
      } while (!at_end());
    }
    return t;
  }

  RoleStmt role() {
    RoleStmt r{ident("a role id"), {}, {}, {}};
    std::set<std::string> seen;
    while (!at_end()) {
      const Ref clause = ident("allocates, contains or members");
      if (!seen.insert(clause.text).second) fail(clause.span, "repeated clause '" + clause.text + "'");
      if (clause.text == "allocates") {
        r.allocates = list("a transaction id");
      } else if (clause.text == "contains") {
        r.contains = list("a role id");
      } else if (clause.text == "members") {
        r.members = list("a user id");
      } else {
        fail(clause.span, "expected allocates, contains or members, found '" + clause.text + "'");
      }
    }
    return r;
  }

  StaticStmt static_sod() {
    StaticStmt s{ident("a constraint id"), {}, 1};
    expect_word("roles");
    s.roles = list("a role id");
    if (accept_word("max")) {
      const SourceSpan at = at_end() ? end_span() : peek().span;
      const std::uint64_t k = number("a membership limit");
      if (k < 1 || k > 1'000'000) fail(at, "membership limit must be at least 1");
      s.max = static_cast<int>(k);
    }
    if (s.roles.size() < 2) fail(s.id.span, "static-sod " + s.id.text + " needs at least two roles");
    return s;
  }

  DynamicStmt dynamic_sod() {
    DynamicStmt d{ident("a constraint id"), {}, 0};
    expect_word("transactions");
    d.transactions = list("a transaction id");
    if (accept_word("since")) d.since = number("an event ordinal");
    if (d.transactions.size() < 2) {
      fail(d.id.span, "dynamic-sod " + d.id.text + " needs at least two transactions");
    }
    return d;
  }

  RestrictStmt restrict() {
    RestrictStmt r{ident("a user id"), {}};
    expect_word("to");
    if (!at_end()) r.transactions = list("a transaction id");
    return r;
  }

  AccessStmt access(const Ref& kw) {
    AccessStmt a{kw, ident("a role id"), ident("a transaction id"), ident("an object id"),
                 AccessMode::kRead};
    a.mode = mode().mode;
    return a;
  }

  const Line& line_;
  std::size_t pos_ = 0;
};

// --- resolution ------------------------------------------------------------------

class Resolver {
 public:
  Resolver(std::vector<Stmt> stmts, std::vector<ParseError>& errors)
      : stmts_(std::move(stmts)), errors_(errors) {}

  Policy run() {
    declare();
    build();
    check_cycles();
    check_restrictions();
    check_static_sod();
    return policy_;
  }

 private:
  void error(const SourceSpan& span, ParseErrorCode code, std::string message) {
    errors_.push_back({span, code, std::move(message)});
  }

  template <class Set>
  bool declare_once(Set& seen, const Ref& id, const char* kind) {
    if (seen.contains(id.text)) {
      error(id.span, ParseErrorCode::kDuplicateDecl,
            std::string(kind) + " '" + id.text + "' is declared more than once");
      return false;
    }
    seen.insert(id.text);
    return true;
  }

  void declare() {
    std::set<std::string> constraints;
    for (auto& stmt : stmts_) {
      if (auto* s = std::get_if<UserStmt>(&stmt)) {
        if (declare_once(users_, s->id, "user")) policy_.users.insert(UserId(s->id.text));
      } else if (auto* s = std::get_if<ObjectStmt>(&stmt)) {
        if (declare_once(objects_, s->id, "object")) policy_.objects.insert(ObjectId(s->id.text));
      } else if (auto* s = std::get_if<TransactionStmt>(&stmt)) {
        if (!declare_once(transactions_, s->id, "transaction")) s->id.text.clear();
      } else if (auto* s = std::get_if<RoleStmt>(&stmt)) {
        if (declare_once(roles_, s->id, "role")) {
          policy_.roles[RoleId(s->id.text)].id = RoleId(s->id.text);
        } else {
          s->id.text.clear();
        }
      } else if (auto* s = std::get_if<StaticStmt>(&stmt)) {
        if (!declare_once(constraints, s->id, "constraint")) s->id.text.clear();
      } else if (auto* s = std::get_if<DynamicStmt>(&stmt)) {
        if (!declare_once(constraints, s->id, "constraint")) s->id.text.clear();
      }
    }
  }

  bool resolve(const std::set<std::string>& known, const Ref& ref, const char* kind) {
    if (known.contains(ref.text)) return true;
    error(ref.span, ParseErrorCode::kUnknownRef,
          std::string("undeclared ") + kind + " '" + ref.text + "'");
    return false;
  }

  void build() {
    std::set<std::string> restricted;
    std::set<AccessEntry> rows;
    for (const auto& stmt : stmts_) {
      if (const auto* s = std::get_if<TransactionStmt>(&stmt)) {
        if (s->id.text.empty()) continue;
        Transaction t{TransactionId(s->id.text), s->procedure.text, {}};
        std::set<std::string> bound;
        for (const auto& b : s->bindings) {
          if (!bound.insert(b.object.text).second) {
            error(b.object.span, ParseErrorCode::kDuplicateDecl,
                  "transaction " + s->id.text + " binds '" + b.object.text + "' twice");
            continue;
          }
          if (!resolve(objects_, b.object, "object")) continue;
          Binding binding{ObjectId(b.object.text), {}};
          for (const auto& m : b.modes) binding.modes.insert(m.mode);
          t.bindings.push_back(std::move(binding));
        }
        if (s->bindings.empty() && policy_.mode == PolicyMode::kBoundTransaction) {
          error(s->id.span, ParseErrorCode::kModeConflict,
                "transaction " + s->id.text + " must bind data in a bound-mode policy");
        }
        policy_.transactions.emplace(t.id, std::move(t));
      } else if (const auto* s = std::get_if<RoleStmt>(&stmt)) {
        if (s->id.text.empty()) continue;
        Role& role = policy_.roles.at(RoleId(s->id.text));
        for (const auto& t : s->allocates) {
          if (resolve(transactions_, t, "transaction")) role.transactions.insert(TransactionId(t.text));
        }
        for (const auto& c : s->contains) {
          if (resolve(roles_, c, "role")) {
            role.contains.insert(RoleId(c.text));
            edges_.push_back({s->id.text, c});
          }
        }
        for (const auto& u : s->members) {
          if (resolve(users_, u, "user")) role.members.insert(UserId(u.text));
        }
      } else if (const auto* s = std::get_if<StaticStmt>(&stmt)) {
        if (s->id.text.empty()) continue;
        StaticSodConstraint c{s->id.text, {}, s->max};
        bool ok = true;
        for (const auto& r : s->roles) {
          if (!resolve(roles_, r, "role")) {
            ok = false;
          } else if (!c.roles.insert(RoleId(r.text)).second) {
            error(r.span, ParseErrorCode::kDuplicateDecl, "role '" + r.text + "' repeated in " + s->id.text);
            ok = false;
          }
        }
        if (ok) {
          policy_.static_sod.emplace(c.id, std::move(c));
          static_spans_[s->id.text] = s->id.span;
        }
      } else if (const auto* s = std::get_if<DynamicStmt>(&stmt)) {
        if (s->id.text.empty()) continue;
        DynamicSodConstraint c{s->id.text, {}, s->since};
        bool ok = true;
        for (const auto& t : s->transactions) {
          if (!resolve(transactions_, t, "transaction")) {
            ok = false;
          } else if (!c.transactions.insert(TransactionId(t.text)).second) {
            error(t.span, ParseErrorCode::kDuplicateDecl,
                  "transaction '" + t.text + "' repeated in " + s->id.text);
            ok = false;
          }
        }
        if (ok) policy_.dynamic_sod.emplace(c.id, std::move(c));
      } else if (const auto* s = std::get_if<RestrictStmt>(&stmt)) {
        if (!resolve(users_, s->user, "user")) continue;
        if (!restricted.insert(s->user.text).second) {
          error(s->user.span, ParseErrorCode::kDuplicateDecl,
                "user '" + s->user.text + "' is restricted more than once");
          continue;
        }
        auto& allowed = policy_.restrictions[UserId(s->user.text)];
        for (const auto& t : s->transactions) {
          if (resolve(transactions_, t, "transaction")) allowed.insert(TransactionId(t.text));
        }
        restrictions_.push_back(s);
      } else if (const auto* s = std::get_if<AccessStmt>(&stmt)) {
        if (policy_.mode != PolicyMode::kRule4) {
          error(s->keyword.span, ParseErrorCode::kModeConflict,
                "access rows are only allowed in a rule4 policy");
          continue;
        }
        const bool ok = resolve(roles_, s->role, "role") &
                        resolve(transactions_, s->transaction, "transaction") &
                        resolve(objects_, s->object, "object");
        if (!ok) continue;
        AccessEntry row{RoleId(s->role.text), TransactionId(s->transaction.text),
                        ObjectId(s->object.text), s->mode};
        if (!rows.insert(row).second) {
          error(s->keyword.span, ParseErrorCode::kDuplicateDecl, "access row repeated");
          continue;
        }
        policy_.access_table.insert(row);
      }
    }
  }

  void check_cycles() {
    std::map<std::string, std::vector<const Ref*>> out_edges;
    for (const auto& [from, to] : edges_) out_edges[from].push_back(&to);
    std::map<std::string, int> color;  // 0 white, 1 grey, 2 black
    std::set<std::pair<std::string, std::string>> reported;
    std::function<void(const std::string&)> visit = [&](const std::string& r) {
      color[r] = 1;
      for (const Ref* to : out_edges[r]) {
        if (color[to->text] == 1) {
          if (reported.insert({r, to->text}).second) {
            error(to->span, ParseErrorCode::kCycle,
                  to->text == r ? "role " + r + " contains itself"
                                : "containment " + r + " -> " + to->text + " closes a cycle");
          }
        } else if (color[to->text] == 0) {
          visit(to->text);
        }
      }
      color[r] = 2;
    };
    for (const auto& stmt : stmts_) {
      if (const auto* s = std::get_if<RoleStmt>(&stmt)) {
        if (!s->id.text.empty() && color[s->id.text] == 0) visit(s->id.text);
      }
    }
  }

  void check_restrictions() {
    for (const RestrictStmt* s : restrictions_) {
      const UserId u(s->user.text);
      const auto granted = granted_transactions(policy_, u);
      for (const auto& t : s->transactions) {
        if (!transactions_.contains(t.text) || granted.contains(TransactionId(t.text))) continue;
        error(t.span, ParseErrorCode::kRestrictionWidens,
              "restriction of " + s->user.text + " allows " + t.text +
                  " which none of the user's roles grants");
        policy_.restrictions[u].erase(TransactionId(t.text));
      }
    }
  }

  void check_static_sod() {
    for (const auto& v : check_static(policy_)) {
      std::string roles;
      for (const auto& r : v.roles) roles += (roles.empty() ? "" : ",") + r.str();
      error(static_spans_.at(v.constraint_id), ParseErrorCode::kStaticSod,
            "user " + v.user.str() + " is a member of " + roles + " which static-sod " +
                v.constraint_id + " forbids");
    }
  }

 public:
  void set_header(const HeaderStmt& h) {
    policy_.name = h.name.text;
    policy_.mode = h.mode;
    policy_.single_active_role = h.single_active_role;
  }

 private:
  std::vector<Stmt> stmts_;
  std::vector<ParseError>& errors_;
  Policy policy_;
  std::set<std::string> users_, objects_, transactions_, roles_;
  std::vector<std::pair<std::string, Ref>> edges_;
  std::vector<const RestrictStmt*> restrictions_;
  std::map<std::string, SourceSpan> static_spans_;
};

}  // namespace

ParseResult parse_policy(std::string_view source) {
  ParseResult result;
  auto& errors = result.errors;
  const std::vector<Line> lines = lex(source, errors);

  std::vector<Stmt> stmts;
  for (const Line& line : lines) {
    try {
      stmts.push_back(LineParser(line).parse());
    } catch (const SyntaxError& e) {
      errors.push_back(e.error);
    }
  }

  const HeaderStmt* header = nullptr;
  for (std::size_t i = 0; i < stmts.size(); ++i) {
    const auto* h = std::get_if<HeaderStmt>(&stmts[i]);
    if (h == nullptr) continue;
    if (header != nullptr) {
      errors.push_back({h->keyword.span, ParseErrorCode::kDuplicateDecl, "second policy header"});
    } else {
      header = h;
      if (i != 0) {
        errors.push_back({h->keyword.span, ParseErrorCode::kSyntax,
                          "the policy header must be the first statement"});
      }
    }
  }
  if (header == nullptr) {
    SourceSpan at{1, 1, 0};
    if (!lines.empty()) at = lines.front().tokens.front().span;
    errors.push_back({at, ParseErrorCode::kSyntax, "missing 'policy <name> mode <bound|rule4>' header"});
  }

  const HeaderStmt header_copy = header ? *header : HeaderStmt{};
  Resolver resolver(std::move(stmts), errors);
  if (header != nullptr) resolver.set_header(header_copy);
  Policy policy = resolver.run();

  if (errors.empty()) {
    // Anything resolution missed still surfaces as an error.
    for (const auto& v : validate_policy(policy)) {
      errors.push_back({{1, 1, 0}, ParseErrorCode::kSyntax, std::string(to_string(v.code)) + ": " + v.message});
    }
  }
  std::stable_sort(errors.begin(), errors.end(), [](const ParseError& a, const ParseError& b) {
    return std::tie(a.span.line, a.span.column) < std::tie(b.span.line, b.span.column);
  });
  if (errors.empty()) result.policy = std::move(policy);
  return result;
}

// --- serialization ---------------------------------------------------------------

namespace {

template <class Range, class Fn>
std::string joined(const Range& items, Fn&& fn) {
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out += ',';
    out += fn(item);
  }
  return out;
}

std::string id_of(const auto& id) { return id.str(); }

}  // namespace

std::string serialize_policy(const Policy& p) {
  const auto violations = validate_policy(p);
  if (!violations.empty()) {
    throw Error(ErrorCode::kIllformedPolicy, "cannot serialize an ill-formed policy: " +
                                                 std::string(to_string(violations.front().code)) +
                                                 " " + violations.front().message);
  }
  std::ostringstream out;
  out << "policy " << p.name << " mode " << to_string(p.mode);
  if (p.single_active_role) out << " single-active-role";
  out << "\n";

  out << "\n# users\n";
  for (const auto& u : p.users) out << "user " << u << "\n";

  out << "\n# objects\n";
  for (const auto& o : p.objects) out << "object " << o << "\n";

  out << "\n# transactions\n";
  for (const auto& [id, t] : p.transactions) {
    out << "transaction " << id << " proc " << t.procedure;
    std::vector<Binding> bindings = t.bindings;
    std::sort(bindings.begin(), bindings.end(),
              [](const Binding& a, const Binding& b) { return a.object < b.object; });
    if (!bindings.empty()) {
      out << " binds";
      for (const auto& b : bindings) {
        out << " " << b.object << ":"
            << joined(b.modes, [](AccessMode m) { return std::string(to_string(m)); });
      }
    }
    out << "\n";
  }

  out << "\n# roles\n";
  for (const auto& [id, r] : p.roles) {
    out << "role " << id;
    if (!r.transactions.empty()) out << " allocates " << joined(r.transactions, id_of<TransactionId>);
    if (!r.contains.empty()) out << " contains " << joined(r.contains, id_of<RoleId>);
    if (!r.members.empty()) out << " members " << joined(r.members, id_of<UserId>);
    out << "\n";
  }

  out << "\n# constraints\n";
  for (const auto& [id, c] : p.static_sod) {
    out << "static-sod " << id << " roles " << joined(c.roles, id_of<RoleId>) << " max "
        << c.max_memberships << "\n";
  }
  for (const auto& [id, c] : p.dynamic_sod) {
    out << "dynamic-sod " << id << " transactions " << joined(c.transactions, id_of<TransactionId>);
    if (c.since != 0) out << " since " << c.since;
    out << "\n";
  }

  out << "\n# restrictions\n";
  for (const auto& [u, allowed] : p.restrictions) {
    out << "restrict " << u << " to";
    if (!allowed.empty()) out << " " << joined(allowed, id_of<TransactionId>);
    out << "\n";
  }

  out << "\n# access\n";
  for (const auto& e : p.access_table) {
    out << "access " << e.role << " " << e.transaction << " " << e.object << " " << to_string(e.mode)
        << "\n";
  }
  return out.str();
}

}  // namespace rbac
