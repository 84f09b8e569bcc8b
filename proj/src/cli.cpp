#include "rbac/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rbac/admin.hpp"
#include "rbac/audit.hpp"
#include "rbac/decision.hpp"
#include "rbac/dsl.hpp"

namespace rbac::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

struct IoFailure {
  std::string message;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure{"cannot read " + path};
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomically(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
    out.flush();
    if (!out) throw IoFailure{"cannot write " + tmp};
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoFailure{"cannot replace " + path + ": " + ec.message()};
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kStoreIo:
      return kIo;
    case ErrorCode::kUnknownUser:
    case ErrorCode::kUnknownRole:
    case ErrorCode::kUnknownTran:
    case ErrorCode::kUnknownObject:
    case ErrorCode::kModeMismatch:
    case ErrorCode::kInvalidIdentifier:
    case ErrorCode::kInvalidArgument:
      return kUsage;
    case ErrorCode::kIllformedPolicy:
      return kPolicy;
    default:
      return kDenied;
  }
}

bool is_session_denial(ErrorCode code) {
  return code == ErrorCode::kUnknownSessionSubject || code == ErrorCode::kRoleNotAuthorized ||
         code == ErrorCode::kCapExceeded;
}

std::string error_text(const Error& e) {
  return std::string(to_string(e.code())) + ": " + e.what();
}

// Parses a policy file, printing diagnostics. nullopt means exit kPolicy.
std::optional<Policy> load_policy(const std::string& path, std::ostream& err) {
  const std::string source = read_file(path);
  ParseResult r = parse_policy(source);
  for (const auto& e : r.errors) err << path << ":" << format_error(e) << "\n";
  return std::move(r.policy);
}

std::string resolve_audit_path(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("AUDIT_PATH"); env != nullptr) return env;
  return {};
}

std::unique_ptr<AuditStore> open_store(const std::string& path, std::ostream& err) {
  if (path.empty()) return std::make_unique<AuditStore>();
  auto store = std::make_unique<AuditStore>(fs::path(path));
  const auto& r = store->open_report();
  if (r.truncated) {
    err << "warning: OPEN_TRUNCATED: " << r.reason << "; " << r.quarantined_bytes
        << " bytes moved to " << r.quarantine_path.string() << "; high-water " << r.high_water
        << "\n";
  }
  return store;
}

json trace_json(const Decision& d) {
  json a = json::array();
  for (const auto& o : d.trace) {
    json step;
    step["rule"] = std::string(to_string(o.rule));
    step["pass"] = o.passed;
    step["detail"] = o.detail;
    if (o.witness) step["witness"] = *o.witness;
    a.push_back(std::move(step));
  }
  return a;
}

json decision_json(const Decision& d) {
  json j;
  j["allowed"] = d.allowed;
  const RuleOutcome* f = d.first_failure();
  j["first_failure"] = f ? json(std::string(to_string(f->rule))) : json(nullptr);
  j["trace"] = trace_json(d);
  return j;
}

std::string verdict_text(const Decision& d) {
  if (d.allowed) return "allow";
  const RuleOutcome* f = d.first_failure();
  std::string s = "deny " + std::string(to_string(f->rule)) + ": " + f->detail;
  if (f->witness) s += " (witness event " + std::to_string(*f->witness) + ")";
  return s;
}

void print_trace_text(std::ostream& out, const Decision& d) {
  for (const auto& o : d.trace) {
    out << "  " << to_string(o.rule) << " " << (o.passed ? "pass" : "FAIL") << "  " << o.detail;
    if (o.witness) out << " (witness event " << *o.witness << ")";
    out << "\n";
  }
}

Decision session_denial(const Error& e) {
  return Decision{false, {{RuleId::kR2, false, error_text(e), std::nullopt}}};
}

json ids_json(const auto& ids) {
  json a = json::array();
  for (const auto& id : ids) a.push_back(id.str());
  return a;
}

std::string ids_text(const auto& ids) {
  std::string out;
  for (const auto& id : ids) out += (out.empty() ? "" : ",") + id.str();
  return out.empty() ? "-" : out;
}

// --- subcommands -------------------------------------------------------------------

struct Common {
  std::string policy;
  std::string audit;
  std::string format = "text";
  bool json() const { return format == "json"; }
};

int run_validate(const Common& c, std::ostream& out, std::ostream& err) {
  const std::string source = read_file(c.policy);
  ParseResult r = parse_policy(source);
  if (c.json()) {
    json j;
    j["ok"] = r.ok();
    json errors = json::array();
    for (const auto& e : r.errors) {
      errors.push_back({{"line", e.span.line},
                        {"column", e.span.column},
                        {"length", e.span.length},
                        {"code", std::string(to_string(e.code))},
                        {"message", e.message}});
    }
    j["errors"] = std::move(errors);
    out << j.dump(2) << "\n";
  }
  for (const auto& e : r.errors) err << c.policy << ":" << format_error(e) << "\n";
  if (!r.ok()) return kPolicy;
  if (!c.json()) {
    const Policy& p = *r.policy;
    out << "ok: policy " << p.name << " (" << to_string(p.mode) << "): " << p.users.size()
        << " users, " << p.roles.size() << " roles, " << p.transactions.size()
        << " transactions, " << p.static_sod.size() + p.dynamic_sod.size() << " constraints\n";
  }
  return kOk;
}

struct CheckArgs {
  std::string user;
  std::vector<std::string> activate;
  std::string tran;
  std::string operand;
  std::string object;
  std::string mode;
};

int run_check(const Common& c, const CheckArgs& a, std::ostream& out, std::ostream& err) {
  auto policy = load_policy(c.policy, err);
  if (!policy) return kPolicy;
  const Policy& p = *policy;
  const std::string audit_path = resolve_audit_path(c.audit);
  AuditView history;
  if (!audit_path.empty()) history = open_store(audit_path, err)->view();

  const std::optional<std::string> operand =
      a.operand.empty() ? std::nullopt : std::optional<std::string>(a.operand);
  Decision d;
  try {
    Session s = open_session(p, UserId(a.user), a.user);
    for (const auto& r : a.activate) s = activate_role(p, s, RoleId(r));
    if (!a.object.empty()) {
      auto mode = parse_access_mode(a.mode);
      if (!mode) {
        err << "--mode must be one of read, write, append, execute\n";
        return kUsage;
      }
      d = check_access(p, s, TransactionId(a.tran), ObjectId(a.object), *mode, operand, history);
    } else {
      d = can_execute(p, s, TransactionId(a.tran), operand, history);
    }
  } catch (const Error& e) {
    if (!is_session_denial(e.code())) throw;
    d = session_denial(e);
  }

  if (c.json()) {
    out << decision_json(d).dump(2) << "\n";
  } else {
    out << verdict_text(d) << "\n";
    print_trace_text(out, d);
  }
  return d.allowed ? kOk : kDenied;
}

// Trace steps: "session <user> activate|deactivate <role>",
// "exec <user> <tran> [operand <key>]", "admin <words...>".
struct TraceStep {
  std::size_t line;
  std::vector<std::string> words;
};

std::vector<TraceStep> read_trace(const std::string& path, std::ostream& err, bool& ok) {
  std::istringstream in(read_file(path));
  std::vector<TraceStep> steps;
  std::string text;
  std::size_t number = 0;
  ok = true;
  while (std::getline(in, text)) {
    ++number;
    std::istringstream words_in(text);
    std::vector<std::string> words;
    for (std::string w; words_in >> w;) words.push_back(w);
    if (words.empty() || words[0].starts_with('#')) continue;
    const std::string& k = words[0];
    bool good = false;
    if (k == "session") {
      good = words.size() == 4 && (words[2] == "activate" || words[2] == "deactivate");
    } else if (k == "exec") {
      good = words.size() == 3 || (words.size() == 5 && words[3] == "operand");
    } else if (k == "admin") {
      good = words.size() >= 2;
    }
    if (!good) {
      err << path << ":" << number << ": malformed trace step '" << text << "'\n";
      ok = false;
      continue;
    }
    steps.push_back({number, std::move(words)});
  }
  return steps;
}

std::string joined_words(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) out += (out.empty() ? "" : " ") + w;
  return out;
}

int run_simulate(const Common& c, const std::string& trace_path, const std::string& actor,
                 std::ostream& out, std::ostream& err) {
  auto policy = load_policy(c.policy, err);
  if (!policy) return kPolicy;
  bool trace_ok = true;
  const auto steps = read_trace(trace_path, err, trace_ok);
  if (!trace_ok) return kPolicy;

  auto store = open_store(resolve_audit_path(c.audit), err);
  Administrator admin(std::move(*policy), *store);
  const AdminCapability cap = AdminCapability::issue(UserId(actor));
  std::map<UserId, Session> sessions;
  std::size_t denied = 0;
  json results = json::array();

  for (const TraceStep& step : steps) {
    const auto& w = step.words;
    json r;
    r["line"] = step.line;
    r["step"] = joined_words(w);
    std::string text;
    bool passed = true;
    try {
      if (w[0] == "session") {
        const auto snapshot = admin.snapshot();
        const UserId u(w[1]);
        auto it = sessions.find(u);
        Session s = it != sessions.end() ? it->second : open_session(*snapshot, u, u.str());
        s = w[2] == "activate" ? activate_role(*snapshot, s, RoleId(w[3]))
                               : deactivate_role(s, RoleId(w[3]));
        sessions[u] = s;
        text = "ok, active " + ids_text(s.active_roles);
        r["ok"] = true;
        r["active_roles"] = ids_json(s.active_roles);
      } else if (w[0] == "exec") {
        const UserId u(w[1]);
        auto it = sessions.find(u);
        const Session s = it != sessions.end() ? it->second : Session{u.str(), u, {}};
        const std::optional<std::string> operand =
            w.size() == 5 ? std::optional<std::string>(w[4]) : std::nullopt;
        const Decision d = record_execution(*store, *admin.snapshot(), s, TransactionId(w[2]), operand);
        passed = d.allowed;
        text = verdict_text(d);
        r["ok"] = d.allowed;
        r["decision"] = decision_json(d);
      } else {
        const AdminAction action =
            parse_admin_words(std::vector<std::string>(w.begin() + 1, w.end()));
        const auto published = admin.apply(cap, action);
        text = "ok, event " + std::to_string(published->revision);
        r["ok"] = true;
        r["event"] = published->revision;
      }
    } catch (const Error& e) {
      if (w[0] == "exec" && status_for(e.code()) != kDenied) {
        err << trace_path << ":" << step.line << ": " << error_text(e) << "\n";
        return status_for(e.code());
      }
      passed = false;
      text = "rejected " + error_text(e);
      r["ok"] = false;
      r["error"] = std::string(to_string(e.code()));
      r["message"] = e.what();
    }
    if (!passed) ++denied;
    if (!c.json()) out << step.line << ": " << joined_words(w) << " -> " << text << "\n";
    results.push_back(std::move(r));
  }

  if (c.json()) {
    json j;
    j["steps"] = std::move(results);
    j["denied"] = denied;
    out << j.dump(2) << "\n";
  } else {
    out << steps.size() << " steps, " << denied << " denied\n";
  }
  return denied == 0 ? kOk : kDenied;
}

int run_admin(const Common& c, const std::vector<std::string>& words, const std::string& actor,
              bool dry_run, std::ostream& out, std::ostream& err) {
  auto policy = load_policy(c.policy, err);
  if (!policy) return kPolicy;
  const AdminAction action = parse_admin_words(words);
  auto store = open_store(resolve_audit_path(c.audit), err);
  Administrator admin(std::move(*policy), *store);
  const auto published = admin.apply(AdminCapability::issue(UserId(actor)), action);
  if (!dry_run) write_file_atomically(c.policy, serialize_policy(*published));
  if (c.json()) {
    json j;
    j["ok"] = true;
    j["event"] = published->revision;
    j["verb"] = std::string(to_string(action.verb));
    j["args"] = action.args;
    out << j.dump(2) << "\n";
  } else {
    out << "ok: " << to_string(action.verb) << " " << joined_words(action.args) << " (event "
        << published->revision << ")\n";
  }
  return kOk;
}

struct QueryArgs {
  std::string actor, kind, tran, operand;
  std::optional<std::uint64_t> first, last;
};

std::string event_summary(const AuditEvent& e) {
  if (const auto* a = e.admin()) {
    return std::string(to_string(a->action.verb)) + " " + joined_words(a->action.args);
  }
  if (const auto* d = e.decision()) {
    std::string s = d->transaction.str();
    if (d->operand) s += " operand " + *d->operand;
    return s + " " + verdict_text(d->decision);
  }
  const auto& x = *e.execution();
  std::string s = x.transaction.str();
  if (x.operand) s += " operand " + *x.operand;
  return s + " as " + ids_text(x.active_roles);
}

int run_audit_query(const Common& c, const QueryArgs& q, std::ostream& out, std::ostream& err) {
  const std::string path = resolve_audit_path(c.audit);
  if (path.empty()) {
    err << "audit query needs --audit or AUDIT_PATH\n";
    return kUsage;
  }
  AuditFilter f;
  if (!q.actor.empty()) f.actor = UserId(q.actor);
  if (!q.kind.empty()) {
    f.kind = parse_event_kind(q.kind);
    if (!f.kind) {
      err << "--kind must be admin, decision or execution\n";
      return kUsage;
    }
  }
  if (!q.tran.empty()) f.transaction = TransactionId(q.tran);
  if (!q.operand.empty()) f.operand = q.operand;
  f.first = q.first;
  f.last = q.last;
  const auto events = query(open_store(path, err)->view(), f);
  if (c.json()) {
    json a = json::array();
    for (const auto& e : events) {
      json j = json::parse(encode_event(e));
      j.erase("crc32");
      a.push_back(std::move(j));
    }
    out << a.dump(2) << "\n";
  } else {
    for (const auto& e : events) {
      out << e.ordinal << " " << to_string(e.kind()) << " " << e.actor << " " << event_summary(e)
          << "\n";
    }
  }
  return kOk;
}

int run_least_privilege(const Common& c, const OrdinalRange& window, std::ostream& out,
                        std::ostream& err) {
  auto policy = load_policy(c.policy, err);
  if (!policy) return kPolicy;
  const std::string path = resolve_audit_path(c.audit);
  if (path.empty()) {
    err << "report least-privilege needs --audit or AUDIT_PATH\n";
    return kUsage;
  }
  const auto report = least_privilege_report(*policy, open_store(path, err)->view(), window);
  if (c.json()) {
    json a = json::array();
    for (const auto& e : report) {
      a.push_back({{"user", e.user.str()},
                   {"granted", ids_json(e.granted)},
                   {"exercised", ids_json(e.exercised)},
                   {"surplus", ids_json(e.surplus)}});
    }
    out << a.dump(2) << "\n";
  } else {
    for (const auto& e : report) {
      out << e.user << " granted=" << e.granted.size() << " exercised=" << e.exercised.size()
          << " surplus=" << ids_text(e.surplus) << "\n";
    }
  }
  return kOk;
}

int run_fmt(const Common& c, bool write, std::ostream& out, std::ostream& err) {
  auto policy = load_policy(c.policy, err);
  if (!policy) return kPolicy;
  const std::string text = serialize_policy(*policy);
  if (write) {
    write_file_atomically(c.policy, text);
  } else {
    out << text;
  }
  return kOk;
}

}  // namespace

AdminAction parse_admin_words(const std::vector<std::string>& words) {
  if (words.empty()) throw Error(ErrorCode::kInvalidArgument, "missing admin verb");
  std::string verb = words[0];
  if (verb == "change-function") verb = "change_function";
  if (verb == "add-sod") verb = "add_constraint";
  auto parsed = parse_admin_verb(verb);
  if (!parsed || (verb == "add_constraint" && words[0] != "add-sod")) {
    throw Error(ErrorCode::kInvalidArgument, "unknown admin verb '" + words[0] + "'");
  }
  AdminAction action{*parsed, std::vector<std::string>(words.begin() + 1, words.end())};
  if (action.verb == AdminVerb::kAddConstraint && !action.args.empty() &&
      action.args[0] == "dynamic") {
    // Recorded form carries the creation mark right after the id.
    if (action.args.size() < 2) throw Error(ErrorCode::kInvalidArgument, "add-sod dynamic needs an id");
    action.args.insert(action.args.begin() + 2, "auto");
  }
  return action;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Role-based access control policy kernel", "rbac"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub, bool policy_required) {
    auto* opt = sub->add_option("--policy", common.policy, "Policy file (.rbac)");
    if (policy_required) opt->required();
    sub->add_option("--audit", common.audit, "Audit log path (overrides AUDIT_PATH)");
    sub->add_option("--format", common.format, "Output format")
        ->check(CLI::IsMember({"text", "json"}));
  };

  auto* validate = app.add_subcommand("validate", "Parse and validate a policy");
  add_common(validate, true);

  CheckArgs check_args;
  auto* check = app.add_subcommand("check", "Evaluate one execution request");
  add_common(check, true);
  check->add_option("--user", check_args.user, "Subject user id")->required();
  check->add_option("--activate", check_args.activate, "Role to activate (repeatable)");
  check->add_option("--tran", check_args.tran, "Transaction to execute")->required();
  check->add_option("--operand", check_args.operand, "Operand key for dynamic SoD");
  auto* object_opt = check->add_option("--object", check_args.object, "Object (rule4 policies)");
  check->add_option("--mode", check_args.mode, "Access mode with --object")->needs(object_opt);

  std::string trace_path;
  std::string actor = "admin";
  auto* simulate = app.add_subcommand("simulate", "Replay a scripted trace");
  add_common(simulate, true);
  simulate->add_option("--trace", trace_path, "Trace file of session, exec and admin steps")->required();
  simulate->add_option("--actor", actor, "Administrator id for admin steps");

  std::vector<std::string> admin_words;
  bool dry_run = false;
  auto* admin = app.add_subcommand("admin", "Apply one administrative action");
  add_common(admin, true);
  admin->add_option("words", admin_words,
                    "grant|revoke|allocate|deallocate|contain|uncontain|onboard|offboard|"
                    "restrict|unrestrict|change-function|add-sod ...")
      ->required();
  admin->add_option("--actor", actor, "Administrator id");
  admin->add_flag("--dry-run", dry_run, "Do not rewrite the policy file");

  auto* audit = app.add_subcommand("audit", "Inspect the audit log");
  audit->require_subcommand(1);
  QueryArgs q;
  auto* audit_query = audit->add_subcommand("query", "List matching events");
  add_common(audit_query, false);
  audit_query->add_option("--actor", q.actor, "Only events by this actor");
  audit_query->add_option("--kind", q.kind, "admin, decision or execution");
  audit_query->add_option("--tran", q.tran, "Only events for this transaction");
  audit_query->add_option("--operand", q.operand, "Only events for this operand key");
  audit_query->add_option("--from", q.first, "First ordinal (inclusive)");
  audit_query->add_option("--to", q.last, "Last ordinal (inclusive)");

  auto* report = app.add_subcommand("report", "Reports");
  report->require_subcommand(1);
  OrdinalRange window;
  auto* least = report->add_subcommand("least-privilege", "Granted versus exercised transactions");
  add_common(least, true);
  least->add_option("--from", window.first, "First ordinal of the window");
  least->add_option("--to", window.last, "Last ordinal of the window");

  bool write = false;
  auto* fmt = app.add_subcommand("fmt", "Rewrite a policy in canonical form");
  add_common(fmt, true);
  fmt->add_flag("--write", write, "Rewrite the file in place");

  std::vector<const char*> argv{"rbac"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kUsage;
  }

  try {
    if (validate->parsed()) return run_validate(common, out, err);
    if (check->parsed()) return run_check(common, check_args, out, err);
    if (simulate->parsed()) return run_simulate(common, trace_path, actor, out, err);
    if (admin->parsed()) return run_admin(common, admin_words, actor, dry_run, out, err);
    if (audit_query->parsed()) return run_audit_query(common, q, out, err);
    if (least->parsed()) return run_least_privilege(common, window, out, err);
    if (fmt->parsed()) return run_fmt(common, write, out, err);
  } catch (const IoFailure& e) {
    err << "error: " << e.message << "\n";
    return kIo;
  } catch (const Error& e) {
    err << "error: " << error_text(e) << "\n";
    return status_for(e.code());
  }
  err << app.help();
  return kUsage;
}

}  // namespace rbac::cli
