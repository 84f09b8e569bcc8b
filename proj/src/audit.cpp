#include "rbac/audit.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>
#include <zlib.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace rbac {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kAdmin: return "admin";
    case EventKind::kDecision: return "decision";
    case EventKind::kExecution: return "execution";
  }
  return "admin";
}

std::optional<EventKind> parse_event_kind(std::string_view text) {
  for (EventKind k : {EventKind::kAdmin, EventKind::kDecision, EventKind::kExecution}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

EventKind AuditEvent::kind() const {
  switch (body.index()) {
    case 0: return EventKind::kAdmin;
    case 1: return EventKind::kDecision;
    default: return EventKind::kExecution;
  }
}

std::int64_t system_clock_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

// --- AuditView ---------------------------------------------------------------

AuditView::AuditView() : events_(std::make_shared<const std::vector<AuditEvent>>()) {}

AuditView::AuditView(std::vector<AuditEvent> events)
    : events_(std::make_shared<const std::vector<AuditEvent>>(std::move(events))),
      size_(events_->size()) {
  for (std::size_t i = 0; i < size_; ++i) {
    if ((*events_)[i].ordinal != i + 1) {
      throw Error(ErrorCode::kInvalidArgument, "audit view ordinals must be gapless from 1");
    }
  }
}

AuditView::AuditView(std::shared_ptr<const std::vector<AuditEvent>> events, std::size_t size)
    : events_(std::move(events)), size_(size) {}

std::span<const AuditEvent> AuditView::events() const {
  return std::span<const AuditEvent>(events_->data(), size_);
}

AuditView AuditView::prefix(std::uint64_t mark) const {
  return AuditView(events_, std::min<std::uint64_t>(mark, size_));
}

std::vector<AuditEvent> query(const AuditView& view, const AuditFilter& f) {
  std::vector<AuditEvent> out;
  for (const AuditEvent& e : view.events()) {
    if (f.first && e.ordinal < *f.first) continue;
    if (f.last && e.ordinal > *f.last) continue;
    if (f.actor && e.actor != *f.actor) continue;
    if (f.kind && e.kind() != *f.kind) continue;
    if (f.transaction || f.operand) {
      const TransactionId* t = nullptr;
      const std::optional<std::string>* operand = nullptr;
      if (const auto* x = e.execution()) {
        t = &x->transaction;
        operand = &x->operand;
      } else if (const auto* d = e.decision()) {
        t = &d->transaction;
        operand = &d->operand;
      } else {
        continue;
      }
      if (f.transaction && *t != *f.transaction) continue;
      if (f.operand && *operand != f.operand) continue;
    }
    out.push_back(e);
  }
  return out;
}

// --- line codec ----------------------------------------------------------------

namespace {

constexpr std::string_view kCrcKey = ",\"crc32\":";

ordered_json roles_json(const std::set<RoleId>& roles) {
  ordered_json a = ordered_json::array();
  for (const auto& r : roles) a.push_back(r.str());
  return a;
}

std::set<RoleId> roles_from(const ordered_json& a) {
  std::set<RoleId> out;
  for (const auto& r : a) out.insert(RoleId(r.get<std::string>()));
  return out;
}

ordered_json operand_json(const std::optional<std::string>& o) {
  return o ? ordered_json(*o) : ordered_json(nullptr);
}

std::optional<std::string> operand_from(const ordered_json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<std::string>();
}

ordered_json body_json(const AuditBody& body) {
  ordered_json j;
  if (const auto* a = std::get_if<AdminRecord>(&body)) {
    j["verb"] = std::string(to_string(a->action.verb));
    j["args"] = a->action.args;
  } else if (const auto* d = std::get_if<DecisionRecord>(&body)) {
    j["session"] = d->session;
    j["active_roles"] = roles_json(d->active_roles);
    j["tran"] = d->transaction.str();
    j["operand"] = operand_json(d->operand);
    if (d->object) j["object"] = d->object->str();
    if (d->mode) j["mode"] = std::string(to_string(*d->mode));
    j["allowed"] = d->decision.allowed;
    ordered_json trace = ordered_json::array();
    for (const auto& o : d->decision.trace) {
      ordered_json step;
      step["rule"] = std::string(to_string(o.rule));
      step["pass"] = o.passed;
      step["detail"] = o.detail;
      if (o.witness) step["witness"] = *o.witness;
      trace.push_back(std::move(step));
    }
    j["trace"] = std::move(trace);
    j["history_mark"] = d->history_mark;
    j["policy_revision"] = d->policy_revision;
  } else {
    const auto& x = std::get<ExecutionRecord>(body);
    j["session"] = x.session;
    j["tran"] = x.transaction.str();
    j["operand"] = operand_json(x.operand);
    j["active_roles"] = roles_json(x.active_roles);
  }
  return j;
}

AuditBody body_from(EventKind kind, const ordered_json& j) {
  switch (kind) {
    case EventKind::kAdmin: {
      auto verb = parse_admin_verb(j.at("verb").get<std::string>());
      if (!verb) throw std::invalid_argument("bad verb");
      return AdminRecord{AdminAction{*verb, j.at("args").get<std::vector<std::string>>()}};
    }
    case EventKind::kDecision: {
      DecisionRecord d;
      d.session = j.at("session").get<std::string>();
      d.active_roles = roles_from(j.at("active_roles"));
      d.transaction = TransactionId(j.at("tran").get<std::string>());
      d.operand = operand_from(j.at("operand"));
      if (j.contains("object")) d.object = ObjectId(j.at("object").get<std::string>());
      if (j.contains("mode")) {
        d.mode = parse_access_mode(j.at("mode").get<std::string>());
        if (!d.mode) throw std::invalid_argument("bad mode");
      }
      d.decision.allowed = j.at("allowed").get<bool>();
      for (const auto& step : j.at("trace")) {
        auto rule = parse_rule_id(step.at("rule").get<std::string>());
        if (!rule) throw std::invalid_argument("bad rule");
        RuleOutcome o{*rule, step.at("pass").get<bool>(), step.at("detail").get<std::string>(),
                      std::nullopt};
        if (step.contains("witness")) o.witness = step.at("witness").get<std::uint64_t>();
        d.decision.trace.push_back(std::move(o));
      }
      d.history_mark = j.at("history_mark").get<std::uint64_t>();
      d.policy_revision = j.at("policy_revision").get<std::uint64_t>();
      return d;
    }
    case EventKind::kExecution: {
      ExecutionRecord x;
      x.session = j.at("session").get<std::string>();
      x.transaction = TransactionId(j.at("tran").get<std::string>());
      x.operand = operand_from(j.at("operand"));
      x.active_roles = roles_from(j.at("active_roles"));
      return x;
    }
  }
  throw std::invalid_argument("bad kind");
}

std::uint32_t crc_of(std::string_view bytes) {
  return static_cast<std::uint32_t>(
      ::crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

}  // namespace

std::string encode_event(const AuditEvent& e) {
  ordered_json j;
  j["ord"] = e.ordinal;
  j["kind"] = std::string(to_string(e.kind()));
  j["actor"] = e.actor.str();
  j["ts"] = e.recorded_at_ms;
  j["body"] = body_json(e.body);
  std::string line = j.dump();
  line.pop_back();  // reopen the object for the trailing checksum member
  line += kCrcKey;
  const std::uint32_t crc = crc_of(line);
  line += std::to_string(crc);
  line += '}';
  return line;
}

std::optional<AuditEvent> decode_event(std::string_view line) {
  const auto pos = line.rfind(kCrcKey);
  if (pos == std::string_view::npos || line.empty() || line.back() != '}') return std::nullopt;
  const std::string_view covered = line.substr(0, pos + kCrcKey.size());
  const std::string_view digits = line.substr(covered.size(), line.size() - covered.size() - 1);
  if (digits.empty() || digits.size() > 10) return std::nullopt;
  std::uint64_t stored = 0;
  for (char c : digits) {
    if (c < '0' || c > '9') return std::nullopt;
    stored = stored * 10 + static_cast<std::uint64_t>(c - '0');
  }
  if (stored != crc_of(covered)) return std::nullopt;
  try {
    const auto j = ordered_json::parse(line);
    auto kind = parse_event_kind(j.at("kind").get<std::string>());
    if (!kind) return std::nullopt;
    AuditEvent e;
    e.ordinal = j.at("ord").get<std::uint64_t>();
    e.actor = UserId(j.at("actor").get<std::string>());
    e.recorded_at_ms = j.at("ts").get<std::int64_t>();
    e.body = body_from(*kind, j.at("body"));
    return e;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

// --- AuditStore ----------------------------------------------------------------

namespace {

[[noreturn]] void throw_io(const std::string& what, const std::filesystem::path& path) {
  throw Error(ErrorCode::kStoreIo, what + " " + path.string() + ": " + std::strerror(errno));
}

}  // namespace

AuditStore::AuditStore(Clock clock)
    : clock_(std::move(clock)), events_(std::make_shared<std::vector<AuditEvent>>()) {}

AuditStore::AuditStore(std::filesystem::path path, Clock clock)
    : path_(std::move(path)),
      clock_(std::move(clock)),
      events_(std::make_shared<std::vector<AuditEvent>>()) {
  recover();
  fd_ = ::open(path_->c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) throw_io("cannot open audit log", *path_);
}

AuditStore::~AuditStore() {
  if (fd_ >= 0) ::close(fd_);
}

void AuditStore::recover() {
  std::error_code ec;
  if (!std::filesystem::exists(*path_, ec)) return;
  std::ifstream in(*path_, std::ios::binary);
  if (!in) throw_io("cannot read audit log", *path_);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string data = buf.str();

  std::size_t offset = 0;
  while (offset < data.size()) {
    const std::size_t nl = data.find('\n', offset);
    if (nl == std::string::npos) {
      report_.reason = "unterminated record at byte " + std::to_string(offset);
      break;
    }
    auto event = decode_event(std::string_view(data).substr(offset, nl - offset));
    if (!event) {
      report_.reason = "corrupt record at byte " + std::to_string(offset);
      break;
    }
    if (event->ordinal != events_->size() + 1) {
      report_.reason = "ordinal gap at byte " + std::to_string(offset);
      break;
    }
    events_->push_back(std::move(*event));
    offset = nl + 1;
  }

  if (offset < data.size()) {
    report_.truncated = true;
    report_.quarantined_bytes = data.size() - offset;
    report_.quarantine_path = path_->string() + ".quarantine";
    std::ofstream q(report_.quarantine_path, std::ios::binary | std::ios::app);
    q.write(data.data() + offset, static_cast<std::streamsize>(data.size() - offset));
    q.flush();
    if (!q) throw_io("cannot write quarantine", report_.quarantine_path);
    std::filesystem::resize_file(*path_, offset, ec);
    if (ec) throw Error(ErrorCode::kStoreIo, "cannot truncate " + path_->string() + ": " + ec.message());
  }
  report_.high_water = events_->size();
}

void AuditStore::write_line(const std::string& line) {
  const char* p = line.data();
  std::size_t left = line.size();
  while (left > 0) {
    const ssize_t n = ::write(fd_, p, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw_io("cannot append to", *path_);
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }
  if (::fsync(fd_) != 0) throw_io("cannot sync", *path_);
}

std::uint64_t AuditStore::append(const UserId& actor, AuditBody body) {
  std::lock_guard lock(write_mutex_);
  AuditEvent e{events_->size() + 1, actor, clock_ ? clock_() : 0, std::move(body)};
  if (fd_ >= 0) write_line(encode_event(e) + '\n');
  // Views share the vector; copy before growing if any are still alive.
  if (events_.use_count() > 1) events_ = std::make_shared<std::vector<AuditEvent>>(*events_);
  events_->push_back(std::move(e));
  return events_->size();
}

AuditView AuditStore::view() const {
  std::lock_guard lock(write_mutex_);
  return AuditView(events_, events_->size());
}

std::uint64_t AuditStore::high_water() const {
  std::lock_guard lock(write_mutex_);
  return events_->size();
}

std::unique_lock<std::mutex> AuditStore::lock_operand(const std::string& key) {
  std::mutex* m = nullptr;
  {
    std::lock_guard lock(operand_mutex_);
    auto& slot = operand_locks_[key];
    if (!slot) slot = std::make_unique<std::mutex>();
    m = slot.get();
  }
  return std::unique_lock<std::mutex>(*m);
}

Decision record_execution(AuditStore& store, const Policy& p, const Session& s,
                          const TransactionId& t, const std::optional<std::string>& operand) {
  std::unique_lock<std::mutex> guard;
  if (operand) guard = store.lock_operand(*operand);
  const AuditView view = store.view();
  Decision d = can_execute(p, s, t, operand, view);

  DecisionRecord rec;
  rec.session = s.id;
  rec.active_roles = s.active_roles;
  rec.transaction = t;
  rec.operand = operand;
  rec.decision = d;
  rec.history_mark = view.high_water();
  rec.policy_revision = p.revision;
  store.append(s.subject, std::move(rec));
  if (d.allowed) store.append(s.subject, ExecutionRecord{s.id, t, operand, s.active_roles});
  return d;
}

}  // namespace rbac
