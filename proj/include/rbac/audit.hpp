#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rbac/admin_action.hpp"
#include "rbac/decision.hpp"

namespace rbac {

enum class EventKind { kAdmin, kDecision, kExecution };

std::string_view to_string(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view text);

struct AdminRecord {
  AdminAction action;

  friend bool operator==(const AdminRecord&, const AdminRecord&) = default;
};

struct DecisionRecord {
  std::string session;
  std::set<RoleId> active_roles;
  TransactionId transaction;
  std::optional<std::string> operand;
  // Set only for rule-4 access checks.
  std::optional<ObjectId> object;
  std::optional<AccessMode> mode;
  Decision decision;
  // Inputs the verdict was computed from, for replay.
  std::uint64_t history_mark = 0;
  std::uint64_t policy_revision = 0;

  friend bool operator==(const DecisionRecord&, const DecisionRecord&) = default;
};

struct ExecutionRecord {
  std::string session;
  TransactionId transaction;
  std::optional<std::string> operand;
  std::set<RoleId> active_roles;

  friend bool operator==(const ExecutionRecord&, const ExecutionRecord&) = default;
};

using AuditBody = std::variant<AdminRecord, DecisionRecord, ExecutionRecord>;

struct AuditEvent {
  std::uint64_t ordinal = 0;
  UserId actor;
  std::int64_t recorded_at_ms = 0;  // informational; never used for ordering
  AuditBody body;

  EventKind kind() const;
  const ExecutionRecord* execution() const { return std::get_if<ExecutionRecord>(&body); }
  const DecisionRecord* decision() const { return std::get_if<DecisionRecord>(&body); }
  const AdminRecord* admin() const { return std::get_if<AdminRecord>(&body); }

  friend bool operator==(const AuditEvent&, const AuditEvent&) = default;
};

/// Immutable snapshot of every event with ordinal <= high_water(). Copies are
/// cheap and share storage.
class AuditView {
 public:
  AuditView();
  /// Events must carry gapless ordinals starting at 1.
  explicit AuditView(std::vector<AuditEvent> events);

  std::span<const AuditEvent> events() const;
  std::uint64_t high_water() const { return size_; }
  bool empty() const { return size_ == 0; }

  /// The view truncated to ordinals <= mark.
  AuditView prefix(std::uint64_t mark) const;

 private:
  friend class AuditStore;
  AuditView(std::shared_ptr<const std::vector<AuditEvent>> events, std::size_t size);

  std::shared_ptr<const std::vector<AuditEvent>> events_;
  std::size_t size_ = 0;
};

struct AuditFilter {
  std::optional<UserId> actor;
  std::optional<EventKind> kind;
  std::optional<TransactionId> transaction;
  std::optional<std::string> operand;
  std::optional<std::uint64_t> first;
  std::optional<std::uint64_t> last;
};

/// Events matching every supplied field, ascending by ordinal. Admin events
/// never match a transaction or operand filter.
std::vector<AuditEvent> query(const AuditView& view, const AuditFilter& filter);

struct OpenReport {
  bool truncated = false;  // OPEN_TRUNCATED
  std::uint64_t quarantined_bytes = 0;
  std::filesystem::path quarantine_path;
  std::uint64_t high_water = 0;
  std::string reason;
};

using Clock = std::function<std::int64_t()>;

std::int64_t system_clock_ms();

/// Append-only event log. With a path, every event is one checksummed JSON
/// line, fsync'ed before append() returns; without one the store is
/// memory-only.
class AuditStore {
 public:
  explicit AuditStore(Clock clock = system_clock_ms);
  /// Opens (creating if absent) and recovers the log at `path`. A torn or
  /// corrupt tail is moved to `<path>.quarantine` and reported.
  explicit AuditStore(std::filesystem::path path, Clock clock = system_clock_ms);
  ~AuditStore();

  AuditStore(const AuditStore&) = delete;
  AuditStore& operator=(const AuditStore&) = delete;

  std::uint64_t append(const UserId& actor, AuditBody body);

  AuditView view() const;
  std::uint64_t high_water() const;
  const OpenReport& open_report() const { return report_; }
  const std::optional<std::filesystem::path>& path() const { return path_; }

  /// Serializes check-then-record on one operand key.
  std::unique_lock<std::mutex> lock_operand(const std::string& key);

 private:
  void recover();
  void write_line(const std::string& line);

  std::optional<std::filesystem::path> path_;
  Clock clock_;
  int fd_ = -1;
  OpenReport report_;

  mutable std::mutex write_mutex_;
  std::shared_ptr<std::vector<AuditEvent>> events_;

  std::mutex operand_mutex_;
  std::map<std::string, std::unique_ptr<std::mutex>> operand_locks_;
};

/// One log line, without the trailing newline.
std::string encode_event(const AuditEvent& event);
/// Parses and verifies one log line; nullopt on any checksum or schema defect.
std::optional<AuditEvent> decode_event(std::string_view line);

/// Atomically evaluates can_execute against a fresh view and records the
/// decision, plus an execution event iff allowed. Conflicting requests on one
/// operand key are serialized.
Decision record_execution(AuditStore& store, const Policy& p, const Session& s,
                          const TransactionId& t, const std::optional<std::string>& operand);

}  // namespace rbac
