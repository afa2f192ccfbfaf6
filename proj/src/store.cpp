#include "driveframe/store.hpp"

#include <json.hpp>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>

#include <fcntl.h>
#include <unistd.h>

namespace driveframe {

std::string_view to_string(RecordKind k) {
    switch (k) {
        case RecordKind::Sample: return "Sample";
        case RecordKind::Trip: return "Trip";
        case RecordKind::Event: return "Event";
        case RecordKind::Classification: return "Classification";
        case RecordKind::Tip: return "Tip";
        case RecordKind::Report: return "Report";
    }
    return "unknown";
}

RecordKind record_kind_from_string(std::string_view s) {
    if (s == "Sample") return RecordKind::Sample;
    if (s == "Trip") return RecordKind::Trip;
    if (s == "Event") return RecordKind::Event;
    if (s == "Classification") return RecordKind::Classification;
    if (s == "Tip") return RecordKind::Tip;
    if (s == "Report") return RecordKind::Report;
    throw ValidationError("store: unknown record kind '" + std::string(s) + "'");
}

std::string_view to_string(SyncState s) {
    switch (s) {
        case SyncState::Pending: return "Pending";
        case SyncState::Sent: return "Sent";
        case SyncState::Failed: return "Failed";
    }
    return "unknown";
}

std::vector<bool> FileUplink::send(const std::vector<StoreRecord>& batch) {
    std::ofstream out(path_, std::ios::app);
    std::vector<bool> acks;
    for (const StoreRecord& r : batch) {
        if (!out) {
            acks.push_back(false);
            continue;
        }
        nlohmann::json j{{"id", r.record_id},
                         {"kind", to_string(r.kind)},
                         {"driver", r.driver_id},
                         {"ts", r.created_ts},
                         {"payload", r.payload}};
        out << j.dump() << "\n";
        acks.push_back(static_cast<bool>(out));
    }
    out.flush();
    return acks;
}

Store::Store(std::filesystem::path path) : path_(std::move(path)) {
    replay();
    fd_ = ::open(path_.string().c_str(), O_WRONLY | O_APPEND | O_CREAT, 0644);
    if (fd_ < 0)
        throw StorageError("store: cannot open '" + path_.string() +
                           "': " + std::strerror(errno));
}

Store::~Store() {
    if (fd_ >= 0) ::close(fd_);
}

void Store::apply_put(const StoreRecord& record) {
    if (records_.emplace(record.record_id, record).second)
        insertion_order_.push_back(record.record_id);
}

void Store::replay() {
    std::ifstream in(path_, std::ios::binary);
    if (!in) return;  // fresh store

    std::string line;
    std::uintmax_t good_bytes = 0;
    bool torn = false;
    while (std::getline(in, line)) {
        // A line that never got its newline is a torn final write.
        const bool had_newline = !in.eof();
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("op") || !had_newline) {
            torn = true;
            break;
        }
        try {
            const std::string op = j.at("op").get<std::string>();
            if (op == "put") {
                StoreRecord r;
                r.record_id = j.at("id").get<std::string>();
                r.kind = record_kind_from_string(j.at("kind").get<std::string>());
                r.driver_id = j.at("driver").get<std::string>();
                r.created_ts = j.at("ts").get<double>();
                r.payload = j.at("payload").get<std::string>();
                apply_put(r);
            } else if (op == "enq") {
                const std::string id = j.at("id").get<std::string>();
                if (queue_.emplace(id, SyncQueueEntry{id, 0, SyncState::Pending}).second)
                    queue_order_.push_back(id);
            } else if (op == "mark") {
                const std::string id = j.at("id").get<std::string>();
                auto it = queue_.find(id);
                if (it != queue_.end()) {
                    const std::string st = j.at("state").get<std::string>();
                    it->second.attempts = j.at("attempts").get<int>();
                    it->second.state = st == "Sent"     ? SyncState::Sent
                                       : st == "Failed" ? SyncState::Failed
                                                        : SyncState::Pending;
                }
            } else {
                torn = true;
                break;
            }
        } catch (const nlohmann::json::exception&) {
            torn = true;
            break;
        }
        good_bytes += line.size() + 1;
    }

    if (torn) {
        // Drop the unreadable tail so future appends continue from the last
        // durable line.
        std::filesystem::resize_file(path_, good_bytes);
    }
}

void Store::append_line(const std::string& line, bool sync) {
    const char* data = line.data();
    std::size_t left = line.size();
    while (left > 0) {
        ssize_t n = ::write(fd_, data, left);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw StorageError(std::string("store: write failed: ") + std::strerror(errno));
        }
        data += n;
        left -= static_cast<std::size_t>(n);
    }
    if (sync && ::fsync(fd_) != 0)
        throw StorageError(std::string("store: fsync failed: ") + std::strerror(errno));
}

namespace {

std::string put_line(const StoreRecord& r) {
    nlohmann::json j{{"op", "put"},
                     {"id", r.record_id},
                     {"kind", to_string(r.kind)},
                     {"driver", r.driver_id},
                     {"ts", r.created_ts},
                     {"payload", r.payload}};
    return j.dump() + "\n";
}

} // namespace

std::string Store::put(const StoreRecord& record) {
    std::lock_guard lock(mu_);
    if (record.record_id.empty())
        throw ValidationError("store: record_id must not be empty");
    if (records_.count(record.record_id))
        throw ValidationError("store: duplicate record id '" + record.record_id + "'");
    append_line(put_line(record), true);
    apply_put(record);
    return record.record_id;
}

void Store::put_many(const std::vector<StoreRecord>& records) {
    std::lock_guard lock(mu_);
    std::string block;
    for (const StoreRecord& r : records) {
        if (r.record_id.empty())
            throw ValidationError("store: record_id must not be empty");
        if (records_.count(r.record_id))
            throw ValidationError("store: duplicate record id '" + r.record_id + "'");
        block += put_line(r);
    }
    if (block.empty()) return;
    append_line(block, true);
    for (const StoreRecord& r : records) apply_put(r);
}

StoreRecord Store::get(const std::string& record_id) const {
    std::lock_guard lock(mu_);
    auto it = records_.find(record_id);
    if (it == records_.end())
        throw NotFoundError("store: no record with id '" + record_id + "'");
    return it->second;
}

bool Store::contains(const std::string& record_id) const {
    std::lock_guard lock(mu_);
    return records_.count(record_id) > 0;
}

std::vector<StoreRecord> Store::query(RecordKind kind, double t0, double t1,
                                      const std::string& driver_id) const {
    std::lock_guard lock(mu_);
    std::vector<StoreRecord> out;
    for (const std::string& id : insertion_order_) {
        const StoreRecord& r = records_.at(id);
        if (r.kind != kind) continue;
        if (r.created_ts < t0 || r.created_ts >= t1) continue;
        if (!driver_id.empty() && r.driver_id != driver_id) continue;
        out.push_back(r);
    }
    std::stable_sort(out.begin(), out.end(), [](const StoreRecord& a, const StoreRecord& b) {
        return a.created_ts < b.created_ts;
    });
    return out;
}

std::vector<StoreRecord> Store::query_all(RecordKind kind,
                                          const std::string& driver_id) const {
    return query(kind, -std::numeric_limits<double>::infinity(),
                 std::numeric_limits<double>::infinity(), driver_id);
}

std::size_t Store::size() const {
    std::lock_guard lock(mu_);
    return records_.size();
}

void Store::enqueue(const std::string& record_id) {
    std::lock_guard lock(mu_);
    if (!records_.count(record_id))
        throw NotFoundError("store: cannot enqueue unknown record '" + record_id + "'");
    if (queue_.count(record_id)) return;  // at most one entry per record
    nlohmann::json j{{"op", "enq"}, {"id", record_id}};
    append_line(j.dump() + "\n", true);
    queue_.emplace(record_id, SyncQueueEntry{record_id, 0, SyncState::Pending});
    queue_order_.push_back(record_id);
}

void Store::enqueue_many(const std::vector<std::string>& record_ids) {
    std::lock_guard lock(mu_);
    std::string block;
    std::vector<std::string> fresh;
    std::set<std::string> batch_seen;
    for (const std::string& id : record_ids) {
        if (!records_.count(id))
            throw NotFoundError("store: cannot enqueue unknown record '" + id + "'");
        if (queue_.count(id) || !batch_seen.insert(id).second) continue;
        nlohmann::json j{{"op", "enq"}, {"id", id}};
        block += j.dump() + "\n";
        fresh.push_back(id);
    }
    if (block.empty()) return;
    append_line(block, true);
    for (auto& id : fresh) {
        queue_.emplace(id, SyncQueueEntry{id, 0, SyncState::Pending});
        queue_order_.push_back(std::move(id));
    }
}

FlushReport Store::flush(Connectivity connectivity, Uplink& uplink) {
    FlushReport report;
    if (connectivity == Connectivity::Offline) {
        std::lock_guard lock(mu_);
        for (const auto& [id, entry] : queue_)
            if (entry.state == SyncState::Pending) ++report.remaining_pending;
        return report;
    }

    // Snapshot the pending entries in enqueue order; sends happen outside
    // the lock so puts can proceed concurrently.
    std::vector<std::string> pending;
    {
        std::lock_guard lock(mu_);
        for (const std::string& id : queue_order_)
            if (queue_.at(id).state == SyncState::Pending) pending.push_back(id);
    }

    for (const std::string& id : pending) {
        StoreRecord record;
        int attempts = 0;
        {
            std::lock_guard lock(mu_);
            record = records_.at(id);
            attempts = queue_.at(id).attempts;
        }
        bool acked = false;
        try {
            auto acks = uplink.send({record});
            acked = acks.size() == 1 && acks[0];
        } catch (const std::exception&) {
            acked = false;
        }

        std::lock_guard lock(mu_);
        auto& entry = queue_.at(id);
        if (acked) {
            entry.state = SyncState::Sent;
            nlohmann::json j{{"op", "mark"}, {"id", id}, {"state", "Sent"},
                             {"attempts", entry.attempts}};
            append_line(j.dump() + "\n", true);
            ++report.sent;
        } else {
            entry.attempts = attempts + 1;
            nlohmann::json j{{"op", "mark"}, {"id", id}, {"state", "Pending"},
                             {"attempts", entry.attempts}};
            append_line(j.dump() + "\n", true);
            ++report.failed;
            break;  // preserve order: nothing later may overtake a failure
        }
    }

    std::lock_guard lock(mu_);
    for (const auto& [id, entry] : queue_)
        if (entry.state == SyncState::Pending) ++report.remaining_pending;
    return report;
}

std::vector<SyncQueueEntry> Store::queue_snapshot() const {
    std::lock_guard lock(mu_);
    std::vector<SyncQueueEntry> out;
    for (const std::string& id : queue_order_) out.push_back(queue_.at(id));
    return out;
}

} // namespace driveframe
