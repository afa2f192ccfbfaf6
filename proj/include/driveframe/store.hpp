#pragma once

#include "driveframe/errors.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

namespace driveframe {

class StorageError : public Error {
public:
    explicit StorageError(const std::string& msg) : Error(msg) {}
};

class NotFoundError : public Error {
public:
    explicit NotFoundError(const std::string& msg) : Error(msg) {}
};

enum class RecordKind { Sample, Trip, Event, Classification, Tip, Report };

std::string_view to_string(RecordKind k);
RecordKind record_kind_from_string(std::string_view s);

struct StoreRecord {
    std::string record_id;
    RecordKind kind = RecordKind::Sample;
    std::string driver_id;
    double created_ts = 0.0;
    std::string payload;  // canonical serialized form of the domain object

    bool operator==(const StoreRecord&) const = default;
};

enum class SyncState { Pending, Sent, Failed };

std::string_view to_string(SyncState s);

struct SyncQueueEntry {
    std::string record_id;
    int attempts = 0;
    SyncState state = SyncState::Pending;
};

enum class Connectivity { Online, Offline };

struct FlushReport {
    std::size_t sent = 0;
    std::size_t failed = 0;
    std::size_t remaining_pending = 0;
};

// Delivery target for the sync queue. Returns one ack per record in the
// batch. No real server ships with this project.
class Uplink {
public:
    virtual ~Uplink() = default;
    virtual std::vector<bool> send(const std::vector<StoreRecord>& batch) = 0;
};

// Writes acked record payloads to a jsonl file; stands in for a server.
class FileUplink : public Uplink {
public:
    explicit FileUplink(std::filesystem::path path) : path_(std::move(path)) {}
    std::vector<bool> send(const std::vector<StoreRecord>& batch) override;

private:
    std::filesystem::path path_;
};

// Single-file append-only record store. Every mutation is fsynced before
// the call returns, so a process crash never loses an acknowledged write;
// reopening replays the log and truncates a torn tail. Single writer,
// multiple readers.
class Store {
public:
    explicit Store(std::filesystem::path path);
    ~Store();
    Store(const Store&) = delete;
    Store& operator=(const Store&) = delete;

    std::string put(const StoreRecord& record);
    void put_many(const std::vector<StoreRecord>& records);  // one fsync
    StoreRecord get(const std::string& record_id) const;
    bool contains(const std::string& record_id) const;
    // created_ts in [t0, t1), ordered by created_ts; empty driver matches all.
    std::vector<StoreRecord> query(RecordKind kind, double t0, double t1,
                                   const std::string& driver_id = "") const;
    std::vector<StoreRecord> query_all(RecordKind kind,
                                       const std::string& driver_id = "") const;
    std::size_t size() const;

    void enqueue(const std::string& record_id);
    void enqueue_many(const std::vector<std::string>& record_ids);  // one fsync
    FlushReport flush(Connectivity connectivity, Uplink& uplink);
    std::vector<SyncQueueEntry> queue_snapshot() const;

private:
    void replay();
    void append_line(const std::string& line, bool sync);
    void apply_put(const StoreRecord& record);

    std::filesystem::path path_;
    int fd_ = -1;
    mutable std::mutex mu_;
    std::map<std::string, StoreRecord> records_;
    std::vector<std::string> insertion_order_;
    std::map<std::string, SyncQueueEntry> queue_;
    std::vector<std::string> queue_order_;
};

} // namespace driveframe
