#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cbf/model.hpp"

namespace cbf {

/// Model frame a store was built for; immutable across updates.
struct StoreDescriptor {
    int J = 0, L = 0, P = 0;
    std::vector<std::string> group_labels;
    std::vector<std::string> covariate_names;
    std::vector<std::string> outcome_names;

    bool operator==(const StoreDescriptor&) const = default;
};

struct Store {
    StoreDescriptor descriptor;
    SufficientStats stats;
    std::string created;  // ISO 8601 UTC
    std::string updated;
};

inline constexpr int kStoreVersion = 1;

/// Byte layout: "CBF1", u64 header length, JSON header, then for each group
/// n, X'X, X'Y, Y'Y as little-endian doubles (column-major), then a CRC-64/XZ
/// of everything before it. Written to a temporary file and renamed.
void save(const Store& store, const std::filesystem::path& path);

/// Throws ChecksumMismatch, VersionUnsupported or Io.
Store load(const std::filesystem::path& path);

/// As load(), plus SchemaMismatch when the frame differs from `expected`.
Store load(const std::filesystem::path& path, const StoreDescriptor& expected);

/// Entrywise merge of a new batch; group indices must exist (UnknownGroup)
/// and the column counts must match (SchemaMismatch).
SufficientStats merge(const SufficientStats& old, const DataBatch& batch);

std::uint64_t crc64(const unsigned char* data, std::size_t size);

/// Advisory single-writer lock held as `<path>.lock` containing the owner pid.
/// LockHeld when the owner is alive, StaleLock when it is not (remove the
/// file to recover).
class StoreLock {
public:
    explicit StoreLock(const std::filesystem::path& store_path);
    ~StoreLock();
    StoreLock(const StoreLock&) = delete;
    StoreLock& operator=(const StoreLock&) = delete;

    const std::filesystem::path& path() const { return lock_; }

private:
    std::filesystem::path lock_;
};

std::string utc_timestamp();

} // namespace cbf
