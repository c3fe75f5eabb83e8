#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "radar/ids.hpp"

namespace radar {

// One user's persisted offline result. Items are sorted by score descending
// (ties ascending item_id), scores quantized to 6 decimals so the text
// persistence round-trips bit-exactly.
struct RadarEntry {
    UserId user_id = 0;
    std::vector<std::pair<ItemId, double>> items;
    Hour refreshed_at = 0;
    std::uint64_t version = 0;

    bool operator==(const RadarEntry&) const = default;
};

// Staleness histogram buckets: hours < 1, 2, 4, ..., 512, then overflow.
inline constexpr std::array<Hour, 10> kStalenessBucketBounds{1, 2, 4, 8, 16, 32, 64, 128, 256, 512};
inline constexpr std::size_t kNumStalenessBuckets = kStalenessBucketBounds.size() + 1;

std::size_t staleness_bucket(Hour staleness);
std::string staleness_bucket_label(std::size_t bucket);

struct StoreStats {
    std::uint64_t n_entries = 0;
    std::uint64_t hit_count = 0;
    std::uint64_t miss_count = 0;
    std::array<std::uint64_t, kNumStalenessBuckets> staleness_histogram{};
};

// Per-user versioned entries with atomic replacement: a reader sees either
// the previous complete entry or the new complete entry, never a mixture.
// Many concurrent readers, single logical writer per user.
class RadarStore {
  public:
    explicit RadarStore(std::uint32_t store_k = 200);
    ~RadarStore();
    RadarStore(RadarStore&&) noexcept;
    RadarStore& operator=(RadarStore&&) noexcept;
    RadarStore(const RadarStore&) = delete;
    RadarStore& operator=(const RadarStore&) = delete;

    std::uint32_t store_k() const;

    // Requires entry.version == current version + 1 (1 when absent) and the
    // entry invariants; throws SimError otherwise.
    void put(RadarEntry entry);

    struct ReadResult {
        std::shared_ptr<const RadarEntry> entry;
        Hour staleness_hours = 0;
    };

    // Serving read: records hit/miss and the staleness bucket. Stale entries
    // are served as-is; absence is a miss, not an error.
    std::optional<ReadResult> get(UserId user, Hour now);

    // Scheduler read: no stats recorded.
    std::shared_ptr<const RadarEntry> peek(UserId user) const;

    std::size_t size() const;
    StoreStats stats() const;
    std::vector<UserId> user_ids_sorted() const;

    // Canonical text persistence: `user version refreshed_at count id:score...`
    // records sorted by user id, 6-decimal scores. save(load(f)) is
    // byte-identical to f.
    void save(const std::filesystem::path& path) const;
    static RadarStore load(const std::filesystem::path& path);

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Shared validation for freshly built and loaded entries.
void validate_entry(const RadarEntry& entry, std::uint32_t store_k);

}  // namespace radar
