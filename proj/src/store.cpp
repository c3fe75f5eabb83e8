#include "radar/store.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <shared_mutex>
#include <sstream>
#include <unordered_map>

#include "radar/errors.hpp"
#include "radar/retrieval.hpp"
#include "radar/textio.hpp"

namespace radar {

std::size_t staleness_bucket(Hour staleness) {
    for (std::size_t i = 0; i < kStalenessBucketBounds.size(); ++i)
        if (staleness < kStalenessBucketBounds[i]) return i;
    return kNumStalenessBuckets - 1;
}

std::string staleness_bucket_label(std::size_t bucket) {
    if (bucket < kStalenessBucketBounds.size())
        return "staleness_lt_" + std::to_string(kStalenessBucketBounds[bucket]) + "h";
    return "staleness_ge_" + std::to_string(kStalenessBucketBounds.back()) + "h";
}

void validate_entry(const RadarEntry& entry, std::uint32_t store_k) {
    if (entry.version < 1) throw SimError("radar entry: version must be >= 1");
    if (entry.items.size() > store_k) throw SimError("radar entry: more items than store_k");
    for (std::size_t i = 0; i < entry.items.size(); ++i) {
        const auto& [id, score] = entry.items[i];
        if (!std::isfinite(score)) throw SimError("radar entry: non-finite score");
        if (quantize6(score) != score)
            throw SimError("radar entry: score not quantized to 6 decimals");
        if (i > 0) {
            const auto& [prev_id, prev_score] = entry.items[i - 1];
            if (!ranks_before(prev_score, prev_id, score, id))
                throw SimError("radar entry: items not in canonical order");
            if (prev_id == id) throw SimError("radar entry: duplicate item id");
        }
    }
}

struct RadarStore::Impl {
    explicit Impl(std::uint32_t k) : store_k(k) {}

    std::uint32_t store_k;
    mutable std::shared_mutex mutex;
    std::unordered_map<UserId, std::shared_ptr<const RadarEntry>> entries;

    mutable std::atomic<std::uint64_t> hits{0};
    mutable std::atomic<std::uint64_t> misses{0};
    mutable std::array<std::atomic<std::uint64_t>, kNumStalenessBuckets> buckets{};
};

RadarStore::RadarStore(std::uint32_t store_k) : impl_(std::make_unique<Impl>(store_k)) {
    if (store_k < 1) throw ValidationError("store_k: must be >= 1");
}
RadarStore::~RadarStore() = default;
RadarStore::RadarStore(RadarStore&&) noexcept = default;
RadarStore& RadarStore::operator=(RadarStore&&) noexcept = default;

std::uint32_t RadarStore::store_k() const { return impl_->store_k; }

void RadarStore::put(RadarEntry entry) {
    validate_entry(entry, impl_->store_k);
    auto fresh = std::make_shared<const RadarEntry>(std::move(entry));
    std::unique_lock lock(impl_->mutex);
    auto it = impl_->entries.find(fresh->user_id);
    const std::uint64_t current = it == impl_->entries.end() ? 0 : it->second->version;
    if (fresh->version != current + 1)
        throw SimError("put_entry: version must be exactly current + 1 (got " +
                       std::to_string(fresh->version) + ", current " + std::to_string(current) +
                       ")");
    impl_->entries[fresh->user_id] = std::move(fresh);
}

std::optional<RadarStore::ReadResult> RadarStore::get(UserId user, Hour now) {
    std::shared_ptr<const RadarEntry> entry;
    {
        std::shared_lock lock(impl_->mutex);
        auto it = impl_->entries.find(user);
        if (it != impl_->entries.end()) entry = it->second;
    }
    if (!entry) {
        impl_->misses.fetch_add(1, std::memory_order_relaxed);
        return std::nullopt;
    }
    const Hour staleness = now - entry->refreshed_at;
    impl_->hits.fetch_add(1, std::memory_order_relaxed);
    impl_->buckets[staleness_bucket(staleness)].fetch_add(1, std::memory_order_relaxed);
    return ReadResult{std::move(entry), staleness};
}

std::shared_ptr<const RadarEntry> RadarStore::peek(UserId user) const {
    std::shared_lock lock(impl_->mutex);
    auto it = impl_->entries.find(user);
    return it == impl_->entries.end() ? nullptr : it->second;
}

std::size_t RadarStore::size() const {
    std::shared_lock lock(impl_->mutex);
    return impl_->entries.size();
}

StoreStats RadarStore::stats() const {
    StoreStats s;
    s.n_entries = size();
    s.hit_count = impl_->hits.load(std::memory_order_relaxed);
    s.miss_count = impl_->misses.load(std::memory_order_relaxed);
    for (std::size_t i = 0; i < kNumStalenessBuckets; ++i)
        s.staleness_histogram[i] = impl_->buckets[i].load(std::memory_order_relaxed);
    return s;
}

std::vector<UserId> RadarStore::user_ids_sorted() const {
    std::vector<UserId> ids;
    {
        std::shared_lock lock(impl_->mutex);
        ids.reserve(impl_->entries.size());
        for (const auto& [user, entry] : impl_->entries) ids.push_back(user);
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

void RadarStore::save(const std::filesystem::path& path) const {
    std::ostringstream out;
    auto ids = user_ids_sorted();
    out << "radar-store 1 store_k=" << impl_->store_k << " entries=" << ids.size() << '\n';
    for (UserId user : ids) {
        auto entry = peek(user);
        out << user << ' ' << entry->version << ' ' << entry->refreshed_at << ' '
            << entry->items.size();
        for (const auto& [item, score] : entry->items)
            out << ' ' << item << ':' << format_fixed6(score);
        out << '\n';
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw SimError("cannot open store path for writing: " + path.string());
    file << out.str();
}

RadarStore RadarStore::load(const std::filesystem::path& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw ValidationError("cannot open store file: " + path.string());

    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& why) -> ValidationError {
        return ValidationError("store load: line " + std::to_string(line_no) + ": " + why);
    };

    ++line_no;
    if (!std::getline(file, line)) throw fail("missing header");
    auto header = split(line, ' ');
    if (header.size() != 4 || header[0] != "radar-store" || header[1] != "1" ||
        !header[2].starts_with("store_k=") || !header[3].starts_with("entries="))
        throw fail("malformed header");
    const std::uint32_t store_k =
        static_cast<std::uint32_t>(parse_u64(header[2].substr(8), "store_k"));
    const std::uint64_t expected = parse_u64(header[3].substr(8), "entries");

    RadarStore store(store_k);
    std::uint64_t seen = 0;
    while (std::getline(file, line)) {
        ++line_no;
        try {
            if (line.empty()) throw ValidationError("empty record line");
            auto fields = split(line, ' ');
            if (fields.size() < 4)
                throw ValidationError("record needs user, version, refreshed_at, count");
            RadarEntry entry;
            entry.user_id = static_cast<UserId>(parse_u64(fields[0], "user_id"));
            entry.version = parse_u64(fields[1], "version");
            entry.refreshed_at = parse_i64(fields[2], "refreshed_at");
            const std::uint64_t count = parse_u64(fields[3], "count");
            if (fields.size() != 4 + count) throw ValidationError("item count does not match record");
            entry.items.reserve(count);
            for (std::uint64_t i = 0; i < count; ++i) {
                auto pair = split(fields[4 + i], ':');
                if (pair.size() != 2) throw ValidationError("item field must be id:score");
                entry.items.emplace_back(static_cast<ItemId>(parse_u64(pair[0], "item_id")),
                                         parse_double(pair[1], "score"));
            }
            validate_entry(entry, store_k);
            std::unique_lock lock(store.impl_->mutex);
            if (store.impl_->entries.count(entry.user_id))
                throw ValidationError("duplicate user record");
            store.impl_->entries[entry.user_id] =
                std::make_shared<const RadarEntry>(std::move(entry));
            ++seen;
        } catch (const std::runtime_error& e) {
            throw fail(e.what());
        }
    }
    ++line_no;
    if (seen != expected) throw fail("entry count does not match header");
    return store;
}

}  // namespace radar
