#include "airq/ingest/feed_store.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <mutex>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "airq/error.hpp"

namespace airq::ingest {

namespace fs = std::filesystem;
using nlohmann::json;

struct FeedStore::ChannelData {
  Channel meta;
  mutable std::shared_mutex mutex;
  std::vector<FeedEntry> entries;  // insertion order
  std::set<std::pair<std::string, long long>> dedup;
  std::uint64_t next_id = 1;
  std::size_t duplicates = 0;
  fs::path log_path;
  std::ofstream log;
  std::size_t log_lines = 0;
};

namespace {

bool before(const FeedEntry& a, const FeedEntry& b) {
  return a.ts != b.ts ? a.ts < b.ts : a.entry_id < b.entry_id;
}

class Accumulator {
 public:
  explicit Accumulator(Aggregation agg) : agg_(agg) {}
  void add(const std::optional<double>& v) {
    if (!v) return;
    if (n_ == 0) {
      acc_ = *v;
    } else {
      switch (agg_) {
        case Aggregation::kHourlyMin: acc_ = std::min(acc_, *v); break;
        case Aggregation::kHourlyMax: acc_ = std::max(acc_, *v); break;
        default: acc_ += *v;
      }
    }
    ++n_;
  }
  std::optional<double> result() const {
    if (n_ == 0) return std::nullopt;
    return agg_ == Aggregation::kHourlyMean ? acc_ / static_cast<double>(n_) : acc_;
  }

 private:
  Aggregation agg_;
  double acc_ = 0.0;
  std::size_t n_ = 0;
};

std::vector<AggregateRow> aggregate(const std::vector<FeedEntry>& sorted, std::size_t field_count,
                                    Aggregation agg) {
  std::vector<AggregateRow> rows;
  std::size_t i = 0;
  while (i < sorted.size()) {
    const Timestamp bucket = floor_hour(sorted[i].ts);
    std::vector<Accumulator> fields(field_count, Accumulator(agg));
    Accumulator ppm(agg);
    Accumulator sal(agg);
    AggregateRow row;
    row.bucket = bucket;
    for (; i < sorted.size() && floor_hour(sorted[i].ts) == bucket; ++i) {
      const auto& e = sorted[i];
      for (std::size_t f = 0; f < field_count && f < e.values.size(); ++f) fields[f].add(e.values[f]);
      ppm.add(e.derived_ppm);
      if (e.derived_salubrity) sal.add(e.derived_salubrity->value);
      ++row.count;
    }
    for (const auto& f : fields) row.values.push_back(f.result());
    row.ppm = ppm.result();
    row.salubrity = sal.result();
    rows.push_back(std::move(row));
  }
  return rows;
}

void fnv(std::uint64_t& h, std::string_view bytes) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
}

}  // namespace

const char* to_string(Aggregation a) {
  switch (a) {
    case Aggregation::kNone: return "none";
    case Aggregation::kHourlyMean: return "hourly_mean";
    case Aggregation::kHourlyMin: return "hourly_min";
    case Aggregation::kHourlyMax: return "hourly_max";
  }
  return "none";
}

Aggregation aggregation_from_string(const std::string& s) {
  std::string lower;
  for (char c : s) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower.empty() || lower == "none") return Aggregation::kNone;
  if (lower == "hourly_mean") return Aggregation::kHourlyMean;
  if (lower == "hourly_min") return Aggregation::kHourlyMin;
  if (lower == "hourly_max") return Aggregation::kHourlyMax;
  fail(ErrorCode::kInvalidParameter,
       "unknown aggregation '" + s + "' (expected none, hourly_mean, hourly_min or hourly_max)",
       {"aggregation"});
}

FeedStore::FeedStore(fs::path data_dir) : data_dir_(std::move(data_dir)) {
  if (!data_dir_.empty()) {
    std::error_code ec;
    fs::create_directories(data_dir_, ec);
    if (ec) fail(ErrorCode::kIo, "cannot create data_dir '" + data_dir_.string() + "': " + ec.message());
  }
}

FeedStore::~FeedStore() = default;

void FeedStore::add_channel(const Channel& channel) {
  channel.validate();
  {
    std::unique_lock lock(channels_mutex_);
    if (auto it = channels_.find(channel.channel_id); it != channels_.end()) {
      const auto& existing = it->second->meta;
      if (to_json(existing) != to_json(channel))
        fail(ErrorCode::kInvalidParameter,
             "channel '" + channel.channel_id + "' is already defined differently", {"channel_id"});
      return;
    }
    auto cd = std::make_unique<ChannelData>();
    cd->meta = channel;
    if (!data_dir_.empty()) {
      cd->log_path = data_dir_ / (channel.channel_id + ".jsonl");
      load(*cd);
      cd->log.open(cd->log_path, std::ios::app);
      if (!cd->log) fail(ErrorCode::kIo, "cannot open '" + cd->log_path.string() + "' for append");
    }
    channels_.emplace(channel.channel_id, std::move(cd));
  }
  save_registry();
}

bool FeedStore::has_channel(const std::string& channel_id) const {
  std::shared_lock lock(channels_mutex_);
  return channels_.count(channel_id) > 0;
}

std::vector<Channel> FeedStore::channels() const {
  std::shared_lock lock(channels_mutex_);
  std::vector<Channel> out;
  for (const auto& [id, cd] : channels_) out.push_back(cd->meta);
  return out;
}

Channel FeedStore::channel(const std::string& channel_id) const { return data(channel_id).meta; }

FeedStore::ChannelData& FeedStore::data(const std::string& channel_id) const {
  std::shared_lock lock(channels_mutex_);
  auto it = channels_.find(channel_id);
  if (it == channels_.end())
    fail(ErrorCode::kNotFound, "unknown channel '" + channel_id + "'", {"channel_id"});
  return *it->second;
}

void FeedStore::load(ChannelData& cd) {
  std::ifstream in(cd.log_path);
  if (!in) return;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    ++cd.log_lines;
    try {
      auto e = feed_entry_from_json(json::parse(line), cd.meta);
      e.values.resize(cd.meta.fields.size());
      cd.next_id = std::max(cd.next_id, e.entry_id + 1);
      cd.dedup.emplace(e.device_id, epoch_ms(e.ts));
      cd.entries.push_back(std::move(e));
    } catch (const std::exception& ex) {
      spdlog::warn("store: skipping unreadable line {} of {}: {}", lineno, cd.log_path.string(), ex.what());
    }
  }
  std::stable_sort(cd.entries.begin(), cd.entries.end(),
                   [](const FeedEntry& a, const FeedEntry& b) { return a.entry_id < b.entry_id; });
  enforce_retention(cd);
}

void FeedStore::enforce_retention(ChannelData& cd) {
  const auto& r = cd.meta.retention;
  std::size_t before_size = cd.entries.size();
  if (r.max_age && !cd.entries.empty()) {
    const auto newest = std::max_element(cd.entries.begin(), cd.entries.end(), before)->ts;
    const auto cutoff = newest - *r.max_age;
    std::erase_if(cd.entries, [&](const FeedEntry& e) {
      if (e.ts >= cutoff) return false;
      cd.dedup.erase({e.device_id, epoch_ms(e.ts)});
      return true;
    });
  }
  if (r.max_entries && cd.entries.size() > *r.max_entries) {
    const auto drop = cd.entries.size() - *r.max_entries;
    for (std::size_t i = 0; i < drop; ++i) cd.dedup.erase({cd.entries[i].device_id, epoch_ms(cd.entries[i].ts)});
    cd.entries.erase(cd.entries.begin(), cd.entries.begin() + static_cast<std::ptrdiff_t>(drop));
  }
  if (cd.entries.size() != before_size && !cd.log_path.empty() &&
      cd.log_lines > 2 * cd.entries.size() + 64)
    compact(cd);
}

void FeedStore::compact(ChannelData& cd) {
  const auto tmp = cd.log_path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    for (const auto& e : cd.entries) out << to_json(e, cd.meta).dump() << '\n';
    if (!out) fail(ErrorCode::kIo, "cannot write '" + tmp + "'");
  }
  const bool was_open = cd.log.is_open();
  cd.log.close();
  fs::rename(tmp, cd.log_path);
  cd.log_lines = cd.entries.size();
  if (was_open) cd.log.open(cd.log_path, std::ios::app);
}

std::optional<FeedEntry> FeedStore::append(const std::string& channel_id, FeedEntry draft) {
  auto& cd = data(channel_id);
  std::unique_lock lock(cd.mutex);
  if (!cd.dedup.emplace(draft.device_id, epoch_ms(draft.ts)).second) {
    ++cd.duplicates;
    return std::nullopt;
  }
  draft.entry_id = cd.next_id++;
  draft.values.resize(cd.meta.fields.size());
  if (cd.log.is_open()) {
    cd.log << to_json(draft, cd.meta).dump() << '\n';
    cd.log.flush();
    if (!cd.log) fail(ErrorCode::kIo, "write to '" + cd.log_path.string() + "' failed");
    ++cd.log_lines;
  }
  cd.entries.push_back(draft);
  enforce_retention(cd);
  return draft;
}

FeedQueryResult FeedStore::query(const FeedQuery& q) const {
  if (q.start > q.end)
    fail(ErrorCode::kInvalidParameter, "query range is inverted (start > end)", {"start", "end"});
  auto& cd = data(q.channel_id);
  FeedQueryResult r;
  r.channel = cd.meta;
  r.aggregation = q.aggregation;
  std::vector<FeedEntry> matches;
  {
    std::shared_lock lock(cd.mutex);
    for (const auto& e : cd.entries)
      if (e.ts >= q.start && e.ts < q.end) matches.push_back(e);
  }
  std::sort(matches.begin(), matches.end(), before);

  if (q.aggregation == Aggregation::kNone) {
    if (q.max_results && matches.size() > *q.max_results) {
      matches.resize(*q.max_results);
      r.truncated = true;
    }
    r.entries = std::move(matches);
  } else {
    r.buckets = aggregate(matches, cd.meta.fields.size(), q.aggregation);
    if (q.max_results && r.buckets.size() > *q.max_results) {
      r.buckets.resize(*q.max_results);
      r.truncated = true;
    }
  }
  return r;
}

std::optional<FeedEntry> FeedStore::latest(const std::string& channel_id) const {
  auto& cd = data(channel_id);
  std::shared_lock lock(cd.mutex);
  if (cd.entries.empty()) return std::nullopt;
  return *std::max_element(cd.entries.begin(), cd.entries.end(), before);
}

std::size_t FeedStore::size(const std::string& channel_id) const {
  auto& cd = data(channel_id);
  std::shared_lock lock(cd.mutex);
  return cd.entries.size();
}

std::size_t FeedStore::duplicates_dropped() const {
  std::shared_lock lock(channels_mutex_);
  std::size_t n = 0;
  for (const auto& [id, cd] : channels_) {
    std::shared_lock l(cd->mutex);
    n += cd->duplicates;
  }
  return n;
}

std::uint64_t FeedStore::checksum() const {
  std::uint64_t h = 14695981039346656037ULL;
  std::shared_lock lock(channels_mutex_);
  for (const auto& [id, cd] : channels_) {
    std::shared_lock l(cd->mutex);
    fnv(h, id);
    for (const auto& e : cd->entries) fnv(h, to_json(e, cd->meta).dump());
  }
  return h;
}

void FeedStore::save_registry() const {
  if (data_dir_.empty()) return;
  std::lock_guard guard(registry_mutex_);
  json arr = json::array();
  for (const auto& c : channels()) arr.push_back(to_json(c));
  // Keep definitions of channels persisted earlier but not registered now.
  for (const auto& c : load_channel_registry(data_dir_))
    if (!has_channel(c.channel_id)) arr.push_back(to_json(c));
  const auto path = data_dir_ / "channels.json";
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << arr.dump(2) << '\n';
    if (!out) fail(ErrorCode::kIo, "cannot write '" + tmp + "'");
  }
  fs::rename(tmp, path);
}

std::vector<Channel> load_channel_registry(const fs::path& data_dir) {
  std::vector<Channel> out;
  std::ifstream in(data_dir / "channels.json");
  if (!in) return out;
  try {
    const auto j = json::parse(in);
    for (const auto& c : j) out.push_back(channel_from_json(c));
  } catch (const std::exception& e) {
    spdlog::warn("store: ignoring unreadable channel registry: {}", e.what());
  }
  return out;
}

}  // namespace airq::ingest
