#include "ftk/fault.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace ftk::fault {

namespace {
constexpr double kBytesPerMb = 1024.0 * 1024.0;
constexpr double kSecondsPerHour = 3600.0;
}  // namespace

void FaultLog::append(const FaultEvent& e) {
  if (capacity_ > 0) {
    if (events_.size() == capacity_) {
      events_.pop_front();
      ++counters_.overflow;
    }
    events_.push_back(e);
  } else {
    ++counters_.overflow;
  }
  ++counters_.injected;
  if (e.detected) ++counters_.detected;
}

void FaultLog::dump_csv(std::ostream& out) const {
  out << "logical_time,region,element,bit,detected\n";
  char buf[128];
  for (const FaultEvent& e : events_) {
    std::snprintf(buf, sizeof buf, "%.9g,%llu,%lld,%d,%d\n", e.time,
                  static_cast<unsigned long long>(e.region),
                  static_cast<long long>(e.element), e.bit,
                  e.detected ? 1 : 0);
    out << buf;
  }
}

std::uint64_t Rng::below(std::uint64_t n) {
  // Rejection sampling keeps the draw exactly uniform.
  const std::uint64_t limit = n * (UINT64_MAX / n);
  for (;;) {
    const std::uint64_t r = eng_();
    if (r < limit) return r % n;
  }
}

std::uint64_t Rng::poisson(double mean) {
  // Knuth's product-of-uniforms method; large means are split into chunks
  // so exp(-mean) never underflows. Poisson additivity keeps this exact.
  std::uint64_t total = 0;
  while (mean > 0.0) {
    const double chunk = std::min(mean, 500.0);
    const double threshold = std::exp(-chunk);
    std::uint64_t k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform01();
    } while (p > threshold);
    total += k - 1;
    mean -= chunk;
  }
  return total;
}

FaultDomain::FaultDomain(FaultPolicy policy, std::size_t log_capacity)
    : policy_(std::move(policy)),
      log_(log_capacity),
      inject_rng_(policy_.seed),
      detect_rng_(policy_.seed ^ 0x9e3779b97f4a7c15ULL) {
  if (policy_.mode == FaultMode::Deterministic && policy_.pattern.empty())
    throw std::invalid_argument("FaultPolicy: deterministic mode needs a pattern");
}

FaultDomain::Region& FaultDomain::find(RegionId id) {
  for (Region& r : regions_)
    if (r.id == id) return r;
  throw std::invalid_argument("FaultDomain: unknown region id");
}

const FaultDomain::Region& FaultDomain::find(RegionId id) const {
  for (const Region& r : regions_)
    if (r.id == id) return r;
  throw std::invalid_argument("FaultDomain: unknown region id");
}

RegionId FaultDomain::register_region(std::span<double> target) {
  Region r;
  r.id = next_id_++;
  r.target = target;
  regions_.push_back(std::move(r));
  return regions_.back().id;
}

void FaultDomain::unregister_region(RegionId id) {
  for (auto it = regions_.begin(); it != regions_.end(); ++it) {
    if (it->id == id) {
      regions_.erase(it);
      return;
    }
  }
  throw std::invalid_argument("FaultDomain: unknown region id");
}

void FaultDomain::mark_failable(RegionId id) { find(id).failable = true; }
void FaultDomain::unmark_failable(RegionId id) { find(id).failable = false; }
bool FaultDomain::is_failable(RegionId id) const { return find(id).failable; }

void FaultDomain::checkpoint(RegionId id) {
  Region& r = find(id);
  r.checkpoint.assign(r.target.begin(), r.target.end());
  r.has_checkpoint = true;
  r.at_checkpoint = r.counters;
}

void FaultDomain::restore(RegionId id) {
  Region& r = find(id);
  if (!r.has_checkpoint)
    throw std::invalid_argument("FaultDomain: restore without checkpoint");
  std::copy(r.checkpoint.begin(), r.checkpoint.end(), r.target.begin());
  r.at_checkpoint = r.counters;
}

bool FaultDomain::restore_if_detected(RegionId id) {
  Region& r = find(id);
  if (!r.has_checkpoint)
    throw std::invalid_argument("FaultDomain: restore without checkpoint");
  if (r.counters.detected == r.at_checkpoint.detected) return false;
  restore(id);
  return true;
}

bool FaultDomain::restore_if_faulted(RegionId id) {
  Region& r = find(id);
  if (!r.has_checkpoint)
    throw std::invalid_argument("FaultDomain: restore without checkpoint");
  if (r.counters.injected == r.at_checkpoint.injected) return false;
  restore(id);
  return true;
}

FaultCounters FaultDomain::region_counters(RegionId id) const {
  return find(id).counters;
}

double FaultDomain::marked_bytes() const {
  double bytes = 0.0;
  for (const Region& r : regions_)
    if (r.failable) bytes += static_cast<double>(r.target.size()) * 8.0;
  return bytes;
}

std::size_t FaultDomain::marked_region_count() const {
  std::size_t n = 0;
  for (const Region& r : regions_)
    if (r.failable) ++n;
  return n;
}

FaultEvent FaultDomain::record(Region* region, index_t element, int bit) {
  FaultEvent e;
  e.region = region ? region->id : 0;
  e.element = element;
  e.bit = bit;
  e.time = clock_seconds_;
  e.detected = detect_rng_.bernoulli(policy_.p_detect);
  log_.append(e);
  if (region) {
    ++region->counters.injected;
    if (e.detected) ++region->counters.detected;
  }
  return e;
}

std::vector<FaultEvent> FaultDomain::advance_clock(double elapsed_seconds) {
  clock_seconds_ += elapsed_seconds;
  std::vector<FaultEvent> out;
  if (policy_.mode != FaultMode::Poisson || policy_.rate <= 0.0) return out;

  const double mb = marked_bytes() / kBytesPerMb;
  if (mb <= 0.0) return out;
  const double mean = policy_.rate * mb * (elapsed_seconds / kSecondsPerHour);
  const std::uint64_t k = inject_rng_.poisson(mean);
  if (k == 0) return out;

  // Uniform over marked bytes = region weighted by size, element uniform.
  std::vector<Region*> marked;
  std::uint64_t total_elements = 0;
  for (Region& r : regions_) {
    if (r.failable && !r.target.empty()) {
      marked.push_back(&r);
      total_elements += r.target.size();
    }
  }
  if (marked.empty()) return out;

  out.reserve(k);
  for (std::uint64_t n = 0; n < k; ++n) {
    std::uint64_t pick = inject_rng_.below(total_elements);
    Region* region = nullptr;
    for (Region* r : marked) {
      if (pick < r->target.size()) {
        region = r;
        break;
      }
      pick -= r->target.size();
    }
    const auto element = static_cast<index_t>(pick);
    const int bit = static_cast<int>(inject_rng_.below(64));
    double& slot = region->target[static_cast<std::size_t>(element)];
    slot = std::bit_cast<double>(std::bit_cast<std::uint64_t>(slot) ^
                                 (std::uint64_t{1} << bit));
    out.push_back(record(region, element, bit));
  }
  return out;
}

bool FaultDomain::consume_pattern() {
  if (policy_.mode != FaultMode::Deterministic)
    throw std::invalid_argument("consume_pattern: not in deterministic mode");
  if (policy_.pattern.empty())
    throw std::invalid_argument("consume_pattern: empty pattern");
  const bool hit = policy_.pattern[pattern_pos_] != 0;
  pattern_pos_ = (pattern_pos_ + 1) % policy_.pattern.size();
  return hit;
}

bool FaultDomain::apply_deterministic_fault(std::span<double> v) {
  if (!consume_pattern()) return false;
  if (!v.empty()) v[0] += 1.0;
  record(nullptr, 0, kBitAddOne);
  return true;
}

double repair_neighbor_average(std::span<const double> values, index_t index,
                               index_t window) {
  if (window < 1)
    throw std::invalid_argument("repair_neighbor_average: window must be >= 1");
  const auto n = static_cast<index_t>(values.size());
  const index_t lo = std::max<index_t>(0, index - window);
  const index_t hi = std::min<index_t>(n - 1, index + window);
  double sum = 0.0;
  index_t count = 0;
  for (index_t i = lo; i <= hi; ++i) {
    if (i == index) continue;
    const double v = values[static_cast<std::size_t>(i)];
    if (std::isfinite(v)) {
      sum += v;
      ++count;
    }
  }
  return count > 0 ? sum / static_cast<double>(count) : 0.0;
}

}  // namespace ftk::fault
