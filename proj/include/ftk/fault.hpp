#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ftk/csr.hpp"

// Software model of selectively reliable memory: registered floating-point
// regions that may be marked "failable", a fault injector driven by a
// logical clock, checkpoint/restore of region contents, and a bounded log
// of injected events. Faults are injected only into regions currently
// marked failable; index/structure arrays are never registered.

namespace ftk::fault {

enum class FaultMode { None, Deterministic, Poisson };

struct FaultPolicy {
  FaultMode mode = FaultMode::None;
  // Deterministic: cyclic Boolean sequence, one value consumed per
  // possibly-faulty operation; true corrupts that operation's output.
  std::vector<std::uint8_t> pattern;
  // Poisson: faults per megabyte (2^20 bytes) of marked memory per
  // simulated hour.
  double rate = 0.0;
  std::uint64_t seed = 0;
  // Simulated seconds one injection checkpoint advances the clock by.
  double time_per_op = 1e-3;
  // Probability an injected event is flagged as detected.
  double p_detect = 0.9;
};

using RegionId = std::uint64_t;

// bit index of a 64-bit element, 0 = least significant; kBitAddOne marks
// the deterministic "+1.0 to first entry" fault.
inline constexpr int kBitAddOne = -1;

struct FaultEvent {
  RegionId region = 0;  // 0 when the target was a transient vector
  index_t element = 0;
  int bit = 0;
  double time = 0.0;  // logical clock, simulated seconds
  bool detected = false;
};

struct FaultCounters {
  std::uint64_t injected = 0;
  std::uint64_t detected = 0;
  std::uint64_t overflow = 0;
};

/// Bounded ring buffer of fault events plus running totals. Overflow drops
/// the oldest event and bumps a counter; totals are never lost.
class FaultLog {
 public:
  explicit FaultLog(std::size_t capacity = 1024) : capacity_(capacity) {}

  void append(const FaultEvent& e);
  const std::deque<FaultEvent>& events() const { return events_; }
  FaultCounters counters() const { return counters_; }
  std::size_t capacity() const { return capacity_; }

  /// CSV columns: logical_time,region,element,bit,detected.
  void dump_csv(std::ostream& out) const;

 private:
  std::size_t capacity_;
  std::deque<FaultEvent> events_;
  FaultCounters counters_;
};

/// Deterministic uniform source. Built on mt19937_64 (whose output stream
/// is pinned by the standard) with local mapping code, so that identical
/// seeds give identical faults on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  double uniform01() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }
  std::uint64_t below(std::uint64_t n);  // uniform in [0, n)
  bool bernoulli(double p) { return uniform01() < p; }
  std::uint64_t poisson(double mean);

 private:
  std::mt19937_64 eng_;
};

/// One fault domain: region registry, injector state, logical clock, log.
/// Single-owner, not shared across threads.
class FaultDomain {
 public:
  explicit FaultDomain(FaultPolicy policy, std::size_t log_capacity = 1024);

  const FaultPolicy& policy() const { return policy_; }

  // --- region registry -----------------------------------------------
  RegionId register_region(std::span<double> target);
  void unregister_region(RegionId id);
  void mark_failable(RegionId id);    // idempotent
  void unmark_failable(RegionId id);  // idempotent
  bool is_failable(RegionId id) const;

  void checkpoint(RegionId id);
  void restore(RegionId id);
  /// Restores only when detected faults hit the region since its last
  /// checkpoint. Returns true when a copy was performed.
  bool restore_if_detected(RegionId id);
  /// Restores only when any fault (detected or not) hit the region since
  /// its last checkpoint. Returns true when a copy was performed.
  bool restore_if_faulted(RegionId id);

  FaultCounters region_counters(RegionId id) const;

  // --- injection ------------------------------------------------------
  /// Advances the logical clock and, in Poisson mode, injects
  /// k ~ Poisson(rate * failable_MB * elapsed_hours) single-bit flips at
  /// (region, element, bit) targets drawn uniformly over marked bytes.
  std::vector<FaultEvent> advance_clock(double elapsed_seconds);

  /// Deterministic mode: reads and advances the cyclic pattern.
  bool consume_pattern();
  /// Deterministic mode: consumes one pattern value; when true, adds 1.0
  /// to v[0] and logs an event. Returns whether a fault was applied.
  bool apply_deterministic_fault(std::span<double> v);

  double now() const { return clock_seconds_; }
  double marked_bytes() const;

  const FaultLog& log() const { return log_; }
  FaultCounters counters() const { return log_.counters(); }
  std::size_t marked_region_count() const;
  std::size_t region_count() const { return regions_.size(); }

 private:
  struct Region {
    RegionId id = 0;
    std::span<double> target;
    bool failable = false;
    std::vector<double> checkpoint;
    bool has_checkpoint = false;
    FaultCounters counters;          // lifetime totals for this region
    FaultCounters at_checkpoint;     // snapshot taken at checkpoint time
  };

  Region& find(RegionId id);
  const Region& find(RegionId id) const;
  FaultEvent record(Region* region, index_t element, int bit);

  FaultPolicy policy_;
  FaultLog log_;
  std::vector<Region> regions_;
  RegionId next_id_ = 1;
  std::size_t pattern_pos_ = 0;
  double clock_seconds_ = 0.0;
  Rng inject_rng_;
  Rng detect_rng_;
};

/// Mean of the finite values at indices [index-window, index+window],
/// excluding index itself and clamped to the array; 0 when no finite
/// neighbor exists.
double repair_neighbor_average(std::span<const double> values, index_t index,
                               index_t window);

}  // namespace ftk::fault
