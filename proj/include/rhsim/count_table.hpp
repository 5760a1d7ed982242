#pragma once

#include <algorithm>
#include <optional>
#include <queue>
#include <sstream>
#include <unordered_map>
#include <vector>

#include "rhsim/dram.hpp"

namespace rhsim {

// Bounded count table with a spillover counter.
//
// Unlike textbook Misra-Gries (which decrements and therefore UNDERcounts),
// this variant shares one spillover counter among all non-resident
// addresses and evicts only when the minimum resident count has been caught
// by spillover. A resident estimate, or spillover for a non-resident
// address, is always >= the address's true occurrence count since the last
// global reset, so triggering a mitigation on estimate >= T is
// conservative. The Misra-Gries residency guarantee still holds: any
// address occurring more than w/(capacity+1) times in w observations is
// resident.
class CountTable {
 public:
  explicit CountTable(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ConfigError("count table capacity must be positive");
  }

  // One observation of `addr`. Returns the new estimate for `addr`:
  // its resident count, or the spillover value if it stayed non-resident.
  Count observe(Row addr) {
    auto it = entries_.find(addr);
    if (it != entries_.end()) {
      ++it->second;
      heap_.push({it->second, addr});
      maybe_compact();
      return it->second;
    }
    if (entries_.size() < capacity_) return insert(addr);
    const HeapItem min = resident_min();
    if (min.count == spillover_) {
      // Evict the lowest-indexed minimum-count entry; its estimate is
      // preserved by the shared spillover value.
      heap_.pop();
      entries_.erase(min.row);
      return insert(addr);
    }
    return ++spillover_;
  }

  // Frees the slot of a resident address. Non-resident addresses are left
  // alone; their estimate remains the shared spillover.
  void reset_entry(Row addr) { entries_.erase(addr); }

  void global_reset() {
    entries_.clear();
    spillover_ = 0;
    heap_ = {};
  }

  // Resident addresses with estimate >= t, ascending.
  std::vector<Row> over_threshold(Count t) const {
    if (t == 0) throw ContractViolation("over_threshold requires t > 0");
    std::vector<Row> out;
    for (const auto& [row, count] : entries_)
      if (count >= t) out.push_back(row);
    std::sort(out.begin(), out.end());
    return out;
  }

  std::optional<Count> resident_count(Row addr) const {
    auto it = entries_.find(addr);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  // Resident count, or spillover for non-resident addresses.
  Count estimate(Row addr) const {
    auto it = entries_.find(addr);
    return it == entries_.end() ? spillover_ : it->second;
  }

  Count spillover() const { return spillover_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }

  // Deterministic rendering: entries ascending by row, then spillover.
  std::string dump() const {
    std::vector<std::pair<Row, Count>> sorted(entries_.begin(), entries_.end());
    std::sort(sorted.begin(), sorted.end());
    std::ostringstream os;
    for (const auto& [row, count] : sorted) os << row << ':' << count << '\n';
    os << "spillover:" << spillover_ << '\n';
    return os.str();
  }

 private:
  struct HeapItem {
    Count count;
    Row row;
    bool operator>(const HeapItem& o) const {
      return count != o.count ? count > o.count : row > o.row;
    }
  };

  Count insert(Row addr) {
    const Count c = spillover_ + 1;
    entries_.emplace(addr, c);
    heap_.push({c, addr});
    maybe_compact();
    return c;
  }

  // Lazy min-heap: counts only grow, so stale items surface with a count
  // below the entry's current value and are discarded on sight. The
  // surviving top is the (count, row)-lexicographic minimum.
  const HeapItem& resident_min() {
    for (;;) {
      const HeapItem& top = heap_.top();
      auto it = entries_.find(top.row);
      if (it != entries_.end() && it->second == top.count) return top;
      heap_.pop();
    }
  }

  void maybe_compact() {
    if (heap_.size() > 4096 && heap_.size() > 8 * (entries_.size() + 1)) {
      heap_ = {};
      for (const auto& [row, count] : entries_) heap_.push({count, row});
    }
  }

  std::size_t capacity_;
  Count spillover_ = 0;
  std::unordered_map<Row, Count> entries_;
  std::priority_queue<HeapItem, std::vector<HeapItem>, std::greater<HeapItem>> heap_;
};

}  // namespace rhsim
