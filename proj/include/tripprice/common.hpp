#pragma once

#include <cstdint>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace tripprice {

/// Raised by scenario/price-file parsing and validation; the message names
/// the offending element.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a solver cannot meet its contract (calibration bracket
/// failure, infeasible design target, ...).
class SolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Canonical number formatting used by every text artifact the tool writes.
/// Integers print without a decimal point; everything else uses the shortest
/// representation that round-trips a double.
std::string format_number(double v);

/// Number of worker threads: TRIPPRICE_WORKERS if set, else 1.
int worker_count();

/// Deterministic map-style parallel loop. Results must be written to
/// per-index slots by `body`; iteration order never affects the outcome.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body);

/// Counter-based RNG: every draw is a pure hash of (seed, stream counters),
/// so parallel evaluation order cannot change the random stream.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t bits(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const;
  /// Uniform in [0,1).
  double uniform(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const;
  /// Standard normal (Box-Muller on two counter draws).
  double normal(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

}  // namespace tripprice
