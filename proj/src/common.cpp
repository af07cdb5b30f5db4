#include "tripprice/common.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>

namespace tripprice {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  if (v == std::floor(v) && std::fabs(v) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.0f", v);
    return buf;
  }
  // shortest precision that round-trips
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

int worker_count() {
  if (const char* env = std::getenv("TRIPPRICE_WORKERS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::size_t nthreads = std::min<std::size_t>(workers, n);
  for (std::size_t t = 0; t < nthreads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += nthreads) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

namespace {
inline std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace

std::uint64_t CounterRng::bits(std::uint64_t a, std::uint64_t b, std::uint64_t c) const {
  std::uint64_t h = splitmix(seed_ ^ 0x243f6a8885a308d3ULL);
  h = splitmix(h ^ a);
  h = splitmix(h ^ b);
  h = splitmix(h ^ c);
  return h;
}

double CounterRng::uniform(std::uint64_t a, std::uint64_t b, std::uint64_t c) const {
  return static_cast<double>(bits(a, b, c) >> 11) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t a, std::uint64_t b, std::uint64_t c) const {
  double u1 = uniform(a, b, c * 2 + 1);
  double u2 = uniform(a, b, c * 2 + 2);
  if (u1 < 1e-300) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace tripprice
