#pragma once

#include <chrono>
#include <cstdint>
#include <string>

#include "fgeo/error.hpp"

namespace fgeo {

// Wall: steady-clock time since construction.
// Logical: 100 microseconds per unit of work charged (one premise match or
// one theorem application); runs are reproducible to the byte regardless of
// machine load.
enum class ClockKind { Wall, Logical };

inline std::string to_string(ClockKind k) { return k == ClockKind::Wall ? "wall" : "logical"; }

inline ClockKind parse_clock_kind(const std::string& s) {
  if (s == "wall") return ClockKind::Wall;
  if (s == "logical") return ClockKind::Logical;
  throw SchemaError("unknown clock '" + s + "'");
}

class RunClock {
 public:
  static constexpr std::int64_t kLogicalTickUs = 100;

  explicit RunClock(ClockKind kind = ClockKind::Wall) : kind_(kind), start_(std::chrono::steady_clock::now()) {}

  ClockKind kind() const { return kind_; }

  void charge(std::int64_t units = 1) { ticks_ += units; }

  std::int64_t elapsed_us() const {
    if (kind_ == ClockKind::Logical) return ticks_ * kLogicalTickUs;
    return std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start_).count();
  }
  double elapsed_secs() const { return static_cast<double>(elapsed_us()) / 1e6; }

  bool exceeded(double timeout_secs) const { return elapsed_secs() >= timeout_secs; }

 private:
  ClockKind kind_;
  std::chrono::steady_clock::time_point start_;
  std::int64_t ticks_ = 0;
};

}  // namespace fgeo
