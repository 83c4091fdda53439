#pragma once

#include <atomic>
#include <chrono>

namespace sqlrefine {

/// Time source used for every duration that ends up in a report or trace.
/// Swappable so scripted runs can use a counter instead of wall time and
/// produce byte-identical output.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual double now_s() = 0;
};

class SteadyClock final : public Clock {
 public:
  double now_s() override {
    auto t = std::chrono::steady_clock::now().time_since_epoch();
    return std::chrono::duration<double>(t).count();
  }
};

/// Advances a fixed step per reading. Any interval measured with it is an
/// exact multiple of the step, independent of host speed.
class TickClock final : public Clock {
 public:
  explicit TickClock(double step_s = 0.001) : step_s_(step_s) {}

  double now_s() override {
    return step_s_ * static_cast<double>(ticks_.fetch_add(1) + 1);
  }

 private:
  double step_s_;
  std::atomic<std::uint64_t> ticks_{0};
};

}  // namespace sqlrefine
