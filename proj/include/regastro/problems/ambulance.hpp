// Ambulance-deployment discrete-event simulator. Calls arrive Poisson over a
// square region, the nearest available home-based ambulance is dispatched,
// and overflow calls queue FIFO. The pathwise gradient of the mean response
// time with respect to the variable base coordinates is propagated through
// the event chain with forward-mode dual numbers; dispatch and queue-order
// decisions are frozen along the path (IPA).
#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <queue>
#include <stdexcept>
#include <vector>

#include "regastro/oracle.hpp"

namespace regastro {

// Scalar carrying a value and its gradient with respect to the decision
// variables. Comparisons use the value only, so branch decisions are frozen.
struct Dual {
  double v = 0.0;
  Vector g;

  Dual() = default;
  Dual(double value, int dim) : v(value), g(Vector::Zero(dim)) {}
  Dual(double value, Vector grad) : v(value), g(std::move(grad)) {}

  Dual operator+(const Dual& o) const { return {v + o.v, g + o.g}; }
  Dual operator-(const Dual& o) const { return {v - o.v, g - o.g}; }
  Dual operator*(double c) const { return {v * c, g * c}; }
  Dual operator/(double c) const { return {v / c, g / c}; }
  Dual& operator+=(const Dual& o) {
    v += o.v;
    g += o.g;
    return *this;
  }
};

inline Dual dual_sqrt(const Dual& x) {
  const double r = std::sqrt(x.v);
  return {r, x.g / (2.0 * r)};
}

struct AmbulanceSimConfig {
  std::vector<Eigen::Vector2d> fixed_bases = {{5.0, 5.0}, {5.0, 15.0},
                                              {15.0, 15.0}};
  int n_var_bases = 2;
  double region = 20.0;
  double arrival_rate = 0.2;  // calls per unit time
  double mean_service = 10.0;
  double speed = 2.0;
  double horizon = 500.0;
  double warmup = 50.0;

  int decision_dim() const { return 2 * n_var_bases; }
};

struct AmbulanceStats {
  std::int64_t arrivals = 0;
  std::int64_t dispatched = 0;
  std::int64_t recorded = 0;  // dispatched after warmup
  std::int64_t left_in_queue = 0;
  // Audit counters: queue pops out of arrival order, and dispatches whose
  // waiting time is negative (response below the travel lower bound).
  std::int64_t fifo_violations = 0;
  std::int64_t negative_waits = 0;
  bool clamped = false;
};

namespace detail {

enum class EventKind : int { ReturnComplete = 0, ServiceComplete = 1, Arrival = 2 };

struct SimEvent {
  double time;
  EventKind kind;
  std::int64_t id;  // call id for Arrival, ambulance id otherwise

  // Calendar order: nondecreasing time, ties broken ReturnComplete <
  // ServiceComplete < Arrival, then id.
  bool operator>(const SimEvent& o) const {
    if (time != o.time) return time > o.time;
    if (kind != o.kind) return static_cast<int>(kind) > static_cast<int>(o.kind);
    return id > o.id;
  }
};

}  // namespace detail

// One replication. Returns the mean response time over calls dispatched after
// warmup, with its pathwise gradient.
inline Dual ambulance_simulate(const Vector& var_bases,
                               const AmbulanceSimConfig& cfg,
                               const StreamKey& key, std::uint64_t root_seed,
                               AmbulanceStats* stats_out = nullptr) {
  using detail::EventKind;
  using detail::SimEvent;
  const int dim = cfg.decision_dim();
  if (var_bases.size() != dim)
    throw std::invalid_argument("ambulance_simulate: dimension mismatch");

  AmbulanceStats stats;

  // Base positions as duals; variable bases carry unit gradient seeds,
  // clamped coordinates get a zero seed.
  struct Ambulance {
    Dual bx, by;
    bool available = true;
    Dual travel;  // outbound travel time of the active dispatch
  };
  std::vector<Ambulance> fleet;
  for (const auto& b : cfg.fixed_bases)
    fleet.push_back({Dual(b.x(), dim), Dual(b.y(), dim), true, Dual(0.0, dim)});
  for (int v = 0; v < cfg.n_var_bases; ++v) {
    Dual bx(var_bases[2 * v], dim), by(var_bases[2 * v + 1], dim);
    bx.g[2 * v] = 1.0;
    by.g[2 * v + 1] = 1.0;
    for (int c = 0; c < 2; ++c) {
      Dual& coord = c == 0 ? bx : by;
      if (coord.v < 0.0 || coord.v > cfg.region) {
        coord.v = std::clamp(coord.v, 0.0, cfg.region);
        coord.g.setZero();
        stats.clamped = true;
      }
    }
    fleet.push_back({bx, by, true, Dual(0.0, dim)});
  }

  struct Call {
    double arrival;
    double x, y;
    double service;
  };
  std::vector<Call> calls;
  std::deque<std::int64_t> fifo;
  std::vector<std::int64_t> amb_active_call(fleet.size(), -1);

  Substream stream = derive_stream(root_seed, key);

  std::priority_queue<SimEvent, std::vector<SimEvent>, std::greater<SimEvent>>
      calendar;
  const double first_arrival = stream.next_exponential(1.0 / cfg.arrival_rate);
  if (first_arrival <= cfg.horizon)
    calendar.push({first_arrival, EventKind::Arrival, 0});

  Dual total_response(0.0, dim);
  // Event times are duals once travel legs enter the chain; the calendar
  // orders by value, recorded here per ambulance for the dual part.
  std::vector<Dual> amb_event_time(fleet.size(), Dual(0.0, dim));

  auto travel = [&](const Ambulance& a, const Call& c) -> Dual {
    const Dual dx = a.bx - Dual(c.x, dim);
    const Dual dy = a.by - Dual(c.y, dim);
    const Dual sq(dx.v * dx.v + dy.v * dy.v,
                  2.0 * dx.v * dx.g + 2.0 * dy.v * dy.g);
    if (sq.v == 0.0) return Dual(0.0, dim);
    return dual_sqrt(sq) / cfg.speed;
  };

  auto dispatch = [&](std::int64_t amb_id, std::int64_t call_id,
                      const Dual& now) {
    Ambulance& amb = fleet[static_cast<size_t>(amb_id)];
    const Call& call = calls[static_cast<size_t>(call_id)];
    const Dual out = travel(amb, call);
    const Dual wait = now - Dual(call.arrival, dim);
    const Dual response = wait + out;
    if (wait.v < -1e-9) stats.negative_waits += 1;
    stats.dispatched += 1;
    if (now.v > cfg.warmup) {
      total_response += response;
      stats.recorded += 1;
    }
    amb.available = false;
    amb.travel = out;
    amb_active_call[static_cast<size_t>(amb_id)] = call_id;
    const Dual done = now + out + Dual(call.service, dim);
    amb_event_time[static_cast<size_t>(amb_id)] = done;
    calendar.push({done.v, EventKind::ServiceComplete, amb_id});
  };

  double last_time = 0.0;
  std::int64_t last_queue_pop = -1;
  while (!calendar.empty()) {
    const SimEvent ev = calendar.top();
    calendar.pop();
    if (ev.time > cfg.horizon) break;
    if (ev.time < last_time)
      throw std::logic_error("ambulance_simulate: calendar went backwards");
    last_time = ev.time;

    switch (ev.kind) {
      case EventKind::Arrival: {
        stats.arrivals += 1;
        Call call;
        call.arrival = ev.time;
        call.x = stream.next_uniform() * cfg.region;
        call.y = stream.next_uniform() * cfg.region;
        call.service = stream.next_exponential(cfg.mean_service);
        const double next =
            ev.time + stream.next_exponential(1.0 / cfg.arrival_rate);
        calls.push_back(call);
        const std::int64_t call_id =
            static_cast<std::int64_t>(calls.size()) - 1;
        if (next <= cfg.horizon)
          calendar.push({next, EventKind::Arrival, call_id + 1});

        // Nearest available ambulance by Euclidean distance from its base.
        std::int64_t best = -1;
        double best_d = 0.0;
        for (std::int64_t a = 0; a < static_cast<std::int64_t>(fleet.size());
             ++a) {
          if (!fleet[static_cast<size_t>(a)].available) continue;
          const double dx = fleet[static_cast<size_t>(a)].bx.v - call.x;
          const double dy = fleet[static_cast<size_t>(a)].by.v - call.y;
          const double dist = dx * dx + dy * dy;
          if (best < 0 || dist < best_d) {
            best = a;
            best_d = dist;
          }
        }
        if (best >= 0)
          dispatch(best, call_id, Dual(ev.time, dim));
        else
          fifo.push_back(call_id);
        break;
      }
      case EventKind::ServiceComplete: {
        Ambulance& amb = fleet[static_cast<size_t>(ev.id)];
        const Dual back =
            amb_event_time[static_cast<size_t>(ev.id)] + amb.travel;
        amb_event_time[static_cast<size_t>(ev.id)] = back;
        calendar.push({back.v, EventKind::ReturnComplete, ev.id});
        break;
      }
      case EventKind::ReturnComplete: {
        Ambulance& amb = fleet[static_cast<size_t>(ev.id)];
        amb.available = true;
        amb_active_call[static_cast<size_t>(ev.id)] = -1;
        if (!fifo.empty()) {
          const std::int64_t call_id = fifo.front();
          fifo.pop_front();
          if (call_id <= last_queue_pop) stats.fifo_violations += 1;
          last_queue_pop = call_id;
          dispatch(ev.id, call_id, amb_event_time[static_cast<size_t>(ev.id)]);
        }
        break;
      }
    }
  }

  stats.left_in_queue = static_cast<std::int64_t>(fifo.size());
  if (stats_out) *stats_out = stats;
  if (stats.recorded == 0)
    throw std::runtime_error(
        "ambulance_simulate: no calls completed dispatch after warmup; "
        "increase the horizon");
  return total_response / static_cast<double>(stats.recorded);
}

// One replication = one oracle sample.
class AmbulanceOracle final : public StochasticOracle {
 public:
  AmbulanceOracle(AmbulanceSimConfig cfg, std::uint64_t root_seed)
      : cfg_(std::move(cfg)), root_seed_(root_seed) {}

  int dim() const override { return cfg_.decision_dim(); }

  std::pair<double, Vector> sample(const Vector& x,
                                   const StreamKey& key) const override {
    const Dual r = ambulance_simulate(x, cfg_, key, root_seed_);
    return {r.v, r.g};
  }

  const AmbulanceSimConfig& config() const { return cfg_; }

 private:
  AmbulanceSimConfig cfg_;
  std::uint64_t root_seed_;
};

}  // namespace regastro
