#pragma once

// Discrete-event simulator of the two-level fork-join access model.
//
// Every arrival forks one copy to the requested object's systematic server and
// one sub-copy to each server of each of its t recovery groups. Servers run
// FCFS queues with exponential service. A request completes when its
// systematic copy finishes or all r sub-copies of one group have finished;
// outstanding copies (queued or in service) are then removed at zero cost --
// with memoryless service the preempted work is irrelevant.
//
// Modes: GA (popularity-driven arrivals), FA (all arrivals for object 0, with
// head-of-line service typing), SM (central queue, one request admitted at a
// time), FSM (FCFS head served at the aggregate rate (t+1)*mu). An optional
// mds_k switches the completion rule to "systematic or any k of the rest".
//
// Events are ordered by (time, sequence number); exponential clocks make exact
// ties measure-zero but floating-point ties possible, so the sequence number
// keeps runs reproducible. Each server draws from its own counter-based stream
// (stream 0 drives arrivals and object sampling), so replications differ only
// through seeds and adding servers never perturbs existing streams.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <list>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <thread>
#include <vector>

#include "fjlat/bounds.hpp"
#include "fjlat/codes.hpp"
#include "fjlat/dist.hpp"
#include "fjlat/errors.hpp"
#include "fjlat/rng.hpp"
#include "fjlat/stats.hpp"

namespace fjlat {

enum class SimMode { GA, FA, SM, FSM };

inline std::string to_string(SimMode m) {
  switch (m) {
    case SimMode::GA: return "GA";
    case SimMode::FA: return "FA";
    case SimMode::SM: return "SM";
    case SimMode::FSM: return "FSM";
  }
  return "?";
}

struct SimConfig {
  SimMode mode = SimMode::FA;
  StorageLayout layout;
  PopularityVector popularity;  // GA only; empty -> uniform
  double lambda = 1.0;
  double mu = 1.0;                   // per-server rate when server_rates empty
  std::vector<double> server_rates;  // optional per-server override
  std::int64_t n_arrivals = 100000;
  double warmup_fraction = 0.2;
  std::uint64_t seed = 1;
  std::int64_t max_backlog = 100000;  // queued copies per server before abort
  std::optional<int> mds_k;           // MDS access rule
  std::vector<double> ccdf_grid;
  bool record_trace = false;

  // Closed-population capacity estimation: when > 0, Poisson arrivals are
  // replaced by a fixed in-system population and n_arrivals counts departures.
  std::int64_t closed_population = 0;

  // Test hook: called after every processed event with (time, queue lengths).
  std::function<void(double, const std::vector<std::int64_t>&)> observer;
};

struct RequestRecord {
  std::int64_t index = 0;
  double arrival = 0.0;
  double hol_epoch = 0.0;
  double departure = 0.0;
  int object = 0;
  int type_index = -1;  // index into enumerate_types(r,t); FA only
  int winner = -2;      // -1 systematic, >= 0 recovery group
};

struct SimResult {
  double mean_t = 0.0;
  double mean_half_width = 0.0;  // filled by replicate()
  std::int64_t completed = 0;    // recorded (post-warmup) completions
  bool aborted = false;
  double sim_time = 0.0;
  double first_recorded_departure = -1.0;
  double last_recorded_departure = -1.0;
  // Requests still in the system when the final arrival was injected; grows
  // with the run length exactly when the cell is unstable.
  std::int64_t in_system_at_last_arrival = 0;
  std::vector<double> latencies;  // recorded samples, completion order
  std::vector<double> ccdf;       // survival at SimConfig::ccdf_grid
  TypeFrequencies type_freqs;     // FA only
  std::int64_t typed_completed = 0;
  double ws = 0.0;  // fraction completed by the systematic server
  double wr = 0.0;  // fraction completed by a recovery group
  std::vector<double> utilization;
  std::vector<RequestRecord> trace;
};

inline std::vector<double> empirical_ccdf(const SimResult& result,
                                          const std::vector<double>& grid) {
  if (result.latencies.empty())
    throw degenerate_input_error("empirical_ccdf: no completed samples");
  std::vector<double> sorted = result.latencies;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out;
  out.reserve(grid.size());
  double n = static_cast<double>(sorted.size());
  for (double g : grid) {
    auto it = std::upper_bound(sorted.begin(), sorted.end(), g);
    out.push_back(static_cast<double>(sorted.end() - it) / n);
  }
  return out;
}

namespace detail {

class SimEngine {
 public:
  explicit SimEngine(const SimConfig& config) : cfg_(config) { prepare(); }

  SimResult run() {
    if (cfg_.closed_population > 0) {
      for (std::int64_t i = 0; i < cfg_.closed_population; ++i)
        inject_request(0.0);
    } else {
      schedule_arrival(arrival_rng_.next_exponential(cfg_.lambda));
    }
    while (!events_.empty() && !aborted_) {
      Event ev = events_.top();
      events_.pop();
      now_ = ev.t;
      if (ev.kind == Event::kArrival) {
        handle_arrival();
      } else {
        handle_completion(ev.server, ev.token);
      }
      if (cfg_.observer) {
        qlen_scratch_.clear();
        for (const auto& s : servers_)
          qlen_scratch_.push_back(static_cast<std::int64_t>(s.q.size()));
        cfg_.observer(now_, qlen_scratch_);
      }
      if (done_target_reached()) break;
    }
    return finish();
  }

 private:
  struct Copy {
    std::int64_t req;
    int group;  // -1 systematic, else recovery group index (0 for MDS rest)
  };
  using CopyIt = std::list<Copy>::iterator;

  struct CopyRef {
    int server = -1;
    CopyIt it;
    bool active = false;
  };

  struct Server {
    std::list<Copy> q;
    bool busy = false;
    std::uint64_t token = 0;
    double busy_since = 0.0;
    double busy_accum = 0.0;
    double rate = 1.0;
    RandomStream rng;
  };

  struct Request {
    double arrival = 0.0;
    int object = 0;
    double hol = -1.0;
    double departure = -1.0;
    int winner = -2;
    int type_index = -1;
    std::vector<int> remaining;  // per recovery group
    int mds_remaining = 0;
    std::vector<CopyRef> copies;
    bool done = false;
  };

  struct Event {
    static constexpr int kArrival = 0;
    static constexpr int kCompletion = 1;
    double t;
    std::uint64_t seq;
    int kind;
    int server;
    std::uint64_t token;
  };
  struct EventLater {
    bool operator()(const Event& a, const Event& b) const {
      if (a.t != b.t) return a.t > b.t;
      return a.seq > b.seq;
    }
  };

  void prepare() {
    require_valid(cfg_.layout);
    if (!(cfg_.lambda > 0.0) && cfg_.closed_population == 0)
      throw invalid_parameter_error("sim: need lambda > 0");
    if (cfg_.n_arrivals < 1)
      throw invalid_parameter_error("sim: need n_arrivals >= 1");
    if (cfg_.warmup_fraction < 0.0 || cfg_.warmup_fraction >= 1.0)
      throw invalid_parameter_error("sim: warmup_fraction must be in [0,1)");

    const auto& p = cfg_.layout.params;
    rates_ = cfg_.server_rates;
    if (rates_.empty()) rates_.assign(p.n, cfg_.mu);
    if (static_cast<int>(rates_.size()) != p.n)
      throw invalid_parameter_error("sim: server_rates size != n");
    for (double r : rates_)
      if (!(r > 0.0)) throw invalid_parameter_error("sim: rates must be positive");

    if (cfg_.mds_k) {
      if (*cfg_.mds_k < 1 || *cfg_.mds_k > p.n - 1)
        throw invalid_parameter_error("sim: mds_k must be in [1, n-1]");
      if (cfg_.mode == SimMode::FSM)
        throw invalid_parameter_error("sim: FSM mode does not take mds_k");
    }

    if (cfg_.mode == SimMode::GA) {
      popularity_ = cfg_.popularity.p.empty() ? uniform_popularity(p.k)
                                              : cfg_.popularity;
      validate_popularity(popularity_);
      if (static_cast<int>(popularity_.p.size()) != p.k)
        throw invalid_parameter_error("sim: popularity size != k");
      pop_cdf_.resize(popularity_.p.size());
      double acc = 0.0;
      for (std::size_t i = 0; i < popularity_.p.size(); ++i) {
        acc += popularity_.p[i];
        pop_cdf_[i] = acc;
      }
      pop_cdf_.back() = 1.0;
    }

    if (cfg_.mode == SimMode::FSM) {
      for (double r : rates_)
        if (r != rates_[0])
          throw invalid_parameter_error("sim: FSM needs uniform server rates");
      fsm_rate_ = (p.t + 1) * rates_[0];
      servers_.resize(1);
      servers_[0].rate = fsm_rate_;
      servers_[0].rng = RandomStream(cfg_.seed, 1);
    } else {
      servers_.resize(p.n);
      for (int s = 0; s < p.n; ++s) {
        servers_[s].rate = rates_[s];
        servers_[s].rng = RandomStream(cfg_.seed, 1 + s);
      }
    }
    arrival_rng_ = RandomStream(cfg_.seed, 0);

    if (cfg_.mode == SimMode::FA && !cfg_.mds_k) {
      auto types = enumerate_types(p.r, p.t);
      for (std::size_t i = 0; i < types.size(); ++i)
        type_index_[types[i].nu] = static_cast<int>(i);
      type_counts_.assign(types.size(), 0);
    }

    warmup_cutoff_ = static_cast<std::int64_t>(
        std::floor(cfg_.warmup_fraction * static_cast<double>(cfg_.n_arrivals)));
  }

  bool done_target_reached() const {
    return cfg_.closed_population > 0 && departures_ >= cfg_.n_arrivals;
  }

  void schedule_arrival(double t) {
    events_.push({t, seq_++, Event::kArrival, -1, 0});
  }

  void schedule_completion(int server, double t) {
    events_.push({t, seq_++, Event::kCompletion, server, servers_[server].token});
  }

  int sample_object() {
    if (cfg_.mode != SimMode::GA) return 0;
    double u = arrival_rng_.next_uniform();
    auto it = std::upper_bound(pop_cdf_.begin(), pop_cdf_.end(), u);
    if (it == pop_cdf_.end()) --it;
    return static_cast<int>(it - pop_cdf_.begin());
  }

  Request& request(std::int64_t idx) { return live_[idx - first_live_]; }

  void handle_arrival() {
    inject_request(now_);
    if (cfg_.closed_population == 0 && next_arrival_idx_ < cfg_.n_arrivals)
      schedule_arrival(now_ + arrival_rng_.next_exponential(cfg_.lambda));
  }

  void inject_request(double t) {
    std::int64_t idx = next_arrival_idx_++;
    live_.emplace_back();
    Request& req = live_.back();
    req.arrival = t;
    req.object = sample_object();

    if (cfg_.mode == SimMode::SM) {
      sm_wait_.push_back(idx);
      if (sm_in_service_ < 0) admit_next_sm(t);
      if (static_cast<std::int64_t>(sm_wait_.size()) > cfg_.max_backlog)
        aborted_ = true;
    } else {
      fork_copies(idx, t);
    }
    if (cfg_.closed_population == 0 && idx == cfg_.n_arrivals - 1)
      result_.in_system_at_last_arrival = next_arrival_idx_ - departures_;
    if (cfg_.mode == SimMode::FA) try_mark_hol(t);
  }

  void admit_next_sm(double t) {
    while (sm_in_service_ < 0 && !sm_wait_.empty()) {
      std::int64_t idx = sm_wait_.front();
      sm_wait_.pop_front();
      sm_in_service_ = idx;
      fork_copies(idx, t);
    }
  }

  void fork_copies(std::int64_t idx, double t) {
    Request& req = request(idx);
    const auto& obj = cfg_.layout.objects[req.object];
    auto push_copy = [&](int server, int group) {
      Server& s = servers_[server];
      s.q.push_back({idx, group});
      req.copies.push_back({server, std::prev(s.q.end()), true});
      if (!s.busy) start_service(server, t);
      if (static_cast<std::int64_t>(s.q.size()) > cfg_.max_backlog)
        aborted_ = true;
    };

    if (cfg_.mode == SimMode::FSM) {
      push_copy(0, -1);
      return;
    }
    if (cfg_.mds_k) {
      req.mds_remaining = *cfg_.mds_k;
      push_copy(obj.systematic, -1);
      for (int s = 0; s < cfg_.layout.params.n; ++s)
        if (s != obj.systematic) push_copy(s, 0);
      return;
    }
    req.remaining.assign(obj.recovery_groups.size(),
                         cfg_.layout.params.r);
    push_copy(obj.systematic, -1);
    for (std::size_t g = 0; g < obj.recovery_groups.size(); ++g)
      for (int s : obj.recovery_groups[g]) push_copy(s, static_cast<int>(g));
  }

  void start_service(int server, double t) {
    Server& s = servers_[server];
    s.busy = true;
    ++s.token;
    s.busy_since = t;
    schedule_completion(server, t + s.rng.next_exponential(s.rate));
  }

  void release_server(int server, double t) {
    Server& s = servers_[server];
    s.busy = false;
    s.busy_accum += t - s.busy_since;
    ++s.token;  // invalidate any pending completion event
  }

  void deactivate_ref(Request& req, int server) {
    for (auto& ref : req.copies)
      if (ref.active && ref.server == server) {
        ref.active = false;
        return;
      }
  }

  void handle_completion(int server, std::uint64_t token) {
    Server& s = servers_[server];
    if (!s.busy || token != s.token) return;  // stale: the copy was cancelled
    Copy copy = s.q.front();
    s.q.pop_front();
    release_server(server, now_);

    Request& req = request(copy.req);
    deactivate_ref(req, server);

    bool completed = false;
    int winner = -2;
    if (copy.group < 0) {
      completed = true;
      winner = -1;
    } else if (cfg_.mds_k) {
      if (--req.mds_remaining == 0) {
        completed = true;
        winner = 0;
      }
    } else {
      if (--req.remaining[copy.group] == 0) {
        completed = true;
        winner = copy.group;
      }
    }
    if (completed) complete_request(copy.req, winner);
    if (!s.busy && !s.q.empty()) start_service(server, now_);
    if (completed && cfg_.mode == SimMode::FA) try_mark_hol(now_);
  }

  void complete_request(std::int64_t idx, int winner) {
    Request& req = request(idx);
    req.done = true;
    req.departure = now_;
    req.winner = winner;
    ++departures_;

    // Cancel outstanding copies, freeing any server that is serving one.
    for (auto& ref : req.copies) {
      if (!ref.active) continue;
      Server& s = servers_[ref.server];
      bool in_service = s.busy && ref.it == s.q.begin();
      s.q.erase(ref.it);
      ref.active = false;
      if (in_service) {
        release_server(ref.server, now_);
        if (!s.q.empty()) start_service(ref.server, now_);
      }
    }
    req.copies.clear();
    req.copies.shrink_to_fit();

    record(idx, req);

    if (cfg_.mode == SimMode::SM && sm_in_service_ == idx) {
      sm_in_service_ = -1;
      admit_next_sm(now_);
    }
    while (!live_.empty() && live_.front().done) {
      live_.pop_front();
      ++first_live_;
    }
    if (cfg_.closed_population > 0 && departures_ < cfg_.n_arrivals)
      inject_request(now_);
  }

  void record(std::int64_t idx, const Request& req) {
    bool recorded = cfg_.closed_population > 0
                        ? departures_ > warmup_departures()
                        : idx >= warmup_cutoff_;
    if (!recorded) return;
    if (last_recorded_departure_ < 0.0) first_recorded_departure_ = now_;
    last_recorded_departure_ = now_;
    ++result_.completed;
    result_.latencies.push_back(req.departure - req.arrival);
    if (req.winner < 0)
      ++won_systematic_;
    else
      ++won_recovery_;
    if (req.type_index >= 0) {
      ++type_counts_[req.type_index];
      ++result_.typed_completed;
    }
    if (cfg_.record_trace)
      result_.trace.push_back({idx, req.arrival, req.hol, req.departure,
                               req.object, req.type_index, req.winner});
  }

  std::int64_t warmup_departures() const {
    return static_cast<std::int64_t>(
        std::floor(cfg_.warmup_fraction * static_cast<double>(cfg_.n_arrivals)));
  }

  // FA only: the oldest request reaches the head of the line once every one of
  // its remaining copies is the copy in service at its server.
  void try_mark_hol(double t) {
    if (live_.empty()) return;
    Request& req = live_.front();
    if (req.done || req.hol >= 0.0) return;
    for (const auto& ref : req.copies) {
      if (!ref.active) continue;
      const Server& s = servers_[ref.server];
      if (!s.busy || ref.it != s.q.begin()) return;
    }
    req.hol = t;
    if (cfg_.mds_k || cfg_.mode == SimMode::FSM) return;
    const auto& p = cfg_.layout.params;
    std::vector<int> nu(p.r, 0);
    for (int g = 0; g < static_cast<int>(req.remaining.size()); ++g) {
      int d = p.r - req.remaining[g];  // early departures in group g
      if (d < 0 || d > p.r - 1)
        throw degenerate_model_error("sim: impossible early-departure count");
      ++nu[d];
    }
    auto it = type_index_.find(nu);
    if (it == type_index_.end())
      throw degenerate_model_error("sim: unknown service type");
    req.type_index = it->second;
  }

  SimResult finish() {
    result_.aborted = aborted_;
    result_.sim_time = now_;
    result_.first_recorded_departure = first_recorded_departure_;
    result_.last_recorded_departure = last_recorded_departure_;
    for (auto& s : servers_) {
      if (s.busy) {
        s.busy_accum += now_ - s.busy_since;
        s.busy = false;
      }
      result_.utilization.push_back(now_ > 0.0 ? s.busy_accum / now_ : 0.0);
    }
    if (result_.completed > 0) {
      double sum = 0.0;
      for (double x : result_.latencies) sum += x;
      result_.mean_t = sum / static_cast<double>(result_.completed);
    }
    std::int64_t won = won_systematic_ + won_recovery_;
    if (won > 0) {
      result_.ws = static_cast<double>(won_systematic_) / won;
      result_.wr = static_cast<double>(won_recovery_) / won;
    }
    if (!type_counts_.empty()) {
      result_.type_freqs.r = cfg_.layout.params.r;
      result_.type_freqs.t = cfg_.layout.params.t;
      result_.type_freqs.f.assign(type_counts_.size(), 0.0);
      if (result_.typed_completed > 0)
        for (std::size_t i = 0; i < type_counts_.size(); ++i)
          result_.type_freqs.f[i] = static_cast<double>(type_counts_[i]) /
                                    static_cast<double>(result_.typed_completed);
    }
    if (!cfg_.ccdf_grid.empty() && !result_.latencies.empty())
      result_.ccdf = empirical_ccdf(result_, cfg_.ccdf_grid);
    return std::move(result_);
  }

  SimConfig cfg_;
  std::vector<double> rates_;
  PopularityVector popularity_;
  std::vector<double> pop_cdf_;
  double fsm_rate_ = 0.0;

  std::priority_queue<Event, std::vector<Event>, EventLater> events_;
  std::uint64_t seq_ = 0;
  double now_ = 0.0;
  bool aborted_ = false;

  std::vector<Server> servers_;
  RandomStream arrival_rng_;
  std::deque<Request> live_;
  std::int64_t first_live_ = 0;
  std::int64_t next_arrival_idx_ = 0;
  std::int64_t departures_ = 0;
  std::int64_t warmup_cutoff_ = 0;

  std::deque<std::int64_t> sm_wait_;
  std::int64_t sm_in_service_ = -1;

  std::map<std::vector<int>, int> type_index_;
  std::vector<std::int64_t> type_counts_;
  std::int64_t won_systematic_ = 0;
  std::int64_t won_recovery_ = 0;
  double first_recorded_departure_ = -1.0;
  double last_recorded_departure_ = -1.0;

  SimResult result_;
  std::vector<std::int64_t> qlen_scratch_;
};

}  // namespace detail

inline SimResult simulate(const SimConfig& config) {
  return detail::SimEngine(config).run();
}

struct ReplicateResult {
  SimResult aggregate;
  std::vector<SimResult> reps;
};

// Runs n_reps simulations with seeds seed + j*seed_stride (stride 0 forces
// identical replications) and aggregates with a Student-t 95% half-width over
// the replication means. Replications run in parallel; results merge in
// replication order, so the outcome does not depend on scheduling.
inline ReplicateResult replicate(const SimConfig& config, int n_reps,
                                 std::uint64_t seed_stride = 1) {
  if (n_reps < 2)
    throw invalid_parameter_error("replicate: need n_reps >= 2");
  std::vector<SimResult> reps(n_reps);
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      int j = next.fetch_add(1);
      if (j >= n_reps) return;
      SimConfig c = config;
      c.seed = config.seed + static_cast<std::uint64_t>(j) * seed_stride;
      reps[j] = simulate(c);
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  ReplicateResult out;
  std::vector<double> means;
  std::int64_t total = 0, typed_total = 0, won_total = 0;
  for (const auto& r : reps) {
    means.push_back(r.mean_t);
    total += r.completed;
    typed_total += r.typed_completed;
    if (r.aborted) out.aggregate.aborted = true;
  }
  MeanCi ci = mean_ci(means);
  out.aggregate.mean_t = ci.mean;
  out.aggregate.mean_half_width = ci.half_width;
  out.aggregate.completed = total;
  out.aggregate.typed_completed = typed_total;
  out.aggregate.sim_time = reps.front().sim_time;
  out.aggregate.utilization.assign(reps.front().utilization.size(), 0.0);
  for (const auto& r : reps) {
    for (std::size_t i = 0; i < r.utilization.size(); ++i)
      out.aggregate.utilization[i] += r.utilization[i] / n_reps;
    out.aggregate.latencies.insert(out.aggregate.latencies.end(),
                                   r.latencies.begin(), r.latencies.end());
  }
  double ws_acc = 0.0;
  for (const auto& r : reps) ws_acc += r.ws * static_cast<double>(r.completed);
  won_total = total;
  if (won_total > 0) {
    out.aggregate.ws = ws_acc / static_cast<double>(won_total);
    out.aggregate.wr = 1.0 - out.aggregate.ws;
  }
  if (!reps.front().type_freqs.f.empty()) {
    out.aggregate.type_freqs.r = reps.front().type_freqs.r;
    out.aggregate.type_freqs.t = reps.front().type_freqs.t;
    out.aggregate.type_freqs.f.assign(reps.front().type_freqs.f.size(), 0.0);
    if (typed_total > 0)
      for (const auto& r : reps)
        for (std::size_t i = 0; i < r.type_freqs.f.size(); ++i)
          out.aggregate.type_freqs.f[i] +=
              r.type_freqs.f[i] * static_cast<double>(r.typed_completed) /
              static_cast<double>(typed_total);
  }
  if (!config.ccdf_grid.empty() && !out.aggregate.latencies.empty())
    out.aggregate.ccdf = empirical_ccdf(out.aggregate, config.ccdf_grid);
  out.reps = std::move(reps);
  return out;
}

// Saturated departure rate of the FA system on this layout: a closed
// population keeps every queue busy and the long-run departure rate is the
// capacity of the open system.
inline double saturation_throughput(const StorageLayout& layout, double mu,
                                    const std::vector<double>& server_rates,
                                    std::int64_t departures, std::uint64_t seed,
                                    std::int64_t population = 200) {
  SimConfig cfg;
  cfg.mode = SimMode::FA;
  cfg.layout = layout;
  cfg.mu = mu;
  cfg.server_rates = server_rates;
  cfg.n_arrivals = departures;
  cfg.seed = seed;
  cfg.closed_population = population;
  cfg.warmup_fraction = 0.2;
  cfg.max_backlog = population + 1;
  SimResult r = simulate(cfg);
  double window = r.last_recorded_departure - r.first_recorded_departure;
  if (r.completed < 2 || !(window > 0.0))
    throw degenerate_input_error("saturation_throughput: too few departures");
  return static_cast<double>(r.completed - 1) / window;
}

}  // namespace fjlat
