#include "bdmac/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "bdmac/analytic.hpp"
#include "bdmac/delay.hpp"

namespace bdmac {

double SimStats::AcStats::stddev_s() const {
    if (n_samples < 2) return 0.0;
    return std::sqrt(m2 / double(n_samples));
}

void SimStats::AcStats::add_sample(double delay_s) {
    ++n_samples;
    const double d = delay_s - mean_s;
    mean_s += d / double(n_samples);
    m2 += d * (delay_s - mean_s);
}

namespace {

constexpr std::int64_t kNone = std::numeric_limits<std::int64_t>::max();
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Entity {
    int station = 0;
    int ac = 0;
    // queue
    bool saturated = false;
    long backlog = 0;
    double next_arrival_s = kInf;
    double period_s = 0.0;  // periodic only
    double head_since_s = -1.0;
    // contention state; counter < 0 means no packet in service
    int counter = -1;
    int stage = 0;
    std::int64_t next_action = kNone;  // tick of next decrement or fire
};

struct Sim {
    const SimConfig& cfg;
    const NetworkScenario& sc;
    std::mt19937_64 rng;
    std::uniform_real_distribution<double> uni{0.0, 1.0};

    double tick = 1e-6;
    std::int64_t slot_t = 0, sifs_t = 0;
    std::array<std::int64_t, 2> aifs_t{};
    std::array<std::int64_t, 4> burst_t{};
    std::int64_t anchor = 0;  // end tick of the last busy period
    double duration_s = 0.0, warmup_s = 0.0;

    std::vector<Entity> ents;
    SimStats stats;

    Sim(const SimConfig& c, std::uint64_t seed) : cfg(c), sc(c.scenario), rng(seed) {
        stats.seed = seed;
        const ZDistribution z = z_distribution(sc.detection);
        const TransmissionProfile prof = make_profile(sc, z, tick);
        auto ticks = [&](double s) { return std::llround(s / tick); };
        slot_t = ticks(prof.slot_s);
        sifs_t = ticks(prof.sifs_s);
        aifs_t = {ticks(prof.aifs_s[0]), ticks(prof.aifs_s[1])};
        for (int k = 0; k < 4; ++k)
            burst_t[static_cast<std::size_t>(k)] =
                ticks(prof.burst_s[static_cast<std::size_t>(k)]);
        anchor = -sifs_t;  // first slot boundaries land at aifsn*slot
        duration_s = cfg.sim_duration_s;
        warmup_s = cfg.warmup_s;

        ents.reserve(static_cast<std::size_t>(sc.n_stations) * 2);
        for (int s = 0; s < sc.n_stations; ++s)
            for (int a = 0; a < 2; ++a) {
                Entity e;
                e.station = s;
                e.ac = a;
                const ArrivalModel& arr = sc.ac[static_cast<std::size_t>(a)].arrival;
                switch (arr.kind) {
                    case ArrivalKind::Saturated:
                        e.saturated = true;
                        break;
                    case ArrivalKind::Poisson:
                        e.next_arrival_s =
                            arr.rate_pps > 0 ? exp_gap(arr.rate_pps) : kInf;
                        break;
                    case ArrivalKind::Periodic:
                        if (arr.rate_pps > 0) {
                            e.period_s = 1.0 / arr.rate_pps;
                            e.next_arrival_s = uni(rng) * e.period_s;
                        }
                        break;
                }
                ents.push_back(e);
            }
        for (auto& e : ents)
            if (e.saturated) start_service(e, 0.0);
    }

    double exp_gap(double rate) { return -std::log1p(-uni(rng)) / rate; }

    int draw_counter(const Entity& e) {
        const int w = cw_schedule(sc.ac[static_cast<std::size_t>(e.ac)], e.stage);
        return int(rng() % std::uint64_t(w));
    }

    // First slot boundary of entity's AC at or after time t.
    std::int64_t ready_tick(int ac, double t_s) {
        const std::int64_t base = anchor + aifs_t[static_cast<std::size_t>(ac)];
        const std::int64_t tt = std::int64_t(std::ceil(t_s / tick - 1e-9));
        if (tt <= base) return base;
        const std::int64_t m = (tt - base + slot_t - 1) / slot_t;
        return base + m * slot_t;
    }

    // Delay samples run from the instant the backoff countdown arms (the
    // packet's first slot boundary), matching the k*H + TR structure of the
    // analytic service time, to the end of the burst.
    void start_service(Entity& e, double ready_after_s) {
        e.stage = 0;
        e.counter = draw_counter(e);
        const std::int64_t ready = ready_tick(e.ac, ready_after_s);
        e.head_since_s = double(ready) * tick;
        e.next_action = e.counter == 0 ? ready : ready + slot_t;
    }

    void on_arrival(Entity& e) {
        const double t = e.next_arrival_s;
        const ArrivalModel& arr = sc.ac[static_cast<std::size_t>(e.ac)].arrival;
        // Periodic spacing carries +-10% dither (mean preserved): with exact
        // common periods, two stations whose phases land within one backoff
        // window stay collision-locked forever, which no station-independent
        // chain can represent.
        e.next_arrival_s = arr.kind == ArrivalKind::Poisson
                               ? t + exp_gap(arr.rate_pps)
                               : t + e.period_s * (0.9 + 0.2 * uni(rng));
        if (e.counter >= 0) {
            ++e.backlog;
            return;
        }
        start_service(e, t);
    }

    int draw_copies() {
        for (int c = 1; c <= 4; ++c) {
            const bool preamble = uni(rng) < sc.detection.p_preamble;
            if (preamble && uni(rng) < sc.detection.p_decode) return c;
        }
        return 4;
    }

    // AC1 collision: next stage or drop; either way the channel is busy
    // until ready_after_s.
    void collide_ac1(Entity& e, double ready_after_s, bool post_warmup) {
        if (e.stage >= sc.ac[1].retry_limit) {
            if (post_warmup) ++stats.ac[1].drops;
            finish_at(e, ready_after_s);
            return;
        }
        ++e.stage;
        e.counter = draw_counter(e);
        const std::int64_t ready = ready_tick(e.ac, ready_after_s);
        e.next_action = e.counter == 0 ? ready : ready + slot_t;
    }

    void run() {
        while (true) {
            std::int64_t t_act = kNone;
            for (const auto& e : ents) t_act = std::min(t_act, e.next_action);
            double t_arr = kInf;
            Entity* arr_e = nullptr;
            for (auto& e : ents)
                if (e.next_arrival_s < t_arr) {
                    t_arr = e.next_arrival_s;
                    arr_e = &e;
                }
            const double t_act_s = t_act == kNone ? kInf : double(t_act) * tick;
            if (std::min(t_act_s, t_arr) > duration_s) break;
            if (t_arr < t_act_s) {
                on_arrival(*arr_e);
                continue;
            }
            process_instant(t_act);
        }
    }

    void process_instant(std::int64_t now) {
        // decrement phase; entities reaching zero fire at this instant
        std::vector<Entity*> fires;
        for (auto& e : ents) {
            if (e.next_action != now) continue;
            if (e.counter == 0) {
                fires.push_back(&e);
                continue;
            }
            --e.counter;
            if (e.counter == 0)
                fires.push_back(&e);
            else
                e.next_action = now + slot_t;
        }
        if (fires.empty()) return;

        const double now_s = double(now) * tick;
        const bool post_warmup_now = now_s >= warmup_s;

        // internal collisions: AC0 of the same station wins
        std::vector<Entity*> tx;
        std::vector<Entity*> internal_losers;
        for (Entity* e : fires) {
            if (e->ac == 1) {
                bool sibling_fires = false;
                for (Entity* o : fires)
                    if (o->station == e->station && o->ac == 0) sibling_fires = true;
                if (sibling_fires) {
                    internal_losers.push_back(e);
                    continue;
                }
            }
            tx.push_back(e);
        }

        // bursts: copy count per the per-copy detection protocol
        std::vector<int> copies(tx.size());
        std::int64_t busy_len = 0;
        for (std::size_t i = 0; i < tx.size(); ++i) {
            copies[i] = draw_copies();
            if (post_warmup_now)
                ++stats.z_histogram[static_cast<std::size_t>(copies[i] - 1)];
            busy_len = std::max(busy_len, burst_t[static_cast<std::size_t>(copies[i] - 1)]);
        }
        const std::int64_t busy_end = now + busy_len;
        const double busy_end_s = double(busy_end) * tick;
        anchor = busy_end;  // post-burst slot lattice anchors here

        const bool collided = tx.size() >= 2;
        for (std::size_t i = 0; i < tx.size(); ++i) {
            Entity& e = *tx[i];
            const double own_end_s =
                double(now + burst_t[static_cast<std::size_t>(copies[i] - 1)]) * tick;
            const bool post_warmup = own_end_s >= warmup_s;
            if (!collided) {
                if (post_warmup)
                    stats.ac[static_cast<std::size_t>(e.ac)].add_sample(
                        own_end_s - e.head_since_s);
                finish_at(e, busy_end_s);
            } else {
                if (post_warmup)
                    ++stats.ac[static_cast<std::size_t>(e.ac)].external_collisions;
                if (e.ac == 0) {
                    // no MAC-level recovery for the broadcast-style AC0
                    if (post_warmup)
                        stats.ac[0].add_sample(own_end_s - e.head_since_s);
                    finish_at(e, busy_end_s);
                } else {
                    collide_ac1(e, busy_end_s, post_warmup);
                }
            }
        }
        for (Entity* e : internal_losers) {
            const bool post_warmup = now_s >= warmup_s;
            if (post_warmup) ++stats.ac[1].internal_collisions;
            collide_ac1(*e, busy_end_s, post_warmup);
        }

        // every other in-service entity refreezes until busy end + AIFS
        for (auto& e : ents) {
            if (e.counter < 0) continue;
            bool was_tx = false;
            for (Entity* t : tx)
                if (t == &e) was_tx = true;
            for (Entity* t : internal_losers)
                if (t == &e) was_tx = true;
            if (was_tx) continue;
            e.next_action = busy_end + aifs_t[static_cast<std::size_t>(e.ac)];
        }
    }

    // packet leaves the queue; the channel stays busy until ready_after_s
    void finish_at(Entity& e, double ready_after_s) {
        if (e.saturated) {
            start_service(e, ready_after_s);
            return;
        }
        if (e.backlog > 0) {
            --e.backlog;
            start_service(e, ready_after_s);
        } else {
            e.counter = -1;
            e.head_since_s = -1.0;
            e.next_action = kNone;
        }
    }
};

}  // namespace

SimStats run_simulation(const SimConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Sim sim(cfg, seed);
    sim.run();
    return sim.stats;
}

std::vector<SimStats> run_many(const SimConfig& cfg) {
    cfg.validate();
    std::vector<SimStats> out;
    out.reserve(static_cast<std::size_t>(cfg.runs));
    for (int r = 0; r < cfg.runs; ++r)
        out.push_back(run_simulation(cfg, cfg.rng_seed + std::uint64_t(r)));
    return out;
}

bool replay_determinism(const SimConfig& cfg, std::uint64_t seed) {
    const SimStats a = run_simulation(cfg, seed);
    const SimStats b = run_simulation(cfg, seed);
    for (int i = 0; i < 2; ++i) {
        const auto& x = a.ac[static_cast<std::size_t>(i)];
        const auto& y = b.ac[static_cast<std::size_t>(i)];
        if (x.n_samples != y.n_samples || x.mean_s != y.mean_s || x.m2 != y.m2 ||
            x.internal_collisions != y.internal_collisions ||
            x.external_collisions != y.external_collisions || x.drops != y.drops)
            return false;
    }
    return a.z_histogram == b.z_histogram;
}

PooledStats pool_stats(const std::vector<SimStats>& runs) {
    PooledStats p;
    for (int a = 0; a < 2; ++a) {
        double sum = 0.0, sumsq = 0.0;
        long n = 0;
        for (const auto& r : runs) {
            const auto& s = r.ac[static_cast<std::size_t>(a)];
            sum += s.mean_s * double(s.n_samples);
            sumsq += s.m2 + s.mean_s * s.mean_s * double(s.n_samples);
            n += s.n_samples;
        }
        p.n_samples[static_cast<std::size_t>(a)] = n;
        if (n > 0) {
            const double mean = sum / double(n);
            p.mean_s[static_cast<std::size_t>(a)] = mean;
            const double var = std::max(0.0, sumsq / double(n) - mean * mean);
            p.stddev_s[static_cast<std::size_t>(a)] = std::sqrt(var);
        }
    }
    return p;
}

}  // namespace bdmac
