#include "bdmac/dist.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bdmac {

namespace {

constexpr double kTruncationBudget = 1e-15;

std::int64_t snap_tick(double t_s, double tick_s) {
    return std::llround(t_s / tick_s);
}

// Drop the smallest atoms while their cumulative mass stays below budget.
double truncate_atoms(std::vector<std::pair<std::int64_t, double>>& atoms) {
    if (atoms.size() < 2) return 0.0;
    std::vector<double> masses;
    masses.reserve(atoms.size());
    for (const auto& a : atoms) masses.push_back(a.second);
    std::sort(masses.begin(), masses.end());
    double cum = 0.0, cutoff = -1.0;
    for (double m : masses) {
        if (cum + m >= kTruncationBudget) break;
        cum += m;
        cutoff = m;
    }
    if (cutoff < 0.0) return 0.0;
    double dropped = 0.0;
    std::size_t keep = 0;
    // Equal-mass ties: drop only while the running total stays in budget.
    double run = 0.0;
    for (auto& a : atoms) {
        if (a.second <= cutoff && run + a.second < kTruncationBudget) {
            run += a.second;
            dropped += a.second;
            continue;
        }
        atoms[keep++] = a;
    }
    atoms.resize(keep);
    return dropped;
}

}  // namespace

DiscreteTimeDistribution DiscreteTimeDistribution::delta(double t_s, double tick_s) {
    return from_atoms({{t_s, 1.0}}, tick_s);
}

DiscreteTimeDistribution DiscreteTimeDistribution::from_atoms(
    const std::vector<std::pair<double, double>>& atoms, double tick_s) {
    if (tick_s <= 0) throw DomainError("distribution: tick must be positive");
    DiscreteTimeDistribution d;
    d.tick_ = tick_s;
    d.atoms_.reserve(atoms.size());
    for (const auto& [t, p] : atoms) {
        if (p < 0) throw DomainError("distribution: negative probability");
        if (t < 0) throw DomainError("distribution: negative time");
        if (p == 0.0) continue;
        d.atoms_.emplace_back(snap_tick(t, tick_s), p);
    }
    std::sort(d.atoms_.begin(), d.atoms_.end());
    // merge duplicates
    std::size_t out = 0;
    for (std::size_t i = 0; i < d.atoms_.size(); ++i) {
        if (out > 0 && d.atoms_[out - 1].first == d.atoms_[i].first)
            d.atoms_[out - 1].second += d.atoms_[i].second;
        else
            d.atoms_[out++] = d.atoms_[i];
    }
    d.atoms_.resize(out);
    return d;
}

double DiscreteTimeDistribution::total_mass() const {
    double s = 0.0;
    for (const auto& a : atoms_) s += a.second;
    return s;
}

double DiscreteTimeDistribution::mean_s() const {
    double m = 0.0;
    for (const auto& a : atoms_) m += double(a.first) * a.second;
    return m * tick_;
}

double DiscreteTimeDistribution::variance_s2() const {
    const double mu = mean_s();
    double v = 0.0;
    for (const auto& a : atoms_) {
        const double dt = double(a.first) * tick_ - mu;
        v += a.second * dt * dt;
    }
    return v;
}

double DiscreteTimeDistribution::mass_at(double t_s) const {
    const double ticks = t_s / tick_;
    const std::int64_t k = std::llround(ticks);
    if (std::abs(ticks - double(k)) > 1e-6)
        throw DomainError("pmf: time is not on the quantization grid");
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(),
                               std::make_pair(k, -1.0));
    if (it != atoms_.end() && it->first == k) return it->second;
    return 0.0;
}

void DiscreteTimeDistribution::scale_mass(double factor) {
    if (factor < 0) throw DomainError("distribution: negative scale factor");
    for (auto& a : atoms_) a.second *= factor;
    dropped_ *= factor;
}

DiscreteTimeDistribution convolve(const DiscreteTimeDistribution& a,
                                  const DiscreteTimeDistribution& b) {
    if (a.tick_ != b.tick_)
        throw DomainError("convolve: mismatched quantization grids");
    DiscreteTimeDistribution out;
    out.tick_ = a.tick_;
    out.dropped_ = a.dropped_ + b.dropped_;
    if (a.empty() || b.empty()) return out;

    const auto& big = a.size() >= b.size() ? a.atoms_ : b.atoms_;
    const auto& small = a.size() >= b.size() ? b.atoms_ : a.atoms_;
    const std::int64_t lo = big.front().first + small.front().first;
    const std::int64_t hi = big.back().first + small.back().first;
    std::vector<double> dense(static_cast<std::size_t>(hi - lo + 1), 0.0);
    for (const auto& [ts, ps] : small)
        for (const auto& [tb, pb] : big)
            dense[static_cast<std::size_t>(ts + tb - lo)] += ps * pb;

    out.atoms_.reserve(dense.size());
    for (std::size_t i = 0; i < dense.size(); ++i)
        if (dense[i] > 0.0) out.atoms_.emplace_back(lo + std::int64_t(i), dense[i]);
    out.dropped_ += truncate_atoms(out.atoms_);
    return out;
}

DiscreteTimeDistribution mix(
    const std::vector<std::pair<double, DiscreteTimeDistribution>>& parts) {
    DiscreteTimeDistribution out;
    bool first = true;
    std::vector<std::pair<std::int64_t, double>> merged;
    for (const auto& [w, d] : parts) {
        if (w < 0) throw DomainError("mix: negative weight");
        if (first && !d.atoms().empty()) {
            out.tick_ = d.tick_s();
            first = false;
        } else if (!d.atoms().empty() && d.tick_s() != out.tick_ && !first) {
            throw DomainError("mix: mismatched quantization grids");
        }
        out.dropped_ += w * d.dropped_mass();
        for (const auto& a : d.atoms()) merged.emplace_back(a.first, w * a.second);
    }
    std::sort(merged.begin(), merged.end());
    for (const auto& [t, p] : merged) {
        if (p == 0.0) continue;
        if (!out.atoms_.empty() && out.atoms_.back().first == t)
            out.atoms_.back().second += p;
        else
            out.atoms_.emplace_back(t, p);
    }
    return out;
}

DiscreteTimeDistribution uniform_backoff_mixture(const DiscreteTimeDistribution& h,
                                                 int window) {
    if (window < 1) throw DomainError("backoff mixture: window must be >= 1");
    const double w = 1.0 / double(window);
    DiscreteTimeDistribution power = DiscreteTimeDistribution::delta(0.0, h.tick_s());
    std::vector<std::pair<double, DiscreteTimeDistribution>> parts;
    parts.reserve(static_cast<std::size_t>(window));
    parts.emplace_back(w, power);
    for (int k = 1; k < window; ++k) {
        power = convolve(power, h);
        parts.emplace_back(w, power);
    }
    return mix(parts);
}

DelayMoments moments_from_pgf(const DiscreteTimeDistribution& dist) {
    const double mass = dist.total_mass();
    if (std::abs(mass - 1.0) > 1e-6)
        throw NumericError("moments: distribution is not normalized");
    const double mean = dist.mean_s();
    double var = dist.variance_s2();
    if (var < -1e-12) throw NumericError("moments: negative variance");
    if (var < 0) var = 0.0;
    return DelayMoments{mean, std::sqrt(var)};
}

double pmf_from_pgf(const DiscreteTimeDistribution& dist, double k_s) {
    return dist.mass_at(k_s);
}

}  // namespace bdmac
