#include "kets/attacks.hpp"

#include <algorithm>
#include <cmath>

#include "kets/errors.hpp"
#include "kets/rng.hpp"

namespace kets {

namespace {

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

double squared_distance(const UpdateVector& a, const UpdateVector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

}  // namespace

AttackKind attack_kind_from_string(const std::string& s) {
    if (s == "none") return AttackKind::none;
    if (s == "trim") return AttackKind::trim;
    if (s == "krum") return AttackKind::krum;
    if (s == "min_max") return AttackKind::min_max;
    if (s == "min_sum") return AttackKind::min_sum;
    if (s == "sign_flip") return AttackKind::sign_flip;
    if (s == "label_flip") return AttackKind::label_flip;
    throw ConfigError("unknown attack kind '" + s + "'");
}

std::string to_string(AttackKind k) {
    switch (k) {
        case AttackKind::none: return "none";
        case AttackKind::trim: return "trim";
        case AttackKind::krum: return "krum";
        case AttackKind::min_max: return "min_max";
        case AttackKind::min_sum: return "min_sum";
        case AttackKind::sign_flip: return "sign_flip";
        case AttackKind::label_flip: return "label_flip";
    }
    return "none";
}

PerturbationKind perturbation_from_string(const std::string& s) {
    if (s == "unit") return PerturbationKind::unit;
    if (s == "std") return PerturbationKind::std_dev;
    throw ConfigError("unknown perturbation kind '" + s + "'");
}

std::string to_string(PerturbationKind k) {
    return k == PerturbationKind::unit ? "unit" : "std";
}

UpdateVector perturbation_vector(const std::vector<UpdateVector>& benign, PerturbationKind kind) {
    if (benign.size() < 2) throw InsufficientSamplesError("perturbation_vector: need at least 2 benign updates");
    if (kind == PerturbationKind::unit) {
        UpdateVector m = mean(benign);
        const double norm = l2_norm(m);
        if (norm == 0.0) throw ZeroNormError("perturbation_vector: benign mean has zero norm");
        return scale(m, -1.0 / norm);
    }
    return scale(coordinate_std(benign), -1.0);
}

GammaSearchResult gamma_search(const std::vector<UpdateVector>& benign, const UpdateVector& perturbation,
                               const std::function<bool(const UpdateVector&)>& constraint,
                               double gamma_init, double tau) {
    const UpdateVector base = mean(benign);
    double gamma = gamma_init;
    double step = gamma_init / 2.0;
    double gamma_succ = 0.0;
    // Halve past tau so the last feasible probe lands within tau of the
    // boundary, not just within the final oscillation amplitude.
    const double resolution = tau / 8.0;
    while (step >= resolution) {
        if (constraint(add(base, scale(perturbation, gamma)))) {
            gamma_succ = gamma;
            gamma += step;
        } else {
            gamma -= step;
        }
        step /= 2.0;
    }
    return {gamma_succ, add(base, scale(perturbation, gamma_succ))};
}

UpdateVector min_max_attack(const std::vector<UpdateVector>& benign, PerturbationKind kind,
                            const AttackConfig& cfg) {
    const UpdateVector p = perturbation_vector(benign, kind);
    double bound = 0.0;
    for (std::size_t i = 0; i < benign.size(); ++i) {
        for (std::size_t j = i + 1; j < benign.size(); ++j) {
            bound = std::max(bound, squared_distance(benign[i], benign[j]));
        }
    }
    const auto constraint = [&](const UpdateVector& candidate) {
        for (const auto& u : benign) {
            if (squared_distance(candidate, u) > bound) return false;
        }
        return true;
    };
    return gamma_search(benign, p, constraint, cfg.gamma_init, cfg.tau).malicious;
}

UpdateVector min_sum_attack(const std::vector<UpdateVector>& benign, PerturbationKind kind,
                            const AttackConfig& cfg) {
    const UpdateVector p = perturbation_vector(benign, kind);
    double bound = 0.0;
    for (const auto& u : benign) {
        double total = 0.0;
        for (const auto& v : benign) total += squared_distance(u, v);
        bound = std::max(bound, total);
    }
    const auto constraint = [&](const UpdateVector& candidate) {
        double total = 0.0;
        for (const auto& u : benign) total += squared_distance(candidate, u);
        return total <= bound;
    };
    return gamma_search(benign, p, constraint, cfg.gamma_init, cfg.tau).malicious;
}

std::vector<UpdateVector> trim_attack(const std::vector<UpdateVector>& benign, double b,
                                      std::size_t n_malicious, std::uint64_t seed) {
    if (benign.size() < 2) throw InsufficientSamplesError("trim_attack: need at least 2 benign updates");
    if (!(b > 1.0)) throw ConfigError("trim_attack: range factor b must exceed 1");

    const std::size_t dim = benign.front().size();
    const UpdateVector m = mean(benign);
    UpdateVector lo(dim, 0.0);
    UpdateVector hi(dim, 0.0);
    for (std::size_t j = 0; j < dim; ++j) {
        double cmin = benign.front()[j];
        double cmax = benign.front()[j];
        for (const auto& u : benign) {
            cmin = std::min(cmin, u[j]);
            cmax = std::max(cmax, u[j]);
        }
        const double s = sign(m[j]);
        double a = 0.0, c = 0.0;
        if (s > 0.0) {
            // Push below the smallest benign value.
            a = cmin < 0.0 ? b * cmin : cmin / b;
            c = cmin;
        } else if (s < 0.0) {
            // Push above the largest benign value.
            a = cmax;
            c = cmax > 0.0 ? b * cmax : cmax / b;
        }
        lo[j] = std::min(a, c);
        hi[j] = std::max(a, c);
    }

    Rng rng(seed);
    std::vector<UpdateVector> out(n_malicious, UpdateVector(dim, 0.0));
    for (auto& v : out) {
        for (std::size_t j = 0; j < dim; ++j) {
            v[j] = lo[j] == hi[j] ? lo[j] : rng.uniform(lo[j], hi[j]);
        }
    }
    return out;
}

UpdateVector krum_attack(const std::vector<UpdateVector>& benign, std::size_t copies,
                         const KrumOracle& selected_by_krum, double lambda_init, double lambda_floor) {
    if (copies < 1) throw ConfigError("krum_attack: need at least one malicious client");
    UpdateVector direction = mean(benign);
    for (auto& x : direction) x = sign(x);

    for (double lambda = lambda_init;; lambda /= 2.0) {
        const double effective = std::max(lambda, lambda_floor);
        UpdateVector candidate = scale(direction, -effective);
        if (selected_by_krum(candidate, copies, benign)) return candidate;
        if (effective == lambda_floor) return candidate;  // give up at the floor
    }
}

UpdateVector sign_flip_attack(const UpdateVector& honest_update) {
    return scale(honest_update, -1.0);
}

}  // namespace kets
