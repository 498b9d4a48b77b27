#ifndef KETS_ATTACKS_HPP
#define KETS_ATTACKS_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kets/vector_ops.hpp"

namespace kets {

enum class AttackKind { none, trim, krum, min_max, min_sum, sign_flip, label_flip };
enum class PerturbationKind { unit, std_dev };

AttackKind attack_kind_from_string(const std::string& s);
std::string to_string(AttackKind k);
PerturbationKind perturbation_from_string(const std::string& s);
std::string to_string(PerturbationKind k);

struct AttackConfig {
    AttackKind kind = AttackKind::none;
    PerturbationKind perturbation = PerturbationKind::unit;
    int start_round = 0;
    int stop_round = 1 << 30;  // inclusive
    double gamma_init = 10.0;
    double tau = 0.01;
    double trim_b = 2.0;            // trim-attack range factor, > 1
    double krum_lambda_init = 10.0;
    double krum_lambda_floor = 1e-5;

    bool active(int round) const { return round >= start_round && round <= stop_round; }
};

// Direction used to push the crafted update away from the benign mean:
// unit    -> -mean(benign) / ||mean(benign)||
// std_dev -> -coordinate_std(benign)
// Throws ZeroNormError for a zero-norm mean with kind unit.
UpdateVector perturbation_vector(const std::vector<UpdateVector>& benign, PerturbationKind kind);

struct GammaSearchResult {
    double gamma = 0.0;
    UpdateVector malicious;
};

// Oscillating halving search for the largest feasible scaling factor:
// starting at gamma_init with step gamma_init/2, move up after a feasible
// probe and down after an infeasible one, halving the step each time. The
// returned gamma is the largest probed feasible value and lands within tau
// of the feasibility boundary for monotone constraints.
GammaSearchResult gamma_search(const std::vector<UpdateVector>& benign, const UpdateVector& perturbation,
                               const std::function<bool(const UpdateVector&)>& constraint,
                               double gamma_init, double tau);

// Crafted update whose distance to every benign update stays within the
// largest benign pairwise distance.
UpdateVector min_max_attack(const std::vector<UpdateVector>& benign, PerturbationKind kind,
                            const AttackConfig& cfg);

// Crafted update whose summed squared distances to the benign updates stay
// within the worst benign client's own sum.
UpdateVector min_sum_attack(const std::vector<UpdateVector>& benign, PerturbationKind kind,
                            const AttackConfig& cfg);

// Per-coordinate directed range attack: each malicious client draws its
// value from an interval on the far side of the benign extremum opposite to
// the mean's sign. Returns one vector per malicious client.
std::vector<UpdateVector> trim_attack(const std::vector<UpdateVector>& benign, double b,
                                      std::size_t n_malicious, std::uint64_t seed);

// Evaluates Krum over {malicious copies} + benign and reports whether one of
// the malicious copies wins. Kept abstract so the attack can search against
// the defense implementation under test.
using KrumOracle = std::function<bool(const UpdateVector& candidate, std::size_t copies,
                                      const std::vector<UpdateVector>& benign)>;

// Halving search over lambda for a candidate -lambda * sign(mean(benign))
// that Krum selects when submitted by `copies` colluding clients.
UpdateVector krum_attack(const std::vector<UpdateVector>& benign, std::size_t copies,
                         const KrumOracle& selected_by_krum, double lambda_init, double lambda_floor);

// -update.
UpdateVector sign_flip_attack(const UpdateVector& honest_update);

}  // namespace kets

#endif  // KETS_ATTACKS_HPP
