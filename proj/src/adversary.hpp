#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "learning.hpp"
#include "rng.hpp"

namespace peerfl {

enum class AdversaryKind { Honest, HonestButCurious, LabelFlip, SignFlip, NoiseInjection, FgsmEval };

struct AdversarySpec {
  AdversaryKind kind = AdversaryKind::Honest;
  double sigma = 0.0;    // NoiseInjection
  double epsilon = 0.0;  // FgsmEval

  friend bool operator==(const AdversarySpec&, const AdversarySpec&) = default;
};

/// Where in the device loop an attack takes effect.
enum class AdversaryPhase { DataLoad, PreSend, Eval };

std::string to_string(AdversaryKind kind);
std::optional<AdversaryKind> adversary_kind_from_string(std::string_view name);

/// The phase an attack alters, or nullopt for observation-only kinds.
std::optional<AdversaryPhase> active_phase(AdversaryKind kind);

/// y -> classes - 1 - y. An involution; features are untouched.
Dataset flip_labels(Dataset data);

/// SignFlip negates every weight; NoiseInjection adds N(0, sigma^2) noise.
/// Throws std::invalid_argument for any other kind.
ModelParams poison_update(ModelParams params, const AdversarySpec& spec, Rng& rng);

/// x' = x + epsilon * sign(dloss/dx), with sign(0) = 0.
std::vector<double> fgsm_perturb(const ModelParams& params, std::span<const double> features,
                                 std::span<const int> labels, double epsilon);

/// Accuracy on an FGSM-perturbed copy of `data`.
double adversarial_accuracy(const ModelParams& params, const Dataset& data, double epsilon);

}  // namespace peerfl
