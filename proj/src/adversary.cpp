#include "adversary.hpp"

#include <array>
#include <stdexcept>
#include <utility>

namespace peerfl {

namespace {
constexpr std::array<std::pair<AdversaryKind, std::string_view>, 6> kNames{{
    {AdversaryKind::Honest, "honest"},
    {AdversaryKind::HonestButCurious, "honest_but_curious"},
    {AdversaryKind::LabelFlip, "label_flip"},
    {AdversaryKind::SignFlip, "sign_flip"},
    {AdversaryKind::NoiseInjection, "noise_injection"},
    {AdversaryKind::FgsmEval, "fgsm_eval"},
}};
}  // namespace

std::string to_string(AdversaryKind kind) {
  for (const auto& [k, name] : kNames)
    if (k == kind) return std::string(name);
  return "unknown";
}

std::optional<AdversaryKind> adversary_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kNames)
    if (n == name) return k;
  return std::nullopt;
}

std::optional<AdversaryPhase> active_phase(AdversaryKind kind) {
  switch (kind) {
    case AdversaryKind::LabelFlip:
      return AdversaryPhase::DataLoad;
    case AdversaryKind::SignFlip:
    case AdversaryKind::NoiseInjection:
      return AdversaryPhase::PreSend;
    case AdversaryKind::FgsmEval:
      return AdversaryPhase::Eval;
    case AdversaryKind::Honest:
    case AdversaryKind::HonestButCurious:
      break;
  }
  return std::nullopt;
}

Dataset flip_labels(Dataset data) {
  if (data.classes < 2) throw std::invalid_argument("label flipping needs at least two classes");
  for (int& y : data.labels) y = data.classes - 1 - y;
  return data;
}

ModelParams poison_update(ModelParams params, const AdversarySpec& spec, Rng& rng) {
  switch (spec.kind) {
    case AdversaryKind::SignFlip:
      for (double& w : params.weights) w = -w;
      return params;
    case AdversaryKind::NoiseInjection: {
      if (!(spec.sigma > 0.0)) throw std::invalid_argument("noise injection needs sigma > 0");
      std::normal_distribution<double> noise(0.0, spec.sigma);
      for (double& w : params.weights) w += noise(rng);
      return params;
    }
    default:
      throw std::invalid_argument("poison_update called for non-poisoning adversary '" + to_string(spec.kind) + "'");
  }
}

std::vector<double> fgsm_perturb(const ModelParams& params, std::span<const double> features,
                                 std::span<const int> labels, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("FGSM epsilon must be positive");
  const auto grad = input_gradient(params, features, labels);
  std::vector<double> out(features.begin(), features.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (grad[i] > 0.0)
      out[i] += epsilon;
    else if (grad[i] < 0.0)
      out[i] -= epsilon;
  }
  return out;
}

double adversarial_accuracy(const ModelParams& params, const Dataset& data, double epsilon) {
  Dataset perturbed = data;
  perturbed.features = fgsm_perturb(params, data.features, data.labels, epsilon);
  return evaluate(params, perturbed).accuracy;
}

}  // namespace peerfl
