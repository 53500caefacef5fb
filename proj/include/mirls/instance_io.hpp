#pragma once

#include <cstdint>
#include <string>

#include "mirls/observation.hpp"
#include "mirls/problem.hpp"

namespace mirls {

/// A reproducible problem: the ground-truth recipe plus the sampled data.
///
/// JSON container:
///   {"d1":..,"d2":..,"r":..,"kappa":..,"decay":"exp"|"lin","seed":..,
///    "entries":[[i,j],...],"values":[...]}
/// The ground truth is regenerated from (d1, d2, r, kappa, decay, seed).
struct ProblemInstance {
  GroundTruth truth;
  ObservationSet observations;
};

std::string instance_to_json(const ProblemInstance& instance);
ProblemInstance instance_from_json(const std::string& text);

void save_instance(const ProblemInstance& instance, const std::string& path);
ProblemInstance load_instance(const std::string& path);

}  // namespace mirls
