#pragma once

#include <map>
#include <string>
#include <vector>

#include <kimura/model.hpp>

namespace kimura {

/// Named real parameters of a catalog model. Keys not understood by the model are rejected.
using ModelParams = std::map<std::string, double>;

/// Builds a catalog model. Names: const-wf-1d, cir-like, wf-with-free-coord, log-drift,
/// power-singular, the negative controls negative-drift, running-max, indefinite-cross,
/// holder-rough, and "custom" (constant coefficients from the parameters).
CoefficientModel make_model(const std::string& name, const ModelParams& params = {});

/// Every name accepted by make_model.
std::vector<std::string> catalog_names();

/// Smooth cutoff equal to 1 on [0, r0 / 2] and to 0 on [r0, inf).
double smooth_cutoff(double s, double r0);

}  // namespace kimura
