#pragma once

// Independent reference implementations used by the tests. They are written
// straight from the model equations with plain nested vectors and share no
// code with the library.

#include <cstddef>
#include <string>
#include <vector>

namespace oracle {

using Grid = std::vector<std::vector<double>>;

/// Per-label scores for one query. `sr` is neurons x labels, `q` has one
/// count per neuron. `scheme` is one of standard, weighted, prob,
/// weighted_prob.
std::vector<double> decode(const Grid& sr, const std::vector<double>& q, const std::string& scheme,
                           double gamma);

struct Sweep
{
    std::vector<double> recall;
    std::vector<double> precision;
    double auc = 0.0;
    double r_at_100p = 0.0;
    double p_at_100r = 0.0;
};

/// Evaluates every distinct confidence as an acceptance threshold.
Sweep threshold_sweep(const std::vector<std::size_t>& predicted, const std::vector<double>& confidence,
                      const std::vector<std::size_t>& truth);

/// Conductance-based LIF membrane potential with constant conductances after
/// `t` ms.
double lif_voltage(double v0, double t, double tau, double e_rest, double e_exc, double e_inh,
                   double ge, double gi);

/// Time for the frozen-conductance solution to reach `v_thresh` from `v0`;
/// negative if it never does.
double lif_charging_time(double v0, double v_thresh, double tau, double e_rest, double e_exc,
                         double e_inh, double ge, double gi);

}  // namespace oracle
