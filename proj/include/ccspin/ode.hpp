#pragma once

#include <functional>
#include <string>
#include <vector>

namespace ccs {

using State = std::vector<double>;
using Rhs = std::function<void(const State&, State&, double)>;

enum class OdeStatus { Completed, Stopped, DomainExit, StepFailure, MaxSteps };
const char* to_string(OdeStatus s);

struct OdeOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double dt0 = 1e-3;  // magnitude; sign follows the direction of integration
    long max_steps = 2'000'000;
    bool record_steps = true;
};

struct OdeResult {
    std::vector<double> t;
    std::vector<State> y;
    OdeStatus status = OdeStatus::Completed;
    std::string message;
    long steps = 0;
};

// Adaptive Dormand-Prince 5(4) with dense output. Records the start and every accepted step;
// the last sample is exactly at t1 on completion. `stop` is tested after every step and the
// run ends (status Stopped) on the first sample where it returns true. A right-hand side that
// produces non-finite or huge values makes the step controller shrink the step; if it cannot
// recover the run ends with DomainExit.
OdeResult integrate(const Rhs& f, const State& y0, double t0, double t1, const OdeOptions& opt,
                    const std::function<bool(double, const State&)>& stop = nullptr,
                    const std::vector<double>& sample_times = {});

// Value the right-hand side should return outside its domain.
constexpr double kOutsideDomain = 1e100;

}  // namespace ccs
