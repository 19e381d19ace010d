#include "ccspin/ode.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>

namespace ccs {

namespace odeint = boost::numeric::odeint;

const char* to_string(OdeStatus s) {
    switch (s) {
        case OdeStatus::Completed: return "completed";
        case OdeStatus::Stopped: return "stopped";
        case OdeStatus::DomainExit: return "domain_exit";
        case OdeStatus::StepFailure: return "step_failure";
        case OdeStatus::MaxSteps: return "max_steps";
    }
    return "?";
}

OdeResult integrate(const Rhs& f, const State& y0, double t0, double t1, const OdeOptions& opt,
                    const std::function<bool(double, const State&)>& stop,
                    const std::vector<double>& sample_times) {
    OdeResult res;
    res.t.push_back(t0);
    res.y.push_back(y0);
    if (t1 == t0) return res;
    const double dir = t1 > t0 ? 1.0 : -1.0;

    using stepper_t = odeint::runge_kutta_dopri5<State>;
    auto stepper = odeint::make_dense_output(opt.atol, opt.rtol, stepper_t());
    auto sys = [&](const State& y, State& dy, double t) {
        f(y, dy, t);
        for (double& v : dy)
            if (!std::isfinite(v)) v = kOutsideDomain;
    };

    // requested output times in integration order
    std::vector<double> req = sample_times;
    std::sort(req.begin(), req.end());
    if (dir < 0) std::reverse(req.begin(), req.end());
    size_t next_req = 0;
    while (next_req < req.size() && dir * (req[next_req] - t0) < 0) ++next_req;

    std::vector<double> out_t;
    std::vector<State> out_y;

    stepper.initialize(y0, t0, dir * std::min(std::abs(opt.dt0), std::abs(t1 - t0)));
    State tmp(y0.size());
    bool finished = false;
    try {
        while (!finished) {
            if (res.steps >= opt.max_steps) {
                res.status = OdeStatus::MaxSteps;
                res.message = "step budget exhausted";
                break;
            }
            const auto span = stepper.do_step(sys);
            ++res.steps;
            double t_now = span.second;
            // collect dense samples inside the step
            while (next_req < req.size() && dir * (req[next_req] - t_now) <= 0 &&
                   dir * (req[next_req] - t1) <= 0) {
                stepper.calc_state(req[next_req], tmp);
                out_t.push_back(req[next_req]);
                out_y.push_back(tmp);
                ++next_req;
            }
            const State* cur = &stepper.current_state();
            bool bad = false;
            for (double v : *cur)
                if (!std::isfinite(v) || std::abs(v) >= 0.5 * kOutsideDomain) bad = true;
            if (bad) {
                res.status = OdeStatus::DomainExit;
                res.message = "state left the admissible domain";
                break;
            }
            if (dir * (t_now - t1) >= 0) {
                stepper.calc_state(t1, tmp);
                t_now = t1;
                cur = &tmp;
                finished = true;
            }
            if (opt.record_steps || finished) {
                res.t.push_back(t_now);
                res.y.push_back(*cur);
            }
            if (stop && stop(t_now, *cur)) {
                res.status = finished ? OdeStatus::Completed : OdeStatus::Stopped;
                if (!opt.record_steps && !finished) {
                    res.t.push_back(t_now);
                    res.y.push_back(*cur);
                }
                break;
            }
            if (std::abs(stepper.current_time_step()) < 1e-15 * std::max(1.0, std::abs(t_now))) {
                res.status = OdeStatus::StepFailure;
                res.message = "step size underflow";
                break;
            }
        }
    } catch (const std::exception& e) {
        res.status = OdeStatus::DomainExit;
        res.message = e.what();
    }
    if (!req.empty()) {
        res.t = std::move(out_t);
        res.y = std::move(out_y);
    }
    return res;
}

}  // namespace ccs
