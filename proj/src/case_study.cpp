#include "dfc/case_study.hpp"

namespace dfc::casestudy {

Plant plant() {
    Plant p;
    p.A = Matrix{{3.0, -3.75}, {1.0, -1.0}};
    p.B = Matrix{{1.0}, {-1.5}};
    p.C = Matrix{{-2.5, 2.0}};
    return p;
}

DelayedFeedbackController design1() {
    DelayedFeedbackController c;
    c.K = Matrix{{1.2, 0.3319}};
    c.K1 = Matrix{{-0.5523}};
    c.K2 = Matrix{{0.0}};
    c.tau = 0.41;
    c.tau_q = 0.0;
    c.p = 1;
    return c;
}

DelayedFeedbackController design2() {
    DelayedFeedbackController c;
    c.K = Matrix{{3.097, 0.8184}};
    c.K1 = Matrix{{-4.346}};
    c.tau = 0.34;
    c.tau_q = 0.44;
    c.K2 = Matrix{{-1.0 / 0.44}};
    c.p = 1;
    return c;
}

DelayedFeedbackController design2_perturbed() {
    DelayedFeedbackController c = design2();
    c.K2 = Matrix{{-0.9 / 0.44}};
    return c;
}

std::vector<Complex> baseline_poles() {
    return {{-1.36, 0.9646}, {-1.36, -0.9646}, {-2.6729, 0.0}};
}

Matrix baseline_gain() { return design_baseline(plant(), baseline_poles()); }

namespace {
Vector all_states() { return Vector::Ones(2); }
Vector all_outputs() { return Vector::Ones(1); }
}  // namespace

Signal fig4_d1() {
    Signal s = Signal::step(10.0, 0.5, all_states());
    s.add(Signal::ramp(25.0, 0.1, all_states()));
    return s;
}

Signal fig6_d1() { return Signal::parabola(10.0, 0.02, all_states()); }

Signal fig6_d2() {
    Signal s = Signal::step(15.0, 0.5, all_states());
    s.add(Signal::ramp(30.0, 0.05, all_states()));
    return s;
}

Signal step_reference() { return Signal::step(0.0, 1.0, all_outputs()); }

Signal fig8_reference() {
    Signal s = step_reference();
    s.add(Signal::ramp(35.0, 0.1, all_outputs()));
    return s;
}

}  // namespace dfc::casestudy
