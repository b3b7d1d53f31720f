#pragma once

#include <limits>
#include <span>
#include <vector>

#include "pushsim/context.hpp"

namespace pushsim {

struct PowerModel {
    double amp_efficiency = 0.08;
    double p_active = 3.0;
    double p_sleep = 1.0;
    double p_max = 0.2;

    /// Extra circuit power for waking a sleeping SBS.
    double wake_power() const { return p_active - p_sleep; }
    void validate() const;
};

/// Water level nu (W) and idle-slot gain threshold g_th (1/W). g_th = +inf
/// means no idle slot is ever worth waking for.
struct WaterfillPlan {
    double nu = 0.0;
    double g_th = std::numeric_limits<double>::infinity();
    bool exceeds_power_cap = false;  // nu > p_max: outside the no-clipping regime

    bool idle_tier_active() const { return std::isfinite(g_th); }
};

/// Allocation that puts every usable slot at full residual power.
WaterfillPlan full_power_plan(const PowerModel& power);

struct SlotState {
    double g = 0.0;     // gain at the residual bandwidth, 1/W
    double w = 0.0;     // residual bandwidth, Hz
    double p_rt = 0.0;  // power reserved for RT, W
    bool idle = true;   // no RT traffic in this slot

    /// Builds a slot from the full-bandwidth gain g_tilde and the RT reservation.
    static SlotState from_tilde(double g_tilde, const RtReservation& rt, double w_max);
};

struct PushTarget {
    double bits = 0.0;
    long n_slots = 0;
    double slot_duration = 0.0;

    /// Required average rate over the window, nats/s.
    double rate_nats() const;
    void validate() const;
};

/// Multi-level water-filling: idle slots below g_th get nothing, every other
/// slot gets (w/W_max)*nu - 1/g clipped to [0, p_max - p_rt].
double allocate_slot_power(const SlotState& slot, const WaterfillPlan& plan,
                           const PowerModel& power, double w_max);

/// w * ln(1 + g p), nats/s.
double slot_rate(const SlotState& slot, double p);

/// p / xi plus the wake cost when an idle slot is used.
double slot_push_power_total(double p, const SlotState& slot, const PowerModel& power);

/// (nu - 1/g_th) + xi (p_act - p_sle) - nu ln(nu g_th).
double kkt_residual(double nu, double g_th, const PowerModel& power);

/// Root of kkt_residual in nu on (1/g_th, inf).
double solve_nu_given_gth(double g_th, const PowerModel& power, double tol = 1e-12);

/// Root of kkt_residual in g_th for a given nu; +inf when it exceeds the
/// double range (the idle tier is then inactive).
double solve_gth_given_nu(double nu, const PowerModel& power);

/// How the Gamma tail integrals are evaluated. The closed form uses
/// incomplete-gamma and exponential-integral identities for integer shape;
/// the quadrature path integrates numerically and serves as its reference.
enum class TailIntegration { ClosedForm, Quadrature };

/// Partial moments of U ~ Gamma(shape, 1) over [lower, inf):
/// E[1{U>=lower}], E[1{U>=lower}/U] and E[1{U>=lower} ln U].
struct TailMoments {
    double mass = 0.0;
    double inv = 0.0;
    double log = 0.0;
};

TailMoments gamma_tail_moments(int shape, double lower, TailIntegration method = TailIntegration::ClosedForm);

/// Expected per-slot quantities under (network, user) context, averaged over frames.
struct ExpectedBreakdown {
    double occupied_tx = 0.0;  // W, already divided by xi
    double idle_tx = 0.0;      // W, already divided by xi
    double wake = 0.0;         // W
    double occupied_rate = 0.0;  // nats/s
    double idle_rate = 0.0;      // nats/s

    double power() const { return occupied_tx + idle_tx + wake; }
    double rate() const { return occupied_rate + idle_rate; }
};

ExpectedBreakdown expected_breakdown(const WaterfillPlan& plan, const OccupancyMatrix& occupancy,
                                     const UserContext& user, const PowerModel& power,
                                     double w_max,
                                     TailIntegration method = TailIntegration::ClosedForm);

double expected_push_power(const WaterfillPlan& plan, const OccupancyMatrix& occupancy,
                           const UserContext& user, const PowerModel& power,
                           TailIntegration method = TailIntegration::ClosedForm);

double expected_rate(const WaterfillPlan& plan, const OccupancyMatrix& occupancy,
                     const UserContext& user, double w_max,
                     TailIntegration method = TailIntegration::ClosedForm);

/// Occupied-slot part of expected_rate; depends on nu only.
double expected_occupied_rate(double nu, const OccupancyMatrix& occupancy, const UserContext& user,
                              double w_max,
                              TailIntegration method = TailIntegration::ClosedForm);

struct SolverOptions {
    double tol = 1e-8;  // relative, on g_th and on the rate target
    int max_iterations = 200;
    TailIntegration integration = TailIntegration::ClosedForm;
};

/// Two-tier bisection for the context-driven plan: the inner tier solves
/// kkt_residual for nu at a given g_th, the outer tier bisects g_th (in
/// log-space) until expected_rate meets the push target. Throws
/// InfeasibleError when the target cannot be bracketed.
WaterfillPlan solve_plan(const OccupancyMatrix& occupancy, const UserContext& user,
                         const PushTarget& target, const PowerModel& power, double w_max,
                         const SolverOptions& options = {});

struct OfflineSolution {
    WaterfillPlan plan;
    std::vector<double> powers;  // per slot, W
    double energy = 0.0;         // J, transmit/xi + wake costs
    int idle_slots_used = 0;
};

/// Full-information solution of the per-slot problem: for every count N of
/// woken idle slots (best gains first) the water level is solved exactly, and
/// the cheapest candidate is returned. Throws InfeasibleError when even full
/// power in every slot falls short.
OfflineSolution solve_offline_oracle(std::span<const SlotState> slots, const PushTarget& target,
                                     const PowerModel& power, double w_max);

/// Realized push energy (J) and delivered information (nats) when a plan is
/// applied slot by slot over a whole window.
struct RealizedPush {
    double energy = 0.0;
    double nats = 0.0;
    int idle_slots_used = 0;
};

RealizedPush apply_plan(std::span<const SlotState> slots, const WaterfillPlan& plan,
                        const PowerModel& power, double w_max, double slot_duration);

}  // namespace pushsim
