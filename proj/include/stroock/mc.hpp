#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "stroock/grid.hpp"
#include "stroock/kernels.hpp"
#include "stroock/rate.hpp"
#include "stroock/rng.hpp"
#include "stroock/sde.hpp"
#include "stroock/telegraph.hpp"

namespace stroock {

// Processes whose rare events are estimated. theta_integral and g_eps are the
// eps-scaled processes of the functional LDP (speed eps^2); sde is X^eps
// (speed lambda^2(eps)).
struct ThetaIntegralProcess {};
struct GepsProcess {
    KernelSpec spec;
    std::size_t grid_cells = 200;
};
struct SdeProcess {
    DriftDiffusion dd;
    double x0 = 0.0;
    LambdaSpec lam;
    std::size_t grid_cells = 200;
};
using ProcessSpec = std::variant<ThetaIntegralProcess, GepsProcess, SdeProcess>;

struct EndpointExceeds {
    ProcessSpec process;
    double t = 1.0;
    double threshold = 0.0;
};
struct SupBall {
    ProcessSpec process;
    GridPath target;
    double radius = 0.0;
    bool complementary = false; // true: event is sup-distance >= radius
};
using EventSpec = std::variant<EndpointExceeds, SupBall>;

// Flip intensities of the tilted (asymmetric) telegraph, in rescaled time
// units: a_plus out of +1, a_minus out of -1; the nominal process has both 1.
struct TiltedRates {
    double a_plus = 1.0;
    double a_minus = 1.0;
};

// Rates whose stationary mean drift of xi equals m: the Cramer tilt
// a+- = sqrt(1+alpha^2) -+ alpha with alpha = m / sqrt(1 - m^2).
TiltedRates tilt_for_mean_drift(double m);

struct Sampler {
    enum class Kind { plain, tilted };
    Kind kind = Kind::plain;
    TiltedRates rates;

    static Sampler plain() { return {}; }
    static Sampler tilted(TiltedRates r) { return Sampler{Kind::tilted, r}; }
    static Sampler tilted(double a_plus, double a_minus) {
        return Sampler{Kind::tilted, TiltedRates{a_plus, a_minus}};
    }
};

struct LdpEstimate {
    double epsilon = 0.0;
    std::uint64_t n_samples = 0;
    std::uint64_t n_hits = 0;
    double p_hat = 0.0;
    double ci_low = 0.0;  // 95% interval: exact binomial (plain), normal (tilted)
    double ci_high = 1.0;
    double speed = 0.0;          // eps^2 or lambda^2(eps)
    double scaled_log_p = 0.0;   // speed * log p_hat; -inf sentinel on zero hits
    double rate_reference = 0.0; // variational rate the estimate is compared to
    bool tilted = false;
    TiltedRates rates;
    bool degenerate = false; // zero hits
};

struct McOptions {
    unsigned threads = 1;
    InitialLaw initial = InitialLaw::fixed_plus;
};

// Sample-i of an estimate uses substream seed.stream + i, so a run over
// n1 + n2 samples equals the hit-pooled combination of a run over the first
// n1 and a run over the next n2 (seed-partition determinism), and results are
// independent of the thread layout.
LdpEstimate estimate(const EventSpec& event, double epsilon, std::uint64_t n, RngSeed seed,
                     const Sampler& sampler = Sampler::plain(), const McOptions& opts = {});

// Exact finite-eps Chernoff bound on the speed-scaled log-probability of the
// endpoint event {eps * Theta_eps(t) >= threshold}, from the 2x2 semigroup:
//   eps^2 log P <= -sup_eta { eta a - t * finite_eps_cgf(eta, t/eps^2) }.
double chernoff_scaled_log_bound(double threshold, double t, double epsilon,
                                 ChainStart initial = ChainStart::plus);

// Variational rate of the event proxy: the straight line through the
// threshold point for endpoint events, the ball center for sup balls.
double event_rate_reference(const EventSpec& event, double epsilon);

struct RegressionFit {
    double intercept = 0.0;
    double slope = 0.0;
    double intercept_se = 0.0;
    double max_abs_residual = 0.0;
    std::size_t points = 0;
};

struct LdpCurve {
    std::vector<LdpEstimate> estimates;
    RegressionFit fit;          // scaled_log_p regressed affinely on eps
    double rate_reference = 0.0;
    std::size_t excluded = 0;   // degenerate estimates left out of the fit
};

LdpCurve ldp_curve(const EventSpec& event, const std::vector<double>& epsilons,
                   std::uint64_t n_per, RngSeed seed, const Sampler& sampler = Sampler::plain(),
                   const McOptions& opts = {});

// One row of the phase-transition table: a lambda regime, its closed-form
// target, and the extrapolated intercept.
struct PhaseCell {
    std::string label;
    LambdaSpec lam;
    double target = 0.0; // -Gamma(threshold); -inf when threshold exceeds kappa
    LdpCurve curve;
    bool pass = false; // 25% relative tolerance (always false for infinite targets)
};

std::vector<PhaseCell> phase_transition_report(const std::vector<double>& kappas,
                                               const std::vector<double>& betas,
                                               double threshold,
                                               const std::vector<double>& epsilons,
                                               std::uint64_t n_per, RngSeed seed,
                                               const McOptions& opts = {});

// Internal but reused by bounds_lab: tilted path with its exact log
// Radon-Nikodym weight (0 for the plain sampler).
struct WeightedPath {
    TelegraphPath path;
    double log_weight = 0.0;
};
WeightedPath sample_weighted_path(double epsilon, double horizon, RngSeed seed,
                                  const Sampler& sampler, InitialLaw initial);

// Deterministic fan-out of n independent samples across threads; body(i) must
// only write state owned by sample i.
void parallel_samples(std::uint64_t n, unsigned threads, const std::function<void(std::uint64_t)>& body);

// Exact (Clopper-Pearson) two-sided binomial interval endpoints at the given
// confidence level.
double binomial_ci_low(std::uint64_t hits, std::uint64_t n, double confidence);
double binomial_ci_high(std::uint64_t hits, std::uint64_t n, double confidence);

} // namespace stroock
