#include "stroock/mc.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include <boost/math/distributions/binomial.hpp>

#include "stroock/action.hpp"
#include "stroock/quadrature.hpp"

namespace stroock {

TiltedRates tilt_for_mean_drift(double m) {
    if (!(std::abs(m) < 1.0)) throw domain_error("tilt_for_mean_drift: |m| must be < 1");
    const double alpha = m / std::sqrt(1.0 - m * m);
    const double s = std::sqrt(1.0 + alpha * alpha);
    return TiltedRates{s - alpha, s + alpha};
}

WeightedPath sample_weighted_path(double epsilon, double horizon, RngSeed seed,
                                  const Sampler& sampler, InitialLaw initial) {
    if (sampler.kind == Sampler::Kind::plain)
        return WeightedPath{sample_path(epsilon, horizon, seed, initial), 0.0};

    const double a_plus = sampler.rates.a_plus;
    const double a_minus = sampler.rates.a_minus;
    if (!(a_plus > 0.0) || !(a_minus > 0.0))
        throw domain_error("sample_weighted_path: tilted rates must be positive");

    const double inv_eps2 = 1.0 / (epsilon * epsilon);
    if (std::max(a_plus, a_minus) * inv_eps2 * horizon > kMaxExpectedJumps)
        throw capacity_error("sample_weighted_path: expected jump count exceeds 1e8");

    CounterRng rng(seed);
    WeightedPath wp;
    wp.path.epsilon = epsilon;
    wp.path.horizon = horizon;
    switch (initial) {
        case InitialLaw::fixed_plus: wp.path.initial_sign = +1; break;
        case InitialLaw::fixed_minus: wp.path.initial_sign = -1; break;
        case InitialLaw::stationary: wp.path.initial_sign = rng.next_sign(); break;
    }

    // log dP/dQ = sum_segments (a(state) - 1) * eps^-2 * len - sum_jumps log a(state before)
    int sign = wp.path.initial_sign;
    double t = 0.0;
    double log_w = 0.0;
    while (true) {
        const double a = (sign > 0) ? a_plus : a_minus;
        const double dt = rng.next_exponential(a * inv_eps2);
        if (t + dt > horizon) {
            log_w += (a - 1.0) * inv_eps2 * (horizon - t);
            break;
        }
        t += dt;
        log_w += (a - 1.0) * inv_eps2 * dt - std::log(a);
        wp.path.jump_times.push_back(t);
        sign = -sign;
    }
    wp.log_weight = log_w;
    return wp;
}

void parallel_samples(std::uint64_t n, unsigned threads,
                      const std::function<void(std::uint64_t)>& body) {
    if (threads <= 1 || n < 2) {
        for (std::uint64_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    const std::uint64_t chunk = (n + threads - 1) / threads;
    for (unsigned w = 0; w < threads; ++w) {
        const std::uint64_t lo = w * chunk;
        const std::uint64_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (std::uint64_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

namespace {

double process_speed(const ProcessSpec& p, double epsilon) {
    if (std::holds_alternative<SdeProcess>(p)) {
        const double lam = std::get<SdeProcess>(p).lam(epsilon);
        return lam * lam;
    }
    return epsilon * epsilon;
}

const ProcessSpec& event_process(const EventSpec& e) {
    if (const auto* ep = std::get_if<EndpointExceeds>(&e)) return ep->process;
    return std::get<SupBall>(e).process;
}

// Evaluate the event on one telegraph path.
bool event_hit(const EventSpec& event, const TelegraphPath& path, double epsilon) {
    const ProcessSpec& proc = event_process(event);

    if (const auto* ep = std::get_if<EndpointExceeds>(&event)) {
        if (std::holds_alternative<ThetaIntegralProcess>(proc))
            return epsilon * theta_integral(path, ep->t) >= ep->threshold;
        if (const auto* gp = std::get_if<GepsProcess>(&proc)) {
            GridPath single;
            single.times = {ep->t};
            single.values = {0.0};
            return epsilon * g_epsilon(gp->spec, path, single).values[0] >= ep->threshold;
        }
        const auto& sp = std::get<SdeProcess>(proc);
        GridPath single;
        single.times = {ep->t};
        single.values = {0.0};
        return simulate(sp.dd, sp.x0, epsilon, sp.lam, path, single).values[0] >= ep->threshold;
    }

    const auto& ball = std::get<SupBall>(event);
    GridPath traj;
    if (std::holds_alternative<ThetaIntegralProcess>(proc)) {
        traj = ball.target;
        for (std::size_t i = 0; i < traj.times.size(); ++i)
            traj.values[i] = epsilon * theta_integral(path, traj.times[i]);
    } else if (const auto* gp = std::get_if<GepsProcess>(&proc)) {
        traj = g_epsilon(gp->spec, path, ball.target);
        for (double& v : traj.values) v *= epsilon;
    } else {
        const auto& sp = std::get<SdeProcess>(proc);
        traj = simulate(sp.dd, sp.x0, epsilon, sp.lam, path, ball.target);
    }
    double sup = 0.0;
    for (std::size_t i = 0; i < traj.times.size(); ++i)
        sup = std::max(sup, std::abs(traj.values[i] - ball.target.values[i]));
    return ball.complementary ? (sup >= ball.radius) : (sup < ball.radius);
}

} // namespace

LdpEstimate estimate(const EventSpec& event, double epsilon, std::uint64_t n, RngSeed seed,
                     const Sampler& sampler, const McOptions& opts) {
    if (n < 1000) throw domain_error("estimate: need n >= 1e3");

    const bool tilted = sampler.kind == Sampler::Kind::tilted;
    std::vector<double> weighted_hits(n, 0.0);
    std::vector<std::uint8_t> hits(n, 0);

    parallel_samples(n, opts.threads, [&](std::uint64_t i) {
        WeightedPath wp =
            sample_weighted_path(epsilon, 1.0, seed.with_stream(seed.stream + i), sampler,
                                 opts.initial);
        if (event_hit(event, wp.path, epsilon)) {
            hits[i] = 1;
            weighted_hits[i] = std::exp(wp.log_weight);
        }
    });

    LdpEstimate est;
    est.epsilon = epsilon;
    est.n_samples = n;
    est.speed = process_speed(event_process(event), epsilon);
    est.tilted = tilted;
    est.rates = sampler.rates;

    double sum_w = 0.0, sum_w2 = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) {
        est.n_hits += hits[i];
        sum_w += weighted_hits[i];
        sum_w2 += weighted_hits[i] * weighted_hits[i];
    }
    const double nf = static_cast<double>(n);
    est.p_hat = sum_w / nf;

    if (!tilted) {
        est.ci_low = (est.n_hits == 0)
                         ? 0.0
                         : boost::math::binomial_distribution<double>::find_lower_bound_on_p(
                               nf, static_cast<double>(est.n_hits), 0.025);
        est.ci_high = boost::math::binomial_distribution<double>::find_upper_bound_on_p(
            nf, static_cast<double>(est.n_hits), 0.025);
    } else {
        const double var = std::max(0.0, sum_w2 / nf - est.p_hat * est.p_hat);
        const double half = 1.959963984540054 * std::sqrt(var / nf);
        est.ci_low = std::max(0.0, est.p_hat - half);
        // zero hits: fall back to the exact binomial zero-count bound on the hit count
        est.ci_high = (est.n_hits == 0)
                          ? boost::math::binomial_distribution<double>::find_upper_bound_on_p(
                                nf, 0.0, 0.025)
                          : est.p_hat + half;
    }

    if (est.n_hits == 0 || est.p_hat <= 0.0) {
        est.p_hat = 0.0;
        est.degenerate = true;
        est.scaled_log_p = -kInfiniteRate;
    } else {
        est.scaled_log_p = est.speed * std::log(est.p_hat);
    }
    return est;
}

double chernoff_scaled_log_bound(double threshold, double t, double epsilon, ChainStart initial) {
    if (!(t > 0.0)) throw domain_error("chernoff_scaled_log_bound: t must be positive");
    const double T = t / (epsilon * epsilon);
    auto exponent = [&](double eta) { return eta * threshold - t * finite_eps_cgf(eta, T, initial); };
    const double eta_star = golden_section_max(exponent, 0.0, 60.0, 1e-10);
    return -std::max(0.0, exponent(eta_star));
}

double event_rate_reference(const EventSpec& event, double epsilon) {
    (void)epsilon; // the reference is the eps -> 0 variational rate
    if (const auto* ep = std::get_if<EndpointExceeds>(&event)) {
        const ProcessSpec& proc = ep->process;
        if (std::holds_alternative<ThetaIntegralProcess>(proc))
            return finite_dim_rate({ep->t}, {ep->threshold}, RateModel::unit_path());
        if (const auto* gp = std::get_if<GepsProcess>(&proc)) {
            // straight-line proxy through the threshold point
            GridPath line = GridPath::sample(
                50, [&](double s) { return ep->threshold * std::min(s / ep->t, 1.0); });
            KernelRateOptions kro;
            kro.n_control = 100;
            return kernel_rate(gp->spec, line, kro).value;
        }
        const auto& sp = std::get<SdeProcess>(proc);
        const RateModel model = (sp.lam.form == LambdaSpec::Form::kappa_eps)
                                    ? RateModel::kappa_regime(sp.lam.kappa)
                                    : RateModel::gaussian();
        GridPath line = GridPath::sample(200, [&](double s) {
            return sp.x0 + (ep->threshold - sp.x0) * std::min(s / ep->t, 1.0);
        });
        return sde_rate(sp.dd.b, sp.dd.sigma, sp.x0, line, model);
    }

    const auto& ball = std::get<SupBall>(event);
    const ProcessSpec& proc = ball.process;
    if (std::holds_alternative<ThetaIntegralProcess>(proc)) return path_rate(ball.target);
    if (const auto* gp = std::get_if<GepsProcess>(&proc))
        return kernel_rate(gp->spec, ball.target).value;
    const auto& sp = std::get<SdeProcess>(proc);
    const RateModel model = (sp.lam.form == LambdaSpec::Form::kappa_eps)
                                ? RateModel::kappa_regime(sp.lam.kappa)
                                : RateModel::gaussian();
    return sde_rate(sp.dd.b, sp.dd.sigma, sp.x0, ball.target, model);
}

LdpCurve ldp_curve(const EventSpec& event, const std::vector<double>& epsilons,
                   std::uint64_t n_per, RngSeed seed, const Sampler& sampler,
                   const McOptions& opts) {
    for (std::size_t i = 1; i < epsilons.size(); ++i)
        if (!(epsilons[i] < epsilons[i - 1]))
            throw domain_error("ldp_curve: epsilons must be decreasing");

    LdpCurve curve;
    curve.rate_reference = event_rate_reference(event, epsilons.empty() ? 1.0 : epsilons.front());

    std::uint64_t stream = seed.stream;
    for (double eps : epsilons) {
        LdpEstimate est = estimate(event, eps, n_per, seed.with_stream(stream), sampler, opts);
        est.rate_reference = curve.rate_reference;
        curve.estimates.push_back(est);
        stream += n_per; // disjoint substreams per epsilon
    }

    // affine least squares of scaled_log_p on eps over non-degenerate points
    std::vector<double> xs, ys;
    for (const auto& est : curve.estimates) {
        if (est.degenerate) {
            ++curve.excluded;
            continue;
        }
        xs.push_back(est.epsilon);
        ys.push_back(est.scaled_log_p);
    }
    curve.fit.points = xs.size();
    if (xs.size() >= 2) {
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            mx += xs[i];
            my += ys[i];
        }
        mx /= static_cast<double>(xs.size());
        my /= static_cast<double>(xs.size());
        double sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxx += (xs[i] - mx) * (xs[i] - mx);
            sxy += (xs[i] - mx) * (ys[i] - my);
        }
        curve.fit.slope = sxy / sxx;
        curve.fit.intercept = my - curve.fit.slope * mx;
        double ss_res = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double resid = ys[i] - (curve.fit.intercept + curve.fit.slope * xs[i]);
            ss_res += resid * resid;
            curve.fit.max_abs_residual = std::max(curve.fit.max_abs_residual, std::abs(resid));
        }
        if (xs.size() > 2) {
            const double sigma2 = ss_res / static_cast<double>(xs.size() - 2);
            curve.fit.intercept_se =
                std::sqrt(sigma2 * (1.0 / static_cast<double>(xs.size()) + mx * mx / sxx));
        }
    }
    return curve;
}

std::vector<PhaseCell> phase_transition_report(const std::vector<double>& kappas,
                                               const std::vector<double>& betas, double threshold,
                                               const std::vector<double>& epsilons,
                                               std::uint64_t n_per, RngSeed seed,
                                               const McOptions& opts) {
    std::vector<PhaseCell> table;
    auto dd = DriftDiffusion::make([](double) { return 0.0; }, [](double) { return 1.0; }, 1.0);
    std::uint64_t stream = seed.stream;

    auto run_cell = [&](const std::string& label, const LambdaSpec& lam, double target) {
        PhaseCell cell;
        cell.label = label;
        cell.lam = lam;
        cell.target = -target;

        EventSpec event = EndpointExceeds{SdeProcess{dd, 0.0, lam, 200}, 1.0, threshold};
        // mean-drift tilt: the constant control reaching the threshold needs
        // xi to average threshold*eps/lambda; clip unreachable targets
        std::vector<LdpEstimate> ests;
        LdpCurve curve;
        curve.rate_reference = is_infinite_rate(target) ? kInfiniteRate : target;
        std::vector<double> xs, ys;
        for (double eps : epsilons) {
            const double m = threshold * eps / lam(eps);
            Sampler sampler = (std::abs(m) < 0.995)
                                  ? Sampler::tilted(tilt_for_mean_drift(m))
                                  : Sampler::plain();
            LdpEstimate est = estimate(event, eps, n_per, seed.with_stream(stream), sampler, opts);
            est.rate_reference = curve.rate_reference;
            stream += n_per;
            curve.estimates.push_back(est);
            if (!est.degenerate) {
                xs.push_back(est.epsilon);
                ys.push_back(est.scaled_log_p);
            } else {
                ++curve.excluded;
            }
        }
        curve.fit.points = xs.size();
        if (xs.size() >= 2) {
            double mx = 0, my = 0;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                mx += xs[i];
                my += ys[i];
            }
            mx /= static_cast<double>(xs.size());
            my /= static_cast<double>(xs.size());
            double sxx = 0, sxy = 0;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                sxx += (xs[i] - mx) * (xs[i] - mx);
                sxy += (xs[i] - mx) * (ys[i] - my);
            }
            curve.fit.slope = sxy / sxx;
            curve.fit.intercept = my - curve.fit.slope * mx;
        }
        cell.curve = curve;
        if (!is_infinite_rate(target) && curve.fit.points >= 2) {
            cell.pass = std::abs(curve.fit.intercept - cell.target) <=
                        0.25 * std::max(std::abs(cell.target), 1e-12);
        }
        table.push_back(std::move(cell));
    };

    for (double k : kappas) {
        const RateModel model = RateModel::kappa_regime(k);
        run_cell("kappa=" + std::to_string(k), LambdaSpec::kappa_eps(k),
                 gamma_cost(model, threshold));
    }
    for (double b : betas) {
        run_cell("beta=" + std::to_string(b), LambdaSpec::power(b),
                 0.5 * threshold * threshold);
    }
    return table;
}

double binomial_ci_low(std::uint64_t hits, std::uint64_t n, double confidence) {
    if (n == 0 || hits > n || !(confidence > 0.0 && confidence < 1.0))
        throw domain_error("binomial_ci_low: bad arguments");
    if (hits == 0) return 0.0;
    return boost::math::binomial_distribution<double>::find_lower_bound_on_p(
        static_cast<double>(n), static_cast<double>(hits), 0.5 * (1.0 - confidence));
}

double binomial_ci_high(std::uint64_t hits, std::uint64_t n, double confidence) {
    if (n == 0 || hits > n || !(confidence > 0.0 && confidence < 1.0))
        throw domain_error("binomial_ci_high: bad arguments");
    if (hits == n) return 1.0;
    return boost::math::binomial_distribution<double>::find_upper_bound_on_p(
        static_cast<double>(n), static_cast<double>(hits), 0.5 * (1.0 - confidence));
}

} // namespace stroock
