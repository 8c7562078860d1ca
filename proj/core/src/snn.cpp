#include "vprsnn/snn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vprsnn/error.hpp"
#include "vprsnn/random.hpp"

namespace vprsnn {

namespace {

// Timestamps are multiples of dt; comparisons absorb accumulated rounding.
constexpr double kTimeEps = 1e-9;

// Decayed quantities below this are flushed to zero before they turn
// subnormal.
constexpr double kFlushBelow = 1e-200;

void decay_in_place(std::vector<double>& values, double factor) noexcept
{
    for (auto& v : values) {
        const double d = v * factor;
        v = d < kFlushBelow ? 0.0 : d;
    }
}

void require(bool ok, std::string_view scope, std::string_view field, std::string_view what)
{
    if (!ok) {
        std::string msg;
        msg.append(scope).append(scope.empty() ? "" : ".").append(field).append(": ").append(what);
        throw ValidationError(msg);
    }
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

NeuronParams NeuronParams::excitatory()
{
    return NeuronParams{};
}

NeuronParams NeuronParams::inhibitory()
{
    NeuronParams p;
    p.tau_mem = 10.0;
    p.e_rest = -60.0;
    p.e_exc = 0.0;
    p.e_inh = -85.0;
    p.v_reset = -45.0;
    p.v_thresh = -40.0;
    p.t_refrac = 2.0;
    p.theta_plus = 0.0;
    p.tau_theta = 1e7;
    return p;
}

void NeuronParams::validate(std::string_view scope) const
{
    for (auto [name, value] : {std::pair{"tau_mem", tau_mem}, {"e_rest", e_rest}, {"e_exc", e_exc},
                               {"e_inh", e_inh}, {"v_reset", v_reset}, {"v_thresh", v_thresh},
                               {"t_refrac", t_refrac}, {"theta_plus", theta_plus},
                               {"tau_theta", tau_theta}}) {
        require(finite(value), scope, name, "must be finite");
    }
    require(tau_mem > 0, scope, "tau_mem", "must be > 0");
    require(t_refrac >= 0, scope, "t_refrac", "must be >= 0");
    require(e_inh < e_rest, scope, "e_inh", "must be below e_rest");
    require(e_rest < v_thresh, scope, "v_thresh", "must be above e_rest");
    require(v_thresh < e_exc, scope, "e_exc", "must be above v_thresh");
    require(theta_plus >= 0, scope, "theta_plus", "must be >= 0");
    require(tau_theta > 0, scope, "tau_theta", "must be > 0");
}

void SynapseParams::validate() const
{
    constexpr std::string_view scope = "synapse";
    for (auto [name, value] :
         {std::pair{"tau_ge", tau_ge}, {"tau_gi", tau_gi}, {"eta", eta}, {"x_tar", x_tar},
          {"tau_xpre", tau_xpre}, {"w_max", w_max}, {"mu", mu}, {"w_norm_target", w_norm_target},
          {"w_exc_inh", w_exc_inh}, {"w_inh_exc", w_inh_exc}, {"init_fraction", init_fraction}}) {
        require(finite(value), scope, name, "must be finite");
    }
    require(tau_ge > 0, scope, "tau_ge", "must be > 0");
    require(tau_gi > 0, scope, "tau_gi", "must be > 0");
    require(tau_xpre > 0, scope, "tau_xpre", "must be > 0");
    require(x_tar >= 0, scope, "x_tar", "must be >= 0");
    require(w_max > 0, scope, "w_max", "must be > 0");
    require(mu >= 0, scope, "mu", "must be >= 0");
    require(w_norm_target > 0, scope, "w_norm_target", "must be > 0");
    require(w_exc_inh >= 0, scope, "w_exc_inh", "must be >= 0");
    require(w_inh_exc >= 0, scope, "w_inh_exc", "must be >= 0");
    require(init_fraction >= 0 && init_fraction <= 1, scope, "init_fraction",
            "must lie in [0, 1]");
}

// ---------------------------------------------------------------------------
// SpikeTrain
// ---------------------------------------------------------------------------

SpikeTrain::SpikeTrain(std::size_t n_inputs, std::size_t n_steps)
    : n_inputs_(n_inputs), offsets_(n_steps + 1, 0)
{}

SpikeTrain SpikeTrain::from_lists(std::size_t n_inputs,
                                  const std::vector<std::vector<std::uint32_t>>& steps)
{
    SpikeTrainBuilder builder(n_inputs);
    for (const auto& s : steps) {
        builder.push_step(s);
    }
    return std::move(builder).finish();
}

SpikeTrain SpikeTrain::from_dense(const Matrix<std::uint8_t>& dense)
{
    SpikeTrainBuilder builder(dense.cols());
    std::vector<std::uint32_t> active;
    for (std::size_t s = 0; s < dense.rows(); ++s) {
        active.clear();
        for (std::size_t i = 0; i < dense.cols(); ++i) {
            if (dense(s, i) != 0) {
                active.push_back(static_cast<std::uint32_t>(i));
            }
        }
        builder.push_step(active);
    }
    return std::move(builder).finish();
}

bool SpikeTrain::at(std::size_t step, std::size_t input) const noexcept
{
    auto a = active(step);
    return std::binary_search(a.begin(), a.end(), static_cast<std::uint32_t>(input));
}

std::size_t SpikeTrain::count_for(std::size_t input) const noexcept
{
    return static_cast<std::size_t>(
        std::count(indices_.begin(), indices_.end(), static_cast<std::uint32_t>(input)));
}

Matrix<std::uint8_t> SpikeTrain::to_dense() const
{
    Matrix<std::uint8_t> dense(n_steps(), n_inputs_, 0);
    for (std::size_t s = 0; s < n_steps(); ++s) {
        for (auto i : active(s)) {
            dense(s, i) = 1;
        }
    }
    return dense;
}

SpikeTrainBuilder::SpikeTrainBuilder(std::size_t n_inputs)
{
    train_.n_inputs_ = n_inputs;
}

void SpikeTrainBuilder::push_step(std::span<const std::uint32_t> active)
{
    const auto first = train_.indices_.size();
    for (auto i : active) {
        if (i >= train_.n_inputs_) {
            throw ValidationError("spike train: input index " + std::to_string(i) +
                                  " out of range");
        }
        train_.indices_.push_back(i);
    }
    std::sort(train_.indices_.begin() + static_cast<std::ptrdiff_t>(first), train_.indices_.end());
    train_.offsets_.push_back(train_.indices_.size());
}

SpikeTrain SpikeTrainBuilder::finish() &&
{
    return std::move(train_);
}

// ---------------------------------------------------------------------------
// Plasticity
// ---------------------------------------------------------------------------

double stdp_on_post_spike(double w, double x_pre, const SynapseParams& params) noexcept
{
    const double headroom = std::max(params.w_max - w, 0.0);
    const double dw = params.eta * (x_pre - params.x_tar) * std::pow(headroom, params.mu);
    return std::clamp(w + dw, 0.0, params.w_max);
}

namespace {

// Column k rescaled with entries capped at w_max; the cap's excess is
// redistributed over the uncapped entries until none exceeds w_max.
void normalize_capped_column(Matrix<double>& weights, std::size_t k, double target, double w_max)
{
    const std::size_t rows = weights.rows();
    std::size_t nonzero = 0;
    for (std::size_t i = 0; i < rows; ++i) {
        nonzero += weights(i, k) > 0.0 ? 1 : 0;
    }
    if (static_cast<double>(nonzero) * w_max <= target) {
        // Target unreachable under the cap: saturate the live synapses.
        for (std::size_t i = 0; i < rows; ++i) {
            if (weights(i, k) > 0.0) {
                weights(i, k) = w_max;
            }
        }
        return;
    }
    std::vector<bool> capped(rows, false);
    std::size_t n_capped = 0;
    double scale = 1.0;
    for (;;) {
        double free_sum = 0.0;
        for (std::size_t i = 0; i < rows; ++i) {
            if (!capped[i]) {
                free_sum += weights(i, k);
            }
        }
        scale = (target - static_cast<double>(n_capped) * w_max) / free_sum;
        bool changed = false;
        for (std::size_t i = 0; i < rows; ++i) {
            if (!capped[i] && weights(i, k) * scale > w_max) {
                capped[i] = true;
                ++n_capped;
                changed = true;
            }
        }
        if (!changed) {
            break;
        }
    }
    for (std::size_t i = 0; i < rows; ++i) {
        weights(i, k) = capped[i] ? w_max : weights(i, k) * scale;
    }
}

}  // namespace

void normalize_weights(Matrix<double>& weights, double target, double w_max)
{
    const std::size_t rows = weights.rows();
    const std::size_t cols = weights.cols();
    // Row-major passes: the matrix is input-major, columns are strided.
    std::vector<double> sum(cols, 0.0);
    std::vector<double> peak(cols, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
        auto row = weights.row(i);
        for (std::size_t k = 0; k < cols; ++k) {
            sum[k] += row[k];
            peak[k] = std::max(peak[k], row[k]);
        }
    }
    std::vector<double> scale(cols, 1.0);
    for (std::size_t k = 0; k < cols; ++k) {
        if (sum[k] <= 0.0) {
            continue;
        }
        scale[k] = target / sum[k];
        if (peak[k] * scale[k] > w_max) {
            normalize_capped_column(weights, k, target, w_max);
            scale[k] = 1.0;
        }
    }
    for (std::size_t i = 0; i < rows; ++i) {
        auto row = weights.row(i);
        for (std::size_t k = 0; k < cols; ++k) {
            row[k] *= scale[k];
        }
    }
}

std::size_t steps_for(double duration, double dt) noexcept
{
    if (duration <= 0.0) {
        return 0;
    }
    return static_cast<std::size_t>(std::ceil(duration / dt - kTimeEps));
}

// ---------------------------------------------------------------------------
// Network
// ---------------------------------------------------------------------------

Network::Network(const NeuronParams& exc, const NeuronParams& inh, const SynapseParams& syn)
    : exc_(exc), inh_(inh), syn_(syn)
{
    exc_.validate("neuron.exc");
    inh_.validate("neuron.inh");
    syn_.validate();
}

Network Network::build(std::size_t n_inputs, std::size_t n_exc, const NeuronParams& exc,
                       const NeuronParams& inh, const SynapseParams& syn, std::uint64_t seed)
{
    if (n_inputs == 0) {
        throw ValidationError("network.n_inputs: must be >= 1");
    }
    if (n_exc == 0) {
        throw ValidationError("network.n_exc: must be >= 1");
    }
    Network net(exc, inh, syn);
    Matrix<double> w(n_inputs, n_exc);
    Rng rng(seed);
    const double hi = syn.init_fraction * syn.w_max;
    for (auto& v : w.data()) {
        v = rng.uniform() * hi;
    }
    net.state_.weights = std::move(w);
    net.state_.theta.assign(n_exc, 0.0);
    net.reset_fast_state();
    return net;
}

Network Network::from_weights(Matrix<double> weights, std::vector<double> theta,
                              const NeuronParams& exc, const NeuronParams& inh,
                              const SynapseParams& syn)
{
    if (weights.rows() == 0 || weights.cols() == 0) {
        throw ValidationError("network: empty weight matrix");
    }
    if (theta.size() != weights.cols()) {
        throw ValidationError("network: theta length does not match excitatory population");
    }
    Network net(exc, inh, syn);
    net.state_.weights = std::move(weights);
    net.state_.theta = std::move(theta);
    net.reset_fast_state();
    return net;
}

void Network::reset_fast_state()
{
    const std::size_t n_exc = state_.n_exc();
    state_.v_exc.assign(n_exc, exc_.e_rest);
    state_.v_inh.assign(n_exc, inh_.e_rest);
    state_.ge_exc.assign(n_exc, 0.0);
    state_.gi_exc.assign(n_exc, 0.0);
    state_.ge_inh.assign(n_exc, 0.0);
    state_.gi_inh.assign(n_exc, 0.0);
    state_.x_pre.assign(state_.n_inputs(), 0.0);
    state_.refrac_until_exc.assign(n_exc, -1e300);
    state_.refrac_until_inh.assign(n_exc, -1e300);
}

void Network::normalize_weights()
{
    vprsnn::normalize_weights(state_.weights, syn_.w_norm_target, syn_.w_max);
}

std::size_t Network::inhibitory_in_degree(std::size_t k) const noexcept
{
    return k < state_.n_exc() ? state_.n_exc() - 1 : 0;
}

void Network::decay(double dt)
{
    if (!overrides_.freeze_conductances) {
        const double fe = std::exp(-dt / syn_.tau_ge);
        const double fi = std::exp(-dt / syn_.tau_gi);
        decay_in_place(state_.ge_exc, fe);
        decay_in_place(state_.gi_exc, fi);
        decay_in_place(state_.ge_inh, fe);
        decay_in_place(state_.gi_inh, fi);
    }
    decay_in_place(state_.x_pre, std::exp(-dt / syn_.tau_xpre));
    if (state_.learning_enabled) {
        decay_in_place(state_.theta, std::exp(-dt / exc_.tau_theta));
    }
}

void Network::integrate_exc(double dt, std::vector<std::uint32_t>& fired)
{
    const double t_end = state_.t_now + dt;
    const double k = dt / exc_.tau_mem;
    const std::size_t n = state_.n_exc();
    for (std::size_t j = 0; j < n; ++j) {
        if (t_end <= state_.refrac_until_exc[j] + kTimeEps) {
            continue;
        }
        double& v = state_.v_exc[j];
        const double ge = state_.ge_exc[j];
        const double gi = state_.gi_exc[j];
        v += k * ((exc_.e_rest - v) + ge * (exc_.e_exc - v) + gi * (exc_.e_inh - v));
        // The exact solution never leaves [e_inh, e_exc]; a forward-Euler step
        // with a large conductance can overshoot it.
        v = std::clamp(v, exc_.e_inh, exc_.e_exc);
        if (!overrides_.suppress_spikes && v >= exc_.v_thresh + state_.theta[j]) {
            v = exc_.v_reset;
            state_.refrac_until_exc[j] = t_end + exc_.t_refrac;
            fired.push_back(static_cast<std::uint32_t>(j));
        }
    }
}

void Network::integrate_inh(double dt, std::vector<std::uint32_t>& fired)
{
    const double t_end = state_.t_now + dt;
    const double k = dt / inh_.tau_mem;
    const std::size_t n = state_.n_exc();
    for (std::size_t j = 0; j < n; ++j) {
        if (t_end <= state_.refrac_until_inh[j] + kTimeEps) {
            continue;
        }
        double& v = state_.v_inh[j];
        const double ge = state_.ge_inh[j];
        const double gi = state_.gi_inh[j];
        v += k * ((inh_.e_rest - v) + ge * (inh_.e_exc - v) + gi * (inh_.e_inh - v));
        // The exact solution never leaves [e_inh, e_exc]; a forward-Euler step
        // with a large conductance can overshoot it.
        v = std::clamp(v, inh_.e_inh, inh_.e_exc);
        if (!overrides_.suppress_spikes && v >= inh_.v_thresh) {
            v = inh_.v_reset;
            state_.refrac_until_inh[j] = t_end + inh_.t_refrac;
            fired.push_back(static_cast<std::uint32_t>(j));
        }
    }
}

void Network::apply_stdp(std::uint32_t post)
{
    auto& w = state_.weights;
    for (std::size_t i = 0; i < w.rows(); ++i) {
        w(i, post) = stdp_on_post_spike(w(i, post), state_.x_pre[i], syn_);
    }
}

StepSpikes Network::step(std::span<const std::uint32_t> active_inputs, double dt)
{
    StepSpikes out;
    decay(dt);

    const std::size_t n_exc = state_.n_exc();
    for (auto i : active_inputs) {
        state_.x_pre[i] += 1.0;
        if (!overrides_.freeze_conductances) {
            auto row = state_.weights.row(i);
            for (std::size_t k = 0; k < n_exc; ++k) {
                state_.ge_exc[k] += row[k];
            }
        }
    }

    integrate_exc(dt, out.exc);
    for (auto k : out.exc) {
        if (state_.learning_enabled) {
            state_.theta[k] += exc_.theta_plus;
            apply_stdp(k);
        }
        if (!overrides_.freeze_conductances) {
            state_.ge_inh[k] += syn_.w_exc_inh;
        }
    }

    integrate_inh(dt, out.inh);
    if (!overrides_.freeze_conductances) {
        for (auto k : out.inh) {
            for (std::size_t j = 0; j < n_exc; ++j) {
                if (j != k) {
                    state_.gi_exc[j] += syn_.w_inh_exc;
                }
            }
        }
    }

    ++state_.steps_taken;
    state_.t_now += dt;
    return out;
}

StepSpikes Network::step(std::span<const std::uint8_t> input_flags, double dt)
{
    if (input_flags.size() != state_.n_inputs()) {
        throw ValidationError("step: input vector length does not match n_inputs");
    }
    std::vector<std::uint32_t> active;
    for (std::size_t i = 0; i < input_flags.size(); ++i) {
        if (input_flags[i] != 0) {
            active.push_back(static_cast<std::uint32_t>(i));
        }
    }
    return step(std::span<const std::uint32_t>(active), dt);
}

SpikeRecord Network::present(const SpikeTrain& train, double t_present, double t_rest, double dt,
                             bool learning)
{
    if (!(dt > 0.0)) {
        throw ValidationError("present: dt must be > 0");
    }
    if (train.n_inputs() != state_.n_inputs()) {
        throw ValidationError("present: spike train width does not match n_inputs");
    }
    const std::size_t n_present = steps_for(t_present, dt);
    const std::size_t n_rest = steps_for(t_rest, dt);
    if (train.n_steps() < n_present) {
        throw ValidationError("present: spike train shorter than the presentation window");
    }

    state_.learning_enabled = learning;
    if (learning) {
        normalize_weights();
    }

    SpikeRecord record;
    record.counts.assign(state_.n_exc(), 0);
    for (std::size_t s = 0; s < n_present; ++s) {
        auto spikes = step(train.active(s), dt);
        for (auto k : spikes.exc) {
            ++record.counts[k];
        }
        record.total += spikes.exc.size();
    }
    for (std::size_t s = 0; s < n_rest; ++s) {
        step(std::span<const std::uint32_t>{}, dt);
    }
    return record;
}

}  // namespace vprsnn
