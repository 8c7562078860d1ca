#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "vprsnn/matrix.hpp"

namespace vprsnn {

/// LIF neuron parameters. Times in ms, potentials in mV.
///
/// theta_plus and tau_theta only matter for the excitatory population;
/// the inhibitory population has no adaptive threshold.
struct NeuronParams
{
    double tau_mem = 100.0;
    double e_rest = -65.0;
    double e_exc = 0.0;
    double e_inh = -100.0;
    double v_reset = -65.0;
    double v_thresh = -52.0;
    double t_refrac = 5.0;
    double theta_plus = 0.05;
    double tau_theta = 1e7;

    static NeuronParams excitatory();
    static NeuronParams inhibitory();

    /// Throws ValidationError naming the offending field, prefixed by `scope`.
    void validate(std::string_view scope) const;
};

/// Synaptic conductance and plasticity parameters.
struct SynapseParams
{
    double tau_ge = 1.0;
    double tau_gi = 2.0;
    double eta = 0.01;
    double x_tar = 0.4;
    double tau_xpre = 20.0;
    double w_max = 1.0;
    double mu = 1.0;
    double w_norm_target = 78.0;
    double w_exc_inh = 10.4;
    double w_inh_exc = 17.0;
    /// Initial input weights are drawn uniformly from [0, init_fraction * w_max].
    double init_fraction = 0.3;

    void validate() const;
};

/// Sparse per-step input spikes: for every simulation step, the indices of
/// the input neurons that fire.
class SpikeTrain
{
public:
    SpikeTrain() = default;
    SpikeTrain(std::size_t n_inputs, std::size_t n_steps);

    /// Builds from per-step index lists; indices must be < n_inputs.
    static SpikeTrain from_lists(std::size_t n_inputs,
                                 const std::vector<std::vector<std::uint32_t>>& steps);
    /// Builds from a dense steps x n_inputs boolean matrix.
    static SpikeTrain from_dense(const Matrix<std::uint8_t>& dense);

    std::size_t n_inputs() const noexcept { return n_inputs_; }
    std::size_t n_steps() const noexcept { return offsets_.size() - 1; }

    std::span<const std::uint32_t> active(std::size_t step) const noexcept
    {
        return {indices_.data() + offsets_[step], offsets_[step + 1] - offsets_[step]};
    }
    bool at(std::size_t step, std::size_t input) const noexcept;
    std::size_t total_spikes() const noexcept { return indices_.size(); }
    std::size_t count_for(std::size_t input) const noexcept;

    Matrix<std::uint8_t> to_dense() const;

    friend bool operator==(const SpikeTrain&, const SpikeTrain&) = default;

private:
    friend class SpikeTrainBuilder;
    std::size_t n_inputs_ = 0;
    std::vector<std::size_t> offsets_{0};
    std::vector<std::uint32_t> indices_;
};

/// Appends steps to a SpikeTrain in order.
class SpikeTrainBuilder
{
public:
    explicit SpikeTrainBuilder(std::size_t n_inputs);
    void push_step(std::span<const std::uint32_t> active);
    SpikeTrain finish() &&;

private:
    SpikeTrain train_;
};

/// Excitatory spike totals for one presentation.
struct SpikeRecord
{
    std::vector<std::uint32_t> counts;
    std::uint64_t total = 0;

    friend bool operator==(const SpikeRecord&, const SpikeRecord&) = default;
};

/// All mutable simulator state.
///
/// Weights are stored input-major: weights(i, k) is the synapse from input
/// i to excitatory neuron k.
struct NetworkState
{
    Matrix<double> weights;
    std::vector<double> v_exc;
    std::vector<double> v_inh;
    std::vector<double> ge_exc;
    std::vector<double> gi_exc;
    std::vector<double> ge_inh;
    std::vector<double> gi_inh;
    std::vector<double> theta;
    std::vector<double> x_pre;
    std::vector<double> refrac_until_exc;
    std::vector<double> refrac_until_inh;
    std::int64_t steps_taken = 0;
    double t_now = 0.0;
    bool learning_enabled = false;

    std::size_t n_inputs() const noexcept { return weights.rows(); }
    std::size_t n_exc() const noexcept { return weights.cols(); }

    friend bool operator==(const NetworkState&, const NetworkState&) = default;
};

/// Indices of the neurons that fired during one step.
struct StepSpikes
{
    std::vector<std::uint32_t> exc;
    std::vector<std::uint32_t> inh;
};

/// Switches used by numerical tests to isolate parts of the dynamics.
struct DynamicsOverrides
{
    bool suppress_spikes = false;
    bool freeze_conductances = false;
};

/// Weight update applied to one input synapse when its excitatory neuron
/// fires: w + eta (x_pre - x_tar) (w_max - w)^mu, clamped to [0, w_max].
double stdp_on_post_spike(double w, double x_pre, const SynapseParams& params) noexcept;

/// Rescales every nonzero column of `weights` so it sums to `target`.
///
/// Entries that would exceed `w_max` are capped and the remaining mass is
/// redistributed over the uncapped entries, so the column still sums to
/// `target` whenever that is reachable. All-zero columns are untouched.
void normalize_weights(Matrix<double>& weights, double target, double w_max);

/// Two-layer LIF network: inputs -> excitatory (plastic) -> inhibitory
/// (one-to-one) -> excitatory (all-but-self lateral inhibition).
class Network
{
public:
    /// Throws ValidationError if any parameter violates its invariants.
    static Network build(std::size_t n_inputs, std::size_t n_exc, const NeuronParams& exc,
                         const NeuronParams& inh, const SynapseParams& syn, std::uint64_t seed);

    /// Rebuilds a network around an existing weight matrix and thresholds.
    static Network from_weights(Matrix<double> weights, std::vector<double> theta,
                                const NeuronParams& exc, const NeuronParams& inh,
                                const SynapseParams& syn);

    /// Advances the simulation by `dt` ms.
    ///
    /// Within a step: decays are applied, input spikes are delivered,
    /// excitatory neurons integrate and fire, their spikes reach the
    /// paired inhibitory neurons, which integrate and fire; inhibition
    /// reaches the excitatory population on the following step.
    StepSpikes step(std::span<const std::uint32_t> active_inputs, double dt);
    /// Dense overload: one flag per input neuron.
    StepSpikes step(std::span<const std::uint8_t> input_flags, double dt);

    /// Presents a spike train for `t_present` ms followed by `t_rest` ms of
    /// silence. With `learning`, weights are normalized once before the
    /// presentation and STDP and homeostasis run; otherwise weights and
    /// thresholds are frozen.
    SpikeRecord present(const SpikeTrain& train, double t_present, double t_rest, double dt,
                        bool learning);

    /// Resets voltages, conductances, traces and refractory timers; keeps
    /// weights, thresholds and the clock.
    void reset_fast_state();

    void normalize_weights();

    NetworkState& state() noexcept { return state_; }
    const NetworkState& state() const noexcept { return state_; }
    const NeuronParams& exc_params() const noexcept { return exc_; }
    const NeuronParams& inh_params() const noexcept { return inh_; }
    const SynapseParams& synapse_params() const noexcept { return syn_; }

    DynamicsOverrides& overrides() noexcept { return overrides_; }

    /// Number of lateral inhibition edges onto excitatory neuron k.
    std::size_t inhibitory_in_degree(std::size_t k) const noexcept;

private:
    Network(const NeuronParams& exc, const NeuronParams& inh, const SynapseParams& syn);

    void decay(double dt);
    void integrate_exc(double dt, std::vector<std::uint32_t>& fired);
    void integrate_inh(double dt, std::vector<std::uint32_t>& fired);
    void apply_stdp(std::uint32_t post);

    NeuronParams exc_;
    NeuronParams inh_;
    SynapseParams syn_;
    NetworkState state_;
    DynamicsOverrides overrides_;
};

/// Number of simulation steps covering `duration` ms at `dt`.
std::size_t steps_for(double duration, double dt) noexcept;

}  // namespace vprsnn
