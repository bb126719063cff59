//! Discrete-time current-based LIF neurons with soft reset.
//!
//! One call advances a whole layer by one tick, in this order:
//! synaptic currents, threshold offsets, membrane potentials (subtracting the
//! threshold that produced last tick's spike), spikes.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Lower bound on any effective firing threshold.
///
/// Keeps a zero base threshold or a strongly negative adaptation offset from
/// making a neuron fire on every tick, including at rest.
pub const THRESHOLD_FLOOR: f64 = 0.01;

/// Per-neuron decay factors and base threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifParams {
    pub tau_syn: f64,
    pub tau_mem: f64,
    pub theta_base: f64,
}

impl LifParams {
    pub fn new(tau_syn: f64, tau_mem: f64, theta_base: f64) -> Self {
        Self {
            tau_syn,
            tau_mem,
            theta_base,
        }
    }

    pub fn validate(&self) -> Result<()> {
        in_range("tau_syn", self.tau_syn, 0.0, 1.0)?;
        in_range("tau_mem", self.tau_mem, 0.0, 1.0)?;
        if !(self.theta_base >= 0.0) || !self.theta_base.is_finite() {
            return Err(Error::OutOfBounds {
                segment: "theta_base",
                index: 0,
                value: self.theta_base,
                lower: 0.0,
                upper: f64::INFINITY,
            });
        }
        Ok(())
    }
}

fn in_range(segment: &'static str, value: f64, lower: f64, upper: f64) -> Result<()> {
    if value >= lower && value <= upper {
        Ok(())
    } else {
        Err(Error::OutOfBounds {
            segment,
            index: 0,
            value,
            lower,
            upper,
        })
    }
}

/// Input-weighted threshold adaptation for one layer.
///
/// `w_th` is stored row-major as (postsynaptic, presynaptic).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveThresholdParams {
    pub tau_th: Vec<f64>,
    pub w_th: Vec<f64>,
    pub n_pre: usize,
}

impl AdaptiveThresholdParams {
    pub fn new(tau_th: Vec<f64>, w_th: Vec<f64>, n_pre: usize) -> Result<Self> {
        check_len("threshold weights", tau_th.len() * n_pre, w_th.len())?;
        Ok(Self {
            tau_th,
            w_th,
            n_pre,
        })
    }

    pub fn n_post(&self) -> usize {
        self.tau_th.len()
    }

    pub fn weight(&self, post: usize, pre: usize) -> f64 {
        self.w_th[post * self.n_pre + pre]
    }
}

/// State of one layer at one tick.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NeuronLayerState {
    /// Synaptic current.
    pub i: Vec<f64>,
    /// Membrane potential.
    pub v: Vec<f64>,
    /// Spikes emitted on the most recent tick.
    pub s: Vec<bool>,
    /// Threshold adaptation offset; stays zero for non-adaptive layers.
    pub a: Vec<f64>,
}

impl NeuronLayerState {
    pub fn zeros(width: usize) -> Self {
        Self {
            i: vec![0.0; width],
            v: vec![0.0; width],
            s: vec![false; width],
            a: vec![0.0; width],
        }
    }

    pub fn width(&self) -> usize {
        self.i.len()
    }

    pub fn reset(&mut self) {
        self.i.fill(0.0);
        self.v.fill(0.0);
        self.s.fill(false);
        self.a.fill(0.0);
    }

    pub fn spike_count(&self) -> usize {
        self.s.iter().filter(|&&s| s).count()
    }

    fn check_consistent(&self) -> Result<()> {
        let n = self.i.len();
        check_len("layer state v", n, self.v.len())?;
        check_len("layer state s", n, self.s.len())?;
        check_len("layer state a", n, self.a.len())
    }
}

#[inline]
pub fn effective_threshold(theta_base: f64, offset: f64) -> f64 {
    (theta_base + offset).max(THRESHOLD_FLOOR)
}

/// Advances a non-adaptive layer by one tick.
///
/// `feed_current` is the full weighted presynaptic input plus bias for each
/// neuron. The offsets in `state.a` are used as-is for both the reset and the
/// firing test.
pub fn lif_layer_step(
    state: &NeuronLayerState,
    params: &[LifParams],
    feed_current: &[f64],
) -> Result<NeuronLayerState> {
    let mut next = state.clone();
    lif_layer_step_in_place(&mut next, params, feed_current, None)?;
    Ok(next)
}

/// Advances an adaptive layer by one tick: offsets are updated from
/// `presyn_spikes` before the membrane update, and the reset uses the offset
/// that was in force when the previous spike fired.
pub fn adaptive_layer_step(
    state: &NeuronLayerState,
    params: &[LifParams],
    adapt: &AdaptiveThresholdParams,
    feed_current: &[f64],
    presyn_spikes: &[bool],
) -> Result<NeuronLayerState> {
    let mut next = state.clone();
    let a = adaptive_threshold_step(&state.a, adapt, presyn_spikes)?;
    lif_layer_step_in_place(&mut next, params, feed_current, Some(&a))?;
    Ok(next)
}

/// In-place form of the layer update used by the network hot loop.
///
/// When `new_offsets` is given, it replaces `state.a` after the old offsets
/// have been used for the soft reset.
pub(crate) fn lif_layer_step_in_place(
    state: &mut NeuronLayerState,
    params: &[LifParams],
    feed_current: &[f64],
    new_offsets: Option<&[f64]>,
) -> Result<()> {
    state.check_consistent()?;
    let n = state.width();
    check_len("LIF params", n, params.len())?;
    check_len("feed current", n, feed_current.len())?;
    if let Some(a) = new_offsets {
        check_len("threshold offsets", n, a.len())?;
    }
    for k in 0..n {
        let p = &params[k];
        let theta_prev = effective_threshold(p.theta_base, state.a[k]);
        let a_next = new_offsets.map_or(state.a[k], |a| a[k]);
        let theta_next = effective_threshold(p.theta_base, a_next);

        let i = p.tau_syn * state.i[k] + feed_current[k];
        let mut v = p.tau_mem * state.v[k] + i;
        if state.s[k] {
            v -= theta_prev;
        }
        state.i[k] = i;
        state.v[k] = v;
        state.a[k] = a_next;
        state.s[k] = v >= theta_next;
    }
    Ok(())
}

/// `a' = tau_th * a + W_th * presyn_spikes`.
pub fn adaptive_threshold_step(
    a: &[f64],
    adapt: &AdaptiveThresholdParams,
    presyn_spikes: &[bool],
) -> Result<Vec<f64>> {
    let mut out = a.to_vec();
    adaptive_threshold_step_in_place(&mut out, adapt, presyn_spikes)?;
    Ok(out)
}

pub(crate) fn adaptive_threshold_step_in_place(
    a: &mut [f64],
    adapt: &AdaptiveThresholdParams,
    presyn_spikes: &[bool],
) -> Result<()> {
    check_len("threshold offsets", adapt.n_post(), a.len())?;
    check_len("presynaptic spikes", adapt.n_pre, presyn_spikes.len())?;
    for (post, a_k) in a.iter_mut().enumerate() {
        let row = &adapt.w_th[post * adapt.n_pre..(post + 1) * adapt.n_pre];
        let mut inc = 0.0;
        for (w, &s) in row.iter().zip(presyn_spikes) {
            if s {
                inc += w;
            }
        }
        *a_k = adapt.tau_th[post] * *a_k + inc;
    }
    Ok(())
}

/// Non-spiking leaky integrator: `out' = tau_mem * out + weighted_spikes`.
#[inline]
pub fn leaky_integrator_step(out: f64, tau_mem: f64, weighted_spikes: f64) -> f64 {
    tau_mem * out + weighted_spikes
}

/// Fraction of ticks on which a single neuron fires under a constant input
/// current, starting from rest.
pub fn constant_current_rate(params: LifParams, current: f64, steps: usize) -> f64 {
    if steps == 0 {
        return 0.0;
    }
    let mut state = NeuronLayerState::zeros(1);
    let params = [params];
    let feed = [current];
    let mut spikes = 0usize;
    for _ in 0..steps {
        lif_layer_step_in_place(&mut state, &params, &feed, None)
            .expect("single-neuron dimensions always agree");
        spikes += usize::from(state.s[0]);
    }
    spikes as f64 / steps as f64
}
