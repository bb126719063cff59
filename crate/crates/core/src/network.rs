//! Three-layer spiking controller: paired encoding neurons, a hidden LIF
//! layer in one of four variants, and a single leaky-integrator decoder.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::neuron::{
    adaptive_threshold_step_in_place, leaky_integrator_step, lif_layer_step_in_place,
    AdaptiveThresholdParams, LifParams, NeuronLayerState,
};

/// Spiking neurons allowed per controller (encoding + hidden).
pub const NEURON_BUDGET: usize = 80;

/// Largest pair count that fits the budget: 2N + N <= 80.
pub const DEFAULT_PAIRS: usize = 26;

/// Command range of the actuator; applied only at the plant boundary.
pub const COMMAND_LIMIT: f64 = 3.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HiddenVariant {
    Lif,
    RLif,
    IwtaLif,
    RIwtaLif,
}

impl HiddenVariant {
    pub const ALL: [HiddenVariant; 4] = [
        HiddenVariant::Lif,
        HiddenVariant::RLif,
        HiddenVariant::IwtaLif,
        HiddenVariant::RIwtaLif,
    ];

    pub fn is_recurrent(self) -> bool {
        matches!(self, HiddenVariant::RLif | HiddenVariant::RIwtaLif)
    }

    pub fn is_adaptive(self) -> bool {
        matches!(self, HiddenVariant::IwtaLif | HiddenVariant::RIwtaLif)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            HiddenVariant::Lif => "lif",
            HiddenVariant::RLif => "r-lif",
            HiddenVariant::IwtaLif => "iwta-lif",
            HiddenVariant::RIwtaLif => "r-iwta-lif",
        }
    }
}

impl fmt::Display for HiddenVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for HiddenVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        HiddenVariant::ALL
            .into_iter()
            .find(|v| v.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown hidden variant `{s}`")))
    }
}

/// Which reference controller term the network is trained to reproduce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControllerKind {
    Pd,
    Integral,
}

impl ControllerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ControllerKind::Pd => "pd",
            ControllerKind::Integral => "integral",
        }
    }
}

impl fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ControllerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pd" => Ok(ControllerKind::Pd),
            "integral" | "i" => Ok(ControllerKind::Integral),
            _ => Err(Error::Config(format!("unknown controller kind `{s}`"))),
        }
    }
}

/// How threshold adaptation in the hidden layer is driven.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdWiring {
    /// One weight per (hidden, encoding neuron): N x 2N.
    #[default]
    PerEncodingNeuron,
    /// One weight per (hidden, encoding pair): N x N; a pair counts as
    /// active when either member spiked.
    PerPair,
}

impl ThresholdWiring {
    pub fn as_str(self) -> &'static str {
        match self {
            ThresholdWiring::PerEncodingNeuron => "per-encoding-neuron",
            ThresholdWiring::PerPair => "per-pair",
        }
    }

    pub fn presynaptic_width(self, n_pairs: usize) -> usize {
        match self {
            ThresholdWiring::PerEncodingNeuron => 2 * n_pairs,
            ThresholdWiring::PerPair => n_pairs,
        }
    }
}

impl FromStr for ThresholdWiring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-encoding-neuron" => Ok(ThresholdWiring::PerEncodingNeuron),
            "per-pair" => Ok(ThresholdWiring::PerPair),
            _ => Err(Error::Config(format!("unknown threshold wiring `{s}`"))),
        }
    }
}

/// Every learnable quantity of a controller. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerParams {
    pub kind: ControllerKind,
    pub variant: HiddenVariant,
    pub threshold_wiring: ThresholdWiring,
    pub n_pairs: usize,
    /// Input weight per pair; the second neuron of a pair uses the negation.
    pub enc_w: Vec<f64>,
    pub enc_b: Vec<f64>,
    /// Membrane decay and threshold per pair; the synaptic decay is always 0.
    pub enc_tau_mem: Vec<f64>,
    pub enc_theta: Vec<f64>,
    /// Two weights per hidden neuron, one for each member of its pair.
    pub hid_w: Vec<f64>,
    pub hid_tau_syn: Vec<f64>,
    pub hid_tau_mem: Vec<f64>,
    pub hid_theta: Vec<f64>,
    /// N x N, row-major (post, pre).
    pub rec_w: Option<Vec<f64>>,
    pub th_tau: Option<Vec<f64>>,
    /// N x presynaptic width, row-major (post, pre).
    pub th_w: Option<Vec<f64>>,
    pub dec_w: Vec<f64>,
    pub dec_tau: f64,
}

impl ControllerParams {
    /// A silent controller with all weights, biases and decays at zero and
    /// unit thresholds.
    pub fn zeros(
        kind: ControllerKind,
        variant: HiddenVariant,
        threshold_wiring: ThresholdWiring,
        n_pairs: usize,
    ) -> Self {
        let n = n_pairs;
        let n_pre = threshold_wiring.presynaptic_width(n);
        Self {
            kind,
            variant,
            threshold_wiring,
            n_pairs: n,
            enc_w: vec![0.0; n],
            enc_b: vec![0.0; n],
            enc_tau_mem: vec![0.0; n],
            enc_theta: vec![1.0; n],
            hid_w: vec![0.0; 2 * n],
            hid_tau_syn: vec![0.0; n],
            hid_tau_mem: vec![0.0; n],
            hid_theta: vec![1.0; n],
            rec_w: variant.is_recurrent().then(|| vec![0.0; n * n]),
            th_tau: variant.is_adaptive().then(|| vec![0.0; n]),
            th_w: variant.is_adaptive().then(|| vec![0.0; n * n_pre]),
            dec_w: vec![0.0; n],
            dec_tau: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_pairs;
        if n == 0 {
            return Err(Error::Config("controller needs at least one pair".into()));
        }
        if 3 * n > NEURON_BUDGET {
            return Err(Error::Config(format!(
                "{n} pairs need {} spiking neurons, budget is {NEURON_BUDGET}",
                3 * n
            )));
        }
        check_len("enc_w", n, self.enc_w.len())?;
        check_len("enc_b", n, self.enc_b.len())?;
        check_len("enc_tau_mem", n, self.enc_tau_mem.len())?;
        check_len("enc_theta", n, self.enc_theta.len())?;
        check_len("hid_w", 2 * n, self.hid_w.len())?;
        check_len("hid_tau_syn", n, self.hid_tau_syn.len())?;
        check_len("hid_tau_mem", n, self.hid_tau_mem.len())?;
        check_len("hid_theta", n, self.hid_theta.len())?;
        check_len("dec_w", n, self.dec_w.len())?;
        match (&self.rec_w, self.variant.is_recurrent()) {
            (Some(w), true) => check_len("rec_w", n * n, w.len())?,
            (None, false) => {}
            _ => {
                return Err(Error::Config(format!(
                    "recurrent weights must be present exactly for recurrent variants ({})",
                    self.variant
                )))
            }
        }
        match (&self.th_tau, &self.th_w, self.variant.is_adaptive()) {
            (Some(t), Some(w), true) => {
                check_len("th_tau", n, t.len())?;
                check_len(
                    "th_w",
                    n * self.threshold_wiring.presynaptic_width(n),
                    w.len(),
                )?;
            }
            (None, None, false) => {}
            _ => {
                return Err(Error::Config(format!(
                    "adaptation parameters must be present exactly for adaptive variants ({})",
                    self.variant
                )))
            }
        }
        Ok(())
    }
}

/// A runnable controller: parameters plus the state of all three layers.
#[derive(Debug, Clone)]
pub struct SnnController {
    params: ControllerParams,
    enc_lif: Vec<LifParams>,
    hid_lif: Vec<LifParams>,
    adapt: Option<AdaptiveThresholdParams>,
    enc: NeuronLayerState,
    hid: NeuronLayerState,
    out: f64,
    // scratch, reused every tick
    enc_feed: Vec<f64>,
    hid_feed: Vec<f64>,
    hid_prev: Vec<bool>,
    offsets: Vec<f64>,
    pair_active: Vec<bool>,
}

impl SnnController {
    pub fn new(params: ControllerParams) -> Result<Self> {
        params.validate()?;
        let n = params.n_pairs;
        let enc_lif = (0..2 * n)
            .map(|j| LifParams::new(0.0, params.enc_tau_mem[j / 2], params.enc_theta[j / 2]))
            .collect();
        let hid_lif = (0..n)
            .map(|k| {
                LifParams::new(
                    params.hid_tau_syn[k],
                    params.hid_tau_mem[k],
                    params.hid_theta[k],
                )
            })
            .collect();
        let adapt = match (&params.th_tau, &params.th_w) {
            (Some(t), Some(w)) => Some(AdaptiveThresholdParams::new(
                t.clone(),
                w.clone(),
                params.threshold_wiring.presynaptic_width(n),
            )?),
            _ => None,
        };
        Ok(Self {
            enc_lif,
            hid_lif,
            adapt,
            enc: NeuronLayerState::zeros(2 * n),
            hid: NeuronLayerState::zeros(n),
            out: 0.0,
            enc_feed: vec![0.0; 2 * n],
            hid_feed: vec![0.0; n],
            hid_prev: vec![false; n],
            offsets: vec![0.0; n],
            pair_active: vec![false; n],
            params,
        })
    }

    pub fn params(&self) -> &ControllerParams {
        &self.params
    }

    pub fn into_params(self) -> ControllerParams {
        self.params
    }

    pub fn n_pairs(&self) -> usize {
        self.params.n_pairs
    }

    pub fn encoding_state(&self) -> &NeuronLayerState {
        &self.enc
    }

    pub fn hidden_state(&self) -> &NeuronLayerState {
        &self.hid
    }

    pub fn output(&self) -> f64 {
        self.out
    }

    /// Encoding-layer LIF parameters, expanded to one entry per neuron.
    pub fn encoding_lif(&self) -> &[LifParams] {
        &self.enc_lif
    }

    pub fn reset_state(&mut self) {
        self.enc.reset();
        self.hid.reset();
        self.out = 0.0;
    }

    /// Feeds one error sample into the encoding layer and returns its spikes.
    pub fn encode_step(&mut self, error: f64) -> Result<&[bool]> {
        if !error.is_finite() {
            return Err(Error::NonFinite {
                what: "controller input",
                tick: None,
            });
        }
        let p = &self.params;
        for k in 0..p.n_pairs {
            let w = p.enc_w[k];
            let b = p.enc_b[k];
            self.enc_feed[2 * k] = w * error + b;
            self.enc_feed[2 * k + 1] = (-w) * error + b;
        }
        lif_layer_step_in_place(&mut self.enc, &self.enc_lif, &self.enc_feed, None)?;
        Ok(&self.enc.s)
    }

    /// Advances the hidden layer given this tick's encoding spikes.
    pub fn hidden_step(&mut self, enc_spikes: &[bool]) -> Result<&[bool]> {
        let n = self.params.n_pairs;
        check_len("encoding spikes", 2 * n, enc_spikes.len())?;
        let hid_w = &self.params.hid_w;
        for k in 0..n {
            let mut feed = 0.0;
            if enc_spikes[2 * k] {
                feed += hid_w[2 * k];
            }
            if enc_spikes[2 * k + 1] {
                feed += hid_w[2 * k + 1];
            }
            self.hid_feed[k] = feed;
        }
        if let Some(rec) = &self.params.rec_w {
            self.hid_prev.copy_from_slice(&self.hid.s);
            for k in 0..n {
                let row = &rec[k * n..(k + 1) * n];
                for (w, &s) in row.iter().zip(&self.hid_prev) {
                    if s {
                        self.hid_feed[k] += w;
                    }
                }
            }
        }
        match &self.adapt {
            Some(adapt) => {
                self.offsets.copy_from_slice(&self.hid.a);
                match self.params.threshold_wiring {
                    ThresholdWiring::PerEncodingNeuron => {
                        adaptive_threshold_step_in_place(&mut self.offsets, adapt, enc_spikes)?
                    }
                    ThresholdWiring::PerPair => {
                        for k in 0..n {
                            self.pair_active[k] = enc_spikes[2 * k] || enc_spikes[2 * k + 1];
                        }
                        adaptive_threshold_step_in_place(
                            &mut self.offsets,
                            adapt,
                            &self.pair_active,
                        )?
                    }
                }
                lif_layer_step_in_place(
                    &mut self.hid,
                    &self.hid_lif,
                    &self.hid_feed,
                    Some(&self.offsets),
                )?;
            }
            None => lif_layer_step_in_place(&mut self.hid, &self.hid_lif, &self.hid_feed, None)?,
        }
        Ok(&self.hid.s)
    }

    /// One full tick: encode, hidden, decode. Returns the decoder output.
    pub fn step(&mut self, error: f64) -> Result<f64> {
        self.encode_step(error)?;
        // hidden_step borrows self mutably, so lend it the spikes
        let enc_spikes = std::mem::take(&mut self.enc.s);
        let res = self.hidden_step(&enc_spikes).map(|_| ());
        self.enc.s = enc_spikes;
        res?;
        let mut weighted = 0.0;
        for (w, &s) in self.params.dec_w.iter().zip(&self.hid.s) {
            if s {
                weighted += w;
            }
        }
        self.out = leaky_integrator_step(self.out, self.params.dec_tau, weighted);
        Ok(self.out)
    }

    /// Runs the controller over a sequence, continuing from the current
    /// state. Call [`reset_state`](Self::reset_state) first for a fresh run.
    pub fn forward(&mut self, errors: &[f64]) -> Result<Vec<f64>> {
        errors.iter().map(|&e| self.step(e)).collect()
    }

    /// Resets and runs; the usual evaluation entry point.
    pub fn forward_fresh(&mut self, errors: &[f64]) -> Result<Vec<f64>> {
        self.reset_state();
        self.forward(errors)
    }
}
