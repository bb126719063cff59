//! Flat, bounded parameter vectors and their mapping to controllers.
//!
//! Segment order: encoding (weight, bias, membrane decay, threshold), hidden
//! (two weights per neuron, synaptic decay, membrane decay, threshold),
//! recurrent weights if any, adaptation decay and weights if any, decoder
//! weights, decoder decay.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{fmt_f64, parse_f64, write_atomic};
use crate::network::{
    ControllerKind, ControllerParams, HiddenVariant, SnnController, ThresholdWiring,
};

pub const GENOME_FORMAT: &str = "snnpid-genome/1";

/// Upper bound of the decoder decay for integral controllers, forcing the
/// integration into the hidden layer.
pub const INTEGRAL_DECODER_TAU_MAX: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    EncWeight,
    EncBias,
    EncTauMem,
    EncTheta,
    HidWeight,
    HidTauSyn,
    HidTauMem,
    HidTheta,
    RecWeight,
    ThTau,
    ThWeight,
    DecWeight,
    DecTauMem,
}

impl Role {
    /// Human-readable name used in error messages.
    pub fn label(self) -> &'static str {
        match self {
            Role::EncWeight => "enc W^e",
            Role::EncBias => "enc b",
            Role::EncTauMem => "enc τ^mem",
            Role::EncTheta => "enc ϑ",
            Role::HidWeight => "hid W^h",
            Role::HidTauSyn => "hid τ^syn",
            Role::HidTauMem => "hid τ^mem",
            Role::HidTheta => "hid ϑ",
            Role::RecWeight => "hid W^r",
            Role::ThTau => "hid τ^th",
            Role::ThWeight => "hid W^th",
            Role::DecWeight => "dec W^d",
            Role::DecTauMem => "dec τ^mem",
        }
    }

    /// ASCII key used in genome files.
    pub fn key(self) -> &'static str {
        match self {
            Role::EncWeight => "enc_w",
            Role::EncBias => "enc_b",
            Role::EncTauMem => "enc_tau_mem",
            Role::EncTheta => "enc_theta",
            Role::HidWeight => "hid_w",
            Role::HidTauSyn => "hid_tau_syn",
            Role::HidTauMem => "hid_tau_mem",
            Role::HidTheta => "hid_theta",
            Role::RecWeight => "rec_w",
            Role::ThTau => "th_tau",
            Role::ThWeight => "th_w",
            Role::DecWeight => "dec_w",
            Role::DecTauMem => "dec_tau",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub role: Role,
    pub offset: usize,
    pub count: usize,
    pub lower: f64,
    pub upper: f64,
}

impl Segment {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.count
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenomeLayout {
    pub kind: ControllerKind,
    pub variant: HiddenVariant,
    pub threshold_wiring: ThresholdWiring,
    pub n_pairs: usize,
    pub segments: Vec<Segment>,
}

impl GenomeLayout {
    pub fn new(
        variant: HiddenVariant,
        kind: ControllerKind,
        n_pairs: usize,
        threshold_wiring: ThresholdWiring,
    ) -> Result<Self> {
        if n_pairs == 0 {
            return Err(Error::Config("layout needs at least one pair".into()));
        }
        let n = n_pairs;
        let dec_tau_max = match kind {
            ControllerKind::Pd => 1.0,
            ControllerKind::Integral => INTEGRAL_DECODER_TAU_MAX,
        };
        let mut spec = vec![
            (Role::EncWeight, n, -2.0, 2.0),
            (Role::EncBias, n, -1.0, 1.0),
            (Role::EncTauMem, n, 0.0, 1.0),
            (Role::EncTheta, n, 0.0, 10.0),
            (Role::HidWeight, 2 * n, -2.0, 2.0),
            (Role::HidTauSyn, n, 0.0, 1.0),
            (Role::HidTauMem, n, 0.0, 1.0),
            (Role::HidTheta, n, 0.0, 10.0),
        ];
        if variant.is_recurrent() {
            spec.push((Role::RecWeight, n * n, -1.0, 1.0));
        }
        if variant.is_adaptive() {
            spec.push((Role::ThTau, n, 0.0, 1.0));
            spec.push((
                Role::ThWeight,
                n * threshold_wiring.presynaptic_width(n),
                -1.0,
                1.0,
            ));
        }
        spec.push((Role::DecWeight, n, -1.0, 1.0));
        spec.push((Role::DecTauMem, 1, 0.0, dec_tau_max));

        let mut offset = 0;
        let segments = spec
            .into_iter()
            .map(|(role, count, lower, upper)| {
                let s = Segment {
                    role,
                    offset,
                    count,
                    lower,
                    upper,
                };
                offset += count;
                s
            })
            .collect();
        Ok(Self {
            kind,
            variant,
            threshold_wiring,
            n_pairs,
            segments,
        })
    }

    /// Layout with the default N x 2N adaptation wiring.
    pub fn layout_for(
        variant: HiddenVariant,
        kind: ControllerKind,
        n_pairs: usize,
    ) -> Result<Self> {
        Self::new(variant, kind, n_pairs, ThresholdWiring::default())
    }

    pub fn len(&self) -> usize {
        self.segments.last().map_or(0, |s| s.offset + s.count)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn segment(&self, role: Role) -> Option<&Segment> {
        self.segments.iter().find(|s| s.role == role)
    }

    pub fn lower_bounds(&self) -> Vec<f64> {
        self.expand(|s| s.lower)
    }

    pub fn upper_bounds(&self) -> Vec<f64> {
        self.expand(|s| s.upper)
    }

    fn expand(&self, f: impl Fn(&Segment) -> f64) -> Vec<f64> {
        self.segments
            .iter()
            .flat_map(|s| std::iter::repeat_n(f(s), s.count))
            .collect()
    }

    pub fn check(&self, values: &[f64]) -> Result<()> {
        crate::error::check_len("genome length", self.len(), values.len())?;
        for s in &self.segments {
            for (index, &value) in values[s.range()].iter().enumerate() {
                if !(value >= s.lower && value <= s.upper) {
                    return Err(Error::OutOfBounds {
                        segment: s.role.label(),
                        index,
                        value,
                        lower: s.lower,
                        upper: s.upper,
                    });
                }
            }
        }
        Ok(())
    }

    /// Clamps each coordinate into its segment bounds; NaN becomes the
    /// lower bound.
    pub fn clamp(&self, values: &mut [f64]) {
        for s in &self.segments {
            for v in &mut values[s.range()] {
                *v = if v.is_nan() {
                    s.lower
                } else {
                    v.clamp(s.lower, s.upper)
                };
            }
        }
    }
}

/// A bounds-checked parameter vector together with its layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Genome {
    layout: GenomeLayout,
    values: Vec<f64>,
}

impl Genome {
    pub fn new(layout: GenomeLayout, values: Vec<f64>) -> Result<Self> {
        layout.check(&values)?;
        Ok(Self { layout, values })
    }

    pub fn layout(&self) -> &GenomeLayout {
        &self.layout
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn segment_values(&self, role: Role) -> Option<&[f64]> {
        self.layout.segment(role).map(|s| &self.values[s.range()])
    }

    pub fn to_params(&self) -> ControllerParams {
        let take = |role| self.segment_values(role).map(<[f64]>::to_vec);
        let req = |role| take(role).expect("layout always has the base segments");
        ControllerParams {
            kind: self.layout.kind,
            variant: self.layout.variant,
            threshold_wiring: self.layout.threshold_wiring,
            n_pairs: self.layout.n_pairs,
            enc_w: req(Role::EncWeight),
            enc_b: req(Role::EncBias),
            enc_tau_mem: req(Role::EncTauMem),
            enc_theta: req(Role::EncTheta),
            hid_w: req(Role::HidWeight),
            hid_tau_syn: req(Role::HidTauSyn),
            hid_tau_mem: req(Role::HidTauMem),
            hid_theta: req(Role::HidTheta),
            rec_w: take(Role::RecWeight),
            th_tau: take(Role::ThTau),
            th_w: take(Role::ThWeight),
            dec_w: req(Role::DecWeight),
            dec_tau: req(Role::DecTauMem)[0],
        }
    }

    pub fn decode(&self) -> Result<SnnController> {
        SnnController::new(self.to_params())
    }

    /// Flattens controller parameters; fails if any lies outside its bounds.
    pub fn from_params(p: &ControllerParams) -> Result<Self> {
        p.validate()?;
        let layout = GenomeLayout::new(p.variant, p.kind, p.n_pairs, p.threshold_wiring)?;
        let mut values = Vec::with_capacity(layout.len());
        for s in &layout.segments {
            match s.role {
                Role::EncWeight => values.extend(&p.enc_w),
                Role::EncBias => values.extend(&p.enc_b),
                Role::EncTauMem => values.extend(&p.enc_tau_mem),
                Role::EncTheta => values.extend(&p.enc_theta),
                Role::HidWeight => values.extend(&p.hid_w),
                Role::HidTauSyn => values.extend(&p.hid_tau_syn),
                Role::HidTauMem => values.extend(&p.hid_tau_mem),
                Role::HidTheta => values.extend(&p.hid_theta),
                Role::RecWeight => values.extend(p.rec_w.iter().flatten()),
                Role::ThTau => values.extend(p.th_tau.iter().flatten()),
                Role::ThWeight => values.extend(p.th_w.iter().flatten()),
                Role::DecWeight => values.extend(&p.dec_w),
                Role::DecTauMem => values.push(p.dec_tau),
            }
        }
        Self::new(layout, values)
    }

    pub fn encode(controller: &SnnController) -> Result<Self> {
        Self::from_params(controller.params())
    }

    pub fn to_text(&self) -> String {
        let l = &self.layout;
        let mut s = String::with_capacity(40 * self.values.len() + 256);
        let _ = writeln!(s, "format={GENOME_FORMAT}");
        let _ = writeln!(s, "kind={}", l.kind);
        let _ = writeln!(s, "variant={}", l.variant);
        let _ = writeln!(s, "threshold_wiring={}", l.threshold_wiring.as_str());
        let _ = writeln!(s, "n_pairs={}", l.n_pairs);
        let _ = writeln!(s, "length={}", l.len());
        for seg in &l.segments {
            let _ = writeln!(
                s,
                "# {} ({} values in [{}, {}])",
                seg.role.label(),
                seg.count,
                seg.lower,
                seg.upper
            );
            for (i, v) in self.values[seg.range()].iter().enumerate() {
                let _ = writeln!(s, "{}[{i}]={}", seg.role.key(), fmt_f64(*v));
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        fn wrap<T>((l, v): (usize, &str), r: Result<T>) -> Result<T> {
            r.map_err(|e| Error::parse(l, format!("`{v}`: {e}")))
        }
        let mut header: Vec<(usize, &str, &str)> = Vec::new();
        let mut body = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(idx + 1, "expected `key=value`"))?;
            if k.contains('[') {
                body.push((idx + 1, k, v));
            } else {
                header.push((idx + 1, k, v));
            }
        }
        let get = |key: &str| {
            header
                .iter()
                .find(|(_, k, _)| *k == key)
                .map(|&(l, _, v)| (l, v))
                .ok_or_else(|| Error::parse(1, format!("missing `{key}`")))
        };
        let (fl, format) = get("format")?;
        if format != GENOME_FORMAT {
            return Err(Error::parse(
                fl,
                format!("unsupported format `{format}`, expected `{GENOME_FORMAT}`"),
            ));
        }
        let kind: ControllerKind = {
            let kv = get("kind")?;
            wrap(kv, kv.1.parse())?
        };
        let variant: HiddenVariant = {
            let kv = get("variant")?;
            wrap(kv, kv.1.parse())?
        };
        let wiring: ThresholdWiring = match get("threshold_wiring") {
            Ok(kv) => wrap(kv, kv.1.parse())?,
            Err(_) => ThresholdWiring::default(),
        };
        let (nl, nv) = get("n_pairs")?;
        let n_pairs: usize = nv
            .parse()
            .map_err(|_| Error::parse(nl, format!("bad n_pairs `{nv}`")))?;
        let layout = GenomeLayout::new(variant, kind, n_pairs, wiring)?;
        if let Ok((ll, lv)) = get("length") {
            if lv.parse::<usize>().ok() != Some(layout.len()) {
                return Err(Error::parse(
                    ll,
                    format!("length {lv} does not match layout length {}", layout.len()),
                ));
            }
        }
        let expected: Vec<String> = layout
            .segments
            .iter()
            .flat_map(|s| (0..s.count).map(move |i| format!("{}[{i}]", s.role.key())))
            .collect();
        if body.len() != expected.len() {
            return Err(Error::parse(
                body.last().map_or(1, |b| b.0),
                format!("expected {} values, found {}", expected.len(), body.len()),
            ));
        }
        let mut values = Vec::with_capacity(body.len());
        for ((line, key, v), want) in body.into_iter().zip(&expected) {
            if key != want {
                return Err(Error::parse(
                    line,
                    format!("expected `{want}`, found `{key}`"),
                ));
            }
            values
                .push(parse_f64(v).ok_or_else(|| Error::parse(line, format!("bad number `{v}`")))?);
        }
        Self::new(layout, values)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), self.to_text().as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text).map_err(|e| e.with_path(path))
    }
}
