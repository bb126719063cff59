//! Training and test data: error signals recorded from simulated closed-loop
//! step responses, paired with the PD or integral command a tuned PID would
//! have produced for them.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{fmt_f64, parse_f64, write_atomic};
use crate::network::ControllerKind;
use crate::plant::{
    closed_loop_run, i_target, pd_target, BiasSchedule, ClosedLoopConfig, PidController, PidGains,
    ScheduledPid,
};

pub const DATASET_FORMAT: &str = "snnpid-dataset/1";

/// Position beyond which a generation run counts as diverged, m.
pub const DIVERGENCE_LIMIT_M: f64 = 100.0;

/// Re-draws allowed after a diverged run before giving up.
pub const MAX_RETRIES: u32 = 10;

/// Setpoints and how long each is held.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StepSchedule {
    /// `(setpoint_m, hold_s)`.
    pub steps: Vec<(f64, f64)>,
}

impl StepSchedule {
    pub fn new(steps: Vec<(f64, f64)>) -> Result<Self> {
        for (k, &(sp, hold)) in steps.iter().enumerate() {
            if !sp.is_finite() || !(hold > 0.0) || !hold.is_finite() {
                return Err(Error::Config(format!(
                    "schedule entry {k}: setpoint {sp} / hold {hold} invalid (hold must be > 0)"
                )));
            }
        }
        Ok(Self { steps })
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn total_duration(&self) -> f64 {
        self.steps.iter().map(|s| s.1).sum()
    }

    /// Number of ticks in each segment at period `dt`.
    pub fn segment_ticks(&self, dt: f64) -> Result<Vec<usize>> {
        if !(dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {dt}")));
        }
        self.steps
            .iter()
            .enumerate()
            .map(|(k, &(_, hold))| {
                let n = (hold / dt).round() as usize;
                if n == 0 {
                    Err(Error::Config(format!(
                        "schedule entry {k}: hold {hold} s is shorter than one tick"
                    )))
                } else {
                    Ok(n)
                }
            })
            .collect()
    }

    pub fn setpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.steps.iter().map(|s| s.0)
    }

    /// Parses `setpoint_m,hold_s` lines; `#` starts a comment and a
    /// non-numeric first row is taken as a header.
    pub fn parse(text: &str) -> Result<Self> {
        let mut steps = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 2 {
                return Err(Error::parse(idx + 1, "expected `setpoint_m,hold_s`"));
            }
            match (fields[0].parse::<f64>(), fields[1].parse::<f64>()) {
                (Ok(sp), Ok(hold)) => steps.push((sp, hold)),
                _ if steps.is_empty() && fields[0].parse::<f64>().is_err() => continue,
                _ => return Err(Error::parse(idx + 1, format!("bad number in `{line}`"))),
            }
        }
        if steps.is_empty() {
            return Err(Error::Empty("schedule file has no steps"));
        }
        Self::new(steps)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("setpoint_m,hold_s\n");
        for &(sp, hold) in &self.steps {
            let _ = writeln!(s, "{sp},{hold}");
        }
        s
    }
}

/// How datasets of one kind are drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub kind: ControllerKind,
    /// Reference gains; the period doubles as the sample period.
    pub gains: PidGains,
    pub n_steps: usize,
    /// Setpoint range, m.
    pub amplitude: (f64, f64),
    /// Hold duration range, s.
    pub hold_s: (f64, f64),
    /// Log-uniform factor range applied per gain and per step while
    /// recording PD error signals.
    pub perturbation: (f64, f64),
    /// Plant bias range, redrawn at each step of integral datasets.
    pub bias: (f64, f64),
}

impl DatasetConfig {
    pub fn pd(gains: PidGains) -> Self {
        Self {
            kind: ControllerKind::Pd,
            gains,
            n_steps: 5,
            amplitude: (-1.5, 1.5),
            hold_s: (20.0, 60.0),
            perturbation: (0.5, 2.0),
            bias: (0.0, 0.0),
        }
    }

    pub fn integral(gains: PidGains) -> Self {
        Self {
            kind: ControllerKind::Integral,
            gains,
            n_steps: 5,
            amplitude: (-1.5, 1.5),
            hold_s: (50.0, 50.0),
            perturbation: (1.0, 1.0),
            bias: (-4.0, 4.0),
        }
    }

    pub fn for_kind(kind: ControllerKind, gains: PidGains) -> Self {
        match kind {
            ControllerKind::Pd => Self::pd(gains),
            ControllerKind::Integral => Self::integral(gains),
        }
    }

    pub fn dt(&self) -> f64 {
        self.gains.period
    }

    pub fn validate(&self) -> Result<()> {
        self.gains.validate()?;
        if self.n_steps == 0 {
            return Err(Error::Config("dataset needs at least one step".into()));
        }
        let ordered = |name: &str, (lo, hi): (f64, f64)| {
            if lo.is_finite() && hi.is_finite() && lo <= hi {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "{name} range [{lo}, {hi}] is invalid"
                )))
            }
        };
        ordered("amplitude", self.amplitude)?;
        ordered("hold_s", self.hold_s)?;
        ordered("perturbation", self.perturbation)?;
        ordered("bias", self.bias)?;
        if !(self.hold_s.0 > 0.0) || !(self.perturbation.0 > 0.0) {
            return Err(Error::Config(
                "hold durations and perturbation factors must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Everything needed to regenerate a dataset, plus what was drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub seed: u64,
    /// Index of the draw that produced a stable run (0 unless retried).
    pub attempt: u32,
    pub config: DatasetConfig,
    pub schedule: StepSchedule,
    /// Plant bias per step.
    pub biases: Vec<f64>,
    /// `[kp, ki, kd]` multipliers per step used while recording.
    pub gain_factors: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub dt: f64,
    pub errors: Vec<f64>,
    pub targets: Vec<f64>,
    pub meta: DatasetMeta,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub error: f64,
    pub target: f64,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.errors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn kind(&self) -> ControllerKind {
        self.meta.config.kind
    }

    pub fn samples(&self) -> impl Iterator<Item = Sample> + '_ {
        self.errors
            .iter()
            .zip(&self.targets)
            .map(|(&error, &target)| Sample { error, target })
    }

    /// Rebuilds the dataset from its metadata alone.
    pub fn regenerate(&self) -> Result<Dataset> {
        generate(self.meta.seed, &self.meta.config)
    }
}

/// SplitMix64 finaliser; used to derive independent sub-seeds.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

fn log_uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    let (a, b) = (lo.ln(), hi.ln());
    (a + (b - a) * rng.random::<f64>()).exp()
}

struct Draw {
    schedule: StepSchedule,
    biases: Vec<f64>,
    gain_factors: Vec<[f64; 3]>,
}

fn draw(seed: u64, attempt: u32, cfg: &DatasetConfig) -> Result<Draw> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, attempt as u64));
    let mut steps = Vec::with_capacity(cfg.n_steps);
    let mut biases = Vec::with_capacity(cfg.n_steps);
    let mut gain_factors = Vec::with_capacity(cfg.n_steps);
    for _ in 0..cfg.n_steps {
        let sp = uniform(&mut rng, cfg.amplitude);
        let hold = uniform(&mut rng, cfg.hold_s);
        steps.push((sp, hold));
        match cfg.kind {
            ControllerKind::Pd => {
                biases.push(0.0);
                gain_factors.push([
                    log_uniform(&mut rng, cfg.perturbation),
                    log_uniform(&mut rng, cfg.perturbation),
                    log_uniform(&mut rng, cfg.perturbation),
                ]);
            }
            ControllerKind::Integral => {
                biases.push(uniform(&mut rng, cfg.bias));
                gain_factors.push([1.0; 3]);
            }
        }
    }
    Ok(Draw {
        schedule: StepSchedule::new(steps)?,
        biases,
        gain_factors,
    })
}

/// Runs the recording loop for one draw; `None` if it diverged.
fn record(cfg: &DatasetConfig, d: &Draw) -> Result<Option<Vec<f64>>> {
    let g = cfg.gains;
    let trace = match cfg.kind {
        ControllerKind::Pd => {
            let per_segment = d
                .gain_factors
                .iter()
                .map(|f| PidGains::new(g.kp * f[0], g.ki * f[1], g.kd * f[2], g.period))
                .collect();
            let mut pid = ScheduledPid::new(per_segment)?;
            closed_loop_run(
                &mut pid,
                &d.schedule,
                &ClosedLoopConfig::ideal(BiasSchedule::Constant(0.0)),
            )?
        }
        ControllerKind::Integral => {
            let mut pid = PidController::new(g);
            closed_loop_run(
                &mut pid,
                &d.schedule,
                &ClosedLoopConfig::ideal(BiasSchedule::PerSegment(d.biases.clone())),
            )?
        }
    };
    let diverged = trace
        .x
        .iter()
        .any(|x| !x.is_finite() || x.abs() > DIVERGENCE_LIMIT_M);
    Ok((!diverged).then_some(trace.error))
}

/// Draws a schedule (and gain perturbations or biases) from `seed`, runs the
/// closed loop, and pairs its error signal with the reference target.
pub fn generate(seed: u64, cfg: &DatasetConfig) -> Result<Dataset> {
    cfg.validate()?;
    for attempt in 0..=MAX_RETRIES {
        let d = draw(seed, attempt, cfg)?;
        let Some(errors) = record(cfg, &d)? else {
            log::debug!("dataset seed {seed} attempt {attempt} diverged, redrawing");
            continue;
        };
        let targets = match cfg.kind {
            ControllerKind::Pd => pd_target(&errors, &cfg.gains),
            ControllerKind::Integral => i_target(&errors, &cfg.gains),
        };
        return Ok(Dataset {
            dt: cfg.dt(),
            errors,
            targets,
            meta: DatasetMeta {
                seed,
                attempt,
                config: cfg.clone(),
                schedule: d.schedule,
                biases: d.biases,
                gain_factors: d.gain_factors,
            },
        });
    }
    Err(Error::Unstable(format!(
        "dataset seed {seed}: every draw exceeded |x| > {DIVERGENCE_LIMIT_M} m after {MAX_RETRIES} retries"
    )))
}

/// PD dataset with `n_steps` holds of exactly `hold_s` seconds.
pub fn generate_pd_dataset(
    seed: u64,
    gains: PidGains,
    n_steps: usize,
    hold_s: f64,
) -> Result<Dataset> {
    let cfg = DatasetConfig {
        n_steps,
        hold_s: (hold_s, hold_s),
        ..DatasetConfig::pd(gains)
    };
    generate(seed, &cfg)
}

/// Five 50 s steps with the plant bias redrawn on each step.
pub fn generate_integral_dataset(seed: u64, gains: PidGains) -> Result<Dataset> {
    generate(seed, &DatasetConfig::integral(gains))
}

/// `count` datasets with independent sub-seeds of `seed`; dataset `i` equals
/// `generate(derive_seed(seed, i), cfg)`.
pub fn make_corpus(seed: u64, count: usize, cfg: &DatasetConfig) -> Result<Vec<Dataset>> {
    if count == 0 {
        return Err(Error::Config("corpus count must be at least 1".into()));
    }
    (0..count as u64)
        .into_par_iter()
        .map(|i| generate(derive_seed(seed, i), cfg))
        .collect()
}

fn join_f64<'a>(xs: impl IntoIterator<Item = &'a f64>) -> String {
    xs.into_iter()
        .map(|&x| fmt_f64(x))
        .collect::<Vec<_>>()
        .join(",")
}

pub fn to_text(d: &Dataset) -> String {
    let m = &d.meta;
    let c = &m.config;
    let mut s = String::with_capacity(64 * d.len() + 1024);
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(s, "# {k}={v}");
    };
    kv("format", DATASET_FORMAT.to_string());
    kv("kind", c.kind.to_string());
    kv("seed", m.seed.to_string());
    kv("attempt", m.attempt.to_string());
    kv("dt", fmt_f64(d.dt));
    kv("kp", fmt_f64(c.gains.kp));
    kv("ki", fmt_f64(c.gains.ki));
    kv("kd", fmt_f64(c.gains.kd));
    kv("period", fmt_f64(c.gains.period));
    kv("n_steps", c.n_steps.to_string());
    kv("amplitude", join_f64([&c.amplitude.0, &c.amplitude.1]));
    kv("hold_s", join_f64([&c.hold_s.0, &c.hold_s.1]));
    kv(
        "perturbation",
        join_f64([&c.perturbation.0, &c.perturbation.1]),
    );
    kv("bias_range", join_f64([&c.bias.0, &c.bias.1]));
    kv("setpoints", join_f64(m.schedule.steps.iter().map(|s| &s.0)));
    kv("holds", join_f64(m.schedule.steps.iter().map(|s| &s.1)));
    kv("biases", join_f64(&m.biases));
    kv("gain_factors", join_f64(m.gain_factors.iter().flatten()));
    s.push_str("time_s,error,target\n");
    for (k, (e, t)) in d.errors.iter().zip(&d.targets).enumerate() {
        let _ = writeln!(s, "{},{},{}", k as f64 * d.dt, fmt_f64(*e), fmt_f64(*t));
    }
    s
}

struct Header<'a> {
    pairs: Vec<(usize, &'a str, &'a str)>,
    end_line: usize,
}

impl<'a> Header<'a> {
    fn get(&self, key: &str) -> Result<(usize, &'a str)> {
        self.pairs
            .iter()
            .find(|(_, k, _)| *k == key)
            .map(|&(l, _, v)| (l, v))
            .ok_or_else(|| Error::parse(self.end_line, format!("missing metadata key `{key}`")))
    }

    fn f64(&self, key: &str) -> Result<f64> {
        let (line, v) = self.get(key)?;
        parse_f64(v).ok_or_else(|| Error::parse(line, format!("`{key}`: bad number `{v}`")))
    }

    fn list(&self, key: &str) -> Result<Vec<f64>> {
        let (line, v) = self.get(key)?;
        if v.is_empty() {
            return Ok(Vec::new());
        }
        v.split(',')
            .map(|x| {
                parse_f64(x).ok_or_else(|| Error::parse(line, format!("`{key}`: bad number `{x}`")))
            })
            .collect()
    }

    fn pair(&self, key: &str) -> Result<(f64, f64)> {
        let xs = self.list(key)?;
        match xs[..] {
            [a, b] => Ok((a, b)),
            _ => Err(Error::parse(
                self.get(key)?.0,
                format!("`{key}` needs two values"),
            )),
        }
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let (line, v) = self.get(key)?;
        v.parse()
            .map_err(|_| Error::parse(line, format!("`{key}`: cannot parse `{v}`")))
    }
}

pub fn from_text(text: &str) -> Result<Dataset> {
    let mut lines = text.lines().enumerate().peekable();
    let mut pairs = Vec::new();
    while let Some(&(idx, line)) = lines.peek() {
        let Some(rest) = line.strip_prefix('#') else {
            break;
        };
        lines.next();
        let rest = rest.trim();
        if rest.is_empty() {
            continue;
        }
        let (k, v) = rest
            .split_once('=')
            .ok_or_else(|| Error::parse(idx + 1, "metadata line must be `# key=value`"))?;
        pairs.push((idx + 1, k.trim(), v.trim()));
    }
    let header_line = lines.peek().map_or(pairs.len() + 1, |&(i, _)| i + 1);
    let h = Header {
        pairs,
        end_line: header_line,
    };
    let (fline, format) = h.get("format")?;
    if format != DATASET_FORMAT {
        return Err(Error::parse(
            fline,
            format!("unsupported format `{format}`, expected `{DATASET_FORMAT}`"),
        ));
    }
    let dt = h.f64("dt")?;
    if !(dt > 0.0) {
        return Err(Error::parse(h.get("dt")?.0, "dt must be positive"));
    }
    let kind: ControllerKind = h.parsed("kind")?;
    let gains = PidGains::new(h.f64("kp")?, h.f64("ki")?, h.f64("kd")?, h.f64("period")?);
    let config = DatasetConfig {
        kind,
        gains,
        n_steps: h.parsed("n_steps")?,
        amplitude: h.pair("amplitude")?,
        hold_s: h.pair("hold_s")?,
        perturbation: h.pair("perturbation")?,
        bias: h.pair("bias_range")?,
    };
    let setpoints = h.list("setpoints")?;
    let holds = h.list("holds")?;
    let biases = h.list("biases")?;
    let factors = h.list("gain_factors")?;
    let n = setpoints.len();
    if holds.len() != n || biases.len() != n || factors.len() != 3 * n {
        return Err(Error::parse(
            header_line,
            "schedule metadata lists have inconsistent lengths",
        ));
    }
    let schedule = StepSchedule::new(setpoints.into_iter().zip(holds).collect())
        .map_err(|e| Error::parse(header_line, e.to_string()))?;
    let gain_factors = factors
        .chunks_exact(3)
        .map(|c| [c[0], c[1], c[2]])
        .collect();

    match lines.next() {
        Some((_, "time_s,error,target")) => {}
        Some((i, other)) => {
            return Err(Error::parse(
                i + 1,
                format!("expected header `time_s,error,target`, found `{other}`"),
            ))
        }
        None => return Err(Error::parse(header_line, "missing CSV header")),
    }
    let mut errors = Vec::new();
    let mut targets = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let mut it = line.split(',');
        let mut field = |name: &str| {
            it.next()
                .and_then(parse_f64)
                .ok_or_else(|| Error::parse(idx + 1, format!("missing or bad `{name}`")))
        };
        field("time_s")?;
        errors.push(field("error")?);
        targets.push(field("target")?);
        if it.next().is_some() {
            return Err(Error::parse(idx + 1, "too many fields"));
        }
    }
    if errors.is_empty() {
        return Err(Error::Empty("dataset has no samples"));
    }
    Ok(Dataset {
        dt,
        errors,
        targets,
        meta: DatasetMeta {
            seed: h.parsed("seed")?,
            attempt: h.parsed("attempt")?,
            config,
            schedule,
            biases,
            gain_factors,
        },
    })
}

pub fn save(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), to_text(d).as_bytes())
}

pub fn load(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_text(&text).map_err(|e| e.with_path(path))
}
