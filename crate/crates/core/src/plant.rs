//! Reference PID, the buoyancy-biased double integrator, and the closed-loop
//! harness that connects a controller to it.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::StepSchedule;
use crate::error::{Error, Result};
use crate::network::{SnnController, COMMAND_LIMIT};

/// Control loop period used throughout (10 Hz).
pub const DEFAULT_DT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Sampling period in seconds.
    pub period: f64,
}

impl PidGains {
    pub fn new(kp: f64, ki: f64, kd: f64, period: f64) -> Self {
        Self { kp, ki, kd, period }
    }

    /// Reference gains for the double-integrator model of the blimp.
    ///
    /// With the default actuator a 1 m step from rest overshoots by about
    /// 10%. PD alone does not overshoot. Against a bias of 4 the integral
    /// term leaves about 5 cm of error after 50 s.
    pub fn reference() -> Self {
        Self::new(2.0, 0.15, 4.0, DEFAULT_DT)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.period > 0.0) || !self.period.is_finite() {
            return Err(Error::Config(format!(
                "PID period must be positive, got {}",
                self.period
            )));
        }
        if ![self.kp, self.ki, self.kd].iter().all(|g| g.is_finite()) {
            return Err(Error::Config("PID gains must be finite".into()));
        }
        Ok(())
    }

    pub fn pd_only(self) -> Self {
        Self { ki: 0.0, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PidState {
    pub prev_error: f64,
    /// Running sum of `period * e_k`, including the current sample.
    pub error_sum: f64,
}

/// Proportional plus derivative contribution for one sample.
#[inline]
fn pd_term(gains: &PidGains, prev_error: f64, error: f64) -> f64 {
    gains.kp * error + gains.kd * (error - prev_error) / gains.period
}

/// Discrete PID. The first sample differences against a previous error of 0.
pub fn pid_step(state: PidState, gains: &PidGains, error: f64) -> (f64, PidState) {
    let error_sum = state.error_sum + gains.period * error;
    let command = pd_term(gains, state.prev_error, error) + gains.ki * error_sum;
    (
        command,
        PidState {
            prev_error: error,
            error_sum,
        },
    )
}

/// The PD part of the PID response to an error sequence.
pub fn pd_target(errors: &[f64], gains: &PidGains) -> Vec<f64> {
    let mut prev = 0.0;
    errors
        .iter()
        .map(|&e| {
            let u = pd_term(gains, prev, e);
            prev = e;
            u
        })
        .collect()
}

/// The integral part of the PID response to an error sequence.
pub fn i_target(errors: &[f64], gains: &PidGains) -> Vec<f64> {
    let mut sum = 0.0;
    errors
        .iter()
        .map(|&e| {
            sum += gains.period * e;
            gains.ki * sum
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DoubleIntegratorState {
    /// Position, m.
    pub x: f64,
    /// Velocity, m/s.
    pub v: f64,
    /// Constant acceleration offset, m/s^2.
    pub bias: f64,
}

/// Actuator imperfections between controller command and plant input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActuatorModel {
    /// Commands with magnitude strictly below this produce no thrust.
    pub deadzone_halfwidth: f64,
    pub command_clamp: f64,
    /// Ticks of zero thrust inserted when the thrust direction reverses.
    pub reversal_delay_steps: u32,
}

impl Default for ActuatorModel {
    fn default() -> Self {
        Self {
            deadzone_halfwidth: 0.0,
            command_clamp: COMMAND_LIMIT,
            reversal_delay_steps: 0,
        }
    }
}

impl ActuatorModel {
    /// No clamp, no deadzone, no delay: the textbook double integrator.
    pub fn ideal() -> Self {
        Self {
            deadzone_halfwidth: 0.0,
            command_clamp: f64::INFINITY,
            reversal_delay_steps: 0,
        }
    }

    /// Deadzone and rotor-flip delay resembling the real airframe.
    pub fn blimp_like() -> Self {
        Self {
            deadzone_halfwidth: 0.1,
            command_clamp: COMMAND_LIMIT,
            reversal_delay_steps: 5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.deadzone_halfwidth >= 0.0) || !(self.command_clamp > 0.0) {
            return Err(Error::Config(format!(
                "actuator needs deadzone >= 0 and clamp > 0, got {} and {}",
                self.deadzone_halfwidth, self.command_clamp
            )));
        }
        Ok(())
    }

    /// Clamp followed by deadzone; the memoryless part of the actuator.
    pub fn shape(&self, command: f64) -> f64 {
        let u = command.clamp(-self.command_clamp, self.command_clamp);
        if u.abs() < self.deadzone_halfwidth {
            0.0
        } else {
            u
        }
    }
}

/// Direction memory for the reversal delay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ActuatorState {
    direction: i8,
    pending_direction: i8,
    remaining: u32,
}

impl ActuatorState {
    pub fn apply(&mut self, model: &ActuatorModel, command: f64) -> f64 {
        let u = model.shape(command);
        let dir = if u > 0.0 {
            1
        } else if u < 0.0 {
            -1
        } else {
            0
        };
        if dir == 0 {
            return 0.0;
        }
        if model.reversal_delay_steps == 0 || self.direction == 0 || dir == self.direction {
            self.direction = dir;
            self.pending_direction = 0;
            return u;
        }
        if self.pending_direction != dir {
            self.pending_direction = dir;
            self.remaining = model.reversal_delay_steps;
        }
        if self.remaining > 0 {
            self.remaining -= 1;
            return 0.0;
        }
        self.direction = dir;
        self.pending_direction = 0;
        u
    }
}

/// One semi-implicit Euler step of `x'' = u_eff + bias`.
///
/// Returns the new state and the command that actually reached the plant.
pub fn plant_step(
    state: DoubleIntegratorState,
    command: f64,
    actuator: &ActuatorModel,
    memory: &mut ActuatorState,
    dt: f64,
) -> Result<(DoubleIntegratorState, f64)> {
    if !command.is_finite() {
        return Err(Error::NonFinite {
            what: "plant command",
            tick: None,
        });
    }
    if !(dt > 0.0) {
        return Err(Error::Config(format!(
            "plant dt must be positive, got {dt}"
        )));
    }
    let u_eff = memory.apply(actuator, command);
    let v = state.v + (u_eff + state.bias) * dt;
    let x = state.x + v * dt;
    Ok((
        DoubleIntegratorState {
            x,
            v,
            bias: state.bias,
        },
        u_eff,
    ))
}

/// Anything that turns a measured error into a command once per tick.
pub trait CommandSource {
    fn command(&mut self, error: f64) -> Result<f64>;
    fn reset(&mut self);
    /// Called before the first tick of each setpoint segment.
    fn begin_segment(&mut self, _index: usize) {}
}

impl<T: CommandSource + ?Sized> CommandSource for Box<T> {
    fn command(&mut self, error: f64) -> Result<f64> {
        (**self).command(error)
    }
    fn reset(&mut self) {
        (**self).reset()
    }
    fn begin_segment(&mut self, index: usize) {
        (**self).begin_segment(index)
    }
}

impl CommandSource for SnnController {
    fn command(&mut self, error: f64) -> Result<f64> {
        self.step(error)
    }
    fn reset(&mut self) {
        self.reset_state()
    }
}

#[derive(Debug, Clone)]
pub struct PidController {
    pub gains: PidGains,
    pub state: PidState,
}

impl PidController {
    pub fn new(gains: PidGains) -> Self {
        Self {
            gains,
            state: PidState::default(),
        }
    }
}

impl CommandSource for PidController {
    fn command(&mut self, error: f64) -> Result<f64> {
        let (u, s) = pid_step(self.state, &self.gains, error);
        self.state = s;
        Ok(u)
    }
    fn reset(&mut self) {
        self.state = PidState::default();
    }
}

/// PID whose gains are swapped at the start of every segment.
#[derive(Debug, Clone)]
pub struct ScheduledPid {
    pub per_segment: Vec<PidGains>,
    inner: PidController,
}

impl ScheduledPid {
    pub fn new(per_segment: Vec<PidGains>) -> Result<Self> {
        let first = *per_segment
            .first()
            .ok_or(Error::Empty("gain schedule is empty"))?;
        Ok(Self {
            per_segment,
            inner: PidController::new(first),
        })
    }
}

impl CommandSource for ScheduledPid {
    fn command(&mut self, error: f64) -> Result<f64> {
        self.inner.command(error)
    }
    fn reset(&mut self) {
        self.inner.reset();
        self.inner.gains = self.per_segment[0];
    }
    fn begin_segment(&mut self, index: usize) {
        self.inner.gains = self.per_segment[index.min(self.per_segment.len() - 1)];
    }
}

/// Sum of several controllers' outputs, e.g. a spiking PD plus a spiking I.
#[derive(Default)]
pub struct SummedController {
    parts: Vec<Box<dyn CommandSource + Send>>,
}

impl SummedController {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, part: impl CommandSource + Send + 'static) -> Self {
        self.parts.push(Box::new(part));
        self
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Per-part commands for one tick, plus their sum.
    pub fn command_parts(&mut self, error: f64) -> Result<(f64, Vec<f64>)> {
        let parts = self
            .parts
            .iter_mut()
            .map(|p| p.command(error))
            .collect::<Result<Vec<_>>>()?;
        Ok((parts.iter().sum(), parts))
    }
}

impl CommandSource for SummedController {
    fn command(&mut self, error: f64) -> Result<f64> {
        let mut total = 0.0;
        for p in &mut self.parts {
            total += p.command(error)?;
        }
        Ok(total)
    }
    fn reset(&mut self) {
        self.parts.iter_mut().for_each(|p| p.reset());
    }
    fn begin_segment(&mut self, index: usize) {
        self.parts.iter_mut().for_each(|p| p.begin_segment(index));
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BiasSchedule {
    Constant(f64),
    /// One bias per setpoint segment.
    PerSegment(Vec<f64>),
}

impl BiasSchedule {
    fn for_segment(&self, index: usize) -> f64 {
        match self {
            BiasSchedule::Constant(b) => *b,
            BiasSchedule::PerSegment(bs) => bs[index],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementNoise {
    pub std_m: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedLoopConfig {
    pub dt: f64,
    pub x0: f64,
    pub v0: f64,
    pub bias: BiasSchedule,
    pub actuator: ActuatorModel,
    pub noise: Option<MeasurementNoise>,
}

impl Default for ClosedLoopConfig {
    fn default() -> Self {
        Self {
            dt: DEFAULT_DT,
            x0: 0.0,
            v0: 0.0,
            bias: BiasSchedule::Constant(0.0),
            actuator: ActuatorModel::default(),
            noise: None,
        }
    }
}

impl ClosedLoopConfig {
    pub fn ideal(bias: BiasSchedule) -> Self {
        Self {
            bias,
            actuator: ActuatorModel::ideal(),
            ..Self::default()
        }
    }
}

/// Everything recorded during a closed-loop run, one entry per tick.
///
/// Position and velocity are the values the controller saw when it computed
/// that tick's command.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClosedLoopTrace {
    pub dt: f64,
    pub time_s: Vec<f64>,
    pub setpoint: Vec<f64>,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub error: Vec<f64>,
    pub command: Vec<f64>,
    pub command_effective: Vec<f64>,
    pub bias: Vec<f64>,
    /// First tick of each setpoint segment.
    pub segment_starts: Vec<usize>,
}

impl ClosedLoopTrace {
    pub fn len(&self) -> usize {
        self.time_s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time_s.is_empty()
    }

    /// Tick range `[start, end)` of a segment.
    pub fn segment_range(&self, index: usize) -> std::ops::Range<usize> {
        let start = self.segment_starts[index];
        let end = self
            .segment_starts
            .get(index + 1)
            .copied()
            .unwrap_or(self.len());
        start..end
    }

    pub fn max_abs_position(&self) -> f64 {
        self.x.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub const CSV_HEADER: &'static str =
        "time_s,setpoint_m,x_m,v_mps,error_m,command,command_effective,bias";

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for k in 0..self.len() {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                self.time_s[k],
                self.setpoint[k],
                self.x[k],
                self.v[k],
                self.error[k],
                self.command[k],
                self.command_effective[k],
                self.bias[k]
            )?;
        }
        Ok(())
    }
}

/// Runs `controller` against the double integrator over the whole schedule.
///
/// The controller is reset first. Each tick: measure the error, ask for a
/// command, step the plant. Trace length is the schedule's tick count.
pub fn closed_loop_run<C: CommandSource + ?Sized>(
    controller: &mut C,
    schedule: &StepSchedule,
    config: &ClosedLoopConfig,
) -> Result<ClosedLoopTrace> {
    if schedule.is_empty() {
        return Err(Error::Empty("setpoint schedule is empty"));
    }
    if let BiasSchedule::PerSegment(bs) = &config.bias {
        crate::error::check_len("bias schedule", schedule.len(), bs.len())?;
    }
    config.actuator.validate()?;
    let dt = config.dt;
    let ticks = schedule.segment_ticks(dt)?;
    let total: usize = ticks.iter().sum();

    let mut noise = match config.noise {
        Some(n) if n.std_m > 0.0 => Some((
            ChaCha8Rng::seed_from_u64(n.seed),
            Normal::new(0.0, n.std_m).map_err(|e| Error::Config(e.to_string()))?,
        )),
        _ => None,
    };

    let mut trace = ClosedLoopTrace {
        dt,
        ..Default::default()
    };
    for col in [
        &mut trace.time_s,
        &mut trace.setpoint,
        &mut trace.x,
        &mut trace.v,
        &mut trace.error,
        &mut trace.command,
        &mut trace.command_effective,
        &mut trace.bias,
    ] {
        col.reserve_exact(total);
    }

    controller.reset();
    let mut state = DoubleIntegratorState {
        x: config.x0,
        v: config.v0,
        bias: 0.0,
    };
    let mut memory = ActuatorState::default();
    let mut tick = 0usize;
    for (seg, (&(setpoint, _), &n)) in schedule.steps.iter().zip(&ticks).enumerate() {
        trace.segment_starts.push(tick);
        state.bias = config.bias.for_segment(seg);
        controller.begin_segment(seg);
        for _ in 0..n {
            let measured = match &mut noise {
                Some((rng, dist)) => state.x + dist.sample(rng),
                None => state.x,
            };
            let error = setpoint - measured;
            let command = controller.command(error)?;
            if !command.is_finite() {
                return Err(Error::NonFinite {
                    what: "controller command",
                    tick: Some(tick),
                });
            }
            let (next, u_eff) = plant_step(state, command, &config.actuator, &mut memory, dt)?;
            trace.time_s.push(tick as f64 * dt);
            trace.setpoint.push(setpoint);
            trace.x.push(state.x);
            trace.v.push(state.v);
            trace.error.push(error);
            trace.command.push(command);
            trace.command_effective.push(u_eff);
            trace.bias.push(state.bias);
            state = next;
            tick += 1;
        }
    }
    Ok(trace)
}
