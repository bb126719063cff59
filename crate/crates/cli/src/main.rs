use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use snnpid_core::dataset::{self, make_corpus, DatasetConfig};
use snnpid_core::io::{sha256_hex, write_atomic};
use snnpid_core::metrics::step_metrics;
use snnpid_core::neuron::constant_current_rate;
use snnpid_core::plant::{MeasurementNoise, PidController};
use snnpid_core::trainer::{evaluate_individual, Trainer};
use snnpid_core::{
    closed_loop_run, ActuatorModel, BiasSchedule, ClosedLoopConfig, ControllerKind, Error,
    EvalReport, Genome, PidGains, Result, StepSchedule, SummedController, TrainConfig,
};

#[derive(Parser)]
#[command(
    name = "snnpid",
    version,
    about = "Evolve and run spiking PID-like controllers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a corpus of training datasets.
    DatasetGen(DatasetGenArgs),
    /// Evolve a controller from a config file.
    Train(TrainArgs),
    /// Score a genome against a dataset.
    Evaluate(EvaluateArgs),
    /// Run a closed-loop step test.
    Simulate(SimulateArgs),
    /// Print a genome's parameters, layout and encoder rate curves.
    Inspect(InspectArgs),
}

#[derive(Args)]
struct DatasetGenArgs {
    #[arg(long)]
    kind: ControllerKind,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long)]
    out: PathBuf,
    /// Reference gains as kp,ki,kd.
    #[arg(long, value_parser = parse_gains)]
    gains: Option<PidGains>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    config: PathBuf,
    /// `key=value`, repeatable; dotted keys reach nested tables.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    genome: PathBuf,
    #[arg(long)]
    dataset: PathBuf,
    /// Per-sample trace (time_s,error,target,output).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    pd_genome: Option<PathBuf>,
    #[arg(long)]
    i_genome: Option<PathBuf>,
    /// Conventional PID gains as kp,ki,kd.
    #[arg(long, value_parser = parse_gains)]
    pid: Option<PidGains>,
    #[arg(long)]
    schedule: PathBuf,
    /// Constant plant bias (acceleration).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    bias: f64,
    #[arg(long)]
    out: PathBuf,
    /// Per-segment metrics CSV.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    deadzone: f64,
    #[arg(long, default_value_t = 0)]
    reversal_delay: u32,
    /// Gaussian position noise, m.
    #[arg(long)]
    noise_std: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct InspectArgs {
    #[arg(long)]
    genome: PathBuf,
    /// Write the rate sweep here instead of stdout.
    #[arg(long)]
    sweep: Option<PathBuf>,
}

fn parse_gains(s: &str) -> std::result::Result<PidGains, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| format!("bad gain list `{s}`: {e}"))?;
    match parts[..] {
        [kp, ki, kd] => Ok(PidGains::new(kp, ki, kd, snnpid_core::plant::DEFAULT_DT)),
        _ => Err(format!("expected kp,ki,kd, got `{s}`")),
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

/// `# key=value` header shared by every single-file output.
struct Provenance(String);

impl Provenance {
    fn new(command: &str) -> Self {
        let mut s = String::new();
        let _ = writeln!(s, "# tool=snnpid {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(s, "# command={command}");
        Self(s)
    }

    fn kv(mut self, key: &str, value: impl std::fmt::Display) -> Self {
        let _ = writeln!(self.0, "# {key}={value}");
        self
    }

    fn input(self, key: &str, path: &Path) -> Result<Self> {
        let digest = sha256_hex(&read(path)?);
        Ok(self
            .kv(key, path.display())
            .kv(&format!("{key}_sha256"), digest))
    }
}

fn dataset_gen(a: DatasetGenArgs) -> Result<()> {
    let gains = a.gains.unwrap_or_else(PidGains::reference);
    let cfg = DatasetConfig::for_kind(a.kind, gains);
    let corpus = make_corpus(a.seed, a.count, &cfg)?;
    let width = a.count.saturating_sub(1).to_string().len().max(3);
    fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    for (i, d) in corpus.iter().enumerate() {
        dataset::save(d, a.out.join(format!("dataset_{i:0width$}.csv")))?;
    }
    let prov = Provenance::new("dataset-gen")
        .kv("kind", a.kind)
        .kv("seed", a.seed)
        .kv("count", a.count)
        .kv("gains", format!("{},{},{}", gains.kp, gains.ki, gains.kd));
    write_atomic(&a.out.join("provenance.txt"), prov.0.as_bytes())?;
    println!(
        "wrote {} {} datasets to {}",
        a.count,
        a.kind,
        a.out.display()
    );
    Ok(())
}

fn train(a: TrainArgs) -> Result<()> {
    let cfg = TrainConfig::load_with_overrides(&a.config, &a.overrides)?;
    let mut trainer = Trainer::resume_or_new(cfg)?;
    let start = trainer.completed();
    let out = trainer.run(true)?;
    let dir = &trainer.config().out_dir;
    println!(
        "trained generations {start}..{} into {}",
        out.log.records.len(),
        dir.display()
    );
    println!(
        "champion validation cost {} (mae {}, pcc {})",
        out.champion_validation.total, out.champion_validation.mae, out.champion_validation.pcc
    );
    Ok(())
}

fn evaluate(a: EvaluateArgs) -> Result<()> {
    let genome = Genome::load(&a.genome)?;
    let data = dataset::load(&a.dataset)?;
    let c = evaluate_individual(&genome, &data)?;
    if let Some(out) = &a.out {
        let mut controller = genome.decode()?;
        let outputs = controller.forward_fresh(&data.errors)?;
        let mut s = Provenance::new("evaluate")
            .input("genome", &a.genome)?
            .input("dataset", &a.dataset)?
            .kv("mae", c.mae)
            .kv("pcc", c.pcc)
            .kv("total", c.total)
            .0;
        s.push_str("time_s,error,target,output\n");
        for (k, ((e, t), o)) in data
            .errors
            .iter()
            .zip(&data.targets)
            .zip(&outputs)
            .enumerate()
        {
            let _ = writeln!(s, "{},{e},{t},{o}", k as f64 * data.dt);
        }
        write_atomic(out, s.as_bytes())?;
    }
    println!("mae={} pcc={} total={}", c.mae, c.pcc, c.total);
    Ok(())
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let schedule = StepSchedule::parse(&String::from_utf8_lossy(&read(&a.schedule)?))
        .map_err(|e| e.with_path(&a.schedule))?;
    let mut controller = SummedController::new();
    let mut prov = Provenance::new("simulate").input("schedule", &a.schedule)?;
    let mut names = Vec::new();
    for (label, path) in [("pd_genome", &a.pd_genome), ("i_genome", &a.i_genome)] {
        if let Some(p) = path {
            controller = controller.with(Genome::load(p)?.decode()?);
            prov = prov.input(label, p)?;
            names.push(label.trim_end_matches("_genome").to_string() + "-snn");
        }
    }
    if let Some(g) = a.pid {
        g.validate()?;
        controller = controller.with(PidController::new(g));
        prov = prov.kv("pid", format!("{},{},{}", g.kp, g.ki, g.kd));
        names.push("pid".into());
    }
    if controller.is_empty() {
        return Err(Error::Config(
            "give at least one of --pd-genome, --i-genome, --pid".into(),
        ));
    }
    let actuator = ActuatorModel {
        deadzone_halfwidth: a.deadzone,
        reversal_delay_steps: a.reversal_delay,
        ..ActuatorModel::default()
    };
    actuator.validate()?;
    let noise = a.noise_std.map(|std_m| MeasurementNoise {
        std_m,
        seed: a.seed,
    });
    let cfg = ClosedLoopConfig {
        bias: BiasSchedule::Constant(a.bias),
        actuator,
        noise,
        ..ClosedLoopConfig::default()
    };
    let trace = closed_loop_run(&mut controller, &schedule, &cfg)?;
    prov = prov
        .kv("bias", a.bias)
        .kv("deadzone", a.deadzone)
        .kv("reversal_delay", a.reversal_delay)
        .kv("command_clamp", actuator.command_clamp);
    if let Some(n) = noise {
        prov = prov.kv("noise_std", n.std_m).kv("seed", n.seed);
    }

    // metrics can still fail (short segments); nothing is written before then
    let report = EvalReport {
        controller: names.join("+"),
        segments: step_metrics(&trace, &schedule)?,
    };
    let mut buf = prov.0.clone().into_bytes();
    trace
        .write_csv(&mut buf)
        .map_err(|e| Error::io(&a.out, e))?;
    write_atomic(&a.out, &buf)?;

    if let Some(path) = &a.report {
        let mut s = prov.kv("controller", &report.controller).0;
        s.push_str(&report.to_csv());
        write_atomic(path, s.as_bytes())?;
    }
    println!("controller {}", report.controller);
    for m in &report.segments {
        println!(
            "segment {} setpoint {}: ss_error {:.4} m, overshoot {:.4} m, oscillation {:.4} m, rise {}",
            m.segment,
            m.setpoint,
            m.steady_state_error,
            m.overshoot,
            m.oscillation_amplitude,
            m.rise_time
                .map_or_else(|| "n/a".to_string(), |r| format!("{r:.1} s"))
        );
    }
    println!(
        "mean |ss_error| {:.4} m, mean overshoot {:.4} m",
        report.mean_abs_steady_state(),
        report.mean_overshoot()
    );
    Ok(())
}

/// Input currents for the encoder rate curves.
const SWEEP_CURRENTS: (f64, f64, usize) = (-1.0, 5.0, 121);
const SWEEP_TICKS: usize = 1000;

fn rate_sweep(genome: &Genome) -> Result<String> {
    let controller = genome.decode()?;
    // both neurons of a pair share their parameters; one curve per pair
    let pairs: Vec<_> = controller
        .encoding_lif()
        .iter()
        .step_by(2)
        .copied()
        .collect();
    let mut s = String::from("current");
    for k in 0..pairs.len() {
        let _ = write!(s, ",pair_{k}");
    }
    s.push('\n');
    let (lo, hi, n) = SWEEP_CURRENTS;
    for i in 0..n {
        let current = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let _ = write!(s, "{current}");
        for p in &pairs {
            let _ = write!(s, ",{}", constant_current_rate(*p, current, SWEEP_TICKS));
        }
        s.push('\n');
    }
    Ok(s)
}

fn inspect(a: InspectArgs) -> Result<()> {
    let genome = Genome::load(&a.genome)?;
    let params = toml::to_string(&genome.to_params())
        .map_err(|e| Error::Config(format!("cannot render parameters: {e}")))?;
    let layout = genome.layout();
    println!("# parameters");
    println!("{params}");
    println!("# layout ({} values)", layout.len());
    println!("role,offset,count,lower,upper");
    for seg in &layout.segments {
        println!(
            "{},{},{},{},{}",
            seg.role.key(),
            seg.offset,
            seg.count,
            seg.lower,
            seg.upper
        );
    }
    let sweep = rate_sweep(&genome)?;
    match &a.sweep {
        Some(path) => {
            let s = Provenance::new("inspect").input("genome", &a.genome)?.0 + &sweep;
            write_atomic(path, s.as_bytes())?;
        }
        None => {
            println!();
            println!("# encoder spike rate vs input current");
            print!("{sweep}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let res = match cli.command {
        Command::DatasetGen(a) => dataset_gen(a),
        Command::Train(a) => train(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Simulate(a) => simulate(a),
        Command::Inspect(a) => inspect(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
