//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.
//!
//! Pass a criterion number (or several) to run only those:
//! `cargo test -p snnpid-cli --test acceptance -- 9 12`.

mod hand_traces;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use snnpid_core::cmaes::StrategyParams;
use snnpid_core::neuron::{adaptive_layer_step, lif_layer_step, AdaptiveThresholdParams};
use snnpid_core::objective::pearson;
use snnpid_core::plant::{i_target, pd_target, pid_step, PidState};
use snnpid_core::trainer::{evaluate_individual, test_dataset, train_in_memory, TrainOutcome};
use snnpid_core::{
    closed_loop_run, cost, metrics, step_metrics, BiasSchedule, Bounds, ClosedLoopConfig, Cmaes,
    ControllerKind, ControllerParams, Genome, GenomeLayout, HiddenVariant, LifParams,
    NeuronLayerState, PidController, PidGains, SnnController, StepSchedule, SummedController,
    TrainConfig,
};

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn random_genome(rng: &mut ChaCha8Rng, layout: &GenomeLayout) -> Genome {
    let values = layout
        .lower_bounds()
        .iter()
        .zip(layout.upper_bounds())
        .map(|(&l, u)| rng.random_range(l..=u))
        .collect();
    Genome::new(layout.clone(), values).expect("sampled inside bounds")
}

fn random_params(rng: &mut ChaCha8Rng, variant: HiddenVariant, n: usize) -> ControllerParams {
    let layout = GenomeLayout::layout_for(variant, ControllerKind::Pd, n).unwrap();
    random_genome(rng, &layout).to_params()
}

// 1 ------------------------------------------------------------------------

fn neuron_traces() -> Outcome {
    let mut rows = 0;
    for case in hand_traces::CASES {
        let (tau_syn, tau_mem, theta) = case.lif;
        let params = [LifParams::new(tau_syn, tau_mem, theta)];
        let mut state = NeuronLayerState::zeros(1);
        for (t, (&feed, &(i, v, s, a))) in case.feeds.iter().zip(case.expect).enumerate() {
            state = match case.adapt {
                None => lif_layer_step(&state, &params, &[feed]),
                Some((tau_th, w, pre)) => {
                    let adapt = AdaptiveThresholdParams::new(vec![tau_th], w.to_vec(), w.len())
                        .map_err(e2s)?;
                    adaptive_layer_step(&state, &params, &adapt, &[feed], pre[t])
                }
            }
            .map_err(e2s)?;
            let got = (state.i[0], state.v[0], state.s[0], state.a[0]);
            ensure(
                got.0.to_bits() == i.to_bits()
                    && got.1.to_bits() == v.to_bits()
                    && got.2 == s
                    && got.3.to_bits() == a.to_bits(),
                || {
                    format!(
                        "{} tick {t}: got {got:?}, want {:?}",
                        case.name,
                        (i, v, s, a)
                    )
                },
            )?;
            rows += 1;
        }
    }
    Ok(format!(
        "{} traces, {rows} ticks bitwise equal",
        hand_traces::CASES.len()
    ))
}

// 2 ------------------------------------------------------------------------

fn run_hidden(
    params: ControllerParams,
    errors: &[f64],
) -> Result<(Vec<u64>, Vec<Vec<bool>>), String> {
    let mut c = SnnController::new(params).map_err(e2s)?;
    let mut outs = Vec::with_capacity(errors.len());
    let mut spikes = Vec::with_capacity(errors.len());
    for &e in errors {
        outs.push(c.step(e).map_err(e2s)?.to_bits());
        spikes.push(c.hidden_state().s.clone());
    }
    Ok((outs, spikes))
}

fn variant_degeneracy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut total_spikes = 0usize;
    let mut nonzero_outputs = 0usize;
    for _ in 0..100 {
        let n = 8;
        let base = random_params(&mut rng, HiddenVariant::Lif, n);
        let errors: Vec<f64> = (0..500).map(|_| rng.random_range(-1.5..1.5)).collect();
        let reference = run_hidden(base.clone(), &errors)?;
        total_spikes += reference.1.iter().flatten().filter(|&&s| s).count();
        nonzero_outputs += reference
            .0
            .iter()
            .filter(|&&b| f64::from_bits(b) != 0.0)
            .count();

        for variant in [
            HiddenVariant::RLif,
            HiddenVariant::IwtaLif,
            HiddenVariant::RIwtaLif,
        ] {
            let mut p = base.clone();
            p.variant = variant;
            if variant.is_recurrent() {
                p.rec_w = Some(vec![0.0; n * n]);
            }
            if variant.is_adaptive() {
                let width = p.threshold_wiring.presynaptic_width(n);
                p.th_tau = Some((0..n).map(|_| rng.random_range(0.0..=1.0)).collect());
                p.th_w = Some(vec![0.0; n * width]);
            }
            let got = run_hidden(p, &errors)?;
            ensure(got == reference, || {
                format!("{variant:?} with zero extra weights diverged from LIF")
            })?;
        }
    }
    ensure(total_spikes > 0 && nonzero_outputs > 0, || {
        "no hidden activity at all".into()
    })?;
    Ok(format!(
        "R-LIF, IWTA-LIF, R-IWTA-LIF identical to LIF on 100x500 ticks ({total_spikes} hidden spikes)"
    ))
}

// 3 ------------------------------------------------------------------------

fn encoding_symmetry() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut spikes = 0usize;
    for seq in 0..100 {
        let params = random_params(&mut rng, HiddenVariant::Lif, 8);
        let errors: Vec<f64> = (0..300).map(|_| rng.random_range(-2.0..2.0)).collect();
        let mut pos = SnnController::new(params.clone()).map_err(e2s)?;
        let mut neg = SnnController::new(params).map_err(e2s)?;
        for (t, &e) in errors.iter().enumerate() {
            let a = pos.encode_step(e).map_err(e2s)?.to_vec();
            let b = neg.encode_step(-e).map_err(e2s)?.to_vec();
            spikes += a.iter().filter(|&&s| s).count();
            for k in 0..a.len() / 2 {
                ensure(a[2 * k] == b[2 * k + 1] && a[2 * k + 1] == b[2 * k], || {
                    format!(
                        "sequence {seq} tick {t} pair {k}: {:?} vs negated {:?}",
                        &a[2 * k..2 * k + 2],
                        &b[2 * k..2 * k + 2]
                    )
                })?;
            }
        }
    }
    ensure(spikes > 0, || "encoders never fired".into())?;
    Ok(format!(
        "100 sequences x 300 ticks, {spikes} encoder spikes mirrored"
    ))
}

// 4 ------------------------------------------------------------------------

fn pid_decomposition() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut samples = 0usize;
    for _ in 0..10_000 {
        let period = if rng.random_bool(0.5) {
            0.1
        } else {
            rng.random_range(0.001..1.0)
        };
        let gains = PidGains::new(
            rng.random_range(-10.0..10.0),
            rng.random_range(-10.0..10.0),
            rng.random_range(-10.0..10.0),
            period,
        );
        let len = rng.random_range(1..=40);
        let errors: Vec<f64> = (0..len).map(|_| rng.random_range(-5.0..5.0)).collect();
        let pd = pd_target(&errors, &gains);
        let it = i_target(&errors, &gains);
        let mut state = PidState::default();
        for (k, &e) in errors.iter().enumerate() {
            let (u, next) = pid_step(state, &gains, e);
            state = next;
            ensure((pd[k] + it[k]).to_bits() == u.to_bits(), || {
                format!("{gains:?} sample {k}: {u} != {} + {}", pd[k], it[k])
            })?;
            samples += 1;
        }
    }
    Ok(format!("10000 gain/error cases, {samples} samples exact"))
}

// 5 ------------------------------------------------------------------------

fn plant_law() -> Outcome {
    let kp = 2.0;
    let schedule = StepSchedule::new(vec![(1.0, 100.0)]).map_err(e2s)?;
    let mut lines = Vec::new();
    for b in [-1.0, 1.0, 2.0] {
        let mut pd = PidController::new(PidGains::new(kp, 0.0, 4.0, 0.1));
        let cfg = ClosedLoopConfig {
            bias: BiasSchedule::Constant(b),
            ..Default::default()
        };
        let trace = closed_loop_run(&mut pd, &schedule, &cfg).map_err(e2s)?;
        let e = metrics::tail_mean_error(&trace, 10.0).map_err(e2s)?;
        // error = setpoint - x, so a positive bias leaves the plant above the setpoint
        let want = -b / kp;
        let rel = (e - want).abs() / want.abs();
        lines.push(format!("b={b}: {e:.5} vs {want} ({:.3}%)", rel * 100.0));
        ensure(rel <= 0.02, || lines.join("; "))?;
    }
    Ok(lines.join("; "))
}

// 6 ------------------------------------------------------------------------

fn naive_cost(u: &[f64], v: &[f64]) -> f64 {
    let n = u.len() as f64;
    let mut mae = 0.0;
    let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&x, &y) in u.iter().zip(v) {
        mae += (x - y).abs();
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
    }
    let num = n * sxy - sx * sy;
    let den = ((n * sxx - sx * sx) * (n * syy - sy * sy)).sqrt();
    let r = if den == 0.0 { 0.0 } else { num / den };
    mae / n + 1.0 - r
}

fn cost_function() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for case in 0..1000 {
        let len = rng.random_range(2..=400);
        let scale = rng.random_range(0.1..10.0);
        let u: Vec<f64> = (0..len).map(|_| rng.random_range(-scale..scale)).collect();
        let mix = rng.random_range(-1.0..1.0);
        let v: Vec<f64> = u
            .iter()
            .map(|&x| mix * x + rng.random_range(-scale..scale))
            .collect();

        let same = cost(&u, &u).map_err(e2s)?;
        ensure(same.total == 0.0, || {
            format!("case {case}: cost(u,u) = {}", same.total)
        })?;
        let flat = vec![rng.random_range(-3.0..3.0); len];
        ensure(
            pearson(&u, &flat).map_err(e2s)? == 0.0 && pearson(&flat, &u).map_err(e2s)? == 0.0,
            || format!("case {case}: constant signal did not give pcc 0"),
        )?;

        let got = cost(&u, &v).map_err(e2s)?.total;
        let diff = (got - naive_cost(&u, &v)).abs();
        worst = worst.max(diff);
        ensure(diff <= 1e-12, || {
            format!("case {case}: differs from naive by {diff:e}")
        })?;
    }
    Ok(format!("1000 pairs, max deviation from naive {worst:.1e}"))
}

// 7 ------------------------------------------------------------------------

fn run_cmaes(
    es: &mut Cmaes,
    f: impl Fn(&[f64]) -> f64,
    max_evals: u64,
    target: f64,
) -> Result<(f64, u64), String> {
    let mut best = f64::INFINITY;
    while es.evaluations() + es.lambda() as u64 <= max_evals && best >= target {
        let xs = es.ask();
        for x in &xs {
            ensure(es.bounds().contains(x), || {
                format!("sample {x:?} outside bounds")
            })?;
        }
        let fs: Vec<f64> = xs.iter().map(|x| f(x)).collect();
        best = fs.iter().copied().fold(best, f64::min);
        es.tell(&xs, &fs).map_err(e2s)?;
    }
    Ok((best, es.evaluations()))
}

fn cmaes_benchmarks() -> Outcome {
    let sphere = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
    let rosen = |x: &[f64]| {
        x.windows(2)
            .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
            .sum::<f64>()
    };
    let mut notes = Vec::new();

    let mut worst = 0;
    for seed in 1..=5 {
        let bounds = Bounds::new(vec![-5.0; 10], vec![5.0; 10]).map_err(e2s)?;
        let mut es =
            Cmaes::from_bounds(bounds, StrategyParams::default_lambda(10), seed).map_err(e2s)?;
        let (best, evals) = run_cmaes(&mut es, sphere, 2000, 1e-8)?;
        ensure(best < 1e-8, || {
            format!("sphere seed {seed}: {best:e} after {evals} evaluations")
        })?;
        worst = worst.max(evals);
    }
    notes.push(format!("sphere n=10 in <= {worst} evals (5 seeds)"));

    let bounds = Bounds::new(vec![-5.0; 5], vec![5.0; 5]).map_err(e2s)?;
    let mut es = Cmaes::new(
        vec![0.0; 5],
        0.5,
        &[1.0; 5],
        bounds,
        StrategyParams::default_lambda(5),
        7,
    )
    .map_err(e2s)?;
    let (best, evals) = run_cmaes(&mut es, rosen, 30_000, 1e-6)?;
    ensure(best < 1e-6, || {
        format!("rosenbrock: {best:e} after {evals} evaluations")
    })?;
    notes.push(format!("rosenbrock n=5 in {evals} evals"));

    // optimum outside the box: samples pile up against the bounds
    let bounds = Bounds::new(vec![1.0; 10], vec![2.0; 10]).map_err(e2s)?;
    let mut es = Cmaes::from_bounds(bounds, 20, 9).map_err(e2s)?;
    let (best, _) = run_cmaes(&mut es, sphere, 4000, f64::NEG_INFINITY)?;
    ensure((best - 10.0).abs() < 1e-3, || {
        format!("boxed sphere settled at {best}")
    })?;
    notes.push("boxed samples all inside".into());
    Ok(notes.join("; "))
}

// 8 ------------------------------------------------------------------------

fn genome_layouts() -> Outcome {
    let want = [
        (HiddenVariant::Lif, 261),
        (HiddenVariant::RLif, 937),
        (HiddenVariant::IwtaLif, 1639),
        (HiddenVariant::RIwtaLif, 2315),
    ];
    for (variant, len) in want {
        for kind in [ControllerKind::Pd, ControllerKind::Integral] {
            let got = GenomeLayout::layout_for(variant, kind, 26)
                .map_err(e2s)?
                .len();
            ensure(got == len, || {
                format!("{variant:?}/{kind:?}: length {got}, want {len}")
            })?;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for case in 0..1000 {
        let variant = HiddenVariant::ALL[rng.random_range(0..4)];
        let kind = if rng.random_bool(0.5) {
            ControllerKind::Pd
        } else {
            ControllerKind::Integral
        };
        let n = rng.random_range(1..=26);
        let layout = GenomeLayout::layout_for(variant, kind, n).map_err(e2s)?;
        let g = random_genome(&mut rng, &layout);
        let back = Genome::from_params(&g.to_params()).map_err(e2s)?;
        let text = Genome::from_text(&g.to_text()).map_err(e2s)?;
        let same = |a: &Genome| {
            a.values().len() == g.values().len()
                && a.values()
                    .iter()
                    .zip(g.values())
                    .all(|(x, y)| x.to_bits() == y.to_bits())
        };
        ensure(same(&back) && same(&text), || {
            format!("case {case}: round trip changed {variant:?} N={n}")
        })?;
    }
    Ok("261/937/1639/2315; 1000 random genomes round-trip exactly".into())
}

// 9, 12 --------------------------------------------------------------------

fn desk_pd() -> &'static Result<TrainOutcome, String> {
    static OUT: OnceLock<Result<TrainOutcome, String>> = OnceLock::new();
    OUT.get_or_init(|| train_in_memory(TrainConfig::desk_pd()).map_err(e2s))
}

fn step_overshoot(
    c: &mut dyn snnpid_core::CommandSource,
    schedule: &StepSchedule,
) -> Result<snnpid_core::StepResponseMetrics, String> {
    let trace = closed_loop_run(c, schedule, &ClosedLoopConfig::default()).map_err(e2s)?;
    Ok(step_metrics(&trace, schedule).map_err(e2s)?[0])
}

fn desk_pd_evolution() -> Outcome {
    let cfg = TrainConfig::desk_pd();
    let out = desk_pd().as_ref().map_err(Clone::clone)?;
    let ratio = out.champion_validation.total / out.log.initial_best_validation;

    let schedule = StepSchedule::new(vec![(1.0, 60.0)]).map_err(e2s)?;
    let mut p_only = PidController::new(PidGains::new(cfg.gains.kp, 0.0, 0.0, cfg.gains.period));
    let base = step_overshoot(&mut p_only, &schedule)?;
    let mut snn = out.champion.decode().map_err(e2s)?;
    let m = step_overshoot(&mut snn, &schedule)?;

    let msg = format!(
        "validation {:.4} / gen-0 best {:.4} = {ratio:.3}; overshoot {:.3} m vs P-only {:.3} m; rise time {:?}",
        out.champion_validation.total, out.log.initial_best_validation, m.overshoot, base.overshoot, m.rise_time
    );
    ensure(
        ratio <= 0.5 && m.overshoot <= base.overshoot && m.rise_time.is_some(),
        || msg.clone(),
    )?;
    Ok(msg)
}

fn loss_scale() -> Outcome {
    let out = desk_pd().as_ref().map_err(Clone::clone)?;
    let test = test_dataset(&TrainConfig::desk_pd()).map_err(e2s)?;
    let c = evaluate_individual(&out.champion, &test).map_err(e2s)?;
    let msg = format!(
        "test cost {:.4} (mae {:.4}, pcc {:.4})",
        c.total, c.mae, c.pcc
    );
    ensure(c.total < 1.0, || msg.clone())?;
    Ok(msg)
}

// 10 -----------------------------------------------------------------------

fn desk_integral_evolution() -> Outcome {
    let bias = 2.0;
    let schedule = StepSchedule::new(vec![(1.0, 100.0)]).map_err(e2s)?;
    let base = TrainConfig::desk_integral();
    let limit = 0.3 * bias / base.gains.kp;
    let mut lines = Vec::new();
    let mut best = f64::INFINITY;
    for seed in base.seed..base.seed + 3 {
        let cfg = TrainConfig {
            seed,
            ..base.clone()
        };
        let out = train_in_memory(cfg.clone()).map_err(e2s)?;
        let mut combined = SummedController::new()
            .with(PidController::new(cfg.gains.pd_only()))
            .with(out.champion.decode().map_err(e2s)?);
        let run_cfg = ClosedLoopConfig {
            bias: BiasSchedule::Constant(bias),
            ..Default::default()
        };
        let trace = closed_loop_run(&mut combined, &schedule, &run_cfg).map_err(e2s)?;
        let e = metrics::tail_mean_error(&trace, 10.0).map_err(e2s)?.abs();
        best = best.min(e);
        lines.push(format!("seed {seed}: {e:.3}"));
        if e <= limit {
            break;
        }
    }
    let msg = format!(
        "|tail error| {} (limit {limit:.3}, PD alone {:.3})",
        lines.join(", "),
        bias / base.gains.kp
    );
    ensure(best <= limit, || msg.clone())?;
    Ok(msg)
}

// 11 -----------------------------------------------------------------------

fn snnpid(dir: &Path, args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_snnpid"))
        .current_dir(dir)
        .args(args)
        .output()
        .map_err(e2s)?;
    ensure(out.status.success(), || {
        format!(
            "snnpid {}: {}",
            args.join(" "),
            String::from_utf8_lossy(&out.stderr).trim()
        )
    })?;
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

/// Every file under `root`, keyed by relative path. Wall-clock columns and
/// the worker count are dropped.
fn snapshot(root: &Path) -> Result<BTreeMap<PathBuf, String>, String> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, String>) -> Result<(), String> {
        for entry in fs::read_dir(dir).map_err(e2s)? {
            let path = entry.map_err(e2s)?.path();
            if path.is_dir() {
                walk(root, &path, out)?;
                continue;
            }
            let text = fs::read_to_string(&path).map_err(e2s)?;
            let name = path.file_name().unwrap().to_string_lossy();
            let text = match name.as_ref() {
                "log.csv" => text
                    .lines()
                    .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head))
                    .collect::<Vec<_>>()
                    .join("\n"),
                "config.toml" => text
                    .lines()
                    .filter(|l| !l.starts_with("eval_workers"))
                    .collect::<Vec<_>>()
                    .join("\n"),
                _ => text,
            };
            out.insert(path.strip_prefix(root).unwrap().to_path_buf(), text);
        }
        Ok(())
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out)?;
    Ok(out)
}

fn same_tree(a: &Path, b: &Path) -> Result<usize, String> {
    let (x, y) = (snapshot(a)?, snapshot(b)?);
    ensure(x.keys().eq(y.keys()), || {
        format!("{} and {} hold different files", a.display(), b.display())
    })?;
    for (k, v) in &x {
        ensure(&y[k] == v, || {
            format!("{} differs between reruns", k.display())
        })?;
    }
    Ok(x.len())
}

/// Runs `args` twice, moving `out` aside in between, and compares.
fn twice(dir: &Path, out: &str, args: &[&str]) -> Result<usize, String> {
    let first = snnpid(dir, args)?;
    let kept = dir.join(format!("{out}.first"));
    fs::rename(dir.join(out), &kept).map_err(e2s)?;
    let second = snnpid(dir, args)?;
    ensure(first == second, || {
        format!("stdout of `{}` changed between reruns", args[0])
    })?;
    if kept.is_dir() {
        same_tree(&kept, &dir.join(out))
    } else {
        let same = fs::read(&kept).map_err(e2s)? == fs::read(dir.join(out)).map_err(e2s)?;
        ensure(same, || format!("{out} differs between reruns"))?;
        Ok(1)
    }
}

fn reproducibility() -> Outcome {
    let tmp = tempfile::tempdir().map_err(e2s)?;
    let dir = tmp.path();
    fs::write(
        dir.join("train.toml"),
        "preset = \"desk-pd\"\ngenerations = 24\ncheckpoint_every = 8\nout_dir = \"run\"\n",
    )
    .map_err(e2s)?;
    fs::write(
        dir.join("steps.csv"),
        "setpoint_m,hold_s\n1.0,30\n-0.5,30\n",
    )
    .map_err(e2s)?;

    let mut files = 0;
    snnpid(
        dir,
        &[
            "train",
            "--config",
            "train.toml",
            "--override",
            "eval_workers=1",
        ],
    )?;
    fs::rename(dir.join("run"), dir.join("run.first")).map_err(e2s)?;
    snnpid(
        dir,
        &[
            "train",
            "--config",
            "train.toml",
            "--override",
            "eval_workers=3",
        ],
    )?;
    files += same_tree(&dir.join("run.first"), &dir.join("run"))?;

    files += twice(
        dir,
        "data",
        &[
            "dataset-gen",
            "--kind",
            "pd",
            "--seed",
            "5",
            "--count",
            "3",
            "--out",
            "data",
        ],
    )?;
    files += twice(
        dir,
        "eval.csv",
        &[
            "evaluate",
            "--genome",
            "run/champion.genome",
            "--dataset",
            "data/dataset_000.csv",
            "--out",
            "eval.csv",
        ],
    )?;
    files += twice(
        dir,
        "sim.csv",
        &[
            "simulate",
            "--pd-genome",
            "run/champion.genome",
            "--pid",
            "0,0.15,0",
            "--schedule",
            "steps.csv",
            "--bias",
            "1",
            "--noise-std",
            "0.01",
            "--seed",
            "4",
            "--out",
            "sim.csv",
        ],
    )?;
    files += twice(
        dir,
        "sweep.csv",
        &[
            "inspect",
            "--genome",
            "run/champion.genome",
            "--sweep",
            "sweep.csv",
        ],
    )?;
    Ok(format!(
        "train (1 vs 3 workers), dataset-gen, evaluate, simulate, inspect: {files} files identical"
    ))
}

fn main() -> ExitCode {
    let criteria: [Check; 12] = [
        ("neuron dynamics hand traces", neuron_traces),
        ("variant degeneracy", variant_degeneracy),
        ("encoding pair symmetry", encoding_symmetry),
        ("PID decomposition", pid_decomposition),
        ("plant steady-state law", plant_law),
        ("cost function", cost_function),
        ("CMA-ES benchmarks", cmaes_benchmarks),
        ("genome layouts", genome_layouts),
        ("desk PD evolution", desk_pd_evolution),
        ("desk integral evolution", desk_integral_evolution),
        ("reproducibility", reproducibility),
        ("PD test loss below 1", loss_scale),
    ];
    let wanted: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let id = k + 1;
        if !wanted.is_empty() && !wanted.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {id:>2} {name} [{secs:.1}s]: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {id:>2} {name} [{secs:.1}s]: {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
