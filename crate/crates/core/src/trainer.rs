//! Evolution driver: sample a training dataset, ask CMA-ES for a population,
//! score it in parallel, tell, track the validation champion, checkpoint.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cmaes::{Bounds, Cmaes};
use crate::dataset::{self, derive_seed, make_corpus, Dataset, DatasetConfig};
use crate::error::{Error, Result};
use crate::genome::{Genome, GenomeLayout};
use crate::io::{
    hex_f64, hex_list, sha256_hex, unhex_f64, unhex_list, write_atomic, write_dir_atomic,
};
use crate::network::{ControllerKind, HiddenVariant, ThresholdWiring};
use crate::objective::{cost, CostBreakdown};
use crate::plant::PidGains;

const STATE_FORMAT: &str = "snnpid-trainer/1";

/// Sub-seed streams derived from the run seed.
pub mod streams {
    pub const CORPUS: u64 = 1;
    pub const VALIDATION: u64 = 2;
    pub const TEST: u64 = 3;
    pub const OPTIMIZER: u64 = 4;
    pub const SAMPLER: u64 = 5;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub kind: ControllerKind,
    pub variant: HiddenVariant,
    pub n_pairs: usize,
    #[serde(default)]
    pub threshold_wiring: ThresholdWiring,
    pub lambda: usize,
    pub generations: u64,
    pub corpus_size: usize,
    pub seed: u64,
    pub gains: PidGains,
    /// Evaluation threads; 0 uses every core.
    #[serde(default)]
    pub eval_workers: usize,
    /// Checkpoint period in generations; 0 writes only the final one.
    #[serde(default)]
    pub checkpoint_every: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("run")
}

impl TrainConfig {
    /// Small PD run that finishes in seconds.
    pub fn desk_pd() -> Self {
        Self {
            kind: ControllerKind::Pd,
            variant: HiddenVariant::Lif,
            n_pairs: 8,
            threshold_wiring: ThresholdWiring::default(),
            lambda: 16,
            generations: 300,
            corpus_size: 20,
            seed: 3,
            gains: PidGains::reference(),
            eval_workers: 0,
            checkpoint_every: 100,
            out_dir: default_out_dir(),
        }
    }

    pub fn desk_integral() -> Self {
        Self {
            kind: ControllerKind::Integral,
            variant: HiddenVariant::IwtaLif,
            generations: 500,
            corpus_size: 100,
            seed: 1,
            ..Self::desk_pd()
        }
    }

    /// Full-size networks, population 50, 50 000 generations.
    pub fn full_scale(kind: ControllerKind, variant: HiddenVariant) -> Self {
        Self {
            kind,
            variant,
            n_pairs: crate::network::DEFAULT_PAIRS,
            lambda: 50,
            generations: 50_000,
            corpus_size: 100,
            checkpoint_every: 1000,
            ..Self::desk_pd()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "desk-pd" => Ok(Self::desk_pd()),
            "desk-integral" => Ok(Self::desk_integral()),
            "full-pd" => Ok(Self::full_scale(ControllerKind::Pd, HiddenVariant::Lif)),
            "full-integral" => Ok(Self::full_scale(
                ControllerKind::Integral,
                HiddenVariant::IwtaLif,
            )),
            _ => Err(Error::Config(format!("unknown preset `{name}`"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.generations == 0 {
            return Err(Error::Config("generations must be >= 1".into()));
        }
        if self.lambda < 2 {
            return Err(Error::Config("lambda must be >= 2".into()));
        }
        if self.corpus_size == 0 {
            return Err(Error::Config("corpus_size must be >= 1".into()));
        }
        self.gains.validate()
    }

    pub fn layout(&self) -> Result<GenomeLayout> {
        GenomeLayout::new(self.variant, self.kind, self.n_pairs, self.threshold_wiring)
    }

    pub fn dataset_config(&self) -> DatasetConfig {
        DatasetConfig::for_kind(self.kind, self.gains)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file, applying `key=value` overrides (dotted keys reach
    /// into tables, e.g. `gains.kd=3`). A file containing only `preset = "..."`
    /// plus overrides starts from that preset.
    pub fn load_with_overrides(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_with_overrides(&text, overrides)
    }

    pub fn parse_with_overrides(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(preset) = table.remove("preset") {
            let name = preset
                .as_str()
                .ok_or_else(|| Error::Config("`preset` must be a string".into()))?;
            let mut base: toml::Table =
                toml::from_str(&Self::preset(name)?.to_toml()).expect("preset round-trips");
            merge(&mut base, table);
            table = base;
        }
        for ov in overrides {
            let (key, raw) = ov
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override `{ov}` is not key=value")))?;
            set_dotted(&mut table, key.trim(), parse_value(raw.trim()))?;
        }
        let cfg: Self = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Hash of the settings that determine the run's results.
    pub fn fingerprint(&self) -> String {
        let mut c = self.clone();
        c.eval_workers = 0;
        c.out_dir = PathBuf::new();
        sha256_hex(c.to_toml().as_bytes())
    }
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn parse_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    toml::from_str::<toml::Table>(&doc)
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

fn set_dotted(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    match key.split_once('.') {
        None => {
            table.insert(key.to_string(), value);
            Ok(())
        }
        Some((head, rest)) => {
            let entry = table
                .entry(head.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
            match entry {
                toml::Value::Table(t) => set_dotted(t, rest, value),
                _ => Err(Error::Config(format!("`{head}` is not a table"))),
            }
        }
    }
}

/// Decode, reset, run over the dataset's errors, score against its targets.
pub fn evaluate_individual(genome: &Genome, data: &Dataset) -> Result<CostBreakdown> {
    let mut controller = genome.decode()?;
    let out = controller.forward_fresh(&data.errors)?;
    cost(&out, &data.targets)
}

fn evaluate_values(layout: &GenomeLayout, values: &[f64], data: &Dataset) -> Result<CostBreakdown> {
    evaluate_individual(&Genome::new(layout.clone(), values.to_vec())?, data)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRecord {
    pub generation: u64,
    pub best: f64,
    pub mean: f64,
    pub worst: f64,
    pub dataset_id: usize,
    pub seconds: f64,
    /// Validation cost of this generation's best candidate.
    pub candidate_validation: f64,
    /// Best validation cost seen up to and including this generation.
    pub champion_validation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChampionRecord {
    pub generation: u64,
    pub validation_cost: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainLog {
    pub records: Vec<GenerationRecord>,
    /// Every genome that became champion, in order.
    pub champion_history: Vec<ChampionRecord>,
    /// Lowest validation cost among the generation-0 population.
    pub initial_best_validation: f64,
}

impl TrainLog {
    pub const CSV_HEADER: &'static str = "generation,best,mean,worst,dataset_id,seconds";

    pub fn champion(&self) -> Option<&ChampionRecord> {
        self.champion_history.last()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(64 * self.records.len() + 64);
        let _ = writeln!(s, "{}", Self::CSV_HEADER);
        for r in &self.records {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{:.3}",
                r.generation, r.best, r.mean, r.worst, r.dataset_id, r.seconds
            );
        }
        s
    }

    pub fn validation_csv(&self) -> String {
        let mut s = String::from("generation,candidate_validation,champion_validation\n");
        for r in &self.records {
            let _ = writeln!(
                s,
                "{},{},{}",
                r.generation, r.candidate_validation, r.champion_validation
            );
        }
        s
    }
}

/// Re-scores every logged champion on `validation` and returns the best;
/// ties go to the earliest generation.
pub fn select_champion(
    log: &TrainLog,
    layout: &GenomeLayout,
    validation: &Dataset,
) -> Result<Genome> {
    let mut best: Option<(f64, &ChampionRecord)> = None;
    for rec in &log.champion_history {
        let c = evaluate_values(layout, &rec.values, validation)?.total;
        if best.is_none_or(|(b, _)| c < b) {
            best = Some((c, rec));
        }
    }
    let (_, rec) = best.ok_or(Error::Empty("training log has no champions"))?;
    Genome::new(layout.clone(), rec.values.clone())
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub champion: Genome,
    pub champion_validation: CostBreakdown,
    pub log: TrainLog,
    pub validation: Dataset,
}

pub struct Trainer {
    config: TrainConfig,
    layout: GenomeLayout,
    corpus: Vec<Dataset>,
    validation: Dataset,
    optimizer: Cmaes,
    sampler: ChaCha8Rng,
    log: TrainLog,
    pool: rayon::ThreadPool,
}

impl Trainer {
    pub fn new(config: TrainConfig) -> Result<Self> {
        config.validate()?;
        let layout = config.layout()?;
        let dcfg = config.dataset_config();
        let corpus = make_corpus(
            derive_seed(config.seed, streams::CORPUS),
            config.corpus_size,
            &dcfg,
        )?;
        let validation = dataset::generate(derive_seed(config.seed, streams::VALIDATION), &dcfg)?;
        let bounds = Bounds::new(layout.lower_bounds(), layout.upper_bounds())?;
        let optimizer = Cmaes::from_bounds(
            bounds,
            config.lambda,
            derive_seed(config.seed, streams::OPTIMIZER),
        )?;
        let sampler = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, streams::SAMPLER));
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.eval_workers)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(Self {
            config,
            layout,
            corpus,
            validation,
            optimizer,
            sampler,
            log: TrainLog::default(),
            pool,
        })
    }

    /// Continues from the newest complete checkpoint in `config.out_dir`, or
    /// starts fresh when there is none.
    pub fn resume_or_new(config: TrainConfig) -> Result<Self> {
        let mut t = Self::new(config)?;
        if let Some((k, dir)) = latest_checkpoint(&t.config.out_dir)? {
            let stored = fs::read_to_string(t.config.out_dir.join("config.toml")).ok();
            if let Some(stored) = stored {
                let prev = TrainConfig::from_toml(&stored)?;
                if prev.fingerprint() != t.config.fingerprint() {
                    return Err(Error::Config(format!(
                        "{} holds a run with a different configuration",
                        t.config.out_dir.display()
                    )));
                }
            }
            t.optimizer = Cmaes::load(dir.join("optimizer.ckpt"))?;
            t.load_state(&dir.join("trainer.state"))?;
            if t.log.records.len() as u64 != k {
                return Err(Error::Config(format!(
                    "checkpoint gen_{k} holds {} generations",
                    t.log.records.len()
                )));
            }
            let seconds = read_logged_seconds(&t.config.out_dir.join("log.csv"));
            for (r, s) in t.log.records.iter_mut().zip(seconds) {
                r.seconds = s;
            }
            log::info!("resuming {} at generation {k}", t.config.out_dir.display());
        }
        Ok(t)
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn layout(&self) -> &GenomeLayout {
        &self.layout
    }

    pub fn corpus(&self) -> &[Dataset] {
        &self.corpus
    }

    pub fn validation(&self) -> &Dataset {
        &self.validation
    }

    pub fn log(&self) -> &TrainLog {
        &self.log
    }

    pub fn optimizer(&self) -> &Cmaes {
        &self.optimizer
    }

    pub fn completed(&self) -> u64 {
        self.log.records.len() as u64
    }

    fn score_all(&self, candidates: &[Vec<f64>], data: &Dataset) -> Result<Vec<f64>> {
        let layout = &self.layout;
        self.pool.install(|| {
            candidates
                .par_iter()
                .map(|c| evaluate_values(layout, c, data).map(|b| b.total))
                .collect()
        })
    }

    /// Runs one generation and returns its log record.
    pub fn step(&mut self) -> Result<&GenerationRecord> {
        let started = Instant::now();
        let generation = self.completed();
        let dataset_id = self.sampler.random_range(0..self.corpus.len());
        let candidates = self.optimizer.ask();
        let fitness = self.score_all(&candidates, &self.corpus[dataset_id])?;

        let ranked = |f: f64| if f.is_nan() { f64::INFINITY } else { f };
        let best_idx = (0..fitness.len())
            .min_by(|&a, &b| ranked(fitness[a]).total_cmp(&ranked(fitness[b])))
            .expect("population is non-empty");

        let candidate_validation;
        if generation == 0 {
            let vals = self.score_all(&candidates, &self.validation)?;
            let (i0, v0) = vals
                .iter()
                .enumerate()
                .min_by(|a, b| ranked(*a.1).total_cmp(&ranked(*b.1)))
                .map(|(i, v)| (i, *v))
                .expect("population is non-empty");
            self.log.initial_best_validation = v0;
            self.log.champion_history.push(ChampionRecord {
                generation,
                validation_cost: v0,
                values: candidates[i0].clone(),
            });
            candidate_validation = vals[best_idx];
        } else {
            candidate_validation =
                evaluate_values(&self.layout, &candidates[best_idx], &self.validation)?.total;
        }
        let champion_cost = self
            .log
            .champion()
            .map_or(f64::INFINITY, |c| c.validation_cost);
        if candidate_validation < champion_cost {
            self.log.champion_history.push(ChampionRecord {
                generation,
                validation_cost: candidate_validation,
                values: candidates[best_idx].clone(),
            });
        }

        self.optimizer.tell(&candidates, &fitness)?;

        let finite: Vec<f64> = fitness.iter().copied().filter(|f| f.is_finite()).collect();
        let mean = finite.iter().sum::<f64>() / finite.len().max(1) as f64;
        let worst = fitness.iter().copied().fold(f64::NEG_INFINITY, |a, b| {
            if b.is_nan() {
                f64::INFINITY
            } else {
                a.max(b)
            }
        });
        self.log.records.push(GenerationRecord {
            generation,
            best: fitness[best_idx],
            mean,
            worst,
            dataset_id,
            seconds: started.elapsed().as_secs_f64(),
            candidate_validation,
            champion_validation: self
                .log
                .champion()
                .map_or(f64::INFINITY, |c| c.validation_cost),
        });
        Ok(self.log.records.last().expect("just pushed"))
    }

    /// Trains to `config.generations`, writing checkpoints and logs when
    /// `persist` is set.
    pub fn run(&mut self, persist: bool) -> Result<TrainOutcome> {
        if persist {
            self.write_static_files()?;
        }
        let every = self.config.checkpoint_every;
        while self.completed() < self.config.generations {
            let rec = self.step()?;
            log::debug!(
                "gen {} best {:.4} mean {:.4} val {:.4}",
                rec.generation,
                rec.best,
                rec.mean,
                rec.champion_validation
            );
            let k = self.completed();
            if persist && (k == self.config.generations || (every > 0 && k.is_multiple_of(every))) {
                self.write_checkpoint()?;
            }
        }
        let champion = select_champion(&self.log, &self.layout, &self.validation)?;
        let champion_validation = evaluate_individual(&champion, &self.validation)?;
        if persist {
            champion.save(self.config.out_dir.join("champion.genome"))?;
        }
        Ok(TrainOutcome {
            champion,
            champion_validation,
            log: self.log.clone(),
            validation: self.validation.clone(),
        })
    }

    fn write_static_files(&self) -> Result<()> {
        let dir = &self.config.out_dir;
        write_atomic(&dir.join("config.toml"), self.config.to_toml().as_bytes())?;
        dataset::save(&self.validation, dir.join("validation.csv"))?;
        write_atomic(&dir.join("provenance.txt"), self.provenance().as_bytes())
    }

    pub fn provenance(&self) -> String {
        let c = &self.config;
        let mut s = String::new();
        let _ = writeln!(s, "tool=snnpid");
        let _ = writeln!(s, "version={}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(s, "config_hash={}", c.fingerprint());
        let _ = writeln!(s, "seed={}", c.seed);
        let _ = writeln!(s, "corpus_seed={}", derive_seed(c.seed, streams::CORPUS));
        let _ = writeln!(
            s,
            "validation_seed={}",
            derive_seed(c.seed, streams::VALIDATION)
        );
        let _ = writeln!(
            s,
            "optimizer_seed={}",
            derive_seed(c.seed, streams::OPTIMIZER)
        );
        let _ = writeln!(s, "sampler_seed={}", derive_seed(c.seed, streams::SAMPLER));
        let _ = writeln!(s, "genome_length={}", self.layout.len());
        s
    }

    fn write_checkpoint(&self) -> Result<()> {
        let dir = &self.config.out_dir;
        let k = self.completed();
        let champion = self.log.champion().ok_or(Error::Empty("no champion yet"))?;
        let genome = Genome::new(self.layout.clone(), champion.values.clone())?;
        write_dir_atomic(&dir.join(format!("gen_{k}")), |tmp| {
            self.optimizer.save(tmp.join("optimizer.ckpt"))?;
            genome.save(tmp.join("champion.genome"))?;
            write_atomic(&tmp.join("trainer.state"), self.state_text().as_bytes())
        })?;
        write_atomic(&dir.join("log.csv"), self.log.to_csv().as_bytes())?;
        write_atomic(
            &dir.join("validation_log.csv"),
            self.log.validation_csv().as_bytes(),
        )
    }

    fn state_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "format={STATE_FORMAT}");
        let _ = writeln!(s, "completed={}", self.completed());
        let seed: String = self
            .sampler
            .get_seed()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        let _ = writeln!(s, "sampler_seed={seed}");
        let _ = writeln!(s, "sampler_stream={}", self.sampler.get_stream());
        let _ = writeln!(s, "sampler_word_pos={}", self.sampler.get_word_pos());
        let _ = writeln!(
            s,
            "initial_best_validation={}",
            hex_f64(self.log.initial_best_validation)
        );
        for r in &self.log.records {
            let _ = writeln!(
                s,
                "record={} {} {} {} {} {} {}",
                r.generation,
                hex_f64(r.best),
                hex_f64(r.mean),
                hex_f64(r.worst),
                r.dataset_id,
                hex_f64(r.candidate_validation),
                hex_f64(r.champion_validation)
            );
        }
        for c in &self.log.champion_history {
            let _ = writeln!(
                s,
                "champion={} {} {}",
                c.generation,
                hex_f64(c.validation_cost),
                hex_list(&c.values)
            );
        }
        s
    }

    fn load_state(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.parse_state(&text).map_err(|e| e.with_path(path))
    }

    fn parse_state(&mut self, text: &str) -> Result<()> {
        let mut log = TrainLog::default();
        let mut seed = None;
        let mut stream = 0u64;
        let mut word_pos = 0u128;
        let mut format_ok = false;
        for (idx, line) in text.lines().enumerate() {
            let ln = idx + 1;
            let Some((k, v)) = line.split_once('=') else {
                continue;
            };
            let bad = |what: &str| Error::parse(ln, format!("bad {what}"));
            match k {
                "format" => format_ok = v == STATE_FORMAT,
                "sampler_seed" => {
                    let mut s = [0u8; 32];
                    if v.len() != 64 {
                        return Err(bad("sampler seed"));
                    }
                    for (i, b) in s.iter_mut().enumerate() {
                        *b = u8::from_str_radix(&v[2 * i..2 * i + 2], 16)
                            .map_err(|_| bad("sampler seed"))?;
                    }
                    seed = Some(s);
                }
                "sampler_stream" => stream = v.parse().map_err(|_| bad("stream"))?,
                "sampler_word_pos" => word_pos = v.parse().map_err(|_| bad("word position"))?,
                "initial_best_validation" => {
                    log.initial_best_validation = unhex_f64(v).ok_or_else(|| bad("float"))?
                }
                "record" => {
                    let f: Vec<&str> = v.split_whitespace().collect();
                    if f.len() != 7 {
                        return Err(bad("record"));
                    }
                    let h = |s: &str| unhex_f64(s).ok_or_else(|| bad("record float"));
                    log.records.push(GenerationRecord {
                        generation: f[0].parse().map_err(|_| bad("generation"))?,
                        best: h(f[1])?,
                        mean: h(f[2])?,
                        worst: h(f[3])?,
                        dataset_id: f[4].parse().map_err(|_| bad("dataset id"))?,
                        seconds: 0.0,
                        candidate_validation: h(f[5])?,
                        champion_validation: h(f[6])?,
                    });
                }
                "champion" => {
                    let mut parts = v.splitn(3, ' ');
                    let generation = parts
                        .next()
                        .and_then(|g| g.parse().ok())
                        .ok_or_else(|| bad("champion generation"))?;
                    let validation_cost = parts
                        .next()
                        .and_then(unhex_f64)
                        .ok_or_else(|| bad("champion cost"))?;
                    let values = parts
                        .next()
                        .and_then(unhex_list)
                        .ok_or_else(|| bad("champion values"))?;
                    log.champion_history.push(ChampionRecord {
                        generation,
                        validation_cost,
                        values,
                    });
                }
                _ => {}
            }
        }
        if !format_ok {
            return Err(Error::parse(1, format!("expected format `{STATE_FORMAT}`")));
        }
        let seed = seed.ok_or_else(|| Error::parse(1, "missing sampler_seed"))?;
        let mut sampler = ChaCha8Rng::from_seed(seed);
        sampler.set_stream(stream);
        sampler.set_word_pos(word_pos);
        self.sampler = sampler;
        self.log = log;
        Ok(())
    }
}

fn latest_checkpoint(dir: &Path) -> Result<Option<(u64, PathBuf)>> {
    let Ok(entries) = fs::read_dir(dir) else {
        return Ok(None);
    };
    let mut best: Option<(u64, PathBuf)> = None;
    for e in entries {
        let e = e.map_err(|err| Error::io(dir, err))?;
        let name = e.file_name();
        let Some(k) = name
            .to_str()
            .and_then(|n| n.strip_prefix("gen_"))
            .and_then(|n| n.parse::<u64>().ok())
        else {
            continue;
        };
        let p = e.path();
        if p.join("optimizer.ckpt").is_file()
            && p.join("trainer.state").is_file()
            && best.as_ref().is_none_or(|(b, _)| k > *b)
        {
            best = Some((k, p));
        }
    }
    Ok(best)
}

fn read_logged_seconds(path: &Path) -> Vec<f64> {
    fs::read_to_string(path)
        .map(|t| {
            t.lines()
                .skip(1)
                .map(|l| {
                    l.rsplit(',')
                        .next()
                        .and_then(|s| s.parse().ok())
                        .unwrap_or(0.0)
                })
                .collect()
        })
        .unwrap_or_default()
}

/// Trains with checkpoints under `config.out_dir`, resuming if possible.
pub fn train(config: TrainConfig) -> Result<TrainOutcome> {
    Trainer::resume_or_new(config)?.run(true)
}

/// Trains entirely in memory.
pub fn train_in_memory(config: TrainConfig) -> Result<TrainOutcome> {
    Trainer::new(config)?.run(false)
}

/// A dataset drawn from the run's held-out test stream.
pub fn test_dataset(config: &TrainConfig) -> Result<Dataset> {
    dataset::generate(
        derive_seed(config.seed, streams::TEST),
        &config.dataset_config(),
    )
}
