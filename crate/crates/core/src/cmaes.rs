//! (mu/mu_w, lambda)-CMA-ES with box constraints enforced by rejecting and
//! redrawing whole candidates.
//!
//! Strategy constants follow the usual defaults (Hansen's tutorial):
//! log-rank weights over the best `lambda / 2`, cumulative step-size
//! adaptation, rank-one plus rank-mu covariance update.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{check_len, Error, Result};
use crate::io::{hex_f64, hex_list, unhex_f64, unhex_list, write_atomic};

pub const CHECKPOINT_FORMAT: &str = "snnpid-cmaes/1";

/// Full redraws allowed per candidate before falling back to clamping.
pub const MAX_RESAMPLES: u32 = 10_000;

/// Smallest eigenvalue tolerated in the covariance matrix.
const MIN_EIGENVALUE: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_len("bounds", lower.len(), upper.len())?;
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !(l < u) {
                return Err(Error::Config(format!(
                    "bounds for dimension {i} must satisfy lower < upper, got [{l}, {u}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn unbounded(dim: usize) -> Self {
        Self {
            lower: vec![f64::NEG_INFINITY; dim],
            upper: vec![f64::INFINITY; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (l, u))| v >= l && v <= u)
    }

    fn clamp(&self, x: &mut [f64]) {
        for (v, (l, u)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*l, *u);
        }
    }
}

/// Strategy constants for a given dimension and population size.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyParams {
    pub lambda: usize,
    pub mu: usize,
    pub weights: Vec<f64>,
    pub mu_eff: f64,
    pub c_sigma: f64,
    pub d_sigma: f64,
    pub c_c: f64,
    pub c_1: f64,
    pub c_mu: f64,
    pub chi_n: f64,
}

impl StrategyParams {
    pub fn new(dim: usize, lambda: usize) -> Result<Self> {
        if lambda < 2 {
            return Err(Error::Config(format!(
                "population must be >= 2, got {lambda}"
            )));
        }
        if dim == 0 {
            return Err(Error::Config("CMA-ES needs at least one dimension".into()));
        }
        let n = dim as f64;
        let mu = lambda / 2;
        let raw: Vec<f64> = (1..=mu)
            .map(|i| (mu as f64 + 0.5).ln() - (i as f64).ln())
            .collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let mu_eff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();

        let c_sigma = (mu_eff + 2.0) / (n + mu_eff + 5.0);
        let d_sigma = 1.0 + 2.0 * (((mu_eff - 1.0) / (n + 1.0)).sqrt() - 1.0).max(0.0) + c_sigma;
        let c_c = (4.0 + mu_eff / n) / (n + 4.0 + 2.0 * mu_eff / n);
        let c_1 = 2.0 / ((n + 1.3).powi(2) + mu_eff);
        let c_mu =
            (1.0 - c_1).min(2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((n + 2.0).powi(2) + mu_eff));
        let chi_n = n.sqrt() * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
        Ok(Self {
            lambda,
            mu,
            weights,
            mu_eff,
            c_sigma,
            d_sigma,
            c_c,
            c_1,
            c_mu,
            chi_n,
        })
    }

    pub fn default_lambda(dim: usize) -> usize {
        4 + (3.0 * (dim as f64).ln()).floor() as usize
    }
}

#[derive(Debug, Clone)]
pub struct Cmaes {
    params: StrategyParams,
    bounds: Bounds,
    mean: DVector<f64>,
    sigma: f64,
    cov: DMatrix<f64>,
    p_sigma: DVector<f64>,
    p_c: DVector<f64>,
    /// Eigenvectors of `cov` (columns) and square roots of its eigenvalues.
    basis: DMatrix<f64>,
    scale: DVector<f64>,
    inv_sqrt: DMatrix<f64>,
    eigen_generation: u64,
    generation: u64,
    evaluations: u64,
    best: Option<(Vec<f64>, f64)>,
    rng: ChaCha8Rng,
    clamp_fallbacks: u64,
}

impl Cmaes {
    /// Mean drawn uniformly inside finite `bounds`, per-dimension standard
    /// deviation one tenth of the range, global step size 1.
    pub fn from_bounds(bounds: Bounds, lambda: usize, seed: u64) -> Result<Self> {
        if bounds
            .lower
            .iter()
            .chain(&bounds.upper)
            .any(|b| !b.is_finite())
        {
            return Err(Error::Config(
                "uniform initialisation needs finite bounds".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mean: Vec<f64> = bounds
            .lower
            .iter()
            .zip(&bounds.upper)
            .map(|(l, u)| l + (u - l) * rng.random::<f64>())
            .collect();
        let stds: Vec<f64> = bounds
            .lower
            .iter()
            .zip(&bounds.upper)
            .map(|(l, u)| (u - l) / 10.0)
            .collect();
        Self::with_rng(mean, 1.0, &stds, bounds, lambda, rng)
    }

    /// Explicit start: `C = diag(stds^2)`, step size `sigma`.
    pub fn new(
        mean: Vec<f64>,
        sigma: f64,
        stds: &[f64],
        bounds: Bounds,
        lambda: usize,
        seed: u64,
    ) -> Result<Self> {
        Self::with_rng(
            mean,
            sigma,
            stds,
            bounds,
            lambda,
            ChaCha8Rng::seed_from_u64(seed),
        )
    }

    fn with_rng(
        mean: Vec<f64>,
        sigma: f64,
        stds: &[f64],
        bounds: Bounds,
        lambda: usize,
        rng: ChaCha8Rng,
    ) -> Result<Self> {
        let n = mean.len();
        check_len("bounds", n, bounds.dim())?;
        check_len("initial std", n, stds.len())?;
        if !(sigma > 0.0) || stds.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::Config("step sizes must be positive".into()));
        }
        let params = StrategyParams::new(n, lambda)?;
        let cov = DMatrix::from_diagonal(&DVector::from_iterator(n, stds.iter().map(|s| s * s)));
        let mut es = Self {
            params,
            bounds,
            mean: DVector::from_vec(mean),
            sigma,
            basis: DMatrix::identity(n, n),
            scale: DVector::from_element(n, 1.0),
            inv_sqrt: DMatrix::identity(n, n),
            cov,
            p_sigma: DVector::zeros(n),
            p_c: DVector::zeros(n),
            eigen_generation: 0,
            generation: 0,
            evaluations: 0,
            best: None,
            rng,
            clamp_fallbacks: 0,
        };
        es.update_eigen();
        Ok(es)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn lambda(&self) -> usize {
        self.params.lambda
    }

    pub fn params(&self) -> &StrategyParams {
        &self.params
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn mean(&self) -> &[f64] {
        self.mean.as_slice()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    /// Best candidate seen by `tell` so far.
    pub fn best(&self) -> Option<(&[f64], f64)> {
        self.best.as_ref().map(|(x, f)| (x.as_slice(), *f))
    }

    /// Candidates that had to be clamped after exhausting redraws.
    pub fn clamp_fallbacks(&self) -> u64 {
        self.clamp_fallbacks
    }

    /// `x_i = m_i + sigma * (B v)_i`, summed in the same order as nalgebra's
    /// matrix-vector product so results match it bit for bit.
    fn coordinate(&self, i: usize, v: &[f64]) -> f64 {
        let mut y = self.basis[(i, 0)] * v[0];
        for (j, vj) in v.iter().enumerate().skip(1) {
            y += self.basis[(i, j)] * vj;
        }
        self.mean[i] + self.sigma * y
    }

    /// `false` if the redraw cap was hit and the sample was clamped.
    fn sample_one(&mut self) -> (Vec<f64>, bool) {
        let n = self.dim();
        let mut v = vec![0.0; n];
        let mut x = vec![0.0; n];
        let (lower, upper) = (&self.bounds.lower, &self.bounds.upper);
        for _ in 0..MAX_RESAMPLES {
            for (vj, dj) in v.iter_mut().zip(self.scale.iter()) {
                let z: f64 = self.rng.sample(StandardNormal);
                *vj = z * dj;
            }
            // stop at the first coordinate outside; most redraws fail early
            let inside = (0..n).all(|i| {
                x[i] = self.coordinate(i, &v);
                x[i] >= lower[i] && x[i] <= upper[i]
            });
            if inside {
                return (x, true);
            }
        }
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = self.coordinate(i, &v);
        }
        self.bounds.clamp(&mut x);
        (x, false)
    }

    /// Draws `lambda` candidates, each inside the bounds.
    pub fn ask(&mut self) -> Vec<Vec<f64>> {
        let mut clamped = 0;
        let xs = (0..self.params.lambda)
            .map(|_| {
                let (x, ok) = self.sample_one();
                clamped += usize::from(!ok);
                x
            })
            .collect();
        if clamped > 0 {
            self.clamp_fallbacks += clamped as u64;
            log::warn!(
                "CMA-ES generation {}: {clamped} of {} candidates clamped after {MAX_RESAMPLES} redraws",
                self.generation,
                self.params.lambda
            );
        }
        xs
    }

    /// Updates the distribution from evaluated candidates (lower is better).
    /// NaN fitness ranks last; ties keep candidate order.
    pub fn tell(&mut self, candidates: &[Vec<f64>], fitness: &[f64]) -> Result<()> {
        let lambda = self.params.lambda;
        let n = self.dim();
        check_len("candidates", lambda, candidates.len())?;
        check_len("fitness values", lambda, fitness.len())?;
        for c in candidates {
            check_len("candidate dimension", n, c.len())?;
        }
        let key = |f: f64| if f.is_nan() { f64::INFINITY } else { f };
        if fitness.iter().any(|f| f.is_nan()) {
            log::warn!(
                "CMA-ES generation {}: NaN fitness ranked last",
                self.generation
            );
        }
        let mut order: Vec<usize> = (0..lambda).collect();
        order.sort_by(|&a, &b| key(fitness[a]).total_cmp(&key(fitness[b])));

        self.evaluations += lambda as u64;
        let top = order[0];
        if !fitness[top].is_nan() && self.best.as_ref().is_none_or(|(_, f)| fitness[top] < *f) {
            self.best = Some((candidates[top].clone(), fitness[top]));
        }

        let p = &self.params;
        let old_mean = self.mean.clone();
        let steps: Vec<(f64, DVector<f64>)> = order
            .iter()
            .zip(&p.weights)
            .map(|(&i, &w)| {
                (
                    w,
                    (DVector::from_column_slice(&candidates[i]) - &old_mean) / self.sigma,
                )
            })
            .collect();
        let mut y_w = DVector::zeros(n);
        for (w, y) in &steps {
            y_w.axpy(*w, y, 1.0);
        }
        self.mean = &old_mean + &y_w * self.sigma;

        let cs = p.c_sigma;
        self.p_sigma *= 1.0 - cs;
        let ps_gain = (cs * (2.0 - cs) * p.mu_eff).sqrt();
        self.p_sigma += (&self.inv_sqrt * &y_w) * ps_gain;

        let g = (self.generation + 1) as f64;
        let ps_norm = self.p_sigma.norm();
        let h_sigma = ps_norm / (1.0 - (1.0 - cs).powf(2.0 * g)).sqrt()
            < (1.4 + 2.0 / (n as f64 + 1.0)) * p.chi_n;
        let cc = p.c_c;
        self.p_c *= 1.0 - cc;
        if h_sigma {
            self.p_c += &y_w * (cc * (2.0 - cc) * p.mu_eff).sqrt();
        }
        let delta = if h_sigma { 0.0 } else { cc * (2.0 - cc) };

        let (c1, cmu) = (p.c_1, p.c_mu);
        self.cov *= 1.0 - c1 - cmu + c1 * delta;
        self.cov.ger(c1, &self.p_c, &self.p_c, 1.0);
        for (w, y) in &steps {
            self.cov.ger(cmu * w, y, y, 1.0);
        }
        for i in 0..n {
            for j in 0..i {
                self.cov[(i, j)] = self.cov[(j, i)];
            }
        }

        self.sigma *= ((cs / p.d_sigma) * (ps_norm / p.chi_n - 1.0)).exp();
        if !self.sigma.is_finite() {
            return Err(Error::NonFinite {
                what: "CMA-ES step size",
                tick: None,
            });
        }
        self.generation += 1;

        let lag = (lambda as f64 / (c1 + cmu) / n as f64 / 10.0).max(1.0);
        if (self.generation - self.eigen_generation) as f64 >= lag {
            self.update_eigen();
        }
        Ok(())
    }

    fn update_eigen(&mut self) {
        let n = self.dim();
        let mut eig = SymmetricEigen::new(self.cov.clone());
        let min = eig.eigenvalues.min();
        if min < MIN_EIGENVALUE {
            let shift = MIN_EIGENVALUE - min;
            for i in 0..n {
                self.cov[(i, i)] += shift;
            }
            eig = SymmetricEigen::new(self.cov.clone());
        }
        self.basis = eig.eigenvectors;
        self.scale = eig.eigenvalues.map(|e| e.max(MIN_EIGENVALUE).sqrt());
        let inv = DMatrix::from_diagonal(&self.scale.map(|d| 1.0 / d));
        self.inv_sqrt = &self.basis * inv * self.basis.transpose();
        self.eigen_generation = self.generation;
    }

    /// Smallest eigenvalue of the current covariance matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.cov.clone()).eigenvalues.min()
    }

    /// Runs ask/tell until `max_evals` evaluations or `target` is reached.
    /// Returns the best point and value.
    pub fn minimize(
        &mut self,
        mut f: impl FnMut(&[f64]) -> f64,
        max_evals: u64,
        target: f64,
    ) -> Result<(Vec<f64>, f64)> {
        while self.evaluations + self.params.lambda as u64 <= max_evals {
            let xs = self.ask();
            let fs: Vec<f64> = xs.iter().map(|x| f(x)).collect();
            self.tell(&xs, &fs)?;
            if self.best.as_ref().is_some_and(|(_, b)| *b < target) {
                break;
            }
        }
        self.best
            .clone()
            .ok_or(Error::Empty("no generation was evaluated"))
    }

    pub fn to_text(&self) -> String {
        let n = self.dim();
        let mut s = String::with_capacity(17 * (3 * n * n + 8 * n) + 512);
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k}={v}");
        };
        kv("format", CHECKPOINT_FORMAT.into());
        kv("dim", n.to_string());
        kv("lambda", self.params.lambda.to_string());
        kv("generation", self.generation.to_string());
        kv("eigen_generation", self.eigen_generation.to_string());
        kv("evaluations", self.evaluations.to_string());
        kv("clamp_fallbacks", self.clamp_fallbacks.to_string());
        kv("sigma", hex_f64(self.sigma));
        kv("lower", hex_list(&self.bounds.lower));
        kv("upper", hex_list(&self.bounds.upper));
        kv("mean", hex_list(self.mean.as_slice()));
        kv("p_sigma", hex_list(self.p_sigma.as_slice()));
        kv("p_c", hex_list(self.p_c.as_slice()));
        kv("cov", hex_list(self.cov.as_slice()));
        kv("basis", hex_list(self.basis.as_slice()));
        kv("scale", hex_list(self.scale.as_slice()));
        match &self.best {
            Some((x, f)) => {
                kv("best_f", hex_f64(*f));
                kv("best_x", hex_list(x));
            }
            None => kv("best_f", "none".into()),
        }
        let seed: String = self
            .rng
            .get_seed()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        kv("rng_seed", seed);
        kv("rng_stream", self.rng.get_stream().to_string());
        kv("rng_word_pos", self.rng.get_word_pos().to_string());
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let entries: Vec<(usize, &str, &str)> = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                l.split_once('=')
                    .map(|(k, v)| (i + 1, k.trim(), v.trim()))
                    .ok_or_else(|| Error::parse(i + 1, "expected `key=value`"))
            })
            .collect::<Result<_>>()?;
        let get = |key: &str| {
            entries
                .iter()
                .find(|e| e.1 == key)
                .map(|&(l, _, v)| (l, v))
                .ok_or_else(|| Error::parse(entries.len(), format!("missing `{key}`")))
        };
        let num = |key: &str| -> Result<u64> {
            let (l, v) = get(key)?;
            v.parse()
                .map_err(|_| Error::parse(l, format!("`{key}`: bad integer `{v}`")))
        };
        let vec_of = |key: &str, len: usize| -> Result<Vec<f64>> {
            let (l, v) = get(key)?;
            let xs = unhex_list(v).ok_or_else(|| Error::parse(l, format!("`{key}`: bad hex")))?;
            if xs.len() != len {
                return Err(Error::parse(
                    l,
                    format!("`{key}`: expected {len} values, found {}", xs.len()),
                ));
            }
            Ok(xs)
        };
        let (fl, format) = get("format")?;
        if format != CHECKPOINT_FORMAT {
            return Err(Error::parse(
                fl,
                format!("unsupported format `{format}`, expected `{CHECKPOINT_FORMAT}`"),
            ));
        }
        let n = num("dim")? as usize;
        let lambda = num("lambda")? as usize;
        let (sl, sv) = get("sigma")?;
        let sigma = unhex_f64(sv).ok_or_else(|| Error::parse(sl, "bad sigma"))?;
        let best = match get("best_f")? {
            (_, "none") => None,
            (l, v) => Some((
                vec_of("best_x", n)?,
                unhex_f64(v).ok_or_else(|| Error::parse(l, "bad best_f"))?,
            )),
        };
        let (rl, rs) = get("rng_seed")?;
        let mut seed = [0u8; 32];
        if rs.len() != 64 {
            return Err(Error::parse(rl, "rng seed must be 64 hex digits"));
        }
        for (i, b) in seed.iter_mut().enumerate() {
            *b = u8::from_str_radix(&rs[2 * i..2 * i + 2], 16)
                .map_err(|_| Error::parse(rl, "bad rng seed"))?;
        }
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(num("rng_stream")?);
        let (wl, wv) = get("rng_word_pos")?;
        rng.set_word_pos(
            wv.parse::<u128>()
                .map_err(|_| Error::parse(wl, "bad rng word position"))?,
        );

        let basis = DMatrix::from_vec(n, n, vec_of("basis", n * n)?);
        let scale = DVector::from_vec(vec_of("scale", n)?);
        let inv = DMatrix::from_diagonal(&scale.map(|d| 1.0 / d));
        let inv_sqrt = &basis * inv * basis.transpose();
        Ok(Self {
            params: StrategyParams::new(n, lambda)?,
            bounds: Bounds {
                lower: vec_of("lower", n)?,
                upper: vec_of("upper", n)?,
            },
            mean: DVector::from_vec(vec_of("mean", n)?),
            sigma,
            cov: DMatrix::from_vec(n, n, vec_of("cov", n * n)?),
            p_sigma: DVector::from_vec(vec_of("p_sigma", n)?),
            p_c: DVector::from_vec(vec_of("p_c", n)?),
            basis,
            scale,
            inv_sqrt,
            eigen_generation: num("eigen_generation")?,
            generation: num("generation")?,
            evaluations: num("evaluations")?,
            clamp_fallbacks: num("clamp_fallbacks")?,
            best,
            rng,
        })
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
