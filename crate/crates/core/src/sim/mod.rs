//! Monte Carlo frameworks relating inconsistency indices to estimation error.
//!
//! Three frameworks are provided:
//! - [`run_mse_sf`]: one disturbed entry whose error grows as `eps^k`;
//! - [`run_nee_sf`]: equal errors applied cumulatively to more and more entries;
//! - [`run_msobe_sf`]: many small errors plus an optional big one, rounded
//!   onto the Saaty scale, producing a record database.
//!
//! Every unit of work (run, setup, record) draws from its own generator,
//! keyed by the master seed and the unit's index, so results do not depend
//! on thread count or scheduling.

mod database;
mod error_model;
mod mse;
mod msobe;
mod nee;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indices::{compute_gi, compute_ki_ati, si_from_lambda};
use crate::loss::ErrorPair;
use crate::pcm::{Pcm, PriorityVector};
use crate::prioritization::{gm_estimate, rev, Method};
use crate::stats::{pearson, spearman};

pub use database::{read_database, write_database, DatabaseFormat, CSV_HEADER};
pub use error_model::{BigErrorModel, ErrorModel, Sampler, MIN_SUPPORT_MASS, SMALL_ERROR_SUPPORT};
pub use mse::{run_mse_sf, MseConfig};
pub use msobe::{run_msobe_sf, Layout, MsobeConfig, MsobeOutput};
pub use nee::{run_nee_sf, NeeConfig};

/// Which inconsistency index a column holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexKind {
    Si,
    Gi,
    Ki,
    Ati,
}

impl IndexKind {
    pub const ALL: [IndexKind; 4] = [IndexKind::Si, IndexKind::Gi, IndexKind::Ki, IndexKind::Ati];

    pub fn name(self) -> &'static str {
        match self {
            IndexKind::Si => "si",
            IndexKind::Gi => "gi",
            IndexKind::Ki => "ki",
            IndexKind::Ati => "ati",
        }
    }
}

impl std::str::FromStr for IndexKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        IndexKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown index {s:?} (si, gi, ki, ati)")))
    }
}

/// Loss function of an estimation error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Ae,
    Re,
}

impl LossKind {
    pub fn name(self) -> &'static str {
        match self {
            LossKind::Ae => "ae",
            LossKind::Re => "re",
        }
    }
}

/// One estimation-error column: a loss under a prioritization method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    AeRev,
    ReRev,
    AeGm,
    ReGm,
}

impl ErrorKind {
    pub const ALL: [ErrorKind; 4] = [ErrorKind::AeRev, ErrorKind::ReRev, ErrorKind::AeGm, ErrorKind::ReGm];

    pub fn name(self) -> &'static str {
        match self {
            ErrorKind::AeRev => "ae_rev",
            ErrorKind::ReRev => "re_rev",
            ErrorKind::AeGm => "ae_gm",
            ErrorKind::ReGm => "re_gm",
        }
    }

    pub fn method(self) -> Method {
        match self {
            ErrorKind::AeRev | ErrorKind::ReRev => Method::Rev,
            ErrorKind::AeGm | ErrorKind::ReGm => Method::Gm,
        }
    }

    pub fn loss(self) -> LossKind {
        match self {
            ErrorKind::AeRev | ErrorKind::AeGm => LossKind::Ae,
            ErrorKind::ReRev | ErrorKind::ReGm => LossKind::Re,
        }
    }
}

impl std::str::FromStr for ErrorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ErrorKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown error {s:?} (ae_rev, re_rev, ae_gm, re_gm)")))
    }
}

/// Indices and estimation errors of one disturbed matrix against its true vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub si: f64,
    pub gi: f64,
    pub ki: f64,
    pub ati: f64,
    pub rev: ErrorPair,
    pub gm: ErrorPair,
}

impl Evaluation {
    pub fn index(&self, kind: IndexKind) -> f64 {
        match kind {
            IndexKind::Si => self.si,
            IndexKind::Gi => self.gi,
            IndexKind::Ki => self.ki,
            IndexKind::Ati => self.ati,
        }
    }

    pub fn error(&self, kind: ErrorKind) -> f64 {
        match kind {
            ErrorKind::AeRev => self.rev.ae,
            ErrorKind::ReRev => self.rev.re,
            ErrorKind::AeGm => self.gm.ae,
            ErrorKind::ReGm => self.gm.re,
        }
    }
}

/// Computes every tracked quantity for `pcm` judged against `truth`.
/// SI is floored at zero; the eigenvalue of a reciprocal matrix is never
/// below `n`, so negative values are rounding noise.
pub fn evaluate(pcm: &Pcm, truth: &PriorityVector) -> Result<Evaluation> {
    let eig = rev(pcm)?;
    let gm = gm_estimate(pcm);
    let (ki, ati) = compute_ki_ati(pcm);
    let v = truth.as_slice();
    Ok(Evaluation {
        si: si_from_lambda(eig.lambda_max, pcm.order()).max(0.0),
        gi: compute_gi(pcm),
        ki,
        ati,
        rev: ErrorPair::between(v, eig.weights.as_slice())?,
        gm: ErrorPair::between(v, gm.as_slice())?,
    })
}

/// One row of the simulation database.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRecord {
    pub n: usize,
    pub vector_id: u64,
    pub perturbation_id: u64,
    pub distribution: String,
    pub big_error: bool,
    pub si: f64,
    pub gi: f64,
    pub ki: f64,
    pub ati: f64,
    pub ae_rev: f64,
    pub re_rev: f64,
    pub ae_gm: f64,
    pub re_gm: f64,
    pub seed: u64,
}

impl SimRecord {
    pub fn index(&self, kind: IndexKind) -> f64 {
        match kind {
            IndexKind::Si => self.si,
            IndexKind::Gi => self.gi,
            IndexKind::Ki => self.ki,
            IndexKind::Ati => self.ati,
        }
    }

    pub fn error(&self, kind: ErrorKind) -> f64 {
        match kind {
            ErrorKind::AeRev => self.ae_rev,
            ErrorKind::ReRev => self.re_rev,
            ErrorKind::AeGm => self.ae_gm,
            ErrorKind::ReGm => self.re_gm,
        }
    }
}

/// Stream tags keep seeds for different purposes apart.
#[derive(Debug, Clone, Copy)]
#[repr(u64)]
pub(crate) enum Stream {
    Run = 1,
    Vector = 2,
    Setup = 3,
    Record = 4,
}

/// Seed for unit `index` of `stream` under `master`.
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master.to_le_bytes());
    key[8..16].copy_from_slice(&stream.to_le_bytes());
    key[16..24].copy_from_slice(&index.to_le_bytes());
    ChaCha8Rng::from_seed(key).next_u64()
}

pub(crate) fn unit_rng(master: u64, stream: Stream, index: u64) -> (u64, ChaCha8Rng) {
    let seed = derive_seed(master, stream as u64, index);
    (seed, ChaCha8Rng::seed_from_u64(seed))
}

/// A priority vector uniform on the open simplex: normalized standard
/// exponential draws.
pub fn random_pv<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<PriorityVector> {
    if n < crate::pcm::MIN_ORDER {
        return Err(Error::InvalidArgument(format!("order {n} is below 3")));
    }
    loop {
        let draws: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        if draws.iter().all(|&x| x > 0.0) {
            return PriorityVector::normalized(draws);
        }
    }
}

/// Runs `f` on a pool of `threads` workers (0 = rayon's default).
pub(crate) fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if threads == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot build thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Quantities tracked along an MSE or NEE sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// Judgment-error magnitude (MSE) or number of errors (NEE).
    Driver,
    Index(IndexKind),
    Error(ErrorKind),
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::Driver => "driver",
            Quantity::Index(k) => k.name(),
            Quantity::Error(k) => k.name(),
        }
    }

    /// The eight series recorded along each sweep.
    pub fn series() -> Vec<Quantity> {
        IndexKind::ALL.into_iter().map(Quantity::Index).chain(ErrorKind::ALL.into_iter().map(Quantity::Error)).collect()
    }

    /// Correlation targets: the driver and the four estimation errors.
    pub fn targets() -> Vec<Quantity> {
        std::iter::once(Quantity::Driver).chain(ErrorKind::ALL.into_iter().map(Quantity::Error)).collect()
    }
}

/// Mean correlations of one series with one target across runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationCell {
    pub series: Quantity,
    pub target: Quantity,
    pub mean_spearman: f64,
    pub mean_pearson: f64,
    pub min_spearman: f64,
    pub max_spearman: f64,
    /// Runs where both coefficients were defined (non-constant series).
    pub defined_runs: usize,
}

/// Framework-level summary: correlation grid plus run accounting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSummary {
    pub framework: String,
    pub n: usize,
    pub runs: usize,
    /// Runs dropped because the eigenvector iteration failed.
    pub skipped: usize,
    pub cells: Vec<CorrelationCell>,
}

impl CorrelationSummary {
    pub fn cell(&self, series: Quantity, target: Quantity) -> Option<&CorrelationCell> {
        self.cells.iter().find(|c| c.series == series && c.target == target)
    }

    pub fn spearman(&self, series: Quantity, target: Quantity) -> f64 {
        self.cell(series, target).map_or(f64::NAN, |c| c.mean_spearman)
    }

    pub fn pearson(&self, series: Quantity, target: Quantity) -> f64 {
        self.cell(series, target).map_or(f64::NAN, |c| c.mean_pearson)
    }
}

/// Sweep output of one run: the driver and one evaluation per step.
pub(crate) struct Sweep {
    pub driver: Vec<f64>,
    pub steps: Vec<Evaluation>,
}

impl Sweep {
    fn column(&self, q: Quantity) -> Vec<f64> {
        let raw: Vec<f64> = match q {
            Quantity::Driver => self.driver.clone(),
            Quantity::Index(k) => self.steps.iter().map(|e| e.index(k)).collect(),
            Quantity::Error(k) => self.steps.iter().map(|e| e.error(k)).collect(),
        };
        raw.into_iter().map(snap).collect()
    }
}

/// Rounds to 12 significant digits so values that are equal in exact
/// arithmetic (e.g. the same triad inconsistency reached through different
/// entries) tie in the rank correlation instead of being ordered by noise.
fn snap(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let scale = 10f64.powi(11 - x.abs().log10().floor() as i32);
    (x * scale).round() / scale
}

type RunCorrelations = Vec<Option<(f64, f64)>>;

fn correlate_sweep(sweep: &Sweep, pairs: &[(Quantity, Quantity)]) -> RunCorrelations {
    pairs
        .iter()
        .map(|&(s, t)| {
            let (x, y) = (sweep.column(s), sweep.column(t));
            match (spearman(&x, &y), pearson(&x, &y)) {
                (Ok(rho), Ok(r)) => Some((rho, r)),
                _ => None,
            }
        })
        .collect()
}

/// Folds per-run sweeps (in run order) into a summary.
pub(crate) fn summarize_sweeps(framework: &str, n: usize, runs: Vec<Result<Sweep>>) -> Result<CorrelationSummary> {
    let pairs: Vec<(Quantity, Quantity)> = Quantity::series()
        .into_iter()
        .flat_map(|s| Quantity::targets().into_iter().map(move |t| (s, t)))
        .filter(|(s, t)| s != t)
        .collect();
    let total = runs.len();
    let mut skipped = 0;
    let mut sums = vec![(0.0, 0.0, f64::INFINITY, f64::NEG_INFINITY, 0usize); pairs.len()];
    for run in runs {
        let sweep = match run {
            Ok(s) => s,
            Err(Error::NonConvergence { .. }) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        for (acc, c) in sums.iter_mut().zip(correlate_sweep(&sweep, &pairs)) {
            if let Some((rho, r)) = c {
                acc.0 += rho;
                acc.1 += r;
                acc.2 = acc.2.min(rho);
                acc.3 = acc.3.max(rho);
                acc.4 += 1;
            }
        }
    }
    let cells = pairs
        .into_iter()
        .zip(sums)
        .map(|((series, target), (rho, r, lo, hi, k))| {
            let k_f = k as f64;
            CorrelationCell {
                series,
                target,
                mean_spearman: if k > 0 { rho / k_f } else { f64::NAN },
                mean_pearson: if k > 0 { r / k_f } else { f64::NAN },
                min_spearman: lo,
                max_spearman: hi,
                defined_runs: k,
            }
        })
        .collect();
    Ok(CorrelationSummary { framework: framework.to_string(), n, runs: total, skipped, cells })
}
