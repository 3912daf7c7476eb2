//! Monte Carlo orchestration: multi-start runs, fixed-point clustering,
//! SNR sweeps and the zero-forcing gap study.
//!
//! Every task draws from its own RNG stream derived from a master seed, and
//! results are collected in task order, so the worker count never changes
//! the output.

pub mod persist;
pub mod report;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alignment::{self, IiaOptions};
use crate::channel::{Beamformers, ChannelSet, SystemConfig};
use crate::error::{Error, Result};
use crate::gradient::{self, GradientOptions};
use crate::linalg::{self, CMat};
use crate::maxsinr::{self, MaxSinrOptions};
use crate::serial;
use crate::solution::{self, Algorithm, Solution};

/// Algorithm options plus the worker count used by the Monte Carlo drivers.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunOptions {
    pub iia: IiaOptions,
    pub max_sinr: MaxSinrOptions,
    pub gradient: GradientOptions,
    /// Worker threads; `None` uses the available parallelism.
    pub workers: Option<usize>,
}

pub const DEFAULT_CLUSTER_TOL: f64 = 1e-2;
pub const DEFAULT_RATE_TOL: f64 = 0.1;

/// Seed of task `index` under `master`: the first word of ChaCha8 stream
/// `index` keyed by `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng.next_u64()
}

/// Initial beamformers for one run, drawn from `ChaCha8Rng::seed_from_u64(init_seed)`.
pub fn initial_beamformers(cfg: &SystemConfig, algo: Algorithm, init_seed: u64) -> Beamformers {
    let mut rng = ChaCha8Rng::seed_from_u64(init_seed);
    Beamformers::random(cfg, &mut rng, algo.wants_orthonormal_init())
}

/// Runs `algo` once from `init`.
pub fn run_algorithm(
    ch: &ChannelSet,
    cfg: &SystemConfig,
    algo: Algorithm,
    init: &Beamformers,
    opts: &RunOptions,
) -> Result<Solution> {
    match algo {
        Algorithm::Iia => Ok(alignment::iia(ch, cfg, init, &opts.iia)?.into_solution(ch, cfg)),
        Algorithm::MaxSinr => maxsinr::run_max_sinr(ch, cfg, init, &opts.max_sinr),
        Algorithm::Grad => gradient::run_gradient_ascent(ch, cfg, init, &opts.gradient),
        Algorithm::TwoLayer | Algorithm::ZfOuter => {
            let run = alignment::iia(ch, cfg, init, &opts.iia)?;
            let design = if algo == Algorithm::TwoLayer {
                alignment::two_layer_design(ch, &run.beamformers, cfg.total_power)?
            } else {
                alignment::zero_forcing_outer(ch, &run.beamformers, cfg.total_power)?
            };
            let mut sol = design.to_solution(ch, algo, run.iterations);
            sol.converged &= run.converged;
            Ok(sol)
        }
    }
}

/// Runs `f(i)` for `i in 0..n` on a pool of `workers` threads and returns
/// the results in index order.
pub fn parallel_map<T, F>(n: usize, workers: Option<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let threads = workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1);
    if threads == 1 {
        return (0..n).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    pool.install(|| (0..n).into_par_iter().map(f).collect())
}

/// One run of a multi-start batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Run {
    pub init_seed: u64,
    pub solution: Solution,
}

/// `n_inits` runs of `algo` from the deterministic init sequence of `seed`.
///
/// Run `i` starts from `initial_beamformers(cfg, algo, derive_seed(seed, i))`.
pub fn multi_start(
    ch: &ChannelSet,
    cfg: &SystemConfig,
    algo: Algorithm,
    n_inits: usize,
    seed: u64,
    opts: &RunOptions,
) -> Result<Vec<Run>> {
    if n_inits == 0 {
        return Err(Error::InvalidConfig("n_inits must be at least 1".into()));
    }
    parallel_map(n_inits, opts.workers, |i| {
        let init_seed = derive_seed(seed, i as u64);
        let init = initial_beamformers(cfg, algo, init_seed);
        let solution = run_algorithm(ch, cfg, algo, &init, opts)?;
        Ok(Run { init_seed, solution })
    })
}

/// Runs that converged, in order.
pub fn converged_count(runs: &[Run]) -> usize {
    runs.iter().filter(|r| r.solution.converged).count()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointCluster {
    /// `F1`, `F2`, … in order of descending mean rate.
    pub label: String,
    pub representative: Solution,
    pub count: usize,
    pub mean_rate: f64,
    /// Orthonormal bases of the representative's transmit subspaces.
    #[serde(with = "serial::cmat_vec")]
    pub subspace_signature: Vec<CMat>,
    /// Indices into the clustered solution list.
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub clusters: Vec<FixedPointCluster>,
    /// Cluster index per input solution; `None` for non-converged runs.
    pub assignment: Vec<Option<usize>>,
    pub non_converged: usize,
}

impl Clustering {
    pub fn converged(&self) -> usize {
        self.clusters.iter().map(|c| c.count).sum()
    }

    /// Share of converged runs in cluster `i`, in percent.
    pub fn occupancy_percent(&self, i: usize) -> f64 {
        100.0 * self.clusters[i].count as f64 / self.converged().max(1) as f64
    }

    /// Occupancy-weighted mean rate over converged runs.
    pub fn average_rate(&self) -> Option<f64> {
        let n = self.converged();
        (n > 0).then(|| {
            self.clusters
                .iter()
                .map(|c| c.mean_rate * c.count as f64)
                .sum::<f64>()
                / n as f64
        })
    }
}

/// Greedy clustering of converged solutions.
///
/// A solution joins the first cluster whose representative is within
/// `cluster_tol` chordal distance on every user's transmit subspace and
/// within `rate_tol` bits in sum rate; otherwise it starts a new cluster.
pub fn cluster_fixed_points(solutions: &[&Solution], cluster_tol: f64, rate_tol: f64) -> Clustering {
    struct Building {
        rep: usize,
        basis: Vec<CMat>,
        members: Vec<usize>,
    }
    let mut building: Vec<Building> = Vec::new();
    let mut assignment = vec![None; solutions.len()];
    let mut non_converged = 0;
    for (i, sol) in solutions.iter().enumerate() {
        if !sol.converged {
            non_converged += 1;
            continue;
        }
        let basis: Vec<CMat> = sol.beamformers.v.iter().map(linalg::orthonormalize).collect();
        let rate = sol.rate.total;
        let found = building.iter().position(|c| {
            (solutions[c.rep].rate.total - rate).abs() < rate_tol
                && c.basis
                    .iter()
                    .zip(&basis)
                    .all(|(a, b)| metrics_distance(a, b) < cluster_tol)
        });
        match found {
            Some(c) => {
                building[c].members.push(i);
                assignment[i] = Some(c);
            }
            None => {
                assignment[i] = Some(building.len());
                building.push(Building {
                    rep: i,
                    basis,
                    members: vec![i],
                });
            }
        }
    }
    let mut clusters: Vec<(usize, FixedPointCluster)> = building
        .into_iter()
        .enumerate()
        .map(|(old, b)| {
            let mean_rate = b.members.iter().map(|&m| solutions[m].rate.total).sum::<f64>() / b.members.len() as f64;
            (
                old,
                FixedPointCluster {
                    label: String::new(),
                    representative: solutions[b.rep].clone(),
                    count: b.members.len(),
                    mean_rate,
                    subspace_signature: b.basis,
                    members: b.members,
                },
            )
        })
        .collect();
    clusters.sort_by(|a, b| b.1.mean_rate.total_cmp(&a.1.mean_rate));
    let mut remap = vec![0; clusters.len()];
    for (new, (old, c)) in clusters.iter_mut().enumerate() {
        remap[*old] = new;
        c.label = format!("F{}", new + 1);
    }
    for a in assignment.iter_mut().flatten() {
        *a = remap[*a];
    }
    Clustering {
        clusters: clusters.into_iter().map(|(_, c)| c).collect(),
        assignment,
        non_converged,
    }
}

fn metrics_distance(a: &CMat, b: &CMat) -> f64 {
    // Both inputs are already orthonormal bases.
    crate::metrics::chordal_distance(a, b).unwrap_or(f64::INFINITY)
}

/// One row of a sweep table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub snr_db: f64,
    pub algorithm: Algorithm,
    /// `F1`…`Fk`, or `NC` for a run that did not converge.
    pub cluster_id: String,
    pub rate_bits: f64,
    /// Occupancy of the run's cluster among converged runs at this SNR;
    /// empty for non-converged runs.
    pub occupancy_percent: Option<f64>,
    pub channel_seed: Option<u64>,
    pub init_seed: u64,
}

pub const NOT_CONVERGED: &str = "NC";

/// A run whose transmit subspaces changed between consecutive SNR points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub init_seed: u64,
    pub from_snr_db: f64,
    pub to_snr_db: f64,
    pub from_cluster: String,
    pub to_cluster: String,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub snr_db: f64,
    pub runs: Vec<Run>,
    pub clustering: Clustering,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub algorithm: Algorithm,
    pub points: Vec<SweepPoint>,
    pub transitions: Vec<Transition>,
    pub channel_seed: Option<u64>,
}

impl Sweep {
    pub fn records(&self) -> Vec<SweepRecord> {
        self.points
            .iter()
            .flat_map(|pt| records_for_point(pt, self.algorithm, self.channel_seed))
            .collect()
    }
}

pub fn records_for_point(pt: &SweepPoint, algorithm: Algorithm, channel_seed: Option<u64>) -> Vec<SweepRecord> {
    pt.runs
        .iter()
        .zip(&pt.clustering.assignment)
        .map(|(run, a)| SweepRecord {
            snr_db: pt.snr_db,
            algorithm,
            cluster_id: a.map_or_else(|| NOT_CONVERGED.to_string(), |c| pt.clustering.clusters[c].label.clone()),
            rate_bits: run.solution.rate.total,
            occupancy_percent: a.map(|c| pt.clustering.occupancy_percent(c)),
            channel_seed,
            init_seed: run.init_seed,
        })
        .collect()
}

/// Runs one SNR point of a sweep: `multi_start` plus clustering.
pub fn sweep_point(
    ch: &ChannelSet,
    cfg: &SystemConfig,
    algo: Algorithm,
    snr_db: f64,
    n_inits: usize,
    seed: u64,
    opts: &RunOptions,
) -> Result<SweepPoint> {
    let cfg = cfg.with_snr_db(snr_db);
    let runs = multi_start(ch, &cfg, algo, n_inits, seed, opts)?;
    let refs: Vec<&Solution> = runs.iter().map(|r| &r.solution).collect();
    let clustering = cluster_fixed_points(&refs, DEFAULT_CLUSTER_TOL, DEFAULT_RATE_TOL);
    Ok(SweepPoint {
        snr_db,
        runs,
        clustering,
    })
}

/// Per-init subspace changes between consecutive points.
pub fn transitions(points: &[SweepPoint], cluster_tol: f64) -> Vec<Transition> {
    let mut out = Vec::new();
    for pair in points.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        for (i, (ra, rb)) in a.runs.iter().zip(&b.runs).enumerate() {
            let (Some(ca), Some(cb)) = (a.clustering.assignment[i], b.clustering.assignment[i]) else {
                continue;
            };
            let distance = solution::max_subspace_distance(&ra.solution.beamformers.v, &rb.solution.beamformers.v);
            if distance >= cluster_tol {
                let t = Transition {
                    init_seed: ra.init_seed,
                    from_snr_db: a.snr_db,
                    to_snr_db: b.snr_db,
                    from_cluster: a.clustering.clusters[ca].label.clone(),
                    to_cluster: b.clustering.clusters[cb].label.clone(),
                    distance,
                };
                log::info!(
                    "init {:#x}: {} at {} dB -> {} at {} dB",
                    t.init_seed,
                    t.from_cluster,
                    t.from_snr_db,
                    t.to_cluster,
                    t.to_snr_db
                );
                out.push(t);
            }
        }
    }
    out
}

/// Runs the same init set at every SNR in `snr_list_db` and clusters each
/// point separately.
pub fn snr_sweep(
    ch: &ChannelSet,
    cfg: &SystemConfig,
    algo: Algorithm,
    snr_list_db: &[f64],
    n_inits: usize,
    seed: u64,
    opts: &RunOptions,
) -> Result<Sweep> {
    let points = snr_list_db
        .iter()
        .map(|&snr| sweep_point(ch, cfg, algo, snr, n_inits, seed, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(Sweep {
        algorithm: algo,
        transitions: transitions(&points, DEFAULT_CLUSTER_TOL),
        points,
        channel_seed: match ch.seed() {
            crate::channel::ChannelSeed::Seeded(s) => Some(s),
            crate::channel::ChannelSeed::External => None,
        },
    })
}

/// `K Σ_{i=2}^{d} (ψ(i) − ψ(1)) / ln 2`: expected rate loss of the
/// zero-forcing outer receiver at high SNR, in bits.
pub fn theoretical_zf_gap(users: usize, streams: usize) -> f64 {
    let harmonic_sum: f64 = (2..=streams)
        .map(|i| (1..i).map(|j| 1.0 / j as f64).sum::<f64>())
        .sum();
    users as f64 * harmonic_sum / std::f64::consts::LN_2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapStudy {
    pub users: usize,
    pub antennas: usize,
    pub streams: usize,
    pub snr_db: f64,
    pub channel_seeds: Vec<u64>,
    /// Gap per channel where IIA converged, in `channel_seeds` order.
    pub gaps: Vec<f64>,
    /// Channels skipped because IIA did not converge.
    pub skipped: Vec<u64>,
    pub mean: f64,
    pub std_error: f64,
    /// 95% normal-approximation interval on the mean.
    pub ci95: (f64, f64),
    pub theoretical: f64,
}

/// Mean rate gap between optimal and zero-forcing outer coders on the same
/// aligned inner beamformers, both at equal power.
///
/// Channel `c` is `ChannelSet::generate(cfg, derive_seed(seed, c))` and its
/// IIA start is drawn from `derive_seed(channel_seed, 0)`.
pub fn zf_gap_study(
    cfg: &SystemConfig,
    n_channels: usize,
    snr_db: f64,
    seed: u64,
    opts: &RunOptions,
) -> Result<GapStudy> {
    if n_channels == 0 {
        return Err(Error::InvalidConfig("n_channels must be at least 1".into()));
    }
    let cfg = cfg.with_snr_db(snr_db);
    let channel_seeds: Vec<u64> = (0..n_channels as u64).map(|c| derive_seed(seed, c)).collect();
    let outcomes = parallel_map(n_channels, opts.workers, |c| {
        let ch = ChannelSet::generate(&cfg, channel_seeds[c]);
        let init = initial_beamformers(&cfg, Algorithm::Iia, derive_seed(channel_seeds[c], 0));
        let run = alignment::iia(&ch, &cfg, &init, &opts.iia)?;
        if !run.converged {
            return Ok(None);
        }
        let optimal = alignment::two_layer_equal_power(&ch, &run.beamformers, cfg.total_power)?;
        let zf = alignment::zero_forcing_outer(&ch, &run.beamformers, cfg.total_power)?;
        Ok(Some(optimal.rate - zf.rate))
    })?;
    let mut gaps = Vec::new();
    let mut skipped = Vec::new();
    for (c, g) in outcomes.into_iter().enumerate() {
        match g {
            Some(g) => gaps.push(g),
            None => {
                log::warn!("IIA did not converge on channel {:#x}; skipped", channel_seeds[c]);
                skipped.push(channel_seeds[c]);
            }
        }
    }
    let n = gaps.len() as f64;
    let mean = if gaps.is_empty() { f64::NAN } else { gaps.iter().sum::<f64>() / n };
    let std_error = if gaps.len() > 1 {
        (gaps.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() / n.sqrt()
    } else {
        f64::NAN
    };
    Ok(GapStudy {
        users: cfg.users,
        antennas: cfg.antennas,
        streams: cfg.streams,
        snr_db,
        channel_seeds,
        gaps,
        skipped,
        mean,
        std_error,
        ci95: (mean - 1.96 * std_error, mean + 1.96 * std_error),
        theoretical: theoretical_zf_gap(cfg.users, cfg.streams),
    })
}
