//! The max-SINR algorithm.
//!
//! Each composite iteration computes whitened matched filters at the
//! receivers for the current transmit beams (`vu_step`), then the same
//! filters on the reciprocal channel to update the transmit beams
//! (`uv_step`). Both directions use equal per-stream powers `P_t / (K d)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{Beamformers, ChannelSet, PowerAllocation, SystemConfig};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec, GramFactor};
use crate::metrics;
use crate::solution::{self, Algorithm, Solution, TraceEntry};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaxSinrOptions {
    pub max_iter: usize,
    /// Stop once the phase-invariant displacement between successive
    /// iterates falls below this.
    pub fp_tol: f64,
    /// Re-orthonormalize each user's block after every half-step.
    pub orthogonalize: bool,
    pub record_trace: bool,
}

impl Default for MaxSinrOptions {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            fp_tol: 1e-6,
            orthogonalize: true,
            record_trace: false,
        }
    }
}

impl MaxSinrOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
        }
        if !(self.fp_tol > 0.0) {
            return Err(Error::InvalidConfig(format!("fp_tol must be positive, got {}", self.fp_tol)));
        }
        Ok(())
    }
}

const ZERO_NORM: f64 = 1e-300;

/// `R⁻¹ H v / ‖R⁻¹ H v‖` for a Hermitian positive definite `R`.
pub fn wmf(r: &CMat, h: &CMat, v: &CVec) -> Result<CVec> {
    let chol = r
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidConfig("covariance is not positive definite".into()))?;
    let x = chol.solve(&(h * v));
    let norm = x.norm();
    if !(norm >= ZERO_NORM) {
        return Err(Error::ZeroDirection { user: 0, stream: 0 });
    }
    Ok(x.unscale(norm))
}

fn wmf_factored(factor: &GramFactor, hv: &CVec, user: usize, stream: usize) -> Result<CVec> {
    let x = factor.solve_vec(hv);
    let norm = x.norm();
    if !(norm >= ZERO_NORM) {
        return Err(Error::ZeroDirection { user, stream });
    }
    Ok(x.unscale(norm))
}

/// Whitened matched filters at every receiver of `ch` for transmit beams `v`.
fn filters(ch: &ChannelSet, v: &[CMat], p: &PowerAllocation, orthogonalize: bool) -> Result<Vec<CMat>> {
    (0..ch.users())
        .map(|k| {
            let d = v[k].ncols();
            let mut block = CMat::zeros(ch.antennas(), d);
            for m in 0..d {
                let factor = metrics::stream_factor(ch, v, p, k, m);
                let hv: CVec = ch.h(k, k) * v[k].column(m);
                block.set_column(m, &wmf_factored(&factor, &hv, k, m)?);
            }
            Ok(if orthogonalize {
                linalg::orthonormalize(&block)
            } else {
                block
            })
        })
        .collect()
}

/// Receive filters for transmit beams `v` on the forward channel.
pub fn vu_step(ch: &ChannelSet, v: &[CMat], p: &PowerAllocation, orthogonalize: bool) -> Result<Vec<CMat>> {
    filters(ch, v, p, orthogonalize)
}

/// Transmit beams from receive filters `u`, using the reciprocal channel
/// `reciprocal` (as returned by [`ChannelSet::reciprocal`]).
pub fn uv_step(
    reciprocal: &ChannelSet,
    u: &[CMat],
    p_reverse: &PowerAllocation,
    orthogonalize: bool,
) -> Result<Vec<CMat>> {
    filters(reciprocal, u, p_reverse, orthogonalize)
}

/// One composite iteration: returns `(U[n], V[n+1])`.
pub fn composite_step(
    ch: &ChannelSet,
    reciprocal: &ChannelSet,
    v: &[CMat],
    p: &PowerAllocation,
    orthogonalize: bool,
) -> Result<(Vec<CMat>, Vec<CMat>)> {
    let u = vu_step(ch, v, p, orthogonalize)?;
    let v_next = uv_step(reciprocal, &u, p, orthogonalize)?;
    Ok((u, v_next))
}

fn check_init(ch: &ChannelSet, cfg: &SystemConfig, init: &Beamformers) -> Result<()> {
    init.validate()?;
    if ch.users() != cfg.users || ch.antennas() != cfg.antennas {
        return Err(Error::Shape("channel does not match the configuration".into()));
    }
    if init.users() != cfg.users
        || init.v.iter().chain(&init.u).any(|b| b.shape() != (cfg.antennas, cfg.streams))
    {
        return Err(Error::Shape(format!(
            "initial beamformers must be {} blocks of {}x{}",
            cfg.users, cfg.antennas, cfg.streams
        )));
    }
    Ok(())
}

/// Runs composite iterations from `init` until the displacement between
/// successive `(V, U)` pairs drops below `opts.fp_tol`.
///
/// The first displacement compares `U[0]` with `init.u`, so an input that
/// is already a fixed point reports convergence after one iteration.
pub fn run_max_sinr(ch: &ChannelSet, cfg: &SystemConfig, init: &Beamformers, opts: &MaxSinrOptions) -> Result<Solution> {
    opts.validate()?;
    check_init(ch, cfg, init)?;
    let p = PowerAllocation::equal(cfg);
    let reverse = ch.reciprocal();
    let mut v = init.v.clone();
    let mut u = init.u.clone();
    let mut trace = Vec::new();
    let mut moved = f64::INFINITY;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let (u_next, v_next) = composite_step(ch, &reverse, &v, &p, opts.orthogonalize)?;
        moved = solution::displacement(&v, &v_next).max(solution::displacement(&u, &u_next));
        v = v_next;
        u = u_next;
        if opts.record_trace {
            let b = Beamformers { v: v.clone(), u: u.clone() };
            trace.push(TraceEntry {
                iter: iterations,
                displacement: moved,
                sum_rate_bits: metrics::sum_rate_streams(ch, &v, &p).total,
                leakage: metrics::alignment_residual(ch, &b).total_leakage(),
            });
        }
        if moved < opts.fp_tol {
            break;
        }
    }
    let beamformers = Beamformers { v, u };
    Ok(Solution {
        rate: metrics::sum_rate_streams(ch, &beamformers.v, &p),
        alignment: metrics::alignment_residual(ch, &beamformers),
        powers: p,
        algorithm: Algorithm::MaxSinr,
        iterations,
        converged: moved < opts.fp_tol,
        final_residual: moved,
        tolerance: opts.fp_tol,
        trace,
        beamformers,
    })
}

/// Local convergence measurements around a fixed point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub epsilon: f64,
    /// `distances[t][i]`: distance to the fixed point for trial `t` after
    /// `i` composite iterations (`i = 0` is the perturbed start).
    pub distances: Vec<Vec<f64>>,
    /// Successive ratios `distances[t][i+1] / distances[t][i]`, recorded
    /// while the distance is above the numerical floor.
    pub ratios: Vec<Vec<f64>>,
    pub median_ratio: f64,
    /// Median over trials of the distance after the first iteration.
    pub median_post_iteration: f64,
}

/// Distances below this are treated as converged to working precision.
pub const DISTANCE_FLOOR: f64 = 1e-11;

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Perturbs every transmit column of the fixed point `fp` by `epsilon` along
/// a random unit direction, renormalizes, and follows `iterations`
/// composite steps, measuring the phase-invariant distance back to `fp`.
#[allow(clippy::too_many_arguments)]
pub fn perturb_and_measure(
    ch: &ChannelSet,
    cfg: &SystemConfig,
    fp: &Solution,
    epsilon: f64,
    trials: usize,
    iterations: usize,
    orthogonalize: bool,
    seed: u64,
) -> Result<DecayReport> {
    let p = PowerAllocation::equal(cfg);
    let reverse = ch.reciprocal();
    let target = &fp.beamformers;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut distances = Vec::with_capacity(trials);
    let mut ratios = Vec::with_capacity(trials);
    for _ in 0..trials {
        let mut v: Vec<CMat> = target
            .v
            .iter()
            .map(|b| {
                let dir = linalg::normalize_columns(&linalg::random_gaussian(&mut rng, b.nrows(), b.ncols()));
                linalg::normalize_columns(&(b + dir.scale(epsilon)))
            })
            .collect();
        let mut seq = vec![solution::displacement(&v, &target.v)];
        for _ in 0..iterations {
            let (u, v_next) = composite_step(ch, &reverse, &v, &p, orthogonalize)?;
            v = v_next;
            seq.push(solution::displacement(&v, &target.v).max(solution::displacement(&u, &target.u)));
        }
        let r: Vec<f64> = seq
            .windows(2)
            .take_while(|w| w[0] > DISTANCE_FLOOR)
            .map(|w| w[1] / w[0])
            .collect();
        distances.push(seq);
        ratios.push(r);
    }
    let mut all: Vec<f64> = ratios.iter().flatten().copied().collect();
    let mut post: Vec<f64> = distances.iter().filter_map(|s| s.get(1).copied()).collect();
    Ok(DecayReport {
        epsilon,
        median_ratio: median(&mut all),
        median_post_iteration: median(&mut post),
        distances,
        ratios,
    })
}
