//! Interference alignment and the two-layer beamformer design.
//!
//! [`iia`] finds inner beamformers whose interference lands in a common
//! subspace at every receiver. [`two_layer_design`] then rotates each user's
//! aligned subspaces with the singular vectors of its `d × d` equivalent
//! channel and water-fills power across all `K d` resulting streams.
//! [`zero_forcing_outer`] is the common baseline that keeps the inner
//! transmit basis and inverts the equivalent channel at the receiver.

use serde::{Deserialize, Serialize};

use crate::channel::{Beamformers, ChannelSet, PowerAllocation, SystemConfig};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::metrics::{self, RateReport, ALIGNMENT_TOL};
use crate::serial;
use crate::solution::{self, Algorithm, Solution, TraceEntry};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IiaOptions {
    pub max_iter: usize,
    /// Stop once the unit-power leakage `Σ_k tr(U_kᴴ Z_k U_k)` drops below this.
    pub leak_tol: f64,
    /// Record a [`TraceEntry`] per iteration (costs one rate evaluation each).
    pub trace: bool,
}

impl Default for IiaOptions {
    fn default() -> Self {
        Self {
            max_iter: 10_000,
            leak_tol: 1e-20,
            trace: false,
        }
    }
}

impl IiaOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
        }
        if !(self.leak_tol >= 0.0) {
            return Err(Error::InvalidConfig(format!("leak_tol must be nonnegative, got {}", self.leak_tol)));
        }
        Ok(())
    }
}

/// Outcome of an IIA run. Non-convergence is reported here rather than as
/// an error so the caller keeps the diagnostics.
#[derive(Debug, Clone)]
pub struct IiaRun {
    pub beamformers: Beamformers,
    pub iterations: usize,
    /// Final unit-power leakage.
    pub leakage: f64,
    /// The `leak_tol` the run was held to.
    pub tolerance: f64,
    pub converged: bool,
    /// Leakage after every half-step, starting with the initial point's
    /// receive-side optimum.
    pub half_step_leakage: Vec<f64>,
    pub trace: Vec<TraceEntry>,
}

impl IiaRun {
    pub fn ensure_converged(self) -> Result<Beamformers> {
        if self.converged {
            Ok(self.beamformers)
        } else {
            Err(Error::NonConvergence {
                iterations: self.iterations,
                residual: self.leakage,
            })
        }
    }

    pub fn into_solution(self, ch: &ChannelSet, cfg: &SystemConfig) -> Solution {
        let rate = metrics::sum_rate_users(ch, &self.beamformers.v, cfg.total_power);
        let alignment = metrics::alignment_residual(ch, &self.beamformers);
        Solution {
            powers: PowerAllocation::equal(cfg),
            algorithm: Algorithm::Iia,
            iterations: self.iterations,
            converged: self.converged,
            final_residual: self.leakage,
            tolerance: self.tolerance,
            rate,
            alignment,
            trace: self.trace,
            beamformers: self.beamformers,
        }
    }
}

fn check_shapes(ch: &ChannelSet, cfg: &SystemConfig, blocks: &[CMat], what: &str) -> Result<()> {
    if cfg.streams > cfg.antennas {
        return Err(Error::InfeasibleConfig {
            m: cfg.antennas,
            d: cfg.streams,
        });
    }
    if ch.users() != cfg.users || ch.antennas() != cfg.antennas {
        return Err(Error::Shape(format!(
            "channel is K={}, M={} but configuration is K={}, M={}",
            ch.users(),
            ch.antennas(),
            cfg.users,
            cfg.antennas
        )));
    }
    if blocks.len() != cfg.users
        || blocks
            .iter()
            .any(|b| b.shape() != (cfg.antennas, cfg.streams))
    {
        return Err(Error::Shape(format!(
            "{what} must be {} blocks of {}x{}",
            cfg.users, cfg.antennas, cfg.streams
        )));
    }
    Ok(())
}

/// `Σ_{k, l≠k} ‖U_kᴴ H_kl V_l‖_F²`.
fn leakage(ch: &ChannelSet, v: &[CMat], u: &[CMat]) -> f64 {
    let users = ch.users();
    let mut total = 0.0;
    for k in 0..users {
        for l in (0..users).filter(|&l| l != k) {
            total += (u[k].adjoint() * ch.h(k, l) * &v[l]).norm_squared();
        }
    }
    total
}

/// Receivers minimizing leakage for fixed transmitters: the `d` least
/// interfered directions of each `Z_k`.
fn min_leakage_filters(ch: &ChannelSet, v: &[CMat], d: usize) -> Vec<CMat> {
    let unit = PowerAllocation {
        powers: v.iter().map(|b| vec![1.0; b.ncols()]).collect(),
    };
    (0..ch.users())
        .map(|k| linalg::smallest_eigenvectors(&metrics::interference_cov_user(ch, v, &unit, k), d))
        .collect()
}

/// Iterative interference alignment by alternating leakage minimization.
///
/// The forward half-step sets each `U_k` to the `d` smallest eigenvectors of
/// the interference covariance `Z_k`; the reverse half-step does the same
/// for `V_l` on the reciprocal channel. Equal per-stream powers only scale
/// `Z_k`, so the leakage is tracked at unit power and the tolerance does not
/// depend on the SNR.
pub fn iia(ch: &ChannelSet, cfg: &SystemConfig, init: &Beamformers, opts: &IiaOptions) -> Result<IiaRun> {
    opts.validate()?;
    check_shapes(ch, cfg, &init.v, "initial transmit beamformers")?;
    let deviation = init
        .v
        .iter()
        .map(linalg::orthonormality_deviation)
        .fold(0.0, f64::max);
    if deviation > 1e-8 {
        return Err(Error::NotOrthonormal { deviation });
    }
    let d = cfg.streams;
    let reverse = ch.reciprocal();
    let mut v = init.v.clone();
    let mut u = init.u.clone();
    let mut half_step_leakage = Vec::new();
    let mut trace = Vec::new();
    let mut current = f64::INFINITY;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let u_next = min_leakage_filters(ch, &v, d);
        half_step_leakage.push(leakage(ch, &v, &u_next));
        let v_next = min_leakage_filters(&reverse, &u_next, d);
        current = leakage(ch, &v_next, &u_next);
        half_step_leakage.push(current);
        if opts.trace {
            let moved = solution::displacement(&v, &v_next).max(solution::displacement(&u, &u_next));
            trace.push(TraceEntry {
                iter: iterations,
                displacement: moved,
                sum_rate_bits: metrics::sum_rate_users(ch, &v_next, cfg.total_power).total,
                leakage: current,
            });
        }
        v = v_next;
        u = u_next;
        if current < opts.leak_tol {
            break;
        }
    }
    let converged = current < opts.leak_tol;
    if !converged {
        log::debug!("IIA stopped after {iterations} iterations with leakage {current:.3e}");
    }
    Ok(IiaRun {
        beamformers: Beamformers { v, u },
        iterations,
        leakage: current,
        tolerance: opts.leak_tol,
        converged,
        half_step_leakage,
        trace,
    })
}

/// `H̄_k = U̲_kᴴ H_kk V̲_k`.
pub fn equivalent_channel(ch: &ChannelSet, inner: &Beamformers, k: usize) -> CMat {
    inner.u[k].adjoint() * ch.h(k, k) * &inner.v[k]
}

/// Outer coders for one user.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterCoders {
    /// Transmit rotation `Φ` (right singular vectors).
    pub tx: CMat,
    /// Receive rotation `Θ` (left singular vectors).
    pub rx: CMat,
    /// Singular values, descending.
    pub gains: Vec<f64>,
}

/// SVD of the equivalent channel with a fixed phase convention: the
/// largest-magnitude entry of each receive column is real and positive, and
/// the matching transmit column carries the same rotation.
pub fn outer_coders(hbar: &CMat) -> OuterCoders {
    let n = hbar.nrows();
    if hbar.iter().all(|z| *z == linalg::c(0.0, 0.0)) {
        return OuterCoders {
            tx: linalg::identity(n),
            rx: linalg::identity(n),
            gains: vec![0.0; n],
        };
    }
    let (mut rx, gains, mut tx) = linalg::svd_desc(hbar);
    for j in 0..rx.ncols() {
        let mut col = rx.column(j).into_owned();
        let before = col.clone();
        linalg::normalize_phase(&mut col);
        let rot = if before.norm() > 0.0 {
            // col = before * rot for a unit-modulus rot.
            before.dotc(&col) / before.norm_squared()
        } else {
            linalg::c(1.0, 0.0)
        };
        rx.set_column(j, &col);
        let t = tx.column(j) * rot;
        tx.set_column(j, &t);
    }
    OuterCoders { tx, rx, gains }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaterFilling {
    pub powers: Vec<f64>,
    /// Water level `μ`; active channels get `μ − 1/g`.
    pub level: f64,
}

/// Capacity-achieving power split over parallel channels with power gains
/// `gains` (against unit noise) under a total budget.
///
/// The active set is found by sorting, so the level is exact up to
/// rounding rather than bisected.
pub fn waterfill(gains: &[f64], total_power: f64) -> Result<WaterFilling> {
    if gains.iter().any(|g| !g.is_finite() || *g < 0.0) {
        return Err(Error::InvalidConfig("gains must be finite and nonnegative".into()));
    }
    if !(total_power.is_finite() && total_power >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "total power must be finite and nonnegative, got {total_power}"
        )));
    }
    let mut order: Vec<usize> = (0..gains.len()).filter(|&i| gains[i] > 0.0).collect();
    if order.is_empty() {
        return Err(Error::AllZeroGains);
    }
    order.sort_by(|&a, &b| gains[b].total_cmp(&gains[a]));
    let floors: Vec<f64> = order.iter().map(|&i| 1.0 / gains[i]).collect();
    // Largest n with μ_n = (P + Σ_{i<n} floor_i) / n above floor_{n-1}.
    let mut level = floors[0];
    let mut prefix = 0.0;
    for (n, &floor) in floors.iter().enumerate() {
        let candidate = (total_power + prefix + floor) / (n + 1) as f64;
        if candidate <= floor {
            break;
        }
        prefix += floor;
        level = candidate;
    }
    let powers = gains
        .iter()
        .map(|&g| if g > 0.0 { (level - 1.0 / g).max(0.0) } else { 0.0 })
        .collect();
    Ok(WaterFilling { powers, level })
}

/// Two-layer beamformers: inner aligned subspaces composed with outer
/// `d × d` coders, plus the power split and resulting rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoLayerSolution {
    pub inner: Beamformers,
    #[serde(with = "serial::cmat_vec")]
    pub outer_tx: Vec<CMat>,
    #[serde(with = "serial::cmat_vec")]
    pub outer_rx: Vec<CMat>,
    /// Singular values of each equivalent channel, descending.
    pub singular_values: Vec<Vec<f64>>,
    pub powers: PowerAllocation,
    pub composed: Beamformers,
    /// Per-stream rates in bits; `per_stream[k][m]`.
    pub per_stream: Vec<Vec<f64>>,
    pub rate: f64,
    /// Water level, absent for equal-power baselines.
    pub water_level: Option<f64>,
}

impl TwoLayerSolution {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("two-layer solution serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_solution(&self, ch: &ChannelSet, algorithm: Algorithm, iterations: usize) -> Solution {
        let alignment = metrics::alignment_residual(ch, &self.composed);
        Solution {
            beamformers: self.composed.clone(),
            powers: self.powers.clone(),
            algorithm,
            iterations,
            converged: alignment.cross_terms < ALIGNMENT_TOL,
            final_residual: alignment.cross_terms,
            tolerance: ALIGNMENT_TOL,
            rate: RateReport::from_streams(self.per_stream.clone()),
            alignment,
            trace: Vec::new(),
        }
    }
}

fn inner_checks(ch: &ChannelSet, inner: &Beamformers) -> Result<()> {
    inner.validate()?;
    if inner.users() != ch.users() || inner.v.iter().chain(&inner.u).any(|b| b.nrows() != ch.antennas()) {
        return Err(Error::Shape("inner beamformers do not match the channel".into()));
    }
    let deviation = inner
        .v
        .iter()
        .chain(&inner.u)
        .map(linalg::orthonormality_deviation)
        .fold(0.0, f64::max);
    if deviation > 1e-8 {
        return Err(Error::NotOrthonormal { deviation });
    }
    let residual = metrics::alignment_residual(ch, inner).cross_terms;
    if residual > ALIGNMENT_TOL {
        log::warn!("inner beamformers are not interference aligning (cross terms {residual:.3e})");
    }
    Ok(())
}

fn compose(inner: &Beamformers, tx: &[CMat], rx: &[CMat]) -> Beamformers {
    Beamformers {
        v: inner.v.iter().zip(tx).map(|(a, b)| a * b).collect(),
        u: inner.u.iter().zip(rx).map(|(a, b)| a * b).collect(),
    }
}

/// Optimal outer coders and water-filled powers for aligned `inner`
/// beamformers. The rate is `Σ_{k,m} log2(1 + P_k^(m) λ_k^(m)²)`.
pub fn two_layer_design(ch: &ChannelSet, inner: &Beamformers, total_power: f64) -> Result<TwoLayerSolution> {
    two_layer(ch, inner, total_power, true)
}

/// Optimal outer coders with equal power `P_t / (K d)` on every stream.
pub fn two_layer_equal_power(ch: &ChannelSet, inner: &Beamformers, total_power: f64) -> Result<TwoLayerSolution> {
    two_layer(ch, inner, total_power, false)
}

fn two_layer(ch: &ChannelSet, inner: &Beamformers, total_power: f64, water: bool) -> Result<TwoLayerSolution> {
    inner_checks(ch, inner)?;
    let d = inner.streams();
    let coders: Vec<OuterCoders> = (0..ch.users())
        .map(|k| outer_coders(&equivalent_channel(ch, inner, k)))
        .collect();
    let gains: Vec<f64> = coders
        .iter()
        .flat_map(|c| c.gains.iter().map(|s| s * s))
        .collect();
    let (flat, water_level) = if water {
        let fill = waterfill(&gains, total_power)?;
        (fill.powers, Some(fill.level))
    } else {
        (vec![total_power / gains.len() as f64; gains.len()], None)
    };
    let powers = PowerAllocation::from_flat(ch.users(), d, &flat);
    let per_stream: Vec<Vec<f64>> = coders
        .iter()
        .enumerate()
        .map(|(k, c)| {
            c.gains
                .iter()
                .enumerate()
                .map(|(m, s)| (powers.get(k, m) * s * s).ln_1p() / std::f64::consts::LN_2)
                .collect()
        })
        .collect();
    let outer_tx: Vec<CMat> = coders.iter().map(|c| c.tx.clone()).collect();
    let outer_rx: Vec<CMat> = coders.iter().map(|c| c.rx.clone()).collect();
    Ok(TwoLayerSolution {
        composed: compose(inner, &outer_tx, &outer_rx),
        inner: inner.clone(),
        outer_tx,
        outer_rx,
        singular_values: coders.into_iter().map(|c| c.gains).collect(),
        powers,
        rate: per_stream.iter().flatten().sum(),
        per_stream,
        water_level,
    })
}

/// Baseline outer coders: identity at the transmitter, unit-norm rows of
/// `H̄_k⁻¹` at the receiver, equal power `P_t / (K d)`. The rate is the
/// filtered SINR of the composed beamformers, so residual leakage counts.
pub fn zero_forcing_outer(ch: &ChannelSet, inner: &Beamformers, total_power: f64) -> Result<TwoLayerSolution> {
    inner_checks(ch, inner)?;
    let users = ch.users();
    let d = inner.streams();
    let mut outer_rx = Vec::with_capacity(users);
    let mut singular_values = Vec::with_capacity(users);
    for k in 0..users {
        let hbar = equivalent_channel(ch, inner, k);
        let s = linalg::singular_values(&hbar);
        let top = s.first().copied().unwrap_or(0.0);
        let bottom = s.last().copied().unwrap_or(0.0);
        if !(bottom >= 1e-10 * top) || top == 0.0 {
            return Err(Error::SingularEquivalentChannel {
                user: k,
                ratio: if top > 0.0 { bottom / top } else { 0.0 },
            });
        }
        let inverse = hbar
            .clone()
            .pseudo_inverse(0.0)
            .map_err(|e| Error::Shape(e.to_string()))?;
        // Receive filter m is row m of H̄⁻¹, stored as a column.
        outer_rx.push(linalg::normalize_columns(&inverse.adjoint()));
        singular_values.push(s);
    }
    let outer_tx: Vec<CMat> = (0..users).map(|_| linalg::identity(d)).collect();
    let composed = compose(inner, &outer_tx, &outer_rx);
    let q = total_power / (users * d) as f64;
    let powers = PowerAllocation::from_flat(users, d, &vec![q; users * d]);
    let report = metrics::filtered_sum_rate(ch, &composed, &powers);
    Ok(TwoLayerSolution {
        inner: inner.clone(),
        outer_tx,
        outer_rx,
        singular_values,
        powers,
        composed,
        per_stream: report.per_stream.clone().unwrap_or_default(),
        rate: report.total,
        water_level: None,
    })
}
