//! Sum-rate gradient and projected gradient ascent on the user-level rate.

use serde::{Deserialize, Serialize};

use crate::channel::{Beamformers, ChannelSet, PowerAllocation, SystemConfig};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::maxsinr;
use crate::metrics;
use crate::solution::{self, Algorithm, Solution, TraceEntry};

/// Complex gradient of the sum rate (natural-log units) with respect to
/// each `V_k`, under equal power `q = P_t / (K d)`:
///
/// `G_k = q [Σ_l H_lkᴴ R_l⁻¹ H_lk V_k − Σ_{l≠k} H_lkᴴ (I + Z_l)⁻¹ H_lk V_k]`.
///
/// The rate in bits changes by `2 Re tr(G_kᴴ Δ_k) / ln 2` to first order
/// along `V_k + Δ_k`.
pub fn sum_rate_gradient(ch: &ChannelSet, v: &[CMat], total_power: f64) -> Vec<CMat> {
    let users = ch.users();
    let mut grad: Vec<CMat> = v.iter().map(|b| CMat::zeros(b.nrows(), b.ncols())).collect();
    if total_power == 0.0 {
        return grad;
    }
    let streams: usize = v.iter().map(|b| b.ncols()).sum();
    let q = total_power / streams as f64;
    for l in 0..users {
        let received = metrics::received_factor(ch, v, q, l);
        let interference = metrics::noise_plus_interference_factor(ch, v, q, l);
        for k in 0..users {
            let h = ch.h(l, k);
            let hv = h * &v[k];
            let mut term = received.solve(&hv);
            if l != k {
                term -= interference.solve(&hv);
            }
            grad[k] += (h.adjoint() * term).scale(q);
        }
    }
    grad
}

/// `g − v Re(vᴴ g)` per column: the component that changes the rate to
/// first order once columns are renormalized.
pub fn project_tangent(v: &CMat, g: &CMat) -> CMat {
    let mut out = g.clone();
    for j in 0..v.ncols() {
        let vj = v.column(j);
        let along = vj.dotc(&g.column(j)).re;
        let col = g.column(j) - vj * linalg::c(along, 0.0);
        out.set_column(j, &col);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GradientOptions {
    pub max_iter: usize,
    /// Upper bound on the trial step.
    pub step_init: f64,
    /// Step shrink factor for backtracking.
    pub backtrack_factor: f64,
    /// Sufficient-increase constant of the Armijo test.
    pub armijo_c: f64,
    /// Stop once the projected-gradient Frobenius norm drops below this.
    pub grad_tol: f64,
    pub record_trace: bool,
}

impl Default for GradientOptions {
    fn default() -> Self {
        Self {
            max_iter: 2000,
            step_init: 1.0,
            backtrack_factor: 0.5,
            armijo_c: 1e-4,
            grad_tol: 1e-6,
            record_trace: false,
        }
    }
}

impl GradientOptions {
    pub fn validate(&self) -> Result<()> {
        let ok = self.max_iter >= 1
            && self.step_init > 0.0
            && self.grad_tol > 0.0
            && self.backtrack_factor > 0.0
            && self.backtrack_factor < 1.0
            && self.armijo_c > 0.0
            && self.armijo_c < 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid gradient options {self:?}")))
        }
    }
}

/// Smallest step tried before the line search gives up.
const MIN_STEP: f64 = 1e-300;

fn frob_sq(blocks: &[CMat]) -> f64 {
    blocks.iter().map(|b| b.norm_squared()).sum()
}

/// Projected gradient ascent on the user-level sum rate.
///
/// Each step moves `V_k ← normalize_columns(V_k + η D_k)` with `D_k` the
/// tangent projection of the gradient, and `η` chosen by Armijo
/// backtracking starting from `min(step_init, η_prev / backtrack_factor)`.
/// Receive filters in the result are the whitened matched filters of the
/// final transmit beams.
pub fn run_gradient_ascent(ch: &ChannelSet, cfg: &SystemConfig, init: &Beamformers, opts: &GradientOptions) -> Result<Solution> {
    opts.validate()?;
    init.validate()?;
    if init.users() != cfg.users || init.v.iter().any(|b| b.shape() != (cfg.antennas, cfg.streams)) {
        return Err(Error::Shape("initial beamformers do not match the configuration".into()));
    }
    let pt = cfg.total_power;
    let p = PowerAllocation::equal(cfg);
    let mut v = init.v.clone();
    let mut rate = metrics::sum_rate_users(ch, &v, pt).total;
    let mut step = opts.step_init;
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut grad_norm;
    loop {
        let dir: Vec<CMat> = sum_rate_gradient(ch, &v, pt)
            .iter()
            .zip(&v)
            .map(|(g, b)| project_tangent(b, g))
            .collect();
        grad_norm = frob_sq(&dir).sqrt();
        if grad_norm < opts.grad_tol || iterations >= opts.max_iter {
            break;
        }
        iterations += 1;
        // First-order increase in bits per unit step.
        let slope = 2.0 * grad_norm * grad_norm / std::f64::consts::LN_2;
        let mut eta = (step / opts.backtrack_factor).min(opts.step_init);
        let accepted = loop {
            let trial: Vec<CMat> = v
                .iter()
                .zip(&dir)
                .map(|(b, d)| linalg::normalize_columns(&(b + d.scale(eta))))
                .collect();
            let trial_rate = metrics::sum_rate_users(ch, &trial, pt).total;
            if trial_rate >= rate + opts.armijo_c * eta * slope {
                break Some((trial, trial_rate));
            }
            eta *= opts.backtrack_factor;
            if eta < MIN_STEP {
                break None;
            }
        };
        let Some((next, next_rate)) = accepted else {
            log::debug!("line search stalled at iteration {iterations} (gradient norm {grad_norm:.3e})");
            break;
        };
        step = eta;
        if opts.record_trace {
            let u = maxsinr::vu_step(ch, &next, &p, false)?;
            trace.push(TraceEntry {
                iter: iterations,
                displacement: solution::displacement(&v, &next),
                sum_rate_bits: next_rate,
                leakage: metrics::alignment_residual(ch, &Beamformers { v: next.clone(), u }).total_leakage(),
            });
        }
        v = next;
        rate = next_rate;
    }
    let u = maxsinr::vu_step(ch, &v, &p, false)?;
    let beamformers = Beamformers { v, u };
    Ok(Solution {
        rate: metrics::sum_rate_users(ch, &beamformers.v, pt),
        alignment: metrics::alignment_residual(ch, &beamformers),
        powers: p,
        algorithm: Algorithm::Grad,
        iterations,
        converged: grad_norm < opts.grad_tol,
        final_residual: grad_norm,
        tolerance: opts.grad_tol,
        trace,
        beamformers,
    })
}
