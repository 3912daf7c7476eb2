//! Covariances, rates, alignment residuals and subspace distances.
//!
//! All logarithms are base 2. Covariances that feed a solve or a
//! determinant go through [`GramFactor`]; the explicit-matrix builders here
//! exist for inspection and for checking against naive sums.

use serde::{Deserialize, Serialize};

use crate::channel::{Beamformers, ChannelSet, PowerAllocation};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec, GramFactor};

/// Cross terms below this (unit power, Frobenius) count as aligned.
pub const ALIGNMENT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentDiagnostics {
    /// `Σ_{l≠k} ‖U_kᴴ H_kl V_l‖_F²`, the interference power left in each
    /// retained subspace at unit stream power.
    pub per_user_leakage: Vec<f64>,
    /// `max_{k, l≠k} ‖U_kᴴ H_kl V_l‖_F`.
    pub cross_terms: f64,
    /// `σ_d(U_kᴴ H_kk V_k)` per user.
    pub rank_margins: Vec<f64>,
    /// Numerical rank of the unit-power interference covariance `Z_k`.
    pub interference_rank: Vec<usize>,
}

impl AlignmentDiagnostics {
    pub fn total_leakage(&self) -> f64 {
        self.per_user_leakage.iter().sum()
    }

    /// Zero-forcing conditions hold within `tol` and every desired block keeps
    /// full rank.
    pub fn is_aligned(&self, tol: f64) -> bool {
        self.cross_terms < tol && self.rank_margins.iter().all(|&s| s > tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    /// `C_k^(m)`; absent for user-level reports.
    pub per_stream: Option<Vec<Vec<f64>>>,
    pub per_user: Vec<f64>,
    pub total: f64,
}

impl RateReport {
    pub(crate) fn from_streams(per_stream: Vec<Vec<f64>>) -> Self {
        let per_user: Vec<f64> = per_stream.iter().map(|r| r.iter().sum()).collect();
        let total = per_user.iter().sum();
        Self {
            per_stream: Some(per_stream),
            per_user,
            total,
        }
    }

    pub(crate) fn from_users(per_user: Vec<f64>) -> Self {
        let total = per_user.iter().sum();
        Self {
            per_stream: None,
            per_user,
            total,
        }
    }

    /// CSV with header `k,m,rate_bits`; user-level reports write `m` as `-`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,m,rate_bits\n");
        match &self.per_stream {
            Some(rows) => {
                for (k, row) in rows.iter().enumerate() {
                    for (m, r) in row.iter().enumerate() {
                        out.push_str(&format!("{k},{m},{r}\n"));
                    }
                }
            }
            None => {
                for (k, r) in self.per_user.iter().enumerate() {
                    out.push_str(&format!("{k},-,{r}\n"));
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("rate report serializes")
    }
}

fn column(a: &CMat, j: usize) -> CMat {
    a.columns(j, 1).into_owned()
}

/// `Z_k = Σ_{l≠k} H_kl V_l diag(P_l) V_lᴴ H_klᴴ`.
pub fn interference_cov_user(ch: &ChannelSet, v: &[CMat], p: &PowerAllocation, k: usize) -> CMat {
    let m = ch.antennas();
    let mut z = CMat::zeros(m, m);
    for l in (0..ch.users()).filter(|&l| l != k) {
        for j in 0..v[l].ncols() {
            let h = ch.h(k, l) * column(&v[l], j);
            z += (&h * h.adjoint()).scale(p.get(l, j));
        }
    }
    linalg::hermitian_part(&z)
}

/// `R_k^(m)`: every stream's received covariance except stream `m` of user
/// `k`, plus the identity.
pub fn interference_plus_noise_cov_stream(
    ch: &ChannelSet,
    v: &[CMat],
    p: &PowerAllocation,
    k: usize,
    m: usize,
) -> CMat {
    stream_factor(ch, v, p, k, m).covariance()
}

/// Interference-plus-noise covariance of stream `(k, m)` in square-root form.
pub(crate) fn stream_factor(
    ch: &ChannelSet,
    v: &[CMat],
    p: &PowerAllocation,
    k: usize,
    m: usize,
) -> GramFactor {
    let mut cols = Vec::new();
    for (l, vl) in v.iter().enumerate() {
        let hv = ch.h(k, l) * vl;
        for j in 0..vl.ncols() {
            if (l, j) != (k, m) {
                cols.push((p.get(l, j), column(&hv, j)));
            }
        }
    }
    GramFactor::new(ch.antennas(), cols.iter().map(|(s, b)| (*s, b)))
}

/// `P_k^(m) v_k^(m)ᴴ H_kkᴴ (R_k^(m))⁻¹ H_kk v_k^(m)`, the SINR after the
/// whitened matched filter.
pub fn stream_sinr(ch: &ChannelSet, v: &[CMat], p: &PowerAllocation, k: usize, m: usize) -> f64 {
    let power = p.get(k, m);
    if power == 0.0 {
        return 0.0;
    }
    let h: CVec = ch.h(k, k) * v[k].column(m);
    power * stream_factor(ch, v, p, k, m).quadratic_inverse(&h)
}

/// `C_k^(m) = log2(1 + SINR)`.
pub fn stream_rate(ch: &ChannelSet, v: &[CMat], p: &PowerAllocation, k: usize, m: usize) -> f64 {
    stream_sinr(ch, v, p, k, m).ln_1p() / std::f64::consts::LN_2
}

/// Factor of `I + Z_k` under equal power `q = P_t / (K d)`.
pub(crate) fn noise_plus_interference_factor(ch: &ChannelSet, v: &[CMat], q: f64, k: usize) -> GramFactor {
    let blocks: Vec<CMat> = (0..ch.users())
        .filter(|&l| l != k)
        .map(|l| ch.h(k, l) * &v[l])
        .collect();
    GramFactor::new(ch.antennas(), blocks.iter().map(|b| (q, b)))
}

/// Factor of `R_k = I + q Σ_l H_kl V_l V_lᴴ H_klᴴ`.
pub(crate) fn received_factor(ch: &ChannelSet, v: &[CMat], q: f64, k: usize) -> GramFactor {
    let blocks: Vec<CMat> = (0..ch.users()).map(|l| ch.h(k, l) * &v[l]).collect();
    GramFactor::new(ch.antennas(), blocks.iter().map(|b| (q, b)))
}

fn equal_stream_power(ch: &ChannelSet, v: &[CMat], total_power: f64) -> f64 {
    let streams: usize = v.iter().map(|b| b.ncols()).sum();
    debug_assert_eq!(v.len(), ch.users());
    total_power / streams as f64
}

/// `log2 det(I + q (I + Z_k)⁻¹ H_kk V_k V_kᴴ H_kkᴴ)` with `q = P_t / (K d)`.
///
/// Evaluated through the `d × d` form `det(I + q Wᴴ W)`, `W = (I+Z_k)^{-1/2} H_kk V_k`.
/// Debug builds cross-check against `log2 det R_k − log2 det(I + Z_k)`.
pub fn user_rate(ch: &ChannelSet, v: &[CMat], k: usize, total_power: f64) -> f64 {
    if total_power == 0.0 {
        return 0.0;
    }
    let q = equal_stream_power(ch, v, total_power);
    let noise = noise_plus_interference_factor(ch, v, q, k);
    let w = noise.whiten(&(ch.h(k, k) * &v[k]));
    let inner = GramFactor::new(w.ncols(), [(q, &w.adjoint())]);
    let rate = inner.ln_det() / std::f64::consts::LN_2;
    debug_assert!({
        let alt = user_rate_logdet_difference(ch, v, k, total_power);
        (alt - rate).abs() <= 1e-8 * (1.0 + alt.abs().max(rate.abs()) + q.log2().abs())
    });
    rate
}

/// `log2 det R_k − log2 det(I + Z_k)`, the second closed form of the user rate.
pub fn user_rate_logdet_difference(ch: &ChannelSet, v: &[CMat], k: usize, total_power: f64) -> f64 {
    if total_power == 0.0 {
        return 0.0;
    }
    let q = equal_stream_power(ch, v, total_power);
    let r = received_factor(ch, v, q, k);
    let z = noise_plus_interference_factor(ch, v, q, k);
    (r.ln_det() - z.ln_det()) / std::f64::consts::LN_2
}

/// Stream-level sum rate with whitened matched filters at every receiver.
pub fn sum_rate_streams(ch: &ChannelSet, v: &[CMat], p: &PowerAllocation) -> RateReport {
    let per_stream = (0..ch.users())
        .map(|k| {
            (0..v[k].ncols())
                .map(|m| stream_rate(ch, v, p, k, m))
                .collect()
        })
        .collect();
    RateReport::from_streams(per_stream)
}

/// User-level sum rate under equal power `P_t / (K d)`.
pub fn sum_rate_users(ch: &ChannelSet, v: &[CMat], total_power: f64) -> RateReport {
    RateReport::from_users(
        (0..ch.users())
            .map(|k| user_rate(ch, v, k, total_power))
            .collect(),
    )
}

/// Stream rates when receiver `k` applies the columns of `U_k` as fixed
/// linear filters (no re-optimization).
pub fn filtered_sum_rate(ch: &ChannelSet, b: &Beamformers, p: &PowerAllocation) -> RateReport {
    let per_stream = (0..ch.users())
        .map(|k| {
            (0..b.v[k].ncols())
                .map(|m| {
                    let u: CVec = b.u[k].column(m).into_owned();
                    let gain = |l: usize, j: usize| -> f64 {
                        let h: CVec = ch.h(k, l) * b.v[l].column(j);
                        u.dotc(&h).norm_sqr()
                    };
                    let signal = p.get(k, m) * gain(k, m);
                    let mut noise = u.norm_squared();
                    for l in 0..ch.users() {
                        for j in 0..b.v[l].ncols() {
                            if (l, j) != (k, m) {
                                noise += p.get(l, j) * gain(l, j);
                            }
                        }
                    }
                    (signal / noise).ln_1p() / std::f64::consts::LN_2
                })
                .collect()
        })
        .collect();
    RateReport::from_streams(per_stream)
}

/// Residuals of the zero-forcing and rank conditions for interference
/// alignment.
pub fn alignment_residual(ch: &ChannelSet, b: &Beamformers) -> AlignmentDiagnostics {
    let users = ch.users();
    let mut per_user_leakage = vec![0.0; users];
    let mut cross_terms: f64 = 0.0;
    let mut rank_margins = Vec::with_capacity(users);
    let mut interference_rank = Vec::with_capacity(users);
    for k in 0..users {
        let mut z = CMat::zeros(ch.antennas(), ch.antennas());
        for l in (0..users).filter(|&l| l != k) {
            let hv = ch.h(k, l) * &b.v[l];
            let cross = b.u[k].adjoint() * &hv;
            let f = cross.norm();
            per_user_leakage[k] += f * f;
            cross_terms = cross_terms.max(f);
            z += &hv * hv.adjoint();
        }
        let own = b.u[k].adjoint() * ch.h(k, k) * &b.v[k];
        rank_margins.push(linalg::singular_values(&own).last().copied().unwrap_or(0.0));
        interference_rank.push(linalg::numerical_rank(&z));
    }
    AlignmentDiagnostics {
        per_user_leakage,
        cross_terms,
        rank_margins,
        interference_rank,
    }
}

/// `sqrt(d − ‖AᴴB‖_F²)` for orthonormal `A`, `B`, computed as
/// `‖B − A AᴴB‖_F` to avoid cancellation.
pub fn chordal_distance(a: &CMat, b: &CMat) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::Shape(format!(
            "chordal distance between {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let deviation = linalg::orthonormality_deviation(a).max(linalg::orthonormality_deviation(b));
    if deviation > 1e-6 {
        return Err(Error::NotOrthonormal { deviation });
    }
    Ok(chordal_unchecked(a, b))
}

fn chordal_unchecked(a: &CMat, b: &CMat) -> f64 {
    let forward = (b - a * (a.adjoint() * b)).norm();
    let backward = (a - b * (b.adjoint() * a)).norm();
    0.5 * (forward + backward)
}

/// Chordal distance between the column spaces of arbitrary full-rank blocks.
pub fn subspace_distance(a: &CMat, b: &CMat) -> f64 {
    chordal_unchecked(&linalg::orthonormalize(a), &linalg::orthonormalize(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::SystemConfig;
    use crate::linalg::{c, identity, random_gaussian};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(k: usize, m: usize, d: usize, seed: u64, snr_db: f64) -> (ChannelSet, Beamformers, SystemConfig) {
        let cfg = SystemConfig::new(k, m, d, 1.0).unwrap().with_snr_db(snr_db);
        let ch = ChannelSet::generate(&cfg, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 1000);
        let b = Beamformers::random(&cfg, &mut rng, true);
        (ch, b, cfg)
    }

    fn random_powers(k: usize, d: usize, rng: &mut ChaCha8Rng) -> PowerAllocation {
        use rand::Rng;
        let flat: Vec<f64> = (0..k * d).map(|_| rng.random_range(0.1..3.0)).collect();
        PowerAllocation::from_flat(k, d, &flat)
    }

    // Naive oracle: literal double loop over (l, j) with explicit outer products.
    fn naive_stream_cov(ch: &ChannelSet, v: &[CMat], p: &PowerAllocation, k: usize, m: usize) -> CMat {
        let n = ch.antennas();
        let mut r = identity(n);
        for l in 0..ch.users() {
            for j in 0..v[l].ncols() {
                let h = ch.h(k, l) * v[l].column(j);
                for a in 0..n {
                    for bb in 0..n {
                        r[(a, bb)] += h[a] * h[bb].conj() * p.get(l, j);
                    }
                }
            }
        }
        let h = ch.h(k, k) * v[k].column(m);
        for a in 0..n {
            for bb in 0..n {
                r[(a, bb)] -= h[a] * h[bb].conj() * p.get(k, m);
            }
        }
        r
    }

    #[test]
    fn interference_cov_is_empty_without_interferers_or_power() {
        let (ch, b, cfg) = setup(1, 2, 1, 1, 10.0);
        let z = interference_cov_user(&ch, &b.v, &PowerAllocation::equal(&cfg), 0);
        assert_eq!(z, CMat::zeros(2, 2));
        let (ch, b, cfg) = setup(3, 2, 1, 1, 10.0);
        let zero = PowerAllocation::equal(&cfg).scaled(0.0);
        assert_eq!(interference_cov_user(&ch, &b.v, &zero, 1).norm(), 0.0);
    }

    #[test]
    fn interference_cov_matches_naive_loop() {
        let (ch, b, _) = setup(3, 2, 1, 4, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = random_powers(3, 1, &mut rng);
        for k in 0..3 {
            let mut naive = CMat::zeros(2, 2);
            for l in (0..3).filter(|&l| l != k) {
                let h = ch.h(k, l) * b.v[l].column(0);
                for a in 0..2 {
                    for bb in 0..2 {
                        naive[(a, bb)] += h[a] * h[bb].conj() * p.get(l, 0);
                    }
                }
            }
            let z = interference_cov_user(&ch, &b.v, &p, k);
            assert!((z - naive).norm() < 1e-12);
        }
    }

    #[test]
    fn stream_cov_single_user_single_stream_is_identity() {
        let (ch, b, cfg) = setup(1, 3, 1, 2, 20.0);
        let r = interference_plus_noise_cov_stream(&ch, &b.v, &PowerAllocation::equal(&cfg), 0, 0);
        assert!((r - identity(3)).norm() < 1e-12);
    }

    #[test]
    fn stream_cov_matches_naive_loop_and_decomposition() {
        let (ch, b, _) = setup(3, 4, 2, 6, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = random_powers(3, 2, &mut rng);
        for k in 0..3 {
            for m in 0..2 {
                let r = interference_plus_noise_cov_stream(&ch, &b.v, &p, k, m);
                let naive = naive_stream_cov(&ch, &b.v, &p, k, m);
                assert!((&r - &naive).norm() < 1e-12, "frobenius error {}", (&r - &naive).norm());
                let mut alt = interference_cov_user(&ch, &b.v, &p, k) + identity(4);
                for j in (0..2).filter(|&j| j != m) {
                    let h = ch.h(k, k) * b.v[k].column(j);
                    alt += (&h * h.adjoint()).scale(p.get(k, j));
                }
                assert!((r - alt).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn stream_rate_scalar_channel_is_one_bit() {
        let ch = ChannelSet::from_entries(1, 1, vec![identity(1)]).unwrap();
        let v = vec![identity(1)];
        let p = PowerAllocation::from_flat(1, 1, &[1.0]);
        assert!((stream_rate(&ch, &v, &p, 0, 0) - 1.0).abs() < 1e-15);
        let p0 = PowerAllocation::from_flat(1, 1, &[0.0]);
        assert_eq!(stream_rate(&ch, &v, &p0, 0, 0), 0.0);
    }

    #[test]
    fn stream_rate_matches_lu_oracle() {
        // Oracle: explicit summation, LU solve on the dense matrix.
        let (ch, b, cfg) = setup(3, 2, 1, 12, 0.0);
        let p = PowerAllocation::equal(&cfg);
        for k in 0..3 {
            let r = naive_stream_cov(&ch, &b.v, &p, k, 0);
            let h: CVec = ch.h(k, k) * b.v[k].column(0);
            let x = r.lu().solve(&h).unwrap();
            let oracle = (1.0 + p.get(k, 0) * h.dotc(&x).re).log2();
            let got = stream_rate(&ch, &b.v, &p, k, 0);
            assert!((got - oracle).abs() < 1e-9 * oracle.abs(), "{got} vs {oracle}");
        }
    }

    #[test]
    fn stream_rate_monotone_in_own_power_without_interference() {
        let (ch, b, _) = setup(1, 3, 2, 5, 0.0);
        let mut last = -1.0;
        for step in 0..20 {
            let pw = step as f64 * 0.5;
            let p = PowerAllocation::from_flat(1, 2, &[pw, 0.0]);
            let r = stream_rate(&ch, &b.v, &p, 0, 0);
            assert!(r >= last);
            last = r;
        }
    }

    #[test]
    fn user_rate_zero_power_and_single_user_eigen_oracle() {
        let (ch, b, cfg) = setup(1, 4, 2, 21, 10.0);
        assert_eq!(user_rate(&ch, &b.v, 0, 0.0), 0.0);
        // Oracle: Σ log2(1 + (P_t/d) λ_i(H V Vᴴ Hᴴ)) from the eigenvalues.
        let s = ch.h(0, 0) * &b.v[0];
        let (vals, _) = linalg::eigh_ascending(&(&s * s.adjoint()));
        let q = cfg.total_power / 2.0;
        let oracle: f64 = vals.iter().map(|&l| (1.0 + q * l.max(0.0)).log2()).sum();
        assert!((user_rate(&ch, &b.v, 0, cfg.total_power) - oracle).abs() < 1e-9);
    }

    #[test]
    fn user_rate_closed_forms_agree() {
        for seed in 0..10 {
            let (ch, b, cfg) = setup(3, 4, 2, seed, 10.0 * seed as f64);
            for k in 0..3 {
                let a = user_rate(&ch, &b.v, k, cfg.total_power);
                let alt = user_rate_logdet_difference(&ch, &b.v, k, cfg.total_power);
                assert!((a - alt).abs() < 1e-9 * (1.0 + a.abs()), "{a} vs {alt}");
            }
        }
    }

    #[test]
    fn reports_aggregate_consistently() {
        let (ch, b, cfg) = setup(3, 4, 2, 30, 10.0);
        let rep = sum_rate_streams(&ch, &b.v, &PowerAllocation::equal(&cfg));
        let streams = rep.per_stream.as_ref().unwrap();
        for (k, row) in streams.iter().enumerate() {
            assert!((row.iter().sum::<f64>() - rep.per_user[k]).abs() < 1e-12);
            assert!(row.iter().all(|&r| r >= 0.0));
        }
        assert!((rep.per_user.iter().sum::<f64>() - rep.total).abs() < 1e-9);
        let zero = sum_rate_streams(&ch, &b.v, &PowerAllocation::equal(&cfg).scaled(0.0));
        assert_eq!(zero.total, 0.0);
        assert_eq!(sum_rate_users(&ch, &b.v, 0.0).total, 0.0);
    }

    #[test]
    fn single_user_single_stream_reports_agree() {
        let (ch, b, cfg) = setup(1, 2, 1, 31, 10.0);
        let p = PowerAllocation::equal(&cfg);
        let s = sum_rate_streams(&ch, &b.v, &p).total;
        let u = sum_rate_users(&ch, &b.v, cfg.total_power).total;
        let r = stream_rate(&ch, &b.v, &p, 0, 0);
        assert!((s - r).abs() < 1e-12 && (u - r).abs() < 1e-9);
    }

    #[test]
    fn rate_report_csv_and_json() {
        let rep = RateReport::from_streams(vec![vec![1.0, 2.0], vec![0.5, 0.25]]);
        let csv = rep.to_csv();
        assert!(csv.starts_with("k,m,rate_bits\n0,0,1\n"));
        assert_eq!(csv.lines().count(), 5);
        let back: RateReport = serde_json::from_str(&rep.to_json()).unwrap();
        assert_eq!(back, rep);
    }

    #[test]
    fn random_beamformers_leak() {
        let mut below = 0;
        for seed in 0..100 {
            let (ch, b, _) = setup(3, 2, 1, 500 + seed, 0.0);
            if alignment_residual(&ch, &b).cross_terms <= 0.01 {
                below += 1;
            }
        }
        assert!(below <= 2, "{below} of 100 random draws looked aligned");
    }

    #[test]
    fn constructed_null_direction_zeroes_cross_term() {
        // Two users, M = 2: H_01 has null vector e_1, so V_1 = e_1 never
        // reaches receiver 0.
        let mut entries = vec![identity(2); 4];
        entries[1] = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(2.0, 1.0), c(0.0, 0.0)]);
        let ch = ChannelSet::from_entries(2, 2, entries).unwrap();
        let e0 = CMat::from_column_slice(2, 1, &[c(1.0, 0.0), c(0.0, 0.0)]);
        let e1 = CMat::from_column_slice(2, 1, &[c(0.0, 0.0), c(1.0, 0.0)]);
        let b = Beamformers::new(vec![e0.clone(), e1.clone()], vec![e0.clone(), e1.clone()]).unwrap();
        let diag = alignment_residual(&ch, &b);
        let cross01 = (b.u[0].adjoint() * ch.h(0, 1) * &b.v[1]).norm();
        assert_eq!(cross01, 0.0);
        assert_eq!(diag.per_user_leakage[0], 0.0);
        assert!(diag.rank_margins.iter().all(|&s| s > 0.0));
    }

    #[test]
    fn chordal_distance_basics() {
        let a = CMat::from_column_slice(2, 1, &[c(1.0, 0.0), c(0.0, 0.0)]);
        let b = CMat::from_column_slice(2, 1, &[c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(chordal_distance(&a, &a).unwrap(), 0.0);
        assert!((chordal_distance(&a, &b).unwrap() - 1.0).abs() < 1e-15);
        let bad = CMat::from_column_slice(2, 1, &[c(2.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(chordal_distance(&a, &bad), Err(Error::NotOrthonormal { .. })));
    }

    #[test]
    fn chordal_distance_is_unitary_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..20 {
            let a = linalg::orthonormalize(&random_gaussian(&mut rng, 4, 2));
            let b = linalg::orthonormalize(&random_gaussian(&mut rng, 4, 2));
            let q = linalg::orthonormalize(&random_gaussian(&mut rng, 2, 2));
            let d0 = chordal_distance(&a, &b).unwrap();
            let d1 = chordal_distance(&a, &(&b * &q)).unwrap();
            assert!((d0 - d1).abs() < 1e-10);
            let alt = (2.0 - (a.adjoint() * &b).norm_squared()).max(0.0).sqrt();
            assert!((d0 - alt).abs() < 1e-10);
        }
    }
}
