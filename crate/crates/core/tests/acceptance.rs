//! Acceptance criteria 1-11, one PASS/FAIL line each.
//!
//! Runs as a plain binary (`harness = false`) and exits non-zero when any
//! criterion fails. Diagnostics are printed indented above each verdict.

use std::f64::consts::LN_2;
use std::process::ExitCode;
use std::time::Instant;

use beamalign::alignment::{self, IiaOptions};
use beamalign::channel::{total_power_for_snr_db, Beamformers, ChannelSet, PowerAllocation, SystemConfig};
use beamalign::experiments::{
    self, cluster_fixed_points, derive_seed, multi_start, Clustering, RunOptions, DEFAULT_CLUSTER_TOL,
    DEFAULT_RATE_TOL,
};
use beamalign::gradient::{self, GradientOptions};
use beamalign::linalg::{self, CMat};
use beamalign::maxsinr::{self, MaxSinrOptions};
use beamalign::metrics;
use beamalign::solution::{self, Algorithm, Solution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CHANNEL_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
const INITS: usize = 500;

fn init_master(channel_seed: u64) -> u64 {
    1000 + channel_seed
}

fn cfg(m: usize, d: usize, snr_db: f64) -> SystemConfig {
    SystemConfig::new(3, m, d, 1.0).unwrap().with_snr_db(snr_db)
}

fn cluster(runs: &[experiments::Run]) -> Clustering {
    let refs: Vec<&Solution> = runs.iter().map(|r| &r.solution).collect();
    cluster_fixed_points(&refs, DEFAULT_CLUSTER_TOL, DEFAULT_RATE_TOL)
}

/// IIA on one channel from its standard init sequence.
fn iia_point(m: usize, d: usize, seed: u64) -> (SystemConfig, ChannelSet, Beamformers) {
    let cfg = cfg(m, d, 80.0);
    let ch = ChannelSet::generate(&cfg, seed);
    let init = experiments::initial_beamformers(&cfg, Algorithm::Iia, derive_seed(init_master(seed), 0));
    let run = alignment::iia(&ch, &cfg, &init, &IiaOptions::default()).unwrap();
    assert!(run.converged, "IIA did not converge on channel {seed}");
    (cfg, ch, run.beamformers)
}

struct IiaModes {
    ch: ChannelSet,
    clustering: Clustering,
}

struct Verdict {
    pass: bool,
    summary: String,
}

fn verdict(pass: bool, summary: impl Into<String>) -> Verdict {
    Verdict { pass, summary: summary.into() }
}

fn criterion_1(modes: &mut Vec<IiaModes>) -> Verdict {
    let mut ok = true;
    let mut counts = Vec::new();
    let mut slowest: f64 = 0.0;
    for &seed in &CHANNEL_SEEDS {
        let cfg = cfg(2, 1, 40.0);
        let ch = ChannelSet::generate(&cfg, seed);
        let start = Instant::now();
        let runs = multi_start(&ch, &cfg, Algorithm::Iia, INITS, init_master(seed), &RunOptions::default()).unwrap();
        let c = cluster(&runs);
        let secs = start.elapsed().as_secs_f64();
        slowest = slowest.max(secs);
        println!(
            "    channel {seed}: {} clusters, {} not converged, {secs:.1} s",
            c.clusters.len(),
            c.non_converged
        );
        ok &= c.clusters.len() == 2 && secs < 60.0;
        counts.push(c.clusters.len());
        if seed == CHANNEL_SEEDS[0] {
            modes.push(IiaModes { ch, clustering: c });
        }
    }
    verdict(ok, format!("(M,d)=(2,1) cluster counts {counts:?}, slowest channel {slowest:.1} s"))
}

fn criterion_2(modes: &mut Vec<IiaModes>) -> Verdict {
    let mut counts = Vec::new();
    for &seed in &CHANNEL_SEEDS {
        let cfg = cfg(4, 2, 40.0);
        let ch = ChannelSet::generate(&cfg, seed);
        let start = Instant::now();
        let runs = multi_start(&ch, &cfg, Algorithm::Iia, INITS, init_master(seed), &RunOptions::default()).unwrap();
        let c = cluster(&runs);
        println!(
            "    channel {seed}: {} clusters, {} not converged, {:.1} s",
            c.clusters.len(),
            c.non_converged,
            start.elapsed().as_secs_f64()
        );
        counts.push(c.clusters.len());
        if seed == CHANNEL_SEEDS[0] {
            modes.push(IiaModes { ch, clustering: c });
        }
    }
    let six = counts.iter().filter(|&&n| n == 6).count();
    let ok = counts.iter().all(|&n| n <= 6) && 2 * six > counts.len();
    verdict(ok, format!("(M,d)=(4,2) cluster counts {counts:?}, {six} of {} channels with 6", counts.len()))
}

fn criterion_3(modes: &[IiaModes]) -> Verdict {
    let mut worst: f64 = 0.0;
    for m in modes {
        let k = m.ch.users();
        let d = m.clustering.clusters[0].representative.beamformers.streams();
        let slope = (k * d) as f64 * 10f64.log2();
        for c in &m.clustering.clusters {
            let inner = &c.representative.beamformers;
            let at = |snr: f64| total_power_for_snr_db(snr, k, d);
            let equal = metrics::sum_rate_users(&m.ch, &inner.v, at(80.0)).total
                - metrics::sum_rate_users(&m.ch, &inner.v, at(70.0)).total;
            let optimal = alignment::two_layer_design(&m.ch, inner, at(80.0)).unwrap().rate
                - alignment::two_layer_design(&m.ch, inner, at(70.0)).unwrap().rate;
            println!(
                "    d={d} {}: equal power {equal:.4}, two-layer {optimal:.4} (expected {slope:.4})",
                c.label
            );
            worst = worst.max((equal - slope).abs()).max((optimal - slope).abs());
        }
    }
    verdict(worst <= 0.15, format!("worst |rate(80 dB) - rate(70 dB) - K d log2(10)| = {worst:.4} bits"))
}

fn criterion_4() -> Verdict {
    let mut worst: f64 = 0.0;
    for (m, d) in [(2, 1), (4, 2)] {
        for &seed in &CHANNEL_SEEDS {
            let (cfg, ch, ia) = iia_point(m, d, seed);
            let p = PowerAllocation::equal(&cfg);
            let (u, v) = maxsinr::composite_step(&ch, &ch.reciprocal(), &ia.v, &p, true).unwrap();
            for k in 0..cfg.users {
                worst = worst
                    .max(metrics::subspace_distance(&ia.v[k], &v[k]))
                    .max(metrics::subspace_distance(&ia.u[k], &u[k]));
            }
        }
    }
    verdict(worst < 1e-3, format!("largest per-user V/U subspace change at 80 dB: {worst:.2e}"))
}

fn criterion_5() -> Verdict {
    let one_step = MaxSinrOptions { max_iter: 1, ..Default::default() };
    let mut worst_optimal: f64 = 0.0;
    let mut least_identity = f64::INFINITY;
    for &seed in &CHANNEL_SEEDS {
        let (cfg, ch, ia) = iia_point(4, 2, seed);
        let design = alignment::two_layer_design(&ch, &ia, cfg.total_power).unwrap();
        let at_optimal = maxsinr::run_max_sinr(&ch, &cfg, &design.composed, &one_step).unwrap();
        let at_identity = maxsinr::run_max_sinr(&ch, &cfg, &ia, &one_step).unwrap();
        println!(
            "    channel {seed}: two-layer point {:.2e}, identity outer coders {:.2e}",
            at_optimal.final_residual, at_identity.final_residual
        );
        worst_optimal = worst_optimal.max(at_optimal.final_residual);
        least_identity = least_identity.min(at_identity.final_residual);
    }
    verdict(
        worst_optimal < 1e-6 && least_identity > 1e-3,
        format!(
            "first-iteration displacement: two-layer point max {worst_optimal:.2e} (< 1e-6), identity outer min {least_identity:.2e} (> 1e-3)"
        ),
    )
}

fn criterion_6(iia_42: &IiaModes) -> Verdict {
    let ch = &iia_42.ch;
    let mut worst: f64 = 0.0;
    let mut farthest: f64 = 0.0;
    let mut ok = true;
    for snr in [40.0, 60.0] {
        let cfg = cfg(4, 2, snr);
        let designs: Vec<_> = iia_42
            .clustering
            .clusters
            .iter()
            .map(|c| alignment::two_layer_design(ch, &c.representative.beamformers, cfg.total_power).unwrap())
            .collect();
        let runs = multi_start(ch, &cfg, Algorithm::MaxSinr, 60, 77, &RunOptions::default()).unwrap();
        let ms = cluster(&runs);
        ok &= ms.non_converged == 0;
        for c in &ms.clusters {
            let (best, dist) = iia_42
                .clustering
                .clusters
                .iter()
                .enumerate()
                .map(|(i, ia)| {
                    (i, solution::max_subspace_distance(&c.representative.beamformers.v, &ia.representative.beamformers.v))
                })
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            let gap = c.mean_rate - designs[best].rate;
            println!(
                "    {snr} dB max-SINR {} ({:.1}%): {:.2} bits, two-layer {} {:.2} bits, subspace distance {dist:.1e}",
                c.label,
                100.0 * c.count as f64 / ms.converged() as f64,
                c.mean_rate,
                iia_42.clustering.clusters[best].label,
                designs[best].rate
            );
            worst = worst.max(gap.abs());
            farthest = farthest.max(dist);
        }
    }
    verdict(
        ok && worst <= 0.2,
        format!("(4,2) max-SINR modes vs two-layer optimum: worst rate gap {worst:.3} bits, farthest match {farthest:.1e}"),
    )
}

fn criterion_7() -> Verdict {
    let start = Instant::now();
    let study = experiments::zf_gap_study(&cfg(4, 2, 60.0), 100, 60.0, 7, &RunOptions::default()).unwrap();
    println!(
        "    {} channels used, {} skipped, std error {:.3}, 95% interval [{:.3}, {:.3}], {:.1} s",
        study.gaps.len(),
        study.skipped.len(),
        study.std_error,
        study.ci95.0,
        study.ci95.1,
        start.elapsed().as_secs_f64()
    );
    verdict(
        (study.mean - 4.328).abs() <= 0.5,
        format!("mean gap {:.3} bits vs 4.328 (theory {:.3})", study.mean, study.theoretical),
    )
}

fn frob(blocks: &[CMat]) -> f64 {
    blocks.iter().map(|b| b.norm_squared()).sum::<f64>().sqrt()
}

fn criterion_8() -> Verdict {
    let mut monotone = true;
    let mut worst_move: f64 = 0.0;
    let mut summary = Vec::new();
    for &seed in &CHANNEL_SEEDS {
        let (_, ch, ia) = iia_point(4, 2, seed);
        let norms: Vec<f64> = [40.0, 60.0, 80.0]
            .iter()
            .map(|&snr| frob(&gradient::sum_rate_gradient(&ch, &ia.v, total_power_for_snr_db(snr, 3, 2))))
            .collect();
        let tangent: Vec<f64> = [40.0, 60.0, 80.0]
            .iter()
            .map(|&snr| {
                let g = gradient::sum_rate_gradient(&ch, &ia.v, total_power_for_snr_db(snr, 3, 2));
                let t: Vec<CMat> = g.iter().zip(&ia.v).map(|(g, v)| gradient::project_tangent(v, g)).collect();
                frob(&t)
            })
            .collect();
        monotone &= norms[1] < norms[0] && norms[2] < norms[1];
        let cfg = cfg(4, 2, 80.0);
        let opts = GradientOptions { max_iter: 50, grad_tol: 1e-300, ..Default::default() };
        let sol = gradient::run_gradient_ascent(&ch, &cfg, &ia, &opts).unwrap();
        let moved = (0..3)
            .map(|k| metrics::subspace_distance(&ia.v[k], &sol.beamformers.v[k]))
            .fold(0.0, f64::max);
        worst_move = worst_move.max(moved);
        println!(
            "    channel {seed}: |grad| at 40/60/80 dB = {:.4e} {:.4e} {:.4e} (tangent {:.4e} {:.4e} {:.4e}); 50 ascent steps move {moved:.2e}",
            norms[0], norms[1], norms[2], tangent[0], tangent[1], tangent[2]
        );
        summary.push(format!("{:.3}/{:.3}/{:.3}", norms[0], norms[1], norms[2]));
    }
    verdict(
        monotone && worst_move < 1e-3,
        format!(
            "gradient norm decreasing over 40/60/80 dB: {monotone} ({}); largest move over 50 steps {worst_move:.2e}",
            summary.join(", ")
        ),
    )
}

fn criterion_9() -> Verdict {
    let seed = CHANNEL_SEEDS[0];
    let cfg = cfg(4, 2, 80.0);
    let ch = ChannelSet::generate(&cfg, seed);
    let init = experiments::initial_beamformers(&cfg, Algorithm::MaxSinr, derive_seed(init_master(seed), 0));
    let tight = MaxSinrOptions { fp_tol: 1e-10, max_iter: 20_000, ..Default::default() };
    let fp = maxsinr::run_max_sinr(&ch, &cfg, &init, &tight).unwrap();
    println!(
        "    fixed point: {} iterations, displacement {:.1e}, converged {}",
        fp.iterations, fp.final_residual, fp.converged
    );
    let eps = 1e-3;
    let full = maxsinr::perturb_and_measure(&ch, &cfg, &fp, eps, 20, 8, true, 9).unwrap();
    let half = maxsinr::perturb_and_measure(&ch, &cfg, &fp, eps / 2.0, 20, 8, true, 9).unwrap();
    let scaling = half.median_post_iteration / full.median_post_iteration;
    println!(
        "    eps {eps:.1e}: median ratio {:.4}, median post-iteration distance {:.4e}",
        full.median_ratio, full.median_post_iteration
    );
    println!(
        "    eps {:.1e}: median ratio {:.4}, median post-iteration distance {:.4e}",
        eps / 2.0,
        half.median_ratio,
        half.median_post_iteration
    );
    let mut exponents = Vec::new();
    let mut prev = full.median_post_iteration;
    for i in 1..=3 {
        let e = eps / 4f64.powi(i);
        let r = maxsinr::perturb_and_measure(&ch, &cfg, &fp, e, 20, 1, true, 9).unwrap();
        exponents.push((prev / r.median_post_iteration).ln() / 4f64.ln());
        prev = r.median_post_iteration;
    }
    println!("    local scaling exponents of the post-iteration distance in eps: {exponents:.3?}");
    verdict(
        fp.converged && full.median_ratio < 1.0 && scaling <= 0.5,
        format!(
            "median contraction ratio {:.4} (< 1); post-iteration distance ratio at eps/2 {scaling:.5} (<= 0.5)",
            full.median_ratio
        ),
    )
}

fn top_eigenvector(h: &CMat) -> CMat {
    let (_, vecs) = linalg::eigh_ascending(&(h.adjoint() * h));
    vecs.columns(vecs.ncols() - 1, 1).into_owned()
}

fn criterion_10() -> Verdict {
    let mut counts = Vec::new();
    let mut least_first: f64 = 1.0;
    let mut least_best: f64 = 1.0;
    let mut occupancy_ok = true;
    for &seed in &CHANNEL_SEEDS {
        let cfg = cfg(4, 2, 0.0);
        let ch = ChannelSet::generate(&cfg, seed);
        let runs = multi_start(&ch, &cfg, Algorithm::MaxSinr, 100, init_master(seed), &RunOptions::default()).unwrap();
        let c = cluster(&runs);
        counts.push(c.clusters.len());
        occupancy_ok &= c.non_converged == 0 && c.clusters.len() == 1 && (c.occupancy_percent(0) - 100.0).abs() < 1e-9;
        let v = &c.clusters[0].representative.beamformers.v;
        let mut first = Vec::new();
        for k in 0..3 {
            let e = top_eigenvector(ch.h(k, k));
            let corr: Vec<f64> = (0..2).map(|j| v[k].column(j).dotc(&e.column(0)).norm()).collect();
            least_first = least_first.min(corr[0]);
            least_best = least_best.min(corr[0].max(corr[1]));
            first.push(format!("{:.3}/{:.3}", corr[0], corr[1]));
        }
        println!(
            "    channel {seed}: {} cluster(s), rate {:.2}; |v_k^(j) . top eigvec| per user (stream 1/stream 2): {}",
            c.clusters.len(),
            c.clusters[0].mean_rate,
            first.join(", ")
        );
    }
    verdict(
        occupancy_ok && least_first > 0.99,
        format!(
            "0 dB (4,2) cluster counts {counts:?}; smallest first-stream correlation {least_first:.3} (best stream {least_best:.3}, need > 0.99)"
        ),
    )
}

fn rate(gains: &[f64], powers: &[f64]) -> f64 {
    gains.iter().zip(powers).map(|(g, p)| (1.0 + g * p).log2()).sum()
}

/// Zooming grid search over the simplex `Σ p = total` for two or three channels.
fn grid_waterfill(gains: &[f64], total: f64) -> Vec<f64> {
    let n = gains.len();
    let steps = 400;
    let (mut lo, mut hi) = (vec![0.0; n - 1], vec![total; n - 1]);
    let mut best = vec![total / n as f64; n];
    for _ in 0..6 {
        let mut best_rate = f64::NEG_INFINITY;
        let width: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| h - l).collect();
        let mut visit = |p: Vec<f64>| {
            let last = total - p.iter().sum::<f64>();
            if last < -1e-15 {
                return;
            }
            let mut full = p;
            full.push(last.max(0.0));
            let r = rate(gains, &full);
            if r > best_rate {
                best_rate = r;
                best = full;
            }
        };
        if n == 2 {
            for i in 0..=steps {
                visit(vec![lo[0] + width[0] * i as f64 / steps as f64]);
            }
        } else {
            for i in 0..=steps {
                for j in 0..=steps {
                    visit(vec![
                        lo[0] + width[0] * i as f64 / steps as f64,
                        lo[1] + width[1] * j as f64 / steps as f64,
                    ]);
                }
            }
        }
        for i in 0..n - 1 {
            let step = width[i] / steps as f64;
            lo[i] = (best[i] - 2.0 * step).max(0.0);
            hi[i] = (best[i] + 2.0 * step).min(total);
        }
    }
    best
}

/// `I + Σ` (or just `Σ`) of `p h hᴴ` with every product written out.
fn naive_cov(ch: &ChannelSet, v: &[CMat], p: &PowerAllocation, k: usize, skip: impl Fn(usize, usize) -> bool, identity: bool) -> CMat {
    let m = ch.antennas();
    let mut out = CMat::zeros(m, m);
    for l in 0..ch.users() {
        let h = ch.h(k, l);
        for j in 0..v[l].ncols() {
            if skip(l, j) {
                continue;
            }
            for a in 0..m {
                for b in 0..m {
                    let mut ra = linalg::c(0.0, 0.0);
                    let mut rb = linalg::c(0.0, 0.0);
                    for c in 0..m {
                        ra += h[(a, c)] * v[l][(c, j)];
                        rb += h[(b, c)] * v[l][(c, j)];
                    }
                    out[(a, b)] += ra * rb.conj() * p.get(l, j);
                }
            }
        }
    }
    if identity {
        for a in 0..m {
            out[(a, a)] += linalg::c(1.0, 0.0);
        }
    }
    out
}

fn criterion_11() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(11);

    let mut wf_worst: f64 = 0.0;
    for trial in 0..20 {
        let n = 2 + trial % 2;
        let gains: Vec<f64> = (0..n).map(|_| 10f64.powf(rng.random_range(-1.5..1.5))).collect();
        let total = 10f64.powf(rng.random_range(-1.0..1.5));
        let wf = alignment::waterfill(&gains, total).unwrap();
        let grid = grid_waterfill(&gains, total);
        let err = wf.powers.iter().zip(&grid).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / total;
        assert!(rate(&gains, &wf.powers) >= rate(&gains, &grid) - 1e-12);
        wf_worst = wf_worst.max(err);
    }

    let mut fd_worst: f64 = 0.0;
    for trial in 0..40u64 {
        let (m, d) = if trial % 2 == 0 { (2, 1) } else { (4, 2) };
        let cfg = cfg(m, d, rng.random_range(0.0..40.0));
        let ch = ChannelSet::generate(&cfg, 500 + trial);
        let b = Beamformers::random(&cfg, &mut rng, false);
        let dir: Vec<CMat> = (0..3).map(|_| linalg::random_gaussian(&mut rng, m, d)).collect();
        let g = gradient::sum_rate_gradient(&ch, &b.v, cfg.total_power);
        let analytic = g.iter().zip(&dir).map(|(g, x)| 2.0 * g.dotc(x).re).sum::<f64>() / LN_2;
        // Richardson-extrapolated central difference.
        let c_at = |t: f64| {
            let v: Vec<CMat> = b.v.iter().zip(&dir).map(|(v, x)| v + x * linalg::c(t, 0.0)).collect();
            metrics::sum_rate_users(&ch, &v, cfg.total_power).total
        };
        let h = 1e-3 / (1.0 + cfg.per_stream_power().sqrt());
        let d1 = (c_at(h) - c_at(-h)) / (2.0 * h);
        let d2 = (c_at(h / 2.0) - c_at(-h / 2.0)) / h;
        let numeric = (4.0 * d2 - d1) / 3.0;
        fd_worst = fd_worst.max((analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-12));
    }

    let mut cov_worst: f64 = 0.0;
    for trial in 0..20u64 {
        let (m, d) = if trial % 2 == 0 { (2, 1) } else { (4, 2) };
        let cfg = cfg(m, d, 10.0);
        let ch = ChannelSet::generate(&cfg, 900 + trial);
        let b = Beamformers::random(&cfg, &mut rng, false);
        let flat: Vec<f64> = (0..3 * d).map(|_| rng.random_range(0.1..5.0)).collect();
        let p = PowerAllocation::from_flat(3, d, &flat);
        for k in 0..3 {
            let z = metrics::interference_cov_user(&ch, &b.v, &p, k);
            cov_worst = cov_worst.max((z - naive_cov(&ch, &b.v, &p, k, |l, _| l == k, false)).norm());
            for s in 0..d {
                let r = metrics::interference_plus_noise_cov_stream(&ch, &b.v, &p, k, s);
                cov_worst =
                    cov_worst.max((r - naive_cov(&ch, &b.v, &p, k, |l, j| l == k && j == s, true)).norm());
            }
        }
    }
    println!("    water-filling vs grid: max power error {wf_worst:.2e} of P_t");
    println!("    gradient vs finite differences: max relative error {fd_worst:.2e}");
    println!("    covariance builders vs naive loops: max Frobenius error {cov_worst:.2e}");
    verdict(
        wf_worst <= 1e-4 && fd_worst <= 1e-5 && cov_worst <= 1e-12,
        format!("water-filling {wf_worst:.1e} (<= 1e-4), gradient {fd_worst:.1e} (<= 1e-5), covariances {cov_worst:.1e} (<= 1e-12)"),
    )
}

fn main() -> ExitCode {
    // `ACCEPTANCE_ONLY=8,9` runs a subset (criteria 3 and 6 need 1 and 2).
    let only: Option<Vec<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let mut modes = Vec::new();
    let run = |id: u32, name: &str, f: &mut dyn FnMut() -> Verdict| {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            return true;
        }
        println!("criterion {id}: {name}");
        let start = Instant::now();
        let v = f();
        println!(
            "{} {id:>2} {name}: {} [{:.1} s]",
            if v.pass { "PASS" } else { "FAIL" },
            v.summary,
            start.elapsed().as_secs_f64()
        );
        v.pass
    };
    let mut results = Vec::new();
    results.push(run(1, "fixed-point count (M,d)=(2,1)", &mut || criterion_1(&mut modes)));
    results.push(run(2, "fixed-point count (M,d)=(4,2)", &mut || criterion_2(&mut modes)));
    results.push(run(3, "high-SNR slope", &mut || criterion_3(&modes)));
    results.push(run(4, "IA subspaces invariant under one max-SINR iteration", &mut criterion_4));
    results.push(run(5, "two-layer optimum is a max-SINR fixed point", &mut criterion_5));
    results.push(run(6, "max-SINR modes match two-layer optima", &mut || criterion_6(&modes[1])));
    results.push(run(7, "zero-forcing outer gap", &mut criterion_7));
    results.push(run(8, "IA point is a gradient fixed point at high SNR", &mut criterion_8));
    results.push(run(9, "perturbation decay around a max-SINR fixed point", &mut criterion_9));
    results.push(run(10, "low-SNR single mode", &mut criterion_10));
    results.push(run(11, "oracle suites", &mut criterion_11));
    let failed = results.iter().filter(|&&p| !p).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
