use std::collections::HashSet;
use std::io::Write;
use std::path::Path;

use beamalign::alignment::{self, TwoLayerSolution};
use beamalign::channel::{ChannelSeed, ChannelSet, SystemConfig};
use beamalign::experiments::{
    self, persist, report, Clustering, RunOptions, SweepPoint, SweepRecord, NOT_CONVERGED,
};
use beamalign::solution::Algorithm;
use serde::{Deserialize, Serialize};

use crate::config::{parse_snr_range, pick, CliConfig};
use crate::{CliError, Dims, ReportFormat, RunArgs, SweepArgs, EXIT_CONVERGENCE};

pub const RUN_KIND: &str = "run";
pub const GAP_KIND: &str = "zf-gap";

/// What `run --out` writes.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunDocument {
    pub algorithm: Algorithm,
    pub config: SystemConfig,
    pub seed: u64,
    pub channel_seed: Option<u64>,
    pub point: SweepPoint,
    /// Two-layer design recomputed from the best mode's init.
    pub design: Option<TwoLayerSolution>,
}

fn write_err(e: std::io::Error) -> CliError {
    CliError::io(format!("cannot write output: {e}"))
}

macro_rules! say {
    ($out:expr, $($arg:tt)*) => {
        writeln!($out, $($arg)*).map_err(write_err)?
    };
}

fn system(dims: &Dims, file: &CliConfig, snr_db: f64) -> Result<SystemConfig, CliError> {
    let users = pick(dims.users, file.users, "--K")?;
    let antennas = pick(dims.antennas, file.antennas, "--M")?;
    let streams = pick(dims.streams, file.streams, "--d")?;
    Ok(SystemConfig::new(users, antennas, streams, 0.0)?.with_snr_db(snr_db))
}

fn channel_seed(ch: &ChannelSet) -> Option<u64> {
    match ch.seed() {
        ChannelSeed::Seeded(s) => Some(s),
        ChannelSeed::External => None,
    }
}

/// Loads the channel file and checks it against any dimensions given.
fn load_channel(path: Option<&Path>, dims: &Dims, file: &CliConfig) -> Result<(ChannelSet, usize), CliError> {
    let path = path.ok_or_else(|| CliError::config("missing --channels FILE"))?;
    let ch = ChannelSet::load(path)?;
    for (name, given, actual) in [
        ("K", dims.users.or(file.users), ch.users()),
        ("M", dims.antennas.or(file.antennas), ch.antennas()),
    ] {
        if given.is_some_and(|g| g != actual) {
            return Err(CliError::config(format!(
                "{name} = {} does not match the channel file ({name} = {actual})",
                given.unwrap()
            )));
        }
    }
    let streams = pick(dims.streams, file.streams, "--d")?;
    Ok((ch, streams))
}

pub fn gen_channels(
    file: &CliConfig,
    dims: &Dims,
    seed: Option<u64>,
    path: &Path,
    out: &mut impl Write,
) -> Result<(), CliError> {
    let users = pick(dims.users, file.users, "--K")?;
    let antennas = pick(dims.antennas, file.antennas, "--M")?;
    let streams = dims.streams.or(file.streams).unwrap_or((antennas / 2).max(1));
    let cfg = SystemConfig::new(users, antennas, streams, 1.0)?;
    let seed = file.seed(seed)?;
    let ch = ChannelSet::generate(&cfg, seed);
    ch.save(path)?;
    say!(out, "seed: {seed}");
    say!(out, "K={users} M={antennas}");
    say!(out, "condition numbers:");
    let cond = ch.condition_numbers();
    for k in 0..users {
        let row: Vec<String> = (0..users).map(|l| format!("{:.2}", cond[k * users + l])).collect();
        say!(out, "  rx {k}: {}", row.join(" "));
    }
    say!(out, "wrote {}", path.display());
    Ok(())
}

fn table(out: &mut impl Write, clustering: &Clustering, total: usize) -> Result<(), CliError> {
    say!(out, "runs: {total}, converged: {}, not converged: {}", clustering.converged(), clustering.non_converged);
    say!(out, "clusters: {}", clustering.clusters.len());
    say!(out, "| Mode | Rate (bits) | Occupancy (%) | Runs |");
    say!(out, "|---|---:|---:|---:|");
    for (i, c) in clustering.clusters.iter().enumerate() {
        say!(out, "| {} | {:.2} | {:.1} | {} |", c.label, c.mean_rate, clustering.occupancy_percent(i), c.count);
    }
    match clustering.average_rate() {
        Some(avg) => say!(out, "average rate: {avg:.2} bits"),
        None => say!(out, "average rate: -"),
    }
    Ok(())
}

fn too_many_failures(failed: usize, total: usize) -> bool {
    2 * failed > total
}

fn convergence_failure(failed: usize, total: usize) -> CliError {
    CliError {
        code: EXIT_CONVERGENCE,
        message: format!("{failed} of {total} runs did not converge"),
    }
}

fn best_design(
    ch: &ChannelSet,
    cfg: &SystemConfig,
    algo: Algorithm,
    point: &SweepPoint,
    opts: &RunOptions,
) -> Result<Option<TwoLayerSolution>, CliError> {
    let Some(best) = point.clustering.clusters.first() else {
        return Ok(None);
    };
    let init_seed = point.runs[best.members[0]].init_seed;
    let init = experiments::initial_beamformers(cfg, algo, init_seed);
    let inner = alignment::iia(ch, cfg, &init, &opts.iia)?.beamformers;
    Ok(Some(match algo {
        Algorithm::TwoLayer => alignment::two_layer_design(ch, &inner, cfg.total_power)?,
        _ => alignment::zero_forcing_outer(ch, &inner, cfg.total_power)?,
    }))
}

pub fn run(file: &CliConfig, workers: Option<usize>, args: &RunArgs, out: &mut impl Write) -> Result<(), CliError> {
    let opts = file.run_options(workers)?;
    let algo = pick(args.algo, file.algo, "--algo")?;
    let snr_db = pick(args.snr_db, file.snr_db, "--snr-db")?;
    let inits = pick(args.inits, file.inits, "--inits")?;
    let seed = file.seed(args.seed)?;
    let (ch, streams) = load_channel(args.channels.as_deref(), &args.dims, file)?;
    let cfg = SystemConfig::new(ch.users(), ch.antennas(), streams, 0.0)?.with_snr_db(snr_db);
    let point = experiments::sweep_point(&ch, &cfg, algo, snr_db, inits, seed, &opts)?;
    let design = match algo {
        Algorithm::TwoLayer | Algorithm::ZfOuter => best_design(&ch, &cfg, algo, &point, &opts)?,
        _ => None,
    };

    say!(out, "algorithm: {algo}");
    say!(out, "K={} M={} d={} snr_db={snr_db:.1} seed={seed}", cfg.users, cfg.antennas, cfg.streams);
    table(out, &point.clustering, point.runs.len())?;
    if let Some(d) = &design {
        let check: f64 = d
            .singular_values
            .iter()
            .enumerate()
            .flat_map(|(k, s)| s.iter().enumerate().map(move |(m, s)| (k, m, s)))
            .map(|(k, m, s)| (1.0 + d.powers.get(k, m) * s * s).log2())
            .sum();
        say!(out, "design rate (F1 init): {:.2} bits", d.rate);
        say!(out, "sum log2(1 + p sigma^2): {check:.2} bits");
        if let Some(level) = d.water_level {
            say!(out, "water level: {level:.4}");
        }
    }

    let failed = point.clustering.non_converged;
    let total = point.runs.len();
    if let Some(path) = &args.out {
        let doc = RunDocument {
            algorithm: algo,
            config: cfg,
            seed,
            channel_seed: channel_seed(&ch),
            point,
            design,
        };
        persist::save_json(path, RUN_KIND, &doc)?;
        say!(out, "wrote {}", path.display());
    }
    if too_many_failures(failed, total) {
        return Err(convergence_failure(failed, total));
    }
    Ok(())
}

fn snr_key(snr: f64) -> i64 {
    (snr * 1e6).round() as i64
}

pub fn sweep(file: &CliConfig, workers: Option<usize>, args: &SweepArgs, out: &mut impl Write) -> Result<(), CliError> {
    let opts = file.run_options(workers)?;
    let algo = pick(args.algo, file.algo, "--algo")?;
    let inits = pick(args.inits, file.inits, "--inits")?;
    let snrs = parse_snr_range(&args.snr_db)?;
    let seed = file.seed(args.seed)?;
    let (ch, streams) = load_channel(args.channels.as_deref(), &args.dims, file)?;
    let cfg = SystemConfig::new(ch.users(), ch.antennas(), streams, 1.0)?;
    let ch_seed = channel_seed(&ch);
    if inits == 0 {
        return Err(CliError::config("--inits must be at least 1"));
    }
    let expected: Vec<u64> = (0..inits as u64).map(|i| experiments::derive_seed(seed, i)).collect();

    let previous = if args.out.exists() {
        persist::read_sweep_csv(&args.out)?
    } else {
        Vec::new()
    };
    let wanted: HashSet<i64> = snrs.iter().map(|&s| snr_key(s)).collect();
    let ours = |r: &SweepRecord| r.algorithm == algo && wanted.contains(&snr_key(r.snr_db));
    let kept: Vec<SweepRecord> = previous.iter().filter(|r| !ours(r)).cloned().collect();
    let mut per_point: Vec<Vec<SweepRecord>> = snrs
        .iter()
        .map(|&snr| {
            let existing: Vec<SweepRecord> = previous
                .iter()
                .filter(|r| ours(r) && snr_key(r.snr_db) == snr_key(snr))
                .cloned()
                .collect();
            let complete = existing.iter().map(|r| r.init_seed).eq(expected.iter().copied())
                && existing.iter().all(|r| r.channel_seed == ch_seed);
            if complete { existing } else { Vec::new() }
        })
        .collect();

    let write_all = |kept: &[SweepRecord], per_point: &[Vec<SweepRecord>]| -> Result<(), CliError> {
        let all: Vec<SweepRecord> = kept.iter().chain(per_point.iter().flatten()).cloned().collect();
        Ok(persist::write_sweep_csv(&args.out, &all)?)
    };

    say!(out, "algorithm: {algo}");
    say!(out, "K={} M={} d={} seed={seed} inits={inits}", cfg.users, cfg.antennas, cfg.streams);
    // Transitions are logged between consecutive points computed in this call.
    let mut prev: Option<SweepPoint> = None;
    for (i, &snr) in snrs.iter().enumerate() {
        if !per_point[i].is_empty() {
            say!(out, "snr_db={snr:.1}: already complete, skipped");
            prev = None;
            continue;
        }
        let point = experiments::sweep_point(&ch, &cfg, algo, snr, inits, seed, &opts)?;
        per_point[i] = experiments::records_for_point(&point, algo, ch_seed);
        write_all(&kept, &per_point)?;
        let c = &point.clustering;
        let avg = c.average_rate().map_or("-".to_string(), |a| format!("{a:.2}"));
        say!(
            out,
            "snr_db={snr:.1}: modes={}, converged {}/{}, average rate {avg} bits",
            c.clusters.len(),
            c.converged(),
            point.runs.len()
        );
        if let Some(p) = prev.take() {
            experiments::transitions(&[p, point.clone()], experiments::DEFAULT_CLUSTER_TOL);
        }
        prev = Some(point);
    }
    write_all(&kept, &per_point)?;
    let records: Vec<SweepRecord> = per_point.into_iter().flatten().collect();
    say!(out, "wrote {} rows to {}", records.len(), args.out.display());
    say!(out, "");
    write!(out, "{}", report::render_markdown(&records)).map_err(write_err)?;
    let failed = records.iter().filter(|r| r.cluster_id == NOT_CONVERGED).count();
    if too_many_failures(failed, records.len()) {
        return Err(convergence_failure(failed, records.len()));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn zf_gap(
    file: &CliConfig,
    workers: Option<usize>,
    dims: &Dims,
    channels: Option<usize>,
    snr_db: Option<f64>,
    seed: Option<u64>,
    path: Option<&Path>,
    out: &mut impl Write,
) -> Result<(), CliError> {
    let opts = file.run_options(workers)?;
    let snr_db = pick(snr_db, file.snr_db, "--snr-db")?;
    let channels = channels.ok_or_else(|| CliError::config("missing --channels N"))?;
    let cfg = system(dims, file, snr_db)?;
    let seed = file.seed(seed)?;
    let study = experiments::zf_gap_study(&cfg, channels, snr_db, seed, &opts)?;
    say!(out, "K={} M={} d={} snr_db={snr_db:.1} seed={seed}", cfg.users, cfg.antennas, cfg.streams);
    say!(out, "channels: {} used, {} skipped", study.gaps.len(), study.skipped.len());
    say!(out, "mean gap: {:.2} bits", study.mean);
    say!(out, "std error: {:.2} bits", study.std_error);
    say!(out, "95% interval: [{:.2}, {:.2}] bits", study.ci95.0, study.ci95.1);
    say!(out, "theoretical gap: {:.2} bits", study.theoretical);
    if let Some(path) = path {
        persist::save_json(path, GAP_KIND, &study)?;
        say!(out, "wrote {}", path.display());
    }
    if too_many_failures(study.skipped.len(), channels) {
        return Err(convergence_failure(study.skipped.len(), channels));
    }
    Ok(())
}

/// Sweep records from every sweep CSV and run document in `dir`, in file
/// name order.
pub fn collect_records(dir: &Path) -> Result<Vec<SweepRecord>, CliError> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::io(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    paths.sort();
    let mut records = Vec::new();
    for path in paths {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => match persist::read_sweep_csv(&path) {
                Ok(r) => records.extend(r),
                Err(beamalign::Error::Format { message, .. }) => {
                    log::warn!("skipping {}: {message}", path.display())
                }
                Err(e) => return Err(e.into()),
            },
            Some("json") => {
                if persist::document_kind(&path).ok().as_deref() == Some(RUN_KIND) {
                    let doc: RunDocument = persist::load_json(&path, RUN_KIND)?;
                    records.extend(experiments::records_for_point(&doc.point, doc.algorithm, doc.channel_seed));
                } else {
                    log::info!("skipping {}: not a run document", path.display());
                }
            }
            _ => {}
        }
    }
    if records.is_empty() {
        return Err(CliError::io(format!("no sweep or run results in {}", dir.display())));
    }
    Ok(records)
}

pub fn report(dir: &Path, format: ReportFormat, path: Option<&Path>, out: &mut impl Write) -> Result<(), CliError> {
    let records = collect_records(dir)?;
    let text = match format {
        ReportFormat::Md => report::render_markdown(&records),
        ReportFormat::Csv => report::plot_csv(&records),
    };
    match path {
        Some(p) => {
            std::fs::write(p, &text).map_err(|e| CliError::io(format!("{}: {e}", p.display())))?;
            say!(out, "wrote {}", p.display());
        }
        None => write!(out, "{text}").map_err(write_err)?,
    }
    Ok(())
}
