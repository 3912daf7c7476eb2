//! System configuration, channel realizations and beamformer containers.
//!
//! Noise is unit-variance per receive antenna throughout. The nominal SNR is
//! the per-stream power under equal allocation, `P_t / (K d)`, and all rates
//! are in bits.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::serial::{self, MatrixDoc};

/// Problem dimensions and power budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// K, the number of transmitter/receiver pairs.
    pub users: usize,
    /// M, antennas at every node.
    pub antennas: usize,
    /// d, streams per user.
    pub streams: usize,
    /// P_t, total transmit power in linear units.
    pub total_power: f64,
}

impl SystemConfig {
    pub fn new(users: usize, antennas: usize, streams: usize, total_power: f64) -> Result<Self> {
        if users == 0 || antennas == 0 || streams == 0 {
            return Err(Error::InvalidConfig(format!(
                "K, M and d must be positive (got K={users}, M={antennas}, d={streams})"
            )));
        }
        if streams > antennas {
            return Err(Error::InfeasibleConfig {
                m: antennas,
                d: streams,
            });
        }
        if !(total_power.is_finite() && total_power >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "total power must be finite and nonnegative (got {total_power})"
            )));
        }
        if antennas != 2 * streams {
            log::warn!(
                "M = {antennas}, d = {streams}: experiments are calibrated for M = 2d"
            );
        }
        Ok(Self {
            users,
            antennas,
            streams,
            total_power,
        })
    }

    /// Same dimensions with the total power set from a nominal SNR in dB.
    pub fn with_snr_db(self, snr_db: f64) -> Self {
        Self {
            total_power: total_power_for_snr_db(snr_db, self.users, self.streams),
            ..self
        }
    }

    pub fn stream_count(&self) -> usize {
        self.users * self.streams
    }

    /// `P_t / (K d)`.
    pub fn per_stream_power(&self) -> f64 {
        self.total_power / self.stream_count() as f64
    }

    pub fn snr_db(&self) -> f64 {
        10.0 * self.per_stream_power().log10()
    }
}

/// Total power whose equal split over `users · streams` streams gives the
/// stated per-stream SNR.
pub fn total_power_for_snr_db(snr_db: f64, users: usize, streams: usize) -> f64 {
    (users * streams) as f64 * 10f64.powf(snr_db / 10.0)
}

/// Where a channel realization came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelSeed {
    Seeded(u64),
    External,
}

/// The K×K grid of M×M channel matrices; entry `(k, l)` maps transmitter `l`
/// to receiver `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    users: usize,
    antennas: usize,
    seed: ChannelSeed,
    entries: Vec<CMat>,
}

impl ChannelSet {
    /// Wraps externally supplied matrices, `entries[k * K + l] = H_kl`.
    pub fn from_entries(users: usize, antennas: usize, entries: Vec<CMat>) -> Result<Self> {
        if entries.len() != users * users {
            return Err(Error::Shape(format!(
                "expected {} channel matrices, got {}",
                users * users,
                entries.len()
            )));
        }
        for (i, h) in entries.iter().enumerate() {
            if h.nrows() != antennas || h.ncols() != antennas {
                return Err(Error::Shape(format!(
                    "H_{}{} is {}x{}, expected {antennas}x{antennas}",
                    i / users,
                    i % users,
                    h.nrows(),
                    h.ncols()
                )));
            }
            if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::Shape(format!(
                    "H_{}{} has non-finite entries",
                    i / users,
                    i % users
                )));
            }
        }
        Ok(Self {
            users,
            antennas,
            seed: ChannelSeed::External,
            entries,
        })
    }

    /// Draws every entry i.i.d. CN(0, 1) from a ChaCha8 stream seeded with
    /// `seed`.
    ///
    /// Draw order: row-major over `(k, l)`, then matrix entries row-major, real
    /// part before imaginary. A matrix that is numerically rank deficient is
    /// redrawn from the continuing stream.
    pub fn generate(cfg: &SystemConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (k, m) = (cfg.users, cfg.antennas);
        let entries = (0..k * k)
            .map(|_| loop {
                let h = linalg::random_gaussian(&mut rng, m, m);
                if linalg::numerical_rank(&h) == m {
                    break h;
                }
            })
            .collect();
        Self {
            users: k,
            antennas: m,
            seed: ChannelSeed::Seeded(seed),
            entries,
        }
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    pub fn seed(&self) -> ChannelSeed {
        self.seed
    }

    /// `H_kl`: transmitter `l` to receiver `k`.
    #[inline]
    pub fn h(&self, k: usize, l: usize) -> &CMat {
        &self.entries[k * self.users + l]
    }

    /// Channel with the roles of transmitters and receivers swapped:
    /// output entry `(l, k)` is `H_klᴴ`.
    pub fn reciprocal(&self) -> Self {
        let k = self.users;
        let entries = (0..k * k)
            .map(|i| self.h(i % k, i / k).adjoint())
            .collect();
        Self {
            entries,
            ..self.clone()
        }
    }

    /// 2-norm condition number of every `H_kl`, row-major over `(k, l)`.
    pub fn condition_numbers(&self) -> Vec<f64> {
        self.entries
            .iter()
            .map(|h| {
                let s = linalg::singular_values(h);
                s[0] / s[s.len() - 1]
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ChannelDoc::from(self)).expect("channel set serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let doc: ChannelDoc = serde_json::from_str(text).map_err(|e| e.to_string())?;
        doc.try_into()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|m| Error::format(path, m))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SeedDoc {
    Seed(u64),
    Marker(String),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelDoc {
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "M")]
    m: usize,
    seed: SeedDoc,
    #[serde(rename = "H")]
    h: Vec<Vec<MatrixDoc>>,
}

impl From<&ChannelSet> for ChannelDoc {
    fn from(ch: &ChannelSet) -> Self {
        let k = ch.users;
        Self {
            k,
            m: ch.antennas,
            seed: match ch.seed {
                ChannelSeed::Seeded(s) => SeedDoc::Seed(s),
                ChannelSeed::External => SeedDoc::Marker("external".into()),
            },
            h: (0..k)
                .map(|i| (0..k).map(|j| serial::to_doc(ch.h(i, j))).collect())
                .collect(),
        }
    }
}

impl TryFrom<ChannelDoc> for ChannelSet {
    type Error = String;

    fn try_from(doc: ChannelDoc) -> Result<Self, String> {
        if doc.h.len() != doc.k || doc.h.iter().any(|row| row.len() != doc.k) {
            return Err(format!("H must be a {0}x{0} grid of matrices", doc.k));
        }
        let entries = doc
            .h
            .iter()
            .flatten()
            .map(serial::from_doc)
            .collect::<Result<Vec<_>, _>>()?;
        let mut ch = ChannelSet::from_entries(doc.k, doc.m, entries).map_err(|e| e.to_string())?;
        ch.seed = match doc.seed {
            SeedDoc::Seed(s) => ChannelSeed::Seeded(s),
            SeedDoc::Marker(m) if m == "external" => ChannelSeed::External,
            SeedDoc::Marker(m) => return Err(format!("unknown seed marker {m:?}")),
        };
        Ok(ch)
    }
}

/// Per-user precoders `V_k` and decoders `U_k`, each M×d with unit-norm
/// columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Beamformers {
    #[serde(with = "serial::cmat_vec")]
    pub v: Vec<CMat>,
    #[serde(with = "serial::cmat_vec")]
    pub u: Vec<CMat>,
}

impl Beamformers {
    pub fn new(v: Vec<CMat>, u: Vec<CMat>) -> Result<Self> {
        let b = Self { v, u };
        b.validate()?;
        Ok(b)
    }

    /// Random CN(0, 1) blocks, orthonormalized or just column-normalized.
    pub fn random<R: rand::Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R, orthonormal: bool) -> Self {
        let mut draw = || {
            let a = linalg::random_gaussian(rng, cfg.antennas, cfg.streams);
            if orthonormal {
                linalg::orthonormalize(&a)
            } else {
                linalg::normalize_columns(&a)
            }
        };
        let v = (0..cfg.users).map(|_| draw()).collect();
        let u = (0..cfg.users).map(|_| draw()).collect();
        Self { v, u }
    }

    pub fn users(&self) -> usize {
        self.v.len()
    }

    pub fn streams(&self) -> usize {
        self.v.first().map_or(0, |v| v.ncols())
    }

    /// Checks shapes and unit column norms (within 1e-10).
    pub fn validate(&self) -> Result<()> {
        if self.v.len() != self.u.len() {
            return Err(Error::Shape("V and U have different user counts".into()));
        }
        let shape = self.v.first().map(|v| v.shape());
        for blk in self.v.iter().chain(&self.u) {
            if Some(blk.shape()) != shape {
                return Err(Error::Shape("beamformer blocks differ in shape".into()));
            }
            let dev = linalg::unit_column_deviation(blk);
            if dev > 1e-10 {
                return Err(Error::Shape(format!(
                    "beamformer column norm deviates from 1 by {dev:.3e}"
                )));
            }
        }
        Ok(())
    }

    /// `V_kᴴV_k = U_kᴴU_k = I_d` for all users within `tol`.
    pub fn is_orthonormal(&self, tol: f64) -> bool {
        self.v
            .iter()
            .chain(&self.u)
            .all(|b| linalg::orthonormality_deviation(b) <= tol)
    }
}

/// Per-stream powers `P_k^(m)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    pub powers: Vec<Vec<f64>>,
}

impl PowerAllocation {
    /// `P_t / (K d)` on every stream.
    pub fn equal(cfg: &SystemConfig) -> Self {
        let p = cfg.per_stream_power();
        Self {
            powers: vec![vec![p; cfg.streams]; cfg.users],
        }
    }

    /// Builds from a flat user-major slice of length `users · streams`.
    pub fn from_flat(users: usize, streams: usize, flat: &[f64]) -> Self {
        assert_eq!(flat.len(), users * streams);
        Self {
            powers: flat.chunks(streams).map(<[f64]>::to_vec).collect(),
        }
    }

    #[inline]
    pub fn get(&self, k: usize, m: usize) -> f64 {
        self.powers[k][m]
    }

    pub fn total(&self) -> f64 {
        self.powers.iter().flatten().sum()
    }

    pub fn flat(&self) -> Vec<f64> {
        self.powers.iter().flatten().copied().collect()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            powers: self
                .powers
                .iter()
                .map(|row| row.iter().map(|p| p * factor).collect())
                .collect(),
        }
    }
}
