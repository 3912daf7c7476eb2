//! Linear beamformer design for K-user MIMO interference channels.
//!
//! The crate covers the full pipeline from channel draws to Monte Carlo
//! fixed-point statistics:
//!
//! - [`channel`]: configuration, CN(0, 1) channel grids, beamformer containers.
//! - [`metrics`]: covariances, stream/user rates, alignment residuals, chordal
//!   distances.
//! - [`alignment`]: iterative interference alignment, the two-layer
//!   (inner alignment + outer SVD) design, water-filling, and the
//!   zero-forcing outer baseline.
//! - [`maxsinr`]: the stream-wise max-SINR algorithm and its fixed-point tools.
//! - [`gradient`]: the user-level sum-rate gradient and projected ascent.
//! - [`experiments`]: multi-start runs, clustering, SNR sweeps, the
//!   zero-forcing gap study, persistence and report rendering.
//!
//! ```
//! use beamalign::prelude::*;
//!
//! let cfg = SystemConfig::new(3, 2, 1, 1.0).unwrap().with_snr_db(30.0);
//! let ch = ChannelSet::generate(&cfg, 7);
//! let init = Beamformers::random(&cfg, &mut rand_chacha::ChaCha8Rng::seed_from_u64(1), true);
//! let run = iia(&ch, &cfg, &init, &IiaOptions::default()).unwrap();
//! assert!(run.converged);
//! let design = two_layer_design(&ch, &run.beamformers, cfg.total_power).unwrap();
//! assert!(design.rate > 20.0);
//! ```

pub mod alignment;
pub mod channel;
pub mod error;
pub mod experiments;
pub mod gradient;
pub mod linalg;
pub mod maxsinr;
pub mod metrics;
pub mod serial;
pub mod solution;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::alignment::{
        equivalent_channel, iia, outer_coders, two_layer_design, waterfill, zero_forcing_outer,
        IiaOptions, IiaRun, TwoLayerSolution,
    };
    pub use crate::channel::{Beamformers, ChannelSet, PowerAllocation, SystemConfig};
    pub use crate::gradient::{run_gradient_ascent, sum_rate_gradient, GradientOptions};
    pub use crate::maxsinr::{run_max_sinr, MaxSinrOptions};
    pub use crate::metrics::{alignment_residual, chordal_distance, RateReport};
    pub use crate::solution::{Algorithm, Solution};
    pub use rand::SeedableRng;
}
