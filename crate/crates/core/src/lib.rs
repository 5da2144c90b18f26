//! Long-range dependent on/off traffic: source models, a FIFO link
//! simulator, Hurst estimators and exact PSST return-time tails.
//!
//! ```
//! use onoff::models::{generate, CleggDodsonParams, Model};
//! use onoff::queue::{binary_to_trace, occupancy_sweep, DigitiserConfig};
//!
//! let model = Model::CleggDodson(CleggDodsonParams::from_mean_and_hurst(0.094, 0.8).unwrap());
//! let series = generate(&model, 100_000, 7).unwrap();
//! let link = DigitiserConfig::from_bandwidth(464, 1.96e6).unwrap();
//! let sweep = occupancy_sweep(&binary_to_trace(&series, link), &[0.3, 0.6]).unwrap();
//! assert!(sweep[1].stats.mean_q_packets > sweep[0].stats.mean_q_packets);
//! ```

pub mod harness;
pub mod hurst;
pub mod models;
pub mod psst_tail;
pub mod queue;
pub mod rng;
pub mod trace;
