//! Record statistics of price series and geometric random walks.
//!
//! The crate is organised around the pipeline used for both simulated and
//! empirical data:
//!
//! * [`ingest`] reads daily price CSVs, derives log-returns and cuts series
//!   into fixed-length windows.
//! * [`records`] finds upper records and the ages between them.
//! * [`grw`] simulates geometric random walks, singly or as seeded ensembles
//!   that stream record statistics.
//! * [`stats`] fits the record-age power law, the Fréchet/GEV law of the
//!   longest ages and the scaling of both with series length.

pub mod error;
pub mod grw;
pub mod ingest;
pub mod records;
pub mod stats;

pub use error::{Error, Result};
pub use grw::{
    run_ensemble, simulate, Collectors, EnsembleSpec, EnsembleSummary, GrwParams, IncrementModel,
};
pub use ingest::{ColumnPolicy, ReturnStats, TimeSeries};
pub use records::{find_upper_records, BlockMaxima, RecordSequence};
