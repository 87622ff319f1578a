//! Univariate elastic distances (DTW, CDTW, WDTW, ERP, MSM, TWE) with
//! early abandoning and pruning engines, LB-Keogh lower bounds and
//! nearest-neighbour search.

pub mod bounds;
pub mod engines;
pub mod error;
pub mod kernels;
pub mod oracle;
pub mod search;
pub mod series;

pub use engines::{distance, Cutoff, EngineResult, Variant};
pub use error::{Error, Result};
pub use kernels::{DistanceKind, DistanceSpec, Measure, PointCost, Window};
pub use search::{classify_1nn, nn_search, subsequence_search, LbMode, SearchConfig};
pub use series::{LabeledDataset, LabeledSeries, TimeSeries};
