//! Classification of positive functions by their polynomial growth order at
//! infinity, index estimation, Karamata-type representations, Tauberian
//! transforms and extreme-value domain checks.

pub mod algebra;
pub mod class;
pub mod error;
pub mod evt;
pub mod ext;
pub mod fnmodel;
pub mod grid;
pub mod karamata;
pub mod order;
pub mod quad;
pub mod report;
pub mod tauberian;

pub use class::ClassLabel;
pub use error::{Error, Result};
pub use fnmodel::{FunctionHandle, KnownTruth, TableData};
pub use grid::{GridSpec, IndexEstimate, Trend};
pub use report::ConditionReport;
