//! Quantifies how much a revealed sum (or average) of private inputs discloses
//! about a target participant's input.
//!
//! All entropies are in bits. The modules build on one another:
//!
//! - [`distributions`]: input families and the distributions of their sums.
//! - [`entropy`]: Shannon and differential entropies.
//! - [`single`]: remaining entropy and loss after one execution.
//! - [`two_exec`]: remaining entropy after two executions with normal inputs.
//! - [`oracle`]: brute-force enumeration and Monte Carlo checks of the above.

pub mod distributions;
pub mod entropy;
pub mod error;
pub mod grammar;
pub mod oracle;
pub mod single;
pub mod two_exec;

pub use distributions::{DistributionSpec, FwParams, Pmf, DEFAULT_TRUNCATION};
pub use entropy::EntropyValue;
pub use error::{Error, Result};
pub use single::{EntropyReport, ScenarioConfig};
pub use two_exec::{CovMatrix2, Participation, TwoExecConfig};
