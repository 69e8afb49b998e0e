//! Resource-bounded plausibility functions over decidable problems.
//!
//! The crate is organised around a handful of pieces:
//!
//! - [`problems`]: decidable languages with exact membership oracles, the
//!   bundled π digit store and the universal-prefix (enumerative induction)
//!   machinery.
//! - [`ensembles`]: per-length input distributions with seeded sampling and
//!   exact enumeration on small lengths.
//! - [`forecasters`]: plausibility functions at various computational budgets.
//! - [`scoring`]: proper scoring rules, propriety checks, expected scores,
//!   the per-length improvement relation and Dutch-book dominance.
//! - [`market`]: the two-period asset market with computationally
//!   constrained buyers and finite-horizon arbitrage verdicts.
//! - [`registry`]: string grammars used by the command line to name all of
//!   the above.

pub mod ensembles;
pub mod error;
pub mod forecasters;
pub mod instance;
pub mod market;
pub mod numeric;
pub mod problems;
pub mod registry;
pub mod scoring;
pub mod stream;

pub use error::{Error, Result};
pub use instance::Instance;
pub use stream::{RandomStream, StreamPath};

/// Version tag written into every JSON report.
pub const SCHEMA_VERSION: u32 = 1;
