//! Mixtures of Mallows models with Spearman distance for complete and
//! partial rankings.
//!
//! The crate covers the full workflow: ranking data manipulation
//! ([`ranking`], [`describe`], [`io`]), the Spearman distance and its
//! distribution under uniformity ([`distance`], [`distribution`],
//! [`tables`]), maximum-likelihood estimation for a single model
//! ([`model`]) and for mixtures ([`mixture`]), random generation
//! ([`sampling`]) and uncertainty quantification ([`uncertainty`]).

pub mod describe;
pub mod distance;
pub mod distribution;
pub mod error;
pub mod io;
pub mod mixture;
pub mod model;
pub mod numeric;
pub mod ranking;
pub mod sampling;
pub mod tables;
pub mod uncertainty;

pub use error::{Error, Result};
pub use mixture::{FitMethod, FitOptions, FitResult, MixtureParams};
pub use model::MmsParams;
pub use ranking::{Ordering, PartialRanking, Ranking, RankingDataset};
