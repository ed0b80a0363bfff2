//! Fuzzy Delphi screening followed by Buckley fuzzy AHP ranking, built on
//! triangular fuzzy numbers.
//!
//! ```
//! use fdahp::{delphi, fahp, dataset};
//!
//! let study = dataset::load_paper_study().unwrap();
//! let screening = delphi::screen(&study.delphi_panel, delphi::ThresholdStrategy::Mean).unwrap();
//! assert_eq!(screening.selected().count(), 11);
//!
//! let ranking = fahp::run_fahp(&study.fahp_matrix).unwrap();
//! assert_eq!(ranking.by_rank()[0].criterion.id, "B10");
//! ```

pub mod dataset;
pub mod delphi;
pub mod error;
pub mod fahp;
pub mod formats;
pub mod pipeline;
pub mod report;
pub mod sample;
pub mod tfn;
pub mod validation;
pub mod verify;

pub use error::{Error, Result};
pub use tfn::Tfn;
pub use validation::{ValidationMode, Warning, WarningKind};
