//! Ranking objects from numeric indicators with intuitionistic fuzzy proximity
//! cuts, rough approximations, ladder scoring, and formal concept analysis.

pub mod approx;
pub mod error;
pub mod fca;
pub mod ordering;
pub mod pipeline;
pub mod proximity;
pub mod report;
pub mod table;

pub use error::{Error, Result, Stage};
