//! Campaigns, reports, matrix files and the command line on top of
//! `opconv-core`.

pub mod campaign;
pub mod catalog;
pub mod cli;
pub mod config;
pub mod error;
pub mod matrix_file;
pub mod report;

pub use campaign::run_campaign;
pub use config::CampaignConfig;
pub use error::{AppError, AppResult};
pub use report::CampaignReport;
