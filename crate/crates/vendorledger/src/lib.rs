pub mod assessment;
pub mod bayes;
pub mod canonical;
pub mod cli;
pub mod contracts;
pub mod error;
pub mod ledger;
pub mod monitor;
pub mod registry;
pub mod scenario;
