//! Monte-Carlo outage, confidence values, ensemble fits and parameter sweeps.

mod confidence;
mod ensemble;
mod outage;
mod sweep;

pub use confidence::{confidence_value, fit_log10_outage, EnsembleFit};
pub use ensemble::{ensemble_run, EnsembleRecord, EnsembleResult};
pub use outage::{outage_mc, OutageEstimate, MC_BATCH};
pub use sweep::{sweep, SweepAxis, SweepRow};
