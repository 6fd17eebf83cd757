//! Channel-history statistics and the Chernoff outage certificate.

mod certificate;
mod history;
mod special;
mod student_t;

pub use certificate::{chernoff_certificate, ChernoffCertifier, OutageCertificate};
pub use history::{channel_stats, ChannelStats};
pub use special::{normal_cdf, normal_quantile, q_function, regularized_beta};
pub use student_t::{student_t_cdf, student_t_quantile};
