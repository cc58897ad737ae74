//! Analysis layer: linear entropy, rate certificates, correlation regions,
//! and rate extraction.

pub mod certificates;
pub mod entropy;
pub mod fluctuation;
pub mod rates;
pub mod region;

pub use certificates::{
    difference_bound_certificate, rate_bound_certificate, Certificate,
    DifferenceBoundCertificate, DifferenceBoundParams, GridMetadata, Precondition,
};
pub use entropy::{
    first_order_entropy, first_order_entropy_with, first_order_series, linear_entropy,
    EntropyReport,
};
pub use fluctuation::{operator_fluctuation, Fluctuation};
pub use rates::{rate_difference, rate_extract, RateEstimate};
pub use region::{
    certified_region, correlation_region, intensive_fluctuation_bound, order_parameter_inf,
    CorrelationAnalyzer, CorrelationRegion, FluctuationBoundReport, StateTrajectory,
};
