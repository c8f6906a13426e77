//! Initial estimators for the four model families.

mod boolean;
mod contrast;
mod loglinear;
pub mod optimize;
mod palm;
mod record;

pub use boolean::{
    boolean_fit_area_perimeter, boolean_fit_tangent, measure_set, measure_set_with, AreaPerimeterFit,
    SetMeasurements,
};
pub use contrast::{
    contrast, contrast_grid, fit_dpp_contrast, fit_thomas_contrast, fit_thomas_mu, min_contrast, observed_summary,
    thomas_bounds, ContrastConfig, ContrastFit, DppFit, Statistic, ThomasFit,
};
pub use loglinear::{fit_loglinear_intensity, loglinear_loglik, LogLinearFit};
pub use palm::{fit_palm_dpp, fit_palm_thomas, palm_loglik_dpp, palm_loglik_thomas, PalmData};
pub use record::FitRecord;
