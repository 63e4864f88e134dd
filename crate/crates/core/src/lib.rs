pub mod error;
pub mod approxev;
pub mod ensembles;
pub mod estimator;
pub mod limits;
pub mod mc;
pub mod linalg;
pub mod nets;
pub mod rng;
