pub mod copula;
pub mod error;
pub mod fading;
pub mod metrics;
pub mod montecarlo;
pub mod product_dist;
pub mod quad;
pub mod specfun;

pub use copula::{Copula, CopulaModel};
pub use error::{Error, Result};
pub use fading::NakagamiPower;
pub use montecarlo::{McConfig, McEstimate, McMetrics};
pub use product_dist::{ClosedFormCoefficients, EndToEndSnrModel};
