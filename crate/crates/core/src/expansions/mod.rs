//! Classical approximation machinery: Chebyshev and power series, Hermite
//! expansions, Jackson kernels and the T_n operator.

pub mod chebyshev;
pub mod hermite;
pub mod jackson;
pub mod modulus;
pub mod poly;
pub mod quadrature;
pub mod series;
pub mod target;
pub mod trig;

pub use chebyshev::{chebyshev_interpolant_1d, chebyshev_tensor_coeffs, ChebyshevFit};
pub use hermite::{
    hermite_eval, hermite_expansion, hermite_orthonormality_check, hermite_poly_coeffs, hermite_tail_bound,
    HermiteExpansion,
};
pub use jackson::{fejer_coeffs, jackson_kernel, kernel_moments, KernelCoeffs};
pub use modulus::modulus_smoothness;
pub use poly::{MultiIndex, PolyND};
pub use series::power_series_truncate;
pub use target::{CatalogFn, Domain, TargetFn, TargetSpec};
pub use trig::{apply_tn, parity_decompose, trig_operator, trig_operator_1d, trig_operator_nd, TrigOperator, TrigOperatorCoeffs};
