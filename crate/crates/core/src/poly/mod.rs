//! Exact integer polynomials, fixed-point real polynomials, resultants, root
//! isolation and weighted sup norms.

mod int;
mod modp;
pub use modp::certainly_coprime;
mod norm;
mod real;
mod resultant;
mod roots;

pub use int::{big_to_f64, big_to_f64_scaled, eisenstein_check, f64_to_dyadic, horner_c, is_prime, IntPolynomial};
pub use norm::{approximating_polynomial, log_n_norm, n_norm, prune, real_root_points, NormPoly};
pub use real::{ChebExpansion, RealPolynomial, DEFAULT_PRECISION};
pub use resultant::resultant;
pub use roots::{aberth, complex_roots, real_roots, Dyadic, IsolatedRoot, RootSet};
