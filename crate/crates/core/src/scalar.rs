//! Scalar abstraction shared by the transport and sensitivity code.

use std::fmt::Debug;
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point type the numerical kernels are generic over.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Default + Send + Sync + 'static
{
    /// Tolerance on the total mass of a probability vector.
    fn mass_tol() -> Self;

    /// Tolerance used when checking plan marginals.
    fn marginal_tol() -> Self;

    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn mass_tol() -> Self {
        1e-12
    }

    fn marginal_tol() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    fn mass_tol() -> Self {
        1e-5
    }

    fn marginal_tol() -> Self {
        1e-4
    }
}

/// Squared Euclidean distance between two equally sized slices.
#[inline]
pub fn sq_dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
}
