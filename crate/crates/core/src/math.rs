//! Square root that uses the hardware instruction when `std` is linked.
//!
//! Both paths are correctly rounded, so results do not depend on the feature.

#[cfg(feature = "std")]
#[inline(always)]
pub fn sqrt(x: f64) -> f64 {
    x.sqrt()
}

#[cfg(not(feature = "std"))]
#[inline(always)]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}
