//! Weinstein functional, sharp Gagliardo–Nirenberg constants, energy and
//! the coercivity bound below the mass threshold.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::VecField;
use crate::nonlinearity::quartic_functional;
use crate::norms::{grad_sq, mass};
use crate::real::Real;

/// Number of coupled components: finite `N` or the infinite system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemSize {
    Finite(usize),
    Infinite,
}

impl std::fmt::Display for SystemSize {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SystemSize::Finite(n) => write!(f, "{n}"),
            SystemSize::Infinite => write!(f, "inf"),
        }
    }
}

impl std::str::FromStr for SystemSize {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(SystemSize::Infinite),
            other => match other.parse::<usize>() {
                Ok(n) if n >= 1 => Ok(SystemSize::Finite(n)),
                _ => Err(Error::InvalidConfig(format!("system size must be >= 1 or 'inf', got {s:?}"))),
            },
        }
    }
}

/// `W(u) = 𝒩(u) / (‖u‖^2_{L^2 l^2} ‖∇u‖^2_{L^2 l^2})`.
pub fn weinstein<T: Real>(u: &VecField<T>) -> Result<T> {
    let m = mass(u);
    let g = grad_sq(u);
    if m == T::zero() || g == T::zero() {
        return Err(Error::ZeroField);
    }
    Ok(quartic_functional(u) / (m * g))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SharpConstants<T> {
    pub size: SystemSize,
    /// Sharp Gagliardo–Nirenberg constant `C_N`.
    pub constant: T,
    /// Threshold `L^2_x l^2` norm (not squared).
    pub threshold_mass: T,
    /// Certified `‖Q‖^2_{L^2}` the table was built from.
    pub q_mass2: T,
}

impl<T: Real> SharpConstants<T> {
    pub fn threshold_mass2(&self) -> T {
        self.threshold_mass * self.threshold_mass
    }
}

/// `C_N = 2(2N-1)/(N‖Q‖^2)`, `C_∞ = 4/‖Q‖^2`; threshold `‖u‖^2 < 2/C_N`.
pub fn sharp_constants<T: Real>(size: SystemSize, q_mass2: T) -> SharpConstants<T> {
    let (constant, threshold2) = match size {
        SystemSize::Finite(n) => {
            let n_t = T::of_usize(n);
            let odd = T::of_usize(2 * n - 1);
            (T::lit(2.0) * odd / (n_t * q_mass2), n_t / odd * q_mass2)
        }
        SystemSize::Infinite => (T::lit(4.0) / q_mass2, q_mass2 / T::lit(2.0)),
    };
    SharpConstants { size, constant, threshold_mass: threshold2.sqrt(), q_mass2 }
}

/// `E(u) = ½‖∇u‖^2_{L^2 l^2} - ¼𝒩(u)`.
pub fn energy<T: Real>(u: &VecField<T>) -> T {
    grad_sq(u) / T::lit(2.0) - quartic_functional(u) / T::lit(4.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdStatus {
    Below,
    Boundary,
    Above,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CoercivityReport<T> {
    pub mass2: T,
    pub threshold_mass2: T,
    pub energy: T,
    pub grad2: T,
    /// `½(1 - ‖u‖^2/threshold^2)‖∇u‖^2`, present only below threshold.
    pub lower_bound: Option<T>,
    pub holds: Option<bool>,
    pub status: ThresholdStatus,
}

/// Relative band around the threshold reported as `Boundary`.
pub const BOUNDARY_TOLERANCE: f64 = 1e-9;

/// Check `E(u) ≥ ½(1 - ‖u‖^2/threshold^2)‖∇u‖^2` below the threshold.
pub fn coercivity_check<T: Real>(u: &VecField<T>, constants: &SharpConstants<T>) -> CoercivityReport<T> {
    let mass2 = mass(u);
    let grad2 = grad_sq(u);
    let threshold_mass2 = constants.threshold_mass2();
    let e = energy(u);
    let ratio = mass2 / threshold_mass2;
    let status = if (ratio - T::one()).abs() <= T::lit(BOUNDARY_TOLERANCE) {
        ThresholdStatus::Boundary
    } else if ratio < T::one() {
        ThresholdStatus::Below
    } else {
        ThresholdStatus::Above
    };
    let (lower_bound, holds) = match status {
        ThresholdStatus::Below => {
            let bound = (T::one() - ratio) * grad2 / T::lit(2.0);
            // Round-off allowance proportional to the terms being compared.
            let slack = T::lit(1e-12) * grad2;
            (Some(bound), Some(e + slack >= bound))
        }
        _ => (None, None),
    };
    CoercivityReport { mass2, threshold_mass2, energy: e, grad2, lower_bound, holds, status }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid2D;
    use num_complex::Complex;

    #[test]
    fn constants_table_rows() {
        let q = 11.7f64;
        let c1 = sharp_constants(SystemSize::Finite(1), q);
        assert!((c1.constant - 2.0 / q).abs() < 1e-15);
        assert!((c1.threshold_mass2() - q).abs() < 1e-12);
        let c2 = sharp_constants(SystemSize::Finite(2), q);
        assert!((c2.threshold_mass2() - 2.0 * q / 3.0).abs() < 1e-12);
        let ci = sharp_constants(SystemSize::Infinite, q);
        assert!((ci.constant - 4.0 / q).abs() < 1e-15);
        assert!((ci.threshold_mass2() - q / 2.0).abs() < 1e-12);
    }

    #[test]
    fn size_parsing() {
        assert_eq!("3".parse::<SystemSize>().unwrap(), SystemSize::Finite(3));
        assert_eq!("inf".parse::<SystemSize>().unwrap(), SystemSize::Infinite);
        assert!("0".parse::<SystemSize>().is_err());
        assert!("x".parse::<SystemSize>().is_err());
    }

    #[test]
    fn zero_field_weinstein_is_an_error() {
        let g = Grid2D::<f64>::new(4.0, 8).unwrap();
        let u = VecField::zeros(&g, vec![0]).unwrap();
        assert!(matches!(weinstein(&u), Err(Error::ZeroField)));
        assert_eq!(energy(&u), 0.0);
    }

    #[test]
    fn gaussian_energy_closed_form() {
        // ∫|∇u|^2 = A^2 π and ∫|u|^4 = A^4 π/2 for u = A e^{-|x|^2/2}.
        let g = Grid2D::<f64>::new(24.0, 128).unwrap();
        for a in [0.5f64, 1.0, 2.0, 8f64.sqrt()] {
            let u = VecField::from_fn(&g, vec![0], |_, x, y| {
                Complex::new(a * (-(x * x + y * y) / 2.0).exp(), 0.0)
            })
            .unwrap();
            let pi = std::f64::consts::PI;
            let expected = 0.5 * a * a * pi - a.powi(4) * pi / 8.0;
            assert!((energy(&u) - expected).abs() < 1e-10 * (1.0 + expected.abs()));
        }
    }
}
