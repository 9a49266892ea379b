//! Constitutive closures: the logarithmic free energy, the split potential
//! `Psi(s) = F(s) - theta0 s^2 / 2`, and the affine viscosity and density
//! laws.
//!
//! Convention: `phi = +1` is fluid 1, so `rho(1) = rho1` and the diffusive
//! mass flux is `J = -(rho1 - rho2) / 2 grad mu`.

use alloc::format;

use crate::{Error, Result};

/// `F(s) = theta/2 [(1+s) ln(1+s) + (1-s) ln(1-s)]` on `[-1, 1]`.
pub fn log_potential(theta: f64, s: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&s) {
        return Err(Error::SingularArgument(s));
    }
    let xlogx = |x: f64| if x == 0.0 { 0.0 } else { x * libm::log(x) };
    // log1p keeps the small-|s| branch accurate
    let v = if s.abs() < 0.5 {
        (1.0 + s) * libm::log1p(s) + (1.0 - s) * libm::log1p(-s)
    } else {
        xlogx(1.0 + s) + xlogx(1.0 - s)
    };
    Ok(0.5 * theta * v)
}

/// `F'(s) = theta atanh(s)` on the open interval.
pub fn log_potential_d1(theta: f64, s: f64) -> Result<f64> {
    open_interval(s)?;
    Ok(theta * libm::atanh(s))
}

/// `F''(s) = theta / (1 - s^2)` on the open interval.
pub fn log_potential_d2(theta: f64, s: f64) -> Result<f64> {
    open_interval(s)?;
    Ok(theta / ((1.0 - s) * (1.0 + s)))
}

fn open_interval(s: f64) -> Result<()> {
    if s.abs() < 1.0 {
        Ok(())
    } else {
        Err(Error::SingularArgument(s))
    }
}

/// Parameters of the two-phase material.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaterialParams {
    pub theta: f64,
    pub theta0: f64,
    pub rho1_tilde: f64,
    pub rho2_tilde: f64,
    pub nu1: f64,
    pub nu2: f64,
    /// Always 1 in the model; kept explicit so the diffusive term is visible
    /// in the discrete equations.
    pub mobility: f64,
    pub eps_guard: f64,
}

impl Default for MaterialParams {
    fn default() -> Self {
        Self {
            theta: 0.8,
            theta0: 1.6,
            rho1_tilde: 1.0,
            rho2_tilde: 3.0,
            nu1: 1.0,
            nu2: 2.0,
            mobility: 1.0,
            eps_guard: 1e-9,
        }
    }
}

impl MaterialParams {
    /// Full parameter contract, including the convex-concave ordering
    /// `theta < theta0` that makes `Psi` a double well.
    pub fn validate(&self) -> Result<()> {
        self.validate_solver_bounds()?;
        if !(self.theta < self.theta0) {
            return Err(Error::Parameter(format!(
                "the potential requires 0 < theta < theta0, got theta = {}, theta0 = {}",
                self.theta, self.theta0
            )));
        }
        Ok(())
    }

    /// What the solvers need: positive closures and `theta > 0`,
    /// `theta0 >= 0`. Single-well runs (`theta0 <= theta`) pass this check.
    pub fn validate_solver_bounds(&self) -> Result<()> {
        let all = [self.theta, self.theta0, self.rho1_tilde, self.rho2_tilde, self.nu1, self.nu2, self.eps_guard];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("material parameters must be finite".into()));
        }
        if !(self.theta > 0.0 && self.theta0 >= 0.0) {
            return Err(Error::Parameter(format!(
                "the potential requires theta > 0 and theta0 >= 0, got theta = {}, theta0 = {}",
                self.theta, self.theta0
            )));
        }
        if !(self.rho1_tilde > 0.0 && self.rho2_tilde > 0.0) {
            return Err(Error::Parameter("specific densities must be positive".into()));
        }
        if !(self.nu1 > 0.0 && self.nu2 > 0.0) {
            return Err(Error::Parameter("viscosities must be positive".into()));
        }
        if self.mobility != 1.0 {
            return Err(Error::Parameter(format!("mobility is fixed at 1, got {}", self.mobility)));
        }
        if !(self.eps_guard > 0.0 && self.eps_guard <= 1e-6) {
            return Err(Error::Parameter(format!("eps_guard must lie in (0, 1e-6], got {}", self.eps_guard)));
        }
        Ok(())
    }

    pub fn rho_min(&self) -> f64 {
        self.rho1_tilde.min(self.rho2_tilde)
    }

    pub fn rho_max(&self) -> f64 {
        self.rho1_tilde.max(self.rho2_tilde)
    }

    pub fn nu_min(&self) -> f64 {
        self.nu1.min(self.nu2)
    }

    pub fn f(&self, s: f64) -> Result<f64> {
        log_potential(self.theta, s)
    }

    pub fn df(&self, s: f64) -> Result<f64> {
        log_potential_d1(self.theta, s)
    }

    pub fn d2f(&self, s: f64) -> Result<f64> {
        log_potential_d2(self.theta, s)
    }

    pub fn psi(&self, s: f64) -> Result<f64> {
        Ok(self.f(s)? - 0.5 * self.theta0 * s * s)
    }

    pub fn dpsi(&self, s: f64) -> Result<f64> {
        Ok(self.df(s)? - self.theta0 * s)
    }

    pub fn d2psi(&self, s: f64) -> Result<f64> {
        Ok(self.d2f(s)? - self.theta0)
    }

    /// `min Psi` over `[-1, 1]`, attained at the positive root of `Psi'`.
    pub fn psi_min(&self) -> f64 {
        if self.theta0 <= self.theta {
            return 0.0;
        }
        // Psi' < 0 just right of 0 and -> +inf at 1
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.theta * libm::atanh(mid) - self.theta0 * mid < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        self.psi(lo).unwrap_or(0.0)
    }

    /// `nu(s) = nu1 (1+s)/2 + nu2 (1-s)/2`, with `s` clamped to `[-1, 1]`.
    pub fn viscosity(&self, s: f64) -> f64 {
        let s = clamp_unit(s);
        // the clamp on the result absorbs rounding at the endpoints
        (0.5 * (self.nu1 * (1.0 + s) + self.nu2 * (1.0 - s))).clamp(self.nu_min(), self.nu1.max(self.nu2))
    }

    /// `rho(s) = (rho1 + rho2)/2 + (rho1 - rho2)/2 s`, with `s` clamped.
    pub fn density(&self, s: f64) -> f64 {
        let s = clamp_unit(s);
        (0.5 * (self.rho1_tilde * (1.0 + s) + self.rho2_tilde * (1.0 - s))).clamp(self.rho_min(), self.rho_max())
    }

    /// `rho'(s)` on `[-1, 1]`.
    pub fn density_slope(&self) -> f64 {
        0.5 * (self.rho1_tilde - self.rho2_tilde)
    }

    /// `J = flux_coefficient * grad mu`.
    pub fn flux_coefficient(&self) -> f64 {
        -self.density_slope()
    }
}

fn clamp_unit(s: f64) -> f64 {
    if s.is_nan() {
        0.0
    } else {
        s.clamp(-1.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn potential_vanishes_at_origin() {
        let p = MaterialParams::default();
        assert_eq!(p.f(0.0).unwrap(), 0.0);
        assert_eq!(p.df(0.0).unwrap(), 0.0);
        assert_eq!(p.psi(0.0).unwrap(), 0.0);
    }

    #[test]
    fn potential_reference_value() {
        // 0.5 * (1.5 ln 1.5 + 0.5 ln 0.5), mpmath at 40 digits
        let reference = 0.130_812_035_941_136_96;
        assert_relative_eq!(log_potential(1.0, 0.5).unwrap(), reference, max_relative = 1e-15);
    }

    #[test]
    fn endpoint_limits() {
        let ln2 = core::f64::consts::LN_2;
        assert_relative_eq!(log_potential(0.8, 1.0).unwrap(), 0.8 * ln2, max_relative = 1e-15);
        assert_relative_eq!(log_potential(0.8, -1.0).unwrap(), 0.8 * ln2, max_relative = 1e-15);
    }

    #[test]
    fn singular_arguments_are_errors() {
        assert_eq!(log_potential_d1(1.0, 1.0), Err(Error::SingularArgument(1.0)));
        assert_eq!(log_potential_d2(1.0, -1.5), Err(Error::SingularArgument(-1.5)));
        assert!(log_potential(1.0, 1.0 + 1e-12).is_err());
        assert!(log_potential_d1(1.0, f64::NAN).is_err());
    }

    #[test]
    fn convexity_bound() {
        let p = MaterialParams::default();
        for s in [-0.99, 0.0, 0.99] {
            assert!(p.d2f(s).unwrap() >= p.theta);
        }
    }

    #[test]
    fn double_well_minimum_below_origin() {
        let p = MaterialParams::default();
        let m = p.psi_min();
        assert!(m < 0.0);
        assert!(p.psi(0.0).unwrap() > m);
    }

    #[test]
    fn closures_at_endpoints() {
        let p = MaterialParams::default();
        assert_eq!(p.viscosity(1.0), p.nu1);
        assert_eq!(p.viscosity(-1.0), p.nu2);
        assert_eq!(p.density(1.0), p.rho1_tilde);
        assert_eq!(p.density(-1.0), p.rho2_tilde);
        assert_eq!(p.density(7.0), p.rho1_tilde);
        assert_eq!(p.flux_coefficient(), 1.0);
        let matched = MaterialParams { rho2_tilde: 1.0, ..p };
        assert_eq!(matched.flux_coefficient(), 0.0);
    }

    #[test]
    fn validation_rejects_inverted_temperatures() {
        let p = MaterialParams { theta: 2.0, theta0: 1.0, ..Default::default() };
        let msg = format!("{}", p.validate().unwrap_err());
        assert!(msg.contains("theta < theta0"), "{msg}");
        assert!(MaterialParams::default().validate().is_ok());
    }
}
