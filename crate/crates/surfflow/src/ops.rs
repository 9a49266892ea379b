//! Analytic checks of the surface operators on the unit icosphere.

use surfflow_core::calculus::{
    laplace_beltrami_spectrum, mass_matrix, rate_of_strain, stiffness_matrix, triangle_matrix_norm_sq,
};
use surfflow_core::mesh::{build_icosphere, SurfaceMesh};
use surfflow_core::Vec3;

use crate::config::MAX_SUBDIVISION;
use crate::error::{IoError, IoResult};

/// Largest level `verify-ops` accepts; the Killing check also builds the
/// next level.
pub const MAX_VERIFY_LEVEL: u32 = MAX_SUBDIVISION - 2;

#[derive(Clone, Debug, PartialEq)]
pub struct OpCheck {
    pub name: &'static str,
    pub value: f64,
    pub limit: f64,
    /// `value >= limit` passes instead of `value <= limit`.
    pub at_least: bool,
}

impl OpCheck {
    pub fn pass(&self) -> bool {
        if self.at_least {
            self.value >= self.limit
        } else {
            self.value <= self.limit
        }
    }
}

fn killing_strain(m: &SurfaceMesh) -> IoResult<f64> {
    let omega = Vec3::new(0.3, -0.7, 0.5);
    let v: Vec<Vec3> = m.positions().iter().map(|x| omega.cross(*x)).collect();
    Ok(triangle_matrix_norm_sq(m, &rate_of_strain(m, &v)?).sqrt())
}

/// Eigenvalue clusters `l(l+1)` for `l = 1, 2, 3`, mean curvature, Killing
/// strain decay to the next level, and the exact mass/stiffness identities.
pub fn operator_checks(level: u32) -> IoResult<Vec<OpCheck>> {
    if !(1..=MAX_VERIFY_LEVEL).contains(&level) {
        return Err(IoError::config("--level", format!("must lie in [1, {MAX_VERIFY_LEVEL}], got {level}")));
    }
    let m = build_icosphere(level, 1.0)?;
    let ev = laplace_beltrami_spectrum(&m, 16)?;
    let dev =
        |r: std::ops::Range<usize>, exact: f64| ev[r].iter().fold(0.0_f64, |a, l| a.max((l - exact).abs() / exact));
    let h_dev = m.vertex_mean_curvature().iter().fold(0.0_f64, |a, h| a.max((h - 2.0).abs() / 2.0));
    let shrink = killing_strain(&m)? / killing_strain(&build_icosphere(level + 1, 1.0)?)?;
    let ones = vec![1.0; m.vertex_count()];
    let k1 = stiffness_matrix(&m).mul_vec(&ones).iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let total = mass_matrix(&m).bilinear(&ones, &ones);
    let check = |name, value, limit, at_least| OpCheck { name, value, limit, at_least };
    Ok(vec![
        check("eigenvalues l=1 (rel. dev.)", dev(1..4, 2.0), 0.02, false),
        check("eigenvalues l=2 (rel. dev.)", dev(4..9, 6.0), 0.04, false),
        check("eigenvalues l=3 (rel. dev.)", dev(9..16, 12.0), 0.06, false),
        check("mean curvature (rel. dev.)", h_dev, 0.025, false),
        check("Killing strain shrink", shrink, 1.7, true),
        check("stiffness * 1", k1, 1e-12, false),
        check("mass total - area", (total - m.surface_area()).abs(), 1e-12 * total, false),
    ])
}

pub fn format_table(level: u32, checks: &[OpCheck]) -> String {
    let mut s = format!("operator checks on the unit icosphere, level {level}\n");
    for c in checks {
        let rel = if c.at_least { ">=" } else { "<=" };
        s.push_str(&format!(
            "{:<30} {:>12.4e} {rel} {:<10.3e} {}\n",
            c.name,
            c.value,
            c.limit,
            if c.pass() { "PASS" } else { "FAIL" }
        ));
    }
    s
}
