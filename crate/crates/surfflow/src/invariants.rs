//! Bounds every ledger column must respect; the CLI exit code is derived
//! from the first row that breaks one.

use std::fmt;

use surfflow_core::sim::LedgerRecord;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bounds {
    /// `|mass - mass_0| / max(|mass_0|, 1e-3 area_0)`
    pub mass_drift: f64,
    /// `|area - area_0| / area_0`, checked only with the compatibility
    /// projection on.
    pub area_drift: f64,
    /// Smallest admissible `1 - max |phi|`.
    pub separation: f64,
    /// `div_res <= divergence ||grad V||`
    pub divergence: f64,
    /// Allowed `E_tot` increase per step, relative to `1 + |E_tot|`, on a
    /// stationary surface.
    pub energy_slack: f64,
}

impl Default for Bounds {
    fn default() -> Self {
        Self { mass_drift: 1e-8, area_drift: 1e-3, separation: 1e-9, divergence: 1e-8, energy_slack: 1e-12 }
    }
}

/// First broken bound of a ledger.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    /// Ledger column name.
    pub column: &'static str,
    /// Row index, 0 for the initial row.
    pub row: usize,
    pub time: f64,
    pub value: f64,
    pub bound: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "column {} violated at row {} (t = {:.6e}): {:.6e} against bound {:.6e}",
            self.column, self.row, self.time, self.value, self.bound
        )
    }
}

/// Scans rows in order and, within a row, columns in ledger order.
/// `stationary` enables the energy-monotonicity check, `projected` the
/// area check.
pub fn first_violation(records: &[LedgerRecord], stationary: bool, projected: bool, b: &Bounds) -> Option<Violation> {
    let first = records.first()?;
    let (m0, a0) = (first.mass, first.area);
    let mass_scale = m0.abs().max(1e-3 * a0.abs());
    for (row, r) in records.iter().enumerate() {
        let hit =
            |column: &'static str, value: f64, bound: f64| Some(Violation { column, row, time: r.time, value, bound });
        let cols = r.columns();
        if let Some(k) = cols.iter().position(|v| !v.is_finite()) {
            return hit(LedgerRecord::COLUMNS[k], cols[k], f64::MAX);
        }
        if row > 0 && stationary {
            let prev = records[row - 1].e_tot;
            let bound = b.energy_slack * (1.0 + prev.abs());
            if r.e_tot - prev > bound {
                return hit("E_tot", r.e_tot - prev, bound);
            }
        }
        let drift = (r.mass - m0).abs() / mass_scale;
        if drift > b.mass_drift {
            return hit("mass", drift, b.mass_drift);
        }
        if projected {
            let drift = (r.area - a0).abs() / a0;
            if drift > b.area_drift {
                return hit("area", drift, b.area_drift);
            }
        }
        if r.separation_margin < b.separation {
            return hit("sep_margin", r.separation_margin, b.separation);
        }
        // zero velocity must give an exactly zero residual up to rounding
        let bound = b.divergence * r.velocity_gradient + 1e-14;
        if r.divergence_residual > bound {
            return hit("div_res", r.divergence_residual, bound);
        }
    }
    None
}
