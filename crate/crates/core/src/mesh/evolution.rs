use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::SurfaceMesh;
use crate::{Error, Result, Vec3};

/// Prescribed normal speed `v_n(x, t)`.
pub trait NormalVelocity {
    fn normal_velocity(&self, x: Vec3, t: f64) -> f64;
}

impl<F: Fn(Vec3, f64) -> f64> NormalVelocity for F {
    fn normal_velocity(&self, x: Vec3, t: f64) -> f64 {
        self(x, t)
    }
}

/// Built-in normal velocity laws, all in terms of the ambient `z` coordinate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormalVelocityLaw {
    Stationary,
    /// `v_n = a z`
    Linear {
        amplitude: f64,
    },
    /// `v_n = a cos(omega t) z`
    Oscillating {
        amplitude: f64,
        frequency: f64,
    },
}

impl NormalVelocityLaw {
    pub fn is_stationary(&self) -> bool {
        match *self {
            NormalVelocityLaw::Stationary => true,
            NormalVelocityLaw::Linear { amplitude } | NormalVelocityLaw::Oscillating { amplitude, .. } => {
                amplitude == 0.0
            }
        }
    }

    pub fn max_amplitude(&self) -> f64 {
        match *self {
            NormalVelocityLaw::Stationary => 0.0,
            NormalVelocityLaw::Linear { amplitude } | NormalVelocityLaw::Oscillating { amplitude, .. } => {
                amplitude.abs()
            }
        }
    }
}

impl NormalVelocity for NormalVelocityLaw {
    fn normal_velocity(&self, x: Vec3, t: f64) -> f64 {
        match *self {
            NormalVelocityLaw::Stationary => 0.0,
            NormalVelocityLaw::Linear { amplitude } => amplitude * x.z(),
            NormalVelocityLaw::Oscillating { amplitude, frequency } => amplitude * libm::cos(frequency * t) * x.z(),
        }
    }
}

/// Removes the `H`-component of `vn` so that `sum_i A_i H_i vn'_i = 0`.
pub fn project_compatible(mesh: &SurfaceMesh, vn: &[f64]) -> Result<Vec<f64>> {
    let n = mesh.vertex_count();
    if vn.len() != n {
        return Err(Error::Dimension { expected: n, got: vn.len() });
    }
    let h = mesh.vertex_mean_curvature();
    let a = mesh.curvature_areas();
    let (mut hv, mut hh) = (0.0, 0.0);
    for i in 0..n {
        hv += a[i] * h[i] * vn[i];
        hh += a[i] * h[i] * h[i];
    }
    if !(hh >= 1e-14) {
        return Err(Error::IncompatibleSurface(hh));
    }
    let c = hv / hh;
    Ok(vn.iter().zip(h).map(|(v, hi)| v - c * hi).collect())
}

/// `v_n` sampled at the vertices at time `t`, optionally made compatible.
pub fn sample_normal_velocity(
    mesh: &SurfaceMesh,
    law: &(impl NormalVelocity + ?Sized),
    t: f64,
    project: bool,
) -> Result<Vec<f64>> {
    let vn: Vec<f64> = mesh.positions().iter().map(|&x| law.normal_velocity(x, t)).collect();
    if let Some(i) = vn.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("normal velocity at vertex {i}")));
    }
    if project {
        project_compatible(mesh, &vn)
    } else {
        Ok(vn)
    }
}

/// One Heun step of `x' = v_n(x, t) n(x)`; geometry is recovered after the
/// predictor so the corrector uses the predicted normals.
pub fn evolve_step(
    mesh: &SurfaceMesh,
    law: &(impl NormalVelocity + ?Sized),
    t: f64,
    dt: f64,
    project: bool,
) -> Result<SurfaceMesh> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Parameter(format!("time step must be positive, got {dt}")));
    }
    let v0 = sample_normal_velocity(mesh, law, t, project)?;
    let n0 = mesh.vertex_normals();
    let x = mesh.positions();
    let predicted: Vec<Vec3> = (0..x.len()).map(|i| x[i] + n0[i] * (dt * v0[i])).collect();
    check_finite(&predicted)?;
    let stage = mesh.with_positions(predicted)?;
    let v1 = sample_normal_velocity(&stage, law, t + dt, project)?;
    let n1 = stage.vertex_normals();
    let corrected: Vec<Vec3> = (0..x.len()).map(|i| x[i] + (n0[i] * v0[i] + n1[i] * v1[i]) * (0.5 * dt)).collect();
    check_finite(&corrected)?;
    mesh.with_positions(corrected)
}

fn check_finite(x: &[Vec3]) -> Result<()> {
    match x.iter().position(|p| !p.is_finite()) {
        Some(vertex) => Err(Error::Evolution { vertex }),
        None => Ok(()),
    }
}

/// A surface advected by a prescribed normal velocity, with every computed
/// snapshot retained. Vertex `k` of every snapshot is the image of vertex
/// `k` of the initial mesh.
#[derive(Clone)]
pub struct EvolvingSurface {
    law: Arc<dyn NormalVelocity + Send + Sync>,
    horizon: f64,
    project: bool,
    snapshots: Vec<(f64, SurfaceMesh)>,
}

impl EvolvingSurface {
    pub fn new(
        initial: SurfaceMesh,
        law: Arc<dyn NormalVelocity + Send + Sync>,
        horizon: f64,
        project: bool,
    ) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::Parameter(format!("time horizon must be positive, got {horizon}")));
        }
        Ok(Self { law, horizon, project, snapshots: vec![(0.0, initial)] })
    }

    pub fn initial_mesh(&self) -> &SurfaceMesh {
        &self.snapshots[0].1
    }

    pub fn time_horizon(&self) -> f64 {
        self.horizon
    }

    pub fn projects(&self) -> bool {
        self.project
    }

    pub fn law(&self) -> &(dyn NormalVelocity + Send + Sync) {
        &*self.law
    }

    pub fn snapshots(&self) -> &[(f64, SurfaceMesh)] {
        &self.snapshots
    }

    pub fn current(&self) -> (f64, &SurfaceMesh) {
        let (t, m) = self.snapshots.last().expect("at least the initial snapshot");
        (*t, m)
    }

    /// `v_n` on snapshot `k` at its own time stamp.
    pub fn normal_velocity_at(&self, k: usize) -> Result<Vec<f64>> {
        let (t, m) = &self.snapshots[k];
        sample_normal_velocity(m, &*self.law, *t, self.project)
    }

    /// Advances by `dt`, clipped to the horizon. Returns the new time.
    pub fn advance(&mut self, dt: f64) -> Result<f64> {
        let (t, mesh) = self.current();
        let dt = dt.min(self.horizon - t);
        if !(dt > 0.0) {
            return Err(Error::Parameter(format!("time horizon {} already reached", self.horizon)));
        }
        let next = evolve_step(mesh, &*self.law, t, dt, self.project)?;
        let t_next = if (self.horizon - (t + dt)).abs() <= 1e-12 * self.horizon { self.horizon } else { t + dt };
        self.snapshots.push((t_next, next));
        Ok(t_next)
    }

    /// Advances with a uniform step until the horizon.
    pub fn run(&mut self, dt: f64) -> Result<()> {
        while self.current().0 < self.horizon {
            self.advance(dt)?;
        }
        Ok(())
    }
}
