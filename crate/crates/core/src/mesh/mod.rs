//! Triangulated closed surfaces and their discrete differential geometry.
//!
//! Orientation convention: triangles are counterclockwise seen from outside,
//! normals point outward, and the mean curvature is the trace of the
//! Weingarten map `grad n`, so a sphere of radius `r` has `H = 2 / r`.
//!
//! Mean curvature comes from the cotangent Laplacian of the embedding,
//! `-Delta x = H n`, projected on the vertex normal and divided by the mixed
//! Voronoi area of the vertex. Integrals against `H` use the same areas, so
//! `sum_i A_i H_i v_i` is exactly the first variation of the discrete area
//! along `v_i n_i`. Barycentric areas (row sums of the consistent mass
//! matrix) serve every other lumped quadrature.

mod evolution;
mod icosphere;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

pub use evolution::{
    evolve_step, project_compatible, sample_normal_velocity, EvolvingSurface, NormalVelocity, NormalVelocityLaw,
};
pub use icosphere::build_icosphere;

use crate::{Error, Mat3, Result, Vec3};

/// Connectivity shared by every snapshot of an evolving surface.
#[derive(Debug, PartialEq)]
pub struct Topology {
    triangles: Vec<[usize; 3]>,
    vertex_count: usize,
    /// Sorted one-ring neighbours per vertex.
    neighbors: Vec<Vec<usize>>,
}

impl Topology {
    /// Validates indices and requires a closed, edge-manifold, consistently
    /// oriented triangulation.
    pub fn new(vertex_count: usize, triangles: Vec<[usize; 3]>) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::InvalidMesh("no triangles".into()));
        }
        let mut directed: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            let [a, b, c] = *tri;
            if a >= vertex_count || b >= vertex_count || c >= vertex_count {
                return Err(Error::InvalidMesh(format!("triangle {t} has an out-of-range vertex index")));
            }
            if a == b || b == c || a == c {
                return Err(Error::InvalidMesh(format!("triangle {t} repeats a vertex")));
            }
            for (u, v) in [(a, b), (b, c), (c, a)] {
                if directed.insert((u, v), t).is_some() {
                    return Err(Error::InvalidMesh(format!(
                        "directed edge ({u}, {v}) appears twice: non-manifold or inconsistently oriented"
                    )));
                }
            }
        }
        for &(u, v) in directed.keys() {
            if !directed.contains_key(&(v, u)) {
                return Err(Error::InvalidMesh(format!("edge ({u}, {v}) is a boundary edge; the mesh must be closed")));
            }
        }
        let mut neighbors = vec![Vec::new(); vertex_count];
        for &(u, v) in directed.keys() {
            neighbors[u].push(v);
        }
        for (i, n) in neighbors.iter_mut().enumerate() {
            if n.is_empty() {
                return Err(Error::InvalidMesh(format!("vertex {i} is not referenced by any triangle")));
            }
            n.sort_unstable();
            n.dedup();
        }
        Ok(Self { triangles, vertex_count, neighbors })
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    /// Undirected edges `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.neighbors.iter().enumerate().flat_map(|(i, n)| n.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }
}

/// A closed triangulated surface with recovered per-vertex geometry.
#[derive(Clone, Debug)]
pub struct SurfaceMesh {
    topology: Arc<Topology>,
    positions: Vec<Vec3>,
    triangle_areas: Vec<f64>,
    face_normals: Vec<Vec3>,
    vertex_normals: Vec<Vec3>,
    vertex_areas: Vec<f64>,
    curvature_areas: Vec<f64>,
    vertex_mean_curvature: Vec<f64>,
    vertex_shape_operator: Vec<Mat3>,
}

impl SurfaceMesh {
    pub fn new(positions: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let topology = Arc::new(Topology::new(positions.len(), triangles)?);
        Self::from_topology(topology, positions)
    }

    /// Builds a mesh on existing connectivity, recovering all geometry.
    pub fn from_topology(topology: Arc<Topology>, positions: Vec<Vec3>) -> Result<Self> {
        if positions.len() != topology.vertex_count {
            return Err(Error::Dimension { expected: topology.vertex_count, got: positions.len() });
        }
        if let Some(i) = positions.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFinite(format!("vertex {i} position")));
        }
        let mut mesh = SurfaceMesh {
            topology,
            positions,
            triangle_areas: Vec::new(),
            face_normals: Vec::new(),
            vertex_normals: Vec::new(),
            vertex_areas: Vec::new(),
            curvature_areas: Vec::new(),
            vertex_mean_curvature: Vec::new(),
            vertex_shape_operator: Vec::new(),
        };
        mesh.recover()?;
        Ok(mesh)
    }

    /// Same connectivity, new vertex positions.
    pub fn with_positions(&self, positions: Vec<Vec3>) -> Result<Self> {
        Self::from_topology(Arc::clone(&self.topology), positions)
    }

    /// Recomputes normals, areas, mean curvature and shape operator from the
    /// vertex positions.
    pub fn recover_geometry(&self) -> Result<Self> {
        self.with_positions(self.positions.clone())
    }

    fn recover(&mut self) -> Result<()> {
        let tris = self.topology.triangles();
        let nv = self.positions.len();

        let mut areas = Vec::with_capacity(tris.len());
        let mut face_normals = Vec::with_capacity(tris.len());
        for tri in tris {
            let [a, b, c] = tri.map(|i| self.positions[i]);
            let cr = (b - a).cross(c - a);
            let norm = cr.norm();
            areas.push(0.5 * norm);
            face_normals.push(if norm > 0.0 { cr * (1.0 / norm) } else { Vec3::ZERO });
        }
        let mean_area = areas.iter().sum::<f64>() / areas.len() as f64;
        let threshold = 1e-14 * mean_area;
        if let Some((t, &area)) = areas.iter().enumerate().find(|(_, &a)| !(a >= threshold) || a == 0.0) {
            return Err(Error::DegenerateTriangle { triangle: t, area, threshold });
        }

        let mut normals = vec![Vec3::ZERO; nv];
        let mut vertex_areas = vec![0.0; nv];
        let mut voronoi = vec![0.0; nv];
        let mut lap = vec![Vec3::ZERO; nv];
        for (t, tri) in tris.iter().enumerate() {
            let p = tri.map(|i| self.positions[i]);
            let cots = corner_cotangents(&p);
            let obtuse = cots.iter().position(|&c| c < 0.0);
            for k in 0..3 {
                let i = tri[k];
                voronoi[i] += match obtuse {
                    None => {
                        let e_next = (p[(k + 1) % 3] - p[k]).norm_sq();
                        let e_prev = (p[(k + 2) % 3] - p[k]).norm_sq();
                        0.125 * (e_next * cots[(k + 2) % 3] + e_prev * cots[(k + 1) % 3])
                    }
                    Some(o) if o == k => 0.5 * areas[t],
                    Some(_) => 0.25 * areas[t],
                };
            }
            for k in 0..3 {
                let (i, j, l) = (tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]);
                let e1 = p[(k + 1) % 3] - p[k];
                let e2 = p[(k + 2) % 3] - p[k];
                let angle = libm::atan2(e1.cross(e2).norm(), e1.dot(e2));
                normals[i] += face_normals[t] * angle;
                vertex_areas[i] += areas[t] / 3.0;
                // cotangent of the corner opposite edge (j, l)
                let w = 0.5 * cots[k];
                let d = p[(k + 1) % 3] - p[(k + 2) % 3];
                lap[j] += d * w;
                lap[l] -= d * w;
            }
        }
        for n in normals.iter_mut() {
            *n = n.normalized();
        }
        let curvature: Vec<f64> = (0..nv).map(|i| lap[i].dot(normals[i]) / voronoi[i]).collect();

        let shape: Vec<Mat3> = (0..nv)
            .map(|i| fit_shape_operator(i, &self.positions, &normals, self.topology.neighbors(i), curvature[i]))
            .collect();

        self.triangle_areas = areas;
        self.face_normals = face_normals;
        self.vertex_normals = normals;
        self.vertex_areas = vertex_areas;
        self.curvature_areas = voronoi;
        self.vertex_mean_curvature = curvature;
        self.vertex_shape_operator = shape;
        Ok(())
    }

    pub fn topology(&self) -> &Arc<Topology> {
        &self.topology
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.topology.triangles.len()
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        self.topology.triangles()
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn vertex_normals(&self) -> &[Vec3] {
        &self.vertex_normals
    }

    pub fn face_normals(&self) -> &[Vec3] {
        &self.face_normals
    }

    pub fn triangle_areas(&self) -> &[f64] {
        &self.triangle_areas
    }

    /// Lumped (barycentric) vertex areas: one third of each incident triangle.
    pub fn vertex_areas(&self) -> &[f64] {
        &self.vertex_areas
    }

    /// Mixed Voronoi vertex areas, the weights of every integral against `H`.
    pub fn curvature_areas(&self) -> &[f64] {
        &self.curvature_areas
    }

    /// `sum_i A_i H_i f_i` with the curvature areas.
    pub fn curvature_integral(&self, f: &[f64]) -> f64 {
        (0..f.len()).map(|i| self.curvature_areas[i] * self.vertex_mean_curvature[i] * f[i]).sum()
    }

    pub fn vertex_mean_curvature(&self) -> &[f64] {
        &self.vertex_mean_curvature
    }

    pub fn vertex_shape_operator(&self) -> &[Mat3] {
        &self.vertex_shape_operator
    }

    pub fn surface_area(&self) -> f64 {
        self.triangle_areas.iter().sum()
    }

    /// Signed enclosed volume from the divergence theorem.
    pub fn volume_enclosed(&self) -> f64 {
        self.triangles()
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| self.positions[i]);
                a.dot(b.cross(c)) / 6.0
            })
            .sum()
    }

    pub fn mean_edge_length(&self) -> f64 {
        let (mut s, mut n) = (0.0, 0usize);
        for (i, j) in self.topology.edges() {
            s += (self.positions[i] - self.positions[j]).norm();
            n += 1;
        }
        s / n as f64
    }

    pub fn max_edge_length(&self) -> f64 {
        self.topology.edges().map(|(i, j)| (self.positions[i] - self.positions[j]).norm()).fold(0.0, f64::max)
    }

    /// Longest edge of triangle `t`.
    pub fn triangle_diameter(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles()[t].map(|i| self.positions[i]);
        (b - a).norm().max((c - b).norm()).max((a - c).norm())
    }

    /// Lumped vertex quadrature `sum_i A_i f_i`.
    pub fn lumped_integral(&self, f: &[f64]) -> f64 {
        self.vertex_areas.iter().zip(f).map(|(a, v)| a * v).sum()
    }

    pub fn same_connectivity(&self, other: &SurfaceMesh) -> bool {
        Arc::ptr_eq(&self.topology, &other.topology) || *self.topology == *other.topology
    }
}

/// Cotangents of the three corner angles of a triangle.
pub(crate) fn corner_cotangents(p: &[Vec3; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (k, o) in out.iter_mut().enumerate() {
        let e1 = p[(k + 1) % 3] - p[k];
        let e2 = p[(k + 2) % 3] - p[k];
        *o = e1.dot(e2) / e1.cross(e2).norm();
    }
    out
}

/// Least-squares symmetric tangential fit of `n_j - n_i ~ S (x_j - x_i)`
/// over the one-ring, with the trace shifted to match `h`.
fn fit_shape_operator(i: usize, x: &[Vec3], n: &[Vec3], ring: &[usize], h: f64) -> Mat3 {
    let ni = n[i];
    let (t1, t2) = tangent_basis(ni);
    // Normal equations for S = [[a, b], [b, c]] acting on tangential offsets.
    let mut ata = [[0.0; 3]; 3];
    let mut atb = [0.0; 3];
    for &j in ring {
        let d = x[j] - x[i];
        let dn = n[j] - ni;
        let (e1, e2) = (t1.dot(d), t2.dot(d));
        let (g1, g2) = (t1.dot(dn), t2.dot(dn));
        // rows: [e1, e2, 0] . [a, b, c] = g1 ; [0, e1, e2] . [a, b, c] = g2
        let rows = [([e1, e2, 0.0], g1), ([0.0, e1, e2], g2)];
        for (r, g) in rows {
            for p in 0..3 {
                atb[p] += r[p] * g;
                for q in 0..3 {
                    ata[p][q] += r[p] * r[q];
                }
            }
        }
    }
    let [a, b, c] = solve3(ata, atb).unwrap_or([0.5 * h, 0.0, 0.5 * h]);
    let shift = 0.5 * (h - (a + c));
    let (a, c) = (a + shift, c + shift);
    t1.outer(t1) * a + (t1.outer(t2) + t2.outer(t1)) * b + t2.outer(t2) * c
}

/// An orthonormal basis of the plane normal to the unit vector `n`.
pub(crate) fn tangent_basis(n: Vec3) -> (Vec3, Vec3) {
    let helper = if n.x().abs() < 0.6 {
        Vec3::axis(0)
    } else if n.y().abs() < 0.6 {
        Vec3::axis(1)
    } else {
        Vec3::axis(2)
    };
    let t1 = (helper - n * helper.dot(n)).normalized();
    let t2 = n.cross(t1);
    (t1, t2)
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&a);
    let scale = a.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
    if !(d.abs() > 1e-14 * scale * scale * scale) {
        return None;
    }
    let mut out = [0.0; 3];
    for (k, o) in out.iter_mut().enumerate() {
        let mut m = a;
        for r in 0..3 {
            m[r][k] = b[r];
        }
        *o = det(&m) / d;
    }
    Some(out)
}
