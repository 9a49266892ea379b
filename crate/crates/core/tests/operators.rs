use std::f64::consts::PI;

use proptest::prelude::*;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use surfflow_core::calculus::{
    agmon_ratio, divergence, gagliardo_nirenberg_ratio, hsharp_norm, korn_ratio, l2_norm, mass_matrix, rate_of_strain,
    recovered_gradient, solve_poisson_mean_zero, stiffness_matrix, tangential_gradient, triangle_norm_sq, Element,
};
use surfflow_core::mesh::{
    build_icosphere, evolve_step, project_compatible, sample_normal_velocity, EvolvingSurface, NormalVelocityLaw,
    SurfaceMesh,
};
use surfflow_core::{Mat3, Vec3};

fn unit(level: u32) -> SurfaceMesh {
    build_icosphere(level, 1.0).unwrap()
}

fn coords(m: &SurfaceMesh, f: impl Fn(Vec3) -> f64) -> Vec<f64> {
    m.positions().iter().map(|&x| f(x)).collect()
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
}

/// Random cubic polynomial in the ambient coordinates.
fn smooth_field(m: &SurfaceMesh, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let c: Vec<f64> = (0..10).map(|_| uniform(rng)).collect();
    coords(m, |p| {
        let (x, y, z) = (p.x(), p.y(), p.z());
        c[0] + c[1] * x
            + c[2] * y
            + c[3] * z
            + c[4] * x * y
            + c[5] * y * z
            + c[6] * z * x
            + c[7] * x * x * z
            + c[8] * y * y * y
            + c[9] * x * y * z
    })
}

#[test]
fn icosphere_sizes_and_areas() {
    for (level, v, t) in [(0, 12, 20), (2, 162, 320)] {
        let m = unit(level);
        assert_eq!((m.vertex_count(), m.triangle_count()), (v, t));
    }
    let m = build_icosphere(3, 2.0).unwrap();
    assert!((m.surface_area() / (16.0 * PI) - 1.0).abs() < 0.01);
    let m = unit(4);
    assert!((m.surface_area() / (4.0 * PI) - 1.0).abs() < 2e-3);
    assert!((m.volume_enclosed() / (4.0 * PI / 3.0) - 1.0).abs() < 5e-3);
}

#[test]
fn curvature_scales_with_radius_and_converges() {
    let m = build_icosphere(4, 2.0).unwrap();
    assert!(m.vertex_mean_curvature().iter().all(|h| (h - 1.0).abs() <= 0.025));
    let errors: Vec<f64> =
        (3..=5).map(|l| unit(l).vertex_mean_curvature().iter().fold(0.0_f64, |e, h| e.max((h - 2.0).abs()))).collect();
    assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
    assert!(errors[1] <= 0.05);
}

#[test]
fn shape_operator_has_unit_principal_curvatures() {
    let m = unit(4);
    for (s, n) in m.vertex_shape_operator().iter().zip(m.vertex_normals()) {
        // tangential eigenvalues from trace and determinant of the restriction
        let tr = s.trace();
        let mn = s.mul_vec(*n).norm();
        assert!(mn < 1e-12);
        let sq = s.matmul(s).trace();
        let det = 0.5 * (tr * tr - sq);
        let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
        for k in [0.5 * tr - disc, 0.5 * tr + disc] {
            assert!((k - 1.0).abs() <= 0.05, "principal curvature {k}");
        }
    }
}

#[test]
fn triangle_order_does_not_change_geometry() {
    let m = unit(3);
    let mut tris = m.triangles().to_vec();
    tris.reverse();
    tris.rotate_left(17);
    let p = SurfaceMesh::new(m.positions().to_vec(), tris).unwrap();
    for i in 0..m.vertex_count() {
        assert!((m.vertex_mean_curvature()[i] - p.vertex_mean_curvature()[i]).abs() <= 1e-13);
        assert!((m.vertex_normals()[i] - p.vertex_normals()[i]).max_abs() <= 1e-13);
        assert!((m.vertex_areas()[i] - p.vertex_areas()[i]).abs() <= 1e-15);
    }
}

#[test]
fn compatibility_projection_examples() {
    let m = unit(3);
    let z = coords(&m, |p| p.z());
    let pz = project_compatible(&m, &z).unwrap();
    let one_plus = project_compatible(&m, &coords(&m, |p| 1.0 + p.z())).unwrap();
    for i in 0..z.len() {
        assert!((pz[i] - z[i]).abs() < 1e-12);
        // discrete H is constant only to O(h^2), so the constant is removed to that order
        assert!((one_plus[i] - z[i]).abs() < 1e-4);
    }
    let total: f64 =
        (0..z.len()).map(|i| (m.curvature_areas()[i] * m.vertex_mean_curvature()[i] * one_plus[i]).abs()).sum();
    assert!(m.curvature_integral(&one_plus).abs() <= 1e-12 * total);
}

#[test]
fn heun_step_matches_radial_characteristic_at_the_pole() {
    let m = unit(4);
    let law = NormalVelocityLaw::Linear { amplitude: 1.0 };
    let pole = m.positions().iter().position(|p| (p.z() - 1.0).abs() < 1e-12).unwrap();
    for dt in [1e-3, 5e-4] {
        let next = evolve_step(&m, &law, 0.0, dt, false).unwrap();
        // r' = r on the axis, so r(dt) = e^dt
        let err = (next.positions()[pole].norm() - dt.exp()).abs();
        assert!(err <= 2.0 * dt * dt, "dt {dt}: {err:e}");
    }
}

#[test]
fn heun_steps_are_second_order() {
    let m = unit(3);
    let law = NormalVelocityLaw::Oscillating { amplitude: 0.5, frequency: 6.0 };
    let gap = |dt: f64| {
        let one = evolve_step(&m, &law, 0.0, dt, true).unwrap();
        let half = evolve_step(&m, &law, 0.0, 0.5 * dt, true).unwrap();
        let two = evolve_step(&half, &law, 0.5 * dt, 0.5 * dt, true).unwrap();
        one.positions().iter().zip(two.positions()).fold(0.0_f64, |e, (a, b)| e.max((*a - *b).norm()))
    };
    let (g1, g2) = (gap(4e-3), gap(2e-3));
    assert!(g1 / g2 > 6.0, "local error ratio {}", g1 / g2);
}

#[test]
fn evolving_surface_keeps_area_and_moves_continuously() {
    let law = NormalVelocityLaw::Oscillating { amplitude: 0.5, frequency: 6.0 };
    let mut s = EvolvingSurface::new(unit(3), std::sync::Arc::new(law), 0.5, true).unwrap();
    s.run(5e-3).unwrap();
    let snaps = s.snapshots();
    let a0 = snaps[0].1.surface_area();
    for w in snaps.windows(2) {
        let (a, b) = (&w[0].1, &w[1].1);
        let dt = w[1].0 - w[0].0;
        assert!((b.surface_area() - a.surface_area()).abs() <= 10.0 * dt * dt + 1e-3 * a0);
        let vmax = s.normal_velocity_at(0).unwrap().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let step = a.positions().iter().zip(b.positions()).fold(0.0_f64, |m, (p, q)| m.max((*p - *q).norm()));
        // |v_n| <= |a| |z| <= a (1 + drift) on the breathing sphere
        assert!(step <= 1.05 * vmax.max(0.5) * dt * (1.0 + 1e-6));
    }
}

#[test]
fn gradient_of_a_coordinate_is_its_tangential_projection() {
    let err = |level| {
        let m = unit(level);
        let g = tangential_gradient(&m, &coords(&m, |p| p.x())).unwrap();
        (0..m.triangle_count()).fold(0.0_f64, |e, t| {
            let n = Element::new(&m, t).normal;
            e.max((g[t].norm_sq() + n.x() * n.x() - 1.0).abs())
        })
    };
    let (e3, e4) = (err(3), err(4));
    assert!(e3 < 1e-12 && e4 < 1e-12, "face gradients of x are exact in the face plane: {e3:e} {e4:e}");
}

#[test]
fn strain_and_divergence_of_model_fields() {
    let omega = Vec3::new(0.2, 0.9, -0.4);
    let identity_err = |level| {
        let m = unit(level);
        let e = rate_of_strain(&m, m.positions()).unwrap();
        let c = [1.0 / 3.0; 3];
        (0..m.triangle_count()).fold(0.0_f64, |acc, t| {
            let p = Mat3::tangent_projector(Element::new(&m, t).smooth_normal(&m, &c));
            let mut d = 0.0_f64;
            for a in 0..3 {
                for b in 0..3 {
                    d = d.max((e[t].0[a][b] - p.0[a][b]).abs());
                }
            }
            acc.max(d)
        })
    };
    let (i3, i4) = (identity_err(3), identity_err(4));
    assert!(i4 < i3 && i4 < 0.05, "{i3:e} {i4:e}");
    for level in [3, 4] {
        let m = unit(level);
        let v: Vec<Vec3> = m.positions().iter().map(|x| omega.cross(*x)).collect();
        assert!(divergence(&m, &v).unwrap().iter().all(|d| d.abs() < 1e-12));
        let div_x = divergence(&m, m.positions()).unwrap();
        assert!(div_x.iter().all(|d| (d - 2.0).abs() < 1e-12), "face divergence of x is tr P_T = 2");
    }
}

#[test]
fn poisson_inverts_the_second_harmonic() {
    let err = |level| {
        let m = unit(level);
        let y2 = coords(&m, |p| 1.5 * p.z() * p.z() - 0.5);
        let mean = m.lumped_integral(&y2) / m.surface_area();
        let rhs: Vec<f64> = y2.iter().map(|v| v - mean).collect();
        let u = solve_poisson_mean_zero(&m, &rhs).unwrap();
        let d: Vec<f64> = u.iter().zip(&rhs).map(|(a, b)| a - b / 6.0).collect();
        l2_norm(&m, &d)
    };
    let (e3, e4) = (err(3), err(4));
    assert!(e3 / e4 > 3.0, "L2 errors {e3:e} -> {e4:e}");
}

#[test]
fn sharp_norm_examples() {
    let m = unit(4);
    assert_eq!(hsharp_norm(&m, &vec![0.0; m.vertex_count()]).unwrap(), 0.0);
    let z = coords(&m, |p| p.z());
    let s = hsharp_norm(&m, &z).unwrap();
    let l2 = l2_norm(&m, &z);
    assert!((s * s / (0.5 * l2 * l2) - 1.0).abs() < 0.01);
    let z2: Vec<f64> = z.iter().map(|v| 2.0 * v).collect();
    assert_eq!(hsharp_norm(&m, &z2).unwrap(), 2.0 * s);
}

#[test]
fn recovered_gradient_of_a_coordinate_is_first_order() {
    // the fit lives in the recovered vertex tangent plane, whose normal is O(h)
    let err = |level| {
        let m = unit(level);
        let g = recovered_gradient(&m, &coords(&m, |p| p.z())).unwrap();
        g.iter().zip(m.positions()).fold(0.0_f64, |e, (g, x)| e.max((*g - (Vec3::axis(2) - *x * x.z())).norm()))
    };
    let (e3, e4) = (err(3), err(4));
    assert!(e3 / e4 > 1.8 && e4 < 5e-3, "{e3:e} -> {e4:e}");
}

#[test]
fn functional_inequalities_hold_with_moderate_constants() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for level in [3, 4] {
        let m = unit(level);
        let (mut gn, mut korn, mut agmon) = (0.0_f64, 0.0_f64, 0.0_f64);
        for _ in 0..50 {
            let f = smooth_field(&m, &mut rng);
            for p in [4.0, 6.0, 8.0] {
                gn = gn.max(gagliardo_nirenberg_ratio(&m, &f, p).unwrap());
            }
            agmon = agmon.max(agmon_ratio(&m, &f).unwrap());
            let w = Vec3::new(uniform(&mut rng), uniform(&mut rng), uniform(&mut rng));
            let g = smooth_field(&m, &mut rng);
            let v: Vec<Vec3> = m
                .positions()
                .iter()
                .zip(m.vertex_normals())
                .zip(&g)
                .map(|((x, n), s)| {
                    let a = w.cross(*x) + Vec3::new(*s, x.z() * s, 0.5) * 0.5;
                    a - *n * n.dot(a)
                })
                .collect();
            korn = korn.max(korn_ratio(&m, &v).unwrap());
        }
        assert!(gn <= 10.0, "Gagliardo-Nirenberg ratio {gn}");
        assert!(korn <= 50.0, "Korn ratio {korn}");
        assert!(agmon.is_finite() && agmon <= 10.0, "Agmon ratio {agmon}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn mass_and_stiffness_identities(level in 0u32..4, radius in 0.2f64..5.0) {
        let m = build_icosphere(level, radius).unwrap();
        let (mm, k) = (mass_matrix(&m), stiffness_matrix(&m));
        let ones = vec![1.0; m.vertex_count()];
        let rows = mm.mul_vec(&ones);
        for (r, a) in rows.iter().zip(m.vertex_areas()) {
            prop_assert!((r - a).abs() <= 1e-12 * a);
        }
        prop_assert!((mm.bilinear(&ones, &ones) - m.surface_area()).abs() <= 1e-12 * m.surface_area());
        prop_assert!(k.mul_vec(&ones).iter().all(|v| v.abs() <= 1e-12 * k.max_abs()));
        prop_assert!(k.asymmetry() <= 1e-12 * k.max_abs());
    }

    #[test]
    fn stiffness_is_the_gradient_inner_product(seed in any::<u64>()) {
        let m = unit(2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u: Vec<f64> = (0..m.vertex_count()).map(|_| uniform(&mut rng)).collect();
        let w: Vec<f64> = (0..m.vertex_count()).map(|_| uniform(&mut rng)).collect();
        let (gu, gw) = (tangential_gradient(&m, &u).unwrap(), tangential_gradient(&m, &w).unwrap());
        let direct: f64 = gu.iter().zip(&gw).zip(m.triangle_areas()).map(|((a, b), t)| t * a.dot(*b)).sum();
        let k = stiffness_matrix(&m).bilinear(&u, &w);
        prop_assert!((direct - k).abs() <= 1e-12 * triangle_norm_sq(&m, &gu).max(triangle_norm_sq(&m, &gw)));
        prop_assert!(stiffness_matrix(&m).bilinear(&u, &u) >= -1e-12);
    }

    #[test]
    fn projection_is_idempotent_and_compatible(c in prop::array::uniform4(-2.0f64..2.0)) {
        let m = unit(3);
        let vn = coords(&m, |p| c[0] + c[1] * p.x() + c[2] * p.y() * p.z() + c[3] * p.z() * p.z());
        let once = project_compatible(&m, &vn).unwrap();
        let twice = project_compatible(&m, &once).unwrap();
        let scale: f64 = (0..vn.len()).map(|i| (m.curvature_areas()[i] * m.vertex_mean_curvature()[i] * once[i]).abs()).sum();
        prop_assert!(m.curvature_integral(&once).abs() <= 1e-12 * scale.max(1e-300));
        for (a, b) in once.iter().zip(&twice) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn sampled_velocity_is_compatible(a in -2.0f64..2.0, t in 0.0f64..3.0) {
        let m = unit(2);
        let vn = sample_normal_velocity(&m, &NormalVelocityLaw::Oscillating { amplitude: a, frequency: 3.0 }, t, true).unwrap();
        let scale: f64 = (0..vn.len()).map(|i| (m.curvature_areas()[i] * m.vertex_mean_curvature()[i] * vn[i]).abs()).sum();
        prop_assert!(m.curvature_integral(&vn).abs() <= 1e-12 * scale + 1e-300);
    }
}
