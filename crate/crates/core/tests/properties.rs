//! Randomized invariants of the geometric layers.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use loopkahler::calculus::{random_loop, LoopVectorField, PolynomialField};
use loopkahler::connection::{assemble_loop_geodesic, path_energy, path_length, LoopPath};
use loopkahler::kahler::{fs_distance_homogeneous, CVector, ChartPoint, FubiniStudy, KahlerModel};
use loopkahler::loops::{loop_form_omega, loop_metric_h, Loop, LoopGrid};

fn complex() -> impl Strategy<Value = Complex64> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(re, im)| Complex64::new(re, im))
}

fn homogeneous(len: usize) -> impl Strategy<Value = CVector> {
    proptest::collection::vec(complex(), len)
        .prop_filter("non-zero", |v| {
            v.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-6
        })
        .prop_map(CVector::from_vec)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distance_is_a_bounded_metric(p in homogeneous(4), q in homogeneous(4), r in homogeneous(4)) {
        let pq = fs_distance_homogeneous(&p, &q).unwrap();
        let qp = fs_distance_homogeneous(&q, &p).unwrap();
        let pr = fs_distance_homogeneous(&p, &r).unwrap();
        let rq = fs_distance_homogeneous(&r, &q).unwrap();
        prop_assert!((pq - qp).abs() < 1e-12);
        prop_assert!(pq <= std::f64::consts::FRAC_PI_2 + 1e-12);
        prop_assert!(pq <= pr + rq + 1e-12);
    }

    #[test]
    fn distance_ignores_representative_scaling(p in homogeneous(3), q in homogeneous(3), s in complex()) {
        prop_assume!(s.norm() > 1e-3);
        let a = fs_distance_homogeneous(&p, &q).unwrap();
        let b = fs_distance_homogeneous(&(&p * s), &q).unwrap();
        prop_assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn chart_transitions_round_trip(w in homogeneous(3)) {
        let m = FubiniStudy::new(2);
        let p = m.point(w.as_slice()).unwrap();
        for chart in 0..3 {
            if let Ok(q) = m.transition(&p, chart) {
                let back = m.transition(&q, p.chart).unwrap();
                prop_assert!((back.coords - &p.coords).norm() < 1e-9 * (1.0 + q.max_modulus()));
            }
        }
    }

    #[test]
    fn loop_metric_is_hermitian_and_form_is_its_imaginary_part(seed in any::<u64>()) {
        let m = FubiniStudy::new(2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = LoopGrid::new(16).unwrap();
        let g = random_loop(&mut rng, 2, grid, 0.5).unwrap();
        let xi = PolynomialField::random(&mut rng, 2, &grid, 0.5).eval(&m, &g).unwrap();
        let eta = PolynomialField::random(&mut rng, 2, &grid, 0.5).eval(&m, &g).unwrap();
        let h12 = loop_metric_h(&m, &g, &xi, &eta).unwrap();
        let h21 = loop_metric_h(&m, &g, &eta, &xi).unwrap();
        let h11 = loop_metric_h(&m, &g, &xi, &xi).unwrap();
        prop_assert!((h12 - h21.conj()).norm() < 1e-12);
        prop_assert!(h11.re > 0.0 && h11.im.abs() < 1e-12);
        let omega = loop_form_omega(&m, &g, &xi, &eta).unwrap();
        prop_assert!((omega + h12.im).abs() < 1e-12);
        prop_assert!((omega + loop_form_omega(&m, &g, &eta, &xi).unwrap()).abs() < 1e-12);
    }
}

fn bumped_path(m: &FubiniStudy, base: &LoopPath, rng: &mut ChaCha8Rng) -> LoopPath {
    use rand::Rng;
    let amp: f64 = rng.random_range(0.05..0.3);
    let freq = rng.random_range(1..4) as f64;
    let mut path = base.clone();
    for (l, &t) in path.loops.iter_mut().zip(&base.times) {
        for (j, p) in l.points.iter_mut().enumerate() {
            let bump = Complex64::new(
                0.0,
                amp * (std::f64::consts::PI * t).sin() * (freq * j as f64).cos(),
            );
            let moved = ChartPoint::new(p.chart, p.coords.map(|z| z + bump));
            *p = moved;
        }
        let settled = l.points.iter().map(|p| {
            let to = m.preferred_chart(p);
            m.transition(p, to).unwrap()
        });
        *l = Loop::new(l.grid, settled.collect()).unwrap();
    }
    path
}

// L(γ) ≥ ∫ dist(f(s), g(s)) ds and L² ≤ E for arbitrary paths with the
// same endpoints.
#[test]
fn length_bounds_hold_on_random_paths() {
    let m = FubiniStudy::p1();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let grid = LoopGrid::new(32).unwrap();
    for _ in 0..20 {
        let f = random_loop(&mut rng, 1, grid, 0.6).unwrap();
        let g = random_loop(&mut rng, 1, grid, 0.6).unwrap();
        let geodesic = assemble_loop_geodesic(&m, &f, &g, 64).unwrap();
        let path = bumped_path(&m, &geodesic, &mut rng);
        let dist: f64 = f
            .points
            .iter()
            .zip(&g.points)
            .map(|(a, b)| m.distance(a, b).unwrap())
            .sum::<f64>()
            * grid.weight();
        let length = path_length(&m, &path).unwrap();
        let energy = path_energy(&m, &path).unwrap();
        assert!(length >= dist - 5e-3, "{length} < {dist}");
        assert!(length * length <= energy + 1e-9);
        assert!(path_length(&m, &geodesic).unwrap() <= length + 1e-9);
    }
}
