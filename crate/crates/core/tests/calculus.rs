//! Loop calculus: perturbations, brackets, the six-term dΩ and its integrand.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use loopkahler::calculus::{
    d_omega_six_term, evaluation_second_difference, integral_of_domega, integrand_chart_terms,
    lie_bracket, perturb_loop, random_loop, six_term_parts, FnField, LoopVectorField,
    PolynomialField,
};
use loopkahler::kahler::{
    hermitian_form, metric, CVector, ChartPoint, FlatSpace, FubiniStudy, KahlerModel,
    PerturbedHermitian,
};
use loopkahler::loops::{Loop, LoopGrid, LoopTangent};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn omega_frozen(h: &loopkahler::kahler::CMatrix, x: &CVector, y: &CVector) -> Complex64 {
    c(0.0, 0.5) * (hermitian_form(h, x, y) - hermitian_form(h, y, x))
}

#[test]
fn perturbation_switches_chart_past_the_safe_radius() {
    let m = FubiniStudy::p1();
    let grid = LoopGrid::new(8).unwrap();
    let g = Loop::constant(grid, ChartPoint::from_slice(0, &[c(1.95, 0.0)]));
    let nu = LoopTangent::from_fn(&g, |_, _, _| CVector::from_vec(vec![c(1.0, 0.0)]));
    let moved = perturb_loop(&m, &g, &nu, 0.1).unwrap();
    let direct = m
        .transition(&ChartPoint::from_slice(0, &[c(2.05, 0.0)]), 1)
        .unwrap();
    for p in &moved.points {
        assert_eq!(p.chart, 1);
        assert!((&p.coords - &direct.coords).norm() < 1e-12);
    }
    let same = perturb_loop(&m, &g, &nu, 0.0).unwrap();
    assert_eq!(same.points, g.points);
}

#[test]
fn flat_perturbation_is_a_translation() {
    let m = FlatSpace::new(1);
    let grid = LoopGrid::new(4).unwrap();
    let g = Loop::constant(grid, ChartPoint::origin(0, 1));
    let nu = LoopTangent::from_fn(&g, |_, _, _| CVector::from_vec(vec![c(1.0, 0.0)]));
    let moved = perturb_loop(&m, &g, &nu, 0.5).unwrap();
    assert!(moved.points.iter().all(|p| p.coords[0] == c(0.5, 0.0)));
}

#[test]
fn evaluation_map_is_linear_in_chart() {
    let m = FlatSpace::new(2);
    let grid = LoopGrid::new(16).unwrap();
    let g = random_loop(&mut rng(1), 2, grid, 0.5).unwrap();
    let xi = PolynomialField::random(&mut rng(2), 2, &grid, 0.3)
        .eval(&m, &g)
        .unwrap();
    let nu = PolynomialField::random(&mut rng(3), 2, &grid, 0.3)
        .eval(&m, &g)
        .unwrap();
    let d = evaluation_second_difference(&m, &g, &xi, &nu, grid.node(5), 1e-3).unwrap();
    assert!(d.norm() <= 1e-9, "second difference {}", d.norm());
}

#[test]
fn bracket_identities_on_flat_space() {
    let m = FlatSpace::new(2);
    let grid = LoopGrid::new(16).unwrap();
    let g = random_loop(&mut rng(4), 2, grid, 0.5).unwrap();
    let a = PolynomialField::uniform(CVector::from_vec(vec![c(1.0, 0.5), c(-0.2, 0.3)]), 16);
    let b = PolynomialField::uniform(CVector::from_vec(vec![c(0.0, 1.0), c(0.7, 0.0)]), 16);
    assert!(lie_bracket(&m, &a, &b, &g).unwrap().max_norm() < 1e-12);

    let coord = PolynomialField::coordinate(2, 16);
    let bracket = lie_bracket(&m, &coord, &b, &g).unwrap();
    let minus_b = b.eval(&m, &g).unwrap().scaled(-1.0);
    let diff = bracket.combine(1.0, &minus_b, -1.0).unwrap();
    assert!(diff.max_norm() < 1e-12);

    let r = PolynomialField::random(&mut rng(5), 2, &grid, 0.3);
    assert!(lie_bracket(&m, &r, &r, &g).unwrap().max_norm() < 1e-12);
}

#[test]
fn fd_only_bracket_matches_analytic_one() {
    let m = FubiniStudy::new(2);
    let grid = LoopGrid::new(16).unwrap();
    let g = random_loop(&mut rng(6), 2, grid, 0.4).unwrap();
    let xi = PolynomialField::random(&mut rng(7), 2, &grid, 0.3);
    let eta = PolynomialField::random(&mut rng(8), 2, &grid, 0.3);
    let analytic = lie_bracket(&m, &xi, &eta, &g).unwrap();
    let (xf, ef) = (xi.clone(), eta.clone());
    let xi_fd = FnField(move |m: &dyn KahlerModel, g: &Loop| xf.eval(m, g));
    let eta_fd = FnField(move |m: &dyn KahlerModel, g: &Loop| ef.eval(m, g));
    let fd = lie_bracket(&m, &xi_fd, &eta_fd, &g).unwrap();
    assert!(analytic.combine(1.0, &fd, -1.0).unwrap().max_norm() < 1e-8);
}

#[test]
fn six_term_vanishes_for_constant_flat_fields() {
    let m = FlatSpace::new(2);
    let grid = LoopGrid::new(8).unwrap();
    let g = random_loop(&mut rng(9), 2, grid, 0.5).unwrap();
    let f = |v: [f64; 4]| {
        PolynomialField::uniform(CVector::from_vec(vec![c(v[0], v[1]), c(v[2], v[3])]), 8)
    };
    let (a, b, d) = (
        f([1.0, 0.0, 0.0, 0.0]),
        f([0.0, 1.0, 0.5, 0.0]),
        f([0.3, 0.0, 0.0, 1.0]),
    );
    assert!(d_omega_six_term(&m, &a, &b, &d, &g).unwrap().abs() < 1e-12);
}

#[test]
fn six_term_is_antisymmetric_and_linear() {
    let m = PerturbedHermitian::default();
    let grid = LoopGrid::new(16).unwrap();
    let g = random_loop(&mut rng(10), 2, grid, 0.4).unwrap();
    let xi = PolynomialField::random(&mut rng(11), 2, &grid, 0.3);
    let eta = PolynomialField::random(&mut rng(12), 2, &grid, 0.3);
    let nu = PolynomialField::random(&mut rng(13), 2, &grid, 0.3);
    let base = d_omega_six_term(&m, &xi, &eta, &nu, &g).unwrap();
    assert!(base.abs() > 1e-6);
    let swapped = d_omega_six_term(&m, &eta, &xi, &nu, &g).unwrap();
    assert!((base + swapped).abs() < 1e-9);
    let rotated = d_omega_six_term(&m, &eta, &nu, &xi, &g).unwrap();
    assert!((base - rotated).abs() < 1e-9);

    let xf = xi.clone();
    let doubled = FnField(move |m: &dyn KahlerModel, g: &Loop| Ok(xf.eval(m, g)?.scaled(2.0)));
    let twice = d_omega_six_term(&m, &doubled, &eta, &nu, &g).unwrap();
    assert!((twice - 2.0 * base).abs() < 1e-8);

    let parts = six_term_parts(&m, &xi, &eta, &nu, &g).unwrap();
    let [d1, d2, d3, o1, o2, o3] = parts;
    assert_eq!(d1 - d2 + d3 - o1 - o2 + o3, base);
}

#[test]
fn integral_is_stable_under_refinement() {
    let m = PerturbedHermitian::default();
    let loop_at = |grid: LoopGrid| {
        Loop::from_fn(grid, |_, s| {
            Ok(ChartPoint::from_slice(
                0,
                &[c(0.3 * s.cos(), 0.1), c(0.2, 0.25 * (2.0 * s).sin())],
            ))
        })
        .unwrap()
    };
    let field = |k: f64, a: Complex64| {
        FnField(move |_: &dyn KahlerModel, g: &Loop| {
            Ok(LoopTangent::from_fn(g, |_, s, _| {
                CVector::from_vec(vec![a * ((k * s).cos() + 1.0), c(0.5, (k * s).sin())])
            }))
        })
    };
    let (xi, eta, nu) = (
        field(1.0, c(1.0, 0.0)),
        field(2.0, c(0.0, 1.0)),
        field(3.0, c(0.4, 0.4)),
    );
    let coarse =
        integral_of_domega(&m, &xi, &eta, &nu, &loop_at(LoopGrid::new(64).unwrap())).unwrap();
    let fine =
        integral_of_domega(&m, &xi, &eta, &nu, &loop_at(LoopGrid::new(128).unwrap())).unwrap();
    assert!(coarse.abs() > 1e-6);
    assert!((coarse - fine).abs() <= 1e-9, "{coarse} vs {fine}");

    let fs = FubiniStudy::new(2);
    let g = loop_at(LoopGrid::new(64).unwrap());
    assert!(integral_of_domega(&fs, &xi, &eta, &nu, &g).unwrap().abs() < 1e-12);
}

#[test]
fn integrand_terms_match_frozen_differences() {
    let m = PerturbedHermitian::default();
    let grid = LoopGrid::new(8).unwrap();
    let g = random_loop(&mut rng(14), 2, grid, 0.4).unwrap();
    let xi = PolynomialField::random(&mut rng(15), 2, &grid, 0.3);
    let eta = PolynomialField::random(&mut rng(16), 2, &grid, 0.3);
    let nu = PolynomialField::random(&mut rng(17), 2, &grid, 0.3)
        .eval(&m, &g)
        .unwrap();
    let j = 3;
    let terms = integrand_chart_terms(&m, &g, &xi, &eta, &nu, j).unwrap();
    let (x0, y0) = (xi.eval(&m, &g).unwrap(), eta.eval(&m, &g).unwrap());
    let (x0, y0) = (&x0.vectors[j].components, &y0.vectors[j].components);
    let h0 = metric(&m, &g.points[j]).unwrap();

    let t = 1e-5;
    let metric_only = |s: f64| {
        let q = perturb_loop(&m, &g, &nu, s).unwrap();
        omega_frozen(&metric(&m, &q.points[j]).unwrap(), x0, y0)
    };
    let fields_only = |s: f64| {
        let q = perturb_loop(&m, &g, &nu, s).unwrap();
        let x = xi.eval(&m, &q).unwrap().vectors[j].components.clone();
        let y = eta.eval(&m, &q).unwrap().vectors[j].components.clone();
        omega_frozen(&h0, &x, &y)
    };
    let fd_a = (metric_only(t) - metric_only(-t)) / (2.0 * t);
    let fd_bc = (fields_only(t) - fields_only(-t)) / (2.0 * t);
    assert!(terms.a.norm() > 1e-6);
    assert!((terms.a - fd_a).norm() < 1e-7, "{} vs {fd_a}", terms.a);
    assert!((terms.b - terms.c - fd_bc).norm() < 1e-7);
    assert!(terms.total().im.abs() < 1e-14);
}

#[test]
fn integrand_of_constant_fields_has_only_metric_term() {
    let m = PerturbedHermitian::default();
    let grid = LoopGrid::new(8).unwrap();
    let g = random_loop(&mut rng(18), 2, grid, 0.4).unwrap();
    let xi = PolynomialField::uniform(CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.5)]), 8);
    let eta = PolynomialField::uniform(CVector::from_vec(vec![c(0.0, 1.0), c(0.3, 0.0)]), 8);
    let nu = eta.eval(&m, &g).unwrap();
    let terms = integrand_chart_terms(&m, &g, &xi, &eta, &nu, 0).unwrap();
    assert_eq!(terms.b, c(0.0, 0.0));
    assert_eq!(terms.c, c(0.0, 0.0));
    assert!(terms.a.norm() > 0.0);
}
