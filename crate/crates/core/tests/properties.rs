//! Randomised invariants of the geometric primitives.

use proptest::prelude::*;
use sfh_core::bump::TensorBump;
use sfh_core::characteristic::{
    build_ruled_graph, integrate_characteristic, line_check, stationarity_residual, RulingData,
};
use sfh_core::codazzi::first_integral_residual;
use sfh_core::graph::{
    directional_derivative, graph_point, lipschitz_estimate, subfinsler_area, theta, theta_e_identity_rhs,
    SurfaceDirection,
};
use sfh_core::heisenberg::{contact_form, frame_at, group_mul, j_op};
use sfh_core::stability::stability_form;
use sfh_core::variation::{area_param, first_variation_fd, pi_decomposition_error, GraphSurface, VariationField};
use sfh_core::{ClosedForm, IntrinsicGraph, ClosedFormGraph, ConvexBody2D, FrameVector, HPoint, PlaneVector, QuadratureSpec, Rect};

fn bodies() -> Vec<ConvexBody2D> {
    vec![
        ConvexBody2D::disk(1.3).unwrap(),
        ConvexBody2D::ellipse(2.0, 1.0).unwrap(),
        ConvexBody2D::sample_from("shifted", |th: f64| {
            (4.0 * th.cos().powi(2) + th.sin().powi(2)).sqrt() + 0.5 * th.cos() - 0.2 * th.sin()
                + 0.04 * (3.0 * th).cos()
        })
        .unwrap(),
    ]
}

fn coord() -> impl Strategy<Value = f64> {
    -3.0..3.0f64
}

fn small_poly() -> impl Strategy<Value = ClosedFormGraph> {
    (-0.5..0.5f64, -0.5..0.5f64, -0.5..0.5f64, -0.3..0.3f64, -0.3..0.3f64).prop_map(|(c0, c1, c2, c3, c4)| {
        ClosedFormGraph::new(
            ClosedForm::Poly(vec![(0, 0, c0), (1, 0, c1), (0, 1, c2), (1, 1, c3), (2, 0, c4), (0, 2, 0.5 * c4)]),
            Rect::symmetric(1.0).unwrap(),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_law_is_associative(a in (coord(), coord(), coord()), b in (coord(), coord(), coord()), c in (coord(), coord(), coord())) {
        let (p, q, r) = (HPoint::new(a.0, a.1, a.2), HPoint::new(b.0, b.1, b.2), HPoint::new(c.0, c.1, c.2));
        let l = group_mul(group_mul(p, q), r);
        let rr = group_mul(p, group_mul(q, r));
        prop_assert!((l.x - rr.x).abs() < 1e-12 && (l.y - rr.y).abs() < 1e-12 && (l.t - rr.t).abs() < 1e-12);
        let e = group_mul(p, p.inverse());
        prop_assert!(e.x == 0.0 && e.y == 0.0 && e.t.abs() < 1e-15);
    }

    #[test]
    fn j_squares_to_minus_identity(f in coord(), g in coord()) {
        let v = FrameVector::new(f, g, 0.0);
        prop_assert_eq!(j_op(j_op(v)), -v);
    }

    #[test]
    fn horizontal_vectors_annihilate_contact_form(p in (coord(), coord(), coord()), f in coord(), g in coord()) {
        let p = HPoint::new(p.0, p.1, p.2);
        let fr = frame_at(p);
        let v = [f * fr[0][0] + g * fr[1][0], f * fr[0][1] + g * fr[1][1], f * fr[0][2] + g * fr[1][2]];
        prop_assert!(contact_form(p, v).abs() <= 1e-12 * (1.0 + f.abs() + g.abs()) * 10.0);
    }

    #[test]
    fn frame_is_left_translate_of_origin_frame(p in (coord(), coord(), coord())) {
        let p = HPoint::new(p.0, p.1, p.2);
        let fr = frame_at(p);
        let h = 1e-6;
        for (k, e) in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]].iter().enumerate() {
            let plus = group_mul(p, HPoint::new(h * e[0], h * e[1], h * e[2]));
            let minus = group_mul(p, HPoint::new(-h * e[0], -h * e[1], -h * e[2]));
            let d = [(plus.x - minus.x) / (2.0 * h), (plus.y - minus.y) / (2.0 * h), (plus.t - minus.t) / (2.0 * h)];
            for i in 0..3 {
                prop_assert!((d[i] - fr[k][i]).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn norms_are_positively_homogeneous(th in 0.0..std::f64::consts::TAU, r in 0.01..10.0f64, lambda in 0.01..50.0f64) {
        let v = r * PlaneVector::from_angle(th);
        for b in bodies() {
            let (g, d) = (b.gauge_norm(v), b.dual_norm(v));
            prop_assert!((b.gauge_norm(lambda * v) - lambda * g).abs() <= 1e-12 * lambda * g);
            prop_assert!((b.dual_norm(lambda * v) - lambda * d).abs() <= 1e-12 * lambda * d);
            prop_assert!((v.dot(b.pi_k(v).unwrap()) - d).abs() <= 1e-10 * (1.0 + d));
        }
    }

    #[test]
    fn gauge_and_dual_satisfy_holder(a in 0.0..std::f64::consts::TAU, c in 0.0..std::f64::consts::TAU) {
        let (v, w) = (PlaneVector::from_angle(a), PlaneVector::from_angle(c));
        for b in bodies() {
            prop_assert!(v.dot(w) <= b.gauge_norm(v) * b.dual_norm(w) + 1e-9);
        }
    }

    #[test]
    fn pi_k_lands_where_the_normal_is_v(th in 0.0..std::f64::consts::TAU) {
        let v = PlaneVector::from_angle(th);
        for b in bodies() {
            let h = 1e-5;
            let tangent = (1.0 / (2.0 * h)) * (b.boundary_point(th + h) - b.boundary_point(th - h));
            let normal = PlaneVector::new(tangent.y, -tangent.x);
            let angle = (normal.x * v.y - normal.y * v.x).atan2(normal.dot(v));
            prop_assert!(angle.abs() <= 1e-6, "{} angle {}", b.name(), angle);
            let p = b.pi_k(v).unwrap();
            prop_assert!((p - b.boundary_point(th)).norm() <= 1e-10);
        }
    }

    #[test]
    fn disk_norms_are_euclidean(x in -5.0..5.0f64, y in -5.0..5.0f64) {
        prop_assume!(x.abs() + y.abs() > 1e-3);
        let d = ConvexBody2D::disk(1.0).unwrap();
        let v = PlaneVector::new(x, y);
        prop_assert!((d.gauge_norm(v) - v.norm()).abs() <= 1e-12 * v.norm());
        prop_assert!((d.dual_norm(v) - v.norm()).abs() <= 1e-12 * v.norm());
    }

    #[test]
    fn surface_frame_is_orthonormal(g in small_poly(), x in -0.9..0.9f64, t in -0.9..0.9f64) {
        let gp = graph_point(&g, x, t).unwrap();
        let f = gp.frame;
        prop_assert!((f.nu_h.norm() - 1.0).abs() <= 1e-10);
        prop_assert!(f.nu_h.dot(f.z).abs() <= 1e-10);
        prop_assert!(f.normal.dot(f.e).abs() <= 1e-10);
        prop_assert!((f.e.norm() - 1.0).abs() <= 1e-10);
        prop_assert!((f.normal_h_len.powi(2) + f.normal_t.powi(2) - 1.0).abs() <= 1e-10);
        let l = lipschitz_estimate(&g, 41).unwrap();
        let p_bound = l * (1.0 + 2.0 * 3.0);
        prop_assert!(f.normal_h_len >= 1.0 / (1.0 + p_bound * p_bound + l * l).sqrt());
    }

    #[test]
    fn theta_e_identity(g in small_poly(), x in -0.8..0.8f64, t in -0.8..0.8f64) {
        let lhs = theta(&g, SurfaceDirection::E, x, t, 1e-5).unwrap();
        let rhs = theta_e_identity_rhs(&g, x, t, 1e-5).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-6, "{} vs {}", lhs, rhs);
    }

    #[test]
    fn disk_area_is_sub_riemannian_area(g in small_poly()) {
        let q = QuadratureSpec::new(2, 2, 8);
        let disk = ConvexBody2D::disk(1.0).unwrap();
        let a = subfinsler_area(&g, &disk, &q).unwrap();
        let b = sfh_core::graph::sub_riemannian_area(&g, &q).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * b);
    }

    #[test]
    fn two_area_routes_agree(g in small_poly()) {
        let q = QuadratureSpec::new(2, 2, 8);
        for b in bodies() {
            let a = subfinsler_area(&g, &b, &q).unwrap();
            let c = area_param(&GraphSurface(&g), &b, &g.domain(), &q).unwrap();
            prop_assert!((a - c).abs() <= 1e-10 * a.abs());
        }
    }

    #[test]
    fn pi_decomposes_along_z_and_nu(g in small_poly(), x in -0.9..0.9f64, t in -0.9..0.9f64) {
        let f = graph_point(&g, x, t).unwrap().frame;
        for b in bodies() {
            prop_assert!(pi_decomposition_error(&b, &f).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn characteristics_are_horizontal(g in small_poly(), eps in -0.5..0.5f64) {
        let c = integrate_characteristic(&g, 0.0, eps, (-1.0, 1.0), 1e-3).unwrap();
        prop_assert!(line_check(&g, &c).unwrap().max_contact <= 1e-8);
    }

    #[test]
    fn first_integral_identity(a in -2.0..2.0f64, b in -2.0..2.0f64, s in -1.0..1.0f64) {
        let sol = sfh_core::codazzi::CodazziSolution::new(a, b);
        prop_assume!(sol.denominator(s).abs() > 1e-3);
        let scale = 1.0 / sol.denominator(s).powi(2);
        prop_assert!(first_integral_residual(a, b, s).unwrap() <= 1e-10 * scale.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn ruled_round_trip_is_stationary(k0 in -0.4..0.4f64, k1 in -0.3..0.3f64, m0 in -0.3..0.3f64, m1 in -0.25..0.25f64) {
        let eps: Vec<f64> = (0..121).map(|k| -3.0 + 0.05 * k as f64).collect();
        let a = eps.iter().map(|e| k0 + k1 * e.sin()).collect();
        let b = eps.iter().map(|e| m0 + m1 * e).collect();
        let g = build_ruled_graph(RulingData::new(0.0, eps, a, b).unwrap(), Rect::symmetric(1.0).unwrap()).unwrap();
        let grid: Vec<f64> = (0..7).map(|k| -0.6 + 0.2 * k as f64).collect();
        prop_assert!(stationarity_residual(&g, 0.0, &grid, (-1.0, 1.0), 1e-3).unwrap().max <= 1e-8);
    }

    #[test]
    fn stationary_invariants_along_characteristics(eps in -0.8..0.8f64) {
        let g = ClosedFormGraph::new(ClosedForm::XtOver1px2, Rect::symmetric(1.0).unwrap());
        let c = integrate_characteristic(&g, 0.0, eps, (-0.9, 0.9), 1e-2).unwrap();
        for b in bodies() {
            let mut kappa: Option<f64> = None;
            for (s, t) in c.s.iter().zip(&c.t) {
                let gp = graph_point(&g, *s, *t).unwrap();
                let k = b.boundary_curvature(gp.frame.nu_plane()).unwrap();
                let k0 = *kappa.get_or_insert(k);
                prop_assert!((k - k0).abs() <= 1e-8);
                let zpi: f64 = directional_derivative(&g, *s, *t, gp.z_direction(), 1e-5, |q| Ok(b.dual_norm(q.frame.nu_plane()))).unwrap();
                prop_assert!(zpi.abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn stability_form_is_quadratic(lambda in 0.1..5.0f64, cx in -0.3..0.3f64) {
        let g = ClosedFormGraph::new(ClosedForm::XtOver1px2, Rect::symmetric(1.0).unwrap());
        let b = ConvexBody2D::ellipse(2.0, 1.0).unwrap();
        let q = QuadratureSpec::new(2, 2, 8);
        let f = TensorBump::new(cx, 0.0, 0.5, 0.5, 4).unwrap();
        let q1 = stability_form(&g, &b, &f, &q, 1e-5).unwrap();
        let q2 = stability_form(&g, &b, &f.scaled(lambda), &q, 1e-5).unwrap();
        prop_assert!((q2 - lambda * lambda * q1).abs() <= 1e-10 * (lambda * lambda * q1.abs()).max(1.0));
    }

    #[test]
    fn tangential_fields_do_not_vary_area(g in small_poly(), uz in -1.0..1.0f64) {
        let f = VariationField::adapted(uz, 0.0, 0.0, TensorBump::new(0.0, 0.0, 0.6, 0.6, 4).unwrap());
        let b = ConvexBody2D::ellipse(2.0, 1.0).unwrap();
        let d = first_variation_fd(&GraphSurface(&g), &f, &b, 1e-3, &QuadratureSpec::new(4, 4, 8)).unwrap();
        prop_assert!(d.abs() <= 1e-6, "{}", d);
    }
}

#[test]
fn rk4_error_drops_by_twelve_when_step_halves() {
    let d = Rect::symmetric(50.0).unwrap();
    type Case = (ClosedFormGraph, fn(f64) -> f64);
    let cases: [Case; 3] = [
        (ClosedFormGraph::new(ClosedForm::Affine { a: 0.8, b: 0.0 }, d), |s| 0.5 + 0.8 * s),
        (ClosedFormGraph::new(ClosedForm::Poly(vec![(0, 1, 1.0)]), d), |s| 0.5 * (2.0 * s).exp()),
        (ClosedFormGraph::new(ClosedForm::Affine { a: 0.8, b: -0.6 }, d), |s| 0.5 + 0.8 * s - 0.6 * s * s),
    ];
    for (g, exact) in cases {
        let err = |h: f64| {
            let c = integrate_characteristic(&g, 0.0, 0.5, (-2.0, 2.0), h).unwrap();
            c.s.iter().zip(&c.t).map(|(s, t)| (t - exact(*s)).abs()).fold(0.0, f64::max)
        };
        let (e1, e2) = (err(0.2), err(0.1));
        // Families that RK4 integrates exactly are at rounding level already.
        assert!(e2 <= 1e-13 || e1 / e2 >= 12.0, "{e1} -> {e2}");
    }
}
