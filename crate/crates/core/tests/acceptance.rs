//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion fails.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sfh_core::bump::{BumpSum1D, CosineBump1D, TensorBump, TruncatedRational};
use sfh_core::characteristic::{
    build_ruled_graph, integrate_characteristic, line_check, monotonicity_check, quadratic_fit, RuledGraph, RulingData,
};
use sfh_core::codazzi::{
    dilation_residual, first_integral_residual, integrate_codazzi, rk4_closed_form_gap, CodazziSolution, GlobalClass,
};
use sfh_core::graph::{sub_riemannian_area, subfinsler_area};
use sfh_core::stability::{bernstein_report, hardy_gap, BernsteinConfig, Verdict};
use sfh_core::variation::{
    first_variation_fd, first_variation_formula, first_variation_graph, integration_by_parts_residuals,
    second_variation_fd, second_variation_formula, vertical_perturbation_fd, GraphSurface, VariationField,
};
use sfh_core::{ClosedForm, ClosedFormGraph, ConvexBody2D, FrameVector, IntrinsicGraph, PlaneVector, QuadratureSpec, Rect};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn asymmetric_body() -> ConvexBody2D {
    ConvexBody2D::sample_from("asymmetric", |th: f64| {
        (4.0 * th.cos().powi(2) + th.sin().powi(2)).sqrt() + 0.5 * th.cos() - 0.2 * th.sin() + 0.04 * (3.0 * th).cos()
    })
    .unwrap()
}

fn bodies() -> Vec<ConvexBody2D> {
    vec![ConvexBody2D::disk(1.0).unwrap(), ConvexBody2D::ellipse(2.0, 1.0).unwrap(), asymmetric_body()]
}

fn square() -> Rect {
    Rect::symmetric(1.0).unwrap()
}

fn poly(terms: &[(u32, u32, f64)]) -> ClosedFormGraph {
    ClosedFormGraph::new(ClosedForm::Poly(terms.to_vec()), square())
}

fn ruled(a: impl Fn(f64) -> f64, b: impl Fn(f64) -> f64) -> RuledGraph {
    let eps: Vec<f64> = (0..161).map(|k| -4.0 + 0.05 * k as f64).collect();
    let av = eps.iter().map(|&e| a(e)).collect();
    let bv = eps.iter().map(|&e| b(e)).collect();
    build_ruled_graph(RulingData::new(0.0, eps, av, bv).unwrap(), square()).unwrap()
}

fn stationary_graphs() -> Vec<(&'static str, Box<dyn IntrinsicGraph>)> {
    vec![
        ("zero", Box::new(ClosedFormGraph::new(ClosedForm::Zero, square()))),
        ("affine", Box::new(ClosedFormGraph::new(ClosedForm::Affine { a: 0.4, b: 0.7 }, square()))),
        ("xt/(1+x^2)", Box::new(ClosedFormGraph::new(ClosedForm::XtOver1px2, square()))),
        ("ruled sin", Box::new(ruled(|e| 0.3 * e.sin(), |e| 0.2 * e))),
        ("ruled linear", Box::new(ruled(|e| 0.3 * e, |e| 0.1 + 0.2 * e))),
    ]
}

/// Sup of `⟨v, x⟩` over boundary points, by grid search and golden section.
fn support_by_search(body: &ConvexBody2D, v: PlaneVector) -> f64 {
    let f = |phi: f64| v.dot(body.boundary_point(phi));
    let n = 4096;
    let step = std::f64::consts::TAU / n as f64;
    let k = (0..n).max_by(|&i, &j| f(i as f64 * step).total_cmp(&f(j as f64 * step))).unwrap();
    let (mut a, mut b) = ((k as f64 - 1.0) * step, (k as f64 + 1.0) * step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let (c, d) = (b - g * (b - a), a + g * (b - a));
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    f(0.5 * (a + b))
}

fn convex_duality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut msgs = Vec::new();
    let mut ok = true;
    for body in bodies() {
        let closed = !matches!(body.support(), sfh_core::SupportFunction::Sampled(_));
        let (mut pairing, mut search) = (0.0f64, 0.0f64);
        for k in 0..1000 {
            let r = rng.gen_range(0.1..10.0);
            let v = r * PlaneVector::from_angle(rng.gen_range(0.0..std::f64::consts::TAU));
            let dual = body.dual_norm(v);
            pairing = pairing.max((v.dot(body.pi_k(v).unwrap()) - dual).abs());
            if k % 5 == 0 {
                search = search.max((support_by_search(&body, v) - dual).abs() / r);
            }
        }
        let tol = if closed { 1e-10 } else { 1e-6 };
        ok &= pairing <= tol && search <= 1e-6;
        msgs.push(format!("{} pairing {:.1e} sup-search {:.1e}", body.name(), pairing, search));
    }
    check(ok, msgs.join("; "))
}

fn sub_riemannian_specialization() -> Outcome {
    let disk = ConvexBody2D::disk(1.0).unwrap();
    let q = QuadratureSpec::default();
    let graphs = [
        ClosedFormGraph::new(ClosedForm::Zero, square()),
        ClosedFormGraph::new(ClosedForm::Affine { a: 1.0, b: -0.6 }, square()),
        ClosedFormGraph::new(ClosedForm::XtOver1px2, square()),
        poly(&[(0, 1, 1.0)]),
        poly(&[(1, 1, 0.5), (0, 2, 0.2), (1, 0, 0.3)]),
    ];
    let mut worst = 0.0f64;
    for g in &graphs {
        let a = subfinsler_area(g, &disk, &q).unwrap();
        let b = sub_riemannian_area(g, &q).unwrap();
        worst = worst.max((a - b).abs() / b.abs());
    }
    check(worst <= 1e-8, format!("5 graphs, max relative gap {worst:.1e}"))
}

fn first_variation() -> Outcome {
    let graphs = [
        poly(&[(0, 1, 1.0)]),
        poly(&[(1, 1, 0.5), (0, 2, 0.2), (1, 0, 0.3)]),
        ClosedFormGraph::new(ClosedForm::XtOver1px2, square()),
        poly(&[(0, 1, 1.0), (2, 0, 0.3), (1, 1, -0.2)]),
    ];
    let bumps = [
        TensorBump::new(0.1, -0.1, 0.6, 0.7, 4).unwrap(),
        TensorBump::new(-0.2, 0.15, 0.5, 0.5, 4).unwrap(),
        TensorBump::new(0.0, 0.2, 0.7, 0.6, 4).unwrap(),
    ];
    let fields = [
        VariationField::adapted(0.0, 1.0, 0.0, bumps[0]),
        VariationField::adapted(0.4, 0.8, -0.3, bumps[1]),
        VariationField::frame(FrameVector::new(0.5, -0.3, 0.6), bumps[2]),
    ];
    let q = QuadratureSpec::new(4, 4, 8);
    let (mut n, mut worst, mut worst_graph_route) = (0, 0.0f64, 0.0f64);
    let mut ok = true;
    for (gi, g) in graphs.iter().enumerate() {
        let surf = GraphSurface(g);
        for (bi, body) in bodies().iter().enumerate() {
            let field = &fields[(gi + bi) % fields.len()];
            let fd = first_variation_fd(&surf, field, body, 1e-3, &q).unwrap();
            let formula = first_variation_formula(g, field, body, &q, 1e-5).unwrap();
            let gap = (fd - formula).abs() / (1.0 + fd.abs());
            worst = worst.max(gap);
            ok &= gap <= 1e-4;
            n += 1;

            // Vertical field v·Y: the flow is the graph of u + s v, so all three routes apply.
            let v = bumps[(gi + 2 * bi) % bumps.len()];
            let vertical = VariationField::frame(FrameVector::Y, v);
            let fd = first_variation_fd(&surf, &vertical, body, 1e-3, &q).unwrap();
            let formula = first_variation_formula(g, &vertical, body, &q, 1e-5).unwrap();
            let el = first_variation_graph(g, &v, body, &q, 1e-5).unwrap();
            let perturbed = vertical_perturbation_fd(g, &v, body, 1e-3, &q).unwrap();
            let scale = 1.0 + fd.abs();
            let gap = (fd - formula).abs() / scale;
            let gap_el = ((el - fd).abs().max((el - formula).abs()).max((el - perturbed).abs())) / scale;
            worst = worst.max(gap);
            worst_graph_route = worst_graph_route.max(gap_el);
            ok &= gap <= 1e-4 && gap_el <= 1e-4;
            n += 1;
        }
    }
    check(
        ok,
        format!("{n} triples, max |fd - formula|/(1+|fd|) {worst:.1e}, graph route {worst_graph_route:.1e}"),
    )
}

fn foliation() -> Outcome {
    let eps: Vec<f64> = (0..17).map(|k| -0.8 + 0.1 * k as f64).collect();
    let (mut osc, mut line, mut contact, mut quad) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut ok = true;
    for (name, g) in stationary_graphs() {
        for &e in &eps {
            let c = integrate_characteristic(&*g, 0.0, e, (-1.0, 1.0), 1e-3).unwrap();
            let l = line_check(&*g, &c).unwrap();
            osc = osc.max(c.p_oscillation());
            line = line.max(l.max_residual);
            contact = contact.max(l.max_contact);
            quad = quad.max(quadratic_fit(&c).1);
        }
        let m = monotonicity_check(&*g, 0.0, &eps, (-1.0, 1.0), 1e-3).unwrap();
        if m.crossing {
            ok = false;
            eprintln!("{name}: characteristics cross at s = {}", m.at_s);
        }
    }
    ok &= osc <= 1e-8 && line <= 1e-8 && contact <= 1e-8 && quad <= 1e-8;
    check(
        ok,
        format!("5 graphs: p-oscillation {osc:.1e}, line residual {line:.1e}, contact {contact:.1e}, quadratic fit {quad:.1e}"),
    )
}

fn codazzi() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut rk, mut fi, mut dil) = (0.0f64, 0.0f64, 0.0f64);
    let mut ok = true;
    let mut entire = 0;
    for k in 0..100 {
        let (a, b) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let sol = CodazziSolution::new(a, b);
        let (lo, hi) = sol.valid_interval();
        let d = (-lo).min(hi);
        let r = 2.0f64.min(0.5 * d);
        let step = 1e-4f64.min(d / 2000.0);
        let samples = integrate_codazzi(a, b, (-r, r), step).unwrap();
        rk = rk.max(rk4_closed_form_gap(a, b, &samples).unwrap());
        for _ in 0..5 {
            fi = fi.max(first_integral_residual(a, b, rng.gen_range(-r..r)).unwrap());
        }
        if k % 10 == 0 {
            let lambda = [0.5, 2.0, 3.0][k / 10 % 3];
            let rr = 2.0f64.min(0.5 * lambda * d);
            dil = dil.max(dilation_residual(a, b, lambda, (-rr, rr), 1e-3f64.min(lambda * d / 2000.0)).unwrap());
        }
        match sol.classify() {
            GlobalClass::Entire => {
                entire += 1;
                let long = integrate_codazzi(a, b, (-50.0, 50.0), 1e-2);
                ok &= matches!(long, Ok(ref s) if s.halted_at.is_none());
            }
            GlobalClass::PoleAt(p) => ok &= p.abs() == d,
        }
    }
    ok &= rk <= 1e-8 && fi <= 1e-10 && dil <= 1e-8;
    check(
        ok,
        format!("100 (a,b): rk4 gap {rk:.1e}, first integral {fi:.1e}, dilation {dil:.1e}, {entire} entire"),
    )
}

fn second_variation() -> Outcome {
    let q = QuadratureSpec::new(4, 4, 8);
    let fs = [TensorBump::new(0.1, -0.05, 0.6, 0.7, 4).unwrap(), TensorBump::new(-0.3, 0.2, 0.5, 0.4, 4).unwrap()];
    let mut worst = 0.0f64;
    let mut n = 0;
    for (_, g) in stationary_graphs().iter().take(4) {
        for body in &bodies() {
            for f in &fs {
                let formula = second_variation_formula(&**g, f, body, &q, 1e-5).unwrap();
                let fd = second_variation_fd(&GraphSurface(&**g), &VariationField::normal(*f), body, 1e-3, &q).unwrap();
                worst = worst.max((fd.value - formula).abs() / formula.abs());
                n += 1;
            }
        }
    }
    check(worst <= 1e-3, format!("{n} cases on 4 graphs x 3 bodies, max relative gap {worst:.1e}"))
}

fn bernstein() -> Outcome {
    let mut msgs = Vec::new();
    let mut ok = true;
    for body in [ConvexBody2D::disk(1.0).unwrap(), ConvexBody2D::ellipse(2.0, 1.0).unwrap()] {
        for g in [
            ClosedFormGraph::new(ClosedForm::Zero, square()),
            ClosedFormGraph::new(ClosedForm::Affine { a: 6.0, b: 2.0 }, square()),
        ] {
            let r = bernstein_report(&g, &body, &BernsteinConfig::for_domain(&g.domain()));
            let lam = r.min_eigenvalue.unwrap_or(f64::NAN);
            ok &= r.verdict == Verdict::StablePlanar && lam >= -1e-8;
            msgs.push(format!("{:?}/{}: {} (min eigenvalue {lam:.3e})", g.kind, body.name(), r.verdict));
        }
    }
    let g = ClosedFormGraph::new(ClosedForm::XtOver1px2, Rect::symmetric(4.0).unwrap());
    let r = bernstein_report(&g, &ConvexBody2D::disk(1.0).unwrap(), &BernsteinConfig::for_domain(&g.domain()));
    let lam = r.min_eigenvalue.unwrap_or(f64::NAN);
    let direct = r.witness.as_ref().map(|w| w.q_direct).unwrap_or(f64::NAN);
    ok &= r.verdict == Verdict::Unstable && lam < 0.0 && direct < 0.0 && (direct - lam).abs() <= 0.01 * lam.abs();
    msgs.push(format!("xt/(1+x^2) on [-4,4]^2: {} (eigenvalue {lam:.4e}, direct Q {direct:.4e})", r.verdict));
    check(ok, msgs.join("; "))
}

fn hardy() -> Outcome {
    let psi = TruncatedRational { plateau: 50.0, taper: 10.0 };
    let fail = hardy_gap(0.0, 2.0, &psi, 1200, 8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut min_gap = f64::INFINITY;
    for _ in 0..100 {
        let a: f64 = rng.gen_range(-2.0..2.0);
        let terms = (0..rng.gen_range(1..5))
            .map(|_| {
                let p = if rng.gen_bool(0.5) { 2 } else { 4 };
                (rng.gen_range(-1.0..1.0), CosineBump1D::new(rng.gen_range(-3.0..3.0), rng.gen_range(0.2..2.0), p).unwrap())
            })
            .collect();
        let gap = hardy_gap(a, 0.5 * a * a, &BumpSum1D { terms }, 256, 8).unwrap();
        min_gap = min_gap.min(gap);
    }
    check(
        fail < 0.0 && min_gap >= 0.0,
        format!("(A,B)=(0,2) truncated 1/(1+s^2): gap {fail:.4}; 2B=A^2 on 100 random psi: min gap {min_gap:.3e}"),
    )
}

fn integration_by_parts() -> Outcome {
    let body = asymmetric_body();
    let h = TensorBump::new(0.1, -0.05, 0.6, 0.7, 4).unwrap();
    let graphs = stationary_graphs();
    let mut ok = true;
    let mut msgs = Vec::new();
    for (name, g) in graphs.iter().filter(|(n, _)| *n == "xt/(1+x^2)" || *n == "ruled linear") {
        let mut prev: Option<f64> = None;
        let mut seq = Vec::new();
        for cells in [1, 2, 4, 8] {
            let r = integration_by_parts_residuals(&**g, &h, &body, &QuadratureSpec::new(cells, cells, 4), 1e-5).unwrap();
            let m = r.plain.abs().max(r.dual_weighted.abs()).max(r.e_direction.abs());
            if let Some(p) = prev {
                // Halving the cells gains at least the rule's 2^4 until the FD floor.
                ok &= m <= (p / 16.0).max(1e-8);
            }
            prev = Some(m);
            seq.push(format!("{m:.1e}"));
        }
        let r = integration_by_parts_residuals(&**g, &h, &body, &QuadratureSpec::default(), 1e-5).unwrap();
        let m = r.plain.abs().max(r.dual_weighted.abs()).max(r.e_direction.abs());
        ok &= m <= 1e-5;
        msgs.push(format!("{name}: refinement {} default {m:.1e}", seq.join(" -> ")));
    }
    check(ok, msgs.join("; "))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 convex duality", convex_duality),
        ("2 sub-Riemannian specialization", sub_riemannian_specialization),
        ("3 first variation", first_variation),
        ("4 foliation by lines", foliation),
        ("5 codazzi ODE", codazzi),
        ("6 second variation", second_variation),
        ("7 bernstein verdicts", bernstein),
        ("8 hardy inequality", hardy),
        ("9 integration by parts", integration_by_parts),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        match run() {
            Ok(msg) => println!("criterion {name}: PASS ({msg})"),
            Err(msg) => {
                println!("criterion {name}: FAIL ({msg})");
                failed.push(name);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 9 criteria pass");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
