//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line straight to
//! stderr (so it shows even when output is captured) and then asserts.

use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use kornlab_core::config::{ExperimentConfig, ExperimentKind};
use kornlab_core::constraints::{apply_reduction, ConstraintSet, Reduction};
use kornlab_core::experiments::separation::MeshParams;
use kornlab_core::experiments::*;
use kornlab_core::field::FieldKind;
use kornlab_core::forms::{assemble_operator, assemble_scalar_forms, assemble_vector_forms};
use kornlab_core::geometry::*;
use kornlab_core::grid::build_grid;
use kornlab_core::report::run;
use kornlab_core::solvers::{pencil_max, pencil_max_dense, scalarized_denominator, EigOptions, ScalarizedOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(n: usize, pass: bool, what: &str, detail: &str, elapsed: Duration) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "{tag} criterion {n}: {what} [{detail}] ({:.2?})", elapsed);
}

#[test]
fn criterion_1_hardy_constant() {
    let t = Instant::now();
    let mut ok = true;
    let mut detail = Vec::new();
    for gamma in [0.0, 0.2, 0.4, 0.6, 0.8] {
        let bound = 4.0 / (1.0 - gamma as f64).powi(2);
        assert_eq!(hardy_bound(gamma), bound);
        let mut last = 0.0;
        let mut n = 8;
        while n <= 2048 {
            let v = hardy_extremal(gamma, 1.0, n).unwrap().value;
            ok &= v <= bound + 1e-9;
            ok &= v >= last - 1e-10;
            last = v;
            n *= 2;
        }
        ok &= last >= 0.8 * bound;
        detail.push(format!("gamma={gamma}: {:.4}/{bound:.4}", last));
    }
    let el = t.elapsed();
    ok &= el < Duration::from_secs(10);
    verdict(
        1,
        ok,
        "discrete Hardy constant below 4/(1-gamma)^2, monotone, >= 80% at 2048 elements",
        &detail.join(", "),
        el,
    );
    assert!(ok);
}

#[test]
fn criterion_2_weight_admissibility() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let pts: Vec<Point> =
        (0..10_000).map(|_| Point::new(rng.random_range(0.0..0.3), rng.random_range(1e-9..1.0))).collect();
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for (c, alpha) in [(1.0, 0.3), (2.5, 0.1), (0.7, 0.45), (1.0, 0.0), (3.0, 0.49)] {
        let w = WeightSpec::new(vec![WeightTerm::new(c, alpha)], DistanceKind::BottomEdge).unwrap();
        for &p in &pts {
            let g = scaled_weight_gradient(&w, p).unwrap();
            let (lhs, rhs) = (g[0].hypot(g[1]), alpha * eval_weight(&w, p));
            let err = if rhs > 0.0 { (lhs - rhs).abs() / rhs } else { lhs };
            worst = worst.max(err);
        }
    }
    ok &= worst <= 1e-12;
    // constants for a single term, a sum and a marked product
    ok &= admissibility_constant(&WeightSpec::power(0.3)) == 0.3;
    let sum =
        WeightSpec::new(vec![WeightTerm::new(1.0, 0.1), WeightTerm::new(2.0, 0.3)], DistanceKind::BottomEdge).unwrap();
    ok &= admissibility_constant(&sum) == 0.3;
    let rep = verify_admissibility(&sum, &pts);
    ok &= rep.pass && rep.max_ratio <= 0.3;
    let product = WeightSpec::power(0.2).with_product(3, 0.2).unwrap();
    ok &= (admissibility_constant(&product) - 0.6).abs() < 1e-15;
    // product of three corner weights, each with constant 0.2: the log-derivative
    // of the product is the sum of the factors' log-derivatives
    let dom = ThinRectangle::new(0.3, 1.0).unwrap();
    let factors: Vec<WeightSpec> = [0.0, 0.15, 0.3]
        .iter()
        .map(|&x0| WeightSpec::new(vec![WeightTerm::new(1.0, 0.2)], DistanceKind::corner(x0, &dom).unwrap()).unwrap())
        .collect();
    let mut prod_ratio: f64 = 0.0;
    for &p in &pts {
        let mut s = [0.0; 2];
        for f in &factors {
            let g = scaled_weight_gradient(f, p).unwrap();
            let v = eval_weight(f, p);
            s[0] += g[0] / v;
            s[1] += g[1] / v;
        }
        prod_ratio = prod_ratio.max(s[0].hypot(s[1]));
    }
    ok &= prod_ratio <= 0.6 * (1.0 + 1e-12);
    let el = t.elapsed();
    ok &= el < Duration::from_secs(1);
    let detail =
        format!("max rel err {worst:.1e}, sum ratio {:.4}, product ratio {prod_ratio:.4} <= 0.6", rep.max_ratio);
    verdict(2, ok, "|y grad w| = alpha w for single powers; sum and product constants", &detail, el);
    assert!(ok);
}

#[test]
fn criterion_3_interpolation_constant() {
    let t = Instant::now();
    let hs = [0.4, 0.2, 0.1, 0.05];
    let mesh = MeshParams { nx: 16, ny: 64, q: 1.0, order: 4 };
    let opts = ScalarizedOptions::default();
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, w) in [("w=1", WeightSpec::unit()), ("w=y^0.25", WeightSpec::power(0.25))] {
        let r = interpolation_sweep(&hs, 1.0, &w, &mesh, &opts).unwrap();
        let ks = r.values();
        let alpha = r.fit.as_ref().map_or(f64::NAN, |f| f.alpha);
        ok &= ks.iter().all(|&k| k >= 2.0);
        ok &= alpha.abs() <= 0.15;
        let ks: Vec<String> = ks.iter().map(|k| format!("{k:.3}")).collect();
        detail.push(format!("{name}: K = [{}], alpha = {alpha:.3}", ks.join(", ")));
    }
    let small = MeshParams { nx: 8, ny: 8, q: 1.0, order: 4 };
    let w = WeightSpec::power(0.25);
    let it = interpolation_constant(0.4, 1.0, &w, &small, &opts).unwrap().k;
    let dn = interpolation_constant(0.4, 1.0, &w, &small, &ScalarizedOptions { dense: true, ..opts }).unwrap().k;
    let rel = (it - dn).abs() / dn;
    ok &= rel <= 1e-6;
    detail.push(format!("dense vs iterative at h=0.4, 8x8: {rel:.1e}"));
    let el = t.elapsed();
    ok &= el < Duration::from_secs(300);
    verdict(3, ok, "K(h) >= 2 and fitted |alpha| <= 0.15 for the interpolation constant", &detail.join("; "), el);
    assert!(ok);
}

#[test]
fn criterion_4_separation_sweeps() {
    let t = Instant::now();
    let hs = [0.4, 0.2, 0.1, 0.05, 0.025];
    let mesh = MeshParams { nx: 16, ny: 64, q: 3.0, order: 4 };
    let a = EllipticitySpec::identity();
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, w) in [("w=1", WeightSpec::unit()), ("w=y^0.2", WeightSpec::power(0.2))] {
        let ans = run_separation_experiment(&a, &w, &hs, 1.0, &mesh, &DataMode::Ansatz, true).unwrap();
        let v = ans.values();
        let (lo, hi) = v.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
        ok &= lo > 0.0 && hi / lo <= 4.0;
        let rm = run_separation_experiment(&a, &w, &hs, 1.0, &mesh, &DataMode::RandomModes { modes: 8, seed: 7 }, true)
            .unwrap();
        let alpha = rm.fit.as_ref().map_or(f64::NAN, |f| f.alpha);
        ok &= alpha >= -0.1;
        detail.push(format!("{name}: ansatz band {:.3}, random-modes alpha {alpha:.3}", hi / lo));
    }
    let el = t.elapsed();
    ok &= el < Duration::from_secs(120);
    verdict(4, ok, "separation ratio bounded (band <= 4) and without upward trend", &detail.join("; "), el);
    assert!(ok);
}

#[test]
fn criterion_5_kondratiev_oleinik() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut min = f64::INFINITY;
    for _ in 0..1000 {
        let a = rng.random_range(0.2..3.0);
        let period = rng.random_range(0.1..4.0);
        let p = TrigPoly::random(&mut rng, 12, period);
        min = min.min(kondratiev_oleinik_margin(|x| p.value(x), |x| p.derivative(x), a, 64));
    }
    let c: f64 = 1.7;
    let const_margin = kondratiev_oleinik_margin(|_| c, |_| 0.0, 1.0, 8);
    let lin_margin = kondratiev_oleinik_margin(|x| x, |_| 1.0, 1.0, 8);
    let mut ok = min >= -1e-10;
    ok &= (const_margin - 1.5 * c * c).abs() < 1e-12;
    ok &= (lin_margin - (2.5 - 1.0 / 24.0)).abs() < 1e-12;
    let el = t.elapsed();
    ok &= el < Duration::from_secs(5);
    verdict(5, ok, "margin >= -1e-10 over 1000 random trigonometric polynomials", &format!("min margin {min:.4e}"), el);
    assert!(ok);
}

#[test]
fn criterion_6_caccioppoli_ratio_is_mesh_stable() {
    let t = Instant::now();
    let (h, len) = (0.2, 1.0);
    let dom = ThinRectangle::new(h, len).unwrap();
    let a = EllipticitySpec::identity();
    let mut ok = true;
    let mut detail = Vec::new();
    for (wname, w) in [("w=1", WeightSpec::unit()), ("w=y^0.25", WeightSpec::power(0.25))] {
        for f in Manufactured::all(h, len) {
            let r: Vec<f64> = [8, 16, 32]
                .iter()
                .map(|&n| {
                    let g = Arc::new(build_grid(&dom, n, 4 * n, 2.0).unwrap());
                    lemma31_discrete(&f, &a, &w, &g, 4).unwrap().ratio
                })
                .collect();
            let change = r.windows(2).map(|p| ((p[1] - p[0]) / p[1]).abs()).fold(0.0, f64::max);
            ok &= r.iter().all(|&x| x > 0.0) && change <= 0.02;
            detail.push(format!("{wname} {}: {:.2}%", f.name(), 100.0 * change));
        }
    }
    let el = t.elapsed();
    ok &= el < Duration::from_secs(60);
    verdict(6, ok, "weighted Caccioppoli ratio stable within 2% over two refinements", &detail.join(", "), el);
    assert!(ok);
}

#[test]
fn criterion_7_infrastructure() {
    let t = Instant::now();
    let mut ok = true;
    let mut detail = Vec::new();

    // power fit on exact data
    let pts: Vec<(f64, f64)> = [0.4, 0.2, 0.1, 0.05].iter().map(|&h: &f64| (h, 3.0 * h.powf(1.5))).collect();
    let f = power_fit(&pts).unwrap();
    let fit_err = (f.c - 3.0).abs().max((f.alpha - 1.5).abs());
    ok &= fit_err <= 1e-12;
    detail.push(format!("fit err {fit_err:.1e}"));

    // iterative vs dense on 20 seeded pencils from constrained vector forms
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut eig_err: f64 = 0.0;
    for seed in 0..20u64 {
        let h = rng.random_range(0.05..0.5);
        let g = Arc::new(
            build_grid(&ThinRectangle::new(h, 1.0).unwrap(), rng.random_range(3..7), rng.random_range(6..14), 1.5)
                .unwrap(),
        );
        let w = WeightSpec::power(rng.random_range(0.0..0.45));
        let vf = assemble_vector_forms(&g, &w, 4).unwrap();
        let c = ConstraintSet::trace_tie(&g, FieldKind::Vector, 0).with_deflation(ConstraintSet::constant_component(
            &g,
            FieldKind::Vector,
            1,
        ));
        let red = Arc::new(Reduction::new(vf.grad.dim(), &c).unwrap());
        let (n, p, e) = (
            apply_reduction(&vf.grad, &red).unwrap(),
            apply_reduction(&vf.mass_u, &red).unwrap(),
            apply_reduction(&vf.strain, &red).unwrap(),
        );
        let mu = 10f64.powf(rng.random_range(-2.0..2.0));
        let b = scalarized_denominator(&p.matrix, &e.matrix, h, mu).unwrap();
        let it = pencil_max(&n.matrix, &b, &EigOptions { seed, ..EigOptions::default() }, None).unwrap().value;
        let dn = pencil_max_dense(&n.matrix, &b).unwrap().value;
        eig_err = eig_err.max((it - dn).abs() / dn);
    }
    ok &= eig_err <= 1e-8;
    detail.push(format!("eig rel err {eig_err:.1e}"));

    // symmetry and semidefiniteness of every assembled form
    let mut forms_ok = true;
    let mut count = 0;
    for (i, (h, q, alpha)) in [(1.0, 1.0, 0.0), (0.1, 2.0, 0.25), (0.3, 3.0, 0.49)].into_iter().enumerate() {
        let g = Arc::new(build_grid(&ThinRectangle::new(h, 1.0).unwrap(), 5, 12, q).unwrap());
        let w = WeightSpec::power(alpha);
        let a = EllipticitySpec::new([[2.0, 0.5], [0.5, 1.0]]).unwrap();
        let sf = assemble_scalar_forms(&g, &w, &a, 4).unwrap();
        let vf = assemble_vector_forms(&g, &w, 4).unwrap();
        let op = assemble_operator(&g, &a, 4).unwrap();
        for m in sf.all().into_iter().chain(vf.all()).chain([&op]) {
            forms_ok &= m.is_symmetric() && m.psd_margin(200, i as u64) >= -1e-12;
            count += 1;
        }
    }
    ok &= forms_ok;
    detail.push(format!("{count} forms symmetric and PSD: {forms_ok}"));

    // config round trip and run determinism
    let mut cfg_ok = true;
    for k in ExperimentKind::ALL {
        let c = ExperimentConfig::new(k);
        cfg_ok &= ExperimentConfig::parse(&c.emit()).as_ref() == Ok(&c);
    }
    let cfg = ExperimentConfig::parse(
        "experiment = interpolation\nmesh.nx = 3\nmesh.ny = 8\nmesh.q = 1.5\nweight.terms = 1:0.25\nseed = 9\n",
    )
    .unwrap();
    cfg_ok &= run(&cfg).unwrap().payload_json().unwrap() == run(&cfg).unwrap().payload_json().unwrap();
    ok &= cfg_ok;
    detail.push(format!("config round trip and determinism: {cfg_ok}"));

    let el = t.elapsed();
    verdict(7, ok, "fit, eigensolver, form and config invariants", &detail.join(", "), el);
    assert!(ok);
}
