//! Acceptance suite: every criterion runs at its stated tolerance and
//! prints one pass/fail line (run with `cargo test --test acceptance --
//! --nocapture` to see them).

use num_complex::Complex64;
use unitonlab::dpw::picard_integrate;
use unitonlab::exact::{GaussQ, Ring};
use unitonlab::factor::{
    bauer_spectral_factor, birkhoff, boost_loop, duality_check, iwasawa, sampled_distance,
    IwasawaRoute,
};
use unitonlab::harmonic::{
    dress, extended_solution, flatness_residual_fine, frame_grid, FrameEvaluator, GridSpec,
};
use unitonlab::liealg::FormSpec;
use unitonlab::linalg::{c, spans_equal, CMat};
use unitonlab::loops::LaurentLoop;
use unitonlab::pipeline::{run_pipeline, PipelineConfig};
use unitonlab::poly::{Poly, PolyMat};
use unitonlab::potentials::{s6_example_potential, Certificate, NormalizedPotential};
use unitonlab::roots::build_torus_and_roots;
use unitonlab::synth::{
    all_selectors, integer_selectors, random_graded_potential, random_s4_quadruple,
    random_twisted_plus_loop, random_willmore_dressing, random_willmore_potential, Rng,
};
use unitonlab::willmore::{
    eval_s6_example, s6_rotation, s6_surface, verify_surface, verify_surface_fine, S4Family,
};

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "criterion {}: {} — {}",
        criterion,
        if pass { "PASS" } else { "FAIL" },
        detail
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
}

/// Criterion 1: S⁶ example end-to-end on the 21×21 grid, compact route.
#[test]
fn criterion_1_s6_end_to_end() {
    let started = std::time::Instant::now();
    let cfg = PipelineConfig::from_json(
        r#"{
            "potential": "s6-example",
            "grid": "-1:1:21,-1:1:21",
            "lambda": "1,angle:0.7853981633974483,i,-1",
            "mode": "compact",
            "tolerances": { "flatness": 1e-7 }
        }"#,
    )
    .unwrap();
    let rep = run_pipeline(&cfg).unwrap();
    let elapsed = started.elapsed().as_secs_f64();
    let pass = rep.mc_exact
        && rep.singular_points == 0
        && rep.flatness_residual < 1e-7
        && rep.uniton_degree == 2
        && elapsed < 120.0;
    report(
        "1 (S6 end-to-end)",
        pass,
        &format!(
            "exact integration: {}; singular points {}; flatness {:.3e} (< 1e-7); uniton degree {} (= 2); runtime {:.1}s (< 120s)",
            rep.mc_exact, rep.singular_points, rep.flatness_residual, rep.uniton_degree, elapsed
        ),
    );
}

/// Criterion 2: closed-form checks on the 41×41 grid at h = 0.05.
#[test]
fn criterion_2_closed_form() {
    let grid = GridSpec::parse("-1:1:41,-1:1:41").unwrap();
    let lambdas: Vec<Complex64> = (0..8)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / 8.0;
            Complex64::new(t.cos(), t.sin())
        })
        .collect();
    let mut norm_defect = 0.0f64;
    let mut rot_defect = 0.0f64;
    for &lam in &lambdas {
        let d = s6_rotation(lam).unwrap();
        for z in grid.points() {
            let xl = eval_s6_example(z, lam).unwrap();
            let x1 = eval_s6_example(z, Complex64::new(1.0, 0.0)).unwrap();
            let n: f64 = xl.iter().map(|v| v * v).sum::<f64>().sqrt();
            norm_defect = norm_defect.max((n - 1.0).abs());
            for i in 0..7 {
                let mut acc = 0.0;
                for j in 0..7 {
                    acc += d[(i, j)].re * x1[j];
                }
                rot_defect = rot_defect.max((acc - xl[i]).abs());
            }
        }
    }
    // conformality at the h = 0.05 grid via fine-stencil derivatives of the
    // closed form, plus the h² shrink of the grid-stencil measure
    let sample = |z: Complex64| -> unitonlab::Result<Vec<f64>> {
        Ok(eval_s6_example(z, Complex64::new(1.0, 0.0))?.to_vec())
    };
    let fine = verify_surface_fine(&sample, &grid, 1e-3, 1e-8).unwrap();
    let coarse_grid = verify_surface(&s6_surface(&grid, Complex64::new(1.0, 0.0)).unwrap(), 1e-8).unwrap();
    let refined = GridSpec::parse("-1:1:81,-1:1:81").unwrap();
    let refined_grid =
        verify_surface(&s6_surface(&refined, Complex64::new(1.0, 0.0)).unwrap(), 1e-8).unwrap();
    let shrink = coarse_grid.conformality_defect / refined_grid.conformality_defect;
    let pass = norm_defect < 1e-12
        && rot_defect < 1e-12
        && fine.conformality_defect < 1e-4
        && shrink > 3.0
        && shrink < 5.5
        && fine.span_rank == 7;
    report(
        "2 (closed-form checks)",
        pass,
        &format!(
            "|x_λ| defect {:.3e} (< 1e-12); rotation identity {:.3e} (< 1e-12); conformality {:.3e} (< 1e-4 at h = 0.05); grid-stencil shrink ×{:.2} (≈ 4 under one refinement); span rank {} (= 7)",
            norm_defect, rot_defect, fine.conformality_defect, shrink, fine.span_rank
        ),
    );
}

/// Criterion 3: factorization suite on 50 random certified loops.
#[test]
fn criterion_3_factorization_suite() {
    let mut rng = Rng::new(0x5eed_3);
    // scalar spectral oracle first
    let mut p = LaurentLoop::zero(1);
    p.set_coeff(0, CMat::identity(1).scale(c(2.0, 0.0)));
    p.set_coeff(1, CMat::identity(1));
    p.set_coeff(-1, CMat::identity(1));
    let w = bauer_spectral_factor(&p, 1e-13, 500).unwrap();
    let scalar_defect = (w.coeff(0)[(0, 0)] - c(1.0, 0.0))
        .norm()
        .max((w.coeff(1)[(0, 0)] - c(1.0, 0.0)).norm());
    let mut worst_birkhoff = 0.0f64;
    let mut worst_unique = 0.0f64;
    let mut worst_iwasawa = 0.0f64;
    let mut worst_reality = 0.0f64;
    let mut worst_twist = 0.0f64;
    let mut max_span = 0i32;
    for trial in 0..50 {
        let m = if trial % 2 == 0 { 3 } else { 4 };
        let sys = build_torus_and_roots(m).unwrap();
        // keep λ-degree ≤ 6: selectors with 2·a₁ ≤ 4 plus dressing degree ≤ 2
        let selectors: Vec<Vec<usize>> = integer_selectors(m)
            .into_iter()
            .filter(|sel| {
                let ce = sys.canonical_element(sel).unwrap();
                2 * ce.elem.num.iter().copied().max().unwrap() / ce.elem.den <= 4
            })
            .collect();
        let sel = &selectors[rng.below(selectors.len())];
        let ce = sys.canonical_element(sel).unwrap();
        // symmetric-space mode keeps the loops σ-twisted, which the
        // twisting residuals below assert
        let pot = random_graded_potential(&mut rng, &ce, true, 2).unwrap();
        let form = pot.form.clone().unwrap();
        let frame = picard_integrate(&pot, Complex64::new(0.0, 0.0), 0).unwrap();
        let zstar = Complex64::new(0.4 * rng.unit(), 0.4 * rng.unit());
        let fm = frame.eval_loop(zstar);
        // Birkhoff round trip through a random twisted plus loop
        let h = random_twisted_plus_loop(&mut rng, &ce, 2).unwrap();
        let x = fm.mul(&h).unwrap();
        max_span = max_span.max(-x.lo()).max(x.hi());
        let bk = birkhoff(&x, Some(&form.ambient), None, 1e-9).unwrap();
        assert!(bk.in_big_cell, "trial {trial} left the big cell");
        worst_birkhoff = worst_birkhoff.max(sampled_distance(&bk.f_minus, &fm));
        let deeper = birkhoff(&x, Some(&form.ambient), Some((-x.lo()).max(1) as usize + 2), 1e-9)
            .unwrap();
        worst_unique = worst_unique.max(sampled_distance(&deeper.f_minus, &bk.f_minus));
        // Iwasawa on the certified loop itself
        let iw = iwasawa(&fm, &form, IwasawaRoute::Compact, 1e-8).unwrap();
        worst_iwasawa = worst_iwasawa.max(iw.residual);
        worst_reality = worst_reality.max(iw.reality_residual);
        worst_twist = worst_twist.max(iw.twist_residual);
    }
    let pass = scalar_defect < 1e-12
        && worst_birkhoff < 1e-9
        && worst_unique < 1e-10
        && worst_iwasawa < 1e-8
        && worst_reality < 1e-8
        && worst_twist < 1e-8
        && max_span <= 6;
    report(
        "3 (factorization suite)",
        pass,
        &format!(
            "50 loops (λ-degree ≤ {max_span}): Birkhoff reconstruction {:.3e} (< 1e-9); uniqueness across depths {:.3e} (< 1e-10); Iwasawa reconstruction {:.3e} (< 1e-8); reality {:.3e}, twisting {:.3e} (< 1e-8); scalar oracle 2+λ+λ⁻¹ → 1+λ defect {:.3e} (< 1e-12)",
            worst_birkhoff, worst_unique, worst_iwasawa, worst_reality, worst_twist, scalar_defect
        ),
    );
}

/// Criterion 4: duality — three-way F₋ agreement plus an engineered
/// off-cell instance.
#[test]
fn criterion_4_duality() {
    let mut rng = Rng::new(0x5eed_4);
    let mut worst = 0.0f64;
    let mut noncompact_successes = 0usize;
    for trial in 0..20 {
        let (pot, form) = if trial % 2 == 0 {
            let m = 3 + trial % 2;
            let sys = build_torus_and_roots(m).unwrap();
            let selectors = integer_selectors(m);
            let sel = &selectors[rng.below(selectors.len())];
            let ce = sys.canonical_element(sel).unwrap();
            let pot = random_graded_potential(&mut rng, &ce, true, 1).unwrap();
            let form = pot.form.clone().unwrap();
            (pot, form)
        } else {
            let pot = random_willmore_potential(&mut rng, 4, 3, 1).unwrap();
            let form = pot.form.clone().unwrap();
            (pot, form)
        };
        let frame = picard_integrate(&pot, Complex64::new(0.0, 0.0), 0).unwrap();
        let z = Complex64::new(0.3 * rng.unit(), 0.3 * rng.unit());
        let lp = frame.eval_loop(z);
        let rep = duality_check(&lp, &form, 1e-8).unwrap();
        worst = worst.max(rep.compact_discrepancy);
        if let Some(d) = rep.noncompact_discrepancy {
            worst = worst.max(d);
            noncompact_successes += 1;
        }
    }
    // engineered off-cell: the boost loop in the (e₀, e₁) metric pair
    let form = FormSpec::willmore(4);
    let off = boost_loop(8, 0, 1, 2);
    let compact_ok = iwasawa(&off, &form, IwasawaRoute::Compact, 1e-9)
        .map(|r| r.residual < 1e-9)
        .unwrap_or(false);
    let nc = iwasawa(&off, &form, IwasawaRoute::Noncompact, 1e-9);
    let off_reported = matches!(nc, Err(unitonlab::UnitonError::CellViolation(_)));
    let pass = worst < 1e-8 && noncompact_successes > 10 && compact_ok && off_reported;
    report(
        "4 (duality)",
        pass,
        &format!(
            "20 potentials: three-way F₋ agreement {:.3e} (< 1e-8), noncompact route succeeded on {noncompact_successes}; engineered off-cell loop: compact route fine: {compact_ok}, noncompact cell violation reported: {off_reported}",
            worst
        ),
    );
}

/// Criterion 5: roots suite over every canonical selector for m ∈ 2..=5.
#[test]
fn criterion_5_roots_suite() {
    let mut selector_count = 0usize;
    let mut worst_conj = 0.0f64;
    let mut worst_closure = 0.0f64;
    for m in 2..=5usize {
        let sys = build_torus_and_roots(m).unwrap();
        let simples = sys.simple_roots();
        for sel in all_selectors(m) {
            selector_count += 1;
            let ce = sys.canonical_element(&sel).unwrap();
            let xi = ce.xi_matrix();
            // canonicality: ad ξ scales the simple-root vector θ_j by
            // √−1·[j ∈ selector]; exact arithmetic on half-integer entries
            for (j, &(ri, rsi, rj, rsj)) in simples.iter().enumerate() {
                let root = sys
                    .roots
                    .iter()
                    .find(|r| (r.i, r.si, r.j, r.sj) == (ri, rsi, rj, rsj))
                    .unwrap();
                let want = if sel.contains(&(j + 1)) { 1.0 } else { 0.0 };
                let ad = xi.mul(&root.vector).sub(&root.vector.mul(&xi));
                let defect = ad.sub(&root.vector.scale(c(0.0, want))).max_abs();
                assert!(defect < 1e-14, "canonicality m={m} sel={sel:?} θ_{}", j + 1);
            }
            // dimension fill
            assert_eq!(ce.total_dim(), sys.algebra_dim(), "m={m} sel={sel:?}");
            // grading closure via the ad-eigenvalue residual of brackets
            for &j in &ce.levels() {
                for &k in &ce.levels() {
                    for a in ce.grading_basis(j).iter().take(3) {
                        for b in ce.grading_basis(k).iter().take(3) {
                            let y = a.commutator(b);
                            if y.max_abs() < 1e-13 {
                                continue;
                            }
                            let ad = xi.mul(&y).sub(&y.mul(&xi));
                            let res = ad.sub(&y.scale(c(0.0, (j + k) as f64))).max_abs()
                                / y.max_abs();
                            worst_closure = worst_closure.max(res);
                        }
                    }
                }
            }
            // γ_ξ-conjugation: λ^{−g} scaling against the exponential oracle
            let t = std::f64::consts::PI / 5.0;
            let lam = Complex64::new(t.cos(), t.sin());
            for &g in &ce.levels() {
                if g == 0 || ce.grading_basis(g).is_empty() {
                    continue;
                }
                let x = &ce.grading_basis(g)[0];
                let lp = ce.gamma_conjugate(x, 1e-10).unwrap();
                let oracle = ce.exp_t_xi(-t).mul(x).mul(&ce.exp_t_xi(t));
                worst_conj = worst_conj.max(lp.eval(lam).unwrap().sub(&oracle).max_abs());
            }
        }
    }
    assert_eq!(selector_count, 3 + 7 + 15 + 31);
    // Lemma: g^ξ_0 = g^{ξ_can}_0 for 10 random non-canonical elements
    let mut rng = Rng::new(0x5eed_5);
    for _ in 0..10 {
        let m = 3 + rng.below(3);
        let sys = build_torus_and_roots(m).unwrap();
        let mut mult = vec![0i64; m];
        let mut sel = vec![];
        for (k, w) in mult.iter_mut().enumerate() {
            if rng.below(2) == 0 {
                *w = 1 + rng.below(3) as i64;
                sel.push(k + 1);
            }
        }
        if sel.is_empty() {
            mult[0] = 2;
            sel.push(1);
        } else if mult.iter().all(|&w| w <= 1) {
            let k = sel[0] - 1;
            mult[k] = 2;
        }
        let noncan = sys.graded_element(&mult).unwrap();
        let can = sys.canonical_element(&sel).unwrap();
        assert_eq!(noncan.root_indices(0), can.root_indices(0), "mult {mult:?}");
        let a: Vec<&CMat> = noncan.grading_basis(0).iter().collect();
        let b: Vec<&CMat> = can.grading_basis(0).iter().collect();
        assert!(spans_equal(&a, &b, 1e-10), "zero-level span mult {mult:?}");
    }
    // Lemma: pr ∩ p^ℂ = Σ_{j≥0} g^ξ_{2j+1} with D = exp(πξ)
    for m in 2..=4usize {
        let sys = build_torus_and_roots(m).unwrap();
        for sel in all_selectors(m) {
            let ce = sys.canonical_element(&sel).unwrap();
            let d = ce.exp_pi_xi();
            let d_inv = d.transpose();
            let (pr, _q) = ce.pr_q_split();
            let mut pr_cap_p: Vec<CMat> = Vec::new();
            for (_, basis) in &pr.elements {
                let conj = d.mul(basis).mul(&d_inv);
                if conj.add(basis).max_abs() < 1e-12 {
                    pr_cap_p.push(basis.clone());
                }
            }
            let mut odd_positive: Vec<&CMat> = Vec::new();
            for &j in &ce.levels() {
                if j >= 0 && j.rem_euclid(2) == 1 {
                    odd_positive.extend(ce.grading_basis(j).iter());
                }
            }
            let refs: Vec<&CMat> = pr_cap_p.iter().collect();
            assert!(spans_equal(&refs, &odd_positive, 1e-10), "m={m} sel={sel:?}");
        }
    }
    let pass = worst_closure < 1e-10 && worst_conj < 1e-10;
    report(
        "5 (roots suite)",
        pass,
        &format!(
            "{selector_count} canonical selectors over m ∈ 2..=5: canonicality exact; dimensions m(2m−1) exact; grading closure {:.3e} (< 1e-10); γ_ξ-conjugation vs exponential {:.3e} (< 1e-10); zero-level and pr∩p^ℂ subspace identities exact",
            worst_closure, worst_conj
        ),
    );
}

/// Criterion 6: Picard termination in ≤ r(ξ)+1 steps with exact
/// Maurer–Cartan residual; the N² = 0 case reproduced exactly.
#[test]
fn criterion_6_picard_termination() {
    let mut rng = Rng::new(0x5eed_6);
    let mut trials = 0;
    for m in 2..=4usize {
        let sys = build_torus_and_roots(m).unwrap();
        for sel in all_selectors(m) {
            let ce = sys.canonical_element(&sel).unwrap();
            if ce.height < 1 {
                continue;
            }
            let pot = random_graded_potential(&mut rng, &ce, false, 2).unwrap();
            let frame = picard_integrate(&pot, Complex64::new(0.0, 0.0), 0).unwrap();
            assert!(
                frame.steps_used as i32 <= ce.height + 1,
                "m={m} sel={sel:?}: {} steps > r+1 = {}",
                frame.steps_used,
                ce.height + 1
            );
            assert!(frame.mc_exact, "m={m} sel={sel:?}: inexact Maurer–Cartan");
            trials += 1;
        }
    }
    // analytic case: η = λ⁻¹ N z dz, N² = 0 → F₋ = I + λ⁻¹ N z²/2 exactly
    let mut eta = PolyMat::<GaussQ>::zeros(3);
    eta.set(0, 2, Poly::monomial(GaussQ::one(), 1));
    let pot = NormalizedPotential {
        dim: 3,
        eta: eta.clone(),
        certificate: Certificate::None,
        poles: vec![],
        form: None,
        twist_conjugator: CMat::identity(3),
    };
    let frame = picard_integrate(&pot, Complex64::new(0.0, 0.0), 5).unwrap();
    let expected = eta.antiderivative_from(&GaussQ::zero());
    let exact = frame.steps_used == 1
        && frame.mc_exact
        && frame.terms[&-1] == expected
        && frame.terms[&0] == PolyMat::identity(3);
    report(
        "6 (Picard termination)",
        trials > 20 && exact,
        &format!(
            "{trials} certified potentials halt within r(ξ)+1 steps with symbolic Maurer–Cartan residual identically zero; N²=0 case gives F₋ = I + λ⁻¹Nz²/2 exactly: {exact}"
        ),
    );
}

/// Criterion 7: Willmore constraints — exact isotropy for every family at
/// m = 4, light-cone membership for the S⁴ family, violations rejected.
#[test]
fn criterion_7_willmore_constraints() {
    let mut rng = Rng::new(0x5eed_7);
    // all families at m = 4 with random degree-≤2 polynomials
    for family in 1..=3usize {
        for _ in 0..5 {
            let pot = random_willmore_potential(&mut rng, 4, family, 2).unwrap();
            // isotropy is checked exactly inside the builder; η₋₁³ = 0 is
            // the induced nilpotency identity
            let sq = pot.eta.mul(&pot.eta);
            assert!(sq.mul(&pot.eta).is_zero(), "family {family}: η³ ≠ 0");
            assert_eq!(pot.certificate, Certificate::Isotropic);
        }
    }
    // light-cone defect for 20 random constraint-satisfying quadruples
    let mut worst_cone = 0.0f64;
    for _ in 0..20 {
        let f = random_s4_quadruple(&mut rng, 1);
        let fam = match S4Family::new(f) {
            Ok(fam) => fam,
            Err(_) => continue, // genericity may fail for degenerate draws
        };
        for _ in 0..3 {
            let z = Complex64::new(0.8 * rng.unit(), 0.8 * rng.unit());
            let t = std::f64::consts::PI * rng.unit();
            let lam = Complex64::new(t.cos(), t.sin());
            let sample = fam.eval(z, lam).unwrap();
            worst_cone = worst_cone.max(sample.pairing_defect);
        }
    }
    // violations rejected
    let zp = Poly::monomial(GaussQ::one(), 1);
    let bad_s4 =
        unitonlab::potentials::make_s4_potential(&[zp.clone(), zp.clone(), zp.clone(), zp.clone()]);
    let bad_willmore = {
        use unitonlab::potentials::{ColumnPair, WillmorePotentialSpec};
        let pc = |re: i64, im: i64| Poly::constant(GaussQ::from_ints(re, im));
        unitonlab::potentials::make_willmore_potential(&WillmorePotentialSpec {
            m: 4,
            family: 3,
            pairs: vec![
                ColumnPair::TypeII { h: [pc(1, 0), pc(1, 0), pc(0, 1), pc(1, 0)] },
                ColumnPair::TypeII { h: [pc(0, 0), pc(0, 0), pc(1, 0), pc(0, 1)] },
            ],
        })
    };
    let rejections = bad_s4.is_err() && bad_willmore.is_err();
    let pass = worst_cone < 1e-9 && rejections;
    report(
        "7 (Willmore constraints)",
        pass,
        &format!(
            "families 1..3 at m = 4: B̂₁ᵗI₁,₃B̂₁ = 0 exactly and η³ = 0; S⁴ light-cone defect {:.3e} (< 1e-9) on random constraint-satisfying f; constraint violations rejected: {rejections}",
            worst_cone
        ),
    );
}

/// Criterion 8: dressing the S⁶ frames by random plus loops.
#[test]
fn criterion_8_dressing() {
    let mut rng = Rng::new(0x5eed_8);
    let pot = s6_example_potential();
    let frame = picard_integrate(&pot, Complex64::new(0.0, 0.0), 0).unwrap();
    let form = pot.form.clone().unwrap();
    let grid = GridSpec::parse("-0.3:0.3:4,-0.3:0.3:4").unwrap();
    let base = Complex64::new(-0.1, -0.1);
    let undressed = {
        let ev = FrameEvaluator::new(&frame, form.clone(), IwasawaRoute::Compact, 1e-9);
        let fr = frame_grid(&ev, &grid, base).unwrap();
        extended_solution(&fr).unwrap().uniton_degree
    };
    let lambdas: Vec<Complex64> = (0..6)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / 6.0 + 0.11;
            Complex64::new(t.cos(), t.sin())
        })
        .collect();
    let mut worst_flatness = 0.0f64;
    let mut worst_margin = 0i64;
    for trial in 0..10 {
        let h = random_willmore_dressing(&mut rng, 4, 0.4).unwrap();
        let dressed = dress(&h, &frame, &grid, base, form.clone(), IwasawaRoute::Compact, 1e-9)
            .expect("dressing stays on the compact cell");
        assert_eq!(dressed.singular_count(), 0, "trial {trial}");
        // flatness of the dressed family on probe points (fine stencil)
        let ev = FrameEvaluator {
            frame: &frame,
            dressing: Some(&h),
            form: form.clone(),
            route: IwasawaRoute::Compact,
            tol: 1e-9,
        };
        let probes = [Complex64::new(0.1, 0.0), Complex64::new(-0.15, 0.12)];
        let res = flatness_residual_fine(&ev, &probes, &lambdas, 1e-5).unwrap();
        worst_flatness = worst_flatness.max(res);
        // uniton bound: dressed degree ≤ degree + 2·deg(h₊)
        let sol = extended_solution(&dressed).unwrap();
        let bound = undressed + 2 * h.hi() as usize;
        worst_margin = worst_margin.max(sol.uniton_degree as i64 - bound as i64);
    }
    let pass = worst_flatness < 1e-6 && worst_margin <= 0;
    report(
        "8 (dressing)",
        pass,
        &format!(
            "10 random h₊ on the S⁶ frames: dressed flatness {:.3e} (< 1e-6); uniton degree within deg ≤ {undressed} + 2·deg(h₊) (worst margin {worst_margin})",
            worst_flatness
        ),
    );
}
