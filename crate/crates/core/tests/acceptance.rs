//! Acceptance run: one line per criterion, nonzero exit if any fails.

use std::time::Instant;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hyperrho::charkit::{census, char_of_indices, expected_census, IndexSet, SymplecticElement};
use hyperrho::goepel::{
    classify_wholly_even, enumerate_groups, verify_structure, wholly_even_systems, StructureReport, Witness,
};
use hyperrho::poly::Poly;
use hyperrho::rho::{
    i1_homogeneity, i1_nonsymmetry_witness, s_matrix, verify_identity, IdentityInputs, IdentityName, RootSystem,
};
use hyperrho::riemann::{elliptic_tau_agm, periods, HyperellipticCurve, PeriodData};
use hyperrho::theta::{
    chi18_check, chi4_check, thomae_report, transform_check, vanishing_census, ThetaEvaluator, TransformTarget,
};

type Outcome = Result<(bool, String), String>;

struct Shared {
    rank3: StructureReport,
    rank2: StructureReport,
    rank4: StructureReport,
    plain3: Vec<hyperrho::charkit::Characteristic>,
}

fn shared() -> Result<(Shared, String), String> {
    let e = |e: hyperrho::Error| e.to_string();
    let t = Instant::now();
    let g33 = enumerate_groups(3, 3).map_err(e)?;
    let g32 = enumerate_groups(3, 2).map_err(e)?;
    let t3 = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let g44 = enumerate_groups(4, 4).map_err(e)?;
    let t4 = t.elapsed().as_secs_f64();
    let mut detail = format!("enumeration g3 {t3:.2}s, g4 {t4:.2}s; ");
    let mut ok = g33.len() == 135 && g32.len() == 315 && g44.len() == 2295 && t4 < 60.0;
    let c33 = classify_wholly_even(3, 3, &g33).map_err(e)?;
    let c32 = classify_wholly_even(3, 2, &g32).map_err(e)?;
    let c44 = classify_wholly_even(4, 4, &g44).map_err(e)?;
    let get = |m: &std::collections::BTreeMap<String, usize>, k: &str| m.get(k).copied().unwrap_or(0);
    ok &= get(&c33.systems, "8[I0]") == 105 && get(&c33.systems, "1[I2]+7[I0]") == 30 && c33.systems.len() == 2;
    ok &= get(&c32.collections, "3(4[I0])") == 210
        && get(&c32.collections, "(1[I2]+3[I0])+2(4[I0])") == 105
        && c32.collections.len() == 2;
    ok &= get(&c44.systems, "16[I0]") == 945 && get(&c44.systems, "2[I2]+14[I0]") == 1350;
    let one_singular: usize = c44.systems.iter().filter(|(l, _)| l.starts_with("1[I2]")).map(|(_, n)| n).sum();
    ok &= one_singular == 0 && c44.systems.len() == 2;
    detail += &format!(
        "(3,3) {} groups {:?}; (3,2) {} groups {:?}; (4,4) {} groups {:?}, one-singular {one_singular}",
        g33.len(),
        c33.systems,
        g32.len(),
        c32.collections,
        g44.len(),
        c44.systems
    );
    let rank3 = verify_structure(3, 3, &g33).map_err(e)?;
    let rank2 = verify_structure(3, 2, &g32).map_err(e)?;
    let rank4 = verify_structure(4, 4, &g44).map_err(e)?;
    let plain3 = wholly_even_systems(&g33)
        .map_err(e)?
        .into_iter()
        .flatten()
        .find(|s| s.profile().label() == "8[I0]")
        .ok_or("no plain rank-3 system")?
        .elements()
        .to_vec();
    if !ok {
        return Err(format!("FAIL {detail}"));
    }
    Ok((Shared { rank3, rank2, rank4, plain3 }, detail))
}

fn criterion1() -> Outcome {
    let t = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for g in 1..=4 {
        let c = census(g).map_err(|e| e.to_string())?;
        ok &= c == expected_census(g);
        parts.push(format!("g={g}: {}e/{}o {:?}", c.even, c.odd, c.by_multiplicity));
    }
    let c3 = census(3).map_err(|e| e.to_string())?;
    let c4 = census(4).map_err(|e| e.to_string())?;
    ok &= c3.even == 36 && c3.odd == 28 && c3.by_multiplicity == vec![35, 28, 1];
    ok &= c4.by_multiplicity == vec![126, 120, 10];
    let secs = t.elapsed().as_secs_f64();
    ok &= secs < 1.0;
    Ok((ok, format!("{}; {secs:.3}s", parts.join(", "))))
}

fn criterion3(s: &Shared) -> Outcome {
    let count = |r: &StructureReport| r.witnesses.len();
    let mut ok = count(&s.rank3) == 30 && s.rank3.systems_checked == 30;
    ok &= count(&s.rank2) == 105 && s.rank2.systems_checked == 105;
    ok &= count(&s.rank4) == 1350 && s.rank4.systems_checked == 1350;
    ok &= s.rank4.kappa_census.len() == 45 && s.rank4.kappa_census.iter().all(|k| k.systems == 30);
    let first = |r: &StructureReport| match r.witnesses.first() {
        Some(Witness::Rank3 { i, j, .. }) => format!("i={i:?} j={j:?}"),
        Some(Witness::Rank2 { pairs, .. }) => format!("pairs={pairs:?}"),
        Some(Witness::Rank4 { kappa, i, j, .. }) => format!("kappa={kappa:?} i={i:?} j={j:?}"),
        None => "none".into(),
    };
    Ok((
        ok,
        format!(
            "rank3 {}/30 [{}], rank2 {}/105 [{}], rank4 {}/1350 [{}], kappa pairs {} x {:?}",
            count(&s.rank3),
            first(&s.rank3),
            count(&s.rank2),
            first(&s.rank2),
            count(&s.rank4),
            first(&s.rank4),
            s.rank4.kappa_census.len(),
            s.rank4.kappa_census.iter().map(|k| k.systems).collect::<std::collections::BTreeSet<_>>()
        ),
    ))
}

fn rational_roots(g: usize, trials: usize, seed: u64) -> Vec<RootSystem> {
    RootSystem::random_rational_batch(g, trials, seed).expect("root tuples")
}

fn criterion4(s: &Shared) -> Outcome {
    let inputs =
        IdentityInputs { rank3: Some(s.rank3.clone()), rank2: Some(s.rank2.clone()), rank4: Some(s.rank4.clone()) };
    let mut ok = true;
    let mut parts = Vec::new();
    let t = Instant::now();
    for (g, trials) in [(3usize, rational_roots(3, 3, 2024)), (4, rational_roots(4, 3, 2025))] {
        for name in IdentityName::for_genus(g) {
            if name == IdentityName::I1Translation {
                continue;
            }
            let rec = verify_identity(name, &inputs, &trials).map_err(|e| e.to_string())?;
            ok &= rec.pass;
            parts.push(format!(
                "{} x{} sign {:?} {}",
                rec.identity,
                rec.instances,
                rec.sign,
                if rec.pass { "ok" } else { "FAIL" }
            ));
        }
    }
    let expect = [("chi4", 30), ("chi18", 1), ("phi2_equal", 105), ("h0", 210), ("mu8", 1350), ("chi68", 1)];
    for (name, n) in expect {
        ok &= parts.iter().any(|p| p.starts_with(&format!("{name} x{n} ")));
    }
    let secs = t.elapsed().as_secs_f64();
    ok &= secs < 600.0;
    Ok((ok, format!("{}; {secs:.1}s", parts.join(", "))))
}

fn criterion5() -> Outcome {
    let trials = rational_roots(3, 3, 77);
    let inputs = IdentityInputs::default();
    let rec = verify_identity(IdentityName::I1Translation, &inputs, &trials).map_err(|e| e.to_string())?;
    let mut homog = true;
    let mut rng = ChaCha8Rng::seed_from_u64(78);
    for r in &trials {
        let lambda = BigRational::new(
            BigInt::from(rng.random_range(-90i64..=90).max(1)),
            BigInt::from(rng.random_range(1i64..=13)),
        );
        let shift =
            BigRational::new(BigInt::from(rng.random_range(-90i64..=90)), BigInt::from(rng.random_range(1i64..=13)));
        let (scaled, shifted) = i1_homogeneity(r, &lambda, &shift).map_err(|e| e.to_string())?;
        homog &= scaled && shifted;
    }
    let w = i1_nonsymmetry_witness(5, 50).map_err(|e| e.to_string())?;
    let ok = rec.pass && homog && w.is_some();
    let wit = w
        .map(|w| format!("swap {:?} at {:?}: {} -> {}", w.transposition, w.roots, w.before, w.after))
        .unwrap_or_default();
    Ok((ok, format!("shift {}, degree-4 homogeneity {homog}, witness {wit}", rec.pass)))
}

fn criterion6() -> Outcome {
    let c = Poly::from_int;
    let s3 = s_matrix(IndexSet::from_indices(&[]), 3).map_err(|e| e.to_string())?;
    let expect3 = [[0, 0, -1], [0, 2, 0], [-1, 0, 0]];
    let mut ok = (0..3).all(|i| (0..3).all(|j| *s3.entry(i, j) == c(expect3[i][j])));
    for k in 0..10 {
        let s = s_matrix(IndexSet::from_indices(&[k]), 4).map_err(|e| e.to_string())?;
        let e = Poly::var(k);
        let e2 = &e * &e;
        let expect = [
            [c(0), c(0), c(-1), e.clone()],
            [c(0), c(2), -&e, -&e2],
            [c(-1), -&e, &c(2) * &e2, c(0)],
            [e.clone(), -&e2, c(0), c(0)],
        ];
        ok &= (0..4).all(|i| (0..4).all(|j| *s.entry(i, j) == expect[i][j]));
    }
    Ok((ok, "Ŝ[∅] at g=3 and Ŝ[{k}], k=0..9, at g=4 entry-for-entry".into()))
}

fn reference(g: usize) -> Result<(PeriodData, ThetaEvaluator), String> {
    let p = periods(&HyperellipticCurve::reference(g).map_err(|e| e.to_string())?, 1e-14).map_err(|e| e.to_string())?;
    let ev = ThetaEvaluator::new(p.tau(), 1e-15).map_err(|e| e.to_string())?;
    Ok((p, ev))
}

fn criterion7() -> Outcome {
    let t = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for g in [2usize, 3] {
        let (p, ev) = reference(g)?;
        for order in 1..=3 {
            let r = thomae_report(&ev, &p, order, 1e-6).map_err(|e| e.to_string())?;
            if r.count == 0 {
                parts.push(format!("g={g} order {order}: no characteristics of multiplicity 2"));
                continue;
            }
            ok &= r.pass;
            parts.push(format!(
                "g={g} order {order}: {} chars, residual {:.1e}, ||ε|-1| {:.1e}, |ε⁸-1| {:.1e}, spread {:.1e}, ε={} constant {}",
                r.count,
                r.max_residual,
                r.max_modulus_defect,
                r.max_eighth_power_defect,
                r.epsilon_spread,
                r.expected_epsilon,
                r.matches_normalization
            ));
        }
    }
    let secs = t.elapsed().as_secs_f64();
    ok &= secs < 120.0;
    Ok((ok, format!("{}; {secs:.1}s", parts.join("; "))))
}

fn criterion8() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (g, n) in [(3usize, 1usize), (4, 10)] {
        let (_, ev) = reference(g)?;
        let r = vanishing_census(&ev, 1e-6).map_err(|e| e.to_string())?;
        ok &= r.pass && r.vanishing.len() == n;
        parts.push(format!(
            "g={g}: {} below {:.1e} ({:?}), max singular {:.1e}, min non-singular {:.2e}",
            r.vanishing.len(),
            r.threshold,
            if n == 1 { r.vanishing.clone() } else { vec![format!("{} chars", r.vanishing.len())] },
            r.max_singular,
            r.min_nonsingular
        ));
    }
    let empty = char_of_indices(3, &[]).map_err(|e| e.to_string())?;
    let (_, ev) = reference(3)?;
    let r = vanishing_census(&ev, 1e-6).map_err(|e| e.to_string())?;
    ok &= r.vanishing == vec![empty.to_string()];
    Ok((ok, parts.join("; ")))
}

fn criterion9(s: &Shared) -> Outcome {
    let (p, ev) = reference(3)?;
    let r18 = chi18_check(&ev, &p, 1e-6).map_err(|e| e.to_string())?;
    let systems: Vec<_> = s
        .rank3
        .witnesses
        .iter()
        .filter_map(|w| match w {
            Witness::Rank3 { system, .. } => Some(system.clone()),
            _ => None,
        })
        .collect();
    let r4 = chi4_check(&ev, &p, &systems, 1e-6, 1e-8).map_err(|e| e.to_string())?;
    let ok = r18.pass && r4.pass && r4.variants == 30;
    Ok((
        ok,
        format!(
            "chi18 residual {:.1e}; chi4 {} variants, residual {:.1e}, mutual spread {:.1e}",
            r18.residual, r4.variants, r4.residual, r4.variant_spread
        ),
    ))
}

fn criterion10(s: &Shared) -> Outcome {
    let (_, ev) = reference(3)?;
    let empty = char_of_indices(3, &[]).map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut worst: f64 = 0.0;
    let mut names = Vec::new();
    for (name, gamma) in SymplecticElement::generators(3).map_err(|e| e.to_string())? {
        for target in [TransformTarget::LemmaI2(empty), TransformTarget::Monomial(s.plain3.clone())] {
            let r = transform_check(&gamma, &ev, &target, 1e-6).map_err(|e| e.to_string())?;
            ok &= r.pass;
            worst = worst.max(r.eighth_power_defect).max(r.residual);
            if !r.pass {
                names.push(format!("{name} {}", r.target));
            }
        }
    }
    let id = SymplecticElement::identity(3).map_err(|e| e.to_string())?;
    let r = transform_check(&id, &ev, &TransformTarget::LemmaI2(empty), 1e-6).map_err(|e| e.to_string())?;
    ok &= (Complex64::new(r.multiplier[0], r.multiplier[1]) - 1.0).norm() < 1e-12;
    Ok((
        ok,
        format!("J and 6 translations, lemma_I2 and 8-constant monomial; worst defect {worst:.1e}; failures {names:?}"),
    ))
}

fn criterion11() -> Outcome {
    let mut ok = true;
    let mut agm_err: f64 = 0.0;
    for e in [[0.0, 1.0, 2.0, 3.0], [-2.0, 0.5, 1.0, 7.0], [0.0, 0.1, 5.0, 5.2], [-10.0, -9.0, 30.0, 31.5]] {
        let c = HyperellipticCurve::new(e.to_vec()).map_err(|e| e.to_string())?;
        let p = periods(&c, 1e-14).map_err(|e| e.to_string())?;
        agm_err = agm_err.max((p.tau()[(0, 0)] - elliptic_tau_agm(e).map_err(|e| e.to_string())?).norm());
    }
    ok &= agm_err < 1e-10;
    let mut legendre: f64 = 0.0;
    let mut symmetry: f64 = 0.0;
    let mut stability: f64 = 0.0;
    let curves = [
        (1..=4).map(|g| HyperellipticCurve::reference(g).unwrap()).collect::<Vec<_>>(),
        vec![HyperellipticCurve::new(vec![-3.0, -1.0, 0.0, 2.0, 5.0, 9.0, 10.0, 14.0]).unwrap()],
    ]
    .concat();
    for c in &curves {
        let fine = periods(c, 1e-14).map_err(|e| e.to_string())?;
        let coarse = periods(c, 1e-9).map_err(|e| e.to_string())?;
        legendre = legendre.max(fine.certificates().legendre_residual);
        symmetry = symmetry.max(fine.certificates().symmetry_residual);
        let d = (fine.tau() - coarse.tau()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        stability = stability.max(d);
    }
    ok &= legendre < 1e-8 && symmetry < 1e-8 && stability < 1e-7;
    Ok((
        ok,
        format!("AGM {agm_err:.1e}; Legendre {legendre:.1e}; symmetry {symmetry:.1e}; τ change between node-doubling tolerances 1e-9 and 1e-14: {stability:.1e}"),
    ))
}

fn main() {
    let start = Instant::now();
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    results.push((1, "census", criterion1()));
    let sh = shared();
    let (ok2, d2) = match &sh {
        Ok((_, d)) => (true, d.clone()),
        Err(e) => (false, e.clone()),
    };
    results.push((2, "goepel enumeration", Ok((ok2, d2))));
    match &sh {
        Ok((s, _)) => {
            results.push((3, "structure theorems", criterion3(s)));
            results.push((4, "exact rho identities", criterion4(s)));
        }
        Err(_) => {
            results.push((3, "structure theorems", Err("enumeration failed".into())));
            results.push((4, "exact rho identities", Err("enumeration failed".into())));
        }
    }
    results.push((5, "I1 properties", criterion5()));
    results.push((6, "S matrices", criterion6()));
    results.push((7, "numeric Thomae", criterion7()));
    results.push((8, "vanishing on the locus", criterion8()));
    match &sh {
        Ok((s, _)) => {
            results.push((9, "chi18/chi4 derivatives", criterion9(s)));
            results.push((10, "transformation laws", criterion10(s)));
        }
        Err(_) => {
            results.push((9, "chi18/chi4 derivatives", Err("enumeration failed".into())));
            results.push((10, "transformation laws", Err("enumeration failed".into())));
        }
    }
    results.push((11, "period engine", criterion11()));
    let mut failures = 0;
    for (n, name, out) in &results {
        let (pass, detail) = match out {
            Ok((p, d)) => (*p, d.clone()),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        println!("criterion {n:>2} {name}: {} | {detail}", if pass { "PASS" } else { "FAIL" });
    }
    println!(
        "acceptance: {}/{} passed in {:.1}s",
        results.len() - failures,
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
