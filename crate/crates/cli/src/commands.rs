use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use hyperrho::charkit::{
    all_characteristics, census, expected_census, partition_of_char, Characteristic, SymplecticElement,
};
use hyperrho::goepel::cache::{groups_with_cache, GroupCache};
use hyperrho::goepel::{
    classify_wholly_even, expected_group_count, expected_system_counts, systems_of_group, verify_structure,
    wholly_even_systems, GoepelGroup, StructureReport, SystemType, Witness,
};
use hyperrho::rho::{verify_identity, IdentityInputs, IdentityName, RootSystem};
use hyperrho::riemann::{elliptic_tau_agm, periods, HyperellipticCurve, PeriodData};
use hyperrho::theta::{
    chi18_check, chi4_check, chi68_partial_check, heat_check, thomae_report, transform_check, truncation_change,
    vanishing_census, zero_vector, ThetaEvaluator, TransformTarget,
};

use crate::report::Check;

/// Enumeration source shared by the commands of one run.
pub struct Groups {
    cache: Option<GroupCache>,
    seen: BTreeMap<(usize, usize), Vec<GoepelGroup>>,
    pub log: Vec<Value>,
}

impl Groups {
    pub fn new(cache: Option<GroupCache>) -> Self {
        Self { cache, seen: BTreeMap::new(), log: Vec::new() }
    }

    pub fn get(&mut self, g: usize, r: usize) -> Result<Vec<GoepelGroup>> {
        if let Some(groups) = self.seen.get(&(g, r)) {
            return Ok(groups.clone());
        }
        let (groups, status) = groups_with_cache(g, r, self.cache.as_ref())?;
        self.log.push(json!({ "genus": g, "rank": r, "status": status }));
        self.seen.insert((g, r), groups.clone());
        Ok(groups)
    }

    fn structure(&mut self, g: usize, r: usize) -> Result<StructureReport> {
        let groups = self.get(g, r)?;
        Ok(verify_structure(g, r, &groups)?)
    }
}

pub fn census_checks(g: usize) -> Result<Vec<Check>> {
    let c = census(g)?;
    let e = expected_census(g);
    let mult =
        |v: &[usize]| -> BTreeMap<String, usize> { v.iter().enumerate().map(|(m, n)| (format!("m{m}"), *n)).collect() };
    let params = json!({ "genus": g });
    Ok(vec![
        Check::exact(
            "census.parity",
            params.clone(),
            json!({ "even": e.even, "odd": e.odd }),
            json!({ "even": c.even, "odd": c.odd }),
        ),
        Check::exact("census.multiplicity", params, json!(mult(&e.by_multiplicity)), json!(mult(&c.by_multiplicity))),
    ])
}

fn expected_even_census(g: usize, r: usize) -> Option<(&'static str, Value)> {
    match (g, r) {
        (3, 3) => Some(("systems", json!({ "8[I0]": 105, "1[I2]+7[I0]": 30 }))),
        (3, 2) => Some(("collections", json!({ "3(4[I0])": 210, "(1[I2]+3[I0])+2(4[I0])": 105 }))),
        (4, 4) => Some(("systems", json!({ "16[I0]": 945, "2[I2]+14[I0]": 1350 }))),
        _ => None,
    }
}

fn witness_summary(w: &Witness) -> Value {
    match w {
        Witness::Rank3 { i, j, .. } => json!({ "i": i, "j": j }),
        Witness::Rank2 { pairs, .. } => json!({ "pairs": pairs }),
        Witness::Rank4 { kappa, i, j, .. } => json!({ "kappa": kappa, "i": i, "j": j }),
    }
}

pub fn goepel_checks(g: usize, r: usize, groups: &mut Groups) -> Result<Vec<Check>> {
    if !(1..=4).contains(&g) || r == 0 || r > g {
        bail!("Göpel enumeration needs 1 ≤ rank ≤ genus ≤ 4, got genus {g}, rank {r}");
    }
    let params = json!({ "genus": g, "rank": r });
    let list = groups.get(g, r)?;
    let mut checks =
        vec![Check::exact("goepel.groups", params.clone(), json!(expected_group_count(g, r)), json!(list.len()))];

    let (even, odd, mixed) = expected_system_counts(g, r);
    let mut bad = 0usize;
    for grp in &list {
        let sys = systems_of_group(grp)?;
        let count = |t: SystemType| sys.iter().filter(|s| s.system_type() == t).count();
        if (count(SystemType::WhollyEven), count(SystemType::WhollyOdd), count(SystemType::Mixed)) != (even, odd, mixed)
        {
            bad += 1;
        }
    }
    checks.push(Check::exact(
        "goepel.systems_per_group",
        params.clone(),
        json!({ "even": even, "odd": odd, "mixed": mixed, "deviating_groups": 0 }),
        json!({ "even": even, "odd": odd, "mixed": mixed, "deviating_groups": bad }),
    ));

    if let Some((field, expected)) = expected_even_census(g, r) {
        let c = classify_wholly_even(g, r, &list)?;
        let observed = if field == "systems" { json!(c.systems) } else { json!(c.collections) };
        checks.push(Check::exact(format!("goepel.even_{field}"), params.clone(), expected, observed));
        if g == 4 {
            let one: usize = c.systems.iter().filter(|(l, _)| l.starts_with("1[I2]")).map(|(_, n)| n).sum();
            checks.push(Check::exact("goepel.one_singular", params.clone(), json!(0), json!(one)));
        }
        let singular: usize = match (g, r) {
            (3, 2) => c.collections.iter().filter(|(l, _)| l.contains("[I2]")).map(|(_, n)| n).sum(),
            _ => c.systems.iter().filter(|(l, _)| l.contains("[I2]")).map(|(_, n)| n).sum(),
        };
        match verify_structure(g, r, &list) {
            Ok(s) => {
                let mut observed = json!({
                    "systems_checked": s.systems_checked,
                    "witnesses": s.witnesses.len(),
                    "first_witnesses": s.witnesses.iter().take(3).map(witness_summary).collect::<Vec<_>>(),
                });
                let mut expected = json!({ "systems_checked": singular, "witnesses": singular });
                let mut pass = s.systems_checked == singular && s.witnesses.len() == singular;
                if g == 4 {
                    let sizes: std::collections::BTreeSet<usize> = s.kappa_census.iter().map(|k| k.systems).collect();
                    observed["kappa_pairs"] = json!(s.kappa_census.len());
                    observed["systems_per_pair"] = json!(sizes);
                    expected["kappa_pairs"] = json!(45);
                    expected["systems_per_pair"] = json!([30]);
                    pass &= s.kappa_census.len() == 45 && sizes.len() == 1 && sizes.contains(&30);
                }
                checks.push(Check::custom("goepel.structure", params, expected, observed, None, pass));
            }
            Err(e) => checks.push(Check::error("goepel.structure", params, e)),
        }
    }
    Ok(checks)
}

pub fn identity_checks(g: usize, trials: usize, seed: u64, groups: &mut Groups) -> Result<Vec<Check>> {
    if g != 3 && g != 4 {
        bail!("identities are stated at genus 3 and 4, got {g}");
    }
    if trials == 0 {
        bail!("at least one trial is required");
    }
    let inputs = if g == 3 {
        IdentityInputs { rank3: Some(groups.structure(3, 3)?), rank2: Some(groups.structure(3, 2)?), rank4: None }
    } else {
        IdentityInputs { rank3: None, rank2: None, rank4: Some(groups.structure(4, 4)?) }
    };
    let roots = RootSystem::random_rational_batch(g, trials, seed)?;
    let mut checks = Vec::new();
    for name in IdentityName::for_genus(g) {
        let params = json!({ "genus": g, "trials": trials, "seed": seed });
        match verify_identity(name, &inputs, &roots) {
            Ok(rec) => {
                let observed = json!({
                    "instances": rec.instances,
                    "sign": rec.sign,
                    "degree": rec.degree,
                    "exponents_match": rec.exponents_match,
                    "witness": rec.witness,
                    "roots": rec.roots,
                });
                let expected = json!("fourth powers equal up to a fixed sign; exponent maps equal");
                checks.push(Check::custom(
                    format!("identity.{}", name.as_str()),
                    params,
                    expected,
                    observed,
                    None,
                    rec.pass,
                ));
            }
            Err(e) => checks.push(Check::error(format!("identity.{}", name.as_str()), params, e)),
        }
    }
    Ok(checks)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NumericCheck {
    Periods,
    Agm,
    Thomae1,
    Thomae2,
    Thomae3,
    Vanishing,
    Heat,
    Truncation,
    Transform,
    Chi18,
    Chi4,
    Chi68,
    All,
}

impl NumericCheck {
    fn applicable(g: usize) -> Vec<NumericCheck> {
        use NumericCheck::*;
        let mut out = vec![Periods];
        if g == 1 {
            out.push(Agm);
        }
        out.extend([Thomae1, Thomae2]);
        if g >= 3 {
            out.push(Thomae3);
        }
        out.extend([Vanishing, Heat, Truncation, Transform]);
        match g {
            3 => out.extend([Chi18, Chi4]),
            4 => out.push(Chi68),
            _ => {}
        }
        out
    }

    pub fn expand(list: &[NumericCheck], g: usize) -> Vec<NumericCheck> {
        if list.is_empty() || list.contains(&NumericCheck::All) {
            return Self::applicable(g);
        }
        let mut out = list.to_vec();
        out.dedup();
        out
    }
}

/// Roots from a file (one rational per line) or an inline comma list.
pub fn parse_roots(arg: &str) -> Result<Vec<f64>> {
    let path = Path::new(arg);
    let text = if path.is_file() {
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
    } else {
        arg.replace(',', "\n")
    };
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let v = match t.split_once('/') {
            Some((p, q)) => {
                let p: f64 = p.trim().parse().with_context(|| format!("root {}: {t:?}", n + 1))?;
                let q: f64 = q.trim().parse().with_context(|| format!("root {}: {t:?}", n + 1))?;
                if q == 0.0 {
                    bail!("root {}: zero denominator", n + 1);
                }
                p / q
            }
            None => t.parse().with_context(|| format!("root {}: {t:?}", n + 1))?,
        };
        out.push(v);
    }
    Ok(out)
}

/// Numeric tolerances derived from the requested digits.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Tolerances {
    pub quadrature: f64,
    pub theta: f64,
    pub check: f64,
}

impl Tolerances {
    /// Plain double precision: numeric checks at 10⁻⁶.
    pub fn double() -> Self {
        Self { quadrature: 1e-14, theta: 1e-15, check: 1e-6 }
    }

    pub fn from_digits(digits: u32) -> Result<Self> {
        if !(10..=15).contains(&digits) {
            bail!("--digits must lie in 10..=15 (double precision), got {digits}");
        }
        Ok(Self {
            quadrature: 10f64.powi(-(digits as i32)).max(1e-14),
            theta: 10f64.powi(-(digits as i32) - 1).max(1e-15),
            check: 10f64.powi(4 - digits as i32),
        })
    }
}

fn singular_chars(g: usize) -> Result<Vec<Characteristic>> {
    let mut out = Vec::new();
    for c in all_characteristics(g)? {
        if c.is_even() && partition_of_char(&c)?.multiplicity() >= 2 {
            out.push(c);
        }
    }
    Ok(out)
}

/// First wholly even rank-`g` system without singular characteristics.
fn plain_system(g: usize, groups: &mut Groups) -> Result<Option<Vec<Characteristic>>> {
    let list = groups.get(g, g)?;
    Ok(wholly_even_systems(&list)?
        .into_iter()
        .flatten()
        .find(|s| s.profile().singular() == 0 && s.profile().by_multiplicity.iter().skip(1).all(|&n| n == 0))
        .map(|s| s.elements().to_vec()))
}

fn periods_checks(p: &PeriodData, curve: &HyperellipticCurve, tol: &Tolerances) -> Result<Vec<Check>> {
    let c = p.certificates();
    let params = json!({ "genus": p.genus() });
    let coarse = periods(curve, tol.quadrature * 1e3)?;
    let change = (p.tau() - coarse.tau()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(vec![
        Check::below("periods.legendre", params.clone(), c.legendre_residual, tol.check.min(1e-8)),
        Check::below("periods.symmetry", params.clone(), c.symmetry_residual, tol.check.min(1e-8)),
        Check::custom(
            "periods.im_tau_positive",
            params.clone(),
            json!({ "min_eigenvalue_above": 0.0 }),
            json!({ "min_eigenvalue": c.im_tau_min_eigenvalue, "det_omega": [c.det_omega_re, c.det_omega_im], "condition_number": c.condition_number }),
            None,
            c.im_tau_min_eigenvalue > 0.0,
        ),
        Check::custom(
            "periods.node_doubling",
            json!({ "genus": p.genus(), "nodes": c.nodes, "coarse_nodes": coarse.certificates().nodes }),
            json!({ "below": tol.check }),
            json!({ "tau_change": change, "last_doubling_change": c.quadrature_error }),
            Some(tol.check),
            change < tol.check,
        ),
    ])
}

pub fn numeric_checks(
    roots: &[f64],
    requested: &[NumericCheck],
    tol: &Tolerances,
    groups: &mut Groups,
) -> Result<Vec<Check>> {
    let curve = HyperellipticCurve::new(roots.to_vec())?;
    let g = curve.genus();
    if g > 4 {
        bail!("numeric checks support genus 1..=4, got {g}");
    }
    let p = periods(&curve, tol.quadrature)?;
    let ev = ThetaEvaluator::new(p.tau(), tol.theta)?;
    let list = NumericCheck::expand(requested, g);
    let plain = if list.contains(&NumericCheck::Transform) { plain_system(g, groups)? } else { None };
    let rank3 = if g == 3 && list.contains(&NumericCheck::Chi4) {
        groups
            .structure(3, 3)?
            .witnesses
            .into_iter()
            .filter_map(|w| match w {
                Witness::Rank3 { system, .. } => Some(system),
                _ => None,
            })
            .collect()
    } else {
        Vec::new()
    };
    let run = Numeric { curve: &curve, p: &p, ev: &ev, tol, plain, rank3 };
    let parts: Vec<Vec<Check>> = list.par_iter().map(|&c| run.one(c)).collect::<Result<_>>()?;
    Ok(parts.concat())
}

/// Shared inputs of the checks on one curve; checks run in parallel.
struct Numeric<'a> {
    curve: &'a HyperellipticCurve,
    p: &'a PeriodData,
    ev: &'a ThetaEvaluator,
    tol: &'a Tolerances,
    plain: Option<Vec<Characteristic>>,
    rank3: Vec<Vec<Characteristic>>,
}

impl Numeric<'_> {
    fn one(&self, check: NumericCheck) -> Result<Vec<Check>> {
        use NumericCheck::*;
        let (curve, p, ev, tol) = (self.curve, self.p, self.ev, self.tol);
        let g = curve.genus();
        let roots = curve.roots();
        let params = json!({ "genus": g });
        let mut checks = Vec::new();
        match check {
            All => {}
            Periods => checks.extend(periods_checks(p, curve, tol)?),
            Agm => {
                if g != 1 {
                    checks.push(Check::error("agm", params.clone(), "the AGM oracle is for genus 1"));
                    return Ok(checks);
                }
                let agm = elliptic_tau_agm([roots[0], roots[1], roots[2], roots[3]])?;
                let d = (p.tau()[(0, 0)] - agm).norm();
                checks.push(Check::below(
                    "agm",
                    json!({ "genus": 1, "tau": [p.tau()[(0, 0)].re, p.tau()[(0, 0)].im], "agm": [agm.re, agm.im] }),
                    d,
                    1e-10,
                ));
            }
            Thomae1 | Thomae2 | Thomae3 => {
                let order = match check {
                    Thomae1 => 1,
                    Thomae2 => 2,
                    _ => 3,
                };
                let name = format!("thomae.order{order}");
                let rep = thomae_report(ev, p, order, tol.check)?;
                if rep.count == 0 {
                    checks.push(Check::error(
                        name,
                        params.clone(),
                        format!("no characteristics of multiplicity {} at genus {g}", order - 1),
                    ));
                    return Ok(checks);
                }
                checks.push(Check::custom(
                    name,
                    json!({ "genus": g, "order": order, "characteristics": rep.count }),
                    json!({ "residual_below": tol.check, "modulus_defect_below": tol.check, "eighth_power_defect_below": tol.check }),
                    json!({
                        "max_residual": rep.max_residual,
                        "max_modulus_defect": rep.max_modulus_defect,
                        "max_eighth_power_defect": rep.max_eighth_power_defect,
                        "epsilon_spread": rep.epsilon_spread,
                        "normalized_epsilon": rep.expected_epsilon,
                        "matches_normalization": rep.matches_normalization,
                    }),
                    Some(tol.check),
                    rep.pass,
                ));
            }
            Vanishing => {
                let r = vanishing_census(ev, 1e-6)?;
                checks.push(Check::custom(
                    "vanishing",
                    json!({ "genus": g, "relative_threshold": 1e-6 }),
                    json!({ "count": r.singular.len(), "characteristics": r.singular }),
                    json!({ "count": r.vanishing.len(), "characteristics": r.vanishing, "max_singular": r.max_singular, "min_nonsingular": r.min_nonsingular }),
                    Some(1e-6),
                    r.pass,
                ));
            }
            Heat => {
                let mut chars = vec![Characteristic::zero(g)?];
                chars.extend(singular_chars(g)?.into_iter().take(1));
                chars.extend(all_characteristics(g)?.find(|c| !c.is_even()));
                for c in chars {
                    let r = heat_check(ev, &c, &zero_vector(g), tol.check)?;
                    checks.push(Check::custom(
                        "heat",
                        json!({ "genus": g, "characteristic": r.characteristic }),
                        json!({ "below": tol.check }),
                        json!({ "residual": r.residual, "finite_difference_residual": r.finite_difference_residual }),
                        Some(tol.check),
                        r.pass,
                    ));
                }
            }
            Truncation => {
                let d = truncation_change(ev)?;
                checks.push(Check::below(
                    "truncation",
                    json!({ "genus": g, "radius": ev.radius(), "lambda_min": ev.lambda_min() }),
                    d,
                    tol.check,
                ));
            }
            Transform => {
                let mut targets = Vec::new();
                if let Some(c) = singular_chars(g)?.first() {
                    targets.push(TransformTarget::LemmaI2(*c));
                }
                if let Some(s) = self.plain.clone() {
                    targets.push(TransformTarget::Monomial(s));
                }
                for (name, gamma) in SymplecticElement::generators(g)? {
                    for t in &targets {
                        let r = transform_check(&gamma, ev, t, tol.check)?;
                        checks.push(Check::custom(
                            format!("transform.{}", r.target.split(' ').next().unwrap_or_default()),
                            json!({ "genus": g, "generator": name, "target": r.target }),
                            json!({ "multiplier_eighth_power": 1.0, "multiplier_modulus": 1.0 }),
                            json!({
                                "multiplier": r.multiplier,
                                "eighth_power_defect": r.eighth_power_defect,
                                "modulus_defect": r.modulus_defect,
                                "residual": r.residual,
                                "transformed_value": r.transformed_value,
                            }),
                            Some(tol.check),
                            r.pass,
                        ));
                    }
                }
            }
            Chi18 | Chi4 | Chi68 => {
                let r = match check {
                    Chi18 if g == 3 => chi18_check(ev, p, tol.check),
                    Chi4 if g == 3 => chi4_check(ev, p, &self.rank3, tol.check, tol.check * 1e-2),
                    Chi68 if g == 4 => chi68_partial_check(ev, p, tol.check),
                    _ => {
                        let name = match check {
                            Chi18 => "chi18",
                            Chi4 => "chi4",
                            _ => "chi68_partial",
                        };
                        checks.push(Check::error(name, params.clone(), format!("not defined at genus {g}")));
                        return Ok(checks);
                    }
                };
                let r = r?;
                checks.push(Check::custom(
                    r.form.clone(),
                    json!({ "genus": g, "variants": r.variants }),
                    json!({ "residual_below": r.tolerance }),
                    json!({ "residual": r.residual, "variant_spread": r.variant_spread, "max_singular_ratio": r.max_singular_ratio }),
                    Some(r.tolerance),
                    r.pass,
                ));
            }
        }
        Ok(checks)
    }
}
