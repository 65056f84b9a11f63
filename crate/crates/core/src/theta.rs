//! Riemann theta functions with half-integer characteristics,
//! `θ[ε′;ε](v;τ) = Σ_n exp(iπ mᵗτm + 2iπ mᵗ(v + ε/2))`, `m = n + ε′/2`,
//! and numeric checks of the Thomae formulas, the heat equation, the
//! vanishing pattern on the hyperelliptic locus and the transformation laws.
//!
//! Lattice sums run over the ball `‖m‖ ≤ R` with
//! `R = ⌈√(ln(1/tol)/(π λ_min))⌉ + g`, where `λ_min` is the smallest
//! eigenvalue of `Im τ`. Sums are serial and in a fixed order, so results
//! are reproducible; sweeps parallelize over characteristics.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::charkit::{all_characteristics, gamma_action, partition_of_char, Characteristic, SymplecticElement};
use crate::error::{domain, Error, Result};
use crate::rho::{rho_d2theta, rho_dtheta, rho_monomial, rho_theta, s_matrix, u_vector_f64, Frame, RhoImage};
use crate::riemann::{im_min_eigenvalue, CMatrix, PeriodData};

/// Value, gradient and Hessian in `v` of one theta function at one point.
#[derive(Clone, Debug)]
pub struct Jet {
    pub value: Complex64,
    pub gradient: Vec<Complex64>,
    pub hessian: CMatrix,
}

#[derive(Clone, Debug)]
pub struct ThetaEvaluator {
    genus: usize,
    tau: CMatrix,
    tolerance: f64,
    radius: usize,
    lambda_min: f64,
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn i_pi() -> Complex64 {
    Complex64::new(0.0, PI)
}

impl ThetaEvaluator {
    /// `tol` is the target absolute truncation error.
    pub fn new(tau: &CMatrix, tol: f64) -> Result<Self> {
        let lambda = Self::validate(tau, tol)?;
        let g = tau.nrows();
        let r = ((1.0 / tol).ln() / (PI * lambda)).sqrt().ceil() as usize + g;
        Ok(Self { genus: g, tau: tau.clone(), tolerance: tol, radius: r, lambda_min: lambda })
    }

    /// Explicit truncation radius.
    pub fn with_radius(tau: &CMatrix, tol: f64, radius: usize) -> Result<Self> {
        let lambda = Self::validate(tau, tol)?;
        Ok(Self { genus: tau.nrows(), tau: tau.clone(), tolerance: tol, radius, lambda_min: lambda })
    }

    fn validate(tau: &CMatrix, tol: f64) -> Result<f64> {
        let g = tau.nrows();
        if g == 0 || g != tau.ncols() {
            return domain("τ must be a non-empty square matrix");
        }
        if !(tol > 0.0 && tol < 1.0) {
            return domain("tolerance must lie in (0, 1)");
        }
        let scale = max_abs(tau).max(1.0);
        if max_abs(&(tau - tau.transpose())) > 1e-10 * scale {
            return domain("τ is not symmetric");
        }
        let lambda = im_min_eigenvalue(tau);
        if !(lambda > 0.0) {
            return domain(format!("Im τ is not positive definite (λ_min = {lambda:.3e})"));
        }
        Ok(lambda)
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn tau(&self) -> &CMatrix {
        &self.tau
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    fn check_char(&self, ch: &Characteristic) -> Result<()> {
        if ch.genus() != self.genus {
            return Err(Error::GenusMismatch { left: self.genus, right: ch.genus() });
        }
        Ok(())
    }

    /// Visits every `m = n + ε′/2` with `‖m‖ ≤ R` together with its term
    /// `exp(iπ mᵗτm + 2iπ mᵗ(v + ε/2))`.
    fn for_each_term(&self, ch: &Characteristic, v: &[Complex64], mut f: impl FnMut(&[f64], Complex64)) {
        let g = self.genus;
        let r = self.radius as i64;
        let shift: Vec<f64> = (0..g).map(|j| ch.top_bit(j) as f64 / 2.0).collect();
        let w: Vec<Complex64> = (0..g).map(|j| v[j] + ch.bottom_bit(j) as f64 / 2.0).collect();
        let r2 = (r * r) as f64;
        let mut n = vec![-r - 1; g];
        let mut m = vec![0.0; g];
        loop {
            for j in 0..g {
                m[j] = n[j] as f64 + shift[j];
            }
            if m.iter().map(|x| x * x).sum::<f64>() <= r2 {
                let mut q = Complex64::new(0.0, 0.0);
                for i in 0..g {
                    let mut row = self.tau[(i, i)] * (m[i] / 2.0);
                    for j in i + 1..g {
                        row += self.tau[(i, j)] * m[j];
                    }
                    q += row * m[i];
                }
                let lin: Complex64 = (0..g).map(|j| w[j] * m[j]).sum();
                f(&m, (i_pi() * (q * 2.0 + lin * 2.0)).exp());
            }
            let mut k = 0;
            loop {
                if k == g {
                    return;
                }
                n[k] += 1;
                if n[k] <= r {
                    break;
                }
                n[k] = -r - 1;
                k += 1;
            }
        }
    }

    /// Value, gradient and Hessian at `v` in one pass.
    pub fn jet(&self, ch: &Characteristic, v: &[Complex64]) -> Result<Jet> {
        self.check_char(ch)?;
        if v.len() != self.genus {
            return domain(format!("v has length {}, expected {}", v.len(), self.genus));
        }
        let g = self.genus;
        let two_pi_i = i_pi() * 2.0;
        let mut value = Complex64::new(0.0, 0.0);
        let mut gradient = vec![Complex64::new(0.0, 0.0); g];
        let mut hessian = CMatrix::zeros(g, g);
        self.for_each_term(ch, v, |m, t| {
            value += t;
            for i in 0..g {
                let ti = t * (two_pi_i * m[i]);
                gradient[i] += ti;
                for j in i..g {
                    hessian[(i, j)] += ti * (two_pi_i * m[j]);
                }
            }
        });
        for i in 0..g {
            for j in 0..i {
                hessian[(i, j)] = hessian[(j, i)];
            }
        }
        Ok(Jet { value, gradient, hessian })
    }

    /// Jet at `v = 0`.
    pub fn jet0(&self, ch: &Characteristic) -> Result<Jet> {
        self.jet(ch, &vec![Complex64::new(0.0, 0.0); self.genus])
    }

    pub fn value(&self, ch: &Characteristic, v: &[Complex64]) -> Result<Complex64> {
        Ok(self.jet(ch, v)?.value)
    }

    /// `θ[ε]` or one of its `v`-derivatives of order ≤ 2, given as a list
    /// of 0-based coordinate indices.
    pub fn theta_char(&self, ch: &Characteristic, v: &[Complex64], derivative: &[usize]) -> Result<Complex64> {
        if derivative.iter().any(|&k| k >= self.genus) {
            return domain("derivative index out of range");
        }
        let jet = self.jet(ch, v)?;
        match *derivative {
            [] => Ok(jet.value),
            [i] => Ok(jet.gradient[i]),
            [i, j] => Ok(jet.hessian[(i, j)]),
            _ => domain("derivative order above 2"),
        }
    }

    /// `∂θ/∂τ_ij` with the entries of `τ` treated as independent:
    /// `iπ Σ m_i m_j · term`.
    pub fn dtau(&self, ch: &Characteristic, v: &[Complex64]) -> Result<CMatrix> {
        self.check_char(ch)?;
        let g = self.genus;
        let mut out = CMatrix::zeros(g, g);
        self.for_each_term(ch, v, |m, t| {
            let t = t * i_pi();
            for i in 0..g {
                for j in 0..g {
                    out[(i, j)] += t * (m[i] * m[j]);
                }
            }
        });
        Ok(out)
    }

    /// All theta constants `θ[ε](0)` for the given characteristics, in order.
    pub fn constants(&self, chars: &[Characteristic]) -> Result<Vec<Complex64>> {
        chars.par_iter().map(|c| Ok(self.jet0(c)?.value)).collect()
    }
}

fn zero_v(g: usize) -> Vec<Complex64> {
    vec![Complex64::new(0.0, 0.0); g]
}

/// `|θ[ε](−v) − (−1)^{parity} θ[ε](v)|`.
pub fn parity_residual(ev: &ThetaEvaluator, ch: &Characteristic, v: &[Complex64]) -> Result<f64> {
    let plus = ev.value(ch, v)?;
    let neg: Vec<Complex64> = v.iter().map(|z| -z).collect();
    let minus = ev.value(ch, &neg)?;
    let s = if ch.is_even() { 1.0 } else { -1.0 };
    Ok((minus - plus * s).norm())
}

/// The derivative frame of an image as a matrix: `ω u` (g×1) for a
/// gradient, `ω Ŝ ωᵗ` (g×g) for a Hessian.
pub fn frame_value(frame: &Frame, periods: &PeriodData) -> Result<CMatrix> {
    let g = periods.genus();
    let roots = periods.curve().roots();
    let w = periods.omega();
    match frame {
        Frame::Gradient(i1) => {
            let u = u_vector_f64(*i1, g, roots);
            Ok(w * CMatrix::from_iterator(g, 1, u.into_iter().map(|x| Complex64::new(x, 0.0))))
        }
        Frame::Hessian(i2) => {
            let s = s_matrix(*i2, g)?.eval_f64(roots);
            let s = CMatrix::from_row_iterator(g, g, s.into_iter().map(|x| Complex64::new(x, 0.0)));
            Ok(w * s * w.transpose())
        }
    }
}

/// Numeric value of an image with `ε = 1`; at most one frame.
pub fn image_value(img: &RhoImage, periods: &PeriodData) -> Result<CMatrix> {
    let scalar = img.scalar_f64(periods.curve().roots(), periods.det_omega());
    match img.frames() {
        [] => Ok(CMatrix::from_element(1, 1, scalar)),
        [f] => Ok(frame_value(f, periods)? * scalar),
        _ => domain("images with several derivative frames have no matrix value"),
    }
}

fn fit(lhs: &CMatrix, rhs: &CMatrix) -> (Complex64, f64) {
    let num: Complex64 = rhs.iter().zip(lhs.iter()).map(|(r, l)| r.conj() * l).sum();
    let den: f64 = rhs.iter().map(|r| r.norm_sqr()).sum();
    let f = num / den;
    let res = (lhs - rhs * f).norm() / lhs.norm().max(f64::MIN_POSITIVE);
    (f, res)
}

/// Largest deviation of an entrywise ratio `lhs/rhs` from `f`, over entries
/// with `|rhs|` above `1e-8` of the largest.
fn component_spread(lhs: &CMatrix, rhs: &CMatrix, f: Complex64) -> f64 {
    let cut = 1e-8 * max_abs(rhs);
    lhs.iter().zip(rhs.iter()).filter(|(_, r)| r.norm() > cut).map(|(l, r)| (l / r - f).norm()).fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize)]
pub struct ThomaeEntry {
    pub characteristic: String,
    pub partition: String,
    pub epsilon: [f64; 2],
    pub residual: f64,
    pub component_spread: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ThomaeReport {
    pub genus: usize,
    pub order: usize,
    pub count: usize,
    pub entries: Vec<ThomaeEntry>,
    pub max_residual: f64,
    pub max_modulus_defect: f64,
    pub max_eighth_power_defect: f64,
    /// Largest `|ε_c − ε_c′|` over the characteristics.
    pub epsilon_spread: f64,
    /// Normalized value `1`, `(−1)^g`, `−1` for orders 1, 2, 3.
    pub expected_epsilon: f64,
    pub matches_normalization: bool,
    pub tolerance: f64,
    pub pass: bool,
}

/// Fitted `ε` for a single characteristic of multiplicity `order − 1`.
pub fn thomae_entry(
    ev: &ThetaEvaluator,
    periods: &PeriodData,
    ch: &Characteristic,
    order: usize,
) -> Result<ThomaeEntry> {
    let p = partition_of_char(ch)?;
    let (img, lhs) = {
        let jet = ev.jet0(ch)?;
        let g = ev.genus();
        match order {
            1 => (rho_theta(&p)?, CMatrix::from_element(1, 1, jet.value)),
            2 => (rho_dtheta(&p)?, CMatrix::from_vec(g, 1, jet.gradient)),
            3 => (rho_d2theta(&p)?, jet.hessian),
            _ => return domain(format!("Thomae order {order} is not 1, 2 or 3")),
        }
    };
    let rhs = image_value(&img, periods)?;
    let (f, residual) = fit(&lhs, &rhs);
    Ok(ThomaeEntry {
        characteristic: ch.to_string(),
        partition: p.indices().to_string(),
        epsilon: [f.re, f.im],
        residual,
        component_spread: component_spread(&lhs, &rhs, f),
    })
}

/// Fits `ε` for every characteristic of multiplicity `order − 1`.
pub fn thomae_report(ev: &ThetaEvaluator, periods: &PeriodData, order: usize, tol: f64) -> Result<ThomaeReport> {
    let g = periods.genus();
    if ev.genus() != g {
        return Err(Error::GenusMismatch { left: ev.genus(), right: g });
    }
    if !(1..=3).contains(&order) {
        return domain(format!("Thomae order {order} is not 1, 2 or 3"));
    }
    let chars: Vec<Characteristic> = all_characteristics(g)?
        .filter(|c| partition_of_char(c).map(|p| p.multiplicity() == order - 1).unwrap_or(false))
        .collect();
    let entries: Vec<ThomaeEntry> =
        chars.par_iter().map(|c| thomae_entry(ev, periods, c, order)).collect::<Result<_>>()?;
    let eps: Vec<Complex64> = entries.iter().map(|e| Complex64::new(e.epsilon[0], e.epsilon[1])).collect();
    let max_residual = entries.iter().map(|e| e.residual.max(e.component_spread)).fold(0.0, f64::max);
    let max_modulus_defect = eps.iter().map(|f| (f.norm() - 1.0).abs()).fold(0.0, f64::max);
    let max_eighth_power_defect = eps.iter().map(|f| (f.powu(8) - 1.0).norm()).fold(0.0, f64::max);
    let mut spread: f64 = 0.0;
    for a in &eps {
        for b in &eps {
            spread = spread.max((a - b).norm());
        }
    }
    let expected = match order {
        1 => 1.0,
        2 if g % 2 == 1 => -1.0,
        2 => 1.0,
        _ => -1.0,
    };
    let matches = eps.iter().all(|f| (f - expected).norm() < tol);
    let pass = !entries.is_empty() && max_residual < tol && max_modulus_defect < tol && max_eighth_power_defect < tol;
    Ok(ThomaeReport {
        genus: g,
        order,
        count: entries.len(),
        entries,
        max_residual,
        max_modulus_defect,
        max_eighth_power_defect,
        epsilon_spread: spread,
        expected_epsilon: expected,
        matches_normalization: matches,
        tolerance: tol,
        pass,
    })
}

/// [`thomae_report`], failing with the worst characteristic.
pub fn verify_thomae(ev: &ThetaEvaluator, periods: &PeriodData, order: usize, tol: f64) -> Result<ThomaeReport> {
    let rep = thomae_report(ev, periods, order, tol)?;
    if !rep.pass {
        let worst = rep.entries.iter().max_by(|a, b| {
            let key = |e: &ThomaeEntry| {
                let f = Complex64::new(e.epsilon[0], e.epsilon[1]);
                e.residual.max((f.norm() - 1.0).abs()).max((f.powu(8) - 1.0).norm())
            };
            key(a).total_cmp(&key(b))
        });
        return Err(Error::Verification(format!(
            "Thomae order {order} at genus {}: worst {}",
            rep.genus,
            worst
                .map(|e| format!("{} ({:?}, residual {:.3e})", e.characteristic, e.epsilon, e.residual))
                .unwrap_or_default()
        )));
    }
    Ok(rep)
}

#[derive(Clone, Debug, Serialize)]
pub struct HeatReport {
    pub characteristic: String,
    /// `max|∂²_vθ − 4iπ∂_τθ| / max|∂²_vθ|`, with the denominator floored at 1.
    pub residual: f64,
    /// `max|∂_τθ − FD| / max|∂_τθ|` against Richardson-extrapolated central
    /// differences along symmetric pairs.
    pub finite_difference_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Symmetric perturbation `τ + h(E_ij + E_ji)`, or `τ + hE_ii`.
fn perturbed(tau: &CMatrix, i: usize, j: usize, h: f64) -> CMatrix {
    let mut t = tau.clone();
    t[(i, j)] += h;
    if i != j {
        t[(j, i)] += h;
    }
    t
}

fn finite_difference_dtau(ev: &ThetaEvaluator, ch: &Characteristic, v: &[Complex64], h: f64) -> Result<CMatrix> {
    let g = ev.genus();
    let tau = ev.tau();
    let mut out = CMatrix::zeros(g, g);
    let central = |i: usize, j: usize, h: f64| -> Result<Complex64> {
        let p = ThetaEvaluator::with_radius(&perturbed(tau, i, j, h), ev.tolerance(), ev.radius())?.value(ch, v)?;
        let m = ThetaEvaluator::with_radius(&perturbed(tau, i, j, -h), ev.tolerance(), ev.radius())?.value(ch, v)?;
        Ok((p - m) / (2.0 * h))
    };
    for i in 0..g {
        for j in i..g {
            let d = (central(i, j, h / 2.0)? * 4.0 - central(i, j, h)?) / 3.0;
            // a symmetric pair moves two independent entries at once
            let d = if i == j { d } else { d / 2.0 };
            out[(i, j)] = d;
            out[(j, i)] = d;
        }
    }
    Ok(out)
}

/// Heat equation `∂²_vθ[ε] = 4iπ ∂_τθ[ε]` at `v`, plus a finite-difference
/// check of the series `∂_τ`.
pub fn heat_check(ev: &ThetaEvaluator, ch: &Characteristic, v: &[Complex64], tol: f64) -> Result<HeatReport> {
    let hess = ev.jet(ch, v)?.hessian;
    let dtau = ev.dtau(ch, v)?;
    let residual = max_abs(&(&hess - &dtau * (i_pi() * 4.0))) / max_abs(&hess).max(1.0);
    let fd = finite_difference_dtau(ev, ch, v, 1e-3)?;
    let fd_res = max_abs(&(&dtau - fd)) / max_abs(&dtau).max(1.0);
    Ok(HeatReport {
        characteristic: ch.to_string(),
        residual,
        finite_difference_residual: fd_res,
        tolerance: tol,
        pass: residual < tol && fd_res < tol,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct VanishingReport {
    pub genus: usize,
    pub threshold: f64,
    pub max_even: f64,
    /// Even characteristics with `|θ[ε](0)|` below the threshold.
    pub vanishing: Vec<String>,
    /// Even characteristics of multiplicity ≥ 2.
    pub singular: Vec<String>,
    /// Smallest `|θ|` among the non-singular even characteristics.
    pub min_nonsingular: f64,
    pub max_singular: f64,
    pub pass: bool,
}

/// Even theta constants below `relative · max|θ|`, compared with the
/// characteristics of multiplicity ≥ 2.
pub fn vanishing_census(ev: &ThetaEvaluator, relative: f64) -> Result<VanishingReport> {
    let g = ev.genus();
    let evens: Vec<Characteristic> = all_characteristics(g)?.filter(|c| c.is_even()).collect();
    let values = ev.constants(&evens)?;
    let max_even = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let threshold = relative * max_even;
    let mut vanishing = Vec::new();
    let mut singular = Vec::new();
    let mut min_nonsingular = f64::INFINITY;
    let mut max_singular: f64 = 0.0;
    for (c, z) in evens.iter().zip(&values) {
        if z.norm() < threshold {
            vanishing.push(c.to_string());
        }
        if partition_of_char(c)?.multiplicity() >= 2 {
            singular.push(c.to_string());
            max_singular = max_singular.max(z.norm());
        } else {
            min_nonsingular = min_nonsingular.min(z.norm());
        }
    }
    let pass = vanishing == singular;
    Ok(VanishingReport { genus: g, threshold, max_even, vanishing, singular, min_nonsingular, max_singular, pass })
}

/// Transformation law checked by [`transform_check`].
#[derive(Clone, Debug)]
pub enum TransformTarget {
    /// `∂²_vθ[γε](0;γτ) = f·det(cτ+d)^{1/2}(cτ+d)∂²_vθ[ε](0;τ)(cτ+d)ᵗ` for a
    /// multiplicity-2 characteristic.
    LemmaI2(Characteristic),
    /// `∏θ[γε_k](0;γτ) = f·det(cτ+d)^{d/2}∏θ[ε_k](0;τ)` for a monomial of
    /// `d` non-singular constants.
    Monomial(Vec<Characteristic>),
}

#[derive(Clone, Debug, Serialize)]
pub struct TransformReport {
    pub target: String,
    pub multiplier: [f64; 2],
    pub modulus_defect: f64,
    pub eighth_power_defect: f64,
    /// Relative residual of the fitted matrix identity (0 for scalars).
    pub residual: f64,
    /// `|θ[γε](0;γτ)|` relative to the largest entry of its Hessian, for
    /// the singular target.
    pub transformed_value: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

fn to_cmatrix(g: usize, m: &[i64]) -> CMatrix {
    CMatrix::from_row_iterator(g, g, m.iter().map(|&x| Complex64::new(x as f64, 0.0)))
}

/// `γ⟨τ⟩ = (aτ + b)(cτ + d)⁻¹` and `cτ + d`.
pub fn act_on_tau(gamma: &SymplecticElement, tau: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let g = gamma.genus();
    if tau.nrows() != g {
        return Err(Error::GenusMismatch { left: g, right: tau.nrows() });
    }
    let ctd = to_cmatrix(g, gamma.c()) * tau + to_cmatrix(g, gamma.d());
    let num = to_cmatrix(g, gamma.a()) * tau + to_cmatrix(g, gamma.b());
    let inv = ctd.clone().try_inverse().ok_or_else(|| Error::Numeric("cτ + d is singular".into()))?;
    let t = num * inv;
    let t = (&t + t.transpose()) * Complex64::new(0.5, 0.0);
    Ok((t, ctd))
}

/// Evaluates both sides of a transformation law and fits the multiplier.
pub fn transform_check(
    gamma: &SymplecticElement,
    ev: &ThetaEvaluator,
    target: &TransformTarget,
    tol: f64,
) -> Result<TransformReport> {
    let g = ev.genus();
    let (tau2, ctd) = act_on_tau(gamma, ev.tau())?;
    let ev2 = ThetaEvaluator::new(&tau2, ev.tolerance())?;
    let root = ctd.determinant().sqrt();
    let (name, f, residual, transformed) = match target {
        TransformTarget::LemmaI2(ch) => {
            if partition_of_char(ch)?.multiplicity() != 2 {
                return domain(format!("{ch} does not have multiplicity 2"));
            }
            let h = ev.jet0(ch)?.hessian;
            let j2 = ev2.jet0(&gamma_action(gamma, ch)?)?;
            let rhs = &ctd * h * ctd.transpose() * root;
            let (f, res) = fit(&j2.hessian, &rhs);
            let rel = j2.value.norm() / max_abs(&j2.hessian);
            ("lemma_I2".to_string(), f, res, Some(rel))
        }
        TransformTarget::Monomial(chars) => {
            if chars.is_empty() || chars.iter().any(|c| c.genus() != g) {
                return domain("monomial must be a non-empty list of genus-matching characteristics");
            }
            let moved: Vec<Characteristic> = chars.iter().map(|c| gamma_action(gamma, c)).collect::<Result<_>>()?;
            let before: Complex64 = ev.constants(chars)?.into_iter().product();
            let after: Complex64 = ev2.constants(&moved)?.into_iter().product();
            let rhs = root.powu(chars.len() as u32) * before;
            (format!("monomial d={}", chars.len()), after / rhs, 0.0, None)
        }
    };
    let modulus_defect = (f.norm() - 1.0).abs();
    let eighth = (f.powu(8) - 1.0).norm();
    let small = transformed.map(|r| r < tol).unwrap_or(true);
    Ok(TransformReport {
        target: name,
        multiplier: [f.re, f.im],
        modulus_defect,
        eighth_power_defect: eighth,
        residual,
        transformed_value: transformed,
        tolerance: tol,
        pass: modulus_defect < tol && eighth < tol && residual < tol && small,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ChiReport {
    pub form: String,
    pub genus: usize,
    /// Variants compared (1 for χ₁₈).
    pub variants: usize,
    /// `max|L − R| / max|R|` against the image, worst variant.
    pub residual: f64,
    /// `max|L_S − L_0| / max|L_0|` across variants.
    pub variant_spread: f64,
    /// Largest singular constant relative to the largest even one
    /// (vanishing check only).
    pub max_singular_ratio: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

/// `∂_τ` of a monomial with exactly one singular factor, through
/// `∂_τθ[s] = ∂²_vθ[s]/(4iπ)` times the remaining constants.
fn monomial_dtau(ev: &ThetaEvaluator, chars: &[Characteristic]) -> Result<CMatrix> {
    let jets: Vec<(Characteristic, Jet)> = chars.par_iter().map(|c| Ok((*c, ev.jet0(c)?))).collect::<Result<_>>()?;
    let mut singular = None;
    let mut prod = Complex64::new(1.0, 0.0);
    for (c, j) in &jets {
        if partition_of_char(c)?.multiplicity() == 2 {
            if singular.replace(j.hessian.clone()).is_some() {
                return domain("more than one singular factor");
            }
        } else {
            prod *= j.value;
        }
    }
    let h = singular.ok_or_else(|| Error::Domain("no singular factor".into()))?;
    Ok(h * (prod / (i_pi() * 4.0)))
}

fn rel_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    max_abs(&(a - b)) / max_abs(b)
}

fn require_genus(periods: &PeriodData, ev: &ThetaEvaluator, g: usize) -> Result<()> {
    if periods.genus() != g {
        return Err(Error::GenusMismatch { left: g, right: periods.genus() });
    }
    if ev.genus() != g {
        return Err(Error::GenusMismatch { left: g, right: ev.genus() });
    }
    Ok(())
}

/// `∂_τχ₁₈` from the series against the image of the product of all 36
/// even constants.
pub fn chi18_check(ev: &ThetaEvaluator, periods: &PeriodData, tol: f64) -> Result<ChiReport> {
    require_genus(periods, ev, 3)?;
    let evens: Vec<Characteristic> = all_characteristics(3)?.filter(|c| c.is_even()).collect();
    let lhs = monomial_dtau(ev, &evens)?;
    let rhs = image_value(&rho_monomial(&evens)?, periods)?;
    let residual = rel_diff(&lhs, &rhs);
    Ok(ChiReport {
        form: "chi18".into(),
        genus: 3,
        variants: 1,
        residual,
        variant_spread: 0.0,
        max_singular_ratio: None,
        tolerance: tol,
        pass: residual < tol,
    })
}

/// `∂_τ` of the monomials of the given singular 8-element systems, each
/// against its image, and against each other with tolerance `mutual_tol`.
pub fn chi4_check(
    ev: &ThetaEvaluator,
    periods: &PeriodData,
    systems: &[Vec<Characteristic>],
    tol: f64,
    mutual_tol: f64,
) -> Result<ChiReport> {
    require_genus(periods, ev, 3)?;
    if systems.is_empty() {
        return domain("no systems given");
    }
    let mut residual: f64 = 0.0;
    let mut values = Vec::with_capacity(systems.len());
    for s in systems {
        let lhs = monomial_dtau(ev, s)?;
        let rhs = image_value(&rho_monomial(s)?, periods)?;
        residual = residual.max(rel_diff(&lhs, &rhs));
        values.push(lhs);
    }
    let spread = values.iter().map(|v| rel_diff(v, &values[0])).fold(0.0, f64::max);
    Ok(ChiReport {
        form: "chi4".into(),
        genus: 3,
        variants: systems.len(),
        residual,
        variant_spread: spread,
        max_singular_ratio: None,
        tolerance: tol,
        pass: residual < tol && spread < mutual_tol,
    })
}

/// Vanishing of the ten singular constants at genus 4 together with the
/// Hessian formula for each of them.
pub fn chi68_partial_check(ev: &ThetaEvaluator, periods: &PeriodData, tol: f64) -> Result<ChiReport> {
    require_genus(periods, ev, 4)?;
    let census = vanishing_census(ev, tol)?;
    let hess = thomae_report(ev, periods, 3, tol)?;
    let ratio = census.max_singular / census.max_even;
    Ok(ChiReport {
        form: "chi68_partial".into(),
        genus: 4,
        variants: census.singular.len(),
        residual: hess.max_residual,
        variant_spread: 0.0,
        max_singular_ratio: Some(ratio),
        tolerance: tol,
        pass: census.pass && census.singular.len() == 10 && ratio < tol && hess.pass,
    })
}

/// Relative change of all even theta constants when the radius grows by 2.
pub fn truncation_change(ev: &ThetaEvaluator) -> Result<f64> {
    let g = ev.genus();
    let evens: Vec<Characteristic> = all_characteristics(g)?.filter(|c| c.is_even()).collect();
    let wider = ThetaEvaluator::with_radius(ev.tau(), ev.tolerance(), ev.radius() + 2)?;
    let a = ev.constants(&evens)?;
    let b = wider.constants(&evens)?;
    Ok(a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
}

/// Random symmetric `τ` with `Im τ = AᵗA + δ·1`, entries of `A` and
/// `Re τ` uniform in `[−1/2, 1/2]`.
pub fn random_tau<R: rand::Rng + ?Sized>(g: usize, delta: f64, rng: &mut R) -> CMatrix {
    let a = DMatrix::<f64>::from_fn(g, g, |_, _| rng.random_range(-0.5..0.5));
    let im = a.transpose() * &a + DMatrix::<f64>::identity(g, g) * delta;
    let re = DMatrix::<f64>::from_fn(g, g, |_, _| rng.random_range(-0.5..0.5));
    let re = (&re + re.transpose()) * 0.5;
    CMatrix::from_fn(g, g, |i, j| Complex64::new(re[(i, j)], im[(i, j)]))
}

pub fn zero_vector(g: usize) -> Vec<Complex64> {
    zero_v(g)
}
