//! Period matrices of real hyperelliptic curves `y² = ∏(x − e_j)`.
//!
//! Holomorphic differentials are `du_n = c·x^{g−n} dx / y`, `n = 1..g`, with
//! `c = DIFFERENTIAL_SCALE`. The cycle `a_k` encircles the cut
//! `(e_{2k−1}, e_{2k})`; `b_k` runs through the gaps `(e_{2j}, e_{2j+1})`,
//! `j = k..g`. Rows of `ω`, `ω′` are cycles and columns are differentials, so
//! `τ = ω′ω⁻¹` and `∂_v = ω ∂_u`. With these signs `det ω > 0`.
//!
//! Each segment integral is evaluated by Gauss–Chebyshev quadrature, which
//! absorbs the inverse square-root endpoint behaviour of `1/y`. On the real
//! axis, approached from the upper half-plane, `y = i^{#roots above x}·√|f|`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Error, Result};

/// Constant `c` in `du_n = c·x^{g−n}dx/y`, fixed by the genus-1
/// calibration of the first Thomae formula (`|ε| = 1` only for `c = 1/2`).
pub const DIFFERENTIAL_SCALE: f64 = 0.5;

const MIN_NODES: usize = 32;
const MAX_NODES: usize = 1 << 14;

pub type CMatrix = DMatrix<Complex64>;

#[derive(Clone, Debug, PartialEq)]
pub struct HyperellipticCurve {
    genus: usize,
    roots: Vec<f64>,
}

impl HyperellipticCurve {
    /// Branch points must be finite, strictly increasing and `2g+2 ≥ 4` in number.
    pub fn new(roots: Vec<f64>) -> Result<Self> {
        let n = roots.len();
        if n < 4 || n % 2 == 1 {
            return domain(format!("need an even number ≥ 4 of branch points, got {n}"));
        }
        if roots.iter().any(|r| !r.is_finite()) {
            return domain("branch points must be finite");
        }
        if roots.windows(2).any(|w| w[0] >= w[1]) {
            return domain("branch points must be strictly increasing");
        }
        Ok(Self { genus: n / 2 - 1, roots })
    }

    /// `e_j = j`, `j = 0..2g+1`.
    pub fn reference(g: usize) -> Result<Self> {
        Self::new((0..2 * g + 2).map(|j| j as f64).collect())
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn roots(&self) -> &[f64] {
        &self.roots
    }

    /// `∫_{e_lo}^{e_hi} x^{g−n} dx / y(x + i0)` for `n = 1..g`, with `N` nodes.
    fn segment(&self, lo: usize, hi: usize, nodes: usize) -> Vec<Complex64> {
        let g = self.genus;
        let (a, b) = (self.roots[lo], self.roots[hi]);
        let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
        let mut sums = vec![0.0; g];
        for i in 1..=nodes {
            let t = ((2 * i - 1) as f64 * std::f64::consts::PI / (2 * nodes) as f64).cos();
            let x = mid + half * t;
            let prod: f64 = self
                .roots
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != lo && j != hi)
                .map(|(_, &r)| (x - r).abs())
                .product();
            let w = 1.0 / prod.sqrt();
            let mut xp = 1.0;
            for n in (1..=g).rev() {
                sums[n - 1] += xp * w;
                xp *= x;
            }
        }
        let above = self.roots.len() - hi;
        let phase = Complex64::i().powu(above as u32);
        let scale = std::f64::consts::PI / nodes as f64;
        sums.into_iter().map(|s| Complex64::new(s * scale, 0.0) / phase).collect()
    }

    fn assemble(&self, nodes: usize) -> (CMatrix, CMatrix) {
        let g = self.genus;
        let sigma = if g.is_multiple_of(2) { 1.0 } else { -1.0 };
        let k = 2.0 * sigma * DIFFERENTIAL_SCALE;
        let gaps: Vec<Vec<Complex64>> = (0..=g).map(|j| self.segment(2 * j, 2 * j + 1, nodes)).collect();
        let mut omega = CMatrix::zeros(g, g);
        let mut omega_p = CMatrix::zeros(g, g);
        for row in 0..g {
            let cut = self.segment(2 * row + 1, 2 * row + 2, nodes);
            for n in 0..g {
                omega[(row, n)] = cut[n] * k;
                let s: Complex64 = gaps[row + 1..].iter().map(|gp| gp[n]).sum();
                omega_p[(row, n)] = s * k;
            }
        }
        (omega, omega_p)
    }
}

/// Validity certificates of a period computation.
#[derive(Clone, Debug, Serialize)]
pub struct Certificates {
    /// `‖ωᵗω′ − ω′ᵗω‖_max / (‖ω‖_max ‖ω′‖_max)`.
    pub legendre_residual: f64,
    /// `‖τ − τᵗ‖_max / ‖τ‖_max`.
    pub symmetry_residual: f64,
    pub im_tau_min_eigenvalue: f64,
    pub det_omega_re: f64,
    pub det_omega_im: f64,
    pub condition_number: f64,
    /// Quadrature nodes per segment after doubling converged.
    pub nodes: usize,
    /// Largest entry change in `ω`, `ω′` at the last doubling.
    pub quadrature_error: f64,
}

#[derive(Clone, Debug)]
pub struct PeriodData {
    curve: HyperellipticCurve,
    omega: CMatrix,
    omega_prime: CMatrix,
    tau: CMatrix,
    certificates: Certificates,
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Smallest eigenvalue of the symmetric part of `Im τ`.
pub fn im_min_eigenvalue(tau: &CMatrix) -> f64 {
    let im = tau.map(|z| z.im);
    let sym = (&im + im.transpose()) * 0.5;
    SymmetricEigen::new(sym).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Periods with quadrature nodes doubled until the entries of `ω`, `ω′`
/// change by less than `tol` relative to their size.
pub fn periods(curve: &HyperellipticCurve, tol: f64) -> Result<PeriodData> {
    if !(tol > 0.0) {
        return domain("tolerance must be positive");
    }
    let mut nodes = MIN_NODES;
    let (mut w, mut wp) = curve.assemble(nodes);
    let err = loop {
        let next = nodes * 2;
        let (w2, wp2) = curve.assemble(next);
        let scale = max_abs(&w2).max(max_abs(&wp2));
        let change = max_abs(&(&w2 - &w)).max(max_abs(&(&wp2 - &wp)));
        w = w2;
        wp = wp2;
        nodes = next;
        if change <= tol * scale {
            break change;
        }
        if nodes >= MAX_NODES {
            return Err(Error::Numeric(format!(
                "quadrature did not converge: change {change:.3e} at {nodes} nodes, scale {scale:.3e}"
            )));
        }
    };
    let inv = w.clone().try_inverse().ok_or_else(|| Error::Numeric("ω is singular".into()))?;
    let tau = &wp * &inv;
    let lambda = im_min_eigenvalue(&tau);
    let det = w.determinant();
    let sv = w.clone().svd(false, false).singular_values;
    let cond = sv.max() / sv.min();
    let legendre = w.transpose() * &wp - wp.transpose() * &w;
    let certificates = Certificates {
        legendre_residual: max_abs(&legendre) / (max_abs(&w) * max_abs(&wp)),
        symmetry_residual: max_abs(&(&tau - tau.transpose())) / max_abs(&tau),
        im_tau_min_eigenvalue: lambda,
        det_omega_re: det.re,
        det_omega_im: det.im,
        condition_number: cond,
        nodes,
        quadrature_error: err,
    };
    if !(lambda > 0.0) {
        return Err(Error::Orientation(format!("Im τ has eigenvalue {lambda:.3e} ≤ 0")));
    }
    Ok(PeriodData { curve: curve.clone(), omega: w, omega_prime: wp, tau, certificates })
}

impl PeriodData {
    pub fn curve(&self) -> &HyperellipticCurve {
        &self.curve
    }

    pub fn genus(&self) -> usize {
        self.curve.genus
    }

    pub fn omega(&self) -> &CMatrix {
        &self.omega
    }

    pub fn omega_prime(&self) -> &CMatrix {
        &self.omega_prime
    }

    pub fn tau(&self) -> &CMatrix {
        &self.tau
    }

    pub fn det_omega(&self) -> Complex64 {
        Complex64::new(self.certificates.det_omega_re, self.certificates.det_omega_im)
    }

    pub fn certificates(&self) -> &Certificates {
        &self.certificates
    }
}

fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        if (a - b).abs() <= 1e-16 * a.abs() {
            break;
        }
        (a, b) = ((a + b) / 2.0, (a * b).sqrt());
    }
    (a + b) / 2.0
}

/// Genus-1 period ratio from the cross-ratio modulus
/// `k² = (e₂−e₁)(e₃−e₀)/((e₃−e₁)(e₂−e₀))` and `τ = iK′(k)/K(k)`, with the
/// complete elliptic integrals computed by the arithmetic-geometric mean.
pub fn elliptic_tau_agm(e: [f64; 4]) -> Result<Complex64> {
    if e.windows(2).any(|w| w[0] >= w[1]) {
        return domain("branch points must be strictly increasing");
    }
    let k2 = (e[2] - e[1]) * (e[3] - e[0]) / ((e[3] - e[1]) * (e[2] - e[0]));
    let k = k2.sqrt();
    let kp = (1.0 - k2).sqrt();
    // K(k) = π / (2 AGM(1, k′)), K′(k) = π / (2 AGM(1, k))
    Ok(Complex64::new(0.0, agm(1.0, kp) / agm(1.0, k)))
}

#[derive(Clone, Debug, Serialize)]
pub struct RescaleReport {
    pub lambda: f64,
    pub shift: f64,
    pub max_difference: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Compares `τ(e)` with `τ(λe + c)`; `λ > 0` so that label order and hence
/// the homology basis are preserved.
pub fn affine_rescale_check(curve: &HyperellipticCurve, lambda: f64, shift: f64, tol: f64) -> Result<RescaleReport> {
    if !(lambda > 0.0) {
        return domain("λ must be positive; λ < 0 reverses the branch-point order");
    }
    let base = periods(curve, tol)?;
    let moved = HyperellipticCurve::new(curve.roots().iter().map(|e| lambda * e + shift).collect())?;
    let other = periods(&moved, tol)?;
    let diff = max_abs(&(base.tau() - other.tau())) / max_abs(base.tau());
    let tolerance = 1e3 * tol;
    if diff > tolerance {
        return Err(Error::Verification(format!("τ changed by {diff:.3e} under e ↦ {lambda}e + {shift}")));
    }
    Ok(RescaleReport { lambda, shift, max_difference: diff, tolerance, pass: true })
}
