//! Exact side of the ρ-map: images of theta constants, their lowest
//! non-vanishing derivatives and monomials of them, as quarter powers of
//! normally ordered root differences `[il] = e_i − e_l`, `i > l`.
//!
//! Identities between such images are checked on fourth powers, where every
//! exponent is an integer and the eighth-root-of-unity ambiguity drops to a
//! sign. Arithmetic is over big rationals throughout.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::charkit::{all_characteristics, partition_of_char, Characteristic, IndexSet, PartitionChar};
use crate::error::{domain, Error, Result};
use crate::goepel::{perfect_matchings_8, StructureReport, Witness};
use crate::poly::Poly;

/// Branch points `e_0, …, e_{2g+1}` as exact rationals, in label order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootSystem {
    genus: usize,
    roots: Vec<BigRational>,
}

pub fn rational(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl RootSystem {
    pub fn new(roots: Vec<BigRational>) -> Result<Self> {
        let n = roots.len();
        if n < 4 || n % 2 == 1 {
            return domain(format!("need an even number ≥ 4 of roots, got {n}"));
        }
        for i in 0..n {
            for l in 0..i {
                if roots[i] == roots[l] {
                    return domain(format!("roots e_{l} and e_{i} coincide"));
                }
            }
        }
        Ok(Self { genus: n / 2 - 1, roots })
    }

    pub fn from_integers(values: &[i64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| rational(v)).collect())
    }

    /// `2g+2` distinct integers drawn uniformly from `[−50, 50]`.
    pub fn random<R: Rng + ?Sized>(g: usize, rng: &mut R) -> Result<Self> {
        let n = 2 * g + 2;
        if n > 101 {
            return domain("too many roots for the sampling range");
        }
        let values: Vec<i64> = sample(rng, 101, n).into_iter().map(|k| k as i64 - 50).collect();
        Self::from_integers(&values)
    }

    /// `trials` independent root systems from one seed.
    pub fn random_batch(g: usize, trials: usize, seed: u64) -> Result<Vec<Self>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..trials).map(|_| Self::random(g, &mut rng)).collect()
    }

    /// `trials` tuples of distinct rationals `p/q` with `|p| ≤ 400` and
    /// `1 ≤ q ≤ 29`, from one seed.
    pub fn random_rational_batch(g: usize, trials: usize, seed: u64) -> Result<Vec<Self>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(trials);
        while out.len() < trials {
            let roots: Vec<BigRational> = (0..2 * g + 2)
                .map(|_| {
                    BigRational::new(
                        BigInt::from(rng.random_range(-400i64..=400)),
                        BigInt::from(rng.random_range(1i64..=29)),
                    )
                })
                .collect();
            if let Ok(r) = Self::new(roots) {
                out.push(r);
            }
        }
        Ok(out)
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn roots(&self) -> &[BigRational] {
        &self.roots
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// `[il] = e_i − e_l`.
    pub fn diff(&self, i: usize, l: usize) -> BigRational {
        &self.roots[i] - &self.roots[l]
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.roots.iter().map(|r| r.to_f64().unwrap_or(f64::NAN)).collect()
    }

    pub fn map(&self, f: impl Fn(&BigRational) -> BigRational) -> Result<Self> {
        Self::new(self.roots.iter().map(f).collect())
    }

    pub fn permuted(&self, a: usize, b: usize) -> Self {
        let mut roots = self.roots.clone();
        roots.swap(a, b);
        Self { genus: self.genus, roots }
    }

    pub fn labels(&self) -> Vec<String> {
        self.roots.iter().map(|r| r.to_string()).collect()
    }
}

fn all_labels(n: usize) -> IndexSet {
    IndexSet((1u64 << n) - 1)
}

/// `Δ(I) = ∏_{i>l, i,l∈I} (e_i − e_l)`.
pub fn vandermonde(set: IndexSet, roots: &RootSystem) -> BigRational {
    let idx = set.to_vec();
    let mut acc = BigRational::one();
    for (a, &i) in idx.iter().enumerate() {
        for &l in &idx[..a] {
            acc *= roots.diff(i, l);
        }
    }
    acc
}

pub fn vandermonde_f64(set: IndexSet, roots: &[f64]) -> f64 {
    let idx = set.to_vec();
    let mut acc = 1.0;
    for (a, &i) in idx.iter().enumerate() {
        for &l in &idx[..a] {
            acc *= roots[i] - roots[l];
        }
    }
    acc
}

/// Elementary symmetric polynomial `s_k` of `{e_i | i ∈ I}`; zero for
/// `k < 0` or `k > |I|`.
pub fn elem_sym(k: i64, set: IndexSet, roots: &RootSystem) -> BigRational {
    if k < 0 || k as usize > set.len() {
        return BigRational::zero();
    }
    let mut coeffs = vec![BigRational::one()];
    for i in set.iter() {
        let mut next = vec![BigRational::zero(); coeffs.len() + 1];
        for (d, c) in coeffs.iter().enumerate() {
            next[d] += c;
            next[d + 1] += c * &roots.roots[i];
        }
        coeffs = next;
    }
    coeffs.swap_remove(k as usize)
}

pub fn elem_sym_f64(k: i64, set: IndexSet, roots: &[f64]) -> f64 {
    if k < 0 || k as usize > set.len() {
        return 0.0;
    }
    let mut coeffs = vec![1.0];
    for i in set.iter() {
        let mut next = vec![0.0; coeffs.len() + 1];
        for (d, c) in coeffs.iter().enumerate() {
            next[d] += c;
            next[d + 1] += c * roots[i];
        }
        coeffs = next;
    }
    coeffs[k as usize]
}

/// `s_k` as a polynomial in the variables `e_i`, `i ∈ I`.
pub fn elem_sym_poly(k: i64, set: IndexSet) -> Poly {
    if k < 0 || k as usize > set.len() {
        return Poly::zero();
    }
    let mut coeffs = vec![Poly::from_int(1)];
    for i in set.iter() {
        let x = Poly::var(i);
        let mut next = vec![Poly::zero(); coeffs.len() + 1];
        for (d, c) in coeffs.iter().enumerate() {
            next[d] = &next[d] + c;
            next[d + 1] = &next[d + 1] + &(c * &x);
        }
        coeffs = next;
    }
    coeffs.swap_remove(k as usize)
}

/// Symmetric g×g polynomial matrix
/// `Ŝ_{ij} = (−1)^{i+j}(2s_{i−2}s_{j−2} − s_{i−1}s_{j−3} − s_{i−3}s_{j−1})`
/// over `I₂`, 1-based `i, j`.
#[derive(Clone, Debug, PartialEq)]
pub struct SMatrix {
    genus: usize,
    indices: IndexSet,
    entries: Vec<Poly>,
}

pub fn s_matrix(i2: IndexSet, g: usize) -> Result<SMatrix> {
    if g < 3 || i2.len() != g - 3 {
        return domain(format!("Ŝ needs |I₂| = g − 3; got |I₂| = {} at genus {g}", i2.len()));
    }
    if i2.0 >> (2 * g + 2) != 0 {
        return domain("label outside the branch points");
    }
    let s: Vec<Poly> = (-3..=g as i64).map(|k| elem_sym_poly(k, i2)).collect();
    let at = |k: i64| &s[(k + 3) as usize];
    let mut entries = Vec::with_capacity(g * g);
    for i in 1..=g as i64 {
        for j in 1..=g as i64 {
            let two = Poly::from_int(2);
            let a = &(&two * at(i - 2)) * at(j - 2);
            let b = at(i - 1) * at(j - 3);
            let c = at(i - 3) * at(j - 1);
            let e = &(&a - &b) - &c;
            entries.push(if (i + j) % 2 == 0 { e } else { -&e });
        }
    }
    Ok(SMatrix { genus: g, indices: i2, entries })
}

impl SMatrix {
    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn indices(&self) -> IndexSet {
        self.indices
    }

    /// 0-based entry.
    pub fn entry(&self, i: usize, j: usize) -> &Poly {
        &self.entries[i * self.genus + j]
    }

    pub fn is_symmetric(&self) -> bool {
        let g = self.genus;
        (0..g).all(|i| (0..i).all(|j| self.entry(i, j) == self.entry(j, i)))
    }

    pub fn eval(&self, roots: &RootSystem) -> Vec<BigRational> {
        self.entries.iter().map(|p| p.eval(roots.roots())).collect()
    }

    pub fn eval_f64(&self, roots: &[f64]) -> Vec<f64> {
        self.entries.iter().map(|p| p.eval_f64(roots)).collect()
    }
}

/// Vector `((−1)^j s_j(I₁))_{j=0..g−1}` of the first-derivative formula in
/// the u-frame.
pub fn u_vector_f64(i1: IndexSet, g: usize, roots: &[f64]) -> Vec<f64> {
    (0..g as i64).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 } * elem_sym_f64(j, i1, roots)).collect()
}

/// Derivative factor carried by an image: the u-frame gradient vector of a
/// multiplicity-1 characteristic or the `ωŜωᵗ` Hessian of a multiplicity-2
/// characteristic, indexed by the partition side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", content = "indices", rename_all = "snake_case")]
pub enum Frame {
    Gradient(IndexSet),
    Hessian(IndexSet),
}

/// Formal image
/// `sign · ε^{k} · (−1/(4iπ))^{p} · (det ω/π^g)^{h/2} · ∏ [il]^{q_il/4} · frames`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RhoImage {
    genus: usize,
    /// Quarter exponents `q_il` keyed by `(i, l)`, `i > l`; zeros omitted.
    exponents: BTreeMap<(usize, usize), i64>,
    omega_half_power: i64,
    inv_4ipi_power: i64,
    sign: i8,
    epsilon_power: u32,
    frames: Vec<Frame>,
}

impl RhoImage {
    pub fn one(g: usize) -> Self {
        Self {
            genus: g,
            exponents: BTreeMap::new(),
            omega_half_power: 0,
            inv_4ipi_power: 0,
            sign: 1,
            epsilon_power: 0,
            frames: Vec::new(),
        }
    }

    /// `(Δ(I)Δ(J))^{1/4}` with `ε (det ω/π^g)^{1/2}`.
    fn thomae_base(p: &PartitionChar) -> Self {
        let g = p.genus();
        let mut img = Self::one(g);
        for side in [p.indices(), p.complement()] {
            let idx = side.to_vec();
            for (a, &i) in idx.iter().enumerate() {
                for &l in &idx[..a] {
                    img.exponents.insert((i, l), 1);
                }
            }
        }
        img.omega_half_power = 1;
        img.epsilon_power = 1;
        img
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn exponents(&self) -> &BTreeMap<(usize, usize), i64> {
        &self.exponents
    }

    /// Quarter exponent of `[il]`; the pair may be given in either order.
    pub fn exponent(&self, i: usize, l: usize) -> i64 {
        let key = if i > l { (i, l) } else { (l, i) };
        self.exponents.get(&key).copied().unwrap_or(0)
    }

    pub fn omega_half_power(&self) -> i64 {
        self.omega_half_power
    }

    pub fn inv_4ipi_power(&self) -> i64 {
        self.inv_4ipi_power
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn epsilon_power(&self) -> u32 {
        self.epsilon_power
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    /// Degree of the fourth power in the roots.
    pub fn fourth_power_degree(&self) -> i64 {
        self.exponents.values().sum()
    }

    /// True when the scalar part is a (Laurent) monomial in root
    /// differences, i.e. all exponents are multiples of 4.
    pub fn is_integral(&self) -> bool {
        self.exponents.values().all(|q| q % 4 == 0)
    }

    fn combine(&self, other: &Self, s: i64) -> Result<Self> {
        if self.genus != other.genus {
            return Err(Error::GenusMismatch { left: self.genus, right: other.genus });
        }
        let mut out = self.clone();
        for (&k, &q) in &other.exponents {
            let e = out.exponents.entry(k).or_insert(0);
            *e += s * q;
            if *e == 0 {
                out.exponents.remove(&k);
            }
        }
        out.omega_half_power += s * other.omega_half_power;
        out.inv_4ipi_power += s * other.inv_4ipi_power;
        out.sign *= other.sign;
        Ok(out)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let mut out = self.combine(other, 1)?;
        out.epsilon_power += other.epsilon_power;
        out.frames.extend(other.frames.iter().copied());
        Ok(out)
    }

    /// Quotient; the divisor must be a pure scalar (no frames). The ε marker
    /// counts factors and is added, since ε is only fixed up to ε⁸ = 1.
    pub fn div(&self, other: &Self) -> Result<Self> {
        if !other.frames.is_empty() {
            return domain("cannot divide by an image with a derivative part");
        }
        let mut out = self.combine(other, -1)?;
        out.epsilon_power += other.epsilon_power;
        Ok(out)
    }

    /// Exact fourth power of the root-difference part, `∏ [il]^{q_il}`.
    pub fn fourth_power_scalar(&self, roots: &RootSystem) -> Result<BigRational> {
        if roots.genus() != self.genus {
            return Err(Error::GenusMismatch { left: self.genus, right: roots.genus() });
        }
        let mut acc = BigRational::one();
        for (&(i, l), &q) in &self.exponents {
            let d = roots.diff(i, l);
            let p = num_traits::pow(d, q.unsigned_abs() as usize);
            if q > 0 {
                acc *= p;
            } else {
                acc /= p;
            }
        }
        Ok(acc)
    }

    /// Numeric scalar factor with ε = 1: the root-difference quarter powers,
    /// `(det ω/π^g)^{h/2}`, `(−1/(4iπ))^p` and the sign. Principal branches.
    pub fn scalar_f64(&self, roots: &[f64], det_omega: Complex64) -> Complex64 {
        let mut acc = Complex64::new(self.sign as f64, 0.0);
        for (&(i, l), &q) in &self.exponents {
            acc *= Complex64::new(roots[i] - roots[l], 0.0).powf(q as f64 / 4.0);
        }
        let pig = std::f64::consts::PI.powi(self.genus as i32);
        acc *= (det_omega / pig).sqrt().powi(self.omega_half_power as i32);
        let inv = -1.0 / Complex64::new(0.0, 4.0 * std::f64::consts::PI);
        acc * inv.powi(self.inv_4ipi_power as i32)
    }

    /// Equality of everything except the frame list and the ε marker.
    pub fn same_scalar(&self, other: &Self) -> bool {
        self.exponents == other.exponents
            && self.omega_half_power == other.omega_half_power
            && self.inv_4ipi_power == other.inv_4ipi_power
            && self.sign == other.sign
    }
}

impl fmt::Display for RhoImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sign < 0 {
            f.write_str("-")?;
        }
        if self.epsilon_power > 0 {
            write!(f, "ε^{} ", self.epsilon_power)?;
        }
        if self.inv_4ipi_power != 0 {
            write!(f, "(-1/4iπ)^{} ", self.inv_4ipi_power)?;
        }
        write!(f, "(detω/π^{})^({}/2)", self.genus, self.omega_half_power)?;
        for (&(i, l), &q) in &self.exponents {
            write!(f, " [{i}{l}]^({q}/4)")?;
        }
        for fr in &self.frames {
            match fr {
                Frame::Gradient(s) => write!(f, " ·ω(-1)^j s_j{s}")?,
                Frame::Hessian(s) => write!(f, " ·ωŜ{s}ωᵗ")?,
            }
        }
        Ok(())
    }
}

fn require_multiplicity(p: &PartitionChar, m: usize) -> Result<()> {
    if p.multiplicity() != m {
        return domain(format!("{p} has multiplicity {}, expected {m}", p.multiplicity()));
    }
    Ok(())
}

/// Image of the theta constant `θ[I₀]`.
pub fn rho_theta(p: &PartitionChar) -> Result<RhoImage> {
    require_multiplicity(p, 0)?;
    Ok(RhoImage::thomae_base(p))
}

/// Image of the gradient `∂_v θ[I₁](0)`: base factor times `ω` applied to
/// the u-frame vector of [`u_vector_f64`].
pub fn rho_dtheta(p: &PartitionChar) -> Result<RhoImage> {
    require_multiplicity(p, 1)?;
    let mut img = RhoImage::thomae_base(p);
    img.frames.push(Frame::Gradient(p.indices()));
    Ok(img)
}

/// Image of the Hessian `∂²_v θ[I₂](0)`: base factor times `ω Ŝ(I₂) ωᵗ`.
pub fn rho_d2theta(p: &PartitionChar) -> Result<RhoImage> {
    require_multiplicity(p, 2)?;
    let mut img = RhoImage::thomae_base(p);
    img.frames.push(Frame::Hessian(p.indices()));
    Ok(img)
}

/// Image of the lowest non-vanishing τ-derivative of `∏ θ[c]`. Each
/// singular factor enters through `∂_τθ = ∂²_vθ/(4iπ)` and contributes
/// `−1/(4iπ)` with its ε absorbing the sign.
pub fn rho_monomial(chars: &[Characteristic]) -> Result<RhoImage> {
    let g = chars.first().ok_or_else(|| Error::Domain("empty monomial".into()))?.genus();
    let mut acc = RhoImage::one(g);
    for c in chars {
        if !c.is_even() {
            return domain(format!("odd characteristic {c} in a theta-constant monomial"));
        }
        let p = partition_of_char(c)?;
        let img = match p.multiplicity() {
            0 => rho_theta(&p)?,
            2 => {
                let mut h = rho_d2theta(&p)?;
                h.inv_4ipi_power += 1;
                h
            }
            m => return domain(format!("multiplicity {m} factors are not supported")),
        };
        acc = acc.mul(&img)?;
    }
    Ok(acc)
}

/// Identities checked by [`verify_identity`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityName {
    Chi4,
    Chi18,
    Phi2Equal,
    H0,
    Mu8,
    Chi68,
    I1Translation,
}

impl IdentityName {
    pub const ALL: [IdentityName; 7] = [
        IdentityName::Chi4,
        IdentityName::Chi18,
        IdentityName::Phi2Equal,
        IdentityName::H0,
        IdentityName::Mu8,
        IdentityName::Chi68,
        IdentityName::I1Translation,
    ];

    pub fn genus(&self) -> usize {
        match self {
            IdentityName::Mu8 | IdentityName::Chi68 => 4,
            _ => 3,
        }
    }

    pub fn for_genus(g: usize) -> Vec<IdentityName> {
        Self::ALL.iter().copied().filter(|n| n.genus() == g).collect()
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            IdentityName::Chi4 => "chi4",
            IdentityName::Chi18 => "chi18",
            IdentityName::Phi2Equal => "phi2_equal",
            IdentityName::H0 => "h0",
            IdentityName::Mu8 => "mu8",
            IdentityName::Chi68 => "chi68",
            IdentityName::I1Translation => "I1_translation",
        }
    }
}

impl std::str::FromStr for IdentityName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|n| n.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown identity {s:?}")))
    }
}

/// Outcome of an identity over all its instances and root tuples.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityRecord {
    pub identity: String,
    pub instances: usize,
    pub trials: usize,
    /// Root tuples used, one per trial.
    pub roots: Vec<Vec<String>>,
    /// Sign of LHS/RHS on fourth powers; `None` if it varied or was not ±1.
    pub sign: Option<i8>,
    /// Degree of both sides in the roots.
    pub degree: i64,
    /// Exponent maps of the symbolic images agree.
    pub exponents_match: bool,
    pub pass: bool,
    /// First failing instance, if any.
    pub witness: Option<String>,
}

/// Göpel structures the identities are stated over.
#[derive(Clone, Debug, Default)]
pub struct IdentityInputs {
    pub rank3: Option<StructureReport>,
    pub rank2: Option<StructureReport>,
    pub rank4: Option<StructureReport>,
}

fn side_product(c: &Characteristic, roots: &RootSystem) -> Result<BigRational> {
    let p = partition_of_char(c)?;
    Ok(vandermonde(p.indices(), roots) * vandermonde(p.complement(), roots))
}

fn product_of(chars: &[Characteristic], roots: &RootSystem) -> Result<BigRational> {
    let mut acc = BigRational::one();
    for c in chars {
        acc *= side_product(c, roots)?;
    }
    Ok(acc)
}

fn uniform_exponents(n: usize, q: i64) -> BTreeMap<(usize, usize), i64> {
    let mut m = BTreeMap::new();
    for i in 0..n {
        for l in 0..i {
            m.insert((i, l), q);
        }
    }
    m
}

/// `[ab]` normally ordered.
pub fn bracket(a: usize, b: usize, roots: &RootSystem) -> BigRational {
    if a > b {
        roots.diff(a, b)
    } else {
        roots.diff(b, a)
    }
}

fn even_characteristics(g: usize) -> Result<Vec<Characteristic>> {
    Ok(all_characteristics(g)?.filter(|c| c.is_even()).collect())
}

/// One instance: the symbolic image, the expected exponent map, and the
/// two sides evaluated independently from Vandermonde products.
struct Instance {
    label: String,
    image_exponents: BTreeMap<(usize, usize), i64>,
    expected_exponents: BTreeMap<(usize, usize), i64>,
    lhs: Box<dyn Fn(&RootSystem) -> Result<BigRational> + Send + Sync>,
    rhs: Box<dyn Fn(&RootSystem) -> Result<BigRational> + Send + Sync>,
}

fn rank2_witnesses(
    inputs: &IdentityInputs,
) -> Result<Vec<([(usize, usize); 4], Vec<Characteristic>, Vec<Characteristic>, Vec<Characteristic>)>> {
    let rep = inputs.rank2.as_ref().ok_or_else(|| Error::Domain("rank-2 structure missing".into()))?;
    Ok(rep
        .witnesses
        .iter()
        .filter_map(|w| match w {
            Witness::Rank2 { pairs, a1, a2, a3 } => Some((*pairs, a1.clone(), a2.clone(), a3.clone())),
            _ => None,
        })
        .collect())
}

fn instances(name: IdentityName, inputs: &IdentityInputs) -> Result<Vec<Instance>> {
    let g = name.genus();
    let n = 2 * g + 2;
    let all = all_labels(n);
    let mut out = Vec::new();
    match name {
        IdentityName::Chi4 => {
            let rep = inputs.rank3.as_ref().ok_or_else(|| Error::Domain("rank-3 structure missing".into()))?;
            for w in &rep.witnesses {
                let Witness::Rank3 { system, .. } = w else { continue };
                let img = rho_monomial(system)?;
                let sys = system.clone();
                out.push(Instance {
                    label: format!("chi4 {}", system.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")),
                    image_exponents: img.exponents.clone(),
                    expected_exponents: uniform_exponents(n, 4),
                    lhs: Box::new(move |r| product_of(&sys, r)),
                    rhs: Box::new(move |r| Ok(num_traits::pow(vandermonde(all, r), 4))),
                });
            }
        }
        IdentityName::Chi18 | IdentityName::Chi68 => {
            let evens = even_characteristics(g)?;
            let img = rho_monomial(&evens)?;
            let power = if g == 3 { 16 } else { 64 };
            out.push(Instance {
                label: name.as_str().to_string(),
                image_exponents: img.exponents.clone(),
                expected_exponents: uniform_exponents(n, power),
                lhs: Box::new(move |r| product_of(&evens, r)),
                rhs: Box::new(move |r| Ok(num_traits::pow(vandermonde(all, r), power as usize))),
            });
        }
        IdentityName::Phi2Equal => {
            for (pairs, _, a2, a3) in rank2_witnesses(inputs)? {
                let i2 = rho_monomial(&a2)?;
                let i3 = rho_monomial(&a3)?;
                out.push(Instance {
                    label: format!("phi2_equal pairs {pairs:?}"),
                    image_exponents: i2.exponents.clone(),
                    expected_exponents: i3.exponents.clone(),
                    lhs: Box::new(move |r| product_of(&a2, r)),
                    rhs: Box::new(move |r| product_of(&a3, r)),
                });
            }
        }
        IdentityName::H0 => {
            for (pairs, a1, a2, a3) in rank2_witnesses(inputs)? {
                let psi = rho_monomial(&a1)?;
                let mut expected = BTreeMap::new();
                for &(a, b) in &pairs {
                    expected.insert((a.max(b), a.min(b)), 4);
                }
                for (tag, b_sys) in [("A2", a2), ("A3", a3)] {
                    let img = psi.div(&rho_monomial(&b_sys)?)?;
                    let num = a1.clone();
                    let den = b_sys.clone();
                    out.push(Instance {
                        label: format!("h0 {tag} pairs {pairs:?}"),
                        image_exponents: img.exponents.clone(),
                        expected_exponents: expected.clone(),
                        lhs: Box::new(move |r| Ok(product_of(&num, r)? / product_of(&den, r)?)),
                        rhs: Box::new(move |r| {
                            let mut acc = BigRational::one();
                            for &(a, b) in &pairs {
                                acc *= bracket(a, b, r);
                            }
                            Ok(num_traits::pow(acc, 4))
                        }),
                    });
                }
            }
        }
        IdentityName::Mu8 => {
            let rep = inputs.rank4.as_ref().ok_or_else(|| Error::Domain("rank-4 structure missing".into()))?;
            for w in &rep.witnesses {
                let Witness::Rank4 { system, kappa, .. } = w else { continue };
                let img = rho_monomial(system)?;
                let mut expected = uniform_exponents(n, 8);
                expected.remove(&(kappa.1, kappa.0));
                let sys = system.clone();
                let (k1, k2) = *kappa;
                out.push(Instance {
                    label: format!("mu8 kappa ({k1},{k2})"),
                    image_exponents: img.exponents.clone(),
                    expected_exponents: expected,
                    lhs: Box::new(move |r| product_of(&sys, r)),
                    rhs: Box::new(move |r| {
                        let d = vandermonde(all, r);
                        let k = bracket(k1, k2, r);
                        Ok(num_traits::pow(&d * &d / (&k * &k), 4))
                    }),
                });
            }
        }
        IdentityName::I1Translation => {}
    }
    Ok(out)
}

fn sign_of(ratio: &BigRational) -> Option<i8> {
    if ratio.is_one() {
        Some(1)
    } else if (-ratio).is_one() {
        Some(-1)
    } else {
        None
    }
}

/// Checks `name` at every root tuple in `trials`.
///
/// Each instance is checked twice: the normally ordered exponent map of its
/// symbolic image against the predicted one, and the fourth powers of both
/// sides evaluated from Vandermonde products.
pub fn verify_identity(name: IdentityName, inputs: &IdentityInputs, trials: &[RootSystem]) -> Result<IdentityRecord> {
    let g = name.genus();
    if trials.is_empty() {
        return domain("at least one root tuple is required");
    }
    if let Some(bad) = trials.iter().find(|r| r.genus() != g) {
        return Err(Error::GenusMismatch { left: g, right: bad.genus() });
    }
    let roots: Vec<Vec<String>> = trials.iter().map(|r| r.labels()).collect();
    if name == IdentityName::I1Translation {
        return verify_i1_translation(trials, roots);
    }
    let inst = instances(name, inputs)?;
    let degree = inst.first().map(|i| i.expected_exponents.values().sum()).unwrap_or(0);
    let exponents_match = inst.iter().all(|i| i.image_exponents == i.expected_exponents);
    let results: Vec<(Option<i8>, String)> = inst
        .par_iter()
        .flat_map_iter(|i| {
            trials.iter().map(move |r| {
                let sign = match ((i.lhs)(r), (i.rhs)(r)) {
                    (Ok(l), Ok(rh)) if !rh.is_zero() => sign_of(&(l / rh)),
                    _ => None,
                };
                (sign, i.label.clone())
            })
        })
        .collect();
    let mut sign = results.first().and_then(|r| r.0);
    let mut witness = None;
    for (s, label) in &results {
        if *s != sign || s.is_none() {
            sign = None;
            witness.get_or_insert_with(|| label.clone());
        }
    }
    if !exponents_match {
        if let Some(i) = inst.iter().find(|i| i.image_exponents != i.expected_exponents) {
            witness.get_or_insert_with(|| format!("{}: exponent maps differ", i.label));
        }
    }
    let pass = !inst.is_empty() && exponents_match && sign.is_some();
    Ok(IdentityRecord {
        identity: name.as_str().to_string(),
        instances: inst.len(),
        trials: trials.len(),
        roots,
        sign,
        degree,
        exponents_match,
        pass,
        witness,
    })
}

fn verify_i1_translation(trials: &[RootSystem], roots: Vec<Vec<String>>) -> Result<IdentityRecord> {
    let matchings = perfect_matchings_8();
    let mut rng = ChaCha8Rng::seed_from_u64(0x11);
    let mut pass = true;
    let mut witness = None;
    for r in trials {
        let c =
            BigRational::new(BigInt::from(rng.random_range(-500i64..=500)), BigInt::from(rng.random_range(1i64..=37)));
        let shifted = r.map(|e| e + &c)?;
        if quasi_invariant_i1(&shifted, &matchings)? != quasi_invariant_i1(r, &matchings)? {
            pass = false;
            witness.get_or_insert_with(|| format!("shift by {c} at {:?}", r.labels()));
        }
    }
    Ok(IdentityRecord {
        identity: IdentityName::I1Translation.as_str().to_string(),
        instances: 1,
        trials: trials.len(),
        roots,
        sign: if pass { Some(1) } else { None },
        degree: 4,
        exponents_match: true,
        pass,
        witness,
    })
}

/// `I₁(e) = Σ [i₁j₁][i₂j₂][i₃j₃][i₄j₄]` over the given pair partitions of
/// the eight labels, every bracket normally ordered.
pub fn quasi_invariant_i1(roots: &RootSystem, matchings: &[[(usize, usize); 4]]) -> Result<BigRational> {
    if roots.len() != 8 {
        return domain(format!("I₁ needs 8 roots, got {}", roots.len()));
    }
    let mut acc = BigRational::zero();
    for m in matchings {
        let mut t = BigRational::one();
        for &(a, b) in m {
            t *= bracket(a, b, roots);
        }
        acc += t;
    }
    Ok(acc)
}

/// Pair partitions `{iₖ, jₖ}` recovered from rank-2 witnesses.
pub fn matchings_from_structure(rep: &StructureReport) -> Vec<[(usize, usize); 4]> {
    let mut out: Vec<[(usize, usize); 4]> = rep
        .witnesses
        .iter()
        .filter_map(|w| match w {
            Witness::Rank2 { pairs, .. } => {
                let mut p = pairs.map(|(a, b)| (a.min(b), a.max(b)));
                p.sort();
                Some(p)
            }
            _ => None,
        })
        .collect();
    out.sort();
    out
}

/// Roots and a label transposition under which `I₁` changes value.
#[derive(Clone, Debug, Serialize)]
pub struct SymmetryWitness {
    pub roots: Vec<String>,
    pub transposition: (usize, usize),
    pub before: String,
    pub after: String,
}

/// Random search for a transposition of labels that changes `I₁`.
pub fn i1_nonsymmetry_witness(seed: u64, attempts: usize) -> Result<Option<SymmetryWitness>> {
    let matchings = perfect_matchings_8();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..attempts {
        let r = RootSystem::random(3, &mut rng)?;
        let before = quasi_invariant_i1(&r, &matchings)?;
        for a in 0..8 {
            for b in a + 1..8 {
                let after = quasi_invariant_i1(&r.permuted(a, b), &matchings)?;
                if after != before {
                    return Ok(Some(SymmetryWitness {
                        roots: r.labels(),
                        transposition: (a, b),
                        before: before.to_string(),
                        after: after.to_string(),
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// Exponents `(p, q)` with `I₁(Me)·∏(ce_i+d)^p = (ad−bc)^q · I₁(e)` at every
/// sampled Möbius map and root tuple.
#[derive(Clone, Debug, Serialize)]
pub struct MoebiusSearch {
    pub samples: usize,
    pub solutions: Vec<(u32, u32)>,
}

pub fn i1_moebius_search(seed: u64, samples: usize, max_exponent: u32) -> Result<MoebiusSearch> {
    let matchings = perfect_matchings_8();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut alive: Vec<(u32, u32)> = (0..=max_exponent).flat_map(|p| (0..=max_exponent).map(move |q| (p, q))).collect();
    let mut done = 0;
    while done < samples {
        let r = RootSystem::random(3, &mut rng)?;
        let [a, b, c, d]: [i64; 4] = std::array::from_fn(|_| rng.random_range(-7i64..=7));
        let det = a * d - b * c;
        if det == 0 || c == 0 {
            continue;
        }
        let dens: Vec<BigRational> = r.roots().iter().map(|e| e * rational(c) + rational(d)).collect();
        if dens.iter().any(|x| x.is_zero()) {
            continue;
        }
        let mapped = RootSystem::new(
            r.roots().iter().zip(&dens).map(|(e, den)| (e * rational(a) + rational(b)) / den).collect(),
        );
        let Ok(mapped) = mapped else { continue };
        let lhs0 = quasi_invariant_i1(&mapped, &matchings)?;
        let rhs0 = quasi_invariant_i1(&r, &matchings)?;
        let prod: BigRational = dens.iter().fold(BigRational::one(), |acc, x| acc * x);
        alive.retain(|&(p, q)| {
            lhs0.clone() * num_traits::pow(prod.clone(), p as usize)
                == num_traits::pow(rational(det), q as usize) * rhs0.clone()
        });
        done += 1;
    }
    Ok(MoebiusSearch { samples, solutions: alive })
}

/// `I₁(λe) = λ⁴ I₁(e)` and `I₁(e + c) = I₁(e)` at one root tuple.
pub fn i1_homogeneity(roots: &RootSystem, lambda: &BigRational, shift: &BigRational) -> Result<(bool, bool)> {
    let m = perfect_matchings_8();
    let base = quasi_invariant_i1(roots, &m)?;
    let scaled = quasi_invariant_i1(&roots.map(|e| e * lambda)?, &m)?;
    let shifted = quasi_invariant_i1(&roots.map(|e| e + shift)?, &m)?;
    Ok((scaled == base.clone() * num_traits::pow(lambda.clone(), 4), shifted == base))
}

/// Absolute value helper for reports.
pub fn abs_f64(x: &BigRational) -> f64 {
    x.abs().to_f64().unwrap_or(f64::INFINITY)
}
