//! Half-period theta characteristics over GF(2).
//!
//! A characteristic of genus `g` is a 2×g bit matrix `[ε′; ε]`. The top row
//! `ε′` multiplies τ in the half-period `ε/2 + τε′/2`, the bottom row `ε` is
//! the real part. Each row is packed into a machine word; bit `j` holds
//! column `j + 1`.
//!
//! Branch points `e_0, …, e_{2g+1}` of a hyperelliptic curve carry fixed
//! characteristics (see [`branch_characteristic`]); sums of them shifted by
//! the Riemann constant `[K]` give the partition description of every
//! characteristic, which is what makes the vanishing order readable.

use std::fmt;
use std::ops::Add;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Largest genus supported by the packed representation.
pub const MAX_GENUS: usize = 16;

/// Largest genus for which the partition dictionary is tabulated.
pub const MAX_TABLE_GENUS: usize = 8;

/// Ordered by genus, then by [`Characteristic::index`].
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Characteristic {
    genus: u8,
    top: u16,
    bottom: u16,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

fn check_genus(g: usize) -> Result<()> {
    if g == 0 || g > MAX_GENUS {
        return domain(format!("genus {g} outside 1..={MAX_GENUS}"));
    }
    Ok(())
}

fn row_mask(g: usize) -> u16 {
    if g >= 16 {
        u16::MAX
    } else {
        (1u16 << g) - 1
    }
}

impl Characteristic {
    pub fn zero(g: usize) -> Result<Self> {
        Self::from_bits(g, 0, 0)
    }

    /// Builds a characteristic from packed rows (bit `j` = column `j + 1`).
    pub fn from_bits(g: usize, top: u16, bottom: u16) -> Result<Self> {
        check_genus(g)?;
        let m = row_mask(g);
        if top & !m != 0 || bottom & !m != 0 {
            return domain(format!("row bits exceed genus {g}"));
        }
        Ok(Self { genus: g as u8, top, bottom })
    }

    /// Builds a characteristic from explicit 0/1 rows.
    pub fn from_rows(top: &[u8], bottom: &[u8]) -> Result<Self> {
        if top.len() != bottom.len() {
            return domain("rows of different length");
        }
        let g = top.len();
        check_genus(g)?;
        let pack = |row: &[u8]| -> Result<u16> {
            row.iter().enumerate().try_fold(0u16, |acc, (j, &b)| match b {
                0 => Ok(acc),
                1 => Ok(acc | (1 << j)),
                _ => domain(format!("entry {b} is not a bit")),
            })
        };
        Self::from_bits(g, pack(top)?, pack(bottom)?)
    }

    /// Inverse of [`Characteristic::index`].
    pub fn from_index(g: usize, index: usize) -> Result<Self> {
        check_genus(g)?;
        if g < 16 && index >> (2 * g) != 0 {
            return domain(format!("index {index} out of range for genus {g}"));
        }
        let m = row_mask(g) as usize;
        Self::from_bits(g, (index & m) as u16, ((index >> g) & m) as u16)
    }

    /// Dense index `top | bottom << g`, a bijection onto `0..4^g`.
    pub fn index(&self) -> usize {
        self.top as usize | (self.bottom as usize) << self.genus
    }

    pub fn genus(&self) -> usize {
        self.genus as usize
    }

    pub fn top(&self) -> u16 {
        self.top
    }

    pub fn bottom(&self) -> u16 {
        self.bottom
    }

    /// Bit of the `ε′` row at 0-based column `j`.
    pub fn top_bit(&self, j: usize) -> u8 {
        ((self.top >> j) & 1) as u8
    }

    /// Bit of the `ε` row at 0-based column `j`.
    pub fn bottom_bit(&self, j: usize) -> u8 {
        ((self.bottom >> j) & 1) as u8
    }

    pub fn is_zero(&self) -> bool {
        self.top == 0 && self.bottom == 0
    }

    /// Odd iff `ε·ε′ ≡ 1 (mod 2)`.
    pub fn parity(&self) -> Parity {
        if (self.top & self.bottom).count_ones() % 2 == 1 {
            Parity::Odd
        } else {
            Parity::Even
        }
    }

    pub fn is_even(&self) -> bool {
        self.parity() == Parity::Even
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        same_genus(self, other)?;
        Ok(*self + *other)
    }

    /// The alternating form `|P,Q| = p·q′ − p′·q (mod 2)`.
    pub fn pairing(&self, other: &Self) -> Result<u8> {
        same_genus(self, other)?;
        Ok(self.pairing_unchecked(other))
    }

    pub(crate) fn pairing_unchecked(&self, other: &Self) -> u8 {
        (((self.bottom & other.top).count_ones() + (self.top & other.bottom).count_ones()) & 1) as u8
    }
}

impl Ord for Characteristic {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.genus, self.index()).cmp(&(other.genus, other.index()))
    }
}

impl PartialOrd for Characteristic {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

fn same_genus(a: &Characteristic, b: &Characteristic) -> Result<()> {
    if a.genus != b.genus {
        return Err(Error::GenusMismatch { left: a.genus(), right: b.genus() });
    }
    Ok(())
}

/// Entrywise sum mod 2. Panics on genus mismatch; use
/// [`Characteristic::checked_add`] for fallible addition.
impl Add for Characteristic {
    type Output = Characteristic;

    fn add(self, rhs: Self) -> Self {
        assert_eq!(self.genus, rhs.genus, "adding characteristics of different genus");
        Characteristic { genus: self.genus, top: self.top ^ rhs.top, bottom: self.bottom ^ rhs.bottom }
    }
}

impl fmt::Display for Characteristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..self.genus() {
            write!(f, "{}", self.top_bit(j))?;
        }
        f.write_str("/")?;
        for j in 0..self.genus() {
            write!(f, "{}", self.bottom_bit(j))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Characteristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

impl FromStr for Characteristic {
    type Err = Error;

    /// Parses `"top/bottom"`, e.g. `"111/101"`.
    fn from_str(s: &str) -> Result<Self> {
        let (t, b) = s.trim().split_once('/').ok_or_else(|| Error::Parse(format!("expected top/bottom, got {s:?}")))?;
        let bits = |row: &str| -> Result<Vec<u8>> {
            row.chars()
                .map(|c| match c {
                    '0' => Ok(0),
                    '1' => Ok(1),
                    _ => Err(Error::Parse(format!("bad bit {c:?} in {s:?}"))),
                })
                .collect()
        };
        Self::from_rows(&bits(t)?, &bits(b)?)
    }
}

impl Serialize for Characteristic {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Characteristic {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Iterates all `4^g` characteristics of genus `g` in index order.
pub fn all_characteristics(g: usize) -> Result<impl Iterator<Item = Characteristic>> {
    check_genus(g)?;
    if 2 * g > 30 {
        return domain("enumeration limited to genus 15");
    }
    Ok((0..1usize << (2 * g)).map(move |i| Characteristic::from_index(g, i).expect("in range")))
}

/// Characteristic of the branch point `e_k` with base point `e_0`.
///
/// `ε_{2j-1}` has `ε′ = e_j` and `ε = 1…1` on columns `1..j-1`; `ε_{2j}` has
/// `ε′ = e_j` and `ε = 1…1` on columns `1..j`; `ε_{2g+1} = [0…0; 1…1]`.
pub fn branch_characteristic(g: usize, k: usize) -> Result<Characteristic> {
    check_genus(g)?;
    if k > 2 * g + 1 {
        return domain(format!("branch index {k} outside 0..={}", 2 * g + 1));
    }
    if k == 0 {
        return Characteristic::zero(g);
    }
    if k == 2 * g + 1 {
        return Characteristic::from_bits(g, 0, row_mask(g));
    }
    let j = k.div_ceil(2);
    let ones = if k % 2 == 1 { j - 1 } else { j };
    Characteristic::from_bits(g, 1 << (j - 1), ((1u32 << ones) - 1) as u16)
}

/// The Riemann constant `[K] = Σ_{k=1}^g [ε_{2k}]`.
pub fn k_characteristic(g: usize) -> Result<Characteristic> {
    let mut acc = Characteristic::zero(g)?;
    for k in 1..=g {
        acc = acc + branch_characteristic(g, 2 * k)?;
    }
    Ok(acc)
}

/// `|P,Q,R| = |P,Q| + |P,R| + |Q,R| (mod 2)`.
pub fn triple_relation(p: &Characteristic, q: &Characteristic, r: &Characteristic) -> Result<u8> {
    Ok((p.pairing(q)? + p.pairing(r)? + q.pairing(r)?) & 1)
}

/// A subset of branch-point labels `{0, …, 2g+1}` packed into a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct IndexSet(pub u64);

impl IndexSet {
    pub fn from_indices(indices: &[usize]) -> Self {
        IndexSet(indices.iter().fold(0u64, |m, &i| m | 1 << i))
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn contains(&self, i: usize) -> bool {
        (self.0 >> i) & 1 == 1
    }

    pub fn complement(&self, n: usize) -> Self {
        IndexSet(!self.0 & ((1u64 << n) - 1))
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        let m = self.0;
        (0..64).filter(move |i| (m >> i) & 1 == 1)
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (n, i) in self.iter().enumerate() {
            if n > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        f.write_str("}")
    }
}

impl Serialize for IndexSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

/// Partition `I ∪ J` of the branch labels describing a characteristic.
///
/// Stored in canonical form: the side of size `g+1−2m`, and at `m = 0`
/// (both sides of size `g+1`) the side containing label 0.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct PartitionChar {
    genus: u8,
    indices: IndexSet,
    multiplicity: u8,
}

impl PartitionChar {
    /// Accepts either side of the partition; `|I| ≡ g+1 (mod 2)` is required.
    pub fn new(g: usize, indices: &[usize]) -> Result<Self> {
        check_genus(g)?;
        let n = 2 * g + 2;
        if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
            return domain(format!("label {bad} outside 0..{n}"));
        }
        let set = IndexSet::from_indices(indices);
        if set.len() != indices.len() {
            return domain("repeated label in partition");
        }
        Self::from_set(g, set)
    }

    pub fn from_set(g: usize, set: IndexSet) -> Result<Self> {
        check_genus(g)?;
        let n = 2 * g + 2;
        if set.0 >> n != 0 {
            return domain(format!("label outside 0..{n}"));
        }
        if set.len() % 2 != (g + 1) % 2 {
            return domain(format!("partition side of size {} has wrong parity for genus {g}", set.len()));
        }
        let comp = set.complement(n);
        let canon = match set.len().cmp(&(g + 1)) {
            std::cmp::Ordering::Less => set,
            std::cmp::Ordering::Greater => comp,
            std::cmp::Ordering::Equal => {
                if set.contains(0) {
                    set
                } else {
                    comp
                }
            }
        };
        let multiplicity = ((g + 1 - canon.len()) / 2) as u8;
        Ok(Self { genus: g as u8, indices: canon, multiplicity })
    }

    pub fn genus(&self) -> usize {
        self.genus as usize
    }

    pub fn indices(&self) -> IndexSet {
        self.indices
    }

    /// The other side `J` of the partition.
    pub fn complement(&self) -> IndexSet {
        self.indices.complement(2 * self.genus() + 2)
    }

    pub fn multiplicity(&self) -> usize {
        self.multiplicity as usize
    }
}

impl fmt::Display for PartitionChar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.indices)
    }
}

/// `[I] = Σ_{i∈I} [ε_i] + [K]`.
pub fn char_of_partition(p: &PartitionChar) -> Result<Characteristic> {
    char_of_set(p.genus(), p.indices())
}

pub(crate) fn char_of_set(g: usize, set: IndexSet) -> Result<Characteristic> {
    let mut acc = k_characteristic(g)?;
    for i in set.iter() {
        acc = acc + branch_characteristic(g, i)?;
    }
    Ok(acc)
}

/// Convenience: characteristic of the partition with side `indices`.
pub fn char_of_indices(g: usize, indices: &[usize]) -> Result<Characteristic> {
    char_of_partition(&PartitionChar::new(g, indices)?)
}

/// Bijection table characteristic ↔ canonical partition for one genus.
#[derive(Debug)]
pub struct PartitionTable {
    genus: usize,
    by_index: Vec<PartitionChar>,
}

impl PartitionTable {
    fn build(g: usize) -> Result<Self> {
        check_genus(g)?;
        if g > MAX_TABLE_GENUS {
            return domain(format!("partition table limited to genus {MAX_TABLE_GENUS}"));
        }
        let n = 2 * g + 2;
        let size = 1usize << (2 * g);
        let mut slots: Vec<Option<PartitionChar>> = vec![None; size];
        for mask in 0u64..(1u64 << n) {
            let set = IndexSet(mask);
            let len = set.len();
            let canonical = len < g + 1 || (len == g + 1 && set.contains(0));
            if !canonical || len % 2 != (g + 1) % 2 {
                continue;
            }
            let p = PartitionChar::from_set(g, set)?;
            let c = char_of_partition(&p)?;
            if let Some(prev) = slots[c.index()] {
                return Err(Error::Verification(format!("partitions {prev} and {p} give the same characteristic {c}")));
            }
            slots[c.index()] = Some(p);
        }
        let by_index = slots
            .into_iter()
            .enumerate()
            .map(|(i, s)| s.ok_or_else(|| Error::Verification(format!("characteristic index {i} has no partition"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { genus: g, by_index })
    }

    /// Shared table for genus `g`, built on first use.
    pub fn get(g: usize) -> Result<&'static PartitionTable> {
        static TABLES: [OnceLock<PartitionTable>; MAX_TABLE_GENUS + 1] =
            [const { OnceLock::new() }; MAX_TABLE_GENUS + 1];
        check_genus(g)?;
        if g > MAX_TABLE_GENUS {
            return domain(format!("partition table limited to genus {MAX_TABLE_GENUS}"));
        }
        if let Some(t) = TABLES[g].get() {
            return Ok(t);
        }
        let t = Self::build(g)?;
        Ok(TABLES[g].get_or_init(|| t))
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn partition(&self, c: &Characteristic) -> PartitionChar {
        debug_assert_eq!(c.genus(), self.genus);
        self.by_index[c.index()]
    }

    pub fn multiplicity(&self, c: &Characteristic) -> usize {
        self.partition(c).multiplicity()
    }
}

/// Canonical partition of `c`, read from the shared table.
pub fn partition_of_char(c: &Characteristic) -> Result<PartitionChar> {
    Ok(PartitionTable::get(c.genus())?.partition(c))
}

/// Counts of characteristics by parity and multiplicity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Census {
    pub genus: usize,
    pub even: usize,
    pub odd: usize,
    /// `by_multiplicity[m]` = number of characteristics of multiplicity `m`.
    pub by_multiplicity: Vec<usize>,
}

pub fn census(g: usize) -> Result<Census> {
    let table = PartitionTable::get(g)?;
    let mut even = 0;
    let mut odd = 0;
    let mut by_multiplicity = vec![0; g.div_ceil(2) + 1];
    for c in all_characteristics(g)? {
        match c.parity() {
            Parity::Even => even += 1,
            Parity::Odd => odd += 1,
        }
        by_multiplicity[table.multiplicity(&c)] += 1;
    }
    Ok(Census { genus: g, even, odd, by_multiplicity })
}

/// Closed-form census: `2^{g−1}(2^g ± 1)` by parity, `C(2g+1, g)` at
/// `m = 0` and `C(2g+2, g+1−2m)` for `m ≥ 1`.
pub fn expected_census(g: usize) -> Census {
    let binom = |n: usize, k: usize| -> usize { (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1)) };
    let by_multiplicity = (0..=g.div_ceil(2))
        .map(|m| if m == 0 { binom(2 * g + 1, g) } else { binom(2 * g + 2, g + 1 - 2 * m) })
        .collect();
    Census { genus: g, even: (1 << (g - 1)) * ((1 << g) + 1), odd: (1 << (g - 1)) * ((1 << g) - 1), by_multiplicity }
}

/// Element `(a b; c d)` of `Sp(2g, Z)` with g×g integer blocks.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SymplecticElement {
    genus: usize,
    a: Vec<i64>,
    b: Vec<i64>,
    c: Vec<i64>,
    d: Vec<i64>,
}

fn mat_mul(g: usize, x: &[i64], y: &[i64]) -> Vec<i64> {
    let mut out = vec![0; g * g];
    for i in 0..g {
        for k in 0..g {
            let xik = x[i * g + k];
            if xik == 0 {
                continue;
            }
            for j in 0..g {
                out[i * g + j] += xik * y[k * g + j];
            }
        }
    }
    out
}

fn transpose(g: usize, x: &[i64]) -> Vec<i64> {
    let mut out = vec![0; g * g];
    for i in 0..g {
        for j in 0..g {
            out[j * g + i] = x[i * g + j];
        }
    }
    out
}

fn identity(g: usize) -> Vec<i64> {
    let mut out = vec![0; g * g];
    for i in 0..g {
        out[i * g + i] = 1;
    }
    out
}

impl SymplecticElement {
    /// Blocks are row-major g×g. Rejects matrices that do not preserve `J`.
    pub fn new(g: usize, a: Vec<i64>, b: Vec<i64>, c: Vec<i64>, d: Vec<i64>) -> Result<Self> {
        check_genus(g)?;
        for blk in [&a, &b, &c, &d] {
            if blk.len() != g * g {
                return domain(format!("block of length {} for genus {g}", blk.len()));
            }
        }
        let el = Self { genus: g, a, b, c, d };
        if !el.is_symplectic() {
            return domain("matrix does not preserve the alternating form J");
        }
        Ok(el)
    }

    /// `aᵗc` and `bᵗd` symmetric and `aᵗd − cᵗb = 1`.
    fn is_symplectic(&self) -> bool {
        let g = self.genus;
        let sym = |m: &[i64]| m == transpose(g, m).as_slice();
        let atc = mat_mul(g, &transpose(g, &self.a), &self.c);
        let btd = mat_mul(g, &transpose(g, &self.b), &self.d);
        let atd = mat_mul(g, &transpose(g, &self.a), &self.d);
        let ctb = mat_mul(g, &transpose(g, &self.c), &self.b);
        let diff: Vec<i64> = atd.iter().zip(&ctb).map(|(x, y)| x - y).collect();
        sym(&atc) && sym(&btd) && diff == identity(g)
    }

    pub fn identity(g: usize) -> Result<Self> {
        Self::new(g, identity(g), vec![0; g * g], vec![0; g * g], identity(g))
    }

    /// `J = (0 1; −1 0)`.
    pub fn j(g: usize) -> Result<Self> {
        let neg: Vec<i64> = identity(g).iter().map(|x| -x).collect();
        Self::new(g, vec![0; g * g], identity(g), neg, vec![0; g * g])
    }

    /// Translation `(1 B; 0 1)` by a symmetric integer matrix `B`.
    pub fn translation(g: usize, b: Vec<i64>) -> Result<Self> {
        Self::new(g, identity(g), b, vec![0; g * g], identity(g))
    }

    /// `J` together with the translations by `E_ii` and `E_ij + E_ji`.
    pub fn generators(g: usize) -> Result<Vec<(String, Self)>> {
        let mut out = vec![("J".to_string(), Self::j(g)?)];
        for i in 0..g {
            for j in i..g {
                let mut b = vec![0; g * g];
                b[i * g + j] = 1;
                b[j * g + i] = 1;
                out.push((format!("T[{},{}]", i + 1, j + 1), Self::translation(g, b)?));
            }
        }
        Ok(out)
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn a(&self) -> &[i64] {
        &self.a
    }

    pub fn b(&self) -> &[i64] {
        &self.b
    }

    pub fn c(&self) -> &[i64] {
        &self.c
    }

    pub fn d(&self) -> &[i64] {
        &self.d
    }

    /// Block product `self · other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.genus != other.genus {
            return Err(Error::GenusMismatch { left: self.genus, right: other.genus });
        }
        let g = self.genus;
        let add = |x: Vec<i64>, y: Vec<i64>| -> Vec<i64> { x.iter().zip(&y).map(|(p, q)| p + q).collect() };
        let a = add(mat_mul(g, &self.a, &other.a), mat_mul(g, &self.b, &other.c));
        let b = add(mat_mul(g, &self.a, &other.b), mat_mul(g, &self.b, &other.d));
        let c = add(mat_mul(g, &self.c, &other.a), mat_mul(g, &self.d, &other.c));
        let d = add(mat_mul(g, &self.c, &other.b), mat_mul(g, &self.d, &other.d));
        Self::new(g, a, b, c, d)
    }

    /// `(a b; c d)⁻¹ = (dᵗ −bᵗ; −cᵗ aᵗ)`.
    pub fn inverse(&self) -> Self {
        let g = self.genus;
        let neg = |m: Vec<i64>| -> Vec<i64> { m.into_iter().map(|x| -x).collect() };
        Self {
            genus: g,
            a: transpose(g, &self.d),
            b: neg(transpose(g, &self.b)),
            c: neg(transpose(g, &self.c)),
            d: transpose(g, &self.a),
        }
    }
}

/// Transformed characteristic
/// `[dε′ − cε + diag(c dᵗ); −bε′ + aε + diag(a bᵗ)] (mod 2)`.
///
/// This is the characteristic carried by `θ(γ⟨τ⟩)` when `θ[c](τ)` is
/// transformed by `γ`; composing satisfies
/// `gamma_action(γ₁γ₂, c) = gamma_action(γ₁, gamma_action(γ₂, c))`.
pub fn gamma_action(gamma: &SymplecticElement, ch: &Characteristic) -> Result<Characteristic> {
    let g = gamma.genus();
    if g != ch.genus() {
        return Err(Error::GenusMismatch { left: g, right: ch.genus() });
    }
    let ep: Vec<i64> = (0..g).map(|j| ch.top_bit(j) as i64).collect();
    let e: Vec<i64> = (0..g).map(|j| ch.bottom_bit(j) as i64).collect();
    let row = |m: &[i64], v: &[i64], i: usize| -> i64 { (0..g).map(|k| m[i * g + k] * v[k]).sum() };
    let diag_abt = |x: &[i64], y: &[i64], i: usize| -> i64 { (0..g).map(|k| x[i * g + k] * y[i * g + k]).sum() };
    let mut top = 0u16;
    let mut bottom = 0u16;
    for i in 0..g {
        let t = row(&gamma.d, &ep, i) - row(&gamma.c, &e, i) + diag_abt(&gamma.c, &gamma.d, i);
        let b = -row(&gamma.b, &ep, i) + row(&gamma.a, &e, i) + diag_abt(&gamma.a, &gamma.b, i);
        top |= (t.rem_euclid(2) as u16) << i;
        bottom |= (b.rem_euclid(2) as u16) << i;
    }
    Characteristic::from_bits(g, top, bottom)
}
