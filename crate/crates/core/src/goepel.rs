//! Göpel groups (isotropic subgroups of characteristics) and their cosets.
//!
//! Groups are enumerated by extending generator tuples one characteristic at
//! a time: each new generator is larger than the previous one, syzygetic to
//! all of them, outside their span and the smallest element of its coset
//! modulo that span. Surviving tuples are deduplicated by element set.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use crate::charkit::{all_characteristics, char_of_indices, partition_of_char, Characteristic, IndexSet, Parity};
use crate::error::{domain, Error, Result};

pub mod cache;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct GoepelGroup {
    genus: usize,
    rank: usize,
    generators: Vec<Characteristic>,
    /// Sorted by index; always contains zero first.
    elements: Vec<Characteristic>,
}

fn span(gens: &[Characteristic], zero: Characteristic) -> Vec<Characteristic> {
    let mut out = vec![zero];
    for &gnr in gens {
        let shifted: Vec<_> = out.iter().map(|&x| x + gnr).collect();
        out.extend(shifted);
    }
    out
}

impl GoepelGroup {
    /// Builds the group spanned by `generators`, checking independence and
    /// pairwise syzygy.
    pub fn from_generators(g: usize, generators: Vec<Characteristic>) -> Result<Self> {
        let zero = Characteristic::zero(g)?;
        if let Some(bad) = generators.iter().find(|c| c.genus() != g) {
            return Err(Error::GenusMismatch { left: g, right: bad.genus() });
        }
        let mut elements = span(&generators, zero);
        elements.sort();
        let distinct = elements.iter().dedup().count();
        if distinct != elements.len() {
            return domain("generators are linearly dependent");
        }
        for (a, b) in generators.iter().tuple_combinations() {
            if a.pairing_unchecked(b) != 0 {
                return Err(Error::Verification(format!("generators {a} and {b} are azygetic")));
            }
        }
        Ok(Self { genus: g, rank: generators.len(), generators, elements })
    }

    /// Rebuilds a group from its full element list, choosing the greedy
    /// minimal basis as generators.
    pub fn from_elements(g: usize, elements: &[Characteristic]) -> Result<Self> {
        let n = elements.len();
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::Verification(format!("{n} elements is not a power of two")));
        }
        let zero = Characteristic::zero(g)?;
        let set: BTreeSet<_> = elements.iter().copied().collect();
        if set.len() != n || !set.contains(&zero) {
            return Err(Error::Verification("element list has duplicates or lacks zero".into()));
        }
        let mut gens = Vec::new();
        let mut spanned: BTreeSet<Characteristic> = [zero].into();
        for &c in &set {
            if !spanned.contains(&c) {
                gens.push(c);
                spanned = span(&gens, zero).into_iter().collect();
            }
        }
        if spanned != set {
            return Err(Error::Verification("element list is not closed under addition".into()));
        }
        let grp = Self::from_generators(g, gens)?;
        grp.check()?;
        Ok(grp)
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn generators(&self) -> &[Characteristic] {
        &self.generators
    }

    pub fn elements(&self) -> &[Characteristic] {
        &self.elements
    }

    pub fn contains(&self, c: &Characteristic) -> bool {
        self.elements.binary_search(c).is_ok()
    }

    /// Closure, pairwise syzygy and size `2^r`.
    pub fn check(&self) -> Result<()> {
        if self.elements.len() != 1 << self.rank {
            return Err(Error::Verification(format!("group has {} elements", self.elements.len())));
        }
        for a in &self.elements {
            for b in &self.elements {
                if !self.contains(&(*a + *b)) {
                    return Err(Error::Verification(format!("{a} + {b} leaves the group")));
                }
                if a.pairing_unchecked(b) != 0 {
                    return Err(Error::Verification(format!("{a}, {b} azygetic")));
                }
            }
        }
        Ok(())
    }
}

/// Multiplicity profile of a system: `counts[m]` characteristics of
/// multiplicity `m`, split by parity.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize)]
pub struct Profile {
    pub even: usize,
    pub odd: usize,
    pub by_multiplicity: Vec<usize>,
}

impl Profile {
    /// Label in the style `2[I2]+14[I0]` (even systems only list even
    /// multiplicities).
    pub fn label(&self) -> String {
        let parts: Vec<String> = self
            .by_multiplicity
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, &n)| n > 0)
            .map(|(m, n)| format!("{n}[I{m}]"))
            .collect();
        parts.join("+")
    }

    pub fn singular(&self) -> usize {
        self.by_multiplicity.iter().skip(2).sum()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemType {
    WhollyEven,
    WhollyOdd,
    Mixed,
}

/// A coset `A + (P)` of a Göpel group.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GoepelSystem {
    base: Characteristic,
    elements: Vec<Characteristic>,
    profile: Profile,
}

impl GoepelSystem {
    pub fn new(group: &GoepelGroup, base: Characteristic) -> Result<Self> {
        let mut elements: Vec<_> = group.elements().iter().map(|&p| p + base).collect();
        elements.sort();
        let base = elements[0];
        let g = group.genus();
        let mut profile = Profile { even: 0, odd: 0, by_multiplicity: vec![0; g.div_ceil(2) + 1] };
        for c in &elements {
            match c.parity() {
                Parity::Even => profile.even += 1,
                Parity::Odd => profile.odd += 1,
            }
            profile.by_multiplicity[partition_of_char(c)?.multiplicity()] += 1;
        }
        Ok(Self { base, elements, profile })
    }

    /// Smallest element of the coset.
    pub fn base(&self) -> Characteristic {
        self.base
    }

    pub fn elements(&self) -> &[Characteristic] {
        &self.elements
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn system_type(&self) -> SystemType {
        if self.profile.odd == 0 {
            SystemType::WhollyEven
        } else if self.profile.even == 0 {
            SystemType::WhollyOdd
        } else {
            SystemType::Mixed
        }
    }

    pub fn contains(&self, c: &Characteristic) -> bool {
        self.elements.binary_search(c).is_ok()
    }
}

impl fmt::Display for GoepelSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.elements.iter().map(|c| c.to_string()).join(" "))
    }
}

fn check_rank(g: usize, r: usize) -> Result<()> {
    if !(1..=4).contains(&g) {
        return domain(format!("Göpel enumeration supports genus 1..=4, got {g}"));
    }
    if r == 0 || r > g {
        return domain(format!("rank {r} outside 1..={g}"));
    }
    Ok(())
}

/// All Göpel groups of rank `r` in genus `g`, sorted by element list.
pub fn enumerate_groups(g: usize, r: usize) -> Result<Vec<GoepelGroup>> {
    check_rank(g, r)?;
    let zero = Characteristic::zero(g)?;
    let all: Vec<Characteristic> = all_characteristics(g)?.skip(1).collect();

    fn extend(
        all: &[Characteristic],
        gens: &mut Vec<Characteristic>,
        spanned: &mut Vec<Characteristic>,
        r: usize,
        out: &mut Vec<Vec<Characteristic>>,
    ) {
        if gens.len() == r {
            let mut els = spanned.clone();
            els.sort();
            out.push(els);
            return;
        }
        let last = *gens.last().expect("seeded with one generator");
        for &x in all.iter().filter(|&&x| x > last) {
            if gens.iter().any(|gn| gn.pairing_unchecked(&x) != 0) {
                continue;
            }
            // x outside the span and minimal in its coset x + span
            if spanned.iter().any(|&s| (s + x) <= x && !s.is_zero()) || spanned.contains(&x) {
                continue;
            }
            let old = spanned.len();
            let shifted: Vec<_> = spanned.iter().map(|&s| s + x).collect();
            spanned.extend(shifted);
            gens.push(x);
            extend(all, gens, spanned, r, out);
            gens.pop();
            spanned.truncate(old);
        }
    }

    let groups: HashSet<Vec<Characteristic>> = all
        .par_iter()
        .map(|&first| {
            let mut out = Vec::new();
            let mut gens = vec![first];
            let mut spanned = vec![zero, first];
            extend(&all, &mut gens, &mut spanned, r, &mut out);
            out
        })
        .flatten_iter()
        .collect();
    let mut groups: Vec<_> = groups.into_iter().collect();
    groups.sort();
    groups.iter().map(|els| GoepelGroup::from_elements(g, els)).collect()
}

/// Exhaustive oracle: every `2^r`-subset containing zero that is closed and
/// pairwise syzygetic. Exponential; meant for genus ≤ 2.
pub fn enumerate_groups_brute_force(g: usize, r: usize) -> Result<Vec<Vec<Characteristic>>> {
    check_rank(g, r)?;
    if g > 2 {
        return domain("brute-force enumeration limited to genus 2");
    }
    let zero = Characteristic::zero(g)?;
    let nonzero: Vec<_> = all_characteristics(g)?.skip(1).collect();
    let mut out = Vec::new();
    for subset in nonzero.iter().copied().combinations((1 << r) - 1) {
        let mut set = subset;
        set.push(zero);
        let lookup: HashSet<_> = set.iter().copied().collect();
        let ok = set.iter().all(|a| set.iter().all(|b| lookup.contains(&(*a + *b)) && a.pairing_unchecked(b) == 0));
        if ok {
            set.sort();
            out.push(set);
        }
    }
    out.sort();
    Ok(out)
}

/// All `2^{2g−r}` cosets of `group`, ordered by base.
pub fn systems_of_group(group: &GoepelGroup) -> Result<Vec<GoepelSystem>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for c in all_characteristics(group.genus())? {
        if seen.contains(&c) {
            continue;
        }
        let sys = GoepelSystem::new(group, c)?;
        seen.extend(sys.elements().iter().copied());
        out.push(sys);
    }
    Ok(out)
}

/// Number of Göpel groups of rank `r` in genus `g`:
/// `∏_{i<r} (2^{2(g−i)} − 1) / (2^{i+1} − 1)`.
pub fn expected_group_count(g: usize, r: usize) -> u64 {
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..r.min(g) {
        num *= (1u128 << (2 * (g - i))) - 1;
        den *= (1u128 << (i + 1)) - 1;
    }
    (num / den) as u64
}

/// Closed-form numbers of (wholly even, wholly odd, mixed) systems per group,
/// with `s = g − r`.
pub fn expected_system_counts(g: usize, r: usize) -> (usize, usize, usize) {
    let s = g - r;
    let (even, odd) = if s == 0 { (1, 0) } else { ((1 << (s - 1)) * ((1 << s) + 1), (1 << (s - 1)) * ((1 << s) - 1)) };
    (even, odd, (1 << (2 * s)) * ((1 << r) - 1))
}

/// Wholly even systems of every group, grouped per group.
pub fn wholly_even_systems(groups: &[GoepelGroup]) -> Result<Vec<Vec<GoepelSystem>>> {
    groups
        .par_iter()
        .map(|grp| {
            Ok(systems_of_group(grp)?.into_iter().filter(|s| s.system_type() == SystemType::WhollyEven).collect())
        })
        .collect()
}

/// Census of wholly even systems by profile label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EvenCensus {
    pub genus: usize,
    pub rank: usize,
    pub groups: usize,
    /// Number of wholly even systems per profile label.
    pub systems: BTreeMap<String, usize>,
    /// Per-group collections of wholly even systems, labelled by type.
    pub collections: BTreeMap<String, usize>,
}

fn check_supported(g: usize, r: usize) -> Result<()> {
    match (g, r) {
        (3, 3) | (3, 2) | (4, 4) => Ok(()),
        _ => domain(format!("classification supported for (3,3), (3,2), (4,4); got ({g},{r})")),
    }
}

fn collection_label(systems: &[GoepelSystem]) -> String {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for s in systems {
        *counts.entry(s.profile().label()).or_default() += 1;
    }
    let mut parts: Vec<(usize, String)> = counts.into_iter().map(|(l, n)| (n, l)).collect();
    // singular-containing profiles first
    parts.sort_by_key(|(n, l)| (!l.contains("[I2]"), *n, l.clone()));
    parts
        .into_iter()
        .map(|(n, l)| {
            let wrapped = if l.contains('+') { format!("({l})") } else { l };
            if n == 1 {
                wrapped
            } else {
                format!("{n}({})", wrapped.trim_start_matches('(').trim_end_matches(')'))
            }
        })
        .join("+")
}

/// Census of wholly even systems for the supported `(g, r)`.
pub fn classify_wholly_even(g: usize, r: usize, groups: &[GoepelGroup]) -> Result<EvenCensus> {
    check_supported(g, r)?;
    let per_group = wholly_even_systems(groups)?;
    let mut systems = BTreeMap::new();
    let mut collections = BTreeMap::new();
    for sys in &per_group {
        for s in sys {
            *systems.entry(s.profile().label()).or_default() += 1;
        }
        *collections.entry(collection_label(sys)).or_default() += 1;
    }
    Ok(EvenCensus { genus: g, rank: r, groups: groups.len(), systems, collections })
}

/// Labels of a partition side relative to the eight "free" labels.
fn local_mask(labels: &[usize; 8], set: IndexSet) -> Option<u8> {
    let mut m = 0u8;
    for i in set.iter() {
        let pos = labels.iter().position(|&l| l == i)?;
        m |= 1 << pos;
    }
    Some(m)
}

/// Canonical class of a 4-subset of 8 positions modulo complement.
fn class8(m: u8) -> u8 {
    if m & 1 == 1 {
        m
    } else {
        !m
    }
}

/// Pairings of a 4-set: the partner of its smallest element, for each of
/// the three pairings.
fn positions(m: u8) -> Vec<usize> {
    (0..8).filter(|i| (m >> i) & 1 == 1).collect()
}

/// Finds `i₁..i₄`, `j₁..j₄` (as positions) such that the seven classes are
/// `{i}` and `{i₁,i_a} ∪ q` for the pairs `q` of the `a`-th pairing of `{j}`.
fn match_seven(classes: &BTreeSet<u8>) -> Option<([usize; 4], [usize; 4])> {
    if classes.len() != 7 {
        return None;
    }
    for &s in classes {
        let is = positions(s);
        let js = positions(!s);
        let (i1, rest_i) = (is[0], &is[1..]);
        let (j1, rest_j) = (js[0], &js[1..]);
        for perm in rest_j.iter().copied().permutations(3) {
            let mut expect = BTreeSet::from([s]);
            for (a, &ia) in rest_i.iter().enumerate() {
                let partner = perm[a];
                let q1 = (1u8 << j1) | (1u8 << partner);
                let q2 = !s & !q1;
                let p = (1u8 << i1) | (1u8 << ia);
                expect.insert(class8(p | q1));
                expect.insert(class8(p | q2));
            }
            if &expect == classes {
                let i = [i1, rest_i[0], rest_i[1], rest_i[2]];
                let j = [j1, perm[0], perm[1], perm[2]];
                return Some((i, j));
            }
        }
    }
    None
}

/// Witness that a singular-containing wholly even system has the predicted
/// partition shape. All labels are branch-point indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Genus 3, rank 3: `[∅]`, `[{i₁i₂i₃i₄}]` and six pair-pair mixtures.
    Rank3 { system: Vec<Characteristic>, i: [usize; 4], j: [usize; 4] },
    /// Genus 3, rank 2: the matching `{iₖ, jₖ}` and the three systems.
    Rank2 { pairs: [(usize, usize); 4], a1: Vec<Characteristic>, a2: Vec<Characteristic>, a3: Vec<Characteristic> },
    /// Genus 4, rank 4: pivots `κ₁ < κ₂` and the eight remaining labels.
    Rank4 { system: Vec<Characteristic>, kappa: (usize, usize), i: [usize; 4], j: [usize; 4] },
}

#[derive(Clone, Debug, Serialize)]
pub struct KappaCount {
    pub kappa1: usize,
    pub kappa2: usize,
    pub systems: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct StructureReport {
    pub genus: usize,
    pub rank: usize,
    pub systems_checked: usize,
    pub witnesses: Vec<Witness>,
    pub kappa_census: Vec<KappaCount>,
}

fn sorted(mut v: Vec<Characteristic>) -> Vec<Characteristic> {
    v.sort();
    v
}

/// Characteristics of the rank-3 genus-3 pattern for given `i`, `j`.
pub fn rank3_pattern(i: [usize; 4], j: [usize; 4]) -> Result<Vec<Characteristic>> {
    let sets: [[usize; 4]; 7] = [
        [i[0], i[1], i[2], i[3]],
        [i[0], i[1], j[0], j[1]],
        [i[0], i[1], j[2], j[3]],
        [i[0], i[2], j[0], j[2]],
        [i[0], i[2], j[1], j[3]],
        [i[0], i[3], j[0], j[3]],
        [i[0], i[3], j[1], j[2]],
    ];
    let mut out = vec![char_of_indices(3, &[])?];
    for s in sets {
        out.push(char_of_indices(3, &s)?);
    }
    Ok(sorted(out))
}

/// Characteristics of the rank-4 genus-4 pattern.
pub fn rank4_pattern(kappa: (usize, usize), i: [usize; 4], j: [usize; 4]) -> Result<Vec<Characteristic>> {
    let core: [[usize; 4]; 7] = [
        [i[0], i[1], i[2], i[3]],
        [i[0], i[1], j[0], j[1]],
        [i[0], i[1], j[2], j[3]],
        [i[0], i[2], j[0], j[2]],
        [i[0], i[2], j[1], j[3]],
        [i[0], i[3], j[0], j[3]],
        [i[0], i[3], j[1], j[2]],
    ];
    let mut out = vec![char_of_indices(4, &[kappa.0])?, char_of_indices(4, &[kappa.1])?];
    for k in [kappa.0, kappa.1] {
        for s in core {
            let mut v = s.to_vec();
            v.push(k);
            out.push(char_of_indices(4, &v)?);
        }
    }
    Ok(sorted(out))
}

/// The three systems of the rank-2 genus-3 pattern for pairs `(iₖ, jₖ)`.
pub fn rank2_pattern(
    pairs: [(usize, usize); 4],
) -> Result<(Vec<Characteristic>, Vec<Characteristic>, Vec<Characteristic>)> {
    let [(i1, j1), (i2, j2), (i3, j3), (i4, j4)] = pairs;
    let c = |s: &[usize]| char_of_indices(3, s);
    let a1 = vec![c(&[])?, c(&[i1, j1, i2, j2])?, c(&[i1, j1, i3, j3])?, c(&[i1, j1, i4, j4])?];
    let a2 = vec![c(&[i1, i2, i3, i4])?, c(&[i1, i2, j3, j4])?, c(&[i1, j2, i3, j4])?, c(&[i1, j2, j3, i4])?];
    let a3 = vec![c(&[i1, i2, i3, j4])?, c(&[i1, i2, j3, i4])?, c(&[i1, j2, i3, i4])?, c(&[j1, i2, i3, i4])?];
    Ok((sorted(a1), sorted(a2), sorted(a3)))
}

fn witness_rank3(sys: &GoepelSystem) -> Result<Witness> {
    let labels: [usize; 8] = std::array::from_fn(|k| k);
    let mut classes = BTreeSet::new();
    for c in sys.elements() {
        let p = partition_of_char(c)?;
        if p.multiplicity() == 2 {
            continue;
        }
        let m = local_mask(&labels, p.indices()).ok_or_else(|| mismatch(sys))?;
        classes.insert(class8(m));
    }
    let (ip, jp) = match_seven(&classes).ok_or_else(|| mismatch(sys))?;
    let (i, j) = (ip.map(|p| labels[p]), jp.map(|p| labels[p]));
    if rank3_pattern(i, j)? != sys.elements() {
        return Err(mismatch(sys));
    }
    Ok(Witness::Rank3 { system: sys.elements().to_vec(), i, j })
}

fn witness_rank4(sys: &GoepelSystem) -> Result<Witness> {
    let mut kappas = Vec::new();
    let mut nonsingular = Vec::new();
    for c in sys.elements() {
        let p = partition_of_char(c)?;
        if p.multiplicity() == 2 {
            kappas.push(p.indices().iter().next().ok_or_else(|| mismatch(sys))?);
        } else {
            nonsingular.push(p);
        }
    }
    if kappas.len() != 2 {
        return Err(mismatch(sys));
    }
    kappas.sort();
    let (k1, k2) = (kappas[0], kappas[1]);
    let rest: Vec<usize> = (0..10).filter(|&l| l != k1 && l != k2).collect();
    let labels: [usize; 8] = rest.try_into().expect("eight labels");
    let mut classes: BTreeMap<u8, usize> = BTreeMap::new();
    for p in nonsingular {
        let side = if p.indices().contains(k1) { p.indices() } else { p.complement() };
        if side.contains(k2) {
            return Err(mismatch(sys));
        }
        let m = local_mask(&labels, IndexSet(side.0 & !(1 << k1))).ok_or_else(|| mismatch(sys))?;
        *classes.entry(class8(m)).or_default() += 1;
    }
    if classes.values().any(|&n| n != 2) {
        return Err(mismatch(sys));
    }
    let keys: BTreeSet<u8> = classes.keys().copied().collect();
    let (ip, jp) = match_seven(&keys).ok_or_else(|| mismatch(sys))?;
    let (i, j) = (ip.map(|p| labels[p]), jp.map(|p| labels[p]));
    if rank4_pattern((k1, k2), i, j)? != sys.elements() {
        return Err(mismatch(sys));
    }
    Ok(Witness::Rank4 { system: sys.elements().to_vec(), kappa: (k1, k2), i, j })
}

/// All 105 perfect matchings of `{0..7}`, each as four pairs `(a, b)` with
/// `a < b`, pairs ordered by first element.
pub fn perfect_matchings_8() -> Vec<[(usize, usize); 4]> {
    fn rec(rest: &[usize], acc: &mut Vec<(usize, usize)>, out: &mut Vec<[(usize, usize); 4]>) {
        if rest.is_empty() {
            out.push(acc.clone().try_into().expect("four pairs"));
            return;
        }
        let a = rest[0];
        for k in 1..rest.len() {
            let b = rest[k];
            let remaining: Vec<usize> =
                rest.iter().enumerate().filter(|&(t, _)| t != 0 && t != k).map(|(_, &x)| x).collect();
            acc.push((a, b));
            rec(&remaining, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    rec(&(0..8).collect::<Vec<_>>(), &mut Vec::new(), &mut out);
    out
}

fn witness_rank2(systems: &[GoepelSystem]) -> Result<Option<Witness>> {
    let empty = char_of_indices(3, &[])?;
    let Some(a1) = systems.iter().find(|s| s.contains(&empty)) else {
        return Ok(None);
    };
    let others: Vec<&GoepelSystem> = systems.iter().filter(|s| !s.contains(&empty)).collect();
    let fail = || Error::Verification(format!("rank-2 collection containing {a1} does not match"));
    if others.len() != 2 {
        return Err(fail());
    }
    for m in perfect_matchings_8() {
        for orient in 0u8..16 {
            let pairs: [(usize, usize); 4] = std::array::from_fn(|k| {
                let (a, b) = m[k];
                if (orient >> k) & 1 == 1 {
                    (b, a)
                } else {
                    (a, b)
                }
            });
            let (p1, p2, p3) = rank2_pattern(pairs)?;
            if p1 != a1.elements() {
                break;
            }
            if p2 == others[0].elements() && p3 == others[1].elements()
                || p2 == others[1].elements() && p3 == others[0].elements()
            {
                return Ok(Some(Witness::Rank2 { pairs, a1: p1, a2: p2, a3: p3 }));
            }
        }
    }
    Err(fail())
}

fn mismatch(sys: &GoepelSystem) -> Error {
    Error::Verification(format!("system {sys} does not match the predicted partition pattern"))
}

/// Checks the partition shape of every singular-containing wholly even
/// system and extracts witnesses.
pub fn verify_structure(g: usize, r: usize, groups: &[GoepelGroup]) -> Result<StructureReport> {
    check_supported(g, r)?;
    let per_group = wholly_even_systems(groups)?;
    let mut witnesses = Vec::new();
    let mut checked = 0;
    match (g, r) {
        (3, 3) | (4, 4) => {
            let singular: Vec<&GoepelSystem> =
                per_group.iter().flatten().filter(|s| s.profile().singular() > 0).collect();
            checked = singular.len();
            let found: Vec<Result<Witness>> =
                singular.par_iter().map(|s| if g == 3 { witness_rank3(s) } else { witness_rank4(s) }).collect();
            for w in found {
                witnesses.push(w?);
            }
        }
        _ => {
            let found: Vec<Result<Option<Witness>>> = per_group.par_iter().map(|sys| witness_rank2(sys)).collect();
            for w in found.into_iter() {
                if let Some(w) = w? {
                    checked += 1;
                    witnesses.push(w);
                }
            }
        }
    }
    let mut kappa: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for w in &witnesses {
        if let Witness::Rank4 { kappa: k, .. } = w {
            *kappa.entry(*k).or_default() += 1;
        }
    }
    let kappa_census =
        kappa.into_iter().map(|((kappa1, kappa2), systems)| KappaCount { kappa1, kappa2, systems }).collect();
    Ok(StructureReport { genus: g, rank: r, systems_checked: checked, witnesses, kappa_census })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_errors() {
        assert!(matches!(enumerate_groups(3, 4), Err(Error::Domain(_))));
        assert!(matches!(enumerate_groups(3, 0), Err(Error::Domain(_))));
        assert!(matches!(classify_wholly_even(2, 2, &[]), Err(Error::Domain(_))));
    }

    #[test]
    fn genus_two_matches_brute_force() {
        for r in 1..=2 {
            let fast: Vec<Vec<Characteristic>> =
                enumerate_groups(2, r).unwrap().iter().map(|g| g.elements().to_vec()).collect();
            let slow = enumerate_groups_brute_force(2, r).unwrap();
            assert_eq!(fast, slow, "rank {r}");
        }
        assert_eq!(enumerate_groups(2, 2).unwrap().len(), 15);
        assert_eq!(enumerate_groups(2, 1).unwrap().len(), 15);
    }

    #[test]
    fn small_counts() {
        assert_eq!(enumerate_groups(1, 1).unwrap().len(), 3);
        assert_eq!(enumerate_groups(3, 1).unwrap().len(), 63);
        assert_eq!(enumerate_groups(3, 3).unwrap().len(), 135);
        assert_eq!(enumerate_groups(3, 2).unwrap().len(), 315);
    }

    #[test]
    fn system_counts_match_closed_forms() {
        for (g, r) in [(2, 1), (2, 2), (3, 1), (3, 2), (3, 3)] {
            let expected = expected_system_counts(g, r);
            for grp in enumerate_groups(g, r).unwrap() {
                grp.check().unwrap();
                let systems = systems_of_group(&grp).unwrap();
                assert_eq!(systems.len(), 1 << (2 * g - r));
                let count = |t| systems.iter().filter(|s| s.system_type() == t).count();
                let got = (count(SystemType::WhollyEven), count(SystemType::WhollyOdd), count(SystemType::Mixed));
                assert_eq!(got, expected, "({g},{r})");
            }
        }
        assert_eq!(expected_system_counts(3, 3), (1, 0, 7));
        for (g, r, n) in [(1, 1, 3), (2, 1, 15), (2, 2, 15), (3, 1, 63), (3, 2, 315), (3, 3, 135), (4, 4, 2295)] {
            assert_eq!(expected_group_count(g, r), n);
        }
        assert_eq!(expected_system_counts(3, 2), (3, 1, 12));
    }

    #[test]
    fn systems_are_syzygetic_in_threes() {
        for grp in enumerate_groups(3, 3).unwrap().iter().take(20) {
            for sys in systems_of_group(grp).unwrap() {
                for (p, q, r) in sys.elements().iter().tuple_combinations() {
                    assert_eq!(crate::charkit::triple_relation(p, q, r).unwrap(), 0);
                }
            }
        }
    }

    #[test]
    fn genus_three_census_and_structure() {
        let g33 = enumerate_groups(3, 3).unwrap();
        let c = classify_wholly_even(3, 3, &g33).unwrap();
        assert_eq!(c.systems["8[I0]"], 105);
        assert_eq!(c.systems["1[I2]+7[I0]"], 30);
        let s = verify_structure(3, 3, &g33).unwrap();
        assert_eq!(s.witnesses.len(), 30);

        let g32 = enumerate_groups(3, 2).unwrap();
        let c = classify_wholly_even(3, 2, &g32).unwrap();
        assert_eq!(c.collections["3(4[I0])"], 210);
        assert_eq!(c.collections["(1[I2]+3[I0])+2(4[I0])"], 105);
        let s = verify_structure(3, 2, &g32).unwrap();
        assert_eq!(s.witnesses.len(), 105);
        let matchings: BTreeSet<Vec<(usize, usize)>> = s
            .witnesses
            .iter()
            .map(|w| match w {
                Witness::Rank2 { pairs, .. } => {
                    let mut v: Vec<_> = pairs.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
                    v.sort();
                    v
                }
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(matchings.len(), 105);
    }

    #[test]
    fn genus_four_census_and_structure() {
        let groups = enumerate_groups(4, 4).unwrap();
        assert_eq!(groups.len(), 2295);
        let c = classify_wholly_even(4, 4, &groups).unwrap();
        assert_eq!(c.systems.get("16[I0]"), Some(&945));
        assert_eq!(c.systems.get("2[I2]+14[I0]"), Some(&1350));
        assert_eq!(c.systems.len(), 2);
        let s = verify_structure(4, 4, &groups).unwrap();
        assert_eq!(s.witnesses.len(), 1350);
        assert_eq!(s.kappa_census.len(), 45);
        assert!(s.kappa_census.iter().all(|k| k.systems == 30));
    }

    #[test]
    fn two_hundred_ten_splits_form_thirty_collections() {
        // each {i1,i2|i3,i4} split, read as the class of {i1,i2,i3,i4}
        // together with a pairing, sits in exactly one of the 30 systems
        let g33 = enumerate_groups(3, 3).unwrap();
        let report = verify_structure(3, 3, &g33).unwrap();
        let mut incidences: BTreeMap<Characteristic, usize> = BTreeMap::new();
        for w in &report.witnesses {
            let Witness::Rank3 { system, .. } = w else { unreachable!() };
            for c in system.iter().filter(|c| partition_of_char(c).unwrap().multiplicity() == 0) {
                *incidences.entry(*c).or_default() += 1;
            }
        }
        assert_eq!(incidences.len(), 35);
        assert_eq!(incidences.values().sum::<usize>(), 210);
        assert!(incidences.values().all(|&n| n == 6));
    }

    #[test]
    fn pattern_matcher_rejects_foreign_sets() {
        let mut classes: BTreeSet<u8> = BTreeSet::new();
        for m in [0b0000_1111u8, 0b0011_0011, 0b0101_0101, 0b0110_0110, 0b1001_1001, 0b1010_0101, 0b0001_1111] {
            classes.insert(class8(m));
        }
        assert!(match_seven(&classes).is_none());
    }

    #[test]
    fn perfect_matching_count() {
        let m = perfect_matchings_8();
        assert_eq!(m.len(), 105);
        let distinct: HashSet<_> = m.iter().collect();
        assert_eq!(distinct.len(), 105);
    }
}
