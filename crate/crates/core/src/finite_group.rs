//! Finite groups as Cayley tables, with exact complex-rational measures.
//!
//! Haar measure on a finite group is counting measure, every map between
//! finite sets is proper, and pushforward is a fiber sum. All arithmetic is
//! exact, so this backend serves as the oracle for the general pushforward
//! laws.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};

/// Exact complex rational.
pub type CRational = Complex<BigRational>;

pub fn crational(re: (i64, i64), im: (i64, i64)) -> CRational {
    Complex::new(
        BigRational::new(BigInt::from(re.0), BigInt::from(re.1)),
        BigRational::new(BigInt::from(im.0), BigInt::from(im.1)),
    )
}

pub fn czero() -> CRational {
    Complex::new(BigRational::zero(), BigRational::zero())
}

pub fn cone() -> CRational {
    Complex::new(BigRational::one(), BigRational::zero())
}

/// Lossy conversion for reporting.
pub fn crational_to_f64(z: &CRational) -> (f64, f64) {
    use num_traits::ToPrimitive;
    (z.re.to_f64().unwrap_or(f64::NAN), z.im.to_f64().unwrap_or(f64::NAN))
}

#[derive(Clone, PartialEq, Eq)]
pub struct FinGroup {
    labels: Vec<String>,
    table: Vec<usize>,
    identity: usize,
    inverse: Vec<usize>,
}

impl fmt::Debug for FinGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FinGroup(order {})", self.order())
    }
}

/// Sorted element indices of a subgroup.
pub type Subgroup = Vec<usize>;

impl FinGroup {
    /// Builds a group from a row-major Cayley table, checking the group axioms
    /// (exhaustively up to order 64, on a fixed sample of triples above).
    pub fn new(table: Vec<Vec<usize>>, labels: Option<Vec<String>>) -> Result<FinGroup> {
        let n = table.len();
        if n == 0 {
            return Err(Error::Parse("empty Cayley table".into()));
        }
        if table.iter().any(|r| r.len() != n || r.iter().any(|&v| v >= n)) {
            return Err(Error::Parse("Cayley table must be n×n with entries < n".into()));
        }
        let labels = match labels {
            Some(l) if l.len() == n => l,
            Some(l) => return Err(Error::DimensionMismatch { expected: n, got: l.len() }),
            None => (0..n).map(|i| i.to_string()).collect(),
        };
        let flat: Vec<usize> = table.into_iter().flatten().collect();
        let at = |a: usize, b: usize| flat[a * n + b];
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| at(e, g) == g && at(g, e) == g))
            .ok_or_else(|| Error::Parse("Cayley table has no identity".into()))?;
        let mut inverse = vec![0; n];
        for g in 0..n {
            inverse[g] = (0..n)
                .find(|&h| at(g, h) == identity && at(h, g) == identity)
                .ok_or_else(|| Error::Parse(format!("element {g} has no inverse")))?;
        }
        let assoc = |a: usize, b: usize, c: usize| at(at(a, b), c) == at(a, at(b, c));
        if n <= 64 {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        if !assoc(a, b, c) {
                            return Err(Error::Parse(format!("not associative at ({a},{b},{c})")));
                        }
                    }
                }
            }
        } else {
            let mut s: u64 = 0x9e37_79b9_7f4a_7c15;
            for _ in 0..20_000 {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let (a, b, c) = ((s >> 11) as usize % n, (s >> 27) as usize % n, (s >> 43) as usize % n);
                if !assoc(a, b, c) {
                    return Err(Error::Parse(format!("not associative at ({a},{b},{c})")));
                }
            }
        }
        Ok(FinGroup { labels, table: flat, identity, inverse })
    }

    pub fn order(&self) -> usize {
        self.labels.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order() + b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Closure of `gens` under multiplication.
    pub fn subgroup(&self, gens: &[usize]) -> Subgroup {
        let mut set = BTreeSet::from([self.identity]);
        let mut frontier = vec![self.identity];
        while let Some(g) = frontier.pop() {
            for &s in gens {
                let h = self.mul(g, s);
                if set.insert(h) {
                    frontier.push(h);
                }
            }
        }
        set.into_iter().collect()
    }

    pub fn is_subgroup(&self, h: &[usize]) -> bool {
        let set: BTreeSet<usize> = h.iter().copied().collect();
        set.contains(&self.identity)
            && h.iter().all(|&a| set.contains(&self.inv(a)) && h.iter().all(|&b| set.contains(&self.mul(a, b))))
    }

    /// Left cosets `gH`, ordered by smallest element; the representative of
    /// each coset is its smallest index.
    pub fn cosets(&self, h: &[usize]) -> Result<Cosets> {
        if !self.is_subgroup(h) {
            return Err(Error::NotSubgroup);
        }
        let n = self.order();
        let mut assignment = vec![usize::MAX; n];
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for g in 0..n {
            if assignment[g] != usize::MAX {
                continue;
            }
            let mut class: Vec<usize> = h.iter().map(|&x| self.mul(g, x)).collect();
            class.sort_unstable();
            for &c in &class {
                assignment[c] = classes.len();
            }
            classes.push(class);
        }
        let projection = FinMap::new(n, classes.len(), assignment)?;
        Ok(Cosets { classes, projection })
    }

    pub fn is_normal(&self, n: &[usize]) -> bool {
        let set: BTreeSet<usize> = n.iter().copied().collect();
        (0..self.order()).all(|g| n.iter().all(|&x| set.contains(&self.mul(self.mul(g, x), self.inv(g)))))
    }

    /// Quotient group on the cosets of a normal subgroup, with its projection.
    pub fn quotient_group(&self, n: &[usize]) -> Result<(FinGroup, Cosets)> {
        if !self.is_subgroup(n) {
            return Err(Error::NotSubgroup);
        }
        if !self.is_normal(n) {
            return Err(Error::NotNormal);
        }
        let cosets = self.cosets(n)?;
        let k = cosets.classes.len();
        let reps: Vec<usize> = cosets.classes.iter().map(|c| c[0]).collect();
        let table: Vec<Vec<usize>> = (0..k)
            .map(|i| (0..k).map(|j| cosets.projection.apply(self.mul(reps[i], reps[j]))).collect())
            .collect();
        let labels = cosets
            .classes
            .iter()
            .map(|c| format!("{}N", self.labels[c[0]]))
            .collect();
        Ok((FinGroup::new(table, Some(labels))?, cosets))
    }

    pub fn element_order(&self, g: usize) -> usize {
        let mut x = g;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    /// Sorted multiset of element orders, an isomorphism invariant.
    pub fn order_profile(&self) -> Vec<usize> {
        let mut v: Vec<usize> = (0..self.order()).map(|g| self.element_order(g)).collect();
        v.sort_unstable();
        v
    }

    /// Plain-text Cayley format: `|G|`, then `|G|` rows of indices, then an
    /// optional `labels` line followed by one label per line.
    pub fn parse_cayley(text: &str) -> Result<FinGroup> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let n: usize = lines
            .next()
            .ok_or_else(|| Error::Parse("missing order line".into()))?
            .parse()
            .map_err(|_| Error::Parse("first line must be the group order".into()))?;
        let mut table = Vec::with_capacity(n);
        for r in 0..n {
            let line = lines.next().ok_or_else(|| Error::Parse(format!("missing table row {r}")))?;
            let row = line
                .split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|_| Error::Parse(format!("row {r}: bad index {t:?}"))))
                .collect::<Result<Vec<_>>>()?;
            table.push(row);
        }
        let labels = match lines.next() {
            None => None,
            Some("labels") => {
                let l: Vec<String> = lines.map(str::to_string).collect();
                Some(l)
            }
            Some(other) => return Err(Error::Parse(format!("unexpected line {other:?} after table"))),
        };
        FinGroup::new(table, labels)
    }

    pub fn to_cayley_text(&self) -> String {
        let n = self.order();
        let mut s = format!("{n}\n");
        for a in 0..n {
            let row: Vec<String> = (0..n).map(|b| self.mul(a, b).to_string()).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s.push_str("labels\n");
        for l in &self.labels {
            s.push_str(l);
            s.push('\n');
        }
        s
    }

    /// Group generated by permutations of `0..degree`, elements sorted with
    /// the identity first and labelled in 1-based cycle notation.
    pub fn from_permutations(degree: usize, gens: &[Vec<usize>]) -> Result<FinGroup> {
        for g in gens {
            let mut seen = g.clone();
            seen.sort_unstable();
            if g.len() != degree || seen != (0..degree).collect::<Vec<_>>() {
                return Err(Error::Parse(format!("not a permutation of degree {degree}: {g:?}")));
            }
        }
        let id: Vec<usize> = (0..degree).collect();
        let compose = |p: &[usize], q: &[usize]| -> Vec<usize> { (0..degree).map(|i| p[q[i]]).collect() };
        let mut set = BTreeSet::from([id.clone()]);
        let mut frontier = vec![id.clone()];
        while let Some(p) = frontier.pop() {
            for g in gens {
                let r = compose(&p, g);
                if set.insert(r.clone()) {
                    frontier.push(r);
                }
            }
        }
        let elems: Vec<Vec<usize>> = set.into_iter().collect();
        let index: HashMap<&Vec<usize>, usize> = elems.iter().enumerate().map(|(i, p)| (p, i)).collect();
        let table = elems
            .iter()
            .map(|p| elems.iter().map(|q| index[&compose(p, q)]).collect())
            .collect();
        let labels = elems.iter().map(|p| cycle_label(p)).collect();
        FinGroup::new(table, Some(labels))
    }

    pub fn cyclic(n: usize) -> Result<FinGroup> {
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        FinGroup::new(table, None)
    }

    pub fn symmetric(n: usize) -> Result<FinGroup> {
        let mut gens = vec![];
        if n >= 2 {
            let mut t: Vec<usize> = (0..n).collect();
            t.swap(0, 1);
            gens.push(t);
            gens.push((0..n).map(|i| (i + 1) % n).collect());
        }
        FinGroup::from_permutations(n, &gens)
    }

    pub fn alternating(n: usize) -> Result<FinGroup> {
        // 3-cycles (1 2 k) generate A_n
        let gens: Vec<Vec<usize>> = (2..n)
            .map(|k| {
                let mut p: Vec<usize> = (0..n).collect();
                p[0] = 1;
                p[1] = k;
                p[k] = 0;
                p
            })
            .collect();
        FinGroup::from_permutations(n, &gens)
    }

    /// Symmetries of the square acting on its vertices.
    pub fn dihedral4() -> Result<FinGroup> {
        FinGroup::from_permutations(4, &[vec![1, 2, 3, 0], vec![0, 3, 2, 1]])
    }

    /// Quaternion group as the right-regular action of ⟨i, j⟩ on its eight elements.
    pub fn quaternion() -> Result<FinGroup> {
        // elements ±1, ±i, ±j, ±k as (sign, unit) with unit 0..4 = 1, i, j, k
        let unit_mul = |a: usize, b: usize| -> (i8, usize) {
            const T: [[(i8, usize); 4]; 4] = [
                [(1, 0), (1, 1), (1, 2), (1, 3)],
                [(1, 1), (-1, 0), (1, 3), (-1, 2)],
                [(1, 2), (-1, 3), (-1, 0), (1, 1)],
                [(1, 3), (1, 2), (-1, 1), (-1, 0)],
            ];
            T[a][b]
        };
        let idx = |s: i8, u: usize| u * 2 + usize::from(s < 0);
        let table = (0..8)
            .map(|a| {
                (0..8)
                    .map(|b| {
                        let (sa, ua) = (if a % 2 == 0 { 1 } else { -1 }, a / 2);
                        let (sb, ub) = (if b % 2 == 0 { 1 } else { -1 }, b / 2);
                        let (s, u) = unit_mul(ua, ub);
                        idx(s * sa * sb, u)
                    })
                    .collect()
            })
            .collect();
        let labels = ["1", "-1", "i", "-i", "j", "-j", "k", "-k"].iter().map(|s| s.to_string()).collect();
        FinGroup::new(table, Some(labels))
    }

    /// Built-in groups by name: `Z/n`, `D4`, `Q8`, `A4`, `S4`.
    pub fn catalog(name: &str) -> Result<FinGroup> {
        if let Some(n) = name.strip_prefix("Z/") {
            let n: usize = n.parse().map_err(|_| Error::UnknownGroup(name.into()))?;
            if n == 0 {
                return Err(Error::UnknownGroup(name.into()));
            }
            return FinGroup::cyclic(n);
        }
        match name {
            "D4" => FinGroup::dihedral4(),
            "Q8" => FinGroup::quaternion(),
            "A4" => FinGroup::alternating(4),
            "S4" => FinGroup::symmetric(4),
            _ => Err(Error::UnknownGroup(name.into())),
        }
    }

    /// Looks up elements by label, accepting any rendering of a permutation
    /// in cycle notation.
    pub fn elements_by_label(&self, labels: &[&str]) -> Result<Vec<usize>> {
        labels
            .iter()
            .map(|l| {
                let canon = canonical_cycle_label(l).unwrap_or_else(|| l.to_string());
                self.index_of(&canon)
                    .or_else(|| self.index_of(l))
                    .ok_or_else(|| Error::Parse(format!("unknown element {l:?}")))
            })
            .collect()
    }
}

fn cycle_label(p: &[usize]) -> String {
    let mut seen = vec![false; p.len()];
    let mut s = String::new();
    for start in 0..p.len() {
        if seen[start] || p[start] == start {
            continue;
        }
        s.push('(');
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            s.push_str(&(i + 1).to_string());
            i = p[i];
        }
        s.push(')');
    }
    if s.is_empty() {
        "e".into()
    } else {
        s
    }
}

/// Re-renders a cycle-notation string in the canonical labelling, e.g.
/// `(34)(21)` → `(12)(34)`.
fn canonical_cycle_label(src: &str) -> Option<String> {
    let s = src.trim();
    if s == "e" || s == "()" {
        return Some("e".into());
    }
    if !s.starts_with('(') {
        return None;
    }
    let mut perm: BTreeMap<usize, usize> = BTreeMap::new();
    for cyc in s.split(')').filter(|c| !c.is_empty()) {
        let digits: Vec<usize> = cyc
            .trim_start_matches('(')
            .chars()
            .filter(|c| !c.is_whitespace() && *c != ',')
            .map(|c| c.to_digit(10).map(|d| d as usize))
            .collect::<Option<Vec<_>>>()?;
        if digits.iter().any(|&d| d == 0) {
            return None;
        }
        for w in 0..digits.len() {
            perm.insert(digits[w] - 1, digits[(w + 1) % digits.len()] - 1);
        }
    }
    let n = perm.keys().chain(perm.values()).max().map_or(0, |m| m + 1);
    let p: Vec<usize> = (0..n).map(|i| *perm.get(&i).unwrap_or(&i)).collect();
    Some(cycle_label(&p))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cosets {
    pub classes: Vec<Vec<usize>>,
    pub projection: FinMap,
}

impl Cosets {
    pub fn representatives(&self) -> Vec<usize> {
        self.classes.iter().map(|c| c[0]).collect()
    }
}

/// A total map between finite index sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinMap {
    source_size: usize,
    target_size: usize,
    assignment: Vec<usize>,
}

impl FinMap {
    pub fn new(source_size: usize, target_size: usize, assignment: Vec<usize>) -> Result<FinMap> {
        if assignment.len() != source_size {
            return Err(Error::DimensionMismatch { expected: source_size, got: assignment.len() });
        }
        if assignment.iter().any(|&t| t >= target_size) {
            return Err(Error::Parse("map assigns outside its target".into()));
        }
        Ok(FinMap { source_size, target_size, assignment })
    }

    pub fn identity(n: usize) -> FinMap {
        FinMap { source_size: n, target_size: n, assignment: (0..n).collect() }
    }

    pub fn constant(source_size: usize, target_size: usize, t: usize) -> Result<FinMap> {
        FinMap::new(source_size, target_size, vec![t; source_size])
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, source_size: usize, target_size: usize) -> FinMap {
        let assignment = (0..source_size).map(|_| rng.random_range(0..target_size)).collect();
        FinMap { source_size, target_size, assignment }
    }

    /// Random surjection (requires `target_size ≤ source_size`).
    pub fn random_surjection<R: Rng + ?Sized>(rng: &mut R, source_size: usize, target_size: usize) -> FinMap {
        assert!(target_size >= 1 && target_size <= source_size);
        let mut assignment: Vec<usize> = (0..target_size).collect();
        assignment.extend((target_size..source_size).map(|_| rng.random_range(0..target_size)));
        for i in (1..source_size).rev() {
            let j = rng.random_range(0..=i);
            assignment.swap(i, j);
        }
        FinMap { source_size, target_size, assignment }
    }

    pub fn source_size(&self) -> usize {
        self.source_size
    }

    pub fn target_size(&self) -> usize {
        self.target_size
    }

    pub fn apply(&self, s: usize) -> usize {
        self.assignment[s]
    }

    /// `self` after `first`: `x ↦ self(first(x))`.
    pub fn after(&self, first: &FinMap) -> Result<FinMap> {
        if first.target_size != self.source_size {
            return Err(Error::DimensionMismatch { expected: self.source_size, got: first.target_size });
        }
        Ok(FinMap {
            source_size: first.source_size,
            target_size: self.target_size,
            assignment: first.assignment.iter().map(|&m| self.assignment[m]).collect(),
        })
    }

    /// Image of a set of source indices.
    pub fn image(&self, set: &BTreeSet<usize>) -> BTreeSet<usize> {
        set.iter().map(|&s| self.assignment[s]).collect()
    }
}

/// Complex rational weights on a finite index set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinMeasure {
    pub weights: Vec<CRational>,
}

impl FinMeasure {
    pub fn zero(n: usize) -> FinMeasure {
        FinMeasure { weights: vec![czero(); n] }
    }

    pub fn point_mass(n: usize, at: usize) -> FinMeasure {
        let mut m = FinMeasure::zero(n);
        m.weights[at] = cone();
        m
    }

    /// Counting measure (the Haar measure of a finite group).
    pub fn counting(n: usize) -> FinMeasure {
        FinMeasure { weights: vec![cone(); n] }
    }

    /// Random complex rational weights; about a quarter of the entries are zero.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n: usize) -> FinMeasure {
        let weights = (0..n)
            .map(|_| {
                if rng.random_range(0..4) == 0 {
                    czero()
                } else {
                    crational(
                        (rng.random_range(-12..=12), rng.random_range(1..=7)),
                        (rng.random_range(-5..=5), rng.random_range(1..=5)),
                    )
                }
            })
            .collect();
        FinMeasure { weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn support(&self) -> BTreeSet<usize> {
        self.weights.iter().enumerate().filter(|(_, w)| !w.is_zero()).map(|(i, _)| i).collect()
    }

    /// `Σ_s f(s) μ(s)`.
    pub fn pair(&self, f: &[CRational]) -> CRational {
        self.weights.iter().zip(f).fold(czero(), |acc, (w, v)| acc + w * v)
    }

    pub fn total_mass(&self) -> CRational {
        self.weights.iter().fold(czero(), |acc, w| acc + w)
    }

    pub fn scaled(&self, a: &CRational) -> FinMeasure {
        FinMeasure { weights: self.weights.iter().map(|w| w * a).collect() }
    }

    pub fn add(&self, other: &FinMeasure) -> FinMeasure {
        FinMeasure { weights: self.weights.iter().zip(&other.weights).map(|(a, b)| a + b).collect() }
    }
}

/// Fiber sums: `p_*(μ)(t) = Σ_{p(s) = t} μ(s)`.
pub fn fin_pushforward(mu: &FinMeasure, p: &FinMap) -> Result<FinMeasure> {
    if mu.len() != p.source_size {
        return Err(Error::DimensionMismatch { expected: p.source_size, got: mu.len() });
    }
    let mut out = FinMeasure::zero(p.target_size);
    for (s, w) in mu.weights.iter().enumerate() {
        if !w.is_zero() {
            out.weights[p.apply(s)] += w;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn s4() -> FinGroup {
        FinGroup::catalog("S4").unwrap()
    }

    #[test]
    fn klein_four_in_s4() {
        let g = s4();
        assert_eq!(g.order(), 24);
        let gens = g.elements_by_label(&["(12)(34)", "(13)(24)"]).unwrap();
        let v4 = g.subgroup(&gens);
        assert_eq!(v4.len(), 4);
        assert!(g.is_normal(&v4));
        // orbit-closure oracle: V4 is exactly the identity plus the three double transpositions
        let want: BTreeSet<usize> = g.elements_by_label(&["e", "(12)(34)", "(13)(24)", "(14)(23)"]).unwrap().into_iter().collect();
        assert_eq!(v4.iter().copied().collect::<BTreeSet<_>>(), want);
    }

    #[test]
    fn empty_generators_give_trivial_subgroup() {
        let g = s4();
        assert_eq!(g.subgroup(&[]), vec![g.identity()]);
    }

    #[test]
    fn cyclic_subgroup_of_z8() {
        let g = FinGroup::cyclic(8).unwrap();
        assert_eq!(g.subgroup(&[2]), vec![0, 2, 4, 6]);
    }

    #[test]
    fn coset_counts() {
        let g = s4();
        let a4 = g.subgroup(&g.elements_by_label(&["(123)", "(12)(34)"]).unwrap());
        assert_eq!(a4.len(), 12);
        assert_eq!(g.cosets(&a4).unwrap().classes.len(), 2);
        let v4 = g.subgroup(&g.elements_by_label(&["(12)(34)", "(13)(24)"]).unwrap());
        let c = g.cosets(&v4).unwrap();
        assert_eq!(c.classes.len(), 6);
        // exhaustive partition oracle
        let mut all: Vec<usize> = c.classes.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..24).collect::<Vec<_>>());
        assert_eq!(g.cosets(&[g.identity()]).unwrap().classes.len(), 24);
    }

    #[test]
    fn non_subgroups_and_non_normal_subgroups_are_rejected() {
        let g = s4();
        let t = g.elements_by_label(&["e", "(12)"]).unwrap();
        assert!(g.is_subgroup(&t));
        assert!(matches!(g.quotient_group(&t), Err(Error::NotNormal)));
        let bad = g.elements_by_label(&["e", "(123)"]).unwrap();
        assert!(matches!(g.cosets(&bad), Err(Error::NotSubgroup)));
    }

    #[test]
    fn quotients_by_order_profile() {
        let g = s4();
        let v4 = g.subgroup(&g.elements_by_label(&["(12)(34)", "(13)(24)"]).unwrap());
        let (q, _) = g.quotient_group(&v4).unwrap();
        assert_eq!(q.order_profile(), vec![1, 2, 2, 2, 3, 3]);
        let all: Vec<usize> = (0..24).collect();
        assert_eq!(g.quotient_group(&all).unwrap().0.order(), 1);
        let a4 = FinGroup::catalog("A4").unwrap();
        let v = a4.subgroup(&a4.elements_by_label(&["(12)(34)", "(13)(24)"]).unwrap());
        assert_eq!(a4.quotient_group(&v).unwrap().0.order_profile(), vec![1, 3, 3]);
    }

    #[test]
    fn catalog_orders() {
        for (name, n) in [("Z/8", 8), ("D4", 8), ("Q8", 8), ("A4", 12), ("S4", 24)] {
            assert_eq!(FinGroup::catalog(name).unwrap().order(), n, "{name}");
        }
        assert_eq!(FinGroup::catalog("Q8").unwrap().order_profile(), vec![1, 2, 4, 4, 4, 4, 4, 4]);
        assert_eq!(FinGroup::catalog("D4").unwrap().order_profile(), vec![1, 2, 2, 2, 2, 2, 4, 4]);
        assert!(FinGroup::catalog("M11").is_err());
    }

    #[test]
    fn cayley_text_round_trip_and_errors() {
        let g = FinGroup::catalog("D4").unwrap();
        let back = FinGroup::parse_cayley(&g.to_cayley_text()).unwrap();
        assert_eq!(back, g);
        let plain = FinGroup::parse_cayley("2\n0 1\n1 0\n").unwrap();
        assert_eq!(plain.labels(), &["0".to_string(), "1".to_string()]);
        assert!(FinGroup::parse_cayley("2\n0 1\n0 1\n").is_err());
        assert!(FinGroup::parse_cayley("3\n0 1 2\n1 2 0\n").is_err());
        assert!(FinGroup::parse_cayley("x\n").is_err());
    }

    #[test]
    fn pushforward_examples() {
        let g = s4();
        let v4 = g.subgroup(&g.elements_by_label(&["(12)(34)", "(13)(24)"]).unwrap());
        let p = g.cosets(&v4).unwrap().projection;
        let pushed = fin_pushforward(&FinMeasure::counting(24), &p).unwrap();
        assert!(pushed.weights.iter().all(|w| *w == crational((4, 1), (0, 1))));
        let delta = fin_pushforward(&FinMeasure::point_mass(24, 5), &p).unwrap();
        assert_eq!(delta, FinMeasure::point_mass(6, p.apply(5)));
        assert_eq!(fin_pushforward(&FinMeasure::zero(24), &p).unwrap(), FinMeasure::zero(6));
    }

    #[test]
    fn pairing_identity_holds_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let p = FinMap::random(&mut rng, 20, 7);
            let mu = FinMeasure::random(&mut rng, 20);
            let alpha = FinMeasure::random(&mut rng, 7).weights;
            let pulled: Vec<CRational> = (0..20).map(|s| alpha[p.apply(s)].clone()).collect();
            assert_eq!(mu.pair(&pulled), fin_pushforward(&mu, &p).unwrap().pair(&alpha));
        }
    }
}
