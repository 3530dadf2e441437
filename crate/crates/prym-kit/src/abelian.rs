//! Finite abelian groups in invariant-factor form, their duals, antisymmetric
//! pairings and isotropic-subgroup combinatorics.
//!
//! A group is a list d₁ | d₂ | … | d_k of invariant factors; elements and
//! characters are exponent vectors of the same shape. Everything is small and
//! enumerable by design, guarded by explicit size limits.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use num::Integer;
use serde::{Deserialize, Serialize};

use crate::cyclotomic::CycNum;

pub const DEFAULT_GUARD: u64 = 256;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum AbelianError {
    #[error("element has {got} exponents, group has {want} invariant factors")]
    ShapeMismatch { got: usize, want: usize },
    #[error("group order {order} exceeds enumeration guard {guard}")]
    GuardExceeded { order: u64, guard: u64 },
    #[error("the given elements do not form a subgroup")]
    NotASubgroup,
    #[error("subgroup is not isotropic for the pairing")]
    NotIsotropic,
    #[error("induced map f: Λ/Δ → Δ* is not injective; Δ is not maximal isotropic")]
    FNonInjective,
    #[error("pairing matrix must be {k}x{k}")]
    BadPairingShape { k: usize },
    #[error("pairing is not antisymmetric: ⟨λ,λ⟩ ≠ 1 at λ = {0:?}")]
    NotAntisymmetric(Vec<u64>),
    #[error("character value of order {order} does not lie in the target cyclic group of order {target}")]
    BadCharacterValue { order: u64, target: u64 },
}

/// A finite abelian group ℤ/d₁ × … × ℤ/d_k with d₁ | d₂ | … | d_k, dᵢ ≥ 2.
/// The trivial group is the empty list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FinAbGroup {
    invariant_factors: Vec<u64>,
}

/// Element of a [`FinAbGroup`]: exponent vector, component i reduced mod dᵢ.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupElem {
    pub exponents: Vec<u64>,
}

/// Character of a [`FinAbGroup`]; same shape as an element. Evaluation at an
/// element is a root of unity of order dividing the group exponent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Character {
    pub exponents: Vec<u64>,
}

fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Canonicalize a list of cyclic orders to invariant factors by
/// elementary-divisor merging. Order-1 factors are dropped.
pub fn make_group(orders: &[u64]) -> FinAbGroup {
    assert!(orders.iter().all(|&d| d >= 1), "orders must be positive");
    // collect prime powers, then stack the largest power of each prime into
    // the last invariant factor, next-largest into the previous one, etc.
    let mut by_prime: BTreeMap<u64, Vec<u32>> = BTreeMap::new();
    for &d in orders {
        for (p, e) in factorize(d) {
            by_prime.entry(p).or_default().push(e);
        }
    }
    let depth = by_prime.values().map(Vec::len).max().unwrap_or(0);
    let mut factors = vec![1u64; depth];
    for (p, mut exps) in by_prime {
        exps.sort_unstable_by(|a, b| b.cmp(a)); // descending
        for (slot, e) in exps.into_iter().enumerate() {
            // largest exponent goes in the last slot
            factors[depth - 1 - slot] *= p.pow(e);
        }
    }
    factors.retain(|&d| d > 1);
    FinAbGroup {
        invariant_factors: factors,
    }
}

impl FinAbGroup {
    pub fn new(orders: &[u64]) -> Self {
        make_group(orders)
    }

    pub fn trivial() -> Self {
        FinAbGroup {
            invariant_factors: Vec::new(),
        }
    }

    pub fn invariant_factors(&self) -> &[u64] {
        &self.invariant_factors
    }

    pub fn rank(&self) -> usize {
        self.invariant_factors.len()
    }

    pub fn order(&self) -> u64 {
        self.invariant_factors.iter().product()
    }

    /// Group exponent: the largest invariant factor (1 for the trivial group).
    pub fn exponent(&self) -> u64 {
        self.invariant_factors.last().copied().unwrap_or(1)
    }

    pub fn identity(&self) -> GroupElem {
        GroupElem {
            exponents: vec![0; self.rank()],
        }
    }

    pub fn check_elem(&self, e: &GroupElem) -> Result<(), AbelianError> {
        if e.exponents.len() != self.rank() {
            return Err(AbelianError::ShapeMismatch {
                got: e.exponents.len(),
                want: self.rank(),
            });
        }
        Ok(())
    }

    pub fn elem(&self, exponents: &[i64]) -> GroupElem {
        assert_eq!(exponents.len(), self.rank());
        GroupElem {
            exponents: exponents
                .iter()
                .zip(&self.invariant_factors)
                .map(|(&e, &d)| e.rem_euclid(d as i64) as u64)
                .collect(),
        }
    }

    pub fn mul(&self, a: &GroupElem, b: &GroupElem) -> GroupElem {
        GroupElem {
            exponents: a
                .exponents
                .iter()
                .zip(&b.exponents)
                .zip(&self.invariant_factors)
                .map(|((&x, &y), &d)| (x + y) % d)
                .collect(),
        }
    }

    pub fn inv(&self, a: &GroupElem) -> GroupElem {
        GroupElem {
            exponents: a
                .exponents
                .iter()
                .zip(&self.invariant_factors)
                .map(|(&x, &d)| (d - x % d) % d)
                .collect(),
        }
    }

    pub fn pow(&self, a: &GroupElem, t: i64) -> GroupElem {
        GroupElem {
            exponents: a
                .exponents
                .iter()
                .zip(&self.invariant_factors)
                .map(|(&x, &d)| ((x as i64 * t).rem_euclid(d as i64)) as u64)
                .collect(),
        }
    }

    pub fn order_of(&self, a: &GroupElem) -> u64 {
        a.exponents
            .iter()
            .zip(&self.invariant_factors)
            .map(|(&x, &d)| d / d.gcd(&x))
            .fold(1u64, |acc, o| acc.lcm(&o))
    }

    /// All elements in lexicographic order of exponent vectors.
    pub fn elements(&self) -> Vec<GroupElem> {
        let mut out = Vec::with_capacity(self.order() as usize);
        let k = self.rank();
        let mut cur = vec![0u64; k];
        loop {
            out.push(GroupElem {
                exponents: cur.clone(),
            });
            // mixed-radix increment, last coordinate fastest
            let mut i = k;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                cur[i] += 1;
                if cur[i] < self.invariant_factors[i] {
                    break;
                }
                cur[i] = 0;
            }
        }
    }

    pub fn guard(&self, guard: u64) -> Result<(), AbelianError> {
        if self.order() > guard {
            return Err(AbelianError::GuardExceeded {
                order: self.order(),
                guard,
            });
        }
        Ok(())
    }

    pub fn trivial_character(&self) -> Character {
        Character {
            exponents: vec![0; self.rank()],
        }
    }

    /// All characters in lexicographic order (the canonical order of the dual).
    pub fn characters(&self) -> Vec<Character> {
        self.elements()
            .into_iter()
            .map(|e| Character {
                exponents: e.exponents,
            })
            .collect()
    }

    pub fn char_mul(&self, a: &Character, b: &Character) -> Character {
        Character {
            exponents: self
                .mul(
                    &GroupElem {
                        exponents: a.exponents.clone(),
                    },
                    &GroupElem {
                        exponents: b.exponents.clone(),
                    },
                )
                .exponents,
        }
    }

    pub fn char_inv(&self, a: &Character) -> Character {
        Character {
            exponents: self
                .inv(&GroupElem {
                    exponents: a.exponents.clone(),
                })
                .exponents,
        }
    }

    pub fn char_order(&self, a: &Character) -> u64 {
        self.order_of(&GroupElem {
            exponents: a.exponents.clone(),
        })
    }

    /// Exponent k of the evaluation χ(x) = ζ_N^k, N the group exponent.
    pub fn char_eval(&self, chi: &Character, x: &GroupElem) -> u64 {
        let n = self.exponent();
        let mut acc: u64 = 0;
        for ((&c, &e), &d) in chi
            .exponents
            .iter()
            .zip(&x.exponents)
            .zip(&self.invariant_factors)
        {
            // χ contributes ζ_d^{c e} = ζ_N^{c e N/d}
            let term = ((c as u128 * e as u128) % d as u128) as u64 * (n / d);
            acc = (acc + term) % n;
        }
        acc
    }

    pub fn char_value(&self, chi: &Character, x: &GroupElem) -> CycNum {
        CycNum::root_of_unity(self.exponent(), self.char_eval(chi, x) as i64)
    }
}

// ---------------------------------------------------------------------------
// Pairings
// ---------------------------------------------------------------------------

/// Antisymmetric pairing l: Λ → Λ*, stored as a k×k integer matrix A with
/// A[i][j] taken mod gcd(dᵢ, dⱼ); the pairing is ⟨λ, μ⟩ = ζ_N^(λᵀ Ã μ) where
/// Ã scales entry (i,j) by N/gcd(dᵢ,dⱼ).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pairing {
    matrix: Vec<Vec<u64>>,
}

impl Pairing {
    /// Canonicalize and validate the antisymmetry ⟨λ,λ⟩ = 1 for all λ.
    pub fn new(group: &FinAbGroup, matrix: Vec<Vec<i64>>) -> Result<Self, AbelianError> {
        let k = group.rank();
        if matrix.len() != k || matrix.iter().any(|r| r.len() != k) {
            return Err(AbelianError::BadPairingShape { k });
        }
        let d = group.invariant_factors();
        let mut canon = vec![vec![0u64; k]; k];
        for i in 0..k {
            for j in 0..k {
                let g = d[i].gcd(&d[j]);
                canon[i][j] = matrix[i][j].rem_euclid(g as i64) as u64;
            }
        }
        let p = Pairing { matrix: canon };
        // antisymmetry on the nose: diagonal ≡ 0 mod dᵢ and Aᵢⱼ + Aⱼᵢ ≡ 0 mod gcd
        for i in 0..k {
            if p.matrix[i][i] != 0 {
                let mut witness = vec![0u64; k];
                witness[i] = 1;
                return Err(AbelianError::NotAntisymmetric(witness));
            }
            for j in 0..k {
                let g = d[i].gcd(&d[j]);
                if (p.matrix[i][j] + p.matrix[j][i]) % g != 0 {
                    let mut witness = vec![0u64; k];
                    witness[i] = 1;
                    witness[j] = 1;
                    return Err(AbelianError::NotAntisymmetric(witness));
                }
            }
        }
        Ok(p)
    }

    pub fn trivial(group: &FinAbGroup) -> Self {
        let k = group.rank();
        Pairing {
            matrix: vec![vec![0; k]; k],
        }
    }

    pub fn matrix(&self) -> &[Vec<u64>] {
        &self.matrix
    }

    pub fn is_trivial(&self) -> bool {
        self.matrix.iter().all(|r| r.iter().all(|&x| x == 0))
    }

    /// ⟨a, b⟩ as the exponent k of ζ_N, N = exp(Λ).
    pub fn eval(&self, group: &FinAbGroup, a: &GroupElem, b: &GroupElem) -> u64 {
        group.check_elem(a).expect("element shape");
        group.check_elem(b).expect("element shape");
        let n = group.exponent();
        let d = group.invariant_factors();
        let mut acc: u64 = 0;
        for i in 0..d.len() {
            for j in 0..d.len() {
                let g = d[i].gcd(&d[j]);
                let term = ((a.exponents[i] as u128
                    * self.matrix[i][j] as u128
                    * b.exponents[j] as u128)
                    % g as u128) as u64
                    * (n / g);
                acc = (acc + term) % n;
            }
        }
        acc
    }

    /// Checked evaluation used by the public API; reports shape mismatches.
    pub fn try_eval(
        &self,
        group: &FinAbGroup,
        a: &GroupElem,
        b: &GroupElem,
    ) -> Result<u64, AbelianError> {
        group.check_elem(a)?;
        group.check_elem(b)?;
        Ok(self.eval(group, a, b))
    }

    pub fn value(&self, group: &FinAbGroup, a: &GroupElem, b: &GroupElem) -> CycNum {
        CycNum::root_of_unity(group.exponent(), self.eval(group, a, b) as i64)
    }

    /// The homomorphism l: Λ → Λ*, λ ↦ ⟨λ, ·⟩.
    pub fn apply(&self, group: &FinAbGroup, a: &GroupElem) -> Character {
        let d = group.invariant_factors();
        let k = d.len();
        let mut exps = vec![0u64; k];
        for j in 0..k {
            // coefficient on the j-th dual generator: ⟨a, e_j⟩ = ζ_{d_j}^{c_j}
            let mut cj: u64 = 0;
            for i in 0..k {
                let g = d[i].gcd(&d[j]);
                let term =
                    ((a.exponents[i] as u128 * self.matrix[i][j] as u128) % g as u128) as u64
                        * (d[j] / g);
                cj = (cj + term) % d[j];
            }
            exps[j] = cj;
        }
        Character { exponents: exps }
    }

    pub fn is_trivial_on(&self, group: &FinAbGroup, sub: &Subgroup) -> bool {
        let gens = sub.generators();
        gens.iter()
            .all(|a| gens.iter().all(|b| self.eval(group, a, b) == 0))
    }
}

/// Complete duplicate-free list of antisymmetric pairings on Λ.
pub fn enumerate_antisymmetric_pairings(
    group: &FinAbGroup,
    guard: u64,
) -> Result<Vec<Pairing>, AbelianError> {
    group.guard(guard)?;
    let k = group.rank();
    let d = group.invariant_factors();
    // free data: strictly upper entries mod gcd(dᵢ,dⱼ); diagonal 0; lower = -upper
    let slots: Vec<(usize, usize, u64)> = (0..k)
        .flat_map(|i| ((i + 1)..k).map(move |j| (i, j)))
        .map(|(i, j)| (i, j, d[i].gcd(&d[j])))
        .collect();
    let mut out = Vec::new();
    let mut cur = vec![0u64; slots.len()];
    loop {
        let mut m = vec![vec![0i64; k]; k];
        for (s, &(i, j, g)) in slots.iter().enumerate() {
            m[i][j] = cur[s] as i64;
            m[j][i] = (g - cur[s]) as i64 % g as i64;
        }
        out.push(Pairing::new(group, m).expect("constructed antisymmetric"));
        let mut s = slots.len();
        loop {
            if s == 0 {
                return Ok(out);
            }
            s -= 1;
            cur[s] += 1;
            if cur[s] < slots[s].2 {
                break;
            }
            cur[s] = 0;
        }
    }
}

// ---------------------------------------------------------------------------
// Subgroups
// ---------------------------------------------------------------------------

/// Subgroup of a [`FinAbGroup`], materialized (small groups only).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subgroup {
    generators: Vec<GroupElem>,
    elements: Vec<GroupElem>,
}

impl Subgroup {
    pub fn from_generators(group: &FinAbGroup, gens: &[GroupElem]) -> Self {
        for g in gens {
            group.check_elem(g).expect("generator shape");
        }
        let mut seen: HashSet<GroupElem> = HashSet::new();
        let mut queue: VecDeque<GroupElem> = VecDeque::new();
        seen.insert(group.identity());
        queue.push_back(group.identity());
        while let Some(x) = queue.pop_front() {
            for g in gens {
                let y = group.mul(&x, g);
                if seen.insert(y.clone()) {
                    queue.push_back(y);
                }
            }
        }
        let mut elements: Vec<GroupElem> = seen.into_iter().collect();
        elements.sort();
        Subgroup {
            generators: gens.to_vec(),
            elements,
        }
    }

    /// Validate an explicit element set as a subgroup.
    pub fn from_elements(group: &FinAbGroup, elems: &[GroupElem]) -> Result<Self, AbelianError> {
        let set: HashSet<&GroupElem> = elems.iter().collect();
        if !set.contains(&group.identity()) {
            return Err(AbelianError::NotASubgroup);
        }
        for a in elems {
            group.check_elem(a)?;
            if !set.contains(&group.inv(a)) {
                return Err(AbelianError::NotASubgroup);
            }
            for b in elems {
                if !set.contains(&group.mul(a, b)) {
                    return Err(AbelianError::NotASubgroup);
                }
            }
        }
        let mut elements = elems.to_vec();
        elements.sort();
        elements.dedup();
        Ok(Subgroup {
            generators: elements.clone(),
            elements,
        })
    }

    pub fn trivial(group: &FinAbGroup) -> Self {
        Subgroup {
            generators: vec![],
            elements: vec![group.identity()],
        }
    }

    pub fn full(group: &FinAbGroup) -> Self {
        let mut elements = group.elements();
        elements.sort();
        Subgroup {
            generators: (0..group.rank())
                .map(|i| {
                    let mut e = vec![0i64; group.rank()];
                    e[i] = 1;
                    group.elem(&e)
                })
                .collect(),
            elements,
        }
    }

    pub fn generators(&self) -> &[GroupElem] {
        &self.generators
    }

    pub fn elements(&self) -> &[GroupElem] {
        &self.elements
    }

    pub fn order(&self) -> u64 {
        self.elements.len() as u64
    }

    pub fn contains(&self, e: &GroupElem) -> bool {
        self.elements.binary_search(e).is_ok()
    }

    pub fn is_subset_of(&self, other: &Subgroup) -> bool {
        self.elements.iter().all(|e| other.contains(e))
    }
}

/// All subgroups of Λ, deterministically ordered by (order, element list).
pub fn all_subgroups(group: &FinAbGroup, guard: u64) -> Result<Vec<Subgroup>, AbelianError> {
    group.guard(guard)?;
    let elements = group.elements();
    let mut found: BTreeMap<Vec<GroupElem>, Subgroup> = BTreeMap::new();
    let triv = Subgroup::trivial(group);
    let mut queue = VecDeque::new();
    found.insert(triv.elements.clone(), triv.clone());
    queue.push_back(triv);
    while let Some(h) = queue.pop_front() {
        for x in &elements {
            if h.contains(x) {
                continue;
            }
            let mut gens = h.generators.clone();
            gens.push(x.clone());
            let bigger = Subgroup::from_generators(group, &gens);
            if !found.contains_key(&bigger.elements) {
                found.insert(bigger.elements.clone(), bigger.clone());
                queue.push_back(bigger);
            }
        }
    }
    let mut out: Vec<Subgroup> = found.into_values().collect();
    out.sort_by_key(|s| (s.order(), s.elements.clone()));
    Ok(out)
}

/// All maximal isotropic subgroups for the pairing l on Λ.
///
/// Every returned subgroup has the same order.
pub fn maximal_isotropic_subgroups(
    group: &FinAbGroup,
    l: &Pairing,
    guard: u64,
) -> Result<Vec<Subgroup>, AbelianError> {
    let subs = all_subgroups(group, guard)?;
    let isotropic: Vec<Subgroup> = subs
        .into_iter()
        .filter(|s| l.is_trivial_on(group, s))
        .collect();
    let maximal: Vec<Subgroup> = isotropic
        .iter()
        .filter(|s| {
            !isotropic
                .iter()
                .any(|t| t.order() > s.order() && s.is_subset_of(t))
        })
        .cloned()
        .collect();
    debug_assert!(
        maximal.windows(2).all(|w| w[0].order() == w[1].order()),
        "maximal isotropic subgroups must share one order"
    );
    Ok(maximal)
}

// ---------------------------------------------------------------------------
// Abstract structure of a subgroup (basis + coordinates)
// ---------------------------------------------------------------------------

/// A subgroup together with an explicit internal direct-sum basis: the data
/// needed to talk about its dual group concretely.
#[derive(Debug, Clone)]
pub struct SubgroupStructure {
    pub ambient: FinAbGroup,
    pub subgroup: Subgroup,
    /// Abstract isomorphism type of the subgroup.
    pub group: FinAbGroup,
    /// basis[i] has order group.invariant_factors()[i]; the subgroup is the
    /// internal direct sum of the cyclic groups generated by the basis.
    pub basis: Vec<GroupElem>,
    coords: HashMap<GroupElem, GroupElem>,
}

/// Invariant factors of a small abelian group from its element-order census.
fn invariant_factors_from_orders(orders: &[u64]) -> Vec<u64> {
    let n = orders.len() as u64;
    if n == 1 {
        return Vec::new();
    }
    // per prime p: number of cyclic factors of order ≥ p^j is
    // log_p(count of x with x^{p^j} = 1) - log_p(count with x^{p^(j-1)} = 1)
    let mut elementary: BTreeMap<u64, Vec<u32>> = BTreeMap::new();
    for (p, _) in factorize(n) {
        let mut prev_count = 1u64; // order dividing p^0
        let mut j = 1u32;
        let mut profile = Vec::new();
        loop {
            let pj = p.pow(j);
            let count = orders.iter().filter(|&&o| pj % o == 0).count() as u64;
            if count == prev_count {
                break;
            }
            // number of factors with order ≥ p^j
            let mut ratio = count / prev_count;
            let mut log = 0u32;
            while ratio > 1 {
                ratio /= p;
                log += 1;
            }
            profile.push(log);
            prev_count = count;
            j += 1;
        }
        // profile[j-1] = #factors of order ≥ p^j; convert to multiset of exponents
        let mut exps = Vec::new();
        for (idx, &cnt) in profile.iter().enumerate() {
            let next = profile.get(idx + 1).copied().unwrap_or(0);
            for _ in 0..(cnt - next) {
                exps.push((idx + 1) as u32);
            }
        }
        elementary.insert(p, exps);
    }
    let depth = elementary.values().map(Vec::len).max().unwrap_or(0);
    let mut factors = vec![1u64; depth];
    for (p, mut exps) in elementary {
        exps.sort_unstable_by(|a, b| b.cmp(a));
        for (slot, e) in exps.into_iter().enumerate() {
            factors[depth - 1 - slot] *= p.pow(e);
        }
    }
    factors.retain(|&d| d > 1);
    factors
}

impl SubgroupStructure {
    /// Compute the abstract structure of Δ ≤ Λ: invariant factors, an explicit
    /// basis realizing them, and coordinates for every element.
    pub fn analyze(ambient: &FinAbGroup, sub: &Subgroup) -> Self {
        let orders: Vec<u64> = sub
            .elements()
            .iter()
            .map(|e| ambient.order_of(e))
            .collect();
        let factors = invariant_factors_from_orders(&orders);
        let abstract_group = FinAbGroup {
            invariant_factors: factors.clone(),
        };
        // find a basis by backtracking, largest factor first
        let elems = sub.elements().to_vec();
        let mut basis: Vec<Option<GroupElem>> = vec![None; factors.len()];
        fn search(
            ambient: &FinAbGroup,
            elems: &[GroupElem],
            factors: &[u64],
            basis: &mut Vec<Option<GroupElem>>,
            pos: usize,
        ) -> bool {
            if pos == factors.len() {
                return true;
            }
            // fill from the back (largest factor first)
            let slot = factors.len() - 1 - pos;
            let want = factors[slot];
            for cand in elems {
                if ambient.order_of(cand) != want {
                    continue;
                }
                basis[slot] = Some(cand.clone());
                // independence: the chosen suffix must generate a group of
                // the full product order
                let chosen: Vec<GroupElem> = basis[slot..]
                    .iter()
                    .map(|b| b.clone().expect("filled"))
                    .collect();
                let gen = Subgroup::from_generators(ambient, &chosen);
                let target: u64 = factors[slot..].iter().product();
                if gen.order() == target && search(ambient, elems, factors, basis, pos + 1) {
                    return true;
                }
                basis[slot] = None;
            }
            false
        }
        let ok = search(ambient, &elems, &factors, &mut basis, 0);
        assert!(ok, "basis extraction must succeed for a finite abelian group");
        let basis: Vec<GroupElem> = basis.into_iter().map(Option::unwrap).collect();
        // coordinate table by enumeration of all basis combinations
        let mut coords = HashMap::new();
        for combo in abstract_group.elements() {
            let mut x = ambient.identity();
            for (i, &c) in combo.exponents.iter().enumerate() {
                x = ambient.mul(&x, &ambient.pow(&basis[i], c as i64));
            }
            coords.insert(x, combo);
        }
        assert_eq!(coords.len() as u64, sub.order(), "basis must span");
        SubgroupStructure {
            ambient: ambient.clone(),
            subgroup: sub.clone(),
            group: abstract_group,
            basis,
            coords,
        }
    }

    /// Coordinates of a subgroup element in the internal basis.
    pub fn coords(&self, e: &GroupElem) -> Option<GroupElem> {
        self.coords.get(e).cloned()
    }

    /// The subgroup element with the given abstract coordinates.
    pub fn from_coords(&self, c: &GroupElem) -> GroupElem {
        let mut x = self.ambient.identity();
        for (i, &ci) in c.exponents.iter().enumerate() {
            x = self.ambient.mul(&x, &self.ambient.pow(&self.basis[i], ci as i64));
        }
        x
    }

    /// Restrict a character of the ambient group to this subgroup.
    pub fn restrict_character(&self, chi: &Character) -> Result<Character, AbelianError> {
        let n = self.ambient.exponent();
        let mut exps = Vec::with_capacity(self.basis.len());
        for (i, b) in self.basis.iter().enumerate() {
            let e = self.group.invariant_factors()[i];
            let k = self.ambient.char_eval(chi, b); // χ(b) = ζ_N^k
            // must equal ζ_e^{c}: k·e/N integral
            if (k as u128 * e as u128) % n as u128 != 0 {
                return Err(AbelianError::BadCharacterValue {
                    order: n / n.gcd(&k.max(1)),
                    target: e,
                });
            }
            exps.push(((k as u128 * e as u128 / n as u128) % e as u128) as u64);
        }
        Ok(Character { exponents: exps })
    }

    /// Evaluate a character of the subgroup at a subgroup element.
    pub fn char_eval(&self, chi: &Character, e: &GroupElem) -> u64 {
        let c = self.coords(e).expect("element of the subgroup");
        self.group.char_eval(chi, &c)
    }

    pub fn char_value(&self, chi: &Character, e: &GroupElem) -> CycNum {
        let c = self.coords(e).expect("element of the subgroup");
        self.group.char_value(chi, &c)
    }
}

// ---------------------------------------------------------------------------
// Quotients
// ---------------------------------------------------------------------------

/// Λ/Δ with fixed (lexicographically minimal) coset representatives.
#[derive(Debug, Clone)]
pub struct QuotientGroup {
    pub ambient: FinAbGroup,
    pub subgroup: Subgroup,
    /// Abstract isomorphism type of Λ/Δ.
    pub group: FinAbGroup,
    /// representative[coords-index] in the lexicographic order of `group`.
    pub representatives: Vec<GroupElem>,
    proj: HashMap<GroupElem, GroupElem>,
}

pub fn quotient_group(
    ambient: &FinAbGroup,
    sub: &Subgroup,
) -> Result<QuotientGroup, AbelianError> {
    // validate subgroup-ness of the element set
    Subgroup::from_elements(ambient, sub.elements())?;
    // cosets, keyed by their lexicographically minimal representative
    let mut rep_of: HashMap<GroupElem, GroupElem> = HashMap::new();
    let mut reps: Vec<GroupElem> = Vec::new();
    for x in ambient.elements() {
        if rep_of.contains_key(&x) {
            continue;
        }
        let mut coset: Vec<GroupElem> = sub.elements().iter().map(|d| ambient.mul(&x, d)).collect();
        coset.sort();
        let rep = coset[0].clone();
        for y in coset {
            rep_of.insert(y, rep.clone());
        }
        reps.push(rep);
    }
    reps.sort();
    // the quotient as an abstract small group on the representatives
    let orders: Vec<u64> = reps
        .iter()
        .map(|r| {
            // order of the coset rΔ in Λ/Δ
            let mut t = 1u64;
            let mut acc = r.clone();
            while !sub.contains(&acc) {
                acc = ambient.mul(&acc, r);
                t += 1;
            }
            t
        })
        .collect();
    let factors = invariant_factors_from_orders(&orders);
    let qgroup = FinAbGroup {
        invariant_factors: factors.clone(),
    };
    // basis of the quotient by backtracking over representatives
    let mut basis: Vec<Option<GroupElem>> = vec![None; factors.len()];
    fn coset_order(ambient: &FinAbGroup, sub: &Subgroup, r: &GroupElem) -> u64 {
        let mut t = 1u64;
        let mut acc = r.clone();
        while !sub.contains(&acc) {
            acc = ambient.mul(&acc, r);
            t += 1;
        }
        t
    }
    fn span_size(
        ambient: &FinAbGroup,
        sub: &Subgroup,
        gens: &[GroupElem],
    ) -> u64 {
        let mut gens_full = sub.generators().to_vec();
        gens_full.extend_from_slice(gens);
        Subgroup::from_generators(ambient, &gens_full).order() / sub.order()
    }
    fn qsearch(
        ambient: &FinAbGroup,
        sub: &Subgroup,
        reps: &[GroupElem],
        factors: &[u64],
        basis: &mut Vec<Option<GroupElem>>,
        pos: usize,
    ) -> bool {
        if pos == factors.len() {
            return true;
        }
        let slot = factors.len() - 1 - pos;
        let want = factors[slot];
        for cand in reps {
            if coset_order(ambient, sub, cand) != want {
                continue;
            }
            basis[slot] = Some(cand.clone());
            let chosen: Vec<GroupElem> = basis[slot..]
                .iter()
                .map(|b| b.clone().expect("filled"))
                .collect();
            let target: u64 = factors[slot..].iter().product();
            if span_size(ambient, sub, &chosen) == target
                && qsearch(ambient, sub, reps, factors, basis, pos + 1)
            {
                return true;
            }
            basis[slot] = None;
        }
        false
    }
    let ok = qsearch(ambient, sub, &reps, &factors, &mut basis, 0);
    assert!(ok, "quotient basis extraction must succeed");
    let basis: Vec<GroupElem> = basis.into_iter().map(Option::unwrap).collect();
    // for each abstract coordinate vector, the lex-min representative of the coset
    let mut representatives = Vec::with_capacity(qgroup.order() as usize);
    let mut proj: HashMap<GroupElem, GroupElem> = HashMap::new();
    for combo in qgroup.elements() {
        let mut x = ambient.identity();
        for (i, &c) in combo.exponents.iter().enumerate() {
            x = ambient.mul(&x, &ambient.pow(&basis[i], c as i64));
        }
        let rep = rep_of.get(&x).expect("coset computed").clone();
        representatives.push(rep);
    }
    for x in ambient.elements() {
        // coordinates of the coset of x
        let rep = rep_of.get(&x).unwrap();
        let idx = representatives
            .iter()
            .position(|r| {
                // same coset?
                let diff = ambient.mul(rep, &ambient.inv(r));
                sub.contains(&diff)
            })
            .expect("coset indexed");
        proj.insert(x, qgroup.elements()[idx].clone());
    }
    Ok(QuotientGroup {
        ambient: ambient.clone(),
        subgroup: sub.clone(),
        group: qgroup,
        representatives,
        proj,
    })
}

impl QuotientGroup {
    /// Image of an ambient element in the quotient (abstract coordinates).
    pub fn project(&self, x: &GroupElem) -> GroupElem {
        self.proj.get(x).expect("element of the ambient group").clone()
    }

    /// Fixed lexicographically minimal representative of a quotient element.
    pub fn representative(&self, q: &GroupElem) -> GroupElem {
        let idx = self
            .group
            .elements()
            .iter()
            .position(|e| e == q)
            .expect("quotient element");
        self.representatives[idx].clone()
    }
}

// ---------------------------------------------------------------------------
// Isotropy data
// ---------------------------------------------------------------------------

/// The data attached to a maximal isotropic subgroup Δ for a pairing l.
#[derive(Debug, Clone)]
pub struct IsotropyData {
    pub quotient: QuotientGroup,
    pub delta: SubgroupStructure,
    /// f: Λ/Δ → Δ*, injective; indexed by the lexicographic order of Λ/Δ.
    pub f_table: Vec<Character>,
    pub ker_l: Subgroup,
    /// l(Λ) as a subgroup of Λ* (characters realized as elements of the dual
    /// group, which has the same invariant factors as Λ).
    pub image_l: Subgroup,
}

/// Compute f: Λ/Δ ↪ Δ*, ker l and l(Λ), and check maximality of Δ via the
/// injectivity of f.
pub fn isotropy_data(
    group: &FinAbGroup,
    l: &Pairing,
    delta: &Subgroup,
) -> Result<IsotropyData, AbelianError> {
    if !l.is_trivial_on(group, delta) {
        return Err(AbelianError::NotIsotropic);
    }
    let quotient = quotient_group(group, delta)?;
    let delta_structure = SubgroupStructure::analyze(group, delta);
    let mut f_table = Vec::new();
    let mut seen = HashSet::new();
    for q in quotient.group.elements() {
        let rep = quotient.representative(&q);
        let chi_ambient = l.apply(group, &rep);
        let chi = delta_structure.restrict_character(&chi_ambient)?;
        if !seen.insert(chi.clone()) {
            return Err(AbelianError::FNonInjective);
        }
        f_table.push(chi);
    }
    // kernel and image of l by exhaustion
    let mut ker_elems = Vec::new();
    let mut image_elems: Vec<GroupElem> = Vec::new();
    for x in group.elements() {
        let chi = l.apply(group, &x);
        if chi.exponents.iter().all(|&e| e == 0) {
            ker_elems.push(x.clone());
        }
        image_elems.push(GroupElem {
            exponents: chi.exponents,
        });
    }
    image_elems.sort();
    image_elems.dedup();
    let ker_l = Subgroup::from_elements(group, &ker_elems)?;
    let image_l = Subgroup::from_elements(group, &image_elems)?;
    Ok(IsotropyData {
        quotient,
        delta: delta_structure,
        f_table,
        ker_l,
        image_l,
    })
}

impl IsotropyData {
    /// f evaluated on a quotient element.
    pub fn f(&self, q: &GroupElem) -> Character {
        let idx = self
            .quotient
            .group
            .elements()
            .iter()
            .position(|e| e == q)
            .expect("quotient element");
        self.f_table[idx].clone()
    }

    /// The image subgroup f(Λ/Δ) ≤ Δ*, as a set of characters of Δ.
    pub fn f_image(&self) -> Vec<Character> {
        let mut v = self.f_table.clone();
        v.sort();
        v
    }
}

// ---------------------------------------------------------------------------
// Automorphisms (for the census dedup pass)
// ---------------------------------------------------------------------------

/// Generators of Aut(Λ) as matrices acting on exponent vectors: unit scalings,
/// admissible transvections and equal-factor swaps.
pub fn automorphism_generators(group: &FinAbGroup) -> Vec<Vec<Vec<u64>>> {
    let k = group.rank();
    let d = group.invariant_factors();
    let mut gens: Vec<Vec<Vec<u64>>> = Vec::new();
    let ident = |k: usize| -> Vec<Vec<u64>> {
        (0..k)
            .map(|i| (0..k).map(|j| u64::from(i == j)).collect())
            .collect()
    };
    for i in 0..k {
        for u in 2..d[i] {
            if u.gcd(&d[i]) == 1 {
                let mut m = ident(k);
                m[i][i] = u;
                gens.push(m);
            }
        }
        for j in 0..k {
            if i == j {
                continue;
            }
            // e_i ↦ e_i + c e_j requires d_i · c ≡ 0 mod d_j
            let step = d[j] / d[i].gcd(&d[j]);
            let mut c = step;
            while c < d[j] {
                let mut m = ident(k);
                m[i][j] = c;
                gens.push(m);
                c += step;
            }
        }
        for j in (i + 1)..k {
            if d[i] == d[j] {
                let mut m = ident(k);
                m[i][i] = 0;
                m[j][j] = 0;
                m[i][j] = 1;
                m[j][i] = 1;
                gens.push(m);
            }
        }
    }
    gens
}

/// Apply an automorphism matrix to a pairing: (σ·l)(x, y) = ⟨σx, σy⟩.
pub fn transform_pairing(group: &FinAbGroup, l: &Pairing, sigma: &[Vec<u64>]) -> Pairing {
    let k = group.rank();
    let basis: Vec<GroupElem> = (0..k)
        .map(|i| {
            let mut e = vec![0i64; k];
            e[i] = 1;
            group.elem(&e)
        })
        .collect();
    let apply = |x: &GroupElem| -> GroupElem {
        // σ(e_i) = Σ_j sigma[i][j] e_j; extend additively
        let mut acc = group.identity();
        for (i, &xi) in x.exponents.iter().enumerate() {
            for j in 0..k {
                let mut t = vec![0i64; k];
                t[j] = (sigma[i][j] as i64) * (xi as i64);
                acc = group.mul(&acc, &group.elem(&t));
            }
        }
        acc
    };
    let d = group.invariant_factors();
    let mut m = vec![vec![0i64; k]; k];
    for i in 0..k {
        for j in 0..k {
            let v = l.eval(group, &apply(&basis[i]), &apply(&basis[j]));
            // v is an exponent of ζ_N; convert to a matrix entry mod gcd
            let n = group.exponent();
            let g = d[i].gcd(&d[j]);
            debug_assert_eq!(
                (v as u128 * g as u128) % n as u128,
                0,
                "pairing value must lie in the gcd-torsion"
            );
            m[i][j] = ((v as u128 * g as u128 / n as u128) % g as u128) as i64;
        }
    }
    Pairing::new(group, m).expect("automorphism preserves antisymmetry")
}

/// Partition pairings into Aut(Λ)-orbits; returns the lexicographically least
/// representative of each orbit, in deterministic order.
pub fn dedup_pairings_by_aut(
    group: &FinAbGroup,
    pairings: &[Pairing],
    guard: u64,
) -> Result<Vec<Pairing>, AbelianError> {
    group.guard(guard)?;
    let gens = automorphism_generators(group);
    let mut remaining: Vec<Pairing> = pairings.to_vec();
    remaining.sort_by_key(|p| p.matrix().to_vec());
    let mut reps = Vec::new();
    let mut seen: HashSet<Vec<Vec<u64>>> = HashSet::new();
    for p in &remaining {
        if seen.contains(p.matrix()) {
            continue;
        }
        // BFS orbit
        reps.push(p.clone());
        let mut queue = VecDeque::new();
        seen.insert(p.matrix().to_vec());
        queue.push_back(p.clone());
        while let Some(q) = queue.pop_front() {
            for s in &gens {
                let t = transform_pairing(group, &q, s);
                if seen.insert(t.matrix().to_vec()) {
                    queue.push_back(t);
                }
            }
        }
    }
    Ok(reps)
}
