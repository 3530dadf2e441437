//! 2-cocycles of finite group actions, twisted products G₀ ×_(τ,c) Γ,
//! extraction of a cocycle from a section of an extension, and coboundary
//! equivalence.

use std::collections::{HashMap, VecDeque};
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::abelian::FinAbGroup;
use crate::cyclotomic::CycMatrix;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ExtError {
    #[error("section must satisfy t(1) = 1")]
    SectionNotNormalized,
    #[error("t(γ)t(γ') t(γγ')⁻¹ is not central in G₀ at (γ, γ') = ({0}, {1})")]
    ValueNotCentral(String, String),
    #[error("values generate an infinite (or > {guard}) subgroup")]
    ValueGroupTooLarge { guard: usize },
    #[error("action does not preserve the value group at γ = {0}")]
    ActionEscapesValues(String),
    #[error("search space |Z|^|Γ| exceeds guard 2^20")]
    CoboundaryGuard,
    #[error("cocycles live over different (Γ, Z, action) data")]
    IncompatibleCocycles,
    #[error("group closure exceeded guard {guard}")]
    ClosureGuard { guard: usize },
}

// ---------------------------------------------------------------------------
// Group interfaces
// ---------------------------------------------------------------------------

/// Minimal group interface: multiplication, inverse, identity, equality via a
/// canonical key, and element enumeration when the group is finite and small.
pub trait GroupOps {
    type Elem: Clone + std::fmt::Debug;
    fn identity(&self) -> Self::Elem;
    fn multiply(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn invert(&self, a: &Self::Elem) -> Self::Elem;
    fn eq(&self, a: &Self::Elem, b: &Self::Elem) -> bool;
    /// Canonical key for hashing; equal elements must share the key.
    fn key(&self, a: &Self::Elem) -> String;
    /// All elements, when enumerable within the guard.
    fn elements(&self) -> Option<Vec<Self::Elem>>;

    /// Spot-check the group axioms on a sample of elements.
    fn spot_check(&self, sample: &[Self::Elem]) -> bool {
        let e = self.identity();
        sample.iter().all(|a| {
            self.eq(&self.multiply(a, &e), a)
                && self.eq(&self.multiply(&e, a), a)
                && self.eq(&self.multiply(a, &self.invert(a)), &e)
                && self.eq(&self.multiply(&self.invert(a), a), &e)
        })
    }
}

/// Finite group as an explicit multiplication table. Identity is index 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmallGroup {
    order: usize,
    mul: Vec<u16>,
    inv: Vec<u16>,
    labels: Vec<String>,
}

impl SmallGroup {
    pub fn from_table(mul: Vec<Vec<u16>>, labels: Vec<String>) -> Self {
        let order = mul.len();
        assert!(order > 0 && mul.iter().all(|r| r.len() == order));
        assert_eq!(labels.len(), order);
        // identity must be index 0
        assert!((0..order).all(|i| mul[0][i] as usize == i && mul[i][0] as usize == i));
        let mut inv = vec![0u16; order];
        for a in 0..order {
            let b = (0..order)
                .find(|&b| mul[a][b] == 0)
                .expect("every element has an inverse");
            inv[a] = b as u16;
        }
        for a in 0..order {
            for b in 0..order {
                for c in 0..order {
                    assert_eq!(
                        mul[mul[a][b] as usize][c],
                        mul[a][mul[b][c] as usize],
                        "multiplication table is not associative"
                    );
                }
            }
        }
        SmallGroup {
            order,
            mul: mul.into_iter().flatten().collect(),
            inv,
            labels,
        }
    }

    pub fn from_abelian(g: &FinAbGroup) -> Self {
        let elems = g.elements();
        let index: HashMap<_, _> = elems
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i as u16))
            .collect();
        let mul = elems
            .iter()
            .map(|a| {
                elems
                    .iter()
                    .map(|b| index[&g.mul(a, b)])
                    .collect::<Vec<u16>>()
            })
            .collect();
        let labels = elems
            .iter()
            .map(|e| {
                format!(
                    "({})",
                    e.exponents
                        .iter()
                        .map(|x| x.to_string())
                        .collect::<Vec<_>>()
                        .join(",")
                )
            })
            .collect();
        Self::from_table(mul, labels)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.order + b] as usize
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inv[a] as usize
    }

    pub fn label(&self, a: usize) -> &str {
        &self.labels[a]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (0..self.order).all(|b| self.mul(a, b) == self.mul(b, a)))
    }
}

impl GroupOps for SmallGroup {
    type Elem = usize;
    fn identity(&self) -> usize {
        0
    }
    fn multiply(&self, a: &usize, b: &usize) -> usize {
        self.mul(*a, *b)
    }
    fn invert(&self, a: &usize) -> usize {
        self.inv(*a)
    }
    fn eq(&self, a: &usize, b: &usize) -> bool {
        a == b
    }
    fn key(&self, a: &usize) -> String {
        a.to_string()
    }
    fn elements(&self) -> Option<Vec<usize>> {
        Some((0..self.order).collect())
    }
}

/// Matrix group generated by a finite set of exact matrices.
#[derive(Debug, Clone)]
pub struct MatrixGroup {
    pub generators: Vec<CycMatrix>,
    pub dim: usize,
    pub conductor: u64,
    pub closure_guard: usize,
}

impl MatrixGroup {
    pub fn new(generators: Vec<CycMatrix>, closure_guard: usize) -> Self {
        assert!(!generators.is_empty());
        let dim = generators[0].n_rows();
        assert!(generators
            .iter()
            .all(|g| g.n_rows() == dim && g.n_cols() == dim));
        let conductor = generators
            .iter()
            .fold(1u64, |acc, g| num::Integer::lcm(&acc, &g.conductor()));
        MatrixGroup {
            generators,
            dim,
            conductor,
            closure_guard,
        }
    }

    /// Enumerate the generated group by closure; error when the guard trips.
    pub fn closure(&self) -> Result<Vec<CycMatrix>, ExtError> {
        let mut seen: HashMap<String, ()> = HashMap::new();
        let id = CycMatrix::identity(self.dim).embed(self.conductor);
        let mut order: Vec<CycMatrix> = vec![id.clone()];
        seen.insert(id.canonical_key(self.conductor), ());
        let mut queue = VecDeque::new();
        queue.push_back(id);
        while let Some(x) = queue.pop_front() {
            for g in &self.generators {
                let y = x.mul(g).embed(self.conductor);
                let k = y.canonical_key(self.conductor);
                if !seen.contains_key(&k) {
                    if order.len() >= self.closure_guard {
                        return Err(ExtError::ClosureGuard {
                            guard: self.closure_guard,
                        });
                    }
                    seen.insert(k, ());
                    order.push(y.clone());
                    queue.push_back(y);
                }
            }
        }
        Ok(order)
    }
}

impl GroupOps for MatrixGroup {
    type Elem = CycMatrix;
    fn identity(&self) -> CycMatrix {
        CycMatrix::identity(self.dim).embed(self.conductor)
    }
    fn multiply(&self, a: &CycMatrix, b: &CycMatrix) -> CycMatrix {
        a.mul(b).embed(self.conductor)
    }
    fn invert(&self, a: &CycMatrix) -> CycMatrix {
        a.inverse()
            .expect("group element invertible")
            .embed(self.conductor)
    }
    fn eq(&self, a: &CycMatrix, b: &CycMatrix) -> bool {
        a == b
    }
    fn key(&self, a: &CycMatrix) -> String {
        a.canonical_key(self.conductor)
    }
    fn elements(&self) -> Option<Vec<CycMatrix>> {
        self.closure().ok()
    }
}

// ---------------------------------------------------------------------------
// Cocycles
// ---------------------------------------------------------------------------

/// Outcome of a cocycle verification; failures carry the witnessing tuple.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CocycleCheck {
    Ok,
    /// c(1,γ) or c(γ,1) differs from 1.
    NormalizationFailed { gamma: String },
    /// a_γ(c(γ',γ''))·c(γ,γ'γ'') ≠ c(γγ',γ'')·c(γ,γ') at the given triple.
    IdentityFailed {
        gamma: String,
        gamma2: String,
        gamma3: String,
    },
}

impl CocycleCheck {
    pub fn is_ok(&self) -> bool {
        matches!(self, CocycleCheck::Ok)
    }
}

/// A normalized 2-cocycle c ∈ Z²_a(Γ, Z): a total table Γ×Γ → Z together with
/// the Γ-action on the finite abelian value group Z.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cocycle2 {
    pub gamma: SmallGroup,
    pub z: SmallGroup,
    /// action[γ][z] = a_γ(z); every a_γ is an automorphism of Z.
    pub action: Vec<Vec<u16>>,
    /// table[γ·|Γ| + γ'] = c(γ, γ').
    pub table: Vec<u16>,
}

impl Cocycle2 {
    pub fn new(gamma: SmallGroup, z: SmallGroup, action: Vec<Vec<u16>>, table: Vec<u16>) -> Self {
        assert!(z.is_abelian(), "cocycle values must be abelian");
        assert_eq!(action.len(), gamma.order());
        assert!(action.iter().all(|a| a.len() == z.order()));
        assert_eq!(table.len(), gamma.order() * gamma.order());
        Cocycle2 {
            gamma,
            z,
            action,
            table,
        }
    }

    /// Constant-1 cocycle with trivial action.
    pub fn trivial(gamma: SmallGroup, z: SmallGroup) -> Self {
        let n = gamma.order();
        let action = vec![(0..z.order() as u16).collect::<Vec<_>>(); n];
        let table = vec![0u16; n * n];
        Self::new(gamma, z, action, table)
    }

    pub fn value(&self, g1: usize, g2: usize) -> usize {
        self.table[g1 * self.gamma.order() + g2] as usize
    }

    pub fn act(&self, g: usize, z: usize) -> usize {
        self.action[g][z] as usize
    }

    pub fn is_trivial_table(&self) -> bool {
        self.table.iter().all(|&v| v == 0)
    }

    /// Verify normalization and the 2-cocycle identity on every triple.
    pub fn verify(&self) -> CocycleCheck {
        let n = self.gamma.order();
        for g in 0..n {
            if self.value(0, g) != 0 || self.value(g, 0) != 0 {
                return CocycleCheck::NormalizationFailed {
                    gamma: self.gamma.label(g).to_string(),
                };
            }
        }
        for g in 0..n {
            for g2 in 0..n {
                for g3 in 0..n {
                    // a_γ(c(γ',γ''))·c(γ, γ'γ'') = c(γγ', γ'')·c(γ, γ')
                    let lhs = self.z.mul(
                        self.act(g, self.value(g2, g3)),
                        self.value(g, self.gamma.mul(g2, g3)),
                    );
                    let rhs = self
                        .z
                        .mul(self.value(self.gamma.mul(g, g2), g3), self.value(g, g2));
                    if lhs != rhs {
                        return CocycleCheck::IdentityFailed {
                            gamma: self.gamma.label(g).to_string(),
                            gamma2: self.gamma.label(g2).to_string(),
                            gamma3: self.gamma.label(g3).to_string(),
                        };
                    }
                }
            }
        }
        CocycleCheck::Ok
    }

    /// Indices (γ, γ') where the cocycle value is non-trivial.
    pub fn exception_set(&self) -> Vec<(usize, usize)> {
        let n = self.gamma.order();
        let mut out = Vec::new();
        for g1 in 0..n {
            for g2 in 0..n {
                if self.value(g1, g2) != 0 {
                    out.push((g1, g2));
                }
            }
        }
        out
    }

    /// Exception set as element labels, for reports.
    pub fn exception_labels(&self) -> Vec<(String, String)> {
        self.exception_set()
            .into_iter()
            .map(|(a, b)| {
                (
                    self.gamma.label(a).to_string(),
                    self.gamma.label(b).to_string(),
                )
            })
            .collect()
    }

    /// Multiply by the coboundary of b: Γ → Z (b[0] must be identity):
    /// c'(γ,γ') = c(γ,γ')·a_γ(b(γ'))·b(γγ')⁻¹·b(γ).
    pub fn twist_by_coboundary(&self, b: &[usize]) -> Cocycle2 {
        assert_eq!(b.len(), self.gamma.order());
        assert_eq!(b[0], 0, "normalized coboundary needs b(1) = 1");
        let n = self.gamma.order();
        let mut table = vec![0u16; n * n];
        for g1 in 0..n {
            for g2 in 0..n {
                let mut v = self.value(g1, g2);
                v = self.z.mul(v, self.act(g1, b[g2]));
                v = self.z.mul(v, self.z.inv(b[self.gamma.mul(g1, g2)]));
                v = self.z.mul(v, b[g1]);
                table[g1 * n + g2] = v as u16;
            }
        }
        Cocycle2::new(
            self.gamma.clone(),
            self.z.clone(),
            self.action.clone(),
            table,
        )
    }
}

/// Brute-force coboundary equivalence: search all normalized b: Γ → Z.
pub fn cohomologous(c1: &Cocycle2, c2: &Cocycle2) -> Result<bool, ExtError> {
    if c1.gamma != c2.gamma || c1.z != c2.z || c1.action != c2.action {
        return Err(ExtError::IncompatibleCocycles);
    }
    let n = c1.gamma.order();
    let zn = c1.z.order();
    let space = (zn as f64).powi(n as i32);
    if space > (1u64 << 20) as f64 {
        return Err(ExtError::CoboundaryGuard);
    }
    let mut b = vec![0usize; n];
    loop {
        if &c1.twist_by_coboundary(&b) == c2 {
            return Ok(true);
        }
        let mut i = 1;
        loop {
            if i >= n {
                return Ok(false);
            }
            b[i] += 1;
            if b[i] < zn {
                break;
            }
            b[i] = 0;
            i += 1;
        }
    }
}

// ---------------------------------------------------------------------------
// Twisted products
// ---------------------------------------------------------------------------

/// The twisted product G₀ ×_(τ,c) Γ with multiplication
/// (g, γ)(g', γ') = (g·τ_γ(g')·c(γ,γ'), γγ').
pub struct TwistedGroup<G: GroupOps> {
    pub g0: G,
    pub gamma: SmallGroup,
    /// τ_γ as functions on the carrier; τ[0] must be the identity map.
    pub tau: Vec<Rc<dyn Fn(&G::Elem) -> G::Elem>>,
    /// c(γ, γ') as carrier elements (must be central in G₀).
    pub cocycle_values: Vec<G::Elem>,
}

impl<G: GroupOps> TwistedGroup<G> {
    pub fn new(
        g0: G,
        gamma: SmallGroup,
        tau: Vec<Rc<dyn Fn(&G::Elem) -> G::Elem>>,
        cocycle_values: Vec<G::Elem>,
    ) -> Self {
        assert_eq!(tau.len(), gamma.order());
        assert_eq!(cocycle_values.len(), gamma.order() * gamma.order());
        TwistedGroup {
            g0,
            gamma,
            tau,
            cocycle_values,
        }
    }

    pub fn c(&self, g1: usize, g2: usize) -> &G::Elem {
        &self.cocycle_values[g1 * self.gamma.order() + g2]
    }

    pub fn identity(&self) -> (G::Elem, usize) {
        (self.g0.identity(), 0)
    }

    /// (g, γ)(g', γ') = (g·τ_γ(g')·c(γ,γ'), γγ').
    pub fn multiply(&self, x: &(G::Elem, usize), y: &(G::Elem, usize)) -> (G::Elem, usize) {
        let (g, ga) = x;
        let (h, gb) = y;
        let th = (self.tau[*ga])(h);
        let prod = self.g0.multiply(&self.g0.multiply(g, &th), self.c(*ga, *gb));
        (prod, self.gamma.mul(*ga, *gb))
    }

    pub fn eq(&self, x: &(G::Elem, usize), y: &(G::Elem, usize)) -> bool {
        x.1 == y.1 && self.g0.eq(&x.0, &y.0)
    }

    /// All elements when the carrier is enumerable.
    pub fn elements(&self) -> Option<Vec<(G::Elem, usize)>> {
        let base = self.g0.elements()?;
        let mut out = Vec::with_capacity(base.len() * self.gamma.order());
        for g in 0..self.gamma.order() {
            for b in &base {
                out.push((b.clone(), g));
            }
        }
        Some(out)
    }

    /// Exhaustive associativity and identity check; None when the carrier is
    /// not enumerable or exceeds the element guard.
    pub fn verify_exhaustive(&self, element_guard: usize) -> Option<bool> {
        let elems = self.elements()?;
        if elems.len() > element_guard {
            return None;
        }
        let e = self.identity();
        for x in &elems {
            if !self.eq(&self.multiply(&e, x), x) || !self.eq(&self.multiply(x, &e), x) {
                return Some(false);
            }
        }
        for x in &elems {
            for y in &elems {
                for z in &elems {
                    let a = self.multiply(&self.multiply(x, y), z);
                    let b = self.multiply(x, &self.multiply(y, z));
                    if !self.eq(&a, &b) {
                        return Some(false);
                    }
                }
            }
        }
        Some(true)
    }

    /// The tautological section γ ↦ (1, γ).
    pub fn tautological_section(&self) -> Vec<(G::Elem, usize)> {
        (0..self.gamma.order())
            .map(|g| (self.g0.identity(), g))
            .collect()
    }
}

/// Group operations on the elements of a twisted product whose carrier is
/// enumerable; inverse is found by search.
pub struct TwistedGroupOps<'a, G: GroupOps>(pub &'a TwistedGroup<G>);

impl<'a, G: GroupOps> GroupOps for TwistedGroupOps<'a, G> {
    type Elem = (G::Elem, usize);
    fn identity(&self) -> Self::Elem {
        self.0.identity()
    }
    fn multiply(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.0.multiply(a, b)
    }
    fn invert(&self, a: &Self::Elem) -> Self::Elem {
        let elems = self
            .0
            .elements()
            .expect("inversion by search needs an enumerable carrier");
        elems
            .into_iter()
            .find(|x| self.0.eq(&self.0.multiply(a, x), &self.0.identity()))
            .expect("group element has an inverse")
    }
    fn eq(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        self.0.eq(a, b)
    }
    fn key(&self, a: &Self::Elem) -> String {
        format!("{}@{}", self.0.g0.key(&a.0), a.1)
    }
    fn elements(&self) -> Option<Vec<Self::Elem>> {
        self.0.elements()
    }
}

// ---------------------------------------------------------------------------
// Section → cocycle extraction
// ---------------------------------------------------------------------------

/// Result of extracting a cocycle from a section of an extension
/// 1 → G₀ → G → Γ → 1.
pub struct SectionExtraction<E> {
    /// Raw values c(γ, γ') = t(γ)t(γ')t(γγ')⁻¹ as carrier elements.
    pub raw_values: Vec<E>,
    /// Carrier realization of each element of the abstract value group Z.
    pub z_elements: Vec<E>,
    /// The abstract cocycle over (Γ, Z) with the Int-induced action.
    pub cocycle: Cocycle2,
}

/// Extract (τ, c) from a normalized section t: Γ → G of an extension with
/// identity component generated by `g0_generators`.
///
/// Each value t(γ)t(γ')t(γγ')⁻¹ must commute with every generator of G₀; the
/// values must generate a finite abelian group (bounded by `value_guard`), and
/// the Int-action of the section must preserve that group.
pub fn cocycle_from_section<G: GroupOps>(
    g: &G,
    gamma: &SmallGroup,
    section: &[G::Elem],
    g0_generators: &[G::Elem],
    value_guard: usize,
) -> Result<SectionExtraction<G::Elem>, ExtError> {
    let n = gamma.order();
    assert_eq!(section.len(), n);
    if !g.eq(&section[0], &g.identity()) {
        return Err(ExtError::SectionNotNormalized);
    }
    let mut raw = Vec::with_capacity(n * n);
    for g1 in 0..n {
        for g2 in 0..n {
            let t12 = g.multiply(&section[g1], &section[g2]);
            let v = g.multiply(&t12, &g.invert(&section[gamma.mul(g1, g2)]));
            for h in g0_generators {
                let vh = g.multiply(&v, h);
                let hv = g.multiply(h, &v);
                if !g.eq(&vh, &hv) {
                    return Err(ExtError::ValueNotCentral(
                        gamma.label(g1).to_string(),
                        gamma.label(g2).to_string(),
                    ));
                }
            }
            raw.push(v);
        }
    }
    // closure of the generated value group
    let mut z_elems: Vec<G::Elem> = vec![g.identity()];
    let mut index: HashMap<String, usize> = HashMap::new();
    index.insert(g.key(&g.identity()), 0);
    let mut queue: VecDeque<usize> = VecDeque::new();
    queue.push_back(0);
    let gens: Vec<G::Elem> = raw.clone();
    while let Some(i) = queue.pop_front() {
        let x = z_elems[i].clone();
        for gen in &gens {
            for y in [g.multiply(&x, gen), g.multiply(&x, &g.invert(gen))] {
                let k = g.key(&y);
                if !index.contains_key(&k) {
                    if z_elems.len() >= value_guard {
                        return Err(ExtError::ValueGroupTooLarge { guard: value_guard });
                    }
                    index.insert(k, z_elems.len());
                    z_elems.push(y.clone());
                    queue.push_back(z_elems.len() - 1);
                }
            }
        }
    }
    let zn = z_elems.len();
    let mut ztable = vec![vec![0u16; zn]; zn];
    for a in 0..zn {
        for b in 0..zn {
            let p = g.multiply(&z_elems[a], &z_elems[b]);
            ztable[a][b] = *index
                .get(&g.key(&p))
                .expect("value group closed under multiplication") as u16;
        }
    }
    let zlabels = (0..zn).map(|i| format!("z{}", i)).collect();
    let z = SmallGroup::from_table(ztable, zlabels);
    // action a_γ = Int_{t(γ)} restricted to Z
    let mut action = vec![vec![0u16; zn]; n];
    for g1 in 0..n {
        for (zi, zel) in z_elems.iter().enumerate() {
            let conj = g.multiply(&g.multiply(&section[g1], zel), &g.invert(&section[g1]));
            match index.get(&g.key(&conj)) {
                Some(&j) => action[g1][zi] = j as u16,
                None => return Err(ExtError::ActionEscapesValues(gamma.label(g1).to_string())),
            }
        }
    }
    let table: Vec<u16> = raw.iter().map(|v| index[&g.key(v)] as u16).collect();
    let cocycle = Cocycle2::new(gamma.clone(), z, action, table);
    Ok(SectionExtraction {
        raw_values: raw,
        z_elements: z_elems,
        cocycle,
    })
}

/// Check that (g, γ) ↦ g·t(γ) is an isomorphism from the twisted product onto
/// the matrix group generated by G₀-generators and the section, by comparing
/// multiplication tables on the enumerated groups.
pub fn twisted_product_matches_matrix_group(
    tw: &TwistedGroup<MatrixGroup>,
    section: &[CycMatrix],
    table_guard: usize,
) -> Result<bool, ExtError> {
    let elems = match tw.elements() {
        Some(e) if e.len() <= table_guard => e,
        _ => return Err(ExtError::ClosureGuard { guard: table_guard }),
    };
    let conductor = section.iter().fold(tw.g0.conductor, |acc, m| {
        num::Integer::lcm(&acc, &m.conductor())
    });
    let embed = |x: &(CycMatrix, usize)| -> CycMatrix { x.0.mul(&section[x.1]).embed(conductor) };
    let mut seen: HashMap<String, ()> = HashMap::new();
    for x in &elems {
        let m = embed(x);
        if seen.insert(m.canonical_key(conductor), ()).is_some() {
            return Ok(false);
        }
    }
    for x in &elems {
        for y in &elems {
            let lhs = embed(&tw.multiply(x, y));
            let rhs = embed(x).mul(&embed(y));
            if lhs != rhs {
                return Ok(false);
            }
        }
    }
    let mut gens = tw.g0.generators.clone();
    gens.extend(section.iter().cloned());
    let generated = MatrixGroup::new(gens, table_guard + 1).closure()?;
    Ok(generated.len() == elems.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::make_group;
    use crate::cyclotomic::CycNum;

    fn z2_small() -> SmallGroup {
        SmallGroup::from_abelian(&make_group(&[2]))
    }

    fn v4_small() -> SmallGroup {
        SmallGroup::from_abelian(&make_group(&[2, 2]))
    }

    fn pm_one() -> SmallGroup {
        SmallGroup::from_table(vec![vec![0, 1], vec![1, 0]], vec!["1".into(), "-1".into()])
    }

    #[test]
    fn constant_one_table_verifies() {
        let c = Cocycle2::trivial(v4_small(), pm_one());
        assert!(c.verify().is_ok());
    }

    #[test]
    fn sign_cocycle_on_z2_verifies() {
        // Γ = ℤ/2, Z = {±1}, trivial action, c(1̄,1̄) = -1
        let gamma = z2_small();
        let z = pm_one();
        let action = vec![vec![0, 1], vec![0, 1]];
        let table = vec![0, 0, 0, 1];
        let c = Cocycle2::new(gamma, z, action, table);
        assert!(c.verify().is_ok());
    }

    #[test]
    fn printed_spin_exception_set_fails_cocycle_identity() {
        // The exception set {(b,a),(a,a),(ba,b),(b,ab)} violates the cocycle
        // identity at (a, a, b): with c(a,b) = 1 the identity forces
        // c(a,ab) = c(a,a).
        let gamma = v4_small(); // elements: 1=(0,0), b=(0,1), a=(1,0), ab=(1,1)
        let z = pm_one();
        let action = vec![vec![0, 1]; 4];
        let (b, a, ab) = (1usize, 2usize, 3usize);
        let mut table = vec![0u16; 16];
        for (x, y) in [(b, a), (a, a), (ab, b), (b, ab)] {
            table[x * 4 + y] = 1;
        }
        let c = Cocycle2::new(gamma, z, action, table);
        match c.verify() {
            CocycleCheck::IdentityFailed { .. } => {}
            other => panic!("expected identity failure, got {:?}", other),
        }
    }

    #[test]
    fn corrected_spin_exception_set_verifies() {
        // Same data with (ba,b) replaced by (a,ab) is a genuine cocycle.
        let gamma = v4_small();
        let z = pm_one();
        let action = vec![vec![0, 1]; 4];
        let (b, a, ab) = (1usize, 2usize, 3usize);
        let mut table = vec![0u16; 16];
        for (x, y) in [(b, a), (a, a), (a, ab), (b, ab)] {
            table[x * 4 + y] = 1;
        }
        let c = Cocycle2::new(gamma, z, action, table);
        assert!(c.verify().is_ok());
    }

    #[test]
    fn cohomologous_basics() {
        let gamma = z2_small();
        let z = pm_one();
        let action = vec![vec![0, 1], vec![0, 1]];
        let trivial = Cocycle2::new(gamma.clone(), z.clone(), action.clone(), vec![0, 0, 0, 0]);
        let sign = Cocycle2::new(gamma, z, action, vec![0, 0, 0, 1]);
        assert!(cohomologous(&trivial, &trivial).unwrap());
        // the sign cocycle is NOT a coboundary on ℤ/2
        assert!(!cohomologous(&trivial, &sign).unwrap());
        // twisting by any coboundary stays cohomologous
        let twisted = sign.twist_by_coboundary(&[0, 1]);
        assert!(cohomologous(&sign, &twisted).unwrap());
    }

    #[test]
    fn twisted_multiply_gl1_by_z2() {
        // GL(1) ×_{inv, -1} ℤ/2 on the finite carrier ⟨i⟩:
        // (1, 1̄)·(1, 1̄) = (-1, 0̄).
        let i = CycMatrix::from_rows(vec![vec![CycNum::i()]]);
        let g0 = MatrixGroup::new(vec![i], 16);
        let gamma = z2_small();
        let inv_map: Rc<dyn Fn(&CycMatrix) -> CycMatrix> =
            Rc::new(|m: &CycMatrix| m.inverse().unwrap());
        let id_map: Rc<dyn Fn(&CycMatrix) -> CycMatrix> = Rc::new(|m: &CycMatrix| m.clone());
        let one = CycMatrix::identity(1);
        let minus_one = one.scalar_mul(&CycNum::from_int(-1));
        let tw = TwistedGroup::new(
            g0,
            gamma,
            vec![id_map, inv_map],
            vec![one.clone(), one.clone(), one.clone(), minus_one.clone()],
        );
        let x = (CycMatrix::identity(1), 1usize);
        let prod = tw.multiply(&x, &x);
        assert_eq!(prod.1, 0);
        assert_eq!(prod.0, minus_one);
        let e = tw.identity();
        assert!(tw.eq(&tw.multiply(&e, &x), &x));
        assert_eq!(tw.verify_exhaustive(10_000), Some(true));
    }

    #[test]
    fn section_roundtrip_on_twisted_group() {
        // Extract the cocycle back through the tautological section and
        // compare tables.
        let j = CycMatrix::from_int_rows(&[&[0, 1], &[-1, 0]]);
        let minus = CycMatrix::identity(2).scalar_mul(&CycNum::from_int(-1));
        let g0 = MatrixGroup::new(vec![minus.clone()], 8);
        let gamma = z2_small();
        let id_map: Rc<dyn Fn(&CycMatrix) -> CycMatrix> = Rc::new(|m: &CycMatrix| m.clone());
        let int_j: Rc<dyn Fn(&CycMatrix) -> CycMatrix> = {
            let j = j.clone();
            Rc::new(move |m: &CycMatrix| j.int_conj(m).unwrap())
        };
        let one = CycMatrix::identity(2);
        let tw = TwistedGroup::new(
            g0,
            gamma.clone(),
            vec![id_map, int_j],
            vec![one.clone(), one.clone(), one.clone(), minus.clone()],
        );
        let ops = TwistedGroupOps(&tw);
        let section = tw.tautological_section();
        let g0_gens: Vec<(CycMatrix, usize)> = tw
            .g0
            .generators
            .iter()
            .map(|m| (m.clone(), 0usize))
            .collect();
        let ext = cocycle_from_section(&ops, &gamma, &section, &g0_gens, 64).unwrap();
        assert!(ext.cocycle.verify().is_ok());
        assert_eq!(ext.cocycle.value(0, 0), 0);
        assert_eq!(ext.cocycle.value(0, 1), 0);
        assert_eq!(ext.cocycle.value(1, 0), 0);
        let v = ext.cocycle.value(1, 1);
        assert_eq!(ext.z_elements[v].0, minus);
    }

    #[test]
    fn section_extraction_sp2() {
        // t(1̄) = J gives c(1̄,1̄) = J² = -I.
        let j = CycMatrix::from_int_rows(&[&[0, 1], &[-1, 0]]);
        let i_diag = CycMatrix::diagonal(&[CycNum::i(), CycNum::i().inv().unwrap()]);
        let g = MatrixGroup::new(vec![i_diag.clone(), j.clone()], 64);
        let gamma = z2_small();
        let section = vec![CycMatrix::identity(2), j.clone()];
        let ext = cocycle_from_section(&g, &gamma, &section, &[i_diag], 64).unwrap();
        assert!(ext.cocycle.verify().is_ok());
        let v = ext.cocycle.value(1, 1);
        assert_eq!(
            ext.z_elements[v],
            CycMatrix::identity(2).scalar_mul(&CycNum::from_int(-1))
        );
    }

    #[test]
    fn non_central_value_rejected() {
        let swap = CycMatrix::from_int_rows(&[&[0, 1], &[1, 0]]);
        let u = CycMatrix::from_int_rows(&[&[1, 1], &[0, 1]]);
        let g = MatrixGroup::new(vec![u.clone(), swap.clone()], 4096);
        let gamma = z2_small();
        // c(1̄,1̄) = (u·swap)² is not central against u
        let t = u.mul(&swap);
        let bad = cocycle_from_section(
            &g,
            &gamma,
            &vec![CycMatrix::identity(2), t],
            &[u],
            4096,
        );
        assert!(matches!(bad, Err(ExtError::ValueNotCentral(_, _))));
    }

    #[test]
    fn twisted_matches_matrix_group() {
        // ⟨-I⟩ ×_{Int_J, -1} ℤ/2 embeds onto ⟨J⟩ ≅ ℤ/4 via (g,γ) ↦ g·t(γ)
        let j = CycMatrix::from_int_rows(&[&[0, 1], &[-1, 0]]);
        let minus = CycMatrix::identity(2).scalar_mul(&CycNum::from_int(-1));
        let g0 = MatrixGroup::new(vec![minus.clone()], 8);
        let gamma = z2_small();
        let id_map: Rc<dyn Fn(&CycMatrix) -> CycMatrix> = Rc::new(|m: &CycMatrix| m.clone());
        let int_j: Rc<dyn Fn(&CycMatrix) -> CycMatrix> = {
            let j = j.clone();
            Rc::new(move |m: &CycMatrix| j.int_conj(m).unwrap())
        };
        let tw = TwistedGroup::new(
            g0,
            gamma,
            vec![id_map, int_j],
            vec![
                CycMatrix::identity(2),
                CycMatrix::identity(2),
                CycMatrix::identity(2),
                minus,
            ],
        );
        let section = vec![CycMatrix::identity(2), j];
        assert!(twisted_product_matches_matrix_group(&tw, &section, 1000).unwrap());
    }
}
