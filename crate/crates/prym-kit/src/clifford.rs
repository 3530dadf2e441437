//! Exact Clifford algebra Cl(n, C), Spin elements as words of norm-±1
//! vectors, the adjoint covering map onto SO(n, C), and the order-two
//! involution data for the spin group, including the (Z/2)² cocycle of the
//! block-rotation case.
//!
//! Conventions: the quotient relation is v·v = -ω(v) with ω the standard
//! orthogonal form, so eᵢ² = -1 and eᵢeⱼ = -eⱼeᵢ for i ≠ j.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::abelian::make_group;
use crate::cyclotomic::{CycMatrix, CycNum};
use crate::extensions::{
    cocycle_from_section, ExtError, GroupOps, SectionExtraction, SmallGroup,
};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CliffordError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("covering map needs an even-length word, got length {0}")]
    OddWord(usize),
    #[error("word vector has norm {0}, expected ±1")]
    BadNorm(String),
    #[error("adjoint action did not return a vector")]
    NotAVector,
    #[error("invalid split (p, q) = ({0}, {1}) for n = {2}; p must be even and p + q = n")]
    BadSplit(usize, usize, usize),
    #[error(transparent)]
    Ext(#[from] ExtError),
}

/// Element of Cl(n, C): a finite sum of basis monomials e_S, S ⊆ {1..n},
/// with exact cyclotomic coefficients. Subsets are bitmasks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliffordElem {
    pub n: usize,
    terms: BTreeMap<u32, CycNum>,
}

/// Sign from moving every generator of `t` past the greater generators of `s`
/// plus the squared generators: e_S·e_T = sign · e_{S△T}.
fn product_sign(s: u32, t: u32) -> i64 {
    let mut swaps = 0u32;
    let mut tt = t;
    while tt != 0 {
        let j = tt.trailing_zeros();
        // generators of s strictly greater than j
        swaps += (s >> (j + 1)).count_ones();
        tt &= tt - 1;
    }
    let squared = (s & t).count_ones(); // each eᵢ² contributes -1
    if (swaps + squared) % 2 == 0 {
        1
    } else {
        -1
    }
}

impl CliffordElem {
    pub fn zero(n: usize) -> Self {
        CliffordElem {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(n: usize, c: CycNum) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(0, c);
        }
        CliffordElem { n, terms }
    }

    pub fn one(n: usize) -> Self {
        Self::scalar(n, CycNum::one())
    }

    pub fn generator(n: usize, i: usize) -> Self {
        assert!(i < n);
        Self::monomial(n, 1 << i, CycNum::one())
    }

    pub fn monomial(n: usize, subset: u32, coeff: CycNum) -> Self {
        assert!(subset < (1u32 << n));
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(subset, coeff);
        }
        CliffordElem { n, terms }
    }

    /// The element Σ vᵢ eᵢ of grade 1.
    pub fn vector(n: usize, v: &[CycNum]) -> Self {
        assert_eq!(v.len(), n);
        let mut out = Self::zero(n);
        for (i, c) in v.iter().enumerate() {
            out = out.add(&Self::monomial(n, 1 << i, c.clone()));
        }
        out
    }

    /// Full volume monomial e₁e₂⋯e_n.
    pub fn volume(n: usize) -> Self {
        Self::monomial(n, (1u32 << n) - 1, CycNum::one())
    }

    pub fn terms(&self) -> &BTreeMap<u32, CycNum> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_scalar(&self) -> bool {
        self.terms.keys().all(|&s| s == 0)
    }

    pub fn as_scalar(&self) -> Option<CycNum> {
        if self.terms.is_empty() {
            return Some(CycNum::zero());
        }
        if self.is_scalar() {
            return Some(self.terms[&0].clone());
        }
        None
    }

    pub fn add(&self, other: &CliffordElem) -> CliffordElem {
        assert_eq!(self.n, other.n);
        let mut terms = self.terms.clone();
        for (&s, c) in &other.terms {
            let v = match terms.get(&s) {
                Some(prev) => prev.add(c),
                None => c.clone(),
            };
            if v.is_zero() {
                terms.remove(&s);
            } else {
                terms.insert(s, v);
            }
        }
        CliffordElem { n: self.n, terms }
    }

    pub fn neg(&self) -> CliffordElem {
        CliffordElem {
            n: self.n,
            terms: self.terms.iter().map(|(&s, c)| (s, c.neg())).collect(),
        }
    }

    pub fn sub(&self, other: &CliffordElem) -> CliffordElem {
        self.add(&other.neg())
    }

    pub fn scalar_mul(&self, c: &CycNum) -> CliffordElem {
        if c.is_zero() {
            return Self::zero(self.n);
        }
        CliffordElem {
            n: self.n,
            terms: self.terms.iter().map(|(&s, x)| (s, x.mul(c))).collect(),
        }
    }

    pub fn mul(&self, other: &CliffordElem) -> Result<CliffordElem, CliffordError> {
        if self.n != other.n {
            return Err(CliffordError::DimensionMismatch(self.n, other.n));
        }
        let mut out = Self::zero(self.n);
        for (&s, cs) in &self.terms {
            for (&t, ct) in &other.terms {
                let sign = product_sign(s, t);
                let coeff = cs.mul(ct).mul(&CycNum::from_int(sign));
                out = out.add(&Self::monomial(self.n, s ^ t, coeff));
            }
        }
        Ok(out)
    }

    /// Part of the given parity (0 = even, 1 = odd).
    pub fn graded_part(&self, parity: u32) -> CliffordElem {
        CliffordElem {
            n: self.n,
            terms: self
                .terms
                .iter()
                .filter(|(&s, _)| s.count_ones() % 2 == parity)
                .map(|(&s, c)| (s, c.clone()))
                .collect(),
        }
    }

    pub fn is_even(&self) -> bool {
        self.terms.keys().all(|&s| s.count_ones() % 2 == 0)
    }

    /// Coefficients of the grade-1 part as a vector, when the element is
    /// purely grade 1.
    pub fn as_vector(&self) -> Option<Vec<CycNum>> {
        if !self.terms.keys().all(|&s| s.count_ones() == 1) {
            return None;
        }
        let mut v = vec![CycNum::zero(); self.n];
        for (&s, c) in &self.terms {
            v[s.trailing_zeros() as usize] = c.clone();
        }
        Some(v)
    }

    pub fn canonical_key(&self, conductor: u64) -> String {
        let mut s = String::new();
        for (&m, c) in &self.terms {
            s.push_str(&format!("{}:{};", m, c.canonical_key(conductor)));
        }
        s
    }
}

/// ω(v) = Σ vᵢ² for the standard orthogonal form.
pub fn norm_of_vector(v: &[CycNum]) -> CycNum {
    v.iter().fold(CycNum::zero(), |acc, c| acc.add(&c.mul(c)))
}

/// Formal product of norm-±1 vectors with an optional root-of-unity prefix;
/// the concrete Clifford element is cached. Even-length words are the spin
/// group elements.
#[derive(Debug, Clone)]
pub struct SpinWord {
    pub n: usize,
    pub scalar: CycNum,
    pub vectors: Vec<Vec<CycNum>>,
    elem: CliffordElem,
}

impl SpinWord {
    pub fn new(n: usize, scalar: CycNum, vectors: Vec<Vec<CycNum>>) -> Result<Self, CliffordError> {
        if scalar.as_root_of_unity().is_none() {
            return Err(CliffordError::BadNorm(scalar.to_string()));
        }
        let mut elem = CliffordElem::scalar(n, scalar.clone());
        for v in &vectors {
            if v.len() != n {
                return Err(CliffordError::DimensionMismatch(v.len(), n));
            }
            let w = norm_of_vector(v);
            if w != CycNum::one() && w != CycNum::from_int(-1) {
                return Err(CliffordError::BadNorm(w.to_string()));
            }
            elem = elem.mul(&CliffordElem::vector(n, v))?;
        }
        Ok(SpinWord {
            n,
            scalar,
            vectors,
            elem,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::new(n, CycNum::one(), vec![]).expect("identity word")
    }

    pub fn from_basis_indices(n: usize, indices: &[usize]) -> Self {
        let vectors = indices
            .iter()
            .map(|&i| {
                let mut v = vec![CycNum::zero(); n];
                v[i] = CycNum::one();
                v
            })
            .collect();
        Self::new(n, CycNum::one(), vectors).expect("basis word")
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn is_even(&self) -> bool {
        self.len() % 2 == 0
    }

    pub fn elem(&self) -> &CliffordElem {
        &self.elem
    }

    pub fn mul(&self, other: &SpinWord) -> Result<SpinWord, CliffordError> {
        if self.n != other.n {
            return Err(CliffordError::DimensionMismatch(self.n, other.n));
        }
        let mut vectors = self.vectors.clone();
        vectors.extend(other.vectors.iter().cloned());
        Self::new(self.n, self.scalar.mul(&other.scalar), vectors)
    }

    pub fn scalar_mul(&self, c: &CycNum) -> Result<SpinWord, CliffordError> {
        Self::new(self.n, self.scalar.mul(c), self.vectors.clone())
    }

    /// Inverse word: reversed vectors with v⁻¹ = -v/ω(v), inverted scalar.
    pub fn invert(&self) -> SpinWord {
        let mut vectors = Vec::with_capacity(self.len());
        for v in self.vectors.iter().rev() {
            let w = norm_of_vector(v);
            // v² = -ω(v), so v⁻¹ = -v/ω(v)
            let factor = CycNum::from_int(-1).div(&w).expect("norm ±1");
            vectors.push(v.iter().map(|c| c.mul(&factor)).collect());
        }
        let scalar = self.scalar.inv().expect("root of unity");
        Self::new(self.n, scalar, vectors).expect("inverse word")
    }

    pub fn neg(&self) -> SpinWord {
        self.scalar_mul(&CycNum::from_int(-1)).expect("sign flip")
    }
}

/// Adjoint action of an even word on V: the matrix of v ↦ w v w⁻¹ in the
/// standard basis. Verified orthogonal with determinant 1.
pub fn covering_map(w: &SpinWord) -> Result<CycMatrix, CliffordError> {
    if !w.is_even() {
        return Err(CliffordError::OddWord(w.len()));
    }
    let n = w.n;
    let winv = w.invert();
    let mut cols: Vec<Vec<CycNum>> = Vec::with_capacity(n);
    for j in 0..n {
        let x = CliffordElem::generator(n, j);
        let y = w.elem().mul(&x)?.mul(winv.elem())?;
        let col = y.as_vector().ok_or(CliffordError::NotAVector)?;
        cols.push(col);
    }
    let m = CycMatrix::from_fn(n, n, |r, c| cols[c][r].clone());
    // exact orthogonality and determinant checks
    let mtm = m.transpose().mul(&m);
    if mtm != CycMatrix::identity(n) {
        return Err(CliffordError::NotAVector);
    }
    if m.det() != CycNum::one() {
        return Err(CliffordError::NotAVector);
    }
    Ok(m)
}

/// Group operations on spin words; equality goes through the cached algebra
/// elements, at a fixed conductor.
pub struct SpinGroupOps {
    pub n: usize,
    pub conductor: u64,
}

impl GroupOps for SpinGroupOps {
    type Elem = SpinWord;
    fn identity(&self) -> SpinWord {
        SpinWord::identity(self.n)
    }
    fn multiply(&self, a: &SpinWord, b: &SpinWord) -> SpinWord {
        a.mul(b).expect("same dimension")
    }
    fn invert(&self, a: &SpinWord) -> SpinWord {
        a.invert()
    }
    fn eq(&self, a: &SpinWord, b: &SpinWord) -> bool {
        a.elem() == b.elem()
    }
    fn key(&self, a: &SpinWord) -> String {
        a.elem().canonical_key(self.conductor)
    }
    fn elements(&self) -> Option<Vec<SpinWord>> {
        None
    }
}

// ---------------------------------------------------------------------------
// Involution data
// ---------------------------------------------------------------------------

/// The order-two element s = i·v₁v_{p+1} covering a point of
/// O⁻(p)×O⁻(q) ⊂ SO(n), with its verification data.
#[derive(Debug)]
pub struct SpinInvolutionData {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub s: SpinWord,
    /// s² as an algebra element (must be 1).
    pub s_squared: CliffordElem,
    /// f(s): diag(-1, 1, …, 1, -1, 1, …) with -1 at slots 1 and p+1.
    pub adjoint: CycMatrix,
    /// Generator words e_ie_j of Spin(p)×Spin(q) are preserved by Ad_s.
    pub preserves_factors: bool,
    /// Mixed-index generator words anticommuting with s (nonempty ⇒ s is not
    /// central). 1-based index pairs.
    pub noncentral_witnesses: Vec<(usize, usize)>,
}

/// Build s := i·v₁·v_{p+1} for the split n = p + q (p even) and verify its
/// defining identities exactly.
pub fn build_spin_involution_data(
    n: usize,
    p: usize,
    q: usize,
) -> Result<SpinInvolutionData, CliffordError> {
    if p + q != n || p % 2 != 0 || p == 0 || q == 0 || n > 30 {
        return Err(CliffordError::BadSplit(p, q, n));
    }
    let mut sw = SpinWord::from_basis_indices(n, &[0, p]);
    sw = sw.scalar_mul(&CycNum::i())?;
    let s_squared = sw.elem().mul(sw.elem())?;
    let adjoint = covering_map(&sw)?;
    // Ad_s on the e_ie_j generator words of the two factors
    let mut preserves = true;
    let mut witnesses = Vec::new();
    let sinv = sw.invert();
    let first_block = (1u32 << p) - 1;
    for i in 0..n {
        for j in (i + 1)..n {
            let gen = SpinWord::from_basis_indices(n, &[i, j]);
            let same_factor = (i < p && j < p) || (i >= p && j >= p);
            if same_factor {
                let conj = sw.mul(&gen).unwrap().mul(&sinv).unwrap();
                // must stay inside the same coordinate block
                let inside = conj.elem().terms().keys().all(|&m| {
                    let lo = m & first_block;
                    let hi = m & !first_block;
                    lo == 0 || hi == 0
                });
                preserves &= inside;
            } else {
                // mixed generators: record anticommutation with s
                let sg = sw.elem().mul(gen.elem()).unwrap();
                let gs = gen.elem().mul(sw.elem()).unwrap();
                if sg == gs.neg() {
                    witnesses.push((i + 1, j + 1));
                }
            }
        }
    }
    Ok(SpinInvolutionData {
        n,
        p,
        q,
        s: sw,
        s_squared,
        adjoint,
        preserves_factors: preserves,
        noncentral_witnesses: witnesses,
    })
}

// ---------------------------------------------------------------------------
// The Spin(4m) block-rotation cocycle
// ---------------------------------------------------------------------------

/// All data of the (Z/2)² extension of Spin(2m)×Spin(2m) inside Spin(4m).
pub struct Spin4mData {
    pub m: usize,
    /// Pure rotation lift with f(rotation_lift) = J; its square is ±ω.
    pub rotation_lift: SpinWord,
    pub rotation_lift_squared: CliffordElem,
    /// f(rotation_lift), verified equal to the block form (0, I; -I, 0).
    pub j_matrix: CycMatrix,
    /// Canonical a-section: (i·)ω₁·rotation_lift, whose square is exactly -1.
    pub t_a: SpinWord,
    pub t_a_squared: CliffordElem,
    /// f(t_a): the a-component representative actually used by the section.
    pub t_a_adjoint: CycMatrix,
    /// The order-two element s = i·e₁e_{2m+1}.
    pub s: SpinWord,
    /// Extracted cocycle over Γ = (ℤ/2)² with the canonical section
    /// t(a) = t_a, t(b) = s, t(ab) = t_a·s.
    pub extraction: SectionExtraction<SpinWord>,
    /// Exception set in (a, b, ab) naming.
    pub exceptions: Vec<(String, String)>,
}

/// Γ = (ℤ/2)² with elements ordered (0,0), (0,1) = b, (1,0) = a, (1,1) = ab.
pub fn spin4m_gamma() -> SmallGroup {
    SmallGroup::from_abelian(&make_group(&[2, 2]))
}

pub fn gamma_name(label: &str) -> String {
    match label {
        "(0,0)" => "1".to_string(),
        "(0,1)" => "b".to_string(),
        "(1,0)" => "a".to_string(),
        "(1,1)" => "ab".to_string(),
        other => other.to_string(),
    }
}

/// Construct the Spin(4m) extension data and its 2-cocycle.
///
/// The pure rotation lift J' of J satisfies J'² = ±ω ∉ {±1}: the fibre of
/// -I ∈ SO(4m) consists of the volume elements ±ω only. The canonical section
/// therefore corrects by the first-factor volume element, t(a) := c·ω₁·J'
/// with c ∈ {1, i} chosen so that t(a)² = -1 exactly. The resulting cocycle
/// takes values in {±1} and its exception set is
/// {(b,a), (a,a), (a,ab), (b,ab)}.
pub fn spin4m_cocycle(m: usize) -> Result<Spin4mData, CliffordError> {
    assert!(m >= 1, "m must be positive");
    let n = 4 * m;
    if n > 14 {
        return Err(CliffordError::BadSplit(2 * m, 2 * m, n));
    }
    // rotation lift: ∏_j (1 - e_j e_{2m+j})/√2
    let sqrt2_inv = {
        // √2 = ζ₈ + ζ₈⁻¹
        let sqrt2 = CycNum::root_of_unity(8, 1).add(&CycNum::root_of_unity(8, -1));
        CycNum::one().div(&sqrt2).expect("nonzero")
    };
    let mut rotation = SpinWord::identity(n);
    for j in 0..(2 * m) {
        // (1 - e_j e_{2m+j})/√2 = -u·v with u = e_j, v = (e_j + e_{2m+j})/√2:
        // u·v = (-1 + e_j e_{2m+j})/√2.
        let u = {
            let mut v = vec![CycNum::zero(); n];
            v[j] = CycNum::one();
            v
        };
        let v = {
            let mut v = vec![CycNum::zero(); n];
            v[j] = sqrt2_inv.clone();
            v[2 * m + j] = sqrt2_inv.clone();
            v
        };
        let factor = SpinWord::new(n, CycNum::from_int(-1), vec![u, v])?;
        rotation = rotation.mul(&factor)?;
    }
    let j_matrix = covering_map(&rotation)?;
    let rotation_squared = rotation.elem().mul(rotation.elem())?;
    // correction: ω₁ (and a scalar i when needed) makes the square -1
    let omega1 = SpinWord::from_basis_indices(n, &(0..2 * m).collect::<Vec<_>>());
    let mut t_a = omega1.mul(&rotation)?;
    let sq = t_a.elem().mul(t_a.elem())?;
    if sq.as_scalar() == Some(CycNum::one()) {
        t_a = t_a.scalar_mul(&CycNum::i())?;
    }
    let t_a_squared = t_a.elem().mul(t_a.elem())?;
    let t_a_adjoint = covering_map(&t_a)?;
    // s = i e₁ e_{2m+1}
    let s = SpinWord::from_basis_indices(n, &[0, 2 * m]).scalar_mul(&CycNum::i())?;
    // section over Γ: elements (0,0), (0,1) = b, (1,0) = a, (1,1) = ab
    let gamma = spin4m_gamma();
    let section = vec![SpinWord::identity(n), s.clone(), t_a.clone(), t_a.mul(&s)?];
    // generators of the embedded Spin(2m)×Spin(2m): pair words in each block
    let mut g0_gens = Vec::new();
    for base in [0usize, 2 * m] {
        for i in 0..(2 * m) {
            for jj in (i + 1)..(2 * m) {
                g0_gens.push(SpinWord::from_basis_indices(n, &[base + i, base + jj]));
            }
        }
    }
    let ops = SpinGroupOps { n, conductor: 8 };
    let ext = cocycle_from_section(&ops, &gamma, &section, &g0_gens, 64)?;
    let exceptions = ext
        .cocycle
        .exception_labels()
        .into_iter()
        .map(|(x, y)| (gamma_name(&x), gamma_name(&y)))
        .collect();
    Ok(Spin4mData {
        m,
        rotation_lift: rotation,
        rotation_lift_squared: rotation_squared,
        j_matrix,
        t_a,
        t_a_squared,
        t_a_adjoint,
        s,
        extraction: ext,
        exceptions,
    })
}
