//! The Sp(2n, C) classification layer: representative quadruples (l, Δ, q, s)
//! with the characteristic homomorphism q, symplectic normalization, the
//! symplectically corrected matrices M^γ, admissibility, the order-2-vs-4
//! class split, and the symplectic census.
//!
//! Basis conventions: the symplectic form is the block J = (0, I_n; -I_n, 0);
//! weight blocks are laid out so that ω-paired blocks occupy mirrored index
//! ranges. When q(δ) = -1 the actual eigenvalues of s(δ) are w(δ)·i for the
//! stored ±1-valued weight characters w (the sign-normalization flag on the
//! weight decomposition records q).

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::abelian::{
    enumerate_antisymmetric_pairings, isotropy_data, maximal_isotropic_subgroups, AbelianError,
    Character, FinAbGroup, GroupElem, IsotropyData, Pairing, Subgroup,
};
use crate::cyclotomic::weights::WeightError;
use crate::cyclotomic::{analyze_permutation_matrix, CycError, CycMatrix, CycNum};
use crate::cyclotomic::{WeightBlock, WeightDecomposition};
use crate::gl_fixed::{self, induced_pairing, solve_twist, GlError};

#[derive(Debug, thiserror::Error)]
pub enum SpError {
    #[error(transparent)]
    Abelian(#[from] AbelianError),
    #[error(transparent)]
    Cyc(#[from] CycError),
    #[error("weight structure: {0}")]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Gl(#[from] GlError),
    #[error("Λ must have exponent 2 for the symplectic layer, got {0}")]
    NotExponentTwo(u64),
    #[error("|ker q| = {ker} does not divide n = {n}")]
    DivisibilityFailure { ker: u64, n: u64 },
    #[error("s(δ) has a mixed eigenvalue pattern; not a valid quadruple datum")]
    MixedEigenvalues,
    #[error("matrix is not symplectic")]
    NotSymplectic,
    #[error("order choice {0} is not achievable for this (l, Δ, q) configuration")]
    InvalidOrderChoice(u8),
    #[error("order choice requires a nontrivial Λ/Δ")]
    NoGeneratorForOrderChoice,
    #[error("γ = {0:?} is not in Σ_θ")]
    NotInSigmaTheta(Vec<u64>),
    #[error("quadruple is not admissible")]
    NotAdmissible,
    #[error("simultaneous symplectic diagonalization failed: {0}")]
    DiagonalizationFailure(String),
    #[error("internal consistency: {0}")]
    Internal(String),
}

// ---------------------------------------------------------------------------
// Representative quadruples
// ---------------------------------------------------------------------------

pub struct RepQuadruple {
    pub lambda: FinAbGroup,
    pub l: Pairing,
    pub delta: Subgroup,
    /// Characteristic homomorphism, a character of the abstract Δ.
    pub q: Character,
    /// Half-dimension: matrices are 2n × 2n.
    pub n: usize,
    pub iso: IsotropyData,
    pub weights: WeightDecomposition,
    pub s: BTreeMap<GroupElem, CycMatrix>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadrupleReport {
    /// Int_s is a homomorphism.
    pub int_s_homomorphism: bool,
    /// s|Δ lands in diagonal matrices.
    pub delta_diagonal: bool,
    /// The induced pairing equals l.
    pub pairing_matches: bool,
    /// Every image is a permutation matrix with scalar blocks.
    pub scalar_permutation_blocks: bool,
    /// The eigenvalue patterns of s|Δ realize exactly q.
    pub characteristic_matches: bool,
    /// Every image preserves the standard symplectic form exactly.
    pub all_symplectic: bool,
}

impl QuadrupleReport {
    pub fn all_ok(&self) -> bool {
        self.int_s_homomorphism
            && self.delta_diagonal
            && self.pairing_matches
            && self.scalar_permutation_blocks
            && self.characteristic_matches
            && self.all_symplectic
    }
}

impl RepQuadruple {
    pub fn s_of(&self, e: &GroupElem) -> &CycMatrix {
        self.s.get(e).expect("s is total on Λ")
    }

    pub fn delta_factors(&self) -> &[u64] {
        self.iso.delta.group.invariant_factors()
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn restrict(&self, gamma: &Character) -> Character {
        self.iso
            .delta
            .restrict_character(gamma)
            .expect("restriction of a character")
    }

    pub fn q_is_trivial(&self) -> bool {
        self.q.exponents.iter().all(|&e| e == 0)
    }

    /// A GL-side view for reusing the solver machinery.
    pub fn gl_view(&self) -> gl_fixed::RepTriple {
        gl_fixed::RepTriple {
            lambda: self.lambda.clone(),
            l: self.l.clone(),
            delta: self.delta.clone(),
            n: self.dim(),
            iso: isotropy_data(&self.lambda, &self.l, &self.delta).expect("valid isotropy"),
            weights: self.weights.clone(),
            s: self.s.clone(),
        }
    }
}

/// |ker q| for a character q of Δ.
pub fn ker_q_order(dg: &FinAbGroup, q: &Character) -> u64 {
    dg.elements()
        .iter()
        .filter(|e| dg.char_eval(q, e) == 0)
        .count() as u64
}

// ---------------------------------------------------------------------------
// Weight layout
// ---------------------------------------------------------------------------

/// Mirror-paired weight layout for the standard form J = (0, I; -I, 0).
///
/// q trivial: every weight block spans a first-half range and its mirror, so
/// each block is internally symplectic. q nontrivial: ω pairs W_w with W_{qw};
/// the lexicographically smaller of each pair takes a first-half range and
/// its partner the mirrored range.
pub fn sp_weight_layout(
    dg: &FinAbGroup,
    q: &Character,
    n: usize,
) -> Result<WeightDecomposition, SpError> {
    let order = dg.order() as usize;
    let two_n = 2 * n;
    if two_n % order != 0 {
        return Err(SpError::Internal("|Δ| must divide 2n".into()));
    }
    let d = two_n / order;
    let chars = dg.characters();
    let q_trivial = q.exponents.iter().all(|&e| e == 0);
    let mut blocks: Vec<WeightBlock> = Vec::new();
    if q_trivial {
        if d % 2 != 0 {
            return Err(SpError::Internal(
                "block dimension must be even for trivial q".into(),
            ));
        }
        let half = d / 2;
        for (j, c) in chars.into_iter().enumerate() {
            let lo = j * half;
            let mut idx: Vec<usize> = (lo..lo + half).collect();
            idx.extend(n + lo..n + lo + half);
            blocks.push(WeightBlock {
                character: c,
                indices: idx,
            });
        }
    } else {
        let mut used: HashSet<Character> = HashSet::new();
        let mut reps = Vec::new();
        for c in &chars {
            if used.contains(c) {
                continue;
            }
            let partner = dg.char_mul(c, q);
            if partner == *c {
                return Err(SpError::Internal(
                    "q-pairing must be fixed-point free".into(),
                ));
            }
            used.insert(c.clone());
            used.insert(partner.clone());
            reps.push((c.clone(), partner));
        }
        for (j, (rep, partner)) in reps.into_iter().enumerate() {
            let lo = j * d;
            blocks.push(WeightBlock {
                character: rep,
                indices: (lo..lo + d).collect(),
            });
            blocks.push(WeightBlock {
                character: partner,
                indices: (n + lo..n + lo + d).collect(),
            });
        }
        blocks.sort_by(|a, b| a.character.cmp(&b.character));
    }
    Ok(WeightDecomposition::new(two_n, blocks, Some(q.clone())))
}

/// The actual eigenvalue of s(δ) on the block of weight w: w(δ)·i^[q(δ)=-1].
fn actual_eigenvalue(dg: &FinAbGroup, w: &Character, q: &Character, dcoords: &GroupElem) -> CycNum {
    let base = dg.char_value(w, dcoords);
    if dg.char_eval(q, dcoords) != 0 {
        base.mul(&CycNum::i())
    } else {
        base
    }
}

// ---------------------------------------------------------------------------
// Characteristic homomorphism
// ---------------------------------------------------------------------------

/// Read off q from the eigenvalue patterns of diagonal order-≤4 symplectic
/// images: +1 for eigenvalues ±1, -1 for eigenvalues ±i. Mixed patterns are
/// rejected.
pub fn characteristic_hom(
    dg: &FinAbGroup,
    delta: &crate::abelian::SubgroupStructure,
    s: &BTreeMap<GroupElem, CycMatrix>,
) -> Result<Character, SpError> {
    let mut exps = Vec::new();
    for b in &delta.basis {
        let m = s
            .get(b)
            .ok_or_else(|| SpError::Internal("s must cover Δ".into()))?;
        if !m.is_diagonal() {
            return Err(SpError::MixedEigenvalues);
        }
        let entries = m.diagonal_entries();
        let one = CycNum::one();
        let mone = CycNum::from_int(-1);
        let i = CycNum::i();
        let mi = i.neg();
        let all_pm_one = entries.iter().all(|e| e == &one || e == &mone);
        let all_pm_i = entries.iter().all(|e| e == &i || e == &mi);
        match (all_pm_one, all_pm_i) {
            (true, false) => exps.push(0),
            (false, true) => exps.push(1),
            _ => return Err(SpError::MixedEigenvalues),
        }
    }
    let q = Character { exponents: exps };
    for delem in delta.subgroup.elements() {
        let m = s
            .get(delem)
            .ok_or_else(|| SpError::Internal("s must cover Δ".into()))?;
        let coords = delta.coords(delem).expect("element of Δ");
        let want_imag = dg.char_eval(&q, &coords) != 0;
        let entries = m.diagonal_entries();
        let ok = if want_imag {
            entries
                .iter()
                .all(|e| e == &CycNum::i() || e == &CycNum::i().neg())
        } else {
            entries
                .iter()
                .all(|e| e == &CycNum::one() || e == &CycNum::from_int(-1))
        };
        if !ok {
            return Err(SpError::MixedEigenvalues);
        }
    }
    Ok(q)
}

// ---------------------------------------------------------------------------
// Quadruple verification
// ---------------------------------------------------------------------------

pub fn check_representative_quadruple(t: &RepQuadruple) -> QuadrupleReport {
    let lambda = &t.lambda;
    let mut int_ok = true;
    'outer: for (e1, m1) in &t.s {
        for (e2, m2) in &t.s {
            let prod = lambda.mul(e1, e2);
            let target = t.s_of(&prod);
            match target.inverse() {
                Ok(inv) => {
                    if m1.mul(m2).mul(&inv).as_scalar().is_none() {
                        int_ok = false;
                        break 'outer;
                    }
                }
                Err(_) => {
                    int_ok = false;
                    break 'outer;
                }
            }
        }
    }
    let delta_ok = t.delta.elements().iter().all(|d| t.s_of(d).is_diagonal());
    let pairing_ok = match induced_pairing(lambda, &t.s) {
        Ok(p) => p == t.l,
        Err(_) => false,
    };
    let mut perm_ok = true;
    for m in t.s.values() {
        match analyze_permutation_matrix(m, &t.weights, t.delta_factors()) {
            Ok(p) => {
                if p.scalar_blocks().is_none() {
                    perm_ok = false;
                }
            }
            Err(_) => perm_ok = false,
        }
    }
    let char_ok = {
        let sdelta: BTreeMap<GroupElem, CycMatrix> = t
            .delta
            .elements()
            .iter()
            .map(|d| (d.clone(), t.s_of(d).clone()))
            .collect();
        match characteristic_hom(&t.iso.delta.group, &t.iso.delta, &sdelta) {
            Ok(q) => q == t.q,
            Err(_) => false,
        }
    };
    let symplectic_ok = t.s.values().all(|m| m.is_symplectic().unwrap_or(false));
    QuadrupleReport {
        int_s_homomorphism: int_ok,
        delta_diagonal: delta_ok,
        pairing_matches: pairing_ok,
        scalar_permutation_blocks: perm_ok,
        characteristic_matches: char_ok,
        all_symplectic: symplectic_ok,
    }
}

// ---------------------------------------------------------------------------
// Symplectic correction of block matrices
// ---------------------------------------------------------------------------

/// Multiply a weight-permuting matrix by a diagonal Δ-matrix, constant on the
/// given families, to make it exactly symplectic. Returns the corrected
/// matrix and the per-block correction scalars.
pub fn symplectic_correct(
    weights: &WeightDecomposition,
    dg: &FinAbGroup,
    families: &[usize],
    m: &CycMatrix,
) -> Result<(CycMatrix, Vec<CycNum>), SpError> {
    let two_n = weights.dim;
    let n = two_n / 2;
    let nblocks = weights.blocks.len();
    // K = MᵀJM must be J scaled per hyperbolic pair
    let j = CycMatrix::j_std(two_n);
    let k = m.transpose().mul(&j).mul(m);
    let mut pair_scale: Vec<CycNum> = Vec::with_capacity(n);
    for a in 0..n {
        let v = k.at(a, a + n).clone();
        if v.is_zero() {
            return Err(SpError::NotSymplectic);
        }
        pair_scale.push(v);
    }
    {
        let mut expected = CycMatrix::zeros(two_n, two_n);
        for a in 0..n {
            expected.set(a, a + n, pair_scale[a].clone());
            expected.set(a + n, a, pair_scale[a].neg());
        }
        if k != expected {
            return Err(SpError::NotSymplectic);
        }
    }
    // D is applied after M; the final pair (a, a+n) carries the scale
    // d(tgt(block(a)))·d(tgt(block(a+n)))·scale(a), which must be 1.
    let block_of_index = |idx: usize| -> usize {
        weights
            .block_of_index(idx)
            .expect("index belongs to a block")
    };
    let shift = analyze_permutation_matrix(m, weights, dg.invariant_factors())?.p_image;
    let tgt_of_block = |b: usize| -> usize {
        let c = dg.char_mul(&weights.blocks[b].character, &shift);
        weights
            .block_index_of_character(&c)
            .expect("shift stays inside the weight set")
    };
    let nfam = families.iter().copied().max().map_or(0, |x| x + 1);
    let mut y: Vec<Option<CycNum>> = vec![None; nfam];
    struct Con {
        f1: usize,
        f2: usize,
        rhs: CycNum,
    }
    let mut cons: Vec<Con> = Vec::new();
    for a in 0..n {
        let b1 = tgt_of_block(block_of_index(a));
        let b2 = tgt_of_block(block_of_index(a + n));
        let rhs = pair_scale[a].inv()?;
        cons.push(Con {
            f1: families[b1],
            f2: families[b2],
            rhs,
        });
    }
    loop {
        let mut progress = false;
        for c in &cons {
            match (y[c.f1].clone(), y[c.f2].clone()) {
                (Some(v1), Some(v2)) => {
                    if v1.mul(&v2) != c.rhs {
                        return Err(SpError::Internal(
                            "inconsistent symplectic correction system".into(),
                        ));
                    }
                }
                (Some(v1), None) => {
                    y[c.f2] = Some(c.rhs.div(&v1)?);
                    progress = true;
                }
                (None, Some(v2)) => {
                    y[c.f1] = Some(c.rhs.div(&v2)?);
                    progress = true;
                }
                (None, None) => {}
            }
        }
        if !progress {
            if let Some(c) = cons.iter().find(|c| y[c.f1].is_none() && y[c.f2].is_none()) {
                if c.f1 == c.f2 {
                    let root = c.rhs.sqrt().ok_or_else(|| {
                        SpError::Internal("correction needs a square root".into())
                    })?;
                    y[c.f1] = Some(root);
                } else {
                    y[c.f1] = Some(CycNum::one());
                }
            } else {
                break;
            }
        }
    }
    let mut scalars = Vec::with_capacity(nblocks);
    let mut d = CycMatrix::identity(two_n);
    for b in 0..nblocks {
        let v = y[families[b]].clone().unwrap_or_else(CycNum::one);
        for &i in &weights.blocks[b].indices {
            d.set(i, i, v.clone());
        }
        scalars.push(v);
    }
    let corrected = d.mul(m);
    if !corrected.is_symplectic()? {
        return Err(SpError::NotSymplectic);
    }
    Ok((corrected, scalars))
}

/// Family partition of the weight blocks under a set of shift characters.
pub(crate) fn shift_families(
    weights: &WeightDecomposition,
    dg: &FinAbGroup,
    shift_gens: &[Character],
) -> Vec<usize> {
    let nblocks = weights.blocks.len();
    let mut family: Vec<usize> = (0..nblocks).collect();
    loop {
        let mut changed = false;
        for b in 0..nblocks {
            for g in shift_gens {
                let t = dg.char_mul(&weights.blocks[b].character, g);
                if let Some(ti) = weights.block_index_of_character(&t) {
                    let f = family[b].min(family[ti]);
                    if family[b] != f || family[ti] != f {
                        family[b] = f;
                        family[ti] = f;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut map: BTreeMap<usize, usize> = BTreeMap::new();
    for f in &family {
        let next = map.len();
        map.entry(*f).or_insert(next);
    }
    family.iter().map(|f| map[f]).collect()
}

// ---------------------------------------------------------------------------
// Σ_θ and M^γ, symplectic
// ---------------------------------------------------------------------------

/// Symplectic M^γ data together with its correction record.
pub struct SpGammaMatrix {
    pub gamma: Character,
    pub matrix: CycMatrix,
    /// Per-block central correction applied to reach Sp(2n, C).
    pub correction: Vec<CycNum>,
    /// The square M² as ±1.
    pub square_sign: i8,
}

fn full_families(t: &RepQuadruple) -> Vec<usize> {
    let f_chars = t.iso.f_image();
    shift_families(&t.weights, &t.iso.delta.group, &f_chars)
}

/// Build the symplectic M^γ for γ ∈ Σ_θ: solve the defining relation, then
/// correct by a central Δ-matrix to land in Sp(2n, C) exactly.
pub fn build_m_gamma_sp(t: &RepQuadruple, gamma: &Character) -> Result<SpGammaMatrix, SpError> {
    let shift = t.restrict(gamma);
    let constraints: Vec<(CycMatrix, CycNum)> =
        t.s.iter()
            .map(|(e, m)| (m.clone(), t.lambda.char_value(gamma, e)))
            .collect();
    let m = solve_twist(&t.weights, &t.iso.delta.group, &constraints, &shift)
        .ok_or_else(|| SpError::NotInSigmaTheta(gamma.exponents.clone()))?;
    let families = full_families(t);
    let (sym, correction) = symplectic_correct(&t.weights, &t.iso.delta.group, &families, &m)?;
    for (e, sm) in &t.s {
        let lhs = sm.int_conj(&sym)?;
        let rhs = sym.scalar_mul(&t.lambda.char_value(gamma, e));
        if lhs != rhs {
            return Err(SpError::Internal(
                "symplectic correction broke the defining relation".into(),
            ));
        }
    }
    let sq = sym.mul(&sym);
    let square_sign = match sq.as_scalar() {
        Some(c) if c == CycNum::one() => 1i8,
        Some(c) if c == CycNum::from_int(-1) => -1i8,
        _ => {
            return Err(SpError::Internal(
                "(M^γ)² must be ±1 for exponent-2 groups".into(),
            ))
        }
    };
    Ok(SpGammaMatrix {
        gamma: gamma.clone(),
        matrix: sym,
        correction,
        square_sign,
    })
}

/// Σ_θ via the weight formula and the solve route; both must agree, and
/// every member receives an exactly symplectic matrix.
pub fn sigma_theta_sp(t: &RepQuadruple) -> Result<Vec<SpGammaMatrix>, SpError> {
    let glt = t.gl_view();
    let formula = gl_fixed::sigma_theta_formula(&glt);
    let mut out = Vec::new();
    for gamma in t.lambda.characters() {
        let built = build_m_gamma_sp(t, &gamma);
        let in_formula = formula.contains(&gamma);
        match (built, in_formula) {
            (Ok(g), true) => out.push(g),
            (Err(SpError::NotInSigmaTheta(_)), false) => {}
            (res, _) => {
                return Err(SpError::Internal(format!(
                    "Σ_θ routes disagree at γ = {:?} (solver ok: {}, formula: {})",
                    gamma.exponents,
                    res.is_ok(),
                    in_formula
                )))
            }
        }
    }
    Ok(out)
}

/// Admissibility for quadruples: full weight set with equal dimensions,
/// cross-checked against surjectivity of c_θ through the solver.
pub fn is_admissible_sp(t: &RepQuadruple) -> Result<bool, SpError> {
    let full = t.weights.blocks.len() as u64 == t.iso.delta.group.order();
    let by_formula = full && t.weights.dims_equal();
    let by_image = sigma_theta_sp(t)?.len() as u64 == t.lambda.order();
    if by_formula != by_image {
        return Err(SpError::Internal("admissibility routes disagree".into()));
    }
    Ok(by_formula)
}

/// The ±1 Δ-matrix D of the q = γ case: +1 on a transversal of the q-pairing
/// stable under f(Λ/Δ), -1 on the complement. Exists when q ∉ f(Λ/Δ).
pub fn anticommuting_d(t: &RepQuadruple) -> Result<CycMatrix, SpError> {
    if t.q_is_trivial() {
        return Err(SpError::Internal("D needs a nontrivial q".into()));
    }
    let dg = &t.iso.delta.group;
    let f_image = t.iso.f_image();
    if f_image.contains(&t.q) {
        return Err(SpError::Internal("D needs q outside f(Λ/Δ)".into()));
    }
    let mut sign: BTreeMap<Character, i64> = BTreeMap::new();
    for b in &t.weights.blocks {
        if sign.contains_key(&b.character) {
            continue;
        }
        for fi in &f_image {
            let w = dg.char_mul(&b.character, fi);
            sign.insert(w.clone(), 1);
            sign.insert(dg.char_mul(&w, &t.q), -1);
        }
    }
    let mut d = CycMatrix::identity(t.dim());
    for b in &t.weights.blocks {
        let v = CycNum::from_int(sign[&b.character]);
        for &i in &b.indices {
            d.set(i, i, v.clone());
        }
    }
    Ok(d)
}

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

/// Number of distinct θ-classes for the data (l, Δ, q): the square signs of
/// the generator images are free, except that the coset f⁻¹(q) carries a
/// forced sign when q lies in the image of f.
pub fn variant_count(iso: &IsotropyData, q: &Character) -> u64 {
    let r = iso.quotient.group.rank() as u32;
    let q_trivial = q.exponents.iter().all(|&e| e == 0);
    let in_f = iso.f_image().contains(q);
    if !q_trivial && in_f {
        1u64 << (r - 1)
    } else {
        1u64 << r
    }
}

/// Construct an admissible quadruple for (l, Δ, q) on Sp(2n, C).
///
/// `order_choice` requests the element order (2 or 4) of the image of the
/// distinguished (last) Λ/Δ-generator lift; it errors when the configuration
/// forces the other order.
pub fn construct_admissible_s_sp(
    lambda: &FinAbGroup,
    l: &Pairing,
    delta: &Subgroup,
    q: &Character,
    n: usize,
    order_choice: Option<u8>,
) -> Result<RepQuadruple, SpError> {
    if lambda.exponent() > 2 {
        return Err(SpError::NotExponentTwo(lambda.exponent()));
    }
    let iso = isotropy_data(lambda, l, delta)?;
    let dg = iso.delta.group.clone();
    assert_eq!(q.exponents.len(), dg.rank(), "q must be a character of Δ");
    let kq = ker_q_order(&dg, q);
    if n as u64 % kq != 0 {
        return Err(SpError::DivisibilityFailure {
            ker: kq,
            n: n as u64,
        });
    }
    if let Some(oc) = order_choice {
        if oc != 2 && oc != 4 {
            return Err(SpError::InvalidOrderChoice(oc));
        }
        if iso.quotient.group.rank() == 0 {
            return Err(SpError::NoGeneratorForOrderChoice);
        }
    }
    let weights = sp_weight_layout(&dg, q, n)?;
    // s on Δ by the eigenvalue formula
    let mut s: BTreeMap<GroupElem, CycMatrix> = BTreeMap::new();
    for delem in delta.elements() {
        let coords = iso.delta.coords(delem).expect("element of Δ");
        let mut diag = vec![CycNum::zero(); 2 * n];
        for b in &weights.blocks {
            let v = actual_eigenvalue(&dg, &b.character, q, &coords);
            for &i in &b.indices {
                diag[i] = v.clone();
            }
        }
        let m = CycMatrix::diagonal(&diag);
        if !m.is_symplectic()? {
            return Err(SpError::Internal("s(δ) must be symplectic".into()));
        }
        s.insert(delem.clone(), m);
    }
    // extend over Λ/Δ generators; all have order 2
    let quotient = &iso.quotient;
    let gen_count = quotient.group.rank();
    let mut current: Vec<GroupElem> = delta.elements().to_vec();
    for gi in 0..gen_count {
        let mut gexp = vec![0i64; gen_count];
        gexp[gi] = 1;
        let qgen = quotient.group.elem(&gexp);
        let lam = quotient.representative(&qgen);
        if current.contains(&lam) {
            continue;
        }
        let constraints: Vec<(CycMatrix, CycNum)> = current
            .iter()
            .map(|h| (s[h].clone(), l.value(lambda, h, &lam)))
            .collect();
        let shift = {
            let mut exps = Vec::new();
            for (bi, b) in iso.delta.basis.iter().enumerate() {
                let e = dg.invariant_factors()[bi];
                let k = l.eval(lambda, b, &lam);
                let nn = lambda.exponent();
                if (k as u128 * e as u128) % nn as u128 != 0 {
                    return Err(SpError::Internal("pairing value outside Δ*".into()));
                }
                exps.push(((k as u128 * e as u128 / nn as u128) % e as u128) as u64);
            }
            Character { exponents: exps }
        };
        let base = solve_twist(&weights, &dg, &constraints, &shift)
            .ok_or_else(|| SpError::Internal("extension step unsolvable".into()))?;
        // symplectic correction, constant on the families of the current stage
        let stage_shifts: Vec<Character> = current
            .iter()
            .map(|h| {
                analyze_permutation_matrix(&s[h], &weights, dg.invariant_factors())
                    .map(|p| p.p_image)
                    .map_err(SpError::from)
            })
            .collect::<Result<_, _>>()?;
        let families = shift_families(&weights, &dg, &stage_shifts);
        let (mut m, _) = symplectic_correct(&weights, &dg, &families, &base)?;
        let sq = m
            .mul(&m)
            .as_scalar()
            .ok_or_else(|| SpError::Internal("generator image must square to a scalar".into()))?;
        let eps: i8 = if sq == CycNum::one() {
            1
        } else if sq == CycNum::from_int(-1) {
            -1
        } else {
            return Err(SpError::Internal("square must be ±1".into()));
        };
        // the requested order binds the distinguished last generator only;
        // other generators default to order 2 when reachable
        let want: Option<i8> = if gi + 1 == gen_count {
            match order_choice {
                Some(2) => Some(1),
                Some(4) => Some(-1),
                _ => None,
            }
        } else {
            None
        };
        let target = want.unwrap_or(1);
        if eps != target {
            match find_square_flip(&weights, &families, &m) {
                Some(c) => {
                    m = m.mul(&c);
                }
                None => {
                    if want.is_some() {
                        return Err(SpError::InvalidOrderChoice(order_choice.unwrap()));
                    }
                }
            }
        }
        let mut new_elems: Vec<(GroupElem, CycMatrix)> = Vec::new();
        for h in &current {
            new_elems.push((lambda.mul(h, &lam), s[h].mul(&m)));
        }
        for (e, mm) in new_elems {
            s.insert(e, mm);
        }
        let mut grown: Vec<GroupElem> = s.keys().cloned().collect();
        grown.sort();
        current = grown;
    }
    if s.len() as u64 != lambda.order() {
        return Err(SpError::Internal("s must become total".into()));
    }
    let t = RepQuadruple {
        lambda: lambda.clone(),
        l: l.clone(),
        delta: delta.clone(),
        q: q.clone(),
        n,
        iso,
        weights,
        s,
    };
    let report = check_representative_quadruple(&t);
    if !report.all_ok() {
        return Err(SpError::Internal(format!(
            "constructed quadruple fails its own check: {:?}",
            report
        )));
    }
    if !is_admissible_sp(&t)? {
        return Err(SpError::NotAdmissible);
    }
    Ok(t)
}

/// Search for a diagonal Δ-matrix C, constant on families and symplectic,
/// that flips the square sign of M: (MC)² = -M². Family values range over
/// fourth roots of unity; returns the first hit in deterministic order.
fn find_square_flip(
    weights: &WeightDecomposition,
    families: &[usize],
    m: &CycMatrix,
) -> Option<CycMatrix> {
    let nfam = families.iter().copied().max().map_or(0, |x| x + 1);
    let candidates = [
        CycNum::one(),
        CycNum::from_int(-1),
        CycNum::i(),
        CycNum::i().neg(),
    ];
    let mut assignment = vec![0usize; nfam];
    let target = m.mul(m).as_scalar().expect("square scalar").neg();
    loop {
        let mut c = CycMatrix::identity(weights.dim);
        for (b, block) in weights.blocks.iter().enumerate() {
            let v = &candidates[assignment[families[b]]];
            for &i in &block.indices {
                c.set(i, i, v.clone());
            }
        }
        let mc = m.mul(&c);
        if c.is_symplectic().unwrap_or(false)
            && mc
                .mul(&mc)
                .as_scalar()
                .map(|s| s == target)
                .unwrap_or(false)
        {
            return Some(c);
        }
        let mut i = 0;
        loop {
            if i >= nfam {
                return None;
            }
            assignment[i] += 1;
            if assignment[i] < candidates.len() {
                break;
            }
            assignment[i] = 0;
            i += 1;
        }
    }
}

// ---------------------------------------------------------------------------
// θ-classes
// ---------------------------------------------------------------------------

/// Canonical form of a symplectic class: the pairing, q, dimension data, and
/// the element orders of the canonical generator lifts (the order tags that
/// distinguish the two variants when they exist).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaClassSp {
    pub lambda_invariant_factors: Vec<u64>,
    pub pairing_matrix: Vec<Vec<u64>>,
    pub q_exponents: Vec<u64>,
    pub weight_dims: Vec<usize>,
    /// Element order (2 or 4) of s at each canonical Λ/Δ-generator lift.
    pub generator_orders: Vec<u8>,
}

pub fn theta_class_sp(t: &RepQuadruple) -> Result<ThetaClassSp, SpError> {
    if !is_admissible_sp(t)? {
        return Err(SpError::NotAdmissible);
    }
    let mut dims: Vec<usize> = t.weights.blocks.iter().map(WeightBlock::dim).collect();
    dims.sort_unstable();
    let mut orders = Vec::new();
    for gi in 0..t.iso.quotient.group.rank() {
        let mut gexp = vec![0i64; t.iso.quotient.group.rank()];
        gexp[gi] = 1;
        let lift = t
            .iso
            .quotient
            .representative(&t.iso.quotient.group.elem(&gexp));
        let m = t.s_of(&lift);
        let sq = m
            .mul(m)
            .as_scalar()
            .ok_or_else(|| SpError::Internal("generator square must be scalar".into()))?;
        orders.push(if sq == CycNum::one() { 2u8 } else { 4u8 });
    }
    Ok(ThetaClassSp {
        lambda_invariant_factors: t.lambda.invariant_factors().to_vec(),
        pairing_matrix: t.l.matrix().to_vec(),
        q_exponents: t.q.exponents.clone(),
        weight_dims: dims,
        generator_orders: orders,
    })
}

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

/// Normalize a raw symplectic action (Int_s a homomorphism, every image in
/// Sp(2n, C)) to a representative quadruple. Returns the quadruple, the
/// conjugator P (with s_new(λ) ∝ P⁻¹·s_raw(λ)·P exactly), and the scalar
/// defect of P against the standard form.
pub fn normalize_sp(
    lambda: &FinAbGroup,
    raw: &BTreeMap<GroupElem, CycMatrix>,
    guard: u64,
) -> Result<(RepQuadruple, CycMatrix, CycNum), SpError> {
    if lambda.exponent() > 2 {
        return Err(SpError::NotExponentTwo(lambda.exponent()));
    }
    if raw.len() as u64 != lambda.order() {
        return Err(SpError::Internal("s must be total".into()));
    }
    let two_n = raw
        .values()
        .next()
        .map(CycMatrix::n_rows)
        .ok_or_else(|| SpError::Internal("empty action".into()))?;
    if two_n % 2 != 0 {
        return Err(SpError::Internal("dimension must be even".into()));
    }
    let n = two_n / 2;
    for m in raw.values() {
        if !m.is_symplectic()? {
            return Err(SpError::NotSymplectic);
        }
    }
    let l = induced_pairing(lambda, raw)?;
    let delta = maximal_isotropic_subgroups(lambda, &l, guard)?
        .into_iter()
        .next()
        .ok_or_else(|| SpError::Internal("no maximal isotropic subgroup".into()))?;
    let iso = isotropy_data(lambda, &l, &delta)?;
    let dg = iso.delta.group.clone();
    // eigen-split along the Δ-basis; symplectic involutions up to scalar have
    // eigenvalues ±1 (square +1) or ±i (square -1)
    let mut spaces: Vec<(Vec<CycNum>, Vec<Vec<CycNum>>)> = vec![(
        Vec::new(),
        (0..two_n)
            .map(|i| {
                let mut v = vec![CycNum::zero(); two_n];
                v[i] = CycNum::one();
                v
            })
            .collect(),
    )];
    let mut q_exps = Vec::new();
    for b in iso.delta.basis.iter() {
        let a = raw
            .get(b)
            .ok_or_else(|| SpError::Internal("s must cover Δ".into()))?;
        let sq = a
            .mul(a)
            .as_scalar()
            .ok_or_else(|| SpError::DiagonalizationFailure("s(δ)² must be scalar".into()))?;
        let (mus, qbit) = if sq == CycNum::one() {
            (vec![CycNum::one(), CycNum::from_int(-1)], 0u64)
        } else if sq == CycNum::from_int(-1) {
            (vec![CycNum::i(), CycNum::i().neg()], 1u64)
        } else {
            return Err(SpError::DiagonalizationFailure(
                "s(δ)² must be ±1 in Sp".into(),
            ));
        };
        q_exps.push(qbit);
        let mut next = Vec::new();
        for (tag, space) in &spaces {
            for mu in &mus {
                let eig = gl_fixed::eigenspace(a, mu);
                let inter = gl_fixed::intersect(space, &eig, two_n);
                if !inter.is_empty() {
                    let mut tag2 = tag.clone();
                    tag2.push(mu.clone());
                    next.push((tag2, inter));
                }
            }
        }
        let total: usize = next.iter().map(|(_, s)| s.len()).sum();
        if total != two_n {
            return Err(SpError::DiagonalizationFailure(
                "eigenspaces do not fill the space".into(),
            ));
        }
        spaces = next;
    }
    let q = Character { exponents: q_exps };
    // redefined ±1 weights
    let to_weight = |tag: &[CycNum]| -> Character {
        let exps = tag
            .iter()
            .enumerate()
            .map(|(i, mu)| {
                let redefined = if q.exponents[i] == 1 {
                    mu.div(&CycNum::i()).expect("i nonzero")
                } else {
                    mu.clone()
                };
                u64::from(redefined != CycNum::one())
            })
            .collect();
        Character { exponents: exps }
    };
    let mut tagged: Vec<(Character, Vec<Vec<CycNum>>)> = spaces
        .iter()
        .map(|(tag, sp)| (to_weight(tag), sp.clone()))
        .collect();
    tagged.sort_by(|a, b| a.0.cmp(&b.0));
    {
        let mut seen = HashSet::new();
        for (c, _) in &tagged {
            if !seen.insert(c.clone()) {
                return Err(SpError::DiagonalizationFailure(
                    "weights are not distinct characters".into(),
                ));
            }
        }
    }
    let dims_by_char: BTreeMap<Character, usize> =
        tagged.iter().map(|(c, sp)| (c.clone(), sp.len())).collect();
    let q_trivial = q.exponents.iter().all(|&e| e == 0);
    let mut blocks: Vec<WeightBlock> = Vec::new();
    if q_trivial {
        let mut lo = 0usize;
        for (c, d) in &dims_by_char {
            if d % 2 != 0 {
                return Err(SpError::DiagonalizationFailure(
                    "symplectic weight spaces need even dimension".into(),
                ));
            }
            let half = d / 2;
            let mut idx: Vec<usize> = (lo..lo + half).collect();
            idx.extend(n + lo..n + lo + half);
            blocks.push(WeightBlock {
                character: c.clone(),
                indices: idx,
            });
            lo += half;
        }
    } else {
        let mut used: HashSet<Character> = HashSet::new();
        let mut lo = 0usize;
        for (c, d) in &dims_by_char {
            if used.contains(c) {
                continue;
            }
            let partner = dg.char_mul(c, &q);
            let dp = dims_by_char.get(&partner).copied().unwrap_or(0);
            if dp != *d {
                return Err(SpError::DiagonalizationFailure(
                    "q-paired weights must have equal dimension".into(),
                ));
            }
            used.insert(c.clone());
            used.insert(partner.clone());
            blocks.push(WeightBlock {
                character: c.clone(),
                indices: (lo..lo + d).collect(),
            });
            blocks.push(WeightBlock {
                character: partner,
                indices: (n + lo..n + lo + d).collect(),
            });
            lo += d;
        }
        blocks.sort_by(|a, b| a.character.cmp(&b.character));
    }
    let weights = WeightDecomposition::new(two_n, blocks, Some(q.clone()));
    // symplectically adapted basis columns
    let j = CycMatrix::j_std(two_n);
    let omega = |x: &[CycNum], y: &[CycNum]| -> CycNum {
        let xv = CycMatrix::from_fn(1, two_n, |_, c| x[c].clone());
        let yv = CycMatrix::from_fn(two_n, 1, |r, _| y[r].clone());
        xv.mul(&j).mul(&yv).at(0, 0).clone()
    };
    let mut columns: Vec<Option<Vec<CycNum>>> = vec![None; two_n];
    let space_of = |c: &Character| -> Vec<Vec<CycNum>> {
        tagged
            .iter()
            .find(|(cc, _)| cc == c)
            .expect("present")
            .1
            .clone()
    };
    if q_trivial {
        for b in &weights.blocks {
            let mut rest = space_of(&b.character);
            let half = b.dim() / 2;
            let mut e_side = Vec::new();
            let mut f_side = Vec::new();
            for _ in 0..half {
                let e = rest[0].clone();
                let fpos = rest
                    .iter()
                    .position(|v| !omega(&e, v).is_zero())
                    .ok_or_else(|| {
                        SpError::DiagonalizationFailure("degenerate block pairing".into())
                    })?;
                let f_raw = rest[fpos].clone();
                let scale = omega(&e, &f_raw).inv()?;
                let f: Vec<CycNum> = f_raw.iter().map(|x| x.mul(&scale)).collect();
                let mut next = Vec::new();
                for (i, v) in rest.iter().enumerate() {
                    if i == 0 || i == fpos {
                        continue;
                    }
                    let a = omega(&e, v);
                    let bcoef = omega(&f, v);
                    // v' = v - a·f + b·e kills the pairings with e and f
                    let mut vv = v.clone();
                    for r in 0..two_n {
                        vv[r] = vv[r].sub(&a.mul(&f[r])).add(&bcoef.mul(&e[r]));
                    }
                    next.push(vv);
                }
                e_side.push(e);
                f_side.push(f);
                rest = next;
            }
            let (first, second): (Vec<usize>, Vec<usize>) = {
                let idx = &b.indices;
                (
                    idx.iter().cloned().filter(|&i| i < n).collect(),
                    idx.iter().cloned().filter(|&i| i >= n).collect(),
                )
            };
            for (slot, col) in first.iter().zip(e_side) {
                columns[*slot] = Some(col);
            }
            for (slot, col) in second.iter().zip(f_side) {
                columns[*slot] = Some(col);
            }
        }
    } else {
        let mut handled: HashSet<Character> = HashSet::new();
        for b in &weights.blocks {
            if handled.contains(&b.character) {
                continue;
            }
            let partner_char = dg.char_mul(&b.character, &q);
            let pb = weights
                .block_of_character(&partner_char)
                .ok_or_else(|| SpError::Internal("missing q-partner".into()))?;
            let (rep, dual) = if b.indices[0] < n { (b, pb) } else { (pb, b) };
            handled.insert(rep.character.clone());
            handled.insert(dual.character.clone());
            let rep_basis = space_of(&rep.character);
            let dual_space = space_of(&dual.character);
            let d = rep.dim();
            let g = CycMatrix::from_fn(d, d, |r, c| omega(&rep_basis[r], &dual_space[c]));
            let ginv = g
                .inverse()
                .map_err(|_| SpError::DiagonalizationFailure("degenerate q-pairing".into()))?;
            let mut dual_basis = Vec::with_capacity(d);
            for jcol in 0..d {
                let mut v = vec![CycNum::zero(); two_n];
                for k in 0..d {
                    let coef = ginv.at(k, jcol);
                    for r in 0..two_n {
                        v[r] = v[r].add(&coef.mul(&dual_space[k][r]));
                    }
                }
                dual_basis.push(v);
            }
            for (slot, col) in rep.indices.iter().zip(rep_basis) {
                columns[*slot] = Some(col);
            }
            for (slot, col) in dual.indices.iter().zip(dual_basis) {
                columns[*slot] = Some(col);
            }
        }
    }
    let cols: Vec<Vec<CycNum>> = columns
        .into_iter()
        .map(|c| c.ok_or_else(|| SpError::Internal("column not assigned".into())))
        .collect::<Result<_, _>>()?;
    let p = CycMatrix::from_fn(two_n, two_n, |r, c| cols[c][r].clone());
    if p.transpose().mul(&j).mul(&p) != j {
        return Err(SpError::DiagonalizationFailure(
            "constructed basis is not symplectic".into(),
        ));
    }
    let pinv = p.inverse()?;
    let mut s: BTreeMap<GroupElem, CycMatrix> = BTreeMap::new();
    for (e, m) in raw {
        s.insert(e.clone(), pinv.mul(m).mul(&p));
    }
    // ±1 sign normalization of s|Δ toward the stored weight convention
    for delem in delta.elements().to_vec() {
        let m = s.get(&delem).expect("total").clone();
        if !m.is_diagonal() {
            return Err(SpError::DiagonalizationFailure(
                "Δ-image failed to diagonalize".into(),
            ));
        }
        let coords = iso.delta.coords(&delem).expect("element of Δ");
        let want_first = {
            let b0 = weights
                .block_of_index(0)
                .ok_or_else(|| SpError::Internal("index 0 unassigned".into()))?;
            actual_eigenvalue(&dg, &weights.blocks[b0].character, &q, &coords)
        };
        let got_first = m.at(0, 0).clone();
        let ratio = want_first.div(&got_first)?;
        if ratio != CycNum::one() && ratio != CycNum::from_int(-1) {
            return Err(SpError::DiagonalizationFailure(
                "Δ-image off by a non-sign scalar".into(),
            ));
        }
        s.insert(delem, m.scalar_mul(&ratio));
    }
    // scalar-block normalization through a symplectic Δ-matrix
    let mut tmat = CycMatrix::identity(two_n);
    {
        let shift_image: Vec<Character> = iso
            .quotient
            .group
            .elements()
            .iter()
            .map(|qq| {
                let rep = iso.quotient.representative(qq);
                analyze_permutation_matrix(&s[&rep], &weights, dg.invariant_factors())
                    .map(|pm| pm.p_image)
                    .map_err(SpError::from)
            })
            .collect::<Result<_, _>>()?;
        let mut covered: HashSet<usize> = HashSet::new();
        for (bi, b) in weights.blocks.iter().enumerate() {
            if covered.contains(&bi) {
                continue;
            }
            covered.insert(bi);
            for (qi, qq) in iso.quotient.group.elements().iter().enumerate() {
                let shifted = dg.char_mul(&b.character, &shift_image[qi]);
                let target = weights.block_index_of_character(&shifted).ok_or_else(|| {
                    SpError::DiagonalizationFailure("weight set is not shift-invariant".into())
                })?;
                if covered.contains(&target) {
                    continue;
                }
                covered.insert(target);
                let rep = iso.quotient.representative(qq);
                let block = s[&rep]
                    .submatrix(&weights.blocks[target].indices, &b.indices)
                    .inverse()?;
                tmat.set_submatrix(
                    &weights.blocks[target].indices,
                    &weights.blocks[target].indices,
                    &block,
                );
            }
        }
    }
    // repair T to an exactly symplectic Δ-matrix by per-block scalars
    let fams: Vec<usize> = (0..weights.blocks.len()).collect();
    let (tsym, _) = symplectic_correct(&weights, &dg, &fams, &tmat)?;
    let tinv = tsym.inverse()?;
    for (_, m) in s.iter_mut() {
        *m = tsym.mul(m).mul(&tinv);
    }
    let conjugator = p.mul(&tinv);
    let defect = conjugator
        .symplectic_defect()?
        .ok_or(SpError::NotSymplectic)?;
    let t = RepQuadruple {
        lambda: lambda.clone(),
        l,
        delta,
        q,
        n,
        iso,
        weights,
        s,
    };
    let report = check_representative_quadruple(&t);
    if !report.all_ok() {
        return Err(SpError::DiagonalizationFailure(format!(
            "normalization did not reach quadruple form: {:?}",
            report
        )));
    }
    let cinv = conjugator.inverse()?;
    for (e, m_raw) in raw {
        let lhs = cinv.mul(m_raw).mul(&conjugator);
        if lhs.mul(&t.s_of(e).inverse()?).as_scalar().is_none() {
            return Err(SpError::Internal(
                "conjugator does not witness the normalization".into(),
            ));
        }
    }
    Ok((t, conjugator, defect))
}

// ---------------------------------------------------------------------------
// Census
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpCensusRow {
    pub pairing: Pairing,
    pub delta_generators: Vec<GroupElem>,
    pub delta_order: u64,
    /// q in abstract Δ-coordinates.
    pub q: Character,
    pub q_trivial: bool,
    pub ker_q_order: u64,
    pub admissible: bool,
    /// Number of distinct θ-classes over this (l, Δ, q).
    pub order_variants: u64,
    pub cover_group: Vec<u64>,
    /// 2n / |Δ| when admissible.
    pub pushforward_rank: Option<u64>,
    /// "symplectic_on_E" for trivial q, "pairing_E_qE_dual" otherwise.
    pub bundle_shape: String,
    pub theta_class: Option<ThetaClassSp>,
    pub witness: Option<QuadrupleWire>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuadrupleWire {
    pub lambda: Vec<u64>,
    pub pairing: Vec<Vec<u64>>,
    pub delta_generators: Vec<GroupElem>,
    pub q: Character,
    pub n: usize,
    pub s_table: Vec<(GroupElem, CycMatrix)>,
}

pub fn quadruple_to_wire(t: &RepQuadruple) -> QuadrupleWire {
    QuadrupleWire {
        lambda: t.lambda.invariant_factors().to_vec(),
        pairing: t.l.matrix().to_vec(),
        delta_generators: t.delta.generators().to_vec(),
        q: t.q.clone(),
        n: t.n,
        s_table: t.s.iter().map(|(e, m)| (e.clone(), m.clone())).collect(),
    }
}

pub fn quadruple_from_wire(w: &QuadrupleWire) -> Result<RepQuadruple, SpError> {
    let lambda = FinAbGroup::new(&w.lambda);
    let l = Pairing::new(
        &lambda,
        w.pairing
            .iter()
            .map(|r| r.iter().map(|&x| x as i64).collect())
            .collect(),
    )?;
    let delta = Subgroup::from_generators(&lambda, &w.delta_generators);
    let iso = isotropy_data(&lambda, &l, &delta)?;
    let s: BTreeMap<GroupElem, CycMatrix> = w.s_table.iter().cloned().collect();
    let two_n = 2 * w.n;
    let mut blocks_by_char: BTreeMap<Character, Vec<usize>> = BTreeMap::new();
    for i in 0..two_n {
        let mut exps = Vec::new();
        for (bi, b) in iso.delta.basis.iter().enumerate() {
            let m = s
                .get(b)
                .ok_or_else(|| SpError::Internal("witness must cover Δ".into()))?;
            let v = m.at(i, i).clone();
            let redefined = if w.q.exponents[bi] == 1 {
                v.div(&CycNum::i())?
            } else {
                v
            };
            if redefined == CycNum::one() {
                exps.push(0);
            } else if redefined == CycNum::from_int(-1) {
                exps.push(1);
            } else {
                return Err(SpError::MixedEigenvalues);
            }
        }
        blocks_by_char
            .entry(Character { exponents: exps })
            .or_default()
            .push(i);
    }
    let blocks: Vec<WeightBlock> = blocks_by_char
        .into_iter()
        .map(|(character, indices)| WeightBlock { character, indices })
        .collect();
    let weights = WeightDecomposition::new(two_n, blocks, Some(w.q.clone()));
    Ok(RepQuadruple {
        lambda,
        l,
        delta,
        q: w.q.clone(),
        n: w.n,
        iso,
        weights,
        s,
    })
}

/// One row per (antisymmetric pairing, q ∈ Δ*) with a fixed maximal isotropic
/// Δ per pairing. Matrices live in Sp(2n, C).
pub fn enumerate_components_sp(
    n: usize,
    lambda: &FinAbGroup,
    guard: u64,
    dedup_aut: bool,
) -> Result<Vec<SpCensusRow>, SpError> {
    if lambda.exponent() > 2 {
        return Err(SpError::NotExponentTwo(lambda.exponent()));
    }
    let mut pairings = enumerate_antisymmetric_pairings(lambda, guard)?;
    if dedup_aut {
        pairings = crate::abelian::dedup_pairings_by_aut(lambda, &pairings, guard.min(64))?;
    }
    let mut rows = Vec::new();
    for l in pairings {
        rows.extend(sp_census_rows_for_pairing(n, lambda, &l, guard)?);
    }
    Ok(rows)
}

/// All census rows of one pairing (one per q ∈ Δ*).
pub fn sp_census_rows_for_pairing(
    n: usize,
    lambda: &FinAbGroup,
    l: &Pairing,
    guard: u64,
) -> Result<Vec<SpCensusRow>, SpError> {
    let mut rows = Vec::new();
    {
        let l = l.clone();
        let delta = maximal_isotropic_subgroups(lambda, &l, guard)?
            .into_iter()
            .next()
            .ok_or_else(|| SpError::Internal("no maximal isotropic subgroup".into()))?;
        let iso = isotropy_data(lambda, &l, &delta)?;
        let dg = iso.delta.group.clone();
        for q in dg.characters() {
            let kq = ker_q_order(&dg, &q);
            let admissible = n as u64 % kq == 0;
            let q_trivial = q.exponents.iter().all(|&e| e == 0);
            let (theta, witness) = if admissible {
                let t = construct_admissible_s_sp(lambda, &l, &delta, &q, n, None)?;
                (Some(theta_class_sp(&t)?), Some(quadruple_to_wire(&t)))
            } else {
                (None, None)
            };
            rows.push(SpCensusRow {
                pairing: l.clone(),
                delta_generators: delta.generators().to_vec(),
                delta_order: delta.order(),
                q: q.clone(),
                q_trivial,
                ker_q_order: kq,
                admissible,
                order_variants: variant_count(&iso, &q),
                cover_group: dg.invariant_factors().to_vec(),
                pushforward_rank: admissible.then(|| 2 * n as u64 / delta.order()),
                bundle_shape: if q_trivial {
                    "symplectic_on_E".to_string()
                } else {
                    "pairing_E_qE_dual".to_string()
                },
                theta_class: theta,
                witness,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::{make_group, DEFAULT_GUARD};

    fn z2() -> FinAbGroup {
        make_group(&[2])
    }

    fn v4() -> FinAbGroup {
        make_group(&[2, 2])
    }

    fn nontrivial_q(dg: &FinAbGroup) -> Character {
        dg.characters()
            .into_iter()
            .find(|c| c.exponents.iter().any(|&e| e != 0))
            .unwrap()
    }

    /// §-catalog case: Λ = ℤ/2, Δ = Λ, q = -1: the diag(i·I, -i·I) model.
    fn s_form_quadruple(n: usize) -> RepQuadruple {
        let lambda = z2();
        let l = Pairing::trivial(&lambda);
        let delta = Subgroup::full(&lambda);
        let iso = isotropy_data(&lambda, &l, &delta).unwrap();
        let q = nontrivial_q(&iso.delta.group);
        construct_admissible_s_sp(&lambda, &l, &delta, &q, n, None).unwrap()
    }

    #[test]
    fn s_form_is_diag_i_minus_i() {
        let t = s_form_quadruple(1);
        let gen = t.lambda.elem(&[1]);
        let m = t.s_of(&gen);
        assert_eq!(m, &CycMatrix::diagonal(&[CycNum::i(), CycNum::i().neg()]));
        assert!(check_representative_quadruple(&t).all_ok());
        assert!(is_admissible_sp(&t).unwrap());
        assert_eq!(t.q.exponents, vec![1]);
        // admissible for every n (|ker q| = 1)
        for n in 1..=3 {
            let t = s_form_quadruple(n);
            assert!(is_admissible_sp(&t).unwrap());
        }
    }

    #[test]
    fn characteristic_hom_examples() {
        let t = s_form_quadruple(1);
        assert_eq!(t.q.exponents, vec![1]);
        let lambda = z2();
        let l = Pairing::trivial(&lambda);
        let delta = Subgroup::full(&lambda);
        let iso = isotropy_data(&lambda, &l, &delta).unwrap();
        let q0 = iso.delta.group.trivial_character();
        let t2 = construct_admissible_s_sp(&lambda, &l, &delta, &q0, 2, None).unwrap();
        assert_eq!(t2.q.exponents, vec![0]);
        let gen = lambda.elem(&[1]);
        let entries = t2.s_of(&gen).diagonal_entries();
        assert!(entries
            .iter()
            .all(|e| e == &CycNum::one() || e == &CycNum::from_int(-1)));
        // mixed pattern rejected
        let mut bad = t2.s.clone();
        bad.insert(
            gen.clone(),
            CycMatrix::diagonal(&[
                CycNum::one(),
                CycNum::i(),
                CycNum::one(),
                CycNum::i().neg(),
            ]),
        );
        let sdelta: BTreeMap<GroupElem, CycMatrix> = t2
            .delta
            .elements()
            .iter()
            .map(|d| (d.clone(), bad[d].clone()))
            .collect();
        assert!(matches!(
            characteristic_hom(&t2.iso.delta.group, &t2.iso.delta, &sdelta),
            Err(SpError::MixedEigenvalues)
        ));
    }

    #[test]
    fn q_trivial_needs_even_quotient() {
        // q = +1, Δ = ℤ/2, n odd: |ker q| = 2 ∤ n
        let lambda = z2();
        let l = Pairing::trivial(&lambda);
        let delta = Subgroup::full(&lambda);
        let iso = isotropy_data(&lambda, &l, &delta).unwrap();
        let q0 = iso.delta.group.trivial_character();
        assert!(matches!(
            construct_admissible_s_sp(&lambda, &l, &delta, &q0, 3, None),
            Err(SpError::DivisibilityFailure { .. })
        ));
        // trivial Λ: always admissible, single class
        let triv = FinAbGroup::trivial();
        let lt = Pairing::trivial(&triv);
        let dt = Subgroup::full(&triv);
        let it = isotropy_data(&triv, &lt, &dt).unwrap();
        let qt = it.delta.group.trivial_character();
        let t = construct_admissible_s_sp(&triv, &lt, &dt, &qt, 2, None).unwrap();
        assert!(is_admissible_sp(&t).unwrap());
        assert_eq!(variant_count(&it, &qt), 1);
    }

    #[test]
    fn all_images_symplectic_and_squares_pm_one() {
        for (lambda, pairing_rows, n) in [
            (v4(), Some(vec![vec![0i64, 1], vec![1, 0]]), 2usize),
            (v4(), None, 2),
            (z2(), None, 2),
        ] {
            let l = match pairing_rows {
                Some(rows) => Pairing::new(&lambda, rows).unwrap(),
                None => Pairing::trivial(&lambda),
            };
            let delta = maximal_isotropic_subgroups(&lambda, &l, DEFAULT_GUARD)
                .unwrap()
                .into_iter()
                .next()
                .unwrap();
            let iso = isotropy_data(&lambda, &l, &delta).unwrap();
            for q in iso.delta.group.characters() {
                let kq = ker_q_order(&iso.delta.group, &q);
                if n as u64 % kq != 0 {
                    continue;
                }
                let t = construct_admissible_s_sp(&lambda, &l, &delta, &q, n, None).unwrap();
                for m in t.s.values() {
                    assert!(m.is_symplectic().unwrap());
                    let sq = m.mul(m).as_scalar().unwrap();
                    assert!(sq == CycNum::one() || sq == CycNum::from_int(-1));
                }
                assert_eq!(induced_pairing(&lambda, &t.s).unwrap(), l);
                assert_eq!(t.q, q);
            }
        }
    }

    #[test]
    fn m_gamma_symplectic_and_case_split() {
        let lambda = v4();
        let l = Pairing::new(&lambda, vec![vec![0, 1], vec![1, 0]]).unwrap();
        let delta = maximal_isotropic_subgroups(&lambda, &l, DEFAULT_GUARD)
            .unwrap()
            .into_iter()
            .next()
            .unwrap();
        let iso = isotropy_data(&lambda, &l, &delta).unwrap();
        for q in iso.delta.group.characters() {
            let kq = ker_q_order(&iso.delta.group, &q);
            let n = 2usize;
            if n as u64 % kq != 0 {
                continue;
            }
            let t = construct_admissible_s_sp(&lambda, &l, &delta, &q, n, None).unwrap();
            let sigma = sigma_theta_sp(&t).unwrap();
            assert_eq!(sigma.len() as u64, lambda.order());
            for g in &sigma {
                assert!(g.matrix.is_symplectic().unwrap());
                assert!(g.square_sign == 1 || g.square_sign == -1);
                let glt = t.gl_view();
                let chi = gl_fixed::c_theta(&g.matrix, &glt).unwrap();
                assert_eq!(chi, g.gamma);
            }
        }
    }

    #[test]
    fn d_anticommutes_with_m_q() {
        // q = γ case: q nontrivial outside f(Λ/Δ); D·M^q = -M^q·D
        let lambda = v4();
        let l = Pairing::trivial(&lambda);
        let delta = Subgroup::full(&lambda);
        let iso = isotropy_data(&lambda, &l, &delta).unwrap();
        let q = nontrivial_q(&iso.delta.group);
        let t = construct_admissible_s_sp(&lambda, &l, &delta, &q, 2, None).unwrap();
        // the Λ-character restricting to q on Δ = Λ
        let gamma = t
            .lambda
            .characters()
            .into_iter()
            .find(|g| t.restrict(g) == q)
            .unwrap();
        let g = build_m_gamma_sp(&t, &gamma).unwrap();
        assert_eq!(g.square_sign, -1, "γ|Δ = q forces square -1");
        let d = anticommuting_d(&t).unwrap();
        let dm = d.mul(&g.matrix);
        let md = g.matrix.mul(&d);
        assert_eq!(dm, md.scalar_mul(&CycNum::from_int(-1)));
    }

    #[test]
    fn order_variants_v4() {
        // nondegenerate pairing, q trivial: two classes with orders 2 and 4
        let lambda = v4();
        let l = Pairing::new(&lambda, vec![vec![0, 1], vec![1, 0]]).unwrap();
        let delta = maximal_isotropic_subgroups(&lambda, &l, DEFAULT_GUARD)
            .unwrap()
            .into_iter()
            .next()
            .unwrap();
        let iso = isotropy_data(&lambda, &l, &delta).unwrap();
        let q0 = iso.delta.group.trivial_character();
        assert_eq!(variant_count(&iso, &q0), 2);
        let t2 = construct_admissible_s_sp(&lambda, &l, &delta, &q0, 2, Some(2)).unwrap();
        let t4 = construct_admissible_s_sp(&lambda, &l, &delta, &q0, 2, Some(4)).unwrap();
        let c2 = theta_class_sp(&t2).unwrap();
        let c4 = theta_class_sp(&t4).unwrap();
        assert_eq!(c2.generator_orders, vec![2]);
        assert_eq!(c4.generator_orders, vec![4]);
        assert_ne!(c2, c4);
        // q = f(generator): the order is forced to 4
        let qf = nontrivial_q(&iso.delta.group);
        assert!(iso.f_image().contains(&qf));
        assert_eq!(variant_count(&iso, &qf), 1);
        let tf = construct_admissible_s_sp(&lambda, &l, &delta, &qf, 1, None).unwrap();
        assert_eq!(theta_class_sp(&tf).unwrap().generator_orders, vec![4]);
        assert!(matches!(
            construct_admissible_s_sp(&lambda, &l, &delta, &qf, 1, Some(2)),
            Err(SpError::InvalidOrderChoice(2))
        ));
        // trivial pairing, Δ = Λ: no generator to choose
        let lt = Pairing::trivial(&lambda);
        let dt = Subgroup::full(&lambda);
        let it = isotropy_data(&lambda, &lt, &dt).unwrap();
        let qn = nontrivial_q(&it.delta.group);
        assert_eq!(variant_count(&it, &qn), 1);
        assert!(matches!(
            construct_admissible_s_sp(&lambda, &lt, &dt, &qn, 2, Some(4)),
            Err(SpError::NoGeneratorForOrderChoice)
        ));
    }

    #[test]
    fn printed_conjugator_identifies_q_gamma_variants() {
        // q = γ case: M^γ·C with C = c ⊕ c⁻¹ is conjugate to M^γ via
        // diag(c^(-1/2), c^(1/2))
        let t = s_form_quadruple(1);
        let gamma = t.lambda.characters()[1].clone();
        let g = build_m_gamma_sp(&t, &gamma).unwrap();
        let c = CycNum::root_of_unity(3, 1);
        let cm = CycMatrix::diagonal(&[c.clone(), c.inv().unwrap()]);
        assert!(cm.is_symplectic().unwrap());
        let mc = g.matrix.mul(&cm);
        let half = c.principal_sqrt().unwrap();
        let conj = CycMatrix::diagonal(&[half.inv().unwrap(), half.clone()]);
        let lhs = conj.mul(&g.matrix).mul(&conj.inverse().unwrap());
        assert_eq!(lhs, mc);
        assert_eq!(mc.mul(&mc).as_scalar().unwrap(), CycNum::from_int(-1));
    }

    #[test]
    fn normalize_sp_recovers_s_form() {
        // J itself normalizes to the diag(i, -i) model
        let lambda = z2();
        let mut raw = BTreeMap::new();
        raw.insert(lambda.identity(), CycMatrix::identity(2));
        raw.insert(lambda.elem(&[1]), CycMatrix::j_std(2));
        let (t, _conj, defect) = normalize_sp(&lambda, &raw, DEFAULT_GUARD).unwrap();
        assert!(check_representative_quadruple(&t).all_ok());
        assert_eq!(t.q.exponents, vec![1]);
        let gen = lambda.elem(&[1]);
        assert_eq!(
            t.s_of(&gen),
            &CycMatrix::diagonal(&[CycNum::i(), CycNum::i().neg()])
        );
        assert!(!defect.is_zero());
    }

    #[test]
    fn normalize_sp_roundtrip_random_symplectic() {
        // deterministic pseudo-random symplectic conjugators from elementary
        // symplectic factors
        let make_symplectic = |seed: i64, n: usize| -> CycMatrix {
            let b = CycMatrix::from_fn(n, n, |r, c| {
                let v = (seed + (r * n + c) as i64) % 3 + (seed + (c * n + r) as i64) % 3;
                CycNum::from_int(v % 3)
            });
            let mut upper = CycMatrix::identity(2 * n);
            let mut lower = CycMatrix::identity(2 * n);
            for r in 0..n {
                for c in 0..n {
                    upper.set(r, n + c, b.at(r, c).clone());
                    lower.set(n + r, c, b.at(c, r).neg());
                }
            }
            let a = CycMatrix::from_fn(n, n, |r, c| {
                if r == c {
                    CycNum::from_int(1)
                } else if r + 1 == c {
                    CycNum::from_int(seed % 2)
                } else {
                    CycNum::zero()
                }
            });
            let at_inv = a.transpose().inverse().unwrap();
            let mut blockdiag = CycMatrix::zeros(2 * n, 2 * n);
            for r in 0..n {
                for c in 0..n {
                    blockdiag.set(r, c, a.at(r, c).clone());
                    blockdiag.set(n + r, n + c, at_inv.at(r, c).clone());
                }
            }
            let g = upper.mul(&blockdiag).mul(&lower);
            assert!(g.is_symplectic().unwrap());
            g
        };
        for seed in [1i64, 2, 5] {
            for n in [1usize, 2] {
                let t = s_form_quadruple(n);
                let g = make_symplectic(seed, n);
                let ginv = g.inverse().unwrap();
                let mut raw = BTreeMap::new();
                for (e, m) in &t.s {
                    raw.insert(e.clone(), g.mul(m).mul(&ginv));
                }
                let (t2, _conj, defect) = normalize_sp(&t.lambda, &raw, DEFAULT_GUARD).unwrap();
                assert!(check_representative_quadruple(&t2).all_ok());
                assert_eq!(theta_class_sp(&t2).unwrap(), theta_class_sp(&t).unwrap());
                assert!(!defect.is_zero());
            }
        }
    }

    #[test]
    fn census_sp2_z2() {
        // n = 1 (Sp(2, C)), Λ = ℤ/2: (l trivial, q = -1) admissible;
        // (l trivial, q = +1) not (2 ∤ 1)
        let lambda = z2();
        let rows = enumerate_components_sp(1, &lambda, DEFAULT_GUARD, false).unwrap();
        assert_eq!(rows.len(), 2);
        let adm: Vec<&SpCensusRow> = rows.iter().filter(|r| r.admissible).collect();
        assert_eq!(adm.len(), 1);
        assert!(!adm[0].q_trivial);
        assert_eq!(adm[0].bundle_shape, "pairing_E_qE_dual");
        assert_eq!(adm[0].pushforward_rank, Some(1));
        let not_adm = rows.iter().find(|r| !r.admissible).unwrap();
        assert!(not_adm.q_trivial);
    }

    #[test]
    fn census_abelianization_line_bundle_row() {
        // 2n = 4 with Λ of order 4, l trivial, q nontrivial: a rank-1 row
        let lambda = v4();
        let rows = enumerate_components_sp(2, &lambda, DEFAULT_GUARD, false).unwrap();
        let found = rows.iter().any(|r| {
            r.pairing.is_trivial()
                && !r.q_trivial
                && r.admissible
                && r.pushforward_rank == Some(1)
                && r.bundle_shape == "pairing_E_qE_dual"
        });
        assert!(found);
    }

    #[test]
    fn witness_roundtrip_sp() {
        let lambda = v4();
        let rows = enumerate_components_sp(2, &lambda, DEFAULT_GUARD, false).unwrap();
        for row in rows.iter().filter(|r| r.admissible) {
            let w = row.witness.as_ref().unwrap();
            let t = quadruple_from_wire(w).unwrap();
            assert!(check_representative_quadruple(&t).all_ok());
            assert!(is_admissible_sp(&t).unwrap());
        }
    }
}
