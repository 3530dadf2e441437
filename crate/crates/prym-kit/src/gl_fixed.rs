//! The GL(n, C) classification layer: representative and admissible triples
//! (l, Δ, s), the character map c_θ, the subgroup Σ_θ ≤ Λ* with its matrices
//! M^γ, normalization of raw actions to representative form, and the census
//! of fixed-point components.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::abelian::{
    enumerate_antisymmetric_pairings, isotropy_data, maximal_isotropic_subgroups, AbelianError,
    Character, FinAbGroup, GroupElem, IsotropyData, Pairing, Subgroup,
};
use crate::cyclotomic::weights::WeightError;
use crate::cyclotomic::{analyze_permutation_matrix, CycError, CycMatrix, CycNum};
use crate::cyclotomic::{WeightBlock, WeightDecomposition};

#[derive(Debug, thiserror::Error)]
pub enum GlError {
    #[error(transparent)]
    Abelian(#[from] AbelianError),
    #[error(transparent)]
    Cyc(#[from] CycError),
    #[error("weight structure: {0}")]
    Weight(#[from] WeightError),
    #[error("commutator of s({0:?}) and s({1:?}) is not scalar")]
    CommutatorNotScalar(Vec<u64>, Vec<u64>),
    #[error("matrix is not in G_θ: commutator against s({0:?}) is not a scalar root of unity")]
    NotInGTheta(Vec<u64>),
    #[error("character value of c_θ is not well defined on the group")]
    BadCharacter,
    #[error("γ = {0:?} is not in Σ_θ")]
    NotInSigmaTheta(Vec<u64>),
    #[error("|Δ| = {delta} does not divide n = {n}")]
    DivisibilityFailure { delta: u64, n: u64 },
    #[error("weight profile must be constant on f(Λ/Δ)-orbits and positive")]
    BadProfile,
    #[error("simultaneous diagonalization failed: {0}")]
    DiagonalizationFailure(String),
    #[error("triple is not admissible")]
    NotAdmissible,
    #[error("s map must be defined on all of Λ")]
    IncompleteS,
    #[error("internal consistency: {0}")]
    Internal(String),
}

// ---------------------------------------------------------------------------
// Representative triples
// ---------------------------------------------------------------------------

/// A representative triple (l, Δ, s) for Λ acting on C^n, together with its
/// derived weight data.
pub struct RepTriple {
    pub lambda: FinAbGroup,
    pub l: Pairing,
    pub delta: Subgroup,
    pub n: usize,
    pub iso: IsotropyData,
    pub weights: WeightDecomposition,
    /// Total map s: Λ → GL(n, C).
    pub s: BTreeMap<GroupElem, CycMatrix>,
}

/// Report of the four defining clauses of a representative triple.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripleReport {
    /// s|Δ is a homomorphism into diagonal matrices.
    pub delta_diagonal_hom: bool,
    /// Int_s is a homomorphism (all products match up to scalar).
    pub int_s_homomorphism: bool,
    /// The pairing induced by commutators equals l.
    pub pairing_matches: bool,
    /// Every s(λ) is a permutation matrix with scalar blocks.
    pub scalar_permutation_blocks: bool,
}

impl TripleReport {
    pub fn all_ok(&self) -> bool {
        self.delta_diagonal_hom
            && self.int_s_homomorphism
            && self.pairing_matches
            && self.scalar_permutation_blocks
    }
}

impl RepTriple {
    pub fn s_of(&self, e: &GroupElem) -> &CycMatrix {
        self.s.get(e).expect("s is total on Λ")
    }

    pub fn delta_factors(&self) -> &[u64] {
        self.iso.delta.group.invariant_factors()
    }

    /// Restriction of a Λ-character to Δ, in abstract Δ-coordinates.
    pub fn restrict(&self, gamma: &Character) -> Character {
        self.iso
            .delta
            .restrict_character(gamma)
            .expect("restriction of a character is a character")
    }

    /// Computed block shift of s(λ): the character p with
    /// s(λ)·W_w = W_{w·p} for every weight w.
    pub fn shift_of(&self, e: &GroupElem) -> Result<Character, GlError> {
        let p = analyze_permutation_matrix(self.s_of(e), &self.weights, self.delta_factors())?;
        Ok(p.p_image)
    }
}

/// Compute the antisymmetric pairing induced by commutators of the s-images:
/// l(λ)(λ') is the scalar s(λ)s(λ')s(λ)⁻¹s(λ')⁻¹.
pub fn induced_pairing(
    lambda: &FinAbGroup,
    s: &BTreeMap<GroupElem, CycMatrix>,
) -> Result<Pairing, GlError> {
    let k = lambda.rank();
    let n = lambda.exponent();
    let gens: Vec<GroupElem> = (0..k)
        .map(|i| {
            let mut e = vec![0i64; k];
            e[i] = 1;
            lambda.elem(&e)
        })
        .collect();
    let d = lambda.invariant_factors();
    let mut matrix = vec![vec![0i64; k]; k];
    for i in 0..k {
        for j in 0..k {
            let a = s.get(&gens[i]).ok_or(GlError::IncompleteS)?;
            let b = s.get(&gens[j]).ok_or(GlError::IncompleteS)?;
            let comm = a.commutator(b)?;
            let scalar = comm.as_scalar().ok_or_else(|| {
                GlError::CommutatorNotScalar(gens[i].exponents.clone(), gens[j].exponents.clone())
            })?;
            let (order, exp) = scalar.as_root_of_unity().ok_or_else(|| {
                GlError::CommutatorNotScalar(gens[i].exponents.clone(), gens[j].exponents.clone())
            })?;
            // value ζ_order^exp = ζ_N^(exp·N/order); entry taken mod gcd(dᵢ,dⱼ)
            if n % order != 0 {
                return Err(GlError::BadCharacter);
            }
            let kexp = (exp as u128 * (n / order) as u128 % n as u128) as u64;
            let g = num::Integer::gcd(&d[i], &d[j]);
            if (kexp as u128 * g as u128) % n as u128 != 0 {
                return Err(GlError::BadCharacter);
            }
            matrix[i][j] = ((kexp as u128 * g as u128 / n as u128) % g as u128) as i64;
        }
    }
    Ok(Pairing::new(lambda, matrix)?)
}

/// Verify the four clauses of the representative-triple definition.
pub fn check_representative_triple(t: &RepTriple) -> TripleReport {
    let lambda = &t.lambda;
    // clause 1: s|Δ diagonal homomorphism
    let mut delta_ok = true;
    for d1 in t.delta.elements() {
        let m1 = t.s_of(d1);
        if !m1.is_diagonal() {
            delta_ok = false;
            break;
        }
        for d2 in t.delta.elements() {
            let prod = lambda.mul(d1, d2);
            if &m1.mul(t.s_of(d2)) != t.s_of(&prod) {
                delta_ok = false;
            }
        }
    }
    // clause 2: Int_s is a homomorphism: s(λ)s(λ') ∝ s(λλ')
    let mut int_ok = true;
    'outer: for (e1, m1) in &t.s {
        for (e2, m2) in &t.s {
            let prod = lambda.mul(e1, e2);
            let target = t.s_of(&prod);
            let inv = match target.inverse() {
                Ok(inv) => inv,
                Err(_) => {
                    int_ok = false;
                    break 'outer;
                }
            };
            if m1.mul(m2).mul(&inv).as_scalar().is_none() {
                int_ok = false;
                break 'outer;
            }
        }
    }
    // clause 3: induced pairing equals l
    let pairing_ok = match induced_pairing(lambda, &t.s) {
        Ok(p) => p == t.l,
        Err(_) => false,
    };
    // clause 4: permutation matrices with scalar blocks
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
    TripleReport {
        delta_diagonal_hom: delta_ok,
        int_s_homomorphism: int_ok,
        pairing_matches: pairing_ok,
        scalar_permutation_blocks: perm_ok,
    }
}

// ---------------------------------------------------------------------------
// c_θ and Σ_θ
// ---------------------------------------------------------------------------

/// c_θ(g): the character λ ↦ θ_λ(g)g⁻¹ ∈ Λ*, defined when every such value is
/// a scalar root of unity.
pub fn c_theta(g: &CycMatrix, t: &RepTriple) -> Result<Character, GlError> {
    let lambda = &t.lambda;
    let d = lambda.invariant_factors();
    let k = lambda.rank();
    let ginv = g.inverse()?;
    let mut exps = vec![0u64; k];
    for i in 0..k {
        let mut e = vec![0i64; k];
        e[i] = 1;
        let gen = lambda.elem(&e);
        let m = t.s_of(&gen);
        let val = m.mul(g).mul(&m.inverse()?).mul(&ginv);
        let scalar = val
            .as_scalar()
            .ok_or_else(|| GlError::NotInGTheta(gen.exponents.clone()))?;
        let (order, exp) = scalar
            .as_root_of_unity()
            .ok_or_else(|| GlError::NotInGTheta(gen.exponents.clone()))?;
        if d[i] % order != 0 {
            return Err(GlError::BadCharacter);
        }
        exps[i] = (exp * (d[i] / order)) % d[i];
    }
    let chi = Character { exponents: exps };
    // verify on every element, not only on generators
    for (e, m) in &t.s {
        let val = m.mul(g).mul(&m.inverse()?).mul(&ginv);
        let scalar = val
            .as_scalar()
            .ok_or_else(|| GlError::NotInGTheta(e.exponents.clone()))?;
        if scalar != lambda.char_value(&chi, e) {
            return Err(GlError::BadCharacter);
        }
    }
    Ok(chi)
}

/// Solve A_j M A_j⁻¹ = c_j M for a block matrix M shifting the weights by
/// `shift`, normalizing the lexicographically least block of each propagation
/// orbit to the identity. Returns None when no solution exists.
pub(crate) fn solve_twist(
    weights: &WeightDecomposition,
    delta_group: &FinAbGroup,
    constraints: &[(CycMatrix, CycNum)],
    shift: &Character,
) -> Option<CycMatrix> {
    let nblocks = weights.blocks.len();
    let dim = weights.dim;
    let target_of = |w: &Character| -> Option<usize> {
        let tw = delta_group.char_mul(w, shift);
        weights.block_index_of_character(&tw)
    };
    for b in &weights.blocks {
        let t = target_of(&b.character)?;
        if weights.blocks[t].dim() != b.dim() {
            return None;
        }
    }
    let mut con: Vec<(CycMatrix, CycNum, Character)> = Vec::new();
    for (a, c) in constraints {
        let p = analyze_permutation_matrix(a, weights, delta_group.invariant_factors()).ok()?;
        con.push((a.clone(), c.clone(), p.p_image));
    }
    // propagate blocks B[w]: W_w → W_{w·shift}
    let mut blocks: Vec<Option<CycMatrix>> = vec![None; nblocks];
    loop {
        let root = match (0..nblocks).find(|&i| blocks[i].is_none()) {
            Some(r) => r,
            None => break,
        };
        blocks[root] = Some(CycMatrix::identity(weights.blocks[root].dim()));
        let mut queue = vec![root];
        while let Some(w) = queue.pop() {
            let bw = blocks[w].clone().expect("seeded");
            let wchar = weights.blocks[w].character.clone();
            for (a, c, sigma) in &con {
                // A M A⁻¹ = c M propagates B[w] to B[w·σ]
                let wsig = delta_group.char_mul(&wchar, sigma);
                let wsig_idx = weights.block_index_of_character(&wsig)?;
                let wshift = delta_group.char_mul(&wchar, shift);
                let wshift_idx = weights.block_index_of_character(&wshift)?;
                let wshiftsig = delta_group.char_mul(&wshift, sigma);
                let wshiftsig_idx = weights.block_index_of_character(&wshiftsig)?;
                let a_up = a.submatrix(
                    &weights.blocks[wshiftsig_idx].indices,
                    &weights.blocks[wshift_idx].indices,
                );
                let a_dn =
                    a.submatrix(&weights.blocks[wsig_idx].indices, &weights.blocks[w].indices);
                let a_dn_inv = a_dn.inverse().ok()?;
                let cinv = c.inv().ok()?;
                let new_block = a_up.mul(&bw).mul(&a_dn_inv).scalar_mul(&cinv);
                match &blocks[wsig_idx] {
                    Some(existing) => {
                        if existing != &new_block {
                            return None;
                        }
                    }
                    None => {
                        blocks[wsig_idx] = Some(new_block);
                        queue.push(wsig_idx);
                    }
                }
            }
        }
    }
    let mut m = CycMatrix::zeros(dim, dim);
    for (w, block) in blocks.iter().enumerate() {
        let b = block.clone().expect("all blocks set");
        let t = target_of(&weights.blocks[w].character).expect("checked");
        m.set_submatrix(&weights.blocks[t].indices, &weights.blocks[w].indices, &b);
    }
    // final verification of every constraint
    for (a, c, _) in &con {
        let lhs = a.mul(&m).mul(&a.inverse().ok()?);
        if lhs != m.scalar_mul(c) {
            return None;
        }
    }
    Some(m)
}

/// Constraints "Int_{s(λ)}(M) = γ(λ)·M for all λ ∈ Λ" for a given γ ∈ Λ*.
fn gamma_constraints(t: &RepTriple, gamma: &Character) -> Vec<(CycMatrix, CycNum)> {
    t.s.iter()
        .map(|(e, m)| (m.clone(), t.lambda.char_value(gamma, e)))
        .collect()
}

/// Try to solve the defining relation for γ directly; `None` means γ is not
/// in the image of c_θ.
pub fn solve_m_gamma(t: &RepTriple, gamma: &Character) -> Option<CycMatrix> {
    let shift = t.restrict(gamma);
    solve_twist(
        &t.weights,
        &t.iso.delta.group,
        &gamma_constraints(t, gamma),
        &shift,
    )
}

/// Σ_θ by the weight-orbit formula: characters γ with γ|_Δ preserving the
/// weight set and matching dimensions.
pub fn sigma_theta_formula(t: &RepTriple) -> Vec<Character> {
    let mut out = Vec::new();
    for gamma in t.lambda.characters() {
        let ghat = t.restrict(&gamma);
        let ok = t.weights.blocks.iter().all(|b| {
            let target = t.iso.delta.group.char_mul(&b.character, &ghat);
            match t.weights.block_of_character(&target) {
                Some(tb) => tb.dim() == b.dim(),
                None => false,
            }
        });
        if ok {
            out.push(gamma);
        }
    }
    out
}

/// Σ_θ with its matrices: computed by the direct solver and cross-checked
/// against the weight-orbit formula; the two routes must agree.
pub fn sigma_theta(t: &RepTriple) -> Result<Vec<(Character, CycMatrix)>, GlError> {
    let formula: Vec<Character> = sigma_theta_formula(t);
    let mut out = Vec::new();
    for gamma in t.lambda.characters() {
        let solved = solve_m_gamma(t, &gamma);
        let in_formula = formula.contains(&gamma);
        match (solved, in_formula) {
            (Some(m), true) => out.push((gamma, m)),
            (None, false) => {}
            (got, _) => {
                return Err(GlError::Internal(format!(
                    "Σ_θ routes disagree at γ = {:?}: solver {}, formula {}",
                    gamma.exponents,
                    got.is_some(),
                    in_formula
                )))
            }
        }
    }
    Ok(out)
}

/// The matrix M^γ for γ ∈ Σ_θ, verified against the defining relation
/// Int_{s(λ)}(M^γ) = γ(λ)·M^γ and against c_θ.
pub fn build_m_gamma(t: &RepTriple, gamma: &Character) -> Result<CycMatrix, GlError> {
    let m = solve_m_gamma(t, gamma)
        .ok_or_else(|| GlError::NotInSigmaTheta(gamma.exponents.clone()))?;
    for (e, sm) in &t.s {
        let lhs = sm.int_conj(&m)?;
        let rhs = m.scalar_mul(&t.lambda.char_value(gamma, e));
        if lhs != rhs {
            return Err(GlError::Internal(
                "M^γ violates its defining relation".into(),
            ));
        }
    }
    if &c_theta(&m, t)? != gamma {
        return Err(GlError::Internal("c_θ(M^γ) ≠ γ".into()));
    }
    Ok(m)
}

/// Admissibility: weights fill Δ* with equal dimensions; independently
/// cross-checked against surjectivity of c_θ via the solver route.
pub fn is_admissible(t: &RepTriple) -> Result<bool, GlError> {
    let full = t.weights.blocks.len() as u64 == t.iso.delta.group.order();
    let by_formula = full && t.weights.dims_equal();
    let sigma = sigma_theta(t)?;
    let by_image = sigma.len() as u64 == t.lambda.order();
    if by_formula != by_image {
        return Err(GlError::Internal("admissibility routes disagree".into()));
    }
    Ok(by_formula)
}

// ---------------------------------------------------------------------------
// Construction (existence half of the classification)
// ---------------------------------------------------------------------------

/// Weight profile: dimension per character of Δ*; absent characters have
/// dimension zero. Must be constant on f(Λ/Δ)-orbits.
pub type WeightProfile = BTreeMap<Character, usize>;

/// Equal-dimension profile on the whole dual: the admissible case.
pub fn full_profile(iso: &IsotropyData, m: usize) -> WeightProfile {
    iso.delta
        .group
        .characters()
        .into_iter()
        .map(|c| (c, m))
        .collect()
}

/// Build a representative triple with the prescribed weight profile.
///
/// `reverse_choices` flips the generator processing order; the θ-class must
/// not depend on it.
pub fn construct_representative_triple(
    lambda: &FinAbGroup,
    l: &Pairing,
    delta: &Subgroup,
    profile: &WeightProfile,
    reverse_choices: bool,
) -> Result<RepTriple, GlError> {
    let iso = isotropy_data(lambda, l, delta)?;
    construct_representative_triple_with_iso(lambda, l, delta, iso, profile, reverse_choices)
}

/// As [`construct_representative_triple`], with precomputed isotropy data
/// (the expensive part when sweeping many profiles over one (l, Δ)).
pub fn construct_representative_triple_with_iso(
    lambda: &FinAbGroup,
    l: &Pairing,
    delta: &Subgroup,
    iso: IsotropyData,
    profile: &WeightProfile,
    reverse_choices: bool,
) -> Result<RepTriple, GlError> {
    let dg = iso.delta.group.clone();
    // profile must be constant on f(Λ/Δ)-orbits
    let f_image = iso.f_image();
    for (c, &d) in profile.iter() {
        for fi in &f_image {
            let shifted = dg.char_mul(c, fi);
            if profile.get(&shifted).copied().unwrap_or(0) != d {
                return Err(GlError::BadProfile);
            }
        }
    }
    let n: usize = profile.values().sum();
    if n == 0 {
        return Err(GlError::BadProfile);
    }
    // weight layout: canonical character order, contiguous index ranges
    let mut blocks = Vec::new();
    let mut offset = 0usize;
    for c in dg.characters() {
        let d = profile.get(&c).copied().unwrap_or(0);
        if d == 0 {
            continue;
        }
        blocks.push(WeightBlock {
            character: c,
            indices: (offset..offset + d).collect(),
        });
        offset += d;
    }
    let weights = WeightDecomposition::new(n, blocks, None);
    // s on Δ: diagonal with eigenvalue w(δ) on W_w
    let mut s: BTreeMap<GroupElem, CycMatrix> = BTreeMap::new();
    for delem in delta.elements() {
        let coords = iso.delta.coords(delem).expect("element of Δ");
        let diag: Vec<CycNum> = weights
            .blocks
            .iter()
            .flat_map(|b| {
                let v = dg.char_value(&b.character, &coords);
                std::iter::repeat(v).take(b.dim())
            })
            .collect();
        s.insert(delem.clone(), CycMatrix::diagonal(&diag));
    }
    // extend over Λ/Δ generator by generator
    let quotient = &iso.quotient;
    let mut gen_indices: Vec<usize> = (0..quotient.group.rank()).collect();
    if reverse_choices {
        gen_indices.reverse();
    }
    let mut current: Vec<GroupElem> = delta.elements().to_vec();
    for &gi in &gen_indices {
        let mut gexp = vec![0i64; quotient.group.rank()];
        gexp[gi] = 1;
        let qgen = quotient.group.elem(&gexp);
        let lam = quotient.representative(&qgen);
        if current.contains(&lam) {
            continue;
        }
        let order = {
            let cur: HashSet<&GroupElem> = current.iter().collect();
            let mut t = 1u64;
            let mut acc = lam.clone();
            while !cur.contains(&acc) {
                acc = lambda.mul(&acc, &lam);
                t += 1;
            }
            t
        };
        // relation constraints: s(h) M s(h)⁻¹ = ⟨h, λ⟩ M for h ∈ Λ'
        let constraints: Vec<(CycMatrix, CycNum)> = current
            .iter()
            .map(|h| (s[h].clone(), l.value(lambda, h, &lam)))
            .collect();
        // the Δ-constraints force the block shift of M: δ ↦ ⟨δ, λ⟩
        let shift = {
            let mut exps = Vec::new();
            for (bi, b) in iso.delta.basis.iter().enumerate() {
                let e = dg.invariant_factors()[bi];
                let k = l.eval(lambda, b, &lam);
                let nn = lambda.exponent();
                if (k as u128 * e as u128) % nn as u128 != 0 {
                    return Err(GlError::BadCharacter);
                }
                exps.push(((k as u128 * e as u128 / nn as u128) % e as u128) as u64);
            }
            Character { exponents: exps }
        };
        let m = solve_twist(&weights, &dg, &constraints, &shift)
            .ok_or_else(|| GlError::Internal("extension step unsolvable".into()))?;
        // power correction: make (M·d)^order equal to s(λ^order) exactly
        let lam_pow = lambda.pow(&lam, order as i64);
        let target = s.get(&lam_pow).ok_or(GlError::IncompleteS)?.clone();
        let corrected = power_correct(&weights, &dg, &current, &s, &m, order, &target)?;
        // record s on the new cosets h·λ^r
        let mut new_elems: Vec<(GroupElem, CycMatrix)> = Vec::new();
        for h in &current {
            let mut acc = s[h].clone();
            let mut power = lambda.identity();
            for _ in 1..order {
                acc = acc.mul(&corrected);
                power = lambda.mul(&power, &lam);
                new_elems.push((lambda.mul(h, &power), acc.clone()));
            }
        }
        for (e, m) in new_elems {
            s.insert(e, m);
        }
        let mut grown: Vec<GroupElem> = s.keys().cloned().collect();
        grown.sort();
        current = grown;
    }
    if s.len() as u64 != lambda.order() {
        return Err(GlError::IncompleteS);
    }
    Ok(RepTriple {
        lambda: lambda.clone(),
        l: l.clone(),
        delta: delta.clone(),
        n,
        iso,
        weights,
        s,
    })
}

/// Choose a Δ-matrix d, constant on the current shift-group families, so that
/// (M·d)^order equals the prescribed diagonal matrix exactly. The correction
/// exponent is the minimal principal root at each family orbit.
fn power_correct(
    weights: &WeightDecomposition,
    dg: &FinAbGroup,
    current: &[GroupElem],
    s: &BTreeMap<GroupElem, CycMatrix>,
    m: &CycMatrix,
    order: u64,
    target: &CycMatrix,
) -> Result<CycMatrix, GlError> {
    // families: orbits of the current shift group on the weight set
    let shift_gens: Vec<Character> = current
        .iter()
        .map(|h| {
            analyze_permutation_matrix(&s[h], weights, dg.invariant_factors())
                .map(|p| p.p_image)
                .map_err(GlError::from)
        })
        .collect::<Result<_, _>>()?;
    let nblocks = weights.blocks.len();
    let mut family: Vec<usize> = (0..nblocks).collect();
    loop {
        let mut changed = false;
        for b in 0..nblocks {
            for g in &shift_gens {
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
    let mshift = analyze_permutation_matrix(m, weights, dg.invariant_factors())?.p_image;
    let mpow = m.pow(order);
    let block_scalar = |mat: &CycMatrix, b: usize| -> Result<CycNum, GlError> {
        let idx = &weights.blocks[b].indices;
        mat.submatrix(idx, idx)
            .as_scalar()
            .ok_or_else(|| GlError::Internal("expected a scalar block".into()))
    };
    let mut ratio = Vec::with_capacity(nblocks);
    for b in 0..nblocks {
        let a = block_scalar(&mpow, b)?;
        let t = block_scalar(target, b)?;
        ratio.push(t.div(&a)?);
    }
    // solve per orbit of the M-shift action on family labels
    let mut x: Vec<CycNum> = vec![CycNum::one(); nblocks];
    let mut seen_fams: HashSet<usize> = HashSet::new();
    for b in 0..nblocks {
        let f = family[b];
        if !seen_fams.insert(f) {
            continue;
        }
        let mut orbit = vec![f];
        let mut wchar = weights.blocks[b].character.clone();
        loop {
            wchar = dg.char_mul(&wchar, &mshift);
            let bi = weights
                .block_index_of_character(&wchar)
                .ok_or_else(|| GlError::Internal("shift escapes the weight set".into()))?;
            let fi = family[bi];
            if fi == f {
                break;
            }
            if !orbit.contains(&fi) {
                orbit.push(fi);
                seen_fams.insert(fi);
            }
        }
        let len = orbit.len() as u64;
        if order % len != 0 {
            return Err(GlError::Internal(
                "orbit length must divide the order".into(),
            ));
        }
        let r = ratio[b].clone();
        for bb in 0..nblocks {
            if orbit.contains(&family[bb]) && ratio[bb] != r {
                return Err(GlError::Internal(
                    "power ratio is not constant on shift families".into(),
                ));
            }
        }
        let root = r
            .principal_root(order / len)
            .map_err(|_| GlError::Internal("power ratio must be a root of unity".into()))?;
        for bb in 0..nblocks {
            if family[bb] == f {
                x[bb] = root.clone();
            }
        }
    }
    let mut d = CycMatrix::identity(weights.dim);
    for b in 0..nblocks {
        for &i in &weights.blocks[b].indices {
            d.set(i, i, x[b].clone());
        }
    }
    let corrected = m.mul(&d);
    if corrected.pow(order) != *target {
        return Err(GlError::Internal(
            "power correction did not reach the target".into(),
        ));
    }
    Ok(corrected)
}

/// The admissible construction: |Δ| must divide n; all weights present with
/// equal dimension n/|Δ|.
pub fn construct_admissible_s(
    lambda: &FinAbGroup,
    l: &Pairing,
    delta: &Subgroup,
    n: usize,
) -> Result<RepTriple, GlError> {
    construct_admissible_s_with_choices(lambda, l, delta, n, false)
}

pub fn construct_admissible_s_with_choices(
    lambda: &FinAbGroup,
    l: &Pairing,
    delta: &Subgroup,
    n: usize,
    reverse_choices: bool,
) -> Result<RepTriple, GlError> {
    let dorder = delta.order();
    if n as u64 % dorder != 0 {
        return Err(GlError::DivisibilityFailure {
            delta: dorder,
            n: n as u64,
        });
    }
    let iso = isotropy_data(lambda, l, delta)?;
    let profile = full_profile(&iso, n / dorder as usize);
    let t = construct_representative_triple(lambda, l, delta, &profile, reverse_choices)?;
    let report = check_representative_triple(&t);
    if !report.all_ok() {
        return Err(GlError::Internal(format!(
            "constructed triple fails its own check: {:?}",
            report
        )));
    }
    if !is_admissible(&t)? {
        return Err(GlError::NotAdmissible);
    }
    Ok(t)
}

// ---------------------------------------------------------------------------
// θ-classes
// ---------------------------------------------------------------------------

/// Canonical form of the class of Int_s in the character variety: the pairing
/// and the multiset of weight dimensions determine the class of an admissible
/// triple.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaClassGl {
    pub lambda_invariant_factors: Vec<u64>,
    pub pairing_matrix: Vec<Vec<u64>>,
    pub weight_dims: Vec<usize>,
}

pub fn theta_class(t: &RepTriple) -> Result<ThetaClassGl, GlError> {
    if !is_admissible(t)? {
        return Err(GlError::NotAdmissible);
    }
    let mut dims: Vec<usize> = t.weights.blocks.iter().map(WeightBlock::dim).collect();
    dims.sort_unstable();
    Ok(ThetaClassGl {
        lambda_invariant_factors: t.lambda.invariant_factors().to_vec(),
        pairing_matrix: t.l.matrix().to_vec(),
        weight_dims: dims,
    })
}

/// Brute-force search for a monomial matrix g with Int_g ∘ Int_s ∘ Int_g⁻¹ =
/// Int_{s'} pointwise; validates canonical-form conjugacy on tiny cases
/// (n ≤ 4, |Λ| ≤ 4).
pub fn monomial_conjugator(t1: &RepTriple, t2: &RepTriple) -> Option<CycMatrix> {
    if t1.n != t2.n || t1.lambda != t2.lambda || t1.n > 4 || t1.lambda.order() > 4 {
        return None;
    }
    let n = t1.n;
    let root_order = num::Integer::lcm(&(2 * t1.lambda.exponent()), &8u64);
    let roots: Vec<CycNum> = (0..root_order)
        .map(|k| CycNum::root_of_unity(root_order, k as i64))
        .collect();
    let mut perms: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..n {
        let mut next = Vec::new();
        for p in &perms {
            for v in 0..n {
                if !p.contains(&v) {
                    let mut q = p.clone();
                    q.push(v);
                    next.push(q);
                }
            }
        }
        perms = next;
    }
    // g = P_σ · D with D diagonal over the root set; the first diagonal entry
    // can be normalized to 1 (g acts by conjugation)
    for p in &perms {
        let mut stack: Vec<Vec<Option<CycNum>>> = vec![{
            let mut d = vec![None; n];
            d[0] = Some(CycNum::one());
            d
        }];
        while let Some(partial) = stack.pop() {
            if let Some(slot) = (0..n).find(|&i| partial[i].is_none()) {
                for r in &roots {
                    let mut next = partial.clone();
                    next[slot] = Some(r.clone());
                    stack.push(next);
                }
                continue;
            }
            let diag: Vec<CycNum> = partial.into_iter().map(Option::unwrap).collect();
            // column c of g carries the basis vector e_{p[c]} scaled by diag
            let mut g = CycMatrix::zeros(n, n);
            for (c, &r) in p.iter().enumerate() {
                g.set(r, c, diag[c].clone());
            }
            let ginv = match g.inverse() {
                Ok(v) => v,
                Err(_) => continue,
            };
            let ok = t1.s.iter().all(|(e, m1)| {
                let conj = g.mul(m1).mul(&ginv);
                match t2.s_of(e).inverse() {
                    Ok(m2inv) => conj.mul(&m2inv).as_scalar().is_some(),
                    Err(_) => false,
                }
            });
            if ok {
                return Some(g);
            }
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Normalization of raw actions (representability half)
// ---------------------------------------------------------------------------

pub(crate) fn nth_roots(c: &CycNum, order: u64) -> Vec<CycNum> {
    // roots of x^order = c when c = q·u with q a positive rational whose
    // numerator and denominator are perfect order-th powers, u a root of unity
    if let Some((m, k)) = c.as_root_of_unity() {
        let base = CycNum::root_of_unity(m * order, k as i64);
        return (0..order)
            .map(|j| base.mul(&CycNum::root_of_unity(order, j as i64)))
            .collect();
    }
    let cand_orders: u64 = 2 * num::Integer::lcm(&c.conductor(), &order);
    for k in 0..cand_orders {
        let u = CycNum::root_of_unity(cand_orders, k as i64);
        let q = c.div(&u).expect("root of unity nonzero");
        if let Some(r) = q.as_rational() {
            use num::bigint::BigInt;
            use num::{Signed, ToPrimitive, Zero};
            if r.is_zero() || r.numer().is_negative() {
                continue;
            }
            let nroot = |x: &BigInt| -> Option<BigInt> {
                let v = x.to_f64()?;
                let approx = v.powf(1.0 / order as f64).round() as i64;
                ((approx - 1).max(0)..=(approx + 1))
                    .map(BigInt::from)
                    .find(|cand| cand.pow(order as u32) == *x)
            };
            if let (Some(a), Some(b)) = (nroot(r.numer()), nroot(r.denom())) {
                let mag = CycNum::from_rational_at(1, num::rational::BigRational::new(a, b));
                let uroot = u.principal_root(order).expect("u is a root of unity");
                return (0..order)
                    .map(|j| mag.mul(&uroot).mul(&CycNum::root_of_unity(order, j as i64)))
                    .collect();
            }
        }
    }
    Vec::new()
}

pub(crate) fn eigenspace(a: &CycMatrix, mu: &CycNum) -> Vec<Vec<CycNum>> {
    let n = a.n_rows();
    let shifted = a.sub(&CycMatrix::identity(n).scalar_mul(mu));
    shifted.kernel_basis()
}

/// Intersect two subspaces given by spanning columns.
pub(crate) fn intersect(
    space1: &[Vec<CycNum>],
    space2: &[Vec<CycNum>],
    dim: usize,
) -> Vec<Vec<CycNum>> {
    if space1.is_empty() || space2.is_empty() {
        return Vec::new();
    }
    let c1 = space1.len();
    let cols = c1 + space2.len();
    let m = CycMatrix::from_fn(dim, cols, |r, c| {
        if c < c1 {
            space1[c][r].clone()
        } else {
            space2[c - c1][r].neg()
        }
    });
    let ker = m.kernel_basis();
    let mut candidates = Vec::new();
    for v in ker {
        let mut w = vec![CycNum::zero(); dim];
        for (j, coeff) in v.iter().take(c1).enumerate() {
            for (r, wr) in w.iter_mut().enumerate() {
                *wr = wr.add(&coeff.mul(&space1[j][r]));
            }
        }
        if w.iter().any(|x| !x.is_zero()) {
            candidates.push(w);
        }
    }
    // keep an independent subset
    let mut basis: Vec<Vec<CycNum>> = Vec::new();
    for w in candidates {
        let test = CycMatrix::from_fn(dim, basis.len() + 1, |r, c| {
            if c < basis.len() {
                basis[c][r].clone()
            } else {
                w[r].clone()
            }
        });
        if test.rank() == basis.len() + 1 {
            basis.push(w);
        }
    }
    basis
}

/// Normalize a raw map s: Λ → GL(n, C) (with Int_s a homomorphism) to a
/// representative triple. The returned conjugator P witnesses
/// s_new(λ) ∝ P⁻¹ · s_raw(λ) · P exactly, for every λ.
pub fn normalize_to_representative(
    lambda: &FinAbGroup,
    raw: &BTreeMap<GroupElem, CycMatrix>,
    guard: u64,
) -> Result<(RepTriple, CycMatrix), GlError> {
    if raw.len() as u64 != lambda.order() {
        return Err(GlError::IncompleteS);
    }
    let n = raw
        .values()
        .next()
        .map(CycMatrix::n_rows)
        .ok_or(GlError::IncompleteS)?;
    let l = induced_pairing(lambda, raw)?;
    let delta = maximal_isotropic_subgroups(lambda, &l, guard)?
        .into_iter()
        .next()
        .ok_or_else(|| GlError::Internal("no maximal isotropic subgroup".into()))?;
    let iso = isotropy_data(lambda, &l, &delta)?;
    // simultaneous eigenspaces of s(Δ) along the Δ-basis
    let mut spaces: Vec<(Vec<CycNum>, Vec<Vec<CycNum>>)> = vec![(
        Vec::new(),
        (0..n)
            .map(|i| {
                let mut v = vec![CycNum::zero(); n];
                v[i] = CycNum::one();
                v
            })
            .collect(),
    )];
    for (bi, b) in iso.delta.basis.iter().enumerate() {
        let a = raw.get(b).ok_or(GlError::IncompleteS)?;
        let order = iso.delta.group.invariant_factors()[bi];
        let apow = a.pow(order);
        let c = apow
            .as_scalar()
            .ok_or_else(|| GlError::DiagonalizationFailure("s(δ)^order is not scalar".into()))?;
        let mus = nth_roots(&c, order);
        if mus.is_empty() {
            return Err(GlError::DiagonalizationFailure(
                "eigenvalues are not cyclotomic".into(),
            ));
        }
        let mut next = Vec::new();
        for (tag, space) in &spaces {
            for mu in &mus {
                let eig = eigenspace(a, mu);
                let inter = intersect(space, &eig, n);
                if !inter.is_empty() {
                    let mut tag2 = tag.clone();
                    tag2.push(mu.clone());
                    next.push((tag2, inter));
                }
            }
        }
        let total: usize = next.iter().map(|(_, s)| s.len()).sum();
        if total != n {
            return Err(GlError::DiagonalizationFailure(format!(
                "eigenspace dimensions sum to {} ≠ {}",
                total, n
            )));
        }
        spaces = next;
    }
    // weights as characters, normalized by the lexicographically first space
    spaces.sort_by_key(|(tag, _)| {
        tag.iter()
            .map(|c| c.canonical_key(c.conductor()))
            .collect::<Vec<_>>()
    });
    let base_tag = spaces[0].0.clone();
    let dg = iso.delta.group.clone();
    let factors = dg.invariant_factors().to_vec();
    let mut tagged: Vec<(Character, Vec<Vec<CycNum>>)> = Vec::new();
    for (tag, space) in &spaces {
        let mut exps = Vec::new();
        for (i, mu) in tag.iter().enumerate() {
            let ratio = mu.div(&base_tag[i])?;
            let (order, exp) = ratio.as_root_of_unity().ok_or_else(|| {
                GlError::DiagonalizationFailure("weight ratio is not a root of unity".into())
            })?;
            if factors[i] % order != 0 {
                return Err(GlError::DiagonalizationFailure(
                    "weight order exceeds the invariant factor".into(),
                ));
            }
            exps.push((exp * (factors[i] / order)) % factors[i]);
        }
        tagged.push((Character { exponents: exps }, space.clone()));
    }
    tagged.sort_by(|a, b| a.0.cmp(&b.0));
    let mut cols: Vec<Vec<CycNum>> = Vec::new();
    let mut blocks = Vec::new();
    let mut offset = 0usize;
    for (chi, space) in &tagged {
        blocks.push(WeightBlock {
            character: chi.clone(),
            indices: (offset..offset + space.len()).collect(),
        });
        offset += space.len();
        cols.extend(space.iter().cloned());
    }
    let weights = WeightDecomposition::new(n, blocks, None);
    let p = CycMatrix::from_fn(n, n, |r, c| cols[c][r].clone());
    let pinv = p.inverse()?;
    let mut s: BTreeMap<GroupElem, CycMatrix> = BTreeMap::new();
    for (e, m) in raw {
        s.insert(e.clone(), pinv.mul(m).mul(&p));
    }
    // rescale s|Δ to the homomorphism with first eigenvalue 1
    for delem in delta.elements().to_vec() {
        let m = s.get(&delem).expect("total").clone();
        if !m.is_diagonal() {
            return Err(GlError::DiagonalizationFailure(
                "Δ-image failed to diagonalize".into(),
            ));
        }
        let first = m.at(0, 0).clone();
        s.insert(delem, m.scalar_mul(&first.inv()?));
    }
    // scalar-block normalization: conjugate by the Δ-matrix assembled from
    // inverses of coset-representative blocks
    let mut smat = CycMatrix::identity(n);
    {
        let shift_image: Vec<Character> = iso
            .quotient
            .group
            .elements()
            .iter()
            .map(|q| {
                let rep = iso.quotient.representative(q);
                analyze_permutation_matrix(&s[&rep], &weights, dg.invariant_factors())
                    .map(|pm| pm.p_image)
                    .map_err(GlError::from)
            })
            .collect::<Result<_, _>>()?;
        let mut covered: HashSet<usize> = HashSet::new();
        for (bi, b) in weights.blocks.iter().enumerate() {
            if covered.contains(&bi) {
                continue;
            }
            covered.insert(bi);
            for (qi, q) in iso.quotient.group.elements().iter().enumerate() {
                let shifted = dg.char_mul(&b.character, &shift_image[qi]);
                let target = weights.block_index_of_character(&shifted).ok_or_else(|| {
                    GlError::DiagonalizationFailure("weight set is not shift-invariant".into())
                })?;
                if covered.contains(&target) {
                    continue;
                }
                covered.insert(target);
                let rep = iso.quotient.representative(q);
                let block = s[&rep]
                    .submatrix(&weights.blocks[target].indices, &b.indices)
                    .inverse()?;
                smat.set_submatrix(
                    &weights.blocks[target].indices,
                    &weights.blocks[target].indices,
                    &block,
                );
            }
        }
    }
    let smat_inv = smat.inverse()?;
    for (_, m) in s.iter_mut() {
        *m = smat.mul(m).mul(&smat_inv);
    }
    // total base change: new = smat · P⁻¹ · raw · P · smat⁻¹ = C⁻¹ raw C
    // with C = P · smat⁻¹
    let conjugator = p.mul(&smat_inv);
    let t = RepTriple {
        lambda: lambda.clone(),
        l,
        delta,
        n,
        iso,
        weights,
        s,
    };
    let report = check_representative_triple(&t);
    if !report.all_ok() {
        return Err(GlError::DiagonalizationFailure(format!(
            "normalization did not reach representative form: {:?}",
            report
        )));
    }
    let cinv = conjugator.inverse()?;
    for (e, m_raw) in raw {
        let lhs = cinv.mul(m_raw).mul(&conjugator);
        if lhs.mul(&t.s_of(e).inverse()?).as_scalar().is_none() {
            return Err(GlError::Internal(
                "conjugator does not witness the normalization".into(),
            ));
        }
    }
    Ok((t, conjugator))
}

// ---------------------------------------------------------------------------
// G^θ descriptor, τ and φ
// ---------------------------------------------------------------------------

/// Description of G^θ as a product of GL(m) factors indexed by
/// f(Λ/Δ)-cosets of the weight set, plus the τ-action and φ-section data.
pub struct BlockGroupData {
    /// Families of weight-block indices; each family carries one independent
    /// GL(dim) factor, repeated across its members.
    pub families: Vec<Vec<usize>>,
    /// Per Λ*-character (canonical order): permutation of family labels
    /// induced by conjugation with M^γ.
    pub tau: Vec<Vec<usize>>,
    /// φ(γ) = M^γ per Λ*-character, canonical order.
    pub phi: Vec<CycMatrix>,
    /// Extracted cocycle of the extension G_θ of G^θ by Λ*.
    pub cocycle: crate::extensions::Cocycle2,
    /// Raw cocycle values as matrices, row-major over Λ*×Λ*.
    pub cocycle_matrices: Vec<CycMatrix>,
}

/// G^θ generators used for centrality testing: per family, a full cycle and a
/// distinguishing diagonal, repeated across the family members.
fn block_group_generators(t: &RepTriple, families: &[Vec<usize>]) -> Vec<CycMatrix> {
    let mut gens = Vec::new();
    for fam in families {
        let m = t.weights.blocks[fam[0]].dim();
        let mut cyc = CycMatrix::identity(t.n);
        let mut diag = CycMatrix::identity(t.n);
        for &bi in fam {
            let idx = &t.weights.blocks[bi].indices;
            if m > 1 {
                let mut c = CycMatrix::zeros(m, m);
                for j in 0..m {
                    c.set((j + 1) % m, j, CycNum::one());
                }
                cyc.set_submatrix(idx, idx, &c);
            }
            let mut dd = CycMatrix::identity(m);
            dd.set(0, 0, CycNum::from_int(2));
            diag.set_submatrix(idx, idx, &dd);
        }
        if m > 1 {
            gens.push(cyc);
        }
        gens.push(diag);
    }
    gens
}

/// Compute the block-group description of an admissible triple: families,
/// τ as a permutation action on family labels, φ(γ) = M^γ, and the cocycle
/// extracted from the section φ.
pub fn block_group_and_tau(t: &RepTriple) -> Result<BlockGroupData, GlError> {
    if !is_admissible(t)? {
        return Err(GlError::NotAdmissible);
    }
    let dg = &t.iso.delta.group;
    let f_image = t.iso.f_image();
    let nblocks = t.weights.blocks.len();
    let mut assigned: Vec<Option<usize>> = vec![None; nblocks];
    let mut families: Vec<Vec<usize>> = Vec::new();
    for b in 0..nblocks {
        if assigned[b].is_some() {
            continue;
        }
        let fam_id = families.len();
        let mut fam = Vec::new();
        for fi in &f_image {
            let target = dg.char_mul(&t.weights.blocks[b].character, fi);
            let ti = t
                .weights
                .block_index_of_character(&target)
                .ok_or_else(|| GlError::Internal("family escapes weight set".into()))?;
            if assigned[ti].is_none() {
                assigned[ti] = Some(fam_id);
                fam.push(ti);
            }
        }
        fam.sort_unstable();
        families.push(fam);
    }
    let sigma = sigma_theta(t)?;
    if sigma.len() as u64 != t.lambda.order() {
        return Err(GlError::NotAdmissible);
    }
    let characters = t.lambda.characters();
    let mut phi = Vec::with_capacity(characters.len());
    let mut tau = Vec::with_capacity(characters.len());
    for gamma in &characters {
        let m = sigma
            .iter()
            .find(|(g, _)| g == gamma)
            .map(|(_, m)| m.clone())
            .ok_or_else(|| GlError::NotInSigmaTheta(gamma.exponents.clone()))?;
        let ghat = t.restrict(gamma);
        let mut perm = vec![0usize; families.len()];
        for (fi, fam) in families.iter().enumerate() {
            let target_char = dg.char_mul(&t.weights.blocks[fam[0]].character, &ghat);
            let ti = t
                .weights
                .block_index_of_character(&target_char)
                .ok_or_else(|| GlError::Internal("τ escapes weight set".into()))?;
            perm[fi] = assigned[ti].expect("assigned");
        }
        phi.push(m);
        tau.push(perm);
    }
    // cocycle from the section φ over Λ*
    let lam_star = crate::extensions::SmallGroup::from_abelian(&t.lambda);
    let ambient = crate::extensions::MatrixGroup::new(
        {
            let mut gens = block_group_generators(t, &families);
            gens.extend(phi.iter().cloned());
            gens
        },
        1 << 20,
    );
    let g0_gens = block_group_generators(t, &families);
    let ext = crate::extensions::cocycle_from_section(&ambient, &lam_star, &phi, &g0_gens, 1 << 12)
        .map_err(|e| GlError::Internal(format!("cocycle extraction failed: {e}")))?;
    // every raw value must lie in Z(G^θ): a Δ-matrix with scalar blocks
    // constant on families
    for v in &ext.raw_values {
        let pm = analyze_permutation_matrix(v, &t.weights, dg.invariant_factors())?;
        if pm.p_image != dg.trivial_character() {
            return Err(GlError::Internal("cocycle value is not a Δ-matrix".into()));
        }
        let scalars = pm
            .scalar_blocks()
            .ok_or_else(|| GlError::Internal("cocycle value has non-scalar blocks".into()))?;
        for fam in &families {
            let first = &scalars[fam[0]];
            if fam.iter().any(|&bi| &scalars[bi] != first) {
                return Err(GlError::Internal(
                    "cocycle value is not constant on families".into(),
                ));
            }
        }
    }
    let mats = ext.raw_values.clone();
    Ok(BlockGroupData {
        families,
        tau,
        phi,
        cocycle: ext.cocycle,
        cocycle_matrices: mats,
    })
}

// ---------------------------------------------------------------------------
// Census
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GlCensusRow {
    pub pairing: Pairing,
    pub delta_generators: Vec<GroupElem>,
    pub delta_order: u64,
    pub admissible: bool,
    /// Invariant factors of the cover group Δ* (≅ Δ).
    pub cover_group: Vec<u64>,
    /// n / |Δ| when admissible.
    pub pushforward_rank: Option<u64>,
    pub theta_class: Option<ThetaClassGl>,
    /// Λ lies in the n-torsion (exp(Λ) | n): the necessary condition for the
    /// fixed-determinant refinement to be non-empty.
    pub det_condition: bool,
    /// Serialized witness triple for admissible rows.
    pub witness: Option<TripleWire>,
}

/// Serializable form of a representative triple.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TripleWire {
    pub lambda: Vec<u64>,
    pub pairing: Vec<Vec<u64>>,
    pub delta_generators: Vec<GroupElem>,
    pub n: usize,
    pub s_table: Vec<(GroupElem, CycMatrix)>,
}

pub fn triple_to_wire(t: &RepTriple) -> TripleWire {
    TripleWire {
        lambda: t.lambda.invariant_factors().to_vec(),
        pairing: t.l.matrix().to_vec(),
        delta_generators: t.delta.generators().to_vec(),
        n: t.n,
        s_table: t.s.iter().map(|(e, m)| (e.clone(), m.clone())).collect(),
    }
}

pub fn triple_from_wire(w: &TripleWire) -> Result<RepTriple, GlError> {
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
    // weight decomposition re-derived from s|Δ
    let dg = iso.delta.group.clone();
    let mut blocks_by_char: BTreeMap<Character, Vec<usize>> = BTreeMap::new();
    for i in 0..w.n {
        let mut exps = Vec::new();
        for (bi, b) in iso.delta.basis.iter().enumerate() {
            let e = dg.invariant_factors()[bi];
            let m = s.get(b).ok_or(GlError::IncompleteS)?;
            let v = m.at(i, i).clone();
            let (order, exp) = v
                .as_root_of_unity()
                .ok_or_else(|| GlError::DiagonalizationFailure("witness not diagonal".into()))?;
            if e % order != 0 {
                return Err(GlError::BadCharacter);
            }
            exps.push((exp * (e / order)) % e);
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
    let weights = WeightDecomposition::new(w.n, blocks, None);
    Ok(RepTriple {
        lambda,
        l,
        delta,
        n: w.n,
        iso,
        weights,
        s,
    })
}

/// One census row per antisymmetric pairing on Λ (with a fixed maximal
/// isotropic Δ per pairing): the discrete index of the fixed-point components.
pub fn enumerate_components_gl(
    n: usize,
    lambda: &FinAbGroup,
    guard: u64,
    dedup_aut: bool,
) -> Result<Vec<GlCensusRow>, GlError> {
    let mut pairings = enumerate_antisymmetric_pairings(lambda, guard)?;
    if dedup_aut {
        pairings = crate::abelian::dedup_pairings_by_aut(lambda, &pairings, guard.min(64))?;
    }
    pairings
        .into_iter()
        .map(|l| gl_census_row(n, lambda, &l, guard))
        .collect()
}

/// The census row of one pairing, with a fixed maximal isotropic subgroup.
pub fn gl_census_row(
    n: usize,
    lambda: &FinAbGroup,
    l: &Pairing,
    guard: u64,
) -> Result<GlCensusRow, GlError> {
    let delta = maximal_isotropic_subgroups(lambda, l, guard)?
        .into_iter()
        .next()
        .ok_or_else(|| GlError::Internal("no maximal isotropic subgroup".into()))?;
    let dorder = delta.order();
    let admissible = n as u64 % dorder == 0;
    let (theta, witness) = if admissible {
        let t = construct_admissible_s(lambda, l, &delta, n)?;
        (Some(theta_class(&t)?), Some(triple_to_wire(&t)))
    } else {
        (None, None)
    };
    let delta_structure = crate::abelian::SubgroupStructure::analyze(lambda, &delta);
    Ok(GlCensusRow {
        pairing: l.clone(),
        delta_generators: delta.generators().to_vec(),
        delta_order: dorder,
        admissible,
        cover_group: delta_structure.group.invariant_factors().to_vec(),
        pushforward_rank: admissible.then(|| n as u64 / dorder),
        theta_class: theta,
        det_condition: n as u64 % lambda.exponent() == 0,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::{make_group, DEFAULT_GUARD};

    /// The cyclic model: Λ = ℤ/r acting on C^(r·m).
    fn cyclic_triple(r: u64, m: usize) -> RepTriple {
        let lambda = make_group(&[r]);
        let l = Pairing::trivial(&lambda);
        let delta = Subgroup::full(&lambda);
        construct_admissible_s(&lambda, &l, &delta, (r as usize) * m).unwrap()
    }

    #[test]
    fn cyclic_model_is_representative_and_admissible() {
        for (r, m) in [(2u64, 1usize), (2, 2), (3, 1), (4, 2)] {
            let t = cyclic_triple(r, m);
            let report = check_representative_triple(&t);
            assert!(report.all_ok(), "r={} m={}: {:?}", r, m, report);
            assert!(is_admissible(&t).unwrap());
            assert_eq!(sigma_theta(&t).unwrap().len() as u64, r);
        }
    }

    #[test]
    fn induced_pairing_roundtrip_v4() {
        let lambda = make_group(&[2, 2]);
        for l in enumerate_antisymmetric_pairings(&lambda, DEFAULT_GUARD).unwrap() {
            let delta = maximal_isotropic_subgroups(&lambda, &l, DEFAULT_GUARD)
                .unwrap()
                .into_iter()
                .next()
                .unwrap();
            let n = 2 * delta.order() as usize;
            let t = construct_admissible_s(&lambda, &l, &delta, n).unwrap();
            assert_eq!(induced_pairing(&lambda, &t.s).unwrap(), l);
        }
    }

    #[test]
    fn explicit_v4_nondegenerate_pair() {
        // s(a) = diag(1,-1), s(b) = antidiag(1,1): ⟨a,b⟩ = -1
        let lambda = make_group(&[2, 2]);
        let mut s = BTreeMap::new();
        let a = lambda.elem(&[1, 0]);
        let b = lambda.elem(&[0, 1]);
        let sa = CycMatrix::diagonal(&[CycNum::one(), CycNum::from_int(-1)]);
        let sb = CycMatrix::from_int_rows(&[&[0, 1], &[1, 0]]);
        s.insert(lambda.identity(), CycMatrix::identity(2));
        s.insert(a.clone(), sa.clone());
        s.insert(b.clone(), sb.clone());
        s.insert(lambda.mul(&a, &b), sa.mul(&sb));
        let l = induced_pairing(&lambda, &s).unwrap();
        assert_eq!(l.eval(&lambda, &a, &b), 1); // exponent of ζ_2: value -1
        assert!(!l.is_trivial());
    }

    #[test]
    fn clause_violations_reported() {
        let t = cyclic_triple(2, 1);
        let mut bad = t.s.clone();
        let gen = t.lambda.elem(&[1]);
        bad.insert(gen, CycMatrix::from_int_rows(&[&[1, 1], &[0, 1]]));
        let bad_t = RepTriple {
            lambda: t.lambda.clone(),
            l: t.l.clone(),
            delta: t.delta.clone(),
            n: t.n,
            iso: isotropy_data(&t.lambda, &t.l, &t.delta).unwrap(),
            weights: t.weights.clone(),
            s: bad,
        };
        let report = check_representative_triple(&bad_t);
        assert!(!report.all_ok());
        assert!(!report.delta_diagonal_hom);
    }

    #[test]
    fn scaled_block_fails_clause_four() {
        // rescale ONE block of an off-Δ image: permutation structure remains
        // but the triple's homomorphism/pairing bookkeeping breaks
        let lambda = make_group(&[2]);
        let l = Pairing::trivial(&lambda);
        let delta = Subgroup::full(&lambda);
        let t = construct_admissible_s(&lambda, &l, &delta, 4).unwrap();
        // build a non-scalar block variant on the Δ-generator image instead:
        // replace s(1̄) by a diagonal with a non-scalar block
        let mut bad = t.s.clone();
        let gen = lambda.elem(&[1]);
        let mut m = bad[&gen].clone();
        // weights have dimension 2 each; scale one basis vector inside W_1
        m.set(0, 0, m.at(0, 0).mul(&CycNum::from_int(2)));
        bad.insert(gen, m);
        let bad_t = RepTriple {
            lambda: t.lambda.clone(),
            l: t.l.clone(),
            delta: t.delta.clone(),
            n: t.n,
            iso: isotropy_data(&t.lambda, &t.l, &t.delta).unwrap(),
            weights: t.weights.clone(),
            s: bad,
        };
        let report = check_representative_triple(&bad_t);
        assert!(!report.scalar_permutation_blocks);
    }

    #[test]
    fn c_theta_values_on_cyclic_model() {
        let t = cyclic_triple(3, 2);
        // scalars are in the kernel
        let z = CycMatrix::identity(t.n).scalar_mul(&CycNum::root_of_unity(12, 5));
        assert_eq!(c_theta(&z, &t).unwrap(), t.lambda.trivial_character());
        // block-diagonal G^θ elements are in the kernel
        let mut g = CycMatrix::identity(t.n);
        g.set(0, 1, CycNum::from_int(7));
        g.set(1, 0, CycNum::from_int(3));
        assert_eq!(c_theta(&g, &t).unwrap(), t.lambda.trivial_character());
        // each M^γ hits exactly γ
        for (gamma, mg) in sigma_theta(&t).unwrap() {
            assert_eq!(c_theta(&mg, &t).unwrap(), gamma);
        }
        // something outside G_θ errors
        let mut bad = CycMatrix::identity(t.n);
        bad.set(0, 2, CycNum::one());
        assert!(matches!(c_theta(&bad, &t), Err(GlError::NotInGTheta(_))));
    }

    #[test]
    fn c_theta_multiplicative() {
        let t = cyclic_triple(2, 2);
        let sigma = sigma_theta(&t).unwrap();
        for (g1, m1) in &sigma {
            for (g2, m2) in &sigma {
                let prod = m1.mul(m2);
                let expect = t.lambda.char_mul(g1, g2);
                assert_eq!(c_theta(&prod, &t).unwrap(), expect);
            }
        }
    }

    #[test]
    fn m_gamma_defining_relation_and_product_law() {
        let lambda = make_group(&[2, 2]);
        let l = Pairing::new(&lambda, vec![vec![0, 1], vec![1, 0]]).unwrap();
        let delta = maximal_isotropic_subgroups(&lambda, &l, DEFAULT_GUARD)
            .unwrap()
            .into_iter()
            .next()
            .unwrap();
        let t = construct_admissible_s(&lambda, &l, &delta, 4).unwrap();
        let sigma = sigma_theta(&t).unwrap();
        assert_eq!(sigma.len(), 4);
        let dg = &t.iso.delta.group;
        for (g1, m1) in &sigma {
            let built = build_m_gamma(&t, g1).unwrap();
            assert_eq!(c_theta(&built, &t).unwrap(), *g1);
            for (g2, m2) in &sigma {
                // M^γ M^γ' (M^γγ')⁻¹ is a Δ-matrix with scalar blocks
                // constant on f-cosets, i.e. an element of Z(G^θ)
                let g12 = t.lambda.char_mul(g1, g2);
                let m12 = sigma
                    .iter()
                    .find(|(g, _)| g == &g12)
                    .map(|(_, m)| m.clone())
                    .unwrap();
                let z = m1.mul(m2).mul(&m12.inverse().unwrap());
                let pm =
                    analyze_permutation_matrix(&z, &t.weights, dg.invariant_factors()).unwrap();
                assert_eq!(pm.p_image, dg.trivial_character());
                assert!(pm.scalar_blocks().is_some());
            }
        }
    }

    #[test]
    fn unequal_multiplicities_shrink_sigma() {
        // Λ = ℤ/2, Δ = Λ, weights of sizes (2, 1): the nontrivial character
        // is excluded from Σ_θ
        let lambda = make_group(&[2]);
        let l = Pairing::trivial(&lambda);
        let delta = Subgroup::full(&lambda);
        let iso = isotropy_data(&lambda, &l, &delta).unwrap();
        let mut profile = WeightProfile::new();
        let chars = iso.delta.group.characters();
        profile.insert(chars[0].clone(), 2);
        profile.insert(chars[1].clone(), 1);
        let t = construct_representative_triple(&lambda, &l, &delta, &profile, false).unwrap();
        assert!(check_representative_triple(&t).all_ok());
        assert!(!is_admissible(&t).unwrap());
        assert_eq!(sigma_theta(&t).unwrap().len(), 1);
    }

    #[test]
    fn admissibility_divisibility() {
        let lambda = make_group(&[2]);
        let l = Pairing::trivial(&lambda);
        let delta = Subgroup::full(&lambda);
        assert!(matches!(
            construct_admissible_s(&lambda, &l, &delta, 3),
            Err(GlError::DivisibilityFailure { .. })
        ));
    }

    #[test]
    fn theta_class_stability_under_choices() {
        let lambda = make_group(&[2, 2]);
        for l in enumerate_antisymmetric_pairings(&lambda, DEFAULT_GUARD).unwrap() {
            let delta = maximal_isotropic_subgroups(&lambda, &l, DEFAULT_GUARD)
                .unwrap()
                .into_iter()
                .next()
                .unwrap();
            let n = 2 * delta.order() as usize;
            let t1 = construct_admissible_s_with_choices(&lambda, &l, &delta, n, false).unwrap();
            let t2 = construct_admissible_s_with_choices(&lambda, &l, &delta, n, true).unwrap();
            assert_eq!(theta_class(&t1).unwrap(), theta_class(&t2).unwrap());
        }
    }

    #[test]
    fn theta_classes_distinct_pairings_differ() {
        let lambda = make_group(&[2, 2]);
        let ps = enumerate_antisymmetric_pairings(&lambda, DEFAULT_GUARD).unwrap();
        let mut classes = Vec::new();
        for l in &ps {
            let delta = maximal_isotropic_subgroups(&lambda, l, DEFAULT_GUARD)
                .unwrap()
                .into_iter()
                .next()
                .unwrap();
            if 4 % delta.order() == 0 {
                let t = construct_admissible_s(&lambda, l, &delta, 4).unwrap();
                classes.push(theta_class(&t).unwrap());
            }
        }
        assert_eq!(classes.len(), 2);
        assert_ne!(classes[0], classes[1]);
    }

    #[test]
    fn normalize_swap_matrix() {
        // n = 2, Λ = ℤ/2, s(1̄) = antidiag: diagonalizes to two weights
        let lambda = make_group(&[2]);
        let mut raw = BTreeMap::new();
        raw.insert(lambda.identity(), CycMatrix::identity(2));
        raw.insert(
            lambda.elem(&[1]),
            CycMatrix::from_int_rows(&[&[0, 1], &[1, 0]]),
        );
        let (t, conj) = normalize_to_representative(&lambda, &raw, DEFAULT_GUARD).unwrap();
        assert!(check_representative_triple(&t).all_ok());
        assert_eq!(t.delta.order(), 2);
        assert_eq!(t.weights.blocks.len(), 2);
        let cinv = conj.inverse().unwrap();
        let lhs = cinv.mul(&raw[&lambda.elem(&[1])]).mul(&conj);
        assert!(lhs
            .mul(&t.s_of(&lambda.elem(&[1])).inverse().unwrap())
            .as_scalar()
            .is_some());
    }

    #[test]
    fn normalize_conjugated_cyclic_model() {
        let t = cyclic_triple(2, 2);
        let g = CycMatrix::from_rows(vec![
            vec![
                CycNum::one(),
                CycNum::i(),
                CycNum::zero(),
                CycNum::from_int(2),
            ],
            vec![
                CycNum::zero(),
                CycNum::one(),
                CycNum::i().neg(),
                CycNum::zero(),
            ],
            vec![
                CycNum::zero(),
                CycNum::from_int(3),
                CycNum::one(),
                CycNum::i(),
            ],
            vec![CycNum::one(), CycNum::zero(), CycNum::zero(), CycNum::one()],
        ]);
        assert!(g.inverse().is_ok());
        let mut raw = BTreeMap::new();
        for (e, m) in &t.s {
            raw.insert(e.clone(), g.mul(m).mul(&g.inverse().unwrap()));
        }
        let (t2, _conj) = normalize_to_representative(&t.lambda, &raw, DEFAULT_GUARD).unwrap();
        assert!(check_representative_triple(&t2).all_ok());
        assert_eq!(theta_class(&t2).unwrap(), theta_class(&t).unwrap());
    }

    #[test]
    fn monomial_conjugator_on_equal_classes() {
        let lambda = make_group(&[2, 2]);
        let l = Pairing::new(&lambda, vec![vec![0, 1], vec![1, 0]]).unwrap();
        let deltas = maximal_isotropic_subgroups(&lambda, &l, DEFAULT_GUARD).unwrap();
        let t1 = construct_admissible_s_with_choices(&lambda, &l, &deltas[0], 2, false).unwrap();
        let t2 = construct_admissible_s_with_choices(&lambda, &l, &deltas[0], 2, true).unwrap();
        assert_eq!(theta_class(&t1).unwrap(), theta_class(&t2).unwrap());
        let g = monomial_conjugator(&t1, &t2);
        assert!(g.is_some(), "equal classes must be monomially conjugate");
    }

    #[test]
    fn block_group_on_cyclic_model() {
        // one family per weight, τ a cyclic shift on labels, trivial cocycle
        let r = 3u64;
        let t = cyclic_triple(r, 2);
        let data = block_group_and_tau(&t).unwrap();
        assert_eq!(data.families.len() as u64, r);
        assert!(data.cocycle.verify().is_ok());
        assert!(data.cocycle.is_trivial_table());
        let gen_tau = &data.tau[1];
        let mut seen = vec![false; data.families.len()];
        let mut x = 0usize;
        for _ in 0..data.families.len() {
            assert!(!seen[x]);
            seen[x] = true;
            x = gen_tau[x];
        }
        assert!(seen.iter().all(|&b| b));
    }

    #[test]
    fn census_v4_matches_known_counts() {
        let lambda = make_group(&[2, 2]);
        // n ≡ 2 mod 4: only the nondegenerate pairing is admissible
        let rows = enumerate_components_gl(6, &lambda, DEFAULT_GUARD, false).unwrap();
        let adm: Vec<&GlCensusRow> = rows.iter().filter(|r| r.admissible).collect();
        assert_eq!(adm.len(), 1);
        assert_eq!(adm[0].delta_order, 2);
        assert_eq!(adm[0].pushforward_rank, Some(3));
        // n ≡ 0 mod 4: two admissible rows with ranks n/4 and n/2
        let rows = enumerate_components_gl(4, &lambda, DEFAULT_GUARD, false).unwrap();
        let adm: Vec<&GlCensusRow> = rows.iter().filter(|r| r.admissible).collect();
        assert_eq!(adm.len(), 2);
        let mut ranks: Vec<u64> = adm.iter().filter_map(|r| r.pushforward_rank).collect();
        ranks.sort_unstable();
        assert_eq!(ranks, vec![1, 2]);
        // r ∤ n: empty census for cyclic Λ
        let lambda = make_group(&[2]);
        let rows = enumerate_components_gl(3, &lambda, DEFAULT_GUARD, false).unwrap();
        assert!(rows.iter().all(|r| !r.admissible));
    }

    #[test]
    fn witness_roundtrip() {
        let lambda = make_group(&[2, 2]);
        let rows = enumerate_components_gl(4, &lambda, DEFAULT_GUARD, false).unwrap();
        for row in rows.iter().filter(|r| r.admissible) {
            let w = row.witness.as_ref().unwrap();
            let t = triple_from_wire(w).unwrap();
            assert!(check_representative_triple(&t).all_ok());
            assert!(is_admissible(&t).unwrap());
        }
    }
}
