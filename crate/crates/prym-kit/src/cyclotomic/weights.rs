//! Weight decompositions of C^n under a diagonal action of a finite abelian
//! group, and the block structure of the matrices permuting the weight spaces.

use serde::{Deserialize, Serialize};

use crate::abelian::Character;

use super::matrix::CycMatrix;
use super::num::CycNum;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum WeightError {
    #[error("matrix does not permute the weight spaces (mixes blocks from index {0})")]
    NotPermutation(usize),
    #[error("block shifts disagree: block {0} shifts by a different character than block 0")]
    InconsistentShift(usize),
    #[error("matrix is singular or a block is not invertible")]
    SingularBlock,
    #[error("matrix size {got} does not match decomposition size {want}")]
    SizeMismatch { got: usize, want: usize },
}

/// One weight space: a character of Δ together with the set of standard basis
/// indices it occupies. For GL layouts the indices are contiguous; symplectic
/// layouts split a block across the two halves of the standard form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightBlock {
    pub character: Character,
    pub indices: Vec<usize>,
}

impl WeightBlock {
    pub fn dim(&self) -> usize {
        self.indices.len()
    }
}

/// Ordered decomposition C^n = ⊕ W_δ. Blocks are kept in the canonical order
/// of Δ* (lexicographic on exponent vectors), characters pairwise distinct.
///
/// `sign_convention` is `Some(q)` when the symplectic convention is in force:
/// the stored character value w(δ) ∈ {±1} corresponds to the actual eigenvalue
/// w(δ)·i whenever q(δ) = -1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightDecomposition {
    pub dim: usize,
    pub blocks: Vec<WeightBlock>,
    pub sign_convention: Option<Character>,
}

impl WeightDecomposition {
    pub fn new(
        dim: usize,
        blocks: Vec<WeightBlock>,
        sign_convention: Option<Character>,
    ) -> Self {
        let total: usize = blocks.iter().map(WeightBlock::dim).sum();
        assert_eq!(total, dim, "weight dimensions must sum to n");
        let mut chars: Vec<&Character> = blocks.iter().map(|b| &b.character).collect();
        chars.sort();
        chars.dedup();
        assert_eq!(chars.len(), blocks.len(), "characters must be distinct");
        assert!(
            blocks.windows(2).all(|w| w[0].character < w[1].character),
            "blocks must be in canonical character order"
        );
        WeightDecomposition {
            dim,
            blocks,
            sign_convention,
        }
    }

    pub fn block_of_character(&self, c: &Character) -> Option<&WeightBlock> {
        self.blocks.iter().find(|b| &b.character == c)
    }

    pub fn block_index_of_character(&self, c: &Character) -> Option<usize> {
        self.blocks.iter().position(|b| &b.character == c)
    }

    /// Which block a basis index belongs to.
    pub fn block_of_index(&self, idx: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.indices.contains(&idx))
    }

    pub fn characters(&self) -> Vec<Character> {
        self.blocks.iter().map(|b| b.character.clone()).collect()
    }

    pub fn dims_equal(&self) -> bool {
        self.blocks
            .windows(2)
            .all(|w| w[0].dim() == w[1].dim())
    }
}

/// Structure of a matrix that permutes the weight spaces by a fixed character:
/// M maps W_δ isomorphically onto W_{δ·p} for every block δ.
#[derive(Debug, Clone)]
pub struct PermMatrixStruct {
    /// The character p(M) of Δ: the common multiplicative shift of the blocks.
    pub p_image: Character,
    /// (source character, target character, block) for every weight space.
    pub block_maps: Vec<(Character, Character, CycMatrix)>,
}

impl PermMatrixStruct {
    /// Some(vec of scalars) when every block is a scalar multiple of the
    /// identity, in block order.
    pub fn scalar_blocks(&self) -> Option<Vec<CycNum>> {
        let mut out = Vec::new();
        for (_, _, m) in &self.block_maps {
            match m.as_scalar() {
                Some(c) => out.push(c),
                None => return None,
            }
        }
        Some(out)
    }

    pub fn block_for_source(&self, src: &Character) -> Option<&CycMatrix> {
        self.block_maps
            .iter()
            .find(|(s, _, _)| s == src)
            .map(|(_, _, m)| m)
    }
}

/// Multiply two characters inside the (abstract) dual group with the given
/// invariant factors.
fn char_mul(factors: &[u64], a: &Character, b: &Character) -> Character {
    Character {
        exponents: a
            .exponents
            .iter()
            .zip(&b.exponents)
            .zip(factors)
            .map(|((&x, &y), &d)| (x + y) % d)
            .collect(),
    }
}

fn char_diff(factors: &[u64], a: &Character, b: &Character) -> Character {
    // a · b^{-1}
    Character {
        exponents: a
            .exponents
            .iter()
            .zip(&b.exponents)
            .zip(factors)
            .map(|((&x, &y), &d)| (x + d - y % d) % d)
            .collect(),
    }
}

/// Decide whether M maps each weight space W_δ isomorphically onto W_{δ·p}
/// for one single character p, and return the block data if so.
///
/// `delta_factors` are the invariant factors of the (abstract) group Δ whose
/// characters label the blocks.
pub fn analyze_permutation_matrix(
    m: &CycMatrix,
    w: &WeightDecomposition,
    delta_factors: &[u64],
) -> Result<PermMatrixStruct, WeightError> {
    if m.n_rows() != w.dim || m.n_cols() != w.dim {
        return Err(WeightError::SizeMismatch {
            got: m.n_rows(),
            want: w.dim,
        });
    }
    let mut shift: Option<Character> = None;
    let mut block_maps = Vec::new();
    for (bi, block) in w.blocks.iter().enumerate() {
        // image of W_δ: the nonzero rows of the columns in this block
        let mut target_block: Option<usize> = None;
        for &col in &block.indices {
            for row in 0..w.dim {
                if m.at(row, col).is_zero() {
                    continue;
                }
                let tb = w
                    .block_of_index(row)
                    .expect("every index belongs to a block");
                match target_block {
                    None => target_block = Some(tb),
                    Some(prev) if prev == tb => {}
                    Some(_) => return Err(WeightError::NotPermutation(col)),
                }
            }
        }
        let tb = match target_block {
            Some(t) => t,
            None => return Err(WeightError::SingularBlock), // zero columns
        };
        let target = &w.blocks[tb];
        if target.dim() != block.dim() {
            return Err(WeightError::NotPermutation(block.indices[0]));
        }
        let sub = m.submatrix(&target.indices, &block.indices);
        if sub.inverse().is_err() {
            return Err(WeightError::SingularBlock);
        }
        let this_shift = char_diff(delta_factors, &target.character, &block.character);
        match &shift {
            None => shift = Some(this_shift),
            Some(p) if *p == this_shift => {}
            Some(_) => return Err(WeightError::InconsistentShift(bi)),
        }
        block_maps.push((block.character.clone(), target.character.clone(), sub));
    }
    Ok(PermMatrixStruct {
        p_image: shift.expect("at least one block"),
        block_maps,
    })
}

/// Compose shifts: p(M·M') = p(M)·p(M') for permutation matrices.
pub fn compose_shifts(delta_factors: &[u64], a: &Character, b: &Character) -> Character {
    char_mul(delta_factors, a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::Character;

    fn z2_weights() -> WeightDecomposition {
        WeightDecomposition::new(
            2,
            vec![
                WeightBlock {
                    character: Character {
                        exponents: vec![0],
                    },
                    indices: vec![0],
                },
                WeightBlock {
                    character: Character {
                        exponents: vec![1],
                    },
                    indices: vec![1],
                },
            ],
            None,
        )
    }

    #[test]
    fn identity_is_trivial_shift() {
        let w = z2_weights();
        let s = analyze_permutation_matrix(&CycMatrix::identity(2), &w, &[2]).unwrap();
        assert_eq!(s.p_image.exponents, vec![0]);
        assert!(s.scalar_blocks().is_some());
    }

    #[test]
    fn diag_is_delta_matrix() {
        let w = z2_weights();
        let d = CycMatrix::diagonal(&[CycNum::one(), CycNum::from_int(-1)]);
        let s = analyze_permutation_matrix(&d, &w, &[2]).unwrap();
        assert_eq!(s.p_image.exponents, vec![0]);
        let scalars = s.scalar_blocks().unwrap();
        assert_eq!(scalars, vec![CycNum::one(), CycNum::from_int(-1)]);
    }

    #[test]
    fn swap_shifts_by_generator() {
        let w = z2_weights();
        let s = analyze_permutation_matrix(&CycMatrix::from_int_rows(&[&[0, 1], &[1, 0]]), &w, &[2])
            .unwrap();
        assert_eq!(s.p_image.exponents, vec![1]);
    }

    #[test]
    fn mixing_is_rejected() {
        let w = z2_weights();
        let m = CycMatrix::from_int_rows(&[&[1, 1], &[1, -1]]);
        assert!(matches!(
            analyze_permutation_matrix(&m, &w, &[2]),
            Err(WeightError::NotPermutation(_))
        ));
    }
}
