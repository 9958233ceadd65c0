//! Dense Gaussian elimination over F₂, used as an independent oracle for
//! persistent Betti numbers on small complexes.

use std::collections::HashMap;

use super::diagram::RankQuery;
use crate::error::{Error, Result};
use crate::filtration::{FilteredComplex, Simplex};

/// Largest complex accepted by [`persistent_betti_direct`].
pub const DIRECT_MAX_CELLS: usize = 5000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitVector {
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self { words: vec![0; len.div_ceil(64)] }
    }

    pub fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn xor_assign(&mut self, other: &BitVector) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    fn leading(&self) -> Option<usize> {
        self.words.iter().enumerate().rev().find(|(_, &w)| w != 0).map(|(k, w)| k * 64 + 63 - w.leading_zeros() as usize)
    }
}

/// Rank of a set of vectors over F₂.
pub fn rank(vectors: &[BitVector]) -> usize {
    let mut basis: HashMap<usize, BitVector> = HashMap::new();
    for v in vectors {
        let mut v = v.clone();
        while let Some(l) = v.leading() {
            match basis.get(&l) {
                Some(b) => v.xor_assign(b),
                None => {
                    basis.insert(l, v);
                    break;
                }
            }
        }
    }
    basis.len()
}

/// Basis of the kernel of the linear map sending unit vector `j` to `images[j]`.
pub fn kernel_basis(images: &[BitVector]) -> Vec<BitVector> {
    let n = images.len();
    let mut pivots: HashMap<usize, (BitVector, BitVector)> = HashMap::new();
    let mut kernel = Vec::new();
    for (j, img) in images.iter().enumerate() {
        let mut v = img.clone();
        let mut comb = BitVector::zeros(n);
        comb.set(j);
        loop {
            match v.leading() {
                None => {
                    kernel.push(comb);
                    break;
                }
                Some(l) => match pivots.get(&l) {
                    Some((pv, pc)) => {
                        v.xor_assign(pv);
                        comb.xor_assign(pc);
                    }
                    None => {
                        pivots.insert(l, (v, comb));
                        break;
                    }
                },
            }
        }
    }
    kernel
}

/// `β^{r,s}_q = dim Z_q(K_r) − dim(Z_q(K_r) ∩ B_q(K_s))`, computed as
/// `rank[Z_q(K_r) | B_q(K_s)] − rank B_q(K_s)` by dense elimination.
pub fn persistent_betti_direct(complex: &FilteredComplex, query: RankQuery) -> Result<usize> {
    if complex.len() > DIRECT_MAX_CELLS {
        return Err(Error::Size(format!("{} cells exceeds the direct-oracle limit {DIRECT_MAX_CELLS}", complex.len())));
    }
    query.validate(complex.q_max(), complex.r_max())?;
    let q = query.q;
    let cells = complex.cells();

    let faces: Vec<&Simplex> = cells.iter().filter(|c| c.simplex.dim() == q).map(|c| &c.simplex).collect();
    let face_idx: HashMap<&Simplex, usize> = faces.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let subfaces: Vec<&Simplex> = if q == 0 {
        Vec::new()
    } else {
        cells.iter().filter(|c| c.simplex.dim() == q - 1).map(|c| &c.simplex).collect()
    };
    let subface_idx: HashMap<&Simplex, usize> = subfaces.iter().enumerate().map(|(i, s)| (*s, i)).collect();

    // Z_q(K_r), as vectors over the q-simplices of the whole complex.
    let chains_r: Vec<&Simplex> = cells
        .iter()
        .filter(|c| c.simplex.dim() == q && c.time <= query.r)
        .map(|c| &c.simplex)
        .collect();
    let images: Vec<BitVector> = chains_r
        .iter()
        .map(|s| {
            let mut v = BitVector::zeros(subfaces.len());
            for f in s.facets() {
                v.set(subface_idx[&f]);
            }
            v
        })
        .collect();
    let cycles: Vec<BitVector> = kernel_basis(&images)
        .into_iter()
        .map(|comb| {
            let mut v = BitVector::zeros(faces.len());
            for (k, s) in chains_r.iter().enumerate() {
                if comb.get(k) {
                    v.set(face_idx[s]);
                }
            }
            v
        })
        .collect();

    // B_q(K_s).
    let boundaries: Vec<BitVector> = cells
        .iter()
        .filter(|c| c.simplex.dim() == q + 1 && c.time <= query.s)
        .map(|c| {
            let mut v = BitVector::zeros(faces.len());
            for f in c.simplex.facets() {
                v.set(face_idx[&f]);
            }
            v
        })
        .collect();

    let rank_b = rank(&boundaries);
    let mut both = cycles;
    both.extend(boundaries);
    Ok(rank(&both) - rank_b)
}
