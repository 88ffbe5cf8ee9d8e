use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::TreeError;
use crate::algebra::{LabelId, LabelRegistry, Monomial, TensorElement};
use crate::scalar::Scalar;

/// Which two-point function a propagator matrix holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropagatorRole {
    /// The Feynman propagator G_F.
    Feynman,
    /// The connected two-point function G_c⁽²⁾.
    Connected2,
}

/// Graded-symmetric invertible L×L matrix over the registry labels, with its inverse
/// computed once at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorMatrix {
    reg: Arc<LabelRegistry>,
    role: PropagatorRole,
    entries: Vec<Vec<Scalar>>,
    inverse: Vec<Vec<Scalar>>,
}

impl PropagatorMatrix {
    pub fn new(reg: Arc<LabelRegistry>, entries: Vec<Vec<Scalar>>, role: PropagatorRole) -> Result<Self, TreeError> {
        let n = reg.len();
        if entries.len() != n || entries.iter().any(|row| row.len() != n) {
            return Err(TreeError::PropagatorShape { labels: n });
        }
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (LabelId(i as u32), LabelId(j as u32));
                if !entries[i][j].is_zero() && reg.parity(a) != reg.parity(b) {
                    return Err(TreeError::MixedParityPropagator {
                        row: reg.name(a).to_string(),
                        col: reg.name(b).to_string(),
                    });
                }
            }
        }
        // graded symmetry: P(x,y) = (-1)^{|x||y|} P(y,x), so the fermion
        // block is antisymmetric
        for i in 0..n {
            for j in 0..=i {
                let (a, b) = (LabelId(i as u32), LabelId(j as u32));
                let mirrored = if reg.is_odd(a) && reg.is_odd(b) { -&entries[j][i] } else { entries[j][i].clone() };
                if entries[i][j] != mirrored {
                    return Err(TreeError::AsymmetricPropagator {
                        row: reg.name(a).to_string(),
                        col: reg.name(b).to_string(),
                    });
                }
            }
        }
        let inverse = invert(&entries).ok_or(TreeError::SingularPropagator)?;
        Ok(Self { reg, role, entries, inverse })
    }

    /// `c · 𝟙` on every label.
    pub fn diagonal(reg: Arc<LabelRegistry>, c: Scalar, role: PropagatorRole) -> Result<Self, TreeError> {
        let n = reg.len();
        let entries = (0..n)
            .map(|i| (0..n).map(|j| if i == j { c.clone() } else { Scalar::zero() }).collect())
            .collect();
        Self::new(reg, entries, role)
    }

    pub fn registry(&self) -> &Arc<LabelRegistry> {
        &self.reg
    }

    pub fn role(&self) -> PropagatorRole {
        self.role
    }

    pub fn entries(&self) -> &[Vec<Scalar>] {
        &self.entries
    }

    pub fn entry(&self, x: LabelId, y: LabelId) -> &Scalar {
        &self.entries[x.index()][y.index()]
    }

    pub fn inverse_entry(&self, x: LabelId, y: LabelId) -> &Scalar {
        &self.inverse[x.index()][y.index()]
    }

    /// Non-zero entries `(x, y, P⁻¹(x, y))` over all ordered label pairs.
    pub fn inverse_pairs(&self) -> impl Iterator<Item = (LabelId, LabelId, &Scalar)> {
        self.inverse.iter().enumerate().flat_map(|(i, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(move |(j, v)| (LabelId(i as u32), LabelId(j as u32), v))
        })
    }
}

/// Gauss–Jordan elimination over the rationals.
fn invert(m: &[Vec<Scalar>]) -> Option<Vec<Vec<Scalar>>> {
    let n = m.len();
    let mut a: Vec<Vec<Scalar>> = m.to_vec();
    let mut inv: Vec<Vec<Scalar>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Scalar::one() } else { Scalar::zero() }).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].clone();
        for j in 0..n {
            a[col][j] /= &p;
            inv[col][j] /= &p;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in 0..n {
                let da = &f * &a[col][j];
                a[r][j] -= da;
                let di = &f * &inv[col][j];
                inv[r][j] -= di;
            }
        }
    }
    Some(inv)
}

/// R = Σ_{x,y} P⁻¹(x, y) φ(x) ⊗ φ(y), summed over ordered pairs.
pub fn build_r(p: &PropagatorMatrix) -> TensorElement {
    r_between(p, 2, 1, 2)
}

/// R_{i,j}: the R element with its two generators in slots `i < j` (1-based)
/// of a rank-`rank` tensor, 𝟙 elsewhere.
pub fn r_between(p: &PropagatorMatrix, rank: usize, i: usize, j: usize) -> TensorElement {
    debug_assert!(1 <= i && i < j && j <= rank);
    let mut out = TensorElement::zero(p.reg.clone(), rank);
    for (x, y, v) in p.inverse_pairs() {
        let mut slots = vec![Monomial::unit(); rank];
        slots[i - 1] = Monomial::generator(x);
        slots[j - 1] = Monomial::generator(y);
        out.add_term(slots, v.clone());
    }
    out
}
