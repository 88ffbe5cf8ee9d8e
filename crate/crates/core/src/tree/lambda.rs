//! The Q operator and the Λ recursion on algebra elements.

use std::collections::HashMap;

use num_traits::One;

use super::propagator::{r_between, PropagatorMatrix};
use super::TreeError;
use crate::algebra::{AlgebraElement, Monomial, TensorElement};
use crate::coalgebra::{coproduct, coproduct_at, Truncation};
use crate::scalar::Scalar;

fn half() -> Scalar {
    Scalar::new(1.into(), 2.into())
}

/// Q_i = ½ R_{i,i+1} · Δ_i: splits slot `slot` (1-based) and joins the two
/// halves with an R insertion.
pub fn apply_q(t: &TensorElement, slot: usize, p: &PropagatorMatrix, trunc: Truncation) -> Result<TensorElement, TreeError> {
    let split = coproduct_at(t, slot, trunc)?;
    let r = r_between(p, t.rank() + 1, slot, slot + 1);
    Ok(r.multiply(&split)?.scale(&half()))
}

/// One step of the recursion: Λ^k = (1/k) Σ_i Q_i ∘ Λ^{k-1}, where `prev`
/// has rank k.
pub fn lambda_step(prev: &TensorElement, p: &PropagatorMatrix, trunc: Truncation) -> Result<TensorElement, TreeError> {
    let k = prev.rank();
    let mut next = TensorElement::zero(prev.registry().clone(), k + 1);
    for slot in 1..=k {
        next.add_assign_unchecked(&apply_q(prev, slot, p, trunc)?);
    }
    Ok(next.scale(&Scalar::new(1.into(), (k as i64).into())))
}

/// Λ^k(a) as a rank-(k+1) tensor; Λ⁰ is the identity.
pub fn lambda(a: &AlgebraElement, k: usize, p: &PropagatorMatrix, trunc: Truncation) -> Result<TensorElement, TreeError> {
    if a.registry() != p.registry() {
        return Err(crate::algebra::AlgebraError::RegistryMismatch.into());
    }
    let mut t = TensorElement::from_element(a);
    for _ in 0..k {
        t = lambda_step(&t, p, trunc)?;
    }
    Ok(t)
}

/// Λ^{k-1}(a) computed through the pair recursion
/// Λ^{k-1} = 1/(2(k-1)) Σ_i (Σ_{a≤i<b} R_{a,b}) · (Λ^{i-1} ⊗ Λ^{k-i-1}) ∘ Δ,
/// which glues two smaller trees with one edge. Untruncated only.
pub fn pairgraph_lambda(a: &AlgebraElement, k: usize, p: &PropagatorMatrix) -> Result<TensorElement, TreeError> {
    if k < 2 {
        return Err(TreeError::InvalidOrder { k, min: 2 });
    }
    if a.registry() != p.registry() {
        return Err(crate::algebra::AlgebraError::RegistryMismatch.into());
    }
    let mut memo = PairMemo { p, cache: HashMap::new(), bridges: HashMap::new() };
    let mut out = TensorElement::zero(a.registry().clone(), k);
    for (m, c) in a.terms() {
        let t = memo.vertices(m, k)?;
        out.add_scaled_unchecked(t, c);
    }
    Ok(out)
}

struct PairMemo<'a> {
    p: &'a PropagatorMatrix,
    cache: HashMap<(Monomial, usize), TensorElement>,
    bridges: HashMap<(usize, usize), TensorElement>,
}

impl PairMemo<'_> {
    /// Λ^{k-1}(m) as a rank-k tensor.
    fn vertices(&mut self, m: &Monomial, k: usize) -> Result<TensorElement, TreeError> {
        let reg = self.p.registry().clone();
        if k == 1 {
            return Ok(TensorElement::pure(reg, vec![m.clone()], Scalar::one()));
        }
        if let Some(t) = self.cache.get(&(m.clone(), k)) {
            return Ok(t.clone());
        }
        let split = coproduct(&AlgebraElement::from_monomial(reg.clone(), m.clone(), Scalar::one()));
        let mut total = TensorElement::zero(reg.clone(), k);
        for i in 1..k {
            let mut glued = TensorElement::zero(reg.clone(), k);
            for (pair, c) in split.terms() {
                let left = self.vertices(&pair[0], i)?;
                if left.is_zero() {
                    continue;
                }
                let right = self.vertices(&pair[1], k - i)?;
                glued.add_scaled_unchecked(left.concat(&right)?, c);
            }
            let bridge = self.bridge(k, i);
            total.add_assign_unchecked(&bridge.multiply(&glued)?);
        }
        let out = total.scale(&Scalar::new(1.into(), (2 * (k as i64 - 1)).into()));
        self.cache.insert((m.clone(), k), out.clone());
        Ok(out)
    }

    /// Σ_{a ≤ i < b ≤ k} R_{a,b}.
    fn bridge(&mut self, k: usize, i: usize) -> TensorElement {
        let p = self.p;
        self.bridges
            .entry((k, i))
            .or_insert_with(|| {
                let mut s = TensorElement::zero(p.registry().clone(), k);
                for a in 1..=i {
                    for b in i + 1..=k {
                        s.add_assign_unchecked(&r_between(p, k, a, b));
                    }
                }
                s
            })
            .clone()
    }
}
