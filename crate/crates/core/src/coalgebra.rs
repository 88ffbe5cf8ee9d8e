//! Coproduct, counit, iterated and truncated coproducts.
//!
//! A monomial is split by distributing its generators over ordered slots in
//! all possible ways. Repeated even generators are counted as distinguishable
//! factors, which yields multinomial coefficients. Odd generators carry the
//! sign of the permutation that un-shuffles them from canonical order into the
//! slot order.

use crate::algebra::{AlgebraElement, AlgebraError, LabelId, LabelRegistry, Monomial, TensorElement};
use crate::scalar::Scalar;

/// Lower bound on the degree of each tensor factor produced by a coproduct.
///
/// `Truncation(0)` is the full coproduct Δ; `Truncation(m)` drops every summand
/// in which one of the two factors has degree below `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Truncation(pub usize);

impl Truncation {
    pub const NONE: Truncation = Truncation(0);

    pub fn is_none(self) -> bool {
        self.0 == 0
    }
}

/// One summand of a split: slot monomials and the signed multiplicity.
pub(crate) type Split = (Vec<Monomial>, i64);

/// Distributes the generators of `mono` over `parts` ordered slots.
pub(crate) fn distribute(reg: &LabelRegistry, mono: &Monomial, parts: usize, min_degree: usize) -> Vec<Split> {
    let mut runs: Vec<(LabelId, usize)> = Vec::new();
    for &id in mono.ids() {
        match runs.last_mut() {
            Some((last, n)) if *last == id => *n += 1,
            _ => runs.push((id, 1)),
        }
    }
    let mut out = Vec::new();
    let mut state = DistState {
        reg,
        runs: &runs,
        slots: vec![Vec::new(); parts],
        odd_in_slot: vec![0; parts],
        min_degree,
        out: &mut out,
    };
    state.go(0, 1, 0);
    out
}

struct DistState<'a> {
    reg: &'a LabelRegistry,
    runs: &'a [(LabelId, usize)],
    slots: Vec<Vec<LabelId>>,
    odd_in_slot: Vec<usize>,
    min_degree: usize,
    out: &'a mut Vec<Split>,
}

impl DistState<'_> {
    fn go(&mut self, run: usize, coeff: i64, inversions: usize) {
        if run == self.runs.len() {
            if self.slots.iter().any(|s| s.len() < self.min_degree) {
                return;
            }
            let slots = self.slots.iter().map(|s| Monomial::from_sorted(s.clone())).collect();
            let sign = if inversions % 2 == 0 { 1 } else { -1 };
            self.out.push((slots, sign * coeff));
            return;
        }
        let (id, mult) = self.runs[run];
        if self.reg.is_odd(id) {
            debug_assert_eq!(mult, 1);
            for s in 0..self.slots.len() {
                // earlier odd generators that ended up to the right of slot s
                let crossed: usize = self.odd_in_slot[s + 1..].iter().sum();
                self.slots[s].push(id);
                self.odd_in_slot[s] += 1;
                self.go(run + 1, coeff, inversions + crossed);
                self.odd_in_slot[s] -= 1;
                self.slots[s].pop();
            }
        } else {
            self.compose(run, id, mult, 0, coeff, inversions);
        }
    }

    /// Places the remaining `left` copies of an even generator into slots `slot..`.
    fn compose(&mut self, run: usize, id: LabelId, left: usize, slot: usize, coeff: i64, inversions: usize) {
        if slot + 1 == self.slots.len() {
            let before = self.slots[slot].len();
            self.slots[slot].extend(std::iter::repeat(id).take(left));
            self.go(run + 1, coeff, inversions);
            self.slots[slot].truncate(before);
            return;
        }
        for take in 0..=left {
            let before = self.slots[slot].len();
            self.slots[slot].extend(std::iter::repeat(id).take(take));
            self.compose(run, id, left - take, slot + 1, coeff * binomial(left, take), inversions);
            self.slots[slot].truncate(before);
        }
    }
}

fn binomial(n: usize, k: usize) -> i64 {
    let k = k.min(n - k);
    let mut acc: i64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as i64 / (i + 1) as i64;
    }
    acc
}

fn split_element(a: &AlgebraElement, parts: usize, min_degree: usize) -> TensorElement {
    let reg = a.registry();
    let mut out = TensorElement::zero(reg.clone(), parts);
    for (mono, c) in a.terms() {
        for (slots, mult) in distribute(reg, mono, parts, min_degree) {
            out.add_term(slots, c * Scalar::from_integer(mult.into()));
        }
    }
    out
}

/// Δ: splits every product of generators into two ordered parts.
pub fn coproduct(a: &AlgebraElement) -> TensorElement {
    split_element(a, 2, 0)
}

/// Δ_{≥m}: the coproduct without summands having a factor of degree < m.
pub fn truncated_coproduct(a: &AlgebraElement, m: Truncation) -> TensorElement {
    split_element(a, 2, m.0)
}

/// ε: the coefficient of 𝟙.
pub fn counit(a: &AlgebraElement) -> Scalar {
    a.coefficient(&Monomial::unit())
}

/// Δ^k into `k + 1` ordered slots; Δ⁰ is the identity.
pub fn iterated_coproduct(a: &AlgebraElement, k: usize) -> TensorElement {
    split_element(a, k + 1, 0)
}

/// Applies the (possibly truncated) coproduct to slot `slot` (1-based) of
/// every term, producing a tensor of rank one higher.
pub fn coproduct_at(t: &TensorElement, slot: usize, trunc: Truncation) -> Result<TensorElement, AlgebraError> {
    let rank = t.rank();
    if slot == 0 || slot > rank {
        return Err(AlgebraError::SlotOutOfRange { slot, rank });
    }
    let reg = t.registry();
    let mut out = TensorElement::zero(reg.clone(), rank + 1);
    for (slots, c) in t.terms() {
        let i = slot - 1;
        for (pair, mult) in distribute(reg, &slots[i], 2, trunc.0) {
            let mut next = Vec::with_capacity(rank + 1);
            next.extend_from_slice(&slots[..i]);
            next.extend(pair);
            next.extend_from_slice(&slots[i + 1..]);
            out.add_term(next, c * Scalar::from_integer(mult.into()));
        }
    }
    Ok(out)
}

/// (ε ⊗ id) on a rank-2 tensor.
pub fn counit_left(t: &TensorElement) -> Result<AlgebraElement, AlgebraError> {
    counit_in_slot(t, 0)
}

/// (id ⊗ ε) on a rank-2 tensor.
pub fn counit_right(t: &TensorElement) -> Result<AlgebraElement, AlgebraError> {
    counit_in_slot(t, 1)
}

fn counit_in_slot(t: &TensorElement, slot: usize) -> Result<AlgebraElement, AlgebraError> {
    if t.rank() != 2 {
        return Err(AlgebraError::RankMismatch { left: t.rank(), right: 2 });
    }
    let mut out = AlgebraElement::zero(t.registry().clone());
    for (slots, c) in t.terms() {
        if slots[slot].is_unit() {
            out.add_term(slots[1 - slot].clone(), c.clone());
        }
    }
    Ok(out)
}

/// Term count of Δ^{parts-1} on a monomial with distinct generators, `parts^n`.
pub fn distinct_split_count(parts: usize, degree: usize) -> usize {
    parts.pow(degree as u32)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::algebra::Parity;
    use crate::scalar::int;

    fn g(i: u32) -> Monomial {
        Monomial::generator(LabelId(i))
    }

    fn pair(i: u32, j: u32) -> Monomial {
        Monomial::from_sorted(vec![LabelId(i), LabelId(j)])
    }

    fn bos(n: usize) -> Arc<LabelRegistry> {
        Arc::new(LabelRegistry::bosonic(n))
    }

    fn fermi() -> Arc<LabelRegistry> {
        Arc::new(LabelRegistry::from_labels([("f1", Parity::Odd), ("f2", Parity::Odd)]).unwrap())
    }

    #[test]
    fn coproduct_of_unit_and_generator() {
        let reg = bos(2);
        let u = Monomial::unit();
        let one = AlgebraElement::one(reg.clone());
        assert_eq!(coproduct(&one), TensorElement::unit(reg.clone(), 2));

        let x = AlgebraElement::generator(reg.clone(), LabelId(0)).unwrap();
        let mut expected = TensorElement::zero(reg.clone(), 2);
        expected.add_term(vec![g(0), u.clone()], int(1));
        expected.add_term(vec![u, g(0)], int(1));
        assert_eq!(coproduct(&x), expected);
    }

    #[test]
    fn coproduct_of_two_bosons() {
        let reg = bos(2);
        let u = Monomial::unit();
        let xy = AlgebraElement::from_monomial(reg.clone(), pair(0, 1), int(1));
        let mut expected = TensorElement::zero(reg.clone(), 2);
        expected.add_term(vec![pair(0, 1), u.clone()], int(1));
        expected.add_term(vec![g(0), g(1)], int(1));
        expected.add_term(vec![g(1), g(0)], int(1));
        expected.add_term(vec![u, pair(0, 1)], int(1));
        assert_eq!(coproduct(&xy), expected);
    }

    #[test]
    fn coproduct_of_two_fermions_has_minus_sign() {
        let reg = fermi();
        let u = Monomial::unit();
        let ff = AlgebraElement::from_monomial(reg.clone(), pair(0, 1), int(1));
        let d = coproduct(&ff);
        assert_eq!(d.coefficient(&[pair(0, 1), u.clone()]), int(1));
        assert_eq!(d.coefficient(&[u, pair(0, 1)]), int(1));
        assert_eq!(d.coefficient(&[g(0), g(1)]), int(1));
        assert_eq!(d.coefficient(&[g(1), g(0)]), int(-1));
        assert_eq!(d.len(), 4);
    }

    #[test]
    fn repeated_boson_gets_binomials() {
        let reg = bos(1);
        let x2 = Monomial::from_sorted(vec![LabelId(0); 2]);
        let d = coproduct(&AlgebraElement::from_monomial(reg, x2, int(1)));
        assert_eq!(d.coefficient(&[g(0), g(0)]), int(2));
        assert_eq!(d.len(), 3);
    }

    #[test]
    fn counit_reads_unit_coefficient() {
        let reg = bos(2);
        assert_eq!(counit(&AlgebraElement::one(reg.clone())), int(1));
        assert_eq!(counit(&AlgebraElement::generator(reg.clone(), LabelId(0)).unwrap()), int(0));
        let mut a = AlgebraElement::from_monomial(reg.clone(), Monomial::unit(), int(3));
        a.add_term(pair(0, 1), int(2));
        assert_eq!(counit(&a), int(3));
    }

    #[test]
    fn iterated_examples() {
        let reg = bos(2);
        let x = AlgebraElement::generator(reg.clone(), LabelId(0)).unwrap();
        assert_eq!(iterated_coproduct(&x, 0), TensorElement::from_element(&x));
        let xy = AlgebraElement::from_monomial(reg.clone(), pair(0, 1), int(1));
        assert_eq!(iterated_coproduct(&xy, 2).len(), 9);
        let one = AlgebraElement::one(reg.clone());
        assert_eq!(iterated_coproduct(&one, 3), TensorElement::unit(reg, 4));
    }

    #[test]
    fn truncated_examples() {
        let reg = bos(3);
        let one = AlgebraElement::one(reg.clone());
        assert!(truncated_coproduct(&one, Truncation(1)).is_zero());
        let x = AlgebraElement::generator(reg.clone(), LabelId(0)).unwrap();
        assert!(truncated_coproduct(&x, Truncation(1)).is_zero());
        let xy = AlgebraElement::from_monomial(reg.clone(), pair(0, 1), int(1));
        let mut expected = TensorElement::zero(reg.clone(), 2);
        expected.add_term(vec![g(0), g(1)], int(1));
        expected.add_term(vec![g(1), g(0)], int(1));
        assert_eq!(truncated_coproduct(&xy, Truncation(1)), expected);
        let xyz = Monomial::from_sorted(vec![LabelId(0), LabelId(1), LabelId(2)]);
        assert!(truncated_coproduct(&AlgebraElement::from_monomial(reg, xyz, int(1)), Truncation(2)).is_zero());
    }

    #[test]
    fn coproduct_at_examples() {
        let reg = bos(2);
        let u = Monomial::unit();
        let t = TensorElement::pure(reg.clone(), vec![g(0), u.clone()], int(1));
        let mut expected = TensorElement::zero(reg.clone(), 3);
        expected.add_term(vec![g(0), u.clone(), u.clone()], int(1));
        expected.add_term(vec![u.clone(), g(0), u.clone()], int(1));
        assert_eq!(coproduct_at(&t, 1, Truncation::NONE).unwrap(), expected);

        let t = TensorElement::pure(reg.clone(), vec![g(0), g(1)], int(1));
        let mut expected = TensorElement::zero(reg.clone(), 3);
        expected.add_term(vec![g(0), g(1), u.clone()], int(1));
        expected.add_term(vec![g(0), u.clone(), g(1)], int(1));
        assert_eq!(coproduct_at(&t, 2, Truncation::NONE).unwrap(), expected);

        let t = TensorElement::unit(reg.clone(), 2);
        assert_eq!(coproduct_at(&t, 1, Truncation::NONE).unwrap(), TensorElement::unit(reg.clone(), 3));

        assert_eq!(
            coproduct_at(&t, 3, Truncation::NONE),
            Err(AlgebraError::SlotOutOfRange { slot: 3, rank: 2 })
        );
        assert!(coproduct_at(&t, 0, Truncation::NONE).is_err());
    }

    #[test]
    fn counit_law_on_a_fermion_pair() {
        let reg = fermi();
        let ff = AlgebraElement::from_monomial(reg, pair(0, 1), int(1));
        let d = coproduct(&ff);
        assert_eq!(counit_left(&d).unwrap(), ff);
        assert_eq!(counit_right(&d).unwrap(), ff);
    }
}
