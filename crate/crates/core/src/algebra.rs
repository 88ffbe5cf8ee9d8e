//! The graded symmetric algebra over a finite set of field generators.
//!
//! Generators are registered in a [`LabelRegistry`] together with their
//! parity. Monomials are stored as sorted multisets of label ids; odd
//! generators square to zero and pick up a sign whenever two of them are
//! exchanged.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("unknown generator id {0}")]
    UnknownLabel(u32),
    #[error("unknown generator name `{0}`")]
    UnknownName(String),
    #[error("duplicate generator name `{0}`")]
    DuplicateName(String),
    #[error("operands live over different label registries")]
    RegistryMismatch,
    #[error("tensor rank mismatch: {left} vs {right}")]
    RankMismatch { left: usize, right: usize },
    #[error("slot {slot} out of range for rank {rank}")]
    SlotOutOfRange { slot: usize, rank: usize },
}

/// ℤ₂ grading of a generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    #[serde(alias = "boson", alias = "bosonic")]
    Even,
    #[serde(alias = "fermion", alias = "fermionic")]
    Odd,
}

impl Parity {
    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }
}

/// Index of a generator inside its registry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabelId(pub u32);

impl LabelId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Ordered list of named generators; ids are assigned in registration order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelRegistry {
    names: Vec<String>,
    parities: Vec<Parity>,
    index: HashMap<String, LabelId>,
}

impl LabelRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a registry from `(name, parity)` pairs.
    pub fn from_labels<S: Into<String>>(
        labels: impl IntoIterator<Item = (S, Parity)>,
    ) -> Result<Self, AlgebraError> {
        let mut reg = Self::new();
        for (name, parity) in labels {
            reg.register(name, parity)?;
        }
        Ok(reg)
    }

    /// A registry of `n` even generators named `x1..xn`.
    pub fn bosonic(n: usize) -> Self {
        Self::from_labels((1..=n).map(|i| (format!("x{i}"), Parity::Even)))
            .expect("generated names are distinct")
    }

    pub fn register(&mut self, name: impl Into<String>, parity: Parity) -> Result<LabelId, AlgebraError> {
        let name = name.into();
        if self.index.contains_key(&name) {
            return Err(AlgebraError::DuplicateName(name));
        }
        let id = LabelId(self.names.len() as u32);
        self.index.insert(name.clone(), id);
        self.names.push(name);
        self.parities.push(parity);
        Ok(id)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = LabelId> {
        (0..self.names.len() as u32).map(LabelId)
    }

    pub fn check(&self, id: LabelId) -> Result<(), AlgebraError> {
        if id.index() < self.names.len() {
            Ok(())
        } else {
            Err(AlgebraError::UnknownLabel(id.0))
        }
    }

    pub fn lookup(&self, name: &str) -> Result<LabelId, AlgebraError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| AlgebraError::UnknownName(name.to_string()))
    }

    pub fn name(&self, id: LabelId) -> &str {
        &self.names[id.index()]
    }

    pub fn parity(&self, id: LabelId) -> Parity {
        self.parities[id.index()]
    }

    pub fn is_odd(&self, id: LabelId) -> bool {
        self.parities[id.index()].is_odd()
    }

    pub fn has_odd(&self) -> bool {
        self.parities.iter().any(|p| p.is_odd())
    }

    /// All canonical non-zero monomials of exactly `degree`, in ascending order.
    pub fn monomials_of_degree(&self, degree: usize) -> Vec<Monomial> {
        let mut out = Vec::new();
        let mut current = Vec::with_capacity(degree);
        self.fill_monomials(0, degree, &mut current, &mut out);
        out
    }

    /// All canonical non-zero monomials with degree at most `max_degree`.
    pub fn monomials_up_to(&self, max_degree: usize) -> Vec<Monomial> {
        (0..=max_degree).flat_map(|d| self.monomials_of_degree(d)).collect()
    }

    fn fill_monomials(&self, start: usize, remaining: usize, current: &mut Vec<LabelId>, out: &mut Vec<Monomial>) {
        if remaining == 0 {
            out.push(Monomial(current.clone()));
            return;
        }
        for idx in start..self.len() {
            let id = LabelId(idx as u32);
            // an odd generator may appear at most once
            let next = if self.is_odd(id) { idx + 1 } else { idx };
            current.push(id);
            self.fill_monomials(next, remaining - 1, current, out);
            current.pop();
        }
    }
}

/// Sign of a graded reordering.
pub type Sign = i8;

/// Canonical product of generators: label ids in non-decreasing order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial(Vec<LabelId>);

impl Monomial {
    pub fn unit() -> Self {
        Monomial(Vec::new())
    }

    pub fn generator(id: LabelId) -> Self {
        Monomial(vec![id])
    }

    /// Wraps ids that are already sorted and free of repeated odd generators.
    pub(crate) fn from_sorted(ids: Vec<LabelId>) -> Self {
        debug_assert!(ids.windows(2).all(|w| w[0] <= w[1]));
        Monomial(ids)
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn is_unit(&self) -> bool {
        self.0.is_empty()
    }

    pub fn ids(&self) -> &[LabelId] {
        &self.0
    }

    /// Total parity: `true` when the monomial contains an odd number of odd generators.
    pub fn is_odd(&self, reg: &LabelRegistry) -> bool {
        self.0.iter().filter(|&&id| reg.is_odd(id)).count() % 2 == 1
    }

    pub fn display<'a>(&'a self, reg: &'a LabelRegistry) -> MonomialDisplay<'a> {
        MonomialDisplay { mono: self, reg }
    }
}

pub struct MonomialDisplay<'a> {
    mono: &'a Monomial,
    reg: &'a LabelRegistry,
}

impl fmt::Display for MonomialDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.mono.is_unit() {
            return f.write_str("1");
        }
        for (i, id) in self.mono.ids().iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            f.write_str(self.reg.name(*id))?;
        }
        Ok(())
    }
}

/// Sorts a sequence of generators into canonical order.
///
/// Returns the canonical monomial and the Koszul sign picked up by the sort,
/// or sign `0` when an odd generator repeats (the product vanishes).
pub fn make_monomial(reg: &LabelRegistry, labels: &[LabelId]) -> Result<(Monomial, Sign), AlgebraError> {
    for &id in labels {
        reg.check(id)?;
    }
    let mut inversions = 0usize;
    for (i, &a) in labels.iter().enumerate() {
        if !reg.is_odd(a) {
            continue;
        }
        for &b in &labels[i + 1..] {
            if reg.is_odd(b) {
                if a == b {
                    return Ok((Monomial::unit(), 0));
                }
                if a > b {
                    inversions += 1;
                }
            }
        }
    }
    let mut ids = labels.to_vec();
    ids.sort_unstable();
    Ok((Monomial(ids), if inversions % 2 == 0 { 1 } else { -1 }))
}

/// Graded product of two canonical monomials.
pub(crate) fn multiply_monomials(reg: &LabelRegistry, a: &Monomial, b: &Monomial) -> (Monomial, Sign) {
    let odd_a: Vec<LabelId> = a.0.iter().copied().filter(|&id| reg.is_odd(id)).collect();
    let mut inversions = 0usize;
    for &id in &b.0 {
        if !reg.is_odd(id) {
            continue;
        }
        let pos = odd_a.partition_point(|&x| x <= id);
        if pos > 0 && odd_a[pos - 1] == id {
            return (Monomial::unit(), 0);
        }
        inversions += odd_a.len() - pos;
    }
    let mut ids = Vec::with_capacity(a.0.len() + b.0.len());
    let (mut i, mut j) = (0, 0);
    while i < a.0.len() && j < b.0.len() {
        if a.0[i] <= b.0[j] {
            ids.push(a.0[i]);
            i += 1;
        } else {
            ids.push(b.0[j]);
            j += 1;
        }
    }
    ids.extend_from_slice(&a.0[i..]);
    ids.extend_from_slice(&b.0[j..]);
    (Monomial(ids), if inversions % 2 == 0 { 1 } else { -1 })
}

pub(crate) fn signed(sign: Sign, value: Scalar) -> Scalar {
    if sign < 0 {
        -value
    } else {
        value
    }
}

fn accumulate<K: Ord>(terms: &mut BTreeMap<K, Scalar>, key: K, coeff: Scalar) {
    if coeff.is_zero() {
        return;
    }
    use std::collections::btree_map::Entry;
    match terms.entry(key) {
        Entry::Vacant(v) => {
            v.insert(coeff);
        }
        Entry::Occupied(mut o) => {
            *o.get_mut() += coeff;
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}

fn same_registry(a: &Arc<LabelRegistry>, b: &Arc<LabelRegistry>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// Finite linear combination of canonical monomials.
#[derive(Debug, Clone)]
pub struct AlgebraElement {
    reg: Arc<LabelRegistry>,
    terms: BTreeMap<Monomial, Scalar>,
}

impl PartialEq for AlgebraElement {
    fn eq(&self, other: &Self) -> bool {
        same_registry(&self.reg, &other.reg) && self.terms == other.terms
    }
}

impl Eq for AlgebraElement {}

impl AlgebraElement {
    pub fn zero(reg: Arc<LabelRegistry>) -> Self {
        Self { reg, terms: BTreeMap::new() }
    }

    pub fn one(reg: Arc<LabelRegistry>) -> Self {
        Self::from_monomial(reg, Monomial::unit(), Scalar::one())
    }

    pub fn generator(reg: Arc<LabelRegistry>, id: LabelId) -> Result<Self, AlgebraError> {
        reg.check(id)?;
        Ok(Self::from_monomial(reg, Monomial::generator(id), Scalar::one()))
    }

    pub fn from_monomial(reg: Arc<LabelRegistry>, mono: Monomial, coeff: Scalar) -> Self {
        let mut out = Self::zero(reg);
        out.add_term(mono, coeff);
        out
    }

    /// The ordered product `φ(l₁)⋯φ(lₙ)`, canonicalized with its Koszul sign.
    pub fn product_of(reg: Arc<LabelRegistry>, labels: &[LabelId]) -> Result<Self, AlgebraError> {
        let (mono, sign) = make_monomial(&reg, labels)?;
        let mut out = Self::zero(reg);
        if sign != 0 {
            out.add_term(mono, signed(sign, Scalar::one()));
        }
        Ok(out)
    }

    pub fn registry(&self) -> &Arc<LabelRegistry> {
        &self.reg
    }

    pub fn add_term(&mut self, mono: Monomial, coeff: Scalar) {
        accumulate(&mut self.terms, mono, coeff);
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, mono: &Monomial) -> Scalar {
        self.terms.get(mono).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn max_degree(&self) -> usize {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Result<Self, AlgebraError> {
        if !same_registry(&self.reg, &other.reg) {
            return Err(AlgebraError::RegistryMismatch);
        }
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, factor: &Scalar) -> Self {
        let mut out = Self::zero(self.reg.clone());
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * factor);
        }
        out
    }

    /// Graded commutative product.
    pub fn multiply(&self, other: &Self) -> Result<Self, AlgebraError> {
        if !same_registry(&self.reg, &other.reg) {
            return Err(AlgebraError::RegistryMismatch);
        }
        let mut out = Self::zero(self.reg.clone());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let (m, sign) = multiply_monomials(&self.reg, ma, mb);
                if sign != 0 {
                    out.add_term(m, signed(sign, ca * cb));
                }
            }
        }
        Ok(out)
    }

    /// `Some(parity)` if every term has the same total parity.
    pub fn homogeneous_parity(&self) -> Option<bool> {
        let mut it = self.terms.keys().map(|m| m.is_odd(&self.reg));
        let first = it.next().unwrap_or(false);
        it.all(|p| p == first).then_some(first)
    }
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({c}) {}", m.display(&self.reg))?;
        }
        Ok(())
    }
}

/// Finite linear combination of `rank`-fold tensors of canonical monomials.
#[derive(Debug, Clone)]
pub struct TensorElement {
    reg: Arc<LabelRegistry>,
    rank: usize,
    terms: BTreeMap<Vec<Monomial>, Scalar>,
}

impl PartialEq for TensorElement {
    fn eq(&self, other: &Self) -> bool {
        same_registry(&self.reg, &other.reg) && self.rank == other.rank && self.terms == other.terms
    }
}

impl Eq for TensorElement {}

impl TensorElement {
    pub fn zero(reg: Arc<LabelRegistry>, rank: usize) -> Self {
        assert!(rank >= 1, "tensor rank must be positive");
        Self { reg, rank, terms: BTreeMap::new() }
    }

    /// `𝟙⊗⋯⊗𝟙` with `rank` factors.
    pub fn unit(reg: Arc<LabelRegistry>, rank: usize) -> Self {
        Self::pure(reg, vec![Monomial::unit(); rank], Scalar::one())
    }

    pub fn pure(reg: Arc<LabelRegistry>, slots: Vec<Monomial>, coeff: Scalar) -> Self {
        let mut out = Self::zero(reg, slots.len());
        out.add_term(slots, coeff);
        out
    }

    /// Embeds an algebra element as a rank-1 tensor.
    pub fn from_element(a: &AlgebraElement) -> Self {
        let mut out = Self::zero(a.reg.clone(), 1);
        for (m, c) in a.terms() {
            out.add_term(vec![m.clone()], c.clone());
        }
        out
    }

    /// Reads a rank-1 tensor back as an algebra element.
    pub fn to_element(&self) -> Result<AlgebraElement, AlgebraError> {
        if self.rank != 1 {
            return Err(AlgebraError::RankMismatch { left: self.rank, right: 1 });
        }
        let mut out = AlgebraElement::zero(self.reg.clone());
        for (slots, c) in &self.terms {
            out.add_term(slots[0].clone(), c.clone());
        }
        Ok(out)
    }

    pub fn registry(&self) -> &Arc<LabelRegistry> {
        &self.reg
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn add_term(&mut self, slots: Vec<Monomial>, coeff: Scalar) {
        assert_eq!(slots.len(), self.rank, "tensor term has wrong rank");
        accumulate(&mut self.terms, slots, coeff);
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<Monomial>, &Scalar)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, slots: &[Monomial]) -> Scalar {
        self.terms.get(slots).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn check_compatible(&self, other: &Self) -> Result<(), AlgebraError> {
        if !same_registry(&self.reg, &other.reg) {
            return Err(AlgebraError::RegistryMismatch);
        }
        if self.rank != other.rank {
            return Err(AlgebraError::RankMismatch { left: self.rank, right: other.rank });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        out.add_assign_unchecked(other);
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.add(&other.scale(&-Scalar::one()))
    }

    pub(crate) fn add_assign_unchecked(&mut self, other: &Self) {
        for (k, c) in &other.terms {
            accumulate(&mut self.terms, k.clone(), c.clone());
        }
    }

    pub(crate) fn add_scaled_unchecked(&mut self, other: Self, factor: &Scalar) {
        for (k, c) in other.terms {
            accumulate(&mut self.terms, k, c * factor);
        }
    }

    pub fn scale(&self, factor: &Scalar) -> Self {
        let mut out = Self::zero(self.reg.clone(), self.rank);
        if factor.is_zero() {
            return out;
        }
        for (k, c) in &self.terms {
            out.terms.insert(k.clone(), c * factor);
        }
        out
    }

    /// Slotwise graded product.
    ///
    /// Moving a factor of `other` from slot `i` past a factor of `self` in a
    /// later slot `j > i` costs `(-1)^{|a_j||b_i|}`.
    pub fn multiply(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_compatible(other)?;
        let mut out = Self::zero(self.reg.clone(), self.rank);
        for (ka, ca) in &self.terms {
            let pa: Vec<bool> = ka.iter().map(|m| m.is_odd(&self.reg)).collect();
            for (kb, cb) in &other.terms {
                if let Some((slots, sign)) = multiply_pure(&self.reg, ka, &pa, kb) {
                    accumulate(&mut out.terms, slots, signed(sign, ca * cb));
                }
            }
        }
        Ok(out)
    }

    /// Concatenation `self ⊗ other` (rank adds up). No signs arise: the
    /// factors of `self` stay to the left.
    pub fn concat(&self, other: &Self) -> Result<Self, AlgebraError> {
        if !same_registry(&self.reg, &other.reg) {
            return Err(AlgebraError::RegistryMismatch);
        }
        let mut out = Self::zero(self.reg.clone(), self.rank + other.rank);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let mut slots = ka.clone();
                slots.extend(kb.iter().cloned());
                accumulate(&mut out.terms, slots, ca * cb);
            }
        }
        Ok(out)
    }
}

/// Product of two pure tensors; `parity_a` caches the slot parities of `a`.
pub(crate) fn multiply_pure(
    reg: &LabelRegistry,
    a: &[Monomial],
    parity_a: &[bool],
    b: &[Monomial],
) -> Option<(Vec<Monomial>, Sign)> {
    let mut sign: Sign = 1;
    let mut b_prefix_odd = false;
    let mut slots = Vec::with_capacity(a.len());
    for (j, (ma, mb)) in a.iter().zip(b).enumerate() {
        if parity_a[j] && b_prefix_odd {
            sign = -sign;
        }
        let (m, s) = multiply_monomials(reg, ma, mb);
        if s == 0 {
            return None;
        }
        sign *= s;
        slots.push(m);
        if mb.is_odd(reg) {
            b_prefix_odd = !b_prefix_odd;
        }
    }
    Some((slots, sign))
}

impl fmt::Display for TensorElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (k, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({c}) ")?;
            for (s, m) in k.iter().enumerate() {
                if s > 0 {
                    f.write_str(" ⊗ ")?;
                }
                write!(f, "{}", m.display(&self.reg))?;
            }
        }
        Ok(())
    }
}
