//! Linear forms on the symmetric algebra and their convolution calculus.
//!
//! A [`Functional`] is stored as a value on 𝟙 plus a sparse table of values on
//! canonical monomials. Convolution, exponential and logarithm materialize
//! their results as tables up to an explicit degree bound.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::algebra::{AlgebraElement, AlgebraError, LabelRegistry, Monomial, TensorElement};
use crate::coalgebra::distribute;
use crate::scalar::{factorial, format_scalar, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FunctionalError {
    #[error("argument has degree {degree} but kernel data only reaches degree {cap}")]
    DegreeAboveCap { degree: usize, cap: usize },
    #[error("exponential needs a functional vanishing on 1, found value {0}")]
    NonZeroUnit(String),
    #[error("logarithm needs a functional equal to 1 on 1, found value {0}")]
    UnitNotOne(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// A linear map S(V) → ℚ.
#[derive(Debug, Clone)]
pub struct Functional {
    reg: Arc<LabelRegistry>,
    unit_value: Scalar,
    kernels: BTreeMap<Monomial, Scalar>,
    max_degree: Option<usize>,
}

impl PartialEq for Functional {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.reg, &other.reg) || self.reg == other.reg)
            && self.unit_value == other.unit_value
            && self.kernels == other.kernels
            && self.max_degree == other.max_degree
    }
}

impl Functional {
    /// The zero functional.
    pub fn zero(reg: Arc<LabelRegistry>) -> Self {
        Self { reg, unit_value: Scalar::zero(), kernels: BTreeMap::new(), max_degree: None }
    }

    /// ε, the counit: 1 on 𝟙 and 0 elsewhere.
    pub fn counit(reg: Arc<LabelRegistry>) -> Self {
        let mut f = Self::zero(reg);
        f.unit_value = Scalar::one();
        f
    }

    pub fn with_unit_value(mut self, value: Scalar) -> Self {
        self.unit_value = value;
        self
    }

    /// Caps the degrees on which this functional is defined.
    pub fn with_max_degree(mut self, cap: usize) -> Self {
        self.max_degree = Some(cap);
        self.kernels.retain(|m, _| m.degree() <= cap);
        self
    }

    /// Sets the value on a canonical monomial of positive degree.
    pub fn set(&mut self, mono: Monomial, value: Scalar) {
        if mono.is_unit() {
            self.unit_value = value;
        } else if value.is_zero() {
            self.kernels.remove(&mono);
        } else {
            self.kernels.insert(mono, value);
        }
    }

    /// Sets the value on the ordered product of `labels`, applying the sign
    /// that canonicalization picks up. Products that vanish must get value 0.
    pub fn set_product(&mut self, labels: &[crate::algebra::LabelId], value: Scalar) -> Result<bool, AlgebraError> {
        let (mono, sign) = crate::algebra::make_monomial(&self.reg, labels)?;
        if sign == 0 {
            return Ok(value.is_zero());
        }
        self.set(mono, crate::algebra::signed(sign, value));
        Ok(true)
    }

    pub fn registry(&self) -> &Arc<LabelRegistry> {
        &self.reg
    }

    pub fn unit_value(&self) -> &Scalar {
        &self.unit_value
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.max_degree
    }

    /// Stored non-zero values on positive-degree monomials.
    pub fn kernels(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.kernels.iter()
    }

    /// True when all values on single generators are zero.
    pub fn vanishes_on_one_point(&self) -> bool {
        self.kernels.keys().all(|m| m.degree() != 1)
    }

    /// True when all values on degree-2 monomials are zero.
    pub fn vanishes_on_two_point(&self) -> bool {
        self.kernels.keys().all(|m| m.degree() != 2)
    }

    /// True when the functional is zero on every odd element.
    pub fn is_even(&self) -> bool {
        self.kernels.keys().all(|m| !m.is_odd(&self.reg))
    }

    pub fn evaluate_monomial(&self, mono: &Monomial) -> Result<Scalar, FunctionalError> {
        if mono.is_unit() {
            return Ok(self.unit_value.clone());
        }
        if let Some(cap) = self.max_degree {
            if mono.degree() > cap {
                return Err(FunctionalError::DegreeAboveCap { degree: mono.degree(), cap });
            }
        }
        Ok(self.kernels.get(mono).cloned().unwrap_or_else(Scalar::zero))
    }

    fn check_registry(&self, reg: &Arc<LabelRegistry>) -> Result<(), FunctionalError> {
        if Arc::ptr_eq(&self.reg, reg) || *self.reg == **reg {
            Ok(())
        } else {
            Err(AlgebraError::RegistryMismatch.into())
        }
    }

    /// Linear extension of the kernel lookup.
    pub fn evaluate(&self, a: &AlgebraElement) -> Result<Scalar, FunctionalError> {
        self.check_registry(a.registry())?;
        let mut acc = Scalar::zero();
        for (m, c) in a.terms() {
            let v = self.evaluate_monomial(m)?;
            if !v.is_zero() {
                acc += c * v;
            }
        }
        Ok(acc)
    }

    /// `f^{⊗k}` applied to a rank-k tensor. Functionals act as even maps, so
    /// no signs arise from passing them across tensor factors.
    pub fn evaluate_tensor_power(&self, t: &TensorElement) -> Result<Scalar, FunctionalError> {
        self.check_registry(t.registry())?;
        let mut acc = Scalar::zero();
        'terms: for (slots, c) in t.terms() {
            let mut prod = c.clone();
            for m in slots {
                let v = self.evaluate_monomial(m)?;
                if v.is_zero() {
                    continue 'terms;
                }
                prod *= v;
            }
            acc += prod;
        }
        Ok(acc)
    }

    /// `self - other` on the same registry; the result's degree cap is the
    /// smaller of the two.
    pub fn sub(&self, other: &Functional) -> Result<Functional, FunctionalError> {
        self.check_registry(&other.reg)?;
        let mut out = self.clone();
        out.unit_value = &self.unit_value - &other.unit_value;
        for (m, v) in &other.kernels {
            let cur = out.kernels.get(m).cloned().unwrap_or_else(Scalar::zero);
            out.set(m.clone(), cur - v);
        }
        out.max_degree = min_cap(self.max_degree, other.max_degree);
        Ok(out)
    }

    pub fn scale(&self, factor: &Scalar) -> Functional {
        let mut out = Functional::zero(self.reg.clone());
        out.max_degree = self.max_degree;
        out.unit_value = &self.unit_value * factor;
        for (m, v) in &self.kernels {
            out.set(m.clone(), v * factor);
        }
        out
    }

    fn add_scaled(&mut self, other: &Functional, factor: &Scalar) {
        self.unit_value += &other.unit_value * factor;
        for (m, v) in &other.kernels {
            let cur = self.kernels.get(m).cloned().unwrap_or_else(Scalar::zero);
            self.set(m.clone(), cur + v * factor);
        }
    }

    /// Equality of the tables on every monomial of degree ≤ `bound`.
    pub fn agrees_up_to(&self, other: &Functional, bound: usize) -> Result<bool, FunctionalError> {
        self.check_registry(&other.reg)?;
        for m in self.reg.monomials_up_to(bound) {
            if self.evaluate_monomial(&m)? != other.evaluate_monomial(&m)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Human-readable table, one `monomial = value` line each.
    pub fn describe(&self) -> String {
        let mut s = format!("1 = {}\n", format_scalar(&self.unit_value));
        for (m, v) in &self.kernels {
            s.push_str(&format!("{} = {}\n", m.display(&self.reg), format_scalar(v)));
        }
        s
    }
}

fn min_cap(a: Option<usize>, b: Option<usize>) -> Option<usize> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// `(α ⋆ β)(m) = Σ α(m₍₁₎) β(m₍₂₎)` over the coproduct of `m`.
fn convolve_on(alpha: &Functional, beta: &Functional, mono: &Monomial) -> Result<Scalar, FunctionalError> {
    let mut acc = Scalar::zero();
    for (slots, mult) in distribute(&alpha.reg, mono, 2, 0) {
        let a = alpha.evaluate_monomial(&slots[0])?;
        if a.is_zero() {
            continue;
        }
        let b = beta.evaluate_monomial(&slots[1])?;
        if b.is_zero() {
            continue;
        }
        acc += a * b * Scalar::from_integer(mult.into());
    }
    Ok(acc)
}

/// Convolution product α ⋆ β, tabulated on all monomials up to `bound`.
pub fn convolve(alpha: &Functional, beta: &Functional, bound: usize) -> Result<Functional, FunctionalError> {
    alpha.check_registry(&beta.reg)?;
    let mut out = Functional::zero(alpha.reg.clone());
    out.max_degree = Some(bound);
    for mono in alpha.reg.monomials_up_to(bound) {
        let v = convolve_on(alpha, beta, &mono)?;
        out.set(mono, v);
    }
    Ok(out)
}

/// exp_⋆ σ = Σ_k σ^{⋆k}/k!, exact up to degree `bound`.
///
/// Requires σ(𝟙) = 0, so that σ^{⋆k} vanishes on degrees below k and the
/// series stops at k = `bound`.
pub fn star_exp(sigma: &Functional, bound: usize) -> Result<Functional, FunctionalError> {
    if !sigma.unit_value.is_zero() {
        return Err(FunctionalError::NonZeroUnit(format_scalar(&sigma.unit_value)));
    }
    let reg = sigma.reg.clone();
    let mut result = Functional::counit(reg.clone()).with_max_degree(bound);
    let mut power = Functional::counit(reg);
    for k in 1..=bound {
        power = convolve(&power, sigma, bound)?;
        let inv = Scalar::new(One::one(), factorial(k));
        result.add_scaled(&power, &inv);
    }
    Ok(result)
}

/// log_⋆ ρ = Σ_{k≥1} (−1)^{k+1} (ρ − ε)^{⋆k}/k, exact up to degree `bound`.
pub fn star_log(rho: &Functional, bound: usize) -> Result<Functional, FunctionalError> {
    if !rho.unit_value.is_one() {
        return Err(FunctionalError::UnitNotOne(format_scalar(&rho.unit_value)));
    }
    let reg = rho.reg.clone();
    let delta = rho.sub(&Functional::counit(reg.clone()))?;
    let mut result = Functional::zero(reg.clone()).with_max_degree(bound);
    let mut power = Functional::counit(reg);
    for k in 1..=bound {
        power = convolve(&power, &delta, bound)?;
        let mut c = Scalar::new(One::one(), (k as i64).into());
        if k % 2 == 0 {
            c = -c;
        }
        result.add_scaled(&power, &c);
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{LabelId, Parity};
    use crate::scalar::{frac, int};

    fn mono(ids: &[u32]) -> Monomial {
        Monomial::from_sorted(ids.iter().map(|&i| LabelId(i)).collect())
    }

    #[test]
    fn evaluate_is_linear() {
        let reg = Arc::new(LabelRegistry::bosonic(2));
        let mut sigma = Functional::zero(reg.clone());
        sigma.set(mono(&[0, 1]), int(5));
        let a = AlgebraElement::from_monomial(reg.clone(), mono(&[0, 1]), int(2));
        assert_eq!(sigma.evaluate(&a).unwrap(), int(10));
        let rho = Functional::counit(reg.clone());
        assert_eq!(rho.evaluate(&AlgebraElement::one(reg.clone())).unwrap(), int(1));
        assert_eq!(sigma.evaluate(&AlgebraElement::generator(reg, LabelId(0)).unwrap()).unwrap(), int(0));
    }

    #[test]
    fn degree_cap_is_enforced() {
        let reg = Arc::new(LabelRegistry::bosonic(1));
        let f = Functional::zero(reg.clone()).with_max_degree(2);
        let a = AlgebraElement::from_monomial(reg, mono(&[0, 0, 0]), int(1));
        assert_eq!(f.evaluate(&a), Err(FunctionalError::DegreeAboveCap { degree: 3, cap: 2 }));
    }

    #[test]
    fn counit_is_the_unit() {
        let reg = Arc::new(LabelRegistry::bosonic(2));
        let mut a = Functional::zero(reg.clone()).with_unit_value(frac(2, 3));
        a.set(mono(&[0]), int(4));
        a.set(mono(&[0, 1]), frac(-1, 5));
        a.set(mono(&[1, 1, 1]), int(7));
        let e = Functional::counit(reg);
        assert!(convolve(&e, &a, 4).unwrap().agrees_up_to(&a, 4).unwrap());
        assert!(convolve(&a, &e, 4).unwrap().agrees_up_to(&a, 4).unwrap());
    }

    #[test]
    fn convolution_on_a_generator() {
        let reg = Arc::new(LabelRegistry::bosonic(1));
        let mut a = Functional::zero(reg.clone()).with_unit_value(int(2));
        a.set(mono(&[0]), int(3));
        let mut b = Functional::zero(reg.clone()).with_unit_value(int(5));
        b.set(mono(&[0]), int(7));
        let c = convolve(&a, &b, 1).unwrap();
        assert_eq!(c.evaluate_monomial(&mono(&[0])).unwrap(), int(3 * 5 + 2 * 7));
    }

    #[test]
    fn sigma_squared_on_two_points_vanishes() {
        let reg = Arc::new(LabelRegistry::bosonic(2));
        let mut s = Functional::zero(reg);
        s.set(mono(&[0, 1]), int(3));
        s.set(mono(&[0, 0]), int(2));
        let ss = convolve(&s, &s, 2).unwrap();
        assert_eq!(ss.evaluate_monomial(&mono(&[0, 1])).unwrap(), int(0));
    }

    #[test]
    fn exp_of_zero_is_counit() {
        let reg = Arc::new(LabelRegistry::bosonic(2));
        let e = star_exp(&Functional::zero(reg.clone()), 4).unwrap();
        assert!(e.agrees_up_to(&Functional::counit(reg), 4).unwrap());
    }

    #[test]
    fn exp_four_point_is_pairing_sum() {
        let reg = Arc::new(LabelRegistry::bosonic(4));
        let mut s = Functional::zero(reg.clone());
        let vals = [((0, 1), 2), ((0, 2), 3), ((0, 3), 5), ((1, 2), 7), ((1, 3), 11), ((2, 3), 13)];
        for ((i, j), v) in vals {
            s.set(mono(&[i, j]), int(v));
        }
        s.set(mono(&[0, 1, 2, 3]), int(17));
        let rho = star_exp(&s, 4).unwrap();
        let expected = 17 + 2 * 13 + 3 * 11 + 5 * 7;
        assert_eq!(rho.evaluate_monomial(&mono(&[0, 1, 2, 3])).unwrap(), int(expected));
    }

    #[test]
    fn exp_rejects_nonzero_unit_and_log_rejects_non_unit() {
        let reg = Arc::new(LabelRegistry::bosonic(1));
        let f = Functional::zero(reg.clone()).with_unit_value(int(1));
        assert!(matches!(star_exp(&f, 2), Err(FunctionalError::NonZeroUnit(_))));
        let g = Functional::zero(reg);
        assert!(matches!(star_log(&g, 2), Err(FunctionalError::UnitNotOne(_))));
    }

    #[test]
    fn log_of_counit_is_zero() {
        let reg = Arc::new(LabelRegistry::bosonic(2));
        let l = star_log(&Functional::counit(reg.clone()), 4).unwrap();
        assert!(l.agrees_up_to(&Functional::zero(reg), 4).unwrap());
    }

    // ρ with only a two-point kernel g on one label:
    // log ρ = (ρ−ε) − (ρ−ε)^{⋆2}/2 + ...; on φ⁴ the second-order term is
    // C(4,2)·g²/2 = 3g², so σ(φ⁴) = −3g² and σ(φ²) = g.
    #[test]
    fn log_of_pure_two_point() {
        let reg = Arc::new(LabelRegistry::bosonic(1));
        let g = frac(5, 7);
        let mut rho = Functional::counit(reg.clone());
        rho.set(mono(&[0, 0]), g.clone());
        let sigma = star_log(&rho, 4).unwrap();
        assert_eq!(sigma.evaluate_monomial(&mono(&[0, 0])).unwrap(), g);
        assert_eq!(sigma.evaluate_monomial(&mono(&[0, 0, 0, 0])).unwrap(), -int(3) * &g * &g);
    }

    #[test]
    fn fermionic_product_values_pick_up_signs() {
        let reg = Arc::new(LabelRegistry::from_labels([("f1", Parity::Odd), ("f2", Parity::Odd)]).unwrap());
        let mut f = Functional::zero(reg);
        assert!(f.set_product(&[LabelId(1), LabelId(0)], int(3)).unwrap());
        assert_eq!(f.evaluate_monomial(&mono(&[0, 1])).unwrap(), int(-3));
        assert!(!f.set_product(&[LabelId(0), LabelId(0)], int(1)).unwrap());
    }
}
