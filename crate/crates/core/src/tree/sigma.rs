//! Connected functions from 1PI vertex functions.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::lambda::{apply_q, lambda_step};
use super::propagator::{PropagatorMatrix, PropagatorRole};
use super::TreeError;
use crate::algebra::{AlgebraElement, Monomial, TensorElement};
use crate::coalgebra::Truncation;
use crate::functional::Functional;
use crate::scalar::Scalar;

/// Which vertex functions feed the tree sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// 1PI vertices τ with Feynman-propagator edges. The sum over vertex
    /// number does not terminate; callers cap it.
    Standard,
    /// Modified 1PI vertices τ̂ with connected-propagator edges.
    Modified,
    /// Interaction vertices τ_T at tree level.
    TreeLevel,
}

impl Mode {
    /// Coproduct truncation matching the valence bound of the mode.
    pub fn truncation(self) -> Truncation {
        match self {
            Mode::Standard => Truncation(1),
            Mode::Modified | Mode::TreeLevel => Truncation(2),
        }
    }

    pub fn propagator_role(self) -> PropagatorRole {
        match self {
            Mode::Modified => PropagatorRole::Connected2,
            Mode::Standard | Mode::TreeLevel => PropagatorRole::Feynman,
        }
    }

    /// Whether the sum over vertex numbers is finite on every argument.
    pub fn is_finite(self) -> bool {
        self != Mode::Standard
    }

    /// Checks the vanishing conditions the mode requires of `tau` and the
    /// propagator role.
    pub fn validate(self, tau: &Functional, p: &PropagatorMatrix) -> Result<(), TreeError> {
        if !tau.unit_value().is_zero() {
            return Err(TreeError::ModeMismatch(format!("{self} mode needs a vertex functional vanishing on 1")));
        }
        if !tau.vanishes_on_one_point() {
            return Err(TreeError::ModeMismatch(format!("{self} mode needs vanishing one-point values")));
        }
        if self.is_finite() && !tau.vanishes_on_two_point() {
            return Err(TreeError::ModeMismatch(format!("{self} mode needs vanishing two-point values")));
        }
        if p.role() != self.propagator_role() {
            return Err(TreeError::ModeMismatch(format!(
                "{self} mode needs a {:?} propagator, got {:?}",
                self.propagator_role(),
                p.role()
            )));
        }
        if tau.registry() != p.registry() {
            return Err(crate::algebra::AlgebraError::RegistryMismatch.into());
        }
        Ok(())
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Standard => "standard",
            Mode::Modified => "modified",
            Mode::TreeLevel => "tree-level",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "standard" => Ok(Mode::Standard),
            "modified" => Ok(Mode::Modified),
            "tree-level" | "tree_level" => Ok(Mode::TreeLevel),
            other => Err(format!("unknown mode `{other}` (expected standard, modified or tree-level)")),
        }
    }
}

/// σ^k(a) = τ^{⊗k}(Λ^{k-1}(a)) for k = 1..=k_max, using the mode's truncated
/// coproduct. In the finite modes the list stops early once Λ vanishes.
pub fn sigma_components(
    tau: &Functional,
    a: &AlgebraElement,
    k_max: usize,
    p: &PropagatorMatrix,
    mode: Mode,
) -> Result<Vec<Scalar>, TreeError> {
    mode.validate(tau, p)?;
    let trunc = mode.truncation();
    let mut out = Vec::with_capacity(k_max);
    let mut t = TensorElement::from_element(a);
    for k in 1..=k_max {
        out.push(tau.evaluate_tensor_power(&t)?);
        if k == k_max {
            break;
        }
        t = lambda_step(&t, p, trunc)?;
        if t.is_zero() {
            break;
        }
    }
    Ok(out)
}

/// Σ_{k=1}^{k_max} σ^k(a).
pub fn sigma_from_tau(
    tau: &Functional,
    a: &AlgebraElement,
    k_max: usize,
    p: &PropagatorMatrix,
    mode: Mode,
) -> Result<Scalar, TreeError> {
    Ok(sigma_components(tau, a, k_max, p, mode)?.into_iter().sum())
}

/// Evaluates σ^k through σ¹ = τ and
/// σ^k = 1/(k-1) Σ_{i=1}^{k-1} (σ^i ⊗ σ^{k-i}) ∘ Q,
/// memoizing values per monomial.
pub struct SigmaRecursive<'a> {
    tau: &'a Functional,
    p: &'a PropagatorMatrix,
    trunc: Truncation,
    values: RefCell<HashMap<(usize, Monomial), Scalar>>,
    splits: RefCell<HashMap<Monomial, TensorElement>>,
}

impl<'a> SigmaRecursive<'a> {
    pub fn new(tau: &'a Functional, p: &'a PropagatorMatrix, mode: Mode) -> Result<Self, TreeError> {
        mode.validate(tau, p)?;
        Ok(Self {
            tau,
            p,
            trunc: mode.truncation(),
            values: RefCell::new(HashMap::new()),
            splits: RefCell::new(HashMap::new()),
        })
    }

    pub fn eval(&self, k: usize, a: &AlgebraElement) -> Result<Scalar, TreeError> {
        if k == 0 {
            return Err(TreeError::InvalidOrder { k, min: 1 });
        }
        let mut acc = Scalar::zero();
        for (m, c) in a.terms() {
            acc += c * self.eval_monomial(k, m)?;
        }
        Ok(acc)
    }

    fn eval_monomial(&self, k: usize, m: &Monomial) -> Result<Scalar, TreeError> {
        if k == 1 {
            return Ok(self.tau.evaluate_monomial(m)?);
        }
        if let Some(v) = self.values.borrow().get(&(k, m.clone())) {
            return Ok(v.clone());
        }
        let q = self.q_of(m)?;
        let mut acc = Scalar::zero();
        for (pair, c) in q.terms() {
            for i in 1..k {
                let left = self.eval_monomial(i, &pair[0])?;
                if left.is_zero() {
                    continue;
                }
                let right = self.eval_monomial(k - i, &pair[1])?;
                acc += c * left * right;
            }
        }
        acc /= Scalar::from_integer(((k - 1) as i64).into());
        self.values.borrow_mut().insert((k, m.clone()), acc.clone());
        Ok(acc)
    }

    fn q_of(&self, m: &Monomial) -> Result<TensorElement, TreeError> {
        if let Some(t) = self.splits.borrow().get(m) {
            return Ok(t.clone());
        }
        let single = TensorElement::pure(self.p.registry().clone(), vec![m.clone()], num_traits::One::one());
        let q = apply_q(&single, 1, self.p, self.trunc)?;
        self.splits.borrow_mut().insert(m.clone(), q.clone());
        Ok(q)
    }
}
