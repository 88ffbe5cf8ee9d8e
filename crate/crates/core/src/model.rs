//! Finite toy models: labels, propagators and named kernel tables, loaded
//! from JSON and checked eagerly.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgebraElement, AlgebraError, LabelId, LabelRegistry, Parity};
use crate::functional::{star_exp, star_log, Functional, FunctionalError};
use crate::scalar::{format_scalar, parse_scalar, ParseScalarError, Scalar};
use crate::tree::{sigma_components, Mode, PropagatorMatrix, PropagatorRole, TreeError};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed model JSON: {0}")]
    Parse(String),
    #[error("bad rational in {context}: {source}")]
    Rational { context: String, source: ParseScalarError },
    #[error("labels: {0}")]
    Labels(AlgebraError),
    #[error("{which} propagator: {source}")]
    Propagator { which: &'static str, source: TreeError },
    #[error("functional `{name}` ({role}): {reason}")]
    RoleMismatch { name: String, role: Role, reason: String },
    #[error("functional `{name}`: {reason}")]
    Kernel { name: String, reason: String },
    #[error("duplicate functional name `{0}`")]
    DuplicateFunctional(String),
    #[error("model has no functional with role {0}")]
    MissingRole(Role),
    #[error("no functional named `{0}`")]
    UnknownFunctional(String),
    #[error("functional `{name}` has role {found}, expected {expected}")]
    WrongRole { name: String, found: Role, expected: Role },
    #[error("modified mode needs a connected_propagator in the model")]
    MissingConnectedPropagator,
    #[error("bad external label list: {0}")]
    Externals(String),
    #[error(transparent)]
    Functional(#[from] FunctionalError),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// What a kernel table stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    /// 1PI vertex functions
    Tau,
    /// modified 1PI vertex functions
    TauHat,
    /// tree-level interaction vertices
    TauTree,
    /// connected functions
    Sigma,
    /// complete functions
    Rho,
}

impl Role {
    /// Vertex role consumed by a tree-sum mode.
    pub fn for_mode(mode: Mode) -> Role {
        match mode {
            Mode::Standard => Role::Tau,
            Mode::Modified => Role::TauHat,
            Mode::TreeLevel => Role::TauTree,
        }
    }

    fn check(self, name: &str, f: &Functional) -> Result<(), ModelError> {
        let fail = |reason: &str| Err(ModelError::RoleMismatch { name: name.to_string(), role: self, reason: reason.into() });
        match self {
            Role::Rho if !f.unit_value().is_one() => return fail("complete functions must be 1 on the unit"),
            Role::Rho => {}
            _ if !f.unit_value().is_zero() => return fail("must vanish on the unit"),
            _ => {}
        }
        if matches!(self, Role::Tau | Role::TauHat | Role::TauTree) && !f.vanishes_on_one_point() {
            return fail("vertex functions must have vanishing one-point values");
        }
        if matches!(self, Role::TauHat | Role::TauTree) && !f.vanishes_on_two_point() {
            return fail("two-point values must vanish by construction");
        }
        if !f.is_even() {
            return fail("values on odd monomials must be zero");
        }
        Ok(())
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Tau => "tau",
            Role::TauHat => "tau_hat",
            Role::TauTree => "tau_tree",
            Role::Sigma => "sigma",
            Role::Rho => "rho",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub description: String,
}

// on-disk shapes

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    #[serde(default)]
    metadata: Metadata,
    labels: Vec<LabelFile>,
    feynman_propagator: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    connected_propagator: Option<Vec<Vec<String>>>,
    #[serde(default)]
    functionals: Vec<FunctionalFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LabelFile {
    name: String,
    parity: Parity,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FunctionalFile {
    name: String,
    role: Role,
    #[serde(default = "zero_string")]
    unit_value: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_degree: Option<usize>,
    #[serde(default)]
    kernels: Vec<KernelFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelFile {
    monomial: Vec<String>,
    value: String,
}

fn zero_string() -> String {
    "0".into()
}

/// A kernel table with its name and role.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedFunctional {
    pub name: String,
    pub role: Role,
    pub functional: Functional,
}

/// A validated model. Immutable once built.
#[derive(Debug, Clone)]
pub struct FiniteModel {
    pub metadata: Metadata,
    registry: Arc<LabelRegistry>,
    feynman: PropagatorMatrix,
    connected: Option<PropagatorMatrix>,
    functionals: Vec<NamedFunctional>,
}

fn rational(s: &str, context: impl FnOnce() -> String) -> Result<Scalar, ModelError> {
    parse_scalar(s).map_err(|source| ModelError::Rational { context: context(), source })
}

fn matrix(
    reg: &Arc<LabelRegistry>,
    raw: &[Vec<String>],
    role: PropagatorRole,
    which: &'static str,
) -> Result<PropagatorMatrix, ModelError> {
    let mut entries = Vec::with_capacity(raw.len());
    for (i, row) in raw.iter().enumerate() {
        let mut out = Vec::with_capacity(row.len());
        for (j, s) in row.iter().enumerate() {
            out.push(rational(s, || format!("{which}_propagator[{i}][{j}]"))?);
        }
        entries.push(out);
    }
    PropagatorMatrix::new(reg.clone(), entries, role).map_err(|source| ModelError::Propagator { which, source })
}

fn matrix_strings(p: &PropagatorMatrix) -> Vec<Vec<String>> {
    p.entries().iter().map(|row| row.iter().map(format_scalar).collect()).collect()
}

impl FiniteModel {
    /// Builds a model from parts, running the same checks as loading.
    pub fn new(
        metadata: Metadata,
        feynman: PropagatorMatrix,
        connected: Option<PropagatorMatrix>,
        functionals: Vec<NamedFunctional>,
    ) -> Result<Self, ModelError> {
        let registry = feynman.registry().clone();
        if feynman.role() != PropagatorRole::Feynman {
            return Err(ModelError::Propagator {
                which: "feynman",
                source: TreeError::ModeMismatch("expected a Feynman propagator".into()),
            });
        }
        if let Some(c) = &connected {
            if c.registry() != &registry || c.role() != PropagatorRole::Connected2 {
                return Err(ModelError::Propagator {
                    which: "connected",
                    source: TreeError::ModeMismatch("expected a connected propagator over the same labels".into()),
                });
            }
        }
        let mut names = BTreeSet::new();
        for nf in &functionals {
            if !names.insert(nf.name.clone()) {
                return Err(ModelError::DuplicateFunctional(nf.name.clone()));
            }
            if nf.functional.registry() != &registry {
                return Err(ModelError::Kernel { name: nf.name.clone(), reason: "label set differs from the model".into() });
            }
            nf.role.check(&nf.name, &nf.functional)?;
        }
        Ok(Self { metadata, registry, feynman, connected, functionals })
    }

    /// Parses and validates a model from JSON text.
    pub fn from_json_str(text: &str) -> Result<Self, ModelError> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| ModelError::Parse(e.to_string()))?;
        let reg = Arc::new(
            LabelRegistry::from_labels(file.labels.into_iter().map(|l| (l.name, l.parity))).map_err(ModelError::Labels)?,
        );
        let feynman = matrix(&reg, &file.feynman_propagator, PropagatorRole::Feynman, "feynman")?;
        let connected = file
            .connected_propagator
            .as_deref()
            .map(|raw| matrix(&reg, raw, PropagatorRole::Connected2, "connected"))
            .transpose()?;
        let mut functionals = Vec::with_capacity(file.functionals.len());
        for ff in file.functionals {
            functionals.push(read_functional(&reg, ff)?);
        }
        Self::new(file.metadata, feynman, connected, functionals)
    }

    pub fn to_json_string(&self) -> String {
        let file = ModelFile {
            metadata: self.metadata.clone(),
            labels: self
                .registry
                .ids()
                .map(|id| LabelFile { name: self.registry.name(id).to_string(), parity: self.registry.parity(id) })
                .collect(),
            feynman_propagator: matrix_strings(&self.feynman),
            connected_propagator: self.connected.as_ref().map(matrix_strings),
            functionals: self.functionals.iter().map(|nf| write_functional(&self.registry, nf)).collect(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("model serialization cannot fail");
        s.push('\n');
        s
    }

    pub fn registry(&self) -> &Arc<LabelRegistry> {
        &self.registry
    }

    pub fn feynman_propagator(&self) -> &PropagatorMatrix {
        &self.feynman
    }

    pub fn connected_propagator(&self) -> Option<&PropagatorMatrix> {
        self.connected.as_ref()
    }

    pub fn functionals(&self) -> &[NamedFunctional] {
        &self.functionals
    }

    /// Propagator dressing internal edges in `mode`.
    pub fn propagator_for(&self, mode: Mode) -> Result<&PropagatorMatrix, ModelError> {
        match mode.propagator_role() {
            PropagatorRole::Feynman => Ok(&self.feynman),
            PropagatorRole::Connected2 => self.connected.as_ref().ok_or(ModelError::MissingConnectedPropagator),
        }
    }

    /// The functional called `name`, or else the first one with `role`.
    pub fn select(&self, role: Role, name: Option<&str>) -> Result<&NamedFunctional, ModelError> {
        match name {
            Some(n) => {
                let nf = self
                    .functionals
                    .iter()
                    .find(|nf| nf.name == n)
                    .ok_or_else(|| ModelError::UnknownFunctional(n.to_string()))?;
                if nf.role != role {
                    return Err(ModelError::WrongRole { name: n.to_string(), found: nf.role, expected: role });
                }
                Ok(nf)
            }
            None => self.functionals.iter().find(|nf| nf.role == role).ok_or(ModelError::MissingRole(role)),
        }
    }

    /// Copy of the model with the functional called `name` replaced.
    pub fn with_replaced(&self, name: &str, replacement: NamedFunctional) -> Result<Self, ModelError> {
        let mut functionals = self.functionals.clone();
        let slot = functionals
            .iter_mut()
            .find(|nf| nf.name == name)
            .ok_or_else(|| ModelError::UnknownFunctional(name.to_string()))?;
        *slot = replacement;
        Self::new(self.metadata.clone(), self.feynman.clone(), self.connected.clone(), functionals)
    }

    /// Parses a comma-separated list of label names.
    pub fn parse_externals(&self, list: &str) -> Result<Vec<LabelId>, ModelError> {
        parse_label_list(&self.registry, list)
    }
}

/// Parses `a,b,c` into label ids; the empty string is the empty list.
pub fn parse_label_list(reg: &LabelRegistry, list: &str) -> Result<Vec<LabelId>, ModelError> {
    if list.trim().is_empty() {
        return Ok(Vec::new());
    }
    list.split(',')
        .map(|s| {
            let s = s.trim();
            reg.lookup(s).map_err(|_| ModelError::Externals(format!("unknown label `{s}`")))
        })
        .collect()
}

fn read_functional(reg: &Arc<LabelRegistry>, ff: FunctionalFile) -> Result<NamedFunctional, ModelError> {
    let name = ff.name;
    let unit = rational(&ff.unit_value, || format!("unit_value of `{name}`"))?;
    let mut f = Functional::zero(reg.clone()).with_unit_value(unit);
    if let Some(cap) = ff.max_degree {
        f = f.with_max_degree(cap);
    }
    let mut seen = BTreeSet::new();
    for (i, k) in ff.kernels.iter().enumerate() {
        let value = rational(&k.value, || format!("kernel {i} of `{name}`"))?;
        let ids = k
            .monomial
            .iter()
            .map(|l| reg.lookup(l))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| ModelError::Kernel { name: name.clone(), reason: e.to_string() })?;
        if ids.is_empty() {
            return Err(ModelError::Kernel { name, reason: "use unit_value for the empty monomial".into() });
        }
        if let Some(cap) = ff.max_degree {
            if ids.len() > cap {
                return Err(ModelError::Kernel {
                    name,
                    reason: format!("kernel of degree {} above max_degree {cap}", ids.len()),
                });
            }
        }
        let (mono, _) = crate::algebra::make_monomial(reg, &ids).map_err(ModelError::Labels)?;
        if !seen.insert(mono) {
            return Err(ModelError::Kernel { name, reason: format!("monomial {:?} given twice", k.monomial) });
        }
        if !f.set_product(&ids, value).map_err(ModelError::Labels)? {
            return Err(ModelError::Kernel {
                name,
                reason: format!("{:?} repeats an odd label, so its value must be 0", k.monomial),
            });
        }
    }
    Ok(NamedFunctional { name, role: ff.role, functional: f })
}

fn write_functional(reg: &LabelRegistry, nf: &NamedFunctional) -> FunctionalFile {
    FunctionalFile {
        name: nf.name.clone(),
        role: nf.role,
        unit_value: format_scalar(nf.functional.unit_value()),
        max_degree: nf.functional.max_degree(),
        kernels: nf
            .functional
            .kernels()
            .map(|(m, v)| KernelFile {
                monomial: m.ids().iter().map(|&id| reg.name(id).to_string()).collect(),
                value: format_scalar(v),
            })
            .collect(),
    }
}

/// Reads and validates a model file.
pub fn load_model(path: impl AsRef<Path>) -> Result<FiniteModel, ModelError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| ModelError::Io { path: path.display().to_string(), message: e.to_string() })?;
    FiniteModel::from_json_str(&text)
}

/// ρ = exp_⋆σ tabulated up to `bound`, from the sigma functional (the one
/// called `name` if given).
pub fn complete_from_connected(m: &FiniteModel, bound: usize, name: Option<&str>) -> Result<Functional, ModelError> {
    Ok(star_exp(&m.select(Role::Sigma, name)?.functional, bound)?)
}

/// σ = log_⋆ρ tabulated up to `bound`.
pub fn connected_from_complete(m: &FiniteModel, bound: usize, name: Option<&str>) -> Result<Functional, ModelError> {
    Ok(star_log(&m.select(Role::Rho, name)?.functional, bound)?)
}

/// Per-vertex-number contributions σ^1(a), σ^2(a), … from the vertex
/// functional of `mode`.
pub fn connected_from_1pi_components(
    m: &FiniteModel,
    a: &AlgebraElement,
    k_max: usize,
    mode: Mode,
) -> Result<Vec<Scalar>, ModelError> {
    let tau = &m.select(Role::for_mode(mode), None)?.functional;
    Ok(sigma_components(tau, a, k_max, m.propagator_for(mode)?, mode)?)
}

/// Σ_{k ≤ k_max} σ^k(a).
pub fn connected_from_1pi(m: &FiniteModel, a: &AlgebraElement, k_max: usize, mode: Mode) -> Result<Scalar, ModelError> {
    Ok(connected_from_1pi_components(m, a, k_max, mode)?.into_iter().fold(Scalar::zero(), |s, x| s + x))
}
