//! ODE models with known and unknown inputs, and the transformations the
//! observability algorithms need: state augmentation, the affine split and
//! multi-experiment replication.

mod affine;
mod augment;
mod parse;
mod replicate;

use std::collections::{HashMap, HashSet};
use std::fmt;

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::sym::{Expr, Symbol};

pub use affine::{affine_decompose, AffineDecomposition};
pub use augment::{augment, augment_affine, AffineSplit, AugmentedSystem};
pub use parse::parse_model;
pub use replicate::replicate_for_experiments;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymbolKind {
    State,
    Parameter,
    /// Derivative of order `j` of a known input; order 0 is the input itself.
    KnownInput(u32),
    /// Derivative of order `j` of an unknown input.
    UnknownInput(u32),
}

/// Highest derivative order of an input that may be nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DerivBound {
    Finite(u32),
    Unbounded,
}

impl DerivBound {
    /// True when the `order`-th derivative is allowed to be nonzero.
    pub fn admits(self, order: u32) -> bool {
        match self {
            DerivBound::Finite(b) => order <= b,
            DerivBound::Unbounded => true,
        }
    }
}

impl fmt::Display for DerivBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DerivBound::Finite(b) => write!(f, "{b}"),
            DerivBound::Unbounded => f.write_str("unbounded"),
        }
    }
}

impl std::str::FromStr for DerivBound {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s == "unbounded" {
            return Ok(DerivBound::Unbounded);
        }
        s.parse()
            .map(DerivBound::Finite)
            .map_err(|_| format!("expected a non-negative integer or `unbounded`, got `{s}`"))
    }
}

/// Default highest nonzero derivative of an unknown input.
pub const DEFAULT_W_BOUND: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    name: String,
    states: Vec<Symbol>,
    parameters: Vec<Symbol>,
    constants: Vec<(Symbol, BigRational)>,
    known_inputs: Vec<Symbol>,
    unknown_inputs: Vec<Symbol>,
    dynamics: Vec<Expr>,
    output_names: Vec<String>,
    outputs: Vec<Expr>,
    u_deriv_bound: Vec<DerivBound>,
    w_deriv_bound: Vec<u32>,
    excluded: Vec<Symbol>,
}

impl Model {
    /// Build and validate a model. Output names default to `y1..ym`; input
    /// derivative bounds default to unbounded (known) and 1 (unknown).
    pub fn new(
        states: Vec<Symbol>,
        parameters: Vec<Symbol>,
        known_inputs: Vec<Symbol>,
        unknown_inputs: Vec<Symbol>,
        dynamics: Vec<Expr>,
        outputs: Vec<Expr>,
    ) -> Result<Model> {
        let m = outputs.len();
        let model = Model {
            name: "model".into(),
            u_deriv_bound: vec![DerivBound::Unbounded; known_inputs.len()],
            w_deriv_bound: vec![DEFAULT_W_BOUND; unknown_inputs.len()],
            states,
            parameters,
            constants: Vec::new(),
            known_inputs,
            unknown_inputs,
            dynamics,
            output_names: (1..=m).map(|i| format!("y{i}")).collect(),
            outputs,
            excluded: Vec::new(),
        };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        let declared = self
            .states
            .iter()
            .chain(&self.parameters)
            .chain(self.constants.iter().map(|(s, _)| s))
            .chain(&self.known_inputs)
            .chain(&self.unknown_inputs);
        for s in declared {
            if !crate::sym::is_identifier(s.name()) {
                return Err(Error::InvalidModel(format!("`{}` is not a valid identifier", s.name())));
            }
            if !seen.insert(s.clone()) {
                return Err(Error::DuplicateSymbol(s.name().to_string()));
            }
        }
        for n in &self.output_names {
            if seen.contains(&Symbol::new(n)) || !seen.insert(Symbol::new(n)) {
                return Err(Error::DuplicateSymbol(n.clone()));
            }
        }
        if self.states.is_empty() {
            return Err(Error::InvalidModel("no states declared".into()));
        }
        if self.dynamics.len() != self.states.len() {
            return Err(Error::InvalidModel(format!(
                "{} states but {} dynamics equations",
                self.states.len(),
                self.dynamics.len()
            )));
        }
        if self.outputs.is_empty() {
            return Err(Error::InvalidModel("no outputs declared".into()));
        }
        if self.output_names.len() != self.outputs.len() {
            return Err(Error::InvalidModel("output names do not match outputs".into()));
        }
        let kinds = self.kinds();
        for e in self.dynamics.iter().chain(&self.outputs) {
            for s in e.free_symbols() {
                if !kinds.contains_key(s) {
                    return Err(Error::UndeclaredSymbol {
                        name: s.name().to_string(),
                        line: None,
                    });
                }
            }
        }
        Ok(())
    }

    fn kinds(&self) -> HashMap<Symbol, SymbolKind> {
        let mut k = HashMap::new();
        k.extend(self.states.iter().map(|s| (s.clone(), SymbolKind::State)));
        k.extend(self.parameters.iter().map(|s| (s.clone(), SymbolKind::Parameter)));
        k.extend(self.known_inputs.iter().map(|s| (s.clone(), SymbolKind::KnownInput(0))));
        k.extend(
            self.unknown_inputs
                .iter()
                .map(|s| (s.clone(), SymbolKind::UnknownInput(0))),
        );
        k
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Model {
        self.name = name.into();
        self
    }

    /// Record numeric constants that were substituted into the equations.
    /// They take part in name-collision checks and in serialization only.
    pub fn with_constants(mut self, constants: Vec<(Symbol, BigRational)>) -> Result<Model> {
        self.constants = constants;
        self.validate()?;
        Ok(self)
    }

    pub fn with_output_names(mut self, names: Vec<String>) -> Result<Model> {
        self.output_names = names;
        self.validate()?;
        Ok(self)
    }

    pub fn set_u_deriv_bound(&mut self, input: &str, bound: DerivBound) -> Result<()> {
        let i = self
            .known_inputs
            .iter()
            .position(|s| s.name() == input)
            .ok_or_else(|| Error::InvalidOptions(format!("`{input}` is not a known input")))?;
        self.u_deriv_bound[i] = bound;
        Ok(())
    }

    /// Set the same bound on every known input.
    pub fn set_all_u_deriv_bounds(&mut self, bound: DerivBound) {
        self.u_deriv_bound.iter_mut().for_each(|b| *b = bound);
    }

    pub fn set_w_deriv_bound(&mut self, input: &str, bound: u32) -> Result<()> {
        let i = self
            .unknown_inputs
            .iter()
            .position(|s| s.name() == input)
            .ok_or_else(|| Error::InvalidOptions(format!("`{input}` is not an unknown input")))?;
        self.w_deriv_bound[i] = bound;
        Ok(())
    }

    pub fn set_all_w_deriv_bounds(&mut self, bound: u32) {
        self.w_deriv_bound.iter_mut().for_each(|b| *b = bound);
    }

    /// Variables to leave out of classification. Only states, parameters
    /// and unknown inputs can be excluded.
    pub fn set_excluded(&mut self, names: &[String]) -> Result<()> {
        let mut out = Vec::new();
        for n in names {
            let s = Symbol::new(n);
            match self.kind_of(&s) {
                Some(SymbolKind::State | SymbolKind::Parameter | SymbolKind::UnknownInput(0)) => {
                    if !out.contains(&s) {
                        out.push(s)
                    }
                }
                _ => {
                    return Err(Error::InvalidOptions(format!(
                        "cannot exclude `{n}`: not a state, parameter or unknown input"
                    )))
                }
            }
        }
        self.excluded = out;
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn states(&self) -> &[Symbol] {
        &self.states
    }
    pub fn parameters(&self) -> &[Symbol] {
        &self.parameters
    }
    pub fn constants(&self) -> &[(Symbol, BigRational)] {
        &self.constants
    }
    pub fn known_inputs(&self) -> &[Symbol] {
        &self.known_inputs
    }
    pub fn unknown_inputs(&self) -> &[Symbol] {
        &self.unknown_inputs
    }
    pub fn dynamics(&self) -> &[Expr] {
        &self.dynamics
    }
    pub fn outputs(&self) -> &[Expr] {
        &self.outputs
    }
    pub fn output_names(&self) -> &[String] {
        &self.output_names
    }
    pub fn u_deriv_bounds(&self) -> &[DerivBound] {
        &self.u_deriv_bound
    }
    pub fn w_deriv_bounds(&self) -> &[u32] {
        &self.w_deriv_bound
    }
    pub fn excluded(&self) -> &[Symbol] {
        &self.excluded
    }

    /// Largest unknown-input derivative bound, 0 without unknown inputs.
    pub fn max_w_bound(&self) -> u32 {
        self.w_deriv_bound.iter().copied().max().unwrap_or(0)
    }

    /// Kind of a declared symbol or of an input derivative `name^(j)`.
    pub fn kind_of(&self, s: &Symbol) -> Option<SymbolKind> {
        let (base, order) = split_derivative(s.name());
        let base = Symbol::new(base);
        if self.states.contains(&base) && order == 0 {
            Some(SymbolKind::State)
        } else if self.parameters.contains(&base) && order == 0 {
            Some(SymbolKind::Parameter)
        } else if self.known_inputs.contains(&base) {
            Some(SymbolKind::KnownInput(order))
        } else if self.unknown_inputs.contains(&base) {
            Some(SymbolKind::UnknownInput(order))
        } else {
            None
        }
    }

    /// Serialize in the model-file format accepted by [`parse_model`].
    pub fn to_text(&self) -> String {
        parse::to_text(self)
    }
}

/// Split `name^(j)` into `(name, j)`; plain names have order 0.
pub fn split_derivative(name: &str) -> (&str, u32) {
    if let Some(open) = name.find("^(") {
        if let Some(j) = name[open + 2..].strip_suffix(')').and_then(|d| d.parse().ok()) {
            return (&name[..open], j);
        }
    }
    (name, 0)
}
