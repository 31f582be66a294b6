use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StructureError {
    #[error("variable `{0}` is declared more than once")]
    DuplicateVariable(String),
    #[error("variable `{variable}` needs at least two states, has {count}")]
    TooFewStates { variable: String, count: usize },
    #[error("variable `{variable}` repeats state `{state}`")]
    DuplicateState { variable: String, state: String },
    #[error("edge {parent} -> {child} names an undeclared variable `{missing}`")]
    UnknownEdgeEndpoint { parent: String, child: String, missing: String },
    #[error("edge {parent} -> {child} is declared twice")]
    DuplicateEdge { parent: String, child: String },
    #[error("edges form a cycle through `{0}`")]
    Cycle(String),
    #[error("network has no `change_status` variable")]
    MissingTerminal,
    #[error("`change_status` must have states [abandoned, merged], found {0:?}")]
    TerminalDomain(Vec<String>),
    #[error("`change_status` is terminal but has an edge to `{0}`")]
    TerminalHasChildren(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CptError {
    #[error("cpt for `{variable}` expects {expected} probabilities, got {actual}")]
    Shape { variable: String, expected: usize, actual: usize },
    #[error("cpt for `{variable}` row {row} has probability {value} outside [0, 1]")]
    OutOfRange { variable: String, row: usize, value: f64 },
    #[error("cpt for `{variable}` row {row} sums to {sum}, not 1")]
    RowSum { variable: String, row: usize, sum: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Cpt(#[from] CptError),
    #[error("no cpt for variable `{0}`")]
    MissingCpt(String),
    #[error("more than one cpt for variable `{0}`")]
    DuplicateCpt(String),
    #[error("cpt names unknown variable `{0}`")]
    UnknownCpt(String),
    #[error("cpt for `{variable}` has parents {found:?}, structure says {expected:?}")]
    ParentMismatch { variable: String, expected: Vec<String>, found: Vec<String> },
    #[error("smoothing alpha must be positive and finite, got {0}")]
    InvalidAlpha(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LearnError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("row {row} has no value for variable `{variable}`")]
    MissingVariable { row: usize, variable: String },
    #[error("row {row} assigns unknown state `{state}` to variable `{variable}`")]
    UnknownState { row: usize, variable: String, state: String },
    #[error("row {row} names undeclared variable `{variable}`")]
    UnknownVariable { row: usize, variable: String },
}

impl From<StructureError> for LearnError {
    fn from(e: StructureError) -> Self {
        LearnError::Model(ModelError::Structure(e))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InferenceError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("state `{state}` is not in the domain of `{variable}`")]
    UnknownState { variable: String, state: String },
    #[error("`change_status` cannot be used as evidence")]
    TerminalInEvidence,
    #[error("assignment is missing variables {0:?}")]
    Incomplete(Vec<String>),
    #[error("evidence has zero probability under the model")]
    DegenerateEvidence,
}
