use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};

use super::error::StructureError;
use crate::factors::{
    var, AgeCategory, Category, Outcome, PatchesCategory, PeerReview, SizeCategory, TestVerdict,
};

/// Name of the terminal node whose posterior is the merge probability.
pub const TERMINAL: &str = var::CHANGE_STATUS;

/// A named variable with an ordered list of state labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoricalVariable {
    pub name: String,
    pub states: Vec<String>,
}

impl CategoricalVariable {
    pub fn new<S: Into<String>>(name: impl Into<String>, states: impl IntoIterator<Item = S>) -> Self {
        CategoricalVariable {
            name: name.into(),
            states: states.into_iter().map(Into::into).collect(),
        }
    }

    pub fn of<C: Category>(name: &str) -> Self {
        CategoricalVariable::new(name, C::labels())
    }

    pub fn cardinality(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s == label)
    }
}

#[derive(Deserialize)]
struct StructureDoc {
    variables: Vec<CategoricalVariable>,
    #[serde(default)]
    edges: Vec<(String, String)>,
}

/// Variables plus directed edges `(parent, child)`.
///
/// Always a DAG with a terminal `change_status` node. Parent lists follow edge
/// declaration order, which fixes the row layout of each CPT.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "StructureDoc")]
pub struct NetworkStructure {
    variables: Vec<CategoricalVariable>,
    edges: Vec<(String, String)>,
    #[serde(skip)]
    parents: Vec<Vec<usize>>,
    #[serde(skip)]
    topo_order: Vec<usize>,
    #[serde(skip)]
    terminal: usize,
}

impl TryFrom<StructureDoc> for NetworkStructure {
    type Error = StructureError;

    fn try_from(doc: StructureDoc) -> Result<Self, Self::Error> {
        NetworkStructure::new(doc.variables, doc.edges)
    }
}

impl NetworkStructure {
    pub fn new(
        variables: Vec<CategoricalVariable>,
        edges: Vec<(String, String)>,
    ) -> Result<Self, StructureError> {
        let mut index = HashMap::new();
        for (i, v) in variables.iter().enumerate() {
            if index.insert(v.name.as_str(), i).is_some() {
                return Err(StructureError::DuplicateVariable(v.name.clone()));
            }
            if v.states.len() < 2 {
                return Err(StructureError::TooFewStates {
                    variable: v.name.clone(),
                    count: v.states.len(),
                });
            }
            let mut seen = BTreeSet::new();
            for s in &v.states {
                if !seen.insert(s) {
                    return Err(StructureError::DuplicateState {
                        variable: v.name.clone(),
                        state: s.clone(),
                    });
                }
            }
        }

        let terminal = *index.get(TERMINAL).ok_or(StructureError::MissingTerminal)?;
        if variables[terminal].states != Outcome::labels() {
            return Err(StructureError::TerminalDomain(variables[terminal].states.clone()));
        }

        let mut parents = vec![Vec::new(); variables.len()];
        let mut seen_edges = BTreeSet::new();
        for (p, c) in &edges {
            let lookup = |name: &String| {
                index.get(name.as_str()).copied().ok_or_else(|| StructureError::UnknownEdgeEndpoint {
                    parent: p.clone(),
                    child: c.clone(),
                    missing: name.clone(),
                })
            };
            let (pi, ci) = (lookup(p)?, lookup(c)?);
            if pi == terminal {
                return Err(StructureError::TerminalHasChildren(c.clone()));
            }
            if !seen_edges.insert((pi, ci)) {
                return Err(StructureError::DuplicateEdge { parent: p.clone(), child: c.clone() });
            }
            parents[ci].push(pi);
        }

        let topo_order = topological_order(&variables, &parents)?;
        Ok(NetworkStructure { variables, edges, parents, topo_order, terminal })
    }

    /// Five factor variables, each a direct parent of `change_status`.
    pub fn default_review() -> Self {
        let factors = vec![
            CategoricalVariable::of::<AgeCategory>(var::AGE),
            CategoricalVariable::of::<SizeCategory>(var::SIZE),
            CategoricalVariable::of::<PatchesCategory>(var::NUM_PATCHES),
            CategoricalVariable::of::<TestVerdict>(var::TEST_VERDICT),
            CategoricalVariable::of::<PeerReview>(var::PEER_REVIEW),
        ];
        let edges = factors
            .iter()
            .map(|v| (v.name.clone(), TERMINAL.to_string()))
            .collect();
        let mut variables = factors;
        variables.push(CategoricalVariable::of::<Outcome>(TERMINAL));
        NetworkStructure::new(variables, edges).expect("default structure is valid")
    }

    pub fn variables(&self) -> &[CategoricalVariable] {
        &self.variables
    }

    pub fn edges(&self) -> &[(String, String)] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn variable(&self, index: usize) -> &CategoricalVariable {
        &self.variables[index]
    }

    pub fn parents(&self, index: usize) -> &[usize] {
        &self.parents[index]
    }

    pub fn parent_names(&self, index: usize) -> Vec<String> {
        self.parents[index]
            .iter()
            .map(|&p| self.variables[p].name.clone())
            .collect()
    }

    pub fn topological_order(&self) -> &[usize] {
        &self.topo_order
    }

    pub fn terminal(&self) -> usize {
        self.terminal
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index_of(name).is_some()
    }
}

// Kahn's algorithm, lowest declaration index first so the order is stable.
fn topological_order(
    variables: &[CategoricalVariable],
    parents: &[Vec<usize>],
) -> Result<Vec<usize>, StructureError> {
    let n = variables.len();
    let mut indegree: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut children = vec![Vec::new(); n];
    for (child, ps) in parents.iter().enumerate() {
        for &p in ps {
            children[p].push(child);
        }
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(next) = ready.pop_first() {
        order.push(next);
        for &c in &children[next] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.insert(c);
            }
        }
    }
    if order.len() < n {
        let stuck = (0..n).find(|&i| indegree[i] > 0).expect("some node is left");
        return Err(StructureError::Cycle(variables[stuck].name.clone()));
    }
    Ok(order)
}
