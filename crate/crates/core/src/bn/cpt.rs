use super::error::CptError;

/// Maximum deviation of a CPT row sum from 1.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Conditional probability table for one variable.
///
/// Rows are laid out in mixed radix over the parent states, first parent most
/// significant. Each row holds one probability per state of the variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    variable: String,
    parent_order: Vec<String>,
    parent_cards: Vec<usize>,
    states: usize,
    probs: Vec<f64>,
}

impl Cpt {
    pub fn new(
        variable: impl Into<String>,
        parent_order: Vec<String>,
        parent_cards: Vec<usize>,
        states: usize,
        probs: Vec<f64>,
    ) -> Result<Self, CptError> {
        let variable = variable.into();
        let rows: usize = parent_cards.iter().product();
        if probs.len() != rows * states || parent_order.len() != parent_cards.len() {
            return Err(CptError::Shape {
                variable,
                expected: rows * states,
                actual: probs.len(),
            });
        }
        for (row, chunk) in probs.chunks(states).enumerate() {
            if let Some(&value) = chunk.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(CptError::OutOfRange { variable, row, value });
            }
            let sum: f64 = chunk.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(CptError::RowSum { variable, row, sum });
            }
        }
        Ok(Cpt { variable, parent_order, parent_cards, states, probs })
    }

    pub fn uniform(
        variable: impl Into<String>,
        parent_order: Vec<String>,
        parent_cards: Vec<usize>,
        states: usize,
    ) -> Self {
        let rows: usize = parent_cards.iter().product();
        let probs = vec![1.0 / states as f64; rows * states];
        Cpt::new(variable, parent_order, parent_cards, states, probs).expect("uniform rows are valid")
    }

    pub fn variable(&self) -> &str {
        &self.variable
    }

    pub fn parent_order(&self) -> &[String] {
        &self.parent_order
    }

    pub fn parent_cards(&self) -> &[usize] {
        &self.parent_cards
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn row_count(&self) -> usize {
        self.parent_cards.iter().product()
    }

    pub fn row(&self, config: usize) -> &[f64] {
        &self.probs[config * self.states..(config + 1) * self.states]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.probs.chunks(self.states)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    /// Row index for a parent state tuple.
    pub fn config_index(&self, parent_states: &[usize]) -> usize {
        debug_assert_eq!(parent_states.len(), self.parent_cards.len());
        parent_states
            .iter()
            .zip(&self.parent_cards)
            .fold(0, |acc, (&s, &card)| acc * card + s)
    }

    /// Parent state tuple for a row index; inverse of [`Cpt::config_index`].
    pub fn config_states(&self, mut config: usize) -> Vec<usize> {
        let mut out = vec![0; self.parent_cards.len()];
        for (slot, &card) in out.iter_mut().zip(&self.parent_cards).rev() {
            *slot = config % card;
            config /= card;
        }
        out
    }

    pub fn prob(&self, parent_states: &[usize], state: usize) -> f64 {
        self.row(self.config_index(parent_states))[state]
    }
}
