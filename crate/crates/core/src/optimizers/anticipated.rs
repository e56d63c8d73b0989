//! Anticipated loss `L̄`: the baseline subtracted from the realized loss
//! before it modulates the plasticity update.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};

pub const DEFAULT_MEMORY: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Discount {
    /// The most recent loss.
    Previous,
    /// No baseline.
    Zero,
    /// `γ_ℓ ∝ e^{-λℓ}`
    Exponential { lambda: f64 },
    /// `γ_ℓ ∝ ℓ^{-λ}`
    Polynomial { lambda: f64 },
}

/// How `L̄` is formed from the last `memory` realized losses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnticipatedLossStrategy {
    pub discount: Discount,
    #[serde(default = "default_memory")]
    pub memory: usize,
}

fn default_memory() -> usize {
    DEFAULT_MEMORY
}

impl Default for AnticipatedLossStrategy {
    fn default() -> Self {
        Self::previous()
    }
}

impl AnticipatedLossStrategy {
    pub fn previous() -> Self {
        Self {
            discount: Discount::Previous,
            memory: DEFAULT_MEMORY,
        }
    }

    pub fn zero() -> Self {
        Self {
            discount: Discount::Zero,
            memory: DEFAULT_MEMORY,
        }
    }

    pub fn exponential(lambda: f64, memory: usize) -> Result<Self> {
        Self {
            discount: Discount::Exponential { lambda },
            memory,
        }
        .validated()
    }

    pub fn polynomial(lambda: f64, memory: usize) -> Result<Self> {
        Self {
            discount: Discount::Polynomial { lambda },
            memory,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        if self.memory == 0 {
            return Err(Error::InvalidParameter {
                name: "memory",
                reason: "must be at least 1",
            });
        }
        match self.discount {
            Discount::Exponential { lambda } | Discount::Polynomial { lambda } => {
                positive("lambda", lambda)?;
            }
            Discount::Previous | Discount::Zero => {}
        }
        Ok(self)
    }

    /// Renormalized weights `γ_1, …, γ_m` (most recent first) for `available`
    /// past losses, `m = min(available, memory)`.
    pub fn weights(&self, available: usize) -> Vec<f64> {
        let m = available.min(self.memory);
        let raw: Vec<f64> = match self.discount {
            Discount::Zero => return vec![0.0; m],
            Discount::Previous => (1..=m).map(|l| if l == 1 { 1.0 } else { 0.0 }).collect(),
            Discount::Exponential { lambda } => {
                (1..=m).map(|l| (-lambda * l as f64).exp()).collect()
            }
            Discount::Polynomial { lambda } => {
                (1..=m).map(|l| (l as f64).powf(-lambda)).collect()
            }
        };
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|g| g / total).collect()
    }
}

/// `L̄` from a history ordered oldest to newest.
pub fn anticipated_loss(history: &[f64], strategy: &AnticipatedLossStrategy) -> Result<f64> {
    if strategy.discount == Discount::Zero {
        return Ok(0.0);
    }
    let newest = *history.last().ok_or(Error::EmptyHistory)?;
    if strategy.discount == Discount::Previous {
        return Ok(newest);
    }
    let weights = strategy.weights(history.len());
    Ok(weights
        .iter()
        .zip(history.iter().rev())
        .map(|(g, l)| g * l)
        .sum())
}

/// Bounded record of realized losses, oldest first.
#[derive(Debug, Clone, PartialEq)]
pub struct LossHistory {
    entries: VecDeque<f64>,
    memory: usize,
}

impl LossHistory {
    pub fn new(memory: usize) -> Self {
        Self {
            entries: VecDeque::with_capacity(memory),
            memory: memory.max(1),
        }
    }

    pub fn push(&mut self, loss: f64) {
        if self.entries.len() == self.memory {
            self.entries.pop_front();
        }
        self.entries.push_back(loss);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn latest(&self) -> Option<f64> {
        self.entries.back().copied()
    }

    pub fn anticipated(&self, strategy: &AnticipatedLossStrategy) -> Result<f64> {
        let (front, back) = self.entries.as_slices();
        if front.is_empty() {
            anticipated_loss(back, strategy)
        } else {
            let joined: Vec<f64> = self.entries.iter().copied().collect();
            anticipated_loss(&joined, strategy)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn previous_takes_latest() {
        let s = AnticipatedLossStrategy::previous();
        assert_eq!(anticipated_loss(&[3.0, 0.2, 0.7], &s).unwrap(), 0.7);
    }

    #[test]
    fn zero_needs_no_history() {
        assert_eq!(
            anticipated_loss(&[], &AnticipatedLossStrategy::zero()).unwrap(),
            0.0
        );
    }

    #[test]
    fn empty_history_is_an_error() {
        assert_eq!(
            anticipated_loss(&[], &AnticipatedLossStrategy::previous()),
            Err(Error::EmptyHistory)
        );
        let s = AnticipatedLossStrategy::polynomial(2.0, 4).unwrap();
        assert_eq!(anticipated_loss(&[], &s), Err(Error::EmptyHistory));
    }

    #[test]
    fn exponential_two_terms() {
        let s = AnticipatedLossStrategy::exponential(1.0, 2).unwrap();
        let got = anticipated_loss(&[2.0, 1.0], &s).unwrap();
        let e1 = (-1f64).exp();
        let e2 = (-2f64).exp();
        let expected = (e1 * 1.0 + e2 * 2.0) / (e1 + e2);
        assert!((got - expected).abs() < 1e-15);
        assert!((got - 1.268_94).abs() < 1e-5);
    }

    #[test]
    fn memory_truncates() {
        let s = AnticipatedLossStrategy::exponential(0.5, 2).unwrap();
        let full = anticipated_loss(&[100.0, 2.0, 1.0], &s).unwrap();
        let short = anticipated_loss(&[2.0, 1.0], &s).unwrap();
        assert_eq!(full, short);
    }

    #[test]
    fn validation() {
        assert!(AnticipatedLossStrategy::exponential(0.0, 3).is_err());
        assert!(AnticipatedLossStrategy::polynomial(1.0, 0).is_err());
    }

    #[test]
    fn history_is_bounded() {
        let mut h = LossHistory::new(3);
        for i in 0..10 {
            h.push(f64::from(i));
        }
        assert_eq!(h.len(), 3);
        assert_eq!(h.latest(), Some(9.0));
        let s = AnticipatedLossStrategy::polynomial(1.0, 3).unwrap();
        assert_eq!(
            h.anticipated(&s).unwrap(),
            anticipated_loss(&[7.0, 8.0, 9.0], &s).unwrap()
        );
    }

    fn strategies() -> impl Strategy<Value = AnticipatedLossStrategy> {
        prop_oneof![
            Just(AnticipatedLossStrategy::previous()),
            (0.01f64..5.0, 1usize..40)
                .prop_map(|(l, m)| AnticipatedLossStrategy::exponential(l, m).unwrap()),
            (0.01f64..5.0, 1usize..40)
                .prop_map(|(l, m)| AnticipatedLossStrategy::polynomial(l, m).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn weights_are_a_discount(s in strategies(), available in 1usize..60) {
            let w = s.weights(available);
            prop_assert_eq!(w.len(), available.min(s.memory));
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(w.iter().all(|g| *g >= 0.0));
            prop_assert!(w.windows(2).all(|p| p[1] <= p[0]));
        }

        #[test]
        fn constant_history_is_fixed_point(s in strategies(), c in -1e3f64..1e3, n in 1usize..50) {
            let h = vec![c; n];
            let got = anticipated_loss(&h, &s).unwrap();
            prop_assert!((got - c).abs() <= 1e-12 * c.abs().max(1.0));
        }
    }
}
