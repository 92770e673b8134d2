//! Strategies for "for all" checks and the verdicts they produce.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::carrier::{Carrier, Element};
use crate::error::{Error, Result};
use crate::serial::tuple_to_json;

pub const DEFAULT_SAMPLES: usize = 1000;
pub const DEFAULT_BOUND: u32 = 10;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// How the tuples of a check are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Every tuple of a finite product, up to `budget` tuples.
    Exhaustive { budget: u64 },
    /// `count` tuples drawn from a box of radius `bound` with a seeded RNG.
    Sampled { count: usize, seed: u64, bound: u32 },
}

impl Default for Strategy {
    fn default() -> Self {
        Strategy::sampled(DEFAULT_SAMPLES, DEFAULT_SEED)
    }
}

impl Strategy {
    pub fn exhaustive() -> Self {
        Strategy::Exhaustive {
            budget: DEFAULT_BUDGET,
        }
    }

    pub fn sampled(count: usize, seed: u64) -> Self {
        Strategy::Sampled {
            count,
            seed,
            bound: DEFAULT_BOUND,
        }
    }

    /// Exhaustive when `carrier` is finite, otherwise the default sampler
    /// with the given seed.
    pub fn auto(carrier: &Carrier, seed: u64) -> Self {
        if carrier.is_finite() {
            Strategy::exhaustive()
        } else {
            Strategy::sampled(DEFAULT_SAMPLES, seed)
        }
    }

    pub fn is_exhaustive(&self) -> bool {
        matches!(self, Strategy::Exhaustive { .. })
    }

    pub fn to_json(&self) -> Value {
        match *self {
            Strategy::Exhaustive { budget } => json!({"kind": "exhaustive", "budget": budget}),
            Strategy::Sampled { count, seed, bound } => {
                json!({"kind": "sampled", "count": count, "seed": seed, "bound": bound})
            }
        }
    }
}

/// Outcome of a universally quantified check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub holds: bool,
    /// First failing tuple in scan order, present exactly when `holds` is false.
    pub counterexample: Option<Vec<Element>>,
    pub strategy: Strategy,
    /// Number of tuples examined, including the failing one.
    pub checked: u128,
}

impl Verdict {
    pub fn to_json(&self) -> Value {
        json!({
            "holds": self.holds,
            "counterexample": self.counterexample.as_deref().map(tuple_to_json),
            "strategy": self.strategy.to_json(),
            "checked": self.checked.to_string(),
        })
    }

    /// Conjunction of two verdicts; keeps the first counterexample.
    pub fn and(self, other: Verdict) -> Verdict {
        if !self.holds {
            return self;
        }
        Verdict {
            holds: other.holds,
            counterexample: other.counterexample,
            strategy: self.strategy,
            checked: self.checked + other.checked,
        }
    }
}

/// Number of tuples in the product of `slots`, if all are finite.
pub fn tuple_count(slots: &[Carrier]) -> Result<u128> {
    slots.iter().try_fold(1u128, |acc, c| {
        let n = c
            .cardinality()
            .ok_or_else(|| Error::InfiniteCarrier(c.to_string()))?;
        Ok(acc.saturating_mul(n))
    })
}

fn tuple_at(slots: &[Carrier], mut index: u128) -> Vec<Element> {
    let mut out = Vec::with_capacity(slots.len());
    for c in slots.iter().rev() {
        let n = c.cardinality().expect("finite slot");
        out.push(c.element_at(index % n).expect("finite slot"));
        index /= n;
    }
    out.reverse();
    out
}

/// Checks `pred` on the tuples of `slots` selected by `strategy`.
///
/// The scan runs in parallel; the reported counterexample is always the first
/// failure in scan order, so results do not depend on scheduling.
pub fn scan<P>(slots: &[Carrier], strategy: Strategy, pred: P) -> Result<Verdict>
where
    P: Fn(&[Element]) -> Result<bool> + Sync,
{
    let failure = |args: Vec<Element>| -> Option<Result<Vec<Element>>> {
        match pred(&args) {
            Ok(true) => None,
            Ok(false) => Some(Ok(args)),
            Err(e) => Some(Err(e)),
        }
    };
    let (first, total) = match strategy {
        Strategy::Exhaustive { budget } => {
            let total = tuple_count(slots)?;
            if total > budget as u128 {
                return Err(Error::BudgetExceeded {
                    needed: total,
                    budget,
                });
            }
            let first = (0..total as u64)
                .into_par_iter()
                .map(|i| (i, tuple_at(slots, i as u128)))
                .find_map_first(|(i, args)| failure(args).map(|r| r.map(|a| (i as u128, a))));
            (first, total)
        }
        Strategy::Sampled { count, seed, bound } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let tuples: Vec<Vec<Element>> = (0..count)
                .map(|_| slots.iter().map(|c| c.sample(&mut rng, bound)).collect())
                .collect();
            let first = tuples
                .into_par_iter()
                .enumerate()
                .find_map_first(|(i, args)| failure(args).map(|r| r.map(|a| (i as u128, a))));
            (first, count as u128)
        }
    };
    match first {
        None => Ok(Verdict {
            holds: true,
            counterexample: None,
            strategy,
            checked: total,
        }),
        Some(Ok((index, args))) => Ok(Verdict {
            holds: false,
            counterexample: Some(args),
            strategy,
            checked: index + 1,
        }),
        Some(Err(e)) => Err(e),
    }
}
