//! Exhaustive comparison of the difference and witness characterizations over
//! all functions between two small finite groups, and a search separating the
//! based and shifted difference conditions on a semigroup without zero.

use num_rational::BigRational;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::aichinger::{construct_witnesses_unchecked, verify};
use crate::carrier::{Carrier, Element};
use crate::diffcalc::{frechet_shifted_test, frechet_test};
use crate::error::{Error, Result};
use crate::funcspace::FunctionHandle;
use crate::verdict::{Strategy, Verdict};

const MAX_LISTED: usize = 16;

/// Counts from [`equiv_scan`]. Functions are numbered by their value tables:
/// index `i` has value digit `k` (base `|codomain|`, least significant first)
/// at the `k`-th domain element.
#[derive(Debug, Clone)]
pub struct CensusReport {
    pub domain: Carrier,
    pub codomain: Carrier,
    pub order: usize,
    pub total: u64,
    /// Functions whose differences of order `order + 1` vanish everywhere.
    pub frechet: u64,
    /// Functions for which the constructed witness verifies.
    pub witnessed: u64,
    /// Functions satisfying the shifted condition, when requested.
    pub shifted: Option<u64>,
    /// Indices where the characterizations disagree (first few only).
    pub disagreements: Vec<u64>,
    pub disagreement_count: u64,
    /// Indices passing the difference check, ascending.
    pub members: Vec<u64>,
}

impl CensusReport {
    pub fn coincide(&self) -> bool {
        self.disagreement_count == 0
    }

    pub fn to_json(&self) -> Value {
        json!({
            "domain": self.domain,
            "codomain": self.codomain,
            "m": self.order,
            "total": self.total,
            "frechet": self.frechet,
            "witnessed": self.witnessed,
            "shifted": self.shifted,
            "coincide": self.coincide(),
            "disagreement_count": self.disagreement_count,
            "disagreements": self.disagreements,
            "members": self.members,
        })
    }
}

/// Values of the function with table index `index`.
pub fn table_values(domain: &Carrier, codomain: &Carrier, mut index: u64) -> Result<Vec<Element>> {
    let n = domain.cardinality().ok_or_else(|| Error::InfiniteCarrier(domain.to_string()))?;
    let base = codomain
        .cardinality()
        .ok_or_else(|| Error::InfiniteCarrier(codomain.to_string()))? as u64;
    (0..n)
        .map(|_| {
            let v = codomain.element_at((index % base) as u128);
            index /= base;
            v
        })
        .collect()
}

fn classify(domain: &Carrier, codomain: &Carrier, m: usize, index: u64, shifted: bool) -> Result<[bool; 3]> {
    let f = FunctionHandle::from_values(domain, 1, codomain, table_values(domain, codomain, index)?)?;
    let strategy = Strategy::exhaustive();
    let c = frechet_test(&f, m + 1, strategy)?.holds;
    let w = construct_witnesses_unchecked(&f, m, &domain.zero()?)?;
    let a = verify(&f, &w, strategy)?.holds;
    let b = if shifted {
        frechet_shifted_test(&f, m + 1, strategy)?.holds
    } else {
        c
    };
    Ok([c, a, b])
}

/// Classifies every function `domain -> codomain` by the order-`(m+1)`
/// difference condition and by witness verification at order `m`.
///
/// `budget` caps the number of functions, `|codomain|^|domain|`.
pub fn equiv_scan(domain: &Carrier, codomain: &Carrier, m: usize, budget: u64, shifted: bool) -> Result<CensusReport> {
    for c in [domain, codomain] {
        if !c.is_finite() {
            return Err(Error::InfiniteCarrier(c.to_string()));
        }
        if !c.is_group() {
            return Err(Error::NotAGroup(c.to_string()));
        }
    }
    let n = domain.cardinality().unwrap_or(u128::MAX);
    let base = codomain.cardinality().unwrap_or(u128::MAX);
    let needed = u32::try_from(n)
        .ok()
        .and_then(|e| base.checked_pow(e))
        .unwrap_or(u128::MAX);
    if needed > u128::from(budget) {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let total = needed as u64;
    let rows: Vec<[bool; 3]> = (0..total)
        .into_par_iter()
        .map(|i| classify(domain, codomain, m, i, shifted))
        .collect::<Result<_>>()?;
    let mut report = CensusReport {
        domain: domain.clone(),
        codomain: codomain.clone(),
        order: m,
        total,
        frechet: 0,
        witnessed: 0,
        shifted: shifted.then_some(0),
        disagreements: Vec::new(),
        disagreement_count: 0,
        members: Vec::new(),
    };
    for (i, [c, a, b]) in rows.into_iter().enumerate() {
        report.frechet += u64::from(c);
        report.witnessed += u64::from(a);
        if let Some(s) = report.shifted.as_mut() {
            *s += u64::from(b);
        }
        if c {
            report.members.push(i as u64);
        }
        if c != a || c != b {
            report.disagreement_count += 1;
            if report.disagreements.len() < MAX_LISTED {
                report.disagreements.push(i as u64);
            }
        }
    }
    Ok(report)
}

/// A function satisfying the shifted condition but not the based one.
#[derive(Debug, Clone)]
pub struct Separation {
    pub function: FunctionHandle,
    pub spike_at: i64,
    pub shifted: Verdict,
    pub based: Verdict,
}

impl Separation {
    pub fn to_json(&self) -> Value {
        json!({
            "function": self.function.describe(),
            "spike_at": self.spike_at,
            "shifted": self.shifted.to_json(),
            "based": self.based.to_json(),
        })
    }
}

/// Searches the functions `x^(m-1) + [x = k]` on the positive integers, for
/// `k = 1..=max_spike`, for one whose order-`m` shifted differences vanish
/// while its based differences do not.
pub fn separate_shifted(m: usize, max_spike: i64, strategy: Strategy) -> Result<Option<Separation>> {
    if m == 0 {
        return Err(Error::InvalidArgument("order must be positive".into()));
    }
    let domain = Carrier::naturals_from_one(1);
    let codomain = Carrier::free_abelian(1);
    let exponent = (m - 1) as i32;
    for k in 1..=max_spike {
        let f = FunctionHandle::derived(&domain, 1, &codomain, format!("x^{exponent} + [x = {k}]"), move |x| {
            let v = x[0].to_rationals().remove(0);
            let spike = if v == BigRational::from_integer(k.into()) { 1 } else { 0 };
            Carrier::free_abelian(1).element(vec![v.pow(exponent) + BigRational::from_integer(spike.into())])
        });
        let shifted = frechet_shifted_test(&f, m, strategy)?;
        if !shifted.holds {
            continue;
        }
        let based = frechet_test(&f, m, strategy)?;
        if !based.holds {
            return Ok(Some(Separation {
                function: f,
                spike_at: k,
                shifted,
                based,
            }));
        }
    }
    Ok(None)
}
