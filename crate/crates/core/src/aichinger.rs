//! Witnesses for the equation `f(x_1 + ... + x_{m+1}) = Σ_i g_i(x_1, .., x̂_i, .., x_{m+1})`,
//! where `g_i` never sees its omitted argument.

use serde_json::{json, Value};

use crate::canonical::use_closed_forms;
use crate::carrier::{Carrier, Element};
use crate::diffcalc::{forward_difference, frechet_test};
use crate::error::{Error, Result};
use crate::funcspace::{FunctionHandle, PolyExpression};
use crate::serial::element_to_json;
use crate::verdict::{scan, Strategy, Verdict};

/// One signed evaluation `sign · f(z + Σ_{j: pattern[j]} x_j)` inside a `g_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessTerm {
    pub sign: i8,
    /// Indexed by all `m + 1` argument slots; the omitted slot is always false.
    pub pattern: Vec<bool>,
}

/// Functions `g_1, ..., g_{m+1}` of `m` arguments each.
///
/// When `translated` is set the witness certifies `x -> f(basepoint + x)`
/// instead of `f`.
#[derive(Debug, Clone)]
pub struct AichingerWitness {
    pub m: usize,
    pub gs: Vec<FunctionHandle>,
    pub basepoint: Element,
    pub translated: bool,
    /// Per-`g_i` term lists, when the witness came from an expansion.
    pub terms: Option<Vec<Vec<WitnessTerm>>>,
}

impl AichingerWitness {
    /// Wraps user-supplied functions certifying `f` itself.
    pub fn from_functions(m: usize, gs: Vec<FunctionHandle>) -> Result<Self> {
        if gs.len() != m + 1 {
            return Err(Error::ArityMismatch {
                expected: m + 1,
                found: gs.len(),
            });
        }
        for g in &gs {
            if g.arity() != m {
                return Err(Error::ArityMismatch {
                    expected: m,
                    found: g.arity(),
                });
            }
        }
        let basepoint = gs[0].domain().canonical_basepoint();
        Ok(AichingerWitness {
            m,
            gs,
            basepoint,
            translated: false,
            terms: None,
        })
    }

    /// `g_i` applied to a full `(m+1)`-tuple, dropping slot `i`.
    pub fn evaluate_omitting(&self, i: usize, args: &[Element]) -> Result<Element> {
        let rest: Vec<Element> = args
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, a)| a.clone())
            .collect();
        self.gs[i].evaluate(&rest)
    }

    /// Closed forms of the `g_i` in the variables of all `m + 1` slots.
    pub fn embedded_closed_forms(&self) -> Option<Vec<PolyExpression>> {
        let p = self.gs[0].domain().rank();
        let total = (self.m + 1) * p;
        self.gs
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let expr = g.expression()?;
                let images: Vec<PolyExpression> = (0..self.m * p)
                    .map(|v| {
                        let (slot, c) = (v / p, v % p);
                        let full = if slot < i { slot } else { slot + 1 };
                        PolyExpression::var(total, full * p + c)
                    })
                    .collect();
                Some(expr.substitute(&images, total))
            })
            .collect()
    }

    pub fn to_json(&self) -> Value {
        let gs: Vec<Value> = self
            .gs
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let mut entry = json!({
                    "omits": i + 1,
                    "arity": g.arity(),
                    "describe": g.describe(),
                });
                if let Some(terms) = &self.terms {
                    entry["terms"] = Value::Array(
                        terms[i]
                            .iter()
                            .map(|t| {
                                json!({
                                    "sign": t.sign,
                                    "pattern": t.pattern.iter().map(|&b| u8::from(b)).collect::<Vec<_>>(),
                                })
                            })
                            .collect(),
                    );
                }
                entry
            })
            .collect();
        json!({
            "m": self.m,
            "basepoint": element_to_json(&self.basepoint),
            "translated": self.translated,
            "gs": gs,
        })
    }
}

fn require_unary(f: &FunctionHandle) -> Result<()> {
    if f.arity() == 1 {
        Ok(())
    } else {
        Err(Error::ArityMismatch {
            expected: 1,
            found: f.arity(),
        })
    }
}

fn sum_all(xs: &[Element]) -> Result<Option<Element>> {
    let mut it = xs.iter();
    let Some(first) = it.next() else {
        return Ok(None);
    };
    it.try_fold(first.clone(), |acc, x| acc.add(x)).map(Some)
}

/// The point at which `f` is read for argument tuple `xs`.
fn left_point(w: &AichingerWitness, xs: &[Element]) -> Result<Element> {
    let sum = sum_all(xs)?;
    match (w.translated, sum) {
        (true, Some(s)) => w.basepoint.add(&s),
        (true, None) => Ok(w.basepoint.clone()),
        (false, Some(s)) => Ok(s),
        (false, None) => Err(Error::InvalidArgument("empty argument tuple".into())),
    }
}

/// Checks the equation over tuples `(x_1, ..., x_{m+1})`.
pub fn verify(f: &FunctionHandle, w: &AichingerWitness, strategy: Strategy) -> Result<Verdict> {
    require_unary(f)?;
    if w.gs.len() != w.m + 1 {
        return Err(Error::ArityMismatch {
            expected: w.m + 1,
            found: w.gs.len(),
        });
    }
    let slots = vec![f.domain().clone(); w.m + 1];
    let zero = f.codomain().zero()?;
    scan(&slots, strategy, |xs| {
        let lhs = f.evaluate(&[left_point(w, xs)?])?;
        let mut rhs = zero.clone();
        for i in 0..=w.m {
            rhs = rhs.add(&w.evaluate_omitting(i, xs)?)?;
        }
        Ok(lhs == rhs)
    })
}

/// Term lists of the regrouped expansion: the term with pattern `ε != 1`
/// goes to the smallest `i` with `ε_i = 0`, with its sign flipped.
fn regroup(m: usize) -> Vec<Vec<WitnessTerm>> {
    let n = m + 1;
    let full = (1usize << n) - 1;
    let mut groups = vec![Vec::new(); n];
    for mask in 0..full {
        let owner = (!mask).trailing_zeros() as usize;
        let expansion_sign: i8 = if (n - mask.count_ones() as usize).is_multiple_of(2) { 1 } else { -1 };
        groups[owner].push(WitnessTerm {
            sign: -expansion_sign,
            pattern: (0..n).map(|j| mask >> j & 1 == 1).collect(),
        });
    }
    groups
}

fn closed_form_g(
    expr: &PolyExpression,
    z: &Element,
    m: usize,
    i: usize,
    terms: &[WitnessTerm],
) -> PolyExpression {
    let p = expr.nvars();
    let nvars = m * p;
    let zc = z.to_rationals();
    let mut total = PolyExpression::zero(nvars);
    for t in terms {
        let images: Vec<PolyExpression> = (0..p)
            .map(|c| {
                let mut img = PolyExpression::constant(nvars, zc[c].clone());
                for j in (0..=m).filter(|&j| t.pattern[j]) {
                    let slot = if j < i { j } else { j - 1 };
                    img = img.add(&PolyExpression::var(nvars, slot * p + c));
                }
                img
            })
            .collect();
        let v = expr.substitute(&images, nvars);
        total = if t.sign > 0 { total.add(&v) } else { total.sub(&v) };
    }
    total
}

/// Builds the witness without checking that `f` has degree at most `m`.
pub fn construct_witnesses_unchecked(f: &FunctionHandle, m: usize, z: &Element) -> Result<AichingerWitness> {
    require_unary(f)?;
    if !f.domain().contains(z) {
        return Err(Error::NoBasepoint(f.domain().to_string()));
    }
    let groups = regroup(m);
    let translated = !z.is_zero() || !f.domain().has_zero();
    let symbolic = f
        .expression()
        .filter(|_| use_closed_forms(f.domain(), f.codomain()));
    let mut gs = Vec::with_capacity(m + 1);
    for (i, terms) in groups.iter().enumerate() {
        if let Some(expr) = symbolic {
            let closed = closed_form_g(expr, z, m, i, terms);
            gs.push(FunctionHandle::from_expression(
                closed,
                f.domain().clone(),
                m,
                f.codomain().clone(),
            )?);
            continue;
        }
        let (g, base, terms) = (f.clone(), z.clone(), terms.clone());
        let zero = f.codomain().zero()?;
        gs.push(FunctionHandle::derived(
            f.domain(),
            m,
            f.codomain(),
            format!("g{}", i + 1),
            move |rest| {
                let mut acc = zero.clone();
                for t in &terms {
                    let mut point = base.clone();
                    for j in (0..=m).filter(|&j| t.pattern[j]) {
                        let slot = if j < i { j } else { j - 1 };
                        point = point.add(&rest[slot])?;
                    }
                    let v = g.evaluate(&[point])?;
                    acc = if t.sign > 0 { acc.add(&v)? } else { acc.sub(&v)? };
                }
                Ok(acc)
            },
        ));
    }
    Ok(AichingerWitness {
        m,
        gs,
        basepoint: z.clone(),
        translated,
        terms: Some(groups),
    })
}

/// Builds `g_1, ..., g_{m+1}` from the vanishing of the order-`(m+1)` mixed
/// difference at `z`, after checking that vanishing with `precheck`.
pub fn construct_witnesses(f: &FunctionHandle, m: usize, z: &Element, precheck: Strategy) -> Result<AichingerWitness> {
    require_unary(f)?;
    if !f.domain().contains(z) {
        return Err(Error::NoBasepoint(f.domain().to_string()));
    }
    let v = frechet_test(f, m + 1, precheck)?;
    if !v.holds {
        let ce: Vec<String> = v
            .counterexample
            .unwrap_or_default()
            .iter()
            .map(|e| e.to_string())
            .collect();
        return Err(Error::NotPolynomial(format!(
            "order-{} differences do not vanish at ({})",
            m + 1,
            ce.join(", ")
        )));
    }
    construct_witnesses_unchecked(f, m, z)
}

/// One step of degree lowering: `f_1 = Δ_h f` with the witness
/// `g_{i,1}(x_2, ..) = g_i(u + h, x_2, ..) - g_i(u, x_2, ..)` for `i >= 2`,
/// where `u` is zero when the domain has one and the all-ones element
/// otherwise. Returns no witness when `m = 0`: the difference vanishes and
/// the certifying sum is empty.
pub fn peel(f: &FunctionHandle, w: &AichingerWitness, h: &Element) -> Result<(FunctionHandle, Option<AichingerWitness>)> {
    require_unary(f)?;
    f.domain().check(h)?;
    if w.gs.iter().any(|g| g.domain() != f.domain()) {
        return Err(Error::DescriptorMismatch {
            expected: f.domain().to_string(),
            found: w.gs[0].domain().to_string(),
        });
    }
    let f1 = forward_difference(f, h)?;
    if w.m == 0 {
        return Ok((f1, None));
    }
    let domain: &Carrier = f.domain();
    let (u, basepoint, translated) = match domain.zero() {
        Ok(zero) => (zero, w.basepoint.clone(), w.translated),
        Err(_) => {
            let u = domain.ones();
            let base = if w.translated { w.basepoint.add(&u)? } else { u.clone() };
            (u, base, true)
        }
    };
    let shifted = u.add(h)?;
    let gs = w.gs[1..]
        .iter()
        .enumerate()
        .map(|(k, g)| {
            let (g, lo, hi) = (g.clone(), u.clone(), shifted.clone());
            FunctionHandle::derived(domain, w.m - 1, f.codomain(), format!("peel(g{})", k + 2), move |rest| {
                let mut at_hi = Vec::with_capacity(rest.len() + 1);
                at_hi.push(hi.clone());
                at_hi.extend_from_slice(rest);
                let mut at_lo = at_hi.clone();
                at_lo[0] = lo.clone();
                g.evaluate(&at_hi)?.sub(&g.evaluate(&at_lo)?)
            })
        })
        .collect();
    Ok((
        f1,
        Some(AichingerWitness {
            m: w.m - 1,
            gs,
            basepoint,
            translated,
            terms: None,
        }),
    ))
}

/// Checks that `f` vanishes on the tested points; the certificate for a
/// fully peeled function.
pub fn vanishes(f: &FunctionHandle, strategy: Strategy) -> Result<Verdict> {
    scan(&vec![f.domain().clone(); f.arity()], strategy, |x| Ok(f.evaluate(x)?.is_zero()))
}
