//! The group of formal differences of a cancellative semigroup and the
//! extension of multiadditive maps and polynomial functions to it.

use num_rational::BigRational;
use num_traits::Signed;
use serde_json::{json, Value};

use crate::aichinger::{construct_witnesses, verify, AichingerWitness};
use crate::canonical::{decompose, is_multiadditive, is_symmetric, Decomposition, MultiAdditiveMap, PolarizeOptions};
use crate::carrier::{Carrier, Element};
use crate::diffcalc::frechet_test;
use crate::error::{Error, Result};
use crate::funcspace::{FunctionHandle, PolyExpression};
use crate::serial::element_to_json;
use crate::verdict::{scan, Strategy, Verdict};

/// The class of `plus - minus` in the group of differences.
#[derive(Debug, Clone)]
pub struct FormalDifference {
    plus: Element,
    minus: Element,
}

impl FormalDifference {
    pub fn new(plus: Element, minus: Element) -> Result<Self> {
        plus.carrier().check(&minus)?;
        Ok(FormalDifference { plus, minus })
    }

    pub fn plus(&self) -> &Element {
        &self.plus
    }

    pub fn minus(&self) -> &Element {
        &self.minus
    }

    pub fn carrier(&self) -> &Carrier {
        self.plus.carrier()
    }

    /// `(s, t) ~ (s', t')` iff `s + t' = s' + t`.
    pub fn diff_equals(&self, other: &FormalDifference) -> Result<bool> {
        Ok(self.plus.add(&other.minus)? == other.plus.add(&self.minus)?)
    }

    /// The class as an element of the group completion of the carrier.
    pub fn to_group_element(&self) -> Result<Element> {
        let group = self.carrier().group_completion_carrier();
        if group == *self.carrier() {
            return self.plus.sub(&self.minus);
        }
        let coords = self
            .plus
            .to_rationals()
            .into_iter()
            .zip(self.minus.to_rationals())
            .map(|(s, t)| s - t)
            .collect();
        group.element(coords)
    }

    /// A representative `(g + t, t)` of a group element, with `t` chosen
    /// coordinatewise as `|g| + offset` so both parts lie in `carrier`.
    pub fn from_group_element(carrier: &Carrier, g: &Element, offset: u32) -> Result<Self> {
        if !carrier.is_cancellative() {
            return Err(Error::NonCancellative(carrier.to_string()));
        }
        let group = carrier.group_completion_carrier();
        group.check(g)?;
        if group == *carrier {
            let t = match carrier.zero() {
                Ok(zero) => zero,
                Err(_) => carrier.ones(),
            };
            return FormalDifference::new(g.add(&t)?, t);
        }
        let offset = BigRational::from_integer(offset.max(1).into());
        let ts: Vec<BigRational> = g
            .to_rationals()
            .iter()
            .map(|c| c.abs().floor() + &offset)
            .collect();
        let ss: Vec<BigRational> = g.to_rationals().iter().zip(&ts).map(|(c, t)| c + t).collect();
        FormalDifference::new(carrier.element(ss)?, carrier.element(ts)?)
    }

    /// `(s + u, t + u)`, another representative of the same class.
    pub fn shifted(&self, u: &Element) -> Result<Self> {
        FormalDifference::new(self.plus.add(u)?, self.minus.add(u)?)
    }

    pub fn to_json(&self) -> Value {
        json!({"plus": element_to_json(&self.plus), "minus": element_to_json(&self.minus)})
    }
}

/// The extension of a symmetric multiadditive map to the group of
/// differences, evaluated by inclusion-exclusion over representatives.
#[derive(Debug, Clone)]
pub struct ExtendedMap {
    source: MultiAdditiveMap,
}

impl ExtendedMap {
    pub fn source(&self) -> &MultiAdditiveMap {
        &self.source
    }

    pub fn arity(&self) -> usize {
        self.source.arity()
    }

    /// `Σ_ε (-1)^(n-|ε|) A(u_1^ε_1, ..., u_n^ε_n)` with `u^1 = plus`, `u^0 = minus`.
    pub fn evaluate(&self, args: &[FormalDifference]) -> Result<Element> {
        let n = self.arity();
        if args.len() != n {
            return Err(Error::ArityMismatch {
                expected: n,
                found: args.len(),
            });
        }
        let mut acc = self.source.codomain().zero()?;
        for mask in 0usize..(1 << n) {
            let point: Vec<Element> = args
                .iter()
                .enumerate()
                .map(|(i, d)| {
                    if mask >> i & 1 == 1 {
                        d.plus.clone()
                    } else {
                        d.minus.clone()
                    }
                })
                .collect();
            let v = self.source.evaluate(&point)?;
            acc = if (n - mask.count_ones() as usize).is_multiple_of(2) {
                acc.add(&v)?
            } else {
                acc.sub(&v)?
            };
        }
        Ok(acc)
    }

    /// The same map on the group completion carrier.
    pub fn to_group_map(&self) -> MultiAdditiveMap {
        let domain = self.source.domain().clone();
        let group = domain.group_completion_carrier();
        let this = self.clone();
        let h = FunctionHandle::derived(&group, self.arity(), self.source.codomain(), "extended", move |gs| {
            let reps = gs
                .iter()
                .map(|g| FormalDifference::from_group_element(&domain, g, 1))
                .collect::<Result<Vec<_>>>()?;
            this.evaluate(&reps)
        });
        MultiAdditiveMap::new(h, true)
    }
}

const SPOT_CHECKS: usize = 50;

/// Extends a symmetric multiadditive map from `S^n` to `G^n`, after
/// spot-checking symmetry and additivity.
pub fn extend_multiadditive(a: &MultiAdditiveMap, seed: u64) -> Result<ExtendedMap> {
    if !a.domain().is_cancellative() {
        return Err(Error::NonCancellative(a.domain().to_string()));
    }
    let strategy = Strategy::sampled(SPOT_CHECKS, seed);
    let additive = is_multiadditive(a, strategy)?;
    if !additive.holds {
        return Err(Error::NotMultiadditive(format!(
            "slot additivity fails at {:?}",
            additive.counterexample.unwrap_or_default().iter().map(|e| e.to_string()).collect::<Vec<_>>()
        )));
    }
    if !is_symmetric(a, strategy)?.holds {
        return Err(Error::NotMultiadditive("map is not symmetric".into()));
    }
    Ok(ExtendedMap { source: a.clone() })
}

/// A polynomial function on `S` extended to the group of differences.
#[derive(Debug, Clone)]
pub struct PolynomialExtension {
    pub decomposition: Decomposition,
    pub components: Vec<ExtendedMap>,
    /// `F` on the group completion carrier.
    pub function: FunctionHandle,
}

impl PolynomialExtension {
    /// `F` at the class of a formal difference.
    pub fn evaluate_difference(&self, d: &FormalDifference) -> Result<Element> {
        let mut acc = self.decomposition.constant_term()?;
        for c in &self.components[1..] {
            acc = acc.add(&c.evaluate(&vec![d.clone(); c.arity()])?)?;
        }
        Ok(acc)
    }

    /// Closed form of `F` when every component has one.
    pub fn closed_form(&self) -> Option<String> {
        let p = self.function.domain().rank();
        let mut total = PolyExpression::zero(p);
        for c in &self.decomposition.components {
            let e = c.expression()?;
            let images: Vec<PolyExpression> = (0..c.arity() * p).map(|i| PolyExpression::var(p, i % p)).collect();
            total = total.add(&e.substitute(&images, p));
        }
        Some(self.function.layout().render(&total))
    }
}

/// Extends a polynomial function of degree at most `m` from `S` to its
/// group of differences.
pub fn extend_polynomial(
    f: &FunctionHandle,
    m: usize,
    precheck: Strategy,
    opts: &PolarizeOptions,
) -> Result<PolynomialExtension> {
    extend_at(f, m, &f.domain().canonical_basepoint(), precheck, opts)
}

fn extend_at(
    f: &FunctionHandle,
    m: usize,
    basepoint: &Element,
    precheck: Strategy,
    opts: &PolarizeOptions,
) -> Result<PolynomialExtension> {
    let domain = f.domain().clone();
    if !domain.is_cancellative() {
        return Err(Error::NonCancellative(domain.to_string()));
    }
    let codomain = f.codomain().clone();
    if !codomain.factorial_bijective(m) {
        return Err(Error::DivisibilityUnavailable {
            carrier: codomain.to_string(),
            m,
        });
    }
    let v = frechet_test(f, m + 1, precheck)?;
    if !v.holds {
        return Err(Error::NotPolynomial(format!(
            "order-{} differences do not vanish",
            m + 1
        )));
    }
    let decomposition = decompose(f, m, basepoint, opts)?;
    let components: Vec<ExtendedMap> = decomposition
        .components
        .iter()
        .map(|c| ExtendedMap { source: c.clone() })
        .collect();
    let group = domain.group_completion_carrier();
    let (comps, constant) = (components.clone(), decomposition.constant_term()?);
    let function = FunctionHandle::derived(&group, 1, &codomain, format!("ext({f})"), move |g| {
        let rep = FormalDifference::from_group_element(&domain, &g[0], 1)?;
        let mut acc = constant.clone();
        for c in &comps[1..] {
            acc = acc.add(&c.evaluate(&vec![rep.clone(); c.arity()])?)?;
        }
        Ok(acc)
    })
    .with_degree_bound(Some(m));
    Ok(PolynomialExtension {
        decomposition,
        components,
        function,
    })
}

/// Results of extending `f` and checking the witness functions.
#[derive(Debug, Clone)]
pub struct WitnessExtensionReport {
    pub extension: PolynomialExtension,
    /// `F(s + s', s') = f(s)` over pairs `(s, s')`.
    pub restriction: Verdict,
    pub witness: AichingerWitness,
    pub witness_verdict: Verdict,
    /// Order-`(m+1)` vanishing of each `g_i` on `S^m`.
    pub g_verdicts: Vec<Verdict>,
    /// Extensions built from two different basepoints agree on `G`.
    pub uniqueness: Verdict,
}

impl WitnessExtensionReport {
    pub fn holds(&self) -> bool {
        self.restriction.holds
            && self.witness_verdict.holds
            && self.uniqueness.holds
            && self.g_verdicts.iter().all(|v| v.holds)
    }
}

pub fn witness_extension_report(
    f: &FunctionHandle,
    m: usize,
    witness: Option<AichingerWitness>,
    strategy: Strategy,
    opts: &PolarizeOptions,
) -> Result<WitnessExtensionReport> {
    let domain = f.domain().clone();
    let extension = extend_polynomial(f, m, strategy, opts)?;
    let restriction = scan(&[domain.clone(), domain.clone()], strategy, |args| {
        let d = FormalDifference::new(args[0].add(&args[1])?, args[1].clone())?;
        Ok(extension.evaluate_difference(&d)? == f.evaluate(&args[..1])?)
    })?;
    let witness = match witness {
        Some(w) => w,
        None => construct_witnesses(f, m, &domain.canonical_basepoint(), strategy)?,
    };
    let witness_verdict = verify(f, &witness, strategy)?;
    let g_verdicts = witness
        .gs
        .iter()
        .map(|g| frechet_test(g, m + 1, strategy))
        .collect::<Result<Vec<_>>>()?;
    let other_base = domain.canonical_basepoint().add(&domain.ones())?;
    let other = extend_at(f, m, &other_base, strategy, opts)?;
    let group = domain.group_completion_carrier();
    let uniqueness = scan(&[group], strategy, |g| {
        Ok(extension.function.evaluate(g)? == other.function.evaluate(g)?)
    })?;
    Ok(WitnessExtensionReport {
        extension,
        restriction,
        witness,
        witness_verdict,
        g_verdicts,
        uniqueness,
    })
}

/// Representatives `(s + k·u, t + k·u)` for `k = 0..count` of the class of `d`.
pub fn representatives(d: &FormalDifference, count: usize) -> Result<Vec<FormalDifference>> {
    let u = d.carrier().ones();
    let mut out = Vec::with_capacity(count);
    let mut current = d.clone();
    for _ in 0..count {
        out.push(current.clone());
        current = current.shifted(&u)?;
    }
    Ok(out)
}
