//! Products and compositions of polynomial functions, degree measurement and
//! the monomial product checks.

use num_bigint::BigInt;
use serde_json::{json, Value};

use crate::canonical::{decompose, is_monomial, use_closed_forms, PolarizeOptions};
use crate::carrier::{binomial, Carrier, Element};
use crate::diffcalc::frechet_test;
use crate::error::{Error, Result};
use crate::funcspace::{same_signature, FunctionHandle};
use crate::verdict::{scan, Strategy, Verdict};

fn require_ring(c: &Carrier) -> Result<()> {
    if c.is_ring() {
        Ok(())
    } else {
        Err(Error::NonRingCodomain(c.to_string()))
    }
}

/// `x -> f(x) · g(x)`, with degree bound `deg f + deg g` when both are known.
pub fn product(f: &FunctionHandle, g: &FunctionHandle) -> Result<FunctionHandle> {
    same_signature(f, g)?;
    require_ring(f.codomain())?;
    let bound = f.degree_bound().zip(g.degree_bound()).map(|(a, b)| a + b);
    if let (Some(a), Some(b)) = (f.expression(), g.expression()) {
        let h = FunctionHandle::from_expression(a.mul(b), f.domain().clone(), f.arity(), f.codomain().clone())?;
        return Ok(h.with_degree_bound(bound.or(h.degree_bound())));
    }
    let (f2, g2) = (f.clone(), g.clone());
    Ok(FunctionHandle::derived(f.domain(), f.arity(), f.codomain(), format!("({f})*({g})"), move |x| {
        f2.evaluate(x)?.mul(&g2.evaluate(x)?)
    })
    .with_degree_bound(bound))
}

/// `x -> outer(inner(x))`, with degree bound `deg outer · deg inner`.
pub fn compose(outer: &FunctionHandle, inner: &FunctionHandle) -> Result<FunctionHandle> {
    for h in [outer, inner] {
        if h.arity() != 1 {
            return Err(Error::ArityMismatch {
                expected: 1,
                found: h.arity(),
            });
        }
    }
    if inner.codomain() != outer.domain() {
        return Err(Error::DescriptorMismatch {
            expected: outer.domain().to_string(),
            found: inner.codomain().to_string(),
        });
    }
    let bound = outer
        .degree_bound()
        .zip(inner.degree_bound())
        .map(|(a, b)| a * b);
    let symbolic = use_closed_forms(inner.domain(), inner.codomain()) && use_closed_forms(outer.domain(), outer.codomain());
    if let (Some(o), Some(i), true) = (outer.expression(), inner.expression(), symbolic) {
        let composed = o.substitute(std::slice::from_ref(i), i.nvars());
        let h = FunctionHandle::from_expression(composed, inner.domain().clone(), 1, outer.codomain().clone())?;
        return Ok(h.with_degree_bound(bound.or(h.degree_bound())));
    }
    let (o, i) = (outer.clone(), inner.clone());
    Ok(FunctionHandle::derived(inner.domain(), 1, outer.codomain(), format!("({outer})∘({inner})"), move |x| {
        o.evaluate(&[i.evaluate(x)?])
    })
    .with_degree_bound(bound))
}

/// Result of [`degree_of`].
#[derive(Debug, Clone)]
pub struct DegreeReport {
    /// Degree bound carried by the handle, if any.
    pub claimed_bound: Option<usize>,
    /// Smallest `m` whose order-`(m+1)` differences vanish; `None` when no
    /// `m <= probe_limit` works.
    pub measured_degree: Option<usize>,
    pub probe_limit: usize,
    /// Verdict at order `measured_degree + 1` (holds).
    pub upper: Option<Verdict>,
    /// Verdict at order `measured_degree` (fails), absent for degree 0.
    pub lower: Option<Verdict>,
    pub strategy: Strategy,
}

impl DegreeReport {
    /// Exhaustive verdicts are exact; sampled ones are not.
    pub fn is_exact(&self) -> bool {
        self.strategy.is_exhaustive()
    }

    pub fn within_claim(&self) -> bool {
        match (self.claimed_bound, self.measured_degree) {
            (Some(c), Some(d)) => d <= c,
            _ => true,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "claimed_bound": self.claimed_bound,
            "measured_degree": match self.measured_degree {
                Some(d) => json!(d),
                None => json!("exceeds probe limit"),
            },
            "probe_limit": self.probe_limit,
            "exact": self.is_exact(),
            "upper": self.upper.as_ref().map(Verdict::to_json),
            "lower": self.lower.as_ref().map(Verdict::to_json),
            "strategy": self.strategy.to_json(),
        })
    }
}

/// Smallest `m <= probe_limit` with vanishing differences of order `m + 1`.
pub fn degree_of(f: &FunctionHandle, probe_limit: usize, strategy: Strategy) -> Result<DegreeReport> {
    let mut lower = None;
    for m in 0..=probe_limit {
        let v = frechet_test(f, m + 1, strategy)?;
        if v.holds {
            return Ok(DegreeReport {
                claimed_bound: f.degree_bound(),
                measured_degree: Some(m),
                probe_limit,
                upper: Some(v),
                lower,
                strategy,
            });
        }
        lower = Some(v);
    }
    Ok(DegreeReport {
        claimed_bound: f.degree_bound(),
        measured_degree: None,
        probe_limit,
        upper: None,
        lower,
        strategy,
    })
}

fn require_monomial(f: &FunctionHandle, n: usize, strategy: Strategy, which: &str) -> Result<()> {
    if is_monomial(f, n, strategy)?.holds {
        Ok(())
    } else {
        Err(Error::NotPolynomial(format!(
            "{which} is not a monomial of degree {n}"
        )))
    }
}

/// Checks that the product of monomials of degrees `n` and `m` is a monomial
/// of degree `n + m`.
pub fn monomial_product_check(
    f: &FunctionHandle,
    g: &FunctionHandle,
    n: usize,
    m: usize,
    strategy: Strategy,
) -> Result<Verdict> {
    same_signature(f, g)?;
    require_ring(f.codomain())?;
    if !f.codomain().factorial_bijective(n + m) {
        return Err(Error::DivisibilityUnavailable {
            carrier: f.codomain().to_string(),
            m: n + m,
        });
    }
    require_monomial(f, n, strategy, "first factor")?;
    require_monomial(g, m, strategy, "second factor")?;
    is_monomial(&product(f, g)?, n + m, strategy)
}

/// Checks `(1/(n+m)!) Δ_{(h,k)}^{n+m} φ(x, y) = f(h) g(k)` for
/// `φ(x, y) = f(x) g(y)` on `S × R`, over tuples `(x, y, h, k)`.
pub fn two_domain_product_check(
    f: &FunctionHandle,
    g: &FunctionHandle,
    n: usize,
    m: usize,
    strategy: Strategy,
) -> Result<Verdict> {
    if f.codomain() != g.codomain() {
        return Err(Error::DescriptorMismatch {
            expected: f.codomain().to_string(),
            found: g.codomain().to_string(),
        });
    }
    let codomain = f.codomain().clone();
    require_ring(&codomain)?;
    let total = n + m;
    if !codomain.factorial_bijective(total) {
        return Err(Error::DivisibilityUnavailable {
            carrier: codomain.to_string(),
            m: total,
        });
    }
    require_monomial(f, n, strategy, "first factor")?;
    require_monomial(g, m, strategy, "second factor")?;
    let slots = [
        f.domain().clone(),
        g.domain().clone(),
        f.domain().clone(),
        g.domain().clone(),
    ];
    let phi = |x: &Element, y: &Element| -> Result<Element> {
        f.evaluate(std::slice::from_ref(x))?.mul(&g.evaluate(std::slice::from_ref(y))?)
    };
    scan(&slots, strategy, |args| {
        let (x, y, h, k) = (&args[0], &args[1], &args[2], &args[3]);
        let mut acc = codomain.zero()?;
        let (mut px, mut py) = (x.clone(), y.clone());
        for i in 0..=total {
            if i > 0 {
                px = px.add(h)?;
                py = py.add(k)?;
            }
            let mut c: BigInt = binomial(total, i);
            if (total - i) % 2 == 1 {
                c = -c;
            }
            acc = acc.add(&phi(&px, &py)?.scale(&c)?)?;
        }
        Ok(codomain.divide_by_factorial(&acc, total)? == phi(h, k)?)
    })
}

/// Degree certificate for a composition.
#[derive(Debug, Clone)]
pub struct CompositionCertificate {
    pub bound: usize,
    /// Vanishing of differences of order `bound + 1`.
    pub frechet: Verdict,
    /// Whether the composite also decomposed into components of degree
    /// at most `bound`.
    pub decomposed: bool,
    /// Why the decomposition certificate is missing, when it is.
    pub gap: Option<String>,
}

impl CompositionCertificate {
    pub fn to_json(&self) -> Value {
        json!({
            "bound": self.bound,
            "frechet": self.frechet.to_json(),
            "decomposed": self.decomposed,
            "gap": self.gap,
        })
    }
}

/// Certifies `deg(outer ∘ inner) <= deg outer · deg inner` with the given
/// degrees, by a Fréchet check and, where division is available, by
/// decomposing the composite.
pub fn certify_composition(
    outer: &FunctionHandle,
    inner: &FunctionHandle,
    outer_degree: usize,
    inner_degree: usize,
    strategy: Strategy,
    opts: &PolarizeOptions,
) -> Result<CompositionCertificate> {
    let composite = compose(outer, inner)?;
    let bound = outer_degree * inner_degree;
    let frechet = frechet_test(&composite, bound + 1, strategy)?;
    let middle = inner.codomain();
    let (decomposed, gap) = if !middle.factorial_bijective(outer_degree) {
        (
            false,
            Some(format!(
                "multiplication by {outer_degree}! is not bijective on {middle}; only the difference check applies"
            )),
        )
    } else {
        match decompose(&composite, bound, &inner.domain().canonical_basepoint(), opts) {
            Ok(_) => (true, None),
            Err(Error::DivisibilityUnavailable { carrier, m }) => (
                false,
                Some(format!("multiplication by {m}! is not bijective on {carrier}")),
            ),
            Err(e) => return Err(e),
        }
    };
    Ok(CompositionCertificate {
        bound,
        frechet,
        decomposed,
        gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffcalc::leibniz_difference;

    fn q() -> Carrier {
        Carrier::rationals(1)
    }

    fn f(text: &str, c: &Carrier) -> FunctionHandle {
        FunctionHandle::parse(text, c, 1, c).unwrap()
    }

    fn measured(h: &FunctionHandle) -> Option<usize> {
        degree_of(h, 8, Strategy::default()).unwrap().measured_degree
    }

    #[test]
    fn product_examples() {
        let q = q();
        let p = product(&f("x^2", &q), &f("x^3", &q)).unwrap();
        assert_eq!(p.to_string(), "x1^5");
        assert_eq!(p.degree_bound(), Some(5));
        assert_eq!(measured(&p), Some(5));
        let z = product(&f("x^4 - x", &q), &f("0", &q)).unwrap();
        assert_eq!(measured(&z), Some(0));
        let p = product(&f("x + 1", &q), &f("x - 1", &q)).unwrap();
        assert_eq!(p.to_string(), "x1^2 - 1");
        assert_eq!(measured(&p), Some(2));
        let q2 = Carrier::rationals(2);
        let a = FunctionHandle::derived(&q, 1, &q2, "pair", |x| {
            let v = x[0].to_rationals().remove(0);
            Carrier::rationals(2).element(vec![v.clone(), v])
        });
        assert!(matches!(product(&a, &a), Err(Error::NonRingCodomain(_))));
    }

    #[test]
    fn compose_examples() {
        let q = q();
        let c = compose(&f("x^2", &q), &f("x^3", &q)).unwrap();
        assert_eq!(c.to_string(), "x1^6");
        assert_eq!(measured(&c), Some(6));
        let inner = f("x^3 - 2*x + 7", &q);
        let c = compose(&f("x", &q), &inner).unwrap();
        assert_eq!(c.to_string(), inner.to_string());
        let c = compose(&f("x^2", &q), &f("x + 1", &q)).unwrap();
        assert_eq!(c.to_string(), "x1^2 + 2*x1 + 1");
        assert!(measured(&c).unwrap() <= 2);
        let c5 = Carrier::cyclic(&[5]);
        assert!(matches!(
            compose(&f("x", &c5), &f("x", &q)),
            Err(Error::DescriptorMismatch { .. })
        ));
    }

    #[test]
    fn degree_examples() {
        let q = q();
        assert_eq!(measured(&f("x^5", &q)), Some(5));
        let r = degree_of(&f("x^5", &q), 8, Strategy::default()).unwrap();
        assert!(r.lower.as_ref().is_some_and(|v| !v.holds));
        assert!(r.upper.as_ref().is_some_and(|v| v.holds));
        assert_eq!(measured(&f("-3", &q)), Some(0));
        let r = degree_of(&f("x^5", &q), 3, Strategy::default()).unwrap();
        assert_eq!(r.measured_degree, None);
        assert_eq!(r.to_json()["measured_degree"], json!("exceeds probe limit"));

        // The indicator of {0} on Z5 is 1 - x^4 by Fermat, so degree 4.
        let c5 = Carrier::cyclic(&[5]);
        let values: Vec<Element> = (0..5).map(|v| c5.element_i64(&[i64::from(v == 0)]).unwrap()).collect();
        let indicator = FunctionHandle::from_values(&c5, 1, &c5, values).unwrap();
        let r = degree_of(&indicator, 6, Strategy::exhaustive()).unwrap();
        assert_eq!(r.measured_degree, Some(4));
        assert!(r.is_exact());
    }

    #[test]
    fn monomial_product_examples() {
        let q = q();
        let s = Strategy::default();
        assert!(monomial_product_check(&f("x^2", &q), &f("x^3", &q), 2, 3, s).unwrap().holds);
        assert!(monomial_product_check(&f("0", &q), &f("x^2", &q), 1, 2, s).unwrap().holds);
        assert!(monomial_product_check(&f("x", &q), &f("x", &q), 1, 1, s).unwrap().holds);
        assert!(matches!(
            monomial_product_check(&f("x + 1", &q), &f("x", &q), 1, 1, s),
            Err(Error::NotPolynomial(_))
        ));
    }

    #[test]
    fn two_domain_examples() {
        let z = Carrier::free_abelian(1);
        let s = Strategy::default();
        assert!(two_domain_product_check(&f("x", &z), &f("x^2", &z), 1, 2, s).is_err());
        let q = q();
        assert!(two_domain_product_check(&f("x", &q), &f("x^2", &q), 1, 2, s).unwrap().holds);
        assert!(two_domain_product_check(&f("0", &q), &f("x^3", &q), 2, 3, s).unwrap().holds);
        let c5 = Carrier::cyclic(&[5]);
        let v = two_domain_product_check(&f("x^2", &c5), &f("x^2", &c5), 2, 2, Strategy::exhaustive()).unwrap();
        assert!(v.holds);
        assert_eq!(v.checked, 625);
    }

    #[test]
    fn leibniz_collapses_to_single_summand() {
        let q = q();
        for (n, m) in [(1usize, 1usize), (2, 3), (3, 1)] {
            let a = f(&format!("x^{n}"), &q);
            let b = f(&format!("x^{m}"), &q);
            let x = q.element_i64(&[3]).unwrap();
            let h = q.element_i64(&[-2]).unwrap();
            let r = leibniz_difference(&a, &b, &x, &h, n + m).unwrap();
            assert_eq!(r.left, r.right);
            for (i, term) in r.summands.iter().enumerate() {
                assert_eq!(term.is_zero(), i != n, "n={n} m={m} i={i}");
            }
        }
    }

    #[test]
    fn composition_certificates() {
        let q = q();
        let opts = PolarizeOptions::default();
        let cert = certify_composition(&f("x^2", &q), &f("x^3 + x", &q), 2, 3, Strategy::default(), &opts).unwrap();
        assert!(cert.frechet.holds && cert.decomposed && cert.gap.is_none());

        let z = Carrier::free_abelian(1);
        let inner = FunctionHandle::derived(&z, 1, &z, "x^2", |x| x[0].mul(&x[0]));
        let outer = FunctionHandle::derived(&z, 1, &q, "x^2/2", |x| {
            let v = x[0].to_rationals().remove(0);
            Carrier::rationals(1).element(vec![&v * &v / num_rational::BigRational::from_integer(2.into())])
        });
        let cert = certify_composition(&outer, &inner, 2, 2, Strategy::default(), &opts).unwrap();
        assert!(cert.frechet.holds);
        assert!(!cert.decomposed);
        assert!(cert.gap.is_some());
    }
}
