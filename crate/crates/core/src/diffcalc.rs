//! Difference operators, the Fréchet-type vanishing tests and the Leibniz
//! rule for differences of products.
//!
//! Functions of arity `k` are treated as functions on the product `S^k`, so a
//! step is a `k`-tuple and the tests below apply to any arity.

use num_bigint::BigInt;

use crate::carrier::{binomial, Carrier, Element};
use crate::error::{Error, Result};
use crate::funcspace::FunctionHandle;
use crate::verdict::{scan, Strategy, Verdict};

/// Beyond this many steps `mixed_difference` evaluates through the signed
/// expansion instead of nesting handles.
const NESTING_LIMIT: usize = 6;

pub(crate) fn add_tuples(a: &[Element], b: &[Element]) -> Result<Vec<Element>> {
    a.iter().zip(b).map(|(x, y)| x.add(y)).collect()
}

fn require_arity(f: &FunctionHandle, arity: usize) -> Result<()> {
    if f.arity() == arity {
        Ok(())
    } else {
        Err(Error::ArityMismatch {
            expected: arity,
            found: f.arity(),
        })
    }
}

fn check_step(f: &FunctionHandle, h: &[Element]) -> Result<()> {
    if h.len() != f.arity() {
        return Err(Error::ArityMismatch {
            expected: f.arity(),
            found: h.len(),
        });
    }
    h.iter().try_for_each(|e| f.domain().check(e))
}

fn lowered(bound: Option<usize>, by: usize) -> Option<usize> {
    bound.map(|d| d.saturating_sub(by))
}

/// `x -> f(x + h) - f(x)` for a step `h` in `S^k`.
pub fn forward_difference_tuple(f: &FunctionHandle, h: &[Element]) -> Result<FunctionHandle> {
    check_step(f, h)?;
    let (g, step) = (f.clone(), h.to_vec());
    let label = format!("D[{}]({})", crate::funcspace::render_args(h), f);
    Ok(FunctionHandle::derived(f.domain(), f.arity(), f.codomain(), label, move |x| {
        let shifted = add_tuples(x, &step)?;
        g.evaluate(&shifted)?.sub(&g.evaluate(x)?)
    })
    .with_degree_bound(lowered(f.degree_bound(), 1)))
}

/// `x -> f(x + h) - f(x)` for a function of one argument.
pub fn forward_difference(f: &FunctionHandle, h: &Element) -> Result<FunctionHandle> {
    require_arity(f, 1)?;
    forward_difference_tuple(f, std::slice::from_ref(h))
}

/// `Δ_{h_1} ... Δ_{h_m} f` as a handle, for a function of one argument.
pub fn mixed_difference(f: &FunctionHandle, hs: &[Element]) -> Result<FunctionHandle> {
    require_arity(f, 1)?;
    hs.iter().try_for_each(|h| f.domain().check(h))?;
    if hs.len() <= NESTING_LIMIT {
        return hs.iter().try_fold(f.clone(), |acc, h| forward_difference(&acc, h));
    }
    let (g, steps) = (f.clone(), hs.iter().map(|h| vec![h.clone()]).collect::<Vec<_>>());
    let label = format!("D^{}({})", hs.len(), f);
    Ok(FunctionHandle::derived(f.domain(), 1, f.codomain(), label, move |x| {
        mixed_difference_value(&g, x, &steps)
    })
    .with_degree_bound(lowered(f.degree_bound(), hs.len())))
}

/// One entry of the signed expansion of a mixed difference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedTerm {
    /// `+1` or `-1`.
    pub sign: i8,
    pub point: Vec<Element>,
    /// Which steps were added to the basepoint.
    pub pattern: Vec<bool>,
}

/// All subset sums `base + Σ_{i in mask} steps[i]`, indexed by bitmask.
pub(crate) fn subset_points(base: &[Element], steps: &[Vec<Element>]) -> Result<Vec<Vec<Element>>> {
    let m = steps.len();
    let mut points: Vec<Vec<Element>> = Vec::with_capacity(1 << m);
    points.push(base.to_vec());
    for mask in 1usize..(1 << m) {
        let low = mask.trailing_zeros() as usize;
        let prev = &points[mask & (mask - 1)];
        let next = add_tuples(prev, &steps[low])?;
        points.push(next);
    }
    Ok(points)
}

/// The `2^m` terms `(-1)^(m-|ε|) f(z + Σ ε_i x_i)`, in increasing bitmask order
/// of the pattern `ε`.
pub fn signed_expansion_tuple(f: &FunctionHandle, z: &[Element], xs: &[Vec<Element>]) -> Result<Vec<SignedTerm>> {
    check_step(f, z)?;
    xs.iter().try_for_each(|x| check_step(f, x))?;
    let m = xs.len();
    let points = subset_points(z, xs)?;
    Ok(points
        .into_iter()
        .enumerate()
        .map(|(mask, point)| {
            let ones = mask.count_ones() as usize;
            SignedTerm {
                sign: if (m - ones).is_multiple_of(2) { 1 } else { -1 },
                point,
                pattern: (0..m).map(|i| mask >> i & 1 == 1).collect(),
            }
        })
        .collect())
}

pub fn signed_expansion(f: &FunctionHandle, z: &Element, xs: &[Element]) -> Result<Vec<SignedTerm>> {
    require_arity(f, 1)?;
    let steps: Vec<Vec<Element>> = xs.iter().map(|x| vec![x.clone()]).collect();
    signed_expansion_tuple(f, std::slice::from_ref(z), &steps)
}

/// Evaluates and sums the terms of a signed expansion.
pub fn signed_sum(f: &FunctionHandle, terms: &[SignedTerm]) -> Result<Element> {
    let mut acc = f.codomain().zero()?;
    for t in terms {
        let v = f.evaluate(&t.point)?;
        acc = if t.sign > 0 { acc.add(&v)? } else { acc.sub(&v)? };
    }
    Ok(acc)
}

/// `Δ_{h_1} ... Δ_{h_m} f(x)` computed directly through the signed expansion.
pub fn mixed_difference_value(f: &FunctionHandle, x: &[Element], hs: &[Vec<Element>]) -> Result<Element> {
    let m = hs.len();
    let points = subset_points(x, hs)?;
    let mut acc = f.codomain().zero()?;
    for (mask, p) in points.iter().enumerate() {
        let v = f.evaluate(p)?;
        acc = if (m - mask.count_ones() as usize).is_multiple_of(2) {
            acc.add(&v)?
        } else {
            acc.sub(&v)?
        };
    }
    Ok(acc)
}

/// Condition (c): `Δ_{h_1} ... Δ_{h_m} f(x) = 0` for all `x, h_i`.
///
/// Tuples are laid out as `(x, h_1, ..., h_m)`, each a `k`-tuple for a
/// function of arity `k`.
pub fn frechet_test(f: &FunctionHandle, m: usize, strategy: Strategy) -> Result<Verdict> {
    let k = f.arity();
    let slots = vec![f.domain().clone(); k * (m + 1)];
    scan(&slots, strategy, |args| {
        let (x, steps) = args.split_at(k);
        let hs: Vec<Vec<Element>> = steps.chunks(k.max(1)).map(|c| c.to_vec()).collect();
        let hs = if k == 0 { vec![Vec::new(); m] } else { hs };
        Ok(mixed_difference_value(f, x, &hs)?.is_zero())
    })
}

/// Condition (b): as [`frechet_test`] but based at `x_1 + ... + x_m`, over
/// tuples `(x_1, ..., x_m, h_1, ..., h_m)`.
pub fn frechet_shifted_test(f: &FunctionHandle, m: usize, strategy: Strategy) -> Result<Verdict> {
    require_arity(f, 1)?;
    if m == 0 {
        return Err(Error::InvalidArgument(
            "the shifted test needs order at least 1".into(),
        ));
    }
    let slots = vec![f.domain().clone(); 2 * m];
    scan(&slots, strategy, |args| {
        let (xs, hs) = args.split_at(m);
        let mut base = xs[0].clone();
        for x in &xs[1..] {
            base = base.add(x)?;
        }
        let steps: Vec<Vec<Element>> = hs.iter().map(|h| vec![h.clone()]).collect();
        Ok(mixed_difference_value(f, &[base], &steps)?.is_zero())
    })
}

/// `x + i·h` for `i >= 0`, using only the semigroup law.
pub(crate) fn translate(x: &Element, h: &Element, i: usize) -> Result<Element> {
    let mut acc = x.clone();
    for _ in 0..i {
        acc = acc.add(h)?;
    }
    Ok(acc)
}

/// `Δ_h^n g(x) = Σ_i (-1)^(n-i) C(n,i) g(x + i·h)` for any evaluator `g`.
pub(crate) fn iterated_with<F>(codomain: &Carrier, eval: F, x: &Element, h: &Element, n: usize) -> Result<Element>
where
    F: Fn(&Element) -> Result<Element>,
{
    let mut acc = codomain.zero()?;
    let mut point = x.clone();
    for i in 0..=n {
        if i > 0 {
            point = point.add(h)?;
        }
        let mut c: BigInt = binomial(n, i);
        if (n - i) % 2 == 1 {
            c = -c;
        }
        acc = acc.add(&eval(&point)?.scale(&c)?)?;
    }
    Ok(acc)
}

/// `Δ_h^n f(x)` for a function of one argument.
pub fn iterated_difference(f: &FunctionHandle, x: &Element, h: &Element, n: usize) -> Result<Element> {
    require_arity(f, 1)?;
    check_step(f, std::slice::from_ref(h))?;
    iterated_with(f.codomain(), |p| f.evaluate(std::slice::from_ref(p)), x, h, n)
}

/// Both sides of the Leibniz rule for differences of a product.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeibnizReport {
    /// `Δ_h^m (f·g)(x)`.
    pub left: Element,
    /// `Σ_i C(m,i) Δ_h^i f(x) · Δ_h^(m-i) g(x + i·h)`.
    pub right: Element,
    /// The summands of `right`, indexed by `i`.
    pub summands: Vec<Element>,
}

pub fn leibniz_difference(
    f: &FunctionHandle,
    g: &FunctionHandle,
    x: &Element,
    h: &Element,
    m: usize,
) -> Result<LeibnizReport> {
    require_arity(f, 1)?;
    require_arity(g, 1)?;
    crate::funcspace::same_signature(f, g)?;
    if !f.codomain().is_ring() {
        return Err(Error::NonRingCodomain(f.codomain().to_string()));
    }
    check_step(f, std::slice::from_ref(x))?;
    check_step(f, std::slice::from_ref(h))?;
    let product = |p: &Element| -> Result<Element> {
        let args = std::slice::from_ref(p);
        f.evaluate(args)?.mul(&g.evaluate(args)?)
    };
    let left = iterated_with(f.codomain(), product, x, h, m)?;
    let mut summands = Vec::with_capacity(m + 1);
    let mut right = f.codomain().zero()?;
    for i in 0..=m {
        let df = iterated_difference(f, x, h, i)?;
        let dg = iterated_difference(g, &translate(x, h, i)?, h, m - i)?;
        let term = df.mul(&dg)?.scale(&binomial(m, i))?;
        right = right.add(&term)?;
        summands.push(term);
    }
    Ok(LeibnizReport { left, right, summands })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use proptest::prelude::{prop_assert_eq, proptest, ProptestConfig};
    use proptest::strategy::Strategy as _;

    fn q() -> Carrier {
        Carrier::rationals(1)
    }

    fn z() -> Carrier {
        Carrier::free_abelian(1)
    }

    fn int(c: &Carrier, v: i64) -> Element {
        c.element_i64(&[v]).unwrap()
    }

    fn f(text: &str, c: &Carrier) -> FunctionHandle {
        FunctionHandle::parse(text, c, 1, c).unwrap()
    }

    #[test]
    fn forward_difference_examples() {
        let q = q();
        let d = forward_difference(&f("x^2", &q), &int(&q, 1)).unwrap();
        assert_eq!(d.evaluate(&[int(&q, 3)]).unwrap(), int(&q, 7));
        let d = forward_difference(&f("5", &q), &int(&q, 4)).unwrap();
        assert!(d.evaluate(&[int(&q, -2)]).unwrap().is_zero());
        let d = forward_difference(&f("x^3", &q), &int(&q, 1)).unwrap();
        assert_eq!(d.evaluate(&[int(&q, 0)]).unwrap(), int(&q, 1));
        let c5 = Carrier::cyclic(&[5]);
        assert!(matches!(
            forward_difference(&f("x", &q), &int(&c5, 1)),
            Err(Error::DescriptorMismatch { .. })
        ));
    }

    #[test]
    fn mixed_difference_examples() {
        let q = q();
        let sq = f("x^2", &q);
        let d = mixed_difference(&sq, &[int(&q, 1), int(&q, 1)]).unwrap();
        for x in -3..3 {
            assert_eq!(d.evaluate(&[int(&q, x)]).unwrap(), int(&q, 2));
        }
        let d = mixed_difference(&f("x^3", &q), &[int(&q, 1), int(&q, 1), int(&q, 1)]).unwrap();
        assert_eq!(d.evaluate(&[int(&q, 4)]).unwrap(), int(&q, 6));
        let d = mixed_difference(&sq, &[int(&q, 2), int(&q, -1), int(&q, 7)]).unwrap();
        assert!(d.evaluate(&[int(&q, 5)]).unwrap().is_zero());
    }

    #[test]
    fn deep_mixed_difference_uses_expansion() {
        let q = q();
        let p = f("x^7", &q);
        let hs: Vec<Element> = (1..=7).map(|v| int(&q, v)).collect();
        let d = mixed_difference(&p, &hs).unwrap();
        // 7! * h1 * ... * h7
        let expected = BigRational::from_integer(BigInt::from(5040 * 5040));
        assert_eq!(d.evaluate(&[int(&q, 3)]).unwrap().to_rationals()[0], expected);
    }

    #[test]
    fn signed_expansion_examples() {
        let q = q();
        let sq = f("x^2", &q);
        let terms = signed_expansion(&sq, &int(&q, 0), &[int(&q, 1), int(&q, 2)]).unwrap();
        assert_eq!(terms.len(), 4);
        assert_eq!(signed_sum(&sq, &terms).unwrap(), int(&q, 4));
        let one = signed_expansion(&sq, &int(&q, 3), &[int(&q, 2)]).unwrap();
        assert_eq!(one[0].sign, -1);
        assert_eq!(one[1].sign, 1);
        assert_eq!(one[1].point, vec![int(&q, 5)]);
        let three = signed_expansion(&sq, &int(&q, 0), &[int(&q, 1), int(&q, 2), int(&q, 3)]).unwrap();
        assert_eq!(three.len(), 8);
        assert_eq!(three.iter().filter(|t| t.pattern.iter().all(|&b| b)).count(), 1);
    }

    #[test]
    fn frechet_examples() {
        let z = z();
        let sq = f("x^2", &z);
        assert!(frechet_test(&sq, 3, Strategy::default()).unwrap().holds);
        let v = frechet_test(&sq, 2, Strategy::default()).unwrap();
        assert!(!v.holds);
        let ce = v.counterexample.unwrap();
        let value = mixed_difference_value(&sq, &ce[..1], &[vec![ce[1].clone()], vec![ce[2].clone()]]).unwrap();
        assert!(!value.is_zero());
        assert!(frechet_test(&f("7", &z), 1, Strategy::default()).unwrap().holds);
    }

    #[test]
    fn frechet_exhaustive_counts() {
        let c5 = Carrier::cyclic(&[5]);
        let cube = f("x^3", &c5);
        let v = frechet_test(&cube, 4, Strategy::exhaustive()).unwrap();
        assert!(v.holds);
        assert_eq!(v.checked, 3125);
        let v = frechet_test(&cube, 3, Strategy::exhaustive()).unwrap();
        assert!(!v.holds);
    }

    #[test]
    fn shifted_examples() {
        let n1 = Carrier::naturals_from_one(1);
        let sq = FunctionHandle::parse("x^2", &n1, 1, &z()).unwrap();
        assert!(frechet_shifted_test(&sq, 3, Strategy::default()).unwrap().holds);
        let c5 = Carrier::cyclic(&[5]);
        let g = f("x^2 + 3*x^3", &c5);
        for m in 1..=4 {
            let b = frechet_shifted_test(&g, m, Strategy::exhaustive()).unwrap();
            let c = frechet_test(&g, m, Strategy::exhaustive()).unwrap();
            assert_eq!(b.holds, c.holds, "order {m}");
        }
    }

    #[test]
    fn leibniz_examples() {
        let q = q();
        let x = f("x", &q);
        let r = leibniz_difference(&x, &x, &int(&q, 1), &int(&q, 1), 1).unwrap();
        assert_eq!(r.left, int(&q, 3));
        assert_eq!(r.right, int(&q, 3));
        let a = f("x^2 + 1", &q);
        let b = f("x - 4", &q);
        let r = leibniz_difference(&a, &b, &int(&q, 2), &int(&q, 5), 0).unwrap();
        assert_eq!(r.left, int(&q, -10));
        assert_eq!(r.left, r.right);
        let r = leibniz_difference(&f("x^2", &q), &f("x^3", &q), &int(&q, 3), &int(&q, 2), 6).unwrap();
        assert_eq!(r.left, r.right);
    }

    #[test]
    fn leibniz_needs_ring() {
        let q2 = Carrier::rationals(2);
        let q = q();
        let id = FunctionHandle::derived(&q, 1, &q2, "pair", |a| {
            let v = a[0].to_rationals()[0].clone();
            Carrier::rationals(2).element(vec![v.clone(), v])
        });
        assert!(matches!(
            leibniz_difference(&id, &id, &int(&q, 1), &int(&q, 1), 1),
            Err(Error::NonRingCodomain(_))
        ));
    }

    #[test]
    fn difference_operators_commute_exhaustively() {
        let c5 = Carrier::cyclic(&[5]);
        let g = f("2*x^4 + x^3 + 3", &c5);
        for h1 in c5.enumerate().unwrap() {
            for h2 in c5.enumerate().unwrap() {
                let a = mixed_difference(&g, &[h1.clone(), h2.clone()]).unwrap();
                let b = mixed_difference(&g, &[h2.clone(), h1.clone()]).unwrap();
                for x in c5.enumerate().unwrap() {
                    assert_eq!(a.evaluate(std::slice::from_ref(&x)).unwrap(), b.evaluate(&[x]).unwrap());
                }
            }
        }
    }

    #[test]
    fn signed_sum_matches_mixed_difference_on_z5() {
        let c5 = Carrier::cyclic(&[5]);
        let g = f("x^4 + 2*x^2 + x", &c5);
        let elems: Vec<Element> = c5.enumerate().unwrap().collect();
        for m in 0..=3usize {
            let slots = vec![c5.clone(); m + 1];
            let v = scan(&slots, Strategy::exhaustive(), |args| {
                let terms = signed_expansion(&g, &args[0], &args[1..])?;
                let direct = mixed_difference(&g, &args[1..])?.evaluate(&args[..1])?;
                Ok(signed_sum(&g, &terms)? == direct)
            })
            .unwrap();
            assert!(v.holds, "order {m}");
        }
        assert_eq!(elems.len(), 5);
    }

    #[test]
    fn monotone_in_order() {
        let q = q();
        for text in ["x^2", "x^3 - x", "4"] {
            let g = f(text, &q);
            let mut seen = false;
            for m in 1..=5 {
                let holds = frechet_test(&g, m, Strategy::sampled(200, m as u64)).unwrap().holds;
                assert!(!seen || holds, "{text} at order {m}");
                seen |= holds;
            }
            assert!(seen);
        }
    }

    fn rational() -> impl proptest::strategy::Strategy<Value = BigRational> {
        (-20i64..=20, 1i64..=9).prop_map(|(n, d)| BigRational::new(n.into(), d.into()))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn composition_law(coeffs in proptest::collection::vec(-5i64..=5, 1..5), x in rational(), a in rational(), b in rational()) {
            // Δ_{a+b} = Δ_a Δ_b + Δ_a + Δ_b
            let q = q();
            let text = coeffs.iter().enumerate().map(|(i, c)| format!("({c})*x^{i}")).collect::<Vec<_>>().join(" + ");
            let g = f(&text, &q);
            let e = |v: &BigRational| q.element(vec![v.clone()]).unwrap();
            let (xa, ea, eb) = (e(&x), e(&a), e(&b));
            let lhs = forward_difference(&g, &ea.add(&eb).unwrap()).unwrap().evaluate(std::slice::from_ref(&xa)).unwrap();
            let both = mixed_difference(&g, &[ea.clone(), eb.clone()]).unwrap().evaluate(std::slice::from_ref(&xa)).unwrap();
            let da = forward_difference(&g, &ea).unwrap().evaluate(std::slice::from_ref(&xa)).unwrap();
            let db = forward_difference(&g, &eb).unwrap().evaluate(&[xa]).unwrap();
            prop_assert_eq!(lhs, both.add(&da).unwrap().add(&db).unwrap());
        }

        #[test]
        fn leibniz_holds(cf in proptest::collection::vec(-4i64..=4, 1..4), cg in proptest::collection::vec(-4i64..=4, 1..4), x in rational(), h in rational(), m in 0usize..=4) {
            let q = q();
            let poly = |c: &[i64]| c.iter().enumerate().map(|(i, c)| format!("({c})*x^{i}")).collect::<Vec<_>>().join(" + ");
            let (fa, gb) = (f(&poly(&cf), &q), f(&poly(&cg), &q));
            let e = |v: &BigRational| q.element(vec![v.clone()]).unwrap();
            let r = leibniz_difference(&fa, &gb, &e(&x), &e(&h), m).unwrap();
            prop_assert_eq!(r.left, r.right);
        }
    }
}
