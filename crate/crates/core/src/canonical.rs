//! Multiadditive maps, polarization and the canonical decomposition of a
//! polynomial function into diagonals of symmetric multiadditive maps.

use itertools::Itertools;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::carrier::{factorial, Carrier, CarrierDescriptor, Element};
use crate::diffcalc::{iterated_difference, mixed_difference_value};
use crate::error::{Error, Result};
use crate::funcspace::{pointwise_combine, tabulate, FunctionHandle, PolyExpression, Sign, DEFAULT_TABLE_BUDGET};
use crate::verdict::{scan, Strategy, Verdict};

/// A map `S^k -> H` that is additive in each slot, possibly symmetric.
#[derive(Debug, Clone)]
pub struct MultiAdditiveMap {
    map: FunctionHandle,
    symmetric: bool,
}

impl MultiAdditiveMap {
    /// Wraps `map` without checking additivity; see [`is_multiadditive`].
    pub fn new(map: FunctionHandle, symmetric: bool) -> Self {
        MultiAdditiveMap { map, symmetric }
    }

    pub fn parse(text: &str, domain: &Carrier, arity: usize, codomain: &Carrier, symmetric: bool) -> Result<Self> {
        Ok(Self::new(FunctionHandle::parse(text, domain, arity, codomain)?, symmetric))
    }

    /// The constant arity-0 map with value `c`.
    pub fn constant(domain: &Carrier, c: Element) -> Self {
        Self::new(FunctionHandle::constant(domain, 0, c), true)
    }

    pub fn arity(&self) -> usize {
        self.map.arity()
    }

    pub fn domain(&self) -> &Carrier {
        self.map.domain()
    }

    pub fn codomain(&self) -> &Carrier {
        self.map.codomain()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn handle(&self) -> &FunctionHandle {
        &self.map
    }

    pub fn evaluate(&self, args: &[Element]) -> Result<Element> {
        self.map.evaluate(args)
    }

    /// Closed form when the map is expression-backed.
    pub fn expression(&self) -> Option<&PolyExpression> {
        self.map.expression()
    }

    /// Closed form rendered in the variables `x1..xk` (or `xj_c`).
    pub fn closed_form(&self) -> Option<String> {
        self.expression().map(|e| self.map.layout().render(e))
    }
}

pub(crate) fn use_closed_forms(domain: &Carrier, codomain: &Carrier) -> bool {
    !domain.is_cyclic()
        && matches!(
            codomain.descriptor(),
            CarrierDescriptor::Rationals { rank: 1 } | CarrierDescriptor::FreeAbelian { rank: 1 }
        )
}

/// `x -> A(x, ..., x)`.
pub fn diagonalize(a: &MultiAdditiveMap) -> FunctionHandle {
    let (domain, codomain, k) = (a.domain().clone(), a.codomain().clone(), a.arity());
    let p = domain.rank();
    if let Some(expr) = a.expression() {
        let images: Vec<PolyExpression> = (0..k * p).map(|i| PolyExpression::var(p, i % p)).collect();
        let diag = expr.substitute(&images, p);
        if let Ok(h) = FunctionHandle::from_expression(diag, domain.clone(), 1, codomain.clone()) {
            return h;
        }
    }
    let inner = a.map.clone();
    FunctionHandle::derived(&domain, 1, &codomain, format!("diag({})", a.map), move |x| {
        inner.evaluate(&vec![x[0].clone(); k])
    })
    .with_degree_bound(Some(k))
}

/// `(1/k!) Σ_σ A(x_σ(1), ..., x_σ(k))`.
pub fn symmetrize(a: &MultiAdditiveMap) -> Result<MultiAdditiveMap> {
    let (domain, codomain, k) = (a.domain().clone(), a.codomain().clone(), a.arity());
    if !codomain.factorial_bijective(k) {
        return Err(Error::DivisibilityUnavailable {
            carrier: codomain.to_string(),
            m: k,
        });
    }
    let p = domain.rank();
    if let Some(expr) = a.expression() {
        let nvars = k * p;
        let mut total = PolyExpression::zero(nvars);
        for perm in (0..k).permutations(k) {
            let images: Vec<PolyExpression> = (0..nvars)
                .map(|i| PolyExpression::var(nvars, perm[i / p] * p + i % p))
                .collect();
            total = total.add(&expr.substitute(&images, nvars));
        }
        let avg = total.scale(&BigRational::new(BigInt::one(), factorial(k)));
        if let Ok(h) = FunctionHandle::from_expression(avg, domain.clone(), k, codomain.clone()) {
            return Ok(MultiAdditiveMap::new(h, true));
        }
    }
    let inner = a.map.clone();
    let cod = codomain.clone();
    let h = FunctionHandle::derived(&domain, k, &codomain, format!("sym({})", a.map), move |args| {
        let mut acc = cod.zero()?;
        for perm in (0..args.len()).permutations(args.len()) {
            let permuted: Vec<Element> = perm.iter().map(|&i| args[i].clone()).collect();
            acc = acc.add(&inner.evaluate(&permuted)?)?;
        }
        cod.divide_by_factorial(&acc, args.len())
    });
    Ok(MultiAdditiveMap::new(h, true))
}

/// Knobs for [`polarize`] and [`decompose`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolarizeOptions {
    /// Random probes used to spot-check additivity and basepoint independence.
    pub verify_budget: usize,
    pub seed: u64,
    /// Cache component values.
    pub memoize: bool,
}

impl Default for PolarizeOptions {
    fn default() -> Self {
        PolarizeOptions {
            verify_budget: 50,
            seed: 0,
            memoize: true,
        }
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

fn check_basepoint(f: &FunctionHandle, z: &Element) -> Result<()> {
    if f.domain().contains(z) {
        Ok(())
    } else {
        Err(Error::NoBasepoint(f.domain().to_string()))
    }
}

/// `(1/m!) Σ_ε (-1)^(m-|ε|) P(z + Σ ε_i h_i)` as a polynomial in the `m·p`
/// step variables.
fn polarize_expression(p_expr: &PolyExpression, z: &Element, m: usize) -> PolyExpression {
    let p = p_expr.nvars();
    let nvars = m * p;
    let zc = z.to_rationals();
    let mut total = PolyExpression::zero(nvars);
    for mask in 0usize..(1 << m) {
        let images: Vec<PolyExpression> = (0..p)
            .map(|c| {
                let mut img = PolyExpression::constant(nvars, zc[c].clone());
                for i in (0..m).filter(|i| mask >> i & 1 == 1) {
                    img = img.add(&PolyExpression::var(nvars, i * p + c));
                }
                img
            })
            .collect();
        let term = p_expr.substitute(&images, nvars);
        total = if (m - mask.count_ones() as usize).is_multiple_of(2) {
            total.add(&term)
        } else {
            total.sub(&term)
        };
    }
    total.scale(&BigRational::new(BigInt::one(), factorial(m)))
}

fn lazy_polarization(f: &FunctionHandle, m: usize, z: &Element, memoize: bool) -> MultiAdditiveMap {
    let (g, base) = (f.clone(), z.clone());
    let codomain = f.codomain().clone();
    let label = format!("pol{m}[{}]({})", z, f);
    let h = FunctionHandle::derived(f.domain(), m, f.codomain(), label, move |hs| {
        let steps: Vec<Vec<Element>> = hs.iter().map(|h| vec![h.clone()]).collect();
        let raw = mixed_difference_value(&g, std::slice::from_ref(&base), &steps)?;
        codomain.divide_by_factorial(&raw, m)
    });
    MultiAdditiveMap::new(if memoize { h.memoize() } else { h }, true)
}

/// Spot-checks slot additivity and basepoint independence of the polarization
/// of `f` at order `m`.
fn spot_check(f: &FunctionHandle, a: &MultiAdditiveMap, m: usize, opts: &PolarizeOptions) -> Result<()> {
    let domain = f.domain();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let other = |z2: &Element, hs: &[Element]| -> Result<Element> {
        let steps: Vec<Vec<Element>> = hs.iter().map(|h| vec![h.clone()]).collect();
        let raw = mixed_difference_value(f, std::slice::from_ref(z2), &steps)?;
        f.codomain().divide_by_factorial(&raw, m)
    };
    for probe in 0..opts.verify_budget {
        let hs: Vec<Element> = (0..m).map(|_| domain.sample(&mut rng, 10)).collect();
        let z2 = domain.sample(&mut rng, 10);
        let value = a.evaluate(&hs)?;
        if other(&z2, &hs)? != value {
            return Err(Error::NotPolynomial(format!(
                "order-{m} difference depends on the basepoint (probe {probe}, basepoint {z2})"
            )));
        }
        if m > 0 {
            let slot = probe % m;
            let y = domain.sample(&mut rng, 10);
            let mut with_sum = hs.clone();
            with_sum[slot] = hs[slot].add(&y)?;
            let mut with_y = hs.clone();
            with_y[slot] = y;
            if a.evaluate(&with_sum)? != value.add(&a.evaluate(&with_y)?)? {
                return Err(Error::NotPolynomial(format!(
                    "order-{m} polarization is not additive in slot {} (probe {probe})",
                    slot + 1
                )));
            }
        }
    }
    Ok(())
}

/// The symmetric `m`-additive map `(1/m!) Δ_{h_1} ... Δ_{h_m} f(z)`.
pub fn polarize(f: &FunctionHandle, m: usize, z: &Element, opts: &PolarizeOptions) -> Result<MultiAdditiveMap> {
    require_unary(f)?;
    check_basepoint(f, z)?;
    let codomain = f.codomain();
    if !codomain.factorial_bijective(m) {
        return Err(Error::DivisibilityUnavailable {
            carrier: codomain.to_string(),
            m,
        });
    }
    if let (Some(expr), true) = (f.expression(), use_closed_forms(f.domain(), codomain)) {
        let degree = expr.total_degree().unwrap_or(0) as usize;
        if degree > m {
            return Err(Error::NotPolynomial(format!(
                "expression has degree {degree}, above {m}"
            )));
        }
        let pol = polarize_expression(expr, z, m);
        let h = FunctionHandle::from_expression(pol, f.domain().clone(), m, codomain.clone())?;
        return Ok(MultiAdditiveMap::new(h, true));
    }
    let a = lazy_polarization(f, m, z, opts.memoize);
    spot_check(f, &a, m, opts)?;
    Ok(a)
}

/// Components `A^0, ..., A^m` with `f = A^0 + Σ_k diag(A^k)`.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub components: Vec<MultiAdditiveMap>,
    pub basepoint: Element,
}

impl Decomposition {
    pub fn order(&self) -> usize {
        self.components.len().saturating_sub(1)
    }

    /// The constant term `A^0`.
    pub fn constant_term(&self) -> Result<Element> {
        self.components[0].evaluate(&[])
    }

    /// Whether every component has a closed form.
    pub fn is_symbolic(&self) -> bool {
        self.components.iter().all(|c| c.expression().is_some())
    }
}

/// Splits `f` into symmetric multiadditive components of arities `0..=m`,
/// extracting the top component at basepoint `z` and recursing on the rest.
pub fn decompose(f: &FunctionHandle, m: usize, z: &Element, opts: &PolarizeOptions) -> Result<Decomposition> {
    require_unary(f)?;
    check_basepoint(f, z)?;
    let codomain = f.codomain().clone();
    if !codomain.factorial_bijective(m) {
        return Err(Error::DivisibilityUnavailable {
            carrier: codomain.to_string(),
            m,
        });
    }
    let domain = f.domain().clone();
    if let (Some(expr), true) = (f.expression(), use_closed_forms(&domain, &codomain)) {
        let degree = expr.total_degree().unwrap_or(0) as usize;
        if degree > m {
            return Err(Error::NotPolynomial(format!(
                "expression has degree {degree}, above {m}"
            )));
        }
        let mut residual = expr.clone();
        let mut components = Vec::with_capacity(m + 1);
        for k in (1..=m).rev() {
            let pol = polarize_expression(&residual, z, k);
            let a = MultiAdditiveMap::new(
                FunctionHandle::from_expression(pol, domain.clone(), k, codomain.clone())?,
                true,
            );
            let diag = diagonalize(&a);
            residual = residual.sub(diag.expression().expect("closed-form diagonal"));
            components.push(a);
        }
        let constant = residual.evaluate(&vec![BigRational::one(); residual.nvars()]);
        let c0 = codomain.element(vec![constant])?;
        components.push(MultiAdditiveMap::new(
            FunctionHandle::from_expression(
                PolyExpression::constant(0, c0.to_rationals()[0].clone()),
                domain.clone(),
                0,
                codomain.clone(),
            )?,
            true,
        ));
        components.reverse();
        return Ok(Decomposition {
            components,
            basepoint: z.clone(),
        });
    }

    let mut residual = if domain.is_finite() {
        tabulate(f, DEFAULT_TABLE_BUDGET)?
    } else {
        f.clone()
    };
    let mut components = Vec::with_capacity(m + 1);
    for k in (1..=m).rev() {
        let a = polarize(&residual, k, z, opts)?;
        let next = pointwise_combine(&residual, &diagonalize(&a), Sign::Minus)?;
        residual = if domain.is_finite() {
            tabulate(&next, DEFAULT_TABLE_BUDGET)?
        } else if opts.memoize {
            next.memoize()
        } else {
            next
        };
        components.push(a);
    }
    let c0 = residual.evaluate(std::slice::from_ref(z))?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5eed);
    for _ in 0..opts.verify_budget {
        let x = domain.sample(&mut rng, 10);
        if residual.evaluate(std::slice::from_ref(&x))? != c0 {
            return Err(Error::NotPolynomial(format!(
                "remainder after removing degrees 1..={m} is not constant (at {x})"
            )));
        }
    }
    components.push(MultiAdditiveMap::constant(&domain, c0));
    components.reverse();
    Ok(Decomposition {
        components,
        basepoint: z.clone(),
    })
}

/// `x -> A^0 + Σ_k diag(A^k)(x)`.
pub fn recompose(d: &Decomposition) -> Result<FunctionHandle> {
    let first = &d.components[0];
    let (domain, codomain) = (first.domain().clone(), first.codomain().clone());
    if d.is_symbolic() {
        let p = domain.rank();
        let mut total = PolyExpression::zero(p);
        for c in &d.components {
            let diag = diagonalize(c);
            match diag.expression() {
                Some(e) => total = total.add(e),
                None => return recompose_lazily(d),
            }
        }
        return FunctionHandle::from_expression(total, domain, 1, codomain);
    }
    recompose_lazily(d)
}

fn recompose_lazily(d: &Decomposition) -> Result<FunctionHandle> {
    let first = &d.components[0];
    let (domain, codomain) = (first.domain().clone(), first.codomain().clone());
    let diagonals: Vec<FunctionHandle> = d.components.iter().map(diagonalize).collect();
    let cod = codomain.clone();
    Ok(FunctionHandle::derived(&domain, 1, &codomain, "recomposed", move |x| {
        let mut acc = cod.zero()?;
        for g in &diagonals {
            acc = acc.add(&g.evaluate(x)?)?;
        }
        Ok(acc)
    })
    .with_degree_bound(Some(d.order())))
}

/// Checks `A(.., x + y, ..) = A(.., x, ..) + A(.., y, ..)` in every slot over
/// tuples `(x_1, ..., x_k, y)`.
pub fn is_multiadditive(a: &MultiAdditiveMap, strategy: Strategy) -> Result<Verdict> {
    let k = a.arity();
    let slots = vec![a.domain().clone(); k + 1];
    scan(&slots, strategy, |args| {
        let (xs, y) = (&args[..k], &args[k]);
        let base = a.evaluate(xs)?;
        for slot in 0..k {
            let mut with_sum = xs.to_vec();
            with_sum[slot] = xs[slot].add(y)?;
            let mut with_y = xs.to_vec();
            with_y[slot] = y.clone();
            if a.evaluate(&with_sum)? != base.add(&a.evaluate(&with_y)?)? {
                return Ok(false);
            }
        }
        Ok(true)
    })
}

/// Checks invariance under every permutation of the slots.
pub fn is_symmetric(a: &MultiAdditiveMap, strategy: Strategy) -> Result<Verdict> {
    let k = a.arity();
    let slots = vec![a.domain().clone(); k];
    scan(&slots, strategy, |args| {
        let base = a.evaluate(args)?;
        for perm in (0..k).permutations(k) {
            let permuted: Vec<Element> = perm.iter().map(|&i| args[i].clone()).collect();
            if a.evaluate(&permuted)? != base {
                return Ok(false);
            }
        }
        Ok(true)
    })
}

/// Checks `(1/n!) Δ_h^n f(x) = f(h)` over pairs `(x, h)`.
pub fn is_monomial(f: &FunctionHandle, n: usize, strategy: Strategy) -> Result<Verdict> {
    require_unary(f)?;
    let codomain = f.codomain();
    if !codomain.factorial_bijective(n) {
        return Err(Error::DivisibilityUnavailable {
            carrier: codomain.to_string(),
            m: n,
        });
    }
    let slots = vec![f.domain().clone(); 2];
    scan(&slots, strategy, |args| {
        let d = iterated_difference(f, &args[0], &args[1], n)?;
        Ok(codomain.divide_by_factorial(&d, n)? == f.evaluate(&args[1..])?)
    })
}
