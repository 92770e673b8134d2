//! Functions `S^k -> H` backed by a polynomial expression, a finite table, or
//! a derived evaluator built from other handles.

mod parse;
mod poly;

pub use parse::{parse_polynomial, VarLayout};
pub use poly::PolyExpression;

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_rational::BigRational;
use num_traits::Zero;

use crate::carrier::{rational_mod, Carrier, CarrierDescriptor, Coords, Element};
use crate::error::{Error, Result};

/// Default cap on the number of entries `tabulate` will materialize.
pub const DEFAULT_TABLE_BUDGET: u64 = 1_000_000;

type Evaluator = dyn Fn(&[Element]) -> Result<Element> + Send + Sync;

/// An opaque evaluator together with a label describing how it was built.
#[derive(Clone)]
pub struct Derived {
    label: String,
    eval: Arc<Evaluator>,
}

impl Derived {
    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for Derived {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Derived").field("label", &self.label).finish()
    }
}

#[derive(Debug)]
enum TableStore {
    /// Indexed by the lexicographic position of the argument tuple.
    Dense(Vec<Option<Element>>),
    Sparse(HashMap<Vec<Element>, Element>),
}

/// Finite table of values.
#[derive(Debug, Clone)]
pub struct Table {
    store: Arc<TableStore>,
}

impl Table {
    pub fn len(&self) -> usize {
        match &*self.store {
            TableStore::Dense(v) => v.iter().filter(|e| e.is_some()).count(),
            TableStore::Sparse(m) => m.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone)]
pub enum Backing {
    Expression(PolyExpression),
    Table(Table),
    Derived(Derived),
}

struct Inner {
    domain: Carrier,
    arity: usize,
    codomain: Carrier,
    backing: Backing,
    degree_bound: Option<usize>,
    /// Coefficients reduced mod the codomain modulus, for cyclic codomains.
    residue_terms: Option<Vec<(Vec<u32>, u64)>>,
}

/// A function `S^arity -> H`. Cloning is cheap; handles are immutable and
/// safe to evaluate from many threads at once.
#[derive(Clone)]
pub struct FunctionHandle(Arc<Inner>);

impl fmt::Debug for FunctionHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionHandle")
            .field("domain", &self.0.domain.to_string())
            .field("arity", &self.0.arity)
            .field("codomain", &self.0.codomain.to_string())
            .field("backing", &self.describe())
            .finish()
    }
}

impl fmt::Display for FunctionHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

fn require_group(codomain: &Carrier) -> Result<()> {
    if codomain.is_group() {
        Ok(())
    } else {
        Err(Error::NotAGroup(codomain.to_string()))
    }
}

impl FunctionHandle {
    fn build(
        domain: Carrier,
        arity: usize,
        codomain: Carrier,
        backing: Backing,
        degree_bound: Option<usize>,
    ) -> Self {
        FunctionHandle(Arc::new(Inner {
            domain,
            arity,
            codomain,
            backing,
            degree_bound,
            residue_terms: None,
        }))
    }

    /// Wraps a polynomial. The codomain must be a rank-1 group; for a cyclic
    /// codomain the coefficients are reduced to residues.
    pub fn from_expression(
        expr: PolyExpression,
        domain: Carrier,
        arity: usize,
        codomain: Carrier,
    ) -> Result<Self> {
        require_group(&codomain)?;
        if codomain.rank() != 1 {
            return Err(Error::InvalidArgument(format!(
                "expression-backed functions need a rank-1 codomain, got {codomain}"
            )));
        }
        let layout = VarLayout::new(arity, domain.rank());
        if expr.nvars() != layout.nvars() {
            return Err(Error::InvalidArgument(format!(
                "expression has {} variables, expected {}",
                expr.nvars(),
                layout.nvars()
            )));
        }
        let mut residue_terms = None;
        let expr = match codomain.descriptor() {
            CarrierDescriptor::CyclicProduct { moduli } => {
                let n = moduli[0];
                let mut bad = None;
                let reduced = expr.map_coefficients(|c| match rational_mod(c, n) {
                    Some(r) => BigRational::from_integer(r.into()),
                    None => {
                        bad = Some(c.clone());
                        BigRational::zero()
                    }
                });
                if let Some(c) = bad {
                    return Err(Error::ValueOutsideCodomain {
                        carrier: codomain.to_string(),
                        value: c.to_string(),
                    });
                }
                residue_terms = Some(
                    reduced
                        .integer_coefficients()
                        .expect("residues are small integers")
                        .into_iter()
                        .map(|(e, c)| (e, c as u64))
                        .collect(),
                );
                reduced
            }
            _ => expr,
        };
        let degree_bound = (!domain.is_cyclic() && !codomain.is_cyclic())
            .then(|| expr.total_degree().unwrap_or(0) as usize);
        Ok(FunctionHandle(Arc::new(Inner {
            domain,
            arity,
            codomain,
            backing: Backing::Expression(expr),
            degree_bound,
            residue_terms,
        })))
    }

    /// Parses an expression in the variables of `VarLayout::new(arity, domain.rank())`.
    pub fn parse(text: &str, domain: &Carrier, arity: usize, codomain: &Carrier) -> Result<Self> {
        let layout = VarLayout::new(arity, domain.rank());
        let expr = parse_polynomial(text, &layout)?;
        Self::from_expression(expr, domain.clone(), arity, codomain.clone())
    }

    /// Builds a table. On finite domains the table is stored densely.
    pub fn from_table<I>(domain: &Carrier, arity: usize, codomain: &Carrier, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<Element>, Element)>,
    {
        require_group(codomain)?;
        let dense_size = domain
            .cardinality()
            .and_then(|n| n.checked_pow(arity as u32))
            .filter(|&n| n <= DEFAULT_TABLE_BUDGET as u128);
        let mut dense = dense_size.map(|n| vec![None; n as usize]);
        let mut sparse = HashMap::new();
        for (args, value) in entries {
            check_args(domain, arity, &args)?;
            codomain.check(&value)?;
            match dense.as_mut() {
                Some(d) => d[dense_index(domain, &args)] = Some(value),
                None => {
                    sparse.insert(args, value);
                }
            }
        }
        let store = match dense {
            Some(d) => TableStore::Dense(d),
            None => TableStore::Sparse(sparse),
        };
        Ok(Self::build(
            domain.clone(),
            arity,
            codomain.clone(),
            Backing::Table(Table {
                store: Arc::new(store),
            }),
            None,
        ))
    }

    /// Dense table over a finite domain given values in enumeration order.
    pub fn from_values(domain: &Carrier, arity: usize, codomain: &Carrier, values: Vec<Element>) -> Result<Self> {
        require_group(codomain)?;
        let expected = domain
            .cardinality()
            .and_then(|n| n.checked_pow(arity as u32))
            .ok_or_else(|| Error::InfiniteCarrier(domain.to_string()))?;
        if values.len() as u128 != expected {
            return Err(Error::InvalidArgument(format!(
                "expected {expected} table values, got {}",
                values.len()
            )));
        }
        for v in &values {
            codomain.check(v)?;
        }
        Ok(Self::build(
            domain.clone(),
            arity,
            codomain.clone(),
            Backing::Table(Table {
                store: Arc::new(TableStore::Dense(values.into_iter().map(Some).collect())),
            }),
            None,
        ))
    }

    pub fn derived<F>(domain: &Carrier, arity: usize, codomain: &Carrier, label: impl Into<String>, eval: F) -> Self
    where
        F: Fn(&[Element]) -> Result<Element> + Send + Sync + 'static,
    {
        Self::build(
            domain.clone(),
            arity,
            codomain.clone(),
            Backing::Derived(Derived {
                label: label.into(),
                eval: Arc::new(eval),
            }),
            None,
        )
    }

    pub fn constant(domain: &Carrier, arity: usize, value: Element) -> Self {
        let codomain = value.carrier().clone();
        let label = value.to_string();
        Self::derived(domain, arity, &codomain, label, move |_| Ok(value.clone())).with_degree_bound(Some(0))
    }

    pub fn zero(domain: &Carrier, arity: usize, codomain: &Carrier) -> Result<Self> {
        Ok(Self::constant(domain, arity, codomain.zero()?))
    }

    /// Same function with different degree metadata.
    pub fn with_degree_bound(&self, bound: Option<usize>) -> Self {
        FunctionHandle(Arc::new(Inner {
            domain: self.0.domain.clone(),
            arity: self.0.arity,
            codomain: self.0.codomain.clone(),
            backing: self.0.backing.clone(),
            degree_bound: bound,
            residue_terms: self.0.residue_terms.clone(),
        }))
    }

    pub fn domain(&self) -> &Carrier {
        &self.0.domain
    }

    pub fn arity(&self) -> usize {
        self.0.arity
    }

    pub fn codomain(&self) -> &Carrier {
        &self.0.codomain
    }

    pub fn backing(&self) -> &Backing {
        &self.0.backing
    }

    pub fn expression(&self) -> Option<&PolyExpression> {
        match &self.0.backing {
            Backing::Expression(e) => Some(e),
            _ => None,
        }
    }

    pub fn layout(&self) -> VarLayout {
        VarLayout::new(self.0.arity, self.0.domain.rank())
    }

    /// Known upper bound on the degree, when one is available.
    pub fn degree_bound(&self) -> Option<usize> {
        self.0.degree_bound
    }

    pub fn describe(&self) -> String {
        match &self.0.backing {
            Backing::Expression(e) => self.layout().render(e),
            Backing::Table(t) => format!("table[{}]", t.len()),
            Backing::Derived(d) => d.label.clone(),
        }
    }

    pub fn evaluate(&self, args: &[Element]) -> Result<Element> {
        check_args(&self.0.domain, self.0.arity, args)?;
        match &self.0.backing {
            Backing::Expression(expr) => self.eval_expression(expr, args),
            Backing::Table(t) => {
                let hit = match &*t.store {
                    TableStore::Dense(values) => values[dense_index(&self.0.domain, args)].as_ref(),
                    TableStore::Sparse(map) => map.get(args),
                };
                hit.cloned().ok_or_else(|| Error::MissingEntry(render_args(args)))
            }
            Backing::Derived(d) => {
                let v = (d.eval)(args)?;
                self.0.codomain.check(&v)?;
                Ok(v)
            }
        }
    }

    fn eval_expression(&self, expr: &PolyExpression, args: &[Element]) -> Result<Element> {
        let codomain = &self.0.codomain;
        match (codomain.descriptor(), &self.0.residue_terms) {
            (CarrierDescriptor::CyclicProduct { moduli }, Some(terms)) => {
                let n = moduli[0];
                let mut values = Vec::with_capacity(expr.nvars());
                for a in args {
                    match a.coords() {
                        Coords::Residue(rs) => values.extend(rs.iter().map(|&r| r % n)),
                        Coords::Rational(cs) => {
                            for c in cs {
                                values.push(rational_mod(c, n).ok_or_else(|| {
                                    Error::ValueOutsideCodomain {
                                        carrier: codomain.to_string(),
                                        value: c.to_string(),
                                    }
                                })?);
                            }
                        }
                    }
                }
                let mut total = 0u128;
                for (exps, c) in terms {
                    let mut term = *c as u128;
                    for (&v, &e) in values.iter().zip(exps) {
                        for _ in 0..e {
                            term = term * v as u128 % n as u128;
                        }
                    }
                    total = (total + term) % n as u128;
                }
                Ok(codomain.residue_unchecked(vec![total as u64]))
            }
            _ => {
                let values: Vec<BigRational> = args.iter().flat_map(|a| a.to_rationals()).collect();
                let v = expr.evaluate(&values);
                codomain.element(vec![v.clone()]).map_err(|_| Error::ValueOutsideCodomain {
                    carrier: codomain.to_string(),
                    value: v.to_string(),
                })
            }
        }
    }

    /// Wraps the handle with a synchronized cache keyed by argument tuples.
    pub fn memoize(&self) -> FunctionHandle {
        let inner = self.clone();
        let cache: Mutex<HashMap<Vec<Element>, Element>> = Mutex::new(HashMap::new());
        let label = format!("memo({})", self.describe());
        Self::derived(&self.0.domain, self.0.arity, &self.0.codomain, label, move |args| {
            if let Some(v) = cache.lock().expect("cache lock").get(args) {
                return Ok(v.clone());
            }
            let v = inner.evaluate(args)?;
            cache
                .lock()
                .expect("cache lock")
                .insert(args.to_vec(), v.clone());
            Ok(v)
        })
        .with_degree_bound(self.0.degree_bound)
    }

    /// All `(arguments, value)` pairs of a table-backed handle, in a
    /// deterministic order.
    pub fn table_entries(&self) -> Option<Vec<(Vec<Element>, Element)>> {
        let Backing::Table(t) = &self.0.backing else {
            return None;
        };
        let mut out: Vec<(Vec<Element>, Element)> = match &*t.store {
            TableStore::Dense(values) => values
                .iter()
                .enumerate()
                .filter_map(|(i, v)| {
                    v.as_ref()
                        .map(|v| (tuple_at(&self.0.domain, self.0.arity, i as u128), v.clone()))
                })
                .collect(),
            TableStore::Sparse(map) => map.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
        };
        if matches!(&*t.store, TableStore::Sparse(_)) {
            out.sort_by_key(|(k, _)| render_args(k));
        }
        Some(out)
    }
}

fn check_args(domain: &Carrier, arity: usize, args: &[Element]) -> Result<()> {
    if args.len() != arity {
        return Err(Error::ArityMismatch {
            expected: arity,
            found: args.len(),
        });
    }
    args.iter().try_for_each(|a| domain.check(a))
}

fn dense_index(domain: &Carrier, args: &[Element]) -> usize {
    let n = domain.cardinality().expect("finite domain");
    args.iter().fold(0u128, |acc, a| {
        acc * n + domain.index_of(a).expect("argument checked against domain")
    }) as usize
}

/// The argument tuple at lexicographic position `index` of `S^arity`.
pub(crate) fn tuple_at(domain: &Carrier, arity: usize, mut index: u128) -> Vec<Element> {
    let n = domain.cardinality().expect("finite domain");
    let mut out = vec![None; arity];
    for slot in out.iter_mut().rev() {
        *slot = Some(domain.element_at(index % n).expect("finite domain"));
        index /= n;
    }
    out.into_iter().map(|e| e.expect("filled")).collect()
}

pub(crate) fn render_args(args: &[Element]) -> String {
    let parts: Vec<String> = args.iter().map(|a| a.to_string()).collect();
    format!("[{}]", parts.join("; "))
}

/// Sign used by [`pointwise_combine`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// `x -> f(x) + g(x)` or `x -> f(x) - g(x)`.
pub fn pointwise_combine(f: &FunctionHandle, g: &FunctionHandle, sign: Sign) -> Result<FunctionHandle> {
    same_signature(f, g)?;
    let (f2, g2) = (f.clone(), g.clone());
    let op = match sign {
        Sign::Plus => "+",
        Sign::Minus => "-",
    };
    let label = format!("({f}) {op} ({g})");
    let bound = match (f.degree_bound(), g.degree_bound()) {
        (Some(a), Some(b)) => Some(a.max(b)),
        _ => None,
    };
    Ok(FunctionHandle::derived(f.domain(), f.arity(), f.codomain(), label, move |args| {
        let a = f2.evaluate(args)?;
        let b = g2.evaluate(args)?;
        match sign {
            Sign::Plus => a.add(&b),
            Sign::Minus => a.sub(&b),
        }
    })
    .with_degree_bound(bound))
}

pub(crate) fn same_signature(f: &FunctionHandle, g: &FunctionHandle) -> Result<()> {
    if f.domain() != g.domain() {
        return Err(Error::DescriptorMismatch {
            expected: f.domain().to_string(),
            found: g.domain().to_string(),
        });
    }
    if f.codomain() != g.codomain() {
        return Err(Error::DescriptorMismatch {
            expected: f.codomain().to_string(),
            found: g.codomain().to_string(),
        });
    }
    if f.arity() != g.arity() {
        return Err(Error::ArityMismatch {
            expected: f.arity(),
            found: g.arity(),
        });
    }
    Ok(())
}

/// Materializes `f` on a finite domain as a dense table.
pub fn tabulate(f: &FunctionHandle, budget: u64) -> Result<FunctionHandle> {
    let n = f
        .domain()
        .cardinality()
        .ok_or_else(|| Error::InfiniteCarrier(f.domain().to_string()))?;
    let total = n.checked_pow(f.arity() as u32).unwrap_or(u128::MAX);
    if total > budget as u128 {
        return Err(Error::BudgetExceeded {
            needed: total,
            budget,
        });
    }
    let values = (0..total)
        .map(|i| f.evaluate(&tuple_at(f.domain(), f.arity(), i)))
        .collect::<Result<Vec<_>>>()?;
    FunctionHandle::from_values(f.domain(), f.arity(), f.codomain(), values)
}
