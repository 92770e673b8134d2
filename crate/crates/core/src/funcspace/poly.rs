//! Sparse multivariate polynomials with exact rational coefficients.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::carrier::{mul_mod, rational_mod};

/// A polynomial in `nvars` scalar variables, stored as a map from exponent
/// vectors to nonzero coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PolyExpression {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, BigRational>,
}

impl PolyExpression {
    pub fn zero(nvars: usize) -> Self {
        PolyExpression {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, BigRational::one())
    }

    /// The variable with index `i`. Panics if `i >= nvars`.
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable index {i} out of range for {nvars} variables");
        let mut exps = vec![0; nvars];
        exps[i] = 1;
        let mut p = Self::zero(nvars);
        p.terms.insert(exps, BigRational::one());
        p
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs, merging
    /// repeated exponents and dropping zeros.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u32>, BigRational)>,
    {
        let mut p = Self::zero(nvars);
        for (exps, c) in terms {
            assert_eq!(exps.len(), nvars, "exponent vector has wrong length");
            p.add_term(exps, c);
        }
        p
    }

    fn add_term(&mut self, exps: Vec<u32>, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            Entry::Vacant(slot) => {
                slot.insert(c);
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, exps: &[u32]) -> BigRational {
        self.terms.get(exps).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Maximum exponent sum over the terms; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn depends_on(&self, var: usize) -> bool {
        self.terms.keys().any(|e| e[var] > 0)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(&-BigRational::one())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        if k.is_zero() {
            return Self::zero(self.nvars);
        }
        PolyExpression {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * k)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = Self::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, mut k: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.nvars);
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Replaces variable `i` by `images[i]`; all images live in `target_nvars`
    /// variables.
    pub fn substitute(&self, images: &[PolyExpression], target_nvars: usize) -> Self {
        assert_eq!(images.len(), self.nvars, "one image per variable");
        assert!(images.iter().all(|p| p.nvars == target_nvars));
        let mut powers: Vec<Vec<PolyExpression>> = images
            .iter()
            .map(|img| vec![PolyExpression::one(target_nvars), img.clone()])
            .collect();
        let mut out = Self::zero(target_nvars);
        for (exps, c) in &self.terms {
            let mut term = Self::constant(target_nvars, c.clone());
            for (i, &e) in exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().expect("nonempty").mul(&images[i]);
                    powers[i].push(next);
                }
                term = term.mul(&powers[i][e as usize]);
            }
            out = out.add(&term);
        }
        out
    }

    pub fn map_coefficients<F>(&self, mut f: F) -> Self
    where
        F: FnMut(&BigRational) -> BigRational,
    {
        Self::from_terms(
            self.nvars,
            self.terms.iter().map(|(e, c)| (e.clone(), f(c))),
        )
    }

    /// Exact evaluation. Works over the common denominator of the arguments
    /// and coefficients so that only the final result is normalized.
    pub fn evaluate(&self, values: &[BigRational]) -> BigRational {
        assert_eq!(values.len(), self.nvars);
        if self.terms.is_empty() {
            return BigRational::zero();
        }
        let l = values.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        let q = self.terms.values().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let scaled: Vec<BigInt> = values.iter().map(|v| v.numer() * (&l / v.denom())).collect();
        let degree = self.total_degree().unwrap_or(0);
        let mut powers: Vec<Vec<BigInt>> = scaled.iter().map(|a| vec![BigInt::one(), a.clone()]).collect();
        let mut l_powers = vec![BigInt::one()];
        for _ in 0..degree {
            let next = l_powers.last().unwrap() * &l;
            l_powers.push(next);
        }
        let mut total = BigInt::zero();
        for (exps, c) in &self.terms {
            let mut term = c.numer() * (&q / c.denom());
            let mut deg = 0u32;
            for ((a, pw), &e) in scaled.iter().zip(powers.iter_mut()).zip(exps) {
                while pw.len() <= e as usize {
                    let next = pw.last().unwrap() * a;
                    pw.push(next);
                }
                term *= &pw[e as usize];
                deg += e;
            }
            total += term * &l_powers[(degree - deg) as usize];
        }
        BigRational::new(total, q * &l_powers[degree as usize])
    }

    /// Evaluation modulo `n`; `None` when a coefficient denominator is not
    /// invertible mod `n`.
    pub fn evaluate_mod(&self, values: &[u64], n: u64) -> Option<u64> {
        assert_eq!(values.len(), self.nvars);
        let mut total = 0u64;
        for (exps, c) in &self.terms {
            let mut term = rational_mod(c, n)?;
            for (&v, &e) in values.iter().zip(exps) {
                term = mul_mod(term, pow_mod(v, e, n), n);
            }
            total = ((total as u128 + term as u128) % n as u128) as u64;
        }
        Some(total)
    }

    /// Renders the polynomial with the given variable names, in a form the
    /// expression parser reads back to the same polynomial.
    pub fn to_text(&self, name: &dyn Fn(usize) -> String) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut ordered: Vec<(&Vec<u32>, &BigRational)> = self.terms.iter().collect();
        ordered.sort_by(|(a, _), (b, _)| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        let mut out = String::new();
        for (i, (exps, c)) in ordered.into_iter().enumerate() {
            let negative = c.is_negative();
            match (i, negative) {
                (0, true) => out.push('-'),
                (0, false) => {}
                (_, true) => out.push_str(" - "),
                (_, false) => out.push_str(" + "),
            }
            let magnitude = c.abs();
            let mut factors: Vec<String> = Vec::new();
            let is_constant = exps.iter().all(|&e| e == 0);
            if is_constant || !magnitude.is_one() {
                factors.push(magnitude.to_string());
            }
            for (v, &e) in exps.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(name(v)),
                    _ => factors.push(format!("{}^{}", name(v), e)),
                }
            }
            out.push_str(&factors.join("*"));
        }
        out
    }

    /// Coefficients as small integers when every coefficient is integral.
    pub fn integer_coefficients(&self) -> Option<Vec<(Vec<u32>, i64)>> {
        self.terms
            .iter()
            .map(|(e, c)| {
                if c.is_integer() {
                    c.to_integer().to_i64().map(|v| (e.clone(), v))
                } else {
                    None
                }
            })
            .collect()
    }
}

fn pow_mod(base: u64, mut e: u32, n: u64) -> u64 {
    let mut acc = 1 % n;
    let mut b = base % n;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, n);
        }
        b = mul_mod(b, b, n);
        e >>= 1;
    }
    acc
}
