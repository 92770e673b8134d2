//! Algebraic carriers: the commutative semigroups used as domains and the
//! commutative groups used as codomains, together with their elements.
//!
//! Every scalar is exact. Rational-like carriers store arbitrary-precision
//! rationals; `CyclicProduct` stores reduced residues. Elements remember the
//! carrier they belong to and refuse to be combined with elements of any
//! other carrier.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::Deref;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn unit_rank() -> usize {
    1
}

/// The five carrier families.
///
/// `PositiveRationals` stands in for the open positive orthant: it is dense,
/// cancellative and closed under doubling, but has no zero.
/// `NaturalsFromOne` is the counterexample carrier where `S + S != S`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CarrierDescriptor {
    FreeAbelian {
        #[serde(default = "unit_rank")]
        rank: usize,
    },
    Rationals {
        #[serde(default = "unit_rank")]
        rank: usize,
    },
    PositiveRationals {
        #[serde(default = "unit_rank")]
        rank: usize,
    },
    NaturalsFromOne {
        #[serde(default = "unit_rank")]
        rank: usize,
    },
    #[serde(rename = "cyclic")]
    CyclicProduct { moduli: Vec<u64> },
}

impl CarrierDescriptor {
    pub fn rank(&self) -> usize {
        match self {
            CarrierDescriptor::FreeAbelian { rank }
            | CarrierDescriptor::Rationals { rank }
            | CarrierDescriptor::PositiveRationals { rank }
            | CarrierDescriptor::NaturalsFromOne { rank } => *rank,
            CarrierDescriptor::CyclicProduct { moduli } => moduli.len(),
        }
    }

    pub fn has_zero(&self) -> bool {
        matches!(
            self,
            CarrierDescriptor::FreeAbelian { .. }
                | CarrierDescriptor::Rationals { .. }
                | CarrierDescriptor::CyclicProduct { .. }
        )
    }

    /// Groups are exactly the carriers with a zero here.
    pub fn is_group(&self) -> bool {
        self.has_zero()
    }

    pub fn is_cancellative(&self) -> bool {
        true
    }

    /// `S + S = S`.
    pub fn is_closed_under_doubling(&self) -> bool {
        !matches!(self, CarrierDescriptor::NaturalsFromOne { .. })
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, CarrierDescriptor::CyclicProduct { .. })
    }

    pub fn is_cyclic(&self) -> bool {
        self.is_finite()
    }

    /// Number of elements, `None` for infinite carriers.
    pub fn cardinality(&self) -> Option<u128> {
        match self {
            CarrierDescriptor::CyclicProduct { moduli } => {
                let mut total: u128 = 1;
                for &n in moduli {
                    total = total.checked_mul(n as u128)?;
                }
                Some(total)
            }
            _ => None,
        }
    }

    /// The natural extension `S - S` when it is itself one of the carriers.
    pub fn group_completion(&self) -> CarrierDescriptor {
        match self {
            CarrierDescriptor::PositiveRationals { rank } => {
                CarrierDescriptor::Rationals { rank: *rank }
            }
            CarrierDescriptor::NaturalsFromOne { rank } => {
                CarrierDescriptor::FreeAbelian { rank: *rank }
            }
            other => other.clone(),
        }
    }

    /// Carriers with a coordinatewise multiplication usable for products of
    /// functions.
    pub fn is_ring(&self) -> bool {
        match self {
            CarrierDescriptor::Rationals { rank } | CarrierDescriptor::FreeAbelian { rank } => {
                *rank == 1
            }
            CarrierDescriptor::CyclicProduct { .. } => true,
            _ => false,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            CarrierDescriptor::CyclicProduct { moduli } => {
                if moduli.is_empty() {
                    return Err(Error::InvalidArgument(
                        "cyclic carrier needs at least one modulus".into(),
                    ));
                }
                if let Some(bad) = moduli.iter().find(|&&n| n < 2) {
                    return Err(Error::InvalidArgument(format!(
                        "cyclic modulus {bad} is smaller than 2"
                    )));
                }
                Ok(())
            }
            other if other.rank() == 0 => {
                Err(Error::InvalidArgument("carrier rank must be positive".into()))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for CarrierDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CarrierDescriptor::FreeAbelian { rank } => write!(f, "FreeAbelian({rank})"),
            CarrierDescriptor::Rationals { rank } => write!(f, "Rationals({rank})"),
            CarrierDescriptor::PositiveRationals { rank } => write!(f, "PositiveRationals({rank})"),
            CarrierDescriptor::NaturalsFromOne { rank } => write!(f, "NaturalsFromOne({rank})"),
            CarrierDescriptor::CyclicProduct { moduli } => {
                let parts: Vec<String> = moduli.iter().map(|n| n.to_string()).collect();
                write!(f, "CyclicProduct({})", parts.join(","))
            }
        }
    }
}

/// Shared handle to a validated descriptor.
#[derive(Clone, Debug, Serialize)]
#[serde(transparent)]
pub struct Carrier(Arc<CarrierDescriptor>);

impl<'de> Deserialize<'de> for Carrier {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let descriptor = CarrierDescriptor::deserialize(deserializer)?;
        Carrier::new(descriptor).map_err(serde::de::Error::custom)
    }
}

impl PartialEq for Carrier {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || *self.0 == *other.0
    }
}

impl Eq for Carrier {}

impl Hash for Carrier {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.hash(state)
    }
}

impl Deref for Carrier {
    type Target = CarrierDescriptor;
    fn deref(&self) -> &CarrierDescriptor {
        &self.0
    }
}

impl fmt::Display for Carrier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Carrier {
    pub fn new(descriptor: CarrierDescriptor) -> Result<Carrier> {
        descriptor.validate()?;
        Ok(Carrier(Arc::new(descriptor)))
    }

    /// Panics if `rank` is zero.
    pub fn free_abelian(rank: usize) -> Carrier {
        Self::new(CarrierDescriptor::FreeAbelian { rank }).expect("rank must be positive")
    }

    /// Panics if `rank` is zero.
    pub fn rationals(rank: usize) -> Carrier {
        Self::new(CarrierDescriptor::Rationals { rank }).expect("rank must be positive")
    }

    /// Panics if `rank` is zero.
    pub fn positive_rationals(rank: usize) -> Carrier {
        Self::new(CarrierDescriptor::PositiveRationals { rank }).expect("rank must be positive")
    }

    /// Panics if `rank` is zero.
    pub fn naturals_from_one(rank: usize) -> Carrier {
        Self::new(CarrierDescriptor::NaturalsFromOne { rank }).expect("rank must be positive")
    }

    /// Panics unless every modulus is at least 2.
    pub fn cyclic(moduli: &[u64]) -> Carrier {
        Self::new(CarrierDescriptor::CyclicProduct {
            moduli: moduli.to_vec(),
        })
        .expect("moduli must be at least 2")
    }

    pub fn descriptor(&self) -> &CarrierDescriptor {
        &self.0
    }

    pub fn group_completion_carrier(&self) -> Carrier {
        match self.descriptor() {
            CarrierDescriptor::PositiveRationals { .. } | CarrierDescriptor::NaturalsFromOne { .. } => {
                Carrier(Arc::new(self.group_completion()))
            }
            _ => self.clone(),
        }
    }

    fn moduli(&self) -> Option<&[u64]> {
        match self.descriptor() {
            CarrierDescriptor::CyclicProduct { moduli } => Some(moduli),
            _ => None,
        }
    }

    /// Builds an element from rational coordinates, validating membership.
    /// Cyclic coordinates must be integers and are reduced.
    pub fn element(&self, coords: Vec<BigRational>) -> Result<Element> {
        if coords.len() != self.rank() {
            return Err(self.invalid(format!(
                "expected {} coordinates, got {}",
                self.rank(),
                coords.len()
            )));
        }
        let coords = match self.descriptor() {
            CarrierDescriptor::CyclicProduct { moduli } => {
                let mut residues = Vec::with_capacity(coords.len());
                for (c, &n) in coords.iter().zip(moduli) {
                    if !c.is_integer() {
                        return Err(self.invalid(format!("coordinate {c} is not an integer")));
                    }
                    residues.push(reduce_bigint(c.numer(), n));
                }
                Coords::Residue(residues)
            }
            CarrierDescriptor::Rationals { .. } => Coords::Rational(coords),
            CarrierDescriptor::FreeAbelian { .. } => {
                if let Some(c) = coords.iter().find(|c| !c.is_integer()) {
                    return Err(self.invalid(format!("coordinate {c} is not an integer")));
                }
                Coords::Rational(coords)
            }
            CarrierDescriptor::PositiveRationals { .. } => {
                if let Some(c) = coords.iter().find(|c| !c.is_positive()) {
                    return Err(self.invalid(format!("coordinate {c} is not positive")));
                }
                Coords::Rational(coords)
            }
            CarrierDescriptor::NaturalsFromOne { .. } => {
                if let Some(c) = coords.iter().find(|c| !c.is_integer() || !c.is_positive()) {
                    return Err(self.invalid(format!("coordinate {c} is not an integer >= 1")));
                }
                Coords::Rational(coords)
            }
        };
        Ok(Element {
            carrier: self.clone(),
            coords,
        })
    }

    pub fn element_i64(&self, coords: &[i64]) -> Result<Element> {
        self.element(coords.iter().map(|&c| BigRational::from_integer(c.into())).collect())
    }

    /// Residue element from already-reduced values; the caller guarantees
    /// `values[i] < moduli[i]`.
    pub(crate) fn residue_unchecked(&self, values: Vec<u64>) -> Element {
        debug_assert!(self.is_cyclic());
        Element {
            carrier: self.clone(),
            coords: Coords::Residue(values),
        }
    }

    /// Parses `"3"`, `"1/2"`, `"(1,2)"` or `"1,-2/3"`.
    pub fn parse_element(&self, text: &str) -> Result<Element> {
        let trimmed = text.trim();
        let inner = trimmed
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .unwrap_or(trimmed);
        let coords = inner
            .split(',')
            .map(|part| parse_scalar(part.trim()))
            .collect::<Result<Vec<_>>>()
            .map_err(|_| self.invalid(format!("cannot parse `{text}`")))?;
        self.element(coords)
    }

    pub fn zero(&self) -> Result<Element> {
        match self.descriptor() {
            CarrierDescriptor::CyclicProduct { moduli } => {
                Ok(self.residue_unchecked(vec![0; moduli.len()]))
            }
            d if d.has_zero() => Ok(Element {
                carrier: self.clone(),
                coords: Coords::Rational(vec![BigRational::zero(); d.rank()]),
            }),
            _ => Err(Error::NoZeroElement(self.to_string())),
        }
    }

    /// The all-ones element; a member of every carrier kind.
    pub fn ones(&self) -> Element {
        match self.descriptor() {
            CarrierDescriptor::CyclicProduct { moduli } => {
                self.residue_unchecked(vec![1; moduli.len()])
            }
            d => Element {
                carrier: self.clone(),
                coords: Coords::Rational(vec![BigRational::one(); d.rank()]),
            },
        }
    }

    /// Zero when the carrier has one, otherwise the all-ones element.
    pub fn canonical_basepoint(&self) -> Element {
        self.zero().unwrap_or_else(|_| self.ones())
    }

    pub fn contains(&self, e: &Element) -> bool {
        e.carrier == *self
    }

    pub(crate) fn check(&self, e: &Element) -> Result<()> {
        if self.contains(e) {
            Ok(())
        } else {
            Err(Error::DescriptorMismatch {
                expected: self.to_string(),
                found: e.carrier.to_string(),
            })
        }
    }

    /// Whether `e` can be written as `a + b` with `a, b` in the carrier.
    pub fn is_sum_of_two(&self, e: &Element) -> bool {
        match (self.descriptor(), &e.coords) {
            (CarrierDescriptor::NaturalsFromOne { .. }, Coords::Rational(cs)) => {
                let two = BigRational::from_integer(2.into());
                cs.iter().all(|c| *c >= two)
            }
            _ => self.contains(e),
        }
    }

    /// Multiplication by `m!` is a bijection of this carrier (codomain role).
    pub fn factorial_bijective(&self, m: usize) -> bool {
        match self.descriptor() {
            CarrierDescriptor::Rationals { .. } => true,
            CarrierDescriptor::FreeAbelian { .. } => m <= 1,
            CarrierDescriptor::CyclicProduct { moduli } => moduli
                .iter()
                .all(|&n| factorial_mod(m, n).gcd(&n) == 1),
            _ => false,
        }
    }

    /// The unique `y` with `m! * y = h`.
    pub fn divide_by_factorial(&self, h: &Element, m: usize) -> Result<Element> {
        self.check(h)?;
        if !self.factorial_bijective(m) {
            return Err(Error::DivisibilityUnavailable {
                carrier: self.to_string(),
                m,
            });
        }
        let coords = match (&h.coords, self.descriptor()) {
            (Coords::Residue(rs), CarrierDescriptor::CyclicProduct { moduli }) => Coords::Residue(
                rs.iter()
                    .zip(moduli)
                    .map(|(&r, &n)| {
                        let inv = mod_inverse(factorial_mod(m, n), n)
                            .expect("checked by factorial_bijective");
                        mul_mod(r, inv, n)
                    })
                    .collect(),
            ),
            (Coords::Rational(cs), _) => {
                let fact = BigRational::from_integer(factorial(m));
                Coords::Rational(cs.iter().map(|c| c / &fact).collect())
            }
            _ => unreachable!("coordinate kind always matches the carrier"),
        };
        Ok(Element {
            carrier: self.clone(),
            coords,
        })
    }

    /// Lexicographic enumeration of a finite carrier.
    pub fn enumerate(&self) -> Result<ElementIter> {
        let total = self
            .cardinality()
            .ok_or_else(|| Error::InfiniteCarrier(self.to_string()))?;
        Ok(ElementIter {
            carrier: self.clone(),
            next: 0,
            total,
        })
    }

    /// The element at position `index` of [`Carrier::enumerate`].
    pub fn element_at(&self, mut index: u128) -> Result<Element> {
        let moduli = self
            .moduli()
            .ok_or_else(|| Error::InfiniteCarrier(self.to_string()))?;
        let mut values = vec![0u64; moduli.len()];
        for (slot, &n) in values.iter_mut().zip(moduli).rev() {
            *slot = (index % n as u128) as u64;
            index /= n as u128;
        }
        Ok(self.residue_unchecked(values))
    }

    /// Position of `e` in the lexicographic enumeration.
    pub fn index_of(&self, e: &Element) -> Option<u128> {
        let moduli = self.moduli()?;
        match &e.coords {
            Coords::Residue(rs) if self.contains(e) => Some(
                rs.iter()
                    .zip(moduli)
                    .fold(0u128, |acc, (&r, &n)| acc * n as u128 + r as u128),
            ),
            _ => None,
        }
    }

    /// Uniform draw from the bounded box of radius `bound`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, bound: u32) -> Element {
        let b = bound.max(1) as i64;
        let coords = match self.descriptor() {
            CarrierDescriptor::CyclicProduct { moduli } => {
                Coords::Residue(moduli.iter().map(|&n| rng.gen_range(0..n)).collect())
            }
            CarrierDescriptor::FreeAbelian { rank } => Coords::Rational(
                (0..*rank)
                    .map(|_| BigRational::from_integer(rng.gen_range(-b..=b).into()))
                    .collect(),
            ),
            CarrierDescriptor::Rationals { rank } => Coords::Rational(
                (0..*rank)
                    .map(|_| {
                        let num: BigInt = rng.gen_range(-b..=b).into();
                        let den: BigInt = rng.gen_range(1..=b).into();
                        BigRational::new(num, den)
                    })
                    .collect(),
            ),
            CarrierDescriptor::PositiveRationals { rank } => Coords::Rational(
                (0..*rank)
                    .map(|_| {
                        let num: BigInt = rng.gen_range(1..=b).into();
                        let den: BigInt = rng.gen_range(1..=b).into();
                        BigRational::new(num, den)
                    })
                    .collect(),
            ),
            CarrierDescriptor::NaturalsFromOne { rank } => Coords::Rational(
                (0..*rank)
                    .map(|_| BigRational::from_integer(rng.gen_range(1..=b).into()))
                    .collect(),
            ),
        };
        Element {
            carrier: self.clone(),
            coords,
        }
    }

    fn invalid(&self, reason: String) -> Error {
        Error::InvalidElement {
            carrier: self.to_string(),
            reason,
        }
    }
}

/// Iterator over the elements of a finite carrier.
pub struct ElementIter {
    carrier: Carrier,
    next: u128,
    total: u128,
}

impl Iterator for ElementIter {
    type Item = Element;

    fn next(&mut self) -> Option<Element> {
        if self.next >= self.total {
            return None;
        }
        let e = self.carrier.element_at(self.next).ok();
        self.next += 1;
        e
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.total - self.next).min(usize::MAX as u128) as usize;
        (left, Some(left))
    }
}

/// Raw coordinates of an element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Coords {
    Rational(Vec<BigRational>),
    Residue(Vec<u64>),
}

/// A point of a carrier.
#[derive(Debug, Clone)]
pub struct Element {
    carrier: Carrier,
    coords: Coords,
}

impl PartialEq for Element {
    fn eq(&self, other: &Self) -> bool {
        self.coords == other.coords && self.carrier == other.carrier
    }
}

impl Eq for Element {}

impl Hash for Element {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.coords.hash(state)
    }
}

impl Element {
    pub fn carrier(&self) -> &Carrier {
        &self.carrier
    }

    pub fn coords(&self) -> &Coords {
        &self.coords
    }

    /// Coordinates as rationals; residues map to their representatives in `[0, n)`.
    pub fn to_rationals(&self) -> Vec<BigRational> {
        match &self.coords {
            Coords::Rational(cs) => cs.clone(),
            Coords::Residue(rs) => rs
                .iter()
                .map(|&r| BigRational::from_integer(r.into()))
                .collect(),
        }
    }

    fn same_carrier(&self, other: &Element) -> Result<()> {
        self.carrier.check(other)
    }

    pub fn add(&self, other: &Element) -> Result<Element> {
        self.same_carrier(other)?;
        let coords = match (&self.coords, &other.coords, self.carrier.moduli()) {
            (Coords::Residue(a), Coords::Residue(b), Some(moduli)) => Coords::Residue(
                a.iter()
                    .zip(b)
                    .zip(moduli)
                    .map(|((&x, &y), &n)| add_mod(x, y, n))
                    .collect(),
            ),
            (Coords::Rational(a), Coords::Rational(b), None) => {
                Coords::Rational(a.iter().zip(b).map(|(x, y)| x + y).collect())
            }
            _ => unreachable!("coordinate kind always matches the carrier"),
        };
        Ok(Element {
            carrier: self.carrier.clone(),
            coords,
        })
    }

    pub fn neg(&self) -> Result<Element> {
        if !self.carrier.is_group() {
            return Err(Error::NotAGroup(self.carrier.to_string()));
        }
        let coords = match (&self.coords, self.carrier.moduli()) {
            (Coords::Residue(a), Some(moduli)) => Coords::Residue(
                a.iter()
                    .zip(moduli)
                    .map(|(&x, &n)| if x == 0 { 0 } else { n - x })
                    .collect(),
            ),
            (Coords::Rational(a), _) => Coords::Rational(a.iter().map(|x| -x).collect()),
            _ => unreachable!("coordinate kind always matches the carrier"),
        };
        Ok(Element {
            carrier: self.carrier.clone(),
            coords,
        })
    }

    pub fn sub(&self, other: &Element) -> Result<Element> {
        self.same_carrier(other)?;
        self.add(&other.neg()?)
    }

    /// `k * self`; negative and zero `k` need a group.
    pub fn scale(&self, k: &BigInt) -> Result<Element> {
        if !k.is_positive() && !self.carrier.is_group() {
            return Err(Error::NotAGroup(self.carrier.to_string()));
        }
        let coords = match (&self.coords, self.carrier.moduli()) {
            (Coords::Residue(a), Some(moduli)) => Coords::Residue(
                a.iter()
                    .zip(moduli)
                    .map(|(&x, &n)| mul_mod(x, reduce_bigint(k, n), n))
                    .collect(),
            ),
            (Coords::Rational(a), _) => {
                let k = BigRational::from_integer(k.clone());
                Coords::Rational(a.iter().map(|x| x * &k).collect())
            }
            _ => unreachable!("coordinate kind always matches the carrier"),
        };
        Ok(Element {
            carrier: self.carrier.clone(),
            coords,
        })
    }

    /// Coordinatewise product in a ring carrier.
    pub fn mul(&self, other: &Element) -> Result<Element> {
        self.same_carrier(other)?;
        if !self.carrier.is_ring() {
            return Err(Error::NonRingCodomain(self.carrier.to_string()));
        }
        let coords = match (&self.coords, &other.coords, self.carrier.moduli()) {
            (Coords::Residue(a), Coords::Residue(b), Some(moduli)) => Coords::Residue(
                a.iter()
                    .zip(b)
                    .zip(moduli)
                    .map(|((&x, &y), &n)| mul_mod(x, y, n))
                    .collect(),
            ),
            (Coords::Rational(a), Coords::Rational(b), None) => {
                Coords::Rational(a.iter().zip(b).map(|(x, y)| x * y).collect())
            }
            _ => unreachable!("coordinate kind always matches the carrier"),
        };
        Ok(Element {
            carrier: self.carrier.clone(),
            coords,
        })
    }

    pub fn is_zero(&self) -> bool {
        match &self.coords {
            Coords::Residue(rs) => rs.iter().all(|&r| r == 0),
            Coords::Rational(cs) => cs.iter().all(|c| c.is_zero()),
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = match &self.coords {
            Coords::Residue(rs) => rs.iter().map(|r| r.to_string()).collect(),
            Coords::Rational(cs) => cs.iter().map(|c| c.to_string()).collect(),
        };
        if parts.len() == 1 {
            write!(f, "{}", parts[0])
        } else {
            write!(f, "({})", parts.join(","))
        }
    }
}

pub(crate) fn parse_scalar(text: &str) -> Result<BigRational> {
    BigRational::from_str(text).map_err(|_| Error::InvalidArgument(format!("bad scalar `{text}`")))
}

pub fn factorial(m: usize) -> BigInt {
    (1..=m).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub(crate) fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

pub(crate) fn add_mod(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 + b as u128) % n as u128) as u64
}

pub(crate) fn mul_mod(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 * b as u128) % n as u128) as u64
}

pub(crate) fn reduce_bigint(k: &BigInt, n: u64) -> u64 {
    k.mod_floor(&BigInt::from(n))
        .to_u64()
        .expect("residue is below the modulus")
}

/// `m! mod n`; zero once `m >= n`.
pub(crate) fn factorial_mod(m: usize, n: u64) -> u64 {
    if m as u128 >= n as u128 {
        return 0 % n;
    }
    (1..=m as u64).fold(1 % n, |acc, k| mul_mod(acc, k, n))
}

pub fn mod_inverse(a: u64, n: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128 % n as i128, n as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    (old_r == 1).then(|| old_s.rem_euclid(n as i128) as u64)
}

/// `a/b mod n` for a rational with denominator prime to `n`.
pub(crate) fn rational_mod(q: &BigRational, n: u64) -> Option<u64> {
    let num = reduce_bigint(q.numer(), n);
    let den = reduce_bigint(q.denom(), n);
    mod_inverse(den, n).map(|inv| mul_mod(num, inv, n))
}
