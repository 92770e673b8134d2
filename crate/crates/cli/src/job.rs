//! Job configuration: command-line flags and JSON job files share one schema.

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use genpoly::serial::read_table;
use genpoly::verdict::{DEFAULT_BOUND, DEFAULT_BUDGET, DEFAULT_SAMPLES, DEFAULT_SEED};
use genpoly::{Carrier, Element, FunctionHandle, Strategy};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const DEFAULT_PROBE: usize = 8;
pub const DEFAULT_GRID: &str = "-2:2";
pub const DEFAULT_CENSUS_BUDGET: u64 = 1_000_000;

/// A carrier given either as shorthand text (`cyclic:5`, `rationals:2`) or as
/// a descriptor object.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CarrierArg {
    Descriptor(Carrier),
    Text(String),
}

impl std::str::FromStr for CarrierArg {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(CarrierArg::Text(s.to_string()))
    }
}

impl CarrierArg {
    pub fn resolve(&self) -> Result<Carrier> {
        match self {
            CarrierArg::Descriptor(c) => Ok(c.clone()),
            CarrierArg::Text(t) => parse_carrier(t),
        }
    }
}

fn parse_carrier(text: &str) -> Result<Carrier> {
    let text = text.trim();
    if text.starts_with('{') {
        return serde_json::from_str(text).with_context(|| format!("invalid carrier descriptor `{text}`"));
    }
    let (kind, args) = text.split_once(':').unwrap_or((text, ""));
    let numbers = || -> Result<Vec<u64>> {
        args.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.trim().parse::<u64>().with_context(|| format!("invalid number `{s}` in carrier `{text}`")))
            .collect()
    };
    let rank = || -> Result<usize> {
        match numbers()?.as_slice() {
            [] => Ok(1),
            [r] => Ok(*r as usize),
            _ => bail!("carrier `{text}` takes a single rank"),
        }
    };
    let value = match kind {
        "cyclic" => serde_json::json!({"kind": "cyclic", "moduli": numbers()?}),
        "rationals" | "positive-rationals" | "free-abelian" | "naturals-from-one" => {
            serde_json::json!({"kind": kind, "rank": rank()?})
        }
        _ => bail!("unknown carrier kind `{kind}`"),
    };
    serde_json::from_value(value).with_context(|| format!("invalid carrier `{text}`"))
}

/// Every option a command can read. Flags override values from `--job`.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Job {
    /// Function as a polynomial expression.
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    /// Second function, witness functions, or components (repeatable).
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub g: Vec<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<String>,
    /// JSON-lines table file backing `f`.
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<String>,
    /// Domain carrier, e.g. `cyclic:5`, `rationals:2` or a JSON descriptor.
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carrier: Option<CarrierArg>,
    /// Codomain carrier; defaults to the domain when cyclic, else `rationals:1`.
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub codomain: Option<CarrierArg>,
    /// Carrier between `inner` and `outer`; defaults to the codomain.
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub middle: Option<CarrierArg>,
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arity: Option<usize>,
    /// Order of the difference check.
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<usize>,
    /// Points at which to evaluate (repeatable).
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub at: Vec<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basepoint: Option<String>,
    /// Peel steps (repeatable).
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub h: Vec<String>,
    /// Integer coordinate range `lo:hi` for tabulated output.
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
    /// `exhaustive`, `sampled` or `auto`.
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<String>,
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<u32>,
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    /// Use the shifted difference condition (check-frechet) or add it to the census (equiv-scan).
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub shifted: bool,
}

fn pick<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

impl Job {
    /// Flags take precedence over the job file.
    pub fn merge(self, file: Job) -> Job {
        let list = |a: Vec<String>, b: Vec<String>| if a.is_empty() { b } else { a };
        Job {
            f: pick(self.f, file.f),
            g: list(self.g, file.g),
            outer: pick(self.outer, file.outer),
            inner: pick(self.inner, file.inner),
            table: pick(self.table, file.table),
            carrier: pick(self.carrier, file.carrier),
            codomain: pick(self.codomain, file.codomain),
            middle: pick(self.middle, file.middle),
            arity: pick(self.arity, file.arity),
            order: pick(self.order, file.order),
            m: pick(self.m, file.m),
            n: pick(self.n, file.n),
            probe: pick(self.probe, file.probe),
            at: list(self.at, file.at),
            basepoint: pick(self.basepoint, file.basepoint),
            h: list(self.h, file.h),
            grid: pick(self.grid, file.grid),
            strategy: pick(self.strategy, file.strategy),
            samples: pick(self.samples, file.samples),
            seed: pick(self.seed, file.seed),
            bound: pick(self.bound, file.bound),
            budget: pick(self.budget, file.budget),
            shifted: self.shifted || file.shifted,
        }
    }

    pub fn domain(&self) -> Result<Carrier> {
        match &self.carrier {
            Some(c) => c.resolve(),
            None => Ok(Carrier::rationals(1)),
        }
    }

    pub fn codomain(&self) -> Result<Carrier> {
        match &self.codomain {
            Some(c) => c.resolve(),
            None => {
                let d = self.domain()?;
                Ok(if d.is_cyclic() { d } else { Carrier::rationals(1) })
            }
        }
    }

    pub fn middle(&self) -> Result<Carrier> {
        match &self.middle {
            Some(c) => c.resolve(),
            None => self.codomain(),
        }
    }

    pub fn arity(&self) -> usize {
        self.arity.unwrap_or(1)
    }

    /// Fills in every default so the recorded job replays the run exactly.
    pub fn resolved(&self) -> Result<Job> {
        let mut job = self.clone();
        let domain = self.domain()?;
        job.carrier = Some(CarrierArg::Descriptor(domain.clone()));
        job.codomain = Some(CarrierArg::Descriptor(self.codomain()?));
        if self.middle.is_some() {
            job.middle = Some(CarrierArg::Descriptor(self.middle()?));
        }
        job.arity = Some(self.arity());
        let strategy = self.strategy()?;
        match strategy {
            Strategy::Exhaustive { budget } => {
                job.strategy = Some("exhaustive".into());
                job.budget = Some(budget);
            }
            Strategy::Sampled { count, seed, bound } => {
                job.strategy = Some("sampled".into());
                job.samples = Some(count);
                job.seed = Some(seed);
                job.bound = Some(bound);
            }
        }
        Ok(job)
    }

    pub fn strategy(&self) -> Result<Strategy> {
        let domain = self.domain()?;
        let kind = self.strategy.as_deref().unwrap_or("auto");
        let exhaustive = match kind {
            "exhaustive" => true,
            "sampled" => false,
            "auto" => domain.is_finite(),
            other => bail!("unknown strategy `{other}`"),
        };
        Ok(if exhaustive {
            Strategy::Exhaustive {
                budget: self.budget.unwrap_or(DEFAULT_BUDGET),
            }
        } else {
            Strategy::Sampled {
                count: self.samples.unwrap_or(DEFAULT_SAMPLES),
                seed: self.seed.unwrap_or(DEFAULT_SEED),
                bound: self.bound.unwrap_or(DEFAULT_BOUND),
            }
        })
    }

    fn expression(&self, text: &str, arity: usize) -> Result<FunctionHandle> {
        Ok(FunctionHandle::parse(text, &self.domain()?, arity, &self.codomain()?)?)
    }

    /// `f` from `--f` or `--table`.
    pub fn function(&self) -> Result<FunctionHandle> {
        match (&self.f, &self.table) {
            (Some(text), None) => self.expression(text, self.arity()),
            (None, Some(path)) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("cannot read table `{path}`"))?;
                Ok(read_table(&text, &self.domain()?, self.arity(), &self.codomain()?)?)
            }
            (Some(_), Some(_)) => bail!("give either --f or --table, not both"),
            (None, None) => bail!("missing --f or --table"),
        }
    }

    /// The single function given by `--g`, with the same signature as `f`.
    pub fn second_function(&self) -> Result<FunctionHandle> {
        match self.g.as_slice() {
            [text] => self.expression(text, self.arity()),
            [] => bail!("missing --g"),
            _ => bail!("expected a single --g"),
        }
    }

    /// `--g` values as functions of the given arities.
    pub fn g_functions(&self, arities: impl Fn(usize) -> usize) -> Result<Vec<FunctionHandle>> {
        self.g
            .iter()
            .enumerate()
            .map(|(i, text)| self.expression(text, arities(i)))
            .collect()
    }

    pub fn inner_outer(&self) -> Result<(FunctionHandle, FunctionHandle)> {
        let domain = self.domain()?;
        let middle = self.middle()?;
        let codomain = self.codomain()?;
        let inner = self.inner.as_deref().ok_or_else(|| anyhow!("missing --inner"))?;
        let outer = self.outer.as_deref().ok_or_else(|| anyhow!("missing --outer"))?;
        Ok((
            FunctionHandle::parse(inner, &domain, 1, &middle)?,
            FunctionHandle::parse(outer, &middle, 1, &codomain)?,
        ))
    }

    pub fn require_m(&self) -> Result<usize> {
        self.m.ok_or_else(|| anyhow!("missing --m"))
    }

    pub fn basepoint(&self) -> Result<Element> {
        let domain = self.domain()?;
        match &self.basepoint {
            Some(text) => Ok(domain.parse_element(text)?),
            None => Ok(domain.canonical_basepoint()),
        }
    }

    pub fn elements(&self, carrier: &Carrier, texts: &[String]) -> Result<Vec<Element>> {
        texts.iter().map(|t| Ok(carrier.parse_element(t)?)).collect()
    }

    /// All elements of a finite domain without `--grid`, otherwise the
    /// distinct elements whose coordinates lie in the grid range.
    pub fn grid_points(&self) -> Result<Vec<Element>> {
        let domain = self.domain()?;
        if domain.is_finite() && self.grid.is_none() {
            return Ok(domain.enumerate()?.collect());
        }
        let text = self.grid.as_deref().unwrap_or(DEFAULT_GRID);
        let (lo, hi) = text
            .split_once(':')
            .and_then(|(a, b)| Some((a.trim().parse::<i64>().ok()?, b.trim().parse::<i64>().ok()?)))
            .ok_or_else(|| anyhow!("grid must look like `lo:hi`, got `{text}`"))?;
        if hi < lo || hi - lo > 100 {
            bail!("grid range `{text}` is empty or too wide");
        }
        let mut points: Vec<Element> = Vec::new();
        let mut coords = vec![lo; domain.rank()];
        loop {
            if let Ok(e) = domain.element_i64(&coords) {
                if !points.contains(&e) {
                    points.push(e);
                }
            }
            let Some(i) = coords.iter().rposition(|&c| c < hi) else { break };
            coords[i] += 1;
            for c in &mut coords[i + 1..] {
                *c = lo;
            }
        }
        Ok(points)
    }

    pub fn census_budget(&self) -> u64 {
        self.budget.unwrap_or(DEFAULT_CENSUS_BUDGET)
    }
}

/// Values of `f` on the grid, as `{"in": [...], "out": ...}` records.
pub fn grid_table(f: &FunctionHandle, points: &[Element], limit: usize) -> Result<Value> {
    let arity = f.arity();
    let total = points.len().checked_pow(arity as u32).unwrap_or(usize::MAX);
    if total > limit {
        bail!("grid table would have {total} entries, limit is {limit}");
    }
    let mut rows = Vec::with_capacity(total);
    for index in 0..total {
        let mut rest = index;
        let mut args = Vec::with_capacity(arity);
        for _ in 0..arity {
            args.push(points[rest % points.len()].clone());
            rest /= points.len();
        }
        args.reverse();
        rows.push(serde_json::json!({
            "in": genpoly::serial::tuple_to_json(&args),
            "out": genpoly::serial::element_to_json(&f.evaluate(&args)?),
        }));
    }
    Ok(Value::Array(rows))
}

