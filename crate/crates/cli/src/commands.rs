use anyhow::{anyhow, bail, Result};
use clap::Subcommand;
use genpoly::aichinger::{construct_witnesses, construct_witnesses_unchecked, peel, vanishes, verify, AichingerWitness};
use genpoly::canonical::{decompose, is_multiadditive, recompose, Decomposition, MultiAdditiveMap, PolarizeOptions};
use genpoly::census::equiv_scan;
use genpoly::degrees::{certify_composition, degree_of, monomial_product_check, product, two_domain_product_check, compose};
use genpoly::diffcalc::{frechet_shifted_test, frechet_test};
use genpoly::extension::witness_extension_report;
use genpoly::serial::element_to_json;
use genpoly::{FunctionHandle, Verdict};
use serde_json::{json, Value};

use crate::job::{grid_table, Job, DEFAULT_PROBE};

const GRID_LIMIT: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Vanishing of mixed differences of a given order.
    CheckFrechet,
    /// Verify a witness family (given with --g or constructed).
    CheckAichinger,
    /// Construct the witness family for f.
    Witness,
    /// Peel f and its witness repeatedly with the steps given by --h.
    Peel,
    /// Split f into symmetric multiadditive components.
    Decompose,
    /// Sum the diagonals of the components given by --g.
    Recompose,
    /// Extend f from a cancellative semigroup to its group of differences.
    Extend,
    /// Measure the degree of f.
    Degree,
    /// Product of f and g with its degree bound.
    Product,
    /// Composition of outer and inner with its degree certificate.
    Compose,
    /// Products of monomials of degrees n and m.
    MonomialCheck,
    /// Compare the characterizations over all functions between finite groups.
    EquivScan,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::CheckFrechet => "check-frechet",
            Command::CheckAichinger => "check-aichinger",
            Command::Witness => "witness",
            Command::Peel => "peel",
            Command::Decompose => "decompose",
            Command::Recompose => "recompose",
            Command::Extend => "extend",
            Command::Degree => "degree",
            Command::Product => "product",
            Command::Compose => "compose",
            Command::MonomialCheck => "monomial-check",
            Command::EquivScan => "equiv-scan",
        }
    }

    pub fn from_name(name: &str) -> Option<Command> {
        [
            Command::CheckFrechet,
            Command::CheckAichinger,
            Command::Witness,
            Command::Peel,
            Command::Decompose,
            Command::Recompose,
            Command::Extend,
            Command::Degree,
            Command::Product,
            Command::Compose,
            Command::MonomialCheck,
            Command::EquivScan,
        ]
        .into_iter()
        .find(|c| c.name() == name)
    }
}

/// What a command found: whether its checks held, and the details.
pub struct Outcome {
    pub holds: bool,
    pub result: Value,
}

impl Outcome {
    fn verdict(v: &Verdict, mut result: Value) -> Outcome {
        result["verdict"] = v.to_json();
        Outcome { holds: v.holds, result }
    }
}

pub fn run(command: Command, job: &Job) -> Result<Outcome> {
    let strategy = job.strategy()?;
    let opts = PolarizeOptions {
        seed: job.seed.unwrap_or(0),
        ..PolarizeOptions::default()
    };
    match command {
        Command::CheckFrechet => {
            let f = job.function()?;
            let order = job.order.ok_or_else(|| anyhow!("missing --order"))?;
            let v = if job.shifted {
                frechet_shifted_test(&f, order, strategy)?
            } else {
                frechet_test(&f, order, strategy)?
            };
            Ok(Outcome::verdict(
                &v,
                json!({"function": f.describe(), "order": order, "shifted": job.shifted}),
            ))
        }
        Command::CheckAichinger => {
            let f = job.function()?;
            let m = job.require_m()?;
            let w = if job.g.is_empty() {
                construct_witnesses_unchecked(&f, m, &job.basepoint()?)?
            } else {
                if job.g.len() != m + 1 {
                    bail!("expected {} witness functions, got {}", m + 1, job.g.len());
                }
                AichingerWitness::from_functions(m, job.g_functions(|_| m)?)?
            };
            let v = verify(&f, &w, strategy)?;
            Ok(Outcome::verdict(&v, json!({"function": f.describe(), "witness": w.to_json()})))
        }
        Command::Witness => {
            let f = job.function()?;
            let m = job.require_m()?;
            let w = construct_witnesses(&f, m, &job.basepoint()?, strategy)?;
            let v = verify(&f, &w, strategy)?;
            Ok(Outcome::verdict(&v, json!({"function": f.describe(), "witness": w.to_json()})))
        }
        Command::Peel => peel_command(job, strategy),
        Command::Decompose => {
            let f = job.function()?;
            let m = job.require_m()?;
            let d = decompose(&f, m, &job.basepoint()?, &opts)?;
            let back = recompose(&d)?;
            let v = genpoly::verdict::scan(&[f.domain().clone()], strategy, |x| {
                Ok(back.evaluate(x)? == f.evaluate(x)?)
            })?;
            Ok(Outcome::verdict(&v, json!({"function": f.describe(), "decomposition": decomposition_json(&d, job)?})))
        }
        Command::Recompose => {
            if job.g.is_empty() {
                bail!("give the components with --g, constant first");
            }
            let components: Vec<MultiAdditiveMap> = job
                .g_functions(|i| i)?
                .into_iter()
                .map(|h| MultiAdditiveMap::new(h, true))
                .collect();
            let mut verdicts = Vec::new();
            let mut holds = true;
            for c in &components[1..] {
                let v = is_multiadditive(c, strategy)?;
                holds &= v.holds;
                verdicts.push(v.to_json());
            }
            let d = Decomposition {
                components,
                basepoint: job.domain()?.canonical_basepoint(),
            };
            let f = recompose(&d)?;
            Ok(Outcome {
                holds,
                result: json!({"function": function_json(&f, job)?, "multiadditive": verdicts}),
            })
        }
        Command::Extend => {
            let f = job.function()?;
            let m = job.require_m()?;
            let report = witness_extension_report(&f, m, None, strategy, &opts)?;
            let group = report.extension.function.domain().clone();
            let mut values = Vec::new();
            for p in job.elements(&group, &job.at)? {
                let y = report.extension.function.evaluate(std::slice::from_ref(&p))?;
                values.push(json!({"at": element_to_json(&p), "value": element_to_json(&y)}));
            }
            Ok(Outcome {
                holds: report.holds(),
                result: json!({
                    "function": f.describe(),
                    "group": group,
                    "closed_form": report.extension.closed_form(),
                    "values": values,
                    "restriction": report.restriction.to_json(),
                    "witness": report.witness.to_json(),
                    "witness_verdict": report.witness_verdict.to_json(),
                    "witness_degrees": report.g_verdicts.iter().map(Verdict::to_json).collect::<Vec<_>>(),
                    "uniqueness": report.uniqueness.to_json(),
                }),
            })
        }
        Command::Degree => {
            let f = job.function()?;
            let r = degree_of(&f, job.probe.unwrap_or(DEFAULT_PROBE), strategy)?;
            Ok(Outcome {
                holds: r.measured_degree.is_some() && r.within_claim(),
                result: json!({"function": f.describe(), "degree": r.to_json()}),
            })
        }
        Command::Product => {
            let f = job.function()?;
            let g = job.second_function()?;
            let p = product(&f, &g)?;
            let probe = job.probe.or(p.degree_bound().map(|b| b + 1)).unwrap_or(DEFAULT_PROBE);
            let r = degree_of(&p, probe, strategy)?;
            Ok(Outcome {
                holds: r.measured_degree.is_some() && r.within_claim(),
                result: json!({"function": p.describe(), "degree_bound": p.degree_bound(), "degree": r.to_json()}),
            })
        }
        Command::Compose => {
            let (inner, outer) = job.inner_outer()?;
            let probe = job.probe.unwrap_or(DEFAULT_PROBE);
            let degree = |h: &FunctionHandle, given: Option<usize>| -> Result<usize> {
                if let Some(d) = given.or(h.degree_bound()) {
                    return Ok(d);
                }
                degree_of(h, probe, strategy)?
                    .measured_degree
                    .ok_or_else(|| anyhow!("degree of {} exceeds the probe limit {probe}", h.describe()))
            };
            let (n, m) = (degree(&outer, job.n)?, degree(&inner, job.m)?);
            let composite = compose(&outer, &inner)?;
            let cert = certify_composition(&outer, &inner, n, m, strategy, &opts)?;
            Ok(Outcome {
                holds: cert.frechet.holds,
                result: json!({
                    "function": composite.describe(),
                    "outer_degree": n,
                    "inner_degree": m,
                    "certificate": cert.to_json(),
                }),
            })
        }
        Command::MonomialCheck => {
            let f = job.function()?;
            let g = job.second_function()?;
            let n = job.n.ok_or_else(|| anyhow!("missing --n"))?;
            let m = job.require_m()?;
            let same = monomial_product_check(&f, &g, n, m, strategy)?;
            let split = two_domain_product_check(&f, &g, n, m, strategy)?;
            Ok(Outcome {
                holds: same.holds && split.holds,
                result: json!({"product": same.to_json(), "two_domain": split.to_json()}),
            })
        }
        Command::EquivScan => {
            let m = job.require_m()?;
            let r = equiv_scan(&job.domain()?, &job.codomain()?, m, job.census_budget(), job.shifted)?;
            Ok(Outcome {
                holds: r.coincide(),
                result: r.to_json(),
            })
        }
    }
}

fn peel_command(job: &Job, strategy: genpoly::Strategy) -> Result<Outcome> {
    let mut f = job.function()?;
    let m = job.require_m()?;
    let domain = job.domain()?;
    let mut w = Some(construct_witnesses(&f, m, &job.basepoint()?, strategy)?);
    let steps = if job.h.is_empty() {
        vec![domain.ones(); m + 1]
    } else {
        job.elements(&domain, &job.h)?
    };
    let mut holds = true;
    let mut records = Vec::new();
    for h in steps {
        let Some(current) = w else { break };
        let (next, nw) = peel(&f, &current, &h)?;
        let verdict = match &nw {
            Some(nw) => verify(&next, nw, strategy)?,
            None => vanishes(&next, strategy)?,
        };
        holds &= verdict.holds;
        records.push(json!({
            "h": element_to_json(&h),
            "function": next.describe(),
            "witness": nw.as_ref().map(AichingerWitness::to_json),
            "verdict": verdict.to_json(),
        }));
        f = next;
        w = nw;
    }
    Ok(Outcome {
        holds,
        result: json!({"steps": records, "exhausted": w.is_none()}),
    })
}

fn function_json(f: &FunctionHandle, job: &Job) -> Result<Value> {
    Ok(match f.expression() {
        Some(_) => json!({"closed_form": f.to_string()}),
        None => json!({"describe": f.describe(), "table": grid_table(f, &job.grid_points()?, GRID_LIMIT)?}),
    })
}

fn decomposition_json(d: &Decomposition, job: &Job) -> Result<Value> {
    let mut components = Vec::new();
    for (k, c) in d.components.iter().enumerate() {
        let body = match c.closed_form() {
            Some(text) => json!({"order": k, "closed_form": text}),
            None => json!({"order": k, "table": grid_table(c.handle(), &job.grid_points()?, GRID_LIMIT)?}),
        };
        components.push(body);
    }
    Ok(json!({
        "basepoint": element_to_json(&d.basepoint),
        "symbolic": d.is_symbolic(),
        "components": components,
    }))
}
