//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use genpoly::aichinger::{construct_witnesses, peel, vanishes, verify, AichingerWitness};
use genpoly::canonical::{decompose, diagonalize, recompose, MultiAdditiveMap, PolarizeOptions};
use genpoly::census::equiv_scan;
use genpoly::degrees::{compose, degree_of, monomial_product_check, product, two_domain_product_check};
use genpoly::diffcalc::{frechet_test, leibniz_difference, mixed_difference_value};
use genpoly::extension::{extend_polynomial, representatives, FormalDifference};
use genpoly::{Carrier, Element, Error, FunctionHandle, PolyExpression, Strategy};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn random_rational(rng: &mut ChaCha8Rng) -> BigRational {
    rat(rng.gen_range(-9..=9), rng.gen_range(1..=4))
}

fn random_nonzero(rng: &mut ChaCha8Rng) -> BigRational {
    loop {
        let c = random_rational(rng);
        if !c.is_zero() {
            return c;
        }
    }
}

fn q_elem(v: BigRational) -> Element {
    Carrier::rationals(1).element(vec![v]).unwrap()
}

fn value(e: &Element) -> BigRational {
    e.to_rationals().remove(0)
}

fn naive_eval(p: &PolyExpression, xs: &[BigRational]) -> BigRational {
    p.terms()
        .map(|(exps, c)| {
            exps.iter()
                .zip(xs)
                .fold(c.clone(), |acc, (&e, x)| acc * x.pow(e as i32))
        })
        .sum()
}

fn binom(n: usize, k: usize) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * (n - i) / (i + 1))
}

/// Random univariate polynomial of exact degree `d`.
fn random_univariate(rng: &mut ChaCha8Rng, d: u32) -> PolyExpression {
    let mut terms: Vec<(Vec<u32>, BigRational)> = (0..d).map(|i| (vec![i], random_rational(rng))).collect();
    terms.push((vec![d], random_nonzero(rng)));
    PolyExpression::from_terms(1, terms)
}

fn univariate(p: PolyExpression) -> FunctionHandle {
    let q = Carrier::rationals(1);
    FunctionHandle::from_expression(p, q.clone(), 1, q).unwrap()
}

fn census() -> Outcome {
    let c5 = Carrier::cyclic(&[5]);
    let pool = ok(rayon::ThreadPoolBuilder::new().num_threads(1).build())?;
    let start = Instant::now();
    let report = ok(pool.install(|| equiv_scan(&c5, &c5, 2, 10_000, false)))?;
    let elapsed = start.elapsed();
    let mut oracle = BTreeSet::new();
    for a0 in 0..5u64 {
        for a1 in 0..5u64 {
            for a2 in 0..5u64 {
                let index = (0..5u64)
                    .rev()
                    .fold(0, |acc, x| acc * 5 + (a0 + a1 * x + a2 * x * x) % 5);
                oracle.insert(index);
            }
        }
    }
    let members: BTreeSet<u64> = report.members.iter().copied().collect();
    ensure!(report.total == 3125, "scanned {} functions", report.total);
    ensure!(report.frechet == 125, "{} functions pass the difference check", report.frechet);
    ensure!(report.witnessed == 125, "{} functions have verified witnesses", report.witnessed);
    ensure!(report.coincide(), "characterizations disagree at {:?}", report.disagreements);
    ensure!(oracle.len() == 125 && members == oracle, "member set differs from quadratic tables");
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!("125 of 3125 on one thread in {:.1?}", elapsed))
}

fn polarization() -> Outcome {
    let q = Carrier::rationals(1);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for trial in 0..1000 {
        let c = random_rational(&mut rng);
        let a = ok(MultiAdditiveMap::parse(&format!("({c})*x1*x2"), &q, 2, &q, true))?;
        let diag = diagonalize(&a);
        let [x, h1, h2, h3] = [0; 4].map(|_| random_rational(&mut rng));
        let second = ok(mixed_difference_value(
            &diag,
            &[q_elem(x.clone())],
            &[vec![q_elem(h1.clone())], vec![q_elem(h2.clone())]],
        ))?;
        let expected = rat(2, 1) * &c * &h1 * &h2;
        ensure!(value(&second) == expected, "trial {trial}: second difference {second} != {expected}");
        let lib = ok(a.evaluate(&[q_elem(h1.clone()), q_elem(h2.clone())]))?;
        ensure!(rat(2, 1) * value(&lib) == expected, "trial {trial}: 2A(h1,h2) = {}", rat(2, 1) * value(&lib));
        let third = ok(mixed_difference_value(
            &diag,
            &[q_elem(x)],
            &[vec![q_elem(h1)], vec![q_elem(h2)], vec![q_elem(h3)]],
        ))?;
        ensure!(third.is_zero(), "trial {trial}: third difference {third}");
    }
    Ok("1000 maps, second differences equal 2A, third differences vanish".into())
}

/// 125 distinct points in rank `k`, from the grid {-2..2}^3.
fn grid(k: usize) -> Vec<Vec<BigRational>> {
    let mut out = Vec::new();
    for a in -2..=2i64 {
        for b in -2..=2i64 {
            for c in -2..=2i64 {
                let p = match k {
                    1 => vec![a + 5 * b + 25 * c],
                    2 => vec![a + 5 * b, c],
                    _ => vec![a, b, c],
                };
                out.push(p.into_iter().map(|v| rat(v, 1)).collect());
            }
        }
    }
    out
}

fn canonical_representation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let q = Carrier::rationals(1);
    let opts = PolarizeOptions::default();
    for trial in 0..100 {
        let k = rng.gen_range(1..=3usize);
        let domain = Carrier::rationals(k);
        let nterms = rng.gen_range(1..=6);
        let terms: Vec<(Vec<u32>, BigRational)> = (0..nterms)
            .map(|_| {
                let total = rng.gen_range(0..=4u32);
                let mut exps = vec![0u32; k];
                for _ in 0..total {
                    exps[rng.gen_range(0..k)] += 1;
                }
                (exps, random_rational(&mut rng))
            })
            .collect();
        let expr = PolyExpression::from_terms(k, terms);
        let f = ok(FunctionHandle::from_expression(expr.clone(), domain.clone(), 1, q.clone()))?;
        let d0 = ok(decompose(&f, 4, &ok(domain.zero())?, &opts))?;
        let d1 = ok(decompose(&f, 4, &domain.ones(), &opts))?;
        let back = ok(recompose(&d0))?;
        for p in grid(k) {
            let x = ok(domain.element(p.clone()))?;
            let got = value(&ok(back.evaluate(&[x]))?);
            let want = naive_eval(&expr, &p);
            ensure!(got == want, "trial {trial}: recomposed {got} != {want} at {p:?}");
        }
        ensure!(
            ok(d0.constant_term())? == ok(d1.constant_term())?,
            "trial {trial}: constant terms differ"
        );
        for order in 1..=4 {
            for s in 0..100 {
                let args: Vec<Element> = (0..order).map(|_| domain.sample(&mut rng, 10)).collect();
                let a = ok(d0.components[order].evaluate(&args))?;
                let b = ok(d1.components[order].evaluate(&args))?;
                ensure!(a == b, "trial {trial}: component {order} differs at sample {s}");
            }
        }
    }
    Ok("100 expressions recompose on the grid; components agree across basepoints".into())
}

fn reference_witness(q: &Carrier) -> Result<AichingerWitness, String> {
    let g = |t: &str| ok(FunctionHandle::parse(t, q, 2, q));
    ok(AichingerWitness::from_functions(
        2,
        vec![g("2*x1*x2 + x2^2")?, g("2*x1*x2 + x1^2")?, g("2*x1*x2 + x2^2")?],
    ))
}

fn witness_construction() -> Outcome {
    let q = Carrier::rationals(1);
    let sq = ok(FunctionHandle::parse("x^2", &q, 1, &q))?;
    let w = ok(construct_witnesses(&sq, 2, &ok(q.zero())?, Strategy::default()))?;
    let v = ok(verify(&sq, &w, Strategy::sampled(1000, 4)))?;
    ensure!(v.holds && v.checked == 1000, "constructed witness fails: {:?}", v.counterexample);
    let embedded = w.embedded_closed_forms().ok_or("no closed forms")?;
    for (i, g) in embedded.iter().enumerate() {
        ensure!(!g.depends_on(i), "g{} depends on its omitted variable", i + 1);
    }
    let sum = embedded.iter().fold(PolyExpression::zero(3), |acc, g| acc.add(g));
    let square = PolyExpression::from_terms(
        3,
        [
            (vec![2, 0, 0], 1),
            (vec![0, 2, 0], 1),
            (vec![0, 0, 2], 1),
            (vec![1, 1, 0], 2),
            (vec![1, 0, 1], 2),
            (vec![0, 1, 1], 2),
        ]
        .map(|(e, c)| (e, rat(c, 1))),
    );
    ensure!(sum == square, "witness terms do not sum to (x1+x2+x3)^2");
    ensure!(ok(verify(&sq, &reference_witness(&q)?, Strategy::sampled(1000, 4)))?.holds, "reference witness fails");

    let c5 = Carrier::cyclic(&[5]);
    let f = ok(FunctionHandle::parse("x^2 + 3*x + 1", &c5, 1, &c5))?;
    let w = ok(construct_witnesses(&f, 2, &ok(c5.zero())?, Strategy::exhaustive()))?;
    let v = ok(verify(&f, &w, Strategy::exhaustive()))?;
    ensure!(v.holds && v.checked == 125, "Z5 witness: holds={} checked={}", v.holds, v.checked);
    Ok("x^2 witness verifies on 1000 samples and sums to (x1+x2+x3)^2; Z5 exhaustive over 125 tuples".into())
}

fn peel_telescope() -> Outcome {
    let q = Carrier::rationals(1);
    let mut f = ok(FunctionHandle::parse("x^2", &q, 1, &q))?;
    let mut w = Some(reference_witness(&q)?);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut steps = 0;
    while let Some(current) = w {
        let h = q_elem(random_nonzero(&mut rng));
        let (next, nw) = ok(peel(&f, &current, &h))?;
        if let Some(nw) = &nw {
            ensure!(ok(verify(&next, nw, Strategy::default()))?.holds, "peeled witness {steps} fails");
        }
        f = next;
        w = nw;
        steps += 1;
    }
    ensure!(steps == 3, "{steps} peels");
    let v = ok(vanishes(&f, Strategy::sampled(1000, 5)))?;
    ensure!(v.holds, "residual nonzero at {:?}", v.counterexample);
    for x in -20..=20 {
        ensure!(ok(f.evaluate(&[q_elem(rat(x, 3))]))?.is_zero(), "residual nonzero at {x}/3");
    }
    Ok("three peels leave the zero function".into())
}

fn extension() -> Outcome {
    let qp = Carrier::positive_rationals(1);
    let q = Carrier::rationals(1);
    let f = ok(FunctionHandle::parse("x^3", &qp, 1, &q))?;
    let ext = ok(extend_polynomial(&f, 3, Strategy::default(), &PolarizeOptions::default()))?;
    let group = ext.function.domain().clone();
    let at_minus_two = ok(ext.function.evaluate(&[ok(group.element_i64(&[-2]))?]))?;
    ensure!(value(&at_minus_two) == rat(-8, 1), "F(-2) = {at_minus_two}");
    let diff = ok(FormalDifference::new(ok(qp.element_i64(&[1]))?, ok(qp.element_i64(&[3]))?))?;
    ensure!(value(&ok(ext.evaluate_difference(&diff))?) == rat(-8, 1), "F([1 - 3]) != -8");

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..1000 {
        let s = value(&qp.sample(&mut rng, 10));
        let got = value(&ok(ext.function.evaluate(&[ok(group.element(vec![s.clone()]))?]))?);
        ensure!(got == s.pow(3), "F({s}) = {got}");
    }

    let cubic = &ext.components[3];
    for point in 0..100 {
        let ds: Vec<FormalDifference> = (0..3)
            .map(|_| ok(FormalDifference::new(qp.sample(&mut rng, 10), qp.sample(&mut rng, 10))))
            .collect::<Result<_, _>>()?;
        let reps: Vec<Vec<FormalDifference>> = ds.iter().map(|d| ok(representatives(d, 10))).collect::<Result<_, _>>()?;
        let base_value = ok(ext.evaluate_difference(&ds[0]))?;
        let base_form = ok(cubic.evaluate(&ds))?;
        for r in 0..10 {
            ensure!(reps[0][r].diff_equals(&ds[0]).unwrap_or(false), "representative {r} is not equivalent");
            ensure!(ok(ext.evaluate_difference(&reps[0][r]))? == base_value, "F depends on representative at point {point}");
            let tuple: Vec<FormalDifference> = reps.iter().map(|rs| rs[r].clone()).collect();
            ensure!(ok(cubic.evaluate(&tuple))? == base_form, "extended form depends on representatives at point {point}");
        }
    }
    Ok("F(-2) = -8, restriction matches on 1000 samples, 10 representatives agree at 100 points".into())
}

fn degree_bounds() -> Outcome {
    let q = Carrier::rationals(1);
    let parse = |t: &str| ok(FunctionHandle::parse(t, &q, 1, &q));
    let probe = |h: &FunctionHandle| ok(degree_of(h, 8, Strategy::default())).map(|r| r.measured_degree);
    let p = ok(product(&parse("x^2")?, &parse("x^3")?))?;
    ensure!(probe(&p)? == Some(5), "product degree {:?}", probe(&p)?);
    let c = ok(compose(&parse("x^2")?, &parse("x^3")?))?;
    ensure!(probe(&c)? == Some(6), "composition degree {:?}", probe(&c)?);

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for pair in 0..50 {
        let (n, m) = (rng.gen_range(0..=3u32), rng.gen_range(0..=3u32));
        let (f, g) = (
            univariate(random_univariate(&mut rng, n)),
            univariate(random_univariate(&mut rng, m)),
        );
        let strategy = Strategy::sampled(200, pair);
        let fg = ok(product(&f, &g))?;
        ensure!(
            ok(frechet_test(&fg, (n + m + 1) as usize, strategy))?.holds,
            "pair {pair}: product fails order {}",
            n + m + 1
        );
        let gf = ok(compose(&g, &f))?;
        ensure!(
            ok(frechet_test(&gf, (n * m + 1) as usize, strategy))?.holds,
            "pair {pair}: composition fails order {}",
            n * m + 1
        );
    }

    for sample in 0..200 {
        let (df, dg) = (rng.gen_range(0..=3), rng.gen_range(0..=3));
        let (pf, pg) = (random_univariate(&mut rng, df), random_univariate(&mut rng, dg));
        let order = rng.gen_range(0..=4usize);
        let (x, h) = (random_rational(&mut rng), random_rational(&mut rng));
        let r = ok(leibniz_difference(
            &univariate(pf.clone()),
            &univariate(pg.clone()),
            &q_elem(x.clone()),
            &q_elem(h.clone()),
            order,
        ))?;
        let direct: BigRational = (0..=order)
            .map(|i| {
                let t = &x + &h * rat(i as i64, 1);
                let sign = if (order - i) % 2 == 0 { 1 } else { -1 };
                BigRational::from_integer(binom(order, i) * sign) * naive_eval(&pf, std::slice::from_ref(&t)) * naive_eval(&pg, &[t])
            })
            .sum();
        ensure!(r.left == r.right, "sample {sample}: Leibniz sides differ");
        ensure!(value(&r.left) == direct, "sample {sample}: left side {} != {direct}", r.left);
    }

    let c5 = Carrier::cyclic(&[5]);
    let mut cases = 0;
    for n in 0..=4usize {
        for m in 0..=(4 - n) {
            let f = ok(FunctionHandle::parse(&format!("2*x^{n}"), &c5, 1, &c5))?;
            let g = ok(FunctionHandle::parse(&format!("3*x^{m}"), &c5, 1, &c5))?;
            ensure!(
                ok(monomial_product_check(&f, &g, n, m, Strategy::exhaustive()))?.holds,
                "monomial product fails for n={n} m={m}"
            );
            let v = ok(two_domain_product_check(&f, &g, n, m, Strategy::exhaustive()))?;
            ensure!(v.holds && v.checked == 625, "two-domain product fails for n={n} m={m}");
            cases += 1;
        }
    }
    Ok(format!(
        "degrees 5 and 6 measured; 50 random pairs within bounds; 200 Leibniz samples; {cases} monomial cases on Z5"
    ))
}

fn divisibility() -> Outcome {
    let c2 = Carrier::cyclic(&[2]);
    let opts = PolarizeOptions::default();
    for domain in [Carrier::free_abelian(1), c2.clone()] {
        let f = ok(FunctionHandle::parse("x^2", &domain, 1, &c2))?;
        match decompose(&f, 2, &ok(domain.zero())?, &opts) {
            Err(Error::DivisibilityUnavailable { .. }) => {}
            other => return Err(format!("decompose over {domain} gave {other:?}")),
        }
    }
    let c5 = Carrier::cyclic(&[5]);
    ensure!(c5.factorial_bijective(4), "4! should be invertible mod 5");
    ensure!(!c5.factorial_bijective(5), "5! should not be invertible mod 5");
    Ok("decomposition refused over Z2; factorial check on Z5 correct".into())
}

fn hypothesis_carriers() -> Outcome {
    let qp = Carrier::positive_rationals(1);
    let q = Carrier::rationals(1);
    ensure!(matches!(qp.zero(), Err(Error::NoZeroElement(_))), "positive rationals produced a zero");
    let f = ok(FunctionHandle::parse("x^2 - 3*x + 1/2", &qp, 1, &q))?;
    let w = ok(construct_witnesses(&f, 2, &qp.ones(), Strategy::default()))?;
    ensure!(w.translated, "witness not translated");
    let v = ok(verify(&f, &w, Strategy::sampled(1000, 9)))?;
    ensure!(v.holds, "translated witness fails at {:?}", v.counterexample);
    let n1 = Carrier::naturals_from_one(1);
    ensure!(!n1.is_closed_under_doubling(), "naturals from one reported S+S=S");
    ensure!(!n1.is_sum_of_two(&ok(n1.element_i64(&[1]))?), "1 reported as a sum of two");
    Ok("no zero in Q+, translated witness verifies, N+N != N detected".into())
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("census", census),
        ("polarization", polarization),
        ("canonical representation", canonical_representation),
        ("witness construction", witness_construction),
        ("peel telescope", peel_telescope),
        ("extension", extension),
        ("degree bounds", degree_bounds),
        ("divisibility guard rails", divisibility),
        ("hypothesis carriers", hypothesis_carriers),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {} {name} ({secs:.1}s): {detail}", i + 1),
            Err(reason) => {
                failures += 1;
                println!("FAIL {} {name} ({secs:.1}s): {reason}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
