//! Acceptance criteria. Each criterion prints one PASS/FAIL line; run with
//! `cargo test -p qprove --test acceptance -- --nocapture` to see them.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_complex::Complex64;
use num_rational::BigRational;
use qprove::fock::{
    apply_ladder, apply_observable, is_hermitian, make_state, matrix_of, Coefficient, FockSpace,
    GeneralObservable, Ladder, StateSpec, StateVector,
};
use qprove::measure::{
    eigen_spectrum, extract_proof, measure, measure_by_numbers, outcome_distribution, spectrum_diagonal,
    truncation_threshold, OutcomeDistribution,
};
use qprove::poly::{enumerate_range, parse_polynomial, NonnegPolynomial};
use qprove::prover::{prove_once, run_trials, trial_seed, FormalSystem};
use qprove::unary::{canonicalize, enumerate_set, LinearForm};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_secs: u64) -> Result<(), String> {
    ensure(elapsed <= Duration::from_secs(limit_secs), || format!("took {elapsed:?}, limit {limit_secs}s"))
}

fn big(v: u64) -> BigUint {
    BigUint::from(v)
}

/// 200 random expressions (depth ≤ 4, literals ≤ 5, seed 0) against direct evaluation.
fn ac1_canonicalization() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut mismatches = Vec::new();
    for _ in 0..200 {
        let e = common::random_expr(&mut rng, 4, 5);
        let form = canonicalize(&e).map_err(|err| format!("{e}: {err}"))?;
        let got = enumerate_set(&form, 200);
        let want: Vec<u64> = common::brute_set(&e, 200).into_iter().collect();
        if got != want {
            mismatches.push(format!("{e} ↦ {form}"));
        }
    }
    ensure(mismatches.is_empty(), || format!("{} mismatches, first: {}", mismatches.len(), mismatches[0]))?;
    within(start.elapsed(), 10)?;
    Ok(format!("200 expressions, 0 mismatches in {:?}", start.elapsed()))
}

/// Truncated spectrum equals the range below T(D), D = 8.
fn ac2_representation() -> Outcome {
    const CUTOFF: usize = 8;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut polys: Vec<NonnegPolynomial> = (0..50)
        .map(|_| {
            let k = rng.gen_range(0..=3);
            let coeffs: Vec<u64> = (0..k).map(|_| rng.gen_range(1..=7)).collect();
            NonnegPolynomial::from_linear(&LinearForm::new(coeffs, rng.gen_range(0..=7)))
        })
        .collect();
    polys.push(parse_polynomial("x1^2 + 2").unwrap());
    for f in &polys {
        let k = f.arity();
        let spectrum = spectrum_diagonal(f, k, CUTOFF).map_err(|e| e.to_string())?;
        let top = u64::try_from(spectrum.last().unwrap()).unwrap();
        let full_range = enumerate_range(f, top);
        ensure(spectrum.iter().all(|v| full_range.binary_search(&u64::try_from(v).unwrap()).is_ok()), || {
            format!("{f}: spectrum value outside the range")
        })?;
        let threshold = truncation_threshold(f, k, CUTOFF).map_err(|e| e.to_string())?;
        let (below_spec, below_range): (Vec<u64>, Vec<u64>) = match threshold {
            Some(t) => {
                let t = u64::try_from(&t).unwrap();
                let s = spectrum.iter().map(|v| u64::try_from(v).unwrap()).filter(|&v| v < t).collect();
                let r = if t == 0 { Vec::new() } else { enumerate_range(f, t - 1) };
                (s, r)
            }
            None => (spectrum.iter().map(|v| u64::try_from(v).unwrap()).collect(), full_range.clone()),
        };
        ensure(below_spec == below_range, || format!("{f}: {below_spec:?} vs {below_range:?}"))?;
    }
    within(start.elapsed(), 10)?;
    Ok(format!("{} polynomials agree below T(8) in {:?}", polys.len(), start.elapsed()))
}

fn random_polynomial(rng: &mut ChaCha8Rng, k: usize) -> NonnegPolynomial {
    let terms: Vec<(Vec<u32>, u32)> = (0..rng.gen_range(1..=3))
        .map(|_| ((0..k).map(|_| rng.gen_range(0..=2)).collect(), rng.gen_range(1..=4)))
        .collect();
    NonnegPolynomial::new(k, terms)
}

fn random_ladder_observable(rng: &mut ChaCha8Rng) -> GeneralObservable {
    let word: Vec<Ladder> = (0..rng.gen_range(1..=2))
        .map(|_| if rng.gen_bool(0.5) { Ladder::create(0) } else { Ladder::annihilate(0) })
        .collect();
    let rat = |rng: &mut ChaCha8Rng| BigRational::new(rng.gen_range(-6i64..=6).into(), rng.gen_range(1i64..=4).into());
    let c = Coefficient::new(rat(rng), rat(rng));
    let w = GeneralObservable::new(1).term(c, word);
    let diag = GeneralObservable::number(1, 0);
    let mut obs = w.adjoint().plus(&w);
    for _ in 0..rng.gen_range(0..=2) {
        obs = obs.plus(&diag);
    }
    obs.term(Coefficient::new(rat(rng), BigRational::from_integer(0.into())), [])
}

/// Jacobi spectra against the diagonal spectrum and against closed forms.
fn ac3_eigensolver() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let k = rng.gen_range(1..=2);
        let cutoff = rng.gen_range(2..=5);
        let f = random_polynomial(&mut rng, k);
        let m = matrix_of(&GeneralObservable::from_polynomial(&f), k, cutoff).map_err(|e| e.to_string())?;
        let mut values = eigen_spectrum(&m).map_err(|e| e.to_string())?;
        values.dedup_by(|a, b| (*a - *b).abs() < 0.5);
        let want: Vec<f64> = spectrum_diagonal(&f, k, cutoff)
            .map_err(|e| e.to_string())?
            .iter()
            .map(|v| u64::try_from(v).unwrap() as f64)
            .collect();
        ensure(values.len() == want.len(), || format!("{f}: {values:?} vs {want:?}"))?;
        for (v, w) in values.iter().zip(&want) {
            worst = worst.max((v - w).abs());
        }
    }
    ensure(worst <= 1e-8, || format!("diagonal case off by {worst}"))?;
    let diagonal_worst = worst;

    let mut worst: f64 = 0.0;
    for i in 0..5 {
        let cutoff = if i % 2 == 0 { 2 } else { 3 };
        let obs = random_ladder_observable(&mut rng);
        ensure(is_hermitian(&obs, 1, cutoff).unwrap(), || format!("{obs} is not Hermitian"))?;
        let m = matrix_of(&obs, 1, cutoff).map_err(|e| e.to_string())?;
        let values = eigen_spectrum(&m).map_err(|e| e.to_string())?;
        let closed = if cutoff == 2 { common::eigen_2x2(m.entries()) } else { common::eigen_3x3(m.entries()) };
        for (v, w) in values.iter().zip(&closed) {
            worst = worst.max((v - w).abs());
        }
    }
    ensure(worst <= 1e-8, || format!("general case off by {worst}"))?;
    Ok(format!("20 diagonal (max err {diagonal_worst:.1e}), 5 ladder observables (max err {worst:.1e})"))
}

/// Commutators, number operators, and number states from repeated creation, D = 8.
fn ac4_ladder_algebra() -> Outcome {
    const CUTOFF: usize = 8;
    const TOL: f64 = 1e-12;
    let sub = |x: &StateVector, y: &StateVector| {
        let mut d = x.clone();
        d.add(&y.clone().scale(Complex64::new(-1.0, 0.0)));
        d
    };
    let mut checks = 0usize;
    for k in 1..=2usize {
        let space = FockSpace::new(k, CUTOFF).unwrap();
        for n in space.basis() {
            let ket = StateVector::basis(space, &n.0).unwrap();
            for j in 0..k {
                let number = apply_observable(&GeneralObservable::number(k, j), &ket).unwrap();
                let want = ket.clone().scale(Complex64::new(n.0[j] as f64, 0.0));
                ensure(number.max_distance(&want) <= TOL, || format!("N_{} on {n}", j + 1))?;
                checks += 1;
            }
            if n.0.iter().any(|&x| x > CUTOFF as u64 - 3) {
                continue;
            }
            for j in 0..k {
                let (a, ad) = (Ladder::annihilate(j), Ladder::create(j));
                let aad = apply_ladder(a, &apply_ladder(ad, &ket).unwrap()).unwrap();
                let ada = apply_ladder(ad, &apply_ladder(a, &ket).unwrap()).unwrap();
                ensure(sub(&aad, &ada).max_distance(&ket) <= TOL, || format!("[a{},a{}†] on {n}", j + 1, j + 1))?;
                checks += 1;
                for j2 in (0..k).filter(|&j2| j2 != j) {
                    for (x, y) in [
                        (Ladder::annihilate(j), Ladder::annihilate(j2)),
                        (Ladder::create(j), Ladder::create(j2)),
                        (Ladder::annihilate(j), Ladder::create(j2)),
                    ] {
                        let xy = apply_ladder(x, &apply_ladder(y, &ket).unwrap()).unwrap();
                        let yx = apply_ladder(y, &apply_ladder(x, &ket).unwrap()).unwrap();
                        ensure(xy.max_distance(&yx) <= TOL, || format!("[{x},{y}] on {n}"))?;
                        checks += 1;
                    }
                }
            }
        }
        for j in 0..k {
            let vacuum = StateVector::basis(space, &vec![0; k]).unwrap();
            let mut v = vacuum;
            let mut root_factorial = 1.0f64;
            for n in 1..CUTOFF as u64 {
                v = apply_ladder(Ladder::create(j), &v).unwrap();
                root_factorial *= (n as f64).sqrt();
                let mut occ = vec![0; k];
                occ[j] = n;
                let target = StateVector::basis(space, &occ).unwrap();
                let normalized = v.clone().scale(Complex64::new(1.0 / root_factorial, 0.0));
                ensure(normalized.max_distance(&target) <= TOL, || format!("(a{}†)^{n}|0⟩/√{n}!", j + 1))?;
                checks += 1;
            }
        }
    }
    Ok(format!("{checks} identities within 1e-12"))
}

fn configurations() -> Vec<(&'static str, StateSpec)> {
    vec![
        ("x1", StateSpec::Uniform { k: 1, cutoff: 4 }),
        ("x1^2 + 2", StateSpec::Uniform { k: 1, cutoff: 6 }),
        ("2*x1 + 3*x2 + 1", StateSpec::Uniform { k: 2, cutoff: 3 }),
        ("x1 + x2", StateSpec::Random { k: 2, cutoff: 4, seed: 1 }),
        ("x1*x2 + x1", StateSpec::Random { k: 2, cutoff: 5, seed: 2 }),
        ("4", StateSpec::Random { k: 2, cutoff: 3, seed: 3 }),
        ("x1^3 + x2^2 + x3", StateSpec::Uniform { k: 3, cutoff: 3 }),
        ("3*x1 + 5*x2", StateSpec::Coherent { k: 2, cutoff: 6, alpha: vec![[1.0, 0.0], [0.5, 0.5]] }),
        ("x1^2*x2 + 7", StateSpec::Coherent { k: 2, cutoff: 4, alpha: vec![[0.8, -0.3], [1.2, 0.0]] }),
        ("x1 + 2*x2 + 4*x3", StateSpec::Random { k: 3, cutoff: 3, seed: 4 }),
    ]
}

/// 10 × 1000 rounds: every proof verifies and every collapsed support lies in F = m.
fn ac5_soundness() -> Outcome {
    let start = Instant::now();
    let mut rounds = 0usize;
    for (idx, (text, spec)) in configurations().into_iter().enumerate() {
        let state = make_state(&spec).map_err(|e| e.to_string())?;
        let f = parse_polynomial(text).unwrap().with_arity(state.modes()).unwrap();
        let sys = FormalSystem::new(f.clone(), text);
        for trial in 0..1000u64 {
            let seed = trial_seed(idx as u64, trial);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let record = prove_once(&sys, &state, &mut rng, idx as u64, trial).map_err(|e| e.to_string())?;
            ensure(f.eval(&record.proof).unwrap() == record.m, || format!("{text}: bad proof {:?}", record.proof))?;

            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let out = measure(&f, &state, &mut rng).map_err(|e| e.to_string())?;
            for n in out.collapsed.support() {
                ensure(f.eval(&n.0).unwrap() == out.outcome, || format!("{text}: {n} in collapse of {}", out.outcome))?;
            }
            let proof = extract_proof(&f, &out, &mut rng).map_err(|e| e.to_string())?;
            ensure(proof == record.proof && out.outcome == record.m, || format!("{text}: rounds diverge"))?;
            rounds += 1;
        }
    }
    within(start.elapsed(), 30)?;
    Ok(format!("{rounds} rounds over 10 configurations, 100% verified in {:?}", start.elapsed()))
}

/// F = x on the uniform box D = 4: frequencies within 4σ and total variation < 0.02.
fn ac6_sampling() -> Outcome {
    const TRIALS: u64 = 100_000;
    let start = Instant::now();
    let sys = FormalSystem::new(parse_polynomial("x1").unwrap(), "x1");
    let report = run_trials(&sys, &StateSpec::Uniform { k: 1, cutoff: 4 }, TRIALS, 0).map_err(|e| e.to_string())?;
    let p = 0.25f64;
    let sigma = (p * (1.0 - p) / TRIALS as f64).sqrt();
    for m in 0..4u64 {
        let freq = report.empirical.get(&big(m)).copied().unwrap_or(0) as f64 / TRIALS as f64;
        ensure((freq - p).abs() <= 4.0 * sigma, || format!("outcome {m}: frequency {freq}"))?;
    }
    ensure(report.total_variation < 0.02, || format!("total variation {}", report.total_variation))?;
    within(start.elapsed(), 30)?;
    Ok(format!("total variation {:.2e} in {:?}", report.total_variation, start.elapsed()))
}

/// measure vs measure-numbers-then-evaluate over 100 000 rounds each.
fn ac7_two_routes() -> Outcome {
    const TRIALS: u64 = 100_000;
    let f = parse_polynomial("2*x1 + 3*x2 + 1").unwrap();
    let state = make_state(&StateSpec::Coherent { k: 2, cutoff: 4, alpha: vec![[1.0, 0.0], [0.7, 0.2]] }).unwrap();
    let mut direct: BTreeMap<BigUint, u64> = BTreeMap::new();
    let mut two_step: BTreeMap<BigUint, u64> = BTreeMap::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..TRIALS {
        *direct.entry(measure(&f, &state, &mut rng).map_err(|e| e.to_string())?.outcome).or_default() += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..TRIALS {
        let (m, n) = measure_by_numbers(&f, &state, &mut rng).map_err(|e| e.to_string())?;
        ensure(f.eval(&n).unwrap() == m, || "two-step outcome mismatch".into())?;
        *two_step.entry(m).or_default() += 1;
    }
    let a = OutcomeDistribution::from_counts(&direct);
    let b = OutcomeDistribution::from_counts(&two_step);
    let tv = a.total_variation(&b);
    ensure(tv < 0.02, || format!("total variation {tv}"))?;
    let theory = outcome_distribution(&f, &state).unwrap();
    Ok(format!(
        "TV(direct, two-step) = {tv:.2e}; vs Born rule {:.2e} / {:.2e}",
        a.total_variation(&theory),
        b.total_variation(&theory)
    ))
}

fn scratch_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qprove-acceptance-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

/// Each CLI invocation run twice produces identical bytes.
fn ac8_determinism() -> Outcome {
    let dir = scratch_dir();
    let state = dir.join("state.json");
    fs::write(&state, r#"{"kind":"random","k":2,"cutoff":4,"seed":5}"#).unwrap();
    let state = state.to_str().unwrap().to_string();
    let records = dir.join("records.jsonl").to_str().unwrap().to_string();
    let invocations: Vec<Vec<String>> = [
        vec!["set", "{2}* + {3}* + {1}", "--bound", "30"],
        vec!["spectrum", "2*x1+3*x2+1", "--cutoff", "3", "--bound", "9"],
        vec!["spectrum", "x1^2+2", "--cutoff", "8", "--format", "json"],
        vec!["measure", "x1*x2+x1", "--state", &state, "--trials", "2000", "--seed", "3", "--out", &records],
        vec!["measure", "x1+x2", "--state", &state, "--trials", "500", "--format", "json"],
        vec!["prove", "x1^2+x2", "--state", &state, "--seed", "7"],
        vec!["prove", "x1^2+x2", "--state", &state],
    ]
    .into_iter()
    .map(|v| v.into_iter().map(String::from).collect())
    .collect();
    let exe = env!("CARGO_BIN_EXE_qprove");
    for args in &invocations {
        let mut outputs = Vec::new();
        for _ in 0..2 {
            let out = Command::new(exe).args(args).output().map_err(|e| e.to_string())?;
            ensure(out.status.success(), || format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)))?;
            let side = if args.contains(&records) { fs::read(&records).unwrap() } else { Vec::new() };
            outputs.push((out.stdout, side));
        }
        ensure(outputs[0] == outputs[1], || format!("{args:?} differs between runs"))?;
    }
    Ok(format!("{} invocations byte-identical", invocations.len()))
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("AC1 canonicalization matches direct evaluation", ac1_canonicalization),
        ("AC2 truncated spectrum equals range below T(D)", ac2_representation),
        ("AC3 Jacobi eigensolver cross-check", ac3_eigensolver),
        ("AC4 ladder algebra on interior states", ac4_ladder_algebra),
        ("AC5 measurement soundness", ac5_soundness),
        ("AC6 sampling statistics", ac6_sampling),
        ("AC7 two-route measurement identity", ac7_two_routes),
        ("AC8 CLI determinism", ac8_determinism),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                println!("FAIL  {name}: {detail}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn distinct_theorems_cover_the_box() {
    let sys = FormalSystem::new(parse_polynomial("2*x1 + 3*x2 + 1").unwrap(), "linear");
    let report = run_trials(&sys, &StateSpec::Uniform { k: 2, cutoff: 3 }, 20_000, 0).unwrap();
    let seen: BTreeSet<u64> = report.empirical.keys().map(|m| u64::try_from(m).unwrap()).collect();
    assert_eq!(seen, [1, 3, 4, 5, 6, 7, 8, 9, 11].into());
}
