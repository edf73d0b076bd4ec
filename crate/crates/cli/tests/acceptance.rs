//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line,
//! written straight to stderr so it shows up without `--nocapture`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use selbal::bounds::{prop1_condition, prop1_threshold, sigma_brackets, DEFAULT_THRESHOLD_CAP};
use selbal::construction::{
    build_instance, figure_example, plan_parameters, ConstructionParams, LevelZero,
};
use selbal::geometry::{
    find_shell, lonely_points, lonely_witness_for, smallest_shell, LatticeShell, PointSet,
};
use selbal::instance::parse_family;
use selbal::solver::{
    boundary_combinations, sample_random, solve_branch_bound, solve_exhaustive, solve_mitm,
    structural_verify, MitmOptions, Verdict,
};
use selbal::{combine, ScaledVector, SignVector, UnitVectorFamily};

fn run(id: u32, title: &str, limit: Duration, body: impl FnOnce() -> Result<String, String>) {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(body)).unwrap_or_else(|panic| {
        let msg = panic
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".into());
        Err(msg)
    });
    let elapsed = start.elapsed();
    let outcome = match outcome {
        Ok(detail) if elapsed > limit => Err(format!(
            "{detail}; runtime {elapsed:.2?} over the {limit:?} limit"
        )),
        other => other,
    };
    let line = match &outcome {
        Ok(detail) => format!("criterion {id} [{title}]: PASS ({detail}; {elapsed:.2?})\n"),
        Err(why) => format!("criterion {id} [{title}]: FAIL ({why}; {elapsed:.2?})\n"),
    };
    let _ = std::io::stderr().write_all(line.as_bytes());
    if let Err(why) = outcome {
        panic!("criterion {id} failed: {why}");
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn scratch(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR"))
        .join(format!("acceptance-{}-{name}", std::process::id()))
}

fn selbal(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_selbal"))
        .args(args)
        .output()
        .expect("run selbal");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
    )
}

/// Random exact unit vectors: signed integer decompositions of `p^(2k)`
/// into at most `n` squares, placed on random coordinates.
fn random_family(rng: &mut ChaCha8Rng, m: usize, n: usize, base: u32) -> UnitVectorFamily {
    let (exp, shapes): (u32, Vec<Vec<i64>>) = match (base, rng.random_bool(0.5)) {
        (2, true) => (1, vec![vec![2], vec![1, 1, 1, 1]]),
        (2, false) => (
            2,
            vec![
                vec![4],
                vec![2, 2, 2, 2],
                vec![3, 2, 1, 1, 1],
                vec![2, 2, 2, 1, 1, 1, 1],
                vec![3, 1, 1, 1, 1, 1, 1, 1],
            ],
        ),
        (3, _) => (
            1,
            vec![vec![3], vec![2, 2, 1], vec![2, 1, 1, 1, 1, 1], vec![1; 9]],
        ),
        _ => unreachable!("bases 2 and 3 only"),
    };
    let shapes: Vec<&Vec<i64>> = shapes.iter().filter(|s| s.len() <= n).collect();
    let mut vectors: Vec<ScaledVector> = Vec::with_capacity(m);
    while vectors.len() < m {
        if !vectors.is_empty() && rng.random_bool(0.08) {
            // Occasionally repeat or negate an earlier vector.
            let j = rng.random_range(0..vectors.len());
            let sign = if rng.random_bool(0.5) { 1 } else { -1 };
            let entries = vectors[j]
                .entries()
                .iter()
                .map(|&(i, x)| (i, sign * x))
                .collect();
            vectors.push(ScaledVector::new(n, base, exp, entries).unwrap());
            continue;
        }
        let shape = shapes[rng.random_range(0..shapes.len())];
        let mut coords: Vec<usize> = (0..n).collect();
        for i in 0..shape.len() {
            let j = rng.random_range(i..n);
            coords.swap(i, j);
        }
        let entries = shape
            .iter()
            .zip(&coords)
            .map(|(&x, &c)| (c, if rng.random_bool(0.5) { x } else { -x }))
            .collect();
        vectors.push(ScaledVector::new(n, base, exp, entries).unwrap());
    }
    UnitVectorFamily::new(vectors).unwrap()
}

fn cross() -> LatticeShell {
    LatticeShell::new(2, vec![vec![1, 0], vec![-1, 0], vec![0, 1], vec![0, -1]], 1).unwrap()
}

#[test]
fn criterion_1_figure_reproduction() {
    run(1, "figure example", Duration::from_secs(30), || {
        let path = scratch("figure.json");
        let p = path.to_str().unwrap();
        let (code, _) = selbal(&["generate", "--example-figure2", "-o", p]);
        ensure(code == 0, || format!("generate exited with {code}"))?;
        let fam =
            parse_family(&std::fs::read_to_string(&path).unwrap()).map_err(|e| e.to_string())?;
        ensure(fam.len() == 34 && fam.dim() == 25, || {
            format!("{} vectors in R^{}", fam.len(), fam.dim())
        })?;
        ensure(fam.base() == 2 && fam.exp() == 1, || {
            "scale is not 2^1".into()
        })?;
        let ones = fam
            .vectors()
            .iter()
            .filter(|v| v.nnz() == 1 && v.entries()[0].1.abs() == 2)
            .count();
        let halves = fam
            .vectors()
            .iter()
            .filter(|v| v.nnz() == 4 && v.entries().iter().all(|&(_, x)| x == 1))
            .count();
        ensure(ones == 25 && halves == 9, || {
            format!("{ones} basis vectors, {halves} half-sums")
        })?;
        let structural = structural_verify(&fam).map_err(|e| e.to_string())?;
        ensure(structural.is_not_balancing(), || format!("{structural:?}"))?;
        let (code, _) = selbal(&["verify", p]);
        ensure(code == 0, || format!("verify exited with {code}"))?;
        let sampled = sample_random(&fam, 1_000_000, 20_240_601).map_err(|e| e.to_string())?;
        ensure(
            matches!(
                sampled,
                Verdict::Inconclusive {
                    explored: 1_000_000,
                    ..
                }
            ),
            || format!("sampling found {sampled:?}"),
        )?;
        let bb = solve_branch_bound(&fam, 100_000_000).map_err(|e| e.to_string())?;
        Ok(format!(
            "34 vectors in R^25 (25 basis, 9 half-sums), structural pass, 10^6 samples without witness, \
             branch and bound {} after {} nodes",
            if bb.is_not_balancing() { "not balancing" } else { "undecided" },
            bb.explored()
        ))
    });
}

#[test]
fn criterion_2_exhaustive_ground_truth() {
    run(
        2,
        "exhaustive ground truth",
        Duration::from_secs(10),
        || {
            let t0 = Instant::now();
            let path = scratch("grid4.json");
            let p = path.to_str().unwrap();
            let (code, _) = selbal(&[
                "generate", "-d", "2", "-p", "2", "-k", "1", "-L", "4", "-o", p,
            ]);
            ensure(code == 0, || format!("generate exited with {code}"))?;
            let fam = parse_family(&std::fs::read_to_string(&path).unwrap())
                .map_err(|e| e.to_string())?;
            ensure(fam.len() == 8 && fam.dim() == 16, || {
                format!("m = {}, n = {}", fam.len(), fam.dim())
            })?;
            let v = solve_exhaustive(&fam, u64::MAX).map_err(|e| e.to_string())?;
            ensure(v.explored() == 3280, || {
                format!("explored {}", v.explored())
            })?;
            ensure(v.min_norm_sq_scaled() == Some(fam.scale_sq()), || {
                format!("{v:?}")
            })?;
            let first = t0.elapsed();
            ensure(first < Duration::from_secs(5), || {
                format!("first instance took {first:?}")
            })?;

            let t1 = Instant::now();
            let halves = UnitVectorFamily::new(figure_example().vectors()[25..].to_vec()).unwrap();
            let v = solve_exhaustive(&halves, u64::MAX).map_err(|e| e.to_string())?;
            ensure(v.is_not_balancing(), || format!("{v:?}"))?;
            // Independent pass over all 3^9 - 1 non-trivial sign vectors.
            let rows: Vec<Vec<(usize, i64)>> = halves
                .vectors()
                .iter()
                .map(|u| u.entries().to_vec())
                .collect();
            let mut fewest_halves = usize::MAX;
            let zero = (3u32.pow(9) - 1) / 2;
            for code in (0..3u32.pow(9)).filter(|&c| c != zero) {
                let mut sum = [0i64; 25];
                let mut c = code;
                for row in &rows {
                    let e = (c % 3) as i64 - 1;
                    c /= 3;
                    for &(x, u) in row {
                        sum[x] += e * u;
                    }
                }
                if sum.iter().all(|&s| s == 0) {
                    return Err(format!("sign code {code} cancels completely"));
                }
                let halves_here = sum.iter().filter(|s| s.abs() == 1).count();
                let norm: i64 = sum.iter().map(|s| s * s).sum();
                fewest_halves = fewest_halves.min(halves_here);
                if norm < 4 {
                    return Err(format!("sign code {code} has norm^2 {norm}/4"));
                }
            }
            ensure(fewest_halves >= 4, || {
                format!("only {fewest_halves} coordinates of 1/2")
            })?;
            let second = t1.elapsed();
            ensure(second < Duration::from_secs(5), || {
                format!("second instance took {second:?}")
            })?;
            Ok(format!(
                "L=4 instance: 3280 canonical sign vectors, min norm^2 exactly 1; 9 half-sums: \
             every nonzero sign vector keeps >= {fewest_halves} coordinates of 1/2"
            ))
        },
    );
}

#[test]
fn criterion_3_engine_equivalence() {
    run(3, "engine equivalence", Duration::from_secs(120), || {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (mut balancing, mut not) = (0, 0);
        for i in 0..100 {
            let m = rng.random_range(2..=12);
            let n = rng.random_range(2..=10);
            let fam = random_family(&mut rng, m, n, 2);
            let ex = solve_exhaustive(&fam, u64::MAX).map_err(|e| e.to_string())?;
            let mm = solve_mitm(&fam, MitmOptions::default()).map_err(|e| e.to_string())?;
            let bb = solve_branch_bound(&fam, u64::MAX).map_err(|e| e.to_string())?;
            for (name, other) in [("mitm", &mm), ("branch and bound", &bb)] {
                ensure(ex.is_balancing() == other.is_balancing(), || {
                    format!("family {i}: exhaustive {ex:?} vs {name} {other:?}")
                })?;
                ensure(
                    ex.min_norm_sq_scaled() == other.min_norm_sq_scaled(),
                    || format!("family {i}: minima differ, exhaustive {ex:?} vs {name} {other:?}"),
                )?;
            }
            if ex.is_balancing() {
                balancing += 1;
            } else {
                not += 1;
            }
        }
        ensure(balancing > 0 && not > 0, || {
            format!("degenerate sample: {balancing} / {not}")
        })?;
        Ok(format!(
            "100 families agree ({balancing} balancing, {not} not balancing)"
        ))
    });
}

#[test]
fn criterion_4_lemma_suite() {
    run(4, "lonely point lemma", Duration::from_secs(10), || {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut checked = 0usize;
        for pair in 0..200 {
            let d = rng.random_range(2..=3usize);
            let b = rng.random_range(1..=4i64);
            // A random norm class of [-b, b]^d, cut down to at most 12 points.
            let mut classes: BTreeMap<i64, Vec<Vec<i64>>> = BTreeMap::new();
            let side = 2 * b + 1;
            for code in 0..side.pow(d as u32) {
                let p: Vec<i64> = (0..d)
                    .map(|j| (code / side.pow(j as u32)) % side - b)
                    .collect();
                let nsq: i64 = p.iter().map(|x| x * x).sum();
                if nsq > 0 {
                    classes.entry(nsq).or_default().push(p);
                }
            }
            let keys: Vec<i64> = classes.keys().copied().collect();
            let mut c = classes[&keys[rng.random_range(0..keys.len())]].clone();
            let c_len = rng.random_range(1..=c.len().min(12));
            for i in 0..c_len {
                let j = rng.random_range(i..c.len());
                c.swap(i, j);
            }
            c.truncate(c_len);
            let t_len = rng.random_range(1..=12);
            let mut t: Vec<Vec<i64>> = Vec::new();
            while t.len() < t_len {
                let p: Vec<i64> = (0..d).map(|_| rng.random_range(-3..=3)).collect();
                if !t.contains(&p) {
                    t.push(p);
                }
            }
            let cs = PointSet::new(d, c.clone()).unwrap();
            let ts = PointSet::new(d, t.clone()).unwrap();

            let mut reps: HashMap<Vec<i64>, usize> = HashMap::new();
            for y in &c {
                for tv in &t {
                    let x: Vec<i64> = y.iter().zip(tv).map(|(a, b)| a + b).collect();
                    *reps.entry(x).or_default() += 1;
                }
            }
            let brute: HashSet<Vec<i64>> = reps
                .iter()
                .filter(|(_, &k)| k == 1)
                .map(|(x, _)| x.clone())
                .collect();
            let listed: HashSet<Vec<i64>> = lonely_points(&cs, &ts)
                .map_err(|e| e.to_string())?
                .into_iter()
                .map(|l| l.x)
                .collect();
            ensure(brute == listed, || {
                format!("pair {pair}: lonely sets differ")
            })?;
            for y in &c {
                let (x, tv) = lonely_witness_for(y, &cs, &ts).map_err(|e| e.to_string())?;
                let diff: Vec<i64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
                ensure(diff == tv && t.contains(&tv), || {
                    format!("pair {pair}: x - y is not the returned t")
                })?;
                ensure(reps.get(&x) == Some(&1), || {
                    format!("pair {pair}: {x:?} has {:?} representations", reps.get(&x))
                })?;
                checked += 1;
            }
        }
        Ok(format!(
            "200 pairs, {checked} witnesses with exactly one representation"
        ))
    });
}

#[test]
fn criterion_5_pigeonhole() {
    run(5, "pigeonhole shells", Duration::from_secs(10), || {
        for d in 1..=3u32 {
            for b in 1..=8i64 {
                let shell = find_shell(d as usize, b).map_err(|e| e.to_string())?;
                let side = 2 * b + 1;
                let mut counts: HashMap<i64, usize> = HashMap::new();
                for code in 0..side.pow(d) {
                    let nsq: i64 = (0..d)
                        .map(|j| ((code / side.pow(j)) % side - b).pow(2))
                        .sum();
                    if nsq > 0 {
                        *counts.entry(nsq).or_default() += 1;
                    }
                }
                let best = *counts.values().max().unwrap();
                let num = side.pow(d) - 1;
                let den = d as i64 * b * b;
                let bound = (num + den - 1) / den;
                ensure(shell.len() == best, || {
                    format!("d={d} D={b}: {} points, oracle {best}", shell.len())
                })?;
                ensure(shell.len() as i64 >= bound, || {
                    format!("d={d} D={b}: {} < {bound}", shell.len())
                })?;
                ensure(
                    shell
                        .points()
                        .iter()
                        .all(|p| p.iter().map(|x| x * x).sum::<i64>() == shell.radius_sq()),
                    || format!("d={d} D={b}: unequal norms"),
                )?;
            }
        }
        let s = find_shell(2, 4).map_err(|e| e.to_string())?;
        let mut want: Vec<Vec<i64>> = vec![];
        for (a, b) in [(3, 4), (4, 3)] {
            for (sa, sb) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                want.push(vec![sa * a, sb * b]);
            }
        }
        want.sort();
        ensure(s.radius_sq() == 25 && s.points() == want.as_slice(), || {
            format!("d=2 D=4 gave {s:?}")
        })?;
        Ok("24 (d, D) pairs meet the bound and match the enumeration oracle; d=2 D=4 is the 8-point R^2=25 shell".into())
    });
}

fn upper_ratio(n: u64, m: u64) -> f64 {
    m as f64 / (n as f64 * (n as f64).log2())
}

#[test]
fn criterion_6_threshold_certification() {
    run(
        6,
        "threshold certification",
        Duration::from_secs(60),
        || {
            let mut thresholds = vec![0u64; 4097];
            for n in 1..=4096u64 {
                let m = prop1_threshold(n)
                    .map_err(|e| e.to_string())?
                    .ok_or_else(|| format!("no threshold below the cap for n = {n}"))?;
                ensure(prop1_condition(m, n).map_err(|e| e.to_string())?, || {
                    format!("n = {n}: fails at m = {m}")
                })?;
                ensure(
                    m == 1 || !prop1_condition(m - 1, n).map_err(|e| e.to_string())?,
                    || format!("n = {n}: already holds at m - 1 = {}", m - 1),
                )?;
                thresholds[n as usize] = m;
            }
            // Top decade [410, 4096] on a grid of step 8.
            let grid: Vec<u64> = (0..)
                .map(|i| 4096 - 8 * i)
                .take_while(|&n| n >= 410)
                .collect();
            let rises = grid
                .windows(2)
                .filter(|w| {
                    upper_ratio(w[0], thresholds[w[0] as usize])
                        >= upper_ratio(w[1], thresholds[w[1] as usize])
                })
                .count();
            ensure(rises == 0, || {
                format!("ratio rises {rises} times over the top decade")
            })?;
            let last = upper_ratio(4096, thresholds[4096]);
            ensure(last < 0.6, || {
                format!(
                "minimality certified for all n <= 4096 and the ratio decreases over the top decade, \
                 but threshold/(n log2 n) = {last:.4} at n = 4096 (m = {}), not below 0.6",
                thresholds[4096]
            )
            })?;
            Ok(format!("ratio at 4096 is {last:.4}"))
        },
    );
}

#[test]
fn criterion_7_bracket_consistency() {
    run(7, "bracket consistency", Duration::from_secs(60), || {
        let rows = sigma_brackets(1..=4096, DEFAULT_THRESHOLD_CAP).map_err(|e| e.to_string())?;
        let mut both = 0;
        for b in &rows {
            if let (Some(lo), Some(hi)) = (b.lower_m, b.upper_m) {
                ensure(lo < hi, || format!("n = {}: lower {lo} >= upper {hi}", b.n))?;
                both += 1;
            }
        }
        let at25 = rows[24].lower_m.unwrap_or(0);
        ensure(rows[24].n == 25 && at25 >= 34, || {
            format!("n = 25 lower side is {at25}")
        })?;
        Ok(format!(
            "{both} rows with lower_m < upper_m; n = 25 lower side {at25}"
        ))
    });
}

#[test]
fn criterion_8_norm_exactness() {
    run(8, "norm exactness", Duration::from_secs(60), || {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut pairs = 0u64;
        let mut worst = 0f64;
        while pairs < 100_000 {
            let base = if rng.random_bool(0.5) { 2 } else { 3 };
            let m = rng.random_range(1..=20);
            let n = rng.random_range(4..=12);
            let fam = random_family(&mut rng, m, n, base);
            let dense: Vec<Vec<f64>> = fam.vectors().iter().map(|v| v.to_dense_f64()).collect();
            for _ in 0..100 {
                let eps =
                    SignVector::new((0..m).map(|_| rng.random_range(-1i8..=1)).collect()).unwrap();
                let exact = combine(&fam, &eps).unwrap().norm_sq_scaled().unwrap();
                let mut sum = vec![0f64; n];
                for (u, &e) in dense.iter().zip(eps.coefficients()) {
                    for (s, x) in sum.iter_mut().zip(u) {
                        *s += e as f64 * x;
                    }
                }
                let float = sum.iter().map(|x| x * x).sum::<f64>() * fam.scale_sq() as f64;
                let err = if exact == 0 {
                    float.abs()
                } else {
                    (float - exact as f64).abs() / exact as f64
                };
                worst = worst.max(err);
                ensure(err <= 1e-9, || format!("exact {exact} vs float {float}"))?;
                pairs += 1;
            }
        }
        let mut families = vec![figure_example()];
        for (base, side, shell) in [
            (2, 4, cross()),
            (2, 5, cross()),
            (3, 12, smallest_shell(2, 9).unwrap()),
            (5, 67, smallest_shell(2, 25).unwrap()),
        ] {
            let params =
                ConstructionParams::new(base, 1, side, shell, LevelZero::Translates).unwrap();
            families.push(build_instance(&params).unwrap());
        }
        for (lambda, d) in [(2.0, 2), (1.5, 3)] {
            families.push(
                build_instance(&plan_parameters(lambda, d).unwrap().params().unwrap()).unwrap(),
            );
        }
        let mut vectors = 0;
        for fam in &families {
            for v in fam.vectors() {
                ensure(v.norm_sq_scaled().unwrap() == fam.scale_sq(), || {
                    "constructed vector off the unit sphere".into()
                })?;
                vectors += 1;
            }
        }
        Ok(format!(
            "{pairs} pairs, worst relative error {worst:.1e}; {vectors} constructed vectors exactly unit"
        ))
    });
}

fn in_plus_minus_u(fam: &UnitVectorFamily, eps: &SignVector) -> bool {
    let v = combine(fam, eps).unwrap();
    fam.vectors().iter().any(|u| {
        u.entries() == v.entries()
            || u.entries()
                .iter()
                .zip(v.entries())
                .all(|(a, b)| a.0 == b.0 && a.1 == -b.1)
                && u.nnz() == v.nnz()
    })
}

#[test]
fn criterion_9_odd_base_probe() {
    run(9, "odd base probe", Duration::from_secs(120), || {
        let shell = smallest_shell(2, 25).map_err(|e| e.to_string())?;
        let r = shell.r();
        let mut notes = Vec::new();
        for (i, side) in [2 * r as u64 + 1, 2 * r as u64 + 2, 2 * r as u64 + 3]
            .into_iter()
            .enumerate()
        {
            let params =
                ConstructionParams::new(5, 1, side, shell.clone(), LevelZero::Translates).unwrap();
            let fam = build_instance(&params).unwrap();
            let scan =
                boundary_combinations(&fam, 1_000_000_000, 1_000_000).map_err(|e| e.to_string())?;
            if !scan.complete {
                ensure(i > 0, || "smallest instance exceeded the budget".into())?;
                let sampled = sample_random(&fam, 1_000_000, 9).map_err(|e| e.to_string())?;
                let structural = structural_verify(&fam).map_err(|e| e.to_string())?;
                ensure(
                    !sampled.is_balancing() && structural.is_not_balancing(),
                    || "fallback failed".into(),
                )?;
                notes.push(format!(
                    "L={side}: over budget, sampled + structural only, strictness untested"
                ));
                continue;
            }
            ensure(scan.below.is_empty(), || {
                format!("L={side}: witness {}", scan.below[0])
            })?;
            let outside: Vec<String> = scan
                .at_boundary
                .iter()
                .filter(|e| !in_plus_minus_u(&fam, e))
                .map(|e| e.to_string())
                .collect();
            ensure(outside.is_empty(), || {
                format!("L={side}: norm-1 combinations outside +-U: {outside:?}")
            })?;
            if i == 0 {
                let listed: Vec<String> = scan.at_boundary.iter().map(|e| e.to_string()).collect();
                notes.push(format!(
                    "R^2={} r={r} L={side} m={}: no witness, norm-1 sign vectors {listed:?} all in +-U",
                    shell.radius_sq(),
                    fam.len()
                ));
            } else {
                notes.push(format!(
                    "L={side} m={}: no witness, {} norm-1 sign vectors all in +-U ({} nodes)",
                    fam.len(),
                    scan.at_boundary.len(),
                    scan.stats.nodes
                ));
            }
        }
        Ok(notes.join("; "))
    });
}
