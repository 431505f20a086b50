//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::f64::consts::{PI, TAU};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use steklov::asymptotics::{asymptotics_report, multiplicity_report, sn_sd_shift, CLUSTER_TOL};
use steklov::dtn::{solve_mixed_steklov, MixedProblem, SolverParams};
use steklov::experiments::{evaluate_bound, monotonicity_check, schedule, sweep_family, BoundId, BoundSpec, ExperimentError, Ordering};
use steklov::geometry::{boundary_data, make_family, BlobSymmetry, BoundaryData, Condition, FamilySpec, PlanarDomain, ReflectionAxis, Similarity};
use steklov::model_spectra::{
    canonicalize, disk_spectrum, half_disk_spectrum, merge, model_spectrum, quarter_disk_spectrum, recover_boundary_data, ExchangePair,
    ProblemKind, Side,
};
use steklov::symmetry::{quotient, reflection_split_check_with_estimate};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn domain(spec: FamilySpec) -> PlanarDomain {
    make_family(&spec).expect("constructor builds")
}

fn problem(d: PlanarDomain) -> MixedProblem {
    let kind = if d.is_full_steklov() { ProblemKind::Steklov } else { ProblemKind::Mixed };
    MixedProblem::new(d, kind).expect("valid problem")
}

fn half_disk(condition: &str) -> PlanarDomain {
    domain(FamilySpec::HalfDisk { radius: 1.0, condition: condition.into() })
}

fn blob(seed: u64, symmetry: BlobSymmetry) -> PlanarDomain {
    domain(FamilySpec::random_blob(seed, 6, 0.2, symmetry))
}

/// Every constructor family with a few representative parameters.
fn corpus() -> Vec<(String, PlanarDomain)> {
    let specs = vec![
        FamilySpec::Disk { radius: 1.0 },
        FamilySpec::HalfDisk { radius: 1.0, condition: "neumann".into() },
        FamilySpec::HalfDisk { radius: 1.0, condition: "dirichlet".into() },
        FamilySpec::QuarterDisk { radius: 1.0 },
        FamilySpec::Strip { w: 1.0, h: 1.0 },
        FamilySpec::Strip { w: 2.0, h: 0.5 },
        FamilySpec::GpChain { k: 2, eps: 0.1 },
        FamilySpec::GpChain { k: 3, eps: 0.2 },
        FamilySpec::BandleFlower { p: 3 },
        FamilySpec::BandleFlower { p: 4 },
        FamilySpec::BandleChain { p: 3, m: 2, eps: 0.1 },
        FamilySpec::RotCluster { p: 3, m: 1, eps: 0.1 },
        FamilySpec::random_blob(1, 6, 0.2, BlobSymmetry::None),
        FamilySpec::random_blob(2, 6, 0.2, BlobSymmetry::Reflect),
        FamilySpec::random_blob(3, 6, 0.2, BlobSymmetry::Square),
    ];
    specs.into_iter().map(|s| (s.tag(), domain(s))).collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    const K: usize = 100;
    let mut checked = 0;
    // perimeters (p/q) * 2 pi, so the closed forms are rationals
    for (p, q) in [(1u32, 1u32), (1, 2), (3, 2), (2, 5)] {
        let (p, q) = (p as f64, q as f64);
        let l = TAU * p / q;
        let disk = disk_spectrum(l, K);
        let half_n = half_disk_spectrum(l / 2.0, Side::Neumann, K);
        let half_d = half_disk_spectrum(l / 2.0, Side::Dirichlet, K);
        let quarter = quarter_disk_spectrum(l / 4.0, K);
        for j in 0..K {
            let jf = j as f64;
            let expect = [
                (disk.values[j], ((j + 1) / 2) as f64 * q / p),
                (half_n.values[j], jf * q / p),
                (half_d.values[j], (jf + 1.0) * q / p),
                (quarter.values[j], (2.0 * jf + 1.0) * q / p),
            ];
            for (got, want) in expect {
                let err = if want == 0.0 { got.abs() } else { rel(got, want) };
                ensure(err <= 1e-15, || format!("closed form off: {got} vs {want} (l = {l}, j = {j})"))?;
                checked += 1;
            }
        }
    }
    for l in [1.0, PI, 2.5, 7.0_f64.sqrt()] {
        let merged = merge(&[quarter_disk_spectrum(l, K), half_disk_spectrum(l, Side::Dirichlet, K)], K);
        let whole = half_disk_spectrum(2.0 * l, Side::Dirichlet, K);
        for (a, b) in merged.values.iter().zip(&whole.values) {
            ensure(rel(*a, *b) <= 1e-15, || format!("quarter + half-disk merge differs at l = {l}: {a} vs {b}"))?;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("{checked} closed-form entries, merge identity at K = {K}, {elapsed:.2?}"))
}

fn first(d: PlanarDomain, kind: ProblemKind, k: usize, params: &SolverParams) -> Vec<f64> {
    let p = SolverParams { k, ..params.clone() };
    solve_mixed_steklov(&MixedProblem::new(d, kind).unwrap(), &p).unwrap().spectrum.values
}

fn criterion_2() -> Outcome {
    let disk_params = SolverParams { nodes_per_unit_length: 512.0 / TAU, ..SolverParams::default() };
    let start = Instant::now();
    let r = solve_mixed_steklov(&problem(domain(FamilySpec::Disk { radius: 1.0 })), &SolverParams { k: 20, ..disk_params }).unwrap();
    let elapsed = start.elapsed();
    ensure(r.diagnostics.nodes <= 512, || format!("disk used {} nodes", r.diagnostics.nodes))?;
    ensure(elapsed < Duration::from_secs(10), || format!("disk solve took {elapsed:?}"))?;
    let disk_err = r.spectrum.values.iter().enumerate().map(|(j, v)| (v - ((j + 1) / 2) as f64).abs()).fold(0.0, f64::max);
    ensure(disk_err < 1e-8, || format!("disk error {disk_err:.2e}"))?;

    let params = SolverParams::default();
    let sn = first(half_disk("neumann"), ProblemKind::Sn, 10, &params);
    let sd = first(half_disk("neumann"), ProblemKind::Sd, 10, &params);
    // Steklov arc of length pi: sigma = pi j / pi
    let sn_err = sn.iter().enumerate().map(|(j, v)| (v - j as f64).abs()).fold(0.0, f64::max);
    let sd_err = sd.iter().enumerate().map(|(j, v)| (v - (j + 1) as f64).abs()).fold(0.0, f64::max);
    ensure(sn_err < 1e-4 && sd_err < 1e-4, || format!("half-disk errors SN {sn_err:.2e}, SD {sd_err:.2e}"))?;

    let dn = first(domain(FamilySpec::QuarterDisk { radius: 1.0 }), ProblemKind::Mixed, 8, &params);
    // Steklov arc of length pi/2: odd multiples of pi / (2 * pi/2)
    let dn_err = dn.iter().enumerate().map(|(j, v)| (v - (2 * j + 1) as f64).abs()).fold(0.0, f64::max);
    ensure(dn_err < 1e-4, || format!("quarter-disk error {dn_err:.2e}"))?;

    let mut strip_err: f64 = 0.0;
    for n in [1.0, 2.0, 3.0] {
        let v = first(domain(FamilySpec::Strip { w: 1.0, h: n }), ProblemKind::Sn, 2, &params);
        strip_err = strip_err.max((v[1] - PI * (PI * n).tanh()).abs());
    }
    ensure(strip_err < 1e-6, || format!("strip sigma_1 error {strip_err:.2e}"))?;
    Ok(format!(
        "disk {disk_err:.1e} ({} nodes, {elapsed:.2?}); half-disk {:.1e}; quarter-disk {dn_err:.1e}; strip {strip_err:.1e}",
        r.diagnostics.nodes,
        sn_err.max(sd_err)
    ))
}

fn criterion_3() -> Outcome {
    let flower = domain(FamilySpec::BandleFlower { p: 4 });
    // the axis through two petal centers
    let petal_axis = flower
        .symmetry
        .reflections
        .iter()
        .find(|a| {
            flower.arcs().any(|arc| match arc.kind {
                steklov::geometry::ArcKind::Circle { center, .. } => center.norm() > 1e-9 && a.side(center).abs() < 1e-9,
                _ => false,
            })
        })
        .cloned()
        .ok_or("flower has no axis through a petal")?;
    let cases = vec![
        ("disk", domain(FamilySpec::Disk { radius: 1.0 }), ReflectionAxis::horizontal(0.0)),
        ("gp_chain(2,0.1)", domain(FamilySpec::GpChain { k: 2, eps: 0.1 }), ReflectionAxis::horizontal(0.0)),
        ("reflect blob 21", blob(21, BlobSymmetry::Reflect), ReflectionAxis::horizontal(0.0)),
        ("reflect blob 22", blob(22, BlobSymmetry::Reflect), ReflectionAxis::horizontal(0.0)),
        ("bandle_flower(4)", flower, petal_axis),
    ];
    let mut worst: f64 = 0.0;
    for (name, d, axis) in cases {
        let r = reflection_split_check_with_estimate(&d, &axis, 12, &SolverParams::default()).map_err(|e| format!("{name}: {e}"))?;
        ensure(r.within_estimate(10.0) == Some(true), || {
            format!("{name}: mismatch {:?} exceeds 10x estimate {:?}", r.mismatch, r.error_estimate)
        })?;
        worst = worst.max(r.max_mismatch);
    }
    Ok(format!("5 domains, 12 eigenvalues, largest relative mismatch {worst:.1e}"))
}

fn criterion_4() -> Outcome {
    let params = SolverParams::default();
    let eval = |d: &PlanarDomain, id, k| evaluate_bound(&problem(d.clone()), &BoundSpec::new(id, k), &params);
    let disk = domain(FamilySpec::Disk { radius: 1.0 });
    let w = eval(&disk, BoundId::Weinstock, 1).map_err(|e| e.to_string())?;
    ensure(w.margin.abs() < 1e-6, || format!("disk Weinstock margin {:.2e}", w.margin))?;
    let mut min_blob_margin = f64::INFINITY;
    for seed in 100..110 {
        let r = eval(&blob(seed, BlobSymmetry::None), BoundId::Weinstock, 1).map_err(|e| e.to_string())?;
        ensure(r.margin > 0.0, || format!("blob {seed}: Weinstock margin {:.3e}", r.margin))?;
        min_blob_margin = min_blob_margin.min(r.margin);
    }
    let mut evaluated = 0;
    for (name, d) in corpus() {
        for id in [BoundId::Hps, BoundId::Genus0_8pik, BoundId::ThmASharp, BoundId::ThmAGenus0] {
            for k in 1..=3 {
                match eval(&d, id, k) {
                    Ok(r) => {
                        ensure(r.satisfied, || format!("{name}: {id} k = {k} violated, margin {:.3e}", r.margin))?;
                        evaluated += 1;
                    }
                    Err(ExperimentError::NotApplicable(_)) => {}
                    Err(e) => return Err(format!("{name}: {id} k = {k}: {e}")),
                }
            }
        }
    }
    let h = eval(&half_disk("neumann"), BoundId::ThmASharp, 1).map_err(|e| e.to_string())?;
    ensure(h.margin.abs() < 1e-4, || format!("half-disk thmA_sharp margin {:.2e}", h.margin))?;
    Ok(format!(
        "disk Weinstock margin {:.1e}; blob margins >= {min_blob_margin:.3}; {evaluated} corpus evaluations satisfied; half-disk thmA_sharp margin {:.1e}",
        w.margin, h.margin
    ))
}

fn criterion_5() -> Outcome {
    let params = SolverParams::default();
    let mut notes = Vec::new();
    let mut failures = Vec::new();
    for name in ["gp_chain_k2", "rot_cluster_p3_m1"] {
        let entry = schedule(name).ok_or_else(|| format!("missing schedule {name}"))?;
        let limit = entry.limit.ok_or("schedule without limit")?;
        let start = Instant::now();
        let table = sweep_family(&entry.template, &entry.schedule, &entry.bound, &params).map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        let values: Vec<f64> = table.rows.iter().map(|r| r.value).collect();
        let increasing = values.windows(2).all(|w| w[1] > w[0]);
        let below = values.iter().all(|&v| v < limit);
        let shown: Vec<String> = values.iter().map(|v| format!("{:.3}pi", v / PI)).collect();
        notes.push(format!("{name} [{}] in {elapsed:.1?}", shown.join(", ")));
        if !(increasing && below && elapsed < Duration::from_secs(120)) {
            failures.push(format!(
                "{name}: increasing {increasing}, below {:.0}pi {below}, {elapsed:.1?}",
                limit / PI
            ));
        }
    }
    let start = Instant::now();
    for p in [3, 4, 5] {
        let d = domain(FamilySpec::BandleFlower { p });
        let r = evaluate_bound(&problem(d), &BoundSpec::new(BoundId::BandleLower, p).with_order(p), &params).map_err(|e| e.to_string())?;
        notes.push(format!("flower({p}) {:.3}pi", r.value / PI));
        if !(r.value > r.bound_value) {
            failures.push(format!("bandle_flower({p}): sigma_p L = {:.6} not above {:.6}", r.value, r.bound_value));
        }
    }
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(120) {
        failures.push(format!("flower sweep took {elapsed:?}"));
    }
    if failures.is_empty() {
        Ok(notes.join("; "))
    } else {
        Err(format!("{} | {}", failures.join("; "), notes.join("; ")))
    }
}

fn criterion_6() -> Outcome {
    let params = SolverParams::default();
    let exact = |kind: ProblemKind, h: f64, k: usize| match kind {
        ProblemKind::Sn => PI * k as f64 * (PI * k as f64 * h).tanh(),
        _ => PI * (k + 1) as f64 / (PI * (k + 1) as f64 * h).tanh(),
    };
    let mut strict = 0;
    let mut unresolved = 0;
    for (kind, tol) in [(ProblemKind::Sn, 1e-8), (ProblemKind::Sd, 1e-6)] {
        for (hs, hb) in [(0.5, 1.0), (1.0, 2.0)] {
            let small = domain(FamilySpec::Strip { w: 1.0, h: hs });
            let big = domain(FamilySpec::Strip { w: 1.0, h: hb });
            let r = monotonicity_check(&small, &big, kind, 5, tol, &params).map_err(|e| e.to_string())?;
            ensure(r.consistent, || format!("{kind:?} h {hs} < {hb}: ordering violated {:?}", r.rows))?;
            let sign = if kind == ProblemKind::Sn { 1.0 } else { -1.0 };
            for row in &r.rows {
                let (es, eb) = (exact(kind, hs, row.k), exact(kind, hb, row.k));
                let exact_gap = sign * (eb - es) / eb;
                if exact_gap > tol {
                    ensure(row.ordering == Ordering::Strict, || {
                        format!("{kind:?} h {hs} < {hb}, k = {}: exact gap {exact_gap:.2e} but {:?} ({:.2e})", row.k, row.ordering, row.gap)
                    })?;
                    strict += 1;
                } else {
                    unresolved += 1;
                }
            }
        }
    }
    Ok(format!("{strict} strict orderings reproduced, {unresolved} with exact gap below tolerance, no violations"))
}

fn criterion_7() -> Outcome {
    let params = SolverParams { nodes_per_unit_length: 100.0, ..SolverParams::default() };
    let reflect = blob(31, BlobSymmetry::Reflect);
    let cases: Vec<(String, MixedProblem)> = vec![
        ("blob 11".into(), problem(blob(11, BlobSymmetry::None))),
        ("blob 12".into(), problem(blob(12, BlobSymmetry::None))),
        ("blob 13".into(), problem(blob(13, BlobSymmetry::None))),
        ("strip(2,0.5) SN".into(), MixedProblem::new(domain(FamilySpec::Strip { w: 2.0, h: 0.5 }), ProblemKind::Sn).unwrap()),
        (
            "half blob 31 SN".into(),
            quotient(&reflect, &ReflectionAxis::horizontal(0.0), Condition::Neumann).map_err(|e| e.to_string())?,
        ),
    ];
    let mut slopes = Vec::new();
    for (name, p) in cases {
        let r = asymptotics_report(&p, 1..=24, &params).map_err(|e| format!("{name}: {e}"))?;
        ensure(r.verdict.decreasing, || format!("{name}: residuals do not decay {:?}", r.verdict))?;
        slopes.push(format!("{name} {:.1}", r.verdict.log_slope));
    }
    let shift = sn_sd_shift(&MixedProblem::new(half_disk("neumann"), ProblemKind::Sn).unwrap(), 1, 0..=10, &SolverParams::default())
        .map_err(|e| e.to_string())?;
    let r10 = shift.rows.iter().find(|r| r.k == 10).ok_or("no k = 10 row")?.residual;
    ensure(r10 < 1e-4, || format!("half-disk shift residual at k = 10: {r10:.2e}"))?;
    Ok(format!("log slopes: {}; half-disk shift at k = 10: {r10:.1e}", slopes.join(", ")))
}

/// Random boundary data with lengths `(a/b) * {1, sqrt 2, sqrt 3}` of one
/// interval type.
fn random_data(rng: &mut ChaCha8Rng, kind: ProblemKind) -> BoundaryData {
    let factors = [1.0, 2.0_f64.sqrt(), 3.0_f64.sqrt()];
    let n = rng.gen_range(0..=2);
    let m = rng.gen_range(if n == 0 { 1 } else { 0 }..=2);
    let mut length = || rng.gen_range(1..=4) as f64 / rng.gen_range(1..=3) as f64 * factors[rng.gen_range(0..3)];
    let l_s: Vec<f64> = (0..n).map(|_| length()).collect();
    let l_star: Vec<f64> = (0..m).map(|_| length()).collect();
    match kind {
        ProblemKind::Sd => BoundaryData { l_s, l_d: l_star, ..BoundaryData::default() },
        _ => BoundaryData { l_s, l_n: l_star, ..BoundaryData::default() },
    }
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..25 {
        let kind = if i % 2 == 0 { ProblemKind::Sn } else { ProblemKind::Sd };
        let data = random_data(&mut rng, kind);
        let star = if kind == ProblemKind::Sn { data.l_n.clone() } else { data.l_d.clone() };
        let spectrum = model_spectrum(&data, 200).map_err(|e| e.to_string())?;
        let r = recover_boundary_data(&spectrum, kind, 1e-9).map_err(|e| format!("fixture {i} {data:?}: {e}"))?;
        let want = canonicalize(&ExchangePair::new(data.l_s.clone(), star));
        let same = |a: &[f64], b: &[f64]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| rel(*x, *y) < 1e-9);
        ensure(same(&r.class.l_s, &want.l_s) && same(&r.class.l_star, &want.l_star), || {
            format!("fixture {i} {data:?}: recovered {:?}, expected {want:?}", r.class)
        })?;
    }
    let mut pairs = 0;
    while pairs < 10 {
        let data = random_data(&mut rng, ProblemKind::Sn);
        let pair = ExchangePair::new(data.l_s.clone(), data.l_n.clone());
        let spectrum = model_spectrum(&data, 200).unwrap();
        for other in pair.neighbours().into_iter().take(10 - pairs) {
            let d = BoundaryData { l_s: other.l_s.clone(), l_n: other.l_star.clone(), ..BoundaryData::default() };
            let s = model_spectrum(&d, 200).unwrap();
            ensure(s.values == spectrum.values, || format!("exchange {pair:?} -> {other:?} changes the spectrum"))?;
            pairs += 1;
        }
    }
    Ok(format!("25 recoveries with 200-entry tails, {pairs} exchange pairs bitwise invariant"))
}

fn criterion_9(solved: &[(String, BoundaryData, steklov::model_spectra::Spectrum)]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for i in 0..25 {
        let kind = if i % 2 == 0 { ProblemKind::Sn } else { ProblemKind::Sd };
        let data = random_data(&mut rng, kind);
        let s = model_spectrum(&data, 200).unwrap();
        let r = multiplicity_report(&s, CLUSTER_TOL, &data, 0);
        ensure(r.pass, || format!("model spectrum of {data:?} exceeds 2n + m"))?;
    }
    for (name, data, s) in solved {
        let burn_in = data.n() + data.m() + 2;
        let r = multiplicity_report(s, CLUSTER_TOL, data, burn_in);
        ensure(r.pass, || format!("{name}: cluster beyond {burn_in} exceeds {}: {:?}", r.bound, r.clusters))?;
    }
    Ok(format!("25 model spectra and {} solver spectra within 2n + m", solved.len()))
}

fn criterion_10(corpus: &[(String, PlanarDomain)], base: &[Vec<f64>]) -> Outcome {
    let params = SolverParams { k: 12, ..SolverParams::default() };
    let mut worst: f64 = 0.0;
    for ((name, d), reference) in corpus.iter().zip(base) {
        for t in [0.5, 2.0] {
            let scaled = d.transformed(&Similarity::dilation(t));
            let l = scaled.steklov_mass();
            let values = solve_mixed_steklov(&problem(scaled), &params).map_err(|e| format!("{name}: {e}"))?.spectrum.values;
            for (j, (v, r)) in values.iter().zip(reference).enumerate() {
                let (a, b) = (v * l, *r);
                let err = if b.abs() < 1e-6 { (a - b).abs() } else { rel(a, b) };
                ensure(err < 1e-7, || format!("{name}, t = {t}, index {j}: {a} vs {b}"))?;
                worst = worst.max(err);
            }
        }
    }
    Ok(format!("{} domains at t = 0.5 and 2, largest relative change {worst:.1e}", corpus.len()))
}

fn run(name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
        Err(format!("panicked: {}", msg.unwrap_or_default()))
    });
    let elapsed = start.elapsed();
    match outcome {
        Ok(detail) => {
            println!("PASS criterion {name} ({elapsed:.1?}): {detail}");
            true
        }
        Err(detail) => {
            println!("FAIL criterion {name} ({elapsed:.1?}): {detail}");
            false
        }
    }
}

fn main() {
    let corpus = corpus();
    let params = SolverParams { k: 12, ..SolverParams::default() };
    // normalized spectra at scale 1 and boundary data, shared by 9 and 10
    let solved: Vec<(String, BoundaryData, steklov::model_spectra::Spectrum)> = corpus
        .iter()
        .map(|(name, d)| {
            let p = problem(d.clone());
            let data = boundary_data(&p.effective_domain()).expect("boundary data");
            let s = solve_mixed_steklov(&p, &params).expect("corpus solves").spectrum;
            (name.clone(), data, s)
        })
        .collect();
    let normalized: Vec<Vec<f64>> =
        corpus.iter().zip(&solved).map(|((_, d), (_, _, s))| s.values.iter().map(|v| v * d.steklov_mass()).collect()).collect();

    let results = [
        run("1 (model exactness)", criterion_1),
        run("2 (solver vs closed forms)", criterion_2),
        run("3 (doubling identity)", criterion_3),
        run("4 (inequality suite)", criterion_4),
        run("5 (sharpness trends)", criterion_5),
        run("6 (monotonicity)", criterion_6),
        run("7 (asymptotics)", criterion_7),
        run("8 (inverse recovery)", criterion_8),
        run("9 (multiplicity)", || criterion_9(&solved)),
        run("10 (scale invariance)", || criterion_10(&corpus, &normalized)),
    ];
    let passed = results.iter().filter(|&&r| r).count();
    println!("{passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
