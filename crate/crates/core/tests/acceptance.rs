//! One line per acceptance criterion; exits nonzero if any fails.

use std::sync::Arc;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nonlocal_core::maxprinciple::{check_mp, witness_clauses, MpVerdict};
use nonlocal_core::profiles::Field;
use nonlocal_core::reaction::{
    build_subsolution, default_supersolution, evolve, steady_state, survival_criterion,
    uniqueness_check, EvolveOptions, KppNonlinearity, Outcome, SteadyOptions, SurvivalVerdict,
};
use nonlocal_core::spectral::{BisectionOptions, ExistenceVerdict};
use nonlocal_core::*;

type Outcome_ = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome_);

fn check(cond: bool, msg: impl Into<String>) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn unit_g() -> DispersalG {
    DispersalG::constant(1.0).unwrap()
}

fn tri(s: f64) -> KernelJ {
    KernelJ::new(KernelShape::Triangular, s, 1.0, 1).unwrap()
}

fn interval() -> Domain {
    Domain::interval(-1.0, 1.0).unwrap()
}

fn op_on(d: &Domain, n: usize, j: &KernelJ, g: &DispersalG, a: &CoefficientA) -> NonlocalOperator {
    assemble(
        &build_grid(d, n).unwrap(),
        j,
        g,
        a,
        &AssemblyOptions::default(),
    )
    .unwrap()
}

fn lambda(op: &NonlocalOperator, tol: f64) -> f64 {
    principal_eigenpair(op, &EigenOptions::with_tol(tol))
        .unwrap()
        .lambda_p
}

/// Dense oracle: `λ_p = −max Re μ` over the Schur spectrum.
fn schur_lambda(op: &NonlocalOperator) -> f64 {
    let m = op.matrix();
    let n = m.size();
    let dm = DMatrix::from_row_slice(n, n, m.as_slice());
    let top = dm
        .complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    -top
}

/// Smooth random profile: a constant plus three Fourier modes.
fn random_field(rng: &mut ChaCha8Rng, amp: f64) -> Field {
    let c0: f64 = rng.gen_range(-amp..amp);
    let modes: Vec<(f64, f64)> = (0..3)
        .map(|_| (rng.gen_range(-amp..amp), rng.gen_range(-amp..amp)))
        .collect();
    Arc::new(move |x: &[f64]| {
        let pi = std::f64::consts::PI;
        c0 + modes
            .iter()
            .enumerate()
            .map(|(k, (a, b))| {
                let w = (k + 1) as f64 * pi * x[0];
                a * w.cos() + b * w.sin()
            })
            .sum::<f64>()
    })
}

fn random_kernel(rng: &mut ChaCha8Rng) -> KernelJ {
    let shapes = [
        KernelShape::Uniform,
        KernelShape::Triangular,
        KernelShape::CosineBump,
    ];
    let shape = shapes[rng.gen_range(0..3)];
    KernelJ::new(shape, rng.gen_range(0.1..0.6), rng.gen_range(0.5..1.5), 1).unwrap()
}

fn coefficient(f: Field) -> CoefficientA {
    CoefficientA::from_fn(f, None, None)
}

fn criterion_1() -> Outcome_ {
    let d = Domain::torus_interval(0.0, 1.0).unwrap();
    let j = KernelJ::new(KernelShape::Uniform, 0.25, 1.0, 1).unwrap();
    let mut worst = 0.0f64;
    let mut slowest = Duration::ZERO;
    for a0 in [-0.3, 0.0, 0.7] {
        let t = Instant::now();
        let op = op_on(&d, 64, &j, &unit_g(), &CoefficientA::constant(a0));
        let l = lambda(&op, 1e-10);
        slowest = slowest.max(t.elapsed());
        worst = worst.max((l + a0 + 1.0).abs());
    }
    check(worst <= 1e-8, format!("max error {worst:.2e}"))?;
    check(
        slowest < Duration::from_secs(1),
        format!("slowest {slowest:?}"),
    )?;
    Ok(format!(
        "max |lambda_p + a0 + 1| = {worst:.1e}, slowest {slowest:.1?}"
    ))
}

fn criterion_2() -> Outcome_ {
    let start = Instant::now();
    let d = interval();
    let n = 128;
    let grid = build_grid(&d, n).unwrap();
    let h = grid.h();
    let tol = 1e-12;
    let slack = 1e-10;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut violations = [0usize; 4];

    for _ in 0..100 {
        // (i) nested boxes sharing the grid spacing.
        let j = random_kernel(&mut rng);
        let a = coefficient(random_field(&mut rng, 0.5));
        let lo = rng.gen_range(0..40);
        let hi = rng.gen_range(lo + 20..n);
        let sub = Domain::interval(-1.0 + lo as f64 * h, -1.0 + hi as f64 * h).unwrap();
        let big = op_on(&d, n, &j, &unit_g(), &a);
        let small = op_on(&sub, hi - lo + 1, &j, &unit_g(), &a);
        if lambda(&small, tol) < lambda(&big, tol) - slack {
            violations[0] += 1;
        }

        // (ii) ordered coefficients, with and without a uniform gap.
        let j = random_kernel(&mut rng);
        let base = random_field(&mut rng, 0.5);
        let bump = random_field(&mut rng, 0.3);
        let delta: f64 = rng.gen_range(0.0..0.5);
        let (b1, b2) = (base.clone(), base.clone());
        let a1 = coefficient(base);
        let a2 = coefficient(Arc::new(move |x: &[f64]| b1(x) - bump(x).abs()));
        let a3 = coefficient(Arc::new(move |x: &[f64]| b2(x) - delta));
        let l1 = lambda(&op_on(&d, n, &j, &unit_g(), &a1), tol);
        let l2 = lambda(&op_on(&d, n, &j, &unit_g(), &a2), tol);
        let l3 = lambda(&op_on(&d, n, &j, &unit_g(), &a3), tol);
        if l2 < l1 - slack || l3 < l1 + delta - slack {
            violations[1] += 1;
        }

        // (iii) Lipschitz in the coefficient.
        let j = random_kernel(&mut rng);
        let fa = random_field(&mut rng, 0.5);
        let fb = random_field(&mut rng, 0.5);
        let gap = grid
            .nodes()
            .map(|x| (fa(x) - fb(x)).abs())
            .fold(0.0f64, f64::max);
        let la = lambda(&op_on(&d, n, &j, &unit_g(), &coefficient(fa)), tol);
        let lb = lambda(&op_on(&d, n, &j, &unit_g(), &coefficient(fb)), tol);
        if (la - lb).abs() > gap + slack {
            violations[2] += 1;
        }

        // (iv) pointwise ordered kernels of the same shape.
        let shapes = [
            KernelShape::Uniform,
            KernelShape::Triangular,
            KernelShape::CosineBump,
        ];
        let shape = shapes[rng.gen_range(0..3)];
        let s2: f64 = rng.gen_range(0.15..0.6);
        let s1 = s2 * rng.gen_range(0.3..1.0);
        let p2: f64 = rng.gen_range(0.5..2.0);
        let p1 = p2 * rng.gen_range(0.2..1.0);
        let j1 = KernelJ::with_peak(shape, s1, p1, 1).unwrap();
        let j2 = KernelJ::with_peak(shape, s2, p2, 1).unwrap();
        let a = coefficient(random_field(&mut rng, 0.5));
        let l1 = lambda(&op_on(&d, n, &j1, &unit_g(), &a), tol);
        let l2 = lambda(&op_on(&d, n, &j2, &unit_g(), &a), tol);
        if l1 < l2 - slack {
            violations[3] += 1;
        }
    }
    let elapsed = start.elapsed();
    check(
        violations.iter().all(|&v| v == 0),
        format!("violations per clause {violations:?}"),
    )?;
    check(
        elapsed < Duration::from_secs(120),
        format!("took {elapsed:?}"),
    )?;
    Ok(format!("400 instances, 0 violations, {elapsed:.1?}"))
}

fn quadratic_problem() -> (KernelJ, CoefficientA) {
    (tri(0.5), CoefficientA::quadratic_well(0.0, 1.0, vec![0.0]))
}

fn criterion_3() -> Outcome_ {
    let (j, a) = quadratic_problem();
    check(
        integrability_classifier(&a, 1).unwrap() == Integrability::NonIntegrable,
        "classifier does not report non-integrable",
    )?;
    let mut gaps = Vec::new();
    let mut oracle_err = f64::NAN;
    for n in [64, 128, 256, 512] {
        let op = op_on(&interval(), n, &j, &unit_g(), &a);
        let l = lambda(&op, 1e-10);
        let (s, sp) = (0.0, op.sigma_prime());
        check(
            -sp < l && l < -s,
            format!("N = {n}: sandwich fails, -{sp} < {l} < {s}"),
        )?;
        gaps.push(-s - l);
        if n == 512 {
            oracle_err = (schur_lambda(&op) - l).abs();
        }
    }
    let (gmin, gmax) = gaps.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &g| {
        (lo.min(g), hi.max(g))
    });
    check(gmax - gmin < 0.2 * gmin, format!("gap varies {gaps:?}"))?;
    check(
        oracle_err <= 1e-8,
        format!("oracle mismatch {oracle_err:.2e}"),
    )?;
    Ok(format!(
        "gap {gmin:.6}..{gmax:.6}, Schur oracle diff {oracle_err:.1e}"
    ))
}

fn rank_one_problem(a: CoefficientA) -> Problem {
    Problem {
        domain: interval(),
        kernel: tri(0.5),
        dispersal: unit_g(),
        coefficient: a,
        surrogate: Some(0.2),
        assembly: AssemblyOptions::default(),
    }
}

fn criterion_4() -> Outcome_ {
    // ρ ∫ |x|^{-1/2} dx over (−1, 1) = 0.2 · 4.
    let condition = 0.2 * 4.0;
    check(condition < 1.0, "integrability condition")?;
    let ladder = [128, 256, 512, 1024, 2048];
    let a = CoefficientA::power_contact(0.0, 1.0, 0.5, vec![0.0]);
    let d = existence_diagnostic(&rank_one_problem(a), &ladder, &EigenOptions::default())
        .map_err(|e| e.to_string())?;
    let lams: Vec<f64> = d.levels.iter().map(|l| l.lambda_p).collect();
    check(
        lams.windows(2).all(|w| w[1].abs() < w[0].abs()),
        format!("lambda_p not monotone toward 0: {lams:?}"),
    )?;
    let growth = d.growth_factors();
    check(
        growth.iter().all(|&g| g >= 1.5),
        format!("growth {growth:?}"),
    )?;
    check(
        d.verdict == ExistenceVerdict::Degenerate,
        format!("verdict {:?}", d.verdict),
    )?;

    let contrast = CoefficientA::quadratic_well(0.0, 1.0, vec![0.0]);
    let c = existence_diagnostic(
        &rank_one_problem(contrast),
        &[128, 256, 512, 1024],
        &EigenOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let cg = c.growth_factors();
    check(
        cg.iter().all(|&g| (g - 1.0).abs() <= 0.10),
        format!("contrast growth {cg:?}"),
    )?;
    let gmin = growth.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(format!(
        "lambda_p {:.4} -> {:.4}, min growth x{gmin:.2}; contrast growth within {:.1}%",
        lams[0],
        lams[lams.len() - 1],
        100.0 * cg.iter().fold(0.0f64, |m, g| m.max((g - 1.0).abs()))
    ))
}

/// `F(λ) = ∫_{−1}^{1} dx / (t + x²) = (2/√t) arctan(1/√t)` with `t = −λ − 1`.
fn closed_form_root() -> f64 {
    let f = |l: f64| {
        let t: f64 = -l - 1.0;
        2.0 / t.sqrt() * (1.0 / t.sqrt()).atan()
    };
    let (mut lo, mut hi) = (-10.0, -1.0 - 1e-12);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn criterion_5() -> Outcome_ {
    let oracle = closed_form_root();
    check(
        (oracle + 2.705).abs() < 0.01,
        format!("closed-form root {oracle}"),
    )?;
    let grid = build_grid(&interval(), 2048).unwrap();
    let a = CoefficientA::quadratic_well(1.0, 1.0, vec![0.0]);
    let root = rank_one_bisection(&grid, &a, 1.0, &BisectionOptions::default())
        .map_err(|e| e.to_string())?;
    check(
        (root.f_value - 1.0).abs() <= 1e-8,
        format!("|F - 1| = {:.2e}", (root.f_value - 1.0).abs()),
    )?;
    let op = rank_one_operator(&grid, 1.0, &a).unwrap();
    let dense = lambda(&op, 1e-12);
    let diff = (dense - root.lambda1).abs();
    check(
        diff <= 1e-6,
        format!("dense {dense} vs bisection {}", root.lambda1),
    )?;
    check(
        (root.lambda1 - oracle).abs() < 1e-3,
        format!("discrete root {} far from {oracle}", root.lambda1),
    )?;
    Ok(format!(
        "lambda1 = {:.8}, dense diff {diff:.1e}, closed form {oracle:.8}",
        root.lambda1
    ))
}

fn criterion_6() -> Outcome_ {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let d = interval();
    let mut agree = 0;
    let mut holds = 0;
    for item in 0..20 {
        let n = [64, 128, 256][item % 3];
        let j = random_kernel(&mut rng);
        let field = random_field(&mut rng, 0.5);
        let base = op_on(&d, n, &j, &unit_g(), &coefficient(field.clone()));
        let l0 = lambda(&base, 1e-10);
        let sign = if item % 2 == 0 { 1.0 } else { -1.0 };
        let target = sign * rng.gen_range(0.2..1.0);
        let op = base
            .with_coefficient(&coefficient(field).shifted(l0 - target))
            .unwrap();
        let r = check_mp(&op, 50, item as u64).map_err(|e| format!("item {item}: {e}"))?;
        let expect = if r.lambda_p >= 0.0 {
            MpVerdict::Holds
        } else {
            MpVerdict::Violated
        };
        check(
            (r.lambda_p - target).abs() < 1e-8,
            format!(
                "item {item}: shift identity gave {} for {target}",
                r.lambda_p
            ),
        )?;
        if r.verdict == expect {
            agree += 1;
        }
        match r.verdict {
            MpVerdict::Violated => {
                let w = r.witness.as_ref().ok_or("violated without witness")?;
                let c = witness_clauses(&op, w).unwrap();
                check(c.holds(), format!("item {item}: witness clauses {c:?}"))?;
            }
            MpVerdict::Holds => {
                holds += 1;
                check(
                    r.battery_min.unwrap_or(-1.0) >= -1e-10,
                    format!("item {item}: battery min {:?}", r.battery_min),
                )?;
                check(
                    r.inverse_min.is_some_and(|v| v >= -1e-12),
                    format!("item {item}: inverse min {:?}", r.inverse_min),
                )?;
            }
        }
    }
    check(agree == 20, format!("{agree}/20 verdicts agree"))?;
    Ok(format!(
        "20/20 agree ({holds} holds, {} violated with valid witnesses)",
        20 - holds
    ))
}

fn criterion_7() -> Outcome_ {
    let torus = Domain::torus_interval(0.0, 1.0).unwrap();
    let j = KernelJ::new(KernelShape::Uniform, 0.25, 1.0, 1).unwrap();
    let op = op_on(&torus, 64, &j, &unit_g(), &CoefficientA::constant(-1.0));
    let n = op.size();
    let f = KppNonlinearity::logistic(CoefficientA::constant(0.4), op.grid()).unwrap();
    let opts = SteadyOptions::default();
    let brackets = [(0.01, 1.0), (0.3, 2.0), (0.05, 5.0)];
    let mut worst = 0.0f64;
    for (lo, hi) in brackets {
        let s =
            steady_state(&op, &f, &vec![lo; n], &vec![hi; n], &opts).map_err(|e| e.to_string())?;
        worst = worst.max(s.p.iter().fold(0.0f64, |m, p| m.max((p - 0.4).abs())));
    }
    check(worst <= 1e-8, format!("p deviates from 0.4 by {worst:.2e}"))?;
    let trials: Vec<_> = brackets
        .iter()
        .map(|&(lo, hi)| (vec![lo; n], vec![hi; n]))
        .collect();
    let uniq = uniqueness_check(&op, &f, &trials, &opts).map_err(|e| e.to_string())?;
    check(uniq <= 1e-8, format!("pairwise distance {uniq:.2e}"))?;

    let ev = EvolveOptions::default();
    let t = evolve(&op, &f, &vec![0.1; n], &ev).map_err(|e| e.to_string())?;
    let dist = *t.sup_dist_to_p.last().unwrap();
    check(
        t.classification == Outcome::ConvergedToP && dist <= 1e-6,
        format!(
            "torus persistence: {:?}, distance {dist:.2e}",
            t.classification
        ),
    )?;
    let f_neg = KppNonlinearity::logistic(CoefficientA::constant(-0.2), op.grid()).unwrap();
    let t = evolve(&op, &f_neg, &vec![0.1; n], &ev).map_err(|e| e.to_string())?;
    check(
        t.classification == Outcome::ConvergedTo0 && *t.max_u.last().unwrap() < 1e-6,
        format!("torus extinction: {:?}", t.classification),
    )?;

    // Heterogeneous growth on a bounded interval.
    let d = interval();
    let bop = op_on(&d, 128, &tri(0.5), &unit_g(), &CoefficientA::constant(-1.0));
    let mu = CoefficientA::quadratic_well(0.4, 0.3, vec![0.0]);
    let fh = KppNonlinearity::logistic(mu, bop.grid()).unwrap();
    let sub = build_subsolution(&bop, &fh, 8, 0.05).map_err(|e| e.to_string())?;
    let sup = default_supersolution(&bop, &fh).map_err(|e| e.to_string())?;
    let steady = steady_state(&bop, &fh, &sub.values, &sup, &opts).map_err(|e| e.to_string())?;
    let t = evolve(&bop, &fh, &vec![0.1; bop.size()], &ev).map_err(|e| e.to_string())?;
    let het = linalg::sup_dist(&t.final_state, &steady.p);
    check(
        het <= 1e-5,
        format!("heterogeneous limits differ by {het:.2e}"),
    )?;

    // Randomized dichotomy battery.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut correct = 0;
    for item in 0..10 {
        let field = random_field(&mut rng, 0.3);
        let base = KppNonlinearity::logistic(coefficient(field.clone()), bop.grid()).unwrap();
        let l0 = survival_criterion(&bop, &base).unwrap().lambda_p;
        let sign = if item % 2 == 0 { 1.0 } else { -1.0 };
        let target = sign * rng.gen_range(0.1..0.5);
        let shift = l0 - target;
        let fi = KppNonlinearity::logistic(coefficient(field).shifted(shift), bop.grid()).unwrap();
        let s = survival_criterion(&bop, &fi).unwrap();
        let t = evolve(&bop, &fi, &vec![0.5; bop.size()], &ev).map_err(|e| e.to_string())?;
        let ok = match s.verdict {
            SurvivalVerdict::Persistence => {
                let sub = build_subsolution(&bop, &fi, 8, 0.05).map_err(|e| e.to_string())?;
                let sup = default_supersolution(&bop, &fi).map_err(|e| e.to_string())?;
                let p =
                    steady_state(&bop, &fi, &sub.values, &sup, &opts).map_err(|e| e.to_string())?;
                p.min_p > 0.0 && t.classification == Outcome::ConvergedToP
            }
            SurvivalVerdict::Extinction => t.classification == Outcome::ConvergedTo0,
            SurvivalVerdict::Borderline => false,
        };
        if ok {
            correct += 1;
        }
    }
    check(correct == 10, format!("dichotomy battery {correct}/10"))?;
    Ok(format!(
        "torus p = 0.4 to {worst:.1e}, uniqueness {uniq:.1e}, heterogeneous diff {het:.1e}, battery 10/10"
    ))
}

fn criterion_8() -> Outcome_ {
    let unbounded = UnboundedLine {
        core: (-1.0, 1.0),
        radii: (2..=7).map(|r| r as f64).collect(),
    };
    let a = CoefficientA::lorentzian_well(0.0, 1.0, vec![0.0]);
    let table = exhaustion_lambda(
        &unbounded,
        &tri(0.5),
        &unit_g(),
        &a,
        6,
        1.0 / 64.0,
        &AssemblyOptions::default(),
        &EigenOptions::with_tol(1e-12),
    )
    .map_err(|e| e.to_string())?;
    let l: Vec<f64> = table.levels.iter().map(|v| v.lambda_p).collect();
    check(
        l.windows(2).all(|w| w[1] <= w[0] + 1e-10),
        format!("not non-increasing: {l:?}"),
    )?;
    let last = (l[l.len() - 2] - l[l.len() - 1]).abs();
    check(last < 1e-4, format!("final increment {last:.2e}"))?;
    Ok(format!(
        "lambda_p {:.8} -> {:.8}, final increment {last:.1e}",
        l[0],
        l[l.len() - 1]
    ))
}

fn criterion_9() -> Outcome_ {
    let (j, a) = quadratic_problem();
    let sub = Domain::interval(-0.5, 0.5).unwrap();
    let mut ratios = Vec::new();
    for n in [128, 256, 512] {
        let op = op_on(&interval(), n, &j, &unit_g(), &a);
        let eig = principal_eigenpair(&op, &EigenOptions::default()).unwrap();
        ratios.push(harnack_ratio(&op, &eig.eigenvector, &sub).map_err(|e| e.to_string())?);
    }
    let (lo, hi) = ratios
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    check(hi <= 1.1 * lo, format!("ratios {ratios:?}"))?;
    Ok(format!("Harnack ratios {lo:.4}..{hi:.4}"))
}

fn criterion_10() -> Outcome_ {
    let g = DispersalG::power_degenerate(0.5, vec![0.0], 1.0).unwrap();
    let a = CoefficientA::plateau(0.0, 1.0, 2.0, vec![-0.2], vec![0.2]);
    let mut lams = Vec::new();
    for n in [257, 513, 1025, 2049] {
        let grid = build_grid(&interval(), n).unwrap();
        let op = assemble(&grid, &tri(0.5), &g, &a, &AssemblyOptions::default())
            .map_err(|e| e.to_string())?;
        let eig = principal_eigenpair(&op, &EigenOptions::default())
            .map_err(|e| format!("N = {n}: {e}"))?;
        check(
            eig.lambda_p < 0.0,
            format!("N = {n}: lambda_p = {}", eig.lambda_p),
        )?;
        let excluded = op.measure().excluded();
        check(
            eig.eigenvector
                .iter()
                .zip(excluded)
                .all(|(&v, &e)| e || v > 0.0),
            format!("N = {n}: eigenvector not positive"),
        )?;
        lams.push(eig.lambda_p);
    }
    let k = lams.len();
    let drift = (lams[k - 1] - lams[k - 2]).abs();
    check(
        drift <= 1e-3,
        format!("last levels differ by {drift:.2e}: {lams:?}"),
    )?;
    Ok(format!(
        "lambda_p = {:.6} at N = 2049, last-level drift {drift:.1e}",
        lams[k - 1]
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("torus constant-coefficient exactness", criterion_1),
        ("monotonicity and Lipschitz suite", criterion_2),
        ("sandwich for a = -x^2 with dense oracle", criterion_3),
        ("rank-one counterexample signature", criterion_4),
        ("rank-one bisection", criterion_5),
        ("maximum principle equivalence", criterion_6),
        ("KPP dichotomy", criterion_7),
        ("exhaustion of the line", criterion_8),
        ("Harnack stability", criterion_9),
        ("degenerate dispersal mode", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!(
                "criterion {:>2}: PASS  {name}: {detail} [{:.1?}]",
                i + 1,
                t.elapsed()
            ),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2}: FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
