use nalgebra::DMatrix;
use nonlocal_core::spectral::{BisectionOptions, ExistenceVerdict};
use nonlocal_core::*;

fn interval() -> Domain {
    Domain::interval(-1.0, 1.0).unwrap()
}

fn tri(s: f64) -> KernelJ {
    KernelJ::new(KernelShape::Triangular, s, 1.0, 1).unwrap()
}

fn unit_g() -> DispersalG {
    DispersalG::constant(1.0).unwrap()
}

fn dense_lambda(op: &NonlocalOperator) -> f64 {
    let m = op.matrix();
    let n = m.size();
    -DMatrix::from_row_slice(n, n, m.as_slice())
        .complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn quadratic_well_matches_dense_oracle() {
    let grid = build_grid(&interval(), 512).unwrap();
    let a = CoefficientA::quadratic_well(0.0, 1.0, vec![0.0]);
    let op = assemble(&grid, &tri(0.2), &unit_g(), &a, &AssemblyOptions::default()).unwrap();
    let r = principal_eigenpair(&op, &EigenOptions::default()).unwrap();
    assert!(-op.sigma_prime() < r.lambda_p && r.lambda_p < 0.0);
    assert!((r.lambda_p - dense_lambda(&op)).abs() < 1e-8);
    assert!(r.eigenvector.iter().all(|&v| v > 0.0));
    assert!(r.cw_lower <= r.shift - r.lambda_p && r.shift - r.lambda_p <= r.cw_upper);
    assert!(r.bracket_width() < 1e-10);
    assert!(r.residual < 1e-9);
}

#[test]
fn rank_one_constant_coefficient() {
    let grid = build_grid(&interval(), 64).unwrap();
    let op = rank_one_operator(&grid, 0.2, &CoefficientA::constant(0.0)).unwrap();
    let rows = op.kernel().row_sums();
    assert!(rows.iter().all(|r| (r - 0.4).abs() < 1e-12));
    let r = principal_eigenpair(&op, &EigenOptions::default()).unwrap();
    assert!((r.lambda_p + 0.4).abs() < 1e-9);
}

#[test]
fn rank_one_condition_examples() {
    // ρ ∫ 1/(σ − a) for a = −|x|^{1/2} on (−1, 1) is 4ρ.
    let grid = build_grid(&interval(), 4096).unwrap();
    let a = CoefficientA::power_contact(0.0, 1.0, 0.5, vec![0.0]);
    let integral: f64 = grid
        .nodes()
        .zip(grid.weights())
        .map(|(x, w)| w / (0.0 - a.eval(x)))
        .sum();
    assert!((integral - 4.0).abs() < 0.1);
    assert!(0.2 * integral < 1.0 && 0.5 * integral > 1.0);

    // Shifting ā by 1 leaves F unchanged up to the pole position.
    let shifted = CoefficientA::power_contact(1.0, 1.0, 0.5, vec![0.0]);
    let fine = build_grid(&interval(), 2048).unwrap();
    assert!(matches!(
        rank_one_bisection(&fine, &shifted, 0.2, &BisectionOptions::default()),
        Err(Error::CriterionFailure { .. })
    ));
    let r = rank_one_bisection(&fine, &shifted, 0.5, &BisectionOptions::default()).unwrap();
    assert!(r.lambda1 < -1.0);
    assert!(r.phi.iter().all(|&p| p > 0.0));
}

#[test]
fn existence_diagnostic_examples() {
    let regular = Problem {
        domain: interval(),
        kernel: tri(0.5),
        dispersal: unit_g(),
        coefficient: CoefficientA::quadratic_well(0.0, 1.0, vec![0.0]),
        surrogate: None,
        assembly: AssemblyOptions::default(),
    };
    let d = existence_diagnostic(&regular, &[64, 128, 256, 512], &EigenOptions::default()).unwrap();
    assert_eq!(d.verdict, ExistenceVerdict::EigenfunctionExists);
    assert!(d.levels.iter().all(|l| l.lambda_p < 0.0));
    assert!(d.levels.windows(2).all(|w| w[1].n > w[0].n));

    let torus = Problem {
        domain: Domain::torus_interval(0.0, 1.0).unwrap(),
        kernel: KernelJ::new(KernelShape::Uniform, 0.25, 1.0, 1).unwrap(),
        coefficient: CoefficientA::constant(-0.3),
        ..regular
    };
    let d = existence_diagnostic(&torus, &[32, 64, 128, 256], &EigenOptions::default()).unwrap();
    assert_eq!(d.verdict, ExistenceVerdict::EigenfunctionExists);
    assert!(d.growth_factors().iter().all(|g| (g - 1.0).abs() < 1e-10));
}

#[test]
fn exhaustion_examples() {
    let unbounded = UnboundedLine {
        core: (-1.0, 1.0),
        radii: vec![2.0, 3.0, 4.0],
    };
    let a = CoefficientA::lorentzian_well(0.0, 1.0, vec![0.0]);
    let opts = EigenOptions::default();
    let asm = AssemblyOptions::default();
    let t = exhaustion_lambda(
        &unbounded,
        &tri(0.5),
        &unit_g(),
        &a,
        3,
        1.0 / 32.0,
        &asm,
        &opts,
    )
    .unwrap();
    assert!(t.levels.iter().all(|l| l.lambda_p < 0.0));
    assert!(t.within_bracket);
    assert!(exhaustion_lambda(
        &unbounded,
        &tri(0.5),
        &unit_g(),
        &a,
        1,
        1.0 / 32.0,
        &asm,
        &opts
    )
    .is_err());

    // A constant coefficient feels the boundary only through a layer of
    // width ~ support, so λ_{p,k} approaches −(a₀ + 1) as ω_k grows.
    let wide = UnboundedLine {
        core: (-1.0, 1.0),
        radii: vec![4.0, 8.0, 16.0],
    };
    let c = CoefficientA::constant(-0.3);
    let t =
        exhaustion_lambda(&wide, &tri(0.25), &unit_g(), &c, 3, 1.0 / 16.0, &asm, &opts).unwrap();
    let errs: Vec<f64> = t.levels.iter().map(|l| (l.lambda_p + 0.7).abs()).collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]));
    assert!(errs[2] < 5e-3, "{errs:?}");
}

#[test]
fn harnack_examples() {
    let a = CoefficientA::quadratic_well(0.0, 1.0, vec![0.0]);
    let sub = Domain::interval(-0.5, 0.5).unwrap();
    let mut ratios = Vec::new();
    for n in [128, 256, 512] {
        let grid = build_grid(&interval(), n).unwrap();
        let op = assemble(&grid, &tri(0.2), &unit_g(), &a, &AssemblyOptions::default()).unwrap();
        let r = principal_eigenpair(&op, &EigenOptions::default()).unwrap();
        ratios.push(harnack_ratio(&op, &r.eigenvector, &sub).unwrap());
    }
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    assert!(hi <= 1.1 * lo, "{ratios:?}");
}
