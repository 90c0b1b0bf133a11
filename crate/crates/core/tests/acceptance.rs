//! Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

mod common;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use coherent2d::grid::default_grid;
use coherent2d::identity::{
    fock_reconstruction, su2_identity_matrix, weighted_schrodinger_identity, PlaneQuadratureSpec, S3QuadratureSpec,
};
use coherent2d::oracle::{
    build_quadrature, displaced_vacuum, displacement, variance, Quadrature, StateVector, TruncatedSpace,
};
use coherent2d::oscillator::{coherent1d_coeff, ln_factorial, DEFAULT_TAIL_EPS};
use coherent2d::schrodinger::{annihilation_residual, peak_location, poisson_occupation, schrodinger_coefficients};
use coherent2d::su2::{su2_coefficients, su2_energy, su2_variances};
use coherent2d::{render, AnisotropyRatio, CoeffVector, ModeIndex2D, SU2Params, SU2State, SchrodingerState, C64};
use common::*;

type Check = Result<String, String>;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ratio(p: u32, q: u32) -> AnisotropyRatio {
    AnisotropyRatio::new(p, q).unwrap()
}

fn tilted() -> SU2Params {
    SU2Params::new(C64::from_polar(3f64.sqrt() / 2.0, FRAC_PI_2), c(0.5, 0.0)).unwrap()
}

fn real_pair() -> SU2Params {
    SU2Params::new(c(3f64.sqrt() / 2.0, 0.0), c(0.5, 0.0)).unwrap()
}

fn low_shell_coefficients() -> Check {
    let mut r = rng(1);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let p = random_params(&mut r);
        let (a, b) = (p.alpha(), p.beta());
        let expected: [Vec<((usize, usize), C64)>; 3] = [
            vec![((0, 0), c(1.0, 0.0))],
            vec![((1, 0), a), ((0, 1), b)],
            vec![((2, 0), a * a), ((1, 1), a * b * 2f64.sqrt()), ((0, 2), b * b)],
        ];
        for (nu, want) in expected.iter().enumerate() {
            let got = su2_coefficients(&SU2State::isotropic(nu, p));
            let want: CoeffVector = want.iter().map(|&(idx, v)| (idx.into(), v)).collect();
            ensure(got.len() == want.len(), || format!("nu={nu}: {} entries, expected {}", got.len(), want.len()))?;
            worst = worst.max(got.max_abs_diff(&want));
        }
    }
    ensure(worst <= 1e-12, || format!("max componentwise error {worst:e}"))?;
    Ok(format!("max componentwise error {worst:.1e}"))
}

fn ladder_construction() -> Check {
    let mut r = rng(2);
    let mut worst: f64 = 0.0;
    for nu in 0..=25 {
        let p = random_params(&mut r);
        worst = worst.max(max_abs_diff(&su2_by_ladder(nu, &p), &su2_coefficients(&SU2State::isotropic(nu, p))));
    }
    ensure(worst <= 1e-10, || format!("max error {worst:e}"))?;
    Ok(format!("nu <= 25, max error {worst:.1e}"))
}

fn variance_formulas() -> Check {
    let mut r = rng(3);
    let ratios = [ratio(1, 1), ratio(2, 1), ratio(3, 2)];
    let mut worst: f64 = 0.0;
    for k in 0..30 {
        let nu = if k < 3 { 40 } else { (k * 7) % 41 };
        let s = SU2State::new(nu, random_params(&mut r), ratios[k % 3]);
        let oracle = oracle_variances(&su2_coefficients(&s));
        let closed = su2_variances(&s);
        for (o, f) in [
            (oracle.var_x, closed.var_x),
            (oracle.var_px, closed.var_px),
            (oracle.var_y, closed.var_y),
            (oracle.var_py, closed.var_py),
        ] {
            worst = worst.max((o - f).abs());
        }
    }
    ensure(worst <= 1e-10, || format!("oracle vs formula {worst:e}"))?;
    let v = su2_variances(&SU2State::isotropic(40, real_pair()));
    // |α|² = 3/4 only up to the rounding of √3/2.
    ensure((v.var_x - 30.5).abs() <= 1e-12 && (v.var_y - 10.5).abs() <= 1e-12, || {
        format!("nu=40 gave ({}, {})", v.var_x, v.var_y)
    })?;
    let o = oracle_variances(&su2_coefficients(&SU2State::isotropic(40, real_pair())));
    ensure((o.var_x - 30.5).abs() <= 1e-10 && (o.var_y - 10.5).abs() <= 1e-10, || {
        format!("oracle nu=40 gave ({}, {})", o.var_x, o.var_y)
    })?;
    Ok(format!("30 states, max deviation {worst:.1e}; nu=40 -> (30.5, 10.5)"))
}

fn energy_formula() -> Check {
    let mut r = rng(4);
    let ratios = [ratio(1, 1), ratio(2, 1), ratio(3, 2)];
    let mut worst: f64 = 0.0;
    for k in 0..15 {
        let s = SU2State::new((k * 11) % 41, random_params(&mut r), ratios[k % 3]);
        worst = worst.max((oracle_energy(&su2_coefficients(&s)) - su2_energy(&s)).abs());
    }
    ensure(worst <= 1e-10, || format!("oracle vs formula {worst:e}"))?;
    let s = SU2State::new(40, real_pair(), ratio(2, 1));
    let (e, o) = (su2_energy(&s), oracle_energy(&su2_coefficients(&s)));
    ensure((e - 71.0).abs() <= 1e-10 && (o - 71.0).abs() <= 1e-10, || format!("p=2,q=1 gave {e} / {o}"))?;
    Ok(format!("max deviation {worst:.1e}; p=2,q=1,nu=40 -> {e}"))
}

fn displacement_factorization() -> Check {
    const CUTOFF: usize = 40;
    const INTERIOR: usize = CUTOFF - 5;
    let space = TruncatedSpace::new(CUTOFF, CUTOFF);
    let mut r = rng(5);
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let params = random_params(&mut r);
        let psi = if k == 0 { c(3.0, 0.0) } else { random_psi(&mut r, 3.0) };
        let exp = displaced_vacuum(space, psi, &params).map_err(|e| e.to_string())?.to_coeffs();
        let product: CoeffVector = (0..=CUTOFF)
            .flat_map(|n| (0..=CUTOFF).map(move |m| (n, m)))
            .map(|(n, m)| {
                let a = coherent1d_coeff(params.alpha() * psi, n).unwrap();
                let b = coherent1d_coeff(params.beta() * psi, m).unwrap();
                (ModeIndex2D::new(n, m), a * b)
            })
            .collect();
        // Every shell reaching the compared modes is kept.
        let series = schrodinger_coefficients(
            &SchrodingerState::new(psi, params, AnisotropyRatio::ISOTROPIC, 2 * CUTOFF + 1).unwrap(),
        );
        worst = worst
            .max(max_abs_diff_within(&exp, &product, INTERIOR))
            .max(max_abs_diff_within(&exp, &series, INTERIOR))
            .max(max_abs_diff_within(&product, &series, INTERIOR));
    }
    // Dense Padé exponential on a smaller space, against the same series.
    let small = TruncatedSpace::new(16, 16);
    let params = random_params(&mut r);
    let psi = random_psi(&mut r, 1.5);
    let dense = displacement(small, psi, &params).map_err(|e| e.to_string())?;
    let dense = dense.apply(&StateVector::vacuum(small)).unwrap().to_coeffs();
    let series =
        schrodinger_coefficients(&SchrodingerState::new(psi, params, AnisotropyRatio::ISOTROPIC, 33).unwrap());
    let dense_err = max_abs_diff_within(&dense, &series, 11);
    ensure(worst <= 1e-8 && dense_err <= 1e-8, || format!("pairwise {worst:e}, dense {dense_err:e}"))?;
    Ok(format!("cutoff {CUTOFF}, pairwise max {worst:.1e}; dense check {dense_err:.1e}"))
}

fn annihilation_eigenproperty() -> Check {
    let mut r = rng(6);
    let mut worst: f64 = 0.0;
    for k in 0..10 {
        let params = random_params(&mut r);
        let psi = if k == 0 { c(0.0, 2.0) } else { random_psi(&mut r, 2.0) };
        let mut prev = f64::INFINITY;
        for eps in [1e-4, 1e-8, 1e-12] {
            let s = SchrodingerState::with_tail_rule(psi, params, AnisotropyRatio::ISOTROPIC, eps).unwrap();
            let res = annihilation_residual(&s).map_err(|e| e.to_string())?;
            ensure(res < prev || (res == 0.0 && prev == 0.0), || {
                format!("Psi={psi}: residual {res:e} at eps={eps:e} not below {prev:e}")
            })?;
            prev = res;
        }
        worst = worst.max(prev);
    }
    ensure(worst <= 1e-5, || format!("residual {worst:e} at eps=1e-12"))?;
    Ok(format!("max residual at eps=1e-12: {worst:.1e}, monotone in eps"))
}

fn minimal_uncertainty() -> Check {
    let mut r = rng(7);
    let mut worst_var: f64 = 0.0;
    let mut worst_prod: f64 = 0.0;
    for k in 0..10 {
        let params = random_params(&mut r);
        let psi = if k == 0 { C64::from_polar(3.0, 0.7) } else { random_psi(&mut r, 3.0) };
        let s = SchrodingerState::with_tail_rule(psi, params, AnisotropyRatio::ISOTROPIC, DEFAULT_TAIL_EPS).unwrap();
        let coeffs = schrodinger_coefficients(&s);
        let space = space_for(&coeffs, 2);
        let v = StateVector::from_coeffs(space, &coeffs).unwrap();
        let var = |q| variance(&build_quadrature(space, q), &v).unwrap();
        let (x, px, y, py) = (var(Quadrature::X), var(Quadrature::Px), var(Quadrature::Y), var(Quadrature::Py));
        for w in [x, px, y, py] {
            worst_var = worst_var.max((w - 0.5).abs());
        }
        worst_prod = worst_prod.max((x * px - 0.25).abs()).max((y * py - 0.25).abs());
    }
    ensure(worst_var <= 1e-6 && worst_prod <= 1e-6, || format!("variance {worst_var:e}, product {worst_prod:e}"))?;
    Ok(format!("variance dev {worst_var:.1e}, product dev {worst_prod:.1e}"))
}

fn su2_identity() -> Check {
    let mut worst: f64 = 0.0;
    let cases = (0..=20)
        .map(|nu| (nu, ratio(1, 1)))
        .chain((0..=10).flat_map(|nu| [(nu, ratio(2, 1)), (nu, ratio(3, 2))]));
    for (nu, rt) in cases {
        let m = su2_identity_matrix(nu, rt, &S3QuadratureSpec::for_nu(nu)).map_err(|e| e.to_string())?;
        ensure(m.hermiticity_defect() <= 1e-13, || format!("nu={nu}: not Hermitian"))?;
        worst = worst.max(m.max_deviation_from_identity());
    }
    ensure(worst <= 1e-10, || format!("max deviation {worst:e}"))?;
    Ok(format!("max deviation {worst:.1e}"))
}

fn weighted_measure() -> Check {
    let s3 = S3QuadratureSpec::for_nu(16);
    let plane = PlaneQuadratureSpec::for_nu(16);
    let probed = |l: ModeIndex2D| l.n + l.m <= 8;
    let w = weighted_schrodinger_identity(8, 8, &s3, &plane, true).map_err(|e| e.to_string())?;
    let u = weighted_schrodinger_identity(8, 8, &s3, &plane, false).map_err(|e| e.to_string())?;
    ensure(w.hermiticity_defect() <= 1e-13 && u.hermiticity_defect() <= 1e-13, || "not Hermitian".into())?;
    let dw = w.max_deviation(|_| 1.0, probed);
    let du = u.max_deviation(|l| 1.0 / (l.n + l.m + 1) as f64, probed);
    ensure(dw <= 1e-8 && du <= 1e-8, || format!("weighted {dw:e}, unweighted {du:e}"))?;
    let d22 = u.entry((2, 2).into(), (2, 2).into()).unwrap().re;
    Ok(format!("weighted dev {dw:.1e}; unweighted dev {du:.1e}, (2,2) -> {d22:.12}"))
}

fn fock_reconstruction_check() -> Check {
    let mut worst: f64 = 0.0;
    for nu in 0..=6 {
        for n in 0..=nu {
            let got = fock_reconstruction(n, nu - n, &S3QuadratureSpec::for_nu(nu)).map_err(|e| e.to_string())?;
            let want: CoeffVector = [(ModeIndex2D::new(n, nu - n), c(1.0, 0.0))].into_iter().collect();
            worst = worst.max(got.max_abs_diff(&want));
        }
    }
    ensure(worst <= 1e-10, || format!("max deviation {worst:e}"))?;
    Ok(format!("max deviation {worst:.1e}"))
}

fn peak_locations() -> Check {
    let mut lines = Vec::new();
    for (name, psi) in [("fig2-left", c(8.0, 0.0)), ("fig2-right", C64::from_polar(8.0, FRAC_PI_4))] {
        let s = SchrodingerState::with_tail_rule(psi, tilted(), AnisotropyRatio::ISOTROPIC, DEFAULT_TAIL_EPS).unwrap();
        let spec = default_grid(&s);
        let g = render(&s, &spec).map_err(|e| e.to_string())?;
        let (x0, y0) = peak_location(&s).unwrap();
        let (px, py) = g.peak_position();
        ensure((px - x0).abs() <= spec.dx() && (py - y0).abs() <= spec.dy(), || {
            format!("{name}: grid peak ({px:.3}, {py:.3}) vs ({x0:.3}, {y0:.3})")
        })?;
        lines.push(format!("{name} ({px:.3}, {py:.3}) vs ({x0:.3}, {y0:.3})"));
    }
    let (x0, y0) = peak_location(
        &SchrodingerState::with_tail_rule(c(8.0, 0.0), tilted(), AnisotropyRatio::ISOTROPIC, DEFAULT_TAIL_EPS)
            .unwrap(),
    )
    .unwrap();
    ensure(x0.abs() < 1e-12 && (y0 - 4.0 * 2f64.sqrt()).abs() < 1e-12, || format!("left peak ({x0}, {y0})"))?;
    Ok(lines.join("; "))
}

fn line_concentration() -> Check {
    let s = SU2State::isotropic(40, real_pair());
    let g = render(&s, &default_grid(&s)).map_err(|e| e.to_string())?;
    let fraction = g.band_mass(PI / 6.0, 1.5) / g.mass();
    ensure(fraction >= 0.9, || format!("band fraction {fraction:.4}"))?;
    Ok(format!("band fraction {fraction:.4} (grid mass {:.8})", g.mass()))
}

fn truncated_regime() -> Check {
    let mut details = Vec::new();
    for (name, psi) in [
        ("fig5-left", c(8.0, 0.0)),
        ("fig5-right", c(0.0, 8.0)),
        ("fig6-left", c(4.0, 0.0)),
        ("fig6-right", c(0.0, 4.0)),
    ] {
        let s = SchrodingerState::new(psi, tilted(), ratio(2, 1), 30).unwrap();
        let captured = schrodinger_coefficients(&s).captured_norm();
        // Running-product Poisson partial sum.
        let mean = psi.norm_sqr();
        let mut term = (-mean).exp();
        let mut partial = term;
        for nu in 1..30 {
            term *= mean / nu as f64;
            partial += term;
        }
        ensure((captured - partial).abs() <= 1e-12, || format!("{name}: {captured:e} vs {partial:e}"))?;
        details.push(format!("{name} {captured:.6e}"));
    }
    let s = SchrodingerState::new(c(8.0, 0.0), tilted(), ratio(2, 1), 30).unwrap();
    let spec = coherent2d::GridSpec::symmetric(16.0, 121).unwrap();
    let grids: Vec<Vec<u8>> = [1, 3, 8, 1]
        .iter()
        .map(|&threads| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            let g = pool.install(|| render(&s, &spec)).unwrap();
            let mut bytes = Vec::new();
            g.write_csv(&mut bytes).unwrap();
            bytes.extend(g.mass().to_bits().to_le_bytes());
            bytes
        })
        .collect();
    ensure(grids.windows(2).all(|w| w[0] == w[1]), || "grids differ across runs or thread counts".into())?;
    details.push("grids identical across 1/3/8 threads".into());
    Ok(details.join("; "))
}

fn poisson_occupations() -> Check {
    let mut r = rng(14);
    let mut worst: f64 = 0.0;
    for k in 0..8 {
        let rt = if k % 2 == 0 { ratio(1, 1) } else { ratio(2, 1) };
        let psi = if k < 2 { c(4.0, 0.0) } else { random_psi(&mut r, 4.0) };
        let s = SchrodingerState::new(psi, random_params(&mut r), rt, 41).unwrap();
        let coeffs = schrodinger_coefficients(&s);
        let mut shells = vec![0.0; 41];
        for (idx, v) in coeffs.iter() {
            shells[idx.n / rt.p() as usize + idx.m / rt.q() as usize] += v.norm_sqr();
        }
        let t = psi.norm_sqr();
        for (mu, got) in shells.iter().enumerate() {
            let want = if t == 0.0 {
                if mu == 0 { 1.0 } else { 0.0 }
            } else {
                (mu as f64 * t.ln() - t - ln_factorial(mu)).exp()
            };
            worst = worst.max((got - want).abs()).max((poisson_occupation(&s, mu) - want).abs());
        }
    }
    ensure(worst <= 1e-12, || format!("max deviation {worst:e}"))?;
    Ok(format!("mu <= 40, max deviation {worst:.1e}"))
}

fn main() {
    type Criterion = (&'static str, Option<u64>, fn() -> Check);
    let criteria: [Criterion; 14] = [
        ("low-shell coefficients match explicit forms", Some(1), low_shell_coefficients),
        ("ladder construction equals closed-form coefficients", Some(10), ladder_construction),
        ("quadrature variances vs oracle", None, variance_formulas),
        ("energy formula vs oracle", None, energy_formula),
        ("displacement factorization", Some(30), displacement_factorization),
        ("annihilation eigenproperty", None, annihilation_eigenproperty),
        ("minimal uncertainty", None, minimal_uncertainty),
        ("SU(2) resolution of identity", Some(20), su2_identity),
        ("weighted vs unweighted plane measure", None, weighted_measure),
        ("Fock reconstruction", None, fock_reconstruction_check),
        ("density peak location", None, peak_locations),
        ("line concentration at nu=40", None, line_concentration),
        ("thirty-term anisotropic regime", None, truncated_regime),
        ("Poisson occupation", None, poisson_occupations),
    ];
    let mut failures = 0;
    for (k, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(_), Some(secs)) if elapsed > Duration::from_secs(*secs) => {
                Err(format!("runtime {:.2} s exceeds {secs} s", elapsed.as_secs_f64()))
            }
            (o, _) => o,
        };
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failures += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} {:>2} {name}: {detail} [{:.2} s]", k + 1, elapsed.as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
