//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use ptmetric_core::classical::{default_initial_conditions, phase_portrait, ClassicalHamiltonian, IntegratorSettings, OrbitClass};
use ptmetric_core::dynamics::{default_packet, drift_study, EvolutionConfig};
use ptmetric_core::eigensystem::{build_phi, build_psi, Branch};
use ptmetric_core::grid::UniformGrid;
use ptmetric_core::hequiv::{
    compare_symbol_action, default_table_grid, default_weak_battery, extract_coeffs, h2_commutator_form, h2_kernel,
    weak_identity_study, Expansion,
};
use ptmetric_core::metric::{block_kernel, eta1_kernel, eta1_spectral_oracle_batch, oracle_pairs, Block, SpectralSettings};
use ptmetric_core::observables::{gaussian_battery, localized_gram_residual, pseudo_hermiticity_weak_residual, BaseOperator};
use ptmetric_core::quadrature::loglog_slope;
use ptmetric_core::{Cx, PhysicalParams64};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Uniform sample from a block; the outer blocks are cut at |x| = 6.
fn in_block(rng: &mut StdRng, b: Block) -> f64 {
    let (lo, hi) = match b {
        Block::One => (-6.0, -1.0),
        Block::Two => (1.0, 6.0),
        _ => b.bounds::<f64>(),
    };
    loop {
        let x = rng.random_range(lo..hi);
        if x > lo && x < hi {
            return x;
        }
    }
}

fn criterion_1() -> Outcome {
    let mut rng = StdRng::seed_from_u64(1);
    let mut worst = 0.0_f64;
    for mu in Block::ALL {
        for nu in Block::ALL {
            let mut done = 0;
            while done < 100 {
                let (x, y) = (in_block(&mut rng, mu), in_block(&mut rng, nu));
                if x == y {
                    continue;
                }
                match block_kernel(mu, nu, x, y) {
                    Ok(v) => worst = worst.max((v - eta1_kernel(x, y)).norm()),
                    Err(e) => return outcome(false, format!("block ({}, {}) rejected ({x}, {y}): {e}", mu.label(), nu.label())),
                }
                done += 1;
            }
        }
    }
    outcome(worst < 1e-12, format!("max |E_block - eta1| = {worst:.3e} over 1600 points"))
}

fn criterion_2() -> Outcome {
    let pairs = oracle_pairs::<f64>();
    let mut blocks = std::collections::HashSet::new();
    for &(x, y) in &pairs {
        if let (Some(a), Some(b)) = (Block::of(x), Block::of(y)) {
            blocks.insert((a, b));
        }
    }
    let mut worst = 0.0_f64;
    for (est, &(x, y)) in eta1_spectral_oracle_batch(&pairs, &SpectralSettings::default()).iter().zip(&pairs) {
        match est {
            Ok(e) => worst = worst.max((e.value - eta1_kernel(x, y)).norm()),
            Err(e) => return outcome(false, format!("oracle failed at ({x}, {y}): {e}")),
        }
    }
    let pass = worst < 1e-3 && pairs.len() >= 20 && blocks.len() == 16;
    outcome(pass, format!("{} pairs, {} block types, max error {worst:.3e}", pairs.len(), blocks.len()))
}

fn criterion_3() -> Outcome {
    let mut rng = StdRng::seed_from_u64(3);
    let (mut jump, mut pt, mut ode) = (0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..50 {
        let k = rng.random_range(0.2..5.0);
        let z = rng.random_range(0.0..1.0);
        for b in Branch::BOTH {
            for sol in [build_psi(k, z, b), build_phi(k, z, b)] {
                let sol = match sol {
                    Ok(s) => s,
                    Err(e) => return outcome(false, format!("construction failed at k={k}, Z={z}: {e}")),
                };
                let m = sol.matching_residuals();
                jump = jump.max(m.max_jump());
                pt = pt.max(m.max_pt());
                for _ in 0..8 {
                    ode = ode.max(sol.ode_residual(rng.random_range(-4.0..4.0)));
                }
            }
        }
    }
    let zs = [0.01, 0.02, 0.04, 0.08];
    let mut slopes = Vec::new();
    for k in [0.5, 1.0, 2.0, 4.0] {
        for b in Branch::BOTH {
            let d: Vec<f64> = zs
                .iter()
                .map(|&z| build_psi(k, z, b).map(|s| s.plane_wave_distance(5.0, 401)).unwrap_or(f64::NAN))
                .collect();
            slopes.push(loglog_slope(&zs, &d));
        }
    }
    let slope_ok = slopes.iter().all(|s| (s - 1.0).abs() <= 0.1);
    let (lo, hi) = slopes.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), s| (a.min(*s), b.max(*s)));
    let pass = jump < 1e-10 && ode < 1e-10 && slope_ok;
    outcome(pass, format!("max jump {jump:.2e}, PT {pt:.2e}, ODE {ode:.2e}, plane-wave slopes in [{lo:.3}, {hi:.3}]"))
}

fn criterion_4() -> Outcome {
    // half width 5 at 400 cells per unit gives N = 4001 nodes
    let battery = default_weak_battery::<f64>();
    match weak_identity_study(&battery, 5, &[100, 200, 400]) {
        Ok(r) => {
            let (c, h) = (*r.commutator.last().unwrap(), *r.h1.last().unwrap());
            let h1_slope = loglog_slope(&[0.01, 0.005, 0.0025], &r.h1);
            let pass = c < 1e-4 && h < 1e-4 && r.slope >= 1.5 && h1_slope >= 1.5;
            outcome(pass, format!("N=4001: commutator {c:.2e}, h1 {h:.2e}; slopes {:.2} and {h1_slope:.2}", r.slope))
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn criterion_5() -> Outcome {
    let mut rng = StdRng::seed_from_u64(5);
    let mut worst = 0.0_f64;
    let mut support_violations = 0;
    for _ in 0..1000 {
        let (x, y) = (rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        worst = worst.max((h2_commutator_form(x, y) - Cx::new(h2_kernel(x, y), 0.0)).norm());
    }
    for _ in 0..1000 {
        let side = |r: &mut StdRng| {
            let v: f64 = r.random_range(1.0..6.0);
            if r.random_bool(0.5) { -v } else { v }
        };
        let (x, y) = (side(&mut rng), side(&mut rng));
        if h2_kernel(x, y) != 0.0 || h2_commutator_form(x, y) != Cx::new(0.0, 0.0) {
            support_violations += 1;
        }
    }
    outcome(
        worst < 1e-14 && support_violations == 0,
        format!("max |commutator - kernel| = {worst:.2e}; {support_violations} support violations in 1000 outer pairs"),
    )
}

fn criterion_6() -> Outcome {
    let t = match extract_coeffs(&default_table_grid::<f64>(), 5, Expansion::Origin) {
        Ok(t) => t,
        Err(e) => return outcome(false, e.to_string()),
    };
    let tol = 1e-8;
    let n = t.x.len();
    let outside: Vec<usize> = (0..n).filter(|&i| t.x[i].abs() >= 3.0).collect();
    let mut checks: Vec<(&str, bool)> = Vec::new();
    checks.push(("even omega real", t.diagnostics.max_imag_even < tol));
    let even_zero = outside.iter().all(|&i| [0, 2, 4].iter().all(|&k| t.omega[k][i].norm() < tol));
    checks.push(("even omega zero outside", even_zero));
    checks.push(("odd omega imaginary", t.diagnostics.max_real_odd < tol));
    // constant on each side, antisymmetric between the sides: c (θ(x) - ½)
    let odd_step = [1, 3, 5].iter().all(|&k| {
        let left: Vec<f64> = outside.iter().filter(|&&i| t.x[i] < 0.0).map(|&i| t.omega[k][i].im).collect();
        let right: Vec<f64> = outside.iter().filter(|&&i| t.x[i] > 0.0).map(|&i| t.omega[k][i].im).collect();
        let flat = |v: &[f64]| v.iter().all(|a| (a - v[0]).abs() < tol);
        flat(&left) && flat(&right) && (left[0] + right[0]).abs() < tol
    });
    checks.push(("odd omega step outside", odd_step));
    checks.push(("a real", t.diagnostics.max_imag_a < tol));
    let even = (0..3).all(|k| (0..n).all(|i| (t.a[k][i] - t.a[k][n - 1 - i]).abs() < tol));
    checks.push(("a even", even));
    let support = (0..3).all(|k| outside.iter().all(|&i| t.a[k][i].abs() < tol));
    checks.push(("a supported in (-3,3)", support));
    let m = t.max_abs_a();
    checks.push(("max|a_n| decreasing", m[0] > m[1] && m[1] > m[2]));
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    let detail = format!(
        "max|a_n| = [{:.5}, {:.5}, {:.5}]; failed: {}",
        m[0],
        m[1],
        m[2],
        if failed.is_empty() { "none".to_string() } else { failed.join(", ") }
    );
    outcome(failed.is_empty(), detail)
}

fn criterion_7() -> Outcome {
    let grid = match UniformGrid::<f64>::symmetric(30, 10) {
        Ok(g) => g,
        Err(e) => return outcome(false, e.to_string()),
    };
    let mut worst = 0.0_f64;
    let mut at = (0.0, 0.0, 0.0);
    for sigma in [2.0, 3.0] {
        for p0 in [0.0, 0.25, -0.5, 0.5] {
            for x0 in [0.0, 1.0] {
                let c = compare_symbol_action(&grid, x0, p0, sigma, 3, Expansion::Origin);
                if !(c.relative_error <= worst) {
                    worst = c.relative_error;
                    at = (x0, p0, sigma);
                }
            }
        }
    }
    // leading term alone, for context in the report
    let lead = compare_symbol_action(&grid, at.0, at.1, at.2, 1, Expansion::Origin).relative_error;
    outcome(
        worst < 0.05,
        format!(
            "worst relative L2 error {:.1}% at x0={}, p0={}, sigma={} (a0 term alone: {:.1}%)",
            100.0 * worst,
            at.0,
            at.1,
            at.2,
            100.0 * lead
        ),
    )
}

fn criterion_8() -> Outcome {
    let zs = [0.05, 0.1, 0.2];
    let grid = match UniformGrid::<f64>::new(-8.0, 8.0, 801) {
        Ok(g) => g,
        Err(e) => return outcome(false, e.to_string()),
    };
    let tests = gaussian_battery(&grid, &[(0.0, 0.0, 0.7), (0.5, 1.0, 0.6), (-1.0, -1.0, 0.8), (1.5, 0.5, 0.6)]);
    let mut lines = Vec::new();
    let mut pass = true;
    for (name, base) in [("X", BaseOperator::Position), ("P", BaseOperator::Momentum)] {
        let r: Vec<f64> = zs.iter().map(|&z| pseudo_hermiticity_weak_residual(base, &grid, z, &tests, 6.0)).collect();
        let s = loglog_slope(&zs, &r);
        pass &= (s - 2.0).abs() <= 0.3;
        lines.push(format!("{name} slope {s:.2}"));
    }
    let gram_grid = UniformGrid::<f64>::symmetric(4, 10).expect("valid grid");
    let g: Vec<f64> = zs.iter().map(|&z| localized_gram_residual(&gram_grid, z)).collect();
    let gs = loglog_slope(&zs, &g);
    pass &= (gs - 2.0).abs() <= 0.3;
    lines.push(format!("Gram slope {gs:.2}"));
    outcome(pass, lines.join(", "))
}

fn criterion_9() -> Outcome {
    let zs = [0.05, 0.1, 0.2];
    match drift_study(&default_packet::<f64>(), &EvolutionConfig::default(), &zs) {
        Ok(s) => {
            let pass = (s.eta_slope - 2.0).abs() <= 0.3 && (s.l2_slope - 1.0).abs() <= 0.3;
            outcome(pass, format!("eta drift slope {:.2}, L2 change slope {:.2}", s.eta_slope, s.l2_slope))
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn criterion_10() -> Outcome {
    let params = PhysicalParams64::figure_defaults();
    let table = match extract_coeffs(&default_table_grid::<f64>(), 5, Expansion::Origin) {
        Ok(t) => t,
        Err(e) => return outcome(false, e.to_string()),
    };
    let ham = match ClassicalHamiltonian::new(params, &table, 2) {
        Ok(h) => h,
        Err(e) => return outcome(false, e.to_string()),
    };
    let edge = ham.region();
    let mut outside_exact = true;
    let mut max_dev = 0.0_f64;
    for j in 0..=1200 {
        let x = -6.0 + 0.01 * j as f64;
        match ham.effective_mass(x) {
            Ok(m) if x.abs() >= edge => outside_exact &= m == params.m,
            Ok(m) => max_dev = max_dev.max((m - params.m).abs()),
            Err(e) => return outcome(false, format!("m_eff at {x}: {e}")),
        }
    }
    let settings = IntegratorSettings { stride: 1, ..IntegratorSettings::default() };
    let portrait = match phase_portrait(&ham, &default_initial_conditions(&params), &settings) {
        Ok(p) => p,
        Err(e) => return outcome(false, e.to_string()),
    };
    let (closed, open) = (portrait.count(OrbitClass::Closed), portrait.count(OrbitClass::Open));
    let energy = portrait.trajectories.iter().fold(0.0_f64, |m, t| m.max(t.max_relative_energy_error));
    let mut p_change = 0.0_f64;
    for t in &portrait.trajectories {
        for w in t.states.windows(2) {
            if w[0].x.abs() > edge && w[1].x.abs() > edge && w[0].x * w[1].x > 0.0 {
                p_change = p_change.max((w[1].p - w[0].p).abs());
            }
        }
    }
    let pass = outside_exact && max_dev > 1e-3 && closed > 0 && open > 0 && energy < 1e-6 && p_change < 1e-12;
    outcome(
        pass,
        format!(
            "m_eff exact outside: {outside_exact}, max inside deviation {max_dev:.3}; {closed} closed, {open} open; \
             max energy error {energy:.2e}; max p change outside {p_change:.1e}"
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(usize, fn() -> Outcome); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let mut failures = 0;
    for (n, run) in criteria {
        let start = Instant::now();
        let o = run();
        let secs = start.elapsed().as_secs_f64();
        println!("criterion {n}: {} ({}; {secs:.1} s)", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failures += usize::from(!o.pass);
    }
    println!("acceptance: {} of 10 passed", 10 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
