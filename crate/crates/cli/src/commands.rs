use std::path::{Path, PathBuf};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};

use ptmetric_core::classical::{
    default_initial_conditions, mass_profile, phase_portrait, ClassicalHamiltonian, IntegratorSettings, OrbitClass, PhasePortrait,
};
use ptmetric_core::dynamics::{drift, evolve, EvolutionConfig, Packet};
use ptmetric_core::grid::UniformGrid;
use ptmetric_core::hequiv::{default_table_grid, extract_coeffs, h2_kernel, CoeffTable, Expansion};
use ptmetric_core::metric::{eta1_kernel, eta1_spectral_oracle_batch, oracle_pairs, SpectralSettings};
use ptmetric_core::observables::{p_kernel, physical, physical_density, x_kernel, xi_kernel, LocalizedState};
use ptmetric_core::{Cx, PhysicalParams64};

use crate::args::*;
use crate::error::CliError;
use crate::output::{emit, num, Manifest, Table};

/// Resolved run: parameters plus the echo of the parsed configuration.
pub struct Context {
    pub params: PhysicalParams64,
    pub seed: u64,
    pub config: Value,
}

impl Context {
    fn z(&self) -> f64 {
        self.params.scale().z
    }

    fn manifest(&self, quantity: &str, command: &str, diagnostics: Value) -> Manifest {
        Manifest {
            quantity: quantity.to_string(),
            command: command.to_string(),
            config: self.config.clone(),
            diagnostics,
        }
    }
}

fn out_path(out: &Option<PathBuf>, default: &str) -> PathBuf {
    out.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn report(csv: &Path, manifest: &Path) {
    println!("wrote {} and {}", csv.display(), manifest.display());
}

fn grid(spec: GridSpec) -> Result<UniformGrid<f64>, CliError> {
    Ok(UniformGrid::new(spec.a, spec.b, spec.n)?)
}

fn expansion(e: ExpansionArg) -> Expansion {
    match e {
        ExpansionArg::Origin => Expansion::Origin,
        ExpansionArg::Centered => Expansion::Centered,
    }
}

/// `a+bi` with the shortest round-trip forms of both parts.
pub fn format_complex(v: Cx<f64>) -> String {
    let sign = if v.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{sign}{}i", v.re, v.im.abs())
}

fn kernel_value(ctx: &Context, kind: KernelKind, physical_units: bool, x: f64, y: f64) -> Result<Cx<f64>, CliError> {
    let p = &ctx.params;
    Ok(match (kind, physical_units) {
        (KernelKind::Eta1, false) => eta1_kernel(x, y),
        (KernelKind::X, false) => x_kernel(x, y),
        (KernelKind::P, false) => p_kernel(x, y),
        (KernelKind::Xi, false) => xi_kernel(x, y),
        (KernelKind::H2, false) => Cx::new(h2_kernel(x, y), 0.0),
        (KernelKind::X, true) => physical::x_kernel(p, x, y),
        (KernelKind::P, true) => physical::p_kernel(p, x, y),
        (KernelKind::Xi, true) => physical::xi_kernel(p, x, y),
        (k, true) => return Err(CliError::Validation(format!("--physical is not available for {}", k.name()))),
    })
}

pub fn kernel(ctx: &Context, a: &KernelArgs) -> Result<(), CliError> {
    if let (Some(x), Some(y)) = (a.x, a.y) {
        println!("{}", format_complex(kernel_value(ctx, a.kind, a.physical, x, y)?));
        return Ok(());
    }
    let g = grid(a.grid.unwrap_or(GridSpec { a: -4.0, b: 4.0, n: 81 }))?;
    let pts = g.points();
    let mut t = Table::new(&["x", "y", "re", "im"]);
    for &x in &pts {
        for &y in &pts {
            let v = kernel_value(ctx, a.kind, a.physical, x, y)?;
            t.push_numbers(&[x, y, v.re, v.im]);
        }
    }
    let csv = out_path(&a.out, &format!("kernel_{}.csv", a.kind.name()));
    let units = if a.physical { "physical" } else { "dimensionless O(Z) coefficient" };
    let m = ctx.manifest(a.kind.name(), "kernel", json!({ "units": units, "regular_part_only": true }));
    report(&csv, &emit(&t, &m, &csv)?);
    Ok(())
}

fn coeff_table(points: &[f64], e: Expansion) -> Result<CoeffTable<f64>, CliError> {
    Ok(extract_coeffs(points, 5, e)?)
}

fn coeff_diagnostics(t: &CoeffTable<f64>) -> Value {
    let d = &t.diagnostics;
    let pole = t.pole_residue.iter().fold(0.0_f64, |m, c| m.max(c.norm()));
    json!({
        "expansion": format!("{:?}", t.expansion),
        "max_imag_even_omega": d.max_imag_even,
        "max_real_odd_omega": d.max_real_odd,
        "max_imag_a": d.max_imag_a,
        "flagged_points": d.flagged.len(),
        "tolerance": d.tolerance,
        "max_abs_pole_residue": pole,
        "max_abs_a": t.max_abs_a(),
    })
}

pub fn coeffs(ctx: &Context, a: &CoeffsArgs) -> Result<(), CliError> {
    let points = grid(a.grid)?.points();
    let t = coeff_table(&points, expansion(a.expansion))?;
    let alpha = t.alpha(&ctx.params);
    let mut header = vec!["x".to_string()];
    for n in 0..t.omega.len() {
        header.push(format!("re_w{n}"));
        header.push(format!("im_w{n}"));
    }
    header.extend(["a0", "a1", "a2", "alpha0", "alpha1", "alpha2"].map(String::from));
    let mut out = Table::with_header(header);
    for (i, &x) in t.x.iter().enumerate() {
        let mut row = vec![x];
        for w in &t.omega {
            row.push(w[i].re);
            row.push(w[i].im);
        }
        row.extend((0..3).map(|n| t.a[n][i]));
        row.extend((0..3).map(|n| alpha[n][i]));
        out.push_numbers(&row);
    }
    let csv = out_path(&a.out, "coeffs.csv");
    let mut diag = coeff_diagnostics(&t);
    diag["alpha_position"] = json!("alpha_n columns are at the physical point L*x/2");
    let m = ctx.manifest("omega_n, a_n, alpha_n", "coeffs", diag);
    report(&csv, &emit(&out, &m, &csv)?);
    Ok(())
}

fn hamiltonian(ctx: &Context, order: usize) -> Result<ClassicalHamiltonian<f64>, CliError> {
    let table = coeff_table(&default_table_grid::<f64>(), Expansion::Origin)?;
    Ok(ClassicalHamiltonian::new(ctx.params, &table, order)?)
}

fn portrait_table(p: &PhasePortrait<f64>) -> (Table, Value) {
    let mut t = Table::new(&["traj_id", "t", "x", "p", "E", "class"]);
    let mut summary = Vec::new();
    for (id, tr) in p.trajectories.iter().enumerate() {
        for (s, e) in tr.states.iter().zip(&tr.energies) {
            t.push(vec![id.to_string(), num(s.t), num(s.x), num(s.p), num(*e), tr.class.label().to_string()]);
        }
        summary.push(json!({
            "traj_id": id,
            "x0": tr.initial.x,
            "p0": tr.initial.p,
            "class": tr.class.label(),
            "period": tr.period,
            "max_relative_energy_error": tr.max_relative_energy_error,
        }));
    }
    let worst = p.trajectories.iter().fold(0.0_f64, |m, t| m.max(t.max_relative_energy_error));
    let diag = json!({
        "closed": p.count(OrbitClass::Closed),
        "open": p.count(OrbitClass::Open),
        "undetermined": p.count(OrbitClass::Undetermined),
        "max_relative_energy_error": worst,
        "trajectories": summary,
    });
    (t, diag)
}

fn run_portrait(ctx: &Context, a: &PortraitArgs) -> Result<(Table, Value), CliError> {
    let ham = hamiltonian(ctx, a.order)?;
    let settings = IntegratorSettings { dt: a.dt, t_end: a.t_end, stride: a.stride, ..IntegratorSettings::default() };
    let p = phase_portrait(&ham, &default_initial_conditions(&ctx.params), &settings)?;
    Ok(portrait_table(&p))
}

fn run_meff(ctx: &Context, x_max: f64, n: usize) -> Result<(Table, Value), CliError> {
    let ham = hamiltonian(ctx, 2)?;
    let mut t = Table::new(&["x", "m_eff", "w", "m"]);
    for (x, m, w) in mass_profile(&ham, x_max, n)? {
        t.push_numbers(&[x, m, w, ctx.params.m]);
    }
    let diag = json!({ "interaction_half_width": ctx.params.interaction_half_width() });
    Ok((t, diag))
}

pub fn classical(ctx: &Context, c: &ClassicalCommand) -> Result<(), CliError> {
    let (t, diag, csv, quantity, cmd) = match c {
        ClassicalCommand::Portrait(a) => {
            let (t, d) = run_portrait(ctx, a)?;
            (t, d, out_path(&a.out, "portrait.csv"), "classical phase portrait", "classical portrait")
        }
        ClassicalCommand::Meff(a) => {
            let (t, d) = run_meff(ctx, a.x_max, a.n)?;
            (t, d, out_path(&a.out, "meff.csv"), "effective mass m_eff and potential w", "classical meff")
        }
    };
    report(&csv, &emit(&t, &ctx.manifest(quantity, cmd, diag), &csv)?);
    Ok(())
}

pub fn evolve_cmd(ctx: &Context, a: &EvolveArgs) -> Result<(), CliError> {
    let packet = Packet { x0: a.packet.x0, p0: a.packet.p0, sigma: a.packet.sigma };
    let config = EvolutionConfig {
        half_width: a.half_width,
        per_unit: a.per_unit,
        z: a.z.unwrap_or_else(|| ctx.z()),
        dt: a.dt,
        t_end: a.t_end,
        log_every: a.log_every,
    };
    let run = evolve(&packet, &config)?;
    let mut t = Table::new(&["t", "l2_norm", "eta_norm", "mean_x"]);
    for s in &run.log {
        t.push_numbers(&[s.t, s.l2_norm, s.eta_norm, s.mean_x]);
    }
    let d = drift(&run);
    let diag = json!({
        "z": config.z,
        "eta_drift": d.eta_drift,
        "l2_change": d.l2_change,
        "max_eta_imag": d.max_eta_imag,
    });
    let csv = out_path(&a.out, "evolve.csv");
    report(&csv, &emit(&t, &ctx.manifest("L2 and eta norms of a scattered packet", "evolve", diag), &csv)?);
    Ok(())
}

pub fn localized(ctx: &Context, a: &LocalizedArgs) -> Result<(), CliError> {
    let z = a.z.unwrap_or_else(|| ctx.z());
    let state = LocalizedState::new(a.center, z);
    let mut t = Table::new(&["x", "re", "im"]);
    for x in grid(a.grid)?.points() {
        let v = state.regular(x);
        t.push_numbers(&[x, v.re, v.im]);
    }
    let diag = json!({ "z": z, "center": a.center, "delta_at_center": "the delta(x - center) term is not sampled" });
    let csv = out_path(&a.out, "localized.csv");
    report(&csv, &emit(&t, &ctx.manifest("localized state xi", "localized", diag), &csv)?);
    Ok(())
}

/// Reads `x, re, im` rows and checks that the `x` are uniformly spaced.
pub fn read_state(path: &Path) -> Result<(UniformGrid<f64>, Vec<Cx<f64>>), CliError> {
    let mut r = csv::Reader::from_path(path)?;
    let mut xs = Vec::new();
    let mut psi = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if rec.len() < 3 {
            return Err(CliError::Validation(format!("{}: expected columns x, re, im", path.display())));
        }
        let f = |i: usize| {
            rec[i]
                .trim()
                .parse::<f64>()
                .map_err(|e| CliError::Validation(format!("{}: '{}': {e}", path.display(), &rec[i])))
        };
        xs.push(f(0)?);
        psi.push(Cx::new(f(1)?, f(2)?));
    }
    if xs.len() < 3 {
        return Err(CliError::Validation("state needs at least three samples".into()));
    }
    let g = UniformGrid::new(xs[0], xs[xs.len() - 1], xs.len())?;
    if xs.iter().enumerate().any(|(j, x)| (x - g.x(j)).abs() > 1e-9 * g.h.max(1.0)) {
        return Err(CliError::Validation("state samples must lie on a uniform grid".into()));
    }
    Ok((g, psi))
}

pub fn density(ctx: &Context, a: &DensityArgs) -> Result<(), CliError> {
    let (g, psi) = read_state(&a.state)?;
    let z = a.z.unwrap_or_else(|| ctx.z());
    let d = physical_density(&psi, &g, z)?;
    let mut t = Table::new(&["x", "rho"]);
    for (x, r) in g.points().into_iter().zip(&d.rho) {
        t.push_numbers(&[x, *r]);
    }
    let diag = json!({ "z": z, "eta_norm": d.eta_norm, "physical_norm": d.physical_norm });
    let csv = out_path(&a.out, "density.csv");
    report(&csv, &emit(&t, &ctx.manifest("physical probability density", "density", diag), &csv)?);
    Ok(())
}

/// The fixed block-covering pairs first, then seeded random pairs kept away
/// from the kinks at `x = y` and `x + y = 0`.
pub fn spectral_pairs(n: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut pairs: Vec<(f64, f64)> = oracle_pairs::<f64>().into_iter().take(n).collect();
    let mut rng = StdRng::seed_from_u64(seed);
    while pairs.len() < n {
        let (x, y): (f64, f64) = (rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
        if (x - y).abs() >= 0.3 && (x + y).abs() >= 0.3 {
            pairs.push((x, y));
        }
    }
    pairs
}

pub fn spectral_check(ctx: &Context, a: &SpectralArgs) -> Result<(), CliError> {
    if a.pairs == 0 || !(a.tol > 0.0) {
        return Err(CliError::Validation("need --pairs >= 1 and a positive --tol".into()));
    }
    let pairs = spectral_pairs(a.pairs, ctx.seed);
    let estimates = eta1_spectral_oracle_batch(&pairs, &SpectralSettings::default());
    let mut t = Table::new(&["x", "y", "oracle_re", "oracle_im", "exact_re", "exact_im", "abs_error", "extrapolation_error"]);
    let mut worst = 0.0_f64;
    for (&(x, y), est) in pairs.iter().zip(estimates) {
        let est = est?;
        let exact = eta1_kernel(x, y);
        let err = (est.value - exact).norm();
        worst = worst.max(err);
        t.push_numbers(&[x, y, est.value.re, est.value.im, exact.re, exact.im, err, est.extrapolation_error]);
    }
    let diag = json!({ "pairs": pairs.len(), "max_abs_error": worst, "tolerance": a.tol, "passed": worst < a.tol });
    let csv = out_path(&a.out, "spectral_check.csv");
    report(&csv, &emit(&t, &ctx.manifest("eta1", "spectral-check", diag), &csv)?);
    println!("max |oracle - closed form| = {} over {} pairs", num(worst), pairs.len());
    if worst < a.tol {
        Ok(())
    } else {
        Err(CliError::Numerical(format!("oracle error {worst:e} exceeds tolerance {:e}", a.tol)))
    }
}

pub fn figures(ctx: &Context, a: &FigureArgs) -> Result<(), CliError> {
    let fig = a.fig;
    let columns = |t: &CoeffTable<f64>, header: &[&str], f: &dyn Fn(usize) -> Vec<f64>| {
        let mut out = Table::new(header);
        for (i, &x) in t.x.iter().enumerate() {
            let mut row = vec![x];
            row.extend(f(i));
            out.push_numbers(&row);
        }
        out
    };
    let (t, quantity, diag) = match fig {
        1..=4 => {
            let c = coeff_table(&default_table_grid::<f64>(), Expansion::Origin)?;
            let (t, q) = match fig {
                1 => (columns(&c, &["x", "re_w0", "re_w2"], &|i| vec![c.omega[0][i].re, c.omega[2][i].re]), "fig1: Re omega_0, Re omega_2"),
                2 => (columns(&c, &["x", "im_w1", "im_w3"], &|i| vec![c.omega[1][i].im, c.omega[3][i].im]), "fig2: Im omega_1, Im omega_3"),
                3 => (columns(&c, &["x", "re_w4", "im_w5"], &|i| vec![c.omega[4][i].re, c.omega[5][i].im]), "fig3: Re omega_4, Im omega_5"),
                _ => (columns(&c, &["x", "a0", "a1", "a2"], &|i| vec![c.a[0][i], c.a[1][i], c.a[2][i]]), "fig4: a_0, a_1, a_2"),
            };
            (t, q, coeff_diagnostics(&c))
        }
        5 => {
            let (t, d) = run_meff(ctx, 5.0, 1001)?;
            (t, "fig5: effective mass m_eff (m as reference)", d)
        }
        _ => {
            let (t, d) = run_portrait(ctx, &PortraitArgs { dt: 5e-3, t_end: 100.0, stride: 10, order: 2, out: None })?;
            (t, "fig6: phase-space trajectories of the classical Hamiltonian", d)
        }
    };
    let csv = out_path(&a.out, &format!("fig{fig}.csv"));
    report(&csv, &emit(&t, &ctx.manifest(quantity, "figures", diag), &csv)?);
    Ok(())
}
