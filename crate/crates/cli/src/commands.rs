use std::path::{Path, PathBuf};

use coarse_manifold::models::toy::{reference_fit_config, toy_split};
use coarse_manifold::models::{kmc_timestepper, rk4_tmap, KmcVariant, LiftMode, MeanField, ToyMap};
use coarse_manifold::numlin::{spectral_split_with, SplitOptions};
use coarse_manifold::odeman::{default_stable_nodes, default_unstable_nodes, solve_ode_manifold, OdeSolveOptions};
use coarse_manifold::saddle::{branch_table, continue_branch_with, newton_fixed_point_with, stability_flips, ContinuationOptions, NewtonOptions};
use coarse_manifold::models::surface;
use coarse_manifold_verify::{self as verify, KmcSuiteConfig};
use coarse_manifold::{
    enumerate_basis, fit_manifold, io::Table, iterate, jacobian_fd, CoarseMap, FdScheme, FitConfig, ManifoldKind, ManifoldModel,
    MultiIndex, SpectralSplit, SplitMode, TimestepperConfig,
};

use crate::config::{ModelKind, RunConfig};
use crate::CliError;

pub struct Output {
    pub timestamp: bool,
}

fn write_text(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Config(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data serializes");
    s.push('\n');
    s
}

/// `<stem>.<suffix>` next to `out`.
fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "model".into());
    out.with_file_name(format!("{stem}.{suffix}"))
}

/// The coarse map selected by the config, at reporting horizon `horizon`.
fn build_map(cfg: &RunConfig, horizon: f64) -> Result<Box<dyn CoarseMap>, CliError> {
    Ok(match cfg.model {
        ModelKind::Toy => Box::new(ToyMap),
        ModelKind::Meanfield => Box::new(rk4_tmap(cfg.kmc_params(), horizon, cfg.dt.unwrap_or(0.005))?),
        ModelKind::Kmc => Box::new(kmc_timestepper(
            cfg.kmc_params(),
            cfg.variant.unwrap_or(KmcVariant::WellMixed),
            cfg.width.unwrap_or(128),
            cfg.height.unwrap_or(128),
            cfg.lift_mode.unwrap_or(LiftMode::ExactCount),
            TimestepperConfig {
                micro_horizon: cfg.micro_horizon.unwrap_or(0.05).min(horizon),
                reporting_horizon: horizon,
                realizations: cfg.realizations.unwrap_or(200),
                master_seed: cfg.master_seed.unwrap_or(KmcSuiteConfig::default().master_seed),
            },
        )?),
    })
}

fn newton_options(cfg: &RunConfig) -> NewtonOptions {
    let base = match cfg.model {
        ModelKind::Kmc => NewtonOptions::stochastic(),
        _ => NewtonOptions::default(),
    };
    NewtonOptions {
        tol: cfg.newton_tol(),
        max_iter: cfg.max_iter.unwrap_or(base.max_iter),
        eps: cfg.fd_eps(),
        ..base
    }
}

fn split_options(cfg: &RunConfig) -> SplitOptions {
    SplitOptions {
        orientation: cfg.orientation(),
        ..SplitOptions::default()
    }
}

pub fn saddle(cfg: &RunConfig) -> Result<(), CliError> {
    let map = build_map(cfg, cfg.horizon())?;
    let point = newton_fixed_point_with(&map, &cfg.x0(), &cfg.params(), &newton_options(cfg)).map_err(CliError::numerical("saddle"))?;
    write_text(cfg.out.as_deref().map(Path::new), &to_json(&point))
}

pub fn continuation(cfg: &RunConfig, out: &Output) -> Result<(), CliError> {
    if cfg.model == ModelKind::Toy {
        return Err(CliError::Config("the toy map has no parameters to continue in".into()));
    }
    let (from, to, ds) = match (cfg.from, cfg.to, cfg.ds) {
        (Some(a), Some(b), Some(ds)) => (a, b, ds.abs()),
        _ => return Err(CliError::Config("continue needs --from, --to and --ds".into())),
    };
    if from == to {
        return Err(CliError::Config("--from and --to must differ".into()));
    }
    let map = build_map(cfg, cfg.horizon())?;
    let newton = newton_options(cfg);
    let step = if to > from { ds } else { -ds };
    let s0 = newton_fixed_point_with(&map, &cfg.x0(), &[from], &newton).map_err(CliError::numerical("continue"))?;
    let s1 = newton_fixed_point_with(&map, &s0.x, &[from + step], &newton).map_err(CliError::numerical("continue"))?;
    let opts = ContinuationOptions {
        ds,
        steps: cfg.steps.unwrap_or(10_000),
        newton: NewtonOptions {
            max_iter: cfg.max_iter.unwrap_or(12),
            ..newton
        },
        p_bounds: Some((from.min(to), from.max(to))),
        ..ContinuationOptions::default()
    };
    let run = continue_branch_with(&map, &s0, &s1, 0, &opts).map_err(CliError::numerical("continue"))?;
    if let Some(e) = &run.termination {
        eprintln!("continue: branch stopped early after {} points: {e}", run.points.len());
    }
    write_text(cfg.out.as_deref().map(Path::new), &branch_table(&run.points).render(out.timestamp))?;
    let flips = stability_flips(&run.points);
    if flips.is_empty() {
        eprintln!("no stability changes on [{}, {}]", from.min(to), from.max(to));
    }
    for f in &flips {
        eprintln!("stability flip {:?} -> {:?} in beta [{}, {}]", f.from, f.to, f.p_low, f.p_high);
    }
    Ok(())
}

fn fixed_point(cfg: &RunConfig, map: &dyn CoarseMap) -> Result<Vec<f64>, CliError> {
    if let Some(x) = &cfg.x_star {
        return Ok(x.clone());
    }
    if cfg.model == ModelKind::Toy {
        return Ok(vec![0.0; 3]);
    }
    Ok(newton_fixed_point_with(map, &cfg.x0(), &cfg.params(), &newton_options(cfg)).map_err(CliError::numerical("saddle"))?.x)
}

/// Eigen-frame at `x`. For kMC an optional longer horizon supplies the
/// eigenvectors and the fit horizon only the diagonal blocks.
fn frame(cfg: &RunConfig, map: &dyn CoarseMap, x: &[f64]) -> Result<SpectralSplit, CliError> {
    if cfg.model == ModelKind::Toy && cfg.x_star.is_none() {
        return Ok(toy_split());
    }
    let p = cfg.params();
    let j = jacobian_fd(map, x, &p, cfg.fd_eps(), FdScheme::Central).map_err(CliError::numerical("jacobian"))?;
    let split = match cfg.frame_horizon {
        Some(h) if cfg.model != ModelKind::Toy => {
            let long = build_map(cfg, h)?;
            let jl = jacobian_fd(&long, x, &p, cfg.fd_eps(), FdScheme::Central).map_err(CliError::numerical("jacobian"))?;
            spectral_split_with(&jl, x, SplitMode::Discrete, &split_options(cfg)).and_then(|s| s.projected(&j))
        }
        _ => spectral_split_with(&j, x, SplitMode::Discrete, &split_options(cfg)),
    };
    split.map_err(CliError::numerical("spectral split"))
}

fn basis(cfg: &RunConfig, kind: ManifoldKind, d: usize, degree: Option<u32>) -> Result<Vec<MultiIndex>, CliError> {
    if let Some(custom) = &cfg.basis {
        let list: Vec<MultiIndex> = custom.iter().map(|v| MultiIndex(v.clone())).collect();
        return Ok(enumerate_basis(d, 0, true, Some(&list))?);
    }
    let include_linear = cfg.include_linear.unwrap_or(true);
    match (cfg.model, kind, degree.or(cfg.degree)) {
        (ModelKind::Toy, _, m) => Ok(enumerate_basis(d, m.unwrap_or(2), include_linear, None)?),
        (_, ManifoldKind::Unstable, None) if d == 2 && include_linear => Ok(surface::surface_unstable_basis()),
        (_, _, m) => Ok(enumerate_basis(d, m.unwrap_or(3), include_linear, None)?),
    }
}

fn fit_config(cfg: &RunConfig, kind: ManifoldKind, n_basis: usize) -> FitConfig {
    let beta = cfg.kmc_params().beta;
    let mut base = match (cfg.model, kind) {
        (ModelKind::Toy, ManifoldKind::Stable) => reference_fit_config(),
        (ModelKind::Toy, ManifoldKind::Unstable) => FitConfig {
            seeds: vec![vec![-0.2], vec![-0.1], vec![0.1], vec![0.2]],
            k_max: 2,
            ..FitConfig::default()
        },
        (_, ManifoldKind::Stable) => surface::surface_stable_fit_config(beta),
        (_, ManifoldKind::Unstable) => surface::surface_unstable_fit_config(beta),
    };
    if base.q0.as_ref().is_some_and(|q| q.len() != n_basis) {
        base.q0 = None;
    }
    base.params = cfg.params();
    FitConfig {
        seeds: cfg.seeds.clone().unwrap_or(base.seeds),
        k_max: cfg.k_max.unwrap_or(base.k_max),
        inner_radius: cfg.inner_radius.unwrap_or(base.inner_radius),
        outer_radius: cfg.outer_radius.unwrap_or(base.outer_radius),
        eps_q: cfg.eps_q.unwrap_or(base.eps_q),
        state_eps: cfg.state_eps.or(base.state_eps),
        newton_tol: cfg.fit_tol.unwrap_or(base.newton_tol),
        max_newton: cfg.max_newton.unwrap_or(base.max_newton),
        accept_unconverged: cfg.accept_unconverged.unwrap_or(base.accept_unconverged),
        q0: cfg.q0.clone().or(base.q0),
        ..base
    }
}

/// `(z, h(z), x)` on a grid spanning the seed radius: 41 points in 1-D,
/// 13 per axis otherwise.
fn surface_table(model: &ManifoldModel, radius: f64) -> Result<Table, CliError> {
    let (d, e) = (model.input_dim(), model.output_dim());
    let n = model.split.dim();
    let mut header: Vec<String> = (1..=d).map(|i| format!("z{i}")).collect();
    header.extend((1..=e).map(|j| format!("h{j}")));
    header.extend((1..=n).map(|i| format!("x{i}")));
    let mut table = Table::new(header);
    let per_axis: usize = if d == 1 { 41 } else { 13 };
    let axis: Vec<f64> = (0..per_axis).map(|i| -radius + 2.0 * radius * i as f64 / (per_axis - 1) as f64).collect();
    let total = per_axis.pow(d as u32);
    for flat in 0..total {
        let mut rest = flat;
        let mut z = vec![0.0; d];
        for k in (0..d).rev() {
            z[k] = axis[rest % per_axis];
            rest /= per_axis;
        }
        let h = model.evaluate(&z);
        let x = model.state(&z, &h)?;
        let mut row = z;
        row.extend(h);
        row.extend(x);
        table.push_numbers(&row);
    }
    Ok(table)
}

pub fn fit(cfg: &RunConfig, kind: ManifoldKind, degree: Option<u32>, out: &Output) -> Result<(), CliError> {
    let path = cfg
        .out
        .as_deref()
        .map(PathBuf::from)
        .ok_or_else(|| CliError::Config("fit commands need --out model.json".into()))?;
    let horizon = cfg.horizon();
    let map = build_map(cfg, horizon)?;
    let x = fixed_point(cfg, map.as_ref())?;
    let split = frame(cfg, map.as_ref(), &x)?;
    let d = kind.input_dim(&split);
    let basis = basis(cfg, kind, d, degree)?;
    let fc = fit_config(cfg, kind, basis.len() * kind.output_dim(&split));
    let (model, report) = fit_manifold(&map, &split, &basis, kind, &fc).map_err(CliError::numerical("fit"))?;
    if !report.converged {
        eprintln!("fit: Newton stopped after {} steps without converging", report.iterations.len());
    }
    let radius = fc.seeds.iter().map(|s| s.iter().map(|v| v * v).sum::<f64>().sqrt()).fold(0.0, f64::max);
    write_text(Some(&path), &(model.to_json()? + "\n"))?;
    write_text(Some(&sibling(&path, "report.json")), &(report.to_json()? + "\n"))?;
    let surface = surface_table(&model, radius)?;
    surface
        .write(&sibling(&path, "surface.csv"), out.timestamp)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let coeffs: Vec<String> = (0..model.output_dim())
        .flat_map(|j| model.basis.iter().map(move |b| (j, b)))
        .map(|(j, b)| format!("h{}:{b}={}", j + 1, coarse_manifold::io::sig6(model.coefficient(j, &b.0))))
        .collect();
    println!("{}", coeffs.join(" "));
    Ok(())
}

pub fn ode_manifold(cfg: &RunConfig, kind: ManifoldKind) -> Result<(), CliError> {
    if cfg.model != ModelKind::Meanfield {
        return Err(CliError::Config("ode-manifold needs model = meanfield".into()));
    }
    let beta = cfg.kmc_params().beta;
    let x = match &cfg.x_star {
        Some(x) => x.clone(),
        None => surface::meanfield_equilibrium(beta).map_err(CliError::numerical("equilibrium"))?,
    };
    let field = MeanField { params: cfg.kmc_params() };
    let d = match kind {
        ManifoldKind::Stable => 1,
        ManifoldKind::Unstable => 2,
    };
    let basis = basis(cfg, kind, d, None)?;
    let nodes = cfg.nodes.clone().unwrap_or_else(|| match kind {
        ManifoldKind::Stable => default_stable_nodes(),
        ManifoldKind::Unstable => default_unstable_nodes(),
    });
    let opts = OdeSolveOptions {
        split: split_options(cfg),
        ..OdeSolveOptions::default()
    };
    let sol = solve_ode_manifold(&field, &x, kind, &basis, &nodes, cfg.q0.as_deref(), &opts).map_err(CliError::numerical("ode-manifold"))?;
    eprintln!("collocation residual {:.3e}", sol.residual_norm);
    write_text(cfg.out.as_deref().map(Path::new), &(sol.model.to_json()? + "\n"))
}

/// Parses `0.1,0.2` or `[0.1, 0.2]`.
pub fn parse_vector(s: &str) -> Result<Vec<f64>, CliError> {
    let t = s.trim().trim_start_matches('[').trim_end_matches(']');
    t.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| CliError::Config(format!("--init {s:?}: {e}"))))
        .collect()
}

pub fn simulate(cfg: &RunConfig, init: Option<Vec<f64>>, manifold: Option<&Path>, out: &Output) -> Result<(), CliError> {
    let steps = cfg.steps.ok_or_else(|| CliError::Config("simulate needs --steps".into()))?;
    let horizon = cfg.horizon();
    let map = build_map(cfg, horizon)?;
    let n = map.dim();
    let init = init.unwrap_or_else(|| cfg.x0());
    let x0 = match manifold {
        Some(p) => {
            let model = ManifoldModel::load(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            if model.split.dim() != n {
                return Err(CliError::Config(format!("manifold state dimension {} does not match model dimension {n}", model.split.dim())));
            }
            if init.len() == model.input_dim() {
                model.lift_to_manifold(&init)?
            } else if init.len() == n {
                let (zi, _) = model.coordinates(&init)?;
                model.lift_to_manifold(&zi)?
            } else {
                return Err(CliError::Config(format!(
                    "--init has {} entries; expected {} (graph input) or {n} (state)",
                    init.len(),
                    model.input_dim()
                )));
            }
        }
        None if init.len() == n => init,
        None => return Err(CliError::Config(format!("--init has {} entries, state dimension is {n}", init.len()))),
    };
    let traj = iterate(&map, &x0, &cfg.params(), steps).map_err(CliError::numerical("simulate"))?;
    let dt = if cfg.model == ModelKind::Toy { 1.0 } else { horizon };
    let mut header = vec!["k".to_string(), "t".to_string()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    let mut table = Table::new(header);
    for (k, x) in traj.iter().enumerate() {
        let mut row = vec![k.to_string(), coarse_manifold::io::sig6(k as f64 * dt)];
        row.extend(x.iter().map(|&v| coarse_manifold::io::sig6(v)));
        table.push(row);
    }
    write_text(cfg.out.as_deref().map(Path::new), &table.render(out.timestamp))
}

/// Runs the acceptance criteria. Returns whether all passed.
pub fn verify(cfg: &RunConfig, suite: &str) -> Result<bool, CliError> {
    let mut results = verify::deterministic_suite();
    match suite {
        "paper" => {
            let d = KmcSuiteConfig::default();
            let kc = KmcSuiteConfig {
                width: cfg.width.unwrap_or(d.width),
                height: cfg.height.unwrap_or(d.height),
                realizations: cfg.realizations.unwrap_or(d.realizations),
                master_seed: cfg.master_seed.unwrap_or(d.master_seed),
                variant: cfg.variant.unwrap_or(d.variant),
                lift_mode: cfg.lift_mode.unwrap_or(d.lift_mode),
                saddle_horizon: cfg.frame_horizon.unwrap_or(d.saddle_horizon),
                fit_horizon: cfg.horizon.unwrap_or(d.fit_horizon),
            };
            results.push(verify::criterion_kmc(&kc));
        }
        "deterministic" => {}
        other => return Err(CliError::Config(format!("unknown suite {other:?} (paper, deterministic)"))),
    }
    let text = verify::render_suite(&results);
    write_text(cfg.out.as_deref().map(Path::new), &text)?;
    if cfg.out.is_some() {
        print!("{text}");
    }
    Ok(results.iter().all(|r| r.passed()))
}
