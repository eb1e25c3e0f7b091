use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use lsbwave_core::general::{check_general_invariance, general_invariance_spread};
use lsbwave_core::invariants::invariance_report;
use lsbwave_core::oracle::direct_scatter;
use lsbwave_core::potential::validate_symmetry;
use lsbwave_core::solver::{basis_at, design_amplitudes, solve_bound_states_with, solve_scattering};
use lsbwave_core::{
    isometry_check, BoundaryCondition, CellProfile, DomainSpec, GeneralTransform, Incoming, PotentialSpec,
    SolveOptions, SymmetryKind, DEFAULT_TOL,
};
use rayon::prelude::*;

use crate::cli::{Command, Common};
use crate::config::{Defaults, RunConfig};
use crate::CliError;

type Res<T> = Result<T, CliError>;

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

pub fn execute(cmd: Command, stdout: &mut dyn Write) -> Res<()> {
    match cmd {
        Command::Validate { common, samples, sym_tol } => validate(&common, samples, sym_tol, stdout),
        Command::Invariants { common, pairs, domain } => invariants(&common, pairs, domain, stdout),
        Command::Basis { common, points } => basis(&common, points, stdout),
        Command::Scatter { common, field, points } => scatter(&common, field.as_deref(), points, stdout),
        Command::Design { common } => design(&common, stdout),
        Command::Bound { common, bc } => bound(&common, bc.as_deref(), stdout),
        Command::GeneralCheck { common, transform, domain, pairs, allow_broken } => {
            general_check(&common, &transform, &domain, pairs, allow_broken, stdout)
        }
        Command::Oracle { common } => oracle(&common, stdout),
        Command::Bench { cells, energy, tol, repeats, skip_direct, out } => {
            bench(&cells, energy, tol, repeats, skip_direct, out.as_deref(), stdout)
        }
    }
}

/// Energies requested on the command line or in the config.
#[derive(Debug, Clone, PartialEq)]
enum Energies {
    Single(f64),
    Grid { lo: f64, hi: f64, n: usize },
}

impl Energies {
    fn values(&self) -> Vec<f64> {
        match *self {
            Energies::Single(e) => vec![e],
            Energies::Grid { lo, n: 1, .. } => vec![lo],
            Energies::Grid { lo, hi, n } => (0..n).map(|j| lo + (hi - lo) * j as f64 / (n - 1) as f64).collect(),
        }
    }
}

fn parse_grid(s: &str) -> Res<Energies> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || input(format!("energy grid '{s}' is not E0:E1:N"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite()) || n == 0 || (n > 1 && !(hi > lo)) {
        return Err(input(format!("energy grid '{s}' needs finite E0 < E1 and N >= 1")));
    }
    Ok(Energies::Grid { lo, hi, n })
}

fn parse_pair(s: &str, what: &str) -> Res<(f64, f64)> {
    let bad = || input(format!("{what} '{s}' is not A:B"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(bad());
    }
    Ok((a, b))
}

/// Flags merged with the config defaults.
struct Context {
    config: RunConfig,
    energies: Option<Energies>,
    reference: usize,
    tol: f64,
    out: Option<PathBuf>,
}

impl Context {
    fn load(common: &Common) -> Res<Self> {
        let config = RunConfig::load(&common.config)?;
        let Defaults { energy, energies, ref_domain, tol, out, .. } = config.defaults.clone();
        let energies = match (common.energy, &common.energies) {
            (Some(e), _) => Some(Energies::Single(e)),
            (None, Some(g)) => Some(parse_grid(g)?),
            (None, None) => match (energy, energies) {
                (Some(e), _) => Some(Energies::Single(e)),
                (None, Some(g)) => Some(parse_grid(&g)?),
                (None, None) => None,
            },
        };
        if let Some(Energies::Single(e)) = energies {
            if !e.is_finite() {
                return Err(input("energy must be finite"));
            }
        }
        let tol = common.tol.or(tol).unwrap_or(DEFAULT_TOL);
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(input(format!("tolerance must be positive, got {tol}")));
        }
        let reference = common.ref_domain.or(ref_domain).unwrap_or(1);
        let out = common.out.clone().or(out);
        Ok(Context { config, energies, reference, tol, out })
    }

    fn potential(&self) -> Res<PotentialSpec> {
        self.config.potential.build()
    }

    fn energies(&self) -> Res<Vec<f64>> {
        self.energies
            .as_ref()
            .map(Energies::values)
            .ok_or_else(|| input("no energy given (use --energy or --energies)"))
    }

    fn single_energy(&self) -> Res<f64> {
        match self.energies()?.as_slice() {
            [e] => Ok(*e),
            _ => Err(input("needs a single --energy")),
        }
    }

    fn options(&self) -> SolveOptions {
        SolveOptions { reference: self.reference, tol: self.tol, ..SolveOptions::default() }
    }

    fn sink<'a>(&self, stdout: &'a mut dyn Write) -> Res<Box<dyn Write + 'a>> {
        sink(self.out.as_deref(), stdout)
    }
}

fn sink<'a>(path: Option<&Path>, stdout: &'a mut dyn Write) -> Res<Box<dyn Write + 'a>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| input(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(stdout),
    })
}

fn csv_writer<W: Write>(w: W, header: &[&str]) -> Res<csv::Writer<W>> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(header)?;
    Ok(w)
}

fn record<W: Write>(w: &mut csv::Writer<W>, fields: &[String]) -> Res<()> {
    w.write_record(fields)?;
    Ok(())
}

fn thread_pool() -> Res<rayon::ThreadPool> {
    let threads = match std::env::var("LSBWAVE_THREADS") {
        Ok(v) => v.trim().parse::<usize>().map_err(|_| input(format!("LSBWAVE_THREADS='{v}' is not a count")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Numerical(format!("thread pool: {e}")))
}

/// Maps `f` over the energies in parallel; results and the reported error
/// follow energy order.
fn per_energy<T, F>(energies: &[f64], f: F) -> Res<Vec<T>>
where
    T: Send,
    F: Fn(f64) -> Res<T> + Sync,
{
    let results: Vec<Res<T>> = thread_pool()?.install(|| energies.par_iter().map(|&e| f(e)).collect());
    results.into_iter().collect()
}

fn fmt(x: f64) -> String {
    x.to_string()
}

fn validate(common: &Common, samples: usize, sym_tol: f64, stdout: &mut dyn Write) -> Res<()> {
    let ctx = Context::load(common).map_err(|e| e.context("validate"))?;
    let p = ctx.config.potential.build_unchecked().map_err(|e| e.context("validate"))?;
    let mut w = csv_writer(ctx.sink(stdout)?, &["domain", "kind", "max_abs_deviation", "pass"])?;
    let mut failed = Vec::new();
    for (i, d) in p.domains().iter().enumerate() {
        let report = validate_symmetry(d, samples.max(2), sym_tol);
        let kind = match d.transform.kind {
            SymmetryKind::Inversion => "inversion",
            SymmetryKind::Translation => "translation",
            SymmetryKind::None => "none",
        };
        record(&mut w, &[(i + 1).to_string(), kind.into(), fmt(report.max_abs_deviation), report.pass.to_string()])?;
        if !report.pass {
            failed.push(format!("domain {} (deviation {:e} > {sym_tol:e})", i + 1, report.max_abs_deviation));
        }
    }
    w.flush()?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(input(format!("validate: symmetry violated in {}", failed.join(", "))))
    }
}

fn invariants(common: &Common, pairs: usize, domain: Option<usize>, stdout: &mut dyn Write) -> Res<()> {
    let ctx = Context::load(common).map_err(|e| e.context("invariants"))?;
    let p = ctx.potential().map_err(|e| e.context("invariants"))?;
    let energy = ctx.single_energy().map_err(|e| e.context("invariants"))?;
    let domains: Vec<usize> = match domain {
        Some(d) => vec![d],
        None => (1..=p.num_domains()).filter(|&d| p.domains()[d - 1].transform.is_symmetric()).collect(),
    };
    let reports = per_energy(&domains.iter().map(|&d| d as f64).collect::<Vec<_>>(), |d| {
        invariance_report(&p, d as usize, energy, pairs, ctx.tol)
            .map_err(|e| CliError::from(e).context(format!("invariants at E={energy}, domain {d}")))
    })?;
    let mut w = csv_writer(ctx.sink(stdout)?, &["domain", "m", "n", "re_q", "im_q", "spread"])?;
    for r in &reports {
        for m in 0..2 {
            for n in 0..2 {
                let q = r.mean[m][n];
                record(
                    &mut w,
                    &[r.domain.to_string(), (m + 1).to_string(), (n + 1).to_string(), fmt(q.re), fmt(q.im), fmt(r.spread[m][n])],
                )?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let n = points.max(2);
    (0..n).map(|j| lo + (hi - lo) * j as f64 / (n - 1) as f64).collect()
}

fn basis(common: &Common, points: usize, stdout: &mut dyn Write) -> Res<()> {
    let ctx = Context::load(common).map_err(|e| e.context("basis"))?;
    let p = ctx.potential().map_err(|e| e.context("basis"))?;
    let energy = ctx.single_energy().map_err(|e| e.context("basis"))?;
    let at = |e: CliError| e.context(format!("basis at E={energy}"));
    let g = basis_at(&p, energy, &ctx.options()).map_err(|e| at(e.into()))?;
    let mut w = csv_writer(ctx.sink(stdout)?, &["x", "re_xi1", "im_xi1", "re_xi2", "im_xi2"])?;
    for x in grid(p.x_start(), p.x_end(), points) {
        let (a, b) = g.eval(x).map_err(|e| at(e.into()))?;
        record(&mut w, &[fmt(x), fmt(a.value.re), fmt(a.value.im), fmt(b.value.re), fmt(b.value.im)])?;
    }
    w.flush()?;
    Ok(())
}

const SCATTER_HEADER: [&str; 7] = ["energy", "T", "R", "re_t", "im_t", "re_r", "im_r"];

fn scatter(common: &Common, field: Option<&Path>, points: usize, stdout: &mut dyn Write) -> Res<()> {
    let ctx = Context::load(common).map_err(|e| e.context("scatter"))?;
    let p = ctx.potential().map_err(|e| e.context("scatter"))?;
    let energies = ctx.energies().map_err(|e| e.context("scatter"))?;
    if field.is_some() && energies.len() != 1 {
        return Err(input("scatter: --field needs a single --energy"));
    }
    let opts = ctx.options();
    let results = per_energy(&energies, |e| {
        let run = || -> lsbwave_core::Result<_> {
            let g = basis_at(&p, e, &opts)?;
            let r = solve_scattering(&g, Incoming::left())?;
            Ok((g, r))
        };
        run().map_err(|err| CliError::from(err).context(format!("scatter at E={e}")))
    })?;
    let mut w = csv_writer(ctx.sink(stdout)?, &SCATTER_HEADER)?;
    for (_, r) in &results {
        record(
            &mut w,
            &[fmt(r.energy), fmt(r.transmittance), fmt(r.reflectance), fmt(r.t.re), fmt(r.t.im), fmt(r.r.re), fmt(r.r.im)],
        )?;
    }
    w.flush()?;
    if let (Some(path), Some((g, r))) = (field, results.first()) {
        let file = File::create(path).map_err(|e| input(format!("scatter: cannot create {}: {e}", path.display())))?;
        let mut f = csv_writer(BufWriter::new(file), &["x", "re_psi", "im_psi", "abs2_psi"])?;
        for x in grid(p.x_start(), p.x_end(), points) {
            let psi = r.psi(g, x).map_err(|e| CliError::from(e).context(format!("scatter field at E={}", r.energy)))?;
            record(&mut f, &[fmt(x), fmt(psi.value.re), fmt(psi.value.im), fmt(psi.value.norm_sqr())])?;
        }
        f.flush()?;
    }
    Ok(())
}

fn design(common: &Common, stdout: &mut dyn Write) -> Res<()> {
    let ctx = Context::load(common).map_err(|e| e.context("design"))?;
    let p = ctx.potential().map_err(|e| e.context("design"))?;
    let energies = ctx.energies().map_err(|e| e.context("design"))?;
    let opts = ctx.options();
    let results = per_energy(&energies, |e| {
        basis_at(&p, e, &opts)
            .and_then(|g| design_amplitudes(&g))
            .map_err(|err| CliError::from(err).context(format!("design at E={e}")))
    })?;
    let header = [
        "energy",
        "re_a_plus_left",
        "im_a_plus_left",
        "re_a_minus_left",
        "im_a_minus_left",
        "re_a_plus_right",
        "im_a_plus_right",
        "re_a_minus_right",
        "im_a_minus_right",
    ];
    let mut w = csv_writer(ctx.sink(stdout)?, &header)?;
    for r in &results {
        let mut row = vec![fmt(r.energy)];
        for a in [r.a_plus_left, r.a_minus_left, r.a_plus_right, r.a_minus_right] {
            row.push(fmt(a.re));
            row.push(fmt(a.im));
        }
        record(&mut w, &row)?;
    }
    w.flush()?;
    Ok(())
}

fn parse_bc(s: &str) -> Res<BoundaryCondition> {
    match s {
        "dirichlet" => Ok(BoundaryCondition::DirichletBox),
        "decaying" => Ok(BoundaryCondition::DecayingLeads),
        other => Err(input(format!("unknown boundary condition '{other}' (dirichlet|decaying)"))),
    }
}

fn bound(common: &Common, bc: Option<&str>, stdout: &mut dyn Write) -> Res<()> {
    let ctx = Context::load(common).map_err(|e| e.context("bound"))?;
    let p = ctx.potential().map_err(|e| e.context("bound"))?;
    let bc = parse_bc(bc.or(ctx.config.defaults.bc.as_deref()).unwrap_or("dirichlet")).map_err(|e| e.context("bound"))?;
    let (lo, hi, n) = match ctx.energies {
        Some(Energies::Grid { lo, hi, n }) if n >= 2 => (lo, hi, n),
        _ => return Err(input("bound: needs an energy window --energies E0:E1:N with N >= 2")),
    };
    let states = solve_bound_states_with(&p, (lo, hi), bc, Some(n), &ctx.options())
        .map_err(|e| CliError::from(e).context(format!("bound in [{lo}, {hi}]")))?;
    let mut w = csv_writer(ctx.sink(stdout)?, &["index", "energy", "nodes", "norm", "current"])?;
    for (i, s) in states.iter().enumerate() {
        record(&mut w, &[(i + 1).to_string(), fmt(s.energy), s.nodes.to_string(), fmt(s.norm), fmt(s.current)])?;
    }
    w.flush()?;
    Ok(())
}

fn parse_transform(s: &str, domain: (f64, f64)) -> Res<GeneralTransform> {
    let bad = || input(format!("transform '{s}' is not scale:S, translate:L or invert:A"));
    let (kind, value) = s.split_once(':').ok_or_else(bad)?;
    let v: f64 = value.trim().parse().map_err(|_| bad())?;
    if !v.is_finite() {
        return Err(bad());
    }
    let t = match kind.trim() {
        "scale" => GeneralTransform::scaling(v, domain),
        "translate" => GeneralTransform::translation(v, domain),
        "invert" => GeneralTransform::inversion(v, domain),
        _ => return Err(bad()),
    };
    Ok(t?)
}

fn general_check(
    common: &Common,
    transform: &str,
    domain: &str,
    pairs: usize,
    allow_broken: bool,
    stdout: &mut dyn Write,
) -> Res<()> {
    let ctx = Context::load(common).map_err(|e| e.context("general-check"))?;
    let p = ctx.potential().map_err(|e| e.context("general-check"))?;
    let energies = ctx.energies().map_err(|e| e.context("general-check"))?;
    let interval = parse_pair(domain, "domain").map_err(|e| e.context("general-check"))?;
    let t = parse_transform(transform, interval).map_err(|e| e.context("general-check"))?;
    let isometric = isometry_check(&t, 257);
    let reports = per_energy(&energies, |e| {
        let r = if allow_broken {
            general_invariance_spread(&p, interval, &t, e, pairs, ctx.tol)
        } else {
            check_general_invariance(&p, interval, &t, e, pairs, ctx.tol)
        };
        r.map_err(|err| CliError::from(err).context(format!("general-check at E={e}")))
    })?;
    let header = ["energy", "isometric", "spread", "mapping_residual", "symmetry_deviation"];
    let mut w = csv_writer(ctx.sink(stdout)?, &header)?;
    for (e, r) in energies.iter().zip(&reports) {
        record(
            &mut w,
            &[fmt(*e), isometric.to_string(), fmt(r.spread), fmt(r.mapping_residual), fmt(r.symmetry_deviation)],
        )?;
    }
    w.flush()?;
    Ok(())
}

fn oracle(common: &Common, stdout: &mut dyn Write) -> Res<()> {
    let ctx = Context::load(common).map_err(|e| e.context("oracle"))?;
    let p = ctx.potential().map_err(|e| e.context("oracle"))?;
    let energies = ctx.energies().map_err(|e| e.context("oracle"))?;
    let results = per_energy(&energies, |e| {
        direct_scatter(&p, e, ctx.tol).map_err(|err| CliError::from(err).context(format!("oracle at E={e}")))
    })?;
    let mut w = csv_writer(ctx.sink(stdout)?, &SCATTER_HEADER)?;
    for r in &results {
        record(
            &mut w,
            &[fmt(r.energy), fmt(r.transmittance), fmt(r.reflectance), fmt(r.t.re), fmt(r.t.im), fmt(r.r.re), fmt(r.r.im)],
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Cosine lattice of `cells` unit periods between free leads.
pub(crate) fn bench_lattice(cells: usize) -> Res<PotentialSpec> {
    let profile = CellProfile::Cosine { amplitude: 0.6, period: 1.0, phase: 0.4, offset: 0.3 };
    let d = DomainSpec::translation(0.0, cells as f64, cells, profile)?;
    Ok(PotentialSpec::new(vec![d], 0.0, 0.0)?)
}

fn best_of<T>(repeats: usize, mut f: impl FnMut() -> Res<T>) -> Res<(T, f64)> {
    let mut best = f64::INFINITY;
    let mut last = None;
    for _ in 0..repeats.max(1) {
        let start = Instant::now();
        let v = f()?;
        best = best.min(start.elapsed().as_secs_f64());
        last = Some(v);
    }
    Ok((last.expect("at least one repetition"), best))
}

fn bench(
    cells: &str,
    energy: f64,
    tol: Option<f64>,
    repeats: usize,
    skip_direct: bool,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Res<()> {
    let counts = cells
        .split(',')
        .map(|c| c.trim().parse::<usize>().ok().filter(|&n| n >= 2))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| input(format!("bench: cell counts '{cells}' must be integers >= 2")))?;
    let tol = tol.unwrap_or(DEFAULT_TOL);
    if !(tol > 0.0 && energy.is_finite()) {
        return Err(input("bench: needs a positive tolerance and finite energy"));
    }
    let header = ["cells", "lsb_seconds", "direct_seconds", "lsb_steps", "direct_steps", "T_lsb", "T_direct"];
    let mut w = csv_writer(sink(out, stdout)?, &header)?;
    for n in counts {
        let ctx = |e: lsbwave_core::Error| CliError::from(e).context(format!("bench at E={energy}, {n} cells"));
        let p = bench_lattice(n).map_err(|e| e.context("bench"))?;
        let opts = SolveOptions { tol, ..SolveOptions::default() };
        let ((steps, lsb), lsb_time) = best_of(repeats, || {
            let g = basis_at(&p, energy, &opts).map_err(ctx)?;
            let r = solve_scattering(&g, Incoming::left()).map_err(ctx)?;
            Ok((g.steps(), r))
        })?;
        let mut row = vec![n.to_string(), fmt(lsb_time)];
        if skip_direct {
            row.extend([String::new(), steps.to_string(), String::new(), fmt(lsb.transmittance), String::new()]);
        } else {
            let start = Instant::now();
            let direct = direct_scatter(&p, energy, tol).map_err(ctx)?;
            let direct_time = start.elapsed().as_secs_f64();
            row.extend([
                fmt(direct_time),
                steps.to_string(),
                direct.steps.to_string(),
                fmt(lsb.transmittance),
                fmt(direct.transmittance),
            ]);
        }
        record(&mut w, &row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energy_grids() {
        assert_eq!(parse_grid("0:1:3").unwrap().values(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("-1:0:2").unwrap().values(), vec![-1.0, 0.0]);
        assert_eq!(parse_grid("0.5:0.5:1").unwrap().values(), vec![0.5]);
        for bad in ["0:1", "1:0:3", "0:1:0", "a:1:2", "0:inf:2"] {
            assert!(matches!(parse_grid(bad), Err(CliError::Input(_))), "{bad}");
        }
    }

    #[test]
    fn transforms_and_intervals() {
        assert_eq!(parse_pair("-1:2.5", "domain").unwrap(), (-1.0, 2.5));
        assert!(parse_pair("2:1", "domain").is_err());
        let t = parse_transform("scale:2", (1.0, 2.0)).unwrap();
        assert_eq!(t.apply(1.5), 3.0);
        assert!(!isometry_check(&t, 17));
        assert!(isometry_check(&parse_transform("invert:0.5", (0.0, 0.5)).unwrap(), 17));
        assert!(matches!(parse_transform("scale:0", (1.0, 2.0)), Err(CliError::Input(_))));
        assert!(matches!(parse_transform("rotate:1", (1.0, 2.0)), Err(CliError::Input(_))));
    }

    #[test]
    fn boundary_conditions() {
        assert_eq!(parse_bc("dirichlet").unwrap(), BoundaryCondition::DirichletBox);
        assert_eq!(parse_bc("decaying").unwrap(), BoundaryCondition::DecayingLeads);
        assert!(parse_bc("periodic").is_err());
    }

    #[test]
    fn per_energy_keeps_order_and_first_error() {
        let es: Vec<f64> = (0..64).map(f64::from).collect();
        assert_eq!(per_energy(&es, |e| Ok(2.0 * e)).unwrap(), es.iter().map(|e| 2.0 * e).collect::<Vec<_>>());
        let err = per_energy(&es, |e| if e >= 10.0 { Err(input(format!("{e}"))) } else { Ok(e) }).unwrap_err();
        assert_eq!(err, input("10"));
    }

    #[test]
    fn bench_lattice_is_periodic() {
        let p = bench_lattice(8).unwrap();
        assert!((p.evaluate(0.3) - p.evaluate(5.3)).abs() < 1e-12);
        assert!(matches!(bench_lattice(0), Err(CliError::Input(_))));
    }
}
